//! Minimal dense numerical kernel: layers with hand-written backward passes,
//! binary cross-entropy, Adam and finite-difference gradient checking.

pub mod adam;
pub mod checkpoint;
pub mod conv;
pub mod gradcheck;
pub mod layers;
pub mod loss;
pub mod lstm;
pub mod param;
pub mod tensor;

pub use adam::Adam;
pub use checkpoint::{Checkpoint, NamedArray};
pub use conv::{max_pool2d, max_pool2d_backward, Conv2d};
pub use gradcheck::{grad_check, GradCheckReport, GradCheckable};
pub use layers::{relu, relu_backward, Dense, Embedding};
pub use loss::{bce_loss, bce_with_logit};
pub use lstm::{LstmCell, LstmState};
pub use param::{Module, Param};
pub use tensor::Tensor;
