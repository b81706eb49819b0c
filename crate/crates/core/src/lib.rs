pub mod corpus;
pub mod error;
pub mod explicit;
pub mod extraction;
pub mod fusion;
pub mod implicit;
pub mod io_util;
pub mod neural;
pub mod pipeline;
pub mod scalar;
pub mod train;

pub use error::{Error, Result};

/// Scalar every pipeline stage trains and reports in.
pub type Real = f64;

pub type Explicit = explicit::ExplicitModel<Real>;
pub type Implicit = implicit::ImplicitModel<Real>;
pub type Tensor = neural::Tensor<Real>;

/// Single-precision towers, for inference experiments only; gradient checks
/// and training assume [`Real`].
pub type ExplicitF32 = explicit::ExplicitModel<f32>;
pub type ImplicitF32 = implicit::ImplicitModel<f32>;
