use pjfit_core::explicit::{
    fm_second_order, ExplicitConfig, ExplicitInput, ExplicitModel, ExplicitModelConfig, TextCnn, TextCnnConfig,
};
use pjfit_core::extraction::{SparseFeature, TextDims, TextMatrix};
use pjfit_core::neural::{bce_with_logit, grad_check, GradCheckable, Module, Param, Tensor};
use pjfit_core::scalar::{dot, sigmoid};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn toy_tower(s: usize, d_x: usize, text: Option<TextCnnConfig>) -> ExplicitConfig {
    ExplicitConfig {
        s,
        d_x,
        d_fm: 2,
        d_e: 4,
        deep_widths: vec![5],
        text,
    }
}

fn toy_text(dims: TextDims) -> TextCnnConfig {
    TextCnnConfig {
        dims,
        vocab_size: 6,
        word_dim: 3,
        channels: 2,
        kernel_height: 3,
        pool_height: 2,
        out_dim: 3,
    }
}

struct PairProbe {
    model: ExplicitModel<f64>,
    resume: ExplicitInput,
    post: ExplicitInput,
    label: bool,
}

impl GradCheckable<f64> for PairProbe {
    fn params_mut(&mut self) -> Vec<&mut Param<f64>> {
        self.model.params_mut()
    }

    fn loss(&self) -> f64 {
        let f = self.model.resume.embed(&self.resume).unwrap();
        let g = self.model.post.embed(&self.post).unwrap();
        bce_with_logit(dot(&f, &g), self.label).0
    }

    fn loss_and_grad(&mut self) -> f64 {
        let (f, fc) = self.model.resume.forward(&self.resume).unwrap();
        let (g, gc) = self.model.post.forward(&self.post).unwrap();
        let (loss, dz) = bce_with_logit(dot(&f, &g), self.label);
        let df: Vec<f64> = g.iter().map(|v| v * dz).collect();
        let dg: Vec<f64> = f.iter().map(|v| v * dz).collect();
        self.model.resume.backward(&fc, &df);
        self.model.post.backward(&gc, &dg);
        loss
    }
}

fn sparse(slots: &[(usize, f64)], dim: usize) -> SparseFeature {
    SparseFeature {
        dim,
        slots: slots.to_vec(),
    }
}

#[test]
fn full_explicit_toy_model_passes_grad_check() {
    let dims = TextDims {
        max_sentences: 2,
        max_words: 3,
    };
    let cfg = ExplicitModelConfig {
        resume: toy_tower(3, 7, Some(toy_text(dims))),
        post: toy_tower(3, 6, Some(toy_text(dims))),
    };
    for label in [true, false] {
        let mut probe = PairProbe {
            model: ExplicitModel::new(&cfg, 11).unwrap(),
            resume: ExplicitInput {
                sparse: sparse(&[(1, 1.0), (3, 1.0), (6, -0.7)], 7),
                text: TextMatrix {
                    dims,
                    indices: vec![2, 3, 4, 5, 1, 0],
                },
            },
            post: ExplicitInput {
                sparse: sparse(&[(0, 1.0), (4, 1.3), (5, 1.0)], 6),
                text: TextMatrix {
                    dims,
                    indices: vec![3, 2, 0, 4, 4, 5],
                },
            },
            label,
        };
        let report = grad_check(&mut probe, 1e-5, 1e-4);
        assert!(report.passed(), "{:?}", report.worst());
    }
}

struct TextProbe {
    cnn: TextCnn<f64>,
    text: TextMatrix,
    readout: Vec<f64>,
}

impl GradCheckable<f64> for TextProbe {
    fn params_mut(&mut self) -> Vec<&mut Param<f64>> {
        self.cnn.params_mut()
    }

    fn loss(&self) -> f64 {
        dot(&self.cnn.forward(&self.text).unwrap().0, &self.readout)
    }

    fn loss_and_grad(&mut self) -> f64 {
        let (out, cache) = self.cnn.forward(&self.text).unwrap();
        self.cnn.backward(&cache, &self.readout);
        dot(&out, &self.readout)
    }
}

#[test]
fn text_cnn_on_four_by_six_passes_grad_check() {
    let dims = TextDims {
        max_sentences: 4,
        max_words: 6,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut probe = TextProbe {
        cnn: TextCnn::new("t", toy_text(dims), &mut rng).unwrap(),
        text: TextMatrix {
            dims,
            indices: (0..24).map(|k| (k * 7 + 2) % 6).collect(),
        },
        readout: vec![0.7, -1.1, 0.4],
    };
    let report = grad_check(&mut probe, 1e-5, 1e-4);
    assert!(report.passed(), "{:?}", report.worst());
}

#[test]
fn entity_only_tower_ignores_text() {
    let cfg = ExplicitModelConfig {
        resume: toy_tower(2, 4, None),
        post: toy_tower(2, 4, None),
    };
    let m = ExplicitModel::<f64>::new(&cfg, 1).unwrap();
    let dims = TextDims {
        max_sentences: 1,
        max_words: 2,
    };
    let a = ExplicitInput {
        sparse: sparse(&[(0, 1.0), (2, 1.0)], 4),
        text: TextMatrix::all_pad(dims),
    };
    let mut b = a.clone();
    b.text.indices = vec![5, 3];
    assert_eq!(m.resume.embed(&a).unwrap(), m.resume.embed(&b).unwrap());
    let s = m.score(&a, &b).unwrap();
    assert!(s > 0.0 && s < 1.0);
}

fn pairwise_oracle(x: &SparseFeature, v: &Tensor<f64>) -> Vec<f64> {
    let d = v.shape()[1];
    let mut out = vec![0.0; d];
    for (a, &(i, xi)) in x.slots.iter().enumerate() {
        for (b, &(j, xj)) in x.slots.iter().enumerate() {
            if a == b {
                continue;
            }
            for k in 0..d {
                out[k] += v.row(i)[k] * v.row(j)[k] * xi * xj;
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn efficient_second_order_matches_pairwise_sum(
        d_fm in 1usize..=8,
        picks in proptest::collection::btree_map(0usize..40, -3.0f64..3.0, 1..=10),
        seed in any::<u64>(),
    ) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = Tensor::from_vec(&[40, d_fm], (0..40 * d_fm).map(|_| rng.random_range(-1.0..1.0)).collect());
        let x = SparseFeature { dim: 40, slots: picks.into_iter().collect() };
        let fast = fm_second_order(&x, &v, x.active()).unwrap();
        for (a, b) in fast.iter().zip(pairwise_oracle(&x, &v)) {
            prop_assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn embedding_length_is_d_e_and_finite(seed in any::<u64>(), vals in proptest::collection::vec(-5.0f64..5.0, 3)) {
        let cfg = ExplicitModelConfig { resume: toy_tower(3, 9, None), post: toy_tower(3, 9, None) };
        let m = ExplicitModel::<f64>::new(&cfg, seed).unwrap();
        let input = ExplicitInput {
            sparse: sparse(&[(0, vals[0]), (4, vals[1]), (8, vals[2])], 9),
            text: TextMatrix::all_pad(TextDims { max_sentences: 1, max_words: 1 }),
        };
        let e = m.post.embed(&input).unwrap();
        prop_assert_eq!(e.len(), 4);
        prop_assert!(e.iter().all(|v| v.is_finite()));
        prop_assert!(sigmoid(dot(&e, &e)) >= 0.5);
    }
}

#[test]
fn single_precision_tower_tracks_double_precision() {
    let cfg = ExplicitModelConfig {
        resume: toy_tower(3, 9, None),
        post: toy_tower(3, 9, None),
    };
    let wide = pjfit_core::Explicit::new(&cfg, 4).unwrap();
    let narrow = pjfit_core::ExplicitF32::new(&cfg, 4).unwrap();
    let input = ExplicitInput {
        sparse: sparse(&[(0, 1.0), (4, 0.5), (8, -1.0)], 9),
        text: TextMatrix::all_pad(TextDims {
            max_sentences: 1,
            max_words: 1,
        }),
    };
    let a = wide.resume.embed(&input).unwrap();
    let b = narrow.resume.embed(&input).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - f64::from(*y)).abs() < 1e-5, "{x} vs {y}");
    }
}
