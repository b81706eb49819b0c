use std::collections::BTreeMap;

use pjfit_core::corpus::{generate_synthetic, GeneratorConfig, PostId};
use pjfit_core::implicit::{
    encode_history, implicit_embed, item_width, Decision, FrozenExplicit, HistoryEntry, ImplicitConfig, ImplicitModel,
};
use pjfit_core::neural::{bce_with_logit, grad_check, GradCheckable, Module, Param};
use pjfit_core::scalar::dot;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn toy_config() -> ImplicitConfig {
    ImplicitConfig {
        d_e: 4,
        hidden: 8,
        d_i: 5,
        max_post_history: 3,
        max_candidate_history: 3,
    }
}

fn random_sequence(rng: &mut ChaCha8Rng, len: usize, width: usize) -> Vec<Vec<f64>> {
    (0..len)
        .map(|_| (0..width).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect()
}

struct ImplicitProbe {
    model: ImplicitModel,
    candidate: Vec<Vec<f64>>,
    post: Vec<Vec<f64>>,
    label: bool,
}

impl GradCheckable<f64> for ImplicitProbe {
    fn params_mut(&mut self) -> Vec<&mut Param<f64>> {
        self.model.params_mut()
    }

    fn loss(&self) -> f64 {
        let f = self.model.candidate.embed(&self.candidate).unwrap();
        let g = self.model.post.embed(&self.post).unwrap();
        bce_with_logit(dot(&f, &g), self.label).0
    }

    fn loss_and_grad(&mut self) -> f64 {
        let (f, fc) = self.model.candidate.forward(&self.candidate).unwrap();
        let (g, gc) = self.model.post.forward(&self.post).unwrap();
        let (loss, dz) = bce_with_logit(dot(&f, &g), self.label);
        let df: Vec<f64> = g.iter().map(|v| v * dz).collect();
        let dg: Vec<f64> = f.iter().map(|v| v * dz).collect();
        self.model.candidate.backward(&fc, &df);
        self.model.post.backward(&gc, &dg);
        loss
    }
}

#[test]
fn implicit_toy_model_passes_grad_check() {
    let cfg = toy_config();
    for (seed, label) in [(1u64, true), (2, false)] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut probe = ImplicitProbe {
            model: ImplicitModel::new(&cfg, seed).unwrap(),
            candidate: random_sequence(&mut rng, 3, cfg.item_width()),
            post: random_sequence(&mut rng, 3, cfg.item_width()),
            label,
        };
        let report = grad_check(&mut probe, 1e-5, 1e-4);
        assert!(report.passed(), "worst: {:?}", report.worst());
    }
}

#[test]
fn cold_start_embedding_is_shared_and_deterministic() {
    let cfg = toy_config();
    let model = ImplicitModel::<f64>::new(&cfg, 9).unwrap();
    let pad = encode_history::<f64>(&[], cfg.d_e, cfg.max_post_history);
    let a = implicit_embed(&pad, &model.post).unwrap();
    let b = implicit_embed(&pad.clone(), &model.post).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), cfg.d_i);
}

#[test]
fn identical_histories_give_identical_embeddings() {
    let cfg = toy_config();
    let model = ImplicitModel::<f64>::new(&cfg, 3).unwrap();
    let r = [0.1, -0.2, 0.3, 0.4];
    let p = [0.5, 0.0, -0.5, 1.0];
    let h = [HistoryEntry {
        resume: &r[..],
        post: &p[..],
        decision: Decision::Accept,
    }];
    let s1 = encode_history(&h, 4, 3);
    let s2 = encode_history(&h, 4, 3);
    assert_eq!(model.post.embed(&s1).unwrap(), model.post.embed(&s2).unwrap());
}

#[test]
fn wrong_sequence_length_is_a_shape_error() {
    let cfg = toy_config();
    let model = ImplicitModel::<f64>::new(&cfg, 3).unwrap();
    let short = encode_history::<f64>(&[], cfg.d_e, 2);
    let err = model.post.embed(&short).unwrap_err();
    assert!(matches!(err, pjfit_core::Error::Shape(_)), "{err}");
}

/// Each record's "embedding" is its own index, so every history item names
/// the record it came from.
#[test]
fn corpus_histories_exclude_the_query_and_keep_the_latest() {
    let corpus = generate_synthetic(
        &GeneratorConfig {
            candidates: 40,
            posts: 5,
            applications: 400,
            ..GeneratorConfig::default()
        },
        4,
    )
    .unwrap();
    let frozen = FrozenExplicit {
        d_e: 1,
        resumes: (0..corpus.len()).map(|i| vec![i as f64 + 1.0]).collect(),
        posts: corpus
            .posts
            .keys()
            .map(|p| (*p, vec![-(p.0 as f64) - 1.0]))
            .collect::<BTreeMap<PostId, _>>(),
    };
    let cfg = ImplicitConfig::new(1);
    for i in 0..corpus.len() {
        let (post_seq, cand_seq) = frozen.sequences(&corpus, i, &cfg);
        let (post_hist, cand_hist) = corpus.history_before(i);
        for (seq, hist, max) in [
            (&post_seq, post_hist, cfg.max_post_history),
            (&cand_seq, cand_hist, cfg.max_candidate_history),
        ] {
            assert_eq!(seq.len(), max);
            let named: Vec<usize> = seq.iter().filter(|x| x[0] != 0.0).map(|x| x[0] as usize - 1).collect();
            assert!(!named.contains(&i), "record {i} appears in its own history");
            assert_eq!(named, hist[hist.len().saturating_sub(max)..].to_vec());
            for (x, &k) in seq[max - named.len()..].iter().zip(&named) {
                let d = Decision::from_label(corpus.records[k].label).onehot();
                assert_eq!([x[1], x[2]], d);
            }
        }
    }
}

fn arb_history() -> impl Strategy<Value = (usize, usize, Vec<(Vec<f64>, Vec<f64>, bool)>)> {
    (1usize..4, 1usize..25).prop_flat_map(|(d_e, max_len)| {
        let item = (
            prop::collection::vec(0.5f64..2.0, d_e),
            prop::collection::vec(0.5f64..2.0, d_e),
            any::<bool>(),
        );
        (Just(d_e), Just(max_len), prop::collection::vec(item, 0..30))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn encoded_history_has_fixed_length_and_keeps_the_latest((d_e, max_len, items) in arb_history()) {
        let entries: Vec<HistoryEntry<'_>> = items
            .iter()
            .map(|(r, p, l)| HistoryEntry { resume: r, post: p, decision: Decision::from_label(*l) })
            .collect();
        let seq = encode_history(&entries, d_e, max_len);
        prop_assert_eq!(seq.len(), max_len);
        let kept = items.len().min(max_len);
        let pads = max_len - kept;
        for x in &seq[..pads] {
            prop_assert_eq!(x.len(), item_width(d_e));
            prop_assert!(x.iter().all(|&v| v == 0.0));
            prop_assert_eq!(Decision::from_onehot([x[d_e], x[d_e + 1]]), Some(Decision::Pad));
        }
        for (x, (r, p, l)) in seq[pads..].iter().zip(&items[items.len() - kept..]) {
            prop_assert_eq!(x.len(), item_width(d_e));
            prop_assert_eq!(&x[..d_e], &r[..]);
            prop_assert_eq!(&x[d_e + 2..], &p[..]);
            prop_assert_eq!(Decision::from_onehot([x[d_e], x[d_e + 1]]), Some(Decision::from_label(*l)));
        }
    }
}
