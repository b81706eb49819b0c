use std::collections::BTreeSet;

use pjfit_core::corpus::{generate_synthetic, split_chronological, GeneratorConfig};
use pjfit_core::extraction::lexicon::{lexicon, tier_for_rank};
use pjfit_core::extraction::rules::canonical_skills;
use pjfit_core::extraction::{DocKind, EntitySchema, EntityValue, EntityVector, FeatureSchema, FieldKind, OOV};
use proptest::prelude::*;

fn corpus_1k() -> pjfit_core::corpus::Corpus {
    let cfg = GeneratorConfig {
        candidates: 300,
        posts: 20,
        applications: 1000,
        ..GeneratorConfig::default()
    };
    generate_synthetic(&cfg, 21).unwrap()
}

#[test]
fn extracted_skills_equal_planted_skills() {
    let c = corpus_1k();
    let truth = c.truth.as_ref().unwrap();
    for (r, t) in c.records.iter().zip(&truth.records) {
        let got: BTreeSet<String> = canonical_skills(r.resume.entry("skills", "list")).into_iter().collect();
        let want: BTreeSet<String> = t.skills.iter().cloned().collect();
        assert_eq!(got, want);
    }
}

#[test]
fn u7_is_top50() {
    let rank = lexicon().university_rank("U7");
    assert_eq!(rank, Some(30));
    assert_eq!(tier_for_rank(rank), "top50");
}

#[test]
fn every_document_has_exactly_s_active_slots_within_d_x() {
    let c = corpus_1k();
    let split = split_chronological(c.len(), 0.15, 0.15).unwrap();
    let fs = FeatureSchema::fit(&c, &split).unwrap();
    for r in &c.records {
        let x = fs.resume.features(&r.resume);
        assert_eq!(x.active(), fs.resume.len());
        assert!(x.slots.windows(2).all(|w| w[0].0 < w[1].0));
        assert!(x.slots.last().unwrap().0 < fs.resume.sparse_dim());
    }
    for p in c.posts.values() {
        assert_eq!(fs.post.features(p).active(), fs.post.len());
    }
}

#[test]
fn standardized_reals_have_zero_mean_unit_variance_on_train() {
    let c = corpus_1k();
    let split = split_chronological(c.len(), 0.15, 0.15).unwrap();
    let fs = FeatureSchema::fit(&c, &split).unwrap();
    let offsets = fs.resume.offsets();
    for (k, f) in fs.resume.fields.iter().enumerate() {
        if !matches!(f.kind, FieldKind::Real { .. }) {
            continue;
        }
        let vals: Vec<f64> = c.records[split.train.clone()]
            .iter()
            .map(|r| {
                let x = fs.resume.features(&r.resume);
                let (i, v) = x.slots[k];
                assert_eq!(i, offsets[k]);
                v
            })
            .collect();
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() < 1e-9 && (var - 1.0).abs() < 1e-9, "{}: {mean} {var}", f.name);
    }
}

#[test]
fn schema_file_round_trips() {
    let c = corpus_1k();
    let split = split_chronological(c.len(), 0.15, 0.15).unwrap();
    let fs = FeatureSchema::fit(&c, &split).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("schema.json");
    fs.save(&path).unwrap();
    assert_eq!(FeatureSchema::load(&path).unwrap(), fs);
}

#[test]
fn encode_examples() {
    let schema = EntitySchema {
        doc_kind: DocKind::Resume,
        fields: vec![
            pjfit_core::extraction::EntityField {
                name: "c".into(),
                kind: FieldKind::Categorical {
                    vocabulary: vec!["a".into(), "b".into(), OOV.into()],
                },
            },
            pjfit_core::extraction::EntityField {
                name: "r".into(),
                kind: FieldKind::Real { mean: 3.0, stddev: 2.0 },
            },
        ],
    };
    let x = schema.encode(&EntityVector(vec![EntityValue::Category(1), EntityValue::Real(3.0)]));
    assert_eq!((x.dim, x.slots), (4, vec![(1, 1.0), (3, 0.0)]));
    let x = schema.encode(&EntityVector(vec![EntityValue::Category(0), EntityValue::Real(5.0)]));
    assert_eq!(x.slots, vec![(0, 1.0), (3, 1.0)]);
}

fn arb_schema() -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
    proptest::collection::vec(1usize..6, 1..8).prop_flat_map(|widths| {
        let picks = widths.iter().map(|&w| 0..w).collect::<Vec<_>>();
        (Just(widths), picks)
    })
}

proptest! {
    #[test]
    fn decode_inverts_encode_for_categorical_schemas((widths, picks) in arb_schema()) {
        let fields = widths
            .iter()
            .enumerate()
            .map(|(i, &w)| pjfit_core::extraction::EntityField {
                name: format!("f{i}"),
                kind: FieldKind::Categorical {
                    vocabulary: (0..w - 1).map(|k| format!("v{k}")).chain([OOV.to_string()]).collect(),
                },
            })
            .collect();
        let schema = EntitySchema { doc_kind: DocKind::Post, fields };
        let e = EntityVector(picks.into_iter().map(EntityValue::Category).collect());
        let x = schema.encode(&e);
        prop_assert_eq!(x.dim, widths.iter().sum::<usize>());
        prop_assert_eq!(schema.decode(&x), e);
    }
}
