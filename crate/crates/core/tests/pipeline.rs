use pjfit_core::corpus::{generate_synthetic, Corpus, GeneratorConfig};
use pjfit_core::fusion::Mode;
use pjfit_core::pipeline::{
    evaluate, prepare, shape_check, train_explicit_stage, train_implicit_stage, ModelBundle, PipelineConfig,
    Prepared, Scale,
};

fn small_corpus(seed: u64) -> Corpus {
    let cfg = GeneratorConfig {
        candidates: 150,
        posts: 8,
        applications: 700,
        drift: 0.5,
        ..GeneratorConfig::default()
    };
    generate_synthetic(&cfg, seed).unwrap()
}

fn quick_config() -> PipelineConfig {
    let mut cfg = PipelineConfig::new(Scale::Desk, 3);
    cfg.explicit.epochs = 2;
    cfg.implicit.epochs = 1;
    cfg.implicit_hidden = 8;
    cfg.implicit_d_i = 8;
    cfg
}

fn fused_bundle(corpus: &Corpus, prepared: &Prepared, cfg: &PipelineConfig) -> ModelBundle {
    let (explicit, _) = train_explicit_stage(corpus, prepared, cfg, true).unwrap();
    let (implicit, _) = train_implicit_stage(corpus, prepared, cfg, &explicit).unwrap();
    ModelBundle {
        explicit,
        implicit: Some(implicit),
    }
}

#[test]
fn large_scale_towers_have_the_target_shapes() {
    let r = shape_check(Scale::Paper, 1).unwrap();
    assert_eq!((r.resume_s, r.resume_d_x), (264, 37_000));
    assert_eq!((r.post_s, r.post_d_x), (57, 1_600));
    assert_eq!((r.f_e, r.g_e), (128, 128));
    assert_eq!(r.history_item, 258);
    assert_eq!((r.f_i, r.g_i), (64, 64));
    assert_eq!(r.fused, 192);
}

#[test]
fn full_pipeline_is_deterministic_and_checkpoints_round_trip() {
    let cfg = quick_config();
    let a = small_corpus(5);
    let b = small_corpus(5);
    assert_eq!(a, b);
    let pa = prepare(&a).unwrap();
    let pb = prepare(&b).unwrap();
    let ba = fused_bundle(&a, &pa, &cfg);
    let bb = fused_bundle(&b, &pb, &cfg);
    let ra = evaluate(&a, &pa, &ba, Mode::FusedBoth).unwrap();
    let rb = evaluate(&b, &pb, &bb, Mode::FusedBoth).unwrap();
    assert_eq!(ra, rb);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    ba.save(&path, &pa.schema).unwrap();
    let loaded = ModelBundle::load(&path, &pa.schema).unwrap();
    assert_eq!(evaluate(&a, &pa, &loaded, Mode::FusedBoth).unwrap(), ra);
    assert_eq!(
        evaluate(&a, &pa, &loaded, Mode::ExplicitBoth).unwrap(),
        evaluate(&a, &pa, &ba, Mode::ExplicitBoth).unwrap()
    );
}

#[test]
fn modes_refuse_mismatched_towers() {
    let cfg = quick_config();
    let corpus = small_corpus(6);
    let prepared = prepare(&corpus).unwrap();
    let (explicit, _) = train_explicit_stage(&corpus, &prepared, &cfg, false).unwrap();
    let bundle = ModelBundle {
        explicit,
        implicit: None,
    };
    assert!(evaluate(&corpus, &prepared, &bundle, Mode::EntityOnly).is_ok());
    for mode in [Mode::ExplicitBoth, Mode::FusedEntity, Mode::FusedBoth] {
        let err = evaluate(&corpus, &prepared, &bundle, mode).unwrap_err();
        assert!(matches!(err, pjfit_core::Error::Checkpoint(_)), "{mode}: {err}");
    }
}
