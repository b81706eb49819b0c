//! End-to-end runs: split and schema fitting, the two training stages,
//! evaluation per ablation mode, checkpoint bundles and the paper-scale
//! shape check.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{split_chronological, Corpus, DatasetSplit};
use crate::error::{Error, Result};
use crate::explicit::{
    encode_corpus, train_explicit, EncodedCorpus, ExplicitConfig, ExplicitInput, ExplicitModel, ExplicitModelConfig,
    TextCnnConfig,
};
use crate::extraction::{DocKind, EntitySchema, FeatureSchema, SparseFeature, TextDims, TextMatrix};
use crate::fusion::{train_lr, LogisticRegression, LrConfig, MetricsReport, Mode};
use crate::implicit::{
    train_implicit, FrozenExplicit, ImplicitConfig, ImplicitModel, CANDIDATE_SECTION, POST_SECTION,
};
use crate::io_util::config_hash;
use crate::neural::Checkpoint;
use crate::scalar::sigmoid;
use crate::train::{TrainHyper, TrainLog};

/// Validation and test fractions of the chronological split.
pub const HOLDOUT_FRACTION: f64 = 1.0 / 7.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Desk,
    Paper,
}

impl std::str::FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Scale::Desk),
            "paper" => Ok(Scale::Paper),
            _ => Err(Error::Config(format!("unknown scale `{s}`; expected desk or paper"))),
        }
    }
}

impl Scale {
    pub fn d_e(self) -> usize {
        match self {
            Scale::Desk => 32,
            Scale::Paper => 128,
        }
    }

    pub fn batch_size(self) -> usize {
        match self {
            Scale::Desk => 64,
            Scale::Paper => 512,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub scale: Scale,
    pub explicit: TrainHyper,
    pub implicit: TrainHyper,
    pub implicit_hidden: usize,
    pub implicit_d_i: usize,
    pub lr_baseline: TrainHyper,
    /// Seeds every model initialisation and batch order.
    pub seed: u64,
}

impl PipelineConfig {
    pub fn new(scale: Scale, seed: u64) -> Self {
        let batch_size = scale.batch_size();
        PipelineConfig {
            scale,
            explicit: TrainHyper {
                epochs: 15,
                batch_size,
                lr: 0.005,
                weight_decay: 1e-5,
                seed,
            },
            implicit: TrainHyper {
                epochs: 4,
                batch_size,
                lr: 0.001,
                weight_decay: 1e-4,
                seed,
            },
            implicit_hidden: 64,
            implicit_d_i: 64,
            lr_baseline: TrainHyper {
                epochs: 15,
                batch_size,
                lr: 0.005,
                weight_decay: 1e-5,
                seed,
            },
            seed,
        }
    }

    pub fn explicit_model_config(&self, schema: &FeatureSchema, use_text: bool) -> ExplicitModelConfig {
        let mut cfg = ExplicitModelConfig::for_schema(schema, use_text);
        cfg.resume.d_e = self.scale.d_e();
        cfg.post.d_e = self.scale.d_e();
        cfg
    }

    pub fn implicit_config(&self, d_e: usize) -> ImplicitConfig {
        ImplicitConfig {
            hidden: self.implicit_hidden,
            d_i: self.implicit_d_i,
            ..ImplicitConfig::new(d_e)
        }
    }

    fn stage_seed(&self, stage: u64) -> u64 {
        self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(stage)
    }
}

/// Split, fitted schema and encoded model inputs of one corpus.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub split: DatasetSplit,
    pub schema: FeatureSchema,
    pub data: EncodedCorpus,
}

pub fn text_dims() -> TextDims {
    TextCnnConfig::desk(1).dims
}

pub fn prepare(corpus: &Corpus) -> Result<Prepared> {
    let split = split_chronological(corpus.len(), HOLDOUT_FRACTION, HOLDOUT_FRACTION)?;
    let schema = FeatureSchema::fit(corpus, &split)?;
    let data = encode_corpus(corpus, &schema, text_dims());
    Ok(Prepared { split, schema, data })
}

pub fn prepare_with_schema(corpus: &Corpus, schema: FeatureSchema) -> Result<Prepared> {
    let split = split_chronological(corpus.len(), HOLDOUT_FRACTION, HOLDOUT_FRACTION)?;
    let data = encode_corpus(corpus, &schema, text_dims());
    Ok(Prepared { split, schema, data })
}

/// Explicit towers plus, after the second stage, implicit towers.
#[derive(Debug, Clone)]
pub struct ModelBundle {
    pub explicit: ExplicitModel,
    pub implicit: Option<ImplicitModel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleConfig {
    pub explicit: ExplicitModelConfig,
    pub implicit: Option<ImplicitConfig>,
    /// Hash of the feature schema the towers were trained against.
    pub schema_hash: String,
}

impl ModelBundle {
    pub fn config(&self, schema: &FeatureSchema) -> BundleConfig {
        BundleConfig {
            explicit: self.explicit.config(),
            implicit: self.implicit.as_ref().map(|m| m.config.clone()),
            schema_hash: config_hash(schema),
        }
    }

    pub fn to_checkpoint(&self, schema: &FeatureSchema) -> Checkpoint {
        let mut ck = Checkpoint::new(&self.config(schema));
        ck.add_module(&self.explicit);
        if let Some(im) = &self.implicit {
            ck.add_module(im);
        }
        ck
    }

    pub fn save(&self, path: &Path, schema: &FeatureSchema) -> Result<()> {
        self.to_checkpoint(schema).save(path)
    }

    pub fn from_checkpoint(ck: &Checkpoint, schema: &FeatureSchema) -> Result<Self> {
        let cfg: BundleConfig = ck.config_as()?;
        if cfg.schema_hash != config_hash(schema) {
            return Err(Error::Checkpoint(
                "checkpoint was trained against a different feature schema".into(),
            ));
        }
        let mut explicit = ExplicitModel::new(&cfg.explicit, 0)?;
        ck.load_into(&mut explicit)?;
        let implicit = match &cfg.implicit {
            Some(icfg) if ck.has_section(CANDIDATE_SECTION) && ck.has_section(POST_SECTION) => {
                let mut im = ImplicitModel::new(icfg, 0)?;
                ck.load_into(&mut im)?;
                Some(im)
            }
            Some(_) => return Err(Error::Checkpoint("implicit configuration without implicit parameters".into())),
            None => None,
        };
        Ok(ModelBundle { explicit, implicit })
    }

    pub fn load(path: &Path, schema: &FeatureSchema) -> Result<Self> {
        Self::from_checkpoint(&Checkpoint::load(path)?, schema)
    }
}

pub fn train_explicit_stage(
    corpus: &Corpus,
    prepared: &Prepared,
    config: &PipelineConfig,
    use_text: bool,
) -> Result<(ExplicitModel, TrainLog)> {
    let mcfg = config.explicit_model_config(&prepared.schema, use_text);
    let mut model = ExplicitModel::new(&mcfg, config.stage_seed(1))?;
    let log = train_explicit(&mut model, corpus, &prepared.split, &prepared.data, &config.explicit)?;
    Ok((model, log))
}

pub fn train_implicit_stage(
    corpus: &Corpus,
    prepared: &Prepared,
    config: &PipelineConfig,
    explicit: &ExplicitModel,
) -> Result<(ImplicitModel, TrainLog)> {
    let frozen = FrozenExplicit::from_model(explicit, &prepared.data)?;
    let mut model = ImplicitModel::new(&config.implicit_config(frozen.d_e), config.stage_seed(2))?;
    let log = train_implicit(&mut model, corpus, &prepared.split, &frozen, &config.implicit)?;
    Ok((model, log))
}

/// The two logits behind one match score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreParts {
    /// `f_Eᵀg_E`.
    pub explicit: f64,
    /// `f_Iᵀg_I`, present for fused modes only.
    pub implicit: Option<f64>,
}

impl ScoreParts {
    pub fn logit(&self) -> f64 {
        self.explicit + self.implicit.unwrap_or(0.0)
    }

    pub fn score(&self) -> f64 {
        sigmoid(self.logit())
    }
}

fn check_mode(bundle: &ModelBundle, mode: Mode) -> Result<()> {
    if mode.uses_text() != bundle.explicit.config().uses_text() {
        return Err(Error::Checkpoint(format!(
            "mode {mode} needs explicit towers {} the text branch",
            if mode.uses_text() { "with" } else { "without" }
        )));
    }
    if mode.uses_implicit() && bundle.implicit.is_none() {
        return Err(Error::Checkpoint(format!("mode {mode} needs trained implicit towers")));
    }
    Ok(())
}

/// Logit components of every record in `range` under `mode`.
pub fn score_records(
    corpus: &Corpus,
    prepared: &Prepared,
    bundle: &ModelBundle,
    mode: Mode,
    range: std::ops::Range<usize>,
) -> Result<Vec<ScoreParts>> {
    check_mode(bundle, mode)?;
    if range.end > corpus.len() {
        return Err(Error::Config(format!(
            "records {range:?} out of range for a corpus of {}",
            corpus.len()
        )));
    }
    let frozen = FrozenExplicit::from_model(&bundle.explicit, &prepared.data)?;
    let implicit = match (&bundle.implicit, mode.uses_implicit()) {
        (Some(im), true) => Some(im.logits(corpus, &frozen, range.clone())?),
        _ => None,
    };
    Ok(range
        .enumerate()
        .map(|(k, i)| ScoreParts {
            explicit: frozen.logit(corpus, i),
            implicit: implicit.as_ref().map(|l| l[k]),
        })
        .collect())
}

/// Match scores `σ(f_Eᵀg_E (+ f_Iᵀg_I))` of the validation and test blocks.
pub fn mode_scores(
    corpus: &Corpus,
    prepared: &Prepared,
    bundle: &ModelBundle,
    mode: Mode,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let split = &prepared.split;
    let scores = |r: std::ops::Range<usize>| -> Result<Vec<f64>> {
        Ok(score_records(corpus, prepared, bundle, mode, r)?.iter().map(ScoreParts::score).collect())
    };
    Ok((scores(split.validation.clone())?, scores(split.test.clone())?))
}

/// Test metrics of one mode at validation-tuned operating points.
pub fn evaluate(corpus: &Corpus, prepared: &Prepared, bundle: &ModelBundle, mode: Mode) -> Result<MetricsReport> {
    let (val, test) = mode_scores(corpus, prepared, bundle, mode)?;
    let split = &prepared.split;
    let hash = config_hash(&(mode, bundle.config(&prepared.schema), &corpus.manifest));
    MetricsReport::from_scores(
        mode.as_str(),
        (&val, &labels(corpus, split.validation.clone())),
        (&test, &labels(corpus, split.test.clone())),
        hash,
    )
}

pub fn labels(corpus: &Corpus, range: std::ops::Range<usize>) -> Vec<bool> {
    corpus.records[range].iter().map(|r| r.label).collect()
}

pub fn lr_baseline(corpus: &Corpus, prepared: &Prepared, config: &PipelineConfig) -> Result<MetricsReport> {
    let lcfg = LrConfig {
        resume_dim: prepared.schema.resume.sparse_dim(),
        post_dim: prepared.schema.post.sparse_dim(),
    };
    let mut model = LogisticRegression::new(&lcfg);
    train_lr(&mut model, corpus, &prepared.split, &prepared.data, &config.lr_baseline)?;
    let split = &prepared.split;
    MetricsReport::from_scores(
        "lr",
        (
            &model.scores(&prepared.data, corpus, split.validation.clone()),
            &labels(corpus, split.validation.clone()),
        ),
        (
            &model.scores(&prepared.data, corpus, split.test.clone()),
            &labels(corpus, split.test.clone()),
        ),
        config_hash(&(lcfg, &config.lr_baseline, &corpus.manifest)),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    /// In [`Mode::ALL`] order.
    pub modes: Vec<MetricsReport>,
    pub lr: Option<MetricsReport>,
}

impl AblationReport {
    pub fn get(&self, mode: Mode) -> Option<&MetricsReport> {
        self.modes.iter().find(|r| r.model == mode.as_str())
    }

    pub fn table(&self) -> String {
        let mut out = MetricsReport::table_header();
        for r in self.modes.iter().chain(&self.lr) {
            out.push('\n');
            out.push_str(&r.table_row());
        }
        out
    }
}

/// Trains both explicit variants and an implicit stage on each, then
/// evaluates all four modes (and the LR baseline when asked).
pub fn run_ablation(corpus: &Corpus, prepared: &Prepared, config: &PipelineConfig, with_lr: bool) -> Result<AblationReport> {
    let mut modes = Vec::with_capacity(4);
    for use_text in [false, true] {
        let (explicit, _) = train_explicit_stage(corpus, prepared, config, use_text)?;
        let (implicit, _) = train_implicit_stage(corpus, prepared, config, &explicit)?;
        let bundle = ModelBundle {
            explicit,
            implicit: Some(implicit),
        };
        let (plain, fused) = if use_text {
            (Mode::ExplicitBoth, Mode::FusedBoth)
        } else {
            (Mode::EntityOnly, Mode::FusedEntity)
        };
        modes.push(evaluate(corpus, prepared, &bundle, plain)?);
        modes.push(evaluate(corpus, prepared, &bundle, fused)?);
    }
    modes.sort_by_key(|r| Mode::ALL.iter().position(|m| m.as_str() == r.model));
    let lr = if with_lr {
        Some(lr_baseline(corpus, prepared, config)?)
    } else {
        None
    };
    Ok(AblationReport { modes, lr })
}

/// Published schema sizes: `s` and `d_x` per side.
pub const PAPER_RESUME_SCHEMA: (usize, usize) = (264, 37_000);
pub const PAPER_POST_SCHEMA: (usize, usize) = (57, 1_600);
/// Word vocabulary used for the paper-scale shape check.
pub const PAPER_SHAPE_VOCAB: usize = 5_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeReport {
    pub scale: Scale,
    pub resume_s: usize,
    pub resume_d_x: usize,
    pub post_s: usize,
    pub post_d_x: usize,
    pub f_e: usize,
    pub g_e: usize,
    pub history_item: usize,
    pub f_i: usize,
    pub g_i: usize,
    pub fused: usize,
}

fn random_input(schema: &EntitySchema, text: &TextCnnConfig, rng: &mut ChaCha8Rng) -> ExplicitInput {
    let slots = schema
        .offsets()
        .into_iter()
        .zip(&schema.fields)
        .map(|(o, f)| (o + rng.random_range(0..f.width()), 1.0))
        .collect();
    let n = text.dims.max_sentences * text.dims.max_words;
    ExplicitInput {
        sparse: SparseFeature {
            dim: schema.sparse_dim(),
            slots,
        },
        text: TextMatrix {
            dims: text.dims,
            indices: (0..n).map(|_| rng.random_range(0..text.vocab_size)).collect(),
        },
    }
}

/// Builds every tower at the requested scale over synthetic schemas and
/// runs one forward pass each. No training.
pub fn shape_check(scale: Scale, seed: u64) -> Result<ShapeReport> {
    let (resume, post) = match scale {
        Scale::Paper => (
            EntitySchema::synthetic(DocKind::Resume, PAPER_RESUME_SCHEMA.0, PAPER_RESUME_SCHEMA.1),
            EntitySchema::synthetic(DocKind::Post, PAPER_POST_SCHEMA.0, PAPER_POST_SCHEMA.1),
        ),
        Scale::Desk => (
            EntitySchema::synthetic(DocKind::Resume, 24, 200),
            EntitySchema::synthetic(DocKind::Post, 12, 80),
        ),
    };
    let config = PipelineConfig::new(scale, seed);
    let text = TextCnnConfig::desk(PAPER_SHAPE_VOCAB);
    let tower = |s: &EntitySchema| ExplicitConfig {
        s: s.len(),
        d_x: s.sparse_dim(),
        d_fm: 7,
        d_e: scale.d_e(),
        deep_widths: Vec::new(),
        text: Some(text.clone()),
    };
    let mcfg = ExplicitModelConfig {
        resume: tower(&resume),
        post: tower(&post),
    };
    let explicit = ExplicitModel::<f64>::new(&mcfg, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f_e = explicit.resume.embed(&random_input(&resume, &text, &mut rng))?;
    let g_e = explicit.post.embed(&random_input(&post, &text, &mut rng))?;
    let icfg = config.implicit_config(f_e.len());
    let implicit = ImplicitModel::<f64>::new(&icfg, seed)?;
    let item = crate::implicit::encode_item(&crate::implicit::HistoryEntry {
        resume: &f_e,
        post: &g_e,
        decision: crate::implicit::Decision::Accept,
    });
    let f_i = implicit.candidate.embed(&vec![item.clone(); icfg.max_candidate_history])?;
    let g_i = implicit.post.embed(&vec![item.clone(); icfg.max_post_history])?;
    let fused = crate::fusion::FusedEmbedding::new(&f_e, &f_i, &g_e, &g_i)?;
    Ok(ShapeReport {
        scale,
        resume_s: resume.len(),
        resume_d_x: resume.sparse_dim(),
        post_s: post.len(),
        post_d_x: post.sparse_dim(),
        f_e: f_e.len(),
        g_e: g_e.len(),
        history_item: item.len(),
        f_i: f_i.len(),
        g_i: g_i.len(),
        fused: fused.candidate.len(),
    })
}
