use std::io::Write;
use std::path::Path;

use pjfit_core::corpus::{corpus_paths, generate_synthetic, Corpus, GeneratorConfig};
use pjfit_core::extraction::FeatureSchema;
use pjfit_core::fusion::Mode;
use pjfit_core::io_util::write_atomic;
use pjfit_core::pipeline::{
    evaluate, lr_baseline, prepare, prepare_with_schema, run_ablation, score_records, shape_check,
    train_explicit_stage, train_implicit_stage, ModelBundle, PipelineConfig, Prepared,
};
use pjfit_core::train::{TrainHyper, TrainLog};

use crate::explain::render_explanation;
use crate::{
    AblationArgs, BaselineArgs, CliError, CliResult, DataArgs, EvalArgs, ExplainArgs, ExtractArgs, GenerateArgs,
    HyperArgs, ScoreArgs, ShapesArgs, TrainExplicitArgs, TrainImplicitArgs,
};

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn require_file(path: &Path, what: &str) -> CliResult {
    if path.is_file() {
        Ok(())
    } else {
        Err(usage(format!("{what} `{}` does not exist", path.display())))
    }
}

fn require_output(path: &Path) -> CliResult {
    if path.is_dir() {
        Err(usage(format!("output `{}` is a directory", path.display())))
    } else {
        Ok(())
    }
}

fn require_corpus(path: &Path) -> CliResult {
    let paths = corpus_paths(path);
    require_file(&paths.records, "corpus")?;
    require_file(&paths.posts, "corpus posts file")?;
    require_file(&paths.manifest, "corpus manifest")
}

fn check_data(data: &DataArgs) -> CliResult {
    require_corpus(&data.corpus)?;
    if let Some(s) = &data.schema {
        require_file(s, "schema")?;
    }
    Ok(())
}

fn load_data(data: &DataArgs) -> CliResult<(Corpus, Prepared)> {
    let corpus = Corpus::load(&data.corpus)?;
    let prepared = match &data.schema {
        Some(path) => prepare_with_schema(&corpus, FeatureSchema::load(path)?)?,
        None => prepare(&corpus)?,
    };
    Ok((corpus, prepared))
}

fn apply_overrides(hyper: &mut TrainHyper, args: &HyperArgs) -> CliResult {
    if let Some(e) = args.epochs {
        hyper.epochs = e;
    }
    if let Some(lr) = args.lr {
        hyper.lr = lr;
    }
    if let Some(wd) = args.weight_decay {
        hyper.weight_decay = wd;
    }
    if let Some(b) = args.batch {
        hyper.batch_size = b;
    }
    let lr_ok = hyper.lr.is_finite() && hyper.lr > 0.0;
    let wd_ok = hyper.weight_decay.is_finite() && hyper.weight_decay >= 0.0;
    if hyper.epochs == 0 || hyper.batch_size == 0 || !lr_ok || !wd_ok {
        return Err(usage("epochs and batch must be ≥ 1, lr > 0 and weight decay ≥ 0"));
    }
    Ok(())
}

fn print_log(stage: &str, log: &TrainLog) {
    for e in &log.epochs {
        println!(
            "{stage} epoch {:>3}  loss {:.5}  val AUC {:.4}",
            e.epoch, e.train_loss, e.val_auc
        );
    }
    println!("{stage} kept epoch {} (val AUC {:.4})", log.best_epoch, log.best_val_auc);
}

/// Writes to `out`, or to stdout when absent.
fn emit(out: Option<&Path>, text: &str) -> CliResult {
    match out {
        Some(path) => Ok(write_atomic(path, text.as_bytes())?),
        None => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn default_mode(bundle: &ModelBundle) -> Mode {
    match (bundle.explicit.config().uses_text(), bundle.implicit.is_some()) {
        (true, true) => Mode::FusedBoth,
        (true, false) => Mode::ExplicitBoth,
        (false, true) => Mode::FusedEntity,
        (false, false) => Mode::EntityOnly,
    }
}

pub fn generate(a: &GenerateArgs) -> CliResult {
    require_output(&a.out)?;
    let cfg = GeneratorConfig {
        candidates: a.candidates,
        posts: a.posts,
        applications: a.applications,
        drift: a.drift,
        label_noise: a.noise,
        ..GeneratorConfig::default()
    };
    cfg.validate()?;
    let corpus = generate_synthetic(&cfg, a.seed)?;
    corpus.save(&a.out)?;
    let accepted = corpus.records.iter().filter(|r| r.label).count();
    println!(
        "wrote {} applications over {} posts ({} accepted) to {}",
        corpus.len(),
        corpus.posts.len(),
        accepted,
        a.out.display()
    );
    Ok(())
}

pub fn extract(a: &ExtractArgs) -> CliResult {
    require_corpus(&a.corpus)?;
    require_output(&a.schema_out)?;
    let corpus = Corpus::load(&a.corpus)?;
    let prepared = prepare(&corpus)?;
    prepared.schema.save(&a.schema_out)?;
    let s = &prepared.schema;
    println!(
        "resume: s={} d_x={}; post: s={} d_x={}; words={}; schema written to {}",
        s.resume.len(),
        s.resume.sparse_dim(),
        s.post.len(),
        s.post.sparse_dim(),
        s.words.len(),
        a.schema_out.display()
    );
    Ok(())
}

pub fn train_explicit(a: &TrainExplicitArgs) -> CliResult {
    check_data(&a.data)?;
    require_output(&a.out)?;
    if a.mode.uses_implicit() {
        return Err(usage(format!(
            "train-explicit takes entity-only or explicit-both, not {}",
            a.mode
        )));
    }
    let mut cfg = PipelineConfig::new(a.hyper.scale, a.seed);
    apply_overrides(&mut cfg.explicit, &a.hyper)?;
    let (corpus, prepared) = load_data(&a.data)?;
    let (explicit, log) = train_explicit_stage(&corpus, &prepared, &cfg, a.mode.uses_text())?;
    print_log("explicit", &log);
    let bundle = ModelBundle {
        explicit,
        implicit: None,
    };
    bundle.save(&a.out, &prepared.schema)?;
    println!("checkpoint written to {}", a.out.display());
    Ok(())
}

pub fn train_implicit(a: &TrainImplicitArgs) -> CliResult {
    check_data(&a.data)?;
    require_file(&a.explicit_checkpoint, "explicit checkpoint")?;
    require_output(&a.out)?;
    let mut cfg = PipelineConfig::new(a.hyper.scale, a.seed);
    apply_overrides(&mut cfg.implicit, &a.hyper)?;
    let (corpus, prepared) = load_data(&a.data)?;
    let explicit = ModelBundle::load(&a.explicit_checkpoint, &prepared.schema)?.explicit;
    let (implicit, log) = train_implicit_stage(&corpus, &prepared, &cfg, &explicit)?;
    print_log("implicit", &log);
    let bundle = ModelBundle {
        explicit,
        implicit: Some(implicit),
    };
    bundle.save(&a.out, &prepared.schema)?;
    println!("checkpoint written to {}", a.out.display());
    Ok(())
}

pub fn eval(a: &EvalArgs) -> CliResult {
    check_data(&a.data)?;
    require_file(&a.checkpoint, "checkpoint")?;
    if let Some(out) = &a.out {
        require_output(out)?;
    }
    let (corpus, prepared) = load_data(&a.data)?;
    let bundle = ModelBundle::load(&a.checkpoint, &prepared.schema)?;
    let report = evaluate(&corpus, &prepared, &bundle, a.mode)?;
    println!("{}", pjfit_core::fusion::MetricsReport::table_header());
    println!("{}", report.table_row());
    match &a.out {
        Some(out) => {
            write_atomic(out, report.to_json().as_bytes())?;
            println!("report written to {}", out.display());
        }
        None => println!("{}", report.to_json()),
    }
    Ok(())
}

pub fn score(a: &ScoreArgs) -> CliResult {
    check_data(&a.data)?;
    require_file(&a.checkpoint, "checkpoint")?;
    if let Some(out) = &a.out {
        require_output(out)?;
    }
    let (corpus, prepared) = load_data(&a.data)?;
    let bundle = ModelBundle::load(&a.checkpoint, &prepared.schema)?;
    let mode = a.mode.unwrap_or_else(|| default_mode(&bundle));
    let range = match a.record {
        Some(r) if r >= corpus.len() => {
            return Err(usage(format!("record {r} out of range (corpus has {})", corpus.len())));
        }
        Some(r) => r..r + 1,
        None => prepared.split.test.clone(),
    };
    let parts = score_records(&corpus, &prepared, &bundle, mode, range.clone())?;
    let mut text = String::new();
    for (i, p) in range.zip(parts) {
        let rec = &corpus.records[i];
        let line = serde_json::json!({
            "record": i,
            "candidate": rec.candidate.0,
            "post": rec.post.0,
            "label": u8::from(rec.label),
            "mode": mode.as_str(),
            "score": p.score(),
            "explicit_logit": p.explicit,
            "implicit_logit": p.implicit,
        });
        text.push_str(&line.to_string());
        text.push('\n');
    }
    emit(a.out.as_deref(), &text)
}

pub fn explain(a: &ExplainArgs) -> CliResult {
    check_data(&a.data)?;
    require_file(&a.checkpoint, "checkpoint")?;
    let (corpus, prepared) = load_data(&a.data)?;
    if a.record >= corpus.len() {
        return Err(usage(format!(
            "record {} out of range (corpus has {})",
            a.record,
            corpus.len()
        )));
    }
    let bundle = ModelBundle::load(&a.checkpoint, &prepared.schema)?;
    let mode = a.mode.unwrap_or_else(|| default_mode(&bundle));
    let parts = score_records(&corpus, &prepared, &bundle, mode, a.record..a.record + 1)?[0];
    print!("{}", render_explanation(&corpus, &prepared.schema, a.record, mode, parts));
    Ok(())
}

pub fn baseline(a: &BaselineArgs) -> CliResult {
    check_data(&a.data)?;
    if let Some(out) = &a.out {
        require_output(out)?;
    }
    let mut cfg = PipelineConfig::new(a.hyper.scale, a.seed);
    apply_overrides(&mut cfg.lr_baseline, &a.hyper)?;
    let (corpus, prepared) = load_data(&a.data)?;
    let report = lr_baseline(&corpus, &prepared, &cfg)?;
    println!("{}", pjfit_core::fusion::MetricsReport::table_header());
    println!("{}", report.table_row());
    if let Some(out) = &a.out {
        write_atomic(out, report.to_json().as_bytes())?;
    }
    Ok(())
}

pub fn ablation(a: &AblationArgs) -> CliResult {
    check_data(&a.data)?;
    if let Some(out) = &a.out {
        require_output(out)?;
    }
    let mut cfg = PipelineConfig::new(a.scale, a.seed);
    if let Some(e) = a.epochs {
        if e == 0 {
            return Err(usage("epochs must be ≥ 1"));
        }
        cfg.explicit.epochs = e;
        cfg.implicit.epochs = e;
        cfg.lr_baseline.epochs = e;
    }
    let (corpus, prepared) = load_data(&a.data)?;
    let report = run_ablation(&corpus, &prepared, &cfg, true)?;
    println!("{}", report.table());
    if let Some(out) = &a.out {
        let all: Vec<_> = report.modes.iter().chain(&report.lr).collect();
        let json = serde_json::to_string_pretty(&all).expect("reports serialize");
        write_atomic(out, json.as_bytes())?;
    }
    Ok(())
}

pub fn shapes(a: &ShapesArgs) -> CliResult {
    let r = shape_check(a.scale, a.seed)?;
    println!(
        "resume s={} d_x={}; post s={} d_x={}",
        r.resume_s, r.resume_d_x, r.post_s, r.post_d_x
    );
    println!(
        "f_E={} g_E={} history item={} f_I={} g_I={} fused={}",
        r.f_e, r.g_e, r.history_item, r.f_i, r.g_i, r.fused
    );
    Ok(())
}
