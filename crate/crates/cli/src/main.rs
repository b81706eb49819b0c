//! `pjfit`: corpus generation, schema fitting, two-stage training,
//! evaluation, scoring and entity-level explanations.

mod commands;
mod explain;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pjfit_core::fusion::Mode;
use pjfit_core::pipeline::Scale;

#[derive(Debug, Parser)]
#[command(name = "pjfit", version, about = "Person-job fit from explicit and implicit features")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic corpus with planted explicit and drift signal.
    Generate(GenerateArgs),
    /// Fit the entity schema and word vocabulary on the training split.
    Extract(ExtractArgs),
    /// Train the explicit towers.
    TrainExplicit(TrainExplicitArgs),
    /// Train the implicit towers on top of frozen explicit towers.
    TrainImplicit(TrainImplicitArgs),
    /// Test metrics of one mode at validation-tuned thresholds.
    Eval(EvalArgs),
    /// Match scores of one record or of the whole test block.
    Score(ScoreArgs),
    /// Score of one application with both documents' entities side by side.
    Explain(ExplainArgs),
    /// Train and evaluate the logistic-regression baseline.
    Baseline(BaselineArgs),
    /// Train every variant and print the ablation table.
    Ablation(AblationArgs),
    /// Build every tower at the requested scale and run one forward pass.
    Shapes(ShapesArgs),
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long)]
    seed: u64,
    /// Records file; posts, manifest and truth sidecars are written next to it.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 2000)]
    candidates: usize,
    #[arg(long, default_value_t = 20)]
    posts: usize,
    #[arg(long, default_value_t = 7000)]
    applications: usize,
    /// Bar drift strength δ.
    #[arg(long, default_value_t = 0.0)]
    drift: f64,
    /// Label flip probability ε.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
}

#[derive(Debug, Args)]
struct ExtractArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long = "schema-out", visible_alias = "out")]
    schema_out: PathBuf,
}

/// Corpus plus an optional fitted schema; without `--schema` the schema is
/// refitted from the corpus, which gives the same result every time.
#[derive(Debug, Args)]
struct DataArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    schema: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct HyperArgs {
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long = "weight-decay")]
    weight_decay: Option<f64>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long, default_value = "desk")]
    scale: Scale,
}

#[derive(Debug, Args)]
struct TrainExplicitArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// `entity-only` or `explicit-both`.
    #[arg(long, default_value = "explicit-both")]
    mode: Mode,
    #[command(flatten)]
    hyper: HyperArgs,
}

#[derive(Debug, Args)]
struct TrainImplicitArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    seed: u64,
    #[arg(long = "explicit-checkpoint")]
    explicit_checkpoint: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    hyper: HyperArgs,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    mode: Mode,
    /// Report JSON destination.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    checkpoint: PathBuf,
    /// Defaults to the richest mode the checkpoint supports.
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long)]
    record: Option<usize>,
    /// JSONL destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExplainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long)]
    record: usize,
}

#[derive(Debug, Args)]
struct BaselineArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    hyper: HyperArgs,
}

#[derive(Debug, Args)]
struct AblationArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "desk")]
    scale: Scale,
    /// Epochs for both stages.
    #[arg(long)]
    epochs: Option<usize>,
}

#[derive(Debug, Args)]
struct ShapesArgs {
    #[arg(long, default_value = "paper")]
    scale: Scale,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(pjfit_core::Error),
}

impl From<pjfit_core::Error> for CliError {
    fn from(e: pjfit_core::Error) -> Self {
        match e {
            pjfit_core::Error::Config(m) => CliError::Usage(m),
            other => CliError::Core(other),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

fn configure_threads() -> CliResult {
    let Ok(raw) = std::env::var("PJFIT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::Usage(format!("PJFIT_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size the thread pool: {e}")))
}

fn run(cli: Cli) -> CliResult {
    configure_threads()?;
    match cli.command {
        Command::Generate(a) => commands::generate(&a),
        Command::Extract(a) => commands::extract(&a),
        Command::TrainExplicit(a) => commands::train_explicit(&a),
        Command::TrainImplicit(a) => commands::train_implicit(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::Score(a) => commands::score(&a),
        Command::Explain(a) => commands::explain(&a),
        Command::Baseline(a) => commands::baseline(&a),
        Command::Ablation(a) => commands::ablation(&a),
        Command::Shapes(a) => commands::shapes(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pjfit: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
