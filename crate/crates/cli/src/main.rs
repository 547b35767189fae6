//! `shaftlab`: one binary for the whole pipeline.
//!
//! Exit codes: 0 on success, 1 when an input fails validation, 2 on an
//! internal error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use shaftlab_core::{Level, VerificationConfig, DEFAULT_GRID};
use shaftlab_data::harmony::Locale;
use shaftlab_data::tokenizer::DEFAULT_BPE_SIZE;
use shaftlab_eval::DEFAULT_REL_TOL;

#[derive(Parser, Debug)]
#[command(name = "shaftlab", version, about = "Timoshenko shaft analysis, dataset factory and evaluation harness")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Generation config (TOML).
    #[arg(long, global = true, env = "SHAFTLAB_CONFIG")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, env = "SHAFTLAB_SEED")]
    pub seed: Option<u64>,
    /// pt-BR or en.
    #[arg(long, global = true, env = "SHAFTLAB_LOCALE", value_parser = parse_locale)]
    pub locale: Option<Locale>,
    /// Output file or directory, depending on the subcommand.
    #[arg(long, global = true, env = "SHAFTLAB_OUT")]
    pub out: Option<PathBuf>,
    /// Print machine-readable JSON on stdout.
    #[arg(long, global = true, env = "SHAFTLAB_JSON")]
    pub json: bool,
    /// Worker threads for `generate`.
    #[arg(long, global = true, env = "SHAFTLAB_JOBS")]
    pub jobs: Option<usize>,
    #[arg(long, global = true, env = "SHAFTLAB_TOLERANCE_PROFILE", value_enum)]
    pub tolerance_profile: Option<ToleranceProfile>,
}

/// Verification tolerances: `strict` is ten times tighter than `default`,
/// `relaxed` ten times looser.
#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToleranceProfile {
    Strict,
    Default,
    Relaxed,
}

impl ToleranceProfile {
    pub fn config(self) -> VerificationConfig {
        let base = VerificationConfig::default();
        match self {
            ToleranceProfile::Strict => base.scaled(0.1),
            ToleranceProfile::Default => base,
            ToleranceProfile::Relaxed => base.scaled(10.0),
        }
    }
}

fn parse_locale(s: &str) -> Result<Locale, String> {
    Locale::parse(s).ok_or_else(|| format!("unknown locale {s:?} (expected pt-BR or en)"))
}

fn parse_level(s: &str) -> Result<Level, String> {
    Level::parse(s).ok_or_else(|| format!("unknown level {s:?} (expected bachelor, master or doctor)"))
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Analyse one shaft spec (JSON) and print the result quantities.
    Solve {
        spec: PathBuf,
        #[arg(long, default_value = "bachelor", value_parser = parse_level)]
        level: Level,
        /// r50, r90 or r99; doctor level only.
        #[arg(long)]
        reliability: Option<String>,
        /// Operating temperature in degrees Celsius; doctor level only.
        #[arg(long)]
        temperature: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
        /// Use the quadrature oracle instead of the closed form.
        #[arg(long)]
        oracle: bool,
    },
    /// Generate a dataset into `--out` (default `dataset`).
    Generate {
        /// Config file; takes precedence over `--config`.
        config_file: Option<PathBuf>,
    },
    /// Re-verify every record of a shard.
    Verify { shard: PathBuf },
    /// Render one dataset record (JSON) to text.
    Render { record: PathBuf },
    /// Parse a rendered document and list its result quantities.
    Parse { text: PathBuf },
    #[command(subcommand)]
    Tokenizer(TokenizerCmd),
    /// Build the training stream for a manifest.
    Curriculum {
        manifest: PathBuf,
        /// Schedule JSON; the built-in four-phase schedule when omitted.
        schedule: Option<PathBuf>,
    },
    /// Score model completions (JSONL).
    Eval {
        outputs: PathBuf,
        /// Vocabulary directory, used to tokenize completions that carry no
        /// token ids for loop detection.
        #[arg(long)]
        vocab: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_REL_TOL)]
        rel_tol: f64,
    },
    /// Expected harm of a domain profile (JSON).
    Harm { profile: PathBuf },
    /// Concentration index of an allocation profile (JSON).
    Monotropy {
        alloc: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 0.05)]
        rho: f64,
    },
    /// Parameter count of a transformer config (JSON); the reference
    /// architecture when omitted.
    Params { arch: Option<PathBuf> },
    /// Token statistics of a generated dataset.
    Stats { manifest: PathBuf },
    /// List the out-of-domain probe prompts, shuffled by `--seed`.
    Probes,
}

#[derive(Subcommand, Debug)]
enum TokenizerCmd {
    /// Train a vocabulary into `--out` (default `vocab`). `.jsonl` inputs
    /// contribute their `harmony_text` (or `text`) fields, other files are
    /// one document each.
    Train {
        #[arg(required = true)]
        corpus: Vec<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_BPE_SIZE)]
        size: usize,
        /// Fail instead of stopping early when the corpus runs out of pairs.
        #[arg(long)]
        strict: bool,
    },
    Encode { vocab: PathBuf, text: PathBuf },
    /// Decode whitespace-separated ids or a JSON array of ids.
    Decode { vocab: PathBuf, ids: PathBuf },
}

/// An error together with the exit code it maps to.
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure {
            code: 2,
            error: e.into(),
        }
    }
}

/// A validation failure (exit code 1).
pub fn invalid(e: impl Into<anyhow::Error>) -> Failure {
    Failure { code: 1, error: e.into() }
}

pub type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    let result = match cli.cmd {
        Cmd::Solve {
            spec,
            level,
            reliability,
            temperature,
            grid,
            oracle,
        } => commands::solve(g, &spec, level, reliability.as_deref(), temperature, grid, oracle),
        Cmd::Generate { config_file } => commands::generate(g, config_file.as_deref()),
        Cmd::Verify { shard } => commands::verify(g, &shard),
        Cmd::Render { record } => commands::render(g, &record),
        Cmd::Parse { text } => commands::parse(g, &text),
        Cmd::Tokenizer(TokenizerCmd::Train { corpus, size, strict }) => commands::tokenizer_train(g, &corpus, size, strict),
        Cmd::Tokenizer(TokenizerCmd::Encode { vocab, text }) => commands::tokenizer_encode(g, &vocab, &text),
        Cmd::Tokenizer(TokenizerCmd::Decode { vocab, ids }) => commands::tokenizer_decode(g, &vocab, &ids),
        Cmd::Curriculum { manifest, schedule } => commands::curriculum(g, &manifest, schedule.as_deref()),
        Cmd::Eval { outputs, vocab, rel_tol } => commands::eval(g, &outputs, vocab.as_deref(), rel_tol),
        Cmd::Harm { profile } => commands::harm(g, &profile),
        Cmd::Monotropy { alloc, delta, rho } => commands::monotropy(g, &alloc, delta, rho),
        Cmd::Params { arch } => commands::params(g, arch.as_deref()),
        Cmd::Stats { manifest } => commands::stats(g, &manifest),
        Cmd::Probes => commands::probes(g),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
