//! `poem`: build reference libraries, predict, evaluate and explain.
//!
//! Exit codes: 0 success, 1 input or format error, 2 internal invariant
//! violation. Data goes to stdout (or `--out`), diagnostics to stderr.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "poem",
    version,
    about = "Similarity-based property prediction over multiple fingerprints"
)]
pub struct Cli {
    /// Worker threads (default: POEM_THREADS, else all cores). Output does not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// key=value file supplying defaults for any long flag; flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Clean a labeled CSV and write a POEM1 library file.
    Build(BuildArgs),
    /// Predict every molecule of a query CSV.
    Predict(PredictArgs),
    /// Cross-validate a library.
    Evaluate(EvaluateArgs),
    /// List the references behind one prediction.
    Explain(ExplainArgs),
    /// Write one scheme's fingerprints in the external format.
    Fingerprint(FingerprintArgs),
    /// Print a library's header.
    Info(InfoArgs),
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "smiles")]
    pub smiles_col: String,
    #[arg(long, default_value = "label")]
    pub label_col: String,
    /// Molecule key column (default: row index).
    #[arg(long)]
    pub key_col: Option<String>,
    /// auto, binary, multi or continuous.
    #[arg(long, default_value = "auto")]
    pub label_kind: String,
    #[arg(long, value_delimiter = ',', default_value = "1,pos")]
    pub pos_tokens: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "0,neg")]
    pub neg_tokens: Vec<String>,
    /// Native scheme ids, `native` for all six, or `none`.
    #[arg(long, value_delimiter = ',', default_value = "native")]
    pub schemes: Vec<String>,
    #[arg(long, default_value_t = poem_core::fingerprint::DEFAULT_LENGTH)]
    pub fp_length: usize,
    /// External fingerprint files, joined to rows by key.
    #[arg(long, value_delimiter = ',')]
    pub external: Vec<PathBuf>,
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long, default_value = "")]
    pub notes: String,
    #[arg(long)]
    pub out: PathBuf,
    /// Cleaning report path (default: `<out>.cleaning.txt`).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub library: PathBuf,
    #[arg(long)]
    pub query: PathBuf,
    #[arg(long, default_value = "smiles")]
    pub smiles_col: String,
    #[arg(long)]
    pub key_col: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub external: Vec<PathBuf>,
    #[arg(long, default_value_t = poem_core::model::DEFAULT_RELAX)]
    pub relax: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub library: PathBuf,
    /// loo, split, kfold or cluster.
    #[arg(long, default_value = "loo")]
    pub plan: String,
    #[arg(long, default_value_t = poem_core::eval::DEFAULT_TEST_FRACTION)]
    pub test_fraction: f64,
    #[arg(long, default_value_t = poem_core::eval::DEFAULT_K)]
    pub k: usize,
    /// Cluster plan: minimum test-to-train Tanimoto distance.
    #[arg(long, default_value_t = 0.4)]
    pub threshold: f64,
    #[arg(long, default_value = poem_core::eval::DEFAULT_CLUSTER_SCHEME)]
    pub cluster_scheme: String,
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = poem_core::model::DEFAULT_RELAX)]
    pub relax: f64,
    /// Evaluate with only these schemes (e.g. one id for a single-scheme run).
    #[arg(long, value_delimiter = ',')]
    pub schemes: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    #[arg(long)]
    pub library: PathBuf,
    #[arg(long)]
    pub smiles: Option<String>,
    /// Query key, used to look up external fingerprints.
    #[arg(long, default_value = "query")]
    pub key: String,
    #[arg(long, value_delimiter = ',')]
    pub external: Vec<PathBuf>,
    #[arg(long, default_value_t = poem_core::model::DEFAULT_TOP_K)]
    pub top_k: usize,
    #[arg(long, default_value_t = poem_core::model::DEFAULT_RELAX)]
    pub relax: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FingerprintArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "smiles")]
    pub smiles_col: String,
    #[arg(long)]
    pub key_col: Option<String>,
    /// Native scheme id, e.g. morgan2.
    #[arg(long)]
    pub scheme: String,
    #[arg(long, default_value_t = poem_core::fingerprint::DEFAULT_LENGTH)]
    pub fp_length: usize,
    /// Scheme id written to the file (default: the scheme id).
    #[arg(long)]
    pub id: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InfoArgs {
    #[arg(long)]
    pub library: PathBuf,
}

fn main() -> ExitCode {
    let raw: Vec<std::ffi::OsString> = std::env::args_os().collect();
    let args = match config::merge_config(raw) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = configure_threads(cli.threads) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn configure_threads(flag: Option<usize>) -> Result<(), String> {
    let threads = match flag {
        Some(n) => n,
        None => match std::env::var("POEM_THREADS") {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| format!("POEM_THREADS={v:?} is not a thread count"))?,
            Err(_) => 0,
        },
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}
