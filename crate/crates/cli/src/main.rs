//! `andor`: batch front end for AND-OR interaction extraction and analysis.
//!
//! Exit codes: 0 success; 1 a diagnose or axioms check failed; 2 any
//! input, output or argument error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "andor", version, about = "AND-OR interaction extraction and analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write synthetic value tables and ground-truth sidecars.
    Synth(SynthArgs),
    /// Extract interaction sets from a directory of value tables.
    Extract(ExtractArgs),
    /// Per-order strength profile of every interaction set, as CSV.
    Profile(ProfileArgs),
    /// Per-order Jaccard similarity of two populations, as CSV.
    Similarity(SimilarityArgs),
    /// Compare the confusing-sample scores of two models.
    Compare(CompareArgs),
    /// Check the three sparsity conditions on each sample.
    Diagnose(DiagnoseArgs),
    /// Randomized verification of the AND-effect axioms.
    Axioms(AxiomArgs),
    /// Brute-force reference computations.
    #[command(hide = true)]
    Oracle(OracleArgs),
}

#[derive(Args)]
pub struct SynthArgs {
    /// Output directory; created if missing.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sparse-game family as KEY=VALUE pairs: n, m, min-order, max-order, floor, ceil.
    #[arg(long, num_args = 1.., value_name = "KEY=VALUE")]
    game: Vec<String>,
    #[arg(long, default_value_t = 1)]
    samples: usize,
    /// Fraction of samples receiving offsetting high-order pairs.
    #[arg(long, default_value_t = 0.0)]
    overfit_fraction: f64,
    #[arg(long, default_value_t = 7)]
    overfit_min_order: usize,
    #[arg(long, default_value_t = 10)]
    overfit_pairs: usize,
    #[arg(long, default_value_t = 20.0)]
    overfit_magnitude: f64,
    /// Write train/ and test/ populations sharing orders 1-2 and differing above.
    #[arg(long)]
    split: bool,
    /// Single pure interaction function instead of a population.
    #[arg(long, value_enum)]
    interaction: Option<KindArg>,
    /// Bitmask of the interaction, decimal or 0b-prefixed binary.
    #[arg(long, requires = "interaction")]
    mask: Option<String>,
    #[arg(long, requires = "interaction", default_value_t = 1.0)]
    c: f64,
    /// Tables of a random tiny net, given as comma-separated input and hidden widths.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["interaction", "split"])]
    net: Vec<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum KindArg {
    And,
    Or,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ModeArg {
    AllAnd,
    AllOr,
    EvenSplit,
    Sparsify,
    /// The split that generated each table, read from its *.truth.json sidecar.
    GroundTruth,
}

#[derive(Args)]
pub struct ExtractArgs {
    /// Directory of *.table.json files.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Sparsify)]
    mode: ModeArg,
    #[arg(long)]
    no_denoise: bool,
    #[arg(long, default_value_t = 3000)]
    max_iters: usize,
    #[arg(long, default_value_t = 0.02)]
    step: f64,
    #[arg(long, default_value_t = 1e-9)]
    eps: f64,
    #[arg(long, default_value_t = 0.02)]
    zeta_fraction: f64,
    /// Salience threshold as a fraction of the batch mean |v(N) - v(empty)|.
    #[arg(long, default_value_t = 0.02)]
    tau_fraction: f64,
    /// Fixed salience threshold, overriding the batch fraction.
    #[arg(long)]
    tau_absolute: Option<f64>,
    /// Also write the full effect vectors.
    #[arg(long)]
    dense: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
pub struct ProfileArgs {
    /// Directory of *.set.json files.
    #[arg(long)]
    input: PathBuf,
    /// Salience threshold; defaults to the one recorded in each set.
    #[arg(long)]
    tau: Option<f64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SimilarityArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    /// Salience threshold; defaults to the one recorded in the train sets.
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct CompareArgs {
    /// Set directory of the first model.
    a: PathBuf,
    /// Set directory of the second model.
    b: PathBuf,
    /// Confusing threshold on the average order; defaults to n/2.
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct DiagnoseArgs {
    /// Directory of *.table.json files.
    #[arg(long)]
    tables: PathBuf,
    /// Directory of matching *.set.json files.
    #[arg(long)]
    sets: PathBuf,
    /// Highest order a salient effect may have.
    #[arg(long)]
    max_order: usize,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct AxiomArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct OracleArgs {
    #[command(subcommand)]
    pub action: OracleAction,
}

#[derive(Subcommand)]
pub enum OracleAction {
    /// Literal reconstruction error of each set against its table (zero noise assumed).
    Verify {
        #[arg(long)]
        tables: PathBuf,
        #[arg(long)]
        sets: PathBuf,
    },
    /// Literal AND, OR or subset-sum transform of one table, as JSON.
    Transform {
        #[arg(long)]
        table: PathBuf,
        #[arg(long, value_parser = ["and", "or", "zeta"])]
        kind: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(a) => commands::synth(a),
        Command::Extract(a) => commands::extract(a),
        Command::Profile(a) => commands::profile(a),
        Command::Similarity(a) => commands::similarity(a),
        Command::Compare(a) => commands::compare(a),
        Command::Diagnose(a) => commands::diagnose(a),
        Command::Axioms(a) => commands::axioms(a),
        Command::Oracle(a) => commands::oracle(a),
    };
    match result {
        Ok(commands::Outcome::Pass) => ExitCode::SUCCESS,
        Ok(commands::Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("andor: {e}");
            ExitCode::from(2)
        }
    }
}
