mod commands;
mod kps;

use clap::{Args, Parser, Subcommand};
use nlbt::NlbtError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "nlbt", version, about = "Polynomial nonlinear balanced truncation")]
struct Cli {
    /// Worker threads for the dense kernels.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

/// Where a system comes from: a zoo name, `random`, or a `kps-1` file.
#[derive(Args, Clone, Debug)]
pub struct ModelSrc {
    /// Zoo model name, or `random`.
    #[arg(long, conflicts_with = "file")]
    pub model: Option<String>,
    /// `kps-1` file (a ROM written by `reduce` also works).
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Taylor degree for non-polynomial zoo models.
    #[arg(long, default_value_t = 5)]
    pub taylor_degree: usize,
    /// State dimension of a random model.
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    /// Drift degree of a random model.
    #[arg(long, default_value_t = 2)]
    pub poly_degree: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Clone, Debug)]
pub struct Scenario {
    /// Initial state, comma separated; zero when omitted.
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<String>,
    /// `zero`, `sin:AMP:FREQ` (u = AMP sin(FREQ t)) or `noise:STD:HOLD`.
    #[arg(long, default_value = "zero")]
    pub input: String,
    #[arg(long, default_value_t = 10.0)]
    pub t_end: f64,
    /// Output sampling step.
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub rtol: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub atol: f64,
    /// Seed for the noise input.
    #[arg(long, default_value_t = 0)]
    pub input_seed: u64,
    /// Simulate zoo models with their non-polynomial dynamics.
    #[arg(long)]
    pub exact: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// List the zoo models.
    Models,
    /// Write a model as a `kps-1` file.
    Export {
        #[command(flatten)]
        src: ModelSrc,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Energies, singular value functions and the balancing transformation.
    Balance {
        #[command(flatten)]
        src: ModelSrc,
        /// Transformation degree; energies are computed one degree higher.
        #[arg(long, default_value_t = 3)]
        degree: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Reduced model from a `balance` artifact.
    Reduce {
        #[arg(long)]
        artifact: PathBuf,
        #[arg(short)]
        r: usize,
        /// Degree of the reduced drift and output.
        #[arg(long, default_value_t = 3)]
        degree: usize,
        /// Full-order initial state to map into reduced coordinates.
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Simulate one model and write `t,x..,y..,u..` as CSV.
    Simulate {
        #[command(flatten)]
        src: ModelSrc,
        #[command(flatten)]
        scenario: Scenario,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Simulate a reference and candidate models; report output errors.
    Compare {
        #[command(flatten)]
        reference: ModelSrc,
        /// Candidate `kps-1` files; ROM files map x0 through their stored inverse.
        #[arg(long, required = true)]
        candidate: Vec<PathBuf>,
        #[command(flatten)]
        scenario: Scenario,
        /// Directory for per-model trajectory CSVs.
        #[arg(long)]
        csv_dir: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Time the pipeline on random systems.
    Bench {
        /// Comma-separated state dimensions.
        #[arg(long, default_value = "8,16,32,64")]
        n: String,
        /// Energy degree; the transformation and reduced model use `d - 1`.
        #[arg(long, default_value_t = 3)]
        degree: usize,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Refuse sizes whose estimated peak memory exceeds this many bytes.
        #[arg(long, default_value_t = 8 << 30)]
        mem_limit: u128,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

pub enum CliError {
    Core(NlbtError),
    Io(String),
}

impl From<NlbtError> for CliError {
    fn from(e: NlbtError) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn reason(e: &NlbtError) -> (&'static str, u8) {
    match e {
        NlbtError::NotHurwitz { .. } => ("not-hurwitz", 2),
        NlbtError::SingularGramian => ("singular-controllability-gramian", 2),
        NlbtError::SingularObservability => ("singular-observability-gramian", 2),
        NlbtError::Resonance { .. } => ("resonance", 2),
        NlbtError::RepeatedHankel { .. } => ("repeated-hankel-value", 2),
        NlbtError::ZeroHankel { .. } => ("zero-hankel-value", 2),
        NlbtError::NonPositiveSigma { .. } => ("non-positive-sigma", 2),
        NlbtError::NewtonDiverged { .. } => ("newton-diverged", 2),
        NlbtError::InvalidArgument(_) => ("invalid-argument", 2),
        NlbtError::Parse(_) => ("parse-error", 3),
        NlbtError::ResourceRefusal { .. } => ("resource-refusal", 4),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads.max(1)).build_global() {
        eprintln!("{e}");
        return ExitCode::from(1);
    }
    let res = match cli.cmd {
        Cmd::Models => commands::models(),
        Cmd::Export { src, output } => commands::export(&src, output.as_deref()),
        Cmd::Balance { src, degree, output } => commands::balance(&src, degree, output.as_deref()),
        Cmd::Reduce { artifact, r, degree, x0, output } => {
            commands::reduce(&artifact, r, degree, x0.as_deref(), output.as_deref())
        }
        Cmd::Simulate { src, scenario, output } => commands::simulate(&src, &scenario, output.as_deref()),
        Cmd::Compare { reference, candidate, scenario, csv_dir, output } => {
            commands::compare(&reference, &candidate, &scenario, csv_dir.as_deref(), output.as_deref())
        }
        Cmd::Bench { n, degree, reps, seed, mem_limit, output } => {
            commands::bench(&n, degree, reps, seed, mem_limit, output.as_deref())
        }
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Core(e)) => {
            let (kind, code) = reason(&e);
            let msg = serde_json::json!({ "error": kind, "message": e.to_string(), "exit_code": code });
            eprintln!("{msg}");
            ExitCode::from(code)
        }
        Err(CliError::Io(m)) => {
            eprintln!("{}", serde_json::json!({ "error": "io", "message": m, "exit_code": 1 }));
            ExitCode::from(1)
        }
    }
}
