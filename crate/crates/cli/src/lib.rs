//! Argument parsing and command dispatch for `comcat`, kept in a library so
//! the whole CLI path can also run in-process.
//!
//! Exit status: 0 when the property holds (or the object was produced),
//! 1 when it is refuted with a witness, 2 on usage or input errors.

mod commands;
mod report;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "comcat", version, about = "Checks for convex operational models")]
pub struct Cli {
    /// Seed for every sampled check.
    #[arg(long, global = true, default_value_t = comcat_core::settings::DEFAULT_SEED)]
    pub seed: u64,

    /// Float tolerance for PSD comparisons.
    #[arg(long, global = true, env = "COMCAT_TOLERANCE")]
    pub tolerance: Option<f64>,

    /// Where to write the produced object (tensor, model) or the report.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Kind {
    Min,
    Max,
    Spatial,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Min => "min",
            Kind::Max => "max",
            Kind::Spatial => "spatial",
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Checks every COM invariant of a model file.
    Validate { model: String },
    /// Builds a composite of two models.
    Tensor {
        #[arg(long, value_enum)]
        kind: Kind,
        a: String,
        b: String,
    },
    /// Evaluates both sides of the remote-evaluation identity.
    RemoteEval {
        #[arg(long = "f")]
        f: String,
        #[arg(long)]
        omega: String,
        /// State of the first factor of `f` (or, with --dual, of the last factor of `f`).
        #[arg(long)]
        alpha: String,
        /// Use the mirrored identity `ω̂*(f̂*(γ))`.
        #[arg(long)]
        dual: bool,
    },
    /// Finds (polyhedral) or verifies (PSD) a teleportation protocol of A through B.
    Teleport {
        a: String,
        b: String,
        #[arg(long, value_enum, default_value = "max")]
        composite: Kind,
        /// Candidate `{"omega": ..., "c"?: ...}` to verify instead of searching.
        #[arg(long)]
        candidate: Option<String>,
    },
    /// Looks for teleportation partners for every object of a theory.
    CompactCheck { theory: String },
    /// Searches for (or verifies) a weak self-duality structure.
    Wsd {
        model: String,
        #[arg(long)]
        symmetric: bool,
        /// Structure file to verify instead of searching.
        #[arg(long)]
        structure: Option<String>,
    },
    /// Dagger-compactness verdict for theories with duality structures.
    Dagger {
        #[arg(required = true)]
        theories: Vec<String>,
    },
    /// Emits a builtin model or linearizes a Mackey triple.
    Model {
        #[command(subcommand)]
        which: ModelCmd,
    },
}

#[derive(Subcommand, Debug)]
pub enum ModelCmd {
    Classical {
        #[arg(long, default_value_t = 2)]
        n: usize,
    },
    Quantum {
        #[arg(long, default_value_t = 2)]
        d: usize,
    },
    Gbit,
    Pentagon,
    Trivial,
    /// Triple file, or `builtin:pauli-fragment` / `builtin:classical<n>`.
    Mackey { triple: String },
}

/// What one invocation produced: the exit status, the pretty report for
/// stdout (if any) and an error message for stderr (if any).
#[derive(Debug)]
pub struct Execution {
    pub code: u8,
    pub stdout: Option<String>,
    pub error: Option<String>,
}

impl Execution {
    fn failed(msg: String) -> Self {
        Execution { code: 2, stdout: None, error: Some(msg) }
    }
}

/// Parses `args` (without the program name) and runs them.
pub fn execute_args<I, S>(args: I) -> Execution
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let argv = std::iter::once(std::ffi::OsString::from("comcat")).chain(args.into_iter().map(Into::into));
    match Cli::try_parse_from(argv) {
        Ok(cli) => execute(&cli),
        Err(e) if e.use_stderr() => Execution { code: e.exit_code() as u8, stdout: None, error: Some(e.to_string()) },
        Err(e) => Execution { code: e.exit_code() as u8, stdout: Some(e.to_string()), error: None },
    }
}

pub fn execute(cli: &Cli) -> Execution {
    comcat_core::settings::set_seed(cli.seed);
    let eps = cli.tolerance.unwrap_or(comcat_core::settings::DEFAULT_TOLERANCE);
    if !(eps > 0.0 && eps.is_finite()) {
        return Execution::failed("--tolerance must be a positive number".into());
    }
    comcat_core::settings::set_tolerance(eps);
    let start = Instant::now();
    let out = match commands::run(cli) {
        Ok(out) => out,
        Err(e) => return Execution::failed(format!("{e:#}")),
    };
    let report = out.report.to_json(start.elapsed().as_millis());
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    let written = match (&cli.output, out.product) {
        (Some(path), Some(obj)) => std::fs::write(path, serde_json::to_string_pretty(&obj).expect("json") + "\n"),
        (Some(path), None) => std::fs::write(path, text.clone() + "\n"),
        (None, _) => Ok(()),
    };
    if let Err(e) = written {
        return Execution::failed(format!("cannot write output: {e}"));
    }
    Execution { code: out.report.verdict.exit_code() as u8, stdout: Some(text), error: None }
}
