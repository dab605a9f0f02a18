//! `ballquad`: build and check cubature rules, run integration experiments
//! and fool deterministic rules on the unit ball.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use ballquad::harness::{Method, ReportFormat};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "ballquad", version, about = "Quadrature on the unit ball with the Jacobi weight")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Positive product cubature rules.
    #[command(subcommand)]
    Rule(RuleCommand),
    /// Reproducing-kernel self-checks.
    #[command(subcommand)]
    Kernel(KernelCommand),
    /// Approximation by filtered hyperinterpolation.
    #[command(subcommand)]
    Approx(ApproxCommand),
    /// One integration run with a single method.
    Integrate {
        #[arg(value_enum)]
        method: MethodArg,
        #[command(flatten)]
        common: Common,
    },
    /// Error against budget for one method, fitted on a log-log scale.
    Converge {
        #[arg(long, value_enum, default_value = "cv")]
        method: MethodArg,
        #[command(flatten)]
        common: Common,
    },
    /// Fooling function for the degree-3L rule that fits in the budget.
    Fool {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Subcommand)]
enum RuleCommand {
    /// Build and certify the degree-3L rule; print its certificate.
    Build {
        #[command(flatten)]
        common: Common,
    },
    /// Re-certify a rule file at its recorded exactness degree.
    Check {
        /// Rule file written by `rule export`.
        path: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Write the degree-3L rule in the flat text format.
    Export {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Subcommand)]
enum KernelCommand {
    /// Reproduction and trace identities of `P_n` for `n <= L`.
    Check {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Subcommand)]
enum ApproxCommand {
    /// Sup-norm error of `G_L f` for `L = 1, 2, 4, ...` up to `--L`.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Det,
    Mc,
    Cv,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Det => Method::Det,
            MethodArg::Mc => Method::Mc,
            MethodArg::Cv => Method::Cv,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => ReportFormat::Csv,
            FormatArg::Json => ReportFormat::Json,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Dimension of the ball.
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Jacobi parameter of the weight `(1 - |x|^2)^(mu - 1/2)`.
    #[arg(long, default_value_t = 0.5)]
    pub mu: f64,
    /// Smoothness of the lacunary test function.
    #[arg(long)]
    pub r: Option<f64>,
    /// Integrability exponent of the smoothness norm; `inf` allowed.
    #[arg(long, default_value_t = f64::INFINITY)]
    pub p: f64,
    /// Filter level; rules have degree 3L.
    #[arg(long = "L")]
    pub level: Option<usize>,
    /// Budget of function values.
    #[arg(long)]
    pub n: Option<usize>,
    /// Geometric budget grid, comma separated.
    #[arg(long = "n-grid", value_delimiter = ',')]
    pub n_grid: Option<Vec<usize>>,
    /// Replications of randomized methods.
    #[arg(long, default_value_t = 200)]
    pub reps: usize,
    /// Master seed of every random stream.
    #[arg(long, env = "BALLQUAD_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Test function: analytic, lacunary(r), bump(m) or polynomial(N).
    /// Defaults to lacunary(r) when --r is given, else analytic.
    #[arg(long)]
    pub function: Option<String>,
}

impl Common {
    pub fn format(&self) -> ReportFormat {
        self.format.into()
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Rule(RuleCommand::Build { common }) => commands::rule_build(&common),
        Command::Rule(RuleCommand::Check { path, common }) => commands::rule_check(&path, &common),
        Command::Rule(RuleCommand::Export { common }) => commands::rule_export(&common),
        Command::Kernel(KernelCommand::Check { common }) => commands::kernel_check(&common),
        Command::Approx(ApproxCommand::Sweep { common }) => commands::approx_sweep(&common),
        Command::Integrate { method, common } => commands::integrate(method.into(), &common),
        Command::Converge { method, common } => commands::converge(method.into(), &common),
        Command::Fool { common } => commands::fool(&common),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let certification = err
                .chain()
                .any(|e| e.downcast_ref::<ballquad::Error>().is_some_and(|e| e.is_certification()));
            ExitCode::from(if certification { 2 } else { 1 })
        }
    }
}
