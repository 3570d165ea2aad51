//! `lagspec`: quadrature tables, recurrence accuracy studies, the half-line
//! spectral solver and the round-off error lab, all as CSV or JSON.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "lagspec",
    version,
    about = "Laguerre polynomials, Gauss rules and a half-line spectral solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Nodes and weights of an (N+1)-point rule.
    Quad(QuadArgs),
    /// Polynomials and functions of every degree up to N at one point.
    Eval(EvalArgs),
    /// Per-node relative errors of the double evaluators against the oracle.
    Compare(CompareArgs),
    /// One spectral solve of -u'' + gamma u = f with error norms.
    Solve(SolveArgs),
    /// Error norms over a grid of (N, beta).
    Sweep(SweepArgs),
    /// Measured and simulated recurrence round-off against the energy bound.
    Errlab(ErrlabArgs),
}

#[derive(Debug, Clone, Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RuleArg {
    Gauss,
    Radau,
}

#[derive(Debug, Args)]
struct QuadArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    alpha: f64,
    /// Rule parameter; the rule has N+1 points.
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value = "gauss")]
    kind: RuleArg,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    alpha: f64,
    /// Highest degree.
    #[arg(long)]
    n: usize,
    #[arg(long)]
    x: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Target {
    /// `L_N` itself.
    Poly,
    /// `e^{-x/2} L_N`.
    Fun,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    alpha: f64,
    /// Degree; evaluated at the N+1 zeros of the next polynomial.
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value = "poly")]
    target: Target,
    /// Significant digits of the oracle.
    #[arg(long, default_value_t = 24)]
    digits: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CaseArg {
    /// sin(kx) e^{-x}
    U1,
    /// (1+x)^{-r}
    U2,
    /// sin(kx) (1+x)^{-r}
    U3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TrigArg {
    Sin,
    Cos,
}

#[derive(Debug, Clone, Args)]
struct CaseArgs {
    #[arg(long, value_enum)]
    case: CaseArg,
    /// Frequency (u1, u3); default 2.
    #[arg(long, allow_negative_numbers = true)]
    k: Option<f64>,
    /// Algebraic decay rate (u2, u3); default 2.5 for u2, 3.5 for u3.
    #[arg(long, allow_negative_numbers = true)]
    r: Option<f64>,
    /// Oscillatory factor of u3.
    #[arg(long, value_enum, default_value = "sin")]
    trig: TrigArg,
    /// Length scale l of the lifting u(0) e^{-x/l} used when u(0) != 0.
    #[arg(long, default_value_t = 1.0)]
    lifting: f64,
    #[arg(long, default_value_t = 2.0)]
    gamma: f64,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    case: CaseArgs,
    #[arg(long)]
    n: usize,
    /// Interpolation points; default 2N.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    beta: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    case: CaseArgs,
    #[arg(long, value_delimiter = ',', required = true)]
    n_list: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    beta_list: Vec<f64>,
    /// Fixed number of interpolation points; default 2N per cell.
    #[arg(long)]
    m: Option<usize>,
    /// Where the argmin summary goes in CSV mode; stderr when omitted.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Standard,
    Modified,
}

#[derive(Debug, Args)]
struct ErrlabArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    alpha: f64,
    /// Highest degree.
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long)]
    x: f64,
    /// The eta > 0 of the bound.
    #[arg(long, default_value_t = 0.25)]
    eta: f64,
    #[arg(long, value_enum, default_value = "standard")]
    mode: ModeArg,
    /// Multiplies the simulated perturbations; 0 turns them off.
    #[arg(long, default_value_t = 1.0)]
    zeta_scale: f64,
    /// Multiplies the simulated starting error e_1.
    #[arg(long, default_value_t = 1.0)]
    e1_scale: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 24)]
    digits: usize,
    #[command(flatten)]
    output: OutputArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lagspec: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
