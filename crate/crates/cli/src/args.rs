//! Command-line arguments.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;

#[derive(Parser, Debug, Clone)]
#[command(name = "hillsym", version, about = "Symplectic exponential integrators for the matrix Hill equation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output CSV path; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads for scans (default: one per core).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Integrate one trajectory (vector mode) or the fundamental matrix.
    Integrate(IntegrateArgs),
    /// Monodromy matrix over one period and its stability report.
    Monodromy(MonodromyArgs),
    /// Stability report over a one-parameter sweep.
    Scan(ScanArgs),
    /// Error of the monodromy matrix against a reference over a step sequence.
    Converge(ConvergeArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Integrate(_) => "integrate",
            Command::Monodromy(_) => "monodromy",
            Command::Scan(_) => "scan",
            Command::Converge(_) => "converge",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Mathieu,
    Pascal,
    PaulTrap,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ProblemArgs {
    /// Preset problem.
    #[arg(long, value_enum, default_value = "mathieu")]
    pub problem: ProblemKind,

    /// JSON problem description; replaces the preset flags.
    #[arg(long)]
    pub problem_file: Option<PathBuf>,

    #[arg(long)]
    pub omega: Option<f64>,

    #[arg(long)]
    pub eps: Option<f64>,

    /// Dimension of the Pascal problem.
    #[arg(long)]
    pub r: Option<usize>,

    #[arg(long)]
    pub e_ratio0: Option<f64>,

    #[arg(long)]
    pub e_ratio1: Option<f64>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct MethodOptionArgs {
    /// Coefficient file for the `cf`, `splitting` and `rk` methods.
    #[arg(long)]
    pub coeff_file: Option<PathBuf>,

    /// Truncation index of the harmonic exponential blocks.
    #[arg(long)]
    pub exp_order: Option<usize>,

    /// Fixed-point tolerance of `rkgl6`.
    #[arg(long)]
    pub tol: Option<f64>,

    /// Fixed-point sweep limit of `rkgl6`.
    #[arg(long)]
    pub max_iter: Option<usize>,

    /// Check the declared order of a loaded coefficient table before use.
    #[arg(long)]
    pub verify_order: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct StepArgs {
    /// Step size; must divide the interval.
    #[arg(long, conflicts_with = "steps_per_period")]
    pub h: Option<f64>,

    /// Steps per period of the problem.
    #[arg(long)]
    pub steps_per_period: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct IntegrateArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,

    #[arg(long, default_value = "phi2_6")]
    pub method: String,

    #[command(flatten)]
    pub options: MethodOptionArgs,

    #[command(flatten)]
    pub step: StepArgs,

    /// End time (default: one period).
    #[arg(long)]
    pub t_end: Option<f64>,

    /// Initial state `x_1..x_r, v_1..v_r`; the fundamental matrix is
    /// integrated when absent.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub initial: Option<Vec<f64>>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct MonodromyArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,

    #[arg(long, default_value = "phi2_6")]
    pub method: String,

    #[command(flatten)]
    pub options: MethodOptionArgs,

    #[command(flatten)]
    pub step: StepArgs,

    /// Half-width of the marginal band around the unit circle.
    #[arg(long, default_value_t = hillsym::floquet::DEFAULT_TOL_CLASSIFY)]
    pub tol_classify: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Omega,
    Eps,
    ERatio0,
    ERatio1,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SweepArgs {
    /// Swept problem parameter.
    #[arg(long, value_enum, default_value = "omega")]
    pub sweep: SweepParam,

    #[arg(long)]
    pub sweep_min: f64,

    #[arg(long)]
    pub sweep_max: f64,

    /// Number of equally spaced values, endpoints included.
    #[arg(long, conflicts_with = "sweep_step", required_unless_present = "sweep_step")]
    pub sweep_count: Option<usize>,

    /// Spacing of the values; must divide the range.
    #[arg(long)]
    pub sweep_step: Option<f64>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ScanArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,

    #[command(flatten)]
    pub sweep: SweepArgs,

    #[arg(long, default_value = "phi2_6")]
    pub method: String,

    #[command(flatten)]
    pub options: MethodOptionArgs,

    #[command(flatten)]
    pub step: StepArgs,

    #[arg(long, default_value_t = hillsym::floquet::DEFAULT_TOL_CLASSIFY)]
    pub tol_classify: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,

    /// Methods to compare, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "phi2_6")]
    pub method: Vec<String>,

    #[command(flatten)]
    pub options: MethodOptionArgs,

    /// Steps per interval, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "10,20,40,80,160")]
    pub steps: Vec<usize>,

    #[arg(long, default_value = "phi5_8")]
    pub reference_method: String,

    #[arg(long, default_value_t = 2000)]
    pub reference_steps: usize,

    /// End time (default: one period).
    #[arg(long)]
    pub t_end: Option<f64>,
}
