//! The four commands. Each builds a [`Table`]; the pure helpers are public
//! so callers can work with the reports directly.

use crate::args::{
    Cli, Command, ConvergeArgs, IntegrateArgs, MethodOptionArgs, MonodromyArgs, ProblemArgs, ProblemKind, ScanArgs,
    StepArgs, SweepArgs, SweepParam,
};
use crate::error::{CliError, Result};
use crate::output::{meta_line, write_output, Cell, Table};
use hillsym::baselines::fit_slope;
use hillsym::floquet::{log_distance, stability, StabilityReport};
use hillsym::hillmodel::{PresetParams, ProblemSpec};
use hillsym::methods::{build_method, MethodOptions};
use hillsym::{BlockPropagator, CostLedger, HillProblem, Integrator, Matrix};
use rayon::prelude::*;
use serde::Serialize;
use std::path::Path;

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn preset_params(args: &ProblemArgs) -> PresetParams {
    PresetParams {
        omega: args.omega,
        eps: args.eps,
        r: args.r,
        e_ratio0: args.e_ratio0,
        e_ratio1: args.e_ratio1,
    }
}

fn preset_name(kind: ProblemKind) -> &'static str {
    match kind {
        ProblemKind::Mathieu => "mathieu",
        ProblemKind::Pascal => "pascal",
        ProblemKind::PaulTrap => "paul_trap",
    }
}

/// Builds the problem from a file or from the preset flags.
pub fn resolve_problem(args: &ProblemArgs) -> Result<HillProblem> {
    let spec = match &args.problem_file {
        Some(path) => ProblemSpec::from_json(&read(path)?)?,
        None => ProblemSpec::Preset {
            preset: preset_name(args.problem).into(),
            params: preset_params(args),
        },
    };
    Ok(spec.build()?)
}

/// Builds the problem with one preset parameter replaced by `value`.
pub fn resolve_swept_problem(args: &ProblemArgs, param: SweepParam, value: f64) -> Result<HillProblem> {
    if args.problem_file.is_some() {
        return Err(CliError::Config("sweeps apply to preset problems only".into()));
    }
    let mut params = preset_params(args);
    let slot = match param {
        SweepParam::Omega => &mut params.omega,
        SweepParam::Eps => &mut params.eps,
        SweepParam::ERatio0 => &mut params.e_ratio0,
        SweepParam::ERatio1 => &mut params.e_ratio1,
    };
    *slot = Some(value);
    let spec = ProblemSpec::Preset {
        preset: preset_name(args.problem).into(),
        params,
    };
    Ok(spec.build()?)
}

fn method_options(opts: &MethodOptionArgs) -> Result<MethodOptions> {
    Ok(MethodOptions {
        coefficients: opts.coeff_file.as_deref().map(read).transpose()?,
        exp_order: opts.exp_order,
        tol: opts.tol,
        max_iter: opts.max_iter,
        verify_order: opts.verify_order,
    })
}

pub fn resolve_method(name: &str, opts: &MethodOptionArgs) -> Result<Box<dyn Integrator>> {
    Ok(build_method(name, &method_options(opts)?)?)
}

/// Step size for covering `length`; one period per `steps_per_period`
/// steps, with `default_steps` when neither flag is given.
fn step_size(step: &StepArgs, period: f64, default_steps: Option<usize>) -> Result<f64> {
    match (step.h, step.steps_per_period.or(default_steps)) {
        (Some(h), _) => Ok(h),
        (None, Some(0)) => Err(CliError::Config("--steps-per-period must be positive".into())),
        (None, Some(n)) => Ok(period / n as f64),
        (None, None) => Err(CliError::Config("give --h or --steps-per-period".into())),
    }
}

/// Canonical description of a run; its hash goes into the metadata line.
/// Output path and thread count are excluded, so they never change the
/// output.
fn canonical_spec(command: &str, args: &impl Serialize, files: &[Option<&Path>]) -> Result<String> {
    let contents: Vec<Option<String>> = files.iter().map(|f| f.map(read).transpose()).collect::<Result<_>>()?;
    let value = serde_json::json!({ "command": command, "args": args, "files": contents });
    Ok(value.to_string())
}

fn meta(method: &str, command: &str, args: &impl Serialize, problem: &ProblemArgs, opts: &MethodOptionArgs) -> Result<String> {
    let spec = canonical_spec(
        command,
        args,
        &[problem.problem_file.as_deref(), opts.coeff_file.as_deref()],
    )?;
    Ok(meta_line(method, &spec))
}

pub fn cmd_integrate(args: &IntegrateArgs) -> Result<Table> {
    let problem = resolve_problem(&args.problem)?;
    let method = resolve_method(&args.method, &args.options)?;
    let t_end = args.t_end.unwrap_or(problem.period());
    let h = step_size(&args.step, problem.period(), None)?;
    let r = problem.dim();
    let forced = problem.has_forcing();
    let phi0 = if forced {
        BlockPropagator::identity_augmented(r)
    } else {
        BlockPropagator::identity(r)
    };
    let meta = meta(&args.method, "integrate", args, &args.problem, &args.options)?;

    match &args.initial {
        Some(z0) => {
            if z0.len() != 2 * r {
                return Err(CliError::Config(format!("--initial needs {} values, got {}", 2 * r, z0.len())));
            }
            let mut z = z0.clone();
            if forced {
                z.push(1.0);
            }
            let mut columns: Vec<String> = vec!["t".into()];
            columns.extend((0..r).map(|i| format!("x{i}")));
            columns.extend((0..r).map(|i| format!("v{i}")));
            columns.extend(["symplectic_defect".into(), "cost_thirds".into()]);
            let mut states = Vec::new();
            let mut observer = |t: f64, phi: &BlockPropagator| {
                states.push((t, phi.apply_to_vector(&z), phi.symplectic_defect(), phi.ledger));
            };
            method.integrate_with(&problem, h, 0.0, t_end, phi0, Some(&mut observer))?;
            let mut table = Table::new(meta, columns);
            for (t, state, defect, ledger) in states {
                let state = state?;
                let mut row = vec![Cell::from(t)];
                row.extend(state[..2 * r].iter().map(|&v| Cell::from(v)));
                row.extend([Cell::from(defect), Cell::from(ledger.thirds())]);
                table.push(row)?;
            }
            Ok(table)
        }
        None => {
            let out = method.integrate(&problem, h, 0.0, t_end, phi0)?;
            let dense = out.propagator.to_dense();
            let n = dense.cols();
            let mut columns: Vec<String> = vec!["row".into()];
            columns.extend((0..n).map(|j| format!("c{j}")));
            columns.extend(["symplectic_defect".into(), "cost_thirds".into()]);
            let mut table = Table::new(meta, columns);
            let defect = out.propagator.symplectic_defect();
            for i in 0..n {
                let mut row = vec![Cell::from(i)];
                row.extend(dense.row(i).iter().map(|&v| Cell::from(v)));
                row.extend([Cell::from(defect), Cell::from(out.total_cost().thirds())]);
                table.push(row)?;
            }
            Ok(table)
        }
    }
}

const REPORT_COLUMNS: [&str; 7] = [
    "eig_index",
    "re",
    "im",
    "abs_minus_one",
    "log_abs_minus_one_delta",
    "classification",
    "cost_thirds",
];

fn report_rows(report: &StabilityReport, cost: CostLedger) -> Vec<Vec<Cell>> {
    report
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, l)| {
            vec![
                Cell::from(i),
                Cell::from(l.re),
                Cell::from(l.im),
                Cell::from(report.abs_minus_one[i]),
                Cell::from(log_distance(report.abs_minus_one[i])),
                Cell::from(report.classification[i].as_str()),
                Cell::from(cost.thirds()),
            ]
        })
        .collect()
}

pub fn cmd_monodromy(args: &MonodromyArgs) -> Result<Table> {
    let problem = resolve_problem(&args.problem)?;
    let method = resolve_method(&args.method, &args.options)?;
    let h = step_size(&args.step, problem.period(), Some(10))?;
    let out = method.integrate(&problem, h, 0.0, problem.period(), BlockPropagator::identity(problem.dim()))?;
    let report = stability(&out.propagator, args.tol_classify)?;
    let mut columns: Vec<&str> = REPORT_COLUMNS.to_vec();
    columns.extend(["overall", "pairing_defect", "symplectic_defect", "det_minus_one"]);
    let mut table = Table::new(meta(&args.method, "monodromy", args, &args.problem, &args.options)?, columns);
    for mut row in report_rows(&report, out.total_cost()) {
        row.extend([
            Cell::from(report.overall.as_str()),
            Cell::from(report.pairing_defect),
            Cell::from(report.symplectic_defect),
            Cell::from(report.det_minus_one),
        ]);
        table.push(row)?;
    }
    Ok(table)
}

/// The swept values: `count` equally spaced points, or `min + j step` for
/// `j = 0..=(max - min) / step`.
pub fn sweep_values(sweep: &SweepArgs) -> Result<Vec<f64>> {
    let (lo, hi) = (sweep.sweep_min, sweep.sweep_max);
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(CliError::Config(format!("invalid sweep range [{lo}, {hi}]")));
    }
    match (sweep.sweep_count, sweep.sweep_step) {
        (Some(0), _) => Err(CliError::Config("--sweep-count must be positive".into())),
        (Some(1), _) => Ok(vec![lo]),
        (Some(n), _) => Ok((0..n).map(|j| lo + (hi - lo) * j as f64 / (n - 1) as f64).collect()),
        (None, Some(step)) => {
            if !(step > 0.0) {
                return Err(CliError::Config("--sweep-step must be positive".into()));
            }
            let intervals = ((hi - lo) / step).round();
            if (intervals * step - (hi - lo)).abs() > 1e-9 * (hi - lo).abs().max(step) {
                return Err(CliError::Config(format!("step {step} does not divide [{lo}, {hi}]")));
            }
            Ok((0..=intervals as usize).map(|j| lo + j as f64 * step).collect())
        }
        (None, None) => Err(CliError::Config("give --sweep-count or --sweep-step".into())),
    }
}

/// Stability report at one sweep value.
#[derive(Clone, Debug)]
pub struct ScanPoint {
    pub value: f64,
    pub report: StabilityReport,
    pub cost: CostLedger,
}

/// Monodromy reports over the sweep, computed on a pool of `threads`
/// workers and returned in sweep order.
pub fn scan_points(args: &ScanArgs, threads: Option<usize>) -> Result<Vec<ScanPoint>> {
    let values = sweep_values(&args.sweep)?;
    let method = resolve_method(&args.method, &args.options)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Config(e.to_string()))?;
    pool.install(|| {
        values
            .par_iter()
            .map(|&value| {
                let problem = resolve_swept_problem(&args.problem, args.sweep.sweep, value)?;
                let h = step_size(&args.step, problem.period(), Some(10))?;
                let out = method.integrate(&problem, h, 0.0, problem.period(), BlockPropagator::identity(problem.dim()))?;
                let report = stability(&out.propagator, args.tol_classify)?;
                Ok(ScanPoint {
                    value,
                    report,
                    cost: out.total_cost(),
                })
            })
            .collect()
    })
}

pub fn cmd_scan(args: &ScanArgs, threads: Option<usize>) -> Result<Table> {
    let points = scan_points(args, threads)?;
    let columns = std::iter::once("sweep_value").chain(REPORT_COLUMNS);
    let mut table = Table::new(meta(&args.method, "scan", args, &args.problem, &args.options)?, columns);
    for p in &points {
        for row in report_rows(&p.report, p.cost) {
            let mut full = vec![Cell::from(p.value)];
            full.extend(row);
            table.push(full)?;
        }
    }
    Ok(table)
}

/// Error of one run against the reference.
#[derive(Clone, Debug)]
pub struct ConvergencePoint {
    pub method: String,
    pub steps: usize,
    pub h: f64,
    pub error_l1: f64,
    pub cost: CostLedger,
    pub boundary_cost: CostLedger,
}

/// Monodromy (or `[0, t_end]` propagator) errors of every method at every
/// step count, against `reference_method` at `reference_steps`.
pub fn convergence_points(args: &ConvergeArgs) -> Result<(Matrix, Vec<ConvergencePoint>)> {
    let problem = resolve_problem(&args.problem)?;
    let t_end = args.t_end.unwrap_or(problem.period());
    let identity = || BlockPropagator::identity(problem.dim());
    if args.reference_steps == 0 || args.steps.contains(&0) {
        return Err(CliError::Config("step counts must be positive".into()));
    }
    let reference_method = build_method(&args.reference_method, &MethodOptions::default())?;
    let reference = reference_method
        .integrate(&problem, t_end / args.reference_steps as f64, 0.0, t_end, identity())?
        .propagator
        .to_dense();
    let mut points = Vec::new();
    for name in &args.method {
        let method = resolve_method(name, &args.options)?;
        for &steps in &args.steps {
            let h = t_end / steps as f64;
            let out = method.integrate(&problem, h, 0.0, t_end, identity())?;
            points.push(ConvergencePoint {
                method: name.clone(),
                steps,
                h,
                error_l1: (&out.propagator.to_dense() - &reference).norm1(),
                cost: out.total_cost(),
                boundary_cost: out.boundary_cost,
            });
        }
    }
    Ok((reference, points))
}

/// Least-squares slope of `log(error)` against `log(h)` over the points of
/// one method whose error is above `floor`.
pub fn fitted_slope(points: &[ConvergencePoint], method: &str, floor: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.method == method && p.error_l1 > floor)
        .map(|p| (p.h.ln(), p.error_l1.ln()))
        .collect();
    (pts.len() >= 2).then(|| fit_slope(&pts))
}

/// Errors at or below this are treated as round-off when fitting slopes.
pub const SLOPE_FLOOR: f64 = 1e-12;

pub fn cmd_converge(args: &ConvergeArgs) -> Result<Table> {
    let (_, points) = convergence_points(args)?;
    let columns = ["method", "steps", "h", "error_l1", "cost_thirds", "boundary_thirds", "slope"];
    let methods = args.method.join("+");
    let mut table = Table::new(meta(&methods, "converge", args, &args.problem, &args.options)?, columns);
    for p in &points {
        let slope = match fitted_slope(&points, &p.method, SLOPE_FLOOR) {
            Some(s) => Cell::from(s),
            None => Cell::from(""),
        };
        table.push(vec![
            Cell::from(p.method.as_str()),
            Cell::from(p.steps),
            Cell::from(p.h),
            Cell::from(p.error_l1),
            Cell::from(p.cost.thirds()),
            Cell::from(p.boundary_cost.thirds()),
            slope,
        ])?;
    }
    Ok(table)
}

/// Runs the parsed command and writes its table.
pub fn run(cli: &Cli) -> Result<()> {
    let table = match &cli.command {
        Command::Integrate(a) => cmd_integrate(a)?,
        Command::Monodromy(a) => cmd_monodromy(a)?,
        Command::Scan(a) => cmd_scan(a, cli.threads)?,
        Command::Converge(a) => cmd_converge(a)?,
    };
    write_output(cli.out.as_deref(), &table.render())
}
