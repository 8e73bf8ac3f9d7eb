//! Comparison integrators: implicit Gauss-Legendre Runge-Kutta solved by
//! fixed-point iteration, splitting (Runge-Kutta-Nystrom) methods with
//! loadable `(a_k, b_k)` tables and explicit Runge-Kutta methods with
//! loadable Butcher tableaus.
//!
//! All of them act on the first-order system `Phi' = A(t) Phi` in block
//! form. Multiplying `A = [[0, I], [-M, 0]]` into a stage costs one block
//! times a slab (2 units); the upper half is a free copy. Forced problems
//! are handled through the augmented system, whose extra column picks up
//! `f(t)` for free.

use std::f64::consts::PI;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::hillmodel::{mathieu, FirstOrderSystem, HillProblem};
use crate::integrator::{drive, Integration, Integrator, Observer, Stepper};
use crate::magnus::MethodScheme;
use crate::matrixcore::{block_times_slab, BlockPropagator, CostLedger, Matrix};

/// Default fixed-point tolerance of [`Rkgl6`], relative to `1 + ||Phi||`.
pub const DEFAULT_TOL: f64 = 100.0 * f64::EPSILON;
pub const DEFAULT_MAX_ITER: usize = 20;

const TABLE_TOL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct ButcherTableau {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    c: Vec<f64>,
    order: u32,
    explicit: bool,
}

impl ButcherTableau {
    /// `a` may be given as ragged (lower-triangular) rows; missing entries
    /// are zero. When `c` is given it must equal the row sums of `a`.
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>, c: Option<Vec<f64>>, order: u32) -> Result<Self> {
        let s = b.len();
        if s == 0 || a.len() != s || a.iter().any(|row| row.len() > s) {
            return Err(Error::InvalidTable(format!("tableau shape: {} rows for {s} weights", a.len())));
        }
        let a: Vec<Vec<f64>> = a
            .into_iter()
            .map(|mut row| {
                row.resize(s, 0.0);
                row
            })
            .collect();
        if a.iter().flatten().chain(&b).any(|x| !x.is_finite()) {
            return Err(Error::InvalidTable("non-finite coefficient".into()));
        }
        let sums: Vec<f64> = a.iter().map(|row| row.iter().sum()).collect();
        let c = match c {
            Some(c) => {
                if c.len() != s {
                    return Err(Error::InvalidTable(format!("{} nodes for {s} stages", c.len())));
                }
                for (i, (ci, si)) in c.iter().zip(&sums).enumerate() {
                    if (ci - si).abs() > TABLE_TOL {
                        return Err(Error::InvalidTable(format!(
                            "row {i} sums to {si} but c = {ci}"
                        )));
                    }
                }
                c
            }
            None => sums,
        };
        let total: f64 = b.iter().sum();
        if (total - 1.0).abs() > TABLE_TOL {
            return Err(Error::InvalidTable(format!("weights sum to {total}")));
        }
        let explicit = (0..s).all(|i| (i..s).all(|j| a[i][j] == 0.0));
        Ok(Self {
            a,
            b,
            c,
            order,
            explicit,
        })
    }

    /// The classical fourth-order method.
    pub fn rk4() -> Self {
        Self::new(
            vec![vec![], vec![0.5], vec![0.0, 0.5], vec![0.0, 0.0, 1.0]],
            vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
            Some(vec![0.0, 0.5, 0.5, 1.0]),
            4,
        )
        .expect("valid tableau")
    }

    /// Three-stage Gauss-Legendre collocation, order 6.
    pub fn gl6() -> Self {
        let s = 15f64.sqrt();
        Self::new(
            vec![
                vec![5.0 / 36.0, 2.0 / 9.0 - s / 15.0, 5.0 / 36.0 - s / 30.0],
                vec![5.0 / 36.0 + s / 24.0, 2.0 / 9.0, 5.0 / 36.0 - s / 24.0],
                vec![5.0 / 36.0 + s / 30.0, 2.0 / 9.0 + s / 15.0, 5.0 / 36.0],
            ],
            vec![5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0],
            None,
            6,
        )
        .expect("valid tableau")
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    pub fn a(&self) -> &[Vec<f64>] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn is_explicit(&self) -> bool {
        self.explicit
    }
}

/// Drift/kick coefficients: each stage drifts by `a_k h` and then kicks by
/// `b_k h` at the advanced time.
#[derive(Clone, Debug, PartialEq)]
pub struct SplittingTable {
    a: Vec<f64>,
    b: Vec<f64>,
    order: u32,
}

impl SplittingTable {
    pub fn new(a: Vec<f64>, b: Vec<f64>, order: u32) -> Result<Self> {
        if a.is_empty() || a.len() != b.len() {
            return Err(Error::InvalidTable(format!("{} drifts and {} kicks", a.len(), b.len())));
        }
        if a.iter().chain(&b).any(|x| !x.is_finite()) {
            return Err(Error::InvalidTable("non-finite coefficient".into()));
        }
        for (name, v) in [("drift", &a), ("kick", &b)] {
            let total: f64 = v.iter().sum();
            if (total - 1.0).abs() > TABLE_TOL {
                return Err(Error::InvalidTable(format!("{name} coefficients sum to {total}")));
            }
        }
        Ok(Self { a, b, order })
    }

    /// Stormer-Verlet: half drift, kick, half drift.
    pub fn leapfrog() -> Self {
        Self::new(vec![0.5, 0.5], vec![1.0, 0.0], 2).expect("valid table")
    }

    pub fn stages(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// True when a step starts with a kick (no leading drift) and ends with
    /// one, so consecutive steps share a kick.
    pub fn first_same_as_last(&self) -> bool {
        self.a[0] == 0.0 && *self.b.last().expect("non-empty") != 0.0
    }

    /// Kicks per step after merging, times two units.
    pub fn analytic_step_cost(&self) -> CostLedger {
        let kicks = self.b.iter().filter(|&&b| b != 0.0).count() - usize::from(self.first_same_as_last());
        CostLedger::from_units(2 * kicks as u64, 0)
    }
}

fn check_dims(problem: &HillProblem, phi: &BlockPropagator) -> Result<()> {
    if phi.half_dim() != problem.dim() {
        return Err(Error::DimensionMismatch(format!(
            "propagator of half dimension {} for a problem of dimension {}",
            phi.half_dim(),
            problem.dim()
        )));
    }
    if phi.is_augmented() && !problem.has_forcing() {
        return Err(Error::MissingForcing);
    }
    Ok(())
}

/// `-M(t) top`, plus `f(t)` in the last column when augmented.
fn force_slab(problem: &HillProblem, t: f64, top: &Matrix, augmented: bool, ledger: &mut CostLedger) -> Matrix {
    let m = problem.eval(t);
    let mut out = block_times_slab(&m, top, ledger).scaled(-1.0);
    if augmented {
        let last = out.cols() - 1;
        if let Some(f) = problem.forcing_at(t) {
            for (i, fi) in f.iter().enumerate() {
                out[(i, last)] += fi;
            }
        }
    }
    out
}

/// One implicit Gauss-Legendre step. Returns the number of sweeps.
///
/// Each sweep updates the position stages from the current velocity stages
/// (free), then evaluates `-M Z` on all stages (2 units each) and updates the
/// velocity stages. The iteration stops when the largest change of any stage
/// entry is at most `tol (1 + max|Phi|)`.
pub fn step_rkgl6(
    problem: &HillProblem,
    t: f64,
    h: f64,
    phi: &mut BlockPropagator,
    tol: f64,
    max_iter: usize,
) -> Result<usize> {
    step_implicit(problem, &ButcherTableau::gl6(), t, h, phi, tol, max_iter)
}

fn step_implicit(
    problem: &HillProblem,
    tableau: &ButcherTableau,
    t: f64,
    h: f64,
    phi: &mut BlockPropagator,
    tol: f64,
    max_iter: usize,
) -> Result<usize> {
    check_dims(problem, phi)?;
    if !(tol > 0.0) || max_iter == 0 {
        return Err(Error::InvalidTable(format!("tolerance {tol}, {max_iter} iterations")));
    }
    let s = tableau.stages();
    let augmented = phi.is_augmented();
    let top = phi.top().clone();
    let bottom = phi.bottom().clone();
    let scale = 1.0 + top.max_abs().max(bottom.max_abs());
    let mut zt = vec![top.clone(); s];
    let mut zb = vec![bottom.clone(); s];
    let mut kb: Vec<Matrix>;
    let combine = |base: &Matrix, row: &[f64], slabs: &[Matrix]| {
        let mut out = base.clone();
        for (a, z) in row.iter().zip(slabs) {
            out.axpy(h * a, z);
        }
        out
    };
    let mut sweeps = 0;
    loop {
        sweeps += 1;
        let new_zt: Vec<Matrix> = (0..s).map(|i| combine(&top, &tableau.a[i], &zb)).collect();
        kb = (0..s)
            .map(|j| force_slab(problem, t + tableau.c[j] * h, &new_zt[j], augmented, &mut phi.ledger))
            .collect();
        let new_zb: Vec<Matrix> = (0..s).map(|i| combine(&bottom, &tableau.a[i], &kb)).collect();
        let change = zt
            .iter()
            .zip(&new_zt)
            .chain(zb.iter().zip(&new_zb))
            .map(|(old, new)| (old - new).max_abs())
            .fold(0.0, f64::max);
        zt = new_zt;
        zb = new_zb;
        if change <= tol * scale {
            break;
        }
        if sweeps >= max_iter {
            return Err(Error::FixedPointNoConvergence {
                iterations: sweeps,
                residual: change,
            });
        }
    }
    let new_top = combine(&top, &tableau.b, &zb);
    let new_bottom = combine(&bottom, &tableau.b, &kb);
    phi.set_slabs(new_top, new_bottom);
    Ok(sweeps)
}

/// One splitting step without cross-step merging: all kicks are applied.
pub fn step_splitting(problem: &HillProblem, t: f64, h: f64, phi: &mut BlockPropagator, table: &SplittingTable) -> Result<()> {
    check_dims(problem, phi)?;
    let mut stepper = SplittingStepper {
        table,
        problem,
        pending: 0.0,
        defer: false,
    };
    stepper.run(t, h, phi)
}

/// Left-multiplies by the kick `[[I, 0], [-w M(t), I]]` (with `w f(t)` in
/// the extra column when augmented).
fn kick(problem: &HillProblem, t: f64, w: f64, phi: &mut BlockPropagator) {
    if w == 0.0 {
        return;
    }
    let augmented = phi.is_augmented();
    let (top, bottom, ledger) = phi.slabs_mut();
    let force = force_slab(problem, t, top, augmented, ledger);
    bottom.axpy(w, &force);
}

fn drift(a: f64, phi: &mut BlockPropagator) {
    if a == 0.0 {
        return;
    }
    let (top, bottom, _) = phi.slabs_mut();
    top.axpy(a, bottom);
}

struct SplittingStepper<'a> {
    table: &'a SplittingTable,
    problem: &'a HillProblem,
    /// Weight `b h` of the deferred final kick.
    pending: f64,
    defer: bool,
}

impl SplittingStepper<'_> {
    fn run(&mut self, t: f64, h: f64, phi: &mut BlockPropagator) -> Result<()> {
        let merge = self.table.first_same_as_last();
        let s = self.table.stages();
        let mut tau = t;
        for k in 0..s {
            let a = self.table.a[k];
            drift(a * h, phi);
            tau += a * h;
            let mut weight = self.table.b[k] * h;
            if merge && k == 0 {
                weight += std::mem::take(&mut self.pending);
            }
            if merge && self.defer && k == s - 1 {
                self.pending = weight;
                continue;
            }
            kick(self.problem, tau, weight, phi);
        }
        Ok(())
    }
}

impl Stepper for SplittingStepper<'_> {
    fn step(&mut self, t: f64, h: f64, phi: &mut BlockPropagator, _out: &mut Integration) -> Result<()> {
        self.run(t, h, phi)
    }

    fn finish(&mut self, t: f64, phi: &mut BlockPropagator, _out: &mut Integration) -> Result<()> {
        kick(self.problem, t, std::mem::take(&mut self.pending), phi);
        Ok(())
    }

    fn peek(&self, t: f64, phi: &BlockPropagator) -> Result<BlockPropagator> {
        let mut copy = phi.clone();
        kick(self.problem, t, self.pending, &mut copy);
        Ok(copy)
    }
}

/// One explicit Runge-Kutta step on `Phi' = A(t) Phi`; 2 units per stage.
pub fn step_explicit_rk(
    system: &FirstOrderSystem,
    t: f64,
    h: f64,
    phi: &mut BlockPropagator,
    tableau: &ButcherTableau,
) -> Result<()> {
    if phi.is_augmented() != system.is_augmented() {
        return Err(Error::DimensionMismatch("augmentation of system and propagator differ".into()));
    }
    explicit_step(system.problem(), t, h, phi, tableau)
}

fn explicit_step(problem: &HillProblem, t: f64, h: f64, phi: &mut BlockPropagator, tableau: &ButcherTableau) -> Result<()> {
    check_dims(problem, phi)?;
    if !tableau.is_explicit() {
        return Err(Error::InvalidTable("explicit step with an implicit tableau".into()));
    }
    let s = tableau.stages();
    let augmented = phi.is_augmented();
    let top = phi.top().clone();
    let bottom = phi.bottom().clone();
    let mut kt: Vec<Matrix> = Vec::with_capacity(s);
    let mut kb: Vec<Matrix> = Vec::with_capacity(s);
    for i in 0..s {
        let mut zt = top.clone();
        let mut zb = bottom.clone();
        for j in 0..i {
            let a = tableau.a[i][j];
            if a != 0.0 {
                zt.axpy(h * a, &kt[j]);
                zb.axpy(h * a, &kb[j]);
            }
        }
        // stages with zero weight that feed no later stage are skipped
        let used = tableau.b[i] != 0.0 || (i + 1..s).any(|k| tableau.a[k][i] != 0.0);
        if used {
            kb.push(force_slab(problem, t + tableau.c[i] * h, &zt, augmented, &mut phi.ledger));
        } else {
            kb.push(Matrix::zeros(zb.rows(), zb.cols()));
        }
        kt.push(zb);
    }
    let mut new_top = top;
    let mut new_bottom = bottom;
    for i in 0..s {
        new_top.axpy(h * tableau.b[i], &kt[i]);
        new_bottom.axpy(h * tableau.b[i], &kb[i]);
    }
    phi.set_slabs(new_top, new_bottom);
    Ok(())
}

/// Implicit three-stage Gauss-Legendre Runge-Kutta, order 6.
#[derive(Clone, Debug)]
pub struct Rkgl6 {
    tableau: ButcherTableau,
    pub tol: f64,
    pub max_iter: usize,
}

impl Rkgl6 {
    pub fn new(tol: f64, max_iter: usize) -> Self {
        Self {
            tableau: ButcherTableau::gl6(),
            tol,
            max_iter,
        }
    }
}

impl Default for Rkgl6 {
    fn default() -> Self {
        Self::new(DEFAULT_TOL, DEFAULT_MAX_ITER)
    }
}

struct ImplicitStepper<'a> {
    method: &'a Rkgl6,
    problem: &'a HillProblem,
}

impl Stepper for ImplicitStepper<'_> {
    fn step(&mut self, t: f64, h: f64, phi: &mut BlockPropagator, out: &mut Integration) -> Result<()> {
        let n = step_implicit(
            self.problem,
            &self.method.tableau,
            t,
            h,
            phi,
            self.method.tol,
            self.method.max_iter,
        )?;
        out.iterations.push(n);
        Ok(())
    }
}

impl Integrator for Rkgl6 {
    fn name(&self) -> &str {
        "rkgl6"
    }

    fn order(&self) -> u32 {
        6
    }

    fn is_symplectic(&self) -> bool {
        true
    }

    fn steady_state_cost(&self) -> Option<CostLedger> {
        None
    }

    fn integrate_with(
        &self,
        problem: &HillProblem,
        h: f64,
        t0: f64,
        t1: f64,
        phi0: BlockPropagator,
        observer: Option<Observer<'_>>,
    ) -> Result<Integration> {
        check_dims(problem, &phi0)?;
        drive(&mut ImplicitStepper { method: self, problem }, t0, t1, h, phi0, observer)
    }
}

/// Splitting method with a drift/kick table.
#[derive(Clone, Debug)]
pub struct SplittingMethod {
    name: String,
    table: SplittingTable,
}

impl SplittingMethod {
    pub fn new(name: impl Into<String>, table: SplittingTable) -> Self {
        Self {
            name: name.into(),
            table,
        }
    }

    pub fn leapfrog() -> Self {
        Self::new("leapfrog", SplittingTable::leapfrog())
    }

    pub fn table(&self) -> &SplittingTable {
        &self.table
    }
}

impl Integrator for SplittingMethod {
    fn name(&self) -> &str {
        &self.name
    }

    fn order(&self) -> u32 {
        self.table.order
    }

    fn is_symplectic(&self) -> bool {
        true
    }

    fn steady_state_cost(&self) -> Option<CostLedger> {
        Some(self.table.analytic_step_cost())
    }

    fn integrate_with(
        &self,
        problem: &HillProblem,
        h: f64,
        t0: f64,
        t1: f64,
        phi0: BlockPropagator,
        observer: Option<Observer<'_>>,
    ) -> Result<Integration> {
        check_dims(problem, &phi0)?;
        let mut stepper = SplittingStepper {
            table: &self.table,
            problem,
            pending: 0.0,
            defer: true,
        };
        drive(&mut stepper, t0, t1, h, phi0, observer)
    }
}

/// Explicit Runge-Kutta method with a Butcher tableau.
#[derive(Clone, Debug)]
pub struct ExplicitRk {
    name: String,
    tableau: ButcherTableau,
}

impl ExplicitRk {
    pub fn new(name: impl Into<String>, tableau: ButcherTableau) -> Result<Self> {
        if !tableau.is_explicit() {
            return Err(Error::InvalidTable("tableau is not explicit".into()));
        }
        Ok(Self {
            name: name.into(),
            tableau,
        })
    }

    pub fn rk4() -> Self {
        Self::new("rk4", ButcherTableau::rk4()).expect("explicit")
    }

    pub fn tableau(&self) -> &ButcherTableau {
        &self.tableau
    }

    fn used_stages(&self) -> u64 {
        let t = &self.tableau;
        let s = t.stages();
        (0..s)
            .filter(|&i| t.b[i] != 0.0 || (i + 1..s).any(|k| t.a[k][i] != 0.0))
            .count() as u64
    }
}

struct ExplicitStepper<'a> {
    tableau: &'a ButcherTableau,
    problem: &'a HillProblem,
}

impl Stepper for ExplicitStepper<'_> {
    fn step(&mut self, t: f64, h: f64, phi: &mut BlockPropagator, _out: &mut Integration) -> Result<()> {
        explicit_step(self.problem, t, h, phi, self.tableau)
    }
}

impl Integrator for ExplicitRk {
    fn name(&self) -> &str {
        &self.name
    }

    fn order(&self) -> u32 {
        self.tableau.order
    }

    fn is_symplectic(&self) -> bool {
        false
    }

    fn steady_state_cost(&self) -> Option<CostLedger> {
        Some(CostLedger::from_units(2 * self.used_stages(), 0))
    }

    fn integrate_with(
        &self,
        problem: &HillProblem,
        h: f64,
        t0: f64,
        t1: f64,
        phi0: BlockPropagator,
        observer: Option<Observer<'_>>,
    ) -> Result<Integration> {
        check_dims(problem, &phi0)?;
        let mut stepper = ExplicitStepper {
            tableau: &self.tableau,
            problem,
        };
        drive(&mut stepper, t0, t1, h, phi0, observer)
    }
}

/// A coefficient entry: a number or a `"p/q"` fraction string.
#[derive(Deserialize)]
#[serde(untagged)]
enum Num {
    Value(f64),
    Text(String),
}

impl Num {
    fn value(&self) -> Result<f64> {
        match self {
            Num::Value(x) => Ok(*x),
            Num::Text(s) => {
                let parse = |t: &str| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad coefficient `{s}`")))
                };
                match s.split_once('/') {
                    Some((p, q)) => Ok(parse(p)? / parse(q)?),
                    None => parse(s),
                }
            }
        }
    }
}

fn values(v: &[Num]) -> Result<Vec<f64>> {
    v.iter().map(Num::value).collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ButcherData {
    a: Vec<Vec<Num>>,
    b: Vec<Num>,
    #[serde(default)]
    c: Option<Vec<Num>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SplittingData {
    a: Vec<Num>,
    b: Vec<Num>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CfData {
    rows: Vec<Vec<Num>>,
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum CoefficientFile {
    Butcher {
        order: u32,
        #[serde(default)]
        name: Option<String>,
        data: ButcherData,
    },
    Splitting {
        order: u32,
        #[serde(default)]
        name: Option<String>,
        data: SplittingData,
    },
    Cf {
        order: u32,
        #[serde(default)]
        name: Option<String>,
        data: CfData,
    },
}

/// A method read from a coefficient file.
#[derive(Clone, Debug)]
pub enum LoadedMethod {
    Butcher(ExplicitRk),
    Splitting(SplittingMethod),
    Cf(MethodScheme),
}

impl LoadedMethod {
    pub fn declared_order(&self) -> u32 {
        self.integrator().order()
    }

    pub fn integrator(&self) -> &dyn Integrator {
        match self {
            LoadedMethod::Butcher(m) => m,
            LoadedMethod::Splitting(m) => m,
            LoadedMethod::Cf(m) => m,
        }
    }

    pub fn into_integrator(self) -> Box<dyn Integrator> {
        match self {
            LoadedMethod::Butcher(m) => Box::new(m),
            LoadedMethod::Splitting(m) => Box::new(m),
            LoadedMethod::Cf(m) => Box::new(m),
        }
    }
}

/// Parses a coefficient file: `{"type": "butcher" | "splitting" | "cf",
/// "order": n, "name": optional, "data": {...}}`.
pub fn load_coefficients(text: &str) -> Result<LoadedMethod> {
    let file: CoefficientFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    match file {
        CoefficientFile::Butcher { order, name, data } => {
            let a = data.a.iter().map(|r| values(r)).collect::<Result<Vec<_>>>()?;
            let c = data.c.as_deref().map(values).transpose()?;
            let tableau = ButcherTableau::new(a, values(&data.b)?, c, order)?;
            Ok(LoadedMethod::Butcher(ExplicitRk::new(name.unwrap_or_else(|| "rk".into()), tableau)?))
        }
        CoefficientFile::Splitting { order, name, data } => {
            let table = SplittingTable::new(values(&data.a)?, values(&data.b)?, order)?;
            Ok(LoadedMethod::Splitting(SplittingMethod::new(
                name.unwrap_or_else(|| "splitting".into()),
                table,
            )))
        }
        CoefficientFile::Cf { order, name, data } => {
            let rows = data.rows.iter().map(|r| values(r)).collect::<Result<Vec<_>>>()?;
            Ok(LoadedMethod::Cf(MethodScheme::cf(name.unwrap_or_else(|| "cf".into()), order, &rows)?))
        }
    }
}

/// Measured convergence order of `method` on Mathieu(5, 1) over one period,
/// against the eighth-order scheme at `h = pi/400`. Fails when the measured
/// slope falls more than 0.5 below the declared order.
pub fn verify_order(method: &dyn Integrator) -> Result<f64> {
    let problem = mathieu(5.0, 1.0);
    let reference = MethodScheme::phi5_8()
        .integrate(&problem, PI / 400.0, 0.0, PI, BlockPropagator::identity(1))?
        .propagator
        .to_dense();
    let mut points = Vec::new();
    for n in [20u32, 40, 80] {
        let h = PI / f64::from(n);
        let phi = method.integrate(&problem, h, 0.0, PI, BlockPropagator::identity(1))?.propagator;
        let err = (&phi.to_dense() - &reference).norm1();
        if err > 1e-11 {
            points.push((h.ln(), err.ln()));
        }
    }
    if points.len() < 2 {
        return Err(Error::InvalidTable(format!(
            "{}: errors too small to measure an order",
            method.name()
        )));
    }
    let slope = fit_slope(&points);
    let declared = f64::from(method.order());
    if slope < declared - 0.5 {
        return Err(Error::InvalidTable(format!(
            "{}: declared order {declared}, measured {slope:.2}",
            method.name()
        )));
    }
    Ok(slope)
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
