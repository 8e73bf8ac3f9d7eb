//! Commutator-free compositions of structured exponentials.
//!
//! A scheme is a list of factors applied left to right in time. Each factor
//! is the exponential of a linear combination of the graded generators of
//! the step and of the nilpotent commutators `[212] = [a2, [a1, a2]]` and
//! `[313] = [a3, [a1, a3]]` (lower blocks `2h q^2` and `2h r^2`), or the
//! `diag(L, L^-T)` approximation of `exp(x [1112])`, whose upper block is
//! `W = h^2 (3 q p + p q)`.
//!
//! A factor with a nonzero `a1` coefficient is a harmonic block; one without
//! is a shear. Schemes whose first and last factors are of the same mergeable
//! class can defer the last factor of a step and fold it into the first
//! factor of the next one.

use crate::error::{Error, Result};
use crate::hillmodel::HillProblem;
use crate::integrator::{drive, Diagnostic, Integration, Integrator, Observer, Stepper};
use crate::matrixcore::{mul_counted, BlockPropagator, CostLedger, Matrix};
use crate::quadrature::{generators_for, gl6, gl8, GradedGenerators, QuadratureRule};
use crate::sympexp::{
    exp_shear_apply, harmonic_apply, harmonic_exp, lambda_block_apply, symplectify, DEFAULT_TRUNCATION,
};

/// Coefficients of one exponent: `a1 alpha_1 + ... + a4 alpha_4 +
/// b212 [212] + b313 [313]`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Combo {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub b212: f64,
    pub b313: f64,
}

impl Combo {
    pub const fn new(a1: f64, a2: f64, a3: f64, a4: f64, b212: f64, b313: f64) -> Self {
        Self {
            a1,
            a2,
            a3,
            a4,
            b212,
            b313,
        }
    }

    /// The same combination with the odd generators negated.
    pub const fn reflect(self) -> Self {
        Self {
            a2: -self.a2,
            a4: -self.a4,
            ..self
        }
    }

    pub fn is_shear(&self) -> bool {
        self.a1 == 0.0
    }

    fn lower(&self, ctx: &StepContext) -> Result<Matrix> {
        let g = &ctx.gens;
        let mut out = g.p.scaled(self.a1);
        out.axpy(self.a2, &g.q);
        out.axpy(self.a3, &g.r);
        if self.a4 != 0.0 {
            let s = g.s.as_ref().ok_or_else(|| Error::Unsupported("alpha_4 needs an eighth-order rule".into()))?;
            out.axpy(self.a4, s);
        }
        if self.b212 != 0.0 {
            out.axpy(self.b212, ctx.q2.as_ref().expect("prepared"));
        }
        if self.b313 != 0.0 {
            out.axpy(self.b313, ctx.r2.as_ref().expect("prepared"));
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Factor {
    Exp(Combo),
    /// `diag(L, L^-T)` with `L = I + w + w^2/2`, `w = x W`.
    Lambda(f64),
}

impl Factor {
    fn mergeable_with(&self, other: &Factor) -> bool {
        match (self, other) {
            (Factor::Lambda(_), Factor::Lambda(_)) => true,
            (Factor::Exp(a), Factor::Exp(b)) => a.is_shear() && b.is_shear(),
            _ => false,
        }
    }
}

/// How the last factor of a step is carried into the next step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FsalMode {
    None,
    /// Outer `diag(L, L^-T)` blocks merged by adding exponents; the error is
    /// `O(h^10)`.
    MergeOuter,
    /// Outer shears merged exactly by adding lower blocks.
    Fcwl,
}

/// A composition scheme with its quadrature rule and truncation index.
#[derive(Clone, Debug, PartialEq)]
pub struct MethodScheme {
    name: String,
    order: u32,
    rule: QuadratureRule,
    factors: Vec<Factor>,
    fsal: FsalMode,
    truncation: usize,
}

impl MethodScheme {
    pub fn new(
        name: impl Into<String>,
        order: u32,
        rule: QuadratureRule,
        factors: Vec<Factor>,
        fsal: FsalMode,
    ) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidTable("a scheme needs at least one factor".into()));
        }
        if order > rule.order() {
            return Err(Error::InvalidRule(format!(
                "order-{} rule for an order-{order} scheme",
                rule.order()
            )));
        }
        let uses_a4 = factors.iter().any(|f| matches!(f, Factor::Exp(c) if c.a4 != 0.0));
        if uses_a4 && order < 8 {
            return Err(Error::InvalidTable("alpha_4 terms need an eighth-order scheme".into()));
        }
        if fsal != FsalMode::None {
            let (first, last) = (factors[0], factors[factors.len() - 1]);
            let kind_ok = match fsal {
                FsalMode::MergeOuter => matches!(first, Factor::Lambda(_)),
                FsalMode::Fcwl => matches!(first, Factor::Exp(c) if c.is_shear()),
                FsalMode::None => true,
            };
            if factors.len() < 2 || !kind_ok || !first.mergeable_with(&last) {
                return Err(Error::InvalidTable(format!(
                    "first and last factors cannot be merged under {fsal:?}"
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            order,
            rule,
            factors,
            fsal,
            truncation: DEFAULT_TRUNCATION,
        })
    }

    /// Sixth order, one harmonic block between two shears and two
    /// `diag(L, L^-T)` blocks; the outer blocks merge across steps, so the
    /// block between two steps carries twice the end weight, `1/720`.
    pub fn phi1_6() -> Self {
        let x = [1.0, 1.0 / 20.0, 1.0 / 12.0, 1.0 / 60.0, -1.0 / 2880.0, 1.0 / 1440.0];
        let shear = Combo::new(0.0, x[2], x[3], 0.0, x[4], 0.0);
        let factors = vec![
            Factor::Lambda(x[5]),
            Factor::Exp(shear.reflect()),
            Factor::Exp(Combo::new(x[0], 0.0, x[1], 0.0, 0.0, 0.0)),
            Factor::Exp(shear),
            Factor::Lambda(x[5]),
        ];
        Self::new("phi1_6", 6, gl6(), factors, FsalMode::MergeOuter).expect("valid scheme")
    }

    /// Sixth order, two harmonic blocks of half step between two shears that
    /// merge across steps.
    pub fn phi2_6() -> Self {
        let x = PHI2_6_COEFFICIENTS;
        let shear = Combo::new(0.0, x[0], x[1], 0.0, x[2], 0.0);
        let harmonic = Combo::new(x[3], x[4], x[5], 0.0, 0.0, 0.0);
        let factors = vec![
            Factor::Exp(shear.reflect()),
            Factor::Exp(harmonic.reflect()),
            Factor::Exp(harmonic),
            Factor::Exp(shear),
        ];
        Self::new("phi2_6", 6, gl6(), factors, FsalMode::Fcwl).expect("valid scheme")
    }

    /// Sixth order, three harmonic blocks.
    pub fn phi3_6() -> Self {
        let s5 = 5f64.sqrt();
        let x = [
            (5.0 - s5) / 10.0,
            (5.0 - s5) / 24.0,
            (5.0 - s5) / 60.0,
            1.0 / s5,
            (-5.0 + 2.0 * s5) / 60.0,
            (-11.0 + 5.0 * s5) / 8640.0,
        ];
        let outer = Combo::new(x[0], x[1], x[2], 0.0, 0.0, 0.0);
        let factors = vec![
            Factor::Exp(outer.reflect()),
            Factor::Exp(Combo::new(x[3], 0.0, x[4], 0.0, x[5], 0.0)),
            Factor::Exp(outer),
        ];
        Self::new("phi3_6", 6, gl6(), factors, FsalMode::None).expect("valid scheme")
    }

    /// Eighth order, five harmonic blocks and two shears.
    pub fn phi5_8() -> Self {
        let x = PHI5_8_COEFFICIENTS;
        let outer = Combo::new(x[6], x[7], x[8], x[9], x[10], 0.0);
        let shear = Combo::new(0.0, x[11], x[12], x[13], x[14], x[15]);
        let inner = Combo::new(x[2], x[3], x[4], x[5], 0.0, 0.0);
        let factors = vec![
            Factor::Exp(outer.reflect()),
            Factor::Exp(shear.reflect()),
            Factor::Exp(inner.reflect()),
            Factor::Exp(Combo::new(x[0], 0.0, x[1], 0.0, 0.0, 0.0)),
            Factor::Exp(inner),
            Factor::Exp(shear),
            Factor::Exp(outer),
        ];
        Self::new("phi5_8", 8, gl8(), factors, FsalMode::None).expect("valid scheme")
    }

    /// Commutator-free scheme from a table: one row per exponential in
    /// application order, holding the coefficients of `alpha_1..alpha_k`
    /// (`k <= 4`).
    pub fn cf(name: impl Into<String>, order: u32, rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidTable("empty commutator-free table".into()));
        }
        let mut factors = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            if row.is_empty() || row.len() > 4 || row.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidTable(format!("row {i} must hold 1 to 4 finite coefficients")));
            }
            let at = |k: usize| row.get(k).copied().unwrap_or(0.0);
            factors.push(Factor::Exp(Combo::new(at(0), at(1), at(2), at(3), 0.0, 0.0)));
        }
        let total: f64 = rows.iter().map(|r| r[0]).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidTable(format!("alpha_1 coefficients sum to {total}")));
        }
        let rule = if order > 6 || rows.iter().any(|r| r.len() == 4) { gl8() } else { gl6() };
        Self::new(name, order.max(1), rule, factors, FsalMode::None)
    }

    /// Replaces the quadrature rule; it must be at least as accurate as the
    /// scheme.
    pub fn with_rule(mut self, rule: QuadratureRule) -> Result<Self> {
        if rule.order() < self.order {
            return Err(Error::InvalidRule(format!(
                "order-{} rule for an order-{} scheme",
                rule.order(),
                self.order
            )));
        }
        self.rule = rule;
        Ok(self)
    }

    pub fn with_truncation(mut self, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Unsupported("harmonic truncation index must be at least 1".into()));
        }
        self.truncation = m;
        Ok(self)
    }

    pub fn scheme_name(&self) -> &str {
        &self.name
    }

    pub fn scheme_order(&self) -> u32 {
        self.order
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn fsal(&self) -> FsalMode {
        self.fsal
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// Sum of the `alpha_1` coefficients; one for a consistent scheme.
    pub fn alpha1_weight(&self) -> f64 {
        self.factors
            .iter()
            .map(|f| match f {
                Factor::Exp(c) => c.a1,
                Factor::Lambda(_) => 0.0,
            })
            .sum()
    }

    fn needs(&self) -> (bool, bool, bool) {
        let mut q2 = false;
        let mut r2 = false;
        let mut w = false;
        for f in &self.factors {
            match f {
                Factor::Exp(c) => {
                    q2 |= c.b212 != 0.0;
                    r2 |= c.b313 != 0.0;
                }
                Factor::Lambda(_) => w = true,
            }
        }
        (q2, r2, w)
    }

    /// Closed-form cost of an interior step when no block vanishes.
    pub fn analytic_step_cost(&self) -> CostLedger {
        let (q2, r2, w) = self.needs();
        let mut cost = CostLedger::new();
        cost.charge_products(u64::from(q2) + u64::from(r2) + u64::from(w));
        let m = self.truncation as u64;
        let deferred = usize::from(self.fsal != FsalMode::None);
        for f in &self.factors[deferred..] {
            match f {
                // build, correction (one product, one solve), application
                Factor::Exp(c) if !c.is_shear() => {
                    cost.charge_products(m + 1 + 8);
                    cost.charge_solves(1);
                }
                Factor::Exp(_) => cost.charge_products(2),
                Factor::Lambda(_) => {
                    cost.charge_products(1 + 4);
                    cost.charge_solves(1);
                }
            }
        }
        cost
    }

    fn check(&self, problem: &HillProblem, phi: &BlockPropagator) -> Result<()> {
        if !problem.is_symmetric() {
            return Err(Error::Unsupported(format!(
                "{} requires a symmetric problem",
                self.name
            )));
        }
        if phi.is_augmented() {
            return Err(Error::Unsupported(format!(
                "{} does not handle forced (augmented) systems",
                self.name
            )));
        }
        if phi.half_dim() != problem.dim() {
            return Err(Error::DimensionMismatch(format!(
                "propagator of half dimension {} for a problem of dimension {}",
                phi.half_dim(),
                problem.dim()
            )));
        }
        Ok(())
    }

    /// One self-contained step (no factor is carried over). Returns the
    /// diagnostics it raised.
    pub fn step(&self, problem: &HillProblem, t: f64, h: f64, phi: &mut BlockPropagator) -> Result<Vec<Diagnostic>> {
        self.check(problem, phi)?;
        let mut stepper = MagnusStepper {
            scheme: self,
            problem,
            pending: None,
            defer: false,
        };
        let mut diagnostics = Vec::new();
        stepper.run(t, h, phi, &mut diagnostics)?;
        Ok(diagnostics)
    }

    fn context(&self, problem: &HillProblem, t: f64, h: f64, ledger: &mut CostLedger) -> Result<StepContext> {
        let (gens, _) = generators_for(problem, &self.rule, t, h, self.order)?;
        let (need_q2, need_r2, need_w) = self.needs();
        let q2 = if need_q2 {
            Some(mul_counted(&gens.q, &gens.q, ledger)?.scaled(2.0 * h))
        } else {
            None
        };
        let r2 = if need_r2 {
            Some(mul_counted(&gens.r, &gens.r, ledger)?.scaled(2.0 * h))
        } else {
            None
        };
        let w = if need_w {
            let qp = mul_counted(&gens.q, &gens.p, ledger)?;
            let mut w = qp.scaled(3.0);
            w.axpy(1.0, &qp.transpose());
            Some(w.scaled(h * h))
        } else {
            None
        };
        Ok(StepContext { gens, q2, r2, w })
    }
}

/// `x1..x6` of the two-exponential scheme. The `alpha_3` weight of the
/// harmonic blocks is `1/40`, which makes the total `alpha_3` weight `1/12`.
pub const PHI2_6_COEFFICIENTS: [f64; 6] = [1.0 / 60.0, 1.0 / 60.0, 1.0 / 43200.0, 0.5, 2.0 / 15.0, 1.0 / 40.0];

/// The sixteen coefficients of the eighth-order scheme, `x1..x16`. The
/// weights of `alpha_3` and `[313]` (`x2, x5, x9, x13, x16`) solve the
/// eighth-order conditions; the remaining ones agree with the published
/// sixteen-digit values to about `1e-12`.
pub const PHI5_8_COEFFICIENTS: [f64; 16] = [
    0.640_336_328_637_669_3,
    0.080_080_050_876_766_09,
    -0.401_789_526_329_141_9,
    -0.117_018_058_369_598_06,
    -0.128_691_390_196_698_94,
    -0.037_672_834_961_731_88,
    0.581_621_362_010_307_3,
    0.260_935_059_218_100_1,
    0.116_034_897_140_048_38,
    0.050_674_837_729_392_08,
    -0.000_093_684_638_769_260_82,
    -0.012_729_279_683_317_525,
    0.014_283_134_284_934_181,
    -0.001_748_713_311_168_666_5,
    -0.000_092_825_035_179_317_3,
    0.000_031_643_617_646_521_05,
];

/// Per-step data shared by all factors of one step.
struct StepContext {
    gens: GradedGenerators,
    /// `[212]` lower block, `2h q^2`.
    q2: Option<Matrix>,
    /// `[313]` lower block, `2h r^2`.
    r2: Option<Matrix>,
    /// `W = h^2 (3 q p + p q)`, using `p q = (q p)^T`.
    w: Option<Matrix>,
}

struct MagnusStepper<'a> {
    scheme: &'a MethodScheme,
    problem: &'a HillProblem,
    /// Data of the deferred last factor: shear lower block or `w`.
    pending: Option<Matrix>,
    defer: bool,
}

impl MagnusStepper<'_> {
    fn factor_data(&self, factor: &Factor, ctx: &StepContext) -> Result<Matrix> {
        match factor {
            Factor::Exp(c) => c.lower(ctx),
            Factor::Lambda(x) => Ok(ctx.w.as_ref().expect("prepared").scaled(*x)),
        }
    }

    fn apply(
        &self,
        factor: &Factor,
        data: &Matrix,
        index: usize,
        t: f64,
        h: f64,
        phi: &mut BlockPropagator,
        diagnostics: &mut Vec<Diagnostic>,
    ) -> Result<()> {
        match factor {
            Factor::Lambda(_) => lambda_block_apply(data, phi),
            Factor::Exp(c) if c.is_shear() => exp_shear_apply(data, 1.0, phi),
            Factor::Exp(c) => {
                let tau = c.a1 * h;
                let raw = harmonic_exp(&data.scaled(1.0 / tau), tau, self.scheme.truncation, &mut phi.ledger)?;
                let factors = match symplectify(&raw, &mut phi.ledger) {
                    Ok(f) => f,
                    Err(Error::CorrectionUnavailable { condition }) => {
                        diagnostics.push(Diagnostic::CorrectionSkipped {
                            t,
                            factor: index,
                            condition,
                        });
                        raw
                    }
                    Err(e) => return Err(e),
                };
                harmonic_apply(&factors, phi)
            }
        }
    }

    fn run(&mut self, t: f64, h: f64, phi: &mut BlockPropagator, diagnostics: &mut Vec<Diagnostic>) -> Result<()> {
        let ctx = self.scheme.context(self.problem, t, h, &mut phi.ledger)?;
        let merging = self.scheme.fsal != FsalMode::None;
        let n = self.scheme.factors.len();
        for (i, factor) in self.scheme.factors.iter().enumerate() {
            let mut data = self.factor_data(factor, &ctx)?;
            if merging && i == 0 {
                if let Some(prev) = self.pending.take() {
                    data.axpy(1.0, &prev);
                }
            }
            if merging && self.defer && i == n - 1 {
                self.pending = Some(data);
                continue;
            }
            self.apply(factor, &data, i, t, h, phi, diagnostics)?;
        }
        Ok(())
    }

    fn flush(&self, phi: &mut BlockPropagator) -> Result<()> {
        if let Some(data) = &self.pending {
            let last = self.scheme.factors.len() - 1;
            // mergeable factors never need a correction, so no diagnostics
            self.apply(&self.scheme.factors[last], data, last, 0.0, 1.0, phi, &mut Vec::new())?;
        }
        Ok(())
    }
}

impl Stepper for MagnusStepper<'_> {
    fn step(&mut self, t: f64, h: f64, phi: &mut BlockPropagator, out: &mut Integration) -> Result<()> {
        self.run(t, h, phi, &mut out.diagnostics)
    }

    fn finish(&mut self, _t: f64, phi: &mut BlockPropagator, _out: &mut Integration) -> Result<()> {
        self.flush(phi)?;
        self.pending = None;
        Ok(())
    }

    fn peek(&self, _t: f64, phi: &BlockPropagator) -> Result<BlockPropagator> {
        let mut copy = phi.clone();
        self.flush(&mut copy)?;
        Ok(copy)
    }
}

impl Integrator for MethodScheme {
    fn name(&self) -> &str {
        &self.name
    }

    fn order(&self) -> u32 {
        self.order
    }

    fn is_symplectic(&self) -> bool {
        true
    }

    fn steady_state_cost(&self) -> Option<CostLedger> {
        Some(self.analytic_step_cost())
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
        self.check(problem, &phi0)?;
        let mut stepper = MagnusStepper {
            scheme: self,
            problem,
            pending: None,
            defer: true,
        };
        drive(&mut stepper, t0, t1, h, phi0, observer)
    }
}

pub fn step_phi1_6(problem: &HillProblem, t: f64, h: f64, phi: &mut BlockPropagator) -> Result<Vec<Diagnostic>> {
    MethodScheme::phi1_6().step(problem, t, h, phi)
}

pub fn step_phi2_6(problem: &HillProblem, t: f64, h: f64, phi: &mut BlockPropagator) -> Result<Vec<Diagnostic>> {
    MethodScheme::phi2_6().step(problem, t, h, phi)
}

pub fn step_phi3_6(problem: &HillProblem, t: f64, h: f64, phi: &mut BlockPropagator) -> Result<Vec<Diagnostic>> {
    MethodScheme::phi3_6().step(problem, t, h, phi)
}

pub fn step_phi5_8(problem: &HillProblem, t: f64, h: f64, phi: &mut BlockPropagator) -> Result<Vec<Diagnostic>> {
    MethodScheme::phi5_8().step(problem, t, h, phi)
}

/// One step of a commutator-free scheme built with [`MethodScheme::cf`].
pub fn step_cf(
    problem: &HillProblem,
    t: f64,
    h: f64,
    phi: &mut BlockPropagator,
    scheme: &MethodScheme,
) -> Result<Vec<Diagnostic>> {
    scheme.step(problem, t, h, phi)
}

/// Closed-form blocks of the two-exponential sixth-order scheme in terms of
/// the samples `M1, M2, M3` at the three Gauss-Legendre nodes: the outer
/// shears are `[[I, 0], [h C_k, I]]` and the harmonic blocks
/// `exp((h/2) [[0, I], [D_k, 0]])`, applied in the order `C1, D1, D2, C2`.
#[derive(Clone, Debug, PartialEq)]
pub struct TableOneBlocks {
    pub c1: Matrix,
    pub c2: Matrix,
    pub d1: Matrix,
    pub d2: Matrix,
}

pub fn table_one_blocks(m: &[Matrix], h: f64) -> Result<TableOneBlocks> {
    let [m1, m2, m3] = m else {
        return Err(Error::DimensionMismatch(format!("{} samples, expected 3", m.len())));
    };
    let s15 = 15f64.sqrt();
    let k = m1 - m3;
    let mut l = m2.scaled(2.0);
    l.axpy(-1.0, m1);
    l.axpy(-1.0, m3);
    let f = k.matmul(&k)?.scaled(h * h);

    let mut common = l.scaled(1.0 / 18.0);
    common.axpy(1.0 / 12960.0, &f);
    let mut c1 = common.clone();
    c1.axpy(-s15 / 180.0, &k);
    let mut c2 = common;
    c2.axpy(s15 / 180.0, &k);

    let mut mid = m2.scaled(-1.0);
    mid.axpy(1.0 / 6.0, &l);
    let kd = 4.0 / (3.0 * s15);
    let mut d1 = mid.clone();
    d1.axpy(-kd, &k);
    let mut d2 = mid;
    d2.axpy(kd, &k);
    Ok(TableOneBlocks { c1, c2, d1, d2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hillmodel::{mathieu, HillProblem};
    use crate::quadrature::alphas_order6;
    use std::f64::consts::PI;

    fn constant(m: Matrix) -> HillProblem {
        let dim = m.rows();
        HillProblem::new("constant", dim, 1.0, true, move |_| m.clone()).unwrap()
    }

    #[test]
    fn consistency_weights() {
        for s in [
            MethodScheme::phi1_6(),
            MethodScheme::phi2_6(),
            MethodScheme::phi3_6(),
        ] {
            assert!((s.alpha1_weight() - 1.0).abs() < 1e-15, "{}", s.scheme_name());
        }
        let x = PHI5_8_COEFFICIENTS;
        assert!((2.0 * x[2] + x[0] + 2.0 * x[6] - 1.0).abs() < 1e-12);
        let published = [
            (0, 0.6403363286379515),
            (2, -0.4017895263297271),
            (3, -0.1170180583697493),
            (5, -0.0376728349617945),
            (6, 0.5816213620107513),
            (7, 0.2609350592183406),
            (9, 0.0506748377294480),
            (10, -0.0000936846387697),
            (11, -0.0127292796833454),
            (13, -0.0017487133111753),
            (14, -0.0000928250351798),
        ];
        for (i, v) in published {
            assert!((x[i] - v).abs() < 1e-12, "x{}", i + 1);
        }
    }

    #[test]
    fn alpha3_weights() {
        for s in [
            MethodScheme::phi1_6(),
            MethodScheme::phi2_6(),
            MethodScheme::phi3_6(),
            MethodScheme::phi5_8(),
        ] {
            let w: f64 = s
                .factors()
                .iter()
                .map(|f| match f {
                    Factor::Exp(c) => c.a3,
                    Factor::Lambda(_) => 0.0,
                })
                .sum();
            assert!((w - 1.0 / 12.0).abs() < 1e-13, "{}: {w}", s.scheme_name());
        }
    }

    #[test]
    fn analytic_costs() {
        assert_eq!(MethodScheme::phi1_6().analytic_step_cost(), CostLedger::from_units(27, 2));
        assert_eq!(MethodScheme::phi2_6().analytic_step_cost(), CostLedger::from_units(33, 2));
        assert_eq!(MethodScheme::phi3_6().analytic_step_cost(), CostLedger::from_units(47, 0));
        assert_eq!(MethodScheme::phi5_8().analytic_step_cost(), CostLedger::from_units(82, 2));
    }

    #[test]
    fn table_one_matches_generators() {
        let h = 0.37;
        let sym = |a: f64, b: f64, c: f64| Matrix::from_rows(&[[a, b], [b, c]]).unwrap();
        let ms = [sym(1.3, -0.2, 0.8), sym(0.4, 0.9, -1.1), sym(-0.6, 0.3, 2.0)];
        let blocks = table_one_blocks(&ms, h).unwrap();
        let g = alphas_order6(&ms, h).unwrap();
        let x = PHI2_6_COEFFICIENTS;
        let q2 = g.q.matmul(&g.q).unwrap().scaled(2.0 * h);

        let mut c1 = g.q.scaled(-x[0]);
        c1.axpy(x[1], &g.r);
        c1.axpy(x[2], &q2);
        let mut c2 = g.q.scaled(x[0]);
        c2.axpy(x[1], &g.r);
        c2.axpy(x[2], &q2);
        let mut d1 = g.p.scaled(x[3]);
        d1.axpy(-x[4], &g.q);
        d1.axpy(x[5], &g.r);
        let mut d2 = g.p.scaled(x[3]);
        d2.axpy(x[4], &g.q);
        d2.axpy(x[5], &g.r);

        let close = |a: &Matrix, b: &Matrix| (a - b).max_abs() <= 1e-14;
        assert!(close(&c1.scaled(1.0 / h), &blocks.c1));
        assert!(close(&c2.scaled(1.0 / h), &blocks.c2));
        assert!(close(&d1.scaled(2.0 / h), &blocks.d1));
        assert!(close(&d2.scaled(2.0 / h), &blocks.d2));
    }

    #[test]
    fn table_one_spot_check() {
        let z = Matrix::zeros(1, 1);
        let one = Matrix::identity(1);
        let b = table_one_blocks(&[one.clone(), z.clone(), z], 1.0).unwrap();
        assert!((b.d2[(0, 0)] - (4.0 / (3.0 * 15f64.sqrt()) - 1.0 / 6.0)).abs() < 1e-15);
    }

    #[test]
    fn qp_is_transpose_of_pq_for_symmetric_data() {
        let p = mathieu(5.0, 1.0);
        let pascal = crate::hillmodel::pascal_hill(3, 2.0);
        for prob in [p, pascal] {
            let (g, _) = generators_for(&prob, &gl6(), 0.3, 0.2, 6).unwrap();
            let qp = g.q.matmul(&g.p).unwrap();
            let pq = g.p.matmul(&g.q).unwrap();
            assert!((&qp - &pq.transpose()).max_abs() <= 8.0 * f64::EPSILON * qp.max_abs().max(1.0));
        }
    }

    #[test]
    fn autonomous_exactness() {
        let omega: f64 = 5.0;
        let p = mathieu(omega, 0.0);
        // with the default series the error is the truncation of the
        // harmonic blocks alone; longer series bring it to round-off
        for (s, tol) in [
            (MethodScheme::phi1_6(), 1e-6),
            (MethodScheme::phi2_6(), 1e-10),
            (MethodScheme::phi1_6().with_truncation(8).unwrap(), 1e-12),
            (MethodScheme::phi2_6().with_truncation(7).unwrap(), 1e-12),
            (MethodScheme::phi3_6().with_truncation(7).unwrap(), 1e-12),
            (MethodScheme::phi5_8().with_truncation(7).unwrap(), 1e-12),
        ] {
            let out = s.integrate(&p, PI / 10.0, 0.0, PI, BlockPropagator::identity(1)).unwrap();
            let phi = out.propagator.to_dense();
            let (c, sn) = ((omega * PI).cos(), (omega * PI).sin());
            let exact = Matrix::from_rows(&[[c, sn / omega], [-omega * sn, c]]).unwrap();
            let err = (&phi - &exact).norm1();
            assert!(err < tol, "{} (m = {}): {err}", s.scheme_name(), s.truncation());
        }
    }

    #[test]
    fn merged_and_standalone_steps_agree() {
        let p = mathieu(5.0, 1.0);
        let h = PI / 40.0;
        for s in [MethodScheme::phi1_6(), MethodScheme::phi2_6()] {
            let merged = s.integrate(&p, h, 0.0, 10.0 * h, BlockPropagator::identity(1)).unwrap();
            let mut phi = BlockPropagator::identity(1);
            for k in 0..10 {
                s.step(&p, k as f64 * h, h, &mut phi).unwrap();
            }
            let d = (&merged.propagator.to_dense() - &phi.to_dense()).max_abs();
            assert!(d < 1e-9, "{}: {d}", s.scheme_name());
        }
    }

    #[test]
    fn step_costs_are_steady() {
        let p = crate::hillmodel::pascal_hill(3, 1.0);
        for s in [
            MethodScheme::phi1_6(),
            MethodScheme::phi2_6(),
            MethodScheme::phi3_6(),
            MethodScheme::phi5_8(),
        ] {
            let out = s.integrate(&p, 0.05, 0.0, 0.5, BlockPropagator::identity(3)).unwrap();
            for c in &out.step_costs {
                assert_eq!(*c, s.analytic_step_cost(), "{}", s.scheme_name());
            }
        }
    }

    #[test]
    fn constant_problem_reduces_to_one_exponential() {
        let m = Matrix::from_rows(&[[2.0, 0.5], [0.5, 3.0]]).unwrap();
        let p = constant(m.clone());
        let h = 0.1;
        let mut phi = BlockPropagator::identity(2);
        step_phi2_6(&p, 0.0, h, &mut phi).unwrap();
        let mut direct = BlockPropagator::identity(2);
        let f = symplectify(
            &harmonic_exp(&m.scaled(-1.0), h, 5, &mut CostLedger::new()).unwrap(),
            &mut CostLedger::new(),
        )
        .unwrap();
        harmonic_apply(&f, &mut direct).unwrap();
        assert!((&phi.to_dense() - &direct.to_dense()).max_abs() < 1e-14);
    }

    #[test]
    fn cf_tables() {
        assert!(MethodScheme::cf("bad", 4, &[vec![0.5, 0.1]]).is_err());
        assert!(MethodScheme::cf("bad", 4, &[]).is_err());
        let midpoint = MethodScheme::cf("midpoint", 2, &[vec![1.0]]).unwrap();
        assert_eq!(midpoint.factors().len(), 1);
        let negative = MethodScheme::cf("neg", 2, &[vec![1.5], vec![-0.5]]).unwrap();
        let p = mathieu(2.0, 0.5);
        let mut phi = BlockPropagator::identity(1);
        step_cf(&p, 0.0, 0.1, &mut phi, &negative).unwrap();
        assert!(phi.symplectic_defect() < 1e-14);
    }

    #[test]
    fn rejects_asymmetric_and_augmented() {
        let m = Matrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]).unwrap();
        let p = HillProblem::new("skew", 2, 1.0, false, move |_| m.clone()).unwrap();
        assert!(MethodScheme::phi2_6().integrate(&p, 0.1, 0.0, 1.0, BlockPropagator::identity(2)).is_err());
        let q = mathieu(1.0, 1.0);
        assert!(MethodScheme::phi2_6()
            .integrate(&q, 0.1, 0.0, 1.0, BlockPropagator::identity_augmented(1))
            .is_err());
    }
}
