//! Quadrature rules and the graded generators of one step.
//!
//! Over a step `[t, t + h]` the generators `alpha_k` are scaled derivatives
//! of `A(s)` at the midpoint, `alpha_k = O(h^k)`. Only their lower-left
//! blocks carry information: `alpha_1 = [[0, hI], [p, 0]]` and
//! `alpha_k = [[0, 0], [lower_k, 0]]` for `k >= 2`. They are reconstructed
//! from samples of `M` at the quadrature nodes, either directly (three-point
//! Gauss-Legendre) or through the momentum integrals
//! `A^(i) = h sum_j b_j (c_j - 1/2)^i A_j`.

use crate::error::{Error, Result};
use crate::hillmodel::HillProblem;
use crate::matrixcore::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuleKind {
    GaussLegendre6,
    GaussLegendre8,
    Custom,
}

/// Nodes `c_j` in `(0, 1)`, weights `b_j` and the polynomial order of the
/// rule.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    order: u32,
    kind: RuleKind,
}

impl QuadratureRule {
    /// A user rule. Weights must sum to one within `1e-14`, nodes must be
    /// strictly increasing inside `(0, 1)` and the order must be at least 6.
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>, order: u32) -> Result<Self> {
        Self::with_kind(nodes, weights, order, RuleKind::Custom)
    }

    fn with_kind(nodes: Vec<f64>, weights: Vec<f64>, order: u32, kind: RuleKind) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(Error::InvalidRule(format!(
                "{} nodes and {} weights",
                nodes.len(),
                weights.len()
            )));
        }
        if order < 6 {
            return Err(Error::InvalidRule(format!("order {order} below 6")));
        }
        if nodes.iter().any(|&c| !(c > 0.0 && c < 1.0)) {
            return Err(Error::InvalidRule("nodes must lie in (0, 1)".into()));
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidRule("nodes must be strictly increasing".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-14 {
            return Err(Error::InvalidRule(format!("weights sum to {total}")));
        }
        Ok(Self {
            nodes,
            weights,
            order,
            kind,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `int_0^1 g(s) ds` approximated by the rule.
    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&c, &b)| b * g(c)).sum()
    }
}

/// Three-point Gauss-Legendre rule, order 6.
pub fn gl6() -> QuadratureRule {
    let d = 15f64.sqrt() / 10.0;
    QuadratureRule::with_kind(
        vec![0.5 - d, 0.5, 0.5 + d],
        vec![5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0],
        6,
        RuleKind::GaussLegendre6,
    )
    .expect("valid rule")
}

/// Offsets `(v1, v2)` of the four-point rule's nodes from `1/2`.
pub fn gl8_offsets() -> (f64, f64) {
    let s = 2.0 * (6.0f64 / 5.0).sqrt();
    (0.5 * ((3.0 + s) / 7.0).sqrt(), 0.5 * ((3.0 - s) / 7.0).sqrt())
}

/// Paired weights `(w1, w2)`: the outer nodes carry `w1 / 2` each, the
/// inner ones `w2 / 2`.
pub fn gl8_paired_weights() -> (f64, f64) {
    let s = (5.0f64 / 6.0).sqrt() / 6.0;
    (0.5 - s, 0.5 + s)
}

/// Four-point Gauss-Legendre rule, order 8.
pub fn gl8() -> QuadratureRule {
    let (v1, v2) = gl8_offsets();
    let (w1, w2) = gl8_paired_weights();
    QuadratureRule::with_kind(
        vec![0.5 - v1, 0.5 - v2, 0.5 + v2, 0.5 + v1],
        vec![0.5 * w1, 0.5 * w2, 0.5 * w2, 0.5 * w1],
        8,
        RuleKind::GaussLegendre8,
    )
    .expect("valid rule")
}

/// `A^(i) = h sum_j b_j (c_j - 1/2)^i A_j` for `i = 0..=imax`, where the
/// samples are the lower blocks `A_j = -M(t + c_j h)`.
pub fn momentum_integrals(samples: &[Matrix], rule: &QuadratureRule, h: f64, imax: usize) -> Result<Vec<Matrix>> {
    if samples.len() != rule.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} samples for a {}-point rule",
            samples.len(),
            rule.len()
        )));
    }
    if imax > 3 {
        return Err(Error::InvalidRule(format!("moments above third order requested ({imax})")));
    }
    let r = samples[0].rows();
    Ok((0..=imax)
        .map(|i| {
            let mut acc = Matrix::zeros(r, r);
            for ((a, &c), &b) in samples.iter().zip(rule.nodes()).zip(rule.weights()) {
                acc.axpy(h * b * (c - 0.5).powi(i as i32), a);
            }
            acc
        })
        .collect())
}

/// Lower-left blocks of the graded generators of one step, each carrying its
/// power of `h`: `p = hP`, `q = h^2 Q`, `r = h^3 R`, `s = h^4 S`.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedGenerators {
    pub h: f64,
    pub p: Matrix,
    pub q: Matrix,
    pub r: Matrix,
    pub s: Option<Matrix>,
}

impl GradedGenerators {
    pub fn dim(&self) -> usize {
        self.p.rows()
    }

    /// Lower block of `alpha_k`, `k` in `1..=4`.
    pub fn lower(&self, k: usize) -> Option<&Matrix> {
        match k {
            1 => Some(&self.p),
            2 => Some(&self.q),
            3 => Some(&self.r),
            4 => self.s.as_ref(),
            _ => None,
        }
    }

    /// Dense `2r x 2r` `alpha_k`; used for checks against the commutator
    /// algebra.
    pub fn dense(&self, k: usize) -> Option<Matrix> {
        let r = self.dim();
        let mut m = Matrix::zeros(2 * r, 2 * r);
        m.set_block(r, 0, self.lower(k)?);
        if k == 1 {
            m.set_block(0, r, &Matrix::identity(r).scaled(self.h));
        }
        Some(m)
    }
}

/// Generators from `M` sampled at the three Gauss-Legendre nodes:
/// `p = -h M2`, `q = -(sqrt15/3) h (M3 - M1)`, `r = -(10/3) h (M3 - 2 M2 + M1)`.
pub fn alphas_order6(m: &[Matrix], h: f64) -> Result<GradedGenerators> {
    let [m1, m2, m3] = m else {
        return Err(Error::DimensionMismatch(format!("{} samples, expected 3", m.len())));
    };
    let p = m2.scaled(-h);
    let q = (m3 - m1).scaled(-(15f64.sqrt() / 3.0) * h);
    let mut second = m3 - &m2.scaled(2.0);
    second.axpy(1.0, m1);
    let r = second.scaled(-(10.0 / 3.0) * h);
    Ok(GradedGenerators { h, p, q, r, s: None })
}

/// Sixth-order substitution through the momentum integrals (any rule of
/// order six or higher): `alpha_1 = 9/4 A0 - 15 A2`, `alpha_2 = 12 A1`,
/// `alpha_3 = -15 A0 + 180 A2`.
pub fn alphas_order6_from_moments(moments: &[Matrix], h: f64) -> Result<GradedGenerators> {
    if moments.len() < 3 {
        return Err(Error::DimensionMismatch(format!("{} moments, need 3", moments.len())));
    }
    let (a0, a1, a2) = (&moments[0], &moments[1], &moments[2]);
    let mut p = a0.scaled(9.0 / 4.0);
    p.axpy(-15.0, a2);
    let q = a1.scaled(12.0);
    let mut r = a0.scaled(-15.0);
    r.axpy(180.0, a2);
    Ok(GradedGenerators { h, p, q, r, s: None })
}

/// Eighth-order substitution: `alpha_1 = 3/4 (3 A0 - 20 A2)`,
/// `alpha_2 = 15 (5 A1 - 28 A3)`, `alpha_3 = -15 (A0 - 12 A2)`,
/// `alpha_4 = -140 (3 A1 - 20 A3)`.
pub fn alphas_order8(moments: &[Matrix], h: f64) -> Result<GradedGenerators> {
    if moments.len() < 4 {
        return Err(Error::DimensionMismatch(format!("{} moments, need 4", moments.len())));
    }
    let (a0, a1, a2, a3) = (&moments[0], &moments[1], &moments[2], &moments[3]);
    let mut p = a0.scaled(9.0 / 4.0);
    p.axpy(-15.0, a2);
    let mut q = a1.scaled(75.0);
    q.axpy(-420.0, a3);
    let mut r = a0.scaled(-15.0);
    r.axpy(180.0, a2);
    let mut s = a1.scaled(-420.0);
    s.axpy(2800.0, a3);
    Ok(GradedGenerators { h, p, q, r, s: Some(s) })
}

/// Which substitution produced a set of generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Substitution {
    /// Closed form at the three Gauss-Legendre nodes.
    GaussLegendre6Direct,
    /// Sixth-order momentum-integral substitution.
    Moments6,
    /// Eighth-order momentum-integral substitution.
    Moments8,
}

/// Samples `M` on `[t, t + h]` at the rule's nodes and builds generators
/// accurate to the requested method order (6 or 8).
pub fn generators_for(
    problem: &HillProblem,
    rule: &QuadratureRule,
    t: f64,
    h: f64,
    method_order: u32,
) -> Result<(GradedGenerators, Substitution)> {
    if rule.order() < method_order {
        return Err(Error::InvalidRule(format!(
            "rule of order {} cannot drive an order-{method_order} method",
            rule.order()
        )));
    }
    let m: Vec<Matrix> = rule.nodes().iter().map(|&c| problem.eval(t + c * h)).collect();
    if method_order <= 6 && rule.kind() == RuleKind::GaussLegendre6 {
        return Ok((alphas_order6(&m, h)?, Substitution::GaussLegendre6Direct));
    }
    let lower: Vec<Matrix> = m.iter().map(|x| x.scaled(-1.0)).collect();
    if method_order <= 6 {
        let moments = momentum_integrals(&lower, rule, h, 2)?;
        Ok((alphas_order6_from_moments(&moments, h)?, Substitution::Moments6))
    } else {
        let moments = momentum_integrals(&lower, rule, h, 3)?;
        Ok((alphas_order8(&moments, h)?, Substitution::Moments8))
    }
}
