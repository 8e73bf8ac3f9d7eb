//! Monodromy matrices, eigenvalue-based stability reports and powers of the
//! monodromy.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hillmodel::HillProblem;
use crate::integrator::{Integration, Integrator};
use crate::matrixcore::{eigenvalues, symplectic_defect, BlockPropagator, CostLedger, Matrix};

/// Default half-width of the marginal band around `|lambda| = 1`.
pub const DEFAULT_TOL_CLASSIFY: f64 = 1e-9;

/// Regularisation of the logarithmic distance to the unit circle.
pub const LOG_DELTA: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stability {
    Stable,
    Marginal,
    Unstable,
}

impl Stability {
    pub fn classify(abs_minus_one: f64, tol: f64) -> Self {
        if abs_minus_one > tol {
            Stability::Unstable
        } else if abs_minus_one < -tol {
            Stability::Stable
        } else {
            Stability::Marginal
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Marginal => "marginal",
            Stability::Unstable => "unstable",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    pub eigenvalues: Vec<Complex64>,
    pub abs_minus_one: Vec<f64>,
    pub classification: Vec<Stability>,
    pub overall: Stability,
    /// Largest `|lambda_i lambda_j - 1|` over greedily matched pairs.
    pub pairing_defect: f64,
    pub symplectic_defect: f64,
    pub det_minus_one: f64,
    pub tol_classify: f64,
}

impl StabilityReport {
    /// `log10(| |lambda| - 1 + delta |)` per eigenvalue.
    pub fn log_distances(&self) -> Vec<f64> {
        self.abs_minus_one.iter().map(|&d| log_distance(d)).collect()
    }

    pub fn max_abs_minus_one(&self) -> f64 {
        self.abs_minus_one.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn log_distance(abs_minus_one: f64) -> f64 {
    (abs_minus_one + LOG_DELTA).abs().log10()
}

/// Integrates the identity over one period with `steps_per_period` steps.
pub fn monodromy(problem: &HillProblem, integrator: &dyn Integrator, steps_per_period: usize) -> Result<Integration> {
    if steps_per_period == 0 {
        return Err(Error::InvalidProblem("at least one step per period is required".into()));
    }
    let t = problem.period();
    integrator.integrate(
        problem,
        t / steps_per_period as f64,
        0.0,
        t,
        BlockPropagator::identity(problem.dim()),
    )
}

/// Stability report of the homogeneous part of `phi_t`.
pub fn stability(phi_t: &BlockPropagator, tol_classify: f64) -> Result<StabilityReport> {
    stability_of_matrix(&phi_t.homogeneous_part(), tol_classify)
}

pub fn stability_of_matrix(m: &Matrix, tol_classify: f64) -> Result<StabilityReport> {
    let eigenvalues = eigenvalues(m)?;
    let abs_minus_one: Vec<f64> = eigenvalues.iter().map(|l| l.norm() - 1.0).collect();
    let classification: Vec<Stability> = abs_minus_one
        .iter()
        .map(|&d| Stability::classify(d, tol_classify))
        .collect();
    let overall = if classification.contains(&Stability::Unstable) {
        Stability::Unstable
    } else if classification.contains(&Stability::Marginal) {
        Stability::Marginal
    } else {
        Stability::Stable
    };
    let det: Complex64 = eigenvalues.iter().product();
    Ok(StabilityReport {
        pairing_defect: pairing_defect(&eigenvalues),
        symplectic_defect: symplectic_defect(m)?,
        det_minus_one: (det - 1.0).norm(),
        eigenvalues,
        abs_minus_one,
        classification,
        overall,
        tol_classify,
    })
}

/// Greedy reciprocal matching: repeatedly pairs the two unmatched
/// eigenvalues whose product is closest to one.
pub fn pairing_defect(eigenvalues: &[Complex64]) -> f64 {
    let mut free: Vec<Complex64> = eigenvalues.to_vec();
    let mut worst: f64 = 0.0;
    while free.len() >= 2 {
        let mut best = (0, 1, f64::INFINITY);
        for i in 0..free.len() {
            for j in i + 1..free.len() {
                let d = (free[i] * free[j] - 1.0).norm();
                if d < best.2 {
                    best = (i, j, d);
                }
            }
        }
        worst = worst.max(best.2);
        free.swap_remove(best.1);
        free.swap_remove(best.0);
    }
    worst
}

fn counted_product(a: &Matrix, b: &Matrix, ledger: &mut CostLedger) -> Matrix {
    // four output blocks, each two block products
    ledger.charge_products(8);
    a.matmul(b).expect("equal square matrices")
}

/// `Phi(T)^n` by binary powering; each product is charged 8 units.
pub fn propagate_periods(phi_t: &BlockPropagator, n: u64) -> BlockPropagator {
    let base = phi_t.to_dense();
    let size = base.rows();
    let mut ledger = CostLedger::new();
    let mut result: Option<Matrix> = None;
    let mut power = base;
    let mut k = n;
    while k > 0 {
        if k & 1 == 1 {
            result = Some(match result {
                None => power.clone(),
                Some(r) => counted_product(&r, &power, &mut ledger),
            });
        }
        k >>= 1;
        if k > 0 {
            power = counted_product(&power, &power, &mut ledger);
        }
    }
    let dense = result.unwrap_or_else(|| Matrix::identity(size));
    let mut out = if phi_t.is_augmented() {
        let mut p = BlockPropagator::identity_augmented(phi_t.half_dim());
        let r = phi_t.half_dim();
        p.set_slabs(dense.block(0, 0, r, size), dense.block(r, 0, r, size));
        p
    } else {
        BlockPropagator::from_dense(&dense).expect("even square")
    };
    out.ledger = ledger;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hillmodel::mathieu;
    use crate::magnus::MethodScheme;
    use std::f64::consts::PI;

    fn rotation(theta: f64) -> Matrix {
        Matrix::from_rows(&[[theta.cos(), theta.sin()], [-theta.sin(), theta.cos()]]).unwrap()
    }

    #[test]
    fn identity_report() {
        let r = stability(&BlockPropagator::identity(2), DEFAULT_TOL_CLASSIFY).unwrap();
        assert_eq!(r.eigenvalues.len(), 4);
        assert!(r.eigenvalues.iter().all(|l| (l - 1.0).norm() < 1e-15));
        assert_eq!(r.overall, Stability::Marginal);
        assert_eq!(r.pairing_defect, 0.0);
    }

    #[test]
    fn hyperbolic_report() {
        let m = Matrix::from_diagonal(&[2.0, 0.5]);
        let r = stability_of_matrix(&m, DEFAULT_TOL_CLASSIFY).unwrap();
        assert_eq!(r.overall, Stability::Unstable);
        assert!(r.classification.contains(&Stability::Stable));
        assert_eq!(r.pairing_defect, 0.0);
        assert!(r.det_minus_one < 1e-15);
    }

    #[test]
    fn autonomous_monodromy_traces() {
        let s = MethodScheme::phi2_6();
        let half = monodromy(&mathieu(0.5, 0.0), &s, 10).unwrap().propagator;
        assert!(half.to_dense().trace().abs() < 1e-12);
        let five = monodromy(&mathieu(5.0, 0.0), &s, 10).unwrap().propagator;
        assert!((five.to_dense().trace() + 2.0).abs() < 1e-10);
    }

    #[test]
    fn powers() {
        let p = BlockPropagator::from_dense(&rotation(PI / 4.0)).unwrap();
        assert_eq!(propagate_periods(&p, 0).to_dense(), Matrix::identity(2));
        assert_eq!(propagate_periods(&p, 1).to_dense(), p.to_dense());
        let four = propagate_periods(&p, 4);
        assert!((&four.to_dense() + &Matrix::identity(2)).max_abs() < 1e-15);
        assert_eq!(four.ledger, CostLedger::from_units(16, 0));
    }

    #[test]
    fn log_distance_regularised() {
        assert!((log_distance(0.0) + 14.0).abs() < 1e-12);
        assert!((log_distance(1e-3) + 3.0).abs() < 1e-9);
    }

    #[test]
    fn classify_band() {
        assert_eq!(Stability::classify(2e-9, 1e-9), Stability::Unstable);
        assert_eq!(Stability::classify(-2e-9, 1e-9), Stability::Stable);
        assert_eq!(Stability::classify(5e-10, 1e-9), Stability::Marginal);
    }
}
