//! Structured symplectic exponentials.
//!
//! Three factor classes appear in the composition schemes:
//!
//! - shears `[[I, 0], [sC, I]]`, the exact exponential of a nilpotent block;
//! - harmonic blocks `exp(tau [[0, I], [C, 0]]) = [[sigma, mu], [nu, sigma]]`
//!   with `sigma`, `mu` truncated Taylor series in `C` and `nu = C mu`,
//!   optionally corrected so the block is symplectic to round-off;
//! - `diag(L, L^-T)` with `L = I + W + W^2/2`, approximating the exponential
//!   of the `[1112]` commutator.
//!
//! Every kernel left-multiplies a [`BlockPropagator`] in block form and
//! charges its ledger; nothing is materialised as a dense `2r x 2r` matrix.

use crate::error::{Error, Result};
use crate::matrixcore::{
    block_times_slab, condition_estimate, mul_counted, solve_counted, symplectic_defect, BlockPropagator, CostLedger,
    Matrix, DEFAULT_CONDITION_CAP,
};

/// Default truncation index of the harmonic series.
pub const DEFAULT_TRUNCATION: usize = 5;

/// Largest condition estimate of `nu` for which the symplectic correction is
/// attempted.
pub const CORRECTION_CONDITION_CAP: f64 = 1e8;

const SYMMETRY_REL_TOL: f64 = 1e-10;

fn check_half_dim(block: &Matrix, phi: &BlockPropagator) -> Result<()> {
    let r = phi.half_dim();
    if block.rows() != r || block.cols() != r {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} block for a propagator of half dimension {r}",
            block.rows(),
            block.cols()
        )));
    }
    Ok(())
}

/// Left-multiplies `phi` by `[[I, 0], [scale * c, I]]`. Costs 2 units, or
/// nothing when `scale * c` vanishes.
pub fn exp_shear_apply(c: &Matrix, scale: f64, phi: &mut BlockPropagator) -> Result<()> {
    check_half_dim(c, phi)?;
    if scale == 0.0 {
        return Ok(());
    }
    let (top, bottom, ledger) = phi.slabs_mut();
    let kick = block_times_slab(c, top, ledger);
    bottom.axpy(scale, &kick);
    Ok(())
}

/// Truncated blocks of `exp(tau [[0, I], [c, 0]])`.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicExpFactors {
    pub sigma: Matrix,
    pub mu: Matrix,
    pub nu: Matrix,
    /// Symmetric correction added to `mu`; zero until [`symplectify`] runs.
    pub delta: Matrix,
    pub m: usize,
    pub tau: f64,
    /// `sigma - I` summed directly, to avoid cancellation when forming
    /// `sigma^2 - I`.
    sigma_minus_identity: Matrix,
    corrected: bool,
}

impl HarmonicExpFactors {
    pub fn dim(&self) -> usize {
        self.sigma.rows()
    }

    pub fn is_corrected(&self) -> bool {
        self.corrected
    }

    /// Upper-right block `mu + delta`.
    pub fn upper(&self) -> Matrix {
        &self.mu + &self.delta
    }

    /// The `2r x 2r` block `[[sigma, mu + delta], [nu, sigma]]`, for checks.
    pub fn assemble(&self) -> Matrix {
        let r = self.dim();
        let mut m = Matrix::zeros(2 * r, 2 * r);
        m.set_block(0, 0, &self.sigma);
        m.set_block(0, r, &self.upper());
        m.set_block(r, 0, &self.nu);
        m.set_block(r, r, &self.sigma);
        m
    }

    pub fn symplectic_defect(&self) -> f64 {
        symplectic_defect(&self.assemble()).expect("even by construction")
    }
}

/// Builds the truncated series: `sigma` up to `c^(m+1)`, `mu` up to `c^m`.
///
/// The powers `c^2 .. c^(m+1)` cost `m` units; `sigma`, `mu` and `nu = c mu`
/// are then free linear combinations of them.
pub fn harmonic_exp(c: &Matrix, tau: f64, m: usize, ledger: &mut CostLedger) -> Result<HarmonicExpFactors> {
    if !c.is_square() {
        return Err(Error::DimensionMismatch(format!("{}x{} harmonic block", c.rows(), c.cols())));
    }
    if m == 0 {
        return Err(Error::Unsupported("harmonic truncation index must be at least 1".into()));
    }
    if !c.is_symmetric(SYMMETRY_REL_TOL) {
        return Err(Error::Asymmetric {
            asymmetry: c.asymmetry(),
        });
    }
    let r = c.rows();
    let mut powers = Vec::with_capacity(m + 1);
    powers.push(c.clone());
    for k in 1..=m {
        let next = mul_counted(&powers[k - 1], c, ledger)?;
        powers.push(next);
    }

    // coef[k] = tau^k / k!
    let mut coef = vec![1.0; 2 * m + 4];
    for k in 1..coef.len() {
        coef[k] = coef[k - 1] * tau / k as f64;
    }

    let mut sigma_minus_identity = Matrix::zeros(r, r);
    for n in 1..=m + 1 {
        sigma_minus_identity.axpy(coef[2 * n], &powers[n - 1]);
    }
    let mut sigma = sigma_minus_identity.clone();
    sigma.add_diagonal(1.0);

    let mut mu = Matrix::zeros(r, r);
    mu.add_diagonal(tau);
    for n in 1..=m {
        mu.axpy(coef[2 * n + 1], &powers[n - 1]);
    }

    let mut nu = Matrix::zeros(r, r);
    for n in 0..=m {
        nu.axpy(coef[2 * n + 1], &powers[n]);
    }

    Ok(HarmonicExpFactors {
        sigma,
        mu,
        nu,
        delta: Matrix::zeros(r, r),
        m,
        tau,
        sigma_minus_identity,
        corrected: false,
    })
}

/// Adds the correction `delta = nu^-1 (sigma^2 - I) - mu`, making the block
/// symplectic. Costs one product and one solve (2 1/3 units).
///
/// Fails without charging anything when `nu` is singular or its condition
/// estimate exceeds [`CORRECTION_CONDITION_CAP`].
pub fn symplectify(factors: &HarmonicExpFactors, ledger: &mut CostLedger) -> Result<HarmonicExpFactors> {
    let condition = condition_estimate(&factors.nu);
    if !(condition <= CORRECTION_CONDITION_CAP) {
        return Err(Error::CorrectionUnavailable { condition });
    }
    let s = &factors.sigma_minus_identity;
    let mut sigma_plus_identity = s.clone();
    sigma_plus_identity.add_diagonal(2.0);
    let rhs = mul_counted(s, &sigma_plus_identity, ledger)?;
    let upper = solve_counted(&factors.nu, &rhs, ledger, CORRECTION_CONDITION_CAP)
        .map_err(|_| Error::CorrectionUnavailable { condition })?;
    let mut out = factors.clone();
    out.delta = &upper - &factors.mu;
    out.corrected = true;
    Ok(out)
}

/// Left-multiplies `phi` by `[[sigma, mu + delta], [nu, sigma]]`: four blocks
/// hitting `r x 2r` slabs, 8 units.
pub fn harmonic_apply(factors: &HarmonicExpFactors, phi: &mut BlockPropagator) -> Result<()> {
    check_half_dim(&factors.sigma, phi)?;
    let upper = factors.upper();
    let (top, bottom, ledger) = phi.slabs_mut();
    let mut new_top = block_times_slab(&factors.sigma, top, ledger);
    new_top.axpy(1.0, &block_times_slab(&upper, bottom, ledger));
    let mut new_bottom = block_times_slab(&factors.nu, top, ledger);
    new_bottom.axpy(1.0, &block_times_slab(&factors.sigma, bottom, ledger));
    phi.set_slabs(new_top, new_bottom);
    Ok(())
}

/// `L = I + w + w^2/2` and `L^-T`. Costs one product and one solve.
pub fn lambda_block(w: &Matrix, ledger: &mut CostLedger) -> Result<(Matrix, Matrix)> {
    let r = w.rows();
    let mut lambda = w + &mul_counted(w, w, ledger)?.scaled(0.5);
    lambda.add_diagonal(1.0);
    let inv_t = solve_counted(&lambda.transpose(), &Matrix::identity(r), ledger, DEFAULT_CONDITION_CAP)?;
    Ok((lambda, inv_t))
}

/// Left-multiplies `phi` by `diag(L, L^-T)`, `L = I + w + w^2/2`. Costs
/// 6 1/3 units; free when `w` vanishes.
pub fn lambda_block_apply(w: &Matrix, phi: &mut BlockPropagator) -> Result<()> {
    check_half_dim(w, phi)?;
    if w.is_zero() {
        return Ok(());
    }
    let (top, bottom, ledger) = phi.slabs_mut();
    let (lambda, inv_t) = lambda_block(w, ledger)?;
    let new_top = block_times_slab(&lambda, top, ledger);
    let new_bottom = block_times_slab(&inv_t, bottom, ledger);
    phi.set_slabs(new_top, new_bottom);
    Ok(())
}
