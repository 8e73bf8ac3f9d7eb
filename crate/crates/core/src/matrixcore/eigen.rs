use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use super::Matrix;
use crate::error::{Error, Result};

const MAX_SCHUR_ITER: usize = 10_000;

/// All eigenvalues (with multiplicity) of a square real matrix, sorted by
/// real part and then imaginary part.
///
/// Uses a Hessenberg reduction followed by shifted QR (real Schur form).
pub fn eigenvalues(m: &Matrix) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigenvalues of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_finite() {
        return Err(Error::InvalidProblem("matrix has non-finite entries".into()));
    }
    let n = m.rows();
    let dm = DMatrix::from_row_slice(n, n, m.as_slice());
    let schur = Schur::try_new(dm, f64::EPSILON, MAX_SCHUR_ITER).ok_or(Error::EigenNoConvergence {
        max_iter: MAX_SCHUR_ITER,
    })?;
    let mut eig: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(eig)
}
