use super::{symplectic_defect, CostLedger, Matrix};
use crate::error::{Error, Result};

/// Fundamental-matrix accumulator for the first-order Hill system.
///
/// Holds the top (`x`) and bottom (`x'`) row slabs of a `2r x 2r` matrix, or
/// of the first `2r` rows of a `(2r+1) x (2r+1)` augmented matrix whose last
/// row is fixed at `e_{2r+1}^T`. Each factor applied on the left charges the
/// attached ledger.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockPropagator {
    half_dim: usize,
    top: Matrix,
    bottom: Matrix,
    augmented: bool,
    pub ledger: CostLedger,
}

impl BlockPropagator {
    pub fn identity(r: usize) -> Self {
        Self::identity_impl(r, false)
    }

    /// Identity of the augmented `(2r+1)`-dimensional system.
    pub fn identity_augmented(r: usize) -> Self {
        Self::identity_impl(r, true)
    }

    fn identity_impl(r: usize, augmented: bool) -> Self {
        let n = 2 * r + usize::from(augmented);
        let top = Matrix::from_fn(r, n, |i, j| if i == j { 1.0 } else { 0.0 });
        let bottom = Matrix::from_fn(r, n, |i, j| if r + i == j { 1.0 } else { 0.0 });
        Self {
            half_dim: r,
            top,
            bottom,
            augmented,
            ledger: CostLedger::new(),
        }
    }

    /// Wraps a dense `2r x 2r` matrix with an empty ledger.
    pub fn from_dense(m: &Matrix) -> Result<Self> {
        if !m.is_square() || m.rows() % 2 != 0 {
            return Err(Error::DimensionMismatch(format!(
                "propagator needs an even square matrix, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let r = m.rows() / 2;
        Ok(Self {
            half_dim: r,
            top: m.block(0, 0, r, 2 * r),
            bottom: m.block(r, 0, r, 2 * r),
            augmented: false,
            ledger: CostLedger::new(),
        })
    }

    pub fn half_dim(&self) -> usize {
        self.half_dim
    }

    /// Number of columns: `2r`, or `2r + 1` when augmented.
    pub fn width(&self) -> usize {
        self.top.cols()
    }

    pub fn is_augmented(&self) -> bool {
        self.augmented
    }

    pub fn top(&self) -> &Matrix {
        &self.top
    }

    pub fn bottom(&self) -> &Matrix {
        &self.bottom
    }

    pub(crate) fn slabs_mut(&mut self) -> (&mut Matrix, &mut Matrix, &mut CostLedger) {
        (&mut self.top, &mut self.bottom, &mut self.ledger)
    }

    pub(crate) fn set_slabs(&mut self, top: Matrix, bottom: Matrix) {
        debug_assert_eq!((top.rows(), top.cols()), (self.half_dim, self.width()));
        debug_assert_eq!((bottom.rows(), bottom.cols()), (self.half_dim, self.width()));
        self.top = top;
        self.bottom = bottom;
    }

    /// Quadrant `(bi, bj)` of the `2r x 2r` part, each `r x r`.
    pub fn quadrant(&self, bi: usize, bj: usize) -> Matrix {
        let r = self.half_dim;
        let slab = if bi == 0 { &self.top } else { &self.bottom };
        slab.block(0, bj * r, r, r)
    }

    /// The full matrix (including the fixed last row when augmented).
    pub fn to_dense(&self) -> Matrix {
        let r = self.half_dim;
        let n = self.width();
        let mut m = Matrix::zeros(n, n);
        m.set_block(0, 0, &self.top);
        m.set_block(r, 0, &self.bottom);
        if self.augmented {
            m[(n - 1, n - 1)] = 1.0;
        }
        m
    }

    /// The homogeneous `2r x 2r` part.
    pub fn homogeneous_part(&self) -> Matrix {
        let r = self.half_dim;
        let mut m = Matrix::zeros(2 * r, 2 * r);
        m.set_block(0, 0, &self.top.block(0, 0, r, 2 * r));
        m.set_block(r, 0, &self.bottom.block(0, 0, r, 2 * r));
        m
    }

    /// Symplectic defect of the homogeneous part.
    pub fn symplectic_defect(&self) -> f64 {
        symplectic_defect(&self.homogeneous_part()).expect("even dimension by construction")
    }

    /// Applies the full matrix to a state vector of length `2r` (or `2r+1`).
    pub fn apply_to_vector(&self, z: &[f64]) -> Result<Vec<f64>> {
        let n = self.width();
        if z.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "state of length {} for a propagator of width {n}",
                z.len()
            )));
        }
        let dense = self.to_dense();
        Ok((0..n)
            .map(|i| dense.row(i).iter().zip(z).map(|(a, b)| a * b).sum())
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_layouts() {
        let p = BlockPropagator::identity(2);
        assert_eq!(p.to_dense(), Matrix::identity(4));
        assert_eq!(p.symplectic_defect(), 0.0);
        let a = BlockPropagator::identity_augmented(2);
        assert_eq!(a.width(), 5);
        assert_eq!(a.to_dense(), Matrix::identity(5));
        assert_eq!(a.homogeneous_part(), Matrix::identity(4));
    }

    #[test]
    fn dense_round_trip() {
        let m = Matrix::from_fn(4, 4, |i, j| (i * 4 + j) as f64);
        let p = BlockPropagator::from_dense(&m).unwrap();
        assert_eq!(p.to_dense(), m);
        assert_eq!(p.quadrant(1, 0), m.block(2, 0, 2, 2));
        assert!(BlockPropagator::from_dense(&Matrix::zeros(3, 3)).is_err());
    }
}
