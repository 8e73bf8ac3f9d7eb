use super::{CostLedger, Matrix};
use crate::error::{Error, Result};

/// Condition cap applied by [`solve_counted`] unless the caller passes its own.
pub const DEFAULT_CONDITION_CAP: f64 = 1e13;

/// LU factorisation with partial pivoting, `P A = L U` packed in one matrix.
struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(a: &Matrix) -> Option<Lu> {
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, lu[(i, k)].abs()))
                .fold((k, -1.0), |best, x| if x.1 > best.1 { x } else { best });
            if pivot == 0.0 || !pivot.is_finite() {
                return None;
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
            }
            let d = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / d;
                lu[(i, k)] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        lu[(i, j)] -= f * lu[(k, j)];
                    }
                }
            }
        }
        Some(Lu { lu, perm })
    }

    fn solve(&self, rhs: &Matrix) -> Matrix {
        let n = self.lu.rows();
        let m = rhs.cols();
        let mut x = Matrix::from_fn(n, m, |i, j| rhs[(self.perm[i], j)]);
        for j in 0..m {
            for i in 0..n {
                let mut s = x[(i, j)];
                for k in 0..i {
                    s -= self.lu[(i, k)] * x[(k, j)];
                }
                x[(i, j)] = s;
            }
            for i in (0..n).rev() {
                let mut s = x[(i, j)];
                for k in i + 1..n {
                    s -= self.lu[(i, k)] * x[(k, j)];
                }
                x[(i, j)] = s / self.lu[(i, i)];
            }
        }
        x
    }
}

/// 1-norm condition number `||A||_1 ||A^-1||_1`; infinite when `A` is
/// exactly singular. Not charged to any ledger.
pub fn condition_estimate(a: &Matrix) -> f64 {
    match Lu::factor(a) {
        Some(lu) => a.norm1() * lu.solve(&Matrix::identity(a.rows())).norm1(),
        None => f64::INFINITY,
    }
}

/// Solves `a X = rhs`, charging 4/3 of a product.
///
/// Fails with [`Error::Singular`] when the condition estimate of `a` exceeds
/// `cap` (use [`DEFAULT_CONDITION_CAP`] for the library default).
pub fn solve_counted(a: &Matrix, rhs: &Matrix, ledger: &mut CostLedger, cap: f64) -> Result<Matrix> {
    if !a.is_square() || a.rows() != rhs.rows() {
        return Err(Error::DimensionMismatch(format!(
            "cannot solve {}x{} system with {}x{} right-hand side",
            a.rows(),
            a.cols(),
            rhs.rows(),
            rhs.cols()
        )));
    }
    let lu = Lu::factor(a).ok_or(Error::Singular {
        condition: f64::INFINITY,
    })?;
    let inv_norm = lu.solve(&Matrix::identity(a.rows())).norm1();
    let condition = a.norm1() * inv_norm;
    if !(condition <= cap) {
        return Err(Error::Singular { condition });
    }
    ledger.charge_solves(1);
    Ok(lu.solve(rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hillmodel::pascal_matrix;

    fn solve(a: &Matrix, b: &Matrix) -> Result<Matrix> {
        solve_counted(a, b, &mut CostLedger::new(), DEFAULT_CONDITION_CAP)
    }

    #[test]
    fn identity_solve_charges_four_thirds() {
        let b = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let mut ledger = CostLedger::new();
        let x = solve_counted(&Matrix::identity(2), &b, &mut ledger, DEFAULT_CONDITION_CAP).unwrap();
        assert_eq!(x, b);
        assert_eq!(ledger.thirds(), 4);
    }

    #[test]
    fn scalar_case() {
        let x = solve(&Matrix::identity(3).scaled(2.0), &Matrix::identity(3)).unwrap();
        assert_eq!(x, Matrix::identity(3).scaled(0.5));
    }

    #[test]
    fn pascal_self_solve() {
        let d = pascal_matrix(3);
        let x = solve(&d, &d).unwrap();
        assert!((&x - &Matrix::identity(3)).max_abs() < 1e-12);
    }

    #[test]
    fn residual_bound() {
        let d = pascal_matrix(6);
        let rhs = Matrix::from_fn(6, 6, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
        let x = solve(&d, &rhs).unwrap();
        let res = (&d.matmul(&x).unwrap() - &rhs).norm1();
        let bound = 10.0 * f64::EPSILON * rhs.norm1() * condition_estimate(&d);
        assert!(res <= bound, "{res} > {bound}");
    }

    #[test]
    fn singular_reports_condition() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap();
        let mut ledger = CostLedger::new();
        let err = solve_counted(&a, &Matrix::identity(2), &mut ledger, DEFAULT_CONDITION_CAP);
        assert!(matches!(err, Err(Error::Singular { .. })));
        assert_eq!(ledger.thirds(), 0);

        let nearly = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0 + 1e-15]]).unwrap();
        match solve(&nearly, &Matrix::identity(2)) {
            Err(Error::Singular { condition }) => assert!(condition > DEFAULT_CONDITION_CAP),
            other => panic!("expected singular error, got {other:?}"),
        }
    }
}
