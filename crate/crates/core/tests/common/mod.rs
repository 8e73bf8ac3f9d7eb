//! Oracles shared by the integration tests. They are written against plain
//! row-major `Vec<f64>` buffers and never call the integrators under test.

#![allow(dead_code)]

use hillsym::{HillProblem, Matrix};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Dense `n x n` product of row-major buffers.
pub fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    c
}

fn first_order(problem: &HillProblem, t: f64) -> Vec<f64> {
    let r = problem.dim();
    let n = 2 * r;
    let m = problem.eval(t);
    let mut a = vec![0.0; n * n];
    for i in 0..r {
        a[i * n + r + i] = 1.0;
        for j in 0..r {
            a[(r + i) * n + j] = -m[(i, j)];
        }
    }
    a
}

/// Classical RK4 on `Z' = A(t) Z`, `Z(0) = I`, over one step count `n` on
/// `[0, t_end]`. Returns the `2r x 2r` fundamental matrix.
pub fn rk4_fundamental(problem: &HillProblem, t_end: f64, steps: usize) -> Matrix {
    let n = 2 * problem.dim();
    let h = t_end / steps as f64;
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    let axpy = |x: &[f64], s: f64, y: &[f64]| x.iter().zip(y).map(|(a, b)| a + s * b).collect::<Vec<_>>();
    for k in 0..steps {
        let t = k as f64 * h;
        let a0 = first_order(problem, t);
        let a1 = first_order(problem, t + 0.5 * h);
        let a2 = first_order(problem, t + h);
        let k1 = matmul(&a0, &z, n);
        let k2 = matmul(&a1, &axpy(&z, 0.5 * h, &k1), n);
        let k3 = matmul(&a1, &axpy(&z, 0.5 * h, &k2), n);
        let k4 = matmul(&a2, &axpy(&z, h, &k3), n);
        for i in 0..n * n {
            z[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    Matrix::from_row_slice(n, n, &z).unwrap()
}

/// Richardson extrapolation of [`rk4_fundamental`] over `steps` and
/// `2 steps`, cancelling the leading `h^4` error term.
pub fn rk4_extrapolated(problem: &HillProblem, t_end: f64, steps: usize) -> Matrix {
    let coarse = rk4_fundamental(problem, t_end, steps);
    let fine = rk4_fundamental(problem, t_end, 2 * steps);
    (&fine.scaled(16.0) - &coarse).scaled(1.0 / 15.0)
}

/// Matrix exponential by scaling and squaring of a 30-term Taylor series.
pub fn expm(a: &Matrix) -> Matrix {
    let n = a.rows();
    let norm = a.norm1();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scale = 0.5f64.powi(squarings as i32);
    let x: Vec<f64> = a.as_slice().iter().map(|v| v * scale).collect();
    let mut term = vec![0.0; n * n];
    let mut sum = vec![0.0; n * n];
    for i in 0..n {
        term[i * n + i] = 1.0;
        sum[i * n + i] = 1.0;
    }
    for k in 1..30 {
        term = matmul(&term, &x, n).into_iter().map(|v| v / k as f64).collect();
        for i in 0..n * n {
            sum[i] += term[i];
        }
    }
    for _ in 0..squarings {
        sum = matmul(&sum, &sum, n);
    }
    Matrix::from_row_slice(n, n, &sum).unwrap()
}

/// `[[0, I], [c, 0]]` scaled by `tau`.
pub fn harmonic_generator(c: &Matrix, tau: f64) -> Matrix {
    let r = c.rows();
    let mut g = Matrix::zeros(2 * r, 2 * r);
    for i in 0..r {
        g[(i, r + i)] = tau;
        for j in 0..r {
            g[(r + i, j)] = tau * c[(i, j)];
        }
    }
    g
}

/// Least-squares slope of `log(err)` against `log(h)`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Random symmetric `r x r` matrix rescaled to the given 1-norm.
pub fn random_symmetric(r: usize, norm: f64, seed: u64) -> Matrix {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut m = Matrix::zeros(r, r);
    for i in 0..r {
        for j in i..r {
            let v: f64 = rng.gen_range(-1.0..1.0);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    let s = norm / m.norm1();
    m.scaled(s)
}
