//! Hill problems `x'' + M(t) x = f(t)`, the bundled presets and the
//! first-order block form.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrixcore::Matrix;

pub type MatrixFn = Arc<dyn Fn(f64) -> Matrix + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

/// Relative tolerance used when checking the symmetry flag of a problem.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// A periodic matrix Hill equation.
///
/// The evaluator is trusted to be `period`-periodic; nothing here tries to
/// detect periodicity. `symmetric` asserts `M(t)^T = M(t)`, which is what
/// makes the fundamental matrix symplectic.
#[derive(Clone)]
pub struct HillProblem {
    name: String,
    dim: usize,
    period: f64,
    symmetric: bool,
    evaluator: MatrixFn,
    forcing: Option<VectorFn>,
}

impl HillProblem {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        period: f64,
        symmetric: bool,
        evaluator: impl Fn(f64) -> Matrix + Send + Sync + 'static,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidProblem("dimension must be positive".into()));
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidProblem(format!("period must be positive, got {period}")));
        }
        let probe = evaluator(0.0);
        if probe.rows() != dim || probe.cols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "evaluator returns {}x{}, declared dimension {dim}",
                probe.rows(),
                probe.cols()
            )));
        }
        Ok(Self {
            name: name.into(),
            dim,
            period,
            symmetric,
            evaluator: Arc::new(evaluator),
            forcing: None,
        })
    }

    /// Attaches a forcing term `f(t)` of length `dim`.
    pub fn with_forcing(mut self, f: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static) -> Result<Self> {
        let n = f(0.0).len();
        if n != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "forcing has length {n}, problem dimension {}",
                self.dim
            )));
        }
        self.forcing = Some(Arc::new(f));
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn has_forcing(&self) -> bool {
        self.forcing.is_some()
    }

    /// `M(t)`.
    pub fn eval(&self, t: f64) -> Matrix {
        (self.evaluator)(t)
    }

    pub fn forcing_at(&self, t: f64) -> Option<Vec<f64>> {
        self.forcing.as_ref().map(|f| f(t))
    }

    /// Checks the symmetry flag at the given times.
    pub fn check_symmetry(&self, times: &[f64]) -> Result<()> {
        if !self.symmetric {
            return Ok(());
        }
        for &t in times {
            let m = self.eval(t);
            let asym = m.asymmetry();
            if asym > SYMMETRY_TOL * m.norm1() {
                return Err(Error::Asymmetric { asymmetry: asym });
            }
        }
        Ok(())
    }
}

impl fmt::Debug for HillProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HillProblem")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("period", &self.period)
            .field("symmetric", &self.symmetric)
            .field("forcing", &self.forcing.is_some())
            .finish()
    }
}

/// Mathieu equation `x'' + (omega^2 + eps cos 2t) x = 0`, period `pi`.
pub fn mathieu(omega: f64, eps: f64) -> HillProblem {
    let w2 = omega * omega;
    HillProblem::new(format!("mathieu(omega={omega}, eps={eps})"), 1, PI, true, move |t| {
        Matrix::from_diagonal(&[w2 + eps * (2.0 * t).cos()])
    })
    .expect("valid preset")
}

/// Symmetric Pascal matrix: `D[0][j] = D[i][0] = 1`, `D[i][j] = D[i-1][j] + D[i][j-1]`.
pub fn pascal_matrix(r: usize) -> Matrix {
    let mut d = Matrix::zeros(r, r);
    for i in 0..r {
        for j in 0..r {
            d[(i, j)] = if i == 0 || j == 0 {
                1.0
            } else {
                d[(i - 1, j)] + d[(i, j - 1)]
            };
        }
    }
    d
}

/// `M(t) = r^2 I + D + eps cos(2t) I + (eps/10) cos(4t) I` with `D` the
/// Pascal matrix; period `pi`.
pub fn pascal_hill(r: usize, eps: f64) -> HillProblem {
    assert!(r >= 1, "pascal_hill needs r >= 1");
    let mut base = pascal_matrix(r);
    base.add_diagonal((r * r) as f64);
    HillProblem::new(format!("pascal_hill(r={r}, eps={eps})"), r, PI, true, move |t| {
        let mut m = base.clone();
        m.add_diagonal(eps * (2.0 * t).cos() + 0.1 * eps * (4.0 * t).cos());
        m
    })
    .expect("valid preset")
}

/// Quadrupole trap in dimensionless form:
/// `M(t) = diag(a + b cos t, -(a + b cos t), 0)`, period `2 pi`.
pub fn paul_trap(e_ratio0: f64, e_ratio1: f64) -> HillProblem {
    HillProblem::new(
        format!("paul_trap(e0={e_ratio0}, e1={e_ratio1})"),
        3,
        2.0 * PI,
        true,
        move |t| {
            let g = e_ratio0 + e_ratio1 * t.cos();
            Matrix::from_diagonal(&[g, -g, 0.0])
        },
    )
    .expect("valid preset")
}

/// First-order form `z' = A(t) z` of a Hill problem.
///
/// Homogeneous: `A = [[0, I], [-M, 0]]` of size `2r`. Augmented: size
/// `2r + 1` with `f(t)` in rows `r..2r` of the last column and a zero last
/// row.
#[derive(Clone, Debug)]
pub struct FirstOrderSystem {
    problem: HillProblem,
    augmented: bool,
}

pub fn to_first_order(p: &HillProblem, augment: bool) -> Result<FirstOrderSystem> {
    if augment && !p.has_forcing() {
        return Err(Error::MissingForcing);
    }
    Ok(FirstOrderSystem {
        problem: p.clone(),
        augmented: augment,
    })
}

impl FirstOrderSystem {
    pub fn dim(&self) -> usize {
        2 * self.problem.dim() + usize::from(self.augmented)
    }

    pub fn period(&self) -> f64 {
        self.problem.period()
    }

    pub fn is_augmented(&self) -> bool {
        self.augmented
    }

    pub fn problem(&self) -> &HillProblem {
        &self.problem
    }

    /// Dense `A(t)`.
    pub fn matrix(&self, t: f64) -> Matrix {
        let r = self.problem.dim();
        let mut a = Matrix::zeros(self.dim(), self.dim());
        a.set_block(0, r, &Matrix::identity(r));
        a.set_block(r, 0, &-&self.problem.eval(t));
        if self.augmented {
            let f = self.problem.forcing_at(t).expect("checked at construction");
            for (i, fi) in f.into_iter().enumerate() {
                a[(r + i, 2 * r)] = fi;
            }
        }
        a
    }
}

/// Problem description read from a JSON file:
/// `{"preset": "mathieu", "params": {"omega": 5, "eps": 1}}` or
/// `{"custom": {...}}` (see [`CustomSpec`]).
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum ProblemSpec {
    Preset {
        preset: String,
        #[serde(default)]
        params: PresetParams,
    },
    Custom {
        custom: CustomSpec,
    },
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PresetParams {
    pub omega: Option<f64>,
    pub eps: Option<f64>,
    pub r: Option<usize>,
    pub e_ratio0: Option<f64>,
    pub e_ratio1: Option<f64>,
}

/// Truncated Fourier form
/// `M(t) = A + sum_k B_k cos(2 pi k t / T) + sum_k C_k sin(2 pi k t / T)`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CustomSpec {
    pub period: f64,
    pub constant: Vec<Vec<f64>>,
    #[serde(default)]
    pub cos: Vec<FourierTerm>,
    #[serde(default)]
    pub sin: Vec<FourierTerm>,
    /// Constant forcing vector, if any.
    #[serde(default)]
    pub forcing: Option<Vec<f64>>,
    /// Declared symmetry; defaults to checking the supplied matrices.
    #[serde(default)]
    pub symmetric: Option<bool>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FourierTerm {
    pub harmonic: u32,
    pub matrix: Vec<Vec<f64>>,
}

impl ProblemSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn build(&self) -> Result<HillProblem> {
        match self {
            ProblemSpec::Preset { preset, params } => {
                let need = |v: Option<f64>, name: &str| {
                    v.ok_or_else(|| Error::InvalidProblem(format!("preset `{preset}` needs `{name}`")))
                };
                match preset.as_str() {
                    "mathieu" => Ok(mathieu(need(params.omega, "omega")?, need(params.eps, "eps")?)),
                    "pascal" | "pascal_hill" => {
                        let r = params
                            .r
                            .ok_or_else(|| Error::InvalidProblem("preset `pascal` needs `r`".into()))?;
                        if r == 0 {
                            return Err(Error::InvalidProblem("r must be positive".into()));
                        }
                        Ok(pascal_hill(r, need(params.eps, "eps")?))
                    }
                    "paul_trap" => Ok(paul_trap(
                        need(params.e_ratio0, "e_ratio0")?,
                        need(params.e_ratio1, "e_ratio1")?,
                    )),
                    other => Err(Error::InvalidProblem(format!("unknown preset `{other}`"))),
                }
            }
            ProblemSpec::Custom { custom } => custom.build(),
        }
    }
}

impl CustomSpec {
    pub fn build(&self) -> Result<HillProblem> {
        let a = Matrix::from_rows(&self.constant)?;
        if !a.is_square() || a.rows() == 0 {
            return Err(Error::InvalidProblem("constant term must be a non-empty square matrix".into()));
        }
        let r = a.rows();
        let load = |terms: &[FourierTerm]| -> Result<Vec<(f64, Matrix)>> {
            terms
                .iter()
                .map(|t| {
                    let m = Matrix::from_rows(&t.matrix)?;
                    if m.rows() != r || m.cols() != r {
                        return Err(Error::DimensionMismatch(format!(
                            "Fourier term of harmonic {} is {}x{}, expected {r}x{r}",
                            t.harmonic,
                            m.rows(),
                            m.cols()
                        )));
                    }
                    Ok((t.harmonic as f64, m))
                })
                .collect()
        };
        let cos = load(&self.cos)?;
        let sin = load(&self.sin)?;
        let all_symmetric = std::iter::once(&a)
            .chain(cos.iter().map(|(_, m)| m))
            .chain(sin.iter().map(|(_, m)| m))
            .all(|m| m.is_symmetric(SYMMETRY_TOL));
        let symmetric = match self.symmetric {
            Some(true) if !all_symmetric => {
                return Err(Error::InvalidProblem(
                    "declared symmetric but a Fourier coefficient is not".into(),
                ))
            }
            Some(flag) => flag,
            None => all_symmetric,
        };
        let omega = 2.0 * PI / self.period;
        let problem = HillProblem::new("custom", r, self.period, symmetric, move |t| {
            let mut m = a.clone();
            for (k, b) in &cos {
                m.axpy((k * omega * t).cos(), b);
            }
            for (k, c) in &sin {
                m.axpy((k * omega * t).sin(), c);
            }
            m
        })?;
        match &self.forcing {
            Some(f) => {
                let f = f.clone();
                problem.with_forcing(move |_| f.clone())
            }
            None => Ok(problem),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn scalar(m: &Matrix) -> f64 {
        assert_eq!((m.rows(), m.cols()), (1, 1));
        m[(0, 0)]
    }

    #[test]
    fn mathieu_values() {
        let p = mathieu(5.0, 0.0);
        assert_eq!(scalar(&p.eval(0.3)), 25.0);
        let p = mathieu(5.0, 1.0);
        assert_eq!(scalar(&p.eval(0.0)), 26.0);
        assert!((scalar(&p.eval(PI / 2.0)) - 24.0).abs() < 1e-14);
        assert!(scalar(&mathieu(0.0, 5.0).eval(PI / 4.0)).abs() < 1e-15);
        assert_eq!(p.period(), PI);
        assert!(p.is_symmetric());
    }

    #[test]
    fn pascal_values() {
        let d = pascal_matrix(3);
        assert_eq!(d, Matrix::from_rows(&[[1.0, 1.0, 1.0], [1.0, 2.0, 3.0], [1.0, 3.0, 6.0]]).unwrap());
        let m = pascal_hill(5, 5.0).eval(PI / 2.0);
        assert!((m[(0, 0)] - 21.5).abs() < 1e-13);
        assert_eq!(pascal_hill(1, 0.0).eval(1.234), Matrix::from_diagonal(&[2.0]));
    }

    #[test]
    fn pascal_entries_are_binomials() {
        fn binom(n: u64, k: u64) -> f64 {
            (1..=k).fold(1.0, |acc, i| acc * (n + 1 - i) as f64 / i as f64)
        }
        for r in 1..=8 {
            let d = pascal_matrix(r);
            for i in 0..r {
                for j in 0..r {
                    assert_eq!(d[(i, j)], binom((i + j) as u64, i as u64).round());
                }
            }
        }
    }

    #[test]
    fn paul_trap_values() {
        assert!(paul_trap(0.0, 0.0).eval(0.7).is_zero());
        assert_eq!(paul_trap(1.0, 0.0).eval(2.0), Matrix::from_diagonal(&[1.0, -1.0, 0.0]));
        let m = paul_trap(1.0, 2.0).eval(PI);
        assert!((&m - &Matrix::from_diagonal(&[-1.0, 1.0, 0.0])).max_abs() < 1e-15);
        assert_eq!(paul_trap(1.0, 2.0).period(), 2.0 * PI);
    }

    #[test]
    fn presets_are_periodic_and_symmetric() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let presets = [mathieu(5.0, 1.0), mathieu(0.3, 5.0), pascal_hill(5, 5.0), pascal_hill(7, 0.7), paul_trap(1.0, 2.0)];
        for p in &presets {
            let ts: Vec<f64> = (0..100).map(|_| rng.gen_range(-10.0..10.0)).collect();
            for &t in &ts {
                let a = p.eval(t);
                let b = p.eval(t + p.period());
                assert!((&b - &a).norm1() <= 1e-12 * (1.0 + a.norm1()), "{p:?} not periodic at {t}");
                assert_eq!(a.asymmetry(), 0.0);
            }
            p.check_symmetry(&ts).unwrap();
        }
    }

    #[test]
    fn first_order_blocks() {
        let sys = to_first_order(&mathieu(5.0, 0.0), false).unwrap();
        assert_eq!(sys.matrix(0.4), Matrix::from_rows(&[[0.0, 1.0], [-25.0, 0.0]]).unwrap());

        let sys = to_first_order(&pascal_hill(3, 1.0), false).unwrap();
        let a = sys.matrix(0.2);
        assert!(a.block(3, 3, 3, 3).is_zero());
        assert!(a.block(0, 0, 3, 3).is_zero());

        let forced = mathieu(5.0, 0.0).with_forcing(|_| vec![1.0]).unwrap();
        let sys = to_first_order(&forced, true).unwrap();
        let a = sys.matrix(0.0);
        assert_eq!(sys.dim(), 3);
        assert_eq!([a[(0, 2)], a[(1, 2)], a[(2, 2)]], [0.0, 1.0, 0.0]);
        assert!(a.row(2).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn augmenting_needs_forcing() {
        assert!(matches!(to_first_order(&mathieu(1.0, 1.0), true), Err(Error::MissingForcing)));
    }

    #[test]
    fn problem_spec_files() {
        let spec = ProblemSpec::from_json(r#"{"preset": "mathieu", "params": {"omega": 5, "eps": 1}}"#).unwrap();
        let p = spec.build().unwrap();
        assert_eq!(scalar(&p.eval(0.0)), 26.0);

        let spec = ProblemSpec::from_json(r#"{"preset": "pascal", "params": {"r": 3, "eps": 0}}"#).unwrap();
        assert_eq!(spec.build().unwrap().dim(), 3);

        let spec = ProblemSpec::from_json(
            r#"{"custom": {"period": 3.141592653589793, "constant": [[25.0]],
                "cos": [{"harmonic": 1, "matrix": [[1.0]]}]}}"#,
        )
        .unwrap();
        let p = spec.build().unwrap();
        let reference = mathieu(5.0, 1.0);
        for t in [0.0, 0.3, 1.7] {
            assert!((scalar(&p.eval(t)) - scalar(&reference.eval(t))).abs() < 1e-13);
        }
        assert!(p.is_symmetric());

        let bad = ProblemSpec::from_json(r#"{"preset": "mathieu", "params": {"omega": 5}}"#).unwrap();
        assert!(bad.build().is_err());
        assert!(ProblemSpec::from_json(r#"{"preset": "x", "params": {"bogus": 1}}"#).is_err());

        let asym = ProblemSpec::from_json(
            r#"{"custom": {"period": 1.0, "constant": [[1.0, 2.0], [0.0, 1.0]], "symmetric": true}}"#,
        )
        .unwrap();
        assert!(asym.build().is_err());
    }
}
