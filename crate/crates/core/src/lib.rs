//! Symplectic exponential integrators for the matrix Hill equation
//! `x'' + M(t) x = 0`.
//!
//! The crate is organised bottom-up:
//!
//! - [`matrixcore`]: dense matrices, the cost ledger (in units of one
//!   `r x r` product), block propagators, eigenvalues.
//! - [`hillmodel`]: Hill problems, presets and the first-order form.
//! - [`quadrature`]: Gauss-Legendre rules and the graded generators.
//! - [`sympexp`]: structured symplectic exponentials (shears, harmonic
//!   blocks, the `diag(L, L^-T)` block).
//! - [`magnus`]: the composition schemes and their step executor.
//! - [`baselines`]: implicit Gauss-Legendre RK, splitting and explicit RK.
//! - [`floquet`]: monodromy matrices and stability reports.
//! - [`methods`]: the method registry used by the command-line tool.

pub mod baselines;
mod error;
pub mod floquet;
pub mod hillmodel;
pub mod integrator;
pub mod magnus;
pub mod matrixcore;
pub mod methods;
pub mod quadrature;
pub mod sympexp;

pub use error::{Error, Result};
pub use hillmodel::{mathieu, pascal_hill, paul_trap, FirstOrderSystem, HillProblem};
pub use integrator::{Diagnostic, Integration, Integrator};
pub use matrixcore::{BlockPropagator, CostLedger, Matrix};
pub use num_complex::Complex64;
