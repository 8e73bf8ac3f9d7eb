//! The common integration interface and the fixed-step driver.

use crate::error::{Error, Result};
use crate::hillmodel::HillProblem;
use crate::matrixcore::{BlockPropagator, CostLedger};

/// Relative tolerance on `(t1 - t0) / h` being an integer.
pub const STEP_COUNT_TOL: f64 = 1e-8;

/// Non-fatal events recorded during an integration.
#[derive(Clone, Debug, PartialEq)]
pub enum Diagnostic {
    /// A harmonic factor was applied without its symplectic correction
    /// because the correction solve was too ill-conditioned.
    CorrectionSkipped { t: f64, factor: usize, condition: f64 },
}

/// Result of integrating over `[t0, t1]`.
#[derive(Clone, Debug)]
pub struct Integration {
    pub propagator: BlockPropagator,
    pub steps: usize,
    pub step_size: f64,
    /// Ledger increment of every step.
    pub step_costs: Vec<CostLedger>,
    /// Cost of factors left pending by the last step and applied at the end.
    pub boundary_cost: CostLedger,
    /// Fixed-point sweeps per step (implicit methods only).
    pub iterations: Vec<usize>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Integration {
    fn new(propagator: BlockPropagator, steps: usize, step_size: f64) -> Self {
        Self {
            propagator,
            steps,
            step_size,
            step_costs: Vec::with_capacity(steps),
            boundary_cost: CostLedger::new(),
            iterations: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    /// Everything charged to the propagator's ledger.
    pub fn total_cost(&self) -> CostLedger {
        self.propagator.ledger
    }

    /// Cost of the last step, which is the steady-state cost for methods
    /// whose per-step cost does not vary.
    pub fn steady_state_cost(&self) -> Option<CostLedger> {
        self.step_costs.last().copied()
    }

    pub fn mean_iterations(&self) -> Option<f64> {
        (!self.iterations.is_empty())
            .then(|| self.iterations.iter().sum::<usize>() as f64 / self.iterations.len() as f64)
    }
}

/// Observer called with `(t, propagator)` at the start and after each step.
pub type Observer<'a> = &'a mut dyn FnMut(f64, &BlockPropagator);

/// A fixed-step integrator for the fundamental matrix.
pub trait Integrator: Send + Sync {
    fn name(&self) -> &str;

    /// Nominal global order.
    fn order(&self) -> u32;

    fn is_symplectic(&self) -> bool;

    /// Closed-form cost of one interior step, when it does not depend on the
    /// data (not available for iterative methods).
    fn steady_state_cost(&self) -> Option<CostLedger>;

    fn integrate_with(
        &self,
        problem: &HillProblem,
        h: f64,
        t0: f64,
        t1: f64,
        phi0: BlockPropagator,
        observer: Option<Observer<'_>>,
    ) -> Result<Integration>;

    fn integrate(&self, problem: &HillProblem, h: f64, t0: f64, t1: f64, phi0: BlockPropagator) -> Result<Integration> {
        self.integrate_with(problem, h, t0, t1, phi0, None)
    }
}

/// Number of steps and the adjusted step for covering `[t0, t1]` with steps
/// of nominal size `h`.
pub fn step_count(t0: f64, t1: f64, h: f64) -> Result<(usize, f64)> {
    if !(h > 0.0) || !h.is_finite() || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::InvalidProblem(format!("invalid step {h} on [{t0}, {t1}]")));
    }
    let length = t1 - t0;
    if length < 0.0 {
        return Err(Error::Unsupported("backward integration is not supported".into()));
    }
    if length == 0.0 {
        return Ok((0, h));
    }
    let n = (length / h).round();
    if n < 1.0 || (n * h - length).abs() > STEP_COUNT_TOL * length {
        return Err(Error::NonIntegerStepCount { length, step: h });
    }
    Ok((n as usize, length / n))
}

/// One-step state machine driven by [`drive`].
pub(crate) trait Stepper {
    fn step(&mut self, t: f64, h: f64, phi: &mut BlockPropagator, out: &mut Integration) -> Result<()>;

    /// Applies any factor still pending after the last step at time `t`.
    fn finish(&mut self, _t: f64, _phi: &mut BlockPropagator, _out: &mut Integration) -> Result<()> {
        Ok(())
    }

    /// `phi` with pending factors applied, leaving the stepper untouched.
    fn peek(&self, _t: f64, phi: &BlockPropagator) -> Result<BlockPropagator> {
        Ok(phi.clone())
    }
}

pub(crate) fn drive(
    stepper: &mut dyn Stepper,
    t0: f64,
    t1: f64,
    h: f64,
    phi0: BlockPropagator,
    mut observer: Option<Observer<'_>>,
) -> Result<Integration> {
    let (n, h) = step_count(t0, t1, h)?;
    let mut phi = phi0;
    let mut out = Integration::new(BlockPropagator::identity(0), n, h);
    if let Some(obs) = observer.as_mut() {
        obs(t0, &phi);
    }
    for k in 0..n {
        let t = t0 + k as f64 * h;
        let before = phi.ledger;
        stepper.step(t, h, &mut phi, &mut out).map_err(|e| e.at_step(k, t))?;
        out.step_costs.push(phi.ledger.since(&before));
        if let Some(obs) = observer.as_mut() {
            let t_next = t0 + (k + 1) as f64 * h;
            obs(t_next, &stepper.peek(t_next, &phi)?);
        }
    }
    let before = phi.ledger;
    let t_end = t0 + n as f64 * h;
    stepper.finish(t_end, &mut phi, &mut out).map_err(|e| e.at_step(n, t_end))?;
    out.boundary_cost = phi.ledger.since(&before);
    out.propagator = phi;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_counts() {
        let (n, h) = step_count(0.0, std::f64::consts::PI, std::f64::consts::PI / 10.0).unwrap();
        assert_eq!(n, 10);
        assert!((h - std::f64::consts::PI / 10.0).abs() < 1e-16);
        assert_eq!(step_count(1.0, 1.0, 0.1).unwrap().0, 0);
        assert!(matches!(
            step_count(0.0, 1.0, 0.3),
            Err(Error::NonIntegerStepCount { .. })
        ));
        assert!(step_count(0.0, 1.0, 0.0).is_err());
        assert!(step_count(1.0, 0.0, 0.1).is_err());
    }
}
