//! Global convergence orders against a fine classical RK4 oracle.

mod common;

use common::{loglog_slope, rk4_extrapolated};
use hillsym::baselines::{load_coefficients, verify_order, ExplicitRk, Rkgl6, SplittingMethod};
use hillsym::magnus::MethodScheme;
use hillsym::{mathieu, pascal_hill, BlockPropagator, HillProblem, Integrator, Matrix};
use std::f64::consts::PI;

/// Errors at or below this are treated as the oracle's floor and dropped
/// (the extrapolated oracle agrees with an independent eighth-order run to
/// about 5e-14).
const FLOOR: f64 = 5e-13;

fn errors(method: &dyn Integrator, problem: &HillProblem, reference: &Matrix, steps: &[usize]) -> Vec<(f64, f64)> {
    let t = problem.period();
    steps
        .iter()
        .map(|&n| {
            let h = t / n as f64;
            let out = method
                .integrate(problem, h, 0.0, t, BlockPropagator::identity(problem.dim()))
                .unwrap();
            (h, (&out.propagator.to_dense() - reference).norm1())
        })
        .filter(|&(_, e)| e > FLOOR)
        .collect()
}

fn assert_slope(method: &dyn Integrator, problem: &HillProblem, reference: &Matrix, steps: &[usize], want: f64, tol: f64) {
    let pts = errors(method, problem, reference, steps);
    assert!(pts.len() >= 3, "{}: only {} points above the floor", method.name(), pts.len());
    let slope = loglog_slope(&pts);
    assert!((slope - want).abs() <= tol, "{}: slope {slope:.3}, want {want} +- {tol}; {pts:?}", method.name());
}

fn mathieu_reference() -> (HillProblem, Matrix) {
    let p = mathieu(5.0, 1.0);
    let reference = rk4_extrapolated(&p, PI, 10_000);
    (p, reference)
}

#[test]
fn sixth_order_schemes_on_mathieu() {
    let (p, reference) = mathieu_reference();
    for s in [MethodScheme::phi1_6(), MethodScheme::phi2_6(), MethodScheme::phi3_6()] {
        assert_slope(&s, &p, &reference, &[20, 28, 40, 56, 80, 113, 160], 6.0, 0.3);
    }
}

#[test]
fn eighth_order_scheme_on_mathieu() {
    let (p, reference) = mathieu_reference();
    assert_slope(&MethodScheme::phi5_8(), &p, &reference, &[10, 14, 20, 28], 8.0, 0.5);
}

#[test]
fn schemes_on_a_pascal_problem() {
    let p = pascal_hill(3, 2.0);
    let reference = rk4_extrapolated(&p, PI, 10_000);
    for s in [MethodScheme::phi1_6(), MethodScheme::phi2_6(), MethodScheme::phi3_6()] {
        assert_slope(&s, &p, &reference, &[20, 40, 80, 160], 6.0, 0.4);
    }
    assert_slope(&MethodScheme::phi5_8(), &p, &reference, &[16, 24, 32, 48], 8.0, 0.5);
}

#[test]
fn rkgl6_is_sixth_order() {
    let (p, reference) = mathieu_reference();
    assert_slope(&Rkgl6::default(), &p, &reference, &[20, 40, 80, 160], 6.0, 0.3);
}

#[test]
fn leapfrog_is_second_order() {
    let (p, reference) = mathieu_reference();
    assert_slope(&SplittingMethod::leapfrog(), &p, &reference, &[40, 80, 160, 320], 2.0, 0.1);
}

#[test]
fn rk4_is_fourth_order_on_the_autonomous_problem() {
    let omega: f64 = 5.0;
    let p = mathieu(omega, 0.0);
    let (c, s) = ((omega * PI).cos(), (omega * PI).sin());
    let exact = Matrix::from_rows(&[[c, s / omega], [-omega * s, c]]).unwrap();
    assert_slope(&ExplicitRk::rk4(), &p, &exact, &[40, 80, 160, 320], 4.0, 0.1);
}

fn data(name: &str) -> String {
    std::fs::read_to_string(format!("{}/data/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

#[test]
fn shipped_tables_reach_their_declared_orders() {
    let (p, reference) = mathieu_reference();
    for (file, order) in [("rkn11_6.json", 6u32), ("rk7_6.json", 6), ("cf2_4.json", 4)] {
        let loaded = load_coefficients(&data(file)).unwrap();
        assert_eq!(loaded.declared_order(), order);
        let method = loaded.into_integrator();
        assert!(verify_order(method.as_ref()).unwrap() >= f64::from(order) - 0.5);
        let steps = [20, 40, 80, 160];
        assert_slope(method.as_ref(), &p, &reference, &steps, f64::from(order), 0.4);
    }
}

#[test]
fn mislabelled_table_fails_verification() {
    let text = r#"{"type": "splitting", "order": 4, "data": {"a": [0.5, 0.5], "b": [1, 0]}}"#;
    let loaded = load_coefficients(text).unwrap();
    assert!(verify_order(loaded.integrator()).is_err());
}
