//! Method registry: builds integrators by name.

use crate::baselines::{load_coefficients, verify_order, ExplicitRk, LoadedMethod, Rkgl6, SplittingMethod, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::integrator::Integrator;
use crate::magnus::MethodScheme;

/// Every name accepted by [`build_method`].
pub const METHOD_NAMES: [&str; 10] = [
    "phi1_6", "phi2_6", "phi3_6", "phi5_8", "cf", "rkgl6", "splitting", "rk", "rk4", "leapfrog",
];

/// Options shared by the registry entries. Fields that do not apply to a
/// method are ignored.
#[derive(Clone, Debug, Default)]
pub struct MethodOptions {
    /// Contents of a coefficient file (`cf`, `splitting`, `rk`).
    pub coefficients: Option<String>,
    /// Truncation index of the harmonic blocks.
    pub exp_order: Option<usize>,
    /// Fixed-point tolerance of `rkgl6`.
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    /// Check the declared order of loaded tables before use.
    pub verify_order: bool,
}

fn scheme(s: MethodScheme, opts: &MethodOptions) -> Result<Box<dyn Integrator>> {
    Ok(Box::new(match opts.exp_order {
        Some(m) => s.with_truncation(m)?,
        None => s,
    }))
}

fn loaded(name: &str, opts: &MethodOptions) -> Result<LoadedMethod> {
    let text = opts
        .coefficients
        .as_deref()
        .ok_or_else(|| Error::InvalidTable(format!("method `{name}` needs a coefficient file")))?;
    let method = load_coefficients(text)?;
    let kind_ok = matches!(
        (name, &method),
        ("cf", LoadedMethod::Cf(_)) | ("splitting", LoadedMethod::Splitting(_)) | ("rk", LoadedMethod::Butcher(_))
    );
    if !kind_ok {
        return Err(Error::InvalidTable(format!("coefficient file does not describe a `{name}` method")));
    }
    if opts.verify_order {
        verify_order(method.integrator())?;
    }
    Ok(method)
}

pub fn build_method(name: &str, opts: &MethodOptions) -> Result<Box<dyn Integrator>> {
    match name {
        "phi1_6" => scheme(MethodScheme::phi1_6(), opts),
        "phi2_6" => scheme(MethodScheme::phi2_6(), opts),
        "phi3_6" => scheme(MethodScheme::phi3_6(), opts),
        "phi5_8" => scheme(MethodScheme::phi5_8(), opts),
        "cf" => match loaded(name, opts)? {
            LoadedMethod::Cf(s) => scheme(s, opts),
            _ => unreachable!("kind checked"),
        },
        "splitting" | "rk" => Ok(loaded(name, opts)?.into_integrator()),
        "rkgl6" => Ok(Box::new(Rkgl6::new(
            opts.tol.unwrap_or(DEFAULT_TOL),
            opts.max_iter.unwrap_or(DEFAULT_MAX_ITER),
        ))),
        "rk4" => Ok(Box::new(ExplicitRk::rk4())),
        "leapfrog" => Ok(Box::new(SplittingMethod::leapfrog())),
        other => Err(Error::UnknownMethod(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_resolve() {
        for name in ["phi1_6", "phi2_6", "phi3_6", "phi5_8", "rkgl6", "rk4", "leapfrog"] {
            let m = build_method(name, &MethodOptions::default()).unwrap();
            assert_eq!(m.name(), name);
        }
        assert!(matches!(
            build_method("euler", &MethodOptions::default()),
            Err(Error::UnknownMethod(_))
        ));
    }

    #[test]
    fn loaded_methods_need_matching_files() {
        assert!(build_method("cf", &MethodOptions::default()).is_err());
        let opts = MethodOptions {
            coefficients: Some(r#"{"type": "splitting", "order": 2, "data": {"a": [0.5, 0.5], "b": [1, 0]}}"#.into()),
            ..Default::default()
        };
        assert!(build_method("splitting", &opts).is_ok());
        assert!(build_method("rk", &opts).is_err());
    }
}
