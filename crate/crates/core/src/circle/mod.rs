//! Exponential sums, the singular-integral approximation and the bounds used
//! by the circle method for `[f(n)]`.

mod bounds;
mod count;
mod expsum;
mod fourier;
mod integral;
mod major;
mod minor;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::function::{DegreeProfile, EvalError, FunctionExpr};
use crate::roots::{solve_increasing, RootError};

pub use bounds::{vdc_bound_check, vdc_scan, BoundCheck, BoundParams};
pub use count::{circle_r_numeric, count_r_direct, window_values, MAX_TABLE};
pub use expsum::{exp_sum, ExpSum, SumKernel, SumVariant, MAX_TERMS};
pub use fourier::{fourier_c, fourier_expansion_check, phi, phi_coefficients, FourierCheck, PhiCoefficients};
pub use integral::{integral_i, DEFAULT_PANEL_BUDGET};
pub use major::{major_arc_report, MajorArcReport, MajorArcRow};
pub use minor::{minor_arc_samples, minor_arc_sup, sigma_for, MinorArcReport, MIN_SAMPLES};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CircleError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("f is not increasing near x = {x}")]
    NonMonotone { x: f64 },
    #[error("f(x) = {target} has no root with x >= 1 (N too small for the window)")]
    NoRoot { target: f64 },
    #[error("[f({n})] = {value:e} exceeds the integer range")]
    Overflow { n: u64, value: f64 },
    #[error("quadrature needs more than {budget} panels (|alpha| too large); rely on the bounds instead")]
    PanelBudget { budget: u64 },
    #[error("table size {size} exceeds the capacity {cap}")]
    Capacity { size: u64, cap: u64 },
    #[error("grid {grid} violates the Nyquist condition (need more than {required}); the sum would alias")]
    Nyquist { grid: usize, required: u64 },
    #[error("beta·f^({k}) changes sign or vanishes on [{p}, {p1}]")]
    SignChange { k: usize, p: f64, p1: f64 },
    #[error("beta·f' takes an integer value on [{p}, {p1}]; the Kuzmin–Landau hypothesis fails")]
    IntegerDerivative { p: f64, p1: f64 },
    #[error("{0} must not be an integer")]
    IntegerArgument(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Major/minor arc parameters for a target N.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcParams {
    pub n: u64,
    pub s: u32,
    /// Degree used for X = N^{1/d}: d_f for classes I/III, the real degree for class II.
    pub d: f64,
    pub x: f64,
    pub n_s: f64,
    pub x0: f64,
    pub x1: f64,
    pub omega: f64,
}

/// Solve f(x) = target on [1, ∞).
pub fn invert(f: &FunctionExpr, target: f64) -> Result<f64, CircleError> {
    let g = |x: f64| -> Result<(f64, f64), EvalError> {
        let j = f.eval_jet(x, 1)?;
        Ok((j.value() - target, j.d(1)))
    };
    solve_increasing(g, 1.0, 1e18).map_err(|e| match e {
        RootError::BelowRange { .. } | RootError::NoBracket { .. } => CircleError::NoRoot { target },
        RootError::NonMonotone { x } => CircleError::NonMonotone { x },
        RootError::Eval(e) => CircleError::Eval(e),
    })
}

pub fn arc_params(f: &FunctionExpr, profile: &DegreeProfile, n: u64, s: u32) -> Result<ArcParams, CircleError> {
    let d = profile.degree();
    if !(d >= 1.0) {
        return Err(CircleError::InvalidArgument(format!("degree {d} < 1")));
    }
    if s == 0 {
        return Err(CircleError::InvalidArgument("s must be positive".into()));
    }
    let nf = n as f64;
    let x = nf.powf(1.0 / d);
    let n_s = nf / (s as f64 + 1.0);
    let x0 = invert(f, n_s)?;
    let x1 = invert(f, 2.0 * n_s)?;
    Ok(ArcParams { n, s, d, x, n_s, x0, x1, omega: x.powf(0.5 - d) })
}
