use num_complex::Complex64;

use crate::function::FunctionExpr;
use crate::quad::gl7;

use super::expsum::{e_product, Compensated};
use super::CircleError;

pub const DEFAULT_PANEL_BUDGET: u64 = 10_000_000;

/// Panels per unit length never exceed this fraction of the window.
const CAP_FRACTION: f64 = 1.0 / 8.0;

/// I(α) = ∫_{x0}^{x1} e(α f(t)) dt.
///
/// Each panel spans at most a quarter of the local period of α·f(t), capped at
/// (x1 − x0)/8, and is integrated with the 7-point Gauss–Legendre rule.
pub fn integral_i(f: &FunctionExpr, alpha: f64, x0: f64, x1: f64, budget: u64) -> Result<Complex64, CircleError> {
    if !(x1 >= x0) {
        return Err(CircleError::InvalidArgument(format!("empty window [{x0}, {x1}]")));
    }
    if alpha == 0.0 {
        return Ok(Complex64::new(x1 - x0, 0.0));
    }
    let rule = gl7();
    let cap = ((x1 - x0) * CAP_FRACTION).max(f64::MIN_POSITIVE);
    let slope = |t: f64| -> Result<f64, CircleError> { Ok(f.eval_jet(t, 1)?.d(1).abs()) };
    let width = |a: f64, b: f64| -> Result<f64, CircleError> {
        let m = slope(a)?.max(slope(b)?);
        Ok(if m > 0.0 { cap.min(1.0 / (4.0 * alpha.abs() * m)) } else { cap })
    };
    let (mut re, mut im) = (Compensated::default(), Compensated::default());
    let mut a = x0;
    let mut panels = 0u64;
    while a < x1 {
        let guess = (a + width(a, a)?).min(x1);
        let b = (a + width(a, guess)?).min(x1);
        panels += 1;
        if panels > budget {
            return Err(CircleError::PanelBudget { budget });
        }
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (t, w) in rule.0.iter().zip(&rule.1) {
            let z = e_product(alpha, f.eval_f64(mid + half * t)?) * (w * half);
            re.add(z.re);
            im.add(z.im);
        }
        if b <= a {
            break;
        }
        a = b;
    }
    Ok(Complex64::new(re.value(), im.value()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn f(t: &str) -> FunctionExpr {
        FunctionExpr::parse(t).unwrap()
    }

    #[test]
    fn zero_frequency() {
        let v = integral_i(&f("pow(x, 2)"), 0.0, 50.0, 70.0, DEFAULT_PANEL_BUDGET).unwrap();
        assert_eq!(v, Complex64::new(20.0, 0.0));
    }

    #[test]
    fn linear_closed_form() {
        for alpha in [0.013, -0.37, 2.5] {
            let (x0, x1) = (3.0, 40.0);
            let v = integral_i(&f("x"), alpha, x0, x1, DEFAULT_PANEL_BUDGET).unwrap();
            let e = |t: f64| Complex64::new(0.0, TAU * t).exp();
            let want = (e(alpha * x1) - e(alpha * x0)) / Complex64::new(0.0, TAU * alpha);
            assert!((v - want).norm() < 1e-8 * (x1 - x0), "alpha = {alpha}");
        }
    }

    #[test]
    fn budget_is_enforced() {
        let r = integral_i(&f("pow(x, 2)"), 1e3, 50.0, 70.0, 1000);
        assert!(matches!(r, Err(CircleError::PanelBudget { budget: 1000 })));
    }
}
