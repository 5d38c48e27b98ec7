use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::function::FunctionExpr;

use super::expsum::{e_product, SumKernel, SumVariant};
use super::integral::integral_i;
use super::{ArcParams, CircleError};

/// Trapezoid intervals on [−ω, ω]; the step is ω/1024.
const STEPS: usize = 2048;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MajorArcRow {
    pub alpha: f64,
    pub s: Complex64,
    pub t: Complex64,
    pub i: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MajorArcReport {
    pub params: ArcParams,
    /// ∫_{−ω}^{ω} S(α)^s e(−αN) dα.
    pub integral: Complex64,
    /// X^{s−d}, the order of the main term with ε folded into constants.
    pub predicted_order: f64,
    /// Re(integral) / X^{s−d}.
    pub normalized: f64,
    pub positive: bool,
    pub max_s_minus_t: f64,
    /// ω X_1, the scale of the S − T error.
    pub omega_x1: f64,
    pub max_t_minus_i: f64,
    /// max |I(α)| (1 + X^d|α|) / X.
    pub fitted_c37: f64,
    /// |S(0) − I(0)|.
    pub zero_discrepancy: f64,
    /// Number of n in (X_0, X_1].
    pub terms: u64,
    #[serde(skip)]
    pub rows: Vec<MajorArcRow>,
}

pub fn major_arc_report(
    f: &FunctionExpr,
    params: &ArcParams,
    s: u32,
    panel_budget: u64,
) -> Result<MajorArcReport, CircleError> {
    if s < 3 {
        return Err(CircleError::InvalidArgument(format!("major-arc analysis needs s >= 3, got {s}")));
    }
    let ks = SumKernel::new(f, params.x0, params.x1, SumVariant::S)?;
    let kt = SumKernel::new(f, params.x0, params.x1, SumVariant::T)?;
    let omega = params.omega;
    let rows = (0..=STEPS)
        .into_par_iter()
        .map(|j| {
            let alpha = if 2 * j == STEPS { 0.0 } else { omega * (2.0 * j as f64 / STEPS as f64 - 1.0) };
            Ok(MajorArcRow {
                alpha,
                s: ks.eval(alpha).value,
                t: kt.eval(alpha).value,
                i: integral_i(f, alpha, params.x0, params.x1, panel_budget)?,
            })
        })
        .collect::<Result<Vec<_>, CircleError>>()?;
    let h = 2.0 * omega / STEPS as f64;
    let n = params.n as f64;
    let mut integral = Complex64::new(0.0, 0.0);
    for (j, r) in rows.iter().enumerate() {
        let w = if j == 0 || j == STEPS { 0.5 } else { 1.0 };
        integral += r.s.powu(s) * e_product(-r.alpha, n) * (w * h);
    }
    let xd = params.x.powf(params.d);
    let fold = |g: &dyn Fn(&MajorArcRow) -> f64| rows.iter().map(g).fold(0.0, f64::max);
    let predicted_order = params.x.powf(s as f64 - params.d);
    let zero = &rows[STEPS / 2];
    Ok(MajorArcReport {
        params: params.clone(),
        integral,
        predicted_order,
        normalized: integral.re / predicted_order,
        positive: integral.re > 0.0,
        max_s_minus_t: fold(&|r| (r.s - r.t).norm()),
        omega_x1: omega * params.x1,
        max_t_minus_i: fold(&|r| (r.t - r.i).norm()),
        fitted_c37: fold(&|r| r.i.norm() * (1.0 + xd * r.alpha.abs()) / params.x),
        zero_discrepancy: (zero.s - zero.i).norm(),
        terms: ks.terms(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{arc_params, DEFAULT_PANEL_BUDGET};
    use super::*;
    use crate::function::classify;

    #[test]
    fn squares_at_ten_thousand() {
        let f = FunctionExpr::parse("pow(x, 2)").unwrap();
        let p = arc_params(&f, &classify(&f, None).unwrap(), 10_000, 3).unwrap();
        let r = major_arc_report(&f, &p, 3, DEFAULT_PANEL_BUDGET).unwrap();
        assert!(r.positive);
        assert!(r.max_t_minus_i <= 5.0, "{}", r.max_t_minus_i);
        assert!(r.zero_discrepancy <= 1.0);
        let zero = &r.rows[STEPS / 2];
        assert_eq!(zero.alpha, 0.0);
        assert_eq!(zero.s, zero.t);
        assert_eq!(zero.s.re, r.terms as f64);
    }
}
