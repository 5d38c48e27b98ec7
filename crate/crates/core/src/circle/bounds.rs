use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::function::{FunctionExpr, MAX_JET_ORDER};

use super::expsum::{SumKernel, SumVariant};
use super::CircleError;

/// Derivative probes per block.
const PROBES: usize = 65;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub k: usize,
    pub beta: f64,
    pub p: f64,
    pub p1: f64,
    /// Block length P1 − P.
    pub n: f64,
    pub terms: u64,
    /// min |β f^(k)| over the probes.
    pub lambda: f64,
    /// max/min ratio of |β f^(k)|; always ≥ 1.
    pub h: f64,
    /// 2^k; zero for the first-derivative test.
    pub big_k: u64,
    /// Distance of β f' from the integers (first-derivative test only).
    pub theta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    /// |W(β)|.
    pub lhs: f64,
    pub rhs_formula: f64,
    pub ratio: f64,
    pub params: BoundParams,
}

fn probe_points(p: f64, p1: f64) -> impl Iterator<Item = f64> {
    (0..PROBES).map(move |i| p + (p1 - p) * i as f64 / (PROBES - 1) as f64)
}

/// Compare |Σ_{P<n≤P1} e(β f(n))| with the k-th derivative bound
/// `hN(λ^{1/(K−2)} + N^{−2/K} + (N^k λ)^{−2/K})`, K = 2^k, with unit constant.
///
/// For k = 1 the Kuzmin–Landau form `1/θ` is used, θ being the distance of
/// β f' from the nearest integer on the block.
pub fn vdc_bound_check(f: &FunctionExpr, k: usize, beta: f64, p: f64, p1: f64) -> Result<BoundCheck, CircleError> {
    if k == 0 || k > MAX_JET_ORDER {
        return Err(CircleError::InvalidArgument(format!("derivative order {k} out of range")));
    }
    if !(p1 > p) || !(p >= 1.0) {
        return Err(CircleError::InvalidArgument(format!("block ({p}, {p1}] is empty or below 1")));
    }
    let order = if k == 1 { 2 } else { k };
    let jets = probe_points(p, p1).map(|x| f.eval_jet(x, order)).collect::<Result<Vec<_>, _>>()?;
    let gk: Vec<f64> = jets.iter().map(|j| beta * j.d(k)).collect();
    let positive = gk[0] > 0.0;
    if gk.iter().any(|&v| v == 0.0 || (v > 0.0) != positive || !v.is_finite()) {
        return Err(CircleError::SignChange { k, p, p1 });
    }
    let lambda = gk.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    let h = gk.iter().fold(0.0f64, |m, v| m.max(v.abs())) / lambda;
    let kernel = SumKernel::new(f, p, p1, SumVariant::W)?;
    let lhs = kernel.eval(beta).value.norm();
    let n = p1 - p;
    let (rhs, big_k, theta) = if k == 1 {
        // f' must be monotone and stay between two consecutive integers
        let second: Vec<f64> = jets.iter().map(|j| j.d(2)).collect();
        let up = second[0] >= 0.0;
        if second.iter().any(|&v| (v >= 0.0) != up) {
            return Err(CircleError::SignChange { k: 2, p, p1 });
        }
        let (a, b) = (gk[0], gk[PROBES - 1]);
        if a.floor() != b.floor() || a.fract() == 0.0 || b.fract() == 0.0 {
            return Err(CircleError::IntegerDerivative { p, p1 });
        }
        let dist = |v: f64| (v - v.round()).abs();
        let theta = gk.iter().fold(f64::INFINITY, |m, &v| m.min(dist(v)));
        (1.0 / theta, 0, Some(theta))
    } else {
        let big_k = 1u64 << k;
        let kf = big_k as f64;
        let rhs =
            h * n * (lambda.powf(1.0 / (kf - 2.0)) + n.powf(-2.0 / kf) + (n.powi(k as i32) * lambda).powf(-2.0 / kf));
        (rhs, big_k, None)
    };
    Ok(BoundCheck {
        lhs,
        rhs_formula: rhs,
        ratio: lhs / rhs,
        params: BoundParams { k, beta, p, p1, n, terms: kernel.terms(), lambda, h, big_k, theta },
    })
}

/// Run [`vdc_bound_check`] over dyadic blocks (P, 2P] for every (β, P) pair, in input order.
pub fn vdc_scan(f: &FunctionExpr, k: usize, points: &[(f64, f64)]) -> Vec<Result<BoundCheck, CircleError>> {
    points.par_iter().map(|&(beta, p)| vdc_bound_check(f, k, beta, p, 2.0 * p)).collect()
}
