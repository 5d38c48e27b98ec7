//! Bounded-distance representations N ≈ f(X + y_1) + ⋯ + f(X + y_s) for
//! polynomials plus slowly growing remainders.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::basis::{floor_value, BasisError};
use crate::dd::DoubleDouble;
use crate::function::{DegreeProfile, EvalError, FunctionClass, FunctionExpr, MAX_JET_ORDER};
use crate::hk::{delta0_i128, solve_bruteforce, HkError, HkInstance, HkOutcome};
use crate::roots::{solve_increasing, RootError};

pub const DEFAULT_DELTA: f64 = 0.25;
/// Relative tolerance on N − s f(U + V) − s α_k V^k.
const SOLVE_TOL: f64 = 1e-6;
/// Flag a ratio whose deviation from 1 exceeds this multiple of X Y^{−2}.
const RATIO_FLAG: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RepresentError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Hk(#[from] HkError),
    #[error("out of scope: {0}")]
    Scope(String),
    #[error("N = {n} is too small: no U >= 1 solves the U/V equation")]
    NoRoot { n: u64 },
    #[error("the U/V equation is not increasing near U = {u}")]
    NonMonotone { u: f64 },
    #[error("U/V solve residual {residual:e} exceeds the tolerance")]
    SolveResidual { residual: f64 },
    #[error("f^({j})(X) vanishes at X = {x}")]
    DerivativeVanishes { j: usize, x: u64 },
    #[error("carry window violated at step {j}: E = {e}, M = {m}")]
    Window { j: usize, e: f64, m: i128 },
    #[error("Hilbert-Kamke system not solved ({}) for {instance:?}", outcome.label())]
    HkUnsolved { instance: HkInstance, outcome: HkOutcome },
    #[error("|N - sum f| = {residual} exceeds the run bound {c_run}")]
    ResidualBound { residual: f64, c_run: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stage5State {
    pub n: u64,
    pub s: u32,
    pub k: usize,
    pub delta: f64,
    pub u: f64,
    pub v: f64,
    /// [U].
    pub x: u64,
    /// V + {U}.
    pub y: f64,
    /// E_0..E_k, E_0 = 0.
    pub e: Vec<f64>,
    /// M_1..M_k.
    pub m: Vec<i128>,
    pub delta0: i128,
    /// α_k.
    pub alpha_k: f64,
    /// f^(j)(X) for j = 0..k.
    pub derivatives: Vec<f64>,
}

impl Stage5State {
    /// Δ_0 M_j, j = 1..k.
    pub fn hk_targets(&self) -> Vec<u128> {
        self.m.iter().map(|&m| (self.delta0 * m) as u128).collect()
    }
}

/// U with N = s f(U + V) + s α_k V^k, V = U^{1−δ}.
pub fn solve_uv(f: &FunctionExpr, poly: &[f64], n: u64, s: u32, delta: f64) -> Result<(f64, f64), RepresentError> {
    check_delta(delta)?;
    let alpha_k = *poly.last().ok_or_else(|| RepresentError::Scope("empty polynomial part".into()))?;
    let k = poly.len() as f64;
    let (sf, nf) = (s as f64, n as f64);
    let e = 1.0 - delta;
    let g = |u: f64| -> Result<(f64, f64), EvalError> {
        let v = u.powf(e);
        let j = f.eval_jet(u + v, 1)?;
        let val = sf * j.value() + sf * alpha_k * u.powf(k * e) - nf;
        let der = sf * j.d(1) * (1.0 + e * u.powf(-delta)) + sf * alpha_k * k * e * u.powf(k * e - 1.0);
        Ok((val, der))
    };
    let u = solve_increasing(g, 1.0, 1e18).map_err(|err| match err {
        RootError::BelowRange { .. } | RootError::NoBracket { .. } => RepresentError::NoRoot { n },
        RootError::NonMonotone { x } => RepresentError::NonMonotone { u: x },
        RootError::Eval(e) => RepresentError::Eval(e),
    })?;
    let residual = g(u)?.0;
    if residual.abs() > SOLVE_TOL * nf {
        return Err(RepresentError::SolveResidual { residual });
    }
    Ok((u, u.powf(e)))
}

fn check_delta(delta: f64) -> Result<(), RepresentError> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(RepresentError::InvalidArgument(format!("delta = {delta} outside (0, 1/2)")));
    }
    Ok(())
}

/// Initial state from the U/V solve; E and M are filled by [`build_mej`].
pub fn initial_state(
    f: &FunctionExpr,
    poly: &[f64],
    n: u64,
    s: u32,
    delta: f64,
) -> Result<Stage5State, RepresentError> {
    let k = poly.len();
    if k == 0 || k >= MAX_JET_ORDER {
        return Err(RepresentError::Scope(format!("polynomial degree {k} unsupported")));
    }
    if s == 0 {
        return Err(RepresentError::InvalidArgument("s must be positive".into()));
    }
    let (u, v) = solve_uv(f, poly, n, s, delta)?;
    let x = u.floor();
    Ok(Stage5State {
        n,
        s,
        k,
        delta,
        u,
        v,
        x: x as u64,
        y: v + (u - x),
        e: vec![0.0; k + 1],
        m: vec![0; k],
        delta0: delta0_i128(k)?,
        alpha_k: poly[k - 1],
        derivatives: Vec::new(),
    })
}

/// The carry recursion: M_j chosen so that
/// 0 < E_j = sY^j + (j f^(j−1)(X) / f^(j)(X)) E_{j−1} − Δ_0 M_j ≤ Δ_0,
/// with s(Y^k + V^k) in place of sY^k at the last step.
pub fn build_mej(f: &FunctionExpr, mut state: Stage5State) -> Result<Stage5State, RepresentError> {
    let k = state.k;
    let jet = f.eval_jet(state.x as f64, k)?;
    for j in 1..=k {
        if jet.d(j) == 0.0 || !jet.d(j).is_finite() {
            return Err(RepresentError::DerivativeVanishes { j, x: state.x });
        }
    }
    let s = DoubleDouble::from_f64(state.s as f64);
    let y = DoubleDouble::from_f64(state.y);
    let d0 = DoubleDouble::from_i128(state.delta0);
    state.e[0] = 0.0;
    for j in 1..=k {
        let mut q = s * y.powi(j as i32);
        if j == k {
            q = q + s * DoubleDouble::from_f64(state.v).powi(k as i32);
        }
        let ratio = j as f64 * jet.d(j - 1) / jet.d(j);
        q = q + DoubleDouble::from_f64(ratio) * DoubleDouble::from_f64(state.e[j - 1]);
        // M = ⌈q/Δ_0⌉ − 1 puts E in (0, Δ_0], with E = Δ_0 on exact multiples
        let ratio_q = q / d0;
        let fl = ratio_q.floor();
        let ceil = if fl == ratio_q { fl } else { fl + DoubleDouble::ONE };
        let m = ceil.floor_i128().ok_or(RepresentError::Window { j, e: f64::NAN, m: 0 })? - 1;
        let e = (q - d0 * DoubleDouble::from_i128(m)).to_f64();
        if m < 1 || !(e > 0.0 && e <= state.delta0 as f64) {
            return Err(RepresentError::Window { j, e, m });
        }
        state.m[j - 1] = m;
        state.e[j] = e;
    }
    state.derivatives = jet.derivatives;
    Ok(state)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HkRatioReport {
    /// Δ_0 M_j / (2^{−j/k} s^{1−j/k} (Δ_0 M_k)^{j/k}), j < k.
    pub ratios: Vec<f64>,
    pub deviations: Vec<f64>,
    /// X Y^{−2}.
    pub error_scale: f64,
    /// deviation > 10 X Y^{−2}.
    pub flagged: Vec<bool>,
    /// Δ_0 M_k / (s Y^k), close to 2.
    pub top_factor: f64,
}

pub fn hk_ratio_check(state: &Stage5State) -> HkRatioReport {
    let k = state.k as f64;
    let s = state.s as f64;
    let d0 = state.delta0 as f64;
    let top = d0 * state.m[state.k - 1] as f64;
    let error_scale = state.x as f64 / (state.y * state.y);
    let ratios: Vec<f64> = (1..state.k)
        .map(|j| {
            let e = j as f64 / k;
            d0 * state.m[j - 1] as f64 / (2f64.powf(-e) * s.powf(1.0 - e) * top.powf(e))
        })
        .collect();
    let deviations: Vec<f64> = ratios.iter().map(|r| (r - 1.0).abs()).collect();
    HkRatioReport {
        flagged: deviations.iter().map(|d| *d > RATIO_FLAG * error_scale).collect(),
        ratios,
        deviations,
        error_scale,
        top_factor: top / (s * state.y.powi(state.k as i32)),
    }
}

/// f(X + Y) minus its degree-k Taylor polynomial at X (signed).
pub fn taylor_remainder(f: &FunctionExpr, x: u64, y: f64, k: usize) -> Result<f64, RepresentError> {
    let jet = f.eval_jet(x as f64, k)?;
    let base = f.eval_dd(DoubleDouble::from_f64(x as f64))?;
    let yy = DoubleDouble::from_f64(y);
    let mut poly = base;
    let mut pw = DoubleDouble::ONE;
    for j in 1..=k {
        pw = pw * yy;
        poly = poly + pw * DoubleDouble::from_f64(jet.taylor_coefficient(j));
    }
    let exact = f.eval_dd(DoubleDouble::from_f64(x as f64) + yy)?;
    Ok((exact - poly).to_f64())
}

/// |f(X + Y) − Σ_{j≤k} f^(j)(X)/j! Y^j|.
pub fn taylor_remainder_check(f: &FunctionExpr, x: u64, y: f64, k: usize) -> Result<f64, RepresentError> {
    Ok(taylor_remainder(f, x, y, k)?.abs())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepresentationResult {
    pub n: u64,
    pub x: u64,
    /// y_1 ≥ ⋯ ≥ y_s ≥ 1.
    pub y: Vec<u64>,
    /// Σ f(X + y_i).
    pub sum_f: f64,
    /// N − Σ f(X + y_i).
    pub residual_real: f64,
    /// N − Σ [f(X + y_i)], exact.
    pub residual_int: i128,
    pub hk_used: HkInstance,
    pub x_max: u64,
    pub state: Stage5State,
    pub ratios: HkRatioReport,
    /// s R_k(X, Y) − Σ_i R_k(X, y_i): the Taylor-remainder part of the residual.
    pub taylor_term: f64,
    /// f^(k)(X)/k! E_k: the last carry.
    pub carry_term: f64,
    /// Bound on |residual_real| assembled from the terms above plus rounding.
    pub c_run: f64,
}

/// Largest value any solution can contain: ⌊(Δ_0 M_k − (s − 1))^{1/k}⌋.
pub fn default_x_max(state: &Stage5State) -> u64 {
    let top = state.delta0 * state.m[state.k - 1] - (state.s as i128 - 1);
    let mut y = (top.max(1) as f64).powf(1.0 / state.k as f64).floor() as i128;
    while y > 1 && y.checked_pow(state.k as u32).is_none_or(|v| v > top) {
        y -= 1;
    }
    while (y + 1).checked_pow(state.k as u32).is_some_and(|v| v <= top) {
        y += 1;
    }
    y.max(1) as u64
}

fn check_scope(profile: &DegreeProfile) -> Result<(), RepresentError> {
    match profile.class {
        FunctionClass::I => Ok(()),
        FunctionClass::III if profile.subpolynomial_remainder => Ok(()),
        FunctionClass::III => Err(RepresentError::Scope(format!(
            "class III remainder grows like x^{}; only subpolynomial remainders are handled",
            profile.c_f
        ))),
        FunctionClass::II => Err(RepresentError::Scope("class II functions have no polynomial part".into())),
    }
}

/// Full pipeline for one N: U/V solve, carry recursion, Hilbert–Kamke solve
/// on the targets Δ_0 M_j, then the residuals of Σ f(X + y_i).
pub fn assemble(
    f: &FunctionExpr,
    profile: &DegreeProfile,
    n: u64,
    s: u32,
    delta: f64,
    x_max: Option<u64>,
    node_budget: u64,
) -> Result<RepresentationResult, RepresentError> {
    check_scope(profile)?;
    let poly = &profile.poly_part;
    let state = build_mej(f, initial_state(f, poly, n, s, delta)?)?;
    let ratios = hk_ratio_check(&state);
    let x_max = x_max.unwrap_or_else(|| default_x_max(&state));
    let instance = HkInstance::new(state.k, s as usize, state.hk_targets())?;
    let outcome = solve_bruteforce(&instance, x_max, node_budget)?;
    let ys = match outcome {
        HkOutcome::Solved { ref x } => x.clone(),
        _ => return Err(RepresentError::HkUnsolved { instance, outcome }),
    };
    let mut sum = DoubleDouble::ZERO;
    let mut sum_int: i128 = 0;
    let mut taylor_sum = 0.0;
    let mut taylor_abs = 0.0;
    for &y in &ys {
        let xi = state.x + y;
        sum = sum + f.eval_dd(DoubleDouble::from_f64(xi as f64))?;
        sum_int += floor_value(f, xi)
            .map_err(|e| match e {
                BasisError::Eval(e) => RepresentError::Eval(e),
                other => RepresentError::InvalidArgument(other.to_string()),
            })?
            .floor as i128;
        let r = taylor_remainder(f, state.x, y as f64, state.k)?;
        taylor_sum += r;
        taylor_abs += r.abs();
    }
    let nn = DoubleDouble::from_f64(n as f64);
    let residual_real = (nn - sum).to_f64();
    let k = state.k;
    let top_coeff = state.derivatives[k] / (1..=k).map(|i| i as f64).product::<f64>();
    let carry_term = top_coeff * state.e[k];
    let rs = taylor_remainder(f, state.x, state.y, k)?;
    let sf = s as f64;
    let taylor_term = sf * rs - taylor_sum;
    // α_k versus f^(k)(X)/k! on the s V^k term, and the U/V solve residual
    let leading_gap = sf * state.v.powi(k as i32) * (state.alpha_k - top_coeff).abs();
    let solve_err = {
        let w = f.eval_dd(DoubleDouble::from_f64(state.u) + DoubleDouble::from_f64(state.v))?;
        (nn - DoubleDouble::from_f64(sf) * w).to_f64() - sf * state.alpha_k * state.v.powi(k as i32)
    };
    let rounding = 1e-9 * n as f64 + 1e-6;
    let c_run =
        top_coeff.abs() * state.delta0 as f64 + sf * rs.abs() + taylor_abs + leading_gap + solve_err.abs() + rounding;
    if residual_real.abs() > c_run {
        return Err(RepresentError::ResidualBound { residual: residual_real, c_run });
    }
    Ok(RepresentationResult {
        n,
        x: state.x,
        y: ys,
        sum_f: sum.to_f64(),
        residual_real,
        residual_int: n as i128 - sum_int,
        hk_used: instance,
        x_max,
        state,
        ratios,
        taylor_term,
        carry_term,
        c_run,
    })
}

/// Run [`assemble`] for every N in `ns`, in parallel, results in input order.
pub fn represent_scan(
    f: &FunctionExpr,
    profile: &DegreeProfile,
    ns: &[u64],
    s: u32,
    delta: f64,
    x_max: Option<u64>,
    node_budget: u64,
) -> Vec<Result<RepresentationResult, RepresentError>> {
    ns.par_iter().map(|&n| assemble(f, profile, n, s, delta, x_max, node_budget)).collect()
}

/// Smallest s in `range` for which the pipeline succeeds at every pilot N.
pub fn pilot_s(
    f: &FunctionExpr,
    profile: &DegreeProfile,
    pilots: &[u64],
    delta: f64,
    range: std::ops::RangeInclusive<u32>,
    node_budget: u64,
) -> Option<u32> {
    range
        .into_iter()
        .find(|&s| represent_scan(f, profile, pilots, s, delta, None, node_budget).iter().all(|r| r.is_ok()))
}
