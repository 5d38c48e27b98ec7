use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::function::{DegreeProfile, FunctionClass, FunctionExpr};

use super::expsum::{ExpSum, SumKernel, SumVariant};
use super::{ArcParams, CircleError};

/// Largest denominator among the rational sample points.
const MAX_Q: u64 = 20;
pub const MIN_SAMPLES: usize = 1000;

/// Minor-arc saving exponent: 2^{−d−2} min(c, 1) for class III, 2^{−⌈d+1⌉−1}
/// for class II, and 2^{−d−2} for polynomials and subpolynomial remainders.
pub fn sigma_for(profile: &DegreeProfile) -> f64 {
    match profile.class {
        FunctionClass::II => 2f64.powf(-(profile.c_f + 1.0).ceil() - 1.0),
        FunctionClass::III if !profile.subpolynomial_remainder && profile.c_f > 0.0 => {
            2f64.powi(-(profile.d_f as i32) - 2) * profile.c_f.min(1.0)
        }
        _ => 2f64.powi(-(profile.d_f as i32) - 2),
    }
}

/// Sample points on [ω, 1/2]: half log-spaced, half linear, plus every a/q
/// with q ≤ 20 in range. Sorted and deduplicated; 1/2 is always present.
pub fn minor_arc_samples(omega: f64, samples: usize) -> Vec<f64> {
    let half = samples / 2;
    let (lo, hi) = (omega.ln(), 0.5f64.ln());
    let mut out: Vec<f64> = Vec::with_capacity(samples + 128);
    for i in 0..half {
        out.push((lo + (hi - lo) * i as f64 / half.max(2).saturating_sub(1) as f64).exp());
    }
    let rest = samples - half;
    for i in 0..rest {
        out.push(omega + (0.5 - omega) * i as f64 / rest.max(2).saturating_sub(1) as f64);
    }
    for q in 1..=MAX_Q {
        for a in 1..=q / 2 {
            let v = a as f64 / q as f64;
            if v >= omega {
                out.push(v);
            }
        }
    }
    out.push(0.5);
    out.retain(|a| *a >= omega && *a <= 0.5);
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinorArcReport {
    pub sigma: f64,
    pub samples: usize,
    pub max_abs: f64,
    pub argmax: f64,
    /// log max|S| / log X.
    pub implied_exponent: f64,
    /// 1 − σ.
    pub predicted_exponent: f64,
    pub terms: u64,
    #[serde(skip)]
    pub rows: Vec<ExpSum>,
}

/// Sampled sup of |S(α)| over ω ≤ α ≤ 1/2 (S(−α) is the conjugate).
pub fn minor_arc_sup(
    f: &FunctionExpr,
    params: &ArcParams,
    sigma: f64,
    samples: usize,
) -> Result<MinorArcReport, CircleError> {
    if samples < MIN_SAMPLES {
        return Err(CircleError::InvalidArgument(format!("need at least {MIN_SAMPLES} samples, got {samples}")));
    }
    let kernel = SumKernel::new(f, params.x0, params.x1, SumVariant::S)?;
    let alphas = minor_arc_samples(params.omega, samples);
    let rows: Vec<ExpSum> = alphas.par_iter().map(|&a| kernel.eval(a)).collect();
    let (argmax, max_abs) =
        rows.iter().map(|r| (r.alpha, r.value.norm())).fold((0.0, -1.0), |m, v| if v.1 > m.1 { v } else { m });
    Ok(MinorArcReport {
        sigma,
        samples: rows.len(),
        max_abs,
        argmax,
        implied_exponent: max_abs.ln() / params.x.ln(),
        predicted_exponent: 1.0 - sigma,
        terms: kernel.terms(),
        rows,
    })
}
