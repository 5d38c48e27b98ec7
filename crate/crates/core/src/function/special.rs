//! Logarithmic integral, log-gamma and polygamma.

use crate::dd::DoubleDouble;
use crate::quad;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;
const LI2: f64 = 1.045_163_780_117_493;

/// (numerator, denominator) of B_2, B_4, ..., B_30.
const BERNOULLI: [(f64, f64); 15] = [
    (1.0, 6.0),
    (-1.0, 30.0),
    (1.0, 42.0),
    (-1.0, 30.0),
    (5.0, 66.0),
    (-691.0, 2730.0),
    (7.0, 6.0),
    (-3617.0, 510.0),
    (43867.0, 798.0),
    (-174611.0, 330.0),
    (854513.0, 138.0),
    (-236364091.0, 2730.0),
    (8553103.0, 6.0),
    (-23749461029.0, 870.0),
    (8615841276005.0, 14322.0),
];

fn bernoulli(k: usize) -> f64 {
    let (n, d) = BERNOULLI[k - 1];
    n / d
}

/// li(x) in double precision.
///
/// For `x >= 2` this is `li(2) + ∫_2^x dt / log t`, integrated in `v = log t`
/// with 10-point Gauss–Legendre panels of width `min(1, v)`.
pub fn li(x: f64) -> f64 {
    if x.is_nan() || x <= 0.0 || x == 1.0 {
        return f64::NAN;
    }
    if x == f64::INFINITY {
        return x;
    }
    if x >= 2.0 {
        let b = x.ln();
        let rule = quad::gl10();
        let mut lo = std::f64::consts::LN_2;
        let mut total = 0.0;
        while lo < b {
            // 1/v has a pole at 0, so panels near the start stay short
            let hi = (lo + lo.min(1.0)).min(b);
            total += quad::apply(rule, lo, hi, |v| v.exp() / v);
            lo = hi;
        }
        return LI2 + total;
    }
    let u = x.ln();
    if u < -1.0 {
        -expint_e1(-u)
    } else {
        ei_series_f64(u)
    }
}

/// Ei(u) = γ + ln|u| + Σ u^n / (n n!), valid for moderate |u|.
fn ei_series_f64(u: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for n in 1..400 {
        term *= u / n as f64;
        let t = term / n as f64;
        sum += t;
        if t.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    EULER_GAMMA + u.abs().ln() + sum
}

/// E1(z) for z > 1 by the Lentz continued fraction.
fn expint_e1(z: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = z + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-z).exp()
}

/// li(x) in double-double via the exponential-integral series in `log x`.
///
/// All series terms are positive for `x > 1`, so there is no cancellation.
pub fn li_dd(x: DoubleDouble) -> DoubleDouble {
    if !(x.hi > 0.0) || (x.hi == 1.0 && x.lo == 0.0) {
        return DoubleDouble::from_f64(f64::NAN);
    }
    let u = x.ln();
    let mut term = DoubleDouble::ONE;
    let mut sum = DoubleDouble::ZERO;
    for n in 1..2000 {
        let nd = DoubleDouble::from_f64(n as f64);
        term = term * u / nd;
        let t = term / nd;
        sum = sum + t;
        if t.hi.abs() < 1e-34 * sum.hi.abs().max(1e-300) {
            break;
        }
    }
    DoubleDouble::EULER_GAMMA + u.abs().ln() + sum
}

/// ln Γ(x) for x > 0: upward recurrence to x >= 15, then Stirling with 8 terms.
pub fn lgamma(x: f64) -> f64 {
    if x.is_nan() || x <= 0.0 {
        return f64::NAN;
    }
    let mut z = x;
    let mut shift = 0.0;
    let mut prod = 1.0;
    while z < 15.0 {
        prod *= z;
        if prod > 1e280 {
            shift += prod.ln();
            prod = 1.0;
        }
        z += 1.0;
    }
    shift += prod.ln();
    let zi = 1.0 / z;
    let zi2 = zi * zi;
    let mut corr = 0.0;
    let mut p = zi;
    for k in 1..=8 {
        corr += bernoulli(k) / ((2 * k) * (2 * k - 1)) as f64 * p;
        p *= zi2;
    }
    (z - 0.5) * z.ln() - z + HALF_LN_2PI + corr - shift
}

/// ln Γ(x) in double-double: recurrence to x >= 40, then Stirling with 15 terms.
pub fn lgamma_dd(x: DoubleDouble) -> DoubleDouble {
    if !(x.hi > 0.0) {
        return DoubleDouble::from_f64(f64::NAN);
    }
    let mut z = x;
    let mut prod = DoubleDouble::ONE;
    let mut shift = DoubleDouble::ZERO;
    while z.hi < 40.0 {
        prod = prod * z;
        if prod.hi > 1e250 {
            shift = shift + prod.ln();
            prod = DoubleDouble::ONE;
        }
        z = z + DoubleDouble::ONE;
    }
    shift = shift + prod.ln();
    let zi = z.recip();
    let zi2 = zi.sqr();
    let mut corr = DoubleDouble::ZERO;
    let mut p = zi;
    for k in 1..=15 {
        let (n, d) = BERNOULLI[k - 1];
        let coef = DoubleDouble::from_f64(n) / DoubleDouble::from_f64(d * ((2 * k) * (2 * k - 1)) as f64);
        corr = corr + coef * p;
        p = p * zi2;
    }
    (z - DoubleDouble::from_f64(0.5)) * z.ln() - z + DoubleDouble::HALF_LN_2PI + corr - shift
}

/// ψ^(m)(x) for x > 0 and 0 <= m <= 16 (m = 0 is the digamma function).
pub fn polygamma(m: u32, x: f64) -> f64 {
    if x.is_nan() || x <= 0.0 {
        return f64::NAN;
    }
    let fact = |n: u32| (1..=n).fold(1.0f64, |a, i| a * i as f64);
    let sign_m = if m % 2 == 0 { 1.0 } else { -1.0 };
    let mfact = fact(m);
    let mut z = x;
    let mut acc = 0.0;
    let threshold = 40.0 + m as f64;
    while z < threshold {
        // ψ^(m)(z) = ψ^(m)(z+1) - (-1)^m m! / z^(m+1)
        acc -= sign_m * mfact / z.powi(m as i32 + 1);
        z += 1.0;
    }
    let zi = 1.0 / z;
    let asym = if m == 0 {
        let mut s = z.ln() - 0.5 * zi;
        let zi2 = zi * zi;
        let mut p = zi2;
        for k in 1..=10 {
            s -= bernoulli(k) / (2 * k) as f64 * p;
            p *= zi2;
        }
        s
    } else {
        let mut s = fact(m - 1) * zi.powi(m as i32) + 0.5 * mfact * zi.powi(m as i32 + 1);
        for k in 1..=10u32 {
            // B_2k (2k+m-1)! / (2k)!
            let ratio = ((2 * k + 1)..=(2 * k + m - 1)).fold(1.0f64, |a, i| a * i as f64);
            let coef = bernoulli(k as usize) * ratio;
            s += coef * zi.powi((2 * k + m) as i32);
        }
        if m % 2 == 1 {
            s
        } else {
            -s
        }
    };
    acc + asym
}
