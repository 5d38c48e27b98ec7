//! Bracketed root finding for increasing functions.

/// Failure modes of [`solve_increasing`].
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum RootError<E> {
    /// `g(lo) > 0`: the root lies below the admissible range.
    BelowRange {
        lo: f64,
        value: f64,
    },
    /// No sign change up to `hi_cap`.
    NoBracket {
        hi: f64,
    },
    /// Non-positive derivative at a probe inside the bracket.
    NonMonotone {
        x: f64,
    },
    Eval(E),
}

/// Root of an increasing `g` on `[lo, ∞)`: doubling bracket, bisection, then
/// Newton polish. `g` returns `(g(x), g'(x))`.
pub(crate) fn solve_increasing<E>(
    g: impl Fn(f64) -> Result<(f64, f64), E>,
    lo: f64,
    hi_cap: f64,
) -> Result<f64, RootError<E>> {
    let (g_lo, _) = g(lo).map_err(RootError::Eval)?;
    if g_lo > 0.0 {
        return Err(RootError::BelowRange { lo, value: g_lo });
    }
    if g_lo == 0.0 {
        return Ok(lo);
    }
    let mut a = lo;
    let mut b = (2.0 * lo).max(lo + 1.0);
    loop {
        let (gb, _) = g(b).map_err(RootError::Eval)?;
        if gb >= 0.0 {
            break;
        }
        a = b;
        b *= 2.0;
        if b > hi_cap {
            return Err(RootError::NoBracket { hi: hi_cap });
        }
    }
    for i in 0..=8 {
        let x = a + (b - a) * i as f64 / 8.0;
        let (_, d) = g(x).map_err(RootError::Eval)?;
        if !(d > 0.0) {
            return Err(RootError::NonMonotone { x });
        }
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b || (b - a) <= 4.0 * f64::EPSILON * b.abs() {
            break;
        }
        let (gm, _) = g(m).map_err(RootError::Eval)?;
        if gm < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    let mut x = 0.5 * (a + b);
    for _ in 0..3 {
        let (v, d) = g(x).map_err(RootError::Eval)?;
        let next = x - v / d;
        if !(next >= a && next <= b) || next == x {
            break;
        }
        x = next;
    }
    Ok(x)
}
