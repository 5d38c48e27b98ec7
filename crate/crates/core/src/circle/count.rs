use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::function::FunctionExpr;

use super::expsum::{e_reduced, SumKernel, SumVariant};
use super::CircleError;

/// Largest convolution table or α-grid.
pub const MAX_TABLE: u64 = 1 << 28;

/// [f(n)] for n in (x0, x1], as non-negative integers.
pub fn window_values(f: &FunctionExpr, x0: f64, x1: f64) -> Result<Vec<u64>, CircleError> {
    let k = SumKernel::new(f, x0, x1, SumVariant::S)?;
    k.values()
        .iter()
        .map(|&v| {
            if v < 0.0 {
                Err(CircleError::InvalidArgument(format!("negative value {v} in the window")))
            } else {
                Ok(v as u64)
            }
        })
        .collect()
}

/// (value, multiplicity) pairs, sorted by value.
fn histogram(values: &[u64]) -> Vec<(u64, u128)> {
    let mut v = values.to_vec();
    v.sort_unstable();
    let mut out: Vec<(u64, u128)> = Vec::new();
    for x in v {
        match out.last_mut() {
            Some((y, c)) if *y == x => *c += 1,
            _ => out.push((x, 1)),
        }
    }
    out
}

/// R_s(N): ordered s-tuples of n in (x0, x1] with Σ [f(n_i)] = N.
pub fn count_r_direct(f: &FunctionExpr, n: u64, s: u32, x0: f64, x1: f64) -> Result<u128, CircleError> {
    count_from_values(&window_values(f, x0, x1)?, n, s)
}

pub(crate) fn count_from_values(values: &[u64], n: u64, s: u32) -> Result<u128, CircleError> {
    if s == 0 {
        return Ok(u128::from(n == 0));
    }
    if n + 1 > MAX_TABLE {
        return Err(CircleError::Capacity { size: n + 1, cap: MAX_TABLE });
    }
    let hist: Vec<(u64, u128)> = histogram(values).into_iter().filter(|(v, _)| *v <= n).collect();
    let size = n as usize + 1;
    let mut cur = vec![0u128; size];
    for &(v, c) in &hist {
        cur[v as usize] = c;
    }
    for step in 1..s {
        if step + 1 == s {
            // only the entry at N is needed
            return Ok(hist.iter().map(|&(v, c)| c * cur[(n - v) as usize]).sum());
        }
        let mut next = vec![0u128; size];
        for &(v, c) in &hist {
            let v = v as usize;
            for t in v..size {
                next[t] += c * cur[t - v];
            }
        }
        cur = next;
    }
    Ok(cur[n as usize])
}

/// R_s(N) from the orthogonality integral ∫ S(α)^s e(−αN) dα, evaluated by
/// the trapezoid rule on α_j = −1/2 + j/grid.
///
/// The integrand is a trigonometric polynomial, so the rule is exact once no
/// non-zero frequency Σ[f(n_i)] − N is a multiple of `grid`.
pub fn circle_r_numeric(f: &FunctionExpr, n: u64, s: u32, x0: f64, x1: f64, grid: usize) -> Result<f64, CircleError> {
    numeric_from_values(&window_values(f, x0, x1)?, n, s, grid)
}

pub(crate) fn numeric_from_values(values: &[u64], n: u64, s: u32, grid: usize) -> Result<f64, CircleError> {
    if grid as u64 > MAX_TABLE {
        return Err(CircleError::Capacity { size: grid as u64, cap: MAX_TABLE });
    }
    if s == 0 || values.is_empty() {
        return Ok(if s == 0 && n == 0 { 1.0 } else { 0.0 });
    }
    let max = *values.iter().max().unwrap();
    let min = *values.iter().min().unwrap();
    let s64 = s as u64;
    let nyquist = 2 * s64 * max;
    if grid as u64 <= nyquist {
        return Err(CircleError::Nyquist { grid, required: nyquist });
    }
    if n > s64 * max || n < s64 * min {
        return Ok(0.0);
    }
    // S(α_j) = Σ_v c_v (−1)^v e(v j / grid): an inverse DFT of the signed histogram
    let mut buf = vec![Complex64::new(0.0, 0.0); grid];
    for (v, c) in histogram(values) {
        let sign = if v % 2 == 0 { 1.0 } else { -1.0 };
        buf[(v % grid as u64) as usize] += Complex64::new(sign * c as f64, 0.0);
    }
    FftPlanner::<f64>::new().plan_fft_inverse(grid).process(&mut buf);
    let sign_n = if n % 2 == 0 { 1.0 } else { -1.0 };
    let g = grid as u128;
    let total: Complex64 = buf
        .iter()
        .enumerate()
        .map(|(j, z)| {
            let k = (j as u128 * n as u128) % g;
            let phase = e_reduced(((g - k) % g) as f64 / grid as f64);
            z.powu(s) * phase
        })
        .sum();
    Ok(sign_n * total.re / grid as f64)
}
