use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::expsum::e_reduced;
use super::CircleError;

/// Distance to the nearest integer.
fn dist(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// Φ(x; K) = 1 / (1 + K‖x‖).
pub fn phi(x: f64, k: u64) -> f64 {
    1.0 / (1.0 + k as f64 * dist(x))
}

/// c(α) = (1 − e(−α)) / (2πi), so that for non-integer x
/// e(−α{x}) = c(α) Σ_k e(kx)/(k + α) as a symmetric Fourier series.
///
/// |c(α)| = |sin πα|/π ≤ ‖α‖.
pub fn fourier_c(alpha: f64) -> Complex64 {
    let t = (-alpha).rem_euclid(1.0);
    (Complex64::new(1.0, 0.0) - e_reduced(t)) / Complex64::new(0.0, std::f64::consts::TAU)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierCheck {
    pub x: f64,
    pub alpha: f64,
    pub k: u64,
    /// e(−α{x}).
    pub lhs: Complex64,
    /// c(α) Σ_{|k|≤K} e(kx)/(k + α).
    pub truncated_sum: Complex64,
    pub residual: f64,
    pub phi: f64,
    /// Φ(x; K) log K.
    pub bound: f64,
}

/// Truncated Fourier expansion of e(−α{x}) against its error term Φ(x; K) log K.
pub fn fourier_expansion_check(x: f64, alpha: f64, k: u64) -> Result<FourierCheck, CircleError> {
    if x.fract() == 0.0 {
        return Err(CircleError::IntegerArgument("x"));
    }
    if alpha.fract() == 0.0 {
        return Err(CircleError::IntegerArgument("alpha"));
    }
    if k < 2 {
        return Err(CircleError::InvalidArgument(format!("K = {k} < 2")));
    }
    let frac = x.rem_euclid(1.0);
    let lhs = e_reduced((-alpha * frac).rem_euclid(1.0));
    let mut sum = Complex64::new(0.0, 0.0);
    // pair k and −k so the partial sums stay symmetric
    sum += Complex64::new(1.0 / alpha, 0.0);
    for j in 1..=k {
        let ph = e_reduced((j as f64 * frac).rem_euclid(1.0));
        sum += ph / (j as f64 + alpha) + ph.conj() / (alpha - j as f64);
    }
    let truncated_sum = fourier_c(alpha) * sum;
    let p = phi(x, k);
    Ok(FourierCheck {
        x,
        alpha,
        k,
        lhs,
        truncated_sum,
        residual: (lhs - truncated_sum).norm(),
        phi: p,
        bound: p * (k as f64).ln(),
    })
}

/// Fourier coefficients of Φ(·; K) from a 4K-point DFT.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiCoefficients {
    pub k: u64,
    pub grid: usize,
    /// b_0..b_{2K} (Φ is even and real, so b_{−j} = b_j).
    pub b: Vec<f64>,
    /// max_j |b_j| (K² + j²) / (K log K): the implied constant of the decay bound.
    pub decay_constant: f64,
}

impl PhiCoefficients {
    pub fn b0(&self) -> f64 {
        self.b[0]
    }
}

pub fn phi_coefficients(k: u64) -> Result<PhiCoefficients, CircleError> {
    if k < 2 {
        return Err(CircleError::InvalidArgument(format!("K = {k} < 2")));
    }
    let grid = 4 * k as usize;
    let mut buf: Vec<Complex64> = (0..grid).map(|j| Complex64::new(phi(j as f64 / grid as f64, k), 0.0)).collect();
    FftPlanner::<f64>::new().plan_fft_forward(grid).process(&mut buf);
    let b: Vec<f64> = buf[..=grid / 2].iter().map(|z| z.re / grid as f64).collect();
    let kf = k as f64;
    let scale = kf * kf.ln();
    let decay_constant =
        b.iter().enumerate().map(|(j, v)| v.abs() * (kf * kf + (j * j) as f64) / scale).fold(0.0, f64::max);
    Ok(PhiCoefficients { k, grid, b, decay_constant })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_is_bounded_by_distance() {
        for a in [0.1, 0.5, 0.9, -0.3, 2.25] {
            assert!(fourier_c(a).norm() <= dist(a) + 1e-15);
        }
    }

    #[test]
    fn expansion_converges_at_generic_point() {
        let r: Vec<f64> =
            [4, 16, 64, 256].iter().map(|&k| fourier_expansion_check(0.3, 0.21, k).unwrap().residual).collect();
        assert!(r.windows(2).all(|w| w[1] <= w[0]), "{r:?}");
        assert!(r[3] < 1e-2);
    }

    #[test]
    fn near_integer_is_within_bound() {
        let c = fourier_expansion_check(0.001, 0.21, 16).unwrap();
        assert!(c.phi > 0.98);
        assert!(c.residual < c.bound);
    }

    #[test]
    fn integers_rejected() {
        assert!(matches!(fourier_expansion_check(2.0, 0.3, 8), Err(CircleError::IntegerArgument("x"))));
        assert!(matches!(fourier_expansion_check(0.2, -1.0, 8), Err(CircleError::IntegerArgument("alpha"))));
    }

    #[test]
    fn b0_scales_like_log_k_over_k() {
        for k in [64u64, 128, 256, 512] {
            let c = phi_coefficients(k).unwrap();
            let exact = 2.0 / k as f64 * (1.0 + k as f64 / 2.0).ln();
            assert!((c.b0() - exact).abs() < 0.05 * exact, "K = {k}: {} vs {exact}", c.b0());
            assert!(c.decay_constant < 2.0);
        }
    }
}
