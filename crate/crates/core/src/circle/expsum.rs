use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{floor_value, BasisError};
use crate::dd::DoubleDouble;
use crate::function::FunctionExpr;

use super::CircleError;

/// Largest number of terms in a direct sum.
pub const MAX_TERMS: u64 = 100_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SumVariant {
    /// Σ e(α [f(n)]).
    S,
    /// Σ e(α f(n)).
    T,
    /// Σ e(β f(n)) over a dyadic block; same kernel as T.
    W,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpSum {
    pub value: Complex64,
    pub terms: u64,
    pub alpha: f64,
    pub variant: SumVariant,
}

/// Neumaier-compensated accumulator.
#[derive(Default, Clone, Copy)]
pub(crate) struct Compensated {
    sum: f64,
    c: f64,
}

impl Compensated {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.c
    }
}

/// e(t) for t already reduced to [0, 1).
#[inline]
pub(crate) fn e_reduced(t: f64) -> Complex64 {
    let (s, c) = (std::f64::consts::TAU * t).sin_cos();
    Complex64::new(c, s)
}

/// e(α·v) with the product reduced mod 1 in double-double.
#[inline]
pub(crate) fn e_product(alpha: f64, v: f64) -> Complex64 {
    e_reduced(DoubleDouble::mul_f64_exact(alpha, v).fract().to_f64())
}

/// Precomputed terms of an exponential sum over `lo < n <= hi`.
#[derive(Clone, Debug)]
pub struct SumKernel {
    pub variant: SumVariant,
    pub n_first: u64,
    /// [f(n)] for variant S, f(n) otherwise.
    values: Vec<f64>,
}

impl SumKernel {
    pub fn new(f: &FunctionExpr, lo: f64, hi: f64, variant: SumVariant) -> Result<Self, CircleError> {
        let n_first = (lo.floor() as i64 + 1).max(1) as u64;
        let n_last = hi.floor().max(0.0) as u64;
        let count = n_last.saturating_sub(n_first - 1);
        if count > MAX_TERMS {
            return Err(CircleError::InvalidArgument(format!("{count} terms exceed {MAX_TERMS}")));
        }
        let values = (n_first..=n_last)
            .into_par_iter()
            .map(|n| match variant {
                SumVariant::S => match floor_value(f, n) {
                    Ok(v) => Ok(v.floor as f64),
                    Err(BasisError::Eval(e)) => Err(CircleError::Eval(e)),
                    Err(BasisError::Overflow { n, value }) => Err(CircleError::Overflow { n, value }),
                    Err(e) => Err(CircleError::InvalidArgument(e.to_string())),
                },
                _ => Ok(f.eval_f64(n as f64)?),
            })
            .collect::<Result<Vec<f64>, CircleError>>()?;
        if variant == SumVariant::S {
            if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| v.abs() >= 9.007_199_254_740_992e15) {
                return Err(CircleError::Overflow { n: n_first + i as u64, value: *v });
            }
        }
        Ok(SumKernel { variant, n_first, values })
    }

    pub fn terms(&self) -> u64 {
        self.values.len() as u64
    }

    /// The summed values ([f(n)] or f(n)).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, alpha: f64) -> ExpSum {
        let mut re = Compensated::default();
        let mut im = Compensated::default();
        for &v in &self.values {
            let z = e_product(alpha, v);
            re.add(z.re);
            im.add(z.im);
        }
        ExpSum { value: Complex64::new(re.value(), im.value()), terms: self.terms(), alpha, variant: self.variant }
    }
}

/// Σ_{lo < n <= hi} e(α [f(n)]) (variant S) or e(α f(n)) (T, W).
pub fn exp_sum(f: &FunctionExpr, alpha: f64, lo: f64, hi: f64, variant: SumVariant) -> Result<ExpSum, CircleError> {
    Ok(SumKernel::new(f, lo, hi, variant)?.eval(alpha))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(t: &str) -> FunctionExpr {
        FunctionExpr::parse(t).unwrap()
    }

    #[test]
    fn zero_frequency_counts_terms() {
        let s = exp_sum(&f("pow(x, 1.5)"), 0.0, 3.5, 20.0, SumVariant::S).unwrap();
        assert_eq!(s.value, Complex64::new(17.0, 0.0));
        assert_eq!(s.terms, 17);
    }

    #[test]
    fn alternating_cancels() {
        let s = exp_sum(&f("x"), 0.5, 0.0, 200.0, SumVariant::S).unwrap();
        assert!(s.value.norm() < 1e-12);
    }

    #[test]
    fn quadratic_eighths() {
        let s = exp_sum(&f("pow(x, 2)"), 0.125, 0.0, 16.0, SumVariant::S).unwrap();
        // n² mod 8 over n = 1..16 takes 1, 4, 1, 0 repeatedly
        let table = [1.0, 4.0, 1.0, 0.0];
        let want: Complex64 = (0..16).map(|i| e_reduced(table[i % 4] / 8.0)).sum();
        assert!((s.value - want).norm() < 1e-13);
    }

    #[test]
    fn large_values_keep_phase() {
        // α [f(n)] with [f(n)] ~ 10^15: reduction must not lose the fractional part
        let k = SumKernel::new(&f("pow(x, 3)"), 99_998.0, 99_999.0, SumVariant::S).unwrap();
        assert_eq!(k.values(), &[999_970_000_299_999.0]);
        // 99999³ ≡ 7 (mod 8), so the phase is 7·3/8 mod 1 = 5/8
        let z = k.eval(0.375).value;
        assert!((z - e_reduced(0.625)).norm() < 1e-14);
    }
}
