//! Simultaneous power-sum equations x_1^j + ⋯ + x_s^j = N_j (1 ≤ j ≤ k).

mod det;
mod search;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use det::{delta0, delta0_i128, delta_j, det_exact, power_matrix, superfactorial, MAX_K};
pub use search::{exhaustive_oracle, solve_bruteforce, HkOutcome, DEFAULT_NODE_BUDGET, MAX_WORK};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HkError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("determinant {det} differs from 1!..{k}! = {product}")]
    Identity { k: usize, det: String, product: String },
    #[error("search space s*x_max^k ~ {estimate:e} exceeds {limit:e}")]
    TooLarge { estimate: f64, limit: f64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HkInstance {
    pub k: usize,
    pub s: usize,
    pub targets: Vec<u128>,
}

impl HkInstance {
    pub fn new(k: usize, s: usize, targets: Vec<u128>) -> Result<Self, HkError> {
        let inst = HkInstance { k, s, targets };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<(), HkError> {
        if self.k == 0 || self.k > MAX_K || self.s == 0 {
            return Err(HkError::InvalidInstance(format!("k = {}, s = {}", self.k, self.s)));
        }
        if self.targets.len() != self.k || self.targets.iter().any(|&t| t == 0) {
            return Err(HkError::InvalidInstance(format!("need {} positive targets, got {:?}", self.k, self.targets)));
        }
        if self.targets.iter().any(|&t| t > i128::MAX as u128) {
            return Err(HkError::InvalidInstance("target exceeds 2^127".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HkConditions {
    /// N_j / N_k^{j/k}, j < k.
    pub ratios_low: Vec<f64>,
    /// N_j / (s^{1−j/k} N_k^{j/k}), j < k.
    pub ratios_high: Vec<f64>,
    /// Δ_j ≡ 0 (mod Δ_0), j = 1..k.
    pub congruences_ok: Vec<bool>,
    pub delta0: String,
    pub delta_j: Vec<String>,
    /// All ratios_low > 1, all ratios_high < 1 and all congruences hold.
    pub plausible: bool,
}

pub fn check_conditions(inst: &HkInstance) -> Result<HkConditions, HkError> {
    inst.validate()?;
    let k = inst.k;
    let nk = inst.targets[k - 1] as f64;
    let s = inst.s as f64;
    let mut ratios_low = Vec::with_capacity(k.saturating_sub(1));
    let mut ratios_high = Vec::with_capacity(k.saturating_sub(1));
    for j in 1..k {
        let e = j as f64 / k as f64;
        let nj = inst.targets[j - 1] as f64;
        ratios_low.push(nj / nk.powf(e));
        ratios_high.push(nj / (s.powf(1.0 - e) * nk.powf(e)));
    }
    let d0 = delta0(k)?;
    let targets: Vec<i128> = inst.targets.iter().map(|&t| t as i128).collect();
    let dj: Vec<BigInt> = (1..=k).map(|j| delta_j(k, j, &targets)).collect::<Result<_, _>>()?;
    let congruences_ok: Vec<bool> = dj.iter().map(|d| d.is_multiple_of(&d0)).collect();
    let plausible = ratios_low.iter().all(|&r| r > 1.0)
        && ratios_high.iter().all(|&r| r < 1.0)
        && congruences_ok.iter().all(|&c| c);
    Ok(HkConditions {
        ratios_low,
        ratios_high,
        congruences_ok,
        delta0: d0.to_string(),
        delta_j: dj.iter().map(|d| d.to_string()).collect(),
        plausible,
    })
}

/// Cramer weights c_j = Δ_j / Δ_0: the real solution of Σ_j c_j j^i = N_i.
pub fn cramer_weights(inst: &HkInstance) -> Result<Vec<f64>, HkError> {
    inst.validate()?;
    let d0 = delta0(inst.k)?.to_f64().unwrap_or(f64::NAN);
    let targets: Vec<i128> = inst.targets.iter().map(|&t| t as i128).collect();
    (1..=inst.k).map(|j| Ok(delta_j(inst.k, j, &targets)?.to_f64().unwrap_or(f64::NAN) / d0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conditions_example() {
        let inst = HkInstance::new(2, 2, vec![5, 13]).unwrap();
        let c = check_conditions(&inst).unwrap();
        assert!((c.ratios_low[0] - 5.0 / 13f64.sqrt()).abs() < 1e-15);
        assert_eq!(c.congruences_ok, vec![true, true]);
        assert_eq!(c.delta_j, vec!["-6".to_string(), "8".to_string()]);
        // 5 / (√2 √13) ≈ 0.98
        assert!(c.plausible);
    }

    #[test]
    fn degree_one_is_vacuous() {
        let c = check_conditions(&HkInstance::new(1, 3, vec![7]).unwrap()).unwrap();
        assert!(c.ratios_low.is_empty() && c.plausible);
    }

    #[test]
    fn cramer_counts_small_values() {
        // y = (3, 1, 1, 2): one 3, one 2, two 1s
        let y = [3u128, 1, 1, 2];
        let t: Vec<u128> = (1..=3).map(|j| y.iter().map(|v| v.pow(j)).sum()).collect();
        let w = cramer_weights(&HkInstance::new(3, 4, t).unwrap()).unwrap();
        for (got, want) in w.iter().zip([2.0, 1.0, 1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_instances() {
        assert!(HkInstance::new(0, 2, vec![]).is_err());
        assert!(HkInstance::new(2, 2, vec![5]).is_err());
        assert!(HkInstance::new(2, 2, vec![0, 3]).is_err());
    }
}
