use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::function::FunctionExpr;

use super::sequence::{floor_value, FloorFlag};
use super::BasisError;

const CHUNK: u64 = 1 << 14;

/// Sorted residues of `[f(n)] mod q` over `1 <= n <= n_max`, skipping ambiguous floors.
pub fn residue_coverage(f: &FunctionExpr, q: u64, n_max: u64) -> Result<Vec<u64>, BasisError> {
    if q == 0 {
        return Err(BasisError::InvalidArgument("q must be at least 1".into()));
    }
    let chunks = n_max.div_ceil(CHUNK);
    let seen = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut hit = vec![false; q as usize];
            for n in c * CHUNK + 1..=((c + 1) * CHUNK).min(n_max) {
                let v = floor_value(f, n)?;
                if v.flag != FloorFlag::Ambiguous {
                    hit[v.floor.rem_euclid(q as i64) as usize] = true;
                }
            }
            Ok::<_, BasisError>(hit)
        })
        .try_reduce(
            || vec![false; q as usize],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x |= y);
                Ok(a)
            },
        )?;
    Ok(seen.iter().enumerate().filter(|(_, h)| **h).map(|(r, _)| r as u64).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub q: u64,
    pub n_max: u64,
    pub histogram: Vec<u64>,
    /// max over bins of |observed/expected − 1|.
    pub max_deviation: f64,
    pub ambiguous: u64,
}

/// Histogram of `{f(n)/q}` over `1 <= n <= n_max` in `bins` equal bins.
pub fn fractional_density(f: &FunctionExpr, q: u64, n_max: u64, bins: usize) -> Result<DensityReport, BasisError> {
    if q == 0 || bins < 2 || n_max == 0 {
        return Err(BasisError::InvalidArgument("need q >= 1, bins >= 2, n_max >= 1".into()));
    }
    let chunks = n_max.div_ceil(CHUNK);
    let (histogram, ambiguous) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut h = vec![0u64; bins];
            let mut amb = 0u64;
            for n in c * CHUNK + 1..=((c + 1) * CHUNK).min(n_max) {
                let v = floor_value(f, n)?;
                if v.flag == FloorFlag::Ambiguous {
                    amb += 1;
                    continue;
                }
                // {f/q} = ((⌊f⌋ mod q) + {f}) / q
                let t = (v.floor.rem_euclid(q as i64) as f64 + v.frac) / q as f64;
                let bin = ((t * bins as f64) as usize).min(bins - 1);
                h[bin] += 1;
            }
            Ok::<_, BasisError>((h, amb))
        })
        .try_reduce(
            || (vec![0u64; bins], 0u64),
            |(mut a, x), (b, y)| {
                a.iter_mut().zip(b).for_each(|(p, q)| *p += q);
                Ok((a, x + y))
            },
        )?;
    let total: u64 = histogram.iter().sum();
    let expected = total as f64 / bins as f64;
    let max_deviation = histogram.iter().map(|&c| (c as f64 / expected - 1.0).abs()).fold(0.0, f64::max);
    Ok(DensityReport { q, n_max, histogram, max_deviation, ambiguous })
}
