use serde::{Deserialize, Serialize};

use super::sumset::{SumsetBitmap, SumsetTower};
use super::{sumset_tower, BasisError, SequenceWindow};

/// Gaps between consecutive members of a set inside a window.
///
/// A gap is the number of missing integers strictly between two consecutive
/// members, so consecutive members give gap 0. `location` is the first
/// missing integer of the (first) largest gap.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapReport {
    pub window: [u64; 2],
    pub max_gap: u64,
    #[serde(rename = "location")]
    pub max_gap_location: u64,
    /// `histogram[g]` counts gaps of size `g`.
    pub histogram: Vec<u64>,
}

pub fn gap_report(bm: &SumsetBitmap, lo: u64, hi: u64) -> Result<GapReport, BasisError> {
    if lo > hi || hi > bm.limit {
        return Err(BasisError::InvalidArgument(format!("window [{lo}, {hi}] is not inside [0, {}]", bm.limit)));
    }
    let mut prev: Option<u64> = None;
    let mut max_gap = 0;
    let mut location = 0;
    let mut histogram = vec![0u64];
    for m in bm.ones_in(lo, hi) {
        if let Some(p) = prev {
            let gap = m - p - 1;
            if gap as usize >= histogram.len() {
                histogram.resize(gap as usize + 1, 0);
            }
            histogram[gap as usize] += 1;
            if gap > max_gap {
                max_gap = gap;
                location = p + 1;
            }
        }
        prev = Some(m);
    }
    if prev.is_none() {
        return Err(BasisError::EmptyWindow { lo, hi });
    }
    Ok(GapReport { window: [lo, hi], max_gap, max_gap_location: location, histogram })
}

/// Per-fold summary of an order search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderLevel {
    pub s: u32,
    /// Least element of the s-fold sumset.
    pub min_element: Option<u64>,
    /// Max gap on `[lo, hi/4]`, `[lo, hi/2]`, `[lo, hi]`; `None` for an empty window.
    pub max_gaps: [Option<u64>; 3],
    /// Non-increasing across the two doublings.
    pub stabilized: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderSearch {
    pub window: [u64; 2],
    pub levels: Vec<OrderLevel>,
    /// Smallest s with no gaps on the full window and stabilized gaps.
    pub order: Option<u32>,
}

/// Build folds `s = 1..=s_max` and report gaps on the window and its two halvings.
pub fn basis_order_search(
    seq: &SequenceWindow,
    s_max: u32,
    lo: u64,
    hi: u64,
    budget: u64,
) -> Result<(OrderSearch, SumsetTower), BasisError> {
    if lo > hi / 4 {
        return Err(BasisError::InvalidArgument(format!("window [{lo}, {hi}] too narrow to halve twice")));
    }
    let tower = sumset_tower(seq, s_max, hi, budget)?;
    let windows = [hi / 4, hi / 2, hi];
    let mut levels = Vec::with_capacity(s_max as usize);
    let mut order = None;
    for (i, bm) in tower.levels.iter().enumerate() {
        let mut max_gaps = [None; 3];
        for (slot, &w) in max_gaps.iter_mut().zip(&windows) {
            *slot = gap_report(bm, lo, w).ok().map(|r| r.max_gap);
        }
        let stabilized = match max_gaps {
            [Some(a), Some(b), Some(c)] => a >= b && b >= c,
            _ => false,
        };
        let s = i as u32 + 1;
        let covers = max_gaps[2] == Some(0) && bm.contains(lo) && bm.contains(hi);
        if order.is_none() && covers && stabilized {
            order = Some(s);
        }
        levels.push(OrderLevel { s, min_element: bm.min_element(), max_gaps, stabilized });
    }
    Ok((OrderSearch { window: [lo, hi], levels, order }, tower))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{sumset_fold, DEFAULT_BITSET_BUDGET};

    #[test]
    fn three_point_set() {
        let mut b = SumsetBitmap::empty(1, 20);
        for m in [10, 11, 15] {
            b.set(m);
        }
        let r = gap_report(&b, 10, 15).unwrap();
        assert_eq!((r.max_gap, r.max_gap_location), (3, 12));
        assert_eq!(r.histogram, vec![1, 0, 0, 1]);
        assert!(matches!(gap_report(&b, 0, 9), Err(BasisError::EmptyWindow { .. })));
    }

    #[test]
    fn squares_up_to_hundred() {
        let seq = SequenceWindow::from_values(1, (1..=10).map(|i| i * i).collect(), "sq");
        let b = sumset_fold(&seq, 1, 100, DEFAULT_BITSET_BUDGET).unwrap();
        let r = gap_report(&b, 1, 100).unwrap();
        assert_eq!((r.max_gap, r.max_gap_location), (18, 82));
    }

    #[test]
    fn json_field_names() {
        let r = GapReport { window: [1, 2], max_gap: 0, max_gap_location: 0, histogram: vec![1] };
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        for key in ["window", "max_gap", "location", "histogram"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }
}
