use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BasisError, SequenceWindow};

/// Default bitset budget: 2^33 bits (1 GiB) per level.
pub const DEFAULT_BITSET_BUDGET: u64 = 1 << 33;

/// Output words handled by one parallel task.
const WORD_CHUNK: usize = 1024;

/// Bit `m` is set iff `m` is a sum of exactly `s` sequence values.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SumsetBitmap {
    pub s: u32,
    pub limit: u64,
    words: Vec<u64>,
}

impl SumsetBitmap {
    pub fn empty(s: u32, limit: u64) -> Self {
        let n = (limit / 64 + 1) as usize;
        SumsetBitmap { s, limit, words: vec![0; n] }
    }

    /// Rebuild from raw words; bits above `limit` are cleared.
    pub fn from_words(s: u32, limit: u64, mut words: Vec<u64>) -> Self {
        words.resize((limit / 64 + 1) as usize, 0);
        let mut b = SumsetBitmap { s, limit, words };
        b.clear_tail();
        b
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn contains(&self, m: u64) -> bool {
        m <= self.limit && self.words[(m / 64) as usize] >> (m % 64) & 1 == 1
    }

    pub fn set(&mut self, m: u64) {
        if m <= self.limit {
            self.words[(m / 64) as usize] |= 1 << (m % 64);
        }
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Set bits in increasing order.
    pub fn iter_ones(&self) -> impl Iterator<Item = u64> + '_ {
        self.ones_in(0, self.limit)
    }

    /// Set bits in `[lo, hi]`, increasing.
    pub fn ones_in(&self, lo: u64, hi: u64) -> impl Iterator<Item = u64> + '_ {
        let hi = hi.min(self.limit);
        let first = (lo / 64) as usize;
        let last = if lo > hi { first } else { (hi / 64) as usize + 1 };
        self.words[first.min(self.words.len())..last.min(self.words.len())]
            .iter()
            .enumerate()
            .flat_map(move |(i, &w)| {
                let base = (first + i) as u64 * 64;
                let mut w = w;
                std::iter::from_fn(move || {
                    if w == 0 {
                        return None;
                    }
                    let t = w.trailing_zeros() as u64;
                    w &= w - 1;
                    Some(base + t)
                })
            })
            .filter(move |&m| m >= lo && m <= hi)
    }

    /// Smallest set bit, if any.
    pub fn min_element(&self) -> Option<u64> {
        self.iter_ones().next()
    }

    /// Largest set bit `<= m`.
    pub fn predecessor(&self, m: u64) -> Option<u64> {
        let m = m.min(self.limit);
        let mut wi = (m / 64) as usize;
        let mut w = self.words[wi] & (u64::MAX >> (63 - m % 64));
        loop {
            if w != 0 {
                return Some(wi as u64 * 64 + 63 - w.leading_zeros() as u64);
            }
            if wi == 0 {
                return None;
            }
            wi -= 1;
            w = self.words[wi];
        }
    }

    /// Whether `self + shift ⊆ other` on the common range.
    pub fn shifted_subset_of(&self, shift: u64, other: &SumsetBitmap) -> bool {
        self.iter_ones().filter(|m| m + shift <= other.limit).all(|m| other.contains(m + shift))
    }

    fn clear_tail(&mut self) {
        let used = self.limit % 64 + 1;
        if used < 64 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << used) - 1;
            }
        }
    }
}

/// All levels `B_1 .. B_s` of the fold; supports decomposition of any member.
#[derive(Clone, Debug)]
pub struct SumsetTower {
    /// Sorted distinct sequence values `<= limit`.
    pub elements: Vec<u64>,
    pub levels: Vec<SumsetBitmap>,
}

impl SumsetTower {
    pub fn s(&self) -> u32 {
        self.levels.len() as u32
    }

    pub fn limit(&self) -> u64 {
        self.levels[0].limit
    }

    pub fn level(&self, t: u32) -> &SumsetBitmap {
        &self.levels[t as usize - 1]
    }

    pub fn top(&self) -> &SumsetBitmap {
        self.levels.last().unwrap()
    }

    /// Write `m ∈ B_t` as a sum of `t` sequence values, smallest first choice at each level.
    pub fn decompose(&self, m: u64, t: u32) -> Result<Vec<u64>, BasisError> {
        if t == 0 || t > self.s() || !self.level(t).contains(m) {
            return Err(BasisError::Backtrack(m));
        }
        let mut parts = Vec::with_capacity(t as usize);
        let mut rest = m;
        for level in (1..=t).rev() {
            let a = if level == 1 {
                self.elements.binary_search(&rest).map(|_| rest).map_err(|_| BasisError::Backtrack(rest))?
            } else {
                let below = self.level(level - 1);
                *self
                    .elements
                    .iter()
                    .take_while(|&&a| a <= rest)
                    .find(|&&a| below.contains(rest - a))
                    .ok_or(BasisError::Backtrack(rest))?
            };
            parts.push(a);
            rest -= a;
        }
        parts.sort_unstable();
        Ok(parts)
    }
}

fn usable_elements(seq: &SequenceWindow, limit: u64) -> Result<Vec<u64>, BasisError> {
    let distinct = seq.distinct_values();
    if let Some(neg) = distinct.iter().find(|v| **v < 0) {
        return Err(BasisError::InvalidArgument(format!("negative sequence value {neg}")));
    }
    Ok(distinct.into_iter().map(|v| v as u64).filter(|&v| v <= limit).collect())
}

fn check_budget(limit: u64, budget: u64) -> Result<(), BasisError> {
    if limit >= budget {
        return Err(BasisError::Capacity { limit, budget });
    }
    Ok(())
}

/// `dst = OR over a of (src << a)`, truncated at the limit.
fn shift_or(src: &SumsetBitmap, elements: &[u64], s: u32) -> SumsetBitmap {
    let n = src.words.len();
    let mut out = SumsetBitmap::empty(s, src.limit);
    out.words.par_chunks_mut(WORD_CHUNK).enumerate().for_each(|(ci, chunk)| {
        let w0 = ci * WORD_CHUNK;
        for &a in elements {
            let ws = (a / 64) as usize;
            let bs = (a % 64) as u32;
            if ws >= w0 + chunk.len() {
                break;
            }
            let start = w0.max(ws);
            for i in start..w0 + chunk.len() {
                let j = i - ws;
                let mut v = src.words[j] << bs;
                if bs != 0 && j >= 1 {
                    v |= src.words[j - 1] >> (64 - bs);
                }
                chunk[i - w0] |= v;
            }
        }
    });
    debug_assert_eq!(out.words.len(), n);
    out.clear_tail();
    out
}

/// The full fold tower `B_1 .. B_s` over `[0, limit]`.
pub fn sumset_tower(seq: &SequenceWindow, s: u32, limit: u64, budget: u64) -> Result<SumsetTower, BasisError> {
    if s == 0 {
        return Err(BasisError::InvalidArgument("s must be at least 1".into()));
    }
    check_budget(limit, budget)?;
    let elements = usable_elements(seq, limit)?;
    let mut b1 = SumsetBitmap::empty(1, limit);
    elements.iter().for_each(|&a| b1.set(a));
    let mut levels = vec![b1];
    for t in 2..=s {
        let next = shift_or(levels.last().unwrap(), &elements, t);
        levels.push(next);
    }
    Ok(SumsetTower { elements, levels })
}

/// `B_s`, the s-fold sumset of the sequence restricted to `[0, limit]`.
pub fn sumset_fold(seq: &SequenceWindow, s: u32, limit: u64, budget: u64) -> Result<SumsetBitmap, BasisError> {
    if s == 0 {
        return Err(BasisError::InvalidArgument("s must be at least 1".into()));
    }
    check_budget(limit, budget)?;
    let elements = usable_elements(seq, limit)?;
    let mut b = SumsetBitmap::empty(1, limit);
    elements.iter().for_each(|&a| b.set(a));
    for t in 2..=s {
        b = shift_or(&b, &elements, t);
    }
    Ok(b)
}
