use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dd::DoubleDouble;
use crate::function::{EvalError, FunctionExpr, Precision};

use super::BasisError;

pub const MAX_SEQUENCE_LEN: u64 = 100_000_000;

/// Double-precision floors closer than this to an integer are redone in double-double.
const NEAR_INTEGER: f64 = 1.0e-6;
/// Assumed relative error of a double-precision evaluation.
const DOUBLE_REL_ERR: f64 = 1.0e-13;
/// Double-double results closer than this to an integer (but not on it) stay ambiguous.
const AMBIGUOUS_ABS: f64 = 1.0e-25;
const AMBIGUOUS_REL: f64 = 1.0e-28;
const VALUE_BOUND: f64 = 4.611_686_018_427_388e18; // 2^62

/// How the floor of one entry was decided.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FloorFlag {
    Double,
    /// Re-evaluated in double-double because the double value was too close to an integer.
    Extended,
    /// Within rounding distance of an integer even in double-double; excluded from exact counts.
    Ambiguous,
}

impl FloorFlag {
    pub fn code(self) -> u8 {
        match self {
            FloorFlag::Double => 0,
            FloorFlag::Extended => 1,
            FloorFlag::Ambiguous => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FloorValue {
    pub floor: i64,
    /// {f(n)} in [0, 1).
    pub frac: f64,
    pub flag: FloorFlag,
}

/// ⌊f(n)⌋ with the near-integer precision rule.
pub fn floor_value(f: &FunctionExpr, n: u64) -> Result<FloorValue, BasisError> {
    floor_value_with(f, n, Precision::Double)
}

/// As [`floor_value`]; `Precision::Extended` skips the double pass and floors
/// every entry in double-double.
pub fn floor_value_with(f: &FunctionExpr, n: u64, precision: Precision) -> Result<FloorValue, BasisError> {
    let x = n as f64;
    let v = f.eval_f64(x)?;
    if v.abs() >= VALUE_BOUND {
        return Err(BasisError::Overflow { n, value: v });
    }
    let fl = v.floor();
    let frac = v - fl;
    let dist = frac.min(1.0 - frac);
    if precision == Precision::Double && dist >= NEAR_INTEGER.max(DOUBLE_REL_ERR * v.abs()) {
        return Ok(FloorValue { floor: fl as i64, frac, flag: FloorFlag::Double });
    }
    let d = f.eval_dd(DoubleDouble::from_f64(x))?;
    let fl = d.floor();
    let fr = d - fl;
    let frac = fr.to_f64().clamp(0.0, 1.0 - f64::EPSILON / 2.0);
    let dist = fr.to_f64().min((DoubleDouble::ONE - fr).to_f64());
    let flag = if (fr.hi != 0.0 || fr.lo != 0.0) && dist < AMBIGUOUS_ABS.max(AMBIGUOUS_REL * v.abs()) {
        FloorFlag::Ambiguous
    } else {
        FloorFlag::Extended
    };
    let floor = fl.floor_i128().ok_or(BasisError::Overflow { n, value: v })?;
    Ok(FloorValue { floor: floor as i64, frac, flag })
}

/// `values[i] = [f(n_start + i)]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceWindow {
    pub n_start: u64,
    pub values: Vec<i64>,
    /// Display form of the generating function.
    pub f_id: String,
    pub flags: Vec<FloorFlag>,
}

impl SequenceWindow {
    /// Build a window from explicit values (all flagged as exact).
    pub fn from_values(n_start: u64, values: Vec<i64>, f_id: impl Into<String>) -> Self {
        let flags = vec![FloorFlag::Double; values.len()];
        SequenceWindow { n_start, values, f_id: f_id.into(), flags }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// True when entry `i` needed more than double precision.
    pub fn precision_flag(&self, i: usize) -> bool {
        self.flags[i] != FloorFlag::Double
    }

    pub fn is_non_decreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] <= w[1])
    }

    /// Values whose floor is certain, in sequence order.
    pub fn exact_values(&self) -> impl Iterator<Item = i64> + '_ {
        self.values.iter().zip(&self.flags).filter(|(_, f)| **f != FloorFlag::Ambiguous).map(|(v, _)| *v)
    }

    /// Sorted distinct exact values.
    pub fn distinct_values(&self) -> Vec<i64> {
        let mut v: Vec<i64> = self.exact_values().collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn ambiguous_count(&self) -> usize {
        self.flags.iter().filter(|f| **f == FloorFlag::Ambiguous).count()
    }
}

/// Generate `[f(n)]` for `n = n_start .. n_start + count`, in parallel chunks.
pub fn gen_sequence(f: &FunctionExpr, n_start: u64, count: u64) -> Result<SequenceWindow, BasisError> {
    gen_sequence_with(f, n_start, count, Precision::Double)
}

pub fn gen_sequence_with(
    f: &FunctionExpr,
    n_start: u64,
    count: u64,
    precision: Precision,
) -> Result<SequenceWindow, BasisError> {
    if count > MAX_SEQUENCE_LEN {
        return Err(BasisError::InvalidArgument(format!("count {count} exceeds {MAX_SEQUENCE_LEN}")));
    }
    if n_start == 0 {
        return Err(EvalError::BelowOne(0.0).into());
    }
    let entries: Vec<FloorValue> = (0..count as usize)
        .into_par_iter()
        .with_min_len(4096)
        .map(|i| floor_value_with(f, n_start + i as u64, precision))
        .collect::<Result<_, _>>()?;
    Ok(SequenceWindow {
        n_start,
        values: entries.iter().map(|e| e.floor).collect(),
        f_id: f.to_string(),
        flags: entries.iter().map(|e| e.flag).collect(),
    })
}
