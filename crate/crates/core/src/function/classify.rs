//! Growth classification into the three classes of polynomially bounded
//! Hardy-field functions: polynomials (I), non-polynomial functions (II),
//! and polynomials plus a strictly slower non-polynomial part (III).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dd::DoubleDouble;

use super::eval::eval_node_dd;
use super::expr::{FunctionExpr, Node};
use super::{EvalError, Precision};

/// Doubling ladder 10³·2^i, i < GROWTH_PROBES, reaching about 10^15.
/// Slopes like 2 - 1/log x only settle to the stabilization threshold
/// well past 10^7, hence the long ladder.
pub const GROWTH_PROBES: usize = 41;
const GROWTH_START: f64 = 1.0e3;
/// Last three window slopes must agree pairwise to this.
const SLOPE_STABLE: f64 = 0.005;
/// A slope this close to an integer is a polynomial-degree candidate.
const INTEGER_TOL: f64 = 0.01;
/// Growth exponents above this violate the polynomial growth condition.
const MAX_GROWTH: f64 = 64.0;
/// Remainder must grow slower than x^(d - GAP) to count as lower order.
const LOWER_ORDER_GAP: f64 = 0.05;
/// Slope ceiling for a remainder to be called subpolynomial.
const SUBPOLY_SLOPE: f64 = 0.1;
const FIT_DRIFT: f64 = 1.0e-6;
const DECLARED_TOL: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FunctionClass {
    I,
    II,
    III,
}

/// Class, degrees and polynomial part of a function.
///
/// For class II, `d_f` is the nearest integer to the real degree and `c_f`
/// holds the real degree itself; [`DegreeProfile::degree`] returns the
/// quantity the circle-method parameters use.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeProfile {
    pub class: FunctionClass,
    pub d_f: u32,
    pub c_f: f64,
    pub c_real: f64,
    pub subpolynomial_remainder: bool,
    /// α_1, ..., α_d of the polynomial part (no constant term).
    pub poly_part: Vec<f64>,
}

impl DegreeProfile {
    /// d_f for classes I/III, the real degree c for class II.
    pub fn degree(&self) -> f64 {
        match self.class {
            FunctionClass::II => self.c_f,
            _ => self.d_f as f64,
        }
    }

    pub fn leading_coefficient(&self) -> Option<f64> {
        self.poly_part.last().copied()
    }

    /// A representative function with this profile.
    pub fn reconstruct(&self) -> Result<FunctionExpr, EvalError> {
        let mut terms: Vec<Node> = self
            .poly_part
            .iter()
            .enumerate()
            .filter(|(_, a)| **a != 0.0)
            .map(|(j, a)| Node::monomial(*a, j as u32 + 1))
            .collect();
        match self.class {
            FunctionClass::I => {}
            FunctionClass::II => terms.push(Node::pow(Node::Var, self.c_f)),
            FunctionClass::III => {
                if self.subpolynomial_remainder {
                    terms.push(Node::log(Node::Var));
                } else {
                    terms.push(Node::pow(Node::Var, self.c_f));
                }
            }
        }
        let root = match terms.len() {
            0 => Node::Var,
            1 => terms.pop().unwrap(),
            _ => Node::Add(terms),
        };
        FunctionExpr::with_auto_shift(root)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("growth condition fails: {0}")]
    GrowthViolation(String),
    #[error("cannot separate class II from class III on the probe range ({0}); supply a declared profile")]
    Ambiguous(String),
    #[error("declared profile disagrees with probes: {0}")]
    DeclaredMismatch(String),
    #[error("polynomial part requested for a class II function")]
    NoPolynomialPart,
}

fn growth_grid() -> Vec<f64> {
    (0..GROWTH_PROBES).map(|i| GROWTH_START * 2f64.powi(i as i32)).collect()
}

/// Slopes of log|g| against log x over consecutive doubling windows.
fn window_slopes(values: &[f64]) -> Vec<f64> {
    values.windows(2).map(|w| (w[1].abs().ln() - w[0].abs().ln()) / std::f64::consts::LN_2).collect()
}

/// Values along the ladder, stopping at the first overflow.
fn ladder_values(g: impl Fn(f64) -> Result<f64, EvalError>) -> Result<Vec<f64>, EvalError> {
    let mut out = Vec::with_capacity(GROWTH_PROBES);
    for x in growth_grid() {
        match g(x) {
            Ok(v) if v.is_finite() => out.push(v),
            Ok(_) | Err(EvalError::NonFinite { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

fn stabilized(slopes: &[f64]) -> bool {
    let n = slopes.len();
    if n < 3 {
        return false;
    }
    let t = &slopes[n - 3..];
    (t[0] - t[1]).abs() < SLOPE_STABLE && (t[1] - t[2]).abs() < SLOPE_STABLE && (t[0] - t[2]).abs() < SLOPE_STABLE
}

/// Polynomial part `α_1 x + ... + α_d x^d` and the remainder `r = f - p`.
/// Constant terms are absorbed into the remainder.
#[derive(Clone, Debug)]
pub struct PolySplit {
    /// α_1..α_d in the shifted variable x (f(x) = root(x + k0)).
    pub coeffs: Vec<f64>,
    coeffs_dd: Vec<DoubleDouble>,
    constant: DoubleDouble,
    remainder: Remainder,
    /// Whether the split came from the expression structure (vs. a numerical fit).
    pub symbolic: bool,
}

#[derive(Clone, Debug)]
enum Remainder {
    Zero,
    Symbolic(Node),
    Numeric,
}

impl PolySplit {
    /// r(x) = f(x) - Σ α_j x^j, including the absorbed constant.
    pub fn remainder(&self, f: &FunctionExpr, x: f64) -> Result<f64, EvalError> {
        Ok(self.remainder_dd(f, DoubleDouble::from_f64(x))?.to_f64())
    }

    fn remainder_dd(&self, f: &FunctionExpr, x: DoubleDouble) -> Result<DoubleDouble, EvalError> {
        match &self.remainder {
            Remainder::Zero => Ok(self.constant),
            Remainder::Symbolic(node) => Ok(eval_node_dd(node, x + DoubleDouble::from_f64(f.shift()))? + self.constant),
            Remainder::Numeric => {
                let fx = f.eval_dd(x)?;
                Ok(fx - horner_dd(&self.coeffs_dd, x) * x)
            }
        }
    }

    /// True when the remainder is constant (possibly zero).
    fn remainder_is_constant(&self) -> bool {
        matches!(self.remainder, Remainder::Zero)
    }
}

/// Σ c_i x^i for coefficients c_0.. (here used with α_1.. so the caller multiplies by x).
fn horner_dd(c: &[DoubleDouble], x: DoubleDouble) -> DoubleDouble {
    c.iter().rev().fold(DoubleDouble::ZERO, |acc, a| acc * x + *a)
}

/// Polynomial coefficients (constant first) of a node, if it is a polynomial in its variable.
fn as_polynomial(node: &Node) -> Option<Vec<DoubleDouble>> {
    fn mul(a: &[DoubleDouble], b: &[DoubleDouble]) -> Vec<DoubleDouble> {
        let mut out = vec![DoubleDouble::ZERO; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] = out[i + j] + *x * *y;
            }
        }
        out
    }
    fn add(a: &[DoubleDouble], b: &[DoubleDouble]) -> Vec<DoubleDouble> {
        let n = a.len().max(b.len());
        (0..n).map(|i| *a.get(i).unwrap_or(&DoubleDouble::ZERO) + *b.get(i).unwrap_or(&DoubleDouble::ZERO)).collect()
    }
    let p = match node {
        Node::Const(l) => vec![l.value],
        Node::Var => vec![DoubleDouble::ZERO, DoubleDouble::ONE],
        Node::Add(v) => {
            let mut acc = vec![DoubleDouble::ZERO];
            for c in v {
                acc = add(&acc, &as_polynomial(c)?);
            }
            acc
        }
        Node::Sub(a, b) => {
            let nb: Vec<_> = as_polynomial(b)?.into_iter().map(|c| -c).collect();
            add(&as_polynomial(a)?, &nb)
        }
        Node::Neg(a) => as_polynomial(a)?.into_iter().map(|c| -c).collect(),
        Node::Mul(v) => {
            let mut acc = vec![DoubleDouble::ONE];
            for c in v {
                acc = mul(&acc, &as_polynomial(c)?);
            }
            acc
        }
        Node::Div(a, b) => {
            let d = as_polynomial(b)?;
            if d.len() != 1 || d[0].hi == 0.0 {
                return None;
            }
            as_polynomial(a)?.into_iter().map(|c| c / d[0]).collect()
        }
        Node::Pow(a, e) => {
            let n = e.as_small_int()?;
            if !(0..=32).contains(&n) {
                return None;
            }
            let base = as_polynomial(a)?;
            let mut acc = vec![DoubleDouble::ONE];
            for _ in 0..n {
                acc = mul(&acc, &base);
            }
            acc
        }
        Node::Log(_) | Node::Exp(_) | Node::Li(_) | Node::LogGamma(_) => return None,
    };
    Some(p)
}

/// Top-level additive terms with their signs.
fn additive_terms(node: &Node, sign: bool, out: &mut Vec<(bool, Node)>) {
    match node {
        Node::Add(v) => v.iter().for_each(|c| additive_terms(c, sign, out)),
        Node::Sub(a, b) => {
            additive_terms(a, sign, out);
            additive_terms(b, !sign, out);
        }
        Node::Neg(a) => additive_terms(a, !sign, out),
        other => out.push((sign, other.clone())),
    }
}

/// Re-expand p(t) at t = x + k as a polynomial in x.
fn taylor_shift(p: &[DoubleDouble], k: f64) -> Vec<DoubleDouble> {
    let mut c = p.to_vec();
    let k = DoubleDouble::from_f64(k);
    if k.hi == 0.0 {
        return c;
    }
    let n = c.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            c[j] = c[j] + c[j + 1] * k;
        }
    }
    c
}

fn trim(mut p: Vec<DoubleDouble>) -> Vec<DoubleDouble> {
    while p.len() > 1 && p.last().is_some_and(|c| c.hi == 0.0) {
        p.pop();
    }
    p
}

/// Least-squares-free fit: solve the Vandermonde system through `d + 1` points.
/// Returns coefficients c_0..c_d.
fn vandermonde_dd(points: &[f64], values: &[DoubleDouble]) -> Vec<DoubleDouble> {
    let n = points.len();
    let scale = points[0];
    let mut a: Vec<Vec<DoubleDouble>> = points
        .iter()
        .map(|&x| {
            let t = DoubleDouble::from_f64(x / scale);
            (0..n).map(|j| t.powi(j as i32)).collect()
        })
        .collect();
    let mut b = values.to_vec();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let m = a[row][col] / a[col][col];
            for k in col..n {
                let t = a[col][k];
                a[row][k] = a[row][k] - m * t;
            }
            let t = b[col];
            b[row] = b[row] - m * t;
        }
    }
    let mut x = vec![DoubleDouble::ZERO; n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s = s - a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    // undo the t = x / scale substitution
    let inv = DoubleDouble::from_f64(scale).recip();
    let mut p = DoubleDouble::ONE;
    for c in x.iter_mut() {
        *c = *c * p;
        p = p * inv;
    }
    x
}

/// Fit `c_0 + c_1 x + ... + c_d x^d` to `f` through `x = base·2^i`, i = 0..=d.
pub fn fit_polynomial(f: &FunctionExpr, degree: usize, base: f64) -> Result<Vec<f64>, EvalError> {
    Ok(fit_dd(f, degree, base)?.iter().map(|c| c.to_f64()).collect())
}

fn fit_dd(f: &FunctionExpr, degree: usize, base: f64) -> Result<Vec<DoubleDouble>, EvalError> {
    let pts: Vec<f64> = (0..=degree).map(|i| base * 2f64.powi(i as i32)).collect();
    let vals = pts.iter().map(|&x| f.eval_dd(DoubleDouble::from_f64(x))).collect::<Result<Vec<_>, _>>()?;
    Ok(vandermonde_dd(&pts, &vals))
}

/// Split `f` into a degree-`degree` polynomial part and a remainder.
///
/// Uses the expression structure when the polynomial terms are syntactically
/// visible, and otherwise fits on two disjoint probe sets (10⁴·2^i and
/// 10⁵·2^i) and requires the two fits to agree.
pub fn split_polynomial(f: &FunctionExpr, degree: u32) -> Result<PolySplit, ClassifyError> {
    let d = degree as usize;
    let mut terms = Vec::new();
    additive_terms(f.root(), true, &mut terms);
    let mut poly = vec![DoubleDouble::ZERO];
    let mut rest: Vec<Node> = Vec::new();
    for (sign, t) in terms {
        match as_polynomial(&t) {
            Some(p) => {
                let p: Vec<_> = if sign { p } else { p.into_iter().map(|c| -c).collect() };
                let n = poly.len().max(p.len());
                poly = (0..n)
                    .map(|i| *poly.get(i).unwrap_or(&DoubleDouble::ZERO) + *p.get(i).unwrap_or(&DoubleDouble::ZERO))
                    .collect();
            }
            None => rest.push(if sign { t } else { Node::Neg(Box::new(t)) }),
        }
    }
    let poly = trim(taylor_shift(&trim(poly), f.shift()));
    let remainder_node = match rest.len() {
        0 => None,
        1 => rest.pop(),
        _ => Some(Node::Add(rest)),
    };
    let symbolic_degree = poly.len() - 1;
    if symbolic_degree > d {
        return Err(ClassifyError::Ambiguous(format!(
            "polynomial terms have degree {symbolic_degree} above the growth degree {d}"
        )));
    }
    let make = |poly: &[DoubleDouble], remainder: Remainder, symbolic: bool| {
        let mut coeffs_dd: Vec<DoubleDouble> = poly.iter().skip(1).copied().collect();
        coeffs_dd.resize(d, DoubleDouble::ZERO);
        PolySplit {
            coeffs: coeffs_dd.iter().map(|c| c.to_f64()).collect(),
            coeffs_dd,
            constant: poly[0],
            remainder,
            symbolic,
        }
    };
    let Some(rem) = remainder_node else {
        return Ok(make(&poly, Remainder::Zero, true));
    };
    let symbolic = make(&poly, Remainder::Symbolic(rem.clone()), true);
    let rem_fn = f.with_root(rem);
    let probe = ladder_values(|x| symbolic.remainder(f, x))?;
    let slopes = window_slopes(&probe);
    if probe.len() < 4 || remainder_constant(&probe) || *slopes.last().unwrap() < d as f64 - LOWER_ORDER_GAP {
        return Ok(symbolic);
    }
    // The remainder still grows like x^d: fit its polynomial part numerically.
    let fit_a = fit_dd(&rem_fn, d, 1.0e4)?;
    let fit_b = fit_dd(&rem_fn, d, 1.0e5)?;
    let check: Vec<f64> = (0..=d).flat_map(|i| [1.0e4 * 2f64.powi(i as i32), 1.0e5 * 2f64.powi(i as i32)]).collect();
    let mut drift = 0.0f64;
    for &x in &check {
        let xd = DoubleDouble::from_f64(x);
        let pa = horner_dd(&fit_a, xd);
        let pb = horner_dd(&fit_b, xd);
        drift = drift.max(((pa - pb) / pa).to_f64().abs());
    }
    if drift > FIT_DRIFT {
        return Err(ClassifyError::Ambiguous(format!(
            "fitted polynomial part drifts by {drift:.3e} between probe sets"
        )));
    }
    let n = poly.len().max(fit_a.len());
    let total: Vec<DoubleDouble> = (0..n)
        .map(|i| *poly.get(i).unwrap_or(&DoubleDouble::ZERO) + *fit_a.get(i).unwrap_or(&DoubleDouble::ZERO))
        .collect();
    Ok(make(&total, Remainder::Numeric, false))
}

fn remainder_constant(values: &[f64]) -> bool {
    let first = values[0];
    values.iter().all(|v| (v - first).abs() <= 1e-9 * first.abs().max(1.0))
}

struct Growth {
    c_real: f64,
}

fn probe_growth(f: &FunctionExpr) -> Result<Growth, ClassifyError> {
    let values = ladder_values(|x| f.eval(x, Precision::Double))?;
    if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| **v <= 0.0) {
        return Err(ClassifyError::GrowthViolation(format!("f({}) = {v} is not positive", growth_grid()[i])));
    }
    if values.len() < 4 {
        return Err(ClassifyError::GrowthViolation("f overflows on the probe ladder".into()));
    }
    let slopes = window_slopes(&values);
    let c_real = *slopes.last().unwrap();
    if !c_real.is_finite() || c_real > MAX_GROWTH {
        return Err(ClassifyError::GrowthViolation(format!("growth exponent {c_real} is unbounded")));
    }
    if !stabilized(&slopes) {
        return Err(ClassifyError::GrowthViolation(format!(
            "log-log slope does not stabilize: last slopes {:?}",
            &slopes[slopes.len() - 3..]
        )));
    }
    Ok(Growth { c_real })
}

fn analyze_remainder(f: &FunctionExpr, split: &PolySplit, d: u32, c_real: f64) -> Result<DegreeProfile, ClassifyError> {
    let values = ladder_values(|x| split.remainder(f, x))?;
    if split.remainder_is_constant() || values.len() < 4 || remainder_constant(&values) {
        return Ok(DegreeProfile {
            class: FunctionClass::I,
            d_f: d,
            c_f: 0.0,
            c_real,
            subpolynomial_remainder: true,
            poly_part: split.coeffs.clone(),
        });
    }
    let slopes = window_slopes(&values);
    let c_r = *slopes.last().unwrap();
    if c_r >= d as f64 - LOWER_ORDER_GAP {
        return Err(ClassifyError::Ambiguous(format!(
            "remainder grows like x^{c_r:.3}, not slower than the degree-{d} polynomial part"
        )));
    }
    let n = slopes.len();
    let decreasing = slopes[n - 3..].windows(2).all(|w| w[1] < w[0] - 1e-6);
    let subpoly = c_r <= 0.0 || (c_r <= SUBPOLY_SLOPE && decreasing);
    Ok(DegreeProfile {
        class: FunctionClass::III,
        d_f: d,
        c_f: if subpoly { c_r.max(0.0) } else { c_r },
        c_real,
        subpolynomial_remainder: subpoly,
        poly_part: split.coeffs.clone(),
    })
}

/// Classify `f`, or validate a declared profile against probes.
pub fn classify(f: &FunctionExpr, declared: Option<&DegreeProfile>) -> Result<DegreeProfile, ClassifyError> {
    let growth = probe_growth(f)?;
    let c_real = growth.c_real;
    if let Some(decl) = declared {
        return validate_declared(f, decl, c_real);
    }
    let d = c_real.round();
    if d >= 1.0 && (c_real - d).abs() < INTEGER_TOL {
        let split = split_polynomial(f, d as u32)?;
        return analyze_remainder(f, &split, d as u32, c_real);
    }
    Ok(DegreeProfile {
        class: FunctionClass::II,
        d_f: d.max(0.0) as u32,
        c_f: c_real,
        c_real,
        subpolynomial_remainder: false,
        poly_part: Vec::new(),
    })
}

fn validate_declared(f: &FunctionExpr, decl: &DegreeProfile, c_real: f64) -> Result<DegreeProfile, ClassifyError> {
    let mismatch = |m: String| Err(ClassifyError::DeclaredMismatch(m));
    match decl.class {
        FunctionClass::II => {
            if !decl.poly_part.is_empty() {
                return mismatch("class II has no polynomial part".into());
            }
            if (decl.c_f - c_real).abs() > DECLARED_TOL {
                return mismatch(format!("declared degree {} but probes give {c_real:.4}", decl.c_f));
            }
        }
        FunctionClass::I | FunctionClass::III => {
            if decl.poly_part.is_empty() || decl.poly_part.len() != decl.d_f as usize {
                return mismatch("classes I and III need α_1..α_d with d = d_f".into());
            }
            if (decl.d_f as f64 - c_real).abs() > DECLARED_TOL {
                return mismatch(format!("declared d_f = {} but probes give {c_real:.4}", decl.d_f));
            }
            if decl.class == FunctionClass::III && !(decl.c_f < decl.d_f as f64) {
                return mismatch("class III needs c_f < d_f".into());
            }
            // the declared polynomial part must leave a strictly slower remainder
            let alpha: Vec<DoubleDouble> = decl.poly_part.iter().map(|&a| DoubleDouble::from_f64(a)).collect();
            let rem = ladder_values(|x| {
                let xd = DoubleDouble::from_f64(x);
                Ok((f.eval_dd(xd)? - horner_dd(&alpha, xd) * xd).to_f64())
            })?;
            if !remainder_constant(&rem) {
                let c_r = *window_slopes(&rem).last().unwrap();
                if !(c_r < decl.d_f as f64 - LOWER_ORDER_GAP) {
                    return mismatch(format!("f minus the declared polynomial part still grows like x^{c_r:.3}"));
                }
                if decl.class == FunctionClass::III
                    && !decl.subpolynomial_remainder
                    && (c_r - decl.c_f).abs() > DECLARED_TOL
                {
                    return mismatch(format!("declared c_f = {} but the remainder grows like x^{c_r:.3}", decl.c_f));
                }
            }
        }
    }
    Ok(DegreeProfile { c_real, ..decl.clone() })
}

/// α_1..α_d for a class I or III function; the remainder must grow strictly slower than x^d.
pub fn polynomial_part(f: &FunctionExpr, profile: &DegreeProfile) -> Result<Vec<f64>, ClassifyError> {
    if profile.class == FunctionClass::II {
        return Err(ClassifyError::NoPolynomialPart);
    }
    let split = split_polynomial(f, profile.d_f)?;
    let checked = analyze_remainder(f, &split, profile.d_f, profile.c_real)?;
    Ok(checked.poly_part)
}

/// Whether f' > 0 at every probe of a doubling grid above `x0` and `f` is
/// strictly increasing along that grid.
pub fn monotone_probe(f: &FunctionExpr, x0: f64, points: usize) -> Result<bool, EvalError> {
    let mut prev = f64::NEG_INFINITY;
    for i in 0..points {
        let x = x0 * 2f64.powf(i as f64 / 2.0);
        let j = f.eval_jet(x, 1)?;
        if j.d(1) <= 0.0 || j.value() <= prev {
            return Ok(false);
        }
        prev = j.value();
    }
    Ok(true)
}
