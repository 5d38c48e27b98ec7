//! Taylor-mode differentiation through the expression tree.
//!
//! Internally every node carries its normalized Taylor coefficients
//! `c_j = f^(j)(x0) / j!`; [`Jet`] exposes the plain derivatives.

use serde::{Deserialize, Serialize};

use super::expr::{FunctionExpr, Node};
use super::special;
use super::EvalError;

/// Highest derivative order supported by [`FunctionExpr::eval_jet`].
pub const MAX_JET_ORDER: usize = 12;

/// `(f(x), f'(x), ..., f^(k)(x))` at a base point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jet {
    pub x: f64,
    pub order: usize,
    pub derivatives: Vec<f64>,
}

impl Jet {
    pub fn value(&self) -> f64 {
        self.derivatives[0]
    }

    /// f^(j)(x).
    pub fn d(&self, j: usize) -> f64 {
        self.derivatives[j]
    }

    /// f^(j)(x) / j!.
    pub fn taylor_coefficient(&self, j: usize) -> f64 {
        self.derivatives[j] / factorial(j)
    }

    /// Σ_{j<=order} f^(j)(x)/j! · h^j.
    pub fn taylor(&self, h: f64) -> f64 {
        (0..=self.order).rev().fold(0.0, |acc, j| acc * h + self.taylor_coefficient(j))
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |a, i| a * i as f64)
}

#[derive(Clone, Debug)]
struct Series(Vec<f64>);

impl Series {
    fn constant(c: f64, len: usize) -> Self {
        let mut v = vec![0.0; len];
        v[0] = c;
        Series(v)
    }

    fn len(&self) -> usize {
        self.0.len()
    }

    fn add(&self, o: &Series) -> Series {
        Series(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    fn sub(&self, o: &Series) -> Series {
        Series(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }

    fn neg(&self) -> Series {
        Series(self.0.iter().map(|a| -a).collect())
    }

    fn mul(&self, o: &Series) -> Series {
        let n = self.len();
        let mut out = vec![0.0; n];
        for k in 0..n {
            out[k] = (0..=k).map(|j| self.0[j] * o.0[k - j]).sum();
        }
        Series(out)
    }

    fn div(&self, o: &Series) -> Series {
        let n = self.len();
        let b0 = o.0[0];
        let mut out = vec![0.0; n];
        for k in 0..n {
            let s: f64 = (1..=k).map(|j| o.0[j] * out[k - j]).sum();
            out[k] = (self.0[k] - s) / b0;
        }
        Series(out)
    }

    fn exp(&self) -> Series {
        let n = self.len();
        let mut w = vec![0.0; n];
        w[0] = self.0[0].exp();
        for k in 1..n {
            let s: f64 = (1..=k).map(|j| j as f64 * self.0[j] * w[k - j]).sum();
            w[k] = s / k as f64;
        }
        Series(w)
    }

    fn ln(&self) -> Series {
        let n = self.len();
        let u0 = self.0[0];
        let mut w = vec![0.0; n];
        w[0] = u0.ln();
        for k in 1..n {
            let s: f64 = (1..k).map(|j| j as f64 * w[j] * self.0[k - j]).sum();
            w[k] = (self.0[k] - s / k as f64) / u0;
        }
        Series(w)
    }

    fn powi(&self, e: i32) -> Series {
        let n = self.len();
        if e < 0 {
            return Series::constant(1.0, n).div(&self.powi(-e));
        }
        let mut acc = Series::constant(1.0, n);
        let mut base = self.clone();
        let mut k = e as u32;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    fn powf(&self, p: f64) -> Series {
        let n = self.len();
        let u0 = self.0[0];
        let mut w = vec![0.0; n];
        w[0] = u0.powf(p);
        for k in 1..n {
            let s: f64 = (1..=k).map(|j| (p * j as f64 - (k - j) as f64) * self.0[j] * w[k - j]).sum();
            w[k] = s / (k as f64 * u0);
        }
        Series(w)
    }

    /// d/dt of the series, padded back to full length.
    fn derivative(&self) -> Series {
        let n = self.len();
        let mut out = vec![0.0; n];
        for k in 1..n {
            out[k - 1] = k as f64 * self.0[k];
        }
        Series(out)
    }

    /// Antiderivative with constant term `c0`.
    fn integrate(&self, c0: f64) -> Series {
        let n = self.len();
        let mut out = vec![0.0; n];
        out[0] = c0;
        for k in 1..n {
            out[k] = self.0[k - 1] / k as f64;
        }
        Series(out)
    }

    /// g(u(t)) from the derivatives g^(m)(u0), m = 0..len.
    fn compose(&self, g_derivs: &[f64]) -> Series {
        let n = self.len();
        let mut delta = self.clone();
        delta.0[0] = 0.0;
        let mut out = Series::constant(g_derivs[0], n);
        let mut power = Series::constant(1.0, n);
        for (m, gd) in g_derivs.iter().enumerate().take(n).skip(1) {
            power = power.mul(&delta);
            let c = gd / factorial(m);
            for k in 0..n {
                out.0[k] += c * power.0[k];
            }
        }
        out
    }
}

fn jet_node(node: &Node, x0: f64, len: usize) -> Result<Series, EvalError> {
    let dom = |op: &'static str, arg: f64| EvalError::Domain { op, arg };
    let s = match node {
        Node::Const(l) => Series::constant(l.as_f64(), len),
        Node::Var => {
            let mut v = Series::constant(x0, len);
            if len > 1 {
                v.0[1] = 1.0;
            }
            v
        }
        Node::Add(v) => {
            let mut acc = jet_node(&v[0], x0, len)?;
            for c in &v[1..] {
                acc = acc.add(&jet_node(c, x0, len)?);
            }
            acc
        }
        Node::Mul(v) => {
            let mut acc = jet_node(&v[0], x0, len)?;
            for c in &v[1..] {
                acc = acc.mul(&jet_node(c, x0, len)?);
            }
            acc
        }
        Node::Sub(a, b) => jet_node(a, x0, len)?.sub(&jet_node(b, x0, len)?),
        Node::Div(a, b) => {
            let d = jet_node(b, x0, len)?;
            if d.0[0] == 0.0 {
                return Err(dom("div", 0.0));
            }
            jet_node(a, x0, len)?.div(&d)
        }
        Node::Neg(a) => jet_node(a, x0, len)?.neg(),
        Node::Pow(a, e) => {
            let u = jet_node(a, x0, len)?;
            match e.as_small_int() {
                Some(n) => {
                    if u.0[0] == 0.0 && n < 0 {
                        return Err(dom("pow", 0.0));
                    }
                    u.powi(n)
                }
                None => {
                    if u.0[0] <= 0.0 {
                        return Err(dom("pow", u.0[0]));
                    }
                    u.powf(e.as_f64())
                }
            }
        }
        Node::Log(a) => {
            let u = jet_node(a, x0, len)?;
            if u.0[0] <= 0.0 {
                return Err(dom("log", u.0[0]));
            }
            u.ln()
        }
        Node::Exp(a) => jet_node(a, x0, len)?.exp(),
        Node::Li(a) => {
            // li(u)' = u' / log u
            let u = jet_node(a, x0, len)?;
            let u0 = u.0[0];
            if u0 <= 0.0 || u0 == 1.0 {
                return Err(dom("li", u0));
            }
            u.derivative().div(&u.ln()).integrate(special::li(u0))
        }
        Node::LogGamma(a) => {
            let u = jet_node(a, x0, len)?;
            let u0 = u.0[0];
            if u0 <= 0.0 {
                return Err(dom("lgamma", u0));
            }
            let mut g = vec![special::lgamma(u0)];
            for m in 1..len {
                g.push(special::polygamma(m as u32 - 1, u0));
            }
            u.compose(&g)
        }
    };
    if let Some(bad) = s.0.iter().find(|v| !v.is_finite()) {
        return Err(EvalError::NonFinite { op: super::eval::node_name(node), value: *bad });
    }
    Ok(s)
}

impl FunctionExpr {
    /// Derivatives `f^(0..=k)` of `x -> f(x + shift)` at `x`.
    pub fn eval_jet(&self, x: f64, k: usize) -> Result<Jet, EvalError> {
        if k > MAX_JET_ORDER {
            return Err(EvalError::OrderTooHigh { requested: k, max: MAX_JET_ORDER });
        }
        if !(x >= 1.0) {
            return Err(EvalError::BelowOne(x));
        }
        let s = jet_node(self.root(), x + self.shift(), k + 1)?;
        let derivatives = s.0.iter().enumerate().map(|(j, c)| c * factorial(j)).collect();
        Ok(Jet { x, order: k, derivatives })
    }
}
