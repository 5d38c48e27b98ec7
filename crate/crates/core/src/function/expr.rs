use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dd::DoubleDouble;

use super::{EvalError, Precision};

/// Points at which every expression must evaluate to a finite real.
pub const PROBE_POINTS: [f64; 5] = [1.0, 2.0, 10.0, 1.0e3, 1.0e6];

/// Largest shift tried by [`FunctionExpr::with_auto_shift`].
pub const MAX_AUTO_SHIFT: u32 = 64;

/// A real constant, kept in double-double together with its source spelling.
#[derive(Clone, Debug, PartialEq)]
pub struct Literal {
    pub value: DoubleDouble,
    pub text: String,
}

impl Literal {
    pub fn new(value: f64) -> Self {
        Self { value: DoubleDouble::from_f64(value), text: format_f64(value) }
    }

    pub fn named(value: DoubleDouble, text: &str) -> Self {
        Self { value, text: text.to_string() }
    }

    pub fn as_f64(&self) -> f64 {
        self.value.to_f64()
    }

    /// The exponent as a small integer, when it is one.
    pub fn as_small_int(&self) -> Option<i32> {
        let v = self.value;
        if v.lo == 0.0 && v.hi.fract() == 0.0 && v.hi.abs() <= 64.0 {
            Some(v.hi as i32)
        } else {
            None
        }
    }
}

pub(crate) fn format_f64(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:?}")
    }
}

/// One node of the expression tree.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Const(Literal),
    Var,
    Add(Vec<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Vec<Node>),
    Div(Box<Node>, Box<Node>),
    Neg(Box<Node>),
    /// Power with a real exponent.
    Pow(Box<Node>, Literal),
    Log(Box<Node>),
    Exp(Box<Node>),
    /// Logarithmic integral, principal value of the integral of 1/log t from 0.
    Li(Box<Node>),
    LogGamma(Box<Node>),
}

impl Node {
    pub fn constant(v: f64) -> Self {
        Node::Const(Literal::new(v))
    }

    pub fn pow(base: Node, exponent: f64) -> Self {
        Node::Pow(Box::new(base), Literal::new(exponent))
    }

    pub fn log(arg: Node) -> Self {
        Node::Log(Box::new(arg))
    }

    pub fn div(a: Node, b: Node) -> Self {
        Node::Div(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Node, b: Node) -> Self {
        Node::Mul(vec![a, b])
    }

    pub fn add(a: Node, b: Node) -> Self {
        Node::Add(vec![a, b])
    }

    /// `c * x^k` as an expression.
    pub fn monomial(c: f64, k: u32) -> Self {
        let xk = match k {
            0 => return Node::constant(c),
            1 => Node::Var,
            _ => Node::pow(Node::Var, k as f64),
        };
        if c == 1.0 {
            xk
        } else {
            Node::mul(Node::constant(c), xk)
        }
    }

    pub fn contains_var(&self) -> bool {
        match self {
            Node::Const(_) => false,
            Node::Var => true,
            Node::Add(v) | Node::Mul(v) => v.iter().any(Node::contains_var),
            Node::Sub(a, b) | Node::Div(a, b) => a.contains_var() || b.contains_var(),
            Node::Neg(a) | Node::Pow(a, _) | Node::Log(a) | Node::Exp(a) | Node::Li(a) | Node::LogGamma(a) => {
                a.contains_var()
            }
        }
    }

    pub(crate) fn check_well_formed(&self) -> Result<(), EvalError> {
        match self {
            Node::Const(l) => {
                if !l.value.is_finite() {
                    return Err(EvalError::Malformed(format!("non-finite constant {}", l.text)));
                }
            }
            Node::Var => {}
            Node::Add(v) | Node::Mul(v) => {
                if v.is_empty() {
                    return Err(EvalError::Malformed("n-ary node without operands".into()));
                }
                for c in v {
                    c.check_well_formed()?;
                }
            }
            Node::Sub(a, b) | Node::Div(a, b) => {
                a.check_well_formed()?;
                b.check_well_formed()?;
            }
            Node::Pow(a, e) => {
                if !e.value.is_finite() {
                    return Err(EvalError::Malformed(format!("non-finite exponent {}", e.text)));
                }
                a.check_well_formed()?;
            }
            Node::Neg(a) | Node::Log(a) | Node::Exp(a) | Node::Li(a) | Node::LogGamma(a) => a.check_well_formed()?,
        }
        Ok(())
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list(f: &mut fmt::Formatter<'_>, name: &str, items: &[&Node]) -> fmt::Result {
            write!(f, "{name}(")?;
            for (i, n) in items.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{n}")?;
            }
            write!(f, ")")
        }
        match self {
            Node::Const(l) => write!(f, "const({})", l.text),
            Node::Var => write!(f, "x"),
            Node::Add(v) => list(f, "add", &v.iter().collect::<Vec<_>>()),
            Node::Mul(v) => list(f, "mul", &v.iter().collect::<Vec<_>>()),
            Node::Sub(a, b) => list(f, "sub", &[a, b]),
            Node::Div(a, b) => list(f, "div", &[a, b]),
            Node::Neg(a) => list(f, "neg", &[a]),
            Node::Pow(a, e) => write!(f, "pow({a}, {})", e.text),
            Node::Log(a) => list(f, "log", &[a]),
            Node::Exp(a) => list(f, "exp", &[a]),
            Node::Li(a) => list(f, "li", &[a]),
            Node::LogGamma(a) => list(f, "lgamma", &[a]),
        }
    }
}

/// A function `x -> root(x + shift)`, defined for `x >= 1`.
///
/// Immutable once built; every operation on it is pure.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionExpr {
    root: Node,
    shift: f64,
}

impl FunctionExpr {
    /// Build with an explicit shift, validating the probe-point invariant.
    pub fn new(root: Node, shift: f64) -> Result<Self, EvalError> {
        if !(shift.is_finite() && shift >= 0.0) {
            return Err(EvalError::Malformed(format!("shift must be a non-negative real, got {shift}")));
        }
        root.check_well_formed()?;
        let f = Self { root, shift };
        f.check_probes()?;
        Ok(f)
    }

    /// Build with the smallest integer shift in `0..=64` that makes all probes valid.
    pub fn with_auto_shift(root: Node) -> Result<Self, EvalError> {
        root.check_well_formed()?;
        let mut last = None;
        for k in 0..=MAX_AUTO_SHIFT {
            let f = Self { root: root.clone(), shift: k as f64 };
            match f.check_probes() {
                Ok(()) => return Ok(f),
                Err(e) => last = Some(e),
            }
        }
        Err(EvalError::NoValidShift(Box::new(last.expect("at least one shift tried"))))
    }

    /// Parse the prefix text format; see `docs/grammar.md`.
    pub fn parse(text: &str) -> Result<Self, super::ParseError> {
        super::parse::parse_function(text)
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    fn check_probes(&self) -> Result<(), EvalError> {
        for &x in &PROBE_POINTS {
            self.eval(x, Precision::Double)?;
        }
        Ok(())
    }

    /// No probe check, for building expressions that fail it on purpose.
    #[cfg(test)]
    pub(crate) fn unchecked(root: Node, shift: f64) -> Self {
        Self { root, shift }
    }

    /// Same expression with a different root, keeping the shift. Probes are not re-checked.
    pub(crate) fn with_root(&self, root: Node) -> Self {
        Self { root, shift: self.shift }
    }
}

impl fmt::Display for FunctionExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.root)?;
        if self.shift != 0.0 {
            write!(f, "; shift={}", format_f64(self.shift))?;
        }
        Ok(())
    }
}

impl Serialize for FunctionExpr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for FunctionExpr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        FunctionExpr::parse(&text).map_err(serde::de::Error::custom)
    }
}
