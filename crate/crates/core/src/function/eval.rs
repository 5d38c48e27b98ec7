use crate::dd::DoubleDouble;

use super::expr::{FunctionExpr, Node};
use super::special;
use super::{EvalError, Precision};

fn domain(op: &'static str, arg: f64) -> EvalError {
    EvalError::Domain { op, arg }
}

fn finite(op: &'static str, v: f64) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite { op, value: v })
    }
}

pub(crate) fn eval_node_f64(node: &Node, x: f64) -> Result<f64, EvalError> {
    let v = match node {
        Node::Const(l) => l.as_f64(),
        Node::Var => x,
        Node::Add(v) => {
            let mut s = 0.0;
            for c in v {
                s += eval_node_f64(c, x)?;
            }
            s
        }
        Node::Mul(v) => {
            let mut p = 1.0;
            for c in v {
                p *= eval_node_f64(c, x)?;
            }
            p
        }
        Node::Sub(a, b) => eval_node_f64(a, x)? - eval_node_f64(b, x)?,
        Node::Div(a, b) => {
            let d = eval_node_f64(b, x)?;
            if d == 0.0 {
                return Err(domain("div", d));
            }
            eval_node_f64(a, x)? / d
        }
        Node::Neg(a) => -eval_node_f64(a, x)?,
        Node::Pow(a, e) => {
            let base = eval_node_f64(a, x)?;
            match e.as_small_int() {
                Some(n) => {
                    if base == 0.0 && n < 0 {
                        return Err(domain("pow", base));
                    }
                    base.powi(n)
                }
                None => {
                    if base < 0.0 || (base == 0.0 && e.as_f64() < 0.0) {
                        return Err(domain("pow", base));
                    }
                    base.powf(e.as_f64())
                }
            }
        }
        Node::Log(a) => {
            let u = eval_node_f64(a, x)?;
            if u <= 0.0 {
                return Err(domain("log", u));
            }
            u.ln()
        }
        Node::Exp(a) => eval_node_f64(a, x)?.exp(),
        Node::Li(a) => {
            let u = eval_node_f64(a, x)?;
            if u <= 0.0 || u == 1.0 {
                return Err(domain("li", u));
            }
            special::li(u)
        }
        Node::LogGamma(a) => {
            let u = eval_node_f64(a, x)?;
            if u <= 0.0 {
                return Err(domain("lgamma", u));
            }
            special::lgamma(u)
        }
    };
    finite(node_name(node), v)
}

pub(crate) fn eval_node_dd(node: &Node, x: DoubleDouble) -> Result<DoubleDouble, EvalError> {
    let v = match node {
        Node::Const(l) => l.value,
        Node::Var => x,
        Node::Add(v) => {
            let mut s = DoubleDouble::ZERO;
            for c in v {
                s = s + eval_node_dd(c, x)?;
            }
            s
        }
        Node::Mul(v) => {
            let mut p = DoubleDouble::ONE;
            for c in v {
                p = p * eval_node_dd(c, x)?;
            }
            p
        }
        Node::Sub(a, b) => eval_node_dd(a, x)? - eval_node_dd(b, x)?,
        Node::Div(a, b) => {
            let d = eval_node_dd(b, x)?;
            if d.hi == 0.0 {
                return Err(domain("div", 0.0));
            }
            eval_node_dd(a, x)? / d
        }
        Node::Neg(a) => -eval_node_dd(a, x)?,
        Node::Pow(a, e) => {
            let base = eval_node_dd(a, x)?;
            match e.as_small_int() {
                Some(n) => {
                    if base.hi == 0.0 && n < 0 {
                        return Err(domain("pow", 0.0));
                    }
                    base.powi(n)
                }
                None => {
                    if base.hi < 0.0 || (base.hi == 0.0 && e.as_f64() < 0.0) {
                        return Err(domain("pow", base.to_f64()));
                    }
                    if base.hi == 0.0 {
                        DoubleDouble::ZERO
                    } else {
                        let twice = e.value.mul_f64(2.0);
                        // Half-integer exponents go through sqrt so perfect powers stay exact.
                        if twice.lo == 0.0 && twice.hi.fract() == 0.0 && twice.hi.abs() <= 128.0 {
                            base.sqrt().powi(twice.hi as i32)
                        } else {
                            base.powf(e.value)
                        }
                    }
                }
            }
        }
        Node::Log(a) => {
            let u = eval_node_dd(a, x)?;
            if u.hi <= 0.0 {
                return Err(domain("log", u.to_f64()));
            }
            u.ln()
        }
        Node::Exp(a) => eval_node_dd(a, x)?.exp(),
        Node::Li(a) => {
            let u = eval_node_dd(a, x)?;
            if u.hi <= 0.0 || (u.hi == 1.0 && u.lo == 0.0) {
                return Err(domain("li", u.to_f64()));
            }
            special::li_dd(u)
        }
        Node::LogGamma(a) => {
            let u = eval_node_dd(a, x)?;
            if u.hi <= 0.0 {
                return Err(domain("lgamma", u.to_f64()));
            }
            special::lgamma_dd(u)
        }
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite { op: node_name(node), value: v.to_f64() })
    }
}

pub(crate) fn node_name(node: &Node) -> &'static str {
    match node {
        Node::Const(_) => "const",
        Node::Var => "x",
        Node::Add(_) => "add",
        Node::Sub(..) => "sub",
        Node::Mul(_) => "mul",
        Node::Div(..) => "div",
        Node::Neg(_) => "neg",
        Node::Pow(..) => "pow",
        Node::Log(_) => "log",
        Node::Exp(_) => "exp",
        Node::Li(_) => "li",
        Node::LogGamma(_) => "lgamma",
    }
}

impl FunctionExpr {
    /// `f(x + shift)` at the requested precision, rounded to `f64`.
    pub fn eval(&self, x: f64, precision: Precision) -> Result<f64, EvalError> {
        match precision {
            Precision::Double => self.eval_f64(x),
            Precision::Extended => self.eval_dd(DoubleDouble::from_f64(x)).map(DoubleDouble::to_f64),
        }
    }

    pub fn eval_f64(&self, x: f64) -> Result<f64, EvalError> {
        if !(x >= 1.0) {
            return Err(EvalError::BelowOne(x));
        }
        eval_node_f64(self.root(), x + self.shift())
    }

    /// Double-double evaluation; the shift is added exactly.
    pub fn eval_dd(&self, x: DoubleDouble) -> Result<DoubleDouble, EvalError> {
        if !(x.hi >= 1.0) {
            return Err(EvalError::BelowOne(x.to_f64()));
        }
        eval_node_dd(self.root(), x + DoubleDouble::from_f64(self.shift()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(text: &str) -> FunctionExpr {
        FunctionExpr::parse(text).unwrap()
    }

    #[test]
    fn square_at_three() {
        assert_eq!(f("pow(x, 2)").eval(3.0, Precision::Double).unwrap(), 9.0);
        assert_eq!(f("pow(x, 2)").eval(3.0, Precision::Extended).unwrap(), 9.0);
    }

    #[test]
    fn tree_matches_direct_formula() {
        // π x³ + x^√2 / log log x, shifted so log log > 0 on [1, ∞).
        let g = f("add(mul(pi, pow(x, 3)), div(pow(x, sqrt(2)), log(log(x)))); shift=2");
        let direct = |x: f64| {
            let t = x + 2.0;
            std::f64::consts::PI * t * t * t + t.powf(std::f64::consts::SQRT_2) / t.ln().ln()
        };
        for x in [100.0, 1.0, 37.5, 1e4] {
            let a = g.eval(x, Precision::Double).unwrap();
            let b = direct(x);
            assert!((a - b).abs() <= 1e-12 * b.abs(), "x = {x}");
            let e = g.eval(x, Precision::Extended).unwrap();
            assert!((e - b).abs() <= 1e-12 * b.abs(), "x = {x}");
        }
    }

    #[test]
    fn li_two() {
        let g = f("li(x)");
        assert_eq!(g.shift(), 1.0);
        let v = g.eval(1.0, Precision::Double).unwrap();
        assert!((v - 1.04516).abs() < 1e-5);
    }

    #[test]
    fn domain_errors_surface() {
        let g = FunctionExpr::unchecked(Node::log(Node::Sub(Box::new(Node::Var), Box::new(Node::constant(5.0)))), 0.0);
        assert!(matches!(g.eval(2.0, Precision::Double), Err(EvalError::Domain { op: "log", .. })));
        assert!(matches!(g.eval(2.0, Precision::Extended), Err(EvalError::Domain { op: "log", .. })));
        assert!(matches!(g.eval(0.5, Precision::Double), Err(EvalError::BelowOne(_))));
    }

    #[test]
    fn extended_floors_half_integer_powers_exactly() {
        let g = f("pow(x, 1.5)");
        for n in [4.0, 9.0, 16.0, 100.0, 10000.0] {
            let v = g.eval_dd(DoubleDouble::from_f64(n)).unwrap();
            assert_eq!(v.fract().to_f64(), 0.0, "n = {n}");
        }
    }
}
