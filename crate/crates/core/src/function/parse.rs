//! Prefix-notation parser for [`FunctionExpr`].
//!
//! ```text
//! function = expr [ ";" "shift" "=" number ] ;
//! expr     = "x" | number | "pi" | "e" | call ;
//! call     = name "(" expr { "," expr } ")" ;
//! name     = "add" | "sub" | "mul" | "div" | "neg" | "pow" | "sqrt"
//!          | "log" | "exp" | "li" | "lgamma" | "const" ;
//! ```
//!
//! The exponent of `pow` and the argument of `const` must be free of `x`;
//! they are folded to a double-double literal at parse time.

use crate::dd::DoubleDouble;

use super::eval::eval_node_dd;
use super::expr::{FunctionExpr, Literal, Node};
use super::ParseError;

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { position: self.pos, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected '{c}'"))
        }
    }

    fn ident(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest
            .char_indices()
            .find(|(_, c)| !(c.is_ascii_alphanumeric() || *c == '_'))
            .map(|(i, _)| i)
            .unwrap_or(rest.len());
        if len == 0 || !rest.starts_with(|c: char| c.is_ascii_alphabetic()) {
            return None;
        }
        self.pos += len;
        Some(&rest[..len])
    }

    fn number(&mut self) -> Result<(DoubleDouble, &'a str), ParseError> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let mut len = 0;
        let bytes = rest.as_bytes();
        while len < bytes.len() {
            let c = bytes[len] as char;
            let sign_ok = (c == '-' || c == '+') && (len == 0 || matches!(bytes[len - 1] as char, 'e' | 'E'));
            if c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || sign_ok {
                len += 1;
            } else {
                break;
            }
        }
        let text = &rest[..len];
        match DoubleDouble::parse_decimal(text) {
            Some(v) if len > 0 => {
                self.pos += len;
                Ok((v, text))
            }
            _ => self.err("expected a number"),
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        match self.peek() {
            None => self.err("unexpected end of input"),
            Some(c) if c.is_ascii_digit() || c == '.' || c == '-' || c == '+' => {
                let (v, text) = self.number()?;
                Ok(Node::Const(Literal::named(v, text)))
            }
            Some(_) => {
                let start = self.pos;
                let Some(name) = self.ident() else {
                    return self.err("expected an expression");
                };
                match name {
                    "x" => return Ok(Node::Var),
                    "pi" => return Ok(Node::Const(Literal::named(DoubleDouble::PI, "pi"))),
                    "e" => return Ok(Node::Const(Literal::named(DoubleDouble::E, "e"))),
                    _ => {}
                }
                self.expect('(')?;
                let mut args = vec![self.arg()?];
                while self.peek() == Some(',') {
                    self.pos += 1;
                    args.push(self.arg()?);
                }
                self.expect(')')?;
                self.build(name, args, start)
            }
        }
    }

    fn arg(&mut self) -> Result<(Node, usize, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        let n = self.expr()?;
        Ok((n, start, self.pos))
    }

    fn fold_constant(&self, node: &Node, span: (usize, usize), what: &str) -> Result<Literal, ParseError> {
        if node.contains_var() {
            return Err(ParseError { position: span.0, message: format!("{what} must not depend on x") });
        }
        let text = self.src[span.0..span.1].trim().to_string();
        match node {
            Node::Const(l) => Ok(l.clone()),
            _ => match eval_node_dd(node, DoubleDouble::ZERO) {
                Ok(v) if v.is_finite() => Ok(Literal { value: v, text }),
                _ => Err(ParseError { position: span.0, message: format!("{what} is not a finite constant") }),
            },
        }
    }

    fn build(&self, name: &str, args: Vec<(Node, usize, usize)>, start: usize) -> Result<Node, ParseError> {
        let got = args.len();
        let arity_err = |want: &str| ParseError {
            position: start,
            message: format!("{name} expects {want} argument(s), got {got}"),
        };
        let unary = |args: Vec<(Node, usize, usize)>| -> Result<Box<Node>, ParseError> {
            if args.len() != 1 {
                return Err(arity_err("1"));
            }
            Ok(Box::new(args.into_iter().next().unwrap().0))
        };
        let node = match name {
            "add" | "mul" => {
                if args.len() < 2 {
                    return Err(arity_err("at least 2"));
                }
                let v = args.into_iter().map(|a| a.0).collect();
                if name == "add" {
                    Node::Add(v)
                } else {
                    Node::Mul(v)
                }
            }
            "sub" | "div" => {
                if args.len() != 2 {
                    return Err(arity_err("2"));
                }
                let mut it = args.into_iter();
                let a = Box::new(it.next().unwrap().0);
                let b = Box::new(it.next().unwrap().0);
                if name == "sub" {
                    Node::Sub(a, b)
                } else {
                    Node::Div(a, b)
                }
            }
            "pow" => {
                if args.len() != 2 {
                    return Err(arity_err("2"));
                }
                let mut it = args.into_iter();
                let base = it.next().unwrap().0;
                let (e, s, t) = it.next().unwrap();
                let lit = self.fold_constant(&e, (s, t), "exponent")?;
                Node::Pow(Box::new(base), lit)
            }
            "sqrt" => Node::Pow(unary(args)?, Literal::named(DoubleDouble::from_f64(0.5), "0.5")),
            "neg" => Node::Neg(unary(args)?),
            "log" => Node::Log(unary(args)?),
            "exp" => Node::Exp(unary(args)?),
            "li" => Node::Li(unary(args)?),
            "lgamma" => Node::LogGamma(unary(args)?),
            "const" => {
                if args.len() != 1 {
                    return Err(arity_err("1"));
                }
                let (e, s, t) = args.into_iter().next().unwrap();
                Node::Const(self.fold_constant(&e, (s, t), "const argument")?)
            }
            other => return Err(ParseError { position: start, message: format!("unknown function '{other}'") }),
        };
        Ok(node)
    }
}

pub(crate) fn parse_function(text: &str) -> Result<FunctionExpr, ParseError> {
    let mut p = Parser { src: text, pos: 0 };
    let node = p.expr()?;
    let mut shift = None;
    if p.peek() == Some(';') {
        p.pos += 1;
        match p.ident() {
            Some("shift") => {}
            _ => return p.err("expected 'shift' attribute"),
        }
        p.expect('=')?;
        let (v, _) = p.number()?;
        shift = Some(v.to_f64());
    }
    if p.peek().is_some() {
        return p.err("trailing input");
    }
    let built = match shift {
        Some(k) => FunctionExpr::new(node, k),
        None => FunctionExpr::with_auto_shift(node),
    };
    built.map_err(|e| ParseError { position: 0, message: e.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_nested_expression() {
        let f = parse_function("add(mul(pi, pow(x, 3)), div(pow(x, sqrt(2)), log(log(x)))); shift=2").unwrap();
        assert_eq!(f.shift(), 2.0);
        let Node::Add(terms) = f.root() else { panic!() };
        assert_eq!(terms.len(), 2);
        let Node::Div(num, _) = &terms[1] else { panic!() };
        let Node::Pow(_, e) = num.as_ref() else { panic!() };
        assert!((e.as_f64() - 2f64.sqrt()).abs() < 1e-16);
        assert_eq!(e.text, "sqrt(2)");
    }

    #[test]
    fn display_roundtrips() {
        for text in [
            "add(pow(x, 2), log(x))",
            "div(pow(x, 2), log(x)); shift=1",
            "mul(const(3.14159), pow(x, 1.5))",
            "lgamma(x); shift=1",
            "sub(li(x), neg(x)); shift=2",
        ] {
            let f = parse_function(text).unwrap();
            let g = parse_function(&f.to_string()).unwrap();
            assert_eq!(f, g, "{text}");
        }
    }

    #[test]
    fn auto_shift_picks_smallest_valid() {
        // log(log(x)) needs x + k > 1 at x = 1, and division by it needs it non-zero.
        let f = parse_function("div(x, log(log(x)))").unwrap();
        assert_eq!(f.shift(), 1.0);
        let g = parse_function("pow(x, 2)").unwrap();
        assert_eq!(g.shift(), 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_function("pow(x, x)").is_err());
        assert!(parse_function("foo(x)").is_err());
        assert!(parse_function("add(x)").is_err());
        assert!(parse_function("log(x").is_err());
        assert!(parse_function("x y").is_err());
        let e = parse_function("log(neg(x))").unwrap_err();
        assert!(e.message.contains("shift"), "{e}");
    }
}
