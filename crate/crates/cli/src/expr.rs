//! Surface expressions `u = f(x, y)` and polynomial field components in `x, y, u`.
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := unary (("*" | "/") unary)*
//! unary  := "-" unary | factor
//! factor := base ("^" "-"? int)?
//! base   := number | "x" | "y" | "u" | "(" expr ")" | "sqrt(" expr ")"
//! ```

use std::fmt;

use affjet::algebra::{Poly, Rational, Scalar, TaylorMap, Var};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(Scalar),
    X,
    Y,
    U,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Sqrt(Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("cannot evaluate at ({x}, {y}): {msg}")]
    Eval { x: String, y: String, msg: String },
    #[error("not a polynomial: {0}")]
    NotPolynomial(String),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Sym(char),
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            out.push((start, Tok::Num(chars[start..i].iter().collect())));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push((start, Tok::Ident(chars[start..i].iter().collect())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(ExprError::Parse { pos: i, msg: format!("unexpected character '{c}'") });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Parse { pos: self.here(), msg: msg.into() })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ExprError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected '{c}'"))
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        let base = self.base()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let neg = self.eat('-');
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                let Ok(e) = n.parse::<i32>() else { return self.err("exponent must be an integer") };
                self.pos += 1;
                Ok(Expr::Pow(Box::new(base), if neg { -e } else { e }))
            }
            _ => self.err("expected integer exponent"),
        }
    }

    fn base(&mut self) -> Result<Expr, ExprError> {
        let Some(tok) = self.peek().cloned() else { return self.err("unexpected end of input") };
        self.pos += 1;
        match tok {
            Tok::Num(n) => match n.parse::<Scalar>() {
                Ok(v) if v.is_exact() => Ok(Expr::Num(v)),
                _ => {
                    self.pos -= 1;
                    self.err(format!("bad number '{n}'"))
                }
            },
            Tok::Ident(id) => match id.as_str() {
                "x" => Ok(Expr::X),
                "y" => Ok(Expr::Y),
                "u" => Ok(Expr::U),
                "sqrt" => {
                    self.expect('(')?;
                    let e = self.expr()?;
                    self.expect(')')?;
                    Ok(Expr::Sqrt(Box::new(e)))
                }
                _ => {
                    self.pos -= 1;
                    self.err(format!("unknown identifier '{id}'"))
                }
            },
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Sym(c) => {
                self.pos -= 1;
                self.err(format!("unexpected '{c}'"))
            }
        }
    }
}

pub fn parse_expr(src: &str) -> Result<Expr, ExprError> {
    let mut p = Parser { toks: tokenize(src)?, pos: 0, end: src.len() };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}

/// Parses a surface `u = f(x, y)`; `u` itself is rejected.
pub fn parse_surface(src: &str) -> Result<Expr, ExprError> {
    let e = parse_expr(src)?;
    if e.uses_u() {
        return Err(ExprError::Parse { pos: src.find('u').unwrap_or(0), msg: "a surface may not use 'u'".into() });
    }
    Ok(e)
}

impl Expr {
    fn uses_u(&self) -> bool {
        match self {
            Expr::U => true,
            Expr::Num(_) | Expr::X | Expr::Y => false,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Sqrt(a) => a.uses_u(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => a.uses_u() || b.uses_u(),
        }
    }

    /// Truncated Taylor expansion of order `k` at `(x0, y0)`.
    pub fn taylor(&self, x0: &Scalar, y0: &Scalar, k: usize) -> Result<TaylorMap, ExprError> {
        let fail = |msg: String| ExprError::Eval { x: x0.to_string(), y: y0.to_string(), msg };
        let rec = |e: &Expr| e.taylor(x0, y0, k);
        Ok(match self {
            Expr::Num(v) => TaylorMap::constant(x0.clone(), y0.clone(), k, v.clone()),
            Expr::X => TaylorMap::var_x(x0.clone(), y0.clone(), k),
            Expr::Y => TaylorMap::var_y(x0.clone(), y0.clone(), k),
            Expr::U => return Err(fail("'u' has no value on a surface".into())),
            Expr::Neg(a) => -&rec(a)?,
            Expr::Add(a, b) => &rec(a)? + &rec(b)?,
            Expr::Sub(a, b) => &rec(a)? - &rec(b)?,
            Expr::Mul(a, b) => &rec(a)? * &rec(b)?,
            Expr::Div(a, b) => {
                let d = rec(b)?.reciprocal().map_err(|_| fail("division by zero (pole)".into()))?;
                &rec(a)? * &d
            }
            Expr::Pow(a, n) => {
                let base = rec(a)?;
                let base = if *n < 0 { base.reciprocal().map_err(|_| fail("negative power of zero".into()))? } else { base };
                let mut acc = TaylorMap::constant(x0.clone(), y0.clone(), k, Scalar::one());
                for _ in 0..n.unsigned_abs() {
                    acc = &acc * &base;
                }
                acc
            }
            Expr::Sqrt(a) => {
                let v = rec(a)?;
                if v.value().signum() <= 0 {
                    return Err(fail(format!("sqrt of non-positive value {}", v.value())));
                }
                v.sqrt_or_float().map_err(|e| fail(e.to_string()))?
            }
        })
    }

    /// Exact polynomial in `x, y, u`; division is allowed only by nonzero constants.
    pub fn to_poly(&self) -> Result<Poly, ExprError> {
        let np = || ExprError::NotPolynomial(self.to_string());
        Ok(match self {
            Expr::Num(v) => Poly::constant(v.as_rational().cloned().ok_or_else(np)?),
            Expr::X => Poly::var(Var::X),
            Expr::Y => Poly::var(Var::Y),
            Expr::U => Poly::var(Var::U),
            Expr::Neg(a) => -a.to_poly()?,
            Expr::Add(a, b) => a.to_poly()? + b.to_poly()?,
            Expr::Sub(a, b) => a.to_poly()? - b.to_poly()?,
            Expr::Mul(a, b) => a.to_poly()? * b.to_poly()?,
            Expr::Div(a, b) => {
                let d = b.to_poly()?;
                if !d.is_constant() || d.is_zero() {
                    return Err(np());
                }
                let c: Rational = d.constant_term();
                a.to_poly()?.scale(&(Rational::from_integer(1.into()) / c))
            }
            Expr::Pow(a, n) if *n >= 0 => a.to_poly()?.pow(*n as u32),
            Expr::Pow(..) | Expr::Sqrt(_) => return Err(np()),
        })
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::X => f.write_str("x"),
            Expr::Y => f.write_str("y"),
            Expr::U => f.write_str("u"),
            Expr::Neg(a) => write!(f, "-({a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "{a}*{b}"),
            Expr::Div(a, b) => write!(f, "({a})/({b})"),
            Expr::Pow(a, n) => write!(f, "({a})^{n}"),
            Expr::Sqrt(a) => write!(f, "sqrt({a})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use affjet::jetspace::jet_of_surface;

    fn s(n: i64) -> Scalar {
        Scalar::int(n)
    }

    #[test]
    fn precedence_and_associativity() {
        let e = parse_expr("1 - 2 - 3").unwrap();
        assert_eq!(e.taylor(&s(0), &s(0), 0).unwrap().value(), &s(-4));
        let e = parse_expr("2*3^2").unwrap();
        assert_eq!(e.taylor(&s(0), &s(0), 0).unwrap().value(), &s(18));
        let e = parse_expr("-x^2").unwrap();
        assert_eq!(e.taylor(&s(3), &s(0), 0).unwrap().value(), &s(-9));
        let e = parse_expr("8/4/2").unwrap();
        assert_eq!(e.taylor(&s(0), &s(0), 0).unwrap().value(), &s(1));
        let e = parse_expr("x^-2").unwrap();
        assert_eq!(e.taylor(&s(2), &s(0), 0).unwrap().value(), &Scalar::ratio(1, 4));
        let e = parse_expr("1.5 + 1/3").unwrap();
        assert_eq!(e.taylor(&s(0), &s(0), 0).unwrap().value(), &Scalar::ratio(11, 6));
    }

    #[test]
    fn paraboloid_jet() {
        let e = parse_surface("(x^2+y^2)/2").unwrap();
        let j = jet_of_surface(&e.taylor(&s(0), &s(0), 3).unwrap(), 3).unwrap();
        assert_eq!(j, affjet::JetPoint::fiducial(3, 1));
    }

    #[test]
    fn sphere_jet() {
        let e = parse_surface("sqrt(1 - x^2 - y^2)").unwrap();
        let j = jet_of_surface(&e.taylor(&s(0), &s(0), 3).unwrap(), 3).unwrap();
        assert_eq!(j.u, s(1));
        assert_eq!(j.hessian(), [s(-1), s(0), s(-1)]);
        assert!(j.third().iter().all(Scalar::is_zero));
    }

    #[test]
    fn parse_errors_carry_positions() {
        assert!(matches!(parse_surface("x y"), Err(ExprError::Parse { pos: 2, .. })));
        assert!(matches!(parse_surface("(x + 1"), Err(ExprError::Parse { pos: 6, .. })));
        assert!(matches!(parse_surface("x ^ y"), Err(ExprError::Parse { pos: 4, .. })));
        assert!(matches!(parse_surface("z"), Err(ExprError::Parse { pos: 0, .. })));
        assert!(matches!(parse_surface("x + u"), Err(ExprError::Parse { .. })));
        assert!(matches!(parse_surface("2 $ 3"), Err(ExprError::Parse { pos: 2, .. })));
    }

    #[test]
    fn evaluation_errors() {
        let pole = parse_surface("1/(x - 1)").unwrap();
        assert!(matches!(pole.taylor(&s(1), &s(0), 2), Err(ExprError::Eval { .. })));
        let neg = parse_surface("sqrt(x)").unwrap();
        assert!(matches!(neg.taylor(&s(-1), &s(0), 2), Err(ExprError::Eval { .. })));
    }

    #[test]
    fn polynomials() {
        let p = parse_expr("x*u - y/2 + 3").unwrap().to_poly().unwrap();
        let expect = &(&(Poly::var(Var::X) * Poly::var(Var::U)) - &Poly::var(Var::Y).scale(&affjet::algebra::rat(1, 2))) + &Poly::int(3);
        assert_eq!(p, expect);
        assert!(parse_expr("1/x").unwrap().to_poly().is_err());
        assert!(parse_expr("sqrt(u)").unwrap().to_poly().is_err());
    }
}
