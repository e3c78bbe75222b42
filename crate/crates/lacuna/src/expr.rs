//! Tiny expression language for scalar fields on the plane.
//!
//! Grammar (precedence low to high: `+ -`, `* /`, unary `-`, `^`):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | power
//! power  := atom ('^' ['-'] integer)?
//! atom   := number | 'x' | 'y' | 'z' | name '(' expr ')'
//!         | 'weier' '(' number ',' number ',' integer ',' expr ')'
//!         | '(' expr ')'
//! ```
//!
//! `x` and `y` are the point coordinates, `z = x + iy`. Exponents are
//! integer literals only, and bind tighter than unary minus, so `-2^2`
//! is -4. `weier(a, l, k, t)` is the truncated sum
//! `sum_{j=0..=k} l^(-a j) * cos(l^j * t)`; it declares Hoelder exponent
//! `a`, everything else declares 1.

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::geom::Point2;

#[derive(Debug, Error, PartialEq)]
#[error("parse error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Abs,
    Re,
    Im,
    Conj,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Abs => "abs",
            Func::Re => "re",
            Func::Im => "im",
            Func::Conj => "conj",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    X,
    Y,
    Z,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
    Weier {
        alpha: f64,
        lambda: f64,
        terms: u32,
        arg: Box<Expr>,
    },
}

impl Expr {
    /// Evaluates at a point; failures (division blow-up) surface as NaN so
    /// downstream finiteness checks reject the field with a location.
    pub fn eval(&self, p: Point2) -> Complex64 {
        match self {
            Expr::Num(v) => Complex64::new(*v, 0.0),
            Expr::X => Complex64::new(p.x, 0.0),
            Expr::Y => Complex64::new(p.y, 0.0),
            Expr::Z => Complex64::new(p.x, p.y),
            Expr::Neg(e) => -e.eval(p),
            Expr::Add(a, b) => a.eval(p) + b.eval(p),
            Expr::Sub(a, b) => a.eval(p) - b.eval(p),
            Expr::Mul(a, b) => a.eval(p) * b.eval(p),
            Expr::Div(a, b) => {
                let d = b.eval(p);
                if d.norm_sqr() < 1e-300 {
                    Complex64::new(f64::NAN, f64::NAN)
                } else {
                    a.eval(p) / d
                }
            }
            Expr::Pow(a, k) => a.eval(p).powi(*k),
            Expr::Call(f, e) => {
                let v = e.eval(p);
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                    Func::Abs => Complex64::new(v.norm(), 0.0),
                    Func::Re => Complex64::new(v.re, 0.0),
                    Func::Im => Complex64::new(v.im, 0.0),
                    Func::Conj => v.conj(),
                }
            }
            Expr::Weier {
                alpha,
                lambda,
                terms,
                arg,
            } => {
                let t = arg.eval(p);
                let w = lambda.powf(-alpha); // per-term amplitude decay
                let mut amp = 1.0;
                let mut freq = 1.0;
                let mut acc = Complex64::new(0.0, 0.0);
                for _ in 0..=*terms {
                    acc += (t * freq).cos() * amp;
                    amp *= w;
                    freq *= lambda;
                }
                acc
            }
        }
    }

    /// Hoelder exponent the expression declares: the smallest `alpha`
    /// among `weier` nodes, or 1 when none occur.
    pub fn declared_alpha(&self) -> f64 {
        match self {
            Expr::Num(_) | Expr::X | Expr::Y | Expr::Z => 1.0,
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Call(_, e) => e.declared_alpha(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.declared_alpha().min(b.declared_alpha())
            }
            Expr::Weier { alpha, arg, .. } => alpha.min(arg.declared_alpha()),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::X => write!(f, "x"),
            Expr::Y => write!(f, "y"),
            Expr::Z => write!(f, "z"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, k) => write!(f, "({a}^{k})"),
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
            Expr::Weier {
                alpha,
                lambda,
                terms,
                arg,
            } => write!(f, "weier({alpha}, {lambda}, {terms}, {arg})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num { value: f64, integral: bool },
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push((i, Tok::Plus));
                i += 1;
            }
            '-' => {
                out.push((i, Tok::Minus));
                i += 1;
            }
            '*' => {
                out.push((i, Tok::Star));
                i += 1;
            }
            '/' => {
                out.push((i, Tok::Slash));
                i += 1;
            }
            '^' => {
                out.push((i, Tok::Caret));
                i += 1;
            }
            '(' => {
                out.push((i, Tok::LParen));
                i += 1;
            }
            ')' => {
                out.push((i, Tok::RParen));
                i += 1;
            }
            ',' => {
                out.push((i, Tok::Comma));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                let mut integral = true;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    integral = false;
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        integral = false;
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let value: f64 = text.parse().map_err(|_| ParseError {
                    pos: start,
                    msg: format!("bad number literal '{text}'"),
                })?;
                out.push((start, Tok::Num { value, integral }));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push((start, Tok::Ident(src[start..i].to_string())));
            }
            _ => {
                return Err(ParseError {
                    pos: i,
                    msg: format!("unexpected character '{c}'"),
                })
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [(usize, Tok)],
    pos: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|(p, _)| *p)
            .unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn err(&self, msg: String) -> ParseError {
        ParseError {
            pos: self.here(),
            msg,
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        let neg = if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            true
        } else {
            false
        };
        let k = self.integer_literal("exponent")?;
        Ok(Expr::Pow(Box::new(base), if neg { -k } else { k }))
    }

    fn integer_literal(&mut self, what: &str) -> Result<i32, ParseError> {
        match self.bump() {
            Some(Tok::Num {
                value,
                integral: true,
            }) if value.abs() <= i32::MAX as f64 => Ok(value as i32),
            _ => {
                self.pos -= 1;
                Err(self.err(format!("{what} must be an integer literal")))
            }
        }
    }

    fn number_literal(&mut self, what: &str) -> Result<f64, ParseError> {
        let neg = if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            true
        } else {
            false
        };
        match self.bump() {
            Some(Tok::Num { value, .. }) => Ok(if neg { -value } else { value }),
            _ => {
                self.pos -= 1;
                Err(self.err(format!("{what} must be a number literal")))
            }
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let at = self.here();
        match self.bump() {
            Some(Tok::Num { value, .. }) => Ok(Expr::Num(value)),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(&Tok::RParen, "')'")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => match name.as_str() {
                "x" => Ok(Expr::X),
                "y" => Ok(Expr::Y),
                "z" => Ok(Expr::Z),
                "weier" => self.weier(at),
                _ => {
                    let f = match name.as_str() {
                        "sin" => Func::Sin,
                        "cos" => Func::Cos,
                        "exp" => Func::Exp,
                        "abs" => Func::Abs,
                        "re" => Func::Re,
                        "im" => Func::Im,
                        "conj" => Func::Conj,
                        _ => {
                            return Err(ParseError {
                                pos: at,
                                msg: format!("unknown identifier '{name}'"),
                            })
                        }
                    };
                    self.expect(&Tok::LParen, "'(' after function name")?;
                    let e = self.expr()?;
                    self.expect(&Tok::RParen, "')'")?;
                    Ok(Expr::Call(f, Box::new(e)))
                }
            },
            Some(t) => Err(ParseError {
                pos: at,
                msg: format!("unexpected token {t:?}"),
            }),
            None => Err(ParseError {
                pos: at,
                msg: "unexpected end of input".into(),
            }),
        }
    }

    fn weier(&mut self, at: usize) -> Result<Expr, ParseError> {
        self.expect(&Tok::LParen, "'(' after weier")?;
        let alpha = self.number_literal("weier exponent")?;
        self.expect(&Tok::Comma, "','")?;
        let lambda = self.number_literal("weier frequency ratio")?;
        self.expect(&Tok::Comma, "','")?;
        let terms = self.integer_literal("weier term count")?;
        self.expect(&Tok::Comma, "','")?;
        let arg = self.expr()?;
        self.expect(&Tok::RParen, "')'")?;
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(ParseError {
                pos: at,
                msg: format!("weier exponent {alpha} must be in (0, 1]"),
            });
        }
        if !(lambda > 1.0) {
            return Err(ParseError {
                pos: at,
                msg: format!("weier frequency ratio {lambda} must exceed 1"),
            });
        }
        if terms < 0 {
            return Err(ParseError {
                pos: at,
                msg: "weier term count must be nonnegative".into(),
            });
        }
        Ok(Expr::Weier {
            alpha,
            lambda,
            terms: terms as u32,
            arg: Box::new(arg),
        })
    }
}

/// Parses an expression; the whole input must be consumed.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        end: src.len(),
    };
    let e = p.expr()?;
    if p.pos != toks.len() {
        return Err(p.err("trailing input".into()));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn ev(src: &str, x: f64, y: f64) -> Complex64 {
        parse(src).unwrap().eval(Point2::new(x, y))
    }

    #[test]
    fn precedence_is_conventional() {
        assert_relative_eq!(ev("1+2*3", 0.0, 0.0).re, 7.0);
        assert_relative_eq!(ev("-2^2", 0.0, 0.0).re, -4.0);
        assert_relative_eq!(ev("2^-2", 0.0, 0.0).re, 0.25);
        assert_relative_eq!(ev("6/2/3", 0.0, 0.0).re, 1.0); // left associative
        assert_relative_eq!(ev("1-2-3", 0.0, 0.0).re, -4.0);
    }

    #[test]
    fn variables_and_complex_arithmetic() {
        let v = ev("z*z", 1.0, 2.0); // (1+2i)^2 = -3+4i
        assert_relative_eq!(v.re, -3.0, epsilon = 1e-12);
        assert_relative_eq!(v.im, 4.0, epsilon = 1e-12);
        assert_relative_eq!(ev("re(z)+im(z)", 1.5, 2.5).re, 4.0);
        assert_relative_eq!(ev("abs(z)", 3.0, 4.0).re, 5.0);
        let c = ev("conj(z)", 1.0, 2.0);
        assert_relative_eq!(c.im, -2.0);
        assert_relative_eq!(ev("x*y - y^2", 2.0, 3.0).re, -3.0);
    }

    #[test]
    fn weierstrass_truncation_matches_direct_sum() {
        let alpha = 0.7f64;
        let lambda = 2.0f64;
        let t = 0.3;
        let direct: f64 = (0..=5)
            .map(|k| lambda.powf(-alpha * k as f64) * (lambda.powi(k) * t).cos())
            .sum();
        assert_relative_eq!(
            ev("weier(0.7, 2, 5, x)", t, 0.0).re,
            direct,
            epsilon = 1e-12
        );
    }

    #[test]
    fn declared_alpha_takes_the_minimum() {
        assert_relative_eq!(parse("x*y + sin(x)").unwrap().declared_alpha(), 1.0);
        assert_relative_eq!(
            parse("weier(0.9, 2, 10, x)").unwrap().declared_alpha(),
            0.9
        );
        assert_relative_eq!(
            parse("weier(0.9, 2, 10, x) + weier(0.6, 3, 4, y)")
                .unwrap()
                .declared_alpha(),
            0.6
        );
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse("1 + * 2").unwrap_err();
        assert_eq!(e.pos, 4);
        let e = parse("x^y").unwrap_err();
        assert_eq!(e.pos, 2);
        let e = parse("x^2.5").unwrap_err();
        assert_eq!(e.pos, 2);
        let e = parse("sin 3").unwrap_err();
        assert_eq!(e.pos, 4);
        let e = parse("bogus(1)").unwrap_err();
        assert_eq!(e.pos, 0);
        let e = parse("weier(1.5, 2, 3, x)").unwrap_err();
        assert_eq!(e.pos, 0);
        assert!(parse("1 2").is_err());
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0u32..1000).prop_map(|n| Expr::Num(n as f64 / 8.0)),
            Just(Expr::X),
            Just(Expr::Y),
            Just(Expr::Z),
        ];
        leaf.prop_recursive(4, 24, 3, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Div(Box::new(a), Box::new(b))),
                inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
                (inner.clone(), -6i32..7)
                    .prop_map(|(a, k)| Expr::Pow(Box::new(a), k)),
                (inner.clone(), prop_oneof![
                    Just(Func::Sin), Just(Func::Cos), Just(Func::Exp),
                    Just(Func::Abs), Just(Func::Re), Just(Func::Im), Just(Func::Conj)
                ]).prop_map(|(a, f)| Expr::Call(f, Box::new(a))),
                (inner, 1u32..20, 2u32..5)
                    .prop_map(|(a, alpha10, lam)| Expr::Weier {
                        alpha: f64::from(alpha10).min(10.0) / 20.0,
                        lambda: f64::from(lam),
                        terms: 3,
                        arg: Box::new(a),
                    }),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(e in arb_expr()) {
            let printed = e.to_string();
            let back = parse(&printed).unwrap();
            prop_assert_eq!(back, e);
        }
    }
}
