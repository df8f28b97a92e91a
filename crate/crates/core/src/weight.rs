//! Radial weight expressions.
//!
//! A weight is a function of the radius `r` written in a small expression
//! language:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | atom
//! atom   := number | 'r' | '(' expr ')'
//!         | 'pow' '(' expr ',' ['-'] number ')'
//!         | 'log' '(' expr ')' | 'exp' '(' expr ')'
//! ```
//!
//! Literals are always non-negative; a leading minus is a [`WeightExpr::Neg`]
//! node. The exponent of `pow` is a plain (optionally signed) number.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("`{function}` takes {expected} argument(s), found {found} (byte {offset})")]
    Arity {
        function: String,
        expected: usize,
        found: usize,
        offset: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeightError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("r = {r} is outside the domain ({lo}, {hi}]")]
    OutOfDomain { r: f64, lo: f64, hi: f64 },
    #[error("log of non-positive value {value} at r = {r}")]
    LogDomain { r: f64, value: f64 },
    #[error("division by zero at r = {r}")]
    DivisionByZero { r: f64 },
    #[error("non-finite value at r = {r}")]
    NonFinite { r: f64 },
    #[error("weight `{expr}` is not positive at r = {r} (value {value})")]
    NotPositive { expr: String, r: f64, value: f64 },
    #[error("invalid domain ({lo}, {hi}]")]
    InvalidDomain { lo: f64, hi: f64 },
    #[error("declared decay {declared} disagrees with probed log-slope {probed} at s = {s}")]
    DecayMismatch { declared: f64, probed: f64, s: f64 },
}

/// Expression tree of a radial weight.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightExpr {
    /// Non-negative finite literal.
    Const(f64),
    Var,
    Neg(Box<WeightExpr>),
    Add(Box<WeightExpr>, Box<WeightExpr>),
    Sub(Box<WeightExpr>, Box<WeightExpr>),
    Mul(Box<WeightExpr>, Box<WeightExpr>),
    Div(Box<WeightExpr>, Box<WeightExpr>),
    Pow(Box<WeightExpr>, f64),
    Log(Box<WeightExpr>),
    Exp(Box<WeightExpr>),
}

impl WeightExpr {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        parse_weight(text)
    }

    /// Evaluates the expression at `r` without domain or sign checks.
    pub fn eval(&self, r: f64) -> Result<f64, WeightError> {
        use WeightExpr::*;
        let value = match self {
            Const(c) => *c,
            Var => r,
            Neg(e) => -e.eval(r)?,
            Add(a, b) => a.eval(r)? + b.eval(r)?,
            Sub(a, b) => a.eval(r)? - b.eval(r)?,
            Mul(a, b) => a.eval(r)? * b.eval(r)?,
            Div(a, b) => {
                let num = a.eval(r)?;
                let den = b.eval(r)?;
                if den == 0.0 {
                    return Err(WeightError::DivisionByZero { r });
                }
                num / den
            }
            Pow(base, exponent) => {
                let b = base.eval(r)?;
                if b == 0.0 && *exponent < 0.0 {
                    return Err(WeightError::DivisionByZero { r });
                }
                b.powf(*exponent)
            }
            Log(e) => {
                let v = e.eval(r)?;
                if v <= 0.0 {
                    return Err(WeightError::LogDomain { r, value: v });
                }
                v.ln()
            }
            Exp(e) => e.eval(r)?.exp(),
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(WeightError::NonFinite { r })
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            WeightExpr::Add(..) | WeightExpr::Sub(..) => 1,
            WeightExpr::Mul(..) | WeightExpr::Div(..) => 2,
            WeightExpr::Neg(..) => 3,
            _ => 4,
        }
    }
}

pub(crate) fn format_number(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:?}")
    }
}

impl fmt::Display for WeightExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use WeightExpr::*;
        let child = |f: &mut fmt::Formatter<'_>, e: &WeightExpr, min_prec: u8| {
            if e.precedence() < min_prec {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            Const(c) => write!(f, "{}", format_number(*c)),
            Var => write!(f, "r"),
            Neg(e) => {
                write!(f, "-")?;
                child(f, e, 3)
            }
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => {
                let prec = self.precedence();
                let op = match self {
                    Add(..) => " + ",
                    Sub(..) => " - ",
                    Mul(..) => " * ",
                    _ => " / ",
                };
                child(f, a, prec)?;
                write!(f, "{op}")?;
                // right operand of a left-associative operator needs
                // parentheses at equal precedence
                child(f, b, prec + 1)
            }
            Pow(base, e) => write!(f, "pow({base}, {})", format_number(*e)),
            Log(e) => write!(f, "log({e})"),
            Exp(e) => write!(f, "exp({e})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Token {
    Num(f64),
    Ident(usize, usize),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    Comma,
    End,
}

struct Parser<'a> {
    text: &'a str,
    tokens: Vec<(Token, usize)>,
    pos: usize,
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Token::Plus,
            b'-' => Token::Minus,
            b'*' => Token::Star,
            b'/' => Token::Slash,
            b'(' => Token::LParen,
            b')' => Token::RParen,
            b',' => Token::Comma,
            b'0'..=b'9' | b'.' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_digit() || bytes[j] == b'.') {
                    j += 1;
                }
                if j < bytes.len() && (bytes[j] == b'e' || bytes[j] == b'E') {
                    let mut k = j + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    if k < bytes.len() && bytes[k].is_ascii_digit() {
                        while k < bytes.len() && bytes[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let lit = &text[i..j];
                let value: f64 = lit.parse().map_err(|_| ParseError::Syntax {
                    offset: start,
                    message: format!("malformed number `{lit}`"),
                })?;
                if !value.is_finite() {
                    return Err(ParseError::Syntax {
                        offset: start,
                        message: format!("number `{lit}` is not finite"),
                    });
                }
                i = j;
                out.push((Token::Num(value), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                i = j;
                out.push((Token::Ident(start, j), start));
                continue;
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax {
                    offset: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Token::End, text.len()));
    Ok(out)
}

impl<'a> Parser<'a> {
    fn peek(&self) -> (Token, usize) {
        self.tokens[self.pos]
    }

    fn bump(&mut self) -> (Token, usize) {
        let t = self.tokens[self.pos];
        if !matches!(t.0, Token::End) {
            self.pos += 1;
        }
        t
    }

    fn syntax<T>(&self, offset: usize, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            offset,
            message: message.into(),
        })
    }

    fn expect(&mut self, want: Token, what: &str) -> Result<usize, ParseError> {
        let (tok, off) = self.bump();
        if tok == want {
            Ok(off)
        } else {
            self.syntax(off, format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> Result<WeightExpr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek().0 {
                Token::Plus => {
                    self.bump();
                    lhs = WeightExpr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Token::Minus => {
                    self.bump();
                    lhs = WeightExpr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<WeightExpr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek().0 {
                Token::Star => {
                    self.bump();
                    lhs = WeightExpr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Token::Slash => {
                    self.bump();
                    lhs = WeightExpr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<WeightExpr, ParseError> {
        if matches!(self.peek().0, Token::Minus) {
            self.bump();
            return Ok(WeightExpr::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    /// Counts top-level arguments of a call whose `(` was just consumed,
    /// without consuming anything. Used for arity diagnostics.
    fn count_args(&self) -> usize {
        let mut depth = 0usize;
        let mut args = 1usize;
        let mut empty = true;
        for (tok, _) in &self.tokens[self.pos..] {
            match tok {
                Token::LParen => depth += 1,
                Token::RParen if depth == 0 => break,
                Token::RParen => depth -= 1,
                Token::Comma if depth == 0 => args += 1,
                Token::End => break,
                _ => {}
            }
            empty = false;
        }
        if empty {
            0
        } else {
            args
        }
    }

    fn atom(&mut self) -> Result<WeightExpr, ParseError> {
        let (tok, off) = self.bump();
        match tok {
            Token::Num(v) => Ok(WeightExpr::Const(v)),
            Token::LParen => {
                let e = self.expr()?;
                self.expect(Token::RParen, "`)`")?;
                Ok(e)
            }
            Token::Ident(s, e) => {
                let name = &self.text[s..e];
                match name {
                    "r" => Ok(WeightExpr::Var),
                    "pow" | "log" | "exp" => {
                        self.expect(Token::LParen, &format!("`(` after `{name}`"))?;
                        let expected = if name == "pow" { 2 } else { 1 };
                        let found = self.count_args();
                        if found != expected {
                            return Err(ParseError::Arity {
                                function: name.to_string(),
                                expected,
                                found,
                                offset: off,
                            });
                        }
                        let arg = self.expr()?;
                        let node = if name == "pow" {
                            self.expect(Token::Comma, "`,`")?;
                            let negative = if matches!(self.peek().0, Token::Minus) {
                                self.bump();
                                true
                            } else {
                                false
                            };
                            let (t, o) = self.bump();
                            let Token::Num(v) = t else {
                                return self.syntax(o, "pow exponent must be a number");
                            };
                            WeightExpr::Pow(Box::new(arg), if negative { -v } else { v })
                        } else if name == "log" {
                            WeightExpr::Log(Box::new(arg))
                        } else {
                            WeightExpr::Exp(Box::new(arg))
                        };
                        self.expect(Token::RParen, "`)`")?;
                        Ok(node)
                    }
                    _ => Err(ParseError::UnknownIdentifier {
                        name: name.to_string(),
                        offset: off,
                    }),
                }
            }
            Token::End => self.syntax(off, "unexpected end of input"),
            _ => self.syntax(off, "expected a number, `r`, a function or `(`"),
        }
    }
}

/// Parses a weight expression.
pub fn parse_weight(text: &str) -> Result<WeightExpr, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError::Syntax {
            offset: 0,
            message: "empty expression".into(),
        });
    }
    let tokens = tokenize(text)?;
    let mut p = Parser {
        text,
        tokens,
        pos: 0,
    };
    let e = p.expr()?;
    let (tok, off) = p.peek();
    if tok != Token::End {
        return p.syntax(off, "unexpected trailing input");
    }
    Ok(e)
}

/// Large-`s` behaviour of a weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Decay {
    /// Exponent supplied by the user; tail bounds built on it are certified.
    Declared { exponent: f64 },
    /// Exponent fitted on a geometric grid. `log_power` is set when the best
    /// fit needed a `(log s)^b` correction.
    Probed {
        exponent: f64,
        log_power: Option<f64>,
    },
    /// The tail is not power-like.
    Unknown,
}

impl Decay {
    pub fn exponent(&self) -> Option<f64> {
        match self {
            Decay::Declared { exponent } | Decay::Probed { exponent, .. } => Some(*exponent),
            Decay::Unknown => None,
        }
    }

    pub fn is_declared(&self) -> bool {
        matches!(self, Decay::Declared { .. })
    }

    /// Decay of `s^k * f(s)`.
    pub fn shifted(&self, k: f64) -> Decay {
        match *self {
            Decay::Declared { exponent } => Decay::Declared {
                exponent: exponent + k,
            },
            Decay::Probed {
                exponent,
                log_power,
            } => Decay::Probed {
                exponent: exponent + k,
                log_power,
            },
            Decay::Unknown => Decay::Unknown,
        }
    }
}

const PURE_POWER_RESIDUAL: f64 = 1e-8;
const LOG_POWER_RESIDUAL: f64 = 1e-6;

/// Least-squares fit of `log f` against `log s` (and optionally
/// `log log s`) on 41 geometric nodes in `[1e2, 1e6] * scale`.
pub fn probe_decay(f: impl Fn(f64) -> f64, scale: f64) -> Decay {
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let n = 41;
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for i in 0..n {
        let s = scale * 10f64.powf(2.0 + 4.0 * i as f64 / (n - 1) as f64);
        let v = f(s);
        if !(v.is_finite() && v > 0.0) {
            return Decay::Unknown;
        }
        xs.push(s.ln());
        ys.push(v.ln());
    }
    let (slope, _, resid) = fit_line(&xs, &ys);
    let y_scale = 1.0 + ys.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    if resid <= PURE_POWER_RESIDUAL * y_scale {
        return Decay::Probed {
            exponent: slope,
            log_power: None,
        };
    }
    let zs: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    if let Some((a, b, resid2)) = fit_two(&xs, &zs, &ys) {
        if resid2 <= LOG_POWER_RESIDUAL * y_scale {
            return Decay::Probed {
                exponent: a,
                log_power: Some(b),
            };
        }
    }
    Decay::Unknown
}

fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let resid = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - icpt).abs())
        .fold(0.0, f64::max);
    (slope, icpt, resid)
}

/// Fits `y = a x + b z + c`; returns `(a, b, max residual)`.
fn fit_two(xs: &[f64], zs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let mz = zs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut szz, mut sxz, mut sxy, mut szy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..xs.len() {
        let (x, z, y) = (xs[i] - mx, zs[i] - mz, ys[i] - my);
        sxx += x * x;
        szz += z * z;
        sxz += x * z;
        sxy += x * y;
        szy += z * y;
    }
    let det = sxx * szz - sxz * sxz;
    if det.abs() <= 1e-12 * sxx * szz {
        return None;
    }
    let a = (sxy * szz - szy * sxz) / det;
    let b = (szy * sxx - sxy * sxz) / det;
    let c = my - a * mx - b * mz;
    let resid = (0..xs.len())
        .map(|i| (ys[i] - a * xs[i] - b * zs[i] - c).abs())
        .fold(0.0, f64::max);
    Some((a, b, resid))
}

/// A radial weight: expression, evaluation domain and tail metadata.
#[derive(Debug, Clone)]
pub struct WeightFn {
    source: String,
    expr: WeightExpr,
    r_min: f64,
    r_max: f64,
    declared_decay: Option<f64>,
}

impl WeightFn {
    /// Weight on `(0, inf)` with no declared decay.
    pub fn parse(text: &str) -> Result<Self, WeightError> {
        Self::new(text, 0.0, f64::INFINITY, None)
    }

    /// Builds a weight on the domain `(r_min, r_max]`. A declared decay is
    /// sanity-checked against log-slopes at `{1e3, 1e4, 1e5} * max(r_min, 1)`.
    pub fn new(
        text: &str,
        r_min: f64,
        r_max: f64,
        decay: Option<f64>,
    ) -> Result<Self, WeightError> {
        if !(r_min >= 0.0 && r_max > r_min) || r_min.is_nan() {
            return Err(WeightError::InvalidDomain {
                lo: r_min,
                hi: r_max,
            });
        }
        let expr = parse_weight(text)?;
        let w = WeightFn {
            source: text.to_string(),
            expr,
            r_min,
            r_max,
            declared_decay: decay,
        };
        if let Some(a) = decay {
            if r_max.is_finite() {
                return Err(WeightError::InvalidDomain {
                    lo: r_min,
                    hi: r_max,
                });
            }
            let base = r_min.max(1.0);
            for k in 3..=5 {
                let s = base * 10f64.powi(k);
                let lo = w.expr.eval(s)?;
                let hi = w.expr.eval(10.0 * s)?;
                if !(lo > 0.0 && hi > 0.0) {
                    return Err(WeightError::NotPositive {
                        expr: w.source.clone(),
                        r: s,
                        value: lo.min(hi),
                    });
                }
                let slope = (hi.ln() - lo.ln()) / std::f64::consts::LN_10;
                if (slope - a).abs() > 0.1 {
                    return Err(WeightError::DecayMismatch {
                        declared: a,
                        probed: slope,
                        s,
                    });
                }
            }
        }
        Ok(w)
    }

    /// Returns a copy whose expression is multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let expr = WeightExpr::Mul(Box::new(WeightExpr::Const(c)), Box::new(self.expr.clone()));
        WeightFn {
            source: expr.to_string(),
            expr,
            ..self.clone()
        }
    }

    pub fn expr(&self) -> &WeightExpr {
        &self.expr
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.r_min, self.r_max)
    }

    pub fn declared_decay(&self) -> Option<f64> {
        self.declared_decay
    }

    fn check_domain(&self, r: f64) -> Result<(), WeightError> {
        if r > self.r_min && r <= self.r_max {
            Ok(())
        } else {
            Err(WeightError::OutOfDomain {
                r,
                lo: self.r_min,
                hi: self.r_max,
            })
        }
    }

    /// Strictly positive value at `r`.
    pub fn eval(&self, r: f64) -> Result<f64, WeightError> {
        let v = self.eval_raw(r)?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(WeightError::NotPositive {
                expr: self.source.clone(),
                r,
                value: v,
            })
        }
    }

    /// Finite value at `r`, any sign.
    pub fn eval_raw(&self, r: f64) -> Result<f64, WeightError> {
        self.check_domain(r)?;
        self.expr.eval(r)
    }

    /// Declared exponent if present, otherwise a probe fit.
    pub fn decay(&self) -> Decay {
        if let Some(exponent) = self.declared_decay {
            return Decay::Declared { exponent };
        }
        if self.r_max.is_finite() {
            return Decay::Unknown;
        }
        probe_decay(
            |s| self.expr.eval(s).unwrap_or(f64::NAN),
            self.r_min.max(1.0),
        )
    }
}

/// Decay exponent of `f`, or `None` for a non-power-like tail.
pub fn decay_exponent(f: &WeightFn) -> Option<f64> {
    f.decay().exponent()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn parses_literals_and_powers() {
        assert_eq!(parse_weight("1").unwrap(), WeightExpr::Const(1.0));
        assert_eq!(
            parse_weight("pow(r,-4)").unwrap(),
            WeightExpr::Pow(Box::new(WeightExpr::Var), -4.0)
        );
        let e = parse_weight("0.25*pow(r,-2)").unwrap();
        assert_eq!(
            e,
            WeightExpr::Mul(
                Box::new(WeightExpr::Const(0.25)),
                Box::new(WeightExpr::Pow(Box::new(WeightExpr::Var), -2.0))
            )
        );
        assert_eq!(e.eval(2.0).unwrap(), 0.0625);
    }

    #[test]
    fn precedence_and_associativity() {
        let e = parse_weight("1 - 2 - 3").unwrap();
        assert_eq!(e.eval(1.0).unwrap(), -4.0);
        let e = parse_weight("8 / 4 / 2").unwrap();
        assert_eq!(e.eval(1.0).unwrap(), 1.0);
        let e = parse_weight("-r*r + 2*(r+1)").unwrap();
        assert_eq!(e.eval(3.0).unwrap(), -9.0 + 8.0);
        let e = parse_weight("1e-3 * r").unwrap();
        assert_eq!(e.eval(2.0).unwrap(), 2e-3);
    }

    #[test]
    fn parse_errors_carry_offsets() {
        match parse_weight("1 + * r") {
            Err(ParseError::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("{other:?}"),
        }
        match parse_weight("2*x") {
            Err(ParseError::UnknownIdentifier { name, offset }) => {
                assert_eq!(name, "x");
                assert_eq!(offset, 2);
            }
            other => panic!("{other:?}"),
        }
        match parse_weight("pow(r)") {
            Err(ParseError::Arity {
                expected, found, ..
            }) => assert_eq!((expected, found), (2, 1)),
            other => panic!("{other:?}"),
        }
        match parse_weight("log(r, 2)") {
            Err(ParseError::Arity { found, .. }) => assert_eq!(found, 2),
            other => panic!("{other:?}"),
        }
        assert!(parse_weight("").is_err());
        assert!(parse_weight("(r").is_err());
        assert!(parse_weight("r)").is_err());
        assert!(parse_weight("pow(r, r)").is_err());
    }

    #[test]
    fn evaluation_examples() {
        let f = WeightFn::parse("1").unwrap();
        assert_eq!(f.eval(7.3).unwrap(), 1.0);
        let f = WeightFn::parse("pow(r,-4)").unwrap();
        assert_eq!(f.eval(2.0).unwrap(), 0.0625);
        let f = WeightFn::parse("pow(r,-2)*log(r)").unwrap();
        let e = std::f64::consts::E;
        assert!(close(f.eval(e).unwrap(), e.powi(-2), 1e-15));
    }

    #[test]
    fn domain_errors() {
        let f = WeightFn::parse("log(r)").unwrap();
        assert!(matches!(
            f.eval_raw(0.0),
            Err(WeightError::OutOfDomain { .. })
        ));
        assert!(matches!(f.eval(0.5), Err(WeightError::NotPositive { .. })));
        let e = parse_weight("log(r - 2)").unwrap();
        assert!(matches!(e.eval(1.0), Err(WeightError::LogDomain { .. })));
        let e = parse_weight("1/(r - 2)").unwrap();
        assert!(matches!(
            e.eval(2.0),
            Err(WeightError::DivisionByZero { .. })
        ));
        let e = parse_weight("pow(r - 3, 0.5)").unwrap();
        assert!(matches!(e.eval(1.0), Err(WeightError::NonFinite { .. })));
        let f = WeightFn::new("r", 1.0, 2.0, None).unwrap();
        assert!(f.eval(2.5).is_err());
        assert!(f.eval(1.0).is_err());
        assert!(f.eval(2.0).is_ok());
    }

    #[test]
    fn decay_examples() {
        assert_eq!(decay_exponent(&WeightFn::parse("1").unwrap()), Some(0.0));
        let a = decay_exponent(&WeightFn::parse("pow(r,-4)").unwrap()).unwrap();
        assert!((a + 4.0).abs() < 1e-9);
        match WeightFn::parse("pow(r,-2)*log(r)").unwrap().decay() {
            Decay::Probed {
                exponent,
                log_power: Some(b),
            } => {
                assert!((exponent + 2.0).abs() < 1e-6, "{exponent}");
                assert!((b - 1.0).abs() < 1e-4, "{b}");
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            WeightFn::parse("exp(-1*r)").unwrap().decay(),
            Decay::Unknown
        );
        let f = WeightFn::new("pow(r,-4)", 0.0, f64::INFINITY, Some(-4.0)).unwrap();
        assert_eq!(f.decay(), Decay::Declared { exponent: -4.0 });
    }

    #[test]
    fn declared_decay_is_sanity_checked() {
        assert!(matches!(
            WeightFn::new("pow(r,-4)", 0.0, f64::INFINITY, Some(-3.0)),
            Err(WeightError::DecayMismatch { .. })
        ));
        assert!(WeightFn::new("pow(r,-4) + pow(r,-5)", 0.0, f64::INFINITY, Some(-4.0)).is_ok());
    }

    #[test]
    fn pure_powers_recover_exponent() {
        for a in -6..=2 {
            let text = format!("pow(r, {a})");
            let got = decay_exponent(&WeightFn::parse(&text).unwrap()).unwrap();
            assert!((got - a as f64).abs() <= 1e-6, "{a}: {got}");
        }
    }

    #[test]
    fn printing_is_canonical() {
        let e = parse_weight("0.25*pow(r,-2)").unwrap();
        assert_eq!(e.to_string(), "0.25 * pow(r, -2)");
        let e = parse_weight("r - (r - 1)").unwrap();
        assert_eq!(e.to_string(), "r - (r - 1)");
        let e = parse_weight("-(r*2)").unwrap();
        assert_eq!(e.to_string(), "-(r * 2)");
        let e = parse_weight("1e-12*pow(r,-4)").unwrap();
        assert_eq!(parse_weight(&e.to_string()).unwrap(), e);
    }
}
