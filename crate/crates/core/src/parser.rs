//! Text syntax for free polynomial maps.
//!
//! ```text
//! map    := ["vars" ident ("," ident)* ";"] "(" expr ("," expr)* ")"
//! expr   := ["+" | "-"] term (("+" | "-") term)*
//! term   := factor ("*" factor)*
//! factor := atom ["^" uint]
//! atom   := ident | literal | "(" expr ")" | "[" expr "," expr "]"
//! ```
//!
//! Literals are real decimals (`3`, `2.5`, `1e-20`), imaginary decimals
//! (`3i`, `2.5e3i`) and the bare imaginary unit `i`. Commutators expand as
//! `[A, B] = A*B - B*A`. Printing is exact: every coefficient is written with
//! the shortest decimal that reads back to the same `f64`.

use std::fmt::Write as _;

use num_complex::Complex64;
use thiserror::Error;

use crate::ncpoly::{FreePoly, FreePolyMap, PolyError, Word};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("unknown identifier `{name}` at {line}:{col}")]
    UnknownIdentifier { name: String, line: usize, col: usize },
    #[error("invalid exponent at {line}:{col}: {message}")]
    BadExponent { line: usize, col: usize, message: String },
    #[error("invalid variable declaration at {line}:{col}: {message}")]
    BadDeclaration { line: usize, col: usize, message: String },
    #[error("a map needs at least one component")]
    EmptyTuple,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Variable names plus the component expression sources of a parsed map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceMap {
    pub variable_names: Vec<String>,
    pub component_sources: Vec<String>,
}

/// A parsed map together with the variable names it was written in.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedMap {
    pub names: Vec<String>,
    pub map: FreePolyMap,
    pub source: SourceMap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrintStyle {
    /// Words spelled letter by letter: `X*X*Y`.
    Canonical,
    /// Runs of a repeated letter collapsed into powers: `X^2*Y`.
    Compact,
}

pub fn parse_map(text: &str) -> Result<FreePolyMap, ParseError> {
    parse_named_map(text).map(|m| m.map)
}

pub fn parse_named_map(text: &str) -> Result<NamedMap, ParseError> {
    let tokens = lex(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        text,
        names: Vec::new(),
        declared: false,
    };
    p.parse_map()
}

/// Parses a single expression (no tuple parentheses) in the given variables.
pub fn parse_poly(text: &str, names: &[&str]) -> Result<FreePoly, ParseError> {
    let header = if names.is_empty() {
        String::new()
    } else {
        format!("vars {};", names.join(","))
    };
    let m = parse_map(&format!("{header}({text})"))?;
    if m.num_outputs() != 1 {
        return Err(ParseError::Syntax {
            line: 1,
            col: 1,
            message: "expected a single expression".into(),
        });
    }
    Ok(m.components()[0].clone())
}

/// Default names: `X`, `X,Y`, `X,Y,Z`, then `X1..XN`.
pub fn default_names(num_vars: usize) -> Vec<String> {
    match num_vars {
        0..=3 => ["X", "Y", "Z"][..num_vars].iter().map(|s| s.to_string()).collect(),
        _ => (1..=num_vars).map(|i| format!("X{i}")).collect(),
    }
}

/// Short stable fingerprint of a map's canonical text under default names.
pub fn map_digest(map: &FreePolyMap) -> String {
    crate::matrixeval::short_digest(print_map(map, &default_names(map.num_vars())).as_bytes())
}

pub fn print_map(map: &FreePolyMap, names: &[String]) -> String {
    print_map_styled(map, names, PrintStyle::Canonical)
}

pub fn print_map_styled(map: &FreePolyMap, names: &[String], style: PrintStyle) -> String {
    let comps: Vec<String> = map
        .components()
        .iter()
        .map(|c| print_poly_styled(c, names, style))
        .collect();
    if names.is_empty() {
        format!("({})", comps.join(", "))
    } else {
        format!("vars {}; ({})", names.join(","), comps.join(", "))
    }
}

pub fn print_poly(p: &FreePoly, names: &[String]) -> String {
    print_poly_styled(p, names, PrintStyle::Canonical)
}

pub fn print_poly_styled(p: &FreePoly, names: &[String], style: PrintStyle) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (k, (word, c)) in p.terms().enumerate() {
        let (negative, coeff) = format_coeff(*c);
        match (k, negative) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        let word_text = format_word(word, names, style);
        match (coeff, word_text.is_empty()) {
            (None, true) => out.push('1'),
            (None, false) => out.push_str(&word_text),
            (Some(ct), true) => out.push_str(&ct),
            (Some(ct), false) => {
                let _ = write!(out, "{ct}*{word_text}");
            }
        }
    }
    out
}

fn format_word(word: &Word, names: &[String], style: PrintStyle) -> String {
    let letters = word.letters();
    let name = |l: u32| names.get(l as usize).cloned().unwrap_or_else(|| format!("x{l}"));
    let mut parts = Vec::new();
    let mut i = 0;
    while i < letters.len() {
        let mut j = i + 1;
        if style == PrintStyle::Compact {
            while j < letters.len() && letters[j] == letters[i] {
                j += 1;
            }
        }
        if j - i > 1 {
            parts.push(format!("{}^{}", name(letters[i]), j - i));
        } else {
            parts.push(name(letters[i]));
        }
        i = j;
    }
    parts.join("*")
}

/// Shortest round-trip decimal; exponent form only for very small or large magnitudes.
fn format_real(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && !(1e-4..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// Returns (leading sign is negative, coefficient text or `None` for unit magnitude).
fn format_coeff(c: Complex64) -> (bool, Option<String>) {
    if c.im == 0.0 {
        let neg = c.re < 0.0;
        let a = c.re.abs();
        return (neg, (a != 1.0).then(|| format_real(a)));
    }
    if c.re == 0.0 {
        let neg = c.im < 0.0;
        let b = c.im.abs();
        let t = if b == 1.0 {
            "i".to_string()
        } else {
            format!("{}i", format_real(b))
        };
        return (neg, Some(t));
    }
    let neg = c.re < 0.0;
    let (a, b) = if neg { (-c.re, -c.im) } else { (c.re, c.im) };
    let sign = if b < 0.0 { '-' } else { '+' };
    let bt = if b.abs() == 1.0 {
        "i".to_string()
    } else {
        format!("{}i", format_real(b.abs()))
    };
    (neg, Some(format!("({}{}{})", format_real(a), sign, bt)))
}

// ---------------------------------------------------------------------------
// lexer

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Real(f64, bool),
    Imag(f64),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
    start: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut tokens = Vec::new();
    let (mut line, mut col) = (1usize, 1usize);
    let mut i = 0;
    while i < chars.len() {
        let (start, ch) = chars[i];
        let (tline, tcol) = (line, col);
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if ch == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if ch.is_whitespace() {
            advance(1, &mut i, &mut col);
            continue;
        }
        let single = match ch {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            ',' => Some(Tok::Comma),
            ';' => Some(Tok::Semi),
            _ => None,
        };
        if let Some(tok) = single {
            tokens.push(Token {
                tok,
                line: tline,
                col: tcol,
                start,
            });
            advance(1, &mut i, &mut col);
            continue;
        }
        if ch.is_ascii_alphabetic() {
            let mut j = i;
            while j < chars.len() && (chars[j].1.is_ascii_alphanumeric() || chars[j].1 == '_') {
                j += 1;
            }
            let name: String = chars[i..j].iter().map(|&(_, c)| c).collect();
            let tok = if name == "i" { Tok::Imag(1.0) } else { Tok::Ident(name) };
            tokens.push(Token {
                tok,
                line: tline,
                col: tcol,
                start,
            });
            advance(j - i, &mut i, &mut col);
            continue;
        }
        if ch.is_ascii_digit() {
            let mut j = i;
            let digits = |j: &mut usize| {
                while *j < chars.len() && chars[*j].1.is_ascii_digit() {
                    *j += 1;
                }
            };
            digits(&mut j);
            let mut integral = true;
            if j < chars.len() && chars[j].1 == '.' {
                integral = false;
                j += 1;
                let before = j;
                digits(&mut j);
                if j == before {
                    return Err(ParseError::Syntax {
                        line: tline,
                        col: tcol + (j - i),
                        message: "expected digits after decimal point".into(),
                    });
                }
            }
            if j < chars.len() && (chars[j].1 == 'e' || chars[j].1 == 'E') {
                let mut k = j + 1;
                if k < chars.len() && (chars[k].1 == '+' || chars[k].1 == '-') {
                    k += 1;
                }
                if k < chars.len() && chars[k].1.is_ascii_digit() {
                    integral = false;
                    j = k;
                    digits(&mut j);
                }
            }
            let lexeme: String = chars[i..j].iter().map(|&(_, c)| c).collect();
            let value: f64 = lexeme.parse().map_err(|_| ParseError::Syntax {
                line: tline,
                col: tcol,
                message: format!("malformed number `{lexeme}`"),
            })?;
            if !value.is_finite() {
                return Err(ParseError::Syntax {
                    line: tline,
                    col: tcol,
                    message: format!("number `{lexeme}` out of range"),
                });
            }
            let imaginary = j < chars.len()
                && chars[j].1 == 'i'
                && !(j + 1 < chars.len() && (chars[j + 1].1.is_ascii_alphanumeric() || chars[j + 1].1 == '_'));
            let tok = if imaginary {
                j += 1;
                Tok::Imag(value)
            } else {
                Tok::Real(value, integral)
            };
            tokens.push(Token {
                tok,
                line: tline,
                col: tcol,
                start,
            });
            advance(j - i, &mut i, &mut col);
            continue;
        }
        return Err(ParseError::Syntax {
            line: tline,
            col: tcol,
            message: format!("unexpected character `{ch}`"),
        });
    }
    tokens.push(Token {
        tok: Tok::Eof,
        line,
        col,
        start: text.len(),
    });
    Ok(tokens)
}

// ---------------------------------------------------------------------------
// parser

#[derive(Debug, Clone)]
enum Expr {
    Scalar(Complex64),
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Commutator(Box<Expr>, Box<Expr>),
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    text: &'a str,
    names: Vec<String>,
    declared: bool,
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let t = self.peek();
        Err(ParseError::Syntax {
            line: t.line,
            col: t.col,
            message: message.into(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Token, ParseError> {
        if self.peek().tok == tok {
            Ok(self.bump())
        } else {
            self.error(format!("expected {what}, found {}", describe(&self.peek().tok)))
        }
    }

    fn parse_map(&mut self) -> Result<NamedMap, ParseError> {
        if matches!(&self.peek().tok, Tok::Ident(s) if s == "vars") {
            self.bump();
            self.declared = true;
            loop {
                let t = self.bump();
                match t.tok {
                    Tok::Ident(name) => {
                        if name == "vars" {
                            return Err(ParseError::BadDeclaration {
                                line: t.line,
                                col: t.col,
                                message: "`vars` is reserved".into(),
                            });
                        }
                        if self.names.contains(&name) {
                            return Err(ParseError::BadDeclaration {
                                line: t.line,
                                col: t.col,
                                message: format!("duplicate variable `{name}`"),
                            });
                        }
                        self.names.push(name);
                    }
                    Tok::Imag(_) => {
                        return Err(ParseError::BadDeclaration {
                            line: t.line,
                            col: t.col,
                            message: "`i` is the imaginary unit and cannot name a variable".into(),
                        })
                    }
                    other => {
                        return Err(ParseError::Syntax {
                            line: t.line,
                            col: t.col,
                            message: format!("expected variable name, found {}", describe(&other)),
                        })
                    }
                }
                if self.peek().tok == Tok::Comma {
                    self.bump();
                    continue;
                }
                self.expect(Tok::Semi, "`;` after variable list")?;
                break;
            }
        }

        self.expect(Tok::LParen, "`(` opening the component tuple")?;
        if self.peek().tok == Tok::RParen {
            return Err(ParseError::EmptyTuple);
        }
        let mut exprs = Vec::new();
        let mut sources = Vec::new();
        loop {
            let start = self.peek().start;
            exprs.push(self.parse_expr()?);
            let end = self.peek().start;
            sources.push(self.text[start..end].trim().to_string());
            match self.peek().tok {
                Tok::Comma => {
                    self.bump();
                }
                Tok::RParen => {
                    self.bump();
                    break;
                }
                _ => return self.error(format!("expected `,` or `)`, found {}", describe(&self.peek().tok))),
            }
        }
        if self.peek().tok != Tok::Eof {
            return self.error(format!("unexpected {} after map", describe(&self.peek().tok)));
        }

        let n = self.names.len();
        let components = exprs
            .iter()
            .map(|e| eval(e, n).map(|v| v.into_poly(n)))
            .collect::<Result<Vec<_>, _>>()?;
        let map = FreePolyMap::new(n, components)?;
        Ok(NamedMap {
            names: self.names.clone(),
            map,
            source: SourceMap {
                variable_names: self.names.clone(),
                component_sources: sources,
            },
        })
    }

    fn parse_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = match self.peek().tok {
            Tok::Minus => {
                self.bump();
                Expr::Neg(Box::new(self.parse_term()?))
            }
            Tok::Plus => {
                self.bump();
                self.parse_term()?
            }
            _ => self.parse_term()?,
        };
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.parse_term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.parse_term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_factor()?;
        while self.peek().tok == Tok::Star {
            self.bump();
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.parse_factor()?));
        }
        Ok(lhs)
    }

    fn parse_factor(&mut self) -> Result<Expr, ParseError> {
        let atom = self.parse_atom()?;
        if self.peek().tok != Tok::Caret {
            return Ok(atom);
        }
        self.bump();
        let t = self.bump();
        let bad = |message: &str| ParseError::BadExponent {
            line: t.line,
            col: t.col,
            message: message.into(),
        };
        match t.tok {
            Tok::Real(v, true) => {
                if v > u32::MAX as f64 {
                    return Err(bad("exponent too large"));
                }
                Ok(Expr::Pow(Box::new(atom), v as u32))
            }
            Tok::Real(_, false) => Err(bad("exponent must be a nonnegative integer")),
            Tok::Minus => Err(bad("negative exponents are not supported")),
            Tok::Imag(_) => Err(bad("exponent must be a nonnegative integer")),
            other => Err(ParseError::Syntax {
                line: t.line,
                col: t.col,
                message: format!("expected exponent, found {}", describe(&other)),
            }),
        }
    }

    fn parse_atom(&mut self) -> Result<Expr, ParseError> {
        let t = self.bump();
        match t.tok {
            Tok::Ident(name) => {
                if let Some(idx) = self.names.iter().position(|n| *n == name) {
                    return Ok(Expr::Var(idx));
                }
                if self.declared || name == "vars" {
                    return Err(ParseError::UnknownIdentifier {
                        name,
                        line: t.line,
                        col: t.col,
                    });
                }
                self.names.push(name);
                Ok(Expr::Var(self.names.len() - 1))
            }
            Tok::Real(v, _) => Ok(Expr::Scalar(Complex64::new(v, 0.0))),
            Tok::Imag(v) => Ok(Expr::Scalar(Complex64::new(0.0, v))),
            Tok::LParen => {
                let e = self.parse_expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::LBracket => {
                let a = self.parse_expr()?;
                self.expect(Tok::Comma, "`,` inside commutator")?;
                let b = self.parse_expr()?;
                self.expect(Tok::RBracket, "`]`")?;
                Ok(Expr::Commutator(Box::new(a), Box::new(b)))
            }
            other => Err(ParseError::Syntax {
                line: t.line,
                col: t.col,
                message: format!("expected an operand, found {}", describe(&other)),
            }),
        }
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Real(v, _) => format!("number `{v}`"),
        Tok::Imag(v) => format!("imaginary number `{v}i`"),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::Caret => "`^`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::LBracket => "`[`".into(),
        Tok::RBracket => "`]`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Semi => "`;`".into(),
        Tok::Eof => "end of input".into(),
    }
}

// ---------------------------------------------------------------------------
// evaluation

/// Pure-literal subexpressions fold as scalars so printed coefficients read back bit-exactly.
enum Value {
    Scalar(Complex64),
    Poly(FreePoly),
}

impl Value {
    fn into_poly(self, n: usize) -> FreePoly {
        match self {
            Value::Scalar(c) => FreePoly::constant(n, c),
            Value::Poly(p) => p,
        }
    }
}

fn eval(e: &Expr, n: usize) -> Result<Value, ParseError> {
    Ok(match e {
        Expr::Scalar(c) => Value::Scalar(*c),
        Expr::Var(i) => Value::Poly(FreePoly::var(n, *i)?),
        Expr::Neg(a) => match eval(a, n)? {
            Value::Scalar(c) => Value::Scalar(-c),
            Value::Poly(p) => Value::Poly(p.neg()),
        },
        Expr::Add(a, b) => match (eval(a, n)?, eval(b, n)?) {
            (Value::Scalar(x), Value::Scalar(y)) => Value::Scalar(x + y),
            (x, y) => Value::Poly(x.into_poly(n).try_add(&y.into_poly(n))?),
        },
        Expr::Sub(a, b) => match (eval(a, n)?, eval(b, n)?) {
            (Value::Scalar(x), Value::Scalar(y)) => Value::Scalar(x - y),
            (x, y) => Value::Poly(x.into_poly(n).try_sub(&y.into_poly(n))?),
        },
        Expr::Mul(a, b) => match (eval(a, n)?, eval(b, n)?) {
            (Value::Scalar(x), Value::Scalar(y)) => Value::Scalar(x * y),
            (Value::Scalar(x), Value::Poly(p)) | (Value::Poly(p), Value::Scalar(x)) => Value::Poly(p.scale(x)),
            (Value::Poly(p), Value::Poly(q)) => Value::Poly(p.try_mul(&q)?),
        },
        Expr::Pow(a, k) => match eval(a, n)? {
            Value::Scalar(x) => Value::Scalar(x.powu(*k)),
            Value::Poly(p) => {
                let mut acc = FreePoly::one(n);
                for _ in 0..*k {
                    acc = acc.try_mul(&p)?;
                }
                Value::Poly(acc)
            }
        },
        Expr::Commutator(a, b) => {
            let x = eval(a, n)?.into_poly(n);
            let y = eval(b, n)?.into_poly(n);
            Value::Poly(x.try_mul(&y)?.try_sub(&y.try_mul(&x)?)?)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;

    fn names(ns: &[&str]) -> Vec<String> {
        ns.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn single_square() {
        let m = parse_map("vars X; (X^2)").unwrap();
        assert_eq!(m.num_vars(), 1);
        assert_eq!(
            m.components()[0],
            FreePoly::monomial(1, Word::new(vec![0, 0]), c64(1.0, 0.0)).unwrap()
        );
    }

    #[test]
    fn symmetrization_map() {
        let m = parse_map("vars X,Y; (X + Y, X^2 + Y^2)").unwrap();
        assert_eq!(m.num_outputs(), 2);
        assert_eq!(print_map(&m, &names(&["X", "Y"])), "vars X,Y; (X + Y, X*X + Y*Y)");
    }

    #[test]
    fn commutator_expands() {
        let m = parse_map("vars X,Y; (X+X^2+[X,Y], Y+[X,Y])").unwrap();
        let second = &m.components()[1];
        assert_eq!(second.coeff(&Word::new(vec![1])), c64(1.0, 0.0));
        assert_eq!(second.coeff(&Word::new(vec![0, 1])), c64(1.0, 0.0));
        assert_eq!(second.coeff(&Word::new(vec![1, 0])), c64(-1.0, 0.0));
        assert_eq!(second.num_terms(), 3);
        assert_eq!(
            parse_poly("[A,B]", &["A", "B"]).unwrap(),
            parse_poly("A*B - B*A", &["A", "B"]).unwrap()
        );
    }

    #[test]
    fn precedence() {
        let p = parse_poly("a + b*c^2", &["a", "b", "c"]).unwrap();
        let q = parse_poly("a + (b*(c^2))", &["a", "b", "c"]).unwrap();
        assert_eq!(p, q);
        assert_eq!(p.coeff(&Word::new(vec![1, 2, 2])), c64(1.0, 0.0));
    }

    #[test]
    fn first_appearance_order_without_header() {
        let nm = parse_named_map("(Y*X + Z)").unwrap();
        assert_eq!(nm.names, names(&["Y", "X", "Z"]));
        assert_eq!(nm.map.components()[0].coeff(&Word::new(vec![0, 1])), c64(1.0, 0.0));
        assert_eq!(nm.source.component_sources, vec!["Y*X + Z".to_string()]);
    }

    #[test]
    fn printing_examples() {
        let n = names(&["X", "Y"]);
        assert_eq!(print_poly(&FreePoly::zero(2), &n), "0");
        let p = parse_poly("X^2 + X*Y", &["X", "Y"]).unwrap();
        assert_eq!(print_poly(&p, &n), "X*X + X*Y");
        let q = FreePoly::monomial(2, Word::new(vec![0, 1]), c64(2.0, 3.0)).unwrap();
        assert_eq!(print_poly(&q, &n), "(2+3i)*X*Y");
        let r = parse_poly("-2.5 - i*X + (1-2i)*Y^3", &["X", "Y"]).unwrap();
        assert_eq!(print_poly(&r, &n), "-2.5 - i*X + (1-2i)*Y*Y*Y");
        assert_eq!(
            print_poly_styled(&r, &n, PrintStyle::Compact),
            "-2.5 - i*X + (1-2i)*Y^3"
        );
    }

    #[test]
    fn literal_forms() {
        let p = parse_poly("3 + 2.5 + i + 3i + (2+3i) + 1e-3", &["X"]).unwrap();
        assert_eq!(p.constant_term(), c64(3.0 + 2.5 + 2.0 + 1e-3, 7.0));
    }

    #[test]
    fn zero_power_is_unit() {
        assert_eq!(parse_poly("X^0", &["X"]).unwrap(), FreePoly::one(1));
    }

    #[test]
    fn tiny_and_huge_coefficients_round_trip() {
        let p = FreePoly::from_terms(
            1,
            [
                (Word::empty(), c64(1e-14 * 3.0, 1e-16)),
                (Word::new(vec![0]), c64(-1.5e300, 0.0)),
                (Word::new(vec![0, 0]), c64(0.1, -0.2)),
            ],
        )
        .unwrap();
        let m = FreePolyMap::new(1, vec![p]).unwrap();
        let text = print_map(&m, &names(&["X"]));
        assert_eq!(parse_map(&text).unwrap(), m);
    }

    #[test]
    fn errors_carry_positions() {
        match parse_map("vars X;\n(X + ") {
            Err(ParseError::Syntax { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        match parse_map("vars X; (X + Q)") {
            Err(ParseError::UnknownIdentifier { name, col, .. }) => {
                assert_eq!(name, "Q");
                assert_eq!(col, 14);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_map("vars X; (X^2.5)"),
            Err(ParseError::BadExponent { .. })
        ));
        assert!(matches!(
            parse_map("vars X; (X^-1)"),
            Err(ParseError::BadExponent { .. })
        ));
        assert!(matches!(parse_map("vars X; ()"), Err(ParseError::EmptyTuple)));
        assert!(matches!(
            parse_map("vars X,X; (X)"),
            Err(ParseError::BadDeclaration { .. })
        ));
        assert!(matches!(
            parse_map("vars i; (i)"),
            Err(ParseError::BadDeclaration { .. })
        ));
        assert!(matches!(parse_map("vars X; (X Y)"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_map("vars X; (X) extra"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_map("(X # 2)"), Err(ParseError::Syntax { .. })));
    }
}
