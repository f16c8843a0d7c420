use std::fmt;

use thiserror::Error;

use super::ast::{PREC_ADD, PREC_NEG};
use super::{BinaryOp, Expr, UnaryOp, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Empty,
    UnknownIdentifier(String),
    /// An opening parenthesis without its match.
    UnclosedParen,
    /// A closing parenthesis without an opening one.
    UnmatchedParen,
    UnexpectedChar(char),
    UnexpectedToken(String),
    UnexpectedEnd,
    BadNumber(String),
    /// A function name not followed by `(`.
    MissingCall(String),
    NonConstantExponent,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Empty => f.write_str("empty expression"),
            ParseErrorKind::UnknownIdentifier(s) => write!(f, "unknown identifier `{s}`"),
            ParseErrorKind::UnclosedParen => {
                f.write_str("unbalanced parentheses: `(` is never closed")
            }
            ParseErrorKind::UnmatchedParen => f.write_str("unbalanced parentheses: unexpected `)`"),
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character `{c}`"),
            ParseErrorKind::UnexpectedToken(s) => write!(f, "unexpected `{s}`"),
            ParseErrorKind::UnexpectedEnd => f.write_str("unexpected end of input"),
            ParseErrorKind::BadNumber(s) => write!(f, "malformed number `{s}`"),
            ParseErrorKind::MissingCall(s) => {
                write!(f, "function `{s}` must be called as {s}(...)")
            }
            ParseErrorKind::NonConstantExponent => f.write_str("exponent must be a constant"),
        }
    }
}

/// A parse failure at a zero-based character position.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{kind} at position {position}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub position: usize,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => v.to_string(),
            Tok::Ident(s) => s.clone(),
            Tok::Op(c) => c.to_string(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent part, only when followed by digits
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v = s.parse::<f64>().map_err(|_| ParseError {
                kind: ParseErrorKind::BadNumber(s.clone()),
                position: start,
            })?;
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), start));
        } else {
            let tok = match c {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                _ => {
                    return Err(ParseError {
                        kind: ParseErrorKind::UnexpectedChar(c),
                        position: start,
                    })
                }
            };
            out.push((tok, start));
            i += 1;
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    open: Vec<usize>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, p)| *p)
    }

    fn err<T>(&self, kind: ParseErrorKind, position: usize) -> Result<T, ParseError> {
        Err(ParseError { kind, position })
    }

    fn end_error<T>(&self) -> Result<T, ParseError> {
        match self.open.last() {
            Some(&p) => self.err(ParseErrorKind::UnclosedParen, p),
            None => self.err(ParseErrorKind::UnexpectedEnd, self.end),
        }
    }

    fn expr(&mut self, min_prec: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.prefix()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Op('+')) => BinaryOp::Add,
                Some(Tok::Op('-')) => BinaryOp::Sub,
                Some(Tok::Op('*')) => BinaryOp::Mul,
                Some(Tok::Op('/')) => BinaryOp::Div,
                Some(Tok::Op('^')) => BinaryOp::Pow,
                _ => break,
            };
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.pos += 1;
            if op == BinaryOp::Pow {
                let at = self.here();
                // right associative; unary minus allowed in the exponent
                let rhs = self.expr(PREC_NEG)?.fold();
                match rhs.as_const() {
                    Some(c) => {
                        lhs = Expr::Binary(BinaryOp::Pow, Box::new(lhs), Box::new(Expr::Const(c)))
                    }
                    None => return self.err(ParseErrorKind::NonConstantExponent, at),
                }
            } else {
                let rhs = self.expr(prec + 1)?;
                lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
            }
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Expr, ParseError> {
        let at = self.here();
        let Some((tok, _)) = self.toks.get(self.pos).cloned() else {
            return self.end_error();
        };
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::Op('-') => Ok(Expr::neg(self.expr(PREC_NEG)?)),
            Tok::Op('+') => self.expr(PREC_NEG),
            Tok::LParen => {
                let inner = self.group(at)?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if let Some(v) = Var::from_name(&name) {
                    return Ok(Expr::Var(v));
                }
                let Some(op) = UnaryOp::from_function_name(&name) else {
                    return self.err(ParseErrorKind::UnknownIdentifier(name), at);
                };
                if self.peek() != Some(&Tok::LParen) {
                    return self.err(ParseErrorKind::MissingCall(name), at);
                }
                let open_at = self.here();
                self.pos += 1;
                let arg = self.group(open_at)?;
                Ok(Expr::Unary(op, Box::new(arg)))
            }
            Tok::RParen => self.err(ParseErrorKind::UnmatchedParen, at),
            Tok::Op(_) => self.err(ParseErrorKind::UnexpectedToken(tok.describe()), at),
        }
    }

    /// Parses the inside of a parenthesised group whose `(` sits at `open_at`.
    fn group(&mut self, open_at: usize) -> Result<Expr, ParseError> {
        self.open.push(open_at);
        let inner = self.expr(PREC_ADD)?;
        match self.peek() {
            Some(Tok::RParen) => {
                self.pos += 1;
                self.open.pop();
                Ok(inner)
            }
            None => self.end_error(),
            Some(t) => self.err(ParseErrorKind::UnexpectedToken(t.describe()), self.here()),
        }
    }
}

/// Parses expression text over the variables `x ql qu vl vu wl wu` and the
/// functions `ln exp sin cos sqrt`.
///
/// The tree mirrors the text; only negated literals and exponents are folded
/// to constants.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    if toks.is_empty() {
        return Err(ParseError {
            kind: ParseErrorKind::Empty,
            position: 0,
        });
    }
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.chars().count(),
        open: Vec::new(),
    };
    let e = p.expr(PREC_ADD)?;
    match p.peek() {
        None => Ok(e),
        Some(Tok::RParen) => p.err(ParseErrorKind::UnmatchedParen, p.here()),
        Some(t) => p.err(ParseErrorKind::UnexpectedToken(t.describe()), p.here()),
    }
}
