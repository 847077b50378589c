//! Recursive-descent parser for the coefficient DSL.
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := base ('^' integer)?
//! base   := number | ident | func '(' expr ')' | '(' expr ')' | '-' base
//! ident  := ('x'|'y') positive-integer
//! func   := sqrt | sin | cos | exp | log | abs
//! ```
//!
//! The exponent may carry a sign (`y1^-2`) or be parenthesised (`y1^(-2)`).

use thiserror::Error;

use super::{BinaryOp, Expr, Node, UnaryOp, Var};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedEnd,
    Expected(&'static str),
    UnknownIdentifier(String),
    IndexOutOfRange { name: String, dim: usize },
    NonIntegerExponent(String),
    InvalidNumber(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at byte {offset}: {}", describe(.kind))]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

fn describe(kind: &ParseErrorKind) -> String {
    match kind {
        ParseErrorKind::UnexpectedChar(c) => format!("unexpected character {c:?}"),
        ParseErrorKind::UnexpectedEnd => "unexpected end of input".into(),
        ParseErrorKind::Expected(what) => format!("expected {what}"),
        ParseErrorKind::UnknownIdentifier(s) => format!("unknown identifier {s:?}"),
        ParseErrorKind::IndexOutOfRange { name, dim } => {
            format!("variable {name} out of range for dimension {dim}")
        }
        ParseErrorKind::NonIntegerExponent(s) => format!("exponent {s} is not an integer"),
        ParseErrorKind::InvalidNumber(s) => format!("invalid number {s:?}"),
    }
}

/// Parse `text` as an expression in dimension `n`.
pub fn parse(text: &str, n: usize) -> Result<Expr, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        dim: n,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error(ParseErrorKind::UnexpectedChar(p.src[p.pos] as char)));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
}

impl Parser<'_> {
    fn error(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            offset: self.pos,
            kind,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8, what: &'static str) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else if self.peek().is_none() {
            Err(self.error(ParseErrorKind::UnexpectedEnd))
        } else {
            Err(self.error(ParseErrorKind::Expected(what)))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinaryOp::Add,
                Some(b'-') => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::new(Node::Binary(op, lhs, rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinaryOp::Mul,
                Some(b'/') => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Expr::new(Node::Binary(op, lhs, rhs));
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if self.eat(b'^') {
            let k = self.exponent()?;
            Ok(base.powi(k))
        } else {
            Ok(base)
        }
    }

    fn exponent(&mut self) -> Result<i32, ParseError> {
        let parens = self.eat(b'(');
        let negative = if self.eat(b'-') {
            true
        } else {
            self.eat(b'+');
            false
        };
        self.skip_ws();
        let start = self.pos;
        let text = self.number_text()?;
        let value: f64 = text.parse().map_err(|_| ParseError {
            offset: start,
            kind: ParseErrorKind::InvalidNumber(text.clone()),
        })?;
        if value.fract() != 0.0 || value > f64::from(i32::MAX) {
            return Err(ParseError {
                offset: start,
                kind: ParseErrorKind::NonIntegerExponent(text),
            });
        }
        if parens {
            self.expect(b')', "')'")?;
        }
        let k = value as i32;
        Ok(if negative { -k } else { k })
    }

    fn number_text(&mut self) -> Result<String, ParseError> {
        let start = self.pos;
        let mut seen_dot = false;
        while let Some(&c) = self.src.get(self.pos) {
            if c.is_ascii_digit() {
                self.pos += 1;
            } else if c == b'.' && !seen_dot {
                seen_dot = true;
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.pos == start {
            return Err(match self.src.get(self.pos) {
                None => self.error(ParseErrorKind::UnexpectedEnd),
                Some(_) => self.error(ParseErrorKind::Expected("number")),
            });
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let Some(c) = self.peek() else {
            return Err(self.error(ParseErrorKind::UnexpectedEnd));
        };
        match c {
            b'-' => {
                self.pos += 1;
                Ok(-self.base()?)
            }
            b'(' => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')', "')'")?;
                Ok(e)
            }
            b'0'..=b'9' | b'.' => {
                let start = self.pos;
                let text = self.number_text()?;
                let value: f64 = text.parse().map_err(|_| ParseError {
                    offset: start,
                    kind: ParseErrorKind::InvalidNumber(text.clone()),
                })?;
                Ok(Expr::constant(value))
            }
            c if c.is_ascii_alphabetic() => self.ident(),
            other => Err(self.error(ParseErrorKind::UnexpectedChar(other as char))),
        }
    }

    fn ident(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self
            .src
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_alphanumeric())
        {
            self.pos += 1;
        }
        let word = String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
        if let Some(op) = UnaryOp::from_name(&word) {
            self.expect(b'(', "'(' after function name")?;
            let arg = self.expr()?;
            self.expect(b')', "')'")?;
            return Ok(Expr::unary(op, arg));
        }
        let unknown = || ParseError {
            offset: start,
            kind: ParseErrorKind::UnknownIdentifier(word.clone()),
        };
        let (head, digits) = word.split_at(1);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(unknown());
        }
        let index: usize = digits.parse().map_err(|_| unknown())?;
        if index == 0 || index > self.dim {
            return Err(ParseError {
                offset: start,
                kind: ParseErrorKind::IndexOutOfRange {
                    name: word.clone(),
                    dim: self.dim,
                },
            });
        }
        let var = match head {
            "x" => Var::x(index - 1),
            "y" => Var::y(index - 1),
            _ => return Err(unknown()),
        };
        Ok(Expr::var(var))
    }
}
