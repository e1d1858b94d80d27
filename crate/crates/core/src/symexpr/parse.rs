//! Recursive-descent parser for the expression grammar
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := base ('^' integer)?
//! base   := number | 'x' integer | 'x[' integer ']' | 'lam'
//!         | 'exp(' expr ')' | 'sin(' expr ')' | 'cos(' expr ')'
//!         | '(' expr ')' | '-' base
//! ```
//!
//! Whitespace is ignored everywhere. Numbers are decimal literals with an
//! optional fraction and exponent and are converted to exact rationals.
//! Note that `'-' base` binds tighter than `^`, so `-x0^2` is `(-x0)^2`.

use num::{BigInt, Zero};
use thiserror::Error;

use super::{Expr, Rational, SymError};
use crate::chart::Chart;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("coordinate index {index} at position {position} is out of range (limit {limit})")]
    IndexOutOfRange {
        index: usize,
        limit: usize,
        position: usize,
    },
    #[error("at position {position}: {source}")]
    Algebra { position: usize, source: SymError },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::Syntax { position, .. }
            | ParseError::IndexOutOfRange { position, .. }
            | ParseError::Algebra { position, .. } => *position,
        }
    }
}

/// Parses `text` over the coordinates of `chart` (indices `< 4n`).
pub fn parse_expr(text: &str, chart: &Chart) -> Result<Expr, ParseError> {
    parse_with_limit(text, chart.dim())
}

/// Parses `text` accepting variable indices below `limit`.
pub fn parse_with_limit(text: &str, limit: usize) -> Result<Expr, ParseError> {
    let chars: Vec<(usize, char)> = text
        .chars()
        .enumerate()
        .filter(|(_, c)| !c.is_whitespace())
        .collect();
    let mut parser = Parser {
        chars,
        pos: 0,
        end: text.chars().count(),
        limit,
    };
    let e = parser.expr()?;
    if parser.pos < parser.chars.len() {
        return Err(parser.error(format!("unexpected '{}'", parser.chars[parser.pos].1)));
    }
    Ok(e)
}

struct Parser {
    chars: Vec<(usize, char)>,
    pos: usize,
    end: usize,
    limit: usize,
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).map(|&(_, c)| c)
    }

    fn position(&self) -> usize {
        self.chars.get(self.pos).map_or(self.end, |&(p, _)| p)
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            position: self.position(),
            message: message.into(),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_word(&mut self, word: &str) -> bool {
        let matches = word
            .chars()
            .enumerate()
            .all(|(i, c)| self.peek_at(i) == Some(c));
        if matches {
            self.pos += word.chars().count();
        }
        matches
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(match self.peek() {
                Some(found) => self.error(format!("expected '{c}', found '{found}'")),
                None => self.error(format!("expected '{c}', found end of input")),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc += self.term()?;
            } else if self.eat('-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.factor()?;
        loop {
            if self.eat('*') {
                acc = &acc * &self.factor()?;
            } else if self.peek() == Some('/') {
                let position = self.position();
                self.pos += 1;
                let divisor = self.factor()?;
                acc = acc
                    .div(&divisor)
                    .map_err(|source| ParseError::Algebra { position, source })?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if self.peek() == Some('^') {
            let position = self.position();
            self.pos += 1;
            let k = self.integer()?;
            let k: i32 = k.try_into().map_err(|_| self.error("exponent too large"))?;
            return base
                .pow(k)
                .map_err(|source| ParseError::Algebra { position, source });
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let Some(c) = self.peek() else {
            return Err(self.error("unexpected end of input"));
        };
        match c {
            '-' => {
                self.pos += 1;
                Ok(-self.base()?)
            }
            '(' => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            '0'..='9' | '.' => self.number(),
            'x' => {
                let position = self.position();
                self.pos += 1;
                let index = if self.eat('[') {
                    let k = self.integer()?;
                    self.expect(']')?;
                    k
                } else {
                    self.integer()?
                };
                if index >= self.limit {
                    return Err(ParseError::IndexOutOfRange {
                        index,
                        limit: self.limit,
                        position,
                    });
                }
                Ok(Expr::var(index))
            }
            _ => {
                if self.eat_word("lam") {
                    return Ok(Expr::lam());
                }
                for (name, build) in [
                    ("exp(", Expr::exp as fn(Expr) -> Expr),
                    ("sin(", Expr::sin),
                    ("cos(", Expr::cos),
                ] {
                    if self.eat_word(name) {
                        let arg = self.expr()?;
                        self.expect(')')?;
                        return Ok(build(arg));
                    }
                }
                Err(self.error(format!("unexpected '{c}'")))
            }
        }
    }

    fn integer(&mut self) -> Result<usize, ParseError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected an integer"));
        }
        let digits: String = self.chars[start..self.pos]
            .iter()
            .map(|&(_, c)| c)
            .collect();
        digits.parse().map_err(|_| ParseError::Syntax {
            position: self.chars[start].0,
            message: "integer too large".into(),
        })
    }

    fn digits(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek().filter(|c| c.is_ascii_digit()) {
            s.push(c);
            self.pos += 1;
        }
        s
    }

    /// Decimal literal converted exactly: `12`, `0.25`, `.5`, `1e-3`.
    fn number(&mut self) -> Result<Expr, ParseError> {
        let int_part = self.digits();
        let frac_part = if self.eat('.') {
            self.digits()
        } else {
            String::new()
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(self.error("malformed number"));
        }
        let mut exponent: i64 = 0;
        let has_exp = matches!(self.peek(), Some('e' | 'E'))
            && (self.peek_at(1).is_some_and(|c| c.is_ascii_digit())
                || (matches!(self.peek_at(1), Some('+' | '-'))
                    && self.peek_at(2).is_some_and(|c| c.is_ascii_digit())));
        if has_exp {
            self.pos += 1;
            let negative = self.eat('-');
            if !negative {
                self.eat('+');
            }
            let digits = self.digits();
            exponent = digits
                .parse()
                .map_err(|_| self.error("exponent too large"))?;
            if negative {
                exponent = -exponent;
            }
        }
        let mantissa: BigInt = format!("{int_part}{frac_part}")
            .parse()
            .unwrap_or_else(|_| BigInt::zero());
        let scale = exponent - frac_part.len() as i64;
        let ten = BigInt::from(10);
        let value = if scale >= 0 {
            Rational::from_integer(mantissa * num::pow(ten, scale as usize))
        } else {
            Rational::new(mantissa, num::pow(ten, (-scale) as usize))
        };
        Ok(Expr::constant(value))
    }
}
