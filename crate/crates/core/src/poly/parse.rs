//! Text form of polynomials.
//!
//! ```text
//! expr   := term (("+"|"-") term)*
//! term   := number ("*" factor)* | factor ("*" factor)*
//! factor := "x" INT ("^" INT)?
//! ```
//!
//! Whitespace is insignificant and variable indices are 1-based. A term may
//! carry a leading sign, so `-x1 + -2*x2` is accepted.

use std::fmt;

use super::{Monomial, Polynomial, VarId};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    /// Shifts the location by the position of the parsed text inside a larger
    /// document (`line` and `column` of the text's first character, 1-based).
    pub fn offset(mut self, line: usize, column: usize) -> Self {
        if self.line == 1 {
            self.column += column - 1;
        }
        self.line += line - 1;
        self
    }
}

struct Parser {
    chars: Vec<(usize, usize, char)>,
    pos: usize,
    nvars: Option<usize>,
    max_var: usize,
}

impl Parser {
    fn new(text: &str, nvars: Option<usize>) -> Self {
        let mut chars = Vec::new();
        let (mut line, mut col) = (1, 1);
        for c in text.chars() {
            chars.push((line, col, c));
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        }
        Self {
            chars,
            pos: 0,
            nvars,
            max_var: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].2.is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).map(|c| c.2)
    }

    fn peek_raw(&self) -> Option<char> {
        self.chars.get(self.pos).map(|c| c.2)
    }

    fn error_at(&self, pos: usize, message: impl Into<String>) -> ParseError {
        let (line, column) = match self.chars.get(pos) {
            Some(&(l, c, _)) => (l, c),
            None => match self.chars.last() {
                Some(&(l, _, '\n')) => (l + 1, 1),
                Some(&(l, c, _)) => (l, c + 1),
                None => (1, 1),
            },
        };
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }

    fn expr(&mut self) -> Result<Vec<(Monomial, f64)>, ParseError> {
        let mut terms = vec![self.term(1.0)?];
        loop {
            match self.peek() {
                None => break,
                Some('+') => {
                    self.pos += 1;
                    terms.push(self.term(1.0)?);
                }
                Some('-') => {
                    self.pos += 1;
                    terms.push(self.term(-1.0)?);
                }
                Some(c) => {
                    return Err(self.error_at(self.pos, format!("unexpected '{c}'")));
                }
            }
        }
        Ok(terms)
    }

    fn term(&mut self, mut sign: f64) -> Result<(Monomial, f64), ParseError> {
        while let Some(c @ ('+' | '-')) = self.peek() {
            if c == '-' {
                sign = -sign;
            }
            self.pos += 1;
        }
        let mut coeff = sign;
        let mut factors = Vec::new();
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == '.' => coeff *= self.number()?,
            Some('x') => factors.push(self.factor()?),
            Some(c) => return Err(self.error_at(self.pos, format!("expected term, found '{c}'"))),
            None => return Err(self.error_at(self.pos, "expected term, found end of input")),
        }
        while self.peek() == Some('*') {
            self.pos += 1;
            match self.peek() {
                Some('x') => factors.push(self.factor()?),
                _ => return Err(self.error_at(self.pos, "expected variable after '*'")),
            }
        }
        Ok((Monomial::from_powers(factors), coeff))
    }

    fn factor(&mut self) -> Result<(VarId, u32), ParseError> {
        let start = self.pos;
        self.pos += 1; // 'x'
        let idx_pos = self.pos;
        let index = self
            .integer()
            .ok_or_else(|| self.error_at(idx_pos, "expected variable index after 'x'"))?;
        if index == 0 {
            return Err(self.error_at(start, "variable indices start at 1"));
        }
        if let Some(n) = self.nvars {
            if index > n as u64 {
                return Err(self.error_at(start, format!("variable x{index} exceeds the declared dimension {n}")));
            }
        }
        let index = index as usize;
        self.max_var = self.max_var.max(index);
        let mut exp = 1;
        if self.peek() == Some('^') {
            self.pos += 1;
            self.skip_ws();
            let exp_pos = self.pos;
            exp = self
                .integer()
                .and_then(|e| u32::try_from(e).ok())
                .ok_or_else(|| self.error_at(exp_pos, "expected integer exponent after '^'"))?;
        }
        Ok((VarId(index - 1), exp))
    }

    fn integer(&mut self) -> Option<u64> {
        let start = self.pos;
        while matches!(self.peek_raw(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return None;
        }
        self.slice(start, self.pos).parse().ok()
    }

    fn slice(&self, start: usize, end: usize) -> String {
        self.chars[start..end].iter().map(|c| c.2).collect()
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while matches!(p.peek_raw(), Some(c) if c.is_ascii_digit()) {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut count = digits(self);
        if self.peek_raw() == Some('.') {
            self.pos += 1;
            count += digits(self);
        }
        if count == 0 {
            return Err(self.error_at(start, "malformed number"));
        }
        if matches!(self.peek_raw(), Some('e' | 'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek_raw(), Some('+' | '-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
                return Err(self.error_at(save, "malformed exponent"));
            }
        }
        let s = self.slice(start, self.pos);
        s.parse::<f64>()
            .map_err(|_| self.error_at(start, format!("malformed number '{s}'")))
    }
}

pub(super) fn parse_polynomial(text: &str, nvars: Option<usize>) -> Result<Polynomial, ParseError> {
    let mut parser = Parser::new(text, nvars);
    let terms = parser.expr()?;
    let n = nvars.unwrap_or(parser.max_var);
    Ok(Polynomial::from_terms(n, terms))
}

fn fmt_coeff(c: f64) -> String {
    let a = c.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{c}")
    } else {
        format!("{c:e}")
    }
}

pub(super) fn write_polynomial(p: &Polynomial, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if p.terms.is_empty() {
        return f.write_str("0");
    }
    for (i, (m, c)) in p.terms.iter().enumerate() {
        let mag = c.abs();
        match (i, *c < 0.0) {
            (0, true) => f.write_str("-")?,
            (0, false) => {}
            (_, true) => f.write_str(" - ")?,
            (_, false) => f.write_str(" + ")?,
        }
        if m.is_one() {
            f.write_str(&fmt_coeff(mag))?;
        } else if mag == 1.0 {
            write!(f, "{m}")?;
        } else {
            write!(f, "{}*{m}", fmt_coeff(mag))?;
        }
    }
    Ok(())
}
