//! Line-oriented problem files:
//!
//! ```text
//! # quartic oscillator
//! name = quartic
//! dim = 2
//! field = -x2^3; x1;
//! integral = 0.5*x1^2 + 0.25*x2^4
//! structure = canonical
//! ic = 1, 1
//! h = 0.1
//! ```

use std::path::Path;

use super::{ProblemError, ProblemSpec};
use crate::poly::Polynomial;
use crate::skew::{ReducedSystem, SkewStructure};
use crate::tower::{reduce_all, ReductionParams};

/// A value and where it starts in the file.
struct Entry<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

impl Entry<'_> {
    fn error(&self, message: impl Into<String>) -> ProblemError {
        ProblemError::Parse {
            line: self.line,
            column: self.column,
            message: message.into(),
        }
    }

    /// Splits on `sep`, keeping each piece's location.
    fn split(&self, sep: char) -> Vec<Entry<'_>> {
        let mut out = Vec::new();
        let mut start = 0;
        for (i, c) in self.text.char_indices().chain([(self.text.len(), sep)]) {
            if c == sep {
                out.push(Entry {
                    text: &self.text[start..i],
                    line: self.line,
                    column: self.column + self.text[..start].chars().count(),
                });
                start = i + c.len_utf8();
            }
        }
        out
    }

    fn polynomial(&self, n: usize) -> Result<Polynomial, ProblemError> {
        Polynomial::parse(self.text, n).map_err(|e| {
            let e = e.offset(self.line, self.column);
            ProblemError::Parse {
                line: e.line,
                column: e.column,
                message: e.message,
            }
        })
    }

    fn number<T: std::str::FromStr>(&self, what: &str) -> Result<T, ProblemError> {
        self.text
            .trim()
            .parse()
            .map_err(|_| self.error(format!("invalid {what} `{}`", self.text.trim())))
    }
}

#[derive(Default)]
struct Entries<'a> {
    name: Option<Entry<'a>>,
    dim: Option<Entry<'a>>,
    field: Option<Entry<'a>>,
    integrals: Vec<Entry<'a>>,
    structure: Option<Entry<'a>>,
    ic: Option<Entry<'a>>,
    h: Option<Entry<'a>>,
}

fn scan(text: &str) -> Result<Entries<'_>, ProblemError> {
    let mut entries = Entries::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let lead = content.len() - content.trim_start().len();
        let whole = Entry {
            text: content,
            line,
            column: content[..lead].chars().count() + 1,
        };
        let Some(eq) = content.find('=') else {
            return Err(whole.error("expected `key = value`"));
        };
        let key = content[..eq].trim();
        let value = Entry {
            text: &content[eq + 1..],
            line,
            column: content[..eq + 1].chars().count() + 1,
        };
        let slot = match key {
            "name" => &mut entries.name,
            "dim" => &mut entries.dim,
            "field" => &mut entries.field,
            "structure" => &mut entries.structure,
            "ic" => &mut entries.ic,
            "h" => &mut entries.h,
            "integral" => {
                entries.integrals.push(value);
                continue;
            }
            _ => return Err(whole.error(format!("unknown key `{key}`"))),
        };
        if slot.is_some() {
            return Err(whole.error(format!("duplicate `{key}`")));
        }
        *slot = Some(value);
    }
    Ok(entries)
}

/// Parses, reduces and verifies a problem given as text.
pub fn parse_problem(text: &str) -> Result<ProblemSpec, ProblemError> {
    let e = scan(text)?;
    let dim_entry = e.dim.ok_or(ProblemError::Missing("dim"))?;
    let n: usize = dim_entry.number("dimension")?;
    if n == 0 {
        return Err(dim_entry.error("dimension must be positive"));
    }

    let field_entry = e.field.ok_or(ProblemError::Missing("field"))?;
    let mut pieces = field_entry.split(';');
    if pieces.len() > 1 && pieces.last().is_some_and(|p| p.text.trim().is_empty()) {
        pieces.pop();
    }
    if pieces.len() != n {
        return Err(field_entry.error(format!("expected {n} field components, found {}", pieces.len())));
    }
    let field = pieces.iter().map(|p| p.polynomial(n)).collect::<Result<Vec<_>, _>>()?;

    if e.integrals.is_empty() {
        return Err(ProblemError::Missing("integral"));
    }
    let integrals = e
        .integrals
        .iter()
        .map(|p| p.polynomial(n))
        .collect::<Result<Vec<_>, _>>()?;

    let structure = match &e.structure {
        None => SkewStructure::DefaultWedge,
        Some(s) => match s.text.trim() {
            "canonical" => SkewStructure::CanonicalJ,
            "wedge" => SkewStructure::DefaultWedge,
            other => return Err(s.error(format!("unknown structure `{other}` (expected canonical or wedge)"))),
        },
    };

    let x0 = match &e.ic {
        None => vec![0.0; n],
        Some(ic) => {
            let x0 = ic
                .split(',')
                .iter()
                .map(|v| v.number::<f64>("initial value"))
                .collect::<Result<Vec<_>, _>>()?;
            if x0.len() != n {
                return Err(ic.error(format!("expected {n} initial values, found {}", x0.len())));
            }
            x0
        }
    };

    let h = match &e.h {
        None => 0.1,
        Some(h) => {
            let v: f64 = h.number("step size")?;
            if !v.is_finite() || v == 0.0 {
                return Err(h.error("step size must be finite and nonzero"));
            }
            v
        }
    };

    let name = e.name.map_or("custom", |s| s.text.trim()).to_string();
    let params = ReductionParams::new();
    let (_, reduced) = reduce_all(n, &integrals, &params)?;
    let sys = ReducedSystem::new(field, reduced, structure)?;
    ProblemSpec::new(name, sys, params, x0, h)
}

pub fn load_problem(path: impl AsRef<Path>) -> Result<ProblemSpec, ProblemError> {
    parse_problem(&std::fs::read_to_string(path)?)
}
