//! Typed cell values shared by the comparison model, the query engine and
//! table serialization.
//!
//! Numeric content is kept as exact decimals end to end; values such as
//! `0.00572` must survive a CSV round trip bit for bit. Floats only appear
//! inside metric computations.

use rust_decimal::prelude::ToPrimitive;
use rust_decimal::{Decimal, RoundingStrategy};
use std::fmt;

/// Annotation on a reported number: `~15`, `>7.0`, `<2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Qualifier {
    #[default]
    None,
    Approx,
    GreaterThan,
    LessThan,
}

impl Qualifier {
    pub fn prefix(self) -> &'static str {
        match self {
            Qualifier::None => "",
            Qualifier::Approx => "~",
            Qualifier::GreaterThan => ">",
            Qualifier::LessThan => "<",
        }
    }
}

/// A reported number with its qualifier kept as metadata.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QualifiedNumber {
    pub value: Decimal,
    pub qualifier: Qualifier,
}

impl QualifiedNumber {
    pub fn plain(value: Decimal) -> Self {
        QualifiedNumber { value, qualifier: Qualifier::None }
    }
}

impl fmt::Display for QualifiedNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.qualifier.prefix(), self.value)
    }
}

/// Typed cell content of a comparison table.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub enum CellValue {
    Number(QualifiedNumber),
    /// Inclusive numeric range, rendered `lo--hi`.
    Range {
        lo: Decimal,
        hi: Decimal,
    },
    Text(String),
    /// Reference to a shared entity. Ids are identity, labels are data.
    Resource {
        id: String,
        label: String,
    },
    #[default]
    Absent,
}

impl CellValue {
    pub fn number(value: Decimal) -> Self {
        CellValue::Number(QualifiedNumber::plain(value))
    }

    pub fn text(s: impl Into<String>) -> Self {
        CellValue::Text(s.into())
    }

    pub fn is_absent(&self) -> bool {
        matches!(self, CellValue::Absent)
    }

    /// Numeric part used by comparisons and arithmetic: the value of a
    /// number (qualifier ignored) or the lower bound of a range.
    pub fn numeric_part(&self) -> Option<Decimal> {
        match self {
            CellValue::Number(n) => Some(n.value),
            CellValue::Range { lo, .. } => Some(*lo),
            _ => None,
        }
    }

    /// Render the value the way it appears in a table cell.
    pub fn render(&self) -> String {
        match self {
            CellValue::Number(n) => n.to_string(),
            CellValue::Range { lo, hi } => format!("{lo}--{hi}"),
            CellValue::Text(s) => s.clone(),
            CellValue::Resource { label, .. } => label.clone(),
            CellValue::Absent => String::new(),
        }
    }
}

impl fmt::Display for CellValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Parse the text of one cell into a typed value.
///
/// `""` is absent; `lo--hi` is a range; `~x`, `>x`, `<x` are qualified
/// numbers; a plain decimal is a number; anything else stays text (the
/// source tables contain entries like `RT`).
pub fn parse_scalar(text: &str) -> CellValue {
    let t = text.trim();
    if t.is_empty() {
        return CellValue::Absent;
    }
    if let Some((lo, hi)) = split_range(t) {
        if let (Ok(lo), Ok(hi)) = (lo.parse::<Decimal>(), hi.parse::<Decimal>()) {
            if lo <= hi {
                return CellValue::Range { lo, hi };
            }
        }
    }
    let (qualifier, rest) = match t.as_bytes()[0] {
        b'~' => (Qualifier::Approx, &t[1..]),
        b'>' => (Qualifier::GreaterThan, &t[1..]),
        b'<' => (Qualifier::LessThan, &t[1..]),
        _ => (Qualifier::None, t),
    };
    if let Ok(value) = rest.trim().parse::<Decimal>() {
        return CellValue::Number(QualifiedNumber { value, qualifier });
    }
    CellValue::Text(t.to_string())
}

/// Split `lo--hi` at a `--` separator, tolerating a negative lower bound
/// (`-40--20` reads as -40 to 20).
fn split_range(t: &str) -> Option<(&str, &str)> {
    let bytes = t.as_bytes();
    let mut i = 1; // a leading '-' is a sign, never a separator
    while i + 1 < bytes.len() {
        if bytes[i] == b'-' && bytes[i + 1] == b'-' {
            let lo = &t[..i];
            let hi = &t[i + 2..];
            if !lo.is_empty() && !hi.is_empty() {
                return Some((lo, hi));
            }
        }
        i += 1;
    }
    None
}

/// Round half away from zero to exactly `dp` decimal places, keeping
/// trailing zeros (`2.4` at 2 places renders `2.40`).
pub fn round_dp(value: Decimal, dp: u32) -> Decimal {
    let mut r = value.round_dp_with_strategy(dp, RoundingStrategy::MidpointAwayFromZero);
    r.rescale(dp);
    r
}

/// Drop trailing fractional zeros (`14.40` becomes `14.4`).
pub fn normalize(value: Decimal) -> Decimal {
    value.normalize()
}

/// Lossy conversion for metric computation only.
pub fn to_f64(value: Decimal) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}
