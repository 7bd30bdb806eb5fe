//! Transcribed bound formulas, one file per parameter and assumption set.
//!
//! Each line is one entry:
//!
//! ```text
//! <lower|upper> <PARAM(arm)> <a4,a5,...> <constant> [<cell>=<coefficient> ...]
//! ```

use crate::observed::CellLabel;
use crate::param::{AssumptionSet, CausalParameter, Direction};
use crate::symbolic::SymbolicExpr;

pub const FILES: &[(&str, &str)] = &[
    ("acme0_a4.txt", include_str!("../../golden/acme0_a4.txt")),
    ("acme0_a4a5.txt", include_str!("../../golden/acme0_a4a5.txt")),
    ("acme0_a4a5a6.txt", include_str!("../../golden/acme0_a4a5a6.txt")),
    ("acme0_a4a5a6a7.txt", include_str!("../../golden/acme0_a4a5a6a7.txt")),
    ("acme0_a4a5a7.txt", include_str!("../../golden/acme0_a4a5a7.txt")),
    ("acme0_a4a6.txt", include_str!("../../golden/acme0_a4a6.txt")),
    ("acme0_a4a7.txt", include_str!("../../golden/acme0_a4a7.txt")),
    ("acme1_a4.txt", include_str!("../../golden/acme1_a4.txt")),
    ("acme1_a4a5.txt", include_str!("../../golden/acme1_a4a5.txt")),
    ("acme1_a4a5a6.txt", include_str!("../../golden/acme1_a4a5a6.txt")),
    ("acme1_a4a5a6a7.txt", include_str!("../../golden/acme1_a4a5a6a7.txt")),
    ("acme1_a4a5a7.txt", include_str!("../../golden/acme1_a4a5a7.txt")),
    ("acme1_a4a6.txt", include_str!("../../golden/acme1_a4a6.txt")),
    ("acme1_a4a7.txt", include_str!("../../golden/acme1_a4a7.txt")),
    ("lacme0_a4.txt", include_str!("../../golden/lacme0_a4.txt")),
    ("lacme0_a4a5.txt", include_str!("../../golden/lacme0_a4a5.txt")),
    ("lacme0_a4a5a6.txt", include_str!("../../golden/lacme0_a4a5a6.txt")),
    ("lacme0_a4a5a6a7.txt", include_str!("../../golden/lacme0_a4a5a6a7.txt")),
    ("lacme0_a4a5a7.txt", include_str!("../../golden/lacme0_a4a5a7.txt")),
    ("lacme0_a4a6.txt", include_str!("../../golden/lacme0_a4a6.txt")),
    ("lacme0_a4a7.txt", include_str!("../../golden/lacme0_a4a7.txt")),
    ("lacme1_a4.txt", include_str!("../../golden/lacme1_a4.txt")),
    ("lacme1_a4a5.txt", include_str!("../../golden/lacme1_a4a5.txt")),
    ("lacme1_a4a5a6.txt", include_str!("../../golden/lacme1_a4a5a6.txt")),
    ("lacme1_a4a5a6a7.txt", include_str!("../../golden/lacme1_a4a5a6a7.txt")),
    ("lacme1_a4a5a7.txt", include_str!("../../golden/lacme1_a4a5a7.txt")),
    ("lacme1_a4a6.txt", include_str!("../../golden/lacme1_a4a6.txt")),
    ("lacme1_a4a7.txt", include_str!("../../golden/lacme1_a4a7.txt")),
    ("nde0_a4.txt", include_str!("../../golden/nde0_a4.txt")),
    ("nde0_a4a5.txt", include_str!("../../golden/nde0_a4a5.txt")),
    ("nde0_a4a5a6.txt", include_str!("../../golden/nde0_a4a5a6.txt")),
    ("nde0_a4a5a6a7.txt", include_str!("../../golden/nde0_a4a5a6a7.txt")),
    ("nde0_a4a5a7.txt", include_str!("../../golden/nde0_a4a5a7.txt")),
    ("nde0_a4a6.txt", include_str!("../../golden/nde0_a4a6.txt")),
    ("nde0_a4a7.txt", include_str!("../../golden/nde0_a4a7.txt")),
    ("nde1_a4.txt", include_str!("../../golden/nde1_a4.txt")),
    ("nde1_a4a5.txt", include_str!("../../golden/nde1_a4a5.txt")),
    ("nde1_a4a5a6.txt", include_str!("../../golden/nde1_a4a5a6.txt")),
    ("nde1_a4a5a6a7.txt", include_str!("../../golden/nde1_a4a5a6a7.txt")),
    ("nde1_a4a5a7.txt", include_str!("../../golden/nde1_a4a5a7.txt")),
    ("nde1_a4a6.txt", include_str!("../../golden/nde1_a4a6.txt")),
    ("nde1_a4a7.txt", include_str!("../../golden/nde1_a4a7.txt")),
];

/// One parsed golden line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldenEntry {
    pub direction: Direction,
    pub parameter: CausalParameter,
    pub assumptions: AssumptionSet,
    pub expr: SymbolicExpr,
}

pub fn parse_line(line: &str) -> Result<GoldenEntry, String> {
    let mut fields = line.split_whitespace();
    let mut next = |what: &str| fields.next().ok_or_else(|| format!("missing {what} in `{line}`"));
    let direction: Direction = next("direction")?.parse().map_err(|e| format!("{e}"))?;
    let parameter: CausalParameter = next("parameter")?.parse().map_err(|e| format!("{e}"))?;
    let assumptions: AssumptionSet = next("assumptions")?.parse().map_err(|e| format!("{e}"))?;
    let constant: i64 = next("constant")?.parse().map_err(|e| format!("bad constant in `{line}`: {e}"))?;
    let mut terms = Vec::new();
    for field in fields {
        let (cell, coef) = field.split_once('=').ok_or_else(|| format!("bad term `{field}`"))?;
        let cell: CellLabel = cell.parse().map_err(|e| format!("{e}"))?;
        let coef: i64 = coef.parse().map_err(|e| format!("bad coefficient `{field}`: {e}"))?;
        terms.push((cell, coef));
    }
    Ok(GoldenEntry { direction, parameter, assumptions, expr: SymbolicExpr::from_terms(constant, terms) })
}

pub fn render_line(entry: &GoldenEntry) -> String {
    let mut out = format!("{} {} {} {}", entry.direction, entry.parameter, entry.assumptions, entry.expr.constant);
    for (cell, coef) in &entry.expr.coefficients {
        out.push_str(&format!(" {cell}={coef}"));
    }
    out
}

pub fn parse_file(text: &str) -> Result<Vec<GoldenEntry>, String> {
    text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(parse_line).collect()
}

pub const ERRATA: &str = include_str!("../../golden/errata.txt");

/// A printed entry and the entry that replaces it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Erratum {
    pub printed: GoldenEntry,
    pub corrected: GoldenEntry,
}

/// Reads `- <line>` / `+ <line>` pairs.
pub fn parse_errata(text: &str) -> Result<Vec<Erratum>, String> {
    let lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).collect();
    if !lines.len().is_multiple_of(2) {
        return Err("errata lines must come in -/+ pairs".into());
    }
    lines
        .chunks(2)
        .map(|pair| {
            let old = pair[0].strip_prefix("- ").ok_or_else(|| format!("expected `- ` in `{}`", pair[0]))?;
            let new = pair[1].strip_prefix("+ ").ok_or_else(|| format!("expected `+ ` in `{}`", pair[1]))?;
            let printed = parse_line(old)?;
            let corrected = parse_line(new)?;
            if (printed.direction, printed.parameter, printed.assumptions)
                != (corrected.direction, corrected.parameter, corrected.assumptions)
            {
                return Err(format!("erratum changes its display: `{old}`"));
            }
            Ok(Erratum { printed, corrected })
        })
        .collect()
}
