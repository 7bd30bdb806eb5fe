//! Rendering bound results as tables or as a machine-readable document.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{BoundResult, BoundStatus, Method};
use crate::param::{AssumptionSet, CausalParameter};
use crate::symbolic::SymbolicExpr;
use crate::Rational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReportError {
    #[error("unknown output format `{0}`; use `table` or `machine`")]
    UnknownFormat(String),
    #[error("machine document: {0}")]
    Machine(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Table,
    Machine,
}

impl FromStr for Format {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "table" | "text" => Ok(Format::Table),
            "machine" | "json" => Ok(Format::Machine),
            other => Err(ReportError::UnknownFormat(other.to_string())),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Table => "table",
            Format::Machine => "machine",
        })
    }
}

/// Three decimals, halves rounded away from zero. Never prints `-0.000`.
pub fn round3(x: &Rational) -> String {
    let scaled = x * Rational::from_integer(BigInt::from(1000));
    let (q, r) = scaled.numer().div_rem(scaled.denom());
    // |r| / denom >= 1/2  <=>  2|r| >= denom
    let mut units = q;
    if BigInt::from(2) * r.abs() >= *scaled.denom() {
        units += if scaled.is_negative() { -1 } else { 1 };
    }
    let negative = units.is_negative();
    let digits = units.abs().to_string();
    let padded = format!("{digits:0>4}");
    let (int_part, frac) = padded.split_at(padded.len() - 3);
    let sign = if negative && !units.is_zero() { "-" } else { "" };
    format!("{sign}{int_part}.{frac}")
}

fn cell_text(r: &BoundResult) -> String {
    match (r.status, &r.lower, &r.upper) {
        (BoundStatus::Infeasible, _, _) => "infeasible".to_string(),
        (status, Some(l), Some(u)) => {
            let interval = format!("[{}, {}]", round3(l), round3(u));
            if status == BoundStatus::Crossed {
                format!("crossed {interval}")
            } else {
                interval
            }
        }
        _ => "-".to_string(),
    }
}

/// Rows are parameters, columns assumption sets, in sorted order. Columns
/// are labelled with every assumption in force, e.g. `A1-5,7`.
pub fn render_table(results: &[BoundResult]) -> String {
    let mut params: Vec<CausalParameter> = results.iter().map(|r| r.parameter).collect();
    params.sort();
    params.dedup();
    let mut sets: Vec<AssumptionSet> = results.iter().map(|r| r.assumptions).collect();
    sets.sort();
    sets.dedup();
    let mut methods: Vec<Method> = results.iter().map(|r| r.method).collect();
    methods.sort();
    methods.dedup();
    let tagged = methods.len() > 1;

    let mut cells: BTreeMap<(CausalParameter, AssumptionSet), Vec<String>> = BTreeMap::new();
    for r in results {
        let text = if tagged { format!("{}: {}", r.method, cell_text(r)) } else { cell_text(r) };
        cells.entry((r.parameter, r.assumptions)).or_default().push(text);
    }

    let mut header = vec!["parameter".to_string()];
    header.extend(sets.iter().map(|s| s.range_label()));
    let mut rows = vec![header];
    for p in &params {
        let mut row = vec![p.to_string()];
        for s in &sets {
            row.push(cells.get(&(*p, *s)).map_or_else(String::new, |v| v.join("; ")));
        }
        rows.push(row);
    }
    let widths: Vec<usize> =
        (0..rows[0].len()).map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for row in &rows {
        let line: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// One result in the machine document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MachineRecord {
    pub parameter: String,
    pub arm: Option<u8>,
    pub assumptions: String,
    pub method: Method,
    pub status: BoundStatus,
    /// Exact fraction, e.g. `-159/200`.
    pub lower: Option<String>,
    pub upper: Option<String>,
    pub lower_3dp: Option<String>,
    pub upper_3dp: Option<String>,
    pub active_lower_entry: Option<String>,
    pub active_upper_entry: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MachineDocument {
    pub results: Vec<MachineRecord>,
}

impl From<&BoundResult> for MachineRecord {
    fn from(r: &BoundResult) -> Self {
        MachineRecord {
            parameter: r.parameter.to_string(),
            arm: r.parameter.arm().map(|a| a.bit()),
            assumptions: r.assumptions.to_string(),
            method: r.method,
            status: r.status,
            lower: r.lower.as_ref().map(ToString::to_string),
            upper: r.upper.as_ref().map(ToString::to_string),
            lower_3dp: r.lower.as_ref().map(round3),
            upper_3dp: r.upper.as_ref().map(round3),
            active_lower_entry: r.active_lower.as_ref().map(ToString::to_string),
            active_upper_entry: r.active_upper.as_ref().map(ToString::to_string),
        }
    }
}

impl TryFrom<&MachineRecord> for BoundResult {
    type Error = ReportError;

    fn try_from(m: &MachineRecord) -> Result<Self, Self::Error> {
        let bad = |what: &str, e: String| ReportError::Machine(format!("{what}: {e}"));
        let rational = |v: &Option<String>, what: &str| -> Result<Option<Rational>, ReportError> {
            v.as_deref().map(|s| s.parse::<Rational>().map_err(|e| bad(what, e.to_string()))).transpose()
        };
        let expr = |v: &Option<String>, what: &str| -> Result<Option<SymbolicExpr>, ReportError> {
            v.as_deref().map(|s| s.parse::<SymbolicExpr>().map_err(|e| bad(what, e.to_string()))).transpose()
        };
        Ok(BoundResult {
            parameter: m.parameter.parse().map_err(|e| bad("parameter", format!("{e}")))?,
            assumptions: m.assumptions.parse().map_err(|e| bad("assumptions", format!("{e}")))?,
            method: m.method,
            status: m.status,
            lower: rational(&m.lower, "lower")?,
            upper: rational(&m.upper, "upper")?,
            active_lower: expr(&m.active_lower_entry, "active_lower_entry")?,
            active_upper: expr(&m.active_upper_entry, "active_upper_entry")?,
        })
    }
}

pub fn render_machine(results: &[BoundResult]) -> String {
    let doc = MachineDocument { results: results.iter().map(MachineRecord::from).collect() };
    let mut text = serde_json::to_string_pretty(&doc).expect("machine records serialize");
    text.push('\n');
    text
}

pub fn parse_machine(text: &str) -> Result<Vec<BoundResult>, ReportError> {
    let doc: MachineDocument = serde_json::from_str(text).map_err(|e| ReportError::Machine(e.to_string()))?;
    doc.results.iter().map(BoundResult::try_from).collect()
}

pub fn render(results: &[BoundResult], format: Format) -> String {
    match format {
        Format::Table => render_table(results),
        Format::Machine => render_machine(results),
    }
}
