//! Count tables and plug-in cell probabilities.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::observed::{ObservedCell, ObservedDistribution};
use crate::Rational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CountError {
    #[error("malformed header: expected `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error("line {line}: {message}")]
    Record { line: u64, message: String },
    #[error("line {line}: duplicate row for z={z}, a={a}, m={m}, y={y}")]
    Duplicate { line: u64, z: u8, a: u8, m: u8, y: u8 },
    #[error("arm z={0} has no observations")]
    EmptyArm(u8),
    #[error("csv: {0}")]
    Csv(String),
}

/// Cell counts `n[y][m][a][z]`, indexed like [`ObservedCell`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CountTable {
    counts: [u64; ObservedCell::COUNT],
}

impl CountTable {
    pub fn new(counts: [u64; ObservedCell::COUNT]) -> Self {
        CountTable { counts }
    }

    pub fn get(&self, cell: ObservedCell) -> u64 {
        self.counts[cell.index()]
    }

    pub fn set(&mut self, cell: ObservedCell, n: u64) {
        self.counts[cell.index()] = n;
    }

    pub fn arm_total(&self, z: u8) -> u64 {
        ObservedCell::arm(z).map(|c| self.get(c)).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Aggregated form, one row per cell including zeros.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("z,a,m,y,count\n");
        for z in 0..2 {
            for a in 0..2 {
                for m in 0..2 {
                    for y in 0..2 {
                        let n = self.get(ObservedCell::new(y, m, a, z));
                        out.push_str(&format!("{z},{a},{m},{y},{n}\n"));
                    }
                }
            }
        }
        out
    }

    /// Subject-level form: each cell repeated `count` times.
    pub fn to_long_csv(&self) -> String {
        let mut out = String::from("z,a,m,y\n");
        for cell in ObservedCell::all() {
            for _ in 0..self.get(cell) {
                out.push_str(&format!("{},{},{},{}\n", cell.z, cell.a, cell.m, cell.y));
            }
        }
        out
    }
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(text.as_bytes())
}

fn check_header(rdr: &mut csv::Reader<&[u8]>, expected: &[&str]) -> Result<(), CountError> {
    let headers = rdr.headers().map_err(|e| CountError::Csv(e.to_string()))?;
    let found: Vec<String> = headers.iter().map(str::to_ascii_lowercase).collect();
    if found != expected {
        return Err(CountError::Header { expected: expected.join(","), found: found.join(",") });
    }
    Ok(())
}

fn line_of(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, csv::Position::line)
}

fn binary(record: &csv::StringRecord, i: usize, name: &str) -> Result<u8, CountError> {
    let line = line_of(record);
    let raw = record.get(i).ok_or_else(|| CountError::Record { line, message: format!("missing `{name}`") })?;
    match raw {
        "0" => Ok(0),
        "1" => Ok(1),
        other => Err(CountError::Record { line, message: format!("`{name}` must be 0 or 1, got `{other}`") }),
    }
}

fn keys(record: &csv::StringRecord) -> Result<ObservedCell, CountError> {
    let z = binary(record, 0, "z")?;
    let a = binary(record, 1, "a")?;
    let m = binary(record, 2, "m")?;
    let y = binary(record, 3, "y")?;
    Ok(ObservedCell::new(y, m, a, z))
}

fn check_arms(table: &CountTable) -> Result<(), CountError> {
    for z in 0..2 {
        if table.arm_total(z) == 0 {
            return Err(CountError::EmptyArm(z));
        }
    }
    Ok(())
}

/// Aggregated counts with header `z,a,m,y,count`. Missing cells are zero.
pub fn parse_counts(text: &str) -> Result<CountTable, CountError> {
    let mut rdr = reader(text);
    check_header(&mut rdr, &["z", "a", "m", "y", "count"])?;
    let mut table = CountTable::default();
    let mut seen = BTreeSet::new();
    for record in rdr.records() {
        let record = record.map_err(|e| CountError::Csv(e.to_string()))?;
        let line = line_of(&record);
        let cell = keys(&record)?;
        let raw = record.get(4).unwrap_or("");
        let n: u64 = raw
            .parse()
            .map_err(|_| CountError::Record { line, message: format!("count must be a nonnegative integer, got `{raw}`") })?;
        if !seen.insert(cell) {
            return Err(CountError::Duplicate { line, z: cell.z, a: cell.a, m: cell.m, y: cell.y });
        }
        table.set(cell, n);
    }
    check_arms(&table)?;
    Ok(table)
}

/// One subject per row with header `z,a,m,y`.
pub fn parse_long(text: &str) -> Result<CountTable, CountError> {
    let mut rdr = reader(text);
    check_header(&mut rdr, &["z", "a", "m", "y"])?;
    let mut table = CountTable::default();
    for record in rdr.records() {
        let record = record.map_err(|e| CountError::Csv(e.to_string()))?;
        let cell = keys(&record)?;
        table.set(cell, table.get(cell) + 1);
    }
    check_arms(&table)?;
    Ok(table)
}

/// Either format, chosen by the header.
pub fn parse_any(text: &str) -> Result<CountTable, CountError> {
    let first = text.lines().map(str::trim).find(|l| !l.is_empty() && !l.starts_with('#')).unwrap_or("");
    if first.to_ascii_lowercase().replace(' ', "").ends_with(",count") {
        parse_counts(text)
    } else {
        parse_long(text)
    }
}

/// `p_{yma.z} = n_{yma.z} / n_z`, exactly.
pub fn estimate(counts: &CountTable) -> Result<ObservedDistribution, CountError> {
    check_arms(counts)?;
    let totals = [counts.arm_total(0), counts.arm_total(1)];
    let dist = ObservedDistribution::from_fn(|c| {
        Rational::new(counts.get(c).into(), totals[usize::from(c.z)].into())
    });
    Ok(dist.expect("count ratios form a distribution"))
}
