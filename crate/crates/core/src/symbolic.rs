//! Integer-coefficient linear expressions in the observable cells, and the
//! max/min bounds built from them.
//!
//! Two notions of equality are used:
//!
//! * syntactic: [`SymbolicExpr::canonicalize`] drops zero terms and orders
//!   the rest by `(y, m, a, z)`; two expressions are equal iff their canonical
//!   forms are;
//! * functional: expressions that differ by a multiple of an arm identity
//!   `sum_cells(z) - 1 = 0` agree on every valid distribution.
//!   [`SymbolicExpr::reduced`] picks one representative per class by
//!   eliminating the arm's last cell (`p_{111.z}` or `p_{11.z}`).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::observed::{CellLabel, CellSource};
use crate::param::Direction;
use crate::Rational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SymbolicError {
    #[error("cannot parse expression `{text}`: {reason}")]
    Parse { text: String, reason: String },
    #[error("no value for {0} in the supplied data")]
    MissingCell(CellLabel),
    #[error("non-integer coefficient {0}")]
    NonInteger(String),
    #[error("coefficient overflow")]
    Overflow,
    #[error("a bound needs at least one entry")]
    Empty,
}

/// `constant + sum coefficient * cell`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct SymbolicExpr {
    pub constant: i64,
    pub coefficients: BTreeMap<CellLabel, i64>,
}

impl SymbolicExpr {
    pub fn constant(value: i64) -> Self {
        SymbolicExpr { constant: value, coefficients: BTreeMap::new() }
    }

    pub fn from_terms(constant: i64, terms: impl IntoIterator<Item = (CellLabel, i64)>) -> Self {
        let mut expr = SymbolicExpr::constant(constant);
        for (label, coef) in terms {
            *expr.coefficients.entry(label).or_insert(0) += coef;
        }
        expr.canonicalize()
    }

    /// Builds an expression from rational coefficients, clearing nothing: every
    /// coefficient must already be integral.
    pub fn from_rationals(
        constant: &Rational,
        terms: impl IntoIterator<Item = (CellLabel, Rational)>,
    ) -> Result<Self, SymbolicError> {
        let as_int = |r: &Rational| -> Result<i64, SymbolicError> {
            if !r.is_integer() {
                return Err(SymbolicError::NonInteger(r.to_string()));
            }
            i64::try_from(r.to_integer()).map_err(|_| SymbolicError::Overflow)
        };
        let mut expr = SymbolicExpr::constant(as_int(constant)?);
        for (label, coef) in terms {
            *expr.coefficients.entry(label).or_insert(0) += as_int(&coef)?;
        }
        Ok(expr.canonicalize())
    }

    /// Drops zero coefficients. Term order is fixed by the map.
    pub fn canonicalize(mut self) -> Self {
        self.coefficients.retain(|_, c| *c != 0);
        self
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0 && self.coefficients.values().all(|c| *c == 0)
    }

    pub fn term_count(&self) -> usize {
        self.coefficients.values().filter(|c| **c != 0).count()
    }

    /// True when every term is a complier cell (constants count as either).
    pub fn is_local(&self) -> bool {
        self.coefficients.keys().all(|l| l.is_local())
    }

    pub fn negate(&self) -> Self {
        SymbolicExpr {
            constant: -self.constant,
            coefficients: self.coefficients.iter().map(|(l, c)| (*l, -c)).collect(),
        }
    }

    pub fn plus(&self, other: &SymbolicExpr) -> Self {
        let mut out = self.clone();
        out.constant += other.constant;
        for (l, c) in &other.coefficients {
            *out.coefficients.entry(*l).or_insert(0) += c;
        }
        out.canonicalize()
    }

    pub fn minus(&self, other: &SymbolicExpr) -> Self {
        self.plus(&other.negate())
    }

    /// Adds `k * (sum of the arm's cells - 1)`, which leaves the value on valid
    /// data unchanged.
    pub fn shift_by_arm_identity(&self, representative: CellLabel, k: i64) -> Self {
        let mut out = self.clone();
        out.constant -= k;
        for l in representative.arm_siblings() {
            *out.coefficients.entry(l).or_insert(0) += k;
        }
        out.canonicalize()
    }

    /// Representative of the functional equivalence class: each arm's pivot
    /// cell is replaced by `1 - (other cells of that arm)`.
    pub fn reduced(&self) -> Self {
        let mut out = self.clone();
        let pivots: Vec<(CellLabel, i64)> =
            self.coefficients.iter().filter(|(l, c)| l.is_pivot() && **c != 0).map(|(l, c)| (*l, *c)).collect();
        for (pivot, coef) in pivots {
            out = out.shift_by_arm_identity(pivot, -coef);
        }
        out
    }

    pub fn equivalent(&self, other: &SymbolicExpr) -> bool {
        self.reduced() == other.reduced()
    }

    /// Sparsest member of the equivalence class reachable by shifting each arm
    /// identity at most twice; ties prefer a smaller constant, then the
    /// canonical ordering.
    pub fn simplified(&self) -> Self {
        let base = self.reduced();
        let mut arm_reps: Vec<CellLabel> = Vec::new();
        for l in base.coefficients.keys() {
            if !arm_reps.iter().any(|r| r.is_local() == l.is_local() && r.arm() == l.arm()) {
                arm_reps.push(*l);
            }
        }
        let mut best = base.clone();
        let key = |e: &SymbolicExpr| (e.term_count(), e.constant.abs(), e.clone());
        let shifts = [-2i64, -1, 0, 1, 2];
        let mut candidates = vec![base];
        for rep in arm_reps {
            candidates = candidates
                .iter()
                .flat_map(|e| shifts.iter().map(move |k| e.shift_by_arm_identity(rep, *k)))
                .collect();
        }
        for cand in candidates {
            if key(&cand) < key(&best) {
                best = cand;
            }
        }
        best
    }

    pub fn evaluate(&self, data: &impl CellSource) -> Result<Rational, SymbolicError> {
        let mut total = Rational::from_integer(self.constant.into());
        for (label, coef) in &self.coefficients {
            if *coef == 0 {
                continue;
            }
            let v = data.cell_value(*label).ok_or(SymbolicError::MissingCell(*label))?;
            total += v * Rational::from_integer((*coef).into());
        }
        Ok(total)
    }
}

impl fmt::Display for SymbolicExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut write_term = |f: &mut fmt::Formatter<'_>, coef: i64, body: Option<String>| -> fmt::Result {
            let sign = if coef < 0 { "-" } else { "+" };
            let mag = coef.unsigned_abs();
            let text = match body {
                Some(b) if mag == 1 => b,
                Some(b) => format!("{mag}{b}"),
                None => mag.to_string(),
            };
            if first {
                first = false;
                if coef < 0 {
                    write!(f, "-{text}")
                } else {
                    f.write_str(&text)
                }
            } else {
                write!(f, " {sign} {text}")
            }
        };
        for (label, coef) in &self.coefficients {
            if *coef != 0 {
                write_term(f, *coef, Some(label.to_string()))?;
            }
        }
        if self.constant != 0 {
            write_term(f, self.constant, None)?;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl FromStr for SymbolicExpr {
    type Err = SymbolicError;

    /// Parses text such as `p_{101.1} + 2p_{111.1} - 1` or `0·p_{000.0} + 0`.
    /// Accepts `−` for minus and `*`/`·` between coefficient and cell.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let fail = |reason: &str| SymbolicError::Parse { text: s.to_string(), reason: reason.to_string() };
        let cleaned: String = s.replace('−', "-").replace(['·', '*'], "");
        let cleaned = cleaned.trim();
        if cleaned.is_empty() {
            return Err(fail("empty"));
        }
        let mut expr = SymbolicExpr::default();
        let mut rest = cleaned;
        let mut expect_sign = false;
        while !rest.is_empty() {
            rest = rest.trim_start();
            let mut sign = 1i64;
            if let Some(r) = rest.strip_prefix('+') {
                rest = r.trim_start();
            } else if let Some(r) = rest.strip_prefix('-') {
                sign = -1;
                rest = r.trim_start();
            } else if expect_sign {
                return Err(fail("expected + or - between terms"));
            }
            let digits = rest.chars().take_while(char::is_ascii_digit).count();
            let coef: Option<i64> = if digits > 0 {
                Some(rest[..digits].parse().map_err(|_| fail("coefficient too large"))?)
            } else {
                None
            };
            rest = &rest[digits..];
            if rest.starts_with("p_") {
                let end = rest.find('}').ok_or_else(|| fail("unterminated cell label"))?;
                let label: CellLabel = rest[..=end].parse().map_err(|_| fail("bad cell label"))?;
                *expr.coefficients.entry(label).or_insert(0) += sign * coef.unwrap_or(1);
                rest = &rest[end + 1..];
            } else {
                let c = coef.ok_or_else(|| fail("expected a number or a cell"))?;
                expr.constant += sign * c;
            }
            expect_sign = true;
        }
        Ok(expr.canonicalize())
    }
}

/// Lower bounds take the max over entries; upper bounds the min.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolicBound {
    pub direction: Direction,
    pub entries: Vec<SymbolicExpr>,
}

impl SymbolicBound {
    pub fn new(direction: Direction, entries: Vec<SymbolicExpr>) -> Self {
        SymbolicBound { direction, entries }
    }

    /// Value of the bound and the index of the entry attaining it (the first
    /// one on ties).
    pub fn evaluate(&self, data: &impl CellSource) -> Result<(Rational, usize), SymbolicError> {
        let mut best: Option<(Rational, usize)> = None;
        for (i, e) in self.entries.iter().enumerate() {
            let v = e.evaluate(data)?;
            let better = match &best {
                None => true,
                Some((b, _)) => match self.direction {
                    Direction::Lower => v > *b,
                    Direction::Upper => v < *b,
                },
            };
            if better {
                best = Some((v, i));
            }
        }
        best.ok_or(SymbolicError::Empty)
    }

    /// Reduced forms of all entries, for order-insensitive set comparison.
    pub fn reduced_set(&self) -> std::collections::BTreeSet<SymbolicExpr> {
        self.entries.iter().map(SymbolicExpr::reduced).collect()
    }

    pub fn same_entries(&self, other: &SymbolicBound) -> bool {
        self.direction == other.direction && self.reduced_set() == other.reduced_set()
    }
}

impl fmt::Display for SymbolicBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.direction {
            Direction::Lower => "max",
            Direction::Upper => "min",
        };
        let parts: Vec<String> = self.entries.iter().map(ToString::to_string).collect();
        write!(f, "{op}{{{}}}", parts.join("; "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observed::{uniform_observed, LocalCell, ObservedCell};
    use crate::ratio;

    fn e(s: &str) -> SymbolicExpr {
        s.parse().unwrap()
    }

    #[test]
    fn canonical_text_orders_terms() {
        assert_eq!(e("p_{111.1} + p_{101.1} − 1").to_string(), "p_{101.1} + p_{111.1} - 1");
        assert_eq!(e("0·p_{000.0} + 0").to_string(), "0");
        assert_eq!(e("-1 + p_{000.1}").to_string(), "p_{000.1} - 1");
        assert_eq!(
            e("p_{000.0} + p_{111.0} + 2p_{011.0} + p_{101.1} - p_{000.1} - p_{011.1} - 1").to_string(),
            "p_{000.0} - p_{000.1} + 2p_{011.0} - p_{011.1} + p_{101.1} + p_{111.0} - 1"
        );
        assert_eq!(e("- p_{00.1} - p_{01.1}").to_string(), "-p_{00.1} - p_{01.1}");
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!("".parse::<SymbolicExpr>().is_err());
        assert!("p_{10.1} p_{11.1}".parse::<SymbolicExpr>().is_err());
        assert!("p_{10.1} + x".parse::<SymbolicExpr>().is_err());
        assert!("p_{10.1 + 1".parse::<SymbolicExpr>().is_err());
    }

    #[test]
    fn reduction_identifies_equivalent_forms() {
        let a = e("-p_{001.1} - p_{011.1} + 1");
        let b = e("p_{000.1} + p_{010.1} + p_{100.1} + p_{101.1} + p_{110.1} + p_{111.1}");
        assert!(a.equivalent(&b));
        assert_ne!(a, b);
        assert!(!a.equivalent(&e("p_{000.1}")));
        // local family
        let c = e("p_{11.1}");
        let d = e("-p_{00.1} - p_{01.1} - p_{10.1} + 1");
        assert!(c.equivalent(&d));
        assert!(c.reduced().coefficients.keys().all(|l| !l.is_pivot()));
    }

    #[test]
    fn simplified_prefers_sparse_forms() {
        let b = e("p_{000.1} + p_{010.1} + p_{100.1} + p_{101.1} + p_{110.1} + p_{111.1}");
        assert_eq!(b.simplified().to_string(), "-p_{001.1} - p_{011.1} + 1");
        let c = e("-p_{00.1} - p_{01.1} - p_{10.1} + 1");
        assert_eq!(c.simplified().to_string(), "p_{11.1}");
    }

    #[test]
    fn evaluation_and_bounds() {
        let d = uniform_observed();
        assert_eq!(e("p_{101.1} + p_{111.1} - 1").evaluate(&d).unwrap(), ratio(-3, 4));
        let b = SymbolicBound::new(
            Direction::Lower,
            vec![e("p_{101.1} + p_{111.1} - 1"), e("-p_{000.1}"), e("p_{000.0} - 1")],
        );
        let (v, i) = b.evaluate(&d).unwrap();
        assert_eq!((v, i), (ratio(-1, 8), 1));
        assert!(matches!(
            e("p_{10.1}").evaluate(&d),
            Err(SymbolicError::MissingCell(CellLabel::Local(LocalCell { y: 1, m: 0, z: 1 })))
        ));
    }

    #[test]
    fn non_integer_coefficients_are_rejected() {
        let label = CellLabel::Observed(ObservedCell::new(0, 0, 0, 0));
        assert!(SymbolicExpr::from_rationals(&ratio(1, 1), [(label, ratio(1, 2))]).is_err());
        assert_eq!(
            SymbolicExpr::from_rationals(&ratio(-1, 1), [(label, ratio(2, 1))]).unwrap().to_string(),
            "2p_{000.0} - 1"
        );
    }
}
