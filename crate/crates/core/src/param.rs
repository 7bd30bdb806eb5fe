//! Causal parameters, treatment arms and monotonicity assumption sets.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParamError {
    #[error("unknown causal parameter `{0}`")]
    UnknownParameter(String),
    #[error("arm must be 0 or 1, got {0}")]
    BadArm(u8),
    #[error("unknown assumption flag `{0}` (expected a4, a5, a6, a7 or a long alias)")]
    UnknownAssumption(String),
    #[error("unknown bound direction `{0}`")]
    UnknownDirection(String),
}

/// Treatment level at which a mediation contrast is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Arm {
    Zero,
    One,
}

impl Arm {
    pub const BOTH: [Arm; 2] = [Arm::Zero, Arm::One];

    pub fn from_bit(bit: u8) -> Result<Self, ParamError> {
        match bit {
            0 => Ok(Arm::Zero),
            1 => Ok(Arm::One),
            other => Err(ParamError::BadArm(other)),
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            Arm::Zero => 0,
            Arm::One => 1,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Arm::Zero => Arm::One,
            Arm::One => Arm::Zero,
        }
    }
}

/// A (local) mediation or total effect.
///
/// The local variants are defined on compliers (`A(1) = 1, A(0) = 0`) and only
/// make sense when monotone compliance is assumed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CausalParameter {
    /// Average causal mediation effect `E[Y(a, M(1)) - Y(a, M(0))]`.
    Acme(Arm),
    /// Natural direct effect `E[Y(1, M(a)) - Y(0, M(a))]`.
    Nde(Arm),
    /// Complier average causal mediation effect.
    Lacme(Arm),
    /// Complier natural direct effect.
    Lnde(Arm),
    /// Average treatment effect `E[Y(1, M(1)) - Y(0, M(0))]`.
    Ate,
    /// Complier average treatment effect.
    Late,
}

impl CausalParameter {
    pub const POPULATION: [CausalParameter; 4] = [
        CausalParameter::Acme(Arm::One),
        CausalParameter::Acme(Arm::Zero),
        CausalParameter::Nde(Arm::One),
        CausalParameter::Nde(Arm::Zero),
    ];

    pub const LOCAL: [CausalParameter; 4] = [
        CausalParameter::Lacme(Arm::One),
        CausalParameter::Lacme(Arm::Zero),
        CausalParameter::Lnde(Arm::One),
        CausalParameter::Lnde(Arm::Zero),
    ];

    pub fn is_local(self) -> bool {
        matches!(
            self,
            CausalParameter::Lacme(_) | CausalParameter::Lnde(_) | CausalParameter::Late
        )
    }

    pub fn arm(self) -> Option<Arm> {
        match self {
            CausalParameter::Acme(a)
            | CausalParameter::Nde(a)
            | CausalParameter::Lacme(a)
            | CausalParameter::Lnde(a) => Some(a),
            CausalParameter::Ate | CausalParameter::Late => None,
        }
    }

    /// Short kind name without the arm, e.g. `ACME`.
    pub fn kind_name(self) -> &'static str {
        match self {
            CausalParameter::Acme(_) => "ACME",
            CausalParameter::Nde(_) => "NDE",
            CausalParameter::Lacme(_) => "LACME",
            CausalParameter::Lnde(_) => "LNDE",
            CausalParameter::Ate => "ATE",
            CausalParameter::Late => "LATE",
        }
    }
}

impl fmt::Display for CausalParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.arm() {
            Some(arm) => write!(f, "{}({})", self.kind_name(), arm.bit()),
            None => f.write_str(self.kind_name()),
        }
    }
}

impl FromStr for CausalParameter {
    type Err = ParamError;

    /// Accepts `ACME(1)`, `acme1`, `acme:1`, `ate`, ... (case-insensitive).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .chars()
            .filter(|c| !matches!(c, '(' | ')' | ':' | '_' | ' '))
            .collect::<String>()
            .to_ascii_lowercase();
        let unknown = || ParamError::UnknownParameter(s.to_string());
        match norm.as_str() {
            "ate" => return Ok(CausalParameter::Ate),
            "late" => return Ok(CausalParameter::Late),
            _ => {}
        }
        let (kind, arm) = norm.split_at(norm.len().checked_sub(1).ok_or_else(unknown)?);
        let arm = match arm {
            "0" => Arm::Zero,
            "1" => Arm::One,
            _ => return Err(unknown()),
        };
        match kind {
            "acme" => Ok(CausalParameter::Acme(arm)),
            "nde" => Ok(CausalParameter::Nde(arm)),
            "lacme" => Ok(CausalParameter::Lacme(arm)),
            "lnde" => Ok(CausalParameter::Lnde(arm)),
            _ => Err(unknown()),
        }
    }
}

/// Which end of an interval a formula bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    Lower,
    Upper,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::Lower => Direction::Upper,
            Direction::Upper => Direction::Lower,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Lower => "lower",
            Direction::Upper => "upper",
        })
    }
}

impl FromStr for Direction {
    type Err = ParamError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lower" | "lo" | "min" => Ok(Direction::Lower),
            "upper" | "up" | "max" => Ok(Direction::Upper),
            _ => Err(ParamError::UnknownDirection(s.to_string())),
        }
    }
}

/// Monotonicity assumptions layered on top of exclusion restriction,
/// relevance and randomized assignment (which always hold).
///
/// | flag | long alias                   | unit-level restriction |
/// |------|------------------------------|------------------------|
/// | a4   | `monotone-compliance`        | `A(1) >= A(0)`         |
/// | a5   | `monotone-mediator`          | `M(1) >= M(0)`         |
/// | a6   | `monotone-outcome-mediator`  | `Y(a,1) >= Y(a,0)`     |
/// | a7   | `monotone-outcome-treatment` | `Y(1,m) >= Y(0,m)`     |
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AssumptionSet {
    pub monotone_treatment_assignment: bool,
    pub monotone_mediator: bool,
    pub monotone_outcome_in_mediator: bool,
    pub monotone_outcome_in_treatment: bool,
}

impl AssumptionSet {
    pub const NONE: AssumptionSet = AssumptionSet::from_flags(false, false, false, false);

    pub const fn from_flags(a4: bool, a5: bool, a6: bool, a7: bool) -> Self {
        AssumptionSet {
            monotone_treatment_assignment: a4,
            monotone_mediator: a5,
            monotone_outcome_in_mediator: a6,
            monotone_outcome_in_treatment: a7,
        }
    }

    /// Bit `n - 4` is set when assumption `n` holds.
    pub fn bits(self) -> u8 {
        u8::from(self.monotone_treatment_assignment)
            | u8::from(self.monotone_mediator) << 1
            | u8::from(self.monotone_outcome_in_mediator) << 2
            | u8::from(self.monotone_outcome_in_treatment) << 3
    }

    pub fn from_bits(bits: u8) -> Self {
        AssumptionSet::from_flags(bits & 1 != 0, bits & 2 != 0, bits & 4 != 0, bits & 8 != 0)
    }

    /// All sixteen subsets of {a4, a5, a6, a7}, in display order.
    pub fn all() -> Vec<AssumptionSet> {
        let mut sets: Vec<_> = (0..16).map(AssumptionSet::from_bits).collect();
        sets.sort();
        sets
    }

    pub fn union(self, other: AssumptionSet) -> Self {
        AssumptionSet::from_bits(self.bits() | other.bits())
    }

    pub fn is_subset_of(self, other: AssumptionSet) -> bool {
        self.bits() & !other.bits() == 0
    }

    /// Flag numbers that are switched on, ascending.
    pub fn numbers(self) -> Vec<u8> {
        (0..4).filter(|b| self.bits() & (1 << b) != 0).map(|b| b + 4).collect()
    }

    /// Compact label of every assumption in force, always including 1-3,
    /// e.g. `A1-5,7`.
    pub fn range_label(self) -> String {
        let mut all = vec![1u8, 2, 3];
        all.extend(self.numbers());
        let mut parts = Vec::new();
        let mut start = all[0];
        let mut prev = all[0];
        for &n in &all[1..] {
            if n == prev + 1 {
                prev = n;
                continue;
            }
            parts.push(run_label(start, prev));
            start = n;
            prev = n;
        }
        parts.push(run_label(start, prev));
        format!("A{}", parts.join(","))
    }
}

fn run_label(start: u8, end: u8) -> String {
    if start == end {
        start.to_string()
    } else {
        format!("{start}-{end}")
    }
}

impl PartialOrd for AssumptionSet {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for AssumptionSet {
    /// Fewer assumptions first, then lexicographic on flag numbers.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let a = self.numbers();
        let b = other.numbers();
        a.len().cmp(&b.len()).then_with(|| a.cmp(&b))
    }
}

impl fmt::Display for AssumptionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nums = self.numbers();
        if nums.is_empty() {
            return f.write_str("none");
        }
        let names: Vec<String> = nums.iter().map(|n| format!("a{n}")).collect();
        f.write_str(&names.join(","))
    }
}

impl FromStr for AssumptionSet {
    type Err = ParamError;

    /// Parses a comma- or plus-separated flag list; `none` or the empty string
    /// is the empty set.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut bits = 0u8;
        for token in s.split([',', '+', ' ']).map(str::trim).filter(|t| !t.is_empty()) {
            let bit = match token.to_ascii_lowercase().as_str() {
                "none" | "{}" => continue,
                "a4" | "4" | "monotone-compliance" => 1,
                "a5" | "5" | "monotone-mediator" => 2,
                "a6" | "6" | "monotone-outcome-mediator" => 4,
                "a7" | "7" | "monotone-outcome-treatment" => 8,
                _ => return Err(ParamError::UnknownAssumption(token.to_string())),
            };
            bits |= bit;
        }
        Ok(AssumptionSet::from_bits(bits))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_round_trips_through_text() {
        for p in CausalParameter::POPULATION
            .into_iter()
            .chain(CausalParameter::LOCAL)
            .chain([CausalParameter::Ate, CausalParameter::Late])
        {
            assert_eq!(p.to_string().parse::<CausalParameter>().unwrap(), p);
        }
        assert_eq!("lacme1".parse::<CausalParameter>().unwrap(), CausalParameter::Lacme(Arm::One));
        assert!("acme2".parse::<CausalParameter>().is_err());
        assert!("".parse::<CausalParameter>().is_err());
    }

    #[test]
    fn assumption_sets_parse_aliases() {
        let s: AssumptionSet = "monotone-compliance,a6".parse().unwrap();
        assert_eq!(s, AssumptionSet::from_flags(true, false, true, false));
        assert_eq!("none".parse::<AssumptionSet>().unwrap(), AssumptionSet::NONE);
        assert_eq!("".parse::<AssumptionSet>().unwrap(), AssumptionSet::NONE);
        assert!("a8".parse::<AssumptionSet>().is_err());
        assert_eq!(s.to_string(), "a4,a6");
    }

    #[test]
    fn range_labels() {
        assert_eq!(AssumptionSet::NONE.range_label(), "A1-3");
        assert_eq!("a4".parse::<AssumptionSet>().unwrap().range_label(), "A1-4");
        assert_eq!("a4,a5,a7".parse::<AssumptionSet>().unwrap().range_label(), "A1-5,7");
        assert_eq!("a4,a6".parse::<AssumptionSet>().unwrap().range_label(), "A1-4,6");
        assert_eq!("a4,a5,a6,a7".parse::<AssumptionSet>().unwrap().range_label(), "A1-7");
    }

    #[test]
    fn display_order_matches_table_columns() {
        let order: Vec<String> = ["a4,a7", "none", "a4,a5,a6,a7", "a4,a5", "a4,a5,a7", "a4", "a4,a6", "a4,a5,a6"]
            .iter()
            .map(|s| s.parse::<AssumptionSet>().unwrap())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(
            order,
            ["none", "a4", "a4,a5", "a4,a6", "a4,a7", "a4,a5,a6", "a4,a5,a7", "a4,a5,a6,a7"]
        );
    }

    #[test]
    fn subset_and_union() {
        let a4: AssumptionSet = "a4".parse().unwrap();
        let a45: AssumptionSet = "a4,a5".parse().unwrap();
        assert!(a4.is_subset_of(a45));
        assert!(!a45.is_subset_of(a4));
        assert_eq!(a4.union("a5".parse().unwrap()), a45);
        assert_eq!(AssumptionSet::all().len(), 16);
    }
}
