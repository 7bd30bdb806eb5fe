//! Observable cell labels and the conditional distributions built on them.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Rational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DistributionError {
    #[error("cell {0} is outside [0, 1]")]
    OutOfRange(String),
    #[error("cells for z = {z} sum to {sum}, not 1")]
    NotNormalized { z: u8, sum: String },
    #[error("compliance share must be in (0, 1], got {0}")]
    BadComplianceShare(String),
    #[error("malformed cell label `{0}`")]
    BadLabel(String),
}

/// Observable cell `p_{yma.z} = P(Y=y, M=m, A=a | Z=z)`.
///
/// Field order gives the canonical `(y, m, a, z)` lexicographic ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ObservedCell {
    pub y: u8,
    pub m: u8,
    pub a: u8,
    pub z: u8,
}

impl ObservedCell {
    pub const COUNT: usize = 16;

    pub fn new(y: u8, m: u8, a: u8, z: u8) -> Self {
        debug_assert!(y < 2 && m < 2 && a < 2 && z < 2);
        ObservedCell { y, m, a, z }
    }

    pub fn index(self) -> usize {
        usize::from(self.y) * 8 + usize::from(self.m) * 4 + usize::from(self.a) * 2 + usize::from(self.z)
    }

    pub fn from_index(index: usize) -> Self {
        assert!(index < Self::COUNT, "observed cell index {index} out of range");
        let bit = |shift: usize| ((index >> shift) & 1) as u8;
        ObservedCell::new(bit(3), bit(2), bit(1), bit(0))
    }

    pub fn all() -> impl Iterator<Item = ObservedCell> {
        (0..Self::COUNT).map(Self::from_index)
    }

    /// The 8 cells of one assignment arm.
    pub fn arm(z: u8) -> impl Iterator<Item = ObservedCell> {
        Self::all().filter(move |c| c.z == z)
    }
}

impl fmt::Display for ObservedCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p_{{{}{}{}.{}}}", self.y, self.m, self.a, self.z)
    }
}

/// Complier cell `p_{ym.z} = P(Y=y, M=m | Z=z, A(1)=1, A(0)=0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LocalCell {
    pub y: u8,
    pub m: u8,
    pub z: u8,
}

impl LocalCell {
    pub const COUNT: usize = 8;

    pub fn new(y: u8, m: u8, z: u8) -> Self {
        debug_assert!(y < 2 && m < 2 && z < 2);
        LocalCell { y, m, z }
    }

    pub fn index(self) -> usize {
        usize::from(self.y) * 4 + usize::from(self.m) * 2 + usize::from(self.z)
    }

    pub fn from_index(index: usize) -> Self {
        assert!(index < Self::COUNT, "local cell index {index} out of range");
        let bit = |shift: usize| ((index >> shift) & 1) as u8;
        LocalCell::new(bit(2), bit(1), bit(0))
    }

    pub fn all() -> impl Iterator<Item = LocalCell> {
        (0..Self::COUNT).map(Self::from_index)
    }

    pub fn arm(z: u8) -> impl Iterator<Item = LocalCell> {
        Self::all().filter(move |c| c.z == z)
    }
}

impl fmt::Display for LocalCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p_{{{}{}.{}}}", self.y, self.m, self.z)
    }
}

/// Either kind of observable cell. Population cells sort before local ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CellLabel {
    Observed(ObservedCell),
    Local(LocalCell),
}

impl CellLabel {
    pub fn arm(self) -> u8 {
        match self {
            CellLabel::Observed(c) => c.z,
            CellLabel::Local(c) => c.z,
        }
    }

    pub fn is_local(self) -> bool {
        matches!(self, CellLabel::Local(_))
    }

    /// The cell eliminated when reducing modulo the per-arm normalization:
    /// `p_{111.z}` for population cells and `p_{11.z}` for complier cells.
    pub fn is_pivot(self) -> bool {
        match self {
            CellLabel::Observed(c) => c.y == 1 && c.m == 1 && c.a == 1,
            CellLabel::Local(c) => c.y == 1 && c.m == 1,
        }
    }

    /// All cells of the same family and arm as `self`.
    pub fn arm_siblings(self) -> Vec<CellLabel> {
        match self {
            CellLabel::Observed(c) => ObservedCell::arm(c.z).map(CellLabel::Observed).collect(),
            CellLabel::Local(c) => LocalCell::arm(c.z).map(CellLabel::Local).collect(),
        }
    }
}

impl fmt::Display for CellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellLabel::Observed(c) => c.fmt(f),
            CellLabel::Local(c) => c.fmt(f),
        }
    }
}

impl FromStr for CellLabel {
    type Err = DistributionError;

    /// Parses `p_{yma.z}` or `p_{ym.z}` (braces optional).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || DistributionError::BadLabel(s.to_string());
        let body = s.trim().strip_prefix("p_").ok_or_else(bad)?;
        let body = body.trim_start_matches('{').trim_end_matches('}');
        let (head, z) = body.split_once('.').ok_or_else(bad)?;
        let bit = |c: char| match c {
            '0' => Ok(0u8),
            '1' => Ok(1u8),
            _ => Err(bad()),
        };
        let mut zs = z.chars();
        let z = bit(zs.next().ok_or_else(bad)?)?;
        if zs.next().is_some() {
            return Err(bad());
        }
        let bits: Vec<u8> = head.chars().map(bit).collect::<Result<_, _>>()?;
        match bits.as_slice() {
            [y, m, a] => Ok(CellLabel::Observed(ObservedCell::new(*y, *m, *a, z))),
            [y, m] => Ok(CellLabel::Local(LocalCell::new(*y, *m, z))),
            _ => Err(bad()),
        }
    }
}

/// Anything that can supply a value for a cell label.
pub trait CellSource {
    fn cell_value(&self, label: CellLabel) -> Option<&Rational>;
}

fn check_unit(label: impl fmt::Display, v: &Rational) -> Result<(), DistributionError> {
    if v.is_negative() || *v > Rational::one() {
        return Err(DistributionError::OutOfRange(label.to_string()));
    }
    Ok(())
}

/// The 16 conditional cell probabilities `p_{yma.z}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservedDistribution {
    cells: [Rational; ObservedCell::COUNT],
}

impl ObservedDistribution {
    /// Validates cell ranges and exact per-arm normalization. `cells` is
    /// indexed by [`ObservedCell::index`].
    pub fn new(cells: [Rational; ObservedCell::COUNT]) -> Result<Self, DistributionError> {
        for cell in ObservedCell::all() {
            check_unit(cell, &cells[cell.index()])?;
        }
        for z in 0..2 {
            let sum: Rational = ObservedCell::arm(z).map(|c| &cells[c.index()]).sum();
            if !sum.is_one() {
                return Err(DistributionError::NotNormalized { z, sum: sum.to_string() });
            }
        }
        Ok(ObservedDistribution { cells })
    }

    pub fn from_fn(mut f: impl FnMut(ObservedCell) -> Rational) -> Result<Self, DistributionError> {
        Self::new(std::array::from_fn(|i| f(ObservedCell::from_index(i))))
    }

    pub fn p(&self, cell: ObservedCell) -> &Rational {
        &self.cells[cell.index()]
    }

    pub fn cells(&self) -> &[Rational; ObservedCell::COUNT] {
        &self.cells
    }

    /// `P(A = 1 | Z = z)`.
    pub fn treated_share(&self, z: u8) -> Rational {
        ObservedCell::arm(z).filter(|c| c.a == 1).map(|c| self.p(c)).sum()
    }

    /// `P(Y = 1 | Z = z)`.
    pub fn outcome_share(&self, z: u8) -> Rational {
        ObservedCell::arm(z).filter(|c| c.y == 1).map(|c| self.p(c)).sum()
    }

    /// Compliance share `Δ = P(A=1|Z=1) - P(A=1|Z=0)`.
    pub fn compliance_share(&self) -> Rational {
        self.treated_share(1) - self.treated_share(0)
    }
}

impl CellSource for ObservedDistribution {
    fn cell_value(&self, label: CellLabel) -> Option<&Rational> {
        match label {
            CellLabel::Observed(c) => Some(self.p(c)),
            CellLabel::Local(_) => None,
        }
    }
}

/// Complier cells `p_{ym.z}` together with the compliance share.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalObservedDistribution {
    cells: [Rational; LocalCell::COUNT],
    delta: Rational,
}

impl LocalObservedDistribution {
    pub fn new(cells: [Rational; LocalCell::COUNT], delta: Rational) -> Result<Self, DistributionError> {
        if !delta.is_positive() || delta > Rational::one() {
            return Err(DistributionError::BadComplianceShare(delta.to_string()));
        }
        for cell in LocalCell::all() {
            check_unit(cell, &cells[cell.index()])?;
        }
        for z in 0..2 {
            let sum: Rational = LocalCell::arm(z).map(|c| &cells[c.index()]).sum();
            if !sum.is_one() {
                return Err(DistributionError::NotNormalized { z, sum: sum.to_string() });
            }
        }
        Ok(LocalObservedDistribution { cells, delta })
    }

    pub fn from_fn(
        mut f: impl FnMut(LocalCell) -> Rational,
        delta: Rational,
    ) -> Result<Self, DistributionError> {
        Self::new(std::array::from_fn(|i| f(LocalCell::from_index(i))), delta)
    }

    pub fn p(&self, cell: LocalCell) -> &Rational {
        &self.cells[cell.index()]
    }

    pub fn cells(&self) -> &[Rational; LocalCell::COUNT] {
        &self.cells
    }

    pub fn delta(&self) -> &Rational {
        &self.delta
    }

    /// `P(Y = 1 | Z = z, complier)`.
    pub fn outcome_share(&self, z: u8) -> Rational {
        LocalCell::arm(z).filter(|c| c.y == 1).map(|c| self.p(c)).sum()
    }
}

impl CellSource for LocalObservedDistribution {
    fn cell_value(&self, label: CellLabel) -> Option<&Rational> {
        match label {
            CellLabel::Local(c) => Some(self.p(c)),
            CellLabel::Observed(_) => None,
        }
    }
}

/// Data for either family of formulas.
#[derive(Debug, Clone, Copy)]
pub enum ObservedData<'a> {
    Population(&'a ObservedDistribution),
    Local(&'a LocalObservedDistribution),
}

impl CellSource for ObservedData<'_> {
    fn cell_value(&self, label: CellLabel) -> Option<&Rational> {
        match self {
            ObservedData::Population(d) => d.cell_value(label),
            ObservedData::Local(d) => d.cell_value(label),
        }
    }
}

/// Uniform distribution with `1/8` in every cell of both arms.
pub fn uniform_observed() -> ObservedDistribution {
    ObservedDistribution::from_fn(|_| crate::ratio(1, 8)).expect("uniform cells are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio;

    #[test]
    fn cell_indices_are_lexicographic() {
        let labels: Vec<String> = ObservedCell::all().map(|c| c.to_string()).collect();
        assert_eq!(labels[0], "p_{000.0}");
        assert_eq!(labels[1], "p_{000.1}");
        assert_eq!(labels[2], "p_{001.0}");
        assert_eq!(labels[15], "p_{111.1}");
        for c in ObservedCell::all() {
            assert_eq!(ObservedCell::from_index(c.index()), c);
        }
        let mut sorted: Vec<ObservedCell> = ObservedCell::all().collect();
        sorted.sort();
        assert_eq!(sorted, ObservedCell::all().collect::<Vec<_>>());
    }

    #[test]
    fn labels_parse() {
        let l: CellLabel = "p_{101.1}".parse().unwrap();
        assert_eq!(l, CellLabel::Observed(ObservedCell::new(1, 0, 1, 1)));
        let l: CellLabel = "p_{01.0}".parse().unwrap();
        assert_eq!(l, CellLabel::Local(LocalCell::new(0, 1, 0)));
        assert!("p_{0101.0}".parse::<CellLabel>().is_err());
        assert!("q_{01.0}".parse::<CellLabel>().is_err());
        assert!("p_{21.0}".parse::<CellLabel>().is_err());
    }

    #[test]
    fn rejects_unnormalized_arms() {
        let err = ObservedDistribution::from_fn(|c| if c.z == 1 { ratio(1, 8) } else { ratio(1, 9) })
            .unwrap_err();
        assert!(matches!(err, DistributionError::NotNormalized { z: 0, .. }));
    }

    #[test]
    fn rejects_out_of_range_cells() {
        let err = ObservedDistribution::from_fn(|c| match (c.index(), c.z) {
            (1, _) => ratio(-1, 8),
            (3, _) => ratio(3, 8),
            _ => ratio(1, 8),
        })
        .unwrap_err();
        assert!(matches!(err, DistributionError::OutOfRange(_)));
    }

    #[test]
    fn local_requires_positive_delta() {
        let err = LocalObservedDistribution::from_fn(|_| ratio(1, 4), ratio(0, 1)).unwrap_err();
        assert!(matches!(err, DistributionError::BadComplianceShare(_)));
        assert!(LocalObservedDistribution::from_fn(|_| ratio(1, 4), ratio(1, 2)).is_ok());
    }

    #[test]
    fn margins() {
        let d = uniform_observed();
        assert_eq!(d.treated_share(1), ratio(1, 2));
        assert_eq!(d.compliance_share(), ratio(0, 1));
        assert_eq!(d.outcome_share(0), ratio(1, 2));
    }
}
