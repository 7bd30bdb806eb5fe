//! Counterfactual response types and the linear system tying them to the
//! observable cells.
//!
//! A unit's response type is the triple of potential-outcome vectors
//! `(Y(1,1), Y(1,0), Y(0,1), Y(0,0))`, `(M(1), M(0))` and `(A(1), A(0))`.
//! Each vector is indexed by counting down from all-ones: index 0 is the
//! all-ones vector and the last index the all-zeros vector. Every other module
//! addresses latent cells only through the decoders here.

use std::ops::{Add, Neg, Sub};

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::observed::{CellLabel, LocalCell, LocalObservedDistribution, ObservedCell, ObservedDistribution};
use crate::param::{AssumptionSet, CausalParameter};
use crate::Rational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LatentError {
    #[error("{kind} response index {index} out of range 0..{limit}")]
    IndexOutOfRange { kind: &'static str, index: usize, limit: usize },
    #[error("{0} is a complier parameter; use the complier system")]
    LocalParameter(CausalParameter),
    #[error("{0} is a population parameter; use the population system")]
    PopulationParameter(CausalParameter),
    #[error("latent distribution has {got} cells, expected {expected}")]
    WrongLength { got: usize, expected: usize },
    #[error("latent cell {0} has negative mass")]
    Negative(usize),
    #[error("latent masses sum to {0}, not 1")]
    NotNormalized(String),
    #[error("latent cell {0} carries mass but is excluded by the assumption set")]
    Inadmissible(usize),
    #[error("no complier mass")]
    NoCompliers,
}

/// Outcome response type `(Y(1,1), Y(1,0), Y(0,1), Y(0,0))`, index `0..16`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResponseY(u8);

impl ResponseY {
    pub const COUNT: usize = 16;

    pub fn new(index: usize) -> Result<Self, LatentError> {
        if index >= Self::COUNT {
            return Err(LatentError::IndexOutOfRange { kind: "outcome", index, limit: Self::COUNT });
        }
        Ok(ResponseY(index as u8))
    }

    pub fn index(self) -> usize {
        usize::from(self.0)
    }

    pub fn all() -> impl Iterator<Item = ResponseY> {
        (0..Self::COUNT as u8).map(ResponseY)
    }

    /// Potential outcome `Y(a, m)`.
    pub fn outcome(self, a: u8, m: u8) -> u8 {
        ((15 - self.0) >> (2 * a + m)) & 1
    }

    pub fn decode(self) -> [u8; 4] {
        [self.outcome(1, 1), self.outcome(1, 0), self.outcome(0, 1), self.outcome(0, 0)]
    }

    pub fn encode(bits: [u8; 4]) -> Self {
        let packed = bits.iter().fold(0u8, |acc, &b| (acc << 1) | (b & 1));
        ResponseY(15 - packed)
    }
}

/// Mediator response type `(M(1), M(0))`, index `0..4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResponseM(u8);

impl ResponseM {
    pub const COUNT: usize = 4;

    pub fn new(index: usize) -> Result<Self, LatentError> {
        if index >= Self::COUNT {
            return Err(LatentError::IndexOutOfRange { kind: "mediator", index, limit: Self::COUNT });
        }
        Ok(ResponseM(index as u8))
    }

    pub fn index(self) -> usize {
        usize::from(self.0)
    }

    pub fn all() -> impl Iterator<Item = ResponseM> {
        (0..Self::COUNT as u8).map(ResponseM)
    }

    /// Potential mediator `M(a)`.
    pub fn value(self, a: u8) -> u8 {
        ((3 - self.0) >> a) & 1
    }

    pub fn decode(self) -> [u8; 2] {
        [self.value(1), self.value(0)]
    }

    pub fn encode(bits: [u8; 2]) -> Self {
        ResponseM(3 - (((bits[0] & 1) << 1) | (bits[1] & 1)))
    }
}

/// Treatment-uptake response type `(A(1), A(0))`; same encoding as
/// [`ResponseM`]. Index 1 is a complier, index 2 a defier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResponseA(u8);

impl ResponseA {
    pub const COUNT: usize = 4;
    pub const COMPLIER: ResponseA = ResponseA(1);

    pub fn new(index: usize) -> Result<Self, LatentError> {
        if index >= Self::COUNT {
            return Err(LatentError::IndexOutOfRange { kind: "uptake", index, limit: Self::COUNT });
        }
        Ok(ResponseA(index as u8))
    }

    pub fn index(self) -> usize {
        usize::from(self.0)
    }

    pub fn all() -> impl Iterator<Item = ResponseA> {
        (0..Self::COUNT as u8).map(ResponseA)
    }

    /// Potential uptake `A(z)`.
    pub fn value(self, z: u8) -> u8 {
        ((3 - self.0) >> z) & 1
    }

    pub fn decode(self) -> [u8; 2] {
        [self.value(1), self.value(0)]
    }
}

pub fn decode_response_y(index: usize) -> Result<[u8; 4], LatentError> {
    ResponseY::new(index).map(ResponseY::decode)
}

pub fn decode_response_m(index: usize) -> Result<[u8; 2], LatentError> {
    ResponseM::new(index).map(ResponseM::decode)
}

pub fn decode_response_a(index: usize) -> Result<[u8; 2], LatentError> {
    ResponseA::new(index).map(ResponseA::decode)
}

/// Which latent system a vector lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SystemKind {
    /// All `16 * 4 * 4 = 256` response types.
    Population,
    /// The `16 * 4 = 64` outcome/mediator types of compliers.
    Complier,
}

impl SystemKind {
    pub fn cell_count(self) -> usize {
        match self {
            SystemKind::Population => 256,
            SystemKind::Complier => 64,
        }
    }

    pub fn row_count(self) -> usize {
        match self {
            SystemKind::Population => ObservedCell::COUNT + 1,
            SystemKind::Complier => LocalCell::COUNT + 1,
        }
    }

    pub fn for_parameter(param: CausalParameter) -> Self {
        if param.is_local() {
            SystemKind::Complier
        } else {
            SystemKind::Population
        }
    }
}

/// Population latent cell `q_{ijk}`; flat index `i * 16 + j * 4 + k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatentCell {
    pub y: ResponseY,
    pub m: ResponseM,
    pub a: ResponseA,
}

impl LatentCell {
    pub fn new(i: usize, j: usize, k: usize) -> Result<Self, LatentError> {
        Ok(LatentCell { y: ResponseY::new(i)?, m: ResponseM::new(j)?, a: ResponseA::new(k)? })
    }

    pub fn index(self) -> usize {
        self.y.index() * 16 + self.m.index() * 4 + self.a.index()
    }

    pub fn from_index(index: usize) -> Self {
        LatentCell::new(index / 16, (index / 4) % 4, index % 4).expect("flat latent index in range")
    }

    pub fn all() -> impl Iterator<Item = LatentCell> {
        (0..256).map(Self::from_index)
    }

    /// The observed cell this response type lands in under assignment `z`.
    pub fn observed(self, z: u8) -> ObservedCell {
        let a = self.a.value(z);
        let m = self.m.value(a);
        ObservedCell::new(self.y.outcome(a, m), m, a, z)
    }

    pub fn complier(self) -> Option<ComplierCell> {
        (self.a == ResponseA::COMPLIER).then_some(ComplierCell { y: self.y, m: self.m })
    }
}

/// Complier latent cell `(i, j)`; flat index `i * 4 + j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ComplierCell {
    pub y: ResponseY,
    pub m: ResponseM,
}

impl ComplierCell {
    pub fn new(i: usize, j: usize) -> Result<Self, LatentError> {
        Ok(ComplierCell { y: ResponseY::new(i)?, m: ResponseM::new(j)? })
    }

    pub fn index(self) -> usize {
        self.y.index() * 4 + self.m.index()
    }

    pub fn from_index(index: usize) -> Self {
        ComplierCell::new(index / 4, index % 4).expect("flat complier index in range")
    }

    pub fn all() -> impl Iterator<Item = ComplierCell> {
        (0..64).map(Self::from_index)
    }

    /// Compliers take treatment `a = z`.
    pub fn observed(self, z: u8) -> LocalCell {
        let m = self.m.value(z);
        LocalCell::new(self.y.outcome(z, m), m, z)
    }
}

impl AssumptionSet {
    pub fn admits_outcome(self, y: ResponseY) -> bool {
        let mediator_monotone = (0..2).all(|a| y.outcome(a, 1) >= y.outcome(a, 0));
        let treatment_monotone = (0..2).all(|m| y.outcome(1, m) >= y.outcome(0, m));
        (!self.monotone_outcome_in_mediator || mediator_monotone)
            && (!self.monotone_outcome_in_treatment || treatment_monotone)
    }

    pub fn admits_mediator(self, m: ResponseM) -> bool {
        !self.monotone_mediator || m.value(1) >= m.value(0)
    }

    pub fn admits_uptake(self, a: ResponseA) -> bool {
        !self.monotone_treatment_assignment || a.value(1) >= a.value(0)
    }

    pub fn admits(self, cell: LatentCell) -> bool {
        self.admits_outcome(cell.y) && self.admits_mediator(cell.m) && self.admits_uptake(cell.a)
    }

    pub fn admits_complier(self, cell: ComplierCell) -> bool {
        self.admits_outcome(cell.y) && self.admits_mediator(cell.m)
    }
}

/// Latent cells not zeroed by the assumption set, ascending by flat index.
pub fn admissible_cells(assumptions: AssumptionSet) -> Vec<LatentCell> {
    LatentCell::all().filter(|c| assumptions.admits(*c)).collect()
}

/// Complier cells allowed by the mediator/outcome restrictions.
pub fn admissible_complier_cells(assumptions: AssumptionSet) -> Vec<ComplierCell> {
    ComplierCell::all().filter(|c| assumptions.admits_complier(*c)).collect()
}

/// Flat indices of admissible cells on the given system.
pub fn admissible_indices(kind: SystemKind, assumptions: AssumptionSet) -> Vec<usize> {
    match kind {
        SystemKind::Population => admissible_cells(assumptions).into_iter().map(LatentCell::index).collect(),
        SystemKind::Complier => {
            admissible_complier_cells(assumptions).into_iter().map(ComplierCell::index).collect()
        }
    }
}

/// All 32 latent cells that produce observed cell `(y, m, a, z)`, before any
/// monotonicity filtering.
pub fn cell_incidence(cell: ObservedCell) -> Vec<LatentCell> {
    LatentCell::all().filter(|c| c.observed(cell.z) == cell).collect()
}

/// The 16 complier cells that produce local cell `(y, m, z)`.
pub fn local_cell_incidence(cell: LocalCell) -> Vec<ComplierCell> {
    ComplierCell::all().filter(|c| c.observed(cell.z) == cell).collect()
}

/// Unit-level contrast of `param` for one outcome/mediator response type.
pub fn unit_contrast(param: CausalParameter, y: ResponseY, m: ResponseM) -> i32 {
    let out = |a: u8, med: u8| i32::from(y.outcome(a, med));
    match param {
        CausalParameter::Acme(arm) | CausalParameter::Lacme(arm) => {
            let a = arm.bit();
            out(a, m.value(1)) - out(a, m.value(0))
        }
        CausalParameter::Nde(arm) | CausalParameter::Lnde(arm) => {
            let ma = m.value(arm.bit());
            out(1, ma) - out(0, ma)
        }
        CausalParameter::Ate | CausalParameter::Late => out(1, m.value(1)) - out(0, m.value(0)),
    }
}

/// Integer-weighted linear functional on a latent system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearFunctional {
    pub kind: SystemKind,
    pub coefficients: Vec<i32>,
}

impl LinearFunctional {
    pub fn zero(kind: SystemKind) -> Self {
        LinearFunctional { kind, coefficients: vec![0; kind.cell_count()] }
    }

    pub fn coefficient(&self, index: usize) -> i32 {
        self.coefficients[index]
    }

    pub fn nonzeros(&self) -> usize {
        self.coefficients.iter().filter(|c| **c != 0).count()
    }

    pub fn value(&self, q: &LatentDistribution) -> Rational {
        assert_eq!(self.kind, q.kind, "functional and distribution live on different systems");
        self.coefficients
            .iter()
            .zip(&q.q)
            .filter(|(c, _)| **c != 0)
            .map(|(c, v)| v * Rational::from_integer((*c).into()))
            .sum()
    }
}

impl Add for &LinearFunctional {
    type Output = LinearFunctional;

    fn add(self, rhs: &LinearFunctional) -> LinearFunctional {
        assert_eq!(self.kind, rhs.kind);
        LinearFunctional {
            kind: self.kind,
            coefficients: self.coefficients.iter().zip(&rhs.coefficients).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &LinearFunctional {
    type Output = LinearFunctional;

    fn sub(self, rhs: &LinearFunctional) -> LinearFunctional {
        self + &(-rhs)
    }
}

impl Neg for &LinearFunctional {
    type Output = LinearFunctional;

    fn neg(self) -> LinearFunctional {
        LinearFunctional { kind: self.kind, coefficients: self.coefficients.iter().map(|c| -c).collect() }
    }
}

/// Objective vector of a population parameter over the 256 latent cells.
pub fn objective_coefficients(param: CausalParameter) -> Result<LinearFunctional, LatentError> {
    if param.is_local() {
        return Err(LatentError::LocalParameter(param));
    }
    let mut f = LinearFunctional::zero(SystemKind::Population);
    for cell in LatentCell::all() {
        f.coefficients[cell.index()] = unit_contrast(param, cell.y, cell.m);
    }
    Ok(f)
}

/// Objective vector of a complier parameter over the 64 complier cells.
pub fn local_objective_coefficients(param: CausalParameter) -> Result<LinearFunctional, LatentError> {
    if !param.is_local() {
        return Err(LatentError::PopulationParameter(param));
    }
    let mut f = LinearFunctional::zero(SystemKind::Complier);
    for cell in ComplierCell::all() {
        f.coefficients[cell.index()] = unit_contrast(param, cell.y, cell.m);
    }
    Ok(f)
}

/// Objective on whichever system the parameter lives on.
pub fn functional_for(param: CausalParameter) -> LinearFunctional {
    if param.is_local() {
        local_objective_coefficients(param).expect("local parameter")
    } else {
        objective_coefficients(param).expect("population parameter")
    }
}

/// Probability law over the cells of one latent system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatentDistribution {
    pub kind: SystemKind,
    q: Vec<Rational>,
}

impl LatentDistribution {
    /// Validates length, nonnegativity, exact normalization and that only
    /// cells admitted by `assumptions` carry mass.
    pub fn new(kind: SystemKind, q: Vec<Rational>, assumptions: AssumptionSet) -> Result<Self, LatentError> {
        if q.len() != kind.cell_count() {
            return Err(LatentError::WrongLength { got: q.len(), expected: kind.cell_count() });
        }
        if let Some(i) = q.iter().position(Signed::is_negative) {
            return Err(LatentError::Negative(i));
        }
        let total: Rational = q.iter().sum();
        if !total.is_one() {
            return Err(LatentError::NotNormalized(total.to_string()));
        }
        let admissible = admissible_indices(kind, assumptions);
        let mut allowed = vec![false; q.len()];
        for i in admissible {
            allowed[i] = true;
        }
        if let Some(i) = q.iter().enumerate().position(|(i, v)| !v.is_zero() && !allowed[i]) {
            return Err(LatentError::Inadmissible(i));
        }
        Ok(LatentDistribution { kind, q })
    }

    /// Uniform over every cell of the system.
    pub fn uniform(kind: SystemKind) -> Self {
        let n = kind.cell_count() as i64;
        LatentDistribution { kind, q: vec![crate::ratio(1, n); n as usize] }
    }

    /// Unit mass on one flat index.
    pub fn point_mass(kind: SystemKind, index: usize) -> Self {
        let mut q = vec![Rational::zero(); kind.cell_count()];
        q[index] = Rational::one();
        LatentDistribution { kind, q }
    }

    pub fn q(&self) -> &[Rational] {
        &self.q
    }

    /// Conditional law of compliers' `(i, j)` types, if any mass sits on `k = 1`.
    pub fn complier_restriction(&self) -> Result<LatentDistribution, LatentError> {
        assert_eq!(self.kind, SystemKind::Population);
        let mut q = vec![Rational::zero(); 64];
        for cell in LatentCell::all() {
            if let Some(c) = cell.complier() {
                q[c.index()] = self.q[cell.index()].clone();
            }
        }
        let mass: Rational = q.iter().sum();
        if mass.is_zero() {
            return Err(LatentError::NoCompliers);
        }
        for v in &mut q {
            *v /= &mass;
        }
        Ok(LatentDistribution { kind: SystemKind::Complier, q })
    }

    /// Total mass on compliers.
    pub fn complier_mass(&self) -> Rational {
        LatentCell::all().filter(|c| c.complier().is_some()).map(|c| &self.q[c.index()]).sum()
    }

    /// Push-forward through the population incidence.
    pub fn implied_observed(&self) -> ObservedDistribution {
        assert_eq!(self.kind, SystemKind::Population);
        let mut cells: [Rational; ObservedCell::COUNT] = std::array::from_fn(|_| Rational::zero());
        for cell in LatentCell::all() {
            let v = &self.q[cell.index()];
            if v.is_zero() {
                continue;
            }
            for z in 0..2 {
                cells[cell.observed(z).index()] += v;
            }
        }
        ObservedDistribution::new(cells).expect("push-forward of a latent law is a valid distribution")
    }

    /// Push-forward of a complier law, paired with a compliance share.
    pub fn implied_local(&self, delta: Rational) -> LocalObservedDistribution {
        assert_eq!(self.kind, SystemKind::Complier);
        let mut cells: [Rational; LocalCell::COUNT] = std::array::from_fn(|_| Rational::zero());
        for cell in ComplierCell::all() {
            let v = &self.q[cell.index()];
            for z in 0..2 {
                cells[cell.observed(z).index()] += v;
            }
        }
        LocalObservedDistribution::new(cells, delta).expect("push-forward of a complier law is valid")
    }
}

/// Identifies one equality row of the latent system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RowLabel {
    Normalization,
    Cell(CellLabel),
}

impl std::fmt::Display for RowLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RowLabel::Normalization => f.write_str("1"),
            RowLabel::Cell(c) => c.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintRow {
    pub label: RowLabel,
    /// Flat indices of admissible latent cells that contribute to this row.
    pub members: Vec<usize>,
}

/// Equality rows `A q = b` over the admissible latent cells: a normalization
/// row followed by one row per observed cell in canonical order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSystem {
    pub kind: SystemKind,
    pub assumptions: AssumptionSet,
    /// Admissible flat indices, ascending.
    pub columns: Vec<usize>,
    pub rows: Vec<ConstraintRow>,
}

impl ConstraintSystem {
    pub fn population(assumptions: AssumptionSet) -> Self {
        let columns = admissible_indices(SystemKind::Population, assumptions);
        let mut rows = vec![ConstraintRow { label: RowLabel::Normalization, members: columns.clone() }];
        for cell in ObservedCell::all() {
            let members = columns
                .iter()
                .copied()
                .filter(|&i| LatentCell::from_index(i).observed(cell.z) == cell)
                .collect();
            rows.push(ConstraintRow { label: RowLabel::Cell(CellLabel::Observed(cell)), members });
        }
        ConstraintSystem { kind: SystemKind::Population, assumptions, columns, rows }
    }

    pub fn complier(assumptions: AssumptionSet) -> Self {
        let columns = admissible_indices(SystemKind::Complier, assumptions);
        let mut rows = vec![ConstraintRow { label: RowLabel::Normalization, members: columns.clone() }];
        for cell in LocalCell::all() {
            let members = columns
                .iter()
                .copied()
                .filter(|&i| ComplierCell::from_index(i).observed(cell.z) == cell)
                .collect();
            rows.push(ConstraintRow { label: RowLabel::Cell(CellLabel::Local(cell)), members });
        }
        ConstraintSystem { kind: SystemKind::Complier, assumptions, columns, rows }
    }

    pub fn for_parameter(param: CausalParameter, assumptions: AssumptionSet) -> Self {
        match SystemKind::for_parameter(param) {
            SystemKind::Population => Self::population(assumptions),
            SystemKind::Complier => Self::complier(assumptions),
        }
    }

    /// Row positions (into `rows`) that column `index` contributes to.
    pub fn column_rows(&self, index: usize) -> Vec<usize> {
        let mut out = vec![0];
        for z in 0..2u8 {
            let label = match self.kind {
                SystemKind::Population => CellLabel::Observed(LatentCell::from_index(index).observed(z)),
                SystemKind::Complier => CellLabel::Local(ComplierCell::from_index(index).observed(z)),
            };
            let pos = match label {
                CellLabel::Observed(c) => 1 + c.index(),
                CellLabel::Local(c) => 1 + c.index(),
            };
            out.push(pos);
        }
        out.sort_unstable();
        out
    }

    pub fn population_targets(&self, data: &ObservedDistribution) -> Vec<Rational> {
        assert_eq!(self.kind, SystemKind::Population);
        std::iter::once(Rational::one()).chain(data.cells().iter().cloned()).collect()
    }

    pub fn complier_targets(&self, data: &LocalObservedDistribution) -> Vec<Rational> {
        assert_eq!(self.kind, SystemKind::Complier);
        std::iter::once(Rational::one()).chain(data.cells().iter().cloned()).collect()
    }
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::param::Arm;
    use crate::ratio;

    // Columns of the outcome encoding table, transcribed independently of the
    // bit arithmetic above. Rows are Y(1,1), Y(1,0), Y(0,1), Y(0,0).
    const Y_TABLE: [[u8; 16]; 4] = [
        [1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0],
        [1, 1, 1, 1, 0, 0, 0, 0, 1, 1, 1, 1, 0, 0, 0, 0],
        [1, 1, 0, 0, 1, 1, 0, 0, 1, 1, 0, 0, 1, 1, 0, 0],
        [1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0],
    ];
    const M_TABLE: [[u8; 4]; 2] = [[1, 1, 0, 0], [1, 0, 1, 0]];

    #[test]
    fn outcome_decoder_matches_table() {
        for i in 0..16 {
            let expected = [Y_TABLE[0][i], Y_TABLE[1][i], Y_TABLE[2][i], Y_TABLE[3][i]];
            assert_eq!(decode_response_y(i).unwrap(), expected, "column {i}");
            assert_eq!(ResponseY::encode(expected).index(), i);
        }
        assert_eq!(decode_response_y(0).unwrap(), [1, 1, 1, 1]);
        assert_eq!(decode_response_y(15).unwrap(), [0, 0, 0, 0]);
        assert_eq!(decode_response_y(5).unwrap(), [1, 0, 1, 0]);
        assert!(decode_response_y(16).is_err());
    }

    #[test]
    fn mediator_decoder_matches_table() {
        for j in 0..4 {
            let expected = [M_TABLE[0][j], M_TABLE[1][j]];
            assert_eq!(decode_response_m(j).unwrap(), expected);
            assert_eq!(decode_response_a(j).unwrap(), expected);
            assert_eq!(ResponseM::encode(expected).index(), j);
        }
        assert!(decode_response_m(4).is_err());
        assert!(decode_response_a(4).is_err());
    }

    #[test]
    fn decoders_are_bijective() {
        let ys: BTreeSet<_> = ResponseY::all().map(ResponseY::decode).collect();
        assert_eq!(ys.len(), 16);
        let ms: BTreeSet<_> = ResponseM::all().map(ResponseM::decode).collect();
        assert_eq!(ms.len(), 4);
    }

    fn set(s: &str) -> AssumptionSet {
        s.parse().unwrap()
    }

    #[test]
    fn admissible_counts() {
        assert_eq!(admissible_cells(AssumptionSet::NONE).len(), 256);
        let a4 = admissible_cells(set("a4"));
        assert_eq!(a4.len(), 192);
        assert!(a4.iter().all(|c| c.a.index() != 2));
        assert_eq!(admissible_cells(set("a4,a5")).len(), 144);
        assert_eq!(admissible_cells(set("a6")).len(), 144);
        assert_eq!(admissible_cells(set("a7")).len(), 144);
        assert_eq!(admissible_cells(set("a4,a5,a6,a7")).len(), 6 * 3 * 3);
    }

    #[test]
    fn outcome_monotonicity_zero_sets() {
        let dropped = |s: &str| -> Vec<usize> {
            ResponseY::all().filter(|y| !set(s).admits_outcome(*y)).map(ResponseY::index).collect()
        };
        assert_eq!(dropped("a6"), vec![2, 6, 8, 9, 10, 11, 14]);
        assert_eq!(dropped("a7"), vec![4, 6, 8, 9, 12, 13, 14]);
    }

    #[test]
    fn admissibility_composes_by_intersection() {
        for s in AssumptionSet::all() {
            for t in AssumptionSet::all() {
                let joint: BTreeSet<_> = admissible_cells(s.union(t)).into_iter().collect();
                let a: BTreeSet<_> = admissible_cells(s).into_iter().collect();
                let b: BTreeSet<_> = admissible_cells(t).into_iter().collect();
                assert_eq!(joint, a.intersection(&b).copied().collect());
            }
        }
    }

    #[test]
    fn incidence_examples() {
        let got: BTreeSet<(usize, usize, usize)> = cell_incidence(ObservedCell::new(1, 1, 1, 1))
            .into_iter()
            .map(|c| (c.y.index(), c.m.index(), c.a.index()))
            .collect();
        let want: BTreeSet<_> =
            (0..8).flat_map(|i| (0..2).flat_map(move |j| (0..2).map(move |k| (i, j, k)))).collect();
        assert_eq!(got, want);

        let got: BTreeSet<(usize, usize, usize)> = cell_incidence(ObservedCell::new(0, 0, 0, 0))
            .into_iter()
            .map(|c| (c.y.index(), c.m.index(), c.a.index()))
            .collect();
        let want: BTreeSet<_> = (0..16)
            .filter(|i| i % 2 == 1)
            .flat_map(|i| [1, 3].into_iter().flat_map(move |j| [1, 3].into_iter().map(move |k| (i, j, k))))
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn incidence_partitions_each_arm() {
        for z in 0..2 {
            let mut seen = vec![0u8; 256];
            for cell in ObservedCell::arm(z) {
                let inc = cell_incidence(cell);
                assert_eq!(inc.len(), 32);
                for c in inc {
                    seen[c.index()] += 1;
                }
            }
            assert!(seen.iter().all(|&n| n == 1));
        }
    }

    #[test]
    fn local_incidence_examples_and_partition() {
        let got: BTreeSet<(usize, usize)> = local_cell_incidence(LocalCell::new(1, 1, 1))
            .into_iter()
            .map(|c| (c.y.index(), c.m.index()))
            .collect();
        let want: BTreeSet<_> = (0..8).flat_map(|i| (0..2).map(move |j| (i, j))).collect();
        assert_eq!(got, want);
        let got: BTreeSet<(usize, usize)> = local_cell_incidence(LocalCell::new(0, 0, 0))
            .into_iter()
            .map(|c| (c.y.index(), c.m.index()))
            .collect();
        let want: BTreeSet<_> =
            (0..16).filter(|i| i % 2 == 1).flat_map(|i| [1, 3].into_iter().map(move |j| (i, j))).collect();
        assert_eq!(got, want);
        for z in 0..2 {
            let mut seen = [0u8; 64];
            for cell in LocalCell::arm(z) {
                for c in local_cell_incidence(cell) {
                    seen[c.index()] += 1;
                }
            }
            assert!(seen.iter().all(|&n| n == 1));
        }
    }

    #[test]
    fn acme_one_objective_matches_expansion() {
        let f = objective_coefficients(CausalParameter::Acme(Arm::One)).unwrap();
        for cell in LatentCell::all() {
            let (i, j) = (cell.y.index(), cell.m.index());
            let expected = match (i, j) {
                (4..=7, 1) | (8..=11, 2) => 1,
                (4..=7, 2) | (8..=11, 1) => -1,
                _ => 0,
            };
            assert_eq!(f.coefficient(cell.index()), expected, "cell {i},{j},{}", cell.a.index());
        }
        assert_eq!(f.nonzeros(), 64);
    }

    #[test]
    fn total_effect_decomposes() {
        let ate = objective_coefficients(CausalParameter::Ate).unwrap();
        let via0 = &objective_coefficients(CausalParameter::Acme(Arm::Zero)).unwrap()
            + &objective_coefficients(CausalParameter::Nde(Arm::One)).unwrap();
        let via1 = &objective_coefficients(CausalParameter::Acme(Arm::One)).unwrap()
            + &objective_coefficients(CausalParameter::Nde(Arm::Zero)).unwrap();
        assert_eq!(ate, via0);
        assert_eq!(ate, via1);

        let late = local_objective_coefficients(CausalParameter::Late).unwrap();
        let local0 = &local_objective_coefficients(CausalParameter::Lacme(Arm::Zero)).unwrap()
            + &local_objective_coefficients(CausalParameter::Lnde(Arm::One)).unwrap();
        assert_eq!(late, local0);
    }

    #[test]
    fn local_acme_restricts_population_expansion() {
        let f = local_objective_coefficients(CausalParameter::Lacme(Arm::One)).unwrap();
        let pos = f.coefficients.iter().filter(|c| **c == 1).count();
        let neg = f.coefficients.iter().filter(|c| **c == -1).count();
        assert_eq!((pos, neg), (8, 8));
        for cell in ComplierCell::all() {
            let expected = match (cell.y.index(), cell.m.index()) {
                (4..=7, 1) | (8..=11, 2) => 1,
                (4..=7, 2) | (8..=11, 1) => -1,
                _ => 0,
            };
            assert_eq!(f.coefficient(cell.index()), expected);
        }
    }

    #[test]
    fn family_mismatch_is_rejected() {
        assert!(objective_coefficients(CausalParameter::Lacme(Arm::One)).is_err());
        assert!(local_objective_coefficients(CausalParameter::Nde(Arm::One)).is_err());
    }

    #[test]
    fn uniform_values_cancel() {
        let uniform = LatentDistribution::uniform(SystemKind::Population);
        let by_sum: Rational = objective_coefficients(CausalParameter::Nde(Arm::Zero))
            .unwrap()
            .coefficients
            .iter()
            .map(|c| ratio(i64::from(*c), 256))
            .sum();
        assert!(by_sum.is_zero());
        for p in CausalParameter::POPULATION {
            assert!(objective_coefficients(p).unwrap().value(&uniform).is_zero());
        }
        let uc = LatentDistribution::uniform(SystemKind::Complier);
        assert!(local_objective_coefficients(CausalParameter::Lnde(Arm::Zero)).unwrap().value(&uc).is_zero());
    }

    #[test]
    fn constraint_system_shape() {
        let sys = ConstraintSystem::population(AssumptionSet::NONE);
        assert_eq!(sys.rows.len(), 17);
        assert!(sys.rows[1..].iter().all(|r| r.members.len() == 32));
        let sys = ConstraintSystem::complier(set("a4"));
        assert_eq!(sys.rows.len(), 9);
        assert_eq!(sys.columns.len(), 64);
        for col in &sys.columns {
            let rows = sys.column_rows(*col);
            for r in rows {
                assert!(sys.rows[r].members.contains(col));
            }
        }
    }

    #[test]
    fn point_mass_push_forward() {
        let q = LatentDistribution::point_mass(SystemKind::Population, LatentCell::new(0, 0, 0).unwrap().index());
        let p = q.implied_observed();
        assert!(p.p(ObservedCell::new(1, 1, 1, 1)).is_one());
        assert!(p.p(ObservedCell::new(1, 1, 1, 0)).is_one());
    }

    #[test]
    fn latent_validation() {
        let mut q = vec![Rational::zero(); 256];
        q[LatentCell::new(0, 0, 2).unwrap().index()] = Rational::one();
        assert_eq!(
            LatentDistribution::new(SystemKind::Population, q.clone(), set("a4")).unwrap_err(),
            LatentError::Inadmissible(2)
        );
        assert!(LatentDistribution::new(SystemKind::Population, q, AssumptionSet::NONE).is_ok());
        assert!(matches!(
            LatentDistribution::new(SystemKind::Population, vec![Rational::zero(); 256], AssumptionSet::NONE),
            Err(LatentError::NotNormalized(_))
        ));
    }
}
