//! Closed-form bounds, local identification and interval evaluation.

pub mod golden;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::LazyLock;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::observed::{
    CellLabel, LocalCell, LocalObservedDistribution, ObservedCell, ObservedData, ObservedDistribution,
};
use crate::param::{Arm, AssumptionSet, CausalParameter, Direction};
use crate::symbolic::{SymbolicBound, SymbolicError, SymbolicExpr};
use crate::Rational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CatalogError {
    #[error("{parameter} under {assumptions} is not in the catalog; use the oracle")]
    Uncataloged { parameter: CausalParameter, assumptions: AssumptionSet },
    #[error("{0} is a local parameter and needs monotone compliance (a4)")]
    NeedsMonotoneCompliance(CausalParameter),
    #[error("formula for {0} cannot be evaluated on this kind of data")]
    FamilyMismatch(CausalParameter),
    #[error("compliance share is {0}; local parameters need it to be positive")]
    NoCompliers(String),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Catalog,
    Oracle,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Catalog => "catalog",
            Method::Oracle => "oracle",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "catalog" => Ok(Method::Catalog),
            "oracle" | "lp" => Ok(Method::Oracle),
            other => Err(format!("unknown method `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundStatus {
    Ok,
    /// Lower endpoint above the upper one.
    Crossed,
    /// No latent law satisfies the assumptions and reproduces the data.
    Infeasible,
}

impl fmt::Display for BoundStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundStatus::Ok => "ok",
            BoundStatus::Crossed => "crossed",
            BoundStatus::Infeasible => "infeasible",
        })
    }
}

/// Interval for one parameter under one assumption set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundResult {
    pub parameter: CausalParameter,
    pub assumptions: AssumptionSet,
    pub method: Method,
    pub status: BoundStatus,
    pub lower: Option<Rational>,
    pub upper: Option<Rational>,
    /// Entry attaining the lower endpoint (catalog only).
    pub active_lower: Option<SymbolicExpr>,
    pub active_upper: Option<SymbolicExpr>,
}

impl BoundResult {
    pub fn interval(
        parameter: CausalParameter,
        assumptions: AssumptionSet,
        method: Method,
        lower: Rational,
        upper: Rational,
    ) -> Self {
        let status = if lower > upper { BoundStatus::Crossed } else { BoundStatus::Ok };
        BoundResult {
            parameter,
            assumptions,
            method,
            status,
            lower: Some(lower),
            upper: Some(upper),
            active_lower: None,
            active_upper: None,
        }
    }

    pub fn infeasible(parameter: CausalParameter, assumptions: AssumptionSet, method: Method) -> Self {
        BoundResult {
            parameter,
            assumptions,
            method,
            status: BoundStatus::Infeasible,
            lower: None,
            upper: None,
            active_lower: None,
            active_upper: None,
        }
    }

    /// Both endpoints when the status is `Ok`.
    pub fn endpoints(&self) -> Option<(&Rational, &Rational)> {
        match (self.status, &self.lower, &self.upper) {
            (BoundStatus::Ok, Some(l), Some(u)) => Some((l, u)),
            _ => None,
        }
    }

    pub fn contains(&self, value: &Rational) -> bool {
        self.endpoints().is_some_and(|(l, u)| l <= value && value <= u)
    }

    /// `self` is a sub-interval of `other`.
    pub fn within(&self, other: &BoundResult) -> bool {
        match (self.endpoints(), other.endpoints()) {
            (Some((l, u)), Some((ol, ou))) => ol <= l && u <= ou,
            _ => false,
        }
    }

    pub fn same_interval(&self, other: &BoundResult) -> bool {
        self.status == other.status && self.lower == other.lower && self.upper == other.upper
    }
}

/// Lower and upper formulas for one parameter and assumption set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundFormula {
    pub parameter: CausalParameter,
    pub assumptions: AssumptionSet,
    pub lower: SymbolicBound,
    pub upper: SymbolicBound,
}

impl BoundFormula {
    pub fn bound(&self, direction: Direction) -> &SymbolicBound {
        match direction {
            Direction::Lower => &self.lower,
            Direction::Upper => &self.upper,
        }
    }
}

/// `p_{00.0} - p_{00.1} + p_{01.0} - p_{01.1}`, which equals the local
/// average treatment effect on any valid complier distribution.
pub fn tau_expression() -> SymbolicExpr {
    let cell = |y, m, z| CellLabel::Local(LocalCell::new(y, m, z));
    SymbolicExpr::from_terms(0, [(cell(0, 0, 0), 1), (cell(0, 0, 1), -1), (cell(0, 1, 0), 1), (cell(0, 1, 1), -1)])
}

/// Assumption sets with transcribed formulas, in table order. The empty set
/// shares the formulas of `{a4}` for population parameters.
pub fn population_combinations() -> Vec<AssumptionSet> {
    ["none", "a4", "a4,a5", "a4,a6", "a4,a7", "a4,a5,a6", "a4,a5,a7", "a4,a5,a6,a7"]
        .iter()
        .map(|s| s.parse().expect("valid assumption set"))
        .collect()
}

pub fn local_combinations() -> Vec<AssumptionSet> {
    population_combinations().into_iter().filter(|s| s.monotone_treatment_assignment).collect()
}

pub struct Catalog {
    printed: BTreeMap<(CausalParameter, AssumptionSet), BoundFormula>,
    formulas: BTreeMap<(CausalParameter, AssumptionSet), BoundFormula>,
}

type EntryMap = BTreeMap<(CausalParameter, AssumptionSet, Direction), Vec<SymbolicExpr>>;

fn assemble(entries: &EntryMap) -> Result<BTreeMap<(CausalParameter, AssumptionSet), BoundFormula>, String> {
    let mut formulas = BTreeMap::new();
    for (&(p, s, d), list) in entries {
        if d == Direction::Upper {
            continue;
        }
        let up = entries.get(&(p, s, Direction::Upper)).ok_or_else(|| format!("{p} {s}: no upper entries"))?;
        let formula = BoundFormula {
            parameter: p,
            assumptions: s,
            lower: SymbolicBound::new(Direction::Lower, list.clone()),
            upper: SymbolicBound::new(Direction::Upper, up.clone()),
        };
        formulas.insert((p, s), formula);
    }
    if let Some(&(p, s, _)) = entries.keys().find(|(p, s, _)| !formulas.contains_key(&(*p, *s))) {
        return Err(format!("{p} {s}: no lower entries"));
    }
    Ok(formulas)
}

impl Catalog {
    fn load() -> Result<Self, String> {
        let mut entries = EntryMap::new();
        for (name, text) in golden::FILES {
            for entry in golden::parse_file(text).map_err(|e| format!("{name}: {e}"))? {
                entries.entry((entry.parameter, entry.assumptions, entry.direction)).or_default().push(entry.expr);
            }
        }
        let printed = assemble(&entries)?;
        for erratum in golden::parse_errata(golden::ERRATA)? {
            let old = &erratum.printed;
            let list = entries
                .get_mut(&(old.parameter, old.assumptions, old.direction))
                .ok_or_else(|| format!("erratum for unknown display: {}", golden::render_line(old)))?;
            let at = list
                .iter()
                .position(|e| *e == old.expr)
                .ok_or_else(|| format!("erratum does not match a printed entry: {}", golden::render_line(old)))?;
            list[at] = erratum.corrected.expr;
        }
        let mut formulas = assemble(&entries)?;

        // Local direct effects and the local total effect follow from the
        // mediation formulas through tau = LACME(1 - a) + LNDE(a).
        let tau = tau_expression();
        for s in local_combinations() {
            for arm in Arm::BOTH {
                let lacme = formulas
                    .get(&(CausalParameter::Lacme(arm.flip()), s))
                    .ok_or_else(|| format!("missing LACME({}) under {s}", arm.flip().bit()))?;
                let shift = |b: &SymbolicBound, d| {
                    SymbolicBound::new(d, b.entries.iter().map(|e| tau.minus(e)).collect())
                };
                let formula = BoundFormula {
                    parameter: CausalParameter::Lnde(arm),
                    assumptions: s,
                    lower: shift(&lacme.upper, Direction::Lower),
                    upper: shift(&lacme.lower, Direction::Upper),
                };
                formulas.insert((CausalParameter::Lnde(arm), s), formula);
            }
            formulas.insert(
                (CausalParameter::Late, s),
                BoundFormula {
                    parameter: CausalParameter::Late,
                    assumptions: s,
                    lower: SymbolicBound::new(Direction::Lower, vec![tau.clone()]),
                    upper: SymbolicBound::new(Direction::Upper, vec![tau.clone()]),
                },
            );
        }
        Ok(Catalog { printed, formulas })
    }

    /// Formulas exactly as transcribed, before the errata are applied.
    /// Only population and local mediation parameters have printed forms.
    pub fn printed(&self, parameter: CausalParameter, assumptions: AssumptionSet) -> Option<&BoundFormula> {
        self.printed.get(&(parameter, assumptions))
    }

    pub fn printed_formulas(&self) -> impl Iterator<Item = &BoundFormula> {
        self.printed.values()
    }

    pub fn formulas(&self) -> impl Iterator<Item = &BoundFormula> {
        self.formulas.values()
    }

    pub fn lookup(&self, parameter: CausalParameter, assumptions: AssumptionSet) -> Result<&BoundFormula, CatalogError> {
        if parameter.is_local() && !assumptions.monotone_treatment_assignment {
            return Err(CatalogError::NeedsMonotoneCompliance(parameter));
        }
        let key = if !parameter.is_local() && assumptions == AssumptionSet::NONE {
            AssumptionSet::from_flags(true, false, false, false)
        } else {
            assumptions
        };
        self.formulas.get(&(parameter, key)).ok_or(CatalogError::Uncataloged { parameter, assumptions })
    }
}

static CATALOG: LazyLock<Catalog> = LazyLock::new(|| Catalog::load().expect("golden formulas parse"));

pub fn catalog() -> &'static Catalog {
    &CATALOG
}

/// Formulas for a parameter and assumption set. Population parameters under
/// no monotonicity return the very same object as under `{a4}`.
pub fn lookup(parameter: CausalParameter, assumptions: AssumptionSet) -> Result<&'static BoundFormula, CatalogError> {
    catalog().lookup(parameter, assumptions)
}

/// Evaluates both formulas exactly. The reported assumption set is the one
/// asked for, which may differ from `formula.assumptions` for aliased sets.
pub fn evaluate(
    formula: &BoundFormula,
    assumptions: AssumptionSet,
    data: ObservedData<'_>,
) -> Result<BoundResult, CatalogError> {
    let matches = matches!(
        (formula.parameter.is_local(), data),
        (false, ObservedData::Population(_)) | (true, ObservedData::Local(_))
    );
    if !matches {
        return Err(CatalogError::FamilyMismatch(formula.parameter));
    }
    let (lo, lo_at) = formula.lower.evaluate(&data)?;
    let (up, up_at) = formula.upper.evaluate(&data)?;
    let mut result = BoundResult::interval(formula.parameter, assumptions, Method::Catalog, lo, up);
    result.active_lower = Some(formula.lower.entries[lo_at].clone());
    result.active_upper = Some(formula.upper.entries[up_at].clone());
    Ok(result)
}

/// Outcome of identifying the complier cell law.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LocalIdentification {
    Identified(LocalObservedDistribution),
    /// Some complier cell came out negative: the data contradict monotone
    /// compliance.
    Infeasible { cells: [Rational; LocalCell::COUNT], delta: Rational },
}

/// Complier-conditional cell law by per-arm differencing:
///
/// * `p_{ym.1} = (P(y, m, A=1 | Z=1) - P(y, m, A=1 | Z=0)) / delta`
/// * `p_{ym.0} = (P(y, m, A=0 | Z=0) - P(y, m, A=0 | Z=1)) / delta`
///
/// with `delta = P(A=1 | Z=1) - P(A=1 | Z=0)`.
pub fn local_distribution(observed: &ObservedDistribution) -> Result<LocalIdentification, CatalogError> {
    let delta = observed.compliance_share();
    if !delta.is_positive() {
        return Err(CatalogError::NoCompliers(delta.to_string()));
    }
    let cells: [Rational; LocalCell::COUNT] = std::array::from_fn(|i| {
        let c = LocalCell::from_index(i);
        let a = c.z;
        let same = observed.p(ObservedCell::new(c.y, c.m, a, c.z));
        let other = observed.p(ObservedCell::new(c.y, c.m, a, 1 - c.z));
        (same - other) / &delta
    });
    if cells.iter().any(Signed::is_negative) {
        return Ok(LocalIdentification::Infeasible { cells, delta });
    }
    let local = LocalObservedDistribution::new(cells.clone(), delta.clone());
    Ok(match local {
        Ok(d) => LocalIdentification::Identified(d),
        Err(_) => LocalIdentification::Infeasible { cells, delta },
    })
}

/// Wald ratio `(P(Y=1|Z=1) - P(Y=1|Z=0)) / (P(A=1|Z=1) - P(A=1|Z=0))`.
pub fn late(observed: &ObservedDistribution) -> Result<Rational, CatalogError> {
    let delta = observed.compliance_share();
    if !delta.is_positive() {
        return Err(CatalogError::NoCompliers(delta.to_string()));
    }
    Ok((observed.outcome_share(1) - observed.outcome_share(0)) / delta)
}

/// `[tau - upper(LACME(1-a)), tau - lower(LACME(1-a))]`.
pub fn lnde_bounds(tau: &Rational, lacme: &BoundResult) -> BoundResult {
    let arm = lacme.parameter.arm().map_or(Arm::Zero, Arm::flip);
    let parameter = CausalParameter::Lnde(arm);
    match (&lacme.lower, &lacme.upper) {
        (Some(l), Some(u)) if lacme.status != BoundStatus::Infeasible => {
            let mut out = BoundResult::interval(parameter, lacme.assumptions, lacme.method, tau - u, tau - l);
            let tau_expr = tau_expression();
            out.active_lower = lacme.active_upper.as_ref().map(|e| tau_expr.minus(e));
            out.active_upper = lacme.active_lower.as_ref().map(|e| tau_expr.minus(e));
            out
        }
        _ => BoundResult::infeasible(parameter, lacme.assumptions, lacme.method),
    }
}

/// Catalog interval straight from the 16 observed cells. Local parameters
/// are evaluated on the identified complier law; if that law has a negative
/// cell the result is reported infeasible.
pub fn catalog_bounds(
    observed: &ObservedDistribution,
    parameter: CausalParameter,
    assumptions: AssumptionSet,
) -> Result<BoundResult, CatalogError> {
    let formula = lookup(parameter, assumptions)?;
    if !parameter.is_local() {
        return evaluate(formula, assumptions, ObservedData::Population(observed));
    }
    match local_distribution(observed)? {
        LocalIdentification::Identified(local) => evaluate(formula, assumptions, ObservedData::Local(&local)),
        LocalIdentification::Infeasible { .. } => Ok(BoundResult::infeasible(parameter, assumptions, Method::Catalog)),
    }
}

/// Normalization check used by tests and diagnostics: each arm of the
/// identified complier law sums to one.
pub fn arms_normalized(local: &LocalObservedDistribution) -> bool {
    (0..2u8).all(|z| LocalCell::arm(z).map(|c| local.p(c)).sum::<Rational>().is_one())
}

#[doc(hidden)]
pub fn zero_interval_width(result: &BoundResult) -> bool {
    result.endpoints().is_some_and(|(l, u)| (u - l).is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{int, ratio};

    fn s(text: &str) -> AssumptionSet {
        text.parse().unwrap()
    }

    #[test]
    fn golden_lines_round_trip() {
        for (name, text) in golden::FILES {
            for line in text.lines().filter(|l| !l.trim().is_empty()) {
                let entry = golden::parse_line(line).unwrap();
                let again = golden::parse_line(&golden::render_line(&entry)).unwrap();
                assert_eq!(again, entry, "{name}");
            }
        }
    }

    #[test]
    fn lookup_examples() {
        let f = lookup(CausalParameter::Acme(Arm::One), s("a4")).unwrap();
        assert_eq!(f.lower.entries.len(), 3);
        assert!(f.lower.entries.contains(&"p_{101.1} + p_{111.1} - 1".parse().unwrap()));
        let f = lookup(CausalParameter::Lacme(Arm::Zero), s("a4,a5,a6,a7")).unwrap();
        assert_eq!(f.upper.entries.len(), 4);
        assert!(f.upper.entries.contains(&"-p_{11.0} + p_{11.1}".parse().unwrap()));
        assert_eq!(
            lookup(CausalParameter::Acme(Arm::One), s("a5")),
            Err(CatalogError::Uncataloged { parameter: CausalParameter::Acme(Arm::One), assumptions: s("a5") })
        );
        assert!(matches!(lookup(CausalParameter::Ate, s("a4")), Err(CatalogError::Uncataloged { .. })));
        assert_eq!(
            lookup(CausalParameter::Lacme(Arm::One), s("a5")),
            Err(CatalogError::NeedsMonotoneCompliance(CausalParameter::Lacme(Arm::One)))
        );
    }

    #[test]
    fn empty_set_aliases_a4() {
        for p in CausalParameter::POPULATION {
            let none = lookup(p, AssumptionSet::NONE).unwrap();
            let a4 = lookup(p, s("a4")).unwrap();
            assert!(std::ptr::eq(none, a4));
        }
    }

    #[test]
    fn upper_acme_identity_across_a6() {
        for arm in Arm::BOTH {
            let a = lookup(CausalParameter::Acme(arm), s("a4,a5,a7")).unwrap();
            let b = lookup(CausalParameter::Acme(arm), s("a4,a5,a6,a7")).unwrap();
            assert!(a.upper.same_entries(&b.upper));
        }
    }

    #[test]
    fn degenerate_data() {
        let data = ObservedDistribution::from_fn(|c| {
            if c == ObservedCell::new(1, 1, 1, 1) || c == ObservedCell::new(0, 0, 0, 0) {
                int(1)
            } else {
                int(0)
            }
        })
        .unwrap();
        let r = catalog_bounds(&data, CausalParameter::Acme(Arm::One), s("a4")).unwrap();
        assert_eq!((r.lower.unwrap(), r.upper.unwrap()), (int(0), int(1)));
        assert_eq!(r.status, BoundStatus::Ok);
    }

    #[test]
    fn family_mismatch() {
        let f = lookup(CausalParameter::Lacme(Arm::One), s("a4")).unwrap();
        let data = crate::observed::uniform_observed();
        assert_eq!(
            evaluate(f, s("a4"), ObservedData::Population(&data)),
            Err(CatalogError::FamilyMismatch(CausalParameter::Lacme(Arm::One)))
        );
    }

    #[test]
    fn perfect_compliance_identification() {
        // A = Z: the complier law is the arm-conditional law of (Y, M).
        let data = ObservedDistribution::from_fn(|c| {
            if c.a != c.z {
                int(0)
            } else {
                ratio(i64::from(1 + c.y + 2 * c.m), 10)
            }
        })
        .unwrap();
        let LocalIdentification::Identified(local) = local_distribution(&data).unwrap() else {
            panic!("identifiable");
        };
        assert_eq!(*local.delta(), int(1));
        for c in LocalCell::all() {
            assert_eq!(*local.p(c), *data.p(ObservedCell::new(c.y, c.m, c.z, c.z)));
        }
        assert!(arms_normalized(&local));
        assert_eq!(late(&data).unwrap(), data.outcome_share(1) - data.outcome_share(0));
    }

    #[test]
    fn zero_compliance_is_an_error() {
        let data = crate::observed::uniform_observed();
        assert!(matches!(local_distribution(&data), Err(CatalogError::NoCompliers(_))));
        assert!(matches!(late(&data), Err(CatalogError::NoCompliers(_))));
    }

    #[test]
    fn lnde_from_symmetric_lacme() {
        let lacme = BoundResult::interval(
            CausalParameter::Lacme(Arm::Zero),
            s("a4"),
            Method::Catalog,
            ratio(-1, 4),
            ratio(1, 4),
        );
        let out = lnde_bounds(&int(0), &lacme);
        assert_eq!(out.parameter, CausalParameter::Lnde(Arm::One));
        assert_eq!((out.lower.unwrap(), out.upper.unwrap()), (ratio(-1, 4), ratio(1, 4)));
    }

    #[test]
    fn crossed_is_reported_not_raised() {
        let r = BoundResult::interval(CausalParameter::Ate, s("a4"), Method::Oracle, int(1), int(0));
        assert_eq!(r.status, BoundStatus::Crossed);
        assert!(r.endpoints().is_none());
    }
}
