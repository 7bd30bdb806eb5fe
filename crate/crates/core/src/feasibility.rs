//! Whether observed data are compatible with an assumption set.

use serde::{Deserialize, Serialize};

use crate::latent::{ConstraintSystem, LinearFunctional, SystemKind};
use crate::lp::{solve, LpError, LpStatus, Sense};
use crate::observed::ObservedDistribution;
use crate::param::AssumptionSet;
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub assumptions: AssumptionSet,
    /// Some latent law on the admissible cells reproduces the data.
    pub feasible: bool,
    /// `P(A=1|Z=1) - P(A=1|Z=0)`, as an exact fraction.
    pub compliance_share: String,
    /// `P(A=1|Z=1) >= P(A=1|Z=0)`; only reported when a4 is assumed.
    pub monotone_compliance_margin: Option<bool>,
}

impl FeasibilityReport {
    /// The margin check failed but the LP still found a latent law. The
    /// margin is necessary for a4, not sufficient (each always-taker cell
    /// also needs `p_{ym1.1} >= p_{ym1.0}`), so only this direction is a
    /// contradiction.
    pub fn inconsistent(&self) -> bool {
        self.monotone_compliance_margin == Some(false) && self.feasible
    }
}

/// Runs a zero-objective LP over the latent system and, under a4, the
/// marginal check on the treatment shares.
pub fn check_feasibility(
    observed: &ObservedDistribution,
    assumptions: AssumptionSet,
) -> Result<FeasibilityReport, LpError> {
    let system = ConstraintSystem::population(assumptions);
    let targets = system.population_targets(observed);
    let outcome = solve(Sense::Minimize, &LinearFunctional::zero(SystemKind::Population), &system, &targets)?;
    let delta: Rational = observed.compliance_share();
    let margin = assumptions.monotone_treatment_assignment.then(|| delta >= Rational::from_integer(0.into()));
    Ok(FeasibilityReport {
        assumptions,
        feasible: outcome.status == LpStatus::Optimal,
        compliance_share: delta.to_string(),
        monotone_compliance_margin: margin,
    })
}
