//! Sharp bounds by exact linear programming over the latent response types.

use thiserror::Error;

use crate::catalog::{local_distribution, BoundResult, CatalogError, LocalIdentification, Method};
use crate::latent::{functional_for, ConstraintSystem};
use crate::lp::{solve, LpError, LpStatus, Sense};
use crate::observed::{LocalObservedDistribution, ObservedDistribution};
use crate::param::{AssumptionSet, CausalParameter};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("internal LP error: {0}")]
    Lp(#[from] LpError),
}

/// `[min, max]` of the parameter over every latent law on the admissible
/// cells that reproduces the data. Incompatible data give an `Infeasible`
/// result rather than an error.
///
/// Local parameters are bounded on the complier system, with targets taken
/// from [`local_distribution`].
pub fn oracle_bounds(
    observed: &ObservedDistribution,
    parameter: CausalParameter,
    assumptions: AssumptionSet,
) -> Result<BoundResult, OracleError> {
    if !parameter.is_local() {
        let system = ConstraintSystem::population(assumptions);
        let targets = system.population_targets(observed);
        return optimize(&system, &targets, parameter, assumptions);
    }
    if !assumptions.monotone_treatment_assignment {
        return Err(CatalogError::NeedsMonotoneCompliance(parameter).into());
    }
    match local_distribution(observed)? {
        LocalIdentification::Identified(local) => local_oracle_bounds(&local, parameter, assumptions),
        LocalIdentification::Infeasible { .. } => Ok(BoundResult::infeasible(parameter, assumptions, Method::Oracle)),
    }
}

/// Oracle on an already identified complier law.
pub fn local_oracle_bounds(
    local: &LocalObservedDistribution,
    parameter: CausalParameter,
    assumptions: AssumptionSet,
) -> Result<BoundResult, OracleError> {
    if !parameter.is_local() {
        return Err(CatalogError::FamilyMismatch(parameter).into());
    }
    let system = ConstraintSystem::complier(assumptions);
    let targets = system.complier_targets(local);
    optimize(&system, &targets, parameter, assumptions)
}

fn optimize(
    system: &ConstraintSystem,
    targets: &[crate::Rational],
    parameter: CausalParameter,
    assumptions: AssumptionSet,
) -> Result<BoundResult, OracleError> {
    let objective = functional_for(parameter);
    let low = solve(Sense::Minimize, &objective, system, targets)?;
    if low.status == LpStatus::Infeasible {
        return Ok(BoundResult::infeasible(parameter, assumptions, Method::Oracle));
    }
    let high = solve(Sense::Maximize, &objective, system, targets)?;
    match (low.value, high.value) {
        (Some(l), Some(u)) => Ok(BoundResult::interval(parameter, assumptions, Method::Oracle, l, u)),
        _ => Ok(BoundResult::infeasible(parameter, assumptions, Method::Oracle)),
    }
}
