//! Random latent worlds and the property suite that checks catalog bounds
//! against them.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::catalog::{catalog_bounds, local_distribution, BoundResult, CatalogError, LocalIdentification};
use crate::feasibility::check_feasibility;
use crate::latent::{admissible_indices, functional_for, LatentDistribution, LatentError, SystemKind};
use crate::observed::ObservedDistribution;
use crate::oracle::oracle_bounds;
use crate::par::Execution;
use crate::param::{Arm, AssumptionSet, CausalParameter};
use crate::Rational;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// SplitMix64. The stream for `(seed, world)` is reproducible on its own,
/// so single worlds can be replayed without running the ones before them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn for_world(seed: u64, world: u64) -> Self {
        SplitMix64 { state: mix(seed ^ mix(world.wrapping_add(GOLDEN))) }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix(self.state)
    }

    /// Uniform on `0..n` (Lemire's multiply-shift, with rejection).
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        let threshold = n.wrapping_neg() % n;
        loop {
            let m = u128::from(self.next_u64()) * u128::from(n);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }
}

/// Resolution of the quantized exponential weights.
pub const WEIGHT_SCALE: u64 = 1 << 16;

impl SplitMix64 {
    /// Uniform on `(0, 1]` with 53 bits.
    pub fn unit(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 / (1u64 << 53) as f64
    }

    /// Standard exponential variate quantized to an integer weight:
    /// `1 + floor(-ln(u) * 2^16)`. Normalizing independent draws gives a
    /// flat Dirichlet up to the quantization.
    pub fn exponential_weight(&mut self) -> u64 {
        1 + (-self.unit().ln() * WEIGHT_SCALE as f64).floor() as u64
    }
}

/// Latent law with an independent exponential weight on every admissible
/// cell, normalized. Supports are full, so the implied data are interior
/// points of the model.
pub fn sample_latent(rng: &mut SplitMix64, kind: SystemKind, assumptions: AssumptionSet) -> LatentDistribution {
    let cells = admissible_indices(kind, assumptions);
    let weights: Vec<u64> = cells.iter().map(|_| rng.exponential_weight()).collect();
    from_weights(kind, assumptions, &cells, &weights)
}

/// Latent law on a few admissible cells only (between one and four), which
/// puts the implied data on the boundary of the model.
pub fn sample_sparse_latent(
    rng: &mut SplitMix64,
    kind: SystemKind,
    assumptions: AssumptionSet,
) -> LatentDistribution {
    let cells = admissible_indices(kind, assumptions);
    let support = 1 + rng.below(4) as usize;
    let mut chosen: Vec<usize> = Vec::with_capacity(support);
    while chosen.len() < support.min(cells.len()) {
        let c = cells[rng.below(cells.len() as u64) as usize];
        if !chosen.contains(&c) {
            chosen.push(c);
        }
    }
    chosen.sort_unstable();
    let weights: Vec<u64> = chosen.iter().map(|_| rng.exponential_weight()).collect();
    from_weights(kind, assumptions, &chosen, &weights)
}

fn from_weights(kind: SystemKind, assumptions: AssumptionSet, cells: &[usize], weights: &[u64]) -> LatentDistribution {
    let total: u64 = weights.iter().sum();
    let mut q = vec![Rational::zero(); kind.cell_count()];
    for (&c, &w) in cells.iter().zip(weights) {
        q[c] = crate::ratio(w as i64, total as i64);
    }
    LatentDistribution::new(kind, q, assumptions).expect("weights on admissible cells form a latent law")
}

/// Exact value of a parameter under a population latent law. Local
/// parameters are conditional on compliers.
pub fn true_value(q: &LatentDistribution, parameter: CausalParameter) -> Result<Rational, LatentError> {
    assert_eq!(q.kind, SystemKind::Population, "true values are defined on the population law");
    if parameter.is_local() {
        let compliers = q.complier_restriction()?;
        Ok(functional_for(parameter).value(&compliers))
    } else {
        Ok(functional_for(parameter).value(q))
    }
}

/// One sampled population and everything implied by it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulatedWorld {
    pub seed: u64,
    pub index: u64,
    pub assumptions: AssumptionSet,
    pub latent: LatentDistribution,
    /// Conditional law of compliers; `None` when there are none.
    pub compliers: Option<LatentDistribution>,
    pub observed: ObservedDistribution,
    pub truths: BTreeMap<CausalParameter, Rational>,
}

/// Every fourth world is a boundary world with one to four latent cells.
pub fn is_boundary_world(index: u64) -> bool {
    index % 4 == 3
}

fn stream(seed: u64, assumptions: AssumptionSet, index: u64) -> SplitMix64 {
    SplitMix64::for_world(seed, (u64::from(assumptions.bits()) << 32) | index)
}

/// Rebuilds world `index` of the stream for `(seed, assumptions)`.
pub fn sample_world(seed: u64, assumptions: AssumptionSet, index: u64) -> SimulatedWorld {
    let mut rng = stream(seed, assumptions, index);
    let latent = if is_boundary_world(index) {
        sample_sparse_latent(&mut rng, SystemKind::Population, assumptions)
    } else {
        sample_latent(&mut rng, SystemKind::Population, assumptions)
    };
    world_from_latent(seed, index, assumptions, latent)
}

pub fn world_from_latent(seed: u64, index: u64, assumptions: AssumptionSet, latent: LatentDistribution) -> SimulatedWorld {
    let compliers = latent.complier_restriction().ok();
    let mut truths = BTreeMap::new();
    for p in CausalParameter::POPULATION.into_iter().chain(std::iter::once(CausalParameter::Ate)) {
        truths.insert(p, true_value(&latent, p).expect("population parameters always have a value"));
    }
    if compliers.is_some() {
        for p in CausalParameter::LOCAL.into_iter().chain(std::iter::once(CausalParameter::Late)) {
            truths.insert(p, true_value(&latent, p).expect("complier mass is positive"));
        }
    }
    let observed = latent.implied_observed();
    SimulatedWorld { seed, index, assumptions, latent, compliers, observed, truths }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    /// The generating assumption set admits the implied data.
    Feasible,
    /// Complier-difference identification reproduces the complier cell law.
    ComplierLaw,
    TruthInCatalog,
    TruthInOracle,
    OracleWithinCatalog,
    /// Catalog and oracle agree exactly where the formulas are sharp.
    Sharp,
    /// Oracle interval under this set lies inside the one under each subset.
    Nesting,
    /// The two catalog upper bounds stated to coincide do coincide.
    UpperIdentity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub assumptions: AssumptionSet,
    pub world: u64,
    pub parameter: Option<CausalParameter>,
    pub check: Check,
    pub detail: String,
    /// Nonzero latent cells as `index=fraction`, enough to replay the world.
    pub latent: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComboSummary {
    pub assumptions: AssumptionSet,
    pub worlds: u64,
    pub checks: u64,
    pub violations: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub worlds_per_combo: u64,
    pub combos: Vec<ComboSummary>,
    pub violations: Vec<Violation>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn checks(&self) -> u64 {
        self.combos.iter().map(|c| c.checks).sum()
    }

    pub fn violations_of(&self, check: Check) -> usize {
        self.violations.iter().filter(|v| v.check == check).count()
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub combos: Vec<AssumptionSet>,
    pub worlds: u64,
    pub seed: u64,
    /// Compare oracle intervals with those under every listed subset.
    pub nesting: bool,
    pub execution: Execution,
}

impl SuiteConfig {
    pub fn new(combos: Vec<AssumptionSet>, worlds: u64, seed: u64) -> Self {
        SuiteConfig { combos, worlds, seed, nesting: true, execution: Execution::default() }
    }
}

/// Combinations whose formulas are claimed sharp: every cataloged set that
/// contains a4.
pub fn is_sharp_combo(assumptions: AssumptionSet) -> bool {
    assumptions.monotone_treatment_assignment
}

struct WorldOutcome {
    checks: u64,
    violations: Vec<Violation>,
}

fn latent_cells(q: &LatentDistribution) -> Vec<String> {
    q.q().iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(i, v)| format!("{i}={v}")).collect()
}

fn interval_text(r: &BoundResult) -> String {
    match (&r.lower, &r.upper) {
        (Some(l), Some(u)) => format!("{} [{l}, {u}]", r.status),
        _ => r.status.to_string(),
    }
}

fn check_world(world: &SimulatedWorld, config: &SuiteConfig) -> WorldOutcome {
    let mut out = WorldOutcome { checks: 0, violations: Vec::new() };
    let s = world.assumptions;
    let mut record = |parameter: Option<CausalParameter>, check: Check, ok: bool, detail: String| {
        out.checks += 1;
        if !ok {
            out.violations.push(Violation {
                assumptions: s,
                world: world.index,
                parameter,
                check,
                detail,
                latent: latent_cells(&world.latent),
            });
        }
    };

    match check_feasibility(&world.observed, s) {
        Ok(report) => record(None, Check::Feasible, report.feasible, "implied data rejected by the LP probe".into()),
        Err(e) => record(None, Check::Feasible, false, e.to_string()),
    }

    let mut params: Vec<CausalParameter> = CausalParameter::POPULATION.to_vec();
    params.push(CausalParameter::Ate);
    let local_ok = s.monotone_treatment_assignment && world.compliers.is_some();
    if local_ok {
        let identified = local_distribution(&world.observed);
        let expected = world.compliers.as_ref().map(|c| c.implied_local(world.latent.complier_mass()));
        let same = matches!((&identified, &expected), (Ok(LocalIdentification::Identified(d)), Some(e)) if d == e);
        record(None, Check::ComplierLaw, same, format!("identified {identified:?}"));
        params.extend(CausalParameter::LOCAL);
        params.push(CausalParameter::Late);
    }

    for p in params {
        let truth = &world.truths[&p];
        let oracle = match oracle_bounds(&world.observed, p, s) {
            Ok(r) => r,
            Err(e) => {
                record(Some(p), Check::TruthInOracle, false, e.to_string());
                continue;
            }
        };
        record(Some(p), Check::TruthInOracle, oracle.contains(truth), format!("truth {truth}, oracle {}", interval_text(&oracle)));

        let catalog = match catalog_bounds(&world.observed, p, s) {
            Ok(r) => Some(r),
            Err(CatalogError::Uncataloged { .. }) => None,
            Err(e) => {
                record(Some(p), Check::TruthInCatalog, false, e.to_string());
                None
            }
        };
        if let Some(catalog) = &catalog {
            let detail = format!("truth {truth}, catalog {}, oracle {}", interval_text(catalog), interval_text(&oracle));
            record(Some(p), Check::TruthInCatalog, catalog.contains(truth), detail.clone());
            record(Some(p), Check::OracleWithinCatalog, oracle.within(catalog), detail.clone());
            if is_sharp_combo(s) {
                record(Some(p), Check::Sharp, oracle.same_interval(catalog), detail);
            }
        }

        if config.nesting {
            for &weaker in config.combos.iter().filter(|w| **w != s && w.is_subset_of(s)) {
                if p.is_local() && !weaker.monotone_treatment_assignment {
                    continue;
                }
                match oracle_bounds(&world.observed, p, weaker) {
                    Ok(wide) => record(
                        Some(p),
                        Check::Nesting,
                        oracle.within(&wide),
                        format!("{s}: {} not inside {weaker}: {}", interval_text(&oracle), interval_text(&wide)),
                    ),
                    Err(e) => record(Some(p), Check::Nesting, false, e.to_string()),
                }
            }
        }
    }

    if s == AssumptionSet::from_flags(true, true, false, true) {
        let all = AssumptionSet::from_flags(true, true, true, true);
        for arm in Arm::BOTH {
            let p = CausalParameter::Acme(arm);
            let a = catalog_bounds(&world.observed, p, s).ok().and_then(|r| r.upper);
            let b = catalog_bounds(&world.observed, p, all).ok().and_then(|r| r.upper);
            record(Some(p), Check::UpperIdentity, a.is_some() && a == b, format!("{a:?} vs {b:?}"));
        }
    }
    out
}

/// Samples `worlds` worlds per combination and runs every applicable check.
/// Results are ordered by combination, then world.
pub fn run_property_suite(config: &SuiteConfig) -> SuiteReport {
    let mut combos = Vec::new();
    let mut violations = Vec::new();
    for &s in &config.combos {
        let outcomes = config.execution.map_range(config.worlds as usize, |i| {
            let world = sample_world(config.seed, s, i as u64);
            check_world(&world, config)
        });
        let checks = outcomes.iter().map(|o| o.checks).sum();
        let before = violations.len();
        for o in outcomes {
            violations.extend(o.violations);
        }
        combos.push(ComboSummary {
            assumptions: s,
            worlds: config.worlds,
            checks,
            violations: (violations.len() - before) as u64,
        });
    }
    SuiteReport { seed: config.seed, worlds_per_combo: config.worlds, combos, violations }
}

/// Runs the checks on a single replayed world.
pub fn replay(config: &SuiteConfig, assumptions: AssumptionSet, index: u64) -> Vec<Violation> {
    check_world(&sample_world(config.seed, assumptions, index), config).violations
}
