//! Small property-suite runs that exercise every check, nesting included.

use medbounds::catalog::{local_combinations, population_combinations};
use medbounds::par::Execution;
use medbounds::sim::{replay, run_property_suite, Check, SuiteConfig};
use medbounds::AssumptionSet;

#[test]
fn sharp_combinations_with_nesting() {
    let config = SuiteConfig::new(local_combinations(), 12, 41);
    let report = run_property_suite(&config);
    assert!(report.passed(), "{:#?}", report.violations);
    assert_eq!(report.combos.len(), 7);
    assert!(report.combos.iter().all(|c| c.checks > 0));
}

#[test]
fn unrestricted_violations_replay() {
    let config = SuiteConfig {
        nesting: false,
        execution: Execution::Sequential,
        ..SuiteConfig::new(vec![AssumptionSet::NONE], 40, 3)
    };
    let report = run_property_suite(&config);
    // Without a4 the catalog's a4 formulas are not valid for NDE.
    assert!(report.violations.iter().all(|v| v.assumptions == AssumptionSet::NONE));
    assert!(report.violations.iter().all(|v| matches!(v.check, Check::OracleWithinCatalog | Check::TruthInCatalog)));
    for v in report.violations.iter().take(3) {
        let again = replay(&config, v.assumptions, v.world);
        assert!(again.contains(v));
        assert!(!v.latent.is_empty());
    }
    assert_eq!(report, run_property_suite(&SuiteConfig { execution: Execution::Parallel, ..config.clone() }));
}

#[test]
fn stated_upper_identity_holds() {
    // ACME upper under a4,a5,a7 equals that under a4,a5,a6,a7.
    let s: AssumptionSet = "a4,a5,a7".parse().unwrap();
    let config = SuiteConfig { nesting: false, ..SuiteConfig::new(vec![s], 100, 11) };
    let report = run_property_suite(&config);
    assert_eq!(report.violations_of(Check::UpperIdentity), 0);
    assert!(report.passed());
    assert!(population_combinations().contains(&s));
}
