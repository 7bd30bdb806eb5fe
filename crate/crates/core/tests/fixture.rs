//! The JOBS II count fixture and what the pipeline does with it.

use medbounds::catalog::catalog_bounds;
use medbounds::counts::{estimate, parse_counts};
use medbounds::feasibility::check_feasibility;
use medbounds::oracle::oracle_bounds;
use medbounds::report::render_table;
use medbounds::{ratio, Arm, AssumptionSet, CausalParameter, ObservedCell};

const FIXTURE: &str = include_str!("../data/jobs_counts.csv");

#[test]
fn margins_match_the_study_description() {
    let t = parse_counts(FIXTURE).unwrap();
    assert_eq!(t.total(), 899);
    assert_eq!(t.arm_total(1), 600);
    assert_eq!(t.arm_total(0), 299);
    let treated: u64 = ObservedCell::arm(1).filter(|c| c.a == 1).map(|c| t.get(c)).sum();
    assert_eq!(treated, 372);
    let high_mediator: u64 = ObservedCell::all().filter(|c| c.m == 1).map(|c| t.get(c)).sum();
    assert_eq!(high_mediator, 555);
    // Nobody assigned to control attended.
    assert!(ObservedCell::arm(0).filter(|c| c.a == 1).all(|c| t.get(c) == 0));

    let p = estimate(&t).unwrap();
    assert_eq!(p.treated_share(1), ratio(372, 600));
    assert_eq!(p.compliance_share(), ratio(31, 50));
}

#[test]
fn headline_intervals() {
    let p = estimate(&parse_counts(FIXTURE).unwrap()).unwrap();
    let a4: AssumptionSet = "a4".parse().unwrap();
    let r = catalog_bounds(&p, CausalParameter::Acme(Arm::One), a4).unwrap();
    assert_eq!(r.endpoints().unwrap(), (&ratio(-159, 200), &ratio(117, 200)));
    let o = oracle_bounds(&p, CausalParameter::Acme(Arm::One), a4).unwrap();
    assert!(o.same_interval(&r));

    let all: AssumptionSet = "a4,a5,a6,a7".parse().unwrap();
    let l = catalog_bounds(&p, CausalParameter::Lnde(Arm::Zero), all).unwrap();
    assert_eq!(medbounds::report::round3(l.lower.as_ref().unwrap()), "0.016");
    assert_eq!(medbounds::report::round3(l.upper.as_ref().unwrap()), "0.093");
}

#[test]
fn fixture_is_compatible_with_every_set() {
    let p = estimate(&parse_counts(FIXTURE).unwrap()).unwrap();
    for s in AssumptionSet::all() {
        let r = check_feasibility(&p, s).unwrap();
        assert!(r.feasible, "{s}");
        assert!(!r.inconsistent());
    }
}

#[test]
fn first_table_layout() {
    let p = estimate(&parse_counts(FIXTURE).unwrap()).unwrap();
    let mut results = Vec::new();
    for s in ["none", "a4", "a4,a5", "a4,a6"] {
        for param in CausalParameter::POPULATION {
            results.push(catalog_bounds(&p, param, s.parse().unwrap()).unwrap());
        }
    }
    let text = render_table(&results);
    let expected = "\
parameter  A1-3             A1-4             A1-5             A1-4,6
ACME(0)    [-0.288, 0.678]  [-0.288, 0.678]  [-0.107, 0.175]  [-0.181, 0.328]
ACME(1)    [-0.795, 0.585]  [-0.795, 0.585]  [-0.228, 0.228]  [-0.373, 0.292]
NDE(0)     [-0.288, 0.712]  [-0.288, 0.712]  [-0.161, 0.375]  [-0.224, 0.441]
NDE(1)     [-0.760, 0.585]  [-0.760, 0.585]  [-0.257, 0.404]  [-0.410, 0.478]
";
    assert_eq!(text, expected);
}
