use proptest::prelude::*;

use medbounds::catalog::{BoundResult, Method};
use medbounds::counts::{parse_counts, parse_long, CountTable};
use medbounds::latent::{admissible_indices, functional_for, ConstraintSystem, SystemKind};
use medbounds::lp::{solve, LpStatus, Sense};
use medbounds::report::{parse_machine, render_machine, round3};
use medbounds::sim::{sample_latent, SplitMix64};
use medbounds::{int, ratio, AssumptionSet, CausalParameter, ObservedCell};

fn table_strategy() -> impl Strategy<Value = CountTable> {
    proptest::array::uniform16(0u64..12).prop_filter_map("both arms observed", |counts| {
        let t = CountTable::new(counts);
        (t.arm_total(0) > 0 && t.arm_total(1) > 0).then_some(t)
    })
}

fn set_strategy() -> impl Strategy<Value = AssumptionSet> {
    (0u8..16).prop_map(AssumptionSet::from_bits)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tally_of_expansion_is_identity(t in table_strategy()) {
        prop_assert_eq!(parse_long(&t.to_long_csv()).unwrap(), t.clone());
        prop_assert_eq!(parse_counts(&t.to_csv()).unwrap(), t);
    }

    #[test]
    fn thousandths_render_exactly(k in -5000i64..5000) {
        let sign = if k < 0 { "-" } else { "" };
        let expected = format!("{sign}{}.{:03}", k.abs() / 1000, k.abs() % 1000);
        prop_assert_eq!(round3(&ratio(k, 1000)), expected.clone());
        // Just short of the half above k/1000 rounds back to k/1000.
        let below = ratio(2 * k + 1, 2000) - ratio(1, 1_000_000);
        prop_assert_eq!(round3(&below), expected);
    }

    #[test]
    fn machine_document_round_trips(a in -1000i64..1000, b in 1i64..997, c in -1000i64..1000, bits in 0u8..16) {
        let s = AssumptionSet::from_bits(bits | 1);
        let r = BoundResult::interval(CausalParameter::Lnde(medbounds::Arm::Zero), s, Method::Oracle, ratio(a, b), ratio(c, b + 3));
        let back = parse_machine(&render_machine(std::slice::from_ref(&r))).unwrap();
        prop_assert_eq!(back, vec![r]);
    }

    #[test]
    fn minimum_is_negated_maximum_of_negation(seed in any::<u64>(), s in set_strategy(), which in 0usize..4) {
        let p = CausalParameter::POPULATION[which];
        let mut rng = SplitMix64::new(seed);
        let data = sample_latent(&mut rng, SystemKind::Population, s).implied_observed();
        let system = ConstraintSystem::population(s);
        let targets = system.population_targets(&data);
        let f = functional_for(p);
        let min = solve(Sense::Minimize, &f, &system, &targets).unwrap();
        let max_neg = solve(Sense::Maximize, &-&f, &system, &targets).unwrap();
        prop_assert_eq!(min.status, LpStatus::Optimal);
        prop_assert_eq!(min.value.unwrap(), -max_neg.value.unwrap());
    }

    #[test]
    fn samples_support_exactly_the_admissible_cells(seed in any::<u64>(), s in set_strategy()) {
        let mut rng = SplitMix64::new(seed);
        let q = sample_latent(&mut rng, SystemKind::Population, s);
        let support: Vec<usize> = q.q().iter().enumerate().filter(|(_, v)| **v > int(0)).map(|(i, _)| i).collect();
        prop_assert_eq!(support, admissible_indices(SystemKind::Population, s));
        let again = sample_latent(&mut SplitMix64::new(seed), SystemKind::Population, s);
        prop_assert_eq!(q, again);
    }
}

#[test]
fn support_sizes() {
    let count = |s: &str| admissible_indices(SystemKind::Population, s.parse().unwrap()).len();
    assert_eq!(count("none"), 256);
    assert_eq!(count("a4"), 192);
    // 9 outcome types, 3 mediator types, 3 uptake types.
    assert_eq!(count("a4,a5,a6,a7"), 6 * 3 * 3);
}

#[test]
fn implied_cells_of_always_taker_point_mass() {
    let q = medbounds::latent::LatentDistribution::point_mass(SystemKind::Population, 0);
    let p = q.implied_observed();
    assert_eq!(*p.p(ObservedCell::new(1, 1, 1, 1)), int(1));
    assert_eq!(*p.p(ObservedCell::new(1, 1, 1, 0)), int(1));
}
