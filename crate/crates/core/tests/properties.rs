use proptest::prelude::*;

use cophy::generate::{gen_random_reconciliation, RandomSpec};
use cophy::io::{emit_json, parse_instance, parse_json, CophyInstance, LayoutDocument};
use cophy::layout::{check_layout, run_algorithm, Algorithm, LayoutOptions};
use cophy::oracle::{brute_force_min_crossings, OracleLimits};
use cophy::parse_newick;
use cophy::planar::is_planar_instance;

fn spec() -> impl Strategy<Value = RandomSpec> {
    (
        2usize..=6,
        2usize..=6,
        prop_oneof![Just(0.0), Just(0.2), Just(0.5)],
        any::<u64>(),
    )
        .prop_map(
            |(host_leaves, parasite_leaves, switch_rate, seed)| RandomSpec {
                host_leaves,
                parasite_leaves,
                switch_rate,
                seed,
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generator_is_deterministic(s in spec()) {
        let a = gen_random_reconciliation(s).unwrap();
        let b = gen_random_reconciliation(s).unwrap();
        prop_assert_eq!(a.host().to_newick(), b.host().to_newick());
        prop_assert_eq!(a.parasite().to_newick(), b.parasite().to_newick());
        prop_assert_eq!(a.gamma_vec(), b.gamma_vec());
    }

    #[test]
    fn generated_mappings_are_valid(s in spec()) {
        let rec = gen_random_reconciliation(s).unwrap();
        prop_assert!(rec.validate().is_valid());
        prop_assert!(rec.classify_events().is_ok());
        if s.switch_rate == 0.0 {
            prop_assert!(rec.check_time_consistency().is_some());
        }
        if let Some(order) = rec.check_time_consistency() {
            prop_assert!(order.is_valid_for(&rec));
        }
    }

    #[test]
    fn layouts_are_valid_and_bounded_below(s in spec(), compact_y in any::<bool>()) {
        let rec = gen_random_reconciliation(s).unwrap();
        prop_assume!(rec.check_time_consistency().is_some());
        let planar = is_planar_instance(rec.host_arc(), rec.parasite_arc(), rec.phi_vec()).unwrap();
        let opts = LayoutOptions { compact_y, ..LayoutOptions::default() };
        let oracle = brute_force_min_crossings(&rec, OracleLimits::default()).unwrap();
        prop_assert_eq!(oracle.min_crossings == 0, planar);
        for algo in [Algorithm::Planar, Algorithm::Shs, Algorithm::Smp] {
            match run_algorithm(algo, &rec, opts) {
                Ok(l) => {
                    let report = check_layout(&l, &rec);
                    prop_assert!(report.is_valid(), "{}: {:?}", algo.name(), report.violations);
                    prop_assert!(l.downward);
                    if !compact_y {
                        prop_assert!(l.crossing_count() >= oracle.min_crossings);
                    }
                    if planar {
                        prop_assert_eq!(l.crossing_count(), 0);
                    }
                }
                Err(e) => prop_assert!(algo == Algorithm::Planar && !planar, "{e}"),
            }
        }
    }

    #[test]
    fn json_round_trips(s in spec()) {
        let rec = gen_random_reconciliation(s).unwrap();
        prop_assume!(rec.check_time_consistency().is_some());
        let l = run_algorithm(Algorithm::Smp, &rec, LayoutOptions::default()).unwrap();
        let doc = LayoutDocument::new(&rec, "g", Algorithm::Smp, LayoutOptions::default(), l).unwrap();
        let text = emit_json(&doc);
        let back = parse_json(&text).unwrap();
        prop_assert_eq!(emit_json(&back), text);
        prop_assert!(back.verify(&rec).is_ok());
    }

    #[test]
    fn newick_and_instance_text_round_trip(s in spec()) {
        let rec = gen_random_reconciliation(s).unwrap();
        let nw = rec.parasite().to_newick();
        prop_assert_eq!(parse_newick(&nw).unwrap().to_newick(), nw.clone());
        let inst = CophyInstance::from_reconciliation(&rec, "g");
        let again = parse_instance(&inst.to_text()).unwrap();
        let back = again.reconciliation(0).unwrap();
        // ids may be renumbered by the parser; compare by label
        let by_label = |r: &cophy::Reconciliation| {
            let mut m: Vec<(String, String)> = r
                .parasite()
                .nodes()
                .map(|v| (r.parasite().label(v).to_string(), r.host().label(r.gamma(v)).to_string()))
                .collect();
            m.sort();
            m
        };
        prop_assert_eq!(by_label(&back), by_label(&rec));
        prop_assert_eq!(again.to_text(), inst.to_text());
    }
}
