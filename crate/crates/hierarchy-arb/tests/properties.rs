//! Randomized properties over the exact-rational core and the generated
//! scenario stream.

use hierarchy_arb::dominance::{compute_ladder, dominated_set};
use hierarchy_arb::oracle::{generate_scenario, InstanceBounds};
use hierarchy_arb::rat::Rat;
use hierarchy_arb::scenario::{GainTable, Mode, ScenarioDocument};
use hierarchy_arb::simplex::{solve, Lp, LpOutcome};
use proptest::prelude::*;

fn arb_rat() -> impl Strategy<Value = Rat> {
    (any::<i32>(), 1..10_000i32).prop_map(|(n, d)| Rat::new(n as i64, d as i64))
}

proptest! {
    #[test]
    fn rational_display_parse_round_trip(r in arb_rat()) {
        let text = r.to_string();
        let back: Rat = text.parse().unwrap();
        prop_assert_eq!(back, r);
    }

    #[test]
    fn float_strings_always_rejected(x in any::<f64>()) {
        // Debug-format floats always carry '.' or an exponent marker.
        let text = format!("{x:?}");
        let err = text.parse::<Rat>().unwrap_err().to_string();
        prop_assert!(err.contains("exact rational required"), "{}", err);
    }

    #[test]
    fn rational_field_laws(a in arb_rat(), b in arb_rat(), c in arb_rat()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * (&b + &c), &a * &b + &a * &c);
        if !b.is_zero() {
            prop_assert_eq!((&a * &b) / b.clone(), a.clone());
        }
        prop_assert_eq!(&a - &a, Rat::zero());
    }

    /// Maximizing c·x under x_i ≤ b_i, x ≥ 0 has the closed-form optimum
    /// Σ_{c_i > 0} c_i·b_i.
    #[test]
    fn simplex_box_optimum_matches_closed_form(
        pairs in proptest::collection::vec((arb_rat(), (0..100i32)), 1..5)
    ) {
        let n = pairs.len();
        let mut a = Vec::new();
        let mut b = Vec::new();
        let mut c = Vec::new();
        for (i, (ci, bi)) in pairs.iter().enumerate() {
            // x_i + s_i = b_i in standard equality form.
            let mut row = vec![Rat::zero(); 2 * n];
            row[i] = Rat::one();
            row[n + i] = Rat::one();
            a.push(row);
            b.push(Rat::int(*bi as i64));
            c.push(ci.clone());
        }
        c.extend(std::iter::repeat(Rat::zero()).take(n));
        let expect: Rat = pairs
            .iter()
            .filter(|(ci, _)| ci.is_positive())
            .map(|(ci, bi)| ci * &Rat::int(*bi as i64))
            .sum();
        match solve(&Lp { a, b, c }) {
            LpOutcome::Optimal { value, .. } => prop_assert_eq!(value, expect),
            other => prop_assert!(false, "unexpected outcome {:?}", other),
        }
    }

    /// Every generated scenario's document survives a serialize/parse cycle
    /// and reconstructs the same scenario.
    #[test]
    fn generated_documents_round_trip(seed in any::<u64>(), index in 0usize..64) {
        let scen = generate_scenario(&InstanceBounds { seed, ..InstanceBounds::default() }, index);
        let doc = scen.to_document();
        let doc2 = ScenarioDocument::from_json(&doc.to_json()).unwrap();
        prop_assert_eq!(&doc, &doc2);
        prop_assert_eq!(doc2.to_scenario().unwrap(), scen);
    }

    /// Uniform dominance implies pointwise dominance, so the uniform
    /// round-1 dominated set is contained in the pointwise one.
    #[test]
    fn uniform_dominated_subset_of_pointwise(seed in any::<u64>(), index in 0usize..64) {
        let scen = generate_scenario(&InstanceBounds { seed, ..InstanceBounds::default() }, index);
        let table = GainTable::new(&scen);
        for i in 0..scen.agents().len() {
            let all: Vec<usize> = (0..scen.agents()[i].grid.len()).collect();
            let opponents = scen.opponent_profiles(i);
            let uni = dominated_set(&table, &scen, i, &opponents, &all, Mode::Uniform).unwrap();
            let pw = dominated_set(&table, &scen, i, &opponents, &all, Mode::Pointwise).unwrap();
            prop_assert!(uni.iter().all(|a| pw.contains(a)), "agent {}: {:?} ⊄ {:?}", i, uni, pw);
        }
    }

    /// Ladder levels only ever shrink, and the last two levels agree.
    #[test]
    fn ladders_shrink_and_stabilize(seed in any::<u64>(), index in 0usize..64) {
        let scen = generate_scenario(&InstanceBounds { seed, ..InstanceBounds::default() }, index);
        let ladders = compute_ladder(&scen, Mode::Uniform).unwrap();
        for ladder in &ladders {
            for w in ladder.levels.windows(2) {
                prop_assert!(w[1].iter().all(|a| w[0].contains(a)));
                prop_assert!(!w[1].is_empty());
            }
            let n = ladder.levels.len();
            prop_assert_eq!(&ladder.levels[n - 1], &ladder.levels[n - 2]);
        }
    }
}
