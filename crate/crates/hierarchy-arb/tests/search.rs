//! Seeded search harnesses used to discover the frozen fixtures under
//! `tests/golden/`. They are `#[ignore]`d: run them manually with
//! `cargo test --test search -- --ignored --nocapture` when a fixture needs
//! to be (re)discovered. Each prints replayable scenario documents.

use hierarchy_arb::dominance::compute_ladder;
use hierarchy_arb::oracle::{generate_scenario, InstanceBounds};
use hierarchy_arb::scenario::Mode;
use hierarchy_arb::tatonnement::{self, Alpha, Terminal};

fn bounds_with_seed(seed: u64) -> InstanceBounds {
    InstanceBounds { seed, ..InstanceBounds::default() }
}

/// Looks for a scenario whose uniform ladder needs at least three
/// eliminating rounds before stabilizing.
#[test]
#[ignore]
fn find_deep_ladder() {
    for seed in 0..20 {
        let bounds = bounds_with_seed(seed);
        for index in 0..bounds.scenario_count {
            let scen = generate_scenario(&bounds, index);
            let Ok(ladders) = compute_ladder(&scen, Mode::Uniform) else { continue };
            // stabilization_index counts rounds including the final no-op
            // verification round, so >= 4 means >= 3 eliminating rounds.
            if ladders[0].stabilization_index >= 4 {
                println!(
                    "seed {seed} index {index}: {} rounds\n{}",
                    ladders[0].stabilization_index,
                    scen.to_document().to_json()
                );
                return;
            }
        }
    }
    panic!("no deep ladder found in the searched range");
}

/// Looks for an adjustment trace containing an upward order jump of
/// exactly 3.
#[test]
#[ignore]
fn find_alpha3_trace() {
    for seed in 0..50 {
        let bounds = bounds_with_seed(seed);
        for index in 0..bounds.scenario_count {
            let scen = generate_scenario(&bounds, index);
            let Ok(ladders) = compute_ladder(&scen, Mode::Uniform) else { continue };
            if ladders[0].stabilization_index < 4 {
                continue; // a 0 -> 3 jump needs an order-3 cell somewhere
            }
            for start in scen.profiles() {
                let Ok(mut trace) = tatonnement::run(&scen, &start, 50) else { continue };
                if trace.terminal != Terminal::NoArbitrage {
                    continue;
                }
                if tatonnement::annotate_prop6(&mut trace, &ladders, &scen).is_err() {
                    continue;
                }
                if trace
                    .steps
                    .iter()
                    .any(|s| matches!(s.alpha, Some(Alpha::Jump(3))))
                {
                    println!(
                        "seed {seed} index {index} start {start:?}\n{}\n{}",
                        scen.to_document().to_json(),
                        trace.to_json()
                    );
                    return;
                }
            }
        }
    }
    panic!("no jump-3 trace found in the searched range");
}

/// Rewrites the discovered scenario fixtures under `tests/golden/` from
/// their (seed, index) coordinates. The expected-output fixtures next to
/// them are frozen from the CLI; see the golden tests.
#[test]
#[ignore]
fn freeze_scenario_fixtures() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden");
    let write = |name: &str, seed: u64, index: usize| {
        let scen = generate_scenario(&bounds_with_seed(seed), index);
        std::fs::write(format!("{dir}/{name}"), scen.to_document().to_json()).unwrap();
    };
    write("deep_ladder_scenario.json", 0, 223);
    write("jump3_scenario.json", 4, 235);
    write("cycle_scenario.json", 0, 230);
}

/// Looks for an adjustment run that revisits a profile (cycle terminal).
#[test]
#[ignore]
fn find_cycle() {
    for seed in 0..50 {
        let bounds = bounds_with_seed(seed);
        for index in 0..bounds.scenario_count {
            let scen = generate_scenario(&bounds, index);
            for start in scen.profiles() {
                let Ok(trace) = tatonnement::run(&scen, &start, 50) else { continue };
                if trace.terminal == Terminal::CycleDetected {
                    println!(
                        "seed {seed} index {index} start {start:?}\n{}\n{}",
                        scen.to_document().to_json(),
                        trace.to_json()
                    );
                    return;
                }
            }
        }
    }
    panic!("no cycle found in the searched range");
}
