//! The sequential price-adjustment loop: while some participant holds a
//! strategy that is improvable against every opponent tuple consistent with
//! the current SDF, the lowest-indexed such participant revises it, the SDF
//! is recomputed, and the process repeats until no one can improve (or a
//! cycle / step cap is hit).

use crate::aggregation::invert;
use crate::dominance::{
    classify_order, dominated_wrtp, improves_at, opponent_product_at, DominanceLadder,
    HierarchyOrder,
};
use crate::rat::Rat;
use crate::scenario::{GainTable, MarketScenario};
use crate::{Error, Result};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Terminal {
    NoArbitrage,
    MaxStepsExceeded,
    CycleDetected,
}

/// Order-jump annotation for one revision. `Jump` carries the order
/// difference (flagged separately when negative); `WithinGrid` marks
/// revisions the ladder partition cannot see (same cell before and after);
/// `ToStabilized` marks jumps into the surviving set; `Unclassified` marks
/// steps outside the annotation's guard (e.g. fallback revisions out of a
/// round-1-eliminated strategy).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Alpha {
    Jump(i64),
    ToStabilized,
    WithinGrid,
    Unclassified,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub agent: usize,
    pub from: usize,
    pub to: usize,
    pub profile_before: Vec<usize>,
    pub profile_after: Vec<usize>,
    pub sdf_before: Vec<Rat>,
    pub sdf_after: Vec<Rat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order_before: Option<HierarchyOrder>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order_after: Option<HierarchyOrder>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Alpha>,
    pub alpha_violation: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TatonnementTrace {
    pub initial_profile: Vec<usize>,
    pub steps: Vec<TraceStep>,
    pub terminal: Terminal,
}

impl TatonnementTrace {
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("trace serializes");
        out.push('\n');
        out
    }
}

/// In-flight process state.
#[derive(Debug, Clone)]
pub struct TatonnementState {
    pub step: u64,
    pub profile: Vec<usize>,
}

pub enum StepOutcome {
    /// No participant is improvable against their consistent opponent set.
    Concluded,
    Revised(TraceStep),
}

/// One revision: the lowest-indexed improvable agent switches to the
/// lexicographically smallest strategy that (a) improves on her current one
/// against the full consistent opponent set and (b) is itself not
/// improvable at the SDF her switch induces; if nothing satisfies both,
/// the smallest (a)-only strategy is taken.
pub fn step(
    state: &TatonnementState,
    scen: &MarketScenario,
    table: &GainTable,
) -> Result<StepOutcome> {
    let m = scen.map().aggregate(&state.profile, scen);
    for i in 0..scen.agents().len() {
        let a_i = state.profile[i];
        if dominated_wrtp(table, scen, i, a_i, &m)?.is_none() {
            continue;
        }
        let fiber = invert(scen.map(), &m, i, a_i, scen);
        let dominators: Vec<usize> = (0..scen.agents()[i].grid.len())
            .filter(|&a_star| {
                a_star != a_i
                    && fiber.profiles.iter().all(|opp| improves_at(table, scen, i, a_star, a_i, opp))
            })
            .collect();
        debug_assert!(!dominators.is_empty());
        let undominated_after = |a_star: usize| -> Result<bool> {
            let mut next = state.profile.clone();
            next[i] = a_star;
            let m_next = scen.map().aggregate(&next, scen);
            Ok(dominated_wrtp(table, scen, i, a_star, &m_next)?.is_none())
        };
        let mut choice = None;
        for &a_star in &dominators {
            if undominated_after(a_star)? {
                choice = Some(a_star);
                break;
            }
        }
        let to = choice.unwrap_or(dominators[0]);
        let mut profile_after = state.profile.clone();
        profile_after[i] = to;
        let m_after = scen.map().aggregate(&profile_after, scen);
        return Ok(StepOutcome::Revised(TraceStep {
            agent: i,
            from: a_i,
            to,
            profile_before: state.profile.clone(),
            profile_after,
            sdf_before: m.values().to_vec(),
            sdf_after: m_after.values().to_vec(),
            order_before: None,
            order_after: None,
            alpha: None,
            alpha_violation: false,
        }));
    }
    Ok(StepOutcome::Concluded)
}

/// Runs the loop from `initial_profile` with cycle detection by exact
/// profile revisit.
pub fn run(
    scen: &MarketScenario,
    initial_profile: &[usize],
    max_steps: u64,
) -> Result<TatonnementTrace> {
    if max_steps == 0 {
        return Err(Error::Domain("max_steps must be at least 1".into()));
    }
    scen.check_profile(initial_profile)?;
    let table = GainTable::new(scen);
    let mut state = TatonnementState { step: 0, profile: initial_profile.to_vec() };
    let mut visited = vec![state.profile.clone()];
    let mut steps = Vec::new();
    loop {
        match step(&state, scen, &table)? {
            StepOutcome::Concluded => {
                return Ok(TatonnementTrace {
                    initial_profile: initial_profile.to_vec(),
                    steps,
                    terminal: Terminal::NoArbitrage,
                });
            }
            StepOutcome::Revised(record) => {
                state.step += 1;
                state.profile = record.profile_after.clone();
                let cycled = visited.contains(&state.profile);
                visited.push(state.profile.clone());
                steps.push(record);
                if cycled {
                    return Ok(TatonnementTrace {
                        initial_profile: initial_profile.to_vec(),
                        steps,
                        terminal: Terminal::CycleDetected,
                    });
                }
                if state.step >= max_steps {
                    return Ok(TatonnementTrace {
                        initial_profile: initial_profile.to_vec(),
                        steps,
                        terminal: Terminal::MaxStepsExceeded,
                    });
                }
            }
        }
    }
}

/// Annotates each revision with the ladder cells of the old and new
/// strategies and the order jump α.
///
/// α is recorded as an integer only when both cells are finite and the old
/// position carried the strict-subset finding (the consistent opponent set
/// was strictly inside the product of opponents' UD sets one level below
/// the old order) — outside that guard the jump is `Unclassified`. Moves
/// out of an order-0 strategy satisfy the guard vacuously (there is no
/// product one level below, and the jump is non-negative by construction).
/// Same-cell revisions are `WithinGrid`. A negative α inside the guard sets
/// the violation flag.
pub fn annotate_prop6(
    trace: &mut TatonnementTrace,
    ladders: &[DominanceLadder],
    scen: &MarketScenario,
) -> Result<()> {
    if ladders.len() != scen.agents().len() {
        return Err(Error::Domain("ladders do not match the scenario".into()));
    }
    for step in &mut trace.steps {
        let ladder = &ladders[step.agent];
        let before = classify_order(step.from, ladder);
        let after = classify_order(step.to, ladder);
        step.order_before = Some(before);
        step.order_after = Some(after);
        let alpha = if before == after {
            Alpha::WithinGrid
        } else {
            let guard = match before {
                HierarchyOrder::Finite(0) => true,
                HierarchyOrder::Finite(k_old) => {
                    let m = crate::market::Sdf::new(step.sdf_before.clone(), scen.space())
                        .expect("trace SDFs are valid");
                    let fiber = invert(scen.map(), &m, step.agent, step.from, scen);
                    let product = opponent_product_at(scen, ladders, step.agent, k_old - 1);
                    let subset =
                        fiber.profiles.iter().all(|opp| product.contains(opp));
                    subset && fiber.profiles.len() < product.len()
                }
                _ => false,
            };
            match (guard, before, after) {
                (true, HierarchyOrder::Finite(k_old), HierarchyOrder::Finite(k_new)) => {
                    let jump = k_new as i64 - k_old as i64;
                    if jump < 0 {
                        step.alpha_violation = true;
                    }
                    Alpha::Jump(jump)
                }
                (true, HierarchyOrder::Finite(_), HierarchyOrder::Infinite) => Alpha::ToStabilized,
                _ => Alpha::Unclassified,
            }
        };
        step.alpha = Some(alpha);
    }
    Ok(())
}
