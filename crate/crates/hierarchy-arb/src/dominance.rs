//! Statewise dominance, iterated elimination ladders, and order
//! classification.
//!
//! A strategy improves on another at a fixed opponent tuple when its net
//! gain is at least as large in every support state and strictly larger in
//! at least one. Two quantifier orders are supported for dominance against a
//! *set* of opponent tuples:
//!
//! * `Uniform` (default): one improving strategy works against every tuple
//!   in the set, with the strictness clause holding at every tuple;
//! * `Pointwise`: each tuple may have its own improving strategy.
//!
//! Uniform is what the improvement-to-trade construction needs (one plan
//! must pay off whichever consistent opponent tuple is real), so claim
//! verification runs under it; Pointwise is the weaker reading and is kept
//! behind a flag for comparison.

use crate::aggregation::{invert, OpponentSet};
use crate::market::Sdf;
use crate::scenario::{GainTable, MarketScenario, Mode};
use crate::{Error, Result};
use serde::Serialize;

/// Per-agent elimination ladder. Levels are recorded per lockstep round for
/// every agent; `stabilization_index` is the global round count K, i.e. the
/// first round that eliminated nothing for anyone (so `levels[K] ==
/// levels[K-1]` is the verified stabilization round).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DominanceLadder {
    pub agent: usize,
    /// `levels[k]` = UD^k as sorted strategy indices; `levels[0]` is the
    /// full grid.
    pub levels: Vec<Vec<usize>>,
    /// `dominated[k-1]` = D^k, the strategies removed in round k.
    pub dominated: Vec<Vec<usize>>,
    pub stabilization_index: usize,
}

impl DominanceLadder {
    /// UD^k, saturating at the stabilized set for k beyond the last round.
    pub fn level(&self, k: usize) -> &[usize] {
        let k = k.min(self.levels.len() - 1);
        &self.levels[k]
    }

    pub fn stabilized(&self) -> &[usize] {
        self.levels.last().expect("ladders have at least UD^0")
    }

    /// Number of rounds in which this agent actually lost a strategy.
    pub fn shrink_rounds(&self) -> usize {
        self.dominated.iter().filter(|d| !d.is_empty()).count()
    }
}

/// The partition cell of a strategy: eliminated in round k+1, or a survivor
/// of every round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HierarchyOrder {
    Finite(usize),
    Infinite,
}

/// Does `a_star` improve on `a` statewise at one fixed opponent tuple?
pub fn improves_at(
    table: &GainTable,
    scen: &MarketScenario,
    i: usize,
    a_star: usize,
    a: usize,
    opp: &[usize],
) -> bool {
    let pi_star = scen.profile_index(&scen.compose(i, a_star, opp));
    let pi = scen.profile_index(&scen.compose(i, a, opp));
    let g_star = table.gain(i, pi_star);
    let g = table.gain(i, pi);
    let mut strict = false;
    for &s in scen.space().support() {
        if g_star[s] < g[s] {
            return false;
        }
        if g_star[s] > g[s] {
            strict = true;
        }
    }
    strict
}

/// Uniform-mode dominance of `a_star` over `a` against every tuple in the
/// opponent set (strictness required at every tuple).
pub fn dominates(
    table: &GainTable,
    scen: &MarketScenario,
    i: usize,
    a_star: usize,
    a: usize,
    opponents: &[Vec<usize>],
) -> Result<bool> {
    if opponents.is_empty() {
        return Err(Error::Domain(
            "dominance against an empty opponent set is undefined".into(),
        ));
    }
    Ok(opponents.iter().all(|opp| improves_at(table, scen, i, a_star, a, opp)))
}

/// The members of `candidates` eliminated against `opponents` under `mode`.
/// Improving strategies are drawn from the agent's full grid.
pub fn dominated_set(
    table: &GainTable,
    scen: &MarketScenario,
    i: usize,
    opponents: &[Vec<usize>],
    candidates: &[usize],
    mode: Mode,
) -> Result<Vec<usize>> {
    if opponents.is_empty() {
        return Err(Error::Domain(
            "dominance against an empty opponent set is undefined".into(),
        ));
    }
    let grid_len = scen.agents()[i].grid.len();
    let mut out = Vec::new();
    for &a in candidates {
        let hit = match mode {
            Mode::Uniform => (0..grid_len)
                .any(|a_star| {
                    a_star != a
                        && opponents.iter().all(|opp| improves_at(table, scen, i, a_star, a, opp))
                }),
            Mode::Pointwise => opponents.iter().all(|opp| {
                (0..grid_len).any(|a_star| a_star != a && improves_at(table, scen, i, a_star, a, opp))
            }),
        };
        if hit {
            out.push(a);
        }
    }
    Ok(out)
}

/// Lockstep iterated elimination. Every agent's round-k dominated set is
/// computed against the product of all opponents' round-(k-1) survivor
/// sets; the loop stops at the first round that removes nothing (that round
/// is kept as the verification round).
pub fn compute_ladder(scen: &MarketScenario, mode: Mode) -> Result<Vec<DominanceLadder>> {
    let table = GainTable::new(scen);
    compute_ladder_with(scen, &table, mode)
}

/// As [`compute_ladder`] but reusing a precomputed gain table.
pub fn compute_ladder_with(
    scen: &MarketScenario,
    table: &GainTable,
    mode: Mode,
) -> Result<Vec<DominanceLadder>> {
    let n = scen.agents().len();
    let mut levels: Vec<Vec<Vec<usize>>> =
        (0..n).map(|i| vec![(0..scen.agents()[i].grid.len()).collect()]).collect();
    let mut dominated: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n];
    loop {
        let mut any = false;
        let mut round_dominated = Vec::with_capacity(n);
        let mut round_survivors = Vec::with_capacity(n);
        for i in 0..n {
            let current = levels[i].last().unwrap().clone();
            let opponents = opponent_product(scen, i, &levels);
            let d = dominated_set(table, scen, i, &opponents, &current, mode)?;
            let survivors: Vec<usize> =
                current.iter().copied().filter(|a| !d.contains(a)).collect();
            if survivors.is_empty() {
                return Err(Error::Domain(format!(
                    "agent {i} lost every strategy in round {}: grid {current:?} all dominated",
                    levels[i].len()
                )));
            }
            if !d.is_empty() {
                any = true;
            }
            round_dominated.push(d);
            round_survivors.push(survivors);
        }
        for i in 0..n {
            levels[i].push(round_survivors[i].clone());
            dominated[i].push(round_dominated[i].clone());
        }
        if !any {
            break;
        }
    }
    let k = dominated[0].len();
    Ok((0..n)
        .map(|i| DominanceLadder {
            agent: i,
            levels: levels[i].clone(),
            dominated: dominated[i].clone(),
            stabilization_index: k,
        })
        .collect())
}

/// The product ∏_{j≠i} UD_j^{last} as opponent tuples in canonical order.
fn opponent_product(
    scen: &MarketScenario,
    i: usize,
    levels: &[Vec<Vec<usize>>],
) -> Vec<Vec<usize>> {
    scen.opponent_profiles(i)
        .into_iter()
        .filter(|opp| {
            let mut slot = 0;
            (0..scen.agents().len()).all(|j| {
                if j == i {
                    true
                } else {
                    let ok = levels[j].last().unwrap().contains(&opp[slot]);
                    slot += 1;
                    ok
                }
            })
        })
        .collect()
}

/// The product ∏_{j≠i} UD_j^{k} from finished ladders.
pub fn opponent_product_at(
    scen: &MarketScenario,
    ladders: &[DominanceLadder],
    i: usize,
    k: usize,
) -> Vec<Vec<usize>> {
    scen.opponent_profiles(i)
        .into_iter()
        .filter(|opp| {
            let mut slot = 0;
            (0..scen.agents().len()).all(|j| {
                if j == i {
                    true
                } else {
                    let ok = ladders[j].level(k).contains(&opp[slot]);
                    slot += 1;
                    ok
                }
            })
        })
        .collect()
}

/// Which partition cell a strategy falls into.
pub fn classify_order(a: usize, ladder: &DominanceLadder) -> HierarchyOrder {
    for (k, d) in ladder.dominated.iter().enumerate() {
        if d.contains(&a) {
            return HierarchyOrder::Finite(k); // removed in round k+1
        }
    }
    debug_assert!(ladder.stabilized().contains(&a));
    HierarchyOrder::Infinite
}

/// Is `a_i` improvable by a single strategy against every opponent tuple
/// consistent with the observed SDF `m`? Returns the lexicographically
/// smallest such improving strategy.
pub fn dominated_wrtp(
    table: &GainTable,
    scen: &MarketScenario,
    i: usize,
    a_i: usize,
    m: &Sdf,
) -> Result<Option<usize>> {
    let fiber: OpponentSet = invert(scen.map(), m, i, a_i, scen);
    if fiber.profiles.is_empty() {
        return Err(Error::Domain(format!(
            "SDF not attainable with agent {i} playing strategy {a_i}"
        )));
    }
    for a_star in 0..scen.agents()[i].grid.len() {
        if a_star == a_i {
            continue;
        }
        if fiber.profiles.iter().all(|opp| improves_at(table, scen, i, a_star, a_i, opp)) {
            return Ok(Some(a_star));
        }
    }
    Ok(None)
}
