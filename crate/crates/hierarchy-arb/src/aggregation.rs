//! Profile-to-SDF aggregation maps, exact inversion, and the responsiveness
//! preorder.
//!
//! An aggregation map sends every full strategy profile to the market SDF.
//! Inverting it at an anchored strategy recovers the set of opponent
//! profiles consistent with an observed SDF — the information a participant
//! can actually extract from prices. Everything is enumerated exhaustively
//! with exact equality; the profile spaces here are tiny by design.

use crate::market::Sdf;
use crate::rat::Rat;
use crate::scenario::MarketScenario;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AggregationMap {
    /// Every profile maps to the same SDF.
    Constant { sdf: Vec<Rat> },
    /// Base SDF plus `epsilon · profile_index` added in one designated
    /// state; distinctness of the offsets makes the map one-to-one
    /// (re-verified exhaustively at construction anyway).
    Injective { base: Vec<Rat>, state: usize, epsilon: Rat },
    /// `m(s) = base(s) · (1 + Σ_n coefficients[s][n] · Δ_n)` where `Δ_n` is
    /// the aggregate demand for asset n across all participants.
    DemandImpact { base: Vec<Rat>, coefficients: Vec<Vec<Rat>> },
    /// Explicit profile-index → SDF table, total over the profile space.
    Tabular { table: Vec<Vec<Rat>> },
}

impl AggregationMap {
    pub fn kind_label(&self) -> &'static str {
        match self {
            AggregationMap::Constant { .. } => "constant",
            AggregationMap::Injective { .. } => "injective",
            AggregationMap::DemandImpact { .. } => "demand_impact",
            AggregationMap::Tabular { .. } => "tabular",
        }
    }

    /// SDF values for a profile, without the positivity check.
    pub fn raw_values(&self, profile: &[usize], scen: &MarketScenario) -> Vec<Rat> {
        match self {
            AggregationMap::Constant { sdf } => sdf.clone(),
            AggregationMap::Injective { base, state, epsilon } => {
                let idx = scen.profile_index(profile);
                let mut v = base.clone();
                v[*state] += &(epsilon * &Rat::int(idx as i64));
                v
            }
            AggregationMap::DemandImpact { base, coefficients } => {
                let d = scen.assets().count();
                let mut demand = vec![Rat::zero(); d];
                for (i, &ai) in profile.iter().enumerate() {
                    for (n, dem) in demand.iter_mut().enumerate() {
                        *dem += &scen.agents()[i].grid[ai].0[n];
                    }
                }
                base.iter()
                    .enumerate()
                    .map(|(s, b)| {
                        let impact: Rat = (0..d).map(|n| &coefficients[s][n] * &demand[n]).sum();
                        b * &(Rat::one() + impact)
                    })
                    .collect()
            }
            AggregationMap::Tabular { table } => table[scen.profile_index(profile)].clone(),
        }
    }

    /// The market SDF at a profile. Construction-time validation guarantees
    /// the positivity invariant for every reachable profile.
    pub fn aggregate(&self, profile: &[usize], scen: &MarketScenario) -> Sdf {
        Sdf::new(self.raw_values(profile, scen), scen.space())
            .expect("aggregation outputs validated at construction")
    }

    /// Exhaustive construction-time checks: totality, output positivity for
    /// every profile, and injectivity where claimed.
    pub fn validate(&self, scen: &MarketScenario) -> Result<()> {
        let nstates = scen.space().len();
        let check_len = |v: &[Rat], what: &str| -> Result<()> {
            if v.len() != nstates {
                return Err(Error::Validation(format!(
                    "{what} has {} values for {} states",
                    v.len(),
                    nstates
                )));
            }
            Ok(())
        };
        match self {
            AggregationMap::Constant { sdf } => check_len(sdf, "constant SDF")?,
            AggregationMap::Injective { base, state, .. } => {
                check_len(base, "injective base SDF")?;
                if *state >= nstates {
                    return Err(Error::Validation(format!(
                        "designated state {state} out of range"
                    )));
                }
            }
            AggregationMap::DemandImpact { base, coefficients } => {
                check_len(base, "demand-impact base SDF")?;
                if coefficients.len() != nstates
                    || coefficients.iter().any(|row| row.len() != scen.assets().count())
                {
                    return Err(Error::Validation(
                        "demand-impact coefficients must be state x asset".into(),
                    ));
                }
            }
            AggregationMap::Tabular { table } => {
                if table.len() != scen.profile_count() {
                    return Err(Error::Validation(format!(
                        "tabular map has {} rows for {} profiles",
                        table.len(),
                        scen.profile_count()
                    )));
                }
                for row in table {
                    check_len(row, "tabular SDF")?;
                }
            }
        }
        let mut seen: Vec<Vec<Rat>> = Vec::new();
        for p in scen.profiles() {
            let values = self.raw_values(&p, scen);
            Sdf::new(values.clone(), scen.space()).map_err(|e| {
                Error::Validation(format!("aggregation output at profile {p:?}: {e}"))
            })?;
            if matches!(self, AggregationMap::Injective { .. }) {
                if seen.contains(&values) {
                    return Err(Error::Validation(format!(
                        "injective map repeats an SDF at profile {p:?}"
                    )));
                }
                seen.push(values);
            }
        }
        Ok(())
    }
}

/// The opponent profiles consistent with an anchoring SDF: the fiber
/// `{ a_-i : f(a_i, a_-i) = m }`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpponentSet {
    pub agent: usize,
    pub anchor: usize,
    /// Opponent index tuples (agents j ≠ i in agent order), canonically
    /// ordered by the enumeration.
    pub profiles: Vec<Vec<usize>>,
}

/// Inverts the map at `(i, a_i)` by exhaustive enumeration; may be empty
/// when `m` is not attained there.
pub fn invert(
    map: &AggregationMap,
    m: &Sdf,
    i: usize,
    a_i: usize,
    scen: &MarketScenario,
) -> OpponentSet {
    let profiles = scen
        .opponent_profiles(i)
        .into_iter()
        .filter(|opp| {
            let full = scen.compose(i, a_i, opp);
            map.raw_values(&full, scen) == m.values()
        })
        .collect();
    OpponentSet { agent: i, anchor: a_i, profiles }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Responsiveness {
    Equal,
    F2AtLeastF1,
    F1AtLeastF2,
    Incomparable,
}

/// Compares how finely two maps reveal opponents: f2 is at least as
/// responsive as f1 when every inversion fiber of f2 is contained in the
/// corresponding fiber of f1 (anchored at the same strategy, each map
/// evaluated at its own SDF for the same underlying profile).
pub fn compare_responsiveness(
    f1: &AggregationMap,
    f2: &AggregationMap,
    scen: &MarketScenario,
) -> Responsiveness {
    let mut f2_in_f1 = true;
    let mut f1_in_f2 = true;
    for p in scen.profiles() {
        for i in 0..scen.agents().len() {
            let a_i = p[i];
            let fib1 = invert(f1, &f1.aggregate(&p, scen), i, a_i, scen);
            let fib2 = invert(f2, &f2.aggregate(&p, scen), i, a_i, scen);
            if !fib2.profiles.iter().all(|q| fib1.profiles.contains(q)) {
                f2_in_f1 = false;
            }
            if !fib1.profiles.iter().all(|q| fib2.profiles.contains(q)) {
                f1_in_f2 = false;
            }
            if !f2_in_f1 && !f1_in_f2 {
                return Responsiveness::Incomparable;
            }
        }
    }
    match (f2_in_f1, f1_in_f2) {
        (true, true) => Responsiveness::Equal,
        (true, false) => Responsiveness::F2AtLeastF1,
        (false, true) => Responsiveness::F1AtLeastF2,
        (false, false) => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::r;
    use crate::scenario::test_support::{scenario_with_map, two_agent_base};

    #[test]
    fn constant_map_inverts_to_full_product() {
        let scen = two_agent_base(AggregationMap::Constant {
            sdf: vec![Rat::one(), Rat::one()],
        });
        let m = scen.map().aggregate(&[0, 0], &scen);
        let fiber = invert(scen.map(), &m, 0, 0, &scen);
        assert_eq!(fiber.profiles.len(), scen.agents()[1].grid.len());
    }

    #[test]
    fn injective_map_inverts_to_singletons() {
        let scen = two_agent_base(AggregationMap::Injective {
            base: vec![Rat::one(), Rat::one()],
            state: 0,
            epsilon: r(1, 8),
        });
        for p in scen.profiles() {
            let m = scen.map().aggregate(&p, &scen);
            for i in 0..2 {
                let fiber = invert(scen.map(), &m, i, p[i], &scen);
                assert_eq!(fiber.profiles.len(), 1, "profile {p:?} agent {i}");
                assert_eq!(fiber.profiles[0], scen.opponent_part(i, &p));
            }
        }
        // Distinct profiles map to distinct SDFs.
        let m1 = scen.map().aggregate(&[0, 0], &scen);
        let m2 = scen.map().aggregate(&[0, 1], &scen);
        assert_ne!(m1.values(), m2.values());
    }

    #[test]
    fn unattained_sdf_inverts_to_empty() {
        let scen = two_agent_base(AggregationMap::Constant {
            sdf: vec![Rat::one(), Rat::one()],
        });
        let off = Sdf::new(vec![r(7, 2), r(7, 2)], scen.space()).unwrap();
        assert!(invert(scen.map(), &off, 0, 0, &scen).profiles.is_empty());
    }

    #[test]
    fn zero_impact_demand_map_degenerates_to_constant() {
        let base = vec![Rat::one(), Rat::one()];
        let zero_impact = AggregationMap::DemandImpact {
            base: base.clone(),
            coefficients: vec![vec![Rat::zero(), Rat::zero()]; 2],
        };
        let scen = two_agent_base(zero_impact);
        for p in scen.profiles() {
            assert_eq!(scen.map().raw_values(&p, &scen), base);
        }
    }

    #[test]
    fn responsiveness_chain_and_reflexivity() {
        let constant = AggregationMap::Constant { sdf: vec![Rat::one(), Rat::one()] };
        let injective = AggregationMap::Injective {
            base: vec![Rat::one(), Rat::one()],
            state: 0,
            epsilon: r(1, 8),
        };
        let scen = two_agent_base(constant.clone());
        assert_eq!(
            compare_responsiveness(&constant, &injective, &scen),
            Responsiveness::F2AtLeastF1
        );
        assert_eq!(
            compare_responsiveness(&injective, &constant, &scen),
            Responsiveness::F1AtLeastF2
        );
        assert_eq!(
            compare_responsiveness(&constant, &constant, &scen),
            Responsiveness::Equal
        );
    }

    #[test]
    fn crossing_tabular_pair_is_incomparable() {
        // f1 depends only on agent 2's strategy (reveals it to agent 1,
        // tells agent 2 nothing about agent 1); f2 depends only on agent
        // 1's. Neither refines the other.
        let a = Rat::one();
        let b = r(1, 2);
        let pool_rows = |m00: &Rat, m01: &Rat, m10: &Rat, m11: &Rat| AggregationMap::Tabular {
            table: vec![
                vec![m00.clone(), m00.clone()],
                vec![m01.clone(), m01.clone()],
                vec![m10.clone(), m10.clone()],
                vec![m11.clone(), m11.clone()],
            ],
        };
        let f1 = pool_rows(&a, &b, &a, &b);
        let f2 = pool_rows(&a, &a, &b, &b);
        let scen = scenario_with_map(2, 2, f1.clone());
        assert_eq!(compare_responsiveness(&f1, &f2, &scen), Responsiveness::Incomparable);
    }

    #[test]
    fn positivity_violations_rejected_at_construction() {
        // Demand-impact coefficients that drive the discount non-positive
        // at some profile must be rejected, not clipped.
        let bad = AggregationMap::DemandImpact {
            base: vec![Rat::one(), Rat::one()],
            coefficients: vec![vec![Rat::int(-5), Rat::int(-5)]; 2],
        };
        let err = std::panic::catch_unwind(|| two_agent_base(bad));
        assert!(err.is_err());
    }
}
