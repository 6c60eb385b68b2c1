//! The market scenario: states, assets, agents' strategy grids, the
//! aggregation map, and run flags — plus the JSON document schema, net-gain
//! accounting, and the constructive zero-cost trade plan.

use crate::aggregation::{invert, AggregationMap};
use crate::market::{price_assets, AssetSet, GainProfile, Portfolio, StateSpace};
use crate::rat::Rat;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Dominance quantifier mode; see the dominance module.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Uniform,
    Pointwise,
}

/// Deterministic tie-break policy. Only one policy exists; it is named so
/// that documents stay self-describing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    Lexicographic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Flags {
    pub mode: Mode,
    pub max_steps: u64,
    pub tie_break: TieBreak,
    pub seed: u64,
}

impl Default for Flags {
    fn default() -> Flags {
        Flags {
            mode: Mode::Uniform,
            max_steps: 100,
            tie_break: TieBreak::Lexicographic,
            seed: 0,
        }
    }
}

/// How risk-free funding is discounted for a given funding amount.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RiskFreeSpec {
    /// Amount-independent: discount = 1/R.
    GrossRate,
    /// Exact-match amount table with a fallback discount.
    Table { entries: Vec<(Rat, Rat)>, default: Rat },
}

impl RiskFreeSpec {
    /// Discount factor applied to risk-free funding of `amount`.
    pub fn discount(&self, gross_rate: &Rat, amount: &Rat) -> Rat {
        match self {
            RiskFreeSpec::GrossRate => gross_rate.recip(),
            RiskFreeSpec::Table { entries, default } => entries
                .iter()
                .find(|(a, _)| a == amount)
                .map(|(_, d)| d.clone())
                .unwrap_or_else(|| default.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Agent {
    pub name: String,
    pub grid: Vec<Portfolio>,
}

/// A fully validated market instance.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketScenario {
    space: StateSpace,
    assets: AssetSet,
    agents: Vec<Agent>,
    map: AggregationMap,
    risk_free: RiskFreeSpec,
    pub flags: Flags,
}

impl MarketScenario {
    pub fn new(
        space: StateSpace,
        assets: AssetSet,
        agents: Vec<Agent>,
        map: AggregationMap,
        risk_free: RiskFreeSpec,
        flags: Flags,
    ) -> Result<MarketScenario> {
        if agents.is_empty() {
            return Err(Error::Validation("at least one agent required".into()));
        }
        for agent in &agents {
            if agent.grid.is_empty() {
                return Err(Error::Validation(format!(
                    "agent {} has an empty strategy grid",
                    agent.name
                )));
            }
            for p in &agent.grid {
                if p.0.len() != assets.count() {
                    return Err(Error::Validation(format!(
                        "agent {} has a strategy with {} weights for {} assets",
                        agent.name,
                        p.0.len(),
                        assets.count()
                    )));
                }
            }
        }
        if let RiskFreeSpec::Table { entries, default } = &risk_free {
            if !default.is_positive() || entries.iter().any(|(_, d)| !d.is_positive()) {
                return Err(Error::Validation(
                    "risk-free discounts must be positive".into(),
                ));
            }
        }
        let scen = MarketScenario { space, assets, agents, map, risk_free, flags };
        scen.map.validate(&scen)?;
        Ok(scen)
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn assets(&self) -> &AssetSet {
        &self.assets
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn map(&self) -> &AggregationMap {
        &self.map
    }

    pub fn risk_free(&self) -> &RiskFreeSpec {
        &self.risk_free
    }

    /// Same scenario with the aggregation map swapped (used by sweeps).
    pub fn with_map(&self, map: AggregationMap) -> Result<MarketScenario> {
        MarketScenario::new(
            self.space.clone(),
            self.assets.clone(),
            self.agents.clone(),
            map,
            self.risk_free.clone(),
            self.flags.clone(),
        )
    }

    pub fn profile_count(&self) -> usize {
        self.agents.iter().map(|a| a.grid.len()).product()
    }

    /// Canonical profile index: mixed radix with the last agent fastest.
    pub fn profile_index(&self, profile: &[usize]) -> usize {
        debug_assert_eq!(profile.len(), self.agents.len());
        let mut idx = 0;
        for (i, &ai) in profile.iter().enumerate() {
            idx = idx * self.agents[i].grid.len() + ai;
        }
        idx
    }

    pub fn index_to_profile(&self, mut idx: usize) -> Vec<usize> {
        let mut p = vec![0usize; self.agents.len()];
        for i in (0..self.agents.len()).rev() {
            let n = self.agents[i].grid.len();
            p[i] = idx % n;
            idx /= n;
        }
        p
    }

    /// All full profiles in canonical order.
    pub fn profiles(&self) -> Vec<Vec<usize>> {
        (0..self.profile_count()).map(|i| self.index_to_profile(i)).collect()
    }

    /// All opponent index tuples for agent `i` (agents j ≠ i in order).
    pub fn opponent_profiles(&self, i: usize) -> Vec<Vec<usize>> {
        let sizes: Vec<usize> = (0..self.agents.len())
            .filter(|&j| j != i)
            .map(|j| self.agents[j].grid.len())
            .collect();
        let count: usize = sizes.iter().product();
        (0..count)
            .map(|mut idx| {
                let mut t = vec![0usize; sizes.len()];
                for (slot, &n) in sizes.iter().enumerate().rev() {
                    t[slot] = idx % n;
                    idx /= n;
                }
                t
            })
            .collect()
    }

    /// Splices `a_i` for agent `i` into an opponent tuple.
    pub fn compose(&self, i: usize, a_i: usize, opp: &[usize]) -> Vec<usize> {
        let mut p = Vec::with_capacity(self.agents.len());
        let mut it = opp.iter();
        for j in 0..self.agents.len() {
            p.push(if j == i { a_i } else { *it.next().expect("opponent tuple length") });
        }
        p
    }

    /// Extracts the opponent tuple of a full profile.
    pub fn opponent_part(&self, i: usize, profile: &[usize]) -> Vec<usize> {
        profile
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &a)| a)
            .collect()
    }

    pub fn check_profile(&self, profile: &[usize]) -> Result<()> {
        if profile.len() != self.agents.len()
            || profile.iter().enumerate().any(|(i, &a)| a >= self.agents[i].grid.len())
        {
            return Err(Error::Domain(format!(
                "profile {profile:?} outside the declared strategy grids"
            )));
        }
        Ok(())
    }
}

/// Net gain of agent `i` at a full profile: `g(s) = a·x(s) − (a·q_a)/D` with
/// `q_a` priced under the SDF this very profile induces, and `D` the
/// risk-free discount for funding amount `−a·q_a`.
pub fn net_gain(scen: &MarketScenario, i: usize, profile: &[usize]) -> Result<GainProfile> {
    scen.check_profile(profile)?;
    let m = scen.map().aggregate(profile, scen);
    let q = price_assets(&m, scen.assets(), scen.space());
    let a = &scen.agents()[i].grid[profile[i]];
    let aq = a.cost(&q);
    let d = scen.risk_free().discount(scen.assets().gross_rate(), &-&aq);
    let per_state = &aq / &d;
    let gains = (0..scen.space().len())
        .map(|s| a.payout(scen.assets(), s) - &per_state)
        .collect();
    Ok(GainProfile(gains))
}

/// State-contingent utility: the identity transform of net gain.
pub fn utility(scen: &MarketScenario, i: usize, profile: &[usize], s: usize) -> Result<Rat> {
    Ok(net_gain(scen, i, profile)?.0[s].clone())
}

/// Precomputed gains for every (agent, profile, state); the basic object
/// both dominance analysis and the adjustment process iterate over.
#[derive(Debug, Clone)]
pub struct GainTable {
    gains: Vec<Vec<Vec<Rat>>>, // [agent][profile index][state]
}

impl GainTable {
    pub fn new(scen: &MarketScenario) -> GainTable {
        let profiles = scen.profiles();
        let gains = (0..scen.agents().len())
            .map(|i| {
                profiles
                    .iter()
                    .map(|p| net_gain(scen, i, p).expect("enumerated profile is valid").0)
                    .collect()
            })
            .collect();
        GainTable { gains }
    }

    pub fn gain(&self, agent: usize, profile_index: usize) -> &[Rat] {
        &self.gains[agent][profile_index]
    }
}

/// One branch of a trade plan, contingent on an opponent tuple from the
/// anchoring fiber.
#[derive(Debug, Clone, Serialize)]
pub struct PlanBranch {
    pub opponents: Vec<usize>,
    pub long_price: Vec<Rat>,
    pub short_price: Vec<Rat>,
    /// Cash parked risk-free: `a_i·q_{a_i} − a_star·q_{a_star}`.
    pub funding: Rat,
    pub cost: Rat,
    pub payout: Vec<Rat>,
}

/// The zero-cost plan: long the improving strategy, short the current one,
/// fund both legs risk-free. Its payout per state is exactly the gain
/// difference, branch by branch.
#[derive(Debug, Clone, Serialize)]
pub struct TradePlan {
    pub agent: usize,
    pub short_strategy: usize,
    pub long_strategy: usize,
    pub branches: Vec<PlanBranch>,
}

/// Builds the plan for agent `i` switching `a_i → a_star`, anchored at the
/// SDF induced by `(a_i, opp)`. Refuses with a pinpointed diagnostic unless
/// `a_star` improves on `a_i` state-wise against every opponent tuple in the
/// anchoring fiber.
pub fn build_arbitrage_portfolio(
    scen: &MarketScenario,
    i: usize,
    a_i: usize,
    a_star: usize,
    opp: &[usize],
) -> Result<TradePlan> {
    let grid = &scen.agents()[i].grid;
    if a_i >= grid.len() || a_star >= grid.len() {
        return Err(Error::Domain("strategy index outside the grid".into()));
    }
    if a_i == a_star {
        return Err(Error::Domain(
            "no strict improvement: long and short strategies are identical".into(),
        ));
    }
    let anchor_profile = scen.compose(i, a_i, opp);
    scen.check_profile(&anchor_profile)?;
    let m = scen.map().aggregate(&anchor_profile, scen);
    let fiber = invert(scen.map(), &m, i, a_i, scen);
    let mut branches = Vec::with_capacity(fiber.profiles.len());
    for opp_t in &fiber.profiles {
        let short_full = scen.compose(i, a_i, opp_t);
        let long_full = scen.compose(i, a_star, opp_t);
        let g_short = net_gain(scen, i, &short_full)?.0;
        let g_long = net_gain(scen, i, &long_full)?.0;
        let payout: Vec<Rat> = g_long.iter().zip(&g_short).map(|(l, s)| l - s).collect();
        let mut strict = false;
        for &s in scen.space().support() {
            if payout[s].is_negative() {
                return Err(Error::Domain(format!(
                    "improvement fails against opponents {opp_t:?} in state {s}: payout {}",
                    payout[s]
                )));
            }
            if payout[s].is_positive() {
                strict = true;
            }
        }
        if !strict {
            return Err(Error::Domain(format!(
                "no strict improvement against opponents {opp_t:?}"
            )));
        }
        let q_short = price_assets(&scen.map().aggregate(&short_full, scen), scen.assets(), scen.space());
        let q_long = price_assets(&scen.map().aggregate(&long_full, scen), scen.assets(), scen.space());
        let funding = grid[a_i].cost(&q_short) - grid[a_star].cost(&q_long);
        branches.push(PlanBranch {
            opponents: opp_t.clone(),
            long_price: q_long.0,
            short_price: q_short.0,
            funding,
            cost: Rat::zero(),
            payout,
        });
    }
    Ok(TradePlan { agent: i, short_strategy: a_i, long_strategy: a_star, branches })
}

// ---------------------------------------------------------------------------
// Document schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDoc {
    pub label: String,
    pub prob: Rat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssetsDoc {
    pub payoffs: Vec<Vec<Rat>>,
    pub risk_free_index: usize,
    pub gross_rate: Rat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentDoc {
    pub name: String,
    pub strategies: Vec<Vec<Rat>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantDoc {
    pub sdf: Vec<Rat>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InjectiveDoc {
    pub base: Vec<Rat>,
    pub state: usize,
    pub epsilon: Rat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandImpactDoc {
    pub base: Vec<Rat>,
    pub coefficients: Vec<Vec<Rat>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabularEntryDoc {
    pub profile: Vec<usize>,
    pub sdf: Vec<Rat>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabularDoc {
    pub table: Vec<TabularEntryDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum AggregationDoc {
    Constant(ConstantDoc),
    Injective(InjectiveDoc),
    DemandImpact(DemandImpactDoc),
    Tabular(TabularDoc),
}

impl AggregationDoc {
    /// Converts the serialized spec into the in-memory map. Tabular specs
    /// need the agents' grid sizes to index their per-profile entries.
    pub fn to_map(&self, grid_sizes: &[usize]) -> Result<AggregationMap> {
        Ok(match self {
            AggregationDoc::Constant(d) => AggregationMap::Constant { sdf: d.sdf.clone() },
            AggregationDoc::Injective(d) => AggregationMap::Injective {
                base: d.base.clone(),
                state: d.state,
                epsilon: d.epsilon.clone(),
            },
            AggregationDoc::DemandImpact(d) => AggregationMap::DemandImpact {
                base: d.base.clone(),
                coefficients: d.coefficients.clone(),
            },
            AggregationDoc::Tabular(d) => {
                let count: usize = grid_sizes.iter().product();
                let mut table: Vec<Option<Vec<Rat>>> = vec![None; count];
                for entry in &d.table {
                    if entry.profile.len() != grid_sizes.len()
                        || entry.profile.iter().zip(grid_sizes).any(|(&a, &n)| a >= n)
                    {
                        return Err(Error::Validation(format!(
                            "tabular profile {:?} outside the grids",
                            entry.profile
                        )));
                    }
                    let mut idx = 0;
                    for (&a, &n) in entry.profile.iter().zip(grid_sizes) {
                        idx = idx * n + a;
                    }
                    if table[idx].is_some() {
                        return Err(Error::Validation(format!(
                            "tabular profile {:?} declared twice",
                            entry.profile
                        )));
                    }
                    table[idx] = Some(entry.sdf.clone());
                }
                let table: Option<Vec<Vec<Rat>>> = table.into_iter().collect();
                AggregationMap::Tabular {
                    table: table.ok_or_else(|| {
                        Error::Validation("tabular map does not cover every profile".into())
                    })?,
                }
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskFreeEntryDoc {
    pub amount: Rat,
    pub discount: Rat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RiskFreeDoc {
    GrossRate,
    Table { entries: Vec<RiskFreeEntryDoc>, default: Rat },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlagsDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tie_break: Option<TieBreak>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// The on-disk scenario format. Unknown fields are rejected and all
/// rationals are exact strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub version: String,
    pub states: Vec<StateDoc>,
    pub assets: AssetsDoc,
    pub agents: Vec<AgentDoc>,
    pub aggregation: AggregationDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub risk_free: Option<RiskFreeDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flags: Option<FlagsDoc>,
}

impl ScenarioDocument {
    pub fn from_json(text: &str) -> Result<ScenarioDocument> {
        let doc: ScenarioDocument =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if doc.version != "1" {
            return Err(Error::Parse(format!("unsupported document version {:?}", doc.version)));
        }
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("document serializes");
        out.push('\n');
        out
    }

    pub fn to_scenario(&self) -> Result<MarketScenario> {
        let space = StateSpace::new(
            self.states.iter().map(|s| s.label.clone()).collect(),
            self.states.iter().map(|s| s.prob.clone()).collect(),
        )?;
        let assets = AssetSet::new(
            self.assets.payoffs.clone(),
            self.assets.risk_free_index,
            self.assets.gross_rate.clone(),
            &space,
        )?;
        let agents: Vec<Agent> = self
            .agents
            .iter()
            .map(|a| Agent {
                name: a.name.clone(),
                grid: a.strategies.iter().map(|w| Portfolio(w.clone())).collect(),
            })
            .collect();
        let grid_sizes: Vec<usize> = agents.iter().map(|a| a.grid.len()).collect();
        let map = self.aggregation.to_map(&grid_sizes)?;
        let risk_free = match &self.risk_free {
            None | Some(RiskFreeDoc::GrossRate) => RiskFreeSpec::GrossRate,
            Some(RiskFreeDoc::Table { entries, default }) => RiskFreeSpec::Table {
                entries: entries.iter().map(|e| (e.amount.clone(), e.discount.clone())).collect(),
                default: default.clone(),
            },
        };
        let defaults = Flags::default();
        let flags = match &self.flags {
            None => defaults,
            Some(f) => Flags {
                mode: f.mode.unwrap_or(defaults.mode),
                max_steps: f.max_steps.unwrap_or(defaults.max_steps),
                tie_break: f.tie_break.unwrap_or(defaults.tie_break),
                seed: f.seed.unwrap_or(defaults.seed),
            },
        };
        MarketScenario::new(space, assets, agents, map, risk_free, flags)
    }
}

impl MarketScenario {
    /// Re-serializes the validated scenario as a document (used to make
    /// generated instances and counterexamples replayable).
    pub fn to_document(&self) -> ScenarioDocument {
        let aggregation = match &self.map {
            AggregationMap::Constant { sdf } => {
                AggregationDoc::Constant(ConstantDoc { sdf: sdf.clone() })
            }
            AggregationMap::Injective { base, state, epsilon } => {
                AggregationDoc::Injective(InjectiveDoc {
                    base: base.clone(),
                    state: *state,
                    epsilon: epsilon.clone(),
                })
            }
            AggregationMap::DemandImpact { base, coefficients } => {
                AggregationDoc::DemandImpact(DemandImpactDoc {
                    base: base.clone(),
                    coefficients: coefficients.clone(),
                })
            }
            AggregationMap::Tabular { table } => AggregationDoc::Tabular(TabularDoc {
                table: table
                    .iter()
                    .enumerate()
                    .map(|(idx, sdf)| TabularEntryDoc {
                        profile: self.index_to_profile(idx),
                        sdf: sdf.clone(),
                    })
                    .collect(),
            }),
        };
        ScenarioDocument {
            version: "1".into(),
            states: self
                .space
                .labels()
                .iter()
                .zip(self.space.probs())
                .map(|(label, prob)| StateDoc { label: label.clone(), prob: prob.clone() })
                .collect(),
            assets: AssetsDoc {
                payoffs: self.assets.payoffs().to_vec(),
                risk_free_index: self.assets.risk_free_index(),
                gross_rate: self.assets.gross_rate().clone(),
            },
            agents: self
                .agents
                .iter()
                .map(|a| AgentDoc {
                    name: a.name.clone(),
                    strategies: a.grid.iter().map(|p| p.0.clone()).collect(),
                })
                .collect(),
            aggregation,
            risk_free: match &self.risk_free {
                RiskFreeSpec::GrossRate => None,
                RiskFreeSpec::Table { entries, default } => Some(RiskFreeDoc::Table {
                    entries: entries
                        .iter()
                        .map(|(amount, discount)| RiskFreeEntryDoc {
                            amount: amount.clone(),
                            discount: discount.clone(),
                        })
                        .collect(),
                    default: default.clone(),
                }),
            },
            flags: Some(FlagsDoc {
                mode: Some(self.flags.mode),
                max_steps: Some(self.flags.max_steps),
                tie_break: Some(self.flags.tie_break),
                seed: Some(self.flags.seed),
            }),
        }
    }
}

/// Risk-free discount for a funding amount under the scenario's spec.
pub fn risk_free_discount(scen: &MarketScenario, amount: &Rat) -> Rat {
    scen.risk_free().discount(scen.assets().gross_rate(), amount)
}
