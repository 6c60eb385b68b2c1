//! States, assets, portfolios, SDF pricing, and classical arbitrage
//! detection/certification.
//!
//! Prices are always read off a stochastic discount factor `m`:
//! `q[n] = Σ_s m(s)·x_n(s)·P(s)`. All comparisons quantify over the support
//! of `P` only — zero-probability states never influence a verdict.

use crate::rat::{dot, Rat};
use crate::simplex::{self, Lp, LpOutcome};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// A finite state space with an exact physical measure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    labels: Vec<String>,
    prob: Vec<Rat>,
    support: Vec<usize>,
}

impl StateSpace {
    pub fn new(labels: Vec<String>, prob: Vec<Rat>) -> Result<StateSpace> {
        if labels.len() != prob.len() || labels.is_empty() {
            return Err(Error::Validation(format!(
                "state space needs matching non-empty labels/probabilities, got {}/{}",
                labels.len(),
                prob.len()
            )));
        }
        if prob.iter().any(|p| p.is_negative()) {
            return Err(Error::Validation("negative state probability".into()));
        }
        let total: Rat = prob.iter().cloned().sum();
        if total != Rat::one() {
            return Err(Error::Validation(format!(
                "state probabilities must sum to exactly 1, got {total}"
            )));
        }
        let support: Vec<usize> = (0..prob.len()).filter(|&s| prob[s].is_positive()).collect();
        debug_assert!(!support.is_empty());
        Ok(StateSpace { labels, prob, support })
    }

    pub fn len(&self) -> usize {
        self.prob.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn prob(&self, s: usize) -> &Rat {
        &self.prob[s]
    }

    pub fn probs(&self) -> &[Rat] {
        &self.prob
    }

    /// States with strictly positive probability.
    pub fn support(&self) -> &[usize] {
        &self.support
    }
}

/// The tradeable assets: payoff matrix plus the designated risk-free asset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssetSet {
    payoff: Vec<Vec<Rat>>, // asset x state
    risk_free_index: usize,
    gross_rate: Rat,
}

impl AssetSet {
    pub fn new(
        payoff: Vec<Vec<Rat>>,
        risk_free_index: usize,
        gross_rate: Rat,
        space: &StateSpace,
    ) -> Result<AssetSet> {
        if payoff.is_empty() {
            return Err(Error::Validation("asset set must be non-empty".into()));
        }
        for (n, row) in payoff.iter().enumerate() {
            if row.len() != space.len() {
                return Err(Error::Validation(format!(
                    "asset {n} has {} payoffs for {} states",
                    row.len(),
                    space.len()
                )));
            }
            if row.iter().any(|x| x.is_negative()) {
                return Err(Error::Validation(format!("asset {n} has a negative payoff")));
            }
        }
        if risk_free_index >= payoff.len() {
            return Err(Error::Validation(format!(
                "risk-free index {risk_free_index} out of range"
            )));
        }
        if !gross_rate.is_positive() {
            return Err(Error::Validation("gross rate must be positive".into()));
        }
        let rf = &payoff[risk_free_index];
        let first = &rf[space.support()[0]];
        if !first.is_positive() || space.support().iter().any(|&s| &rf[s] != first) {
            return Err(Error::Validation(
                "risk-free payoff must be one positive constant across support states".into(),
            ));
        }
        Ok(AssetSet { payoff, risk_free_index, gross_rate })
    }

    pub fn count(&self) -> usize {
        self.payoff.len()
    }

    pub fn payoff(&self, asset: usize, state: usize) -> &Rat {
        &self.payoff[asset][state]
    }

    pub fn payoffs(&self) -> &[Vec<Rat>] {
        &self.payoff
    }

    pub fn risk_free_index(&self) -> usize {
        self.risk_free_index
    }

    pub fn gross_rate(&self) -> &Rat {
        &self.gross_rate
    }
}

/// Units held per asset; negative means short.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Portfolio(pub Vec<Rat>);

impl Portfolio {
    /// State payout `θ·x(s)`.
    pub fn payout(&self, assets: &AssetSet, state: usize) -> Rat {
        (0..assets.count())
            .map(|n| &self.0[n] * assets.payoff(n, state))
            .sum()
    }

    /// Ex-ante cost `θ·q`.
    pub fn cost(&self, q: &PriceVector) -> Rat {
        dot(&self.0, &q.0)
    }
}

/// A stochastic discount factor; its discount `Σ m(s)P(s)` must be positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Sdf(Vec<Rat>);

impl Sdf {
    pub fn new(values: Vec<Rat>, space: &StateSpace) -> Result<Sdf> {
        if values.len() != space.len() {
            return Err(Error::Validation(format!(
                "SDF has {} values for {} states",
                values.len(),
                space.len()
            )));
        }
        let disc: Rat = space.support().iter().map(|&s| &values[s] * space.prob(s)).sum();
        if !disc.is_positive() {
            return Err(Error::Validation(format!(
                "SDF discount factor must be positive, got {disc}"
            )));
        }
        Ok(Sdf(values))
    }

    pub fn values(&self) -> &[Rat] {
        &self.0
    }

    pub fn value(&self, state: usize) -> &Rat {
        &self.0[state]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PriceVector(pub Vec<Rat>);

/// Net gain per state, in payout units.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GainProfile(pub Vec<Rat>);

/// `q[n] = Σ_s m(s)·x_n(s)·P(s)`, exact.
pub fn price_assets(m: &Sdf, assets: &AssetSet, space: &StateSpace) -> PriceVector {
    let prices = (0..assets.count())
        .map(|n| {
            space
                .support()
                .iter()
                .map(|&s| m.value(s) * assets.payoff(n, s) * space.prob(s))
                .sum()
        })
        .collect();
    PriceVector(prices)
}

/// `Σ_s m(s)·P(s)`; positive by the SDF invariant.
pub fn discount_factor(m: &Sdf, space: &StateSpace) -> Rat {
    space.support().iter().map(|&s| m.value(s) * space.prob(s)).sum()
}

/// Classical arbitrage test: non-positive cost, almost-surely non-negative
/// payout, strictly positive payout in some support state.
pub fn classical_arbitrage_check(
    theta: &Portfolio,
    q: &PriceVector,
    assets: &AssetSet,
    space: &StateSpace,
) -> bool {
    if theta.cost(q).is_positive() {
        return false;
    }
    let mut strict = false;
    for &s in space.support() {
        let pay = theta.payout(assets, s);
        if pay.is_negative() {
            return false;
        }
        if pay.is_positive() {
            strict = true;
        }
    }
    strict
}

/// Either an explicit arbitrage portfolio or a strictly positive state-price
/// certificate proving none exists.
#[derive(Debug, Clone)]
pub enum ArbOutcome {
    Arbitrage(Portfolio),
    Certificate(Sdf),
}

/// Decides the price system `q`: exhibits an arbitrage portfolio, or a
/// strictly positive SDF repricing `q` exactly on support.
///
/// The certificate is found by maximizing a uniform floor `t` under the
/// repricing equalities; `t > 0` yields strictly positive state prices. If no
/// such floor exists, the dual side is searched on the box `[-1,1]^d`: first
/// for a portfolio with positive payout mass, then for one with strictly
/// negative cost (topped up with risk-free units to make the payout strict).
pub fn find_arbitrage(q: &PriceVector, assets: &AssetSet, space: &StateSpace) -> ArbOutcome {
    let support = space.support();
    let k = support.len();
    let d = assets.count();

    // Certificate LP: vars u_0..u_{k-1}, t, slack; maximize t subject to
    //   Σ_s u_s·x_n(s)·P(s) + t·Σ_s x_n(s)·P(s) = q_n   for every asset n
    //   t + slack = 1.
    let nvars = k + 2;
    let mut a = Vec::with_capacity(d + 1);
    let mut b = Vec::with_capacity(d + 1);
    for n in 0..d {
        let mut row = vec![Rat::zero(); nvars];
        let mut tcoef = Rat::zero();
        for (idx, &s) in support.iter().enumerate() {
            let w = assets.payoff(n, s) * space.prob(s);
            tcoef += &w;
            row[idx] = w;
        }
        row[k] = tcoef;
        a.push(row);
        b.push(q.0[n].clone());
    }
    let mut cap = vec![Rat::zero(); nvars];
    cap[k] = Rat::one();
    cap[k + 1] = Rat::one();
    a.push(cap);
    b.push(Rat::one());
    let mut c = vec![Rat::zero(); nvars];
    c[k] = Rat::one();

    if let LpOutcome::Optimal { value, solution } = simplex::solve(&Lp { a, b, c }) {
        if value.is_positive() {
            let mut m = vec![Rat::one(); space.len()];
            for (idx, &s) in support.iter().enumerate() {
                m[s] = &solution[idx] + &solution[k];
            }
            let sdf = Sdf::new(m, space).expect("positive certificate has positive discount");
            debug_assert_eq!(price_assets(&sdf, assets, space), *q);
            return ArbOutcome::Certificate(sdf);
        }
    }
    find_arbitrage_portfolio(q, assets, space)
}

/// Dual search used when no strictly positive certificate exists.
fn find_arbitrage_portfolio(q: &PriceVector, assets: &AssetSet, space: &StateSpace) -> ArbOutcome {
    let support = space.support();
    let k = support.len();
    let d = assets.count();
    // Vars: θ⁺ (d), θ⁻ (d), cost slack (1), surplus per support state (k),
    // box slack per asset (d).
    let nvars = 2 * d + 1 + k + d;
    let build = |objective: Vec<Rat>| -> Lp {
        let mut a = Vec::new();
        let mut b = Vec::new();
        // θ·q + slack = 0
        let mut row = vec![Rat::zero(); nvars];
        for n in 0..d {
            row[n] = q.0[n].clone();
            row[d + n] = -&q.0[n];
        }
        row[2 * d] = Rat::one();
        a.push(row);
        b.push(Rat::zero());
        // θ·x(s) − surplus_s = 0
        for (idx, &s) in support.iter().enumerate() {
            let mut row = vec![Rat::zero(); nvars];
            for n in 0..d {
                row[n] = assets.payoff(n, s).clone();
                row[d + n] = -assets.payoff(n, s);
            }
            row[2 * d + 1 + idx] = -Rat::one();
            a.push(row);
            b.push(Rat::zero());
        }
        // θ⁺_n + θ⁻_n + box_n = 1
        for n in 0..d {
            let mut row = vec![Rat::zero(); nvars];
            row[n] = Rat::one();
            row[d + n] = Rat::one();
            row[2 * d + 1 + k + n] = Rat::one();
            a.push(row);
            b.push(Rat::one());
        }
        Lp { a, b, c: objective }
    };
    let extract = |solution: &[Rat]| -> Portfolio {
        Portfolio((0..d).map(|n| &solution[n] - &solution[d + n]).collect())
    };

    // First: maximize total payout surplus.
    let mut c = vec![Rat::zero(); nvars];
    for idx in 0..k {
        c[2 * d + 1 + idx] = Rat::one();
    }
    if let LpOutcome::Optimal { value, solution } = simplex::solve(&build(c)) {
        if value.is_positive() {
            let theta = extract(&solution);
            debug_assert!(classical_arbitrage_check(&theta, q, assets, space));
            return ArbOutcome::Arbitrage(theta);
        }
    }

    // Second: maximize the cost slack (−θ·q) and convert the strictly
    // negative cost into a strict payout with risk-free units.
    let mut c = vec![Rat::zero(); nvars];
    c[2 * d] = Rat::one();
    if let LpOutcome::Optimal { value, solution } = simplex::solve(&build(c)) {
        if value.is_positive() {
            let mut theta = extract(&solution);
            let rf = assets.risk_free_index();
            let q_rf = &q.0[rf];
            let delta = if q_rf.is_positive() {
                value / q_rf.clone() // spends the freed cash on risk-free units
            } else {
                Rat::one()
            };
            theta.0[rf] += &delta;
            debug_assert!(classical_arbitrage_check(&theta, q, assets, space));
            return ArbOutcome::Arbitrage(theta);
        }
    }
    unreachable!("no positive certificate and no arbitrage portfolio: violates the price-system alternative")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::r;

    pub(crate) fn half_half() -> StateSpace {
        StateSpace::new(vec!["up".into(), "down".into()], vec![r(1, 2), r(1, 2)]).unwrap()
    }

    fn rf_plus_risky(space: &StateSpace) -> AssetSet {
        AssetSet::new(
            vec![vec![Rat::one(), Rat::one()], vec![Rat::int(2), Rat::zero()]],
            0,
            Rat::one(),
            space,
        )
        .unwrap()
    }

    #[test]
    fn pricing_matches_hand_sums() {
        let space = half_half();
        let assets = rf_plus_risky(&space);
        let m1 = Sdf::new(vec![Rat::one(), Rat::one()], &space).unwrap();
        let q = price_assets(&m1, &assets, &space);
        assert_eq!(q.0, vec![Rat::one(), Rat::one()]); // q_rf = 1, q_risky = 1
        let mh = Sdf::new(vec![r(1, 2), r(1, 2)], &space).unwrap();
        let qh = price_assets(&mh, &assets, &space);
        assert_eq!(qh.0[1], r(1, 2)); // risky (2,0) at m=(1/2,1/2): q = 1/2
    }

    #[test]
    fn discount_factor_hand_sums() {
        let space = half_half();
        let one = Sdf::new(vec![Rat::one(), Rat::one()], &space).unwrap();
        assert_eq!(discount_factor(&one, &space), Rat::one());
        let m = Sdf::new(vec![Rat::int(2), Rat::zero()], &space).unwrap();
        assert_eq!(discount_factor(&m, &space), Rat::one());
        let m = Sdf::new(vec![r(1, 3), r(1, 3)], &space).unwrap();
        assert_eq!(discount_factor(&m, &space), r(1, 3));
    }

    #[test]
    fn zero_discount_sdf_rejected() {
        let space = half_half();
        assert!(Sdf::new(vec![Rat::zero(), Rat::zero()], &space).is_err());
        assert!(Sdf::new(vec![Rat::one(), -Rat::one()], &space).is_err());
        // Negative values off the discount constraint are fine.
        assert!(Sdf::new(vec![Rat::int(3), -Rat::one()], &space).is_ok());
    }

    #[test]
    fn zero_probability_states_are_ignored() {
        let space =
            StateSpace::new(vec!["a".into(), "b".into()], vec![Rat::one(), Rat::zero()]).unwrap();
        assert_eq!(space.support(), &[0]);
        // Risk-free payoff only needs to be constant on support.
        let assets = AssetSet::new(
            vec![vec![Rat::one(), Rat::int(5)]],
            0,
            Rat::one(),
            &space,
        )
        .unwrap();
        let m = Sdf::new(vec![Rat::one(), Rat::int(9)], &space).unwrap();
        assert_eq!(price_assets(&m, &assets, &space).0, vec![Rat::one()]);
    }

    #[test]
    fn classical_check_examples() {
        let space = half_half();
        let assets = rf_plus_risky(&space);
        let q0 = PriceVector(vec![Rat::one(), Rat::zero()]);
        assert!(!classical_arbitrage_check(
            &Portfolio(vec![Rat::zero(), Rat::zero()]),
            &q0,
            &assets,
            &space
        ));
        assert!(classical_arbitrage_check(
            &Portfolio(vec![Rat::zero(), Rat::one()]),
            &q0,
            &assets,
            &space
        ));
        // Positive cost never qualifies.
        let q = PriceVector(vec![Rat::one(), Rat::one()]);
        assert!(!classical_arbitrage_check(
            &Portfolio(vec![Rat::one(), Rat::zero()]),
            &q,
            &assets,
            &space
        ));
    }

    #[test]
    fn find_arbitrage_certificate_branch() {
        let space = half_half();
        let assets = rf_plus_risky(&space);
        // q = E[x]: m ≡ 1 prices exactly.
        let q = PriceVector(vec![Rat::one(), Rat::one()]);
        match find_arbitrage(&q, &assets, &space) {
            ArbOutcome::Certificate(m) => {
                assert_eq!(price_assets(&m, &assets, &space), q);
                for &s in space.support() {
                    assert!(m.value(s).is_positive());
                }
            }
            ArbOutcome::Arbitrage(t) => panic!("unexpected arbitrage {t:?}"),
        }
    }

    #[test]
    fn find_arbitrage_portfolio_branch() {
        let space = half_half();
        let assets = rf_plus_risky(&space);
        // Risky asset with non-negative payoff priced at zero.
        let q = PriceVector(vec![Rat::one(), Rat::zero()]);
        match find_arbitrage(&q, &assets, &space) {
            ArbOutcome::Arbitrage(theta) => {
                assert!(classical_arbitrage_check(&theta, &q, &assets, &space));
            }
            ArbOutcome::Certificate(m) => panic!("unexpected certificate {m:?}"),
        }
    }

    #[test]
    fn find_arbitrage_negative_cost_only() {
        let space = half_half();
        // Single risk-free asset with a negative price: the only arbitrage
        // shape is "get paid to hold a positive payoff".
        let assets =
            AssetSet::new(vec![vec![Rat::one(), Rat::one()]], 0, Rat::one(), &space).unwrap();
        let q = PriceVector(vec![-Rat::one()]);
        match find_arbitrage(&q, &assets, &space) {
            ArbOutcome::Arbitrage(theta) => {
                assert!(classical_arbitrage_check(&theta, &q, &assets, &space));
            }
            ArbOutcome::Certificate(m) => panic!("unexpected certificate {m:?}"),
        }
    }

    #[test]
    fn law_of_one_price_violation_yields_portfolio() {
        let space = half_half();
        // Two identical assets at different prices.
        let assets = AssetSet::new(
            vec![vec![Rat::one(), Rat::one()], vec![Rat::one(), Rat::one()]],
            0,
            Rat::one(),
            &space,
        )
        .unwrap();
        let q = PriceVector(vec![Rat::one(), r(1, 2)]);
        match find_arbitrage(&q, &assets, &space) {
            ArbOutcome::Arbitrage(theta) => {
                assert!(classical_arbitrage_check(&theta, &q, &assets, &space));
            }
            ArbOutcome::Certificate(m) => panic!("unexpected certificate {m:?}"),
        }
    }
}
