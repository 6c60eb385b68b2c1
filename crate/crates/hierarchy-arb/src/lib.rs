//! Exact-rational toolkit for studying arbitrage in small, fully enumerable
//! markets where prices are read off a stochastic discount factor (SDF) that
//! aggregates every participant's portfolio choice.
//!
//! The crate provides:
//!
//! * asset pricing, net-gain accounting, and classical arbitrage detection
//!   over exact rationals ([`market`]);
//! * pluggable profile-to-SDF aggregation maps with exact inversion and a
//!   responsiveness preorder ([`aggregation`]);
//! * iterated statewise-dominance ladders and the order classification they
//!   induce ([`dominance`]);
//! * a sequential adjustment (tatonnement) process with fully deterministic
//!   traces ([`tatonnement`]);
//! * a seeded generator plus independent brute-force verifiers used as the
//!   test oracle ([`oracle`]).
//!
//! Everything is computed with arbitrary-precision rationals; no floats are
//! accepted anywhere, so set-membership and dominance comparisons are exact.

pub mod aggregation;
pub mod dominance;
pub mod market;
pub mod oracle;
pub mod rat;
pub mod scenario;
pub mod simplex;
pub mod tatonnement;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed input documents (bad rationals, schema violations).
    #[error("parse error: {0}")]
    Parse(String),
    /// Structurally valid input that violates a domain invariant.
    #[error("validation error: {0}")]
    Validation(String),
    /// Valid data used outside an operation's precondition.
    #[error("domain error: {0}")]
    Domain(String),
    /// Unusable generator or command configuration.
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
