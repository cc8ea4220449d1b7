//! Core library for simulating and analyzing on-chain alerting protocols.
//!
//! A fixed committee of `n` staked watchdog nodes monitors an off-chain
//! condition; when the condition occurs, a node may publish an on-chain
//! alert. Non-alerters are slashed a penalty `λ` and alerters share the
//! slashed value (plus an optional operator reward `c`). A bribing
//! adversary who gains `G` from keeping the condition unreported offers
//! each node a private bribe to stay silent. This crate provides:
//!
//! - [`money`]: exact rational token arithmetic (no floating point on any
//!   settlement path).
//! - [`params`]: validated protocol parameters.
//! - [`chain`] / [`merkle`]: a deterministic simulated blockchain with
//!   Merkle inclusion proofs and header-chain verification.
//! - [`game`]: closed-form payoffs, dominance regions, mixed-equilibrium
//!   solving, sequential (slot-based) equilibria, and every
//!   bribery-resistance bound, plus slow brute-force reference
//!   implementations used as oracles in tests.
//! - [`tee`]: a mock trusted-hardware device implementing sealed timed
//!   commitments with proof-of-publication unsealing and attestations.
//! - [`protocols`]: executable round engines for the BurnedPenalty,
//!   Lockstep, TeeCommitReveal, NaiveCommitReveal, and Sequential
//!   protocols, all driving the simulated chain.
//! - [`adversary`] / [`agents`]: bribing strategies and rational node
//!   behaviors that close the game loop.

pub mod adversary;
pub mod agents;
pub mod chain;
pub mod digest;
pub mod game;
pub mod merkle;
pub mod money;
pub mod params;
pub mod protocols;
pub mod tee;

use std::fmt;

/// Identity of a committee node. Ordering is used for deterministic
/// tie-breaks (transaction ordering, remainder assignment in reward
/// splits).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "node-{}", self.0)
    }
}

impl NodeId {
    /// The ids `0..n` used by default throughout the simulation.
    pub fn committee(n: usize) -> Vec<NodeId> {
        (0..n as u32).map(NodeId).collect()
    }
}
