//! Game-theoretic analysis of the alerting game.
//!
//! Everything here is a pure function of its inputs: one-shot payoffs
//! for nodes and the briber, dominance classification, the symmetric
//! mixed-equilibrium solver, slot-based sequential equilibria, and the
//! bribery-resistance bounds. [`reference`] holds deliberately slow
//! brute-force implementations of the same questions; tests hold the
//! fast paths to them.

mod bounds;
mod dominance;
mod mixed;
mod payoff;
pub mod reference;
mod report;
mod sequential;

pub use bounds::{
    burned_penalty_resistance, early_reveal_attack_cost, early_reveal_bribe_schedule,
    max_bribery_resistance, sequential_delay_cost, sequential_suppression_threshold,
    simultaneous_suppression_threshold,
};
pub use dominance::{
    alert_dominance_threshold, classify_dominance, no_alert_dominance_threshold,
    no_symmetric_pure_ne,
};
pub use mixed::{
    adversary_expected_utility, expected_bribe_bound_check, indifference_gap_binomial,
    indifference_gap_closed_form, symmetric_mixed_q, BoundCheck,
};
pub use payoff::{
    conditional_adversary_payoff, conditional_node_payoff, sim_adversary_payoff, sim_node_payoff,
};
pub use report::{
    contract_division, equilibrium_report, predict_simultaneous_outcome, solve_profile,
    EquilibriumReport, SettlementRule,
};
pub use sequential::{sequential_adversary_optimal, sequential_adversary_optimal_for, sequential_spne};

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::money::{PayoffAmount, TokenAmount};
use crate::NodeId;

/// A node's one-shot choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Alert,
    NoAlert,
}

impl std::fmt::Display for Action {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Action::Alert => "Alert",
            Action::NoAlert => "NoAlert",
        })
    }
}

/// The adversary's move: a private bribe per node (absent means zero)
/// plus the gain `G` she realizes if no alert is ever raised.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BribeVector {
    pub offers: BTreeMap<NodeId, TokenAmount>,
    pub gain_g: TokenAmount,
}

impl BribeVector {
    /// No bribes at all.
    pub fn empty(gain_g: TokenAmount) -> Self {
        BribeVector { offers: BTreeMap::new(), gain_g }
    }

    /// The same offer to each of the `n` default committee nodes.
    pub fn uniform(n: usize, offer: TokenAmount, gain_g: TokenAmount) -> Self {
        let offers = NodeId::committee(n).into_iter().map(|id| (id, offer.clone())).collect();
        BribeVector { offers, gain_g }
    }

    /// Offers listed in committee order (`amounts[i]` goes to node `i`).
    pub fn by_committee_order(amounts: &[TokenAmount], gain_g: TokenAmount) -> Self {
        let offers = amounts
            .iter()
            .enumerate()
            .map(|(i, a)| (NodeId(i as u32), a.clone()))
            .collect();
        BribeVector { offers, gain_g }
    }

    /// The offer made to `node` (zero when absent).
    pub fn offer(&self, node: NodeId) -> TokenAmount {
        self.offers.get(&node).cloned().unwrap_or_else(TokenAmount::zero)
    }

    /// Sum of all offers.
    pub fn total(&self) -> TokenAmount {
        self.offers.values().cloned().sum()
    }

    /// True when every offer is zero.
    pub fn is_zero(&self) -> bool {
        self.offers.values().all(TokenAmount::is_zero)
    }
}

/// How one round of the game resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    /// Nodes whose alert took effect.
    pub alerter_set_f: BTreeSet<NodeId>,
    pub node_payoffs: BTreeMap<NodeId, PayoffAmount>,
    pub adversary_payoff: PayoffAmount,
    /// In slot-based play, the node whose alert ended the round.
    pub first_alerter: Option<NodeId>,
    /// 1-indexed slot of that alert.
    pub alert_slot: Option<usize>,
}

impl Outcome {
    pub fn alert_raised(&self) -> bool {
        !self.alerter_set_f.is_empty()
    }
}

/// Per-node probabilities of staying silent. `q_i` is the probability
/// node i plays NoAlert; kept as exact rationals so products and the
/// lower-bound inequality can be evaluated without rounding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedProfile {
    q: BTreeMap<NodeId, BigRational>,
}

impl MixedProfile {
    pub fn new(q: BTreeMap<NodeId, BigRational>) -> Result<Self, GameError> {
        for v in q.values() {
            if v < &BigRational::zero() || v > &BigRational::one() {
                return Err(GameError::ProbabilityOutOfRange);
            }
        }
        Ok(MixedProfile { q })
    }

    /// Every listed node silent with the same probability.
    pub fn uniform(nodes: &[NodeId], q: BigRational) -> Result<Self, GameError> {
        Self::new(nodes.iter().map(|id| (*id, q.clone())).collect())
    }

    /// Uniform profile over the default committee, converting the
    /// float exactly (every f64 is a rational).
    pub fn uniform_f64(n: usize, q: f64) -> Result<Self, GameError> {
        let r = BigRational::from_float(q).ok_or(GameError::ProbabilityOutOfRange)?;
        Self::uniform(&NodeId::committee(n), r)
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.q.keys().copied()
    }

    pub fn q_of(&self, node: NodeId) -> BigRational {
        self.q.get(&node).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Probability that every node stays silent: `Q = ∏ q_i`.
    pub fn success_probability(&self) -> BigRational {
        self.q.values().fold(BigRational::one(), |acc, v| acc * v)
    }
}

/// Where a bribe lands relative to the dominance thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DominanceClass {
    /// Alerting is weakly best against every opponent profile.
    AlertDominant,
    /// Staying silent is weakly best against every opponent profile.
    NoAlertDominant,
    /// Neither action dominates; only mixed equilibria exist.
    Interior,
}

impl std::fmt::Display for DominanceClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DominanceClass::AlertDominant => "alert-dominant",
            DominanceClass::NoAlertDominant => "noalert-dominant",
            DominanceClass::Interior => "interior",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("alert payoff undefined for an empty alerter set")]
    EmptyAlerterSetWithAlertAction,
    #[error("bribe {beta} outside the mixing interior ({lower}, {upper})")]
    OutsideInteriorRange { beta: TokenAmount, lower: TokenAmount, upper: TokenAmount },
    #[error("slot count {m} outside 1..={n}")]
    SlotOutOfRange { m: usize, n: usize },
    #[error("probability outside [0, 1]")]
    ProbabilityOutOfRange,
    #[error("no solver for heterogeneous bribes strictly inside the mixing interior")]
    HeterogeneousInterior,
}
