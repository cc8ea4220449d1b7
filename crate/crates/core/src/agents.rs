//! Rational node behavior: maps a node's private bribe (and policy) to
//! an action, closing the loop between the analytic game and the
//! protocol engines.
//!
//! A node sees only its own offer — never the rest of the bribe
//! vector — so every decision here is a function of (own β, params,
//! seed).

use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand_chacha::rand_core::SeedableRng;

use crate::digest::digest_parts;
use crate::game::{classify_dominance, symmetric_mixed_q, Action, DominanceClass};
use crate::money::TokenAmount;
use crate::params::ProtocolParams;
use crate::protocols::NodePolicy;
use crate::NodeId;

/// One node's private view of a round.
#[derive(Debug, Clone)]
pub struct AgentState {
    pub node_id: NodeId,
    pub policy: NodePolicy,
    /// Per-round, per-node seed; the caller must vary it across rounds
    /// for mixed play to actually mix.
    pub rng_seed: u64,
    /// The adversary's offer to this node alone.
    pub observed_bribe: TokenAmount,
}

impl AgentState {
    pub fn new(
        node_id: NodeId,
        policy: NodePolicy,
        rng_seed: u64,
        observed_bribe: TokenAmount,
    ) -> Self {
        AgentState { node_id, policy, rng_seed, observed_bribe }
    }
}

/// Seeds a per-decision RNG from independent entropy sources, domain
/// separated so different decision kinds never share a stream.
fn decision_rng(tag: &[u8], parts: &[u64]) -> ChaCha20Rng {
    let encoded: Vec<Vec<u8>> = parts.iter().map(|p| p.to_le_bytes().to_vec()).collect();
    let mut slices: Vec<&[u8]> = vec![tag];
    slices.extend(encoded.iter().map(|v| v.as_slice()));
    ChaCha20Rng::from_seed(digest_parts(&slices).0)
}

fn stay_silent_with_probability(q: f64, rng: &mut ChaCha20Rng) -> Action {
    let draw: f64 = rng.random();
    if draw < q.clamp(0.0, 1.0) {
        Action::NoAlert
    } else {
        Action::Alert
    }
}

/// The one-shot simultaneous decision. Dominance pins the action where
/// it can; in the interior the node stays silent with the probability
/// `q` solved from its own bribe (symmetric approximation), sampled
/// reproducibly from its seed.
pub fn decide_simultaneous(agent: &AgentState, params: &ProtocolParams) -> Action {
    match &agent.policy {
        NodePolicy::Honest => Action::Alert,
        NodePolicy::Scripted(actions) => actions.first().copied().unwrap_or(Action::NoAlert),
        NodePolicy::Mixed { q, seed } => {
            let mut rng = decision_rng(
                b"mixed-simultaneous",
                &[*seed, agent.rng_seed, u64::from(agent.node_id.0)],
            );
            stay_silent_with_probability(*q, &mut rng)
        }
        NodePolicy::Bribed => match classify_dominance(&agent.observed_bribe, params) {
            DominanceClass::AlertDominant => Action::Alert,
            DominanceClass::NoAlertDominant => Action::NoAlert,
            DominanceClass::Interior => {
                let q = symmetric_mixed_q(&agent.observed_bribe, params)
                    .expect("interior classification implies a solvable q");
                let mut rng = decision_rng(
                    b"bribed-interior",
                    &[agent.rng_seed, u64::from(agent.node_id.0)],
                );
                stay_silent_with_probability(q, &mut rng)
            }
        },
    }
}

/// The slot decision in sequential play: alert iff the accrued reward
/// `λ(s−1)` already covers the bribe, ties resolved toward alerting.
pub fn decide_sequential(agent: &AgentState, slot: usize, params: &ProtocolParams) -> Action {
    match &agent.policy {
        NodePolicy::Honest => Action::Alert,
        NodePolicy::Scripted(actions) => actions.first().copied().unwrap_or(Action::NoAlert),
        NodePolicy::Mixed { q, seed } => {
            let mut rng = decision_rng(
                b"mixed-sequential",
                &[*seed, agent.rng_seed, u64::from(agent.node_id.0), slot as u64],
            );
            stay_silent_with_probability(*q, &mut rng)
        }
        NodePolicy::Bribed => {
            let accrued = params.penalty_lambda() * (slot as u64 - 1);
            if accrued.micro() >= agent.observed_bribe.micro() {
                Action::Alert
            } else {
                Action::NoAlert
            }
        }
    }
}
