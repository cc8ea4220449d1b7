//! Dominance regions of the simultaneous game.
//!
//! Alerting is weakly dominant up to `λ + c/n` (the worst case for an
//! alerter is everyone alerting, each pocketing `c/n`, versus `β − λ`
//! for deviating). Silence is weakly dominant from `λ(n−1) + c` (the
//! best case for a lone alerter). Between the two thresholds neither
//! action dominates.

use num_rational::BigRational;

use crate::money::TokenAmount;
use crate::params::ProtocolParams;

use super::DominanceClass;

fn big(n: usize) -> BigRational {
    BigRational::from_integer((n as u64).into())
}

/// Largest bribe at which alerting is still weakly dominant: `λ + c/n`.
pub fn alert_dominance_threshold(params: &ProtocolParams) -> TokenAmount {
    let micro = params.penalty_lambda().micro()
        + params.operator_cost_c().micro() / big(params.n());
    TokenAmount::from_micro_rational(micro).expect("threshold is nonnegative")
}

/// Smallest bribe at which silence is weakly dominant: `λ(n−1) + c`.
pub fn no_alert_dominance_threshold(params: &ProtocolParams) -> TokenAmount {
    let micro = params.penalty_lambda().micro() * big(params.n() - 1)
        + params.operator_cost_c().micro();
    TokenAmount::from_micro_rational(micro).expect("threshold is nonnegative")
}

/// Classifies a node's bribe against the two thresholds. Boundaries
/// resolve toward the dominant action (weak dominance holds there), so
/// `AlertDominant` wins when the thresholds coincide.
pub fn classify_dominance(beta: &TokenAmount, params: &ProtocolParams) -> DominanceClass {
    if *beta <= alert_dominance_threshold(params) {
        DominanceClass::AlertDominant
    } else if *beta >= no_alert_dominance_threshold(params) {
        DominanceClass::NoAlertDominant
    } else {
        DominanceClass::Interior
    }
}

/// True iff neither all-Alert nor all-NoAlert is a Nash equilibrium,
/// established by checking the single profitable unilateral deviation
/// from each symmetric profile.
pub fn no_symmetric_pure_ne(beta: &TokenAmount, params: &ProtocolParams) -> bool {
    use std::collections::BTreeSet;

    use super::{payoff::sim_node_payoff, Action};
    use crate::NodeId;

    let everyone: BTreeSet<NodeId> = NodeId::committee(params.n()).into_iter().collect();
    let only_me: BTreeSet<NodeId> = [NodeId(0)].into_iter().collect();
    let nobody: BTreeSet<NodeId> = BTreeSet::new();

    // All-Alert: staying earns c/n, deviating to silence earns β − λ.
    let stay_all_alert = sim_node_payoff(Action::Alert, beta, &everyone, params).unwrap();
    let mut others: BTreeSet<NodeId> = everyone.clone();
    others.remove(&NodeId(0));
    let deviate_silent = sim_node_payoff(Action::NoAlert, beta, &others, params).unwrap();
    let all_alert_is_ne = stay_all_alert >= deviate_silent;

    // All-NoAlert: staying keeps β, deviating to a lone alert earns
    // λ(n−1) + c.
    let stay_all_silent = sim_node_payoff(Action::NoAlert, beta, &nobody, params).unwrap();
    let deviate_alert = sim_node_payoff(Action::Alert, beta, &only_me, params).unwrap();
    let all_silent_is_ne = stay_all_silent >= deviate_alert;

    !all_alert_is_ne && !all_silent_is_ne
}
