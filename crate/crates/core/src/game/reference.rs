//! Slow, obviously-correct reference implementations.
//!
//! Each function here answers the same question as a fast path
//! elsewhere in [`crate::game`], but by exhaustive enumeration from the
//! raw payoff definitions. Tests hold the fast paths to these oracles;
//! nothing in production code should call them.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::money::PayoffAmount;
use crate::params::ProtocolParams;
use crate::protocols::SlotSchedule;
use crate::NodeId;

use super::payoff::sim_node_payoff;
use super::{Action, BribeVector, DominanceClass, Outcome};

fn big(v: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Dominance class of a bribe established by brute force: compare the
/// two actions of node 0 against every pure profile of the other
/// `n−1` nodes. Exponential in `n`; intended for `n ≤ 6`.
pub fn dominance_by_enumeration(
    beta: &crate::money::TokenAmount,
    params: &ProtocolParams,
) -> DominanceClass {
    let n = params.n();
    let others: Vec<NodeId> = NodeId::committee(n).into_iter().skip(1).collect();
    let me = NodeId(0);

    let mut alert_always_weakly_best = true;
    let mut noalert_always_weakly_best = true;
    for mask in 0u64..(1 << (n - 1)) {
        let mut opponents_alerting: BTreeSet<NodeId> = BTreeSet::new();
        for (bit, id) in others.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                opponents_alerting.insert(*id);
            }
        }
        let mut with_me = opponents_alerting.clone();
        with_me.insert(me);
        let u_alert = sim_node_payoff(Action::Alert, beta, &with_me, params).unwrap();
        let u_noalert =
            sim_node_payoff(Action::NoAlert, beta, &opponents_alerting, params).unwrap();
        if u_alert < u_noalert {
            alert_always_weakly_best = false;
        }
        if u_noalert < u_alert {
            noalert_always_weakly_best = false;
        }
    }
    if alert_always_weakly_best {
        DominanceClass::AlertDominant
    } else if noalert_always_weakly_best {
        DominanceClass::NoAlertDominant
    } else {
        DominanceClass::Interior
    }
}

/// Builds the sequential outcome for a known first-alert slot (or
/// silence) straight from the payoff table, independent of any
/// equilibrium search.
fn outcome_for_first_alert(
    first_alert: Option<usize>,
    bribes: &BribeVector,
    schedule: &SlotSchedule,
    params: &ProtocolParams,
) -> Outcome {
    let lambda = params.penalty_lambda().micro();
    let n = schedule.len();
    let mut node_payoffs: BTreeMap<NodeId, PayoffAmount> = BTreeMap::new();
    match first_alert {
        Some(s_k) => {
            let alerter = schedule.node_at(s_k);
            let mut paid = BigRational::from_integer(0.into());
            for s in 1..=n {
                let node = schedule.node_at(s);
                let beta = bribes.offer(node);
                let payoff = if s < s_k {
                    paid += beta.micro();
                    PayoffAmount::from_micro_rational(beta.micro() - lambda)
                } else if s == s_k {
                    PayoffAmount::from_micro_rational(lambda * big(s_k as u64 - 1))
                } else {
                    PayoffAmount::zero()
                };
                node_payoffs.insert(node, payoff);
            }
            Outcome {
                alerter_set_f: BTreeSet::from([alerter]),
                node_payoffs,
                adversary_payoff: PayoffAmount::from_micro_rational(-paid),
                first_alerter: Some(alerter),
                alert_slot: Some(s_k),
            }
        }
        None => {
            let mut paid = BigRational::from_integer(0.into());
            for s in 1..=n {
                let node = schedule.node_at(s);
                let beta = bribes.offer(node);
                paid += beta.micro();
                node_payoffs.insert(node, PayoffAmount::from(beta));
            }
            Outcome {
                alerter_set_f: BTreeSet::new(),
                node_payoffs,
                adversary_payoff: PayoffAmount::from_micro_rational(
                    bribes.gain_g.micro() - paid,
                ),
                first_alerter: None,
                alert_slot: None,
            }
        }
    }
}

/// Whether the node in slot `s` prefers alerting, from raw payoffs:
/// the alerting reward `λ(s−1)` against the bribe it keeps by staying
/// silent (a silent slot is paid only if the attack ultimately
/// succeeds in its continuation, which rational play makes it expect).
fn prefers_alert(s: usize, bribes: &BribeVector, schedule: &SlotSchedule, params: &ProtocolParams) -> bool {
    let reward = params.penalty_lambda().micro() * big(s as u64 - 1);
    reward >= *bribes.offer(schedule.node_at(s)).micro()
}

/// Sequential equilibrium outcome by exhaustive search: enumerate all
/// `2^n` pure action profiles, keep those where every slot that is
/// actually reached plays a best response, and require all survivors
/// to induce one single outcome. Exponential; intended for `n ≤ 5`.
///
/// # Panics
/// If no profile survives or survivors disagree on the outcome — either
/// would mean the equilibrium reasoning itself is broken.
pub fn sequential_outcome_by_enumeration(
    bribes: &BribeVector,
    schedule: &SlotSchedule,
    params: &ProtocolParams,
) -> Outcome {
    let n = schedule.len();
    assert_eq!(n, params.n());
    let mut unique: Option<Outcome> = None;
    for mask in 0u64..(1 << n) {
        let alerts_at = |s: usize| mask & (1 << (s - 1)) != 0;
        let first_alert = (1..=n).find(|&s| alerts_at(s));
        let reached_slots = 1..=first_alert.unwrap_or(n);
        let consistent = reached_slots
            .clone()
            .all(|s| alerts_at(s) == prefers_alert(s, bribes, schedule, params));
        if !consistent {
            continue;
        }
        let outcome = outcome_for_first_alert(first_alert, bribes, schedule, params);
        match &unique {
            None => unique = Some(outcome),
            Some(prev) => assert_eq!(
                prev, &outcome,
                "surviving profiles disagree on the outcome"
            ),
        }
    }
    unique.expect("at least one action profile must survive the best-response filter")
}

/// Sequential equilibrium outcome by candidate checking: test each
/// possible first-alert slot (and full silence) directly against the
/// slot threshold conditions and require exactly one survivor.
/// Quadratic in `n`; the trustworthy oracle for large committees.
///
/// # Panics
/// If the number of surviving candidates is not exactly one.
pub fn sequential_outcome_by_candidate_check(
    bribes: &BribeVector,
    schedule: &SlotSchedule,
    params: &ProtocolParams,
) -> Outcome {
    let n = schedule.len();
    assert_eq!(n, params.n());
    let mut survivors: Vec<Option<usize>> = Vec::new();

    for s_star in 1..=n {
        let earlier_all_silent =
            (1..s_star).all(|s| !prefers_alert(s, bribes, schedule, params));
        if earlier_all_silent && prefers_alert(s_star, bribes, schedule, params) {
            survivors.push(Some(s_star));
        }
    }
    if (1..=n).all(|s| !prefers_alert(s, bribes, schedule, params)) {
        survivors.push(None);
    }

    assert_eq!(survivors.len(), 1, "exactly one equilibrium candidate must survive");
    outcome_for_first_alert(survivors[0], bribes, schedule, params)
}
