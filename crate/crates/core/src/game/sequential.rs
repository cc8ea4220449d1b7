//! Equilibrium of the slot-based (sequential) alerting game.
//!
//! Slots run 1..=n; an alert in slot `s` slashes the `s−1` earlier
//! nodes and pays the alerter `λ(s−1)`. Backward induction collapses to
//! a per-slot threshold: the node in slot `s` alerts exactly when the
//! reward `λ(s−1)` at least matches its bribe (ties toward Alert —
//! the briber must pay strictly more than the reward).

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::money::{PayoffAmount, TokenAmount};
use crate::params::ProtocolParams;
use crate::protocols::SlotSchedule;

use super::bounds::sequential_suppression_threshold;
use super::{BribeVector, Outcome};

fn big(v: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Subgame-perfect outcome of one sequential round.
///
/// The first slot whose reward covers its node's bribe alerts; earlier
/// nodes keep their bribes but are slashed, later nodes get nothing
/// (the round is over before their slot, and no bribe is owed for a
/// failed attack beyond the slots already played).
///
/// # Panics
/// If the schedule does not cover exactly `n` slots.
pub fn sequential_spne(
    bribes: &BribeVector,
    schedule: &SlotSchedule,
    params: &ProtocolParams,
) -> Outcome {
    assert_eq!(schedule.len(), params.n(), "schedule must cover every node");
    let lambda = params.penalty_lambda().micro();

    let alert_slot = (1..=params.n()).find(|&s| {
        let reward = lambda * big(s as u64 - 1);
        let bribe = bribes.offer(schedule.node_at(s));
        reward >= *bribe.micro()
    });

    let mut node_payoffs: BTreeMap<_, PayoffAmount> = BTreeMap::new();
    match alert_slot {
        Some(s_k) => {
            let alerter = schedule.node_at(s_k);
            let mut paid = BigRational::from_integer(0.into());
            for s in 1..=params.n() {
                let node = schedule.node_at(s);
                let payoff = match s.cmp(&s_k) {
                    std::cmp::Ordering::Less => {
                        let beta = bribes.offer(node);
                        paid += beta.micro();
                        PayoffAmount::from_micro_rational(beta.micro() - lambda)
                    }
                    std::cmp::Ordering::Equal => {
                        PayoffAmount::from_micro_rational(lambda * big(s as u64 - 1))
                    }
                    std::cmp::Ordering::Greater => PayoffAmount::zero(),
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
            for s in 1..=params.n() {
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

/// The briber's best sequential move for a known schedule: if her gain
/// clears `λn(n−1)/2` she pays each slot just over its alerting reward
/// (`λ(s−1) + ε`), silencing everyone; otherwise she pays nothing.
pub fn sequential_adversary_optimal_for(
    gain_g: &TokenAmount,
    schedule: &SlotSchedule,
    params: &ProtocolParams,
) -> BribeVector {
    if *gain_g <= sequential_suppression_threshold(params) {
        return BribeVector::empty(gain_g.clone());
    }
    let lambda = params.penalty_lambda().micro();
    let offers = (1..=schedule.len())
        .map(|s| {
            let amount = lambda * big(s as u64 - 1) + params.epsilon().micro();
            (
                schedule.node_at(s),
                TokenAmount::from_micro_rational(amount).expect("offer is nonnegative"),
            )
        })
        .collect();
    BribeVector { offers, gain_g: gain_g.clone() }
}

/// [`sequential_adversary_optimal_for`] on the identity schedule
/// (node `i` sits in slot `i+1`).
pub fn sequential_adversary_optimal(
    gain_g: &TokenAmount,
    params: &ProtocolParams,
) -> BribeVector {
    sequential_adversary_optimal_for(gain_g, &SlotSchedule::identity(params.n()), params)
}
