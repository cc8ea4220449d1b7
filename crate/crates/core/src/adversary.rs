//! Bribing-adversary strategies: given a gain `G` for suppressing the
//! alert, emit a bribe vector (or a collusion script for the naive
//! commit-reveal protocol) and decide whether attacking is rational.

use thiserror::Error;

use crate::game::{
    burned_penalty_resistance, early_reveal_bribe_schedule, sequential_suppression_threshold,
    simultaneous_suppression_threshold, BribeVector,
};
use crate::money::TokenAmount;
use crate::params::ProtocolParams;
use crate::protocols::{CollusionScript, ProtocolId, SlotSchedule};
use crate::NodeId;

/// The shape of the bribe offers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StrategyKind {
    /// Offer nothing.
    NoBribe,
    /// The same offer to every node.
    UniformBribe(TokenAmount),
    /// `λ(n−1) + ε` to every node: past the silence-dominance
    /// threshold, so rational nodes never alert.
    ThresholdBribe,
    /// `λ(s−1) + ε` to the node holding slot `s`: just above each
    /// slot's accrued reward.
    SequentialGreedy,
    /// The early-opening ladder `λ(i−1)/(n−i+1) + λ + ε` against naive
    /// commit-reveal.
    EarlyRevealGreedy,
    /// An arbitrary vector in committee order.
    Custom(Vec<TokenAmount>),
}

/// A full adversary description: offer shape, the gain realized on
/// suppression, and how payment is conditioned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdversaryStrategy {
    pub kind: StrategyKind,
    pub gain_g: TokenAmount,
    /// When set, bribes are paid only if no alert is ever raised.
    pub conditional: bool,
    /// Optional liquidity cap; emitting a vector that exceeds it is an
    /// error rather than a silent truncation.
    pub budget_cap: Option<TokenAmount>,
}

impl AdversaryStrategy {
    pub fn new(kind: StrategyKind, gain_g: TokenAmount) -> Self {
        AdversaryStrategy { kind, gain_g, conditional: false, budget_cap: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdversaryError {
    #[error("this strategy needs a slot schedule")]
    MissingSchedule,
    #[error("emitted total {total} exceeds the budget cap {cap}")]
    BudgetExceeded { total: TokenAmount, cap: TokenAmount },
}

/// The strategy's bribe vector for one round.
pub fn emit_bribes(
    strategy: &AdversaryStrategy,
    params: &ProtocolParams,
    schedule: Option<&SlotSchedule>,
) -> Result<BribeVector, AdversaryError> {
    let n = params.n();
    let lambda = params.penalty_lambda();
    let gain = strategy.gain_g.clone();
    let vector = match &strategy.kind {
        StrategyKind::NoBribe => BribeVector::empty(gain),
        StrategyKind::UniformBribe(offer) => BribeVector::uniform(n, offer.clone(), gain),
        StrategyKind::ThresholdBribe => {
            let offer = &(lambda * (n as u64 - 1)) + params.epsilon();
            BribeVector::uniform(n, offer, gain)
        }
        StrategyKind::SequentialGreedy => {
            let schedule = schedule.ok_or(AdversaryError::MissingSchedule)?;
            let offers = (1..=n)
                .map(|s| {
                    let node = schedule.node_at(s);
                    let offer = &(lambda * (s as u64 - 1)) + params.epsilon();
                    (node, offer)
                })
                .collect();
            BribeVector { offers, gain_g: gain }
        }
        StrategyKind::EarlyRevealGreedy => {
            let ladder = early_reveal_bribe_schedule(lambda, n, params.epsilon());
            BribeVector::by_committee_order(&ladder, gain)
        }
        StrategyKind::Custom(offers) => BribeVector::by_committee_order(offers, gain),
    };
    if let Some(cap) = &strategy.budget_cap {
        let total = vector.total();
        if total.micro() > cap.micro() {
            return Err(AdversaryError::BudgetExceeded { total, cap: cap.clone() });
        }
    }
    Ok(vector)
}

/// The ordered early-opening script for the naive protocol: approach
/// nodes in committee order, each offer contingent on the node opening
/// its commitment to the adversary right away.
pub fn collusion_script(strategy: &AdversaryStrategy, params: &ProtocolParams) -> CollusionScript {
    let offers = match &strategy.kind {
        StrategyKind::EarlyRevealGreedy => {
            early_reveal_bribe_schedule(params.penalty_lambda(), params.n(), params.epsilon())
        }
        StrategyKind::Custom(v) => v.clone(),
        _ => vec![],
    };
    CollusionScript {
        offers: offers
            .into_iter()
            .enumerate()
            .map(|(i, amount)| (NodeId(i as u32), amount))
            .collect(),
    }
}

/// Attack, carrying the bribes to post, or stay out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decision {
    Attack(BribeVector),
    Abstain,
}

/// The minimum total spend that guarantees suppression under each
/// protocol's settlement rule.
pub fn suppression_threshold(protocol: ProtocolId, params: &ProtocolParams) -> TokenAmount {
    match protocol {
        ProtocolId::BurnedPenalty => burned_penalty_resistance(params),
        ProtocolId::Lockstep | ProtocolId::TeeCommitReveal | ProtocolId::NaiveCommitReveal => {
            simultaneous_suppression_threshold(params)
        }
        ProtocolId::Sequential => sequential_suppression_threshold(params),
    }
}

/// Attack iff the guaranteed-suppression cost is strictly below `G`;
/// at or above it the best case is break-even, so the adversary stays
/// out.
pub fn rational_decision(
    strategy: &AdversaryStrategy,
    params: &ProtocolParams,
    protocol: ProtocolId,
    schedule: Option<&SlotSchedule>,
) -> Result<Decision, AdversaryError> {
    let threshold = suppression_threshold(protocol, params);
    if threshold.micro() < strategy.gain_g.micro() {
        Ok(Decision::Attack(emit_bribes(strategy, params, schedule)?))
    } else {
        Ok(Decision::Abstain)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::RawParams;

    fn params(n: usize, lambda_tokens: u64, epsilon: &str) -> ProtocolParams {
        RawParams {
            n,
            penalty_lambda: TokenAmount::from_tokens(lambda_tokens),
            operator_cost_c: TokenAmount::zero(),
            epsilon: epsilon.parse().unwrap(),
            ..RawParams::default()
        }
        .build()
        .unwrap()
    }

    fn tok(s: &str) -> TokenAmount {
        s.parse().unwrap()
    }

    #[test]
    fn threshold_bribe_totals() {
        let p = params(4, 10, "0.01");
        let s = AdversaryStrategy::new(StrategyKind::ThresholdBribe, tok("121"));
        let v = emit_bribes(&s, &p, None).unwrap();
        for id in NodeId::committee(4) {
            assert_eq!(v.offer(id), tok("30.01"));
        }
        assert_eq!(v.total(), tok("120.04"));
    }

    #[test]
    fn sequential_greedy_follows_the_schedule() {
        let p = params(3, 1, "0.01");
        let s = AdversaryStrategy::new(StrategyKind::SequentialGreedy, tok("10"));
        assert_eq!(emit_bribes(&s, &p, None), Err(AdversaryError::MissingSchedule));

        let schedule = SlotSchedule::identity(3);
        let v = emit_bribes(&s, &p, Some(&schedule)).unwrap();
        assert_eq!(v.offer(NodeId(0)), tok("0.01"));
        assert_eq!(v.offer(NodeId(1)), tok("1.01"));
        assert_eq!(v.offer(NodeId(2)), tok("2.01"));

        // Total λn(n−1)/2 + nε regardless of the permutation.
        let shuffled = SlotSchedule::from_permutation(
            vec![NodeId(2), NodeId(0), NodeId(1)],
            5,
        );
        let w = emit_bribes(&s, &p, Some(&shuffled)).unwrap();
        assert_eq!(w.total(), tok("3.03"));
        assert_eq!(w.offer(NodeId(2)), tok("0.01"));
    }

    #[test]
    fn no_bribe_is_zero() {
        let p = params(4, 10, "0.01");
        let s = AdversaryStrategy::new(StrategyKind::NoBribe, tok("5"));
        let v = emit_bribes(&s, &p, None).unwrap();
        assert!(v.is_zero());
        assert!(v.total().is_zero());
    }

    #[test]
    fn budget_cap_is_enforced() {
        let p = params(4, 10, "0.01");
        let mut s = AdversaryStrategy::new(StrategyKind::ThresholdBribe, tok("121"));
        s.budget_cap = Some(tok("100"));
        assert!(matches!(
            emit_bribes(&s, &p, None),
            Err(AdversaryError::BudgetExceeded { .. })
        ));
        s.budget_cap = Some(tok("120.04"));
        assert!(emit_bribes(&s, &p, None).is_ok());
    }

    #[test]
    fn attack_iff_gain_exceeds_threshold() {
        let p = params(4, 10, "0.01");
        let attack = AdversaryStrategy::new(StrategyKind::ThresholdBribe, tok("121"));
        assert!(matches!(
            rational_decision(&attack, &p, ProtocolId::Lockstep, None).unwrap(),
            Decision::Attack(_)
        ));

        let breakeven = AdversaryStrategy::new(StrategyKind::ThresholdBribe, tok("120"));
        assert_eq!(
            rational_decision(&breakeven, &p, ProtocolId::Lockstep, None).unwrap(),
            Decision::Abstain
        );

        let seq = AdversaryStrategy::new(StrategyKind::SequentialGreedy, tok("61"));
        let schedule = SlotSchedule::identity(4);
        assert!(matches!(
            rational_decision(&seq, &p, ProtocolId::Sequential, Some(&schedule)).unwrap(),
            Decision::Attack(_)
        ));
        let seq_out = AdversaryStrategy::new(StrategyKind::SequentialGreedy, tok("60"));
        assert_eq!(
            rational_decision(&seq_out, &p, ProtocolId::Sequential, Some(&schedule)).unwrap(),
            Decision::Abstain
        );
    }

    #[test]
    fn early_reveal_script_matches_the_ladder() {
        let p = params(4, 1, "0.01");
        let s = AdversaryStrategy::new(StrategyKind::EarlyRevealGreedy, tok("10"));
        let script = collusion_script(&s, &p);
        assert_eq!(script.offers.len(), 4);
        // Ladder total is λ·n·H_n (25/3 here) plus n·ε of margin.
        let total: TokenAmount = script.offers.iter().map(|(_, a)| a.clone()).sum();
        assert_eq!(total, tok("628/75"));
        // First rung: λ·0/(n−0) + λ + ε.
        assert_eq!(script.offers[0], (NodeId(0), tok("1.01")));
    }
}
