//! One-shot payoffs for the simultaneous alerting game, in both the
//! unconditional-bribe and success-conditional-bribe variants.

use std::collections::BTreeSet;

use num_rational::BigRational;

use crate::money::{PayoffAmount, TokenAmount};
use crate::params::ProtocolParams;
use crate::NodeId;

use super::{Action, BribeVector, GameError};

fn big(n: usize) -> BigRational {
    BigRational::from_integer((n as u64).into())
}

/// Payoff of one node given everyone's realized actions.
///
/// Alerters split the slashed stake of the `n − |F|` silent nodes plus
/// the operator pot `c`; a silent node keeps its bribe but is slashed
/// `λ` whenever anyone alerted.
pub fn sim_node_payoff(
    action: Action,
    bribe: &TokenAmount,
    alerters: &BTreeSet<NodeId>,
    params: &ProtocolParams,
) -> Result<PayoffAmount, GameError> {
    let f = alerters.len();
    let lambda = params.penalty_lambda().micro();
    match action {
        Action::Alert => {
            if f == 0 {
                return Err(GameError::EmptyAlerterSetWithAlertAction);
            }
            let slashed = big(params.n()) - big(f);
            let pot = lambda * slashed + params.operator_cost_c().micro();
            Ok(PayoffAmount::from_micro_rational(pot / big(f)))
        }
        Action::NoAlert => {
            let beta = bribe.micro().clone();
            if f == 0 {
                Ok(PayoffAmount::from_micro_rational(beta))
            } else {
                Ok(PayoffAmount::from_micro_rational(beta - lambda))
            }
        }
    }
}

/// The briber's payoff: she collects `G` only if nobody alerted, and
/// pays each offer except to nodes that alerted.
pub fn sim_adversary_payoff(
    bribes: &BribeVector,
    alerters: &BTreeSet<NodeId>,
    _params: &ProtocolParams,
) -> PayoffAmount {
    let paid: BigRational = bribes
        .offers
        .iter()
        .filter(|(id, _)| !alerters.contains(id))
        .map(|(_, amount)| amount.micro().clone())
        .sum();
    if alerters.is_empty() {
        PayoffAmount::from_micro_rational(bribes.gain_g.micro() - &paid)
    } else {
        PayoffAmount::from_micro_rational(-paid)
    }
}

/// Node payoff when bribes are paid only if the attack succeeds: a
/// silent node facing an alert loses `λ` and sees no bribe at all.
pub fn conditional_node_payoff(
    action: Action,
    bribe: &TokenAmount,
    alerters: &BTreeSet<NodeId>,
    params: &ProtocolParams,
) -> Result<PayoffAmount, GameError> {
    let f = alerters.len();
    let lambda = params.penalty_lambda().micro();
    match action {
        Action::Alert => {
            if f == 0 {
                return Err(GameError::EmptyAlerterSetWithAlertAction);
            }
            let slashed = big(params.n()) - big(f);
            Ok(PayoffAmount::from_micro_rational(lambda * slashed / big(f)))
        }
        Action::NoAlert => {
            if f == 0 {
                Ok(PayoffAmount::from(bribe))
            } else {
                Ok(PayoffAmount::from_micro_rational(-lambda.clone()))
            }
        }
    }
}

/// Briber's payoff with success-conditional offers: nothing is ever
/// paid out on a failed attack.
pub fn conditional_adversary_payoff(
    bribes: &BribeVector,
    alerters: &BTreeSet<NodeId>,
    _params: &ProtocolParams,
) -> PayoffAmount {
    if alerters.is_empty() {
        let paid: BigRational = bribes.offers.values().map(|a| a.micro().clone()).sum();
        PayoffAmount::from_micro_rational(bribes.gain_g.micro() - &paid)
    } else {
        PayoffAmount::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::RawParams;

    fn params(n: usize, lambda: u64, c: u64) -> ProtocolParams {
        RawParams {
            n,
            penalty_lambda: TokenAmount::from_tokens(lambda),
            operator_cost_c: TokenAmount::from_tokens(c),
            ..RawParams::default()
        }
        .build()
        .unwrap()
    }

    fn f(ids: &[u32]) -> BTreeSet<NodeId> {
        ids.iter().map(|i| NodeId(*i)).collect()
    }

    fn tokens(t: i64) -> PayoffAmount {
        PayoffAmount::from_micro_int(t * 1_000_000)
    }

    #[test]
    fn alert_share_splits_slashed_stake() {
        let p = params(4, 10, 0);
        let got =
            sim_node_payoff(Action::Alert, &TokenAmount::zero(), &f(&[0, 1]), &p).unwrap();
        assert_eq!(got, tokens(10));
    }

    #[test]
    fn silent_node_pays_penalty_net_of_bribe() {
        let p = params(4, 10, 0);
        let got =
            sim_node_payoff(Action::NoAlert, &TokenAmount::from_tokens(5), &f(&[2]), &p).unwrap();
        assert_eq!(got, tokens(-5));
    }

    #[test]
    fn unanimous_alert_with_no_pot_pays_nothing() {
        let p = params(4, 10, 0);
        let got = sim_node_payoff(Action::Alert, &TokenAmount::zero(), &f(&[0, 1, 2, 3]), &p)
            .unwrap();
        assert_eq!(got, PayoffAmount::zero());
    }

    #[test]
    fn silent_round_pays_the_bribe() {
        let p = params(4, 10, 0);
        let got =
            sim_node_payoff(Action::NoAlert, &TokenAmount::from_tokens(5), &f(&[]), &p).unwrap();
        assert_eq!(got, tokens(5));
    }

    #[test]
    fn alert_with_empty_set_is_an_error() {
        let p = params(4, 10, 0);
        assert_eq!(
            sim_node_payoff(Action::Alert, &TokenAmount::zero(), &f(&[]), &p),
            Err(GameError::EmptyAlerterSetWithAlertAction)
        );
    }

    #[test]
    fn operator_pot_joins_the_split() {
        let p = params(4, 10, 6);
        let got =
            sim_node_payoff(Action::Alert, &TokenAmount::zero(), &f(&[0, 1]), &p).unwrap();
        // (10·2 + 6) / 2 = 13
        assert_eq!(got, tokens(13));
    }

    #[test]
    fn adversary_profits_only_on_silence() {
        let p = params(3, 10, 0);
        let bribes = BribeVector::uniform(3, TokenAmount::from_tokens(30), TokenAmount::from_tokens(100));
        assert_eq!(sim_adversary_payoff(&bribes, &f(&[]), &p), tokens(10));
        assert_eq!(sim_adversary_payoff(&bribes, &f(&[2]), &p), tokens(-60));
        let none = BribeVector::empty(TokenAmount::from_tokens(100));
        assert_eq!(sim_adversary_payoff(&none, &f(&[0]), &p), PayoffAmount::zero());
    }

    #[test]
    fn conditional_variant_pays_no_failed_bribes() {
        let p = params(3, 1, 0);
        let got =
            conditional_node_payoff(Action::NoAlert, &TokenAmount::from_tokens(5), &f(&[1]), &p)
                .unwrap();
        assert_eq!(got, tokens(-1));
        let kept =
            conditional_node_payoff(Action::NoAlert, &TokenAmount::from_tokens(5), &f(&[]), &p)
                .unwrap();
        assert_eq!(kept, tokens(5));
        let bribes = BribeVector::uniform(3, TokenAmount::from_tokens(5), TokenAmount::from_tokens(9));
        assert_eq!(conditional_adversary_payoff(&bribes, &f(&[0]), &p), PayoffAmount::zero());
        assert_eq!(conditional_adversary_payoff(&bribes, &f(&[]), &p), tokens(-6));
    }

    #[test]
    fn conditional_alert_share_excludes_operator_pot() {
        let p = params(4, 10, 6);
        let got =
            conditional_node_payoff(Action::Alert, &TokenAmount::zero(), &f(&[0, 1]), &p).unwrap();
        assert_eq!(got, tokens(10));
    }

    #[test]
    fn alerter_sum_conserves_slashed_value() {
        // Σ_{i∈F} alert payoff = λ(n−|F|) + c for every nonempty F.
        for n in 2..=7usize {
            let p = params(n, 10, 3);
            for f_size in 1..=n {
                let alerters: BTreeSet<NodeId> =
                    (0..f_size as u32).map(NodeId).collect();
                let one =
                    sim_node_payoff(Action::Alert, &TokenAmount::zero(), &alerters, &p).unwrap();
                let mut sum = PayoffAmount::zero();
                for _ in 0..f_size {
                    sum += &one;
                }
                let expected = PayoffAmount::from_micro_rational(
                    p.penalty_lambda().micro()
                        * BigRational::from_integer(((n - f_size) as u64).into())
                        + p.operator_cost_c().micro(),
                );
                assert_eq!(sum, expected, "n={n} |F|={f_size}");
            }
        }
    }
}
