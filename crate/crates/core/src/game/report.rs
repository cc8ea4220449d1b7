//! Equilibrium summaries and analytic outcome predictions.
//!
//! [`equilibrium_report`] condenses a bribe vector into the quantities
//! an experimenter wants per run; [`predict_simultaneous_outcome`]
//! states, for deterministic regimes, exactly what a settled round must
//! look like — including the contract's integer division rule — so
//! simulations can be checked against it. The division arithmetic here
//! is intentionally written independently from the protocol engines.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::money::{PayoffAmount, TokenAmount};
use crate::params::ProtocolParams;
use crate::NodeId;

use super::dominance::classify_dominance;
use super::mixed::{adversary_expected_utility, symmetric_mixed_q};
use super::{BribeVector, DominanceClass, GameError, MixedProfile, Outcome};

/// Per-bribe-vector equilibrium summary.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport {
    pub regime: BTreeMap<NodeId, DominanceClass>,
    /// Silence probability of the symmetric interior equilibrium, when
    /// the whole committee shares one interior bribe.
    pub symmetric_q: Option<f64>,
    /// `Σ β_i q_i` at the profile underlying this report.
    pub expected_total_bribe: TokenAmount,
    /// `G·Q − Σ β_i q_i`.
    pub adversary_expected_utility: PayoffAmount,
    /// `Q = ∏ q_i`.
    pub success_probability: BigRational,
    /// True when some node mixes via the own-bribe symmetric
    /// approximation rather than a solved equilibrium (heterogeneous
    /// interior bribes have no solver).
    pub heuristic_regime: bool,
}

impl EquilibriumReport {
    /// Flat `key=value` lines for logs and golden files.
    pub fn to_kv_lines(&self) -> Vec<String> {
        let mut lines = Vec::new();
        for (id, class) in &self.regime {
            lines.push(format!("regime.{id}={class}"));
        }
        lines.push(format!(
            "symmetric_q={}",
            self.symmetric_q.map_or_else(|| "none".to_string(), |q| format!("{q:.12}"))
        ));
        lines.push(format!("expected_total_bribe={}", self.expected_total_bribe));
        lines.push(format!("adversary_expected_utility={}", self.adversary_expected_utility));
        lines.push(format!(
            "success_probability={:.12}",
            rational_to_f64(&self.success_probability)
        ));
        lines.push(format!("heuristic_regime={}", self.heuristic_regime));
        lines
    }
}

fn rational_to_f64(r: &BigRational) -> f64 {
    let numer = r.numer();
    let denom = r.denom();
    // Scale into i128 range via truncation at 1e-18 relative error.
    let scale = BigInt::from(1_000_000_000_000_000_000u64);
    let scaled = (numer * &scale).div_floor(denom);
    let as_f64: f64 = scaled.to_string().parse().unwrap_or(f64::NAN);
    as_f64 / 1e18
}

/// The behavior profile this library can actually solve for a bribe
/// vector: dominant nodes play pure, and a committee-wide uniform
/// interior bribe mixes at the symmetric equilibrium. The boolean is
/// true when the own-bribe heuristic had to stand in for unsolved
/// heterogeneous interior mixing.
pub fn solve_profile(
    bribes: &BribeVector,
    params: &ProtocolParams,
) -> Result<(MixedProfile, bool), GameError> {
    let committee = NodeId::committee(params.n());
    let classes: BTreeMap<NodeId, DominanceClass> = committee
        .iter()
        .map(|id| (*id, classify_dominance(&bribes.offer(*id), params)))
        .collect();

    let interior_nodes: Vec<NodeId> = committee
        .iter()
        .filter(|id| classes[id] == DominanceClass::Interior)
        .copied()
        .collect();

    let uniform_interior = !interior_nodes.is_empty()
        && interior_nodes.len() == committee.len()
        && committee.iter().all(|id| bribes.offer(*id) == bribes.offer(NodeId(0)));

    let mut q = BTreeMap::new();
    for id in &committee {
        let q_i = match classes[id] {
            DominanceClass::AlertDominant => BigRational::zero(),
            DominanceClass::NoAlertDominant => BigRational::one(),
            DominanceClass::Interior => {
                let solved = symmetric_mixed_q(&bribes.offer(*id), params)?;
                BigRational::from_float(solved).ok_or(GameError::ProbabilityOutOfRange)?
            }
        };
        q.insert(*id, q_i);
    }
    let heuristic = !interior_nodes.is_empty() && !uniform_interior;
    Ok((MixedProfile::new(q)?, heuristic))
}

/// Summarizes regimes, the solved (or approximated) profile, and the
/// briber's expectations for one bribe vector.
pub fn equilibrium_report(
    bribes: &BribeVector,
    params: &ProtocolParams,
) -> Result<EquilibriumReport, GameError> {
    let committee = NodeId::committee(params.n());
    let regime: BTreeMap<NodeId, DominanceClass> = committee
        .iter()
        .map(|id| (*id, classify_dominance(&bribes.offer(*id), params)))
        .collect();
    let (profile, heuristic_regime) = solve_profile(bribes, params)?;

    let uniform_all_interior = !heuristic_regime
        && regime.values().all(|c| *c == DominanceClass::Interior);
    let symmetric_q = if uniform_all_interior {
        Some(symmetric_mixed_q(&bribes.offer(NodeId(0)), params)?)
    } else {
        None
    };

    let expected_total_bribe_micro: BigRational = profile
        .nodes()
        .map(|id| bribes.offer(id).micro() * profile.q_of(id))
        .sum();
    Ok(EquilibriumReport {
        regime,
        symmetric_q,
        expected_total_bribe: TokenAmount::from_micro_rational(expected_total_bribe_micro)
            .expect("bribes and probabilities are nonnegative"),
        adversary_expected_utility: adversary_expected_utility(bribes, &profile),
        success_probability: profile.success_probability(),
        heuristic_regime,
    })
}

/// How a settled round distributes the slashed value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SettlementRule {
    /// Alerters share `λ·|slashed| + c` (slashed stakes are recycled).
    SharedSlash,
    /// Alerters share only `c`; slashed stakes are burned.
    BurnedPenalty,
}

/// The contract's deterministic division of `pot` among `alerters`:
/// every alerter receives `floor(pot/|F|)` micro-tokens and the lowest
/// node id collects the remainder.
pub fn contract_division(
    pot: &TokenAmount,
    alerters: &BTreeSet<NodeId>,
) -> BTreeMap<NodeId, TokenAmount> {
    assert!(!alerters.is_empty(), "division requires at least one alerter");
    let f = BigInt::from(alerters.len() as u64);
    let share_micro = pot.micro().floor().numer().div_floor(&f);
    let share = BigRational::from_integer(share_micro.clone());
    let mut rewards: BTreeMap<NodeId, TokenAmount> = alerters
        .iter()
        .map(|id| {
            (*id, TokenAmount::from_micro_rational(share.clone()).expect("floor share ≥ 0"))
        })
        .collect();
    let distributed = share * BigRational::from_integer(f);
    let remainder = pot.micro() - distributed;
    assert!(!remainder.is_negative());
    let lowest = *alerters.iter().next().unwrap();
    let topped = rewards[&lowest].clone()
        + TokenAmount::from_micro_rational(remainder).expect("remainder ≥ 0");
    rewards.insert(lowest, topped);
    rewards
}

/// Exact prediction of a settled simultaneous round when every node's
/// action is pinned by dominance; `None` when any node must mix.
pub fn predict_simultaneous_outcome(
    bribes: &BribeVector,
    params: &ProtocolParams,
    rule: SettlementRule,
) -> Option<Outcome> {
    let committee = NodeId::committee(params.n());
    let mut alerters: BTreeSet<NodeId> = BTreeSet::new();
    for id in &committee {
        match classify_dominance(&bribes.offer(*id), params) {
            DominanceClass::AlertDominant => {
                alerters.insert(*id);
            }
            DominanceClass::NoAlertDominant => {}
            DominanceClass::Interior => return None,
        }
    }

    let lambda = params.penalty_lambda();
    let mut node_payoffs: BTreeMap<NodeId, PayoffAmount> = BTreeMap::new();
    let adversary_payoff;
    if alerters.is_empty() {
        for id in &committee {
            node_payoffs.insert(*id, PayoffAmount::from(bribes.offer(*id)));
        }
        adversary_payoff =
            PayoffAmount::from_micro_rational(bribes.gain_g.micro() - bribes.total().micro());
    } else {
        let slashed_count = committee.len() - alerters.len();
        let pot_micro = match rule {
            SettlementRule::SharedSlash => {
                lambda.micro() * BigRational::from_integer(BigInt::from(slashed_count as u64))
                    + params.operator_cost_c().micro()
            }
            SettlementRule::BurnedPenalty => params.operator_cost_c().micro().clone(),
        };
        let pot = TokenAmount::from_micro_rational(pot_micro).expect("pot ≥ 0");
        let rewards = contract_division(&pot, &alerters);
        let mut paid = BigRational::zero();
        for id in &committee {
            if alerters.contains(id) {
                node_payoffs.insert(*id, PayoffAmount::from(rewards[id].clone()));
            } else {
                let beta = bribes.offer(*id);
                paid += beta.micro();
                node_payoffs
                    .insert(*id, PayoffAmount::from_micro_rational(beta.micro() - lambda.micro()));
            }
        }
        adversary_payoff = PayoffAmount::from_micro_rational(-paid);
    }

    Some(Outcome {
        alerter_set_f: alerters,
        node_payoffs,
        adversary_payoff,
        first_alerter: None,
        alert_slot: None,
    })
}
