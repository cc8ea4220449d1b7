//! Executable protocol engines. Each engine drives a fresh simulated
//! chain through one alerting round — decisions, transactions,
//! settlement — and reports the outcome next to a full event trace.
//!
//! All engines consume the same `NodePolicy` and `BribeVector` types,
//! so one experiment definition runs unchanged against any protocol.

pub mod schedule;

mod burned;
mod lockstep;
mod sequential;
mod tee_round;

pub use burned::run_burned_penalty;
pub use lockstep::run_lockstep;
pub use schedule::{
    next_permutation, vrf_commitment, vrf_schedule, vrf_verify, SlotSchedule, VrfProof,
};
pub use sequential::{run_sequential, slot_of_step, validate_alert_tx};
pub use tee_round::{run_naive_commit_reveal, run_tee_round, run_tee_round_with_collusion};

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::agents::{self, AgentState};
use crate::chain::{ChainError, ChainState, TimingModel, Transaction, TxKind};
use crate::digest::{digest_bytes, digest_parts, Digest32};
use crate::game::{contract_division, Action, BribeVector, Outcome, SettlementRule};
use crate::money::{PayoffAmount, TokenAmount};
use crate::params::ProtocolParams;
use crate::NodeId;

/// Which engine produced a report; also the CLI's protocol selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProtocolId {
    BurnedPenalty,
    Lockstep,
    TeeCommitReveal,
    NaiveCommitReveal,
    Sequential,
}

impl ProtocolId {
    pub const ALL: [ProtocolId; 5] = [
        ProtocolId::BurnedPenalty,
        ProtocolId::Lockstep,
        ProtocolId::TeeCommitReveal,
        ProtocolId::NaiveCommitReveal,
        ProtocolId::Sequential,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ProtocolId::BurnedPenalty => "burned-penalty",
            ProtocolId::Lockstep => "lockstep",
            ProtocolId::TeeCommitReveal => "tee",
            ProtocolId::NaiveCommitReveal => "naive",
            ProtocolId::Sequential => "sequential",
        }
    }
}

impl std::fmt::Display for ProtocolId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ProtocolId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProtocolId::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown protocol {s:?}"))
    }
}

/// Which network model the round's chain runs under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimingChoice {
    /// Every transaction lands exactly `delta_write` steps after
    /// submission.
    Lockstep,
    /// Each transaction's delay is drawn in `[1, delta_write]` from
    /// the given sampler seed unless overridden per transaction.
    BoundedDelay { delay_sampler_seed: u64 },
}

/// Submission phase a delay override attaches to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TxPhase {
    Commit,
    Reveal,
    Alert,
}

/// Adversarial control over message timing, for worst-case tests.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DelayPlan {
    /// Exact network delay (in steps, within `[1, delta_write]`) for a
    /// given node's transaction in a given phase.
    pub overrides: BTreeMap<(NodeId, TxPhase), u64>,
    /// Extra steps a node waits before submitting at all (models a
    /// node acting after the designated moment).
    pub submit_offsets: BTreeMap<NodeId, u64>,
}

/// Everything an engine needs to run one round besides policies and
/// bribes.
#[derive(Debug, Clone)]
pub struct RoundConfig {
    pub params: ProtocolParams,
    /// Whether the alertable event actually occurred this round; when
    /// false there is no valid evidence, so honest nodes stay silent.
    pub alert_needed: bool,
    pub start_step: u64,
    /// Round entropy: per-node decision seeds, device nonces, and
    /// sampler defaults all derive from it.
    pub seed: u64,
    pub timing: TimingChoice,
    /// Pay bribes only if suppression succeeds (no alert ever raised).
    pub conditional_bribes: bool,
    /// The off-chain evidence; valid alert proofs are its digest.
    pub event_evidence: Vec<u8>,
    pub delays: DelayPlan,
}

impl RoundConfig {
    pub fn new(params: ProtocolParams, alert_needed: bool) -> Self {
        RoundConfig {
            params,
            alert_needed,
            start_step: 0,
            seed: 0,
            timing: TimingChoice::Lockstep,
            conditional_bribes: false,
            event_evidence: b"observed-fault-evidence".to_vec(),
            delays: DelayPlan::default(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_timing(mut self, timing: TimingChoice) -> Self {
        self.timing = timing;
        self
    }

    /// Chain height when the round starts (`H0`).
    pub fn start_height(&self) -> u64 {
        self.start_step / self.params.delta_block()
    }

    /// Commit/reveal boundary `H* = H0 + n_commit`.
    pub fn reveal_barrier(&self) -> u64 {
        self.start_height() + self.params.n_commit()
    }

    pub(crate) fn timing_model(&self) -> TimingModel {
        match self.timing {
            TimingChoice::Lockstep => {
                TimingModel::Lockstep { delta_write: self.params.delta_write() }
            }
            TimingChoice::BoundedDelay { delay_sampler_seed } => TimingModel::BoundedDelay {
                delta_write: self.params.delta_write(),
                delay_sampler_seed,
            },
        }
    }

    /// The 32-byte blob a valid alert transaction must carry.
    pub fn valid_alert_proof(&self) -> Vec<u8> {
        digest_bytes(&self.event_evidence).as_bytes().to_vec()
    }
}

/// How a node behaves inside an engine.
#[derive(Debug, Clone, PartialEq)]
pub enum NodePolicy {
    /// Follows the protocol: alerts whenever the event occurred.
    Honest,
    /// Plays the rational best response to its observed bribe.
    Bribed,
    /// Stays silent with probability `q`; draws mix `seed` with the
    /// round's per-node seed so they are reproducible yet vary across
    /// rounds.
    Mixed { q: f64, seed: u64 },
    /// A fixed decision sequence, consumed per decision point: element
    /// 0 is the round action (commit content in commit-reveal);
    /// element 1, when present, gates the reveal (`NoAlert` =
    /// withhold). An empty script abstains from the round entirely.
    Scripted(Vec<Action>),
}

impl NodePolicy {
    /// True when the node takes part in the round at all.
    pub(crate) fn participates(&self) -> bool {
        !matches!(self, NodePolicy::Scripted(v) if v.is_empty())
    }

    /// True when a committed node goes on to reveal.
    pub(crate) fn reveals(&self) -> bool {
        match self {
            NodePolicy::Scripted(v) => v.get(1).copied() != Some(Action::NoAlert),
            _ => true,
        }
    }
}

/// One line of a round trace: `step, actor, event, detail`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub step: u64,
    pub actor: String,
    pub event: String,
    pub detail: String,
}

impl std::fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}, {}, {}, {}", self.step, self.actor, self.event, self.detail)
    }
}

#[derive(Debug, Default)]
pub(crate) struct Trace(Vec<TraceEvent>);

impl Trace {
    pub(crate) fn push(
        &mut self,
        step: u64,
        actor: impl Into<String>,
        event: impl Into<String>,
        detail: impl Into<String>,
    ) {
        self.0.push(TraceEvent {
            step,
            actor: actor.into(),
            event: event.into(),
            detail: detail.into(),
        });
    }

    pub(crate) fn into_events(self) -> Vec<TraceEvent> {
        self.0
    }
}

/// Everything one engine run produced.
#[derive(Debug, Clone)]
pub struct RoundReport {
    pub protocol: ProtocolId,
    pub outcome: Outcome,
    /// True when the round ends with the alarm up — either some
    /// alerter settled, or (commit-reveal) a committed node failed to
    /// reveal.
    pub alert_raised: bool,
    pub trace: Vec<TraceEvent>,
    /// What any outside observer could have seen up to the moment
    /// actions became irrevocable; used for deniability comparisons.
    pub observable_prefix: Vec<String>,
    pub txs_submitted: usize,
    pub start_height: u64,
    pub reveal_barrier: Option<u64>,
    /// On-chain reward transfers, for conservation checks.
    pub rewards: BTreeMap<NodeId, TokenAmount>,
    pub slashed: BTreeSet<NodeId>,
    /// Total the adversary actually paid out this round.
    pub bribes_paid: TokenAmount,
}

impl RoundReport {
    pub fn trace_lines(&self) -> Vec<String> {
        self.trace.iter().map(|e| e.to_string()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("engine requires the {expected} timing model")]
    WrongTimingModel { expected: &'static str },
    #[error("slot {slot} belongs to {scheduled}, not {sender}")]
    AlertOutOfSlot { sender: NodeId, slot: usize, scheduled: NodeId },
    #[error("alert submitted at step {step} falls outside every slot")]
    OutsideSlotWindow { step: u64 },
    #[error("alert proof does not match the round evidence")]
    InvalidAlertProof,
    #[error("round needs {expected} node policies, got {actual}")]
    PolicyCountMismatch { expected: usize, actual: usize },
    #[error(transparent)]
    Chain(#[from] ChainError),
}

/// Offers the adversary makes for early commitment openings, in
/// approach order (naive commit-reveal attack).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CollusionScript {
    pub offers: Vec<(NodeId, TokenAmount)>,
}

// ---- shared engine plumbing ----

pub(crate) fn check_policy_count(
    policies: &[NodePolicy],
    params: &ProtocolParams,
) -> Result<(), ProtocolError> {
    if policies.len() != params.n() {
        return Err(ProtocolError::PolicyCountMismatch {
            expected: params.n(),
            actual: policies.len(),
        });
    }
    Ok(())
}

/// Per-(round, node) seed for decision draws.
pub(crate) fn per_node_seed(round_seed: u64, node: NodeId) -> u64 {
    let d = digest_parts(&[b"node-seed", &round_seed.to_le_bytes(), &node.0.to_le_bytes()]);
    u64::from_le_bytes(d.as_bytes()[..8].try_into().unwrap())
}

/// Domain-separated 32-byte key material per (round, node, role).
pub(crate) fn derive_key(round_seed: u64, node: NodeId, role: &[u8]) -> Digest32 {
    digest_parts(&[b"round-key", role, &round_seed.to_le_bytes(), &node.0.to_le_bytes()])
}

/// The node's one-shot action for simultaneous engines: silent when
/// there is nothing to report (scripts excepted), otherwise the
/// agent's decision.
pub(crate) fn choose_simultaneous(
    config: &RoundConfig,
    node: NodeId,
    policy: &NodePolicy,
    bribes: &BribeVector,
) -> Action {
    if !config.alert_needed && !matches!(policy, NodePolicy::Scripted(_)) {
        return Action::NoAlert;
    }
    let agent = AgentState::new(
        node,
        policy.clone(),
        per_node_seed(config.seed, node),
        bribes.offer(node),
    );
    agents::decide_simultaneous(&agent, &config.params)
}

pub(crate) fn choose_sequential(
    config: &RoundConfig,
    node: NodeId,
    policy: &NodePolicy,
    bribes: &BribeVector,
    slot: usize,
) -> Action {
    if !config.alert_needed && !matches!(policy, NodePolicy::Scripted(_)) {
        return Action::NoAlert;
    }
    let agent = AgentState::new(
        node,
        policy.clone(),
        per_node_seed(config.seed, node),
        bribes.offer(node),
    );
    agents::decide_sequential(&agent, slot, &config.params)
}

/// Submits honoring any delay override for (node, phase); sampled or
/// lockstep delay otherwise.
pub(crate) fn submit_phased(
    chain: &mut ChainState,
    config: &RoundConfig,
    node: NodeId,
    phase: TxPhase,
    kind: TxKind,
    payload: Vec<u8>,
) -> Result<Transaction, ProtocolError> {
    let tx = Transaction { sender: node, kind, payload, submitted_at: 0 };
    match config.delays.overrides.get(&(node, phase)) {
        Some(delay) => Ok(chain.submit_with_delay(tx, *delay)?),
        None => Ok(chain.submit(tx)),
    }
}

pub(crate) struct Settlement {
    pub node_payoffs: BTreeMap<NodeId, PayoffAmount>,
    pub adversary_payoff: PayoffAmount,
    pub bribes_paid: TokenAmount,
    pub rewards: BTreeMap<NodeId, TokenAmount>,
    pub slashed: BTreeSet<NodeId>,
}

/// The shared settlement arithmetic for simultaneous-action rounds.
///
/// With alerters: non-alerters are slashed `λ` each; under
/// `SharedSlash` the alerters split `λ·|slashed| + c`, under
/// `BurnedPenalty` the slashed value is destroyed and they split only
/// `c`. Without alerters there are no transfers; the adversary
/// realizes `G` only if no alarm fired at all. Bribes go to silent
/// nodes — always, or only on successful suppression when
/// `conditional` is set.
pub(crate) fn settle_simultaneous(
    committee: &[NodeId],
    alerters: &BTreeSet<NodeId>,
    bribes: &BribeVector,
    params: &ProtocolParams,
    rule: SettlementRule,
    conditional: bool,
    alarm_raised: bool,
) -> Settlement {
    let lambda = params.penalty_lambda();
    let suppressed = !alarm_raised && alerters.is_empty();
    let mut node_payoffs = BTreeMap::new();
    let mut rewards = BTreeMap::new();
    let mut slashed = BTreeSet::new();
    let mut paid = BigRational::zero();

    if alerters.is_empty() {
        for id in committee {
            let owed = if conditional && !suppressed {
                BigRational::zero()
            } else {
                bribes.offer(*id).micro().clone()
            };
            paid += &owed;
            node_payoffs.insert(*id, PayoffAmount::from_micro_rational(owed));
        }
    } else {
        let pot_micro = match rule {
            SettlementRule::SharedSlash => {
                lambda.micro() * BigRational::from_integer((committee.len() - alerters.len()).into())
                    + params.operator_cost_c().micro()
            }
            SettlementRule::BurnedPenalty => params.operator_cost_c().micro().clone(),
        };
        let pot = TokenAmount::from_micro_rational(pot_micro).expect("settlement pot is non-negative");
        rewards = contract_division(&pot, alerters);
        for id in committee {
            if let Some(reward) = rewards.get(id) {
                node_payoffs.insert(*id, PayoffAmount::from(reward));
            } else {
                slashed.insert(*id);
                let owed = if conditional {
                    BigRational::zero()
                } else {
                    bribes.offer(*id).micro().clone()
                };
                paid += &owed;
                node_payoffs
                    .insert(*id, PayoffAmount::from_micro_rational(owed - lambda.micro()));
            }
        }
    }

    let adversary_payoff = if suppressed {
        PayoffAmount::from_micro_rational(bribes.gain_g.micro() - &paid)
    } else {
        PayoffAmount::from_micro_rational(-paid.clone())
    };
    Settlement {
        node_payoffs,
        adversary_payoff,
        bribes_paid: TokenAmount::from_micro_rational(paid).expect("paid bribes non-negative"),
        rewards,
        slashed,
    }
}
