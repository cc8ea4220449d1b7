//! Sequential alerting: nodes act in scheduled slots, each seeing
//! everything that happened before its turn. The first alert ends the
//! race — later slots owe nothing, earlier slots are slashed — so the
//! reward for alerting grows with every silent predecessor.

use std::collections::{BTreeMap, BTreeSet};

use crate::chain::{ChainState, Transaction, TxKind};
use crate::game::{BribeVector, Outcome};
use crate::money::{PayoffAmount, TokenAmount};
use crate::NodeId;

use super::schedule::SlotSchedule;
use super::{
    check_policy_count, choose_sequential, submit_phased, Action, NodePolicy, ProtocolError,
    ProtocolId, RoundConfig, RoundReport, Trace, TxPhase,
};

/// Maps a chain step to the 1-based slot whose window contains it.
/// Slot `s` owns `[t0 + (s-1)·delta_slot, t0 + s·delta_slot)`.
pub fn slot_of_step(step: u64, t0: u64, delta_slot: u64, n: usize) -> Option<usize> {
    if step < t0 {
        return None;
    }
    let s = ((step - t0) / delta_slot) as usize + 1;
    (s <= n).then_some(s)
}

/// Contract-side check of a single alert transaction. Returns the slot
/// it was accepted in.
pub fn validate_alert_tx(
    tx: &Transaction,
    schedule: &SlotSchedule,
    t0: u64,
    params: &crate::params::ProtocolParams,
    valid_proof: &[u8],
) -> Result<usize, ProtocolError> {
    if tx.kind != TxKind::AlertTx {
        return Err(ProtocolError::InvalidAlertProof);
    }
    if tx.payload.len() < 36 {
        return Err(ProtocolError::InvalidAlertProof);
    }
    let claimed = u32::from_be_bytes(tx.payload[..4].try_into().unwrap()) as usize;
    let slot = slot_of_step(tx.submitted_at, t0, params.delta_slot(), schedule.len())
        .ok_or(ProtocolError::OutsideSlotWindow { step: tx.submitted_at })?;
    let scheduled = schedule.node_at(slot);
    if tx.sender != scheduled {
        return Err(ProtocolError::AlertOutOfSlot { sender: tx.sender, slot, scheduled });
    }
    if claimed != slot {
        return Err(ProtocolError::AlertOutOfSlot { sender: tx.sender, slot, scheduled });
    }
    if &tx.payload[4..36] != valid_proof {
        return Err(ProtocolError::InvalidAlertProof);
    }
    Ok(slot)
}

/// Runs one sequential round under `schedule`.
pub fn run_sequential(
    config: &RoundConfig,
    policies: &[NodePolicy],
    bribes: &BribeVector,
    schedule: &SlotSchedule,
) -> Result<RoundReport, ProtocolError> {
    check_policy_count(policies, &config.params)?;
    let params = &config.params;
    let n = params.n();
    if schedule.len() != n {
        return Err(ProtocolError::PolicyCountMismatch { expected: n, actual: schedule.len() });
    }
    let lambda = params.penalty_lambda();
    let delta_slot = params.delta_slot();
    let committee = NodeId::committee(n);
    let mut chain = ChainState::new(params.delta_block(), config.timing_model());
    let mut trace = Trace::default();

    chain.advance_to(config.start_step);
    let t0 = chain.clock();
    let h0 = chain.tip_height();
    let valid_proof = config.valid_alert_proof();
    trace.push(t0, "contract", "round-start", format!("t0={t0} order={:?}", schedule.permutation()));

    let mut txs_submitted = 0usize;
    let mut alert_on_chain = false;
    for slot in 1..=n {
        chain.advance_to(t0 + (slot as u64 - 1) * delta_slot);
        if !alert_on_chain {
            alert_on_chain = first_valid_alert(&chain, schedule, t0, params, &valid_proof).is_some();
        }
        if alert_on_chain {
            trace.push(chain.clock(), "contract", "slot-skip", format!("slot {slot}: alert already on chain"));
            continue;
        }
        let node = schedule.node_at(slot);
        let policy = &policies[node.0 as usize];
        if !policy.participates() {
            trace.push(chain.clock(), node.to_string(), "decide", "abstain");
            continue;
        }
        let action = choose_sequential(config, node, policy, bribes, slot);
        trace.push(chain.clock(), node.to_string(), "decide", format!("slot {slot}: {action}"));
        if action == Action::Alert {
            let mut payload = (slot as u32).to_be_bytes().to_vec();
            if config.alert_needed {
                payload.extend_from_slice(&valid_proof);
            } else {
                payload.extend_from_slice(&[0u8; 32]);
            }
            let tx = submit_phased(&mut chain, config, node, TxPhase::Alert, TxKind::AlertTx, payload)?;
            txs_submitted += 1;
            trace.push(tx.submitted_at, node.to_string(), "submit-alert", format!("slot {slot}"));
        }
    }
    // Flush: past the last slot plus worst-case inclusion delay.
    chain.advance_to(t0 + n as u64 * delta_slot + params.delta_write() + params.delta_block());

    // The contract scans blocks in order and accepts the first valid
    // alert; invalid ones are rejected and the round carries on.
    let mut winner: Option<(usize, NodeId)> = None;
    for height in (h0 + 1)..=chain.tip_height() {
        for tx in chain.block_txs(height).unwrap_or(&[]) {
            if tx.kind != TxKind::AlertTx || !committee.contains(&tx.sender) {
                continue;
            }
            let step = chain.header_at(height).unwrap().produced_at;
            if winner.is_some() {
                trace.push(step, "contract", "reject-alert", "alert already accepted");
                continue;
            }
            match validate_alert_tx(tx, schedule, t0, params, &valid_proof) {
                Ok(slot) => {
                    winner = Some((slot, tx.sender));
                    trace.push(step, "contract", "accept-alert", format!("{} in slot {slot}", tx.sender));
                }
                Err(err) => {
                    trace.push(step, "contract", "reject-alert", err.to_string());
                }
            }
        }
    }

    // Settlement: the winner in slot s_k earns λ(s_k − 1); every slot
    // before it is slashed λ and keeps its bribe; later slots are
    // untouched. With no alert, everyone keeps their bribe and the
    // adversary banks the gain.
    let mut node_payoffs: BTreeMap<NodeId, PayoffAmount> = committee
        .iter()
        .map(|id| (*id, PayoffAmount::from_micro_int(0)))
        .collect();
    let mut rewards: BTreeMap<NodeId, TokenAmount> = BTreeMap::new();
    let mut slashed: BTreeSet<NodeId> = BTreeSet::new();
    let mut bribes_paid = TokenAmount::zero();
    let mut adversary_payoff = PayoffAmount::from_micro_int(0);
    let mut alerter_set = BTreeSet::new();
    let (first_alerter, alert_slot) = match winner {
        Some((s_k, alerter)) => {
            alerter_set.insert(alerter);
            let reward = lambda * (s_k as u64 - 1);
            node_payoffs.insert(alerter, PayoffAmount::from(&reward));
            rewards.insert(alerter, reward);
            for s in 1..s_k {
                let node = schedule.node_at(s);
                slashed.insert(node);
                let bribe = bribes.offer(node);
                let paid = if config.conditional_bribes { TokenAmount::zero() } else { bribe };
                let mut payoff = PayoffAmount::from(&paid);
                payoff -= &PayoffAmount::from(lambda);
                node_payoffs.insert(node, payoff);
                adversary_payoff -= &PayoffAmount::from(&paid);
                bribes_paid += &paid;
            }
            (Some(alerter), Some(s_k))
        }
        None => {
            for id in &committee {
                let bribe = bribes.offer(*id);
                node_payoffs.insert(*id, PayoffAmount::from(&bribe));
                adversary_payoff -= &PayoffAmount::from(&bribe);
                bribes_paid += &bribe;
            }
            adversary_payoff += &PayoffAmount::from(&bribes.gain_g);
            (None, None)
        }
    };
    trace.push(
        chain.clock(),
        "contract",
        "settle",
        match &winner {
            Some((s, id)) => format!("alert by {id} in slot {s}"),
            None => "no alert".to_string(),
        },
    );

    let observable_prefix = chain.trace_lines_until(t0);
    Ok(RoundReport {
        protocol: ProtocolId::Sequential,
        alert_raised: winner.is_some(),
        outcome: Outcome {
            alerter_set_f: alerter_set,
            node_payoffs,
            adversary_payoff,
            first_alerter,
            alert_slot,
        },
        trace: trace.into_events(),
        observable_prefix,
        txs_submitted,
        start_height: h0,
        reveal_barrier: None,
        rewards,
        slashed,
        bribes_paid,
    })
}

/// Scans the chain for the earliest already-included valid alert.
fn first_valid_alert(
    chain: &ChainState,
    schedule: &SlotSchedule,
    t0: u64,
    params: &crate::params::ProtocolParams,
    valid_proof: &[u8],
) -> Option<(usize, NodeId)> {
    for height in 0..=chain.tip_height() {
        for tx in chain.block_txs(height).unwrap_or(&[]) {
            if tx.kind != TxKind::AlertTx {
                continue;
            }
            if let Ok(slot) = validate_alert_tx(tx, schedule, t0, params, valid_proof) {
                return Some((slot, tx.sender));
            }
        }
    }
    None
}
