//! One-shot protocol on the lockstep network: every alert sent at the
//! alerting step lands in the same block `B`, and settlement reads
//! nothing else. Silent nodes are slashed `λ`; alerters split
//! `λ·|slashed| + c`.

use std::collections::BTreeSet;

use crate::chain::{ChainState, TxKind};
use crate::game::{BribeVector, Outcome, SettlementRule};
use crate::NodeId;

use super::{
    check_policy_count, choose_simultaneous, settle_simultaneous, submit_phased, Action,
    NodePolicy, ProtocolError, ProtocolId, RoundConfig, RoundReport, TimingChoice, Trace, TxPhase,
};

/// One lockstep round. Requires the lockstep timing model — bounded
/// delay would break the guarantee that block `B` holds exactly the
/// alerting-step transactions.
pub fn run_lockstep(
    config: &RoundConfig,
    policies: &[NodePolicy],
    bribes: &BribeVector,
) -> Result<RoundReport, ProtocolError> {
    check_policy_count(policies, &config.params)?;
    if !matches!(config.timing, TimingChoice::Lockstep) {
        return Err(ProtocolError::WrongTimingModel { expected: "lockstep" });
    }
    let params = &config.params;
    let committee = NodeId::committee(params.n());
    let mut chain = ChainState::new(params.delta_block(), config.timing_model());
    let mut trace = Trace::default();

    chain.advance_to(config.start_step);
    let start_height = chain.tip_height();
    trace.push(config.start_step, "contract", "round-start", format!("h0={start_height}"));

    let valid_proof = config.valid_alert_proof();
    let mut txs_submitted = 0usize;
    let mut submissions: Vec<(NodeId, u64)> = Vec::new();
    for (i, policy) in policies.iter().enumerate() {
        let node = committee[i];
        let action = choose_simultaneous(config, node, policy, bribes);
        trace.push(config.start_step, node.to_string(), "decide", action.to_string());
        if action == Action::Alert {
            let offset = config.delays.submit_offsets.get(&node).copied().unwrap_or(0);
            submissions.push((node, config.start_step + offset));
        }
    }
    submissions.sort_by_key(|(node, step)| (*step, *node));
    for (node, step) in &submissions {
        chain.advance_to(*step);
        let payload = if config.alert_needed { valid_proof.clone() } else { vec![0u8; 32] };
        let tx = submit_phased(&mut chain, config, *node, TxPhase::Alert, TxKind::AlertTx, payload)?;
        txs_submitted += 1;
        trace.push(tx.submitted_at, node.to_string(), "submit", "alert");
    }

    // Block B: the first block produced at or after arrival of the
    // alerting-step transactions.
    let arrival = config.start_step + params.delta_write();
    let b_step = arrival.div_ceil(params.delta_block()) * params.delta_block();
    chain.advance_to(b_step);
    let b_height = b_step / params.delta_block();

    let mut alerters: BTreeSet<NodeId> = BTreeSet::new();
    for tx in chain.block_txs(b_height).unwrap_or(&[]) {
        if tx.kind != TxKind::AlertTx || !committee.contains(&tx.sender) {
            continue;
        }
        if tx.submitted_at != config.start_step {
            trace.push(tx.submitted_at, "contract", "reject", "sent outside the alerting step");
            continue;
        }
        if tx.payload != valid_proof {
            trace.push(tx.submitted_at, "contract", "reject", "invalid alert proof");
            continue;
        }
        if alerters.insert(tx.sender) {
            trace.push(b_step, "contract", "accept-alert", tx.sender.to_string());
        }
    }

    let settlement = settle_simultaneous(
        &committee,
        &alerters,
        bribes,
        params,
        SettlementRule::SharedSlash,
        config.conditional_bribes,
        !alerters.is_empty(),
    );
    trace.push(
        b_step,
        "contract",
        "settle",
        format!("block={} alerters={} slashed={}", b_height, alerters.len(), settlement.slashed.len()),
    );

    // Nothing submitted during the alerting step is deliverable before
    // `delta_write` elapses, so the observable world through the
    // alerting step is exactly the chain so far.
    let observable_prefix = chain.trace_lines_until(config.start_step);
    Ok(RoundReport {
        protocol: ProtocolId::Lockstep,
        alert_raised: !alerters.is_empty(),
        outcome: Outcome {
            alerter_set_f: alerters,
            node_payoffs: settlement.node_payoffs,
            adversary_payoff: settlement.adversary_payoff,
            first_alerter: None,
            alert_slot: None,
        },
        trace: trace.into_events(),
        observable_prefix,
        txs_submitted,
        start_height,
        reveal_barrier: None,
        rewards: settlement.rewards,
        slashed: settlement.slashed,
        bribes_paid: settlement.bribes_paid,
    })
}
