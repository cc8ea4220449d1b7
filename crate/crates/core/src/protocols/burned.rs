//! Baseline protocol: alerters split only the fixed operator reward
//! `c`; the `λ` slashed from each silent node is destroyed rather than
//! redistributed.

use std::collections::BTreeSet;

use crate::chain::{ChainState, TxKind};
use crate::game::{BribeVector, Outcome, SettlementRule};
use crate::NodeId;

use super::{
    check_policy_count, choose_simultaneous, settle_simultaneous, submit_phased, Action,
    NodePolicy, ProtocolError, ProtocolId, RoundConfig, RoundReport, Trace, TxPhase,
};

/// One burned-penalty round: every node acts once at `start_step`;
/// any valid alert transaction, whenever it lands, counts.
pub fn run_burned_penalty(
    config: &RoundConfig,
    policies: &[NodePolicy],
    bribes: &BribeVector,
) -> Result<RoundReport, ProtocolError> {
    check_policy_count(policies, &config.params)?;
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
        let payload = if config.alert_needed {
            valid_proof.clone()
        } else {
            vec![0u8; 32]
        };
        let tx = submit_phased(&mut chain, config, *node, TxPhase::Alert, TxKind::AlertTx, payload)?;
        txs_submitted += 1;
        trace.push(tx.submitted_at, node.to_string(), "submit", "alert");
    }

    // Flush every pending transaction, then settle on all of them.
    let horizon = config.start_step
        + config.params.delta_write()
        + config.params.delta_block()
        + submissions.iter().map(|(_, s)| *s - config.start_step).max().unwrap_or(0);
    chain.advance_to(horizon);

    let mut alerters: BTreeSet<NodeId> = BTreeSet::new();
    for height in (start_height + 1)..=chain.tip_height() {
        for tx in chain.block_txs(height).unwrap_or(&[]) {
            if tx.kind != TxKind::AlertTx || !committee.contains(&tx.sender) {
                continue;
            }
            if tx.submitted_at != config.start_step {
                trace.push(tx.submitted_at, "contract", "reject", "alert outside the alerting step");
                continue;
            }
            if tx.payload != valid_proof {
                trace.push(tx.submitted_at, "contract", "reject", "invalid alert proof");
                continue;
            }
            if alerters.insert(tx.sender) {
                trace.push(
                    chain.header_at(height).unwrap().produced_at,
                    "contract",
                    "accept-alert",
                    tx.sender.to_string(),
                );
            }
        }
    }

    let settlement = settle_simultaneous(
        &committee,
        &alerters,
        bribes,
        params,
        SettlementRule::BurnedPenalty,
        config.conditional_bribes,
        !alerters.is_empty(),
    );
    let settle_step = chain.clock();
    trace.push(
        settle_step,
        "contract",
        "settle",
        format!("alerters={} slashed={}", alerters.len(), settlement.slashed.len()),
    );

    let observable_prefix = chain.trace_lines_until(config.start_step);
    Ok(RoundReport {
        protocol: ProtocolId::BurnedPenalty,
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
