//! Commit-reveal engines. Nodes commit a hiding handle to their
//! action during `[H0, H*)`, reveal during `[H*, H* + n_reveal)`, and
//! the contract settles on the valid reveals.
//!
//! Two commitment backends share the round logic:
//! - `Device`: sealed timed commitments — the nonce exists only inside
//!   a trusted device and comes out strictly after the commit is
//!   buried `n_commit` blocks deep, so nobody can open early even if
//!   paid to.
//! - `Plain`: an ordinary hash commitment the node itself can open at
//!   any moment — deliberately vulnerable, kept to reproduce the
//!   early-opening bribery attack.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;

use crate::chain::{ChainState, Transaction, TxKind};
use crate::digest::{digest_parts, Digest32};
use crate::game::{BribeVector, Outcome, SettlementRule};
use crate::money::TokenAmount;
use crate::tee::{
    commitment_handle, verify_attestation, Attestation, MacScheme, PoPProof, TeeError, TeeState,
};
use crate::NodeId;

use super::{
    check_policy_count, choose_simultaneous, derive_key, settle_simultaneous, submit_phased,
    Action, CollusionScript, NodePolicy, ProtocolError, ProtocolId, RoundConfig, RoundReport,
    TimingChoice, Trace, TxPhase,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Backend {
    Device,
    Plain,
}

const PLAIN_COMMIT_TAG: &[u8] = b"plain-commit";

fn plain_handle(m: &[u8], r: &[u8; 32]) -> Digest32 {
    digest_parts(&[PLAIN_COMMIT_TAG, m, r])
}

/// The sealed message: action byte followed by the 32-byte alert-proof
/// hash (zero when staying silent).
fn commit_message(action: Action, proof_hash: &[u8]) -> Vec<u8> {
    let mut m = Vec::with_capacity(33);
    m.push(match action {
        Action::Alert => 1,
        Action::NoAlert => 0,
    });
    m.extend_from_slice(proof_hash);
    m
}

struct ParsedReveal<'a> {
    action: Action,
    message: &'a [u8],
    proof_hash: &'a [u8],
    nonce: [u8; 32],
    attestation_bytes: &'a [u8],
}

fn parse_reveal(payload: &[u8]) -> Option<ParsedReveal<'_>> {
    if payload.len() < 65 {
        return None;
    }
    let action = match payload[0] {
        1 => Action::Alert,
        0 => Action::NoAlert,
        _ => return None,
    };
    Some(ParsedReveal {
        action,
        message: &payload[..33],
        proof_hash: &payload[1..33],
        nonce: payload[33..65].try_into().unwrap(),
        attestation_bytes: &payload[65..],
    })
}

struct NodeRound {
    node: NodeId,
    policy: NodePolicy,
    device: Option<TeeState>,
    plain_nonce: [u8; 32],
    committed_action: Option<Action>,
    handle: Option<Digest32>,
    commit_tx: Option<Transaction>,
    inclusion_height: Option<u64>,
    revealed: bool,
    /// Accepted early-opening deal amount, if any.
    deal: Option<TokenAmount>,
}

/// Sealed commit-reveal round against real devices.
pub fn run_tee_round(
    config: &RoundConfig,
    policies: &[NodePolicy],
    bribes: &BribeVector,
) -> Result<RoundReport, ProtocolError> {
    run_commit_reveal(config, policies, bribes, &CollusionScript::default(), Backend::Device)
}

/// Device-backed round with an adversary attempting early openings;
/// every attempt fails at the device, which the trace records.
pub fn run_tee_round_with_collusion(
    config: &RoundConfig,
    policies: &[NodePolicy],
    bribes: &BribeVector,
    script: &CollusionScript,
) -> Result<RoundReport, ProtocolError> {
    run_commit_reveal(config, policies, bribes, script, Backend::Device)
}

/// Plain-hash commit-reveal round; the collusion script can actually
/// buy early openings here.
pub fn run_naive_commit_reveal(
    config: &RoundConfig,
    policies: &[NodePolicy],
    bribes: &BribeVector,
    script: &CollusionScript,
) -> Result<RoundReport, ProtocolError> {
    run_commit_reveal(config, policies, bribes, script, Backend::Plain)
}

fn run_commit_reveal(
    config: &RoundConfig,
    policies: &[NodePolicy],
    bribes: &BribeVector,
    script: &CollusionScript,
    backend: Backend,
) -> Result<RoundReport, ProtocolError> {
    check_policy_count(policies, &config.params)?;
    if backend == Backend::Device && !matches!(config.timing, TimingChoice::BoundedDelay { .. }) {
        return Err(ProtocolError::WrongTimingModel { expected: "bounded-delay" });
    }
    let params = &config.params;
    let n = params.n();
    let delta_block = params.delta_block();
    let lambda = params.penalty_lambda();
    let committee = NodeId::committee(n);
    let mut chain = ChainState::new(delta_block, config.timing_model());
    let mut trace = Trace::default();

    chain.advance_to(config.start_step);
    let h0 = chain.tip_height();
    let h_star = h0 + params.n_commit();
    let reveal_end = h_star + params.n_reveal();
    trace.push(config.start_step, "contract", "round-start", format!("h0={h0} h_star={h_star}"));

    let valid_proof = config.valid_alert_proof();
    let checkpoint = chain.header_at(h0).unwrap().clone();
    let mut nodes: Vec<NodeRound> = committee
        .iter()
        .zip(policies)
        .map(|(id, policy)| {
            let device = (backend == Backend::Device).then(|| {
                let nonce_seed = u64::from_le_bytes(
                    derive_key(config.seed, *id, b"tee-nonce").as_bytes()[..8].try_into().unwrap(),
                );
                TeeState::new(
                    checkpoint.clone(),
                    nonce_seed,
                    derive_key(config.seed, *id, b"tee-mac").0,
                )
            });
            NodeRound {
                node: *id,
                policy: policy.clone(),
                device,
                plain_nonce: derive_key(config.seed, *id, b"plain-nonce").0,
                committed_action: None,
                handle: None,
                commit_tx: None,
                inclusion_height: None,
                revealed: false,
                deal: None,
            }
        })
        .collect();

    // Default actions, before any collusion.
    let mut actions: Vec<Option<Action>> = Vec::with_capacity(n);
    for nr in &nodes {
        let action = nr
            .policy
            .participates()
            .then(|| choose_simultaneous(config, nr.node, &nr.policy, bribes));
        if let Some(a) = action {
            trace.push(config.start_step, nr.node.to_string(), "decide", a.to_string());
        } else {
            trace.push(config.start_step, nr.node.to_string(), "decide", "abstain");
        }
        actions.push(action);
    }

    // Early-opening deals are struck before commitments go out. A node
    // with a sealed-commitment device knows it cannot deliver an early
    // opening, so it declines; with plain commitments a rational node
    // accepts any offer covering its worst case.
    let mut accepted_deals = 0usize;
    for (approached, offer) in &script.offers {
        let Some(nr) = nodes.iter_mut().find(|nr| nr.node == *approached) else {
            continue;
        };
        if !nr.policy.participates() {
            trace.push(config.start_step, nr.node.to_string(), "deal-declined", "not participating");
            continue;
        }
        match backend {
            Backend::Device => {
                trace.push(
                    config.start_step,
                    nr.node.to_string(),
                    "deal-declined",
                    "device cannot open before the publication proof",
                );
            }
            Backend::Plain => {
                if nr.policy != NodePolicy::Bribed {
                    trace.push(
                        config.start_step,
                        nr.node.to_string(),
                        "deal-declined",
                        "policy is not profit-seeking",
                    );
                    continue;
                }
                // Position i among accepted deals: alerting instead
                // would pay (λ(i−1) + c)/(n − i + 1) even if every
                // later node alerts too; the deal must beat that by λ
                // to survive the attack failing.
                let i = accepted_deals + 1;
                let alert_value = (lambda.micro()
                    * BigRational::from_integer((i as u64 - 1).into())
                    + params.operator_cost_c().micro())
                    / BigRational::from_integer(((n - i + 1) as u64).into());
                if offer.micro() - lambda.micro() >= alert_value {
                    accepted_deals += 1;
                    nr.deal = Some(offer.clone());
                    let idx = (nr.node.0) as usize;
                    actions[idx] = Some(Action::NoAlert);
                    trace.push(
                        config.start_step,
                        nr.node.to_string(),
                        "deal-accepted",
                        format!("offer={offer}"),
                    );
                } else {
                    trace.push(
                        config.start_step,
                        nr.node.to_string(),
                        "deal-declined",
                        format!("offer={offer} below the alerting value"),
                    );
                }
            }
        }
    }

    // Commit phase: seal and submit.
    let mut txs_submitted = 0usize;
    for (idx, nr) in nodes.iter_mut().enumerate() {
        let Some(action) = actions[idx] else { continue };
        nr.committed_action = Some(action);
        let proof_hash: Vec<u8> = if action == Action::Alert && config.alert_needed {
            valid_proof.clone()
        } else if action == Action::Alert {
            vec![0u8; 32]
        } else {
            vec![0u8; 32]
        };
        let m = commit_message(action, &proof_hash);
        let handle = match (&mut nr.device, backend) {
            (Some(device), _) => device.seal(&m, params.n_commit()),
            (None, _) => plain_handle(&m, &nr.plain_nonce),
        };
        nr.handle = Some(handle);
        let tx = submit_phased(
            &mut chain,
            config,
            nr.node,
            TxPhase::Commit,
            TxKind::Commit,
            handle.as_bytes().to_vec(),
        )?;
        txs_submitted += 1;
        trace.push(tx.submitted_at, nr.node.to_string(), "submit-commit", handle.to_string());
        nr.commit_tx = Some(tx);
    }

    // Let every commit land, then stage the attempted early openings.
    chain.advance_to((h0 + params.max_delay_blocks()) * delta_block);
    record_inclusions(&chain, &mut nodes);
    let mut script_payments: Vec<(NodeId, TokenAmount)> = Vec::new();
    for (approached, _offer) in &script.offers {
        let Some(nr) = nodes.iter_mut().find(|nr| nr.node == *approached) else { continue };
        let (Some(handle), Some(tx)) = (nr.handle, nr.commit_tx.clone()) else { continue };
        match (&mut nr.device, nr.deal.clone()) {
            (Some(device), _) => {
                // Demonstrate the refusal: even a cooperating node can
                // only ask its device, and the device wants depth.
                let err = match build_pop(&chain, h0, &tx) {
                    Some(pop) => device.unseal_after(&handle, &pop).map(|_| ()).unwrap_err(),
                    None => TeeError::NotIncluded,
                };
                assert!(
                    !matches!(err, TeeError::UnknownHandle),
                    "the node asks about its own sealed handle"
                );
                trace.push(
                    chain.clock(),
                    nr.node.to_string(),
                    "early-open-denied",
                    err.to_string(),
                );
            }
            (None, Some(amount)) => {
                // Plain commitment: the node opens (m, r) off-chain;
                // the adversary verifies silence and pays.
                let m = commit_message(nr.committed_action.unwrap(), &[0u8; 32]);
                let verified = plain_handle(&m, &nr.plain_nonce) == handle
                    && nr.committed_action == Some(Action::NoAlert);
                if verified {
                    script_payments.push((nr.node, amount.clone()));
                    trace.push(
                        chain.clock(),
                        "adversary",
                        "early-open-verified",
                        format!("{} paid {amount}", nr.node),
                    );
                }
            }
            (None, None) => {}
        }
    }

    // Close the commit window and register commitments.
    chain.advance_to(h_star * delta_block);
    record_inclusions(&chain, &mut nodes);
    let mut registered: BTreeMap<NodeId, Digest32> = BTreeMap::new();
    for height in (h0 + 1)..=chain.tip_height() {
        for tx in chain.block_txs(height).unwrap_or(&[]) {
            if tx.kind != TxKind::Commit || !committee.contains(&tx.sender) {
                continue;
            }
            let step = chain.header_at(height).unwrap().produced_at;
            if height >= h_star {
                trace.push(step, "contract", "reject-commit", "outside the commit window");
                continue;
            }
            if tx.payload.len() != 32 {
                trace.push(step, "contract", "reject-commit", "malformed handle");
                continue;
            }
            if registered.contains_key(&tx.sender) {
                trace.push(step, "contract", "reject-commit", "duplicate");
                continue;
            }
            let mut gamma = [0u8; 32];
            gamma.copy_from_slice(&tx.payload);
            registered.insert(tx.sender, Digest32(gamma));
        }
    }
    trace.push(chain.clock(), "contract", "commit-window-closed", format!("registered={}", registered.len()));

    // Reveal phase: each node reveals as soon as it can — plain
    // commitments wait only for the barrier, sealed ones for their
    // publication proof — and the loop runs past the window to flush
    // stragglers.
    let flush_until = (reveal_end + params.max_delay_blocks()) * delta_block;
    while chain.clock() < flush_until {
        chain.advance(delta_block);
        record_inclusions(&chain, &mut nodes);
        let tip = chain.tip_height();
        for nr in &mut nodes {
            if nr.revealed || nr.committed_action.is_none() {
                continue;
            }
            if !nr.policy.reveals() {
                continue;
            }
            let ready = match (&nr.device, nr.inclusion_height) {
                (Some(_), Some(inc)) => tip >= inc + params.n_commit(),
                (Some(_), None) => false,
                (None, _) => tip >= h_star.saturating_sub(1),
            };
            if !ready {
                continue;
            }
            let action = nr.committed_action.unwrap();
            let proof_hash: Vec<u8> = if action == Action::Alert && config.alert_needed {
                valid_proof.clone()
            } else {
                vec![0u8; 32]
            };
            let m = commit_message(action, &proof_hash);
            let payload = match &mut nr.device {
                Some(device) => {
                    let handle = nr.handle.unwrap();
                    let tx = nr.commit_tx.clone().unwrap();
                    let Some(pop) = build_pop(&chain, h0, &tx) else { continue };
                    match device.unseal_after(&handle, &pop) {
                        Ok((m_out, r, attestation)) => {
                            debug_assert_eq!(m_out, m);
                            let mut p = m_out;
                            p.extend_from_slice(&r);
                            p.extend_from_slice(&attestation.to_bytes());
                            p
                        }
                        Err(err) => {
                            trace.push(chain.clock(), nr.node.to_string(), "unseal-failed", err.to_string());
                            continue;
                        }
                    }
                }
                None => {
                    let mut p = m.clone();
                    p.extend_from_slice(&nr.plain_nonce);
                    p.extend_from_slice(&[0u8; 16]);
                    p
                }
            };
            let tx = submit_phased(&mut chain, config, nr.node, TxPhase::Reveal, TxKind::Reveal, payload)?;
            txs_submitted += 1;
            nr.revealed = true;
            trace.push(tx.submitted_at, nr.node.to_string(), "submit-reveal", action.to_string());
        }
    }

    // Settlement at the end of the reveal window.
    let verifiers: BTreeMap<NodeId, MacScheme> = nodes
        .iter()
        .filter_map(|nr| nr.device.as_ref().map(|d| (nr.node, d.verifier())))
        .collect();
    let mut valid_reveals: BTreeMap<NodeId, Action> = BTreeMap::new();
    for height in h_star..reveal_end.min(chain.tip_height() + 1) {
        for tx in chain.block_txs(height).unwrap_or(&[]) {
            if tx.kind != TxKind::Reveal || !committee.contains(&tx.sender) {
                continue;
            }
            let step = chain.header_at(height).unwrap().produced_at;
            let Some(gamma) = registered.get(&tx.sender) else {
                trace.push(step, "contract", "reject-reveal", "no registered commitment");
                continue;
            };
            if valid_reveals.contains_key(&tx.sender) {
                trace.push(step, "contract", "reject-reveal", "duplicate");
                continue;
            }
            let Some(parsed) = parse_reveal(&tx.payload) else {
                trace.push(step, "contract", "reject-reveal", "malformed payload");
                continue;
            };
            let bound = match backend {
                Backend::Device => {
                    commitment_handle(parsed.message, &parsed.nonce, params.n_commit()) == *gamma
                }
                Backend::Plain => {
                    let mut r = [0u8; 32];
                    r.copy_from_slice(&parsed.nonce);
                    plain_handle(parsed.message, &r) == *gamma
                }
            };
            if !bound {
                trace.push(step, "contract", "reject-reveal", "commitment mismatch");
                continue;
            }
            if backend == Backend::Device {
                let ok = Attestation::from_bytes(parsed.attestation_bytes)
                    .map(|(att, _)| {
                        att.gamma == *gamma
                            && att.message_m == parsed.message
                            && att.nonce_r == parsed.nonce
                            && verify_attestation(&verifiers[&tx.sender], &att)
                    })
                    .unwrap_or(false);
                if !ok {
                    trace.push(step, "contract", "reject-reveal", "attestation failed");
                    continue;
                }
            }
            if parsed.action == Action::Alert && parsed.proof_hash != valid_proof.as_slice() {
                trace.push(step, "contract", "reject-reveal", "alert proof mismatch");
                continue;
            }
            valid_reveals.insert(tx.sender, parsed.action);
            trace.push(step, "contract", "accept-reveal", format!("{} {}", tx.sender, parsed.action));
        }
    }
    // Anything landing after the window is noise the contract ignores.
    for height in reveal_end..=chain.tip_height() {
        for tx in chain.block_txs(height).unwrap_or(&[]) {
            if tx.kind == TxKind::Reveal && committee.contains(&tx.sender) {
                trace.push(
                    chain.header_at(height).unwrap().produced_at,
                    "contract",
                    "reject-reveal",
                    "outside the reveal window",
                );
            }
        }
    }

    let alerters: BTreeSet<NodeId> = valid_reveals
        .iter()
        .filter(|(_, a)| **a == Action::Alert)
        .map(|(id, _)| *id)
        .collect();
    let unrevealed_commits: Vec<NodeId> = registered
        .keys()
        .filter(|id| !valid_reveals.contains_key(id))
        .copied()
        .collect();
    let alarm = !alerters.is_empty() || !unrevealed_commits.is_empty();
    if alerters.is_empty() && !unrevealed_commits.is_empty() {
        trace.push(
            chain.clock(),
            "contract",
            "alarm",
            format!("{} committed without revealing", unrevealed_commits.len()),
        );
    }

    let mut settlement = settle_simultaneous(
        &committee,
        &alerters,
        bribes,
        params,
        SettlementRule::SharedSlash,
        config.conditional_bribes,
        alarm,
    );
    for (node, amount) in &script_payments {
        let entry = settlement.node_payoffs.get_mut(node).unwrap();
        *entry += &crate::money::PayoffAmount::from(amount);
        settlement.adversary_payoff -= &crate::money::PayoffAmount::from(amount);
        settlement.bribes_paid += amount;
    }
    trace.push(
        chain.clock(),
        "contract",
        "settle",
        format!("alerters={} slashed={} alarm={}", alerters.len(), settlement.slashed.len(), alarm),
    );

    let observable_prefix = chain.trace_lines_until(h_star * delta_block);
    Ok(RoundReport {
        protocol: match backend {
            Backend::Device => ProtocolId::TeeCommitReveal,
            Backend::Plain => ProtocolId::NaiveCommitReveal,
        },
        alert_raised: alarm,
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
        start_height: h0,
        reveal_barrier: Some(h_star),
        rewards: settlement.rewards,
        slashed: settlement.slashed,
        bribes_paid: settlement.bribes_paid,
    })
}

fn record_inclusions(chain: &ChainState, nodes: &mut [NodeRound]) {
    for nr in nodes {
        if nr.inclusion_height.is_some() {
            continue;
        }
        if let Some(tx) = &nr.commit_tx {
            if let Ok(proof) = chain.prove_inclusion(tx) {
                nr.inclusion_height = Some(proof.height);
            }
        }
    }
}

fn build_pop(chain: &ChainState, checkpoint_height: u64, commit_tx: &Transaction) -> Option<PoPProof> {
    let inclusion = chain.prove_inclusion(commit_tx).ok()?;
    if inclusion.height <= checkpoint_height {
        return None;
    }
    Some(PoPProof {
        headers: chain.headers_after(checkpoint_height),
        commit_tx: commit_tx.clone(),
        inclusion_height_index: (inclusion.height - checkpoint_height - 1) as usize,
        inclusion,
    })
}
