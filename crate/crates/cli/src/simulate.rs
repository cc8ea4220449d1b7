//! Seeded monte-carlo simulation: run every protocol over every grid
//! point for a configured number of trials, with rational (bribed)
//! nodes deciding from their own offers, and report empirical
//! suppression rates alongside exact-value conservation checks.
//!
//! Trials fan out across a thread pool; every trial owns its chain and
//! device state and is keyed by (protocol, point, trial), so results
//! are aggregated in a canonical order and reruns with the same master
//! seed produce byte-identical output.

use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use alerting_core::adversary::{collusion_script, emit_bribes, AdversaryStrategy, StrategyKind};
use alerting_core::game::{BribeVector, SettlementRule};
use alerting_core::money::{PayoffAmount, TokenAmount};
use alerting_core::params::ProtocolParams;
use alerting_core::protocols::{
    run_burned_penalty, run_lockstep, run_naive_commit_reveal, run_sequential,
    run_tee_round_with_collusion, CollusionScript, NodePolicy, ProtocolId, RoundConfig,
    RoundReport, SlotSchedule, TimingChoice,
};

use crate::config::ExperimentSpec;
use crate::CliError;

/// What one finished round contributes to its cell's aggregate.
#[derive(Debug, Clone)]
struct TrialRecord {
    suppressed: bool,
    adversary_micro: BigRational,
    bribes_micro: BigRational,
    txs: usize,
}

/// Aggregated results for one (protocol, grid point) cell.
#[derive(Debug, Clone)]
pub struct CellSummary {
    pub protocol: ProtocolId,
    pub n: usize,
    pub lambda: TokenAmount,
    pub c: TokenAmount,
    pub trials: u32,
    pub suppressed: u32,
    /// Empirical probability that the round ended with no alarm.
    pub suppression_rate: f64,
    /// Mean adversary utility per round, in tokens.
    pub adversary_mean: f64,
    /// Half-width of the 95% confidence interval on that mean.
    pub adversary_ci95: f64,
    /// Mean bribes actually paid per round, in tokens.
    pub bribes_mean: f64,
    /// Mean on-chain transactions per round.
    pub txs_mean: f64,
}

/// Runs the whole experiment. Every round is checked for exact value
/// conservation; any violation aborts with an invariant error.
pub fn run_simulation(spec: &ExperimentSpec) -> Result<Vec<CellSummary>, CliError> {
    let mut cells: Vec<(ProtocolId, usize)> = Vec::new();
    for protocol in &spec.protocols {
        for point in 0..spec.grid.len() {
            cells.push((*protocol, point));
        }
    }

    let mut summaries = Vec::with_capacity(cells.len());
    for (protocol, point) in cells {
        let params = &spec.grid[point].params;
        let (bribes, script) = offers_for(&spec.strategy, protocol, params)?;
        let records: Result<Vec<TrialRecord>, CliError> = (0..spec.trials)
            .into_par_iter()
            .map(|trial| {
                let seed = spec.trial_seed(point, protocol, trial);
                run_trial(protocol, params, spec, &bribes, &script, seed)
            })
            .collect();
        summaries.push(summarize(protocol, params, spec.trials, &records?));
    }
    Ok(summaries)
}

/// Splits the adversary's offers into the two channels the engines
/// understand: a bribe vector read at decision time, and (for the
/// commit-reveal protocols under the early-opening strategy) a
/// collusion script of opening deals.
fn offers_for(
    strategy: &AdversaryStrategy,
    protocol: ProtocolId,
    params: &ProtocolParams,
) -> Result<(BribeVector, CollusionScript), CliError> {
    let commit_reveal = matches!(
        protocol,
        ProtocolId::TeeCommitReveal | ProtocolId::NaiveCommitReveal
    );
    if commit_reveal && strategy.kind == StrategyKind::EarlyRevealGreedy {
        let script = collusion_script(strategy, params);
        return Ok((BribeVector::empty(strategy.gain_g.clone()), script));
    }
    let schedule = SlotSchedule::identity(params.n());
    let schedule_arg =
        if protocol == ProtocolId::Sequential { Some(&schedule) } else { None };
    let bribes = emit_bribes(strategy, params, schedule_arg).map_err(|e| {
        CliError::Config(format!(
            "adversary strategy cannot target {}: {e}",
            protocol.name()
        ))
    })?;
    Ok((bribes, CollusionScript::default()))
}

fn run_trial(
    protocol: ProtocolId,
    params: &ProtocolParams,
    spec: &ExperimentSpec,
    bribes: &BribeVector,
    script: &CollusionScript,
    seed: u64,
) -> Result<TrialRecord, CliError> {
    let timing = match protocol {
        ProtocolId::Lockstep => TimingChoice::Lockstep,
        _ => TimingChoice::BoundedDelay { delay_sampler_seed: seed },
    };
    let mut config = RoundConfig::new(params.clone(), true).with_seed(seed).with_timing(timing);
    config.conditional_bribes = spec.strategy.conditional;
    let policies = vec![NodePolicy::Bribed; params.n()];

    let report = match protocol {
        ProtocolId::BurnedPenalty => run_burned_penalty(&config, &policies, bribes),
        ProtocolId::Lockstep => run_lockstep(&config, &policies, bribes),
        ProtocolId::TeeCommitReveal => {
            run_tee_round_with_collusion(&config, &policies, bribes, script)
        }
        ProtocolId::NaiveCommitReveal => {
            run_naive_commit_reveal(&config, &policies, bribes, script)
        }
        ProtocolId::Sequential => {
            let schedule = SlotSchedule::identity(params.n());
            run_sequential(&config, &policies, bribes, &schedule)
        }
    }
    .map_err(|e| {
        CliError::Invariant(format!("{} round with seed {seed} failed: {e}", protocol.name()))
    })?;

    check_conservation(&report, bribes, params).map_err(|msg| {
        CliError::Invariant(format!("{} round with seed {seed}: {msg}", protocol.name()))
    })?;

    Ok(TrialRecord {
        suppressed: !report.alert_raised,
        adversary_micro: report.outcome.adversary_payoff.micro().clone(),
        bribes_micro: report.bribes_paid.micro().clone(),
        txs: report.txs_submitted,
    })
}

/// The exact-value conservation identity every settled round must
/// satisfy, in integer micro-token arithmetic:
///
/// - with alerters, the distributed rewards equal the pot the contract
///   holds (`λ·|slashed| + c`, just `c` when penalties are burned, or
///   the accrued `λ(s_k−1)` in slot-based play), and the adversary is
///   out exactly the bribes actually paid;
/// - a fully suppressed round moves nothing on-chain, so the nodes'
///   bribes plus the adversary's net add up to exactly `G`.
pub fn check_conservation(
    report: &RoundReport,
    bribes: &BribeVector,
    params: &ProtocolParams,
) -> Result<(), String> {
    let alerters = &report.outcome.alerter_set_f;
    let lambda = params.penalty_lambda();

    if !alerters.is_empty() {
        let reward_sum: TokenAmount = report.rewards.values().cloned().sum();
        let expected = match report.protocol {
            ProtocolId::BurnedPenalty => params.operator_cost_c().micro().clone(),
            ProtocolId::Sequential => {
                let slot = report
                    .outcome
                    .alert_slot
                    .ok_or("alerters present but no alert slot recorded")?;
                lambda.micro() * BigRational::from_integer((slot as u64 - 1).into())
            }
            _ => {
                lambda.micro() * BigRational::from_integer((report.slashed.len() as u64).into())
                    + params.operator_cost_c().micro()
            }
        };
        if reward_sum.micro() != &expected {
            return Err(format!(
                "settled rewards {} do not equal the pot {}",
                reward_sum,
                TokenAmount::from_micro_rational(expected.clone())
                    .map(|t| t.to_string())
                    .unwrap_or_else(|_| format!("{expected} micro"))
            ));
        }
    } else if report.alert_raised {
        // Alarm without a settled alerter (a commitment was never
        // revealed): the pot has no recipient, nothing is distributed.
        if report.rewards.values().any(|r| !r.is_zero()) {
            return Err("alarm without alerters must not distribute rewards".into());
        }
    }

    if report.alert_raised {
        let expected = -PayoffAmount::from(&report.bribes_paid);
        if report.outcome.adversary_payoff != expected {
            return Err(format!(
                "adversary payoff {} must equal the negated bribes paid {}",
                report.outcome.adversary_payoff, expected
            ));
        }
    } else {
        let total: PayoffAmount = report.outcome.node_payoffs.values().cloned().sum::<PayoffAmount>()
            + report.outcome.adversary_payoff.clone();
        if total != PayoffAmount::from(&bribes.gain_g) {
            return Err(format!(
                "suppressed round settles to {} instead of the adversary gain {}",
                total, bribes.gain_g
            ));
        }
    }
    Ok(())
}

/// The settlement rule a protocol's engine applies, for analytic
/// cross-checks against simulation results.
pub fn settlement_rule(protocol: ProtocolId) -> SettlementRule {
    match protocol {
        ProtocolId::BurnedPenalty => SettlementRule::BurnedPenalty,
        _ => SettlementRule::SharedSlash,
    }
}

fn summarize(
    protocol: ProtocolId,
    params: &ProtocolParams,
    trials: u32,
    records: &[TrialRecord],
) -> CellSummary {
    let t = records.len().max(1) as f64;
    let suppressed = records.iter().filter(|r| r.suppressed).count() as u32;

    let adversary_sum: BigRational =
        records.iter().map(|r| r.adversary_micro.clone()).sum();
    let bribes_sum: BigRational = records.iter().map(|r| r.bribes_micro.clone()).sum();
    let txs_sum: usize = records.iter().map(|r| r.txs).sum();

    let micro_per_token = 1_000_000.0;
    let adversary_tokens: Vec<f64> = records
        .iter()
        .map(|r| r.adversary_micro.to_f64().unwrap_or(f64::NAN) / micro_per_token)
        .collect();
    let adversary_mean =
        (adversary_sum / BigRational::from_integer((records.len().max(1) as u64).into()))
            .to_f64()
            .unwrap_or(f64::NAN)
            / micro_per_token;
    let variance = if records.len() > 1 {
        adversary_tokens.iter().map(|x| (x - adversary_mean).powi(2)).sum::<f64>()
            / (t - 1.0)
    } else {
        0.0
    };
    let adversary_ci95 = 1.96 * (variance / t).sqrt();

    let bribes_mean = if records.is_empty() {
        0.0
    } else {
        (bribes_sum / BigRational::from_integer((records.len() as u64).into()))
            .to_f64()
            .unwrap_or(f64::NAN)
            / micro_per_token
    };

    CellSummary {
        protocol,
        n: params.n(),
        lambda: params.penalty_lambda().clone(),
        c: params.operator_cost_c().clone(),
        trials,
        suppressed,
        suppression_rate: if records.is_empty() { 0.0 } else { suppressed as f64 / t },
        adversary_mean,
        adversary_ci95,
        bribes_mean,
        txs_mean: if records.is_empty() { 0.0 } else { txs_sum as f64 / t },
    }
}

pub const SIMULATE_HEADER: &str = "protocol,n,lambda,c,trials,suppressed,suppression_rate,\
adversary_mean,adversary_ci95,bribes_mean,txs_mean";

/// Renders cell summaries as CSV (header + one line per cell).
pub fn to_csv(cells: &[CellSummary]) -> String {
    let mut out = String::from(SIMULATE_HEADER);
    out.push('\n');
    for cell in cells {
        out.push_str(&format!(
            "{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
            cell.protocol.name(),
            cell.n,
            cell.lambda,
            cell.c,
            cell.trials,
            cell.suppressed,
            cell.suppression_rate,
            cell.adversary_mean,
            cell.adversary_ci95,
            cell.bribes_mean,
            cell.txs_mean
        ));
    }
    out
}

/// One human-readable line per cell, for terminal summaries.
pub fn summary_lines(cells: &[CellSummary]) -> Vec<String> {
    cells
        .iter()
        .map(|cell| {
            format!(
                "{:>14}  n={:<3} lambda={:<8} c={:<6} suppression={:.3}  adversary={:+.4} ± {:.4}  \
                 bribes={:.4}  txs={:.1}",
                cell.protocol.name(),
                cell.n,
                cell.lambda.to_string(),
                cell.c.to_string(),
                cell.suppression_rate,
                cell.adversary_mean,
                cell.adversary_ci95,
                cell.bribes_mean,
                cell.txs_mean
            )
        })
        .collect()
}
