//! The early-opening bribery walkthrough.
//!
//! Against plain-hash commitments an adversary can buy committee
//! members' openings one at a time before the reveal window, paying
//! each node just enough to cover its slashing risk given how many
//! others already sold out — a total that grows like `λ·n·ln n`.
//! Against device-backed commitments the very same deals are worthless
//! (the device refuses to open before the commitment is provably
//! buried), so suppression costs the full quadratic bribe budget.
//!
//! The demo runs both engines at several committee sizes and checks,
//! exactly, that the paid totals match the closed-form attack cost and
//! that the devices never pay out a single micro-token.

use alerting_core::adversary::{collusion_script, AdversaryStrategy, StrategyKind};
use alerting_core::game::{
    early_reveal_attack_cost, early_reveal_bribe_schedule, simultaneous_suppression_threshold,
    BribeVector,
};
use alerting_core::money::TokenAmount;
use alerting_core::params::{ProtocolParams, RawParams};
use alerting_core::protocols::{
    run_naive_commit_reveal, run_tee_round_with_collusion, NodePolicy, RoundConfig, TimingChoice,
};

use crate::CliError;

/// Committee sizes the walkthrough sweeps.
pub const DEMO_SIZES: [usize; 4] = [4, 8, 16, 32];

/// One committee size's attack comparison.
#[derive(Debug, Clone)]
pub struct AttackRow {
    pub n: usize,
    /// What the adversary actually paid against plain-hash commitments.
    pub plain_paid: TokenAmount,
    /// The closed-form cost of the early-opening ladder (must equal
    /// `plain_paid` exactly).
    pub ladder_cost: TokenAmount,
    /// The same ladder with a zero strictness margin — the idealized
    /// attack cost (`25/3` tokens at n=4, λ=1).
    pub zero_margin_cost: TokenAmount,
    pub plain_suppressed: bool,
    /// Whether the device-backed round still raised its alert.
    pub device_alert_raised: bool,
    /// What the same deals cost against devices (always zero).
    pub device_paid: TokenAmount,
    /// Minimum budget that would actually suppress the device-backed
    /// protocol: the quadratic simultaneous bound.
    pub device_required: TokenAmount,
    /// `plain_paid / (λ·n·(n−1))` — the attack's share of the
    /// quadratic budget, strictly shrinking with n.
    pub quadratic_share: f64,
}

fn demo_params(n: usize) -> ProtocolParams {
    RawParams {
        n,
        penalty_lambda: TokenAmount::from_tokens(1),
        operator_cost_c: TokenAmount::zero(),
        ..RawParams::default()
    }
    .build()
    .expect("demo parameters are valid")
}

/// Runs the sweep, verifying every claim as it goes.
pub fn run_attack_demo(seed: u64) -> Result<Vec<AttackRow>, CliError> {
    let mut rows = Vec::new();
    for n in DEMO_SIZES {
        let params = demo_params(n);
        let strategy = AdversaryStrategy::new(
            StrategyKind::EarlyRevealGreedy,
            simultaneous_suppression_threshold(&params),
        );
        let script = collusion_script(&strategy, &params);
        let bribes = BribeVector::empty(strategy.gain_g.clone());
        let policies = vec![NodePolicy::Bribed; n];
        let config = RoundConfig::new(params.clone(), true)
            .with_seed(seed)
            .with_timing(TimingChoice::BoundedDelay { delay_sampler_seed: seed });

        let plain = run_naive_commit_reveal(&config, &policies, &bribes, &script)
            .map_err(|e| CliError::Invariant(format!("plain-hash round at n={n} failed: {e}")))?;
        let device = run_tee_round_with_collusion(&config, &policies, &bribes, &script)
            .map_err(|e| CliError::Invariant(format!("device round at n={n} failed: {e}")))?;

        let ladder_cost = early_reveal_attack_cost(&params);
        let zero_margin_cost: TokenAmount =
            early_reveal_bribe_schedule(params.penalty_lambda(), n, &TokenAmount::zero())
                .into_iter()
                .sum();
        let device_required = simultaneous_suppression_threshold(&params);

        let row = AttackRow {
            n,
            plain_paid: plain.bribes_paid.clone(),
            ladder_cost: ladder_cost.clone(),
            zero_margin_cost,
            plain_suppressed: !plain.alert_raised,
            device_alert_raised: device.alert_raised,
            device_paid: device.bribes_paid.clone(),
            device_required: device_required.clone(),
            quadratic_share: plain.bribes_paid.to_f64_tokens()
                / device_required.to_f64_tokens(),
        };

        if !row.plain_suppressed {
            return Err(CliError::Invariant(format!(
                "the early-opening ladder failed to suppress plain-hash commitments at n={n}"
            )));
        }
        if row.plain_paid != row.ladder_cost {
            return Err(CliError::Invariant(format!(
                "plain-hash round paid {} but the ladder costs {} at n={n}",
                row.plain_paid, row.ladder_cost
            )));
        }
        if !row.device_alert_raised {
            return Err(CliError::Invariant(format!(
                "device-backed commitments were suppressed below the quadratic budget at n={n}"
            )));
        }
        if !row.device_paid.is_zero() {
            return Err(CliError::Invariant(format!(
                "devices paid out {} at n={n}; early openings must never settle",
                row.device_paid
            )));
        }
        if let Some(previous) = rows.last() {
            let prev: &AttackRow = previous;
            if row.quadratic_share >= prev.quadratic_share {
                return Err(CliError::Invariant(format!(
                    "attack cost share {} at n={n} did not shrink from {} at n={}",
                    row.quadratic_share, prev.quadratic_share, prev.n
                )));
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

/// The human-readable walkthrough.
pub fn report_lines(rows: &[AttackRow]) -> Vec<String> {
    let mut lines = vec![
        "early-opening attack: plain-hash vs device-backed commit-reveal (lambda=1, c=0)"
            .to_string(),
    ];
    for row in rows {
        lines.push(format!(
            "n={:<3} plain-hash: paid {} ({:.4} tokens), suppressed={}; zero-margin ladder {}",
            row.n,
            row.plain_paid,
            row.plain_paid.to_f64_tokens(),
            row.plain_suppressed,
            row.zero_margin_cost,
        ));
        lines.push(format!(
            "      device-backed: alert_raised={}, paid {}; suppression needs >= {}",
            row.device_alert_raised, row.device_paid, row.device_required,
        ));
    }
    let shares: Vec<String> =
        rows.iter().map(|r| format!("{:.4}", r.quadratic_share)).collect();
    lines.push(format!(
        "attack cost as a share of the quadratic budget: {} (shrinking with n)",
        shares.join(" -> ")
    ));
    lines
}
