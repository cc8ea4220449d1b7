//! Operational self-checks: fast cross-validations of the closed forms
//! against brute-force enumeration and of the protocol engines against
//! the analytic predictions. These are the same families of checks the
//! test suite runs, packaged as a subcommand so a deployed binary can
//! prove its own arithmetic.

use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed};

use alerting_core::game::reference::{dominance_by_enumeration, sequential_outcome_by_enumeration};
use alerting_core::game::{
    classify_dominance, expected_bribe_bound_check, indifference_gap_binomial,
    no_alert_dominance_threshold, alert_dominance_threshold, predict_simultaneous_outcome,
    sequential_spne, symmetric_mixed_q, BribeVector, MixedProfile,
};
use alerting_core::money::TokenAmount;
use alerting_core::params::{ProtocolParams, RawParams};
use alerting_core::protocols::{
    run_burned_penalty, run_lockstep, run_naive_commit_reveal, run_sequential,
    run_tee_round_with_collusion, CollusionScript, NodePolicy, ProtocolId, RoundConfig,
    SlotSchedule, TimingChoice,
};

use crate::attack::run_attack_demo;
use crate::config::{derive_seed, ExperimentSpec};
use crate::simulate::{run_simulation, settlement_rule};

/// One named check's result.
pub struct CheckResult {
    pub name: &'static str,
    pub outcome: Result<String, String>,
}

fn tokens(s: &str) -> TokenAmount {
    s.parse().expect("literal amounts parse")
}

fn params_with(n: usize, lambda: &str, c: &str) -> ProtocolParams {
    RawParams {
        n,
        penalty_lambda: tokens(lambda),
        operator_cost_c: tokens(c),
        ..RawParams::default()
    }
    .build()
    .expect("check parameters are valid")
}

/// Dominance classification vs. exhaustive best-response enumeration,
/// probing one micro-token around both regime boundaries.
fn check_dominance() -> Result<String, String> {
    let micro = TokenAmount::from_micro(1);
    let mut cases = 0usize;
    for n in 2..=5 {
        for lambda in ["1", "10"] {
            for c in ["0", &format!("{}", lambda.parse::<u64>().unwrap() as f64 / 2.0)] {
                let params = params_with(n, lambda, c);
                let lo = alert_dominance_threshold(&params);
                let hi = no_alert_dominance_threshold(&params);
                let mut probes = vec![TokenAmount::zero(), lo.clone(), hi.clone()];
                probes.push(&lo + &micro);
                probes.push(&hi + &micro);
                if let Some(below) = lo.checked_sub(&micro) {
                    probes.push(below);
                }
                if let Some(below) = hi.checked_sub(&micro) {
                    probes.push(below);
                }
                for beta in probes {
                    let fast = classify_dominance(&beta, &params);
                    let slow = dominance_by_enumeration(&beta, &params);
                    if fast != slow {
                        return Err(format!(
                            "classify_dominance({beta}) = {fast:?} but enumeration says \
                             {slow:?} at n={n}, lambda={lambda}, c={c}"
                        ));
                    }
                    cases += 1;
                }
            }
        }
    }
    Ok(format!("{cases} boundary probes agree with enumeration"))
}

/// The solved interior mixing probability zeroes the exact binomial
/// indifference gap and satisfies the expected-bribe lower bound.
fn check_interior() -> Result<String, String> {
    let mut cases = 0usize;
    for (n, lambda, c) in [(3usize, "1", "0"), (4, "10", "3"), (6, "2", "1")] {
        let params = params_with(n, lambda, c);
        let lo = alert_dominance_threshold(&params);
        let hi = no_alert_dominance_threshold(&params);
        for numerator in 1..=4u64 {
            // Interior points at 1/5th steps between the thresholds.
            let beta = TokenAmount::from_micro_rational(
                lo.micro()
                    + (hi.micro() - lo.micro())
                        * BigRational::new(numerator.into(), 5.into()),
            )
            .expect("interior bribes are positive");
            let q = symmetric_mixed_q(&beta, &params)
                .map_err(|e| format!("no interior q for beta={beta}: {e}"))?;
            let q_rat = BigRational::from_f64(q).ok_or("q is not finite")?;
            let gap = indifference_gap_binomial(&q_rat, &beta, &params);
            if gap.abs() > BigRational::new(1.into(), 100.into()) {
                return Err(format!(
                    "solved q={q} leaves a {gap} micro-token indifference gap at \
                     beta={beta}, n={n}"
                ));
            }
            let profile = MixedProfile::uniform_f64(n, q)
                .map_err(|e| format!("profile rejected: {e}"))?;
            let bribes = BribeVector::uniform(n, beta.clone(), tokens("1000"));
            let bound = expected_bribe_bound_check(&bribes, &profile, &params);
            if !bound.holds {
                return Err(format!(
                    "expected-bribe bound fails at beta={beta}, n={n}: {} < {}",
                    bound.lhs, bound.rhs
                ));
            }
            cases += 1;
        }
    }
    Ok(format!("{cases} interior points solved and bound-checked"))
}

/// Backward-induction outcomes vs. exhaustive strategy-profile search.
fn check_sequential_equilibria() -> Result<String, String> {
    let mut cases = 0usize;
    for n in 2..=5usize {
        let params = params_with(n, "2", "0");
        let schedules = [
            SlotSchedule::identity(n),
            SlotSchedule::from_permutation(
                (0..n as u32).rev().map(alerting_core::NodeId).collect(),
                1,
            ),
        ];
        for schedule in &schedules {
            for pattern in 0..3u64 {
                let offers: Vec<TokenAmount> = (0..n as u64)
                    .map(|i| {
                        TokenAmount::from_micro_rational(BigRational::new(
                            ((i * 7 + pattern * 3) % 11).into(),
                            2.into(),
                        ) * tokens("1").micro())
                        .unwrap()
                    })
                    .collect();
                let bribes = BribeVector::by_committee_order(&offers, tokens("100"));
                let fast = sequential_spne(&bribes, schedule, &params);
                let slow = sequential_outcome_by_enumeration(&bribes, schedule, &params);
                if fast != slow {
                    return Err(format!(
                        "backward induction disagrees with enumeration at n={n}, \
                         pattern={pattern}"
                    ));
                }
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} slot games match exhaustive search"))
}

/// Engines vs. the analytic outcome predictions in dominant regimes.
fn check_engines_against_predictions() -> Result<String, String> {
    let params = params_with(4, "10", "3");
    let lo = alert_dominance_threshold(&params); // 43/4 tokens
    let hi = no_alert_dominance_threshold(&params); // 33 tokens
    let patterns: Vec<(&str, Vec<TokenAmount>)> = vec![
        ("all-alert", vec![tokens("1"); 4]),
        ("all-silent", vec![&hi + &tokens("1"); 4]),
        ("boundary-alert", vec![lo.clone(); 4]),
        ("split", vec![tokens("0"), tokens("0"), &hi + &tokens("2"), &hi + &tokens("2")]),
    ];
    for (label, offers) in patterns {
        let bribes = BribeVector::by_committee_order(&offers, tokens("500"));
        let policies = vec![NodePolicy::Bribed; 4];
        let engines: Vec<(ProtocolId, _)> = vec![
            (ProtocolId::Lockstep, {
                let config = RoundConfig::new(params.clone(), true).with_seed(3);
                run_lockstep(&config, &policies, &bribes)
            }),
            (ProtocolId::BurnedPenalty, {
                let config = RoundConfig::new(params.clone(), true).with_seed(3);
                run_burned_penalty(&config, &policies, &bribes)
            }),
            (ProtocolId::TeeCommitReveal, {
                let config = RoundConfig::new(params.clone(), true)
                    .with_seed(3)
                    .with_timing(TimingChoice::BoundedDelay { delay_sampler_seed: 3 });
                run_tee_round_with_collusion(
                    &config,
                    &policies,
                    &bribes,
                    &CollusionScript::default(),
                )
            }),
            (ProtocolId::NaiveCommitReveal, {
                let config = RoundConfig::new(params.clone(), true)
                    .with_seed(3)
                    .with_timing(TimingChoice::BoundedDelay { delay_sampler_seed: 3 });
                run_naive_commit_reveal(&config, &policies, &bribes, &CollusionScript::default())
            }),
        ];
        for (protocol, result) in engines {
            let report =
                result.map_err(|e| format!("{protocol} engine failed on {label}: {e}"))?;
            let predicted = predict_simultaneous_outcome(
                &bribes,
                &params,
                settlement_rule(protocol),
            )
            .ok_or_else(|| format!("{label} has a non-dominant node"))?;
            if report.outcome != predicted {
                return Err(format!(
                    "{protocol} engine settles {label} differently from the prediction"
                ));
            }
        }
    }

    // Sequential: the engine must reproduce backward induction.
    let schedule = SlotSchedule::identity(4);
    for offers in [vec![tokens("100"); 4], vec![tokens("5"); 4], vec![tokens("0"); 4]] {
        let bribes = BribeVector::by_committee_order(&offers, tokens("500"));
        let config = RoundConfig::new(params.clone(), true)
            .with_seed(9)
            .with_timing(TimingChoice::BoundedDelay { delay_sampler_seed: 9 });
        let report = run_sequential(&config, &vec![NodePolicy::Bribed; 4], &bribes, &schedule)
            .map_err(|e| format!("sequential engine failed: {e}"))?;
        let predicted = sequential_spne(&bribes, &schedule, &params);
        if report.outcome != predicted {
            return Err("sequential engine deviates from backward induction".to_string());
        }
    }
    Ok("4 bribe patterns x 4 engines + 3 slot games match predictions".to_string())
}

/// A short seeded simulation across every protocol; each round carries
/// its own exact conservation check.
fn check_simulation_conservation() -> Result<String, String> {
    let spec = ExperimentSpec::from_toml(
        r#"
        [experiment]
        trials = 25
        seed = 1234

        [grid]
        n = [3, 5]
        lambda = ["1"]
        c = ["0.5"]

        [adversary]
        strategy = "uniform"
        offer = "1.8"
        gain = "40"
        "#,
    )
    .map_err(|e| e.to_string())?;
    let cells = run_simulation(&spec).map_err(|e| e.to_string())?;
    Ok(format!(
        "{} rounds across {} cells settled with exact conservation",
        cells.iter().map(|c| c.trials as usize).sum::<usize>(),
        cells.len()
    ))
}

/// The early-opening walkthrough's own assertions.
fn check_device_resistance() -> Result<String, String> {
    let rows = run_attack_demo(derive_seed(99, 0, ProtocolId::TeeCommitReveal, 0))
        .map_err(|e| e.to_string())?;
    Ok(format!(
        "plain-hash bought for {} at n=4 while devices held out for >= {}",
        rows[0].plain_paid, rows[0].device_required
    ))
}

/// Runs every check, returning per-check results for printing.
pub fn run_verify() -> Vec<CheckResult> {
    vec![
        CheckResult { name: "dominance-vs-enumeration", outcome: check_dominance() },
        CheckResult { name: "interior-equilibrium-residual", outcome: check_interior() },
        CheckResult {
            name: "sequential-spne-vs-enumeration",
            outcome: check_sequential_equilibria(),
        },
        CheckResult {
            name: "engines-vs-analytic-predictions",
            outcome: check_engines_against_predictions(),
        },
        CheckResult {
            name: "simulation-value-conservation",
            outcome: check_simulation_conservation(),
        },
        CheckResult { name: "device-early-opening-resistance", outcome: check_device_resistance() },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_self_check_passes() {
        for check in run_verify() {
            assert!(check.outcome.is_ok(), "{}: {:?}", check.name, check.outcome);
        }
    }
}
