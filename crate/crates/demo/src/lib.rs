//! Browser bindings for the alerting-game toolkit.
//!
//! Three explorers, each a plain function taking simple scalar/string
//! inputs and returning a JSON string, so the page needs no framework
//! and the same functions remain callable from native Rust tests.
//! Errors come back as `{"error": "..."}` instead of exceptions.

use num_traits::ToPrimitive;
use serde_json::{json, Value};
use wasm_bindgen::prelude::wasm_bindgen;

use alerting_core::game::{
    alert_dominance_threshold, burned_penalty_resistance, classify_dominance,
    early_reveal_attack_cost, expected_bribe_bound_check, max_bribery_resistance,
    no_alert_dominance_threshold, sequential_spne, sequential_suppression_threshold,
    simultaneous_suppression_threshold, symmetric_mixed_q, BribeVector, DominanceClass,
    MixedProfile,
};
use alerting_core::money::TokenAmount;
use alerting_core::params::{ProtocolParams, RawParams};
use alerting_core::protocols::{ProtocolId, SlotSchedule};

fn err(message: impl std::fmt::Display) -> String {
    json!({ "error": message.to_string() }).to_string()
}

fn parse_tokens(label: &str, text: &str) -> Result<TokenAmount, String> {
    text.trim()
        .parse()
        .map_err(|e| format!("{label} {text:?}: {e}"))
}

fn build_params(n: usize, lambda: &str, c: &str) -> Result<ProtocolParams, String> {
    let raw = RawParams {
        n,
        penalty_lambda: parse_tokens("penalty", lambda)?,
        operator_cost_c: parse_tokens("operator cost", c)?,
        ..RawParams::default()
    };
    raw.build().map_err(|e| e.to_string())
}

fn amount_json(amount: &TokenAmount) -> Value {
    json!({
        "exact": amount.to_string(),
        "tokens": amount.to_f64_tokens(),
    })
}

/// Classifies one private bribe level against the dominance
/// thresholds and, in the mixing region, solves the symmetric
/// equilibrium and prices the attack.
#[wasm_bindgen]
pub fn equilibrium_report(n: usize, lambda: &str, c: &str, beta: &str) -> String {
    let params = match build_params(n, lambda, c) {
        Ok(p) => p,
        Err(e) => return err(e),
    };
    let beta = match parse_tokens("bribe", beta) {
        Ok(b) => b,
        Err(e) => return err(e),
    };
    let lo = alert_dominance_threshold(&params);
    let hi = no_alert_dominance_threshold(&params);
    let class = classify_dominance(&beta, &params);
    let mut report = json!({
        "n": n,
        "lambda": lambda.trim(),
        "c": c.trim(),
        "beta": beta.to_string(),
        "alert_dominant_at_or_below": amount_json(&lo),
        "no_alert_dominant_at_or_above": amount_json(&hi),
        "classification": match class {
            DominanceClass::AlertDominant => "alert-dominant",
            DominanceClass::NoAlertDominant => "no-alert-dominant",
            DominanceClass::Interior => "interior",
        },
        "suppression_budgets": {
            "simultaneous": amount_json(&simultaneous_suppression_threshold(&params)),
            "sequential": amount_json(&sequential_suppression_threshold(&params)),
            "burned_penalty": amount_json(&burned_penalty_resistance(&params)),
            "early_reveal_ladder": amount_json(&early_reveal_attack_cost(&params)),
            "ceiling": amount_json(&max_bribery_resistance(&params)),
        },
    });
    if class == DominanceClass::Interior {
        let q = match symmetric_mixed_q(&beta, &params) {
            Ok(q) => q,
            Err(e) => return err(e),
        };
        let profile = match MixedProfile::uniform_f64(n, q) {
            Ok(p) => p,
            Err(e) => return err(e),
        };
        let bribes = BribeVector::uniform(n, beta.clone(), TokenAmount::zero());
        let bound = expected_bribe_bound_check(&bribes, &profile, &params);
        report["mixed_equilibrium"] = json!({
            "silence_probability_q": q,
            "round_suppression_probability": q.powi(n as i32),
            "expected_spend_per_round": bound.lhs.to_string(),
            "guaranteed_spend_floor": bound.rhs.to_string(),
            "floor_holds": bound.holds,
        });
    }
    report.to_string()
}

/// The full cost/footprint comparison at one parameter point: what
/// each design makes a guaranteed suppression cost, and what it writes
/// on-chain per round.
#[wasm_bindgen]
pub fn protocol_costs(n: usize, lambda: &str, c: &str) -> String {
    let params = match build_params(n, lambda, c) {
        Ok(p) => p,
        Err(e) => return err(e),
    };
    let rows: Vec<Value> = ProtocolId::ALL
        .into_iter()
        .map(|protocol| {
            let budget = match protocol {
                ProtocolId::BurnedPenalty => burned_penalty_resistance(&params),
                ProtocolId::Lockstep | ProtocolId::TeeCommitReveal => {
                    simultaneous_suppression_threshold(&params)
                }
                ProtocolId::NaiveCommitReveal => early_reveal_attack_cost(&params),
                ProtocolId::Sequential => sequential_suppression_threshold(&params),
            };
            let (tx_alert, tx_quiet, latency) = match protocol {
                ProtocolId::BurnedPenalty | ProtocolId::Lockstep => (n, 0, "constant"),
                ProtocolId::TeeCommitReveal | ProtocolId::NaiveCommitReveal => {
                    (2 * n, 2 * n, "constant")
                }
                ProtocolId::Sequential => (1, 0, "linear"),
            };
            json!({
                "protocol": protocol.name(),
                "suppression_budget": amount_json(&budget),
                "txs_alert_round": tx_alert,
                "txs_quiet_round": tx_quiet,
                "latency": latency,
            })
        })
        .collect();
    json!({
        "n": n,
        "lambda": lambda.trim(),
        "c": c.trim(),
        "ceiling": amount_json(&max_bribery_resistance(&params)),
        "protocols": rows,
    })
    .to_string()
}

/// Backward induction through the slot game: which offer silences
/// which slot, where the first alert lands, and how the round settles.
#[wasm_bindgen]
pub fn slot_walkthrough(lambda: &str, offers: &str, gain: &str) -> String {
    let offer_list: Result<Vec<TokenAmount>, String> = offers
        .split(',')
        .map(|piece| parse_tokens("offer", piece))
        .collect();
    let offer_list = match offer_list {
        Ok(list) => list,
        Err(e) => return err(e),
    };
    let n = offer_list.len();
    let params = match build_params(n, lambda, "0") {
        Ok(p) => p,
        Err(e) => return err(e),
    };
    let gain = match parse_tokens("gain", gain) {
        Ok(g) => g,
        Err(e) => return err(e),
    };
    let schedule = SlotSchedule::identity(n);
    let bribes = BribeVector::by_committee_order(&offer_list, gain.clone());
    let outcome = sequential_spne(&bribes, &schedule, &params);

    let slots: Vec<Value> = (1..=n)
        .map(|slot| {
            let node = schedule.node_at(slot);
            let offer = &offer_list[node.0 as usize];
            let accrued = params.penalty_lambda() * (slot as u64 - 1);
            let played = outcome.alert_slot.map_or(true, |stop| slot <= stop);
            json!({
                "slot": slot,
                "node": node.0,
                "offer": amount_json(offer),
                "alert_value": amount_json(&accrued),
                "alerts_here": accrued.micro() >= offer.micro(),
                "played": played,
                "payoff": outcome.node_payoffs[&node].to_string(),
            })
        })
        .collect();

    json!({
        "n": n,
        "lambda": lambda.trim(),
        "gain": gain.to_string(),
        "guaranteed_suppression_budget":
            amount_json(&sequential_suppression_threshold(&params)),
        "slots": slots,
        "outcome": {
            "suppressed": !outcome.alert_raised(),
            "first_alerter": outcome.first_alerter.map(|id| id.0),
            "alert_slot": outcome.alert_slot,
            "adversary_payoff": outcome.adversary_payoff.to_string(),
            "adversary_payoff_tokens": outcome.adversary_payoff.micro().to_f64()
                .map(|m| m / 1e6),
        },
    })
    .to_string()
}
