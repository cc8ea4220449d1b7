//! The browser bindings are plain string-to-JSON functions, so the
//! whole surface is testable natively: parse the JSON back and check
//! the numbers against the analytic layer.

use serde_json::Value;

use alerting_demo::{equilibrium_report, protocol_costs, slot_walkthrough};

fn parse(text: &str) -> Value {
    serde_json::from_str(text).expect("binding output is valid JSON")
}

#[test]
fn equilibrium_report_classifies_and_solves_the_interior() {
    let report = parse(&equilibrium_report(3, "1", "0", "1.5"));
    assert!(report.get("error").is_none(), "{report}");
    assert_eq!(report["classification"], "interior");
    assert_eq!(report["alert_dominant_at_or_below"]["exact"], "1");
    assert_eq!(report["no_alert_dominant_at_or_above"]["exact"], "2");
    // Three nodes, no pot: q = β/λ − 1 = 1/2, so the round stays
    // silent with probability 1/8.
    let q = report["mixed_equilibrium"]["silence_probability_q"].as_f64().unwrap();
    assert!((q - 0.5).abs() < 1e-12);
    let round = report["mixed_equilibrium"]["round_suppression_probability"].as_f64().unwrap();
    assert!((round - 0.125).abs() < 1e-12);
    assert_eq!(report["mixed_equilibrium"]["floor_holds"], true);
    assert_eq!(report["suppression_budgets"]["simultaneous"]["exact"], "6");
    assert_eq!(report["suppression_budgets"]["sequential"]["exact"], "3");
}

#[test]
fn equilibrium_report_pins_the_dominant_regions() {
    let low = parse(&equilibrium_report(4, "10", "3", "2"));
    assert_eq!(low["classification"], "alert-dominant");
    let high = parse(&equilibrium_report(4, "10", "3", "50"));
    assert_eq!(high["classification"], "no-alert-dominant");
    assert!(low.get("mixed_equilibrium").is_none(), "no mixing outside the interior");
}

#[test]
fn equilibrium_report_rejects_bad_input_as_json() {
    let report = parse(&equilibrium_report(1, "1", "0", "1"));
    assert!(report["error"].as_str().is_some(), "committee of one must be refused");
    let report = parse(&equilibrium_report(4, "zero", "0", "1"));
    assert!(report["error"].as_str().unwrap().contains("zero"));
}

#[test]
fn protocol_costs_lists_all_five_designs_with_exact_budgets() {
    let table = parse(&protocol_costs(10, "1", "0"));
    let rows = table["protocols"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    let budget = |name: &str| {
        rows.iter()
            .find(|row| row["protocol"] == name)
            .unwrap_or_else(|| panic!("missing {name}"))["suppression_budget"]["exact"]
            .as_str()
            .unwrap()
            .to_owned()
    };
    assert_eq!(budget("lockstep"), "90");
    assert_eq!(budget("tee"), "90");
    assert_eq!(budget("sequential"), "45");
    assert_eq!(budget("burned-penalty"), "10");
    // The ladder budget is λ·n·H_n plus n·ε ≈ 29.29 tokens at n=10.
    let harmonic: f64 = (1..=10).map(|j| 1.0 / j as f64).sum();
    let ladder = rows.iter().find(|row| row["protocol"] == "naive").unwrap()
        ["suppression_budget"]["tokens"]
        .as_f64()
        .unwrap();
    assert!((ladder - 10.0 * harmonic).abs() < 1e-4, "ladder {ladder} vs {}", 10.0 * harmonic);
    assert_eq!(table["ceiling"]["exact"], "100");
}

#[test]
fn slot_walkthrough_narrates_backward_induction() {
    // λ=2: slot s pays 2(s−1) for alerting. Offers below that lose.
    let report = parse(&slot_walkthrough("2", "1, 1, 3, 9", "100"));
    assert!(report.get("error").is_none(), "{report}");
    assert_eq!(report["n"], 4);
    assert_eq!(report["guaranteed_suppression_budget"]["exact"], "12");
    let slots = report["slots"].as_array().unwrap();
    // Slot 1 is worth 0 < 1: silent. Slot 2 is worth 2 ≥ 1: alerts.
    assert_eq!(slots[0]["alerts_here"], false);
    assert_eq!(slots[1]["alerts_here"], true);
    assert_eq!(slots[1]["played"], true);
    assert_eq!(slots[2]["played"], false, "play stops at the first alert");
    assert_eq!(report["outcome"]["suppressed"], false);
    assert_eq!(report["outcome"]["alert_slot"], 2);
    assert_eq!(report["outcome"]["first_alerter"], 1);
    // The adversary paid only slot 1's accepted offer.
    assert_eq!(report["outcome"]["adversary_payoff"], "-1");

    // Offers above every slot value buy full silence.
    let quiet = parse(&slot_walkthrough("2", "7, 7, 7, 7", "100"));
    assert_eq!(quiet["outcome"]["suppressed"], true);
    assert_eq!(quiet["outcome"]["adversary_payoff"], "72", "gain 100 minus 28 in offers");
}

#[test]
fn slot_walkthrough_rejects_malformed_offers() {
    let report = parse(&slot_walkthrough("1", "1, kumquat, 3", "10"));
    assert!(report["error"].as_str().unwrap().contains("kumquat"));
}
