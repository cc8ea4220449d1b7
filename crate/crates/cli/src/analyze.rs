//! The closed-form protocol comparison table.
//!
//! Every number in the table is produced by the game-theoretic
//! operations themselves — the table code only labels and formats, so
//! it can never drift from the analysis it reports on.

use alerting_core::adversary::suppression_threshold;
use alerting_core::game::early_reveal_attack_cost;
use alerting_core::money::TokenAmount;
use alerting_core::params::ProtocolParams;
use alerting_core::protocols::ProtocolId;

use crate::config::ExperimentSpec;

/// One table row: a protocol at one parameter point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalyzeRow {
    pub protocol: ProtocolId,
    pub n: usize,
    pub lambda: TokenAmount,
    pub c: TokenAmount,
    /// Minimum total bribe that guarantees the adversary full
    /// suppression (for the plain-hash commit-reveal protocol: the
    /// early-opening attack cost, which is what it actually takes).
    pub bribe_cost: TokenAmount,
    /// Worst-case on-chain transactions when the alert fires.
    pub tx_alert: u64,
    /// Worst-case on-chain transactions in a quiet round.
    pub tx_noalert: u64,
    /// Alert latency as a function of committee size.
    pub latency_class: &'static str,
}

/// The comparison row for one protocol at one parameter point.
pub fn analyze_point(protocol: ProtocolId, params: &ProtocolParams) -> AnalyzeRow {
    let n = params.n() as u64;
    let bribe_cost = match protocol {
        ProtocolId::NaiveCommitReveal => early_reveal_attack_cost(params),
        other => suppression_threshold(other, params),
    };
    let (tx_alert, tx_noalert, latency_class) = match protocol {
        ProtocolId::BurnedPenalty => (n, 0, "constant"),
        ProtocolId::Lockstep => (n, 0, "constant"),
        ProtocolId::TeeCommitReveal => (2 * n, 2 * n, "constant"),
        ProtocolId::NaiveCommitReveal => (2 * n, 2 * n, "constant"),
        ProtocolId::Sequential => (1, 0, "linear"),
    };
    AnalyzeRow {
        protocol,
        n: params.n(),
        lambda: params.penalty_lambda().clone(),
        c: params.operator_cost_c().clone(),
        bribe_cost,
        tx_alert,
        tx_noalert,
        latency_class,
    }
}

/// All rows for the experiment, in deterministic
/// (protocol, grid-declaration) order.
pub fn analyze_rows(spec: &ExperimentSpec) -> Vec<AnalyzeRow> {
    let mut rows = Vec::with_capacity(spec.protocols.len() * spec.grid.len());
    for protocol in &spec.protocols {
        for point in &spec.grid {
            rows.push(analyze_point(*protocol, &point.params));
        }
    }
    rows
}

pub const ANALYZE_HEADER: &str = "protocol,n,lambda,c,bribe_cost,tx_alert,tx_noalert,latency_class";

/// Renders rows as CSV (header + one line per row, trailing newline).
pub fn to_csv(rows: &[AnalyzeRow]) -> String {
    let mut out = String::from(ANALYZE_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            row.protocol.name(),
            row.n,
            row.lambda,
            row.c,
            row.bribe_cost,
            row.tx_alert,
            row.tx_noalert,
            row.latency_class
        ));
    }
    out
}
