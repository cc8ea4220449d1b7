//! Closed-form bribery-resistance bounds.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::money::TokenAmount;
use crate::params::ProtocolParams;

use super::GameError;

fn big(v: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn nonneg(micro: BigRational) -> TokenAmount {
    TokenAmount::from_micro_rational(micro).expect("bound formulas are nonnegative")
}

/// Ceiling on any protocol's bribery resistance with this committee:
/// `λn² + cn` (buy the whole stake plus the whole reward budget).
pub fn max_bribery_resistance(params: &ProtocolParams) -> TokenAmount {
    let n = big(params.n() as u64);
    nonneg(params.penalty_lambda().micro() * &n * &n + params.operator_cost_c().micro() * &n)
}

/// Budget that defeats the burn-all-penalties design: `n(c + λ)`.
pub fn burned_penalty_resistance(params: &ProtocolParams) -> TokenAmount {
    let n = big(params.n() as u64);
    nonneg((params.operator_cost_c().micro() + params.penalty_lambda().micro()) * n)
}

/// Cheapest full suppression of the simultaneous game:
/// `λn(n−1) + nc` (every node bought out of weak dominance).
pub fn simultaneous_suppression_threshold(params: &ProtocolParams) -> TokenAmount {
    let n = big(params.n() as u64);
    let n_minus_1 = big(params.n() as u64 - 1);
    nonneg(
        params.penalty_lambda().micro() * &n * n_minus_1
            + params.operator_cost_c().micro() * &n,
    )
}

/// Gain below which slot-based play cannot be fully suppressed:
/// `λ·n(n−1)/2` (sum of the per-slot alerting rewards).
pub fn sequential_suppression_threshold(params: &ProtocolParams) -> TokenAmount {
    let n = params.n() as u64;
    nonneg(params.penalty_lambda().micro() * big(n * (n - 1)) / big(2))
}

/// Minimal total bribe that keeps the first `m` slots silent:
/// `λ·m(m−1)/2`.
pub fn sequential_delay_cost(m: usize, params: &ProtocolParams) -> Result<TokenAmount, GameError> {
    if m < 1 || m > params.n() {
        return Err(GameError::SlotOutOfRange { m, n: params.n() });
    }
    let m = m as u64;
    Ok(nonneg(params.penalty_lambda().micro() * big(m * (m - 1)) / big(2)))
}

/// Per-node bribes that defeat a commit–reveal scheme whose openings
/// leak early: bribing in reveal order, the i-th node to open is paid
/// `λ(i−1)/(n−i+1) + λ + ε` (its conditional loss if it stays in plus
/// the strictness margin).
pub fn early_reveal_bribe_schedule(
    lambda: &TokenAmount,
    n: usize,
    epsilon: &TokenAmount,
) -> Vec<TokenAmount> {
    (1..=n as u64)
        .map(|i| {
            let ratio = lambda.micro() * big(i - 1) / big(n as u64 - i + 1);
            nonneg(ratio + lambda.micro() + epsilon.micro())
        })
        .collect()
}

/// Total cost of the early-reveal bribery script:
/// `Σ_{i=1..n} (λ(i−1)/(n−i+1) + λ + ε)`, which grows as `Θ(n log n)`.
pub fn early_reveal_attack_cost(params: &ProtocolParams) -> TokenAmount {
    early_reveal_bribe_schedule(params.penalty_lambda(), params.n(), params.epsilon())
        .into_iter()
        .sum()
}
