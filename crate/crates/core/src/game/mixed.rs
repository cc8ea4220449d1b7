//! Symmetric mixed equilibrium of the interior regime, plus the
//! expected-bribe lower bound evaluated at any mixed profile.
//!
//! In the interior, a node mixing against `n−1` opponents who each stay
//! silent with probability `q` is indifferent when
//!
//! ```text
//! (λ + c/n) · (1 + q + … + q^{n−1}) = β + λ·q^{n−1}
//! ```
//!
//! which uses `E[1/(1+Y)] = (1 − qⁿ)/(n(1−q))` for the binomial count
//! `Y` of co-alerters. The left side minus the right is strictly
//! increasing in `q` on (0,1) whenever the interior is nonempty, and it
//! changes sign across the interval, so bisection finds the unique
//! root.

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::money::{PayoffAmount, TokenAmount};
use crate::params::ProtocolParams;

use super::dominance::{alert_dominance_threshold, no_alert_dominance_threshold};
use super::{BribeVector, GameError, MixedProfile};

/// Residual of the indifference condition at `q`, in units of `λ`:
/// `(1 + c/(λn))·Σ_{k<n} q^k − β/λ − q^{n−1}`.
fn residual(q: f64, beta_over_lambda: f64, c_over_lambda_n: f64, n: usize) -> f64 {
    let mut geom = 0.0;
    let mut pow = 1.0;
    for _ in 0..n {
        geom += pow;
        pow *= q;
    }
    let q_pow_n1 = q.powi(n as i32 - 1);
    (1.0 + c_over_lambda_n) * geom - beta_over_lambda - q_pow_n1
}

/// Probability of silence at the symmetric mixed equilibrium for a
/// uniform interior bribe. Errors outside the open interior
/// `(λ + c/n, λ(n−1) + c)`.
pub fn symmetric_mixed_q(
    beta_uniform: &TokenAmount,
    params: &ProtocolParams,
) -> Result<f64, GameError> {
    let lower = alert_dominance_threshold(params);
    let upper = no_alert_dominance_threshold(params);
    if beta_uniform <= &lower || beta_uniform >= &upper {
        return Err(GameError::OutsideInteriorRange {
            beta: beta_uniform.clone(),
            lower,
            upper,
        });
    }

    let n = params.n();
    let lambda = params.penalty_lambda().to_f64_tokens();
    let b = beta_uniform.to_f64_tokens() / lambda;
    let g = params.operator_cost_c().to_f64_tokens() / (lambda * n as f64);

    const SHRINK: f64 = 1e-15;
    const TOL: f64 = 1e-14;
    let mut lo = SHRINK;
    let mut hi = 1.0 - SHRINK;
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let r = residual(mid, b, g, n);
        if r.abs() < TOL {
            return Ok(mid);
        }
        if r < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(mid)
}

/// Expected payoff gap `U_Alert − U_NoAlert` at symmetric silence
/// probability `q`, from the closed forms
/// `U_Alert = (λn + c)(1 − qⁿ)/(n(1−q)) − λ` and
/// `U_NoAlert = β − λ + λq^{n−1}`, in tokens.
pub fn indifference_gap_closed_form(
    q: f64,
    beta: &TokenAmount,
    params: &ProtocolParams,
) -> f64 {
    let n = params.n() as f64;
    let lambda = params.penalty_lambda().to_f64_tokens();
    let c = params.operator_cost_c().to_f64_tokens();
    let u_alert = (lambda * n + c) * (1.0 - q.powf(n)) / (n * (1.0 - q)) - lambda;
    let u_noalert = beta.to_f64_tokens() - lambda + lambda * q.powf(n - 1.0);
    u_alert - u_noalert
}

/// The same gap computed the slow independent way: an exact binomial
/// sum over the number of co-alerters, with `q` taken as an exact
/// rational. Returned in micro-tokens.
pub fn indifference_gap_binomial(
    q: &BigRational,
    beta: &TokenAmount,
    params: &ProtocolParams,
) -> BigRational {
    let n = params.n();
    let lambda = params.penalty_lambda().micro();
    let c = params.operator_cost_c().micro();
    let p = BigRational::one() - q;

    let mut u_alert = BigRational::zero();
    let mut u_noalert = BigRational::zero();
    for y in 0..n {
        // y opponents alert alongside (Alert case) or instead of
        // (NoAlert case) the node under study.
        let coeff = BigRational::from_integer(binomial(
            BigInt::from(n as u64 - 1),
            BigInt::from(y as u64),
        ));
        let prob = &coeff
            * num_traits::pow(p.clone(), y)
            * num_traits::pow(q.clone(), n - 1 - y);

        let share = (lambda * BigRational::from_integer(BigInt::from((n - 1 - y) as u64)) + c)
            / BigRational::from_integer(BigInt::from((y + 1) as u64));
        u_alert += &prob * share;

        let silent = if y == 0 {
            beta.micro().clone()
        } else {
            beta.micro() - lambda
        };
        u_noalert += prob * silent;
    }
    u_alert - u_noalert
}

/// Result of evaluating the expected-bribe lower bound at a profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundCheck {
    /// `Σ β_i q_i`: what the adversary pays in expectation.
    pub lhs: TokenAmount,
    /// `(λn(n−1) + nc) · Q`: the floor implied by equilibrium play.
    pub rhs: TokenAmount,
    pub holds: bool,
}

/// Evaluates `Σ β_i q_i ≥ (λn(n−1) + nc)·Q` exactly at `profile`.
pub fn expected_bribe_bound_check(
    bribes: &BribeVector,
    profile: &MixedProfile,
    params: &ProtocolParams,
) -> BoundCheck {
    let lhs_micro: BigRational = profile
        .nodes()
        .map(|id| bribes.offer(id).micro() * profile.q_of(id))
        .sum();
    let n = BigRational::from_integer(BigInt::from(params.n() as u64));
    let n_minus_1 = BigRational::from_integer(BigInt::from(params.n() as u64 - 1));
    let coefficient =
        params.penalty_lambda().micro() * &n * n_minus_1 + params.operator_cost_c().micro() * &n;
    let rhs_micro = coefficient * profile.success_probability();
    let holds = lhs_micro >= rhs_micro;
    BoundCheck {
        lhs: TokenAmount::from_micro_rational(lhs_micro).expect("bribes and q are nonnegative"),
        rhs: TokenAmount::from_micro_rational(rhs_micro).expect("bound terms are nonnegative"),
        holds,
    }
}

/// `G·Q − Σ β_i q_i`: the briber's expected profit at a mixed profile.
pub fn adversary_expected_utility(bribes: &BribeVector, profile: &MixedProfile) -> PayoffAmount {
    let expected_paid: BigRational = profile
        .nodes()
        .map(|id| bribes.offer(id).micro() * profile.q_of(id))
        .sum();
    let expected_gain = bribes.gain_g.micro() * profile.success_probability();
    PayoffAmount::from_micro_rational(expected_gain - expected_paid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::RawParams;
    use crate::NodeId;

    fn params(n: usize, lambda: u64, c: u64) -> ProtocolParams {
        RawParams {
            n,
            penalty_lambda: TokenAmount::from_tokens(lambda),
            operator_cost_c: TokenAmount::from_tokens(c),
            ..RawParams::default()
        }
        .build()
        .unwrap()
    }

    fn tok(s: &str) -> TokenAmount {
        s.parse().unwrap()
    }

    #[test]
    fn three_nodes_reduce_to_beta_minus_lambda() {
        let p = params(3, 1, 0);
        let q = symmetric_mixed_q(&tok("1.5"), &p).unwrap();
        assert!((q - 0.5).abs() < 1e-12, "q = {q}");
        let q = symmetric_mixed_q(&tok("1.25"), &p).unwrap();
        assert!((q - 0.25).abs() < 1e-12, "q = {q}");
    }

    #[test]
    fn outside_interior_is_rejected() {
        let p = params(3, 1, 0);
        assert!(matches!(
            symmetric_mixed_q(&tok("2.5"), &p),
            Err(GameError::OutsideInteriorRange { .. })
        ));
        assert!(matches!(
            symmetric_mixed_q(&tok("1"), &p),
            Err(GameError::OutsideInteriorRange { .. })
        ));
    }

    #[test]
    fn solver_zeroes_both_indifference_routes() {
        for n in [3usize, 4, 6, 10] {
            let p = params(n, 10, 0);
            for num in 1..8u64 {
                // β strides across the interior (10, 10(n−1)).
                let beta_tokens = 10.0 + (10.0 * (n as f64 - 2.0)) * num as f64 / 8.0;
                let beta = TokenAmount::from_micro((beta_tokens * 1e6).round() as u64);
                let q = symmetric_mixed_q(&beta, &p).unwrap();
                let gap = indifference_gap_closed_form(q, &beta, &p);
                assert!(gap.abs() < 1e-9, "n={n} β={beta} gap={gap}");
                let q_rat = BigRational::from_float(q).unwrap();
                let exact_gap = indifference_gap_binomial(&q_rat, &beta, &p);
                let exact_tokens = crate::money::PayoffAmount::from_micro_rational(exact_gap)
                    .to_f64_tokens();
                assert!(exact_tokens.abs() < 1e-9, "n={n} β={beta} exact gap={exact_tokens}");
            }
        }
    }

    #[test]
    fn operator_pot_moves_the_interior() {
        // n = 2 has an empty interior at c = 0 but a real one at c > 0.
        let p = params(2, 10, 4);
        assert!(matches!(
            symmetric_mixed_q(&tok("12"), &p),
            Err(GameError::OutsideInteriorRange { .. })
        ));
        let q = symmetric_mixed_q(&tok("13"), &p).unwrap();
        // Residual for n=2: (1 + c/(2λ))(1+q) − β/λ − q = 0 at
        // q = (β − λ − c/2)/(c/2) = (13 − 10 − 2)/2 = 0.5.
        assert!((q - 0.5).abs() < 1e-12, "q = {q}");
    }

    #[test]
    fn bound_check_examples() {
        let p = params(3, 1, 0);
        let bribes = BribeVector::uniform(3, tok("1.5"), TokenAmount::zero());
        let profile = MixedProfile::uniform_f64(3, 0.5).unwrap();
        let check = expected_bribe_bound_check(&bribes, &profile, &p);
        assert_eq!(check.lhs, tok("2.25"));
        assert_eq!(check.rhs, tok("0.75"));
        assert!(check.holds);

        let all_alert = MixedProfile::uniform_f64(3, 0.0).unwrap();
        let check = expected_bribe_bound_check(&bribes, &all_alert, &p);
        assert_eq!(check.lhs, TokenAmount::zero());
        assert_eq!(check.rhs, TokenAmount::zero());
        assert!(check.holds);

        let upper = BribeVector::uniform(3, tok("2"), TokenAmount::zero());
        let all_silent = MixedProfile::uniform_f64(3, 1.0).unwrap();
        let check = expected_bribe_bound_check(&upper, &all_silent, &p);
        assert_eq!(check.lhs, tok("6"));
        assert_eq!(check.rhs, tok("6"));
        assert!(check.holds);
    }

    #[test]
    fn adversary_utility_examples() {
        let bribes = BribeVector::uniform(3, tok("1.5"), tok("6"));
        let profile = MixedProfile::uniform_f64(3, 0.5).unwrap();
        let u = adversary_expected_utility(&bribes, &profile);
        assert_eq!(u, PayoffAmount::from_micro_int(-1_500_000));

        let no_gain = BribeVector::uniform(3, tok("1.5"), TokenAmount::zero());
        assert!(adversary_expected_utility(&no_gain, &profile).is_negative());

        let no_bribes = BribeVector::empty(tok("6"));
        let u = adversary_expected_utility(&no_bribes, &profile);
        assert!(!u.is_negative());
    }

    #[test]
    fn profile_probabilities_validated() {
        assert!(MixedProfile::uniform_f64(3, 1.5).is_err());
        assert!(MixedProfile::uniform(&NodeId::committee(2), BigRational::one()).is_ok());
    }
}
