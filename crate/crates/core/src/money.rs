//! Exact token arithmetic.
//!
//! Amounts are exact rationals measured in micro-tokens (1 token =
//! 10^6 micro-tokens). Balances and protocol constants are nonnegative
//! [`TokenAmount`]s; payoffs, which may be negative, are
//! [`PayoffAmount`]s. Contract settlement sticks to whole micro-tokens;
//! analysis may produce non-integer rationals (reward shares, harmonic
//! bribe schedules), which stay exact.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Micro-tokens per whole token.
pub const MICRO_PER_TOKEN: u64 = 1_000_000;

/// Error for amount construction and parsing.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MoneyError {
    #[error("amount must be nonnegative, got {0}")]
    Negative(String),
    #[error("cannot parse {0:?} as a token amount")]
    Parse(String),
}

fn micro_rational(micro: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(micro))
}

/// Exact nonnegative quantity of tokens, held as a rational count of
/// micro-tokens.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TokenAmount(BigRational);

impl TokenAmount {
    pub fn zero() -> Self {
        TokenAmount(BigRational::zero())
    }

    pub fn from_micro(micro: u64) -> Self {
        TokenAmount(micro_rational(micro))
    }

    pub fn from_tokens(tokens: u64) -> Self {
        TokenAmount(micro_rational(tokens) * micro_rational(MICRO_PER_TOKEN))
    }

    /// Wraps an exact micro-token rational; rejects negatives.
    pub fn from_micro_rational(micro: BigRational) -> Result<Self, MoneyError> {
        if micro.is_negative() {
            return Err(MoneyError::Negative(micro.to_string()));
        }
        Ok(TokenAmount(micro))
    }

    /// Exact micro-token value.
    pub fn micro(&self) -> &BigRational {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Whole micro-token value, if the amount is integral at micro
    /// resolution (every contract-path amount must be).
    pub fn whole_micro(&self) -> Option<BigInt> {
        self.0.is_integer().then(|| self.0.to_integer())
    }

    pub fn checked_sub(&self, other: &TokenAmount) -> Option<TokenAmount> {
        (self >= other).then(|| TokenAmount(&self.0 - &other.0))
    }

    /// Saturating subtraction used by reporting paths.
    pub fn saturating_sub(&self, other: &TokenAmount) -> TokenAmount {
        self.checked_sub(other).unwrap_or_else(TokenAmount::zero)
    }

    /// Approximate value in whole tokens (reporting only).
    pub fn to_f64_tokens(&self) -> f64 {
        (&self.0 / micro_rational(MICRO_PER_TOKEN)).to_f64().unwrap_or(f64::NAN)
    }

    /// Exact token-denominated rendering: decimal when the amount is a
    /// whole number of micro-tokens, `p/q` in tokens otherwise.
    pub fn format_tokens(&self) -> String {
        format_token_rational(&self.0)
    }
}

/// Signed exact payoff, also a rational count of micro-tokens.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct PayoffAmount(BigRational);

impl PayoffAmount {
    pub fn zero() -> Self {
        PayoffAmount(BigRational::zero())
    }

    pub fn from_micro_int(micro: i64) -> Self {
        PayoffAmount(BigRational::from_integer(BigInt::from(micro)))
    }

    pub fn from_micro_rational(micro: BigRational) -> Self {
        PayoffAmount(micro)
    }

    pub fn micro(&self) -> &BigRational {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn to_f64_tokens(&self) -> f64 {
        (&self.0 / micro_rational(MICRO_PER_TOKEN)).to_f64().unwrap_or(f64::NAN)
    }

    pub fn format_tokens(&self) -> String {
        format_token_rational(&self.0)
    }
}

impl From<TokenAmount> for PayoffAmount {
    fn from(a: TokenAmount) -> Self {
        PayoffAmount(a.0)
    }
}

impl From<&TokenAmount> for PayoffAmount {
    fn from(a: &TokenAmount) -> Self {
        PayoffAmount(a.0.clone())
    }
}

fn format_token_rational(micro: &BigRational) -> String {
    let tokens = micro / micro_rational(MICRO_PER_TOKEN);
    if micro.is_integer() {
        // Whole micro-tokens: render as a terminating decimal in tokens.
        let sign = if tokens.is_negative() { "-" } else { "" };
        let abs = tokens.abs();
        let whole = abs.trunc().to_integer();
        let frac_micro = ((&abs - abs.trunc()) * micro_rational(MICRO_PER_TOKEN)).to_integer();
        if frac_micro.is_zero() {
            format!("{sign}{whole}")
        } else {
            let frac = format!("{frac_micro:06}");
            format!("{sign}{whole}.{}", frac.trim_end_matches('0'))
        }
    } else {
        format!("{}/{}", tokens.numer(), tokens.denom())
    }
}

/// Parses a token-denominated amount: a decimal (`"30.01"`) or an exact
/// fraction (`"25/3"`), both in whole tokens.
fn parse_token_rational(s: &str) -> Result<BigRational, MoneyError> {
    let s = s.trim();
    let parse = || -> Option<BigRational> {
        if let Some((num, den)) = s.split_once('/') {
            let num = BigInt::from_str(num.trim()).ok()?;
            let den = BigInt::from_str(den.trim()).ok()?;
            if den.is_zero() {
                return None;
            }
            return Some(BigRational::new(num, den));
        }
        let (whole, frac) = match s.split_once('.') {
            Some((w, f)) => (w, f),
            None => (s, ""),
        };
        if frac.chars().any(|c| !c.is_ascii_digit()) {
            return None;
        }
        let whole_int = BigInt::from_str(if whole.is_empty() { "0" } else { whole }).ok()?;
        let negative = whole.trim_start().starts_with('-');
        let mut value = BigRational::from_integer(whole_int);
        if !frac.is_empty() {
            let frac_int = BigInt::from_str(frac).ok()?;
            let scale = BigInt::from(10u32).pow(frac.len() as u32);
            let frac_part = BigRational::new(frac_int, scale);
            value = if negative { value - frac_part } else { value + frac_part };
        }
        Some(value)
    };
    parse().ok_or_else(|| MoneyError::Parse(s.to_string()))
}

impl FromStr for TokenAmount {
    type Err = MoneyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let tokens = parse_token_rational(s)?;
        TokenAmount::from_micro_rational(tokens * micro_rational(MICRO_PER_TOKEN))
    }
}

impl fmt::Display for TokenAmount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.format_tokens())
    }
}

impl fmt::Debug for TokenAmount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TokenAmount({} tokens)", self.format_tokens())
    }
}

impl fmt::Display for PayoffAmount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.format_tokens())
    }
}

impl fmt::Debug for PayoffAmount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PayoffAmount({} tokens)", self.format_tokens())
    }
}

impl Add for TokenAmount {
    type Output = TokenAmount;
    fn add(self, rhs: TokenAmount) -> TokenAmount {
        TokenAmount(self.0 + rhs.0)
    }
}

impl Add<&TokenAmount> for &TokenAmount {
    type Output = TokenAmount;
    fn add(self, rhs: &TokenAmount) -> TokenAmount {
        TokenAmount(&self.0 + &rhs.0)
    }
}

impl AddAssign<&TokenAmount> for TokenAmount {
    fn add_assign(&mut self, rhs: &TokenAmount) {
        self.0 += &rhs.0;
    }
}

impl Mul<u64> for &TokenAmount {
    type Output = TokenAmount;
    fn mul(self, k: u64) -> TokenAmount {
        TokenAmount(&self.0 * micro_rational(k))
    }
}

impl Sum for TokenAmount {
    fn sum<I: Iterator<Item = TokenAmount>>(iter: I) -> TokenAmount {
        iter.fold(TokenAmount::zero(), |acc, x| acc + x)
    }
}

impl Add for PayoffAmount {
    type Output = PayoffAmount;
    fn add(self, rhs: PayoffAmount) -> PayoffAmount {
        PayoffAmount(self.0 + rhs.0)
    }
}

impl Add<&PayoffAmount> for &PayoffAmount {
    type Output = PayoffAmount;
    fn add(self, rhs: &PayoffAmount) -> PayoffAmount {
        PayoffAmount(&self.0 + &rhs.0)
    }
}

impl AddAssign<&PayoffAmount> for PayoffAmount {
    fn add_assign(&mut self, rhs: &PayoffAmount) {
        self.0 += &rhs.0;
    }
}

impl Sub for PayoffAmount {
    type Output = PayoffAmount;
    fn sub(self, rhs: PayoffAmount) -> PayoffAmount {
        PayoffAmount(self.0 - rhs.0)
    }
}

impl SubAssign<&PayoffAmount> for PayoffAmount {
    fn sub_assign(&mut self, rhs: &PayoffAmount) {
        self.0 -= &rhs.0;
    }
}

impl Neg for PayoffAmount {
    type Output = PayoffAmount;
    fn neg(self) -> PayoffAmount {
        PayoffAmount(-self.0)
    }
}

impl Sum for PayoffAmount {
    fn sum<I: Iterator<Item = PayoffAmount>>(iter: I) -> PayoffAmount {
        iter.fold(PayoffAmount::zero(), |acc, x| acc + x)
    }
}
