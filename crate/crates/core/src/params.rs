//! Validated protocol parameters.
//!
//! `ProtocolParams` can only be obtained through validation, so every
//! consumer may assume the cross-field invariants hold: windows are long
//! enough for worst-case inclusion delay, the reveal window strictly
//! exceeds the commit window, and sequential slots outlast the write
//! delay.

use std::fmt;

use thiserror::Error;

use crate::money::TokenAmount;

/// One violated validation rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamViolation {
    pub field: &'static str,
    pub reason: String,
}

impl fmt::Display for ParamViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.reason)
    }
}

/// Validation failure carrying every violated rule, not just the first.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct InvalidParams {
    pub violations: Vec<ParamViolation>,
}

impl fmt::Display for InvalidParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid parameters: ")?;
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Unvalidated parameter record; `build` (or [`make_params`]) turns it
/// into [`ProtocolParams`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawParams {
    /// Committee size.
    pub n: usize,
    /// Per-node slashing penalty λ (> 0).
    pub penalty_lambda: TokenAmount,
    /// Operator reward pot c added to the alerters' share (≥ 0).
    pub operator_cost_c: TokenAmount,
    /// Worst-case inclusion delay in steps (> 0).
    pub delta_write: u64,
    /// Steps between consecutive blocks (> 0).
    pub delta_block: u64,
    /// Commit-window length in blocks; also the PoP burial depth.
    pub n_commit: u64,
    /// Reveal-window length in blocks (> n_commit).
    pub n_reveal: u64,
    /// Sequential slot length in steps (> delta_write).
    pub delta_slot: u64,
    /// Strictness margin ε for "pay strictly more" bribe constructions.
    pub epsilon: TokenAmount,
}

impl Default for RawParams {
    fn default() -> Self {
        RawParams {
            n: 4,
            penalty_lambda: TokenAmount::from_tokens(10),
            operator_cost_c: TokenAmount::zero(),
            delta_write: 2,
            delta_block: 1,
            n_commit: 3,
            n_reveal: 5,
            delta_slot: 3,
            epsilon: TokenAmount::from_micro(1),
        }
    }
}

impl RawParams {
    pub fn build(self) -> Result<ProtocolParams, InvalidParams> {
        let mut violations = Vec::new();
        let mut flag = |field: &'static str, reason: String| {
            violations.push(ParamViolation { field, reason });
        };

        if self.n < 2 {
            flag("n", format!("committee size must be at least 2, got {}", self.n));
        }
        if self.penalty_lambda.is_zero() {
            flag("penalty_lambda", "penalty must be positive".to_string());
        }
        if self.epsilon.is_zero() {
            flag("epsilon", "strictness margin must be positive".to_string());
        }
        if self.delta_write == 0 {
            flag("delta_write", "write delay must be at least one step".to_string());
        }
        if self.delta_block == 0 {
            flag("delta_block", "block interval must be at least one step".to_string());
        }
        if self.delta_block > 0 {
            let max_delay_blocks = self.delta_write.div_ceil(self.delta_block);
            if self.n_commit < max_delay_blocks {
                flag(
                    "n_commit",
                    format!(
                        "commit window ({} blocks) shorter than worst-case delay ({} blocks)",
                        self.n_commit, max_delay_blocks
                    ),
                );
            }
            if self.n_reveal < max_delay_blocks {
                flag(
                    "n_reveal",
                    format!(
                        "reveal window ({} blocks) shorter than worst-case delay ({} blocks)",
                        self.n_reveal, max_delay_blocks
                    ),
                );
            }
        }
        if self.n_commit >= self.n_reveal {
            flag(
                "n_commit",
                format!(
                    "commit window ({}) must be strictly shorter than reveal window ({})",
                    self.n_commit, self.n_reveal
                ),
            );
        }
        if self.delta_slot <= self.delta_write {
            flag(
                "delta_slot",
                format!(
                    "slot length ({}) must exceed write delay ({})",
                    self.delta_slot, self.delta_write
                ),
            );
        }

        if violations.is_empty() {
            Ok(ProtocolParams { raw: self })
        } else {
            Err(InvalidParams { violations })
        }
    }
}

/// Validates a raw record into usable parameters.
pub fn make_params(raw: RawParams) -> Result<ProtocolParams, InvalidParams> {
    raw.build()
}

/// Validated protocol parameters. Fields are reachable only through
/// accessors so the invariants established at construction stay true.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolParams {
    raw: RawParams,
}

impl ProtocolParams {
    pub fn n(&self) -> usize {
        self.raw.n
    }

    pub fn penalty_lambda(&self) -> &TokenAmount {
        &self.raw.penalty_lambda
    }

    pub fn operator_cost_c(&self) -> &TokenAmount {
        &self.raw.operator_cost_c
    }

    pub fn delta_write(&self) -> u64 {
        self.raw.delta_write
    }

    pub fn delta_block(&self) -> u64 {
        self.raw.delta_block
    }

    pub fn n_commit(&self) -> u64 {
        self.raw.n_commit
    }

    pub fn n_reveal(&self) -> u64 {
        self.raw.n_reveal
    }

    pub fn delta_slot(&self) -> u64 {
        self.raw.delta_slot
    }

    pub fn epsilon(&self) -> &TokenAmount {
        &self.raw.epsilon
    }

    /// Worst-case inclusion delay measured in blocks.
    pub fn max_delay_blocks(&self) -> u64 {
        self.raw.delta_write.div_ceil(self.raw.delta_block)
    }

    /// Copy of the underlying record, for tweaking one field and
    /// re-validating.
    pub fn to_raw(&self) -> RawParams {
        self.raw.clone()
    }
}
