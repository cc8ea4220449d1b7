//! Declarative experiment descriptions.
//!
//! An experiment is a TOML file with three sections:
//!
//! ```toml
//! [experiment]
//! protocol = "all"        # or one of: burned-penalty, lockstep, tee, naive, sequential
//! trials = 400            # monte-carlo rounds per grid point
//! seed = 7                # master seed; every trial seed derives from it
//! out = "results.csv"     # optional output path (flags override)
//!
//! [grid]
//! n = [2, 4, 8]           # committee sizes
//! lambda = ["1", "10"]    # penalties, in tokens ("0.5" and "25/3" both work)
//! c = ["0"]               # operator rewards
//! # optional timing knobs, one value each, applied to every point:
//! # delta_write = 2, delta_block = 1, n_commit = 3, n_reveal = 5,
//! # delta_slot = 3, epsilon = "0.000001"
//!
//! [adversary]
//! strategy = "threshold"  # no-bribe | uniform | threshold | sequential-greedy
//!                         # | early-reveal | custom
//! gain = "1000"           # G, the adversary's gain on suppression
//! offer = "5"             # uniform only
//! offers = ["1", "2"]     # custom only, in committee order
//! conditional = false     # pay bribes only if no alert lands
//! budget_cap = "100"      # optional liquidity cap
//! ```
//!
//! Every value is optional; omitted sections fall back to the defaults
//! in [`ExperimentSpec::default_spec`]. Grid points are the cartesian
//! product n × lambda × c, validated eagerly so a bad combination is a
//! config error before anything runs.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use alerting_core::adversary::{AdversaryStrategy, StrategyKind};
use alerting_core::digest::digest_parts;
use alerting_core::money::TokenAmount;
use alerting_core::params::{ProtocolParams, RawParams};
use alerting_core::protocols::ProtocolId;

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    experiment: Option<RawExperiment>,
    grid: Option<RawGrid>,
    adversary: Option<RawAdversary>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    protocol: Option<String>,
    trials: Option<u32>,
    seed: Option<u64>,
    out: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    n: Option<Vec<usize>>,
    lambda: Option<Vec<String>>,
    c: Option<Vec<String>>,
    epsilon: Option<String>,
    delta_write: Option<u64>,
    delta_block: Option<u64>,
    n_commit: Option<u64>,
    n_reveal: Option<u64>,
    delta_slot: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAdversary {
    strategy: Option<String>,
    gain: Option<String>,
    offer: Option<String>,
    offers: Option<Vec<String>>,
    conditional: Option<bool>,
    budget_cap: Option<String>,
}

/// One grid cell: the validated parameters plus the raw coordinates
/// they were built from (kept for labeling output rows).
#[derive(Debug, Clone)]
pub struct GridPoint {
    pub params: ProtocolParams,
}

/// A fully validated experiment: which protocols to run, over which
/// parameter grid, against which adversary, and how many seeded trials.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub protocols: Vec<ProtocolId>,
    pub grid: Vec<GridPoint>,
    pub strategy: AdversaryStrategy,
    pub trials: u32,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

/// Invocation-level overrides (command-line flags beat the file).
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub protocol: Option<String>,
    pub trials: Option<u32>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl ExperimentSpec {
    /// The spec used when no config file is given: every protocol over
    /// a doubling committee-size ladder, against a threshold-bribing
    /// adversary rich enough to afford any of them.
    pub fn default_spec() -> ExperimentSpec {
        let text = r#"
            [experiment]
            protocol = "all"
            trials = 200
            seed = 7

            [grid]
            n = [2, 4, 8, 16, 32]
            lambda = ["1"]
            c = ["0"]

            [adversary]
            strategy = "threshold"
            gain = "1000000"
        "#;
        ExperimentSpec::from_toml(text).expect("built-in default spec is valid")
    }

    /// Parses and validates a TOML experiment description.
    pub fn from_toml(text: &str) -> Result<ExperimentSpec, CliError> {
        let raw: RawFile = toml::from_str(text)
            .map_err(|e| CliError::Config(format!("malformed experiment file: {e}")))?;
        build_spec(raw)
    }

    /// Loads `path` (or the default spec when `None`) and applies flag
    /// overrides.
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<ExperimentSpec, CliError> {
        let mut spec = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    CliError::Config(format!("cannot read config {}: {e}", p.display()))
                })?;
                ExperimentSpec::from_toml(&text)?
            }
            None => ExperimentSpec::default_spec(),
        };
        if let Some(name) = &overrides.protocol {
            let id = parse_protocol(name)?;
            spec.protocols = vec![id];
        }
        if let Some(trials) = overrides.trials {
            spec.trials = trials;
        }
        if let Some(seed) = overrides.seed {
            spec.seed = seed;
        }
        if let Some(out) = &overrides.out {
            spec.out = Some(out.clone());
        }
        if spec.trials == 0 {
            return Err(CliError::Config("trials must be at least 1".into()));
        }
        Ok(spec)
    }

    /// The seed for one trial, derived so that every (grid point,
    /// trial) pair gets an independent, reproducible stream.
    pub fn trial_seed(&self, point: usize, protocol: ProtocolId, trial: u32) -> u64 {
        derive_seed(self.seed, point, protocol, trial)
    }
}

/// Deterministic per-trial seed derivation: hash of the master seed and
/// the trial coordinates, so no two cells share a stream and reruns
/// reproduce byte-identical results.
pub fn derive_seed(master: u64, point: usize, protocol: ProtocolId, trial: u32) -> u64 {
    let digest = digest_parts(&[
        b"experiment-trial-seed",
        &master.to_le_bytes(),
        &(point as u64).to_le_bytes(),
        protocol.name().as_bytes(),
        &trial.to_le_bytes(),
    ]);
    u64::from_le_bytes(digest.as_bytes()[..8].try_into().expect("digest has 8+ bytes"))
}

fn parse_protocol(name: &str) -> Result<ProtocolId, CliError> {
    name.parse::<ProtocolId>().map_err(|_| {
        let known: Vec<&str> = ProtocolId::ALL.iter().map(|p| p.name()).collect();
        CliError::Config(format!(
            "unknown protocol {name:?}; expected \"all\" or one of: {}",
            known.join(", ")
        ))
    })
}

fn parse_amount(field: &str, text: &str) -> Result<TokenAmount, CliError> {
    text.parse::<TokenAmount>()
        .map_err(|e| CliError::Config(format!("{field}: {e}")))
}

fn build_spec(raw: RawFile) -> Result<ExperimentSpec, CliError> {
    let experiment = raw.experiment.unwrap_or_default();
    let grid = raw.grid.unwrap_or_default();
    let adversary = raw.adversary.unwrap_or_default();

    let protocols = match experiment.protocol.as_deref() {
        None | Some("all") => ProtocolId::ALL.to_vec(),
        Some(name) => vec![parse_protocol(name)?],
    };

    let trials = experiment.trials.unwrap_or(200);
    let seed = experiment.seed.unwrap_or(7);
    let out = experiment.out.map(PathBuf::from);

    let ns = grid.n.unwrap_or_else(|| vec![2, 4, 8, 16, 32]);
    let lambdas = grid.lambda.unwrap_or_else(|| vec!["1".to_string()]);
    let cs = grid.c.unwrap_or_else(|| vec!["0".to_string()]);
    if ns.is_empty() || lambdas.is_empty() || cs.is_empty() {
        return Err(CliError::Config("grid lists must not be empty".into()));
    }

    let defaults = RawParams::default();
    let epsilon = match &grid.epsilon {
        Some(text) => parse_amount("grid.epsilon", text)?,
        None => defaults.epsilon.clone(),
    };

    let mut points = Vec::new();
    for &n in &ns {
        for lambda_text in &lambdas {
            let lambda = parse_amount("grid.lambda", lambda_text)?;
            for c_text in &cs {
                let c = parse_amount("grid.c", c_text)?;
                let raw_params = RawParams {
                    n,
                    penalty_lambda: lambda.clone(),
                    operator_cost_c: c,
                    epsilon: epsilon.clone(),
                    delta_write: grid.delta_write.unwrap_or(defaults.delta_write),
                    delta_block: grid.delta_block.unwrap_or(defaults.delta_block),
                    n_commit: grid.n_commit.unwrap_or(defaults.n_commit),
                    n_reveal: grid.n_reveal.unwrap_or(defaults.n_reveal),
                    delta_slot: grid.delta_slot.unwrap_or(defaults.delta_slot),
                };
                let params = raw_params.build().map_err(|e| {
                    CliError::Config(format!(
                        "grid point (n={n}, lambda={lambda_text}, c={c_text}) is invalid: {e}"
                    ))
                })?;
                points.push(GridPoint { params });
            }
        }
    }

    let gain = match &adversary.gain {
        Some(text) => parse_amount("adversary.gain", text)?,
        None => TokenAmount::from_tokens(1_000_000),
    };
    let kind = match adversary.strategy.as_deref() {
        None | Some("threshold") => StrategyKind::ThresholdBribe,
        Some("no-bribe") => StrategyKind::NoBribe,
        Some("uniform") => {
            let offer_text = adversary.offer.as_deref().ok_or_else(|| {
                CliError::Config("adversary.offer is required for the uniform strategy".into())
            })?;
            StrategyKind::UniformBribe(parse_amount("adversary.offer", offer_text)?)
        }
        Some("sequential-greedy") => StrategyKind::SequentialGreedy,
        Some("early-reveal") => StrategyKind::EarlyRevealGreedy,
        Some("custom") => {
            let offers = adversary.offers.as_ref().ok_or_else(|| {
                CliError::Config("adversary.offers is required for the custom strategy".into())
            })?;
            let parsed: Result<Vec<TokenAmount>, CliError> = offers
                .iter()
                .map(|text| parse_amount("adversary.offers", text))
                .collect();
            StrategyKind::Custom(parsed?)
        }
        Some(other) => {
            return Err(CliError::Config(format!(
                "unknown adversary strategy {other:?}; expected one of: no-bribe, uniform, \
                 threshold, sequential-greedy, early-reveal, custom"
            )));
        }
    };
    if let StrategyKind::Custom(offers) = &kind {
        let widest = points.iter().map(|p| p.params.n()).max().unwrap_or(0);
        if offers.len() < widest {
            return Err(CliError::Config(format!(
                "adversary.offers lists {} offers but the widest grid point has n={widest}",
                offers.len()
            )));
        }
    }

    let mut strategy = AdversaryStrategy::new(kind, gain);
    strategy.conditional = adversary.conditional.unwrap_or(false);
    strategy.budget_cap = match &adversary.budget_cap {
        Some(text) => Some(parse_amount("adversary.budget_cap", text)?),
        None => None,
    };

    Ok(ExperimentSpec { protocols, grid: points, strategy, trials, seed, out })
}
