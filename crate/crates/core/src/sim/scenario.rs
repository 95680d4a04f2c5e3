//! Declarative experiment description and its validation.
//!
//! Parameters left out of a scenario file follow the number of users the way
//! the reference experiments were set up: epoch capacity `20n`, epoch span
//! `4n` blocks, round span `n` blocks, demands drawn from `[10, 30)`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::{ClockError, ClockParams};
use crate::faucet::{PolicyError, WeightPolicy};
use crate::meter::CostModel;
use crate::sim::rng::RangeError;
use crate::Units;

pub const DEFAULT_PRECISION: u64 = 1_000_000_000;
pub const DEFAULT_DEMAND_LO: u64 = 10;
pub const DEFAULT_DEMAND_HI: u64 = 30;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed scenario: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("scenario needs at least one user")]
    NoUsers,
    #[error("epoch capacity must be positive")]
    ZeroCapacity,
    #[error(transparent)]
    Clock(#[from] ClockError),
    #[error("round span {round_span} cannot fit one transaction per user for {n} users")]
    RoundTooShort { n: u64, round_span: u64 },
    #[error("an epoch needs at least one claim round and one demand round, got {0} round(s)")]
    TooFewRounds(u64),
    #[error(transparent)]
    Range(#[from] RangeError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("precision {precision} must exceed the largest lifetime demand {lifetime}")]
    PrecisionTooSmall { precision: u64, lifetime: u64 },
    #[error("capacity {capacity} times precision {precision} overflows the amount type")]
    ShareOverflow { capacity: u64, precision: u64 },
    #[error("block budget {budget} does not cover the base transaction cost {base}")]
    BudgetBelowBase { budget: u64, base: u64 },
    #[error("scripted demands cover {got} epochs but the scenario runs {epochs}")]
    ScriptTooLong { got: usize, epochs: u64 },
    #[error("scripted demands for epoch {epoch} list {got} users, expected {n}")]
    ScriptWidth { epoch: usize, got: usize, n: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "CMF")]
    Cmf,
    #[serde(rename = "AMF")]
    Amf,
    #[serde(rename = "WAMF")]
    Wamf,
}

impl Variant {
    pub fn is_autonomous(self) -> bool {
        !matches!(self, Variant::Cmf)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Cmf => "CMF",
            Variant::Amf => "AMF",
            Variant::Wamf => "WAMF",
        })
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "CMF" => Ok(Variant::Cmf),
            "AMF" => Ok(Variant::Amf),
            "WAMF" => Ok(Variant::Wamf),
            other => Err(format!("unknown variant {other:?}")),
        }
    }
}

/// Scenario file contents. Optional spans and capacity scale with `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub variant: Variant,
    pub n: u64,
    pub epochs: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epoch_capacity: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epoch_span: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub round_span: Option<u64>,
    #[serde(default = "default_lo")]
    pub demand_lo: u64,
    #[serde(default = "default_hi")]
    pub demand_hi: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_precision")]
    pub precision: u64,
    #[serde(default)]
    pub cost_model: CostModel,
    /// Deployment block.
    #[serde(default)]
    pub offset: u64,
    /// Per demand window, per user amount; `0` means the user skips. Windows
    /// past the end of the list have no demands. Overrides the generator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scripted_demands: Option<Vec<Vec<u64>>>,
}

fn default_lo() -> u64 {
    DEFAULT_DEMAND_LO
}

fn default_hi() -> u64 {
    DEFAULT_DEMAND_HI
}

fn default_precision() -> u64 {
    DEFAULT_PRECISION
}

/// A validated scenario with every derived parameter filled in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    pub variant: Variant,
    pub n: u64,
    pub epochs: u64,
    pub epoch_capacity: Units,
    pub clock: ClockParams,
    pub claim_rounds: u64,
    pub demand_lo: u64,
    pub demand_hi: u64,
    pub seed: u64,
    pub policy: WeightPolicy<Units>,
    pub cost_model: CostModel,
    pub scripted_demands: Option<Vec<Vec<u64>>>,
}

impl Scenario {
    /// Reference parameters for `n` users.
    pub fn standard(variant: Variant, n: u64, epochs: u64, seed: u64) -> Self {
        Scenario {
            variant,
            n,
            epochs,
            epoch_capacity: None,
            epoch_span: None,
            round_span: None,
            demand_lo: DEFAULT_DEMAND_LO,
            demand_hi: DEFAULT_DEMAND_HI,
            seed,
            precision: DEFAULT_PRECISION,
            cost_model: CostModel::default(),
            offset: 0,
            scripted_demands: None,
        }
    }

    /// Three users sharing 30 units per epoch with the demand sequence of the
    /// worked autonomous example: five epochs, four of them with demands.
    pub fn amf_table() -> Self {
        Scenario {
            epoch_capacity: Some(30),
            scripted_demands: Some(vec![
                vec![4, 11, 15],
                vec![11, 3, 8],
                vec![7, 8, 12],
                vec![17, 13, 5],
            ]),
            ..Scenario::standard(Variant::Amf, 3, 5, 0)
        }
    }

    /// Three users demanding 4, 11 and 15 out of 30 units, distributed once.
    pub fn cmf_table() -> Self {
        Scenario {
            epoch_capacity: Some(30),
            scripted_demands: Some(vec![vec![4, 11, 15]]),
            ..Scenario::standard(Variant::Cmf, 3, 2, 0)
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Same scenario for a different user count; unset spans and capacity
    /// rescale with it.
    pub fn with_n(&self, n: u64) -> Self {
        Scenario { n, ..self.clone() }
    }

    pub fn with_variant(&self, variant: Variant) -> Self {
        Scenario {
            variant,
            ..self.clone()
        }
    }

    pub fn plan(&self) -> Result<Plan, ScenarioError> {
        let n = self.n;
        if n == 0 {
            return Err(ScenarioError::NoUsers);
        }
        let epoch_capacity = self.epoch_capacity.unwrap_or(20 * n);
        if epoch_capacity == 0 {
            return Err(ScenarioError::ZeroCapacity);
        }
        let round_span = self.round_span.unwrap_or(n);
        let epoch_span = self.epoch_span.unwrap_or(4 * n);
        let clock = ClockParams::new(self.offset, epoch_span, round_span)?;
        if round_span < n {
            return Err(ScenarioError::RoundTooShort { n, round_span });
        }
        let rounds = clock.rounds_per_epoch();
        if rounds < 2 {
            return Err(ScenarioError::TooFewRounds(rounds));
        }
        crate::sim::rng::next_demand(self.seed, self.demand_lo, self.demand_hi)?;
        if !self.cost_model.is_valid() {
            return Err(ScenarioError::BudgetBelowBase {
                budget: self.cost_model.block_budget,
                base: self.cost_model.tx_base,
            });
        }

        let lifetime = match &self.scripted_demands {
            Some(script) => {
                if script.len() as u64 > self.epochs {
                    return Err(ScenarioError::ScriptTooLong {
                        got: script.len(),
                        epochs: self.epochs,
                    });
                }
                if let Some((epoch, row)) =
                    script.iter().enumerate().find(|(_, r)| r.len() as u64 != n)
                {
                    return Err(ScenarioError::ScriptWidth {
                        epoch,
                        got: row.len(),
                        n,
                    });
                }
                (0..n as usize)
                    .map(|u| script.iter().map(|row| row[u]).sum::<u64>())
                    .max()
                    .unwrap_or(0)
            }
            None => (self.demand_hi - 1).saturating_mul(self.epochs),
        };

        let policy = match self.variant {
            Variant::Wamf => {
                let policy = WeightPolicy::reciprocal(self.precision)?;
                if self.precision <= lifetime {
                    return Err(ScenarioError::PrecisionTooSmall {
                        precision: self.precision,
                        lifetime,
                    });
                }
                let peak = epoch_capacity.saturating_mul(self.epochs.max(1));
                if peak.checked_mul(self.precision).is_none() {
                    return Err(ScenarioError::ShareOverflow {
                        capacity: peak,
                        precision: self.precision,
                    });
                }
                policy
            }
            _ => WeightPolicy::unweighted(),
        };

        Ok(Plan {
            variant: self.variant,
            n,
            epochs: self.epochs,
            epoch_capacity,
            clock,
            claim_rounds: rounds - 1,
            demand_lo: self.demand_lo,
            demand_hi: self.demand_hi,
            seed: self.seed,
            policy,
            cost_model: self.cost_model,
            scripted_demands: self.scripted_demands.clone(),
        })
    }
}
