//! Block number to epoch / round / parity arithmetic.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClockError {
    #[error("epoch span and round span must both be positive")]
    ZeroSpan,
    #[error("round span {round_span} exceeds epoch span {epoch_span}")]
    RoundLongerThanEpoch { epoch_span: u64, round_span: u64 },
    #[error("epoch span {epoch_span} is not a multiple of round span {round_span}")]
    NotDivisible { epoch_span: u64, round_span: u64 },
    #[error("pre-deployment block {block} (deployed at {offset})")]
    PreDeployment { block: u64, offset: u64 },
}

/// Deployment offset plus epoch and round lengths, all in blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClockParams {
    offset: u64,
    epoch_span: u64,
    round_span: u64,
}

/// Where a block falls: epoch, round within the epoch, and epoch parity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClockPosition {
    pub epoch: u64,
    pub round: u64,
    pub parity: usize,
}

impl ClockParams {
    pub fn new(offset: u64, epoch_span: u64, round_span: u64) -> Result<Self, ClockError> {
        if epoch_span == 0 || round_span == 0 {
            return Err(ClockError::ZeroSpan);
        }
        if round_span > epoch_span {
            return Err(ClockError::RoundLongerThanEpoch {
                epoch_span,
                round_span,
            });
        }
        if !epoch_span.is_multiple_of(round_span) {
            return Err(ClockError::NotDivisible {
                epoch_span,
                round_span,
            });
        }
        Ok(ClockParams {
            offset,
            epoch_span,
            round_span,
        })
    }

    pub fn offset(&self) -> u64 {
        self.offset
    }

    pub fn epoch_span(&self) -> u64 {
        self.epoch_span
    }

    pub fn round_span(&self) -> u64 {
        self.round_span
    }

    pub fn rounds_per_epoch(&self) -> u64 {
        self.epoch_span / self.round_span
    }

    /// First block of `epoch`.
    pub fn epoch_start(&self, epoch: u64) -> u64 {
        self.offset + epoch * self.epoch_span
    }

    pub fn locate(&self, block: u64) -> Result<ClockPosition, ClockError> {
        let elapsed = block
            .checked_sub(self.offset)
            .ok_or(ClockError::PreDeployment {
                block,
                offset: self.offset,
            })?;
        let epoch = elapsed / self.epoch_span;
        Ok(ClockPosition {
            epoch,
            round: (elapsed % self.epoch_span) / self.round_span,
            parity: (epoch % 2) as usize,
        })
    }
}
