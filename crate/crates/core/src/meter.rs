//! Abstract per-transaction cost accounting.
//!
//! The algorithm modules count primitive operations into an [`OpCounts`]; the
//! simulator prices those counts with a [`CostModel`] to obtain the cost of a
//! transaction and compares it with the block budget.

use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

/// Primitive operation counts accumulated while executing one transaction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OpCounts {
    pub storage_reads: u64,
    pub storage_writes: u64,
    pub heap_moves: u64,
    pub arithmetic_ops: u64,
}

impl OpCounts {
    pub fn read(&mut self, n: u64) {
        self.storage_reads += n;
    }

    pub fn write(&mut self, n: u64) {
        self.storage_writes += n;
    }

    pub fn arith(&mut self, n: u64) {
        self.arithmetic_ops += n;
    }

    pub fn is_empty(&self) -> bool {
        *self == OpCounts::default()
    }
}

impl AddAssign for OpCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.storage_reads += rhs.storage_reads;
        self.storage_writes += rhs.storage_writes;
        self.heap_moves += rhs.heap_moves;
        self.arithmetic_ops += rhs.arithmetic_ops;
    }
}

impl Add for OpCounts {
    type Output = OpCounts;

    fn add(mut self, rhs: Self) -> Self::Output {
        self += rhs;
        self
    }
}

/// Unit prices for each primitive plus the per-block budget.
///
/// The defaults keep the relative magnitudes of a storage-backed contract:
/// writes dominate, reads and heap node moves are comparable, plain
/// arithmetic is cheap, and every transaction pays a fixed base fee.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CostModel {
    pub storage_read: u64,
    pub storage_write: u64,
    pub heap_move: u64,
    pub arithmetic_op: u64,
    pub tx_base: u64,
    pub block_budget: u64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            storage_read: 800,
            storage_write: 5_000,
            heap_move: 800,
            arithmetic_op: 3,
            tx_base: 21_000,
            block_budget: 8_000_000,
        }
    }
}

impl CostModel {
    /// Total cost of a transaction that performed `ops`, saturating at `u64::MAX`.
    pub fn price(&self, ops: &OpCounts) -> u64 {
        [
            (ops.storage_reads, self.storage_read),
            (ops.storage_writes, self.storage_write),
            (ops.heap_moves, self.heap_move),
            (ops.arithmetic_ops, self.arithmetic_op),
        ]
        .iter()
        .fold(self.tx_base, |acc, &(count, unit)| {
            acc.saturating_add(count.saturating_mul(unit))
        })
    }

    pub fn is_over_budget(&self, cost: u64) -> bool {
        cost > self.block_budget
    }

    pub fn is_valid(&self) -> bool {
        self.block_budget > self.tx_base
    }
}
