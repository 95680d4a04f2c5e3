//! Conventional max-min fairness: an authority calls [`CmfState::distribute`]
//! once per epoch and the whole allocation happens inside that one call.
//!
//! Demands collected during the epoch sit in the first of two min-heaps. Each
//! outer iteration computes a unit share from the remaining capacity and the
//! number of pending demands, pops every demand in ascending order, grants
//! `min(share, demand)` and pushes the unsatisfied remainder into the other
//! heap. The heaps then swap roles. When capacity runs out the leftover
//! demands are discarded; leftover capacity carries over to the next call.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::heap::{HeapError, HeapNode, MinHeap};
use crate::meter::OpCounts;
use crate::num::Amount;
use crate::UserId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CmfError {
    #[error("empty demand from user {0}")]
    EmptyDemand(UserId),
    #[error("user {0} already demanded this epoch")]
    AlreadyDemanded(UserId),
    #[error("user {0} is not registered")]
    Unregistered(UserId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CmfGrant<T> {
    pub user: UserId,
    pub amount: T,
    /// Capacity left right after this grant.
    pub capacity_after: T,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationReport<T> {
    pub share: T,
    pub grants: Vec<CmfGrant<T>>,
    pub capacity_after: T,
}

/// Everything one `distribute` call did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistributionReport<T> {
    /// Capacity after the epoch injection, before any grant.
    pub opening_capacity: T,
    pub iterations: Vec<IterationReport<T>>,
    /// Total granted per demander in this call; starved demanders map to zero.
    pub allocations: BTreeMap<UserId, T>,
    /// Remaining demand dropped when capacity ran out.
    pub discarded: Vec<HeapNode<T>>,
    pub final_capacity: T,
}

/// One CSV row of a distribution: `epoch,iteration,user,allocated,share,remaining_capacity`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DistributionRow {
    pub epoch: u64,
    pub iteration: usize,
    pub user: u64,
    pub allocated: u128,
    pub share: u128,
    pub remaining_capacity: u128,
}

impl<T: Amount> DistributionReport<T> {
    pub fn shares(&self) -> Vec<T> {
        self.iterations.iter().map(|it| it.share).collect()
    }

    pub fn total_allocated(&self) -> T {
        self.allocations.values().copied().sum()
    }

    /// Flattens the report into CSV rows; iterations are numbered from 1.
    pub fn rows(&self, epoch: u64) -> Vec<DistributionRow> {
        self.iterations
            .iter()
            .enumerate()
            .flat_map(|(k, it)| {
                it.grants.iter().map(move |g| DistributionRow {
                    epoch,
                    iteration: k + 1,
                    user: g.user.0,
                    allocated: g.amount.as_u128(),
                    share: it.share.as_u128(),
                    remaining_capacity: g.capacity_after.as_u128(),
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct CmfState<T> {
    heaps: [MinHeap<T>; 2],
    capacity: T,
    epoch_capacity: T,
    balances: BTreeMap<UserId, T>,
    demanded: BTreeSet<UserId>,
    injected: T,
    ops: OpCounts,
}

impl<T: Amount> CmfState<T> {
    pub fn new(epoch_capacity: T) -> Self {
        Self::with_capacity(epoch_capacity, T::zero())
    }

    /// Starts with `capacity` already in the pool.
    pub fn with_capacity(epoch_capacity: T, capacity: T) -> Self {
        CmfState {
            heaps: [MinHeap::new(), MinHeap::new()],
            capacity,
            epoch_capacity,
            balances: BTreeMap::new(),
            demanded: BTreeSet::new(),
            injected: capacity,
            ops: OpCounts::default(),
        }
    }

    /// Assigns the next sequential id with a zero balance.
    pub fn register(&mut self) -> UserId {
        let id = UserId(self.balances.len() as u64);
        self.balances.insert(id, T::zero());
        self.ops.write(1);
        id
    }

    pub fn capacity(&self) -> T {
        self.capacity
    }

    pub fn epoch_capacity(&self) -> T {
        self.epoch_capacity
    }

    /// Total capacity ever put into the pool.
    pub fn injected(&self) -> T {
        self.injected
    }

    pub fn balance(&self, user: UserId) -> Option<T> {
        self.balances.get(&user).copied()
    }

    pub fn balances(&self) -> &BTreeMap<UserId, T> {
        &self.balances
    }

    pub fn pending(&self) -> &MinHeap<T> {
        &self.heaps[0]
    }

    /// Operation counts since the last call, heap work included.
    pub fn take_ops(&mut self) -> OpCounts {
        let mut ops = std::mem::take(&mut self.ops);
        for heap in &mut self.heaps {
            let stats = heap.take_stats();
            ops.heap_moves += stats.moves;
            ops.arithmetic_ops += stats.compares;
        }
        ops
    }

    pub fn submit_demand(&mut self, user: UserId, amount: T) -> Result<(), CmfError> {
        if !self.balances.contains_key(&user) {
            return Err(CmfError::Unregistered(user));
        }
        if amount.is_zero() {
            return Err(CmfError::EmptyDemand(user));
        }
        self.ops.read(1);
        if self.demanded.contains(&user) {
            return Err(CmfError::AlreadyDemanded(user));
        }
        self.heaps[0]
            .insert(HeapNode::new(amount, user))
            .map_err(|e| match e {
                HeapError::EmptyDemand(u) => CmfError::EmptyDemand(u),
                HeapError::Underflow => unreachable!("insert never underflows"),
            })?;
        self.demanded.insert(user);
        self.ops.write(1);
        Ok(())
    }

    pub fn distribute(&mut self) -> DistributionReport<T> {
        self.ops.read(1);
        self.capacity = self.capacity.saturating_add(self.epoch_capacity);
        self.injected = self.injected.saturating_add(self.epoch_capacity);
        let opening_capacity = self.capacity;

        let mut allocations: BTreeMap<UserId, T> = self
            .heaps
            .iter()
            .flat_map(|h| h.nodes().iter().map(|n| (n.user, T::zero())))
            .collect();
        let mut iterations = Vec::new();
        let mut active = 0;

        while !self.heaps[active].is_empty() && !self.capacity.is_zero() {
            let size = T::from_count(self.heaps[active].size()).unwrap_or_else(T::max_value);
            let share = if self.capacity < size {
                T::one()
            } else {
                self.capacity / size
            };
            self.ops.arith(2);

            let mut grants = Vec::new();
            while !self.capacity.is_zero() {
                let Ok(node) = self.heaps[active].del_min() else {
                    break;
                };
                let amount = share.min(node.demand).min(self.capacity);
                self.capacity = self.capacity - amount;
                let balance = self.balances.entry(node.user).or_insert_with(T::zero);
                *balance = *balance + amount;
                let slot = allocations.entry(node.user).or_insert_with(T::zero);
                *slot = *slot + amount;
                self.ops.read(1);
                self.ops.write(1);
                self.ops.arith(3);

                if node.demand > amount {
                    // Leftover demand is strictly positive, so insert cannot fail.
                    let _ = self.heaps[1 - active]
                        .insert(HeapNode::new(node.demand - amount, node.user));
                }
                grants.push(CmfGrant {
                    user: node.user,
                    amount,
                    capacity_after: self.capacity,
                });
            }
            iterations.push(IterationReport {
                share,
                grants,
                capacity_after: self.capacity,
            });
            active = 1 - active;
        }

        let mut discarded: Vec<_> = self.heaps.iter_mut().flat_map(|h| h.clear()).collect();
        discarded.sort_by_key(|n| n.user);
        self.demanded.clear();
        // capacity plus both heap sizes
        self.ops.write(3);

        DistributionReport {
            opening_capacity,
            iterations,
            allocations,
            discarded,
            final_capacity: self.capacity,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(c: u64, demands: &[u64]) -> CmfState<u64> {
        let mut st = CmfState::new(c);
        for &d in demands {
            let u = st.register();
            st.submit_demand(u, d).unwrap();
        }
        st
    }

    fn grants(it: &IterationReport<u64>) -> Vec<(u64, u64)> {
        it.grants.iter().map(|g| (g.user.0, g.amount)).collect()
    }

    #[test]
    fn submit_examples() {
        let st = setup(30, &[4, 11, 15]);
        let mut held: Vec<_> = st.pending().nodes().iter().map(|n| n.demand).collect();
        held.sort();
        assert_eq!(held, vec![4, 11, 15]);

        let mut st = setup(30, &[4]);
        assert_eq!(
            st.submit_demand(UserId(0), 3),
            Err(CmfError::AlreadyDemanded(UserId(0)))
        );
        let u = st.register();
        assert_eq!(st.submit_demand(u, 0), Err(CmfError::EmptyDemand(u)));
        assert_eq!(
            st.submit_demand(UserId(42), 1),
            Err(CmfError::Unregistered(UserId(42)))
        );
    }

    #[test]
    fn worked_example() {
        let mut st = setup(30, &[4, 11, 15]);
        let r = st.distribute();
        assert_eq!(r.shares(), vec![10, 3, 2]);
        assert_eq!(grants(&r.iterations[0]), vec![(0, 4), (1, 10), (2, 10)]);
        assert_eq!(grants(&r.iterations[1]), vec![(1, 1), (2, 3)]);
        assert_eq!(grants(&r.iterations[2]), vec![(2, 2)]);
        let caps: Vec<_> = r.iterations.iter().map(|i| i.capacity_after).collect();
        assert_eq!(caps, vec![6, 2, 0]);
        assert_eq!(r.final_capacity, 0);
        assert_eq!(
            r.allocations.values().copied().collect::<Vec<_>>(),
            vec![4, 11, 15]
        );
        assert!(r.discarded.is_empty());
    }

    #[test]
    fn all_underdemanders_carry_capacity() {
        let mut st = setup(30, &[5, 5, 5]);
        let r = st.distribute();
        assert_eq!(r.iterations.len(), 1);
        assert_eq!(r.shares(), vec![10]);
        assert!(r.allocations.values().all(|&a| a == 5));
        assert_eq!(r.final_capacity, 15);
        assert_eq!(st.capacity(), 15);
    }

    #[test]
    fn symmetric_depletion() {
        let mut st = setup(15, &[10, 10, 10]);
        let r = st.distribute();
        assert_eq!(r.shares(), vec![5]);
        assert!(r.allocations.values().all(|&a| a == 5));
        assert_eq!(r.final_capacity, 0);
        assert_eq!(r.discarded.len(), 3);
        assert!(r.discarded.iter().all(|n| n.demand == 5));
    }

    #[test]
    fn starvation_serves_lowest_demands_first() {
        // 4 = 1 * 3 + 1: one unit each, then the single leftover unit goes to
        // the smallest remaining demand.
        let mut st = setup(4, &[5, 5, 3]);
        let r = st.distribute();
        assert_eq!(r.shares(), vec![1, 1]);
        assert_eq!(grants(&r.iterations[1]), vec![(2, 1)]);
        assert_eq!(r.final_capacity, 0);
    }

    #[test]
    fn empty_heaps_still_inject() {
        let mut st: CmfState<u64> = CmfState::new(7);
        let r = st.distribute();
        assert!(r.iterations.is_empty());
        assert_eq!(r.final_capacity, 7);
        let r = st.distribute();
        assert_eq!(r.opening_capacity, 14);
    }

    #[test]
    fn rows_are_flat() {
        let mut st = setup(30, &[4, 11, 15]);
        let rows = st.distribute().rows(1);
        assert_eq!(rows.len(), 6);
        assert_eq!(
            rows[5],
            DistributionRow {
                epoch: 1,
                iteration: 3,
                user: 2,
                allocated: 2,
                share: 2,
                remaining_capacity: 0
            }
        );
    }

    #[test]
    fn distribute_clears_demand_guard() {
        let mut st = setup(30, &[4]);
        st.distribute();
        st.submit_demand(UserId(0), 9).unwrap();
    }

    #[test]
    fn ops_are_metered() {
        let mut st = setup(30, &[4, 11, 15]);
        st.take_ops();
        st.distribute();
        let ops = st.take_ops();
        assert!(ops.heap_moves > 0);
        assert_eq!(ops.storage_writes, 6 + 3);
        assert!(st.take_ops().is_empty());
    }
}
