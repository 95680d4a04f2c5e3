//! Array-backed binary min-heap of `(demand, user)` pairs.
//!
//! Nodes live in a complete binary tree laid out in a vector: the children of
//! index `k` are `2k + 1` and `2k + 2`. Ordering is by demand, ties broken by
//! the lower user id, so draining a heap is fully deterministic.
//!
//! Every node placement and key comparison is counted in [`HeapStats`] so the
//! caller can charge the work to a transaction.

use std::cmp::Ordering;

use thiserror::Error;

use crate::num::Amount;
use crate::UserId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HeapError {
    #[error("empty demand for user {0}")]
    EmptyDemand(UserId),
    #[error("underflow: del_min on an empty heap")]
    Underflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HeapNode<T> {
    pub demand: T,
    pub user: UserId,
}

impl<T: Amount> HeapNode<T> {
    pub fn new(demand: T, user: UserId) -> Self {
        HeapNode { demand, user }
    }

    fn key_cmp(&self, other: &Self) -> Ordering {
        self.demand
            .cmp(&other.demand)
            .then(self.user.cmp(&other.user))
    }
}

/// Work counters since the last [`MinHeap::take_stats`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct HeapStats {
    /// Node writes into the array.
    pub moves: u64,
    /// Key comparisons.
    pub compares: u64,
    /// Tree levels crossed by the most recent sift (up or down).
    pub last_sift_levels: u32,
    /// Largest `last_sift_levels` seen.
    pub max_sift_levels: u32,
}

#[derive(Debug, Clone, Default)]
pub struct MinHeap<T> {
    nodes: Vec<HeapNode<T>>,
    stats: HeapStats,
}

impl<T: Amount> MinHeap<T> {
    pub fn new() -> Self {
        MinHeap {
            nodes: Vec::new(),
            stats: HeapStats::default(),
        }
    }

    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn peek(&self) -> Option<&HeapNode<T>> {
        self.nodes.first()
    }

    /// The backing array in heap layout.
    pub fn nodes(&self) -> &[HeapNode<T>] {
        &self.nodes
    }

    pub fn stats(&self) -> HeapStats {
        self.stats
    }

    /// Returns the counters accumulated so far and resets them.
    pub fn take_stats(&mut self) -> HeapStats {
        std::mem::take(&mut self.stats)
    }

    pub fn insert(&mut self, node: HeapNode<T>) -> Result<(), HeapError> {
        if node.demand.is_zero() {
            return Err(HeapError::EmptyDemand(node.user));
        }
        self.nodes.push(node);
        self.stats.moves += 1;
        let last = self.nodes.len() - 1;
        self.sift_up(last);
        Ok(())
    }

    pub fn del_min(&mut self) -> Result<HeapNode<T>, HeapError> {
        let last = self.nodes.pop().ok_or(HeapError::Underflow)?;
        if self.nodes.is_empty() {
            self.record_levels(0);
            return Ok(last);
        }
        let min = std::mem::replace(&mut self.nodes[0], last);
        self.stats.moves += 1;
        self.sift_down(0);
        Ok(min)
    }

    /// Drops every node, leaving the counters untouched.
    pub fn clear(&mut self) -> Vec<HeapNode<T>> {
        std::mem::take(&mut self.nodes)
    }

    fn sift_up(&mut self, mut k: usize) {
        let node = self.nodes[k];
        let mut levels = 0;
        while k > 0 {
            let parent = (k - 1) / 2;
            self.stats.compares += 1;
            if node.key_cmp(&self.nodes[parent]) != Ordering::Less {
                break;
            }
            self.nodes[k] = self.nodes[parent];
            self.stats.moves += 1;
            k = parent;
            levels += 1;
        }
        if levels > 0 {
            self.nodes[k] = node;
            self.stats.moves += 1;
        }
        self.record_levels(levels);
    }

    fn sift_down(&mut self, mut k: usize) {
        let len = self.nodes.len();
        let node = self.nodes[k];
        let mut levels = 0;
        loop {
            let left = 2 * k + 1;
            if left >= len {
                break;
            }
            let right = left + 1;
            let mut child = left;
            if right < len {
                self.stats.compares += 1;
                if self.nodes[right].key_cmp(&self.nodes[left]) == Ordering::Less {
                    child = right;
                }
            }
            self.stats.compares += 1;
            if self.nodes[child].key_cmp(&node) != Ordering::Less {
                break;
            }
            self.nodes[k] = self.nodes[child];
            self.stats.moves += 1;
            k = child;
            levels += 1;
        }
        if levels > 0 {
            self.nodes[k] = node;
            self.stats.moves += 1;
        }
        self.record_levels(levels);
    }

    fn record_levels(&mut self, levels: u32) {
        self.stats.last_sift_levels = levels;
        self.stats.max_sift_levels = self.stats.max_sift_levels.max(levels);
    }
}

/// `⌈log2(size + 1)⌉`, the height bound of a complete tree holding `size` nodes.
pub fn depth_bound(size: usize) -> u32 {
    let n = size as u64 + 1;
    64 - (n - 1).leading_zeros()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn node(d: u64, u: u64) -> HeapNode<u64> {
        HeapNode::new(d, UserId(u))
    }

    fn heap_ordered(h: &MinHeap<u64>) -> bool {
        let n = h.nodes();
        (1..n.len()).all(|k| n[(k - 1) / 2].key_cmp(&n[k]) != Ordering::Greater)
    }

    #[test]
    fn insert_examples() {
        let mut h = MinHeap::new();
        h.insert(node(5, 0)).unwrap();
        assert_eq!(h.peek().unwrap().demand, 5);

        let mut h = MinHeap::new();
        for (u, d) in [4, 11, 15].into_iter().enumerate() {
            h.insert(node(d, u as u64 + 1)).unwrap();
        }
        assert_eq!(h.peek().unwrap().demand, 4);

        let mut h = MinHeap::new();
        for (u, d) in [7, 3, 9, 1].into_iter().enumerate() {
            h.insert(node(d, u as u64)).unwrap();
        }
        assert_eq!(h.peek().unwrap().demand, 1);
    }

    #[test]
    fn zero_demand_rejected() {
        let mut h = MinHeap::new();
        assert_eq!(h.insert(node(0, 3)), Err(HeapError::EmptyDemand(UserId(3))));
        assert_eq!(h.size(), 0);
    }

    #[test]
    fn del_min_examples() {
        let mut h = MinHeap::new();
        for (d, u) in [(4, 1), (11, 2), (15, 3)] {
            h.insert(node(d, u)).unwrap();
        }
        assert_eq!(h.del_min().unwrap(), node(4, 1));

        let mut h = MinHeap::new();
        h.insert(node(8, 9)).unwrap();
        assert_eq!(h.del_min().unwrap(), node(8, 9));
        assert!(h.is_empty());
        assert_eq!(h.del_min(), Err(HeapError::Underflow));
    }

    #[test]
    fn size_examples() {
        let mut h: MinHeap<u64> = MinHeap::new();
        assert_eq!(h.size(), 0);
        for d in [3, 1, 2] {
            h.insert(node(d, d)).unwrap();
        }
        assert_eq!(h.size(), 3);
        h.del_min().unwrap();
        assert_eq!(h.size(), 2);
    }

    #[test]
    fn ties_go_to_lower_id() {
        let mut h = MinHeap::new();
        for u in [5, 2, 9, 0, 7] {
            h.insert(node(10, u)).unwrap();
        }
        let order: Vec<_> = std::iter::from_fn(|| h.del_min().ok().map(|n| n.user.0)).collect();
        assert_eq!(order, vec![0, 2, 5, 7, 9]);
    }

    #[test]
    fn depth_bound_values() {
        assert_eq!(depth_bound(0), 0);
        assert_eq!(depth_bound(1), 1);
        assert_eq!(depth_bound(2), 2);
        assert_eq!(depth_bound(3), 2);
        assert_eq!(depth_bound(4), 3);
        assert_eq!(depth_bound(7), 3);
        assert_eq!(depth_bound(8), 4);
    }

    proptest! {
        #[test]
        fn drains_sorted(items in prop::collection::vec((1u64..50, 0u64..20), 0..200)) {
            let mut h = MinHeap::new();
            for &(d, u) in &items {
                h.insert(node(d, u)).unwrap();
                prop_assert!(heap_ordered(&h));
            }
            let mut expected: Vec<_> = items.iter().map(|&(d, u)| (d, u)).collect();
            expected.sort();
            let mut drained = Vec::new();
            while let Ok(n) = h.del_min() {
                prop_assert!(heap_ordered(&h));
                drained.push((n.demand, n.user.0));
            }
            prop_assert_eq!(drained, expected);
        }

        #[test]
        fn generic_widths_agree(items in prop::collection::vec(1u32..1000, 1..100)) {
            let mut narrow = MinHeap::<u32>::new();
            let mut wide = MinHeap::<u128>::new();
            for (u, &d) in items.iter().enumerate() {
                narrow.insert(HeapNode::new(d, UserId(u as u64))).unwrap();
                wide.insert(HeapNode::new(d as u128, UserId(u as u64))).unwrap();
            }
            while let Ok(a) = narrow.del_min() {
                let b = wide.del_min().unwrap();
                prop_assert_eq!((a.demand as u128, a.user), (b.demand, b.user));
            }
            prop_assert!(wide.is_empty());
        }
    }
}
