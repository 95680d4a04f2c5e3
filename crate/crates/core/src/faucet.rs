//! Autonomous max-min fairness (AMF) and its weighted variant (WAMF).
//!
//! There is no distributing authority. Users register a demand during epoch
//! `E` and claim against it during the claim rounds of epoch `E + 1`. Every
//! call first brings the epoch / round counters up to date from the block
//! number; an epoch change injects the epoch capacity, and every epoch or round
//! change recomputes the unit share from the remaining capacity and the total
//! weight of still-unsatisfied demands. A round therefore plays the part of one
//! outer iteration of the conventional algorithm, with the users themselves
//! executing the inner loop.
//!
//! Per-user demand storage is double-buffered by epoch parity so that a new
//! demand for the next epoch never overwrites the one currently being claimed.
//!
//! Weights are fixed point: `w = ⌊p / dt⌋` where `dt` is the user's lifetime
//! demand volume and `p` the precision. The unweighted variant uses `w = 1`.
//! The weight in force when a demand is registered is kept alongside the
//! demand and used for every later adjustment of the weight total, so the
//! total stays consistent even when the user demands again mid-epoch.

use std::collections::BTreeMap;

use log::debug;
use thiserror::Error;

use crate::clock::{ClockError, ClockParams};
use crate::meter::OpCounts;
use crate::num::Amount;
use crate::UserId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolicyError {
    #[error("precision {0} is not a positive power of ten")]
    InvalidPrecision(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightMode {
    Unweighted,
    ReciprocalCumulativeDemand,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeightPolicy<T> {
    mode: WeightMode,
    precision: T,
}

/// `⌊precision / cumulative⌋`, zero when `cumulative` is zero.
pub fn fixed_point_weight<T: Amount>(precision: T, cumulative: T) -> T {
    precision.checked_div(&cumulative).unwrap_or_else(T::zero)
}

impl<T: Amount> WeightPolicy<T> {
    pub fn unweighted() -> Self {
        WeightPolicy {
            mode: WeightMode::Unweighted,
            precision: T::one(),
        }
    }

    /// Reciprocal-of-lifetime-demand weights at the given decimal precision.
    pub fn reciprocal(precision: T) -> Result<Self, PolicyError> {
        let ten = T::from_count(10).expect("every unsigned primitive holds 10");
        let mut p = precision;
        while !p.is_zero() && (p % ten).is_zero() {
            p = p / ten;
        }
        if precision < ten || p != T::one() {
            return Err(PolicyError::InvalidPrecision(precision.to_string()));
        }
        Ok(WeightPolicy {
            mode: WeightMode::ReciprocalCumulativeDemand,
            precision,
        })
    }

    pub fn mode(&self) -> WeightMode {
        self.mode
    }

    pub fn precision(&self) -> T {
        self.precision
    }

    pub fn is_weighted(&self) -> bool {
        self.mode == WeightMode::ReciprocalCumulativeDemand
    }

    pub fn weight_for(&self, cumulative: T) -> T {
        match self.mode {
            WeightMode::Unweighted => T::one(),
            WeightMode::ReciprocalCumulativeDemand => {
                fixed_point_weight(self.precision, cumulative)
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UserAccount<T> {
    balance: T,
    demand: [T; 2],
    demand_epoch: [Option<u64>; 2],
    claim_epoch: Option<u64>,
    claim_round: Option<u64>,
    cumulative_demand: T,
    snapshot_weight: [T; 2],
}

impl<T: Amount> UserAccount<T> {
    pub fn balance(&self) -> T {
        self.balance
    }

    /// Outstanding demand in the given parity slot.
    pub fn demand(&self, parity: usize) -> T {
        self.demand[parity]
    }

    pub fn demand_epoch(&self, parity: usize) -> Option<u64> {
        self.demand_epoch[parity]
    }

    pub fn claim_epoch(&self) -> Option<u64> {
        self.claim_epoch
    }

    pub fn claim_round(&self) -> Option<u64> {
        self.claim_round
    }

    pub fn cumulative_demand(&self) -> T {
        self.cumulative_demand
    }

    pub fn snapshot_weight(&self, parity: usize) -> T {
        self.snapshot_weight[parity]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateUpdate {
    NewEpoch,
    NewRound,
    Unchanged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DemandRejection {
    EmptyDemand,
    Unregistered,
    AlreadyDemanded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DemandOutcome<T> {
    Accepted { weight: T, parity: usize },
    Rejected(DemandRejection),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClaimNoOp {
    Unregistered,
    /// No demand from the previous epoch in the claim slot.
    StaleDemand,
    NoCapacity,
    NothingOwed,
    AlreadyClaimedThisRound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grant<T> {
    pub amount: T,
    /// The user share before clamping by demand and capacity.
    pub user_share: T,
    /// The computed share was zero and was raised to one unit.
    pub floor_guard: bool,
    /// The demand is now fully served.
    pub satisfied: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClaimOutcome<T> {
    Granted(Grant<T>),
    NoOp(ClaimNoOp),
}

impl<T: Amount> ClaimOutcome<T> {
    pub fn granted(&self) -> T {
        match self {
            ClaimOutcome::Granted(g) => g.amount,
            ClaimOutcome::NoOp(_) => T::zero(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FaucetState<T> {
    clock: ClockParams,
    policy: WeightPolicy<T>,
    epoch_capacity: T,
    capacity: T,
    epoch: u64,
    round: u64,
    share: T,
    weight_totals: [T; 2],
    reset_epoch: Option<u64>,
    // Capacity and weight total the current share was computed from.
    round_capacity: T,
    round_weight: T,
    opening_capacity: T,
    injected: T,
    users: Vec<UserAccount<T>>,
    ops: OpCounts,
}

impl<T: Amount> FaucetState<T> {
    /// A faucet deployed at `clock.offset()` with an empty pool.
    pub fn new(clock: ClockParams, epoch_capacity: T, policy: WeightPolicy<T>) -> Self {
        FaucetState {
            clock,
            policy,
            epoch_capacity,
            capacity: T::zero(),
            epoch: 0,
            round: 0,
            share: T::zero(),
            weight_totals: [T::zero(); 2],
            reset_epoch: None,
            round_capacity: T::zero(),
            round_weight: T::zero(),
            opening_capacity: T::zero(),
            injected: T::zero(),
            users: Vec::new(),
            ops: OpCounts::default(),
        }
    }

    pub fn clock(&self) -> &ClockParams {
        &self.clock
    }

    pub fn policy(&self) -> &WeightPolicy<T> {
        &self.policy
    }

    pub fn capacity(&self) -> T {
        self.capacity
    }

    pub fn epoch_capacity(&self) -> T {
        self.epoch_capacity
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    /// Current unit share; p-scaled under the weighted policy.
    pub fn share(&self) -> T {
        self.share
    }

    pub fn weight_total(&self, parity: usize) -> T {
        self.weight_totals[parity]
    }

    pub fn reset_epoch(&self) -> Option<u64> {
        self.reset_epoch
    }

    /// Capacity right after the most recent epoch injection.
    pub fn opening_capacity(&self) -> T {
        self.opening_capacity
    }

    /// Sum of all epoch injections so far.
    pub fn injected(&self) -> T {
        self.injected
    }

    pub fn user(&self, user: UserId) -> Option<&UserAccount<T>> {
        self.users.get(user.0 as usize)
    }

    pub fn users(&self) -> impl Iterator<Item = (UserId, &UserAccount<T>)> {
        self.users
            .iter()
            .enumerate()
            .map(|(k, acc)| (UserId(k as u64), acc))
    }

    pub fn final_balances(&self) -> BTreeMap<UserId, T> {
        self.users().map(|(id, acc)| (id, acc.balance)).collect()
    }

    pub fn take_ops(&mut self) -> OpCounts {
        std::mem::take(&mut self.ops)
    }

    /// Adds a zero-initialised account and returns its id.
    pub fn register(&mut self) -> UserId {
        self.users.push(UserAccount::default());
        self.ops.write(1);
        UserId(self.users.len() as u64 - 1)
    }

    pub fn update_state(&mut self, block: u64) -> Result<StateUpdate, ClockError> {
        let pos = self.clock.locate(block)?;
        self.ops.read(1);
        self.ops.arith(4);

        if self.epoch < pos.epoch {
            // Nobody demanded during the previous epoch: the claim-side total
            // still holds weights from an expired window.
            self.ops.read(1);
            if self.reset_epoch != Some(pos.epoch - 1) {
                self.weight_totals[pos.parity] = T::zero();
                self.ops.write(1);
            }
            self.epoch = pos.epoch;
            self.round = pos.round;
            self.capacity = self.capacity.saturating_add(self.epoch_capacity);
            self.injected = self.injected.saturating_add(self.epoch_capacity);
            self.opening_capacity = self.capacity;
            self.recompute_share(pos.parity);
            self.ops.write(4);
            return Ok(StateUpdate::NewEpoch);
        }

        self.ops.read(1);
        if self.epoch == pos.epoch && self.round < pos.round {
            self.round = pos.round;
            self.recompute_share(pos.parity);
            self.ops.write(2);
            return Ok(StateUpdate::NewRound);
        }
        Ok(StateUpdate::Unchanged)
    }

    fn recompute_share(&mut self, parity: usize) {
        self.ops.read(2);
        self.ops.arith(2);
        let total = self.weight_totals[parity];
        self.round_capacity = self.capacity;
        self.round_weight = total;
        self.share = if total.is_zero() {
            T::zero()
        } else {
            self.capacity
                .mul_div_floor(self.policy.precision, total)
                .unwrap_or_else(T::max_value)
        };
    }

    /// `⌊c·w / W⌋` over the capacity and weight total of the current round.
    ///
    /// Equals `⌊s·w / p⌋` whenever the p-scaled unit share `s` is exact, and
    /// never loses the extra unit that the double floor can drop.
    fn user_share(&self, weight: T) -> T {
        self.round_capacity
            .mul_div_floor(weight, self.round_weight)
            .unwrap_or_else(|| {
                if self.round_weight.is_zero() {
                    T::zero()
                } else {
                    T::max_value()
                }
            })
    }

    pub fn demand(
        &mut self,
        user: UserId,
        amount: T,
        block: u64,
    ) -> Result<DemandOutcome<T>, ClockError> {
        let idx = user.0 as usize;
        if idx >= self.users.len() {
            return Ok(DemandOutcome::Rejected(DemandRejection::Unregistered));
        }
        if amount.is_zero() {
            return Ok(DemandOutcome::Rejected(DemandRejection::EmptyDemand));
        }
        self.update_state(block)?;
        let epoch = self.epoch;
        let slot = ((epoch + 1) % 2) as usize;
        let weighted = self.policy.is_weighted();

        self.ops.read(1);
        if self.users[idx].demand_epoch[slot] == Some(epoch) {
            return Ok(DemandOutcome::Rejected(DemandRejection::AlreadyDemanded));
        }

        let acc = &mut self.users[idx];
        acc.cumulative_demand = acc.cumulative_demand.saturating_add(amount);
        let weight = self.policy.weight_for(acc.cumulative_demand);
        acc.demand[slot] = amount;
        acc.demand_epoch[slot] = Some(epoch);
        acc.snapshot_weight[slot] = weight;
        self.ops.write(2);
        if weighted {
            // cumulative demand and snapshot weight live in storage
            self.ops.read(1);
            self.ops.write(2);
            self.ops.arith(2);
        }

        self.ops.read(1);
        if self.reset_epoch.is_none_or(|re| re < epoch) {
            self.weight_totals[slot] = weight;
            self.reset_epoch = Some(epoch);
            self.ops.write(2);
        } else {
            self.weight_totals[slot] = self.weight_totals[slot].saturating_add(weight);
            self.ops.read(1);
            self.ops.write(1);
        }
        Ok(DemandOutcome::Accepted {
            weight,
            parity: slot,
        })
    }

    pub fn claim(&mut self, user: UserId, block: u64) -> Result<ClaimOutcome<T>, ClockError> {
        let idx = user.0 as usize;
        if idx >= self.users.len() {
            return Ok(ClaimOutcome::NoOp(ClaimNoOp::Unregistered));
        }
        self.update_state(block)?;
        let (epoch, round) = (self.epoch, self.round);
        let slot = (epoch % 2) as usize;

        let acc = self.users[idx].clone();
        self.ops.read(1);
        if epoch.checked_sub(1).is_none() || acc.demand_epoch[slot] != Some(epoch - 1) {
            return Ok(ClaimOutcome::NoOp(ClaimNoOp::StaleDemand));
        }
        self.ops.read(1);
        if self.capacity.is_zero() {
            return Ok(ClaimOutcome::NoOp(ClaimNoOp::NoCapacity));
        }
        self.ops.read(1);
        if acc.demand[slot].is_zero() {
            return Ok(ClaimOutcome::NoOp(ClaimNoOp::NothingOwed));
        }
        self.ops.read(1);
        if acc.claim_epoch == Some(epoch) {
            self.ops.read(1);
            if acc.claim_round == Some(round) {
                return Ok(ClaimOutcome::NoOp(ClaimNoOp::AlreadyClaimedThisRound));
            }
        } else {
            self.ops.write(1);
        }

        let weight = acc.snapshot_weight[slot];
        let mut user_share = self.user_share(weight);
        if self.policy.is_weighted() {
            self.ops.read(1);
            self.ops.arith(2);
        }
        let floor_guard = user_share.is_zero();
        if floor_guard {
            debug!("floor guard: user {user} epoch {epoch} round {round} share raised from 0 to 1");
            user_share = T::one();
        }

        let acc = &mut self.users[idx];
        let amount = acc.demand[slot].min(user_share).min(self.capacity);
        acc.claim_epoch = Some(epoch);
        acc.claim_round = Some(round);
        acc.balance = acc.balance + amount;
        acc.demand[slot] = acc.demand[slot] - amount;
        self.capacity = self.capacity - amount;
        let satisfied = acc.demand[slot].is_zero();
        self.ops.write(1);
        self.ops.read(1);
        self.ops.write(3);
        self.ops.arith(3);
        if satisfied {
            self.weight_totals[slot] = self.weight_totals[slot].saturating_sub(weight);
            self.ops.read(1);
            self.ops.write(1);
        }
        Ok(ClaimOutcome::Granted(Grant {
            amount,
            user_share,
            floor_guard,
            satisfied,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Deployment at block 0; epochs of 12 blocks split into 4 rounds of 3.
    fn amf(capacity: u64, users: usize) -> FaucetState<u64> {
        let clock = ClockParams::new(0, 12, 3).unwrap();
        let mut st = FaucetState::new(clock, capacity, WeightPolicy::unweighted());
        for _ in 0..users {
            st.register();
        }
        st
    }

    fn block(epoch: u64, round: u64) -> u64 {
        epoch * 12 + round * 3
    }

    fn demand_all(st: &mut FaucetState<u64>, epoch: u64, amounts: &[u64]) {
        for (u, &a) in amounts.iter().enumerate() {
            let out = st.demand(UserId(u as u64), a, block(epoch, 3)).unwrap();
            assert!(matches!(out, DemandOutcome::Accepted { .. }));
        }
    }

    fn claim_all(st: &mut FaucetState<u64>, epoch: u64, round: u64) -> Vec<u64> {
        (0..st.users.len())
            .map(|u| {
                st.claim(UserId(u as u64), block(epoch, round))
                    .unwrap()
                    .granted()
            })
            .collect()
    }

    #[test]
    fn epoch_update_injects_and_sets_share() {
        let mut st = amf(30, 3);
        demand_all(&mut st, 0, &[4, 11, 15]);
        assert_eq!(st.weight_total(1), 3);
        assert_eq!(st.update_state(block(1, 0)).unwrap(), StateUpdate::NewEpoch);
        assert_eq!((st.epoch(), st.round()), (1, 0));
        assert_eq!(st.capacity(), 30);
        assert_eq!(st.share(), 10);
    }

    #[test]
    fn worked_example_epoch() {
        let mut st = amf(30, 3);
        demand_all(&mut st, 0, &[4, 11, 15]);
        assert_eq!(claim_all(&mut st, 1, 0), vec![4, 10, 10]);
        assert_eq!(st.capacity(), 6);
        assert_eq!(st.update_state(block(1, 1)).unwrap(), StateUpdate::NewRound);
        assert_eq!(st.share(), 3);
        assert_eq!(claim_all(&mut st, 1, 1), vec![0, 1, 3]);
        assert_eq!(st.capacity(), 2);
        assert_eq!(claim_all(&mut st, 1, 2), vec![0, 0, 2]);
        assert_eq!(st.share(), 2);
        assert_eq!(st.capacity(), 0);
        assert_eq!(st.weight_total(1), 0);
        assert_eq!(
            st.final_balances().into_values().collect::<Vec<_>>(),
            vec![4, 11, 15]
        );
    }

    #[test]
    fn unchanged_counters_are_a_no_op() {
        let mut st = amf(30, 1);
        st.update_state(block(2, 1)).unwrap();
        let before = (st.epoch(), st.round(), st.capacity(), st.share());
        assert_eq!(
            st.update_state(block(2, 1) + 1).unwrap(),
            StateUpdate::Unchanged
        );
        assert_eq!(before, (st.epoch(), st.round(), st.capacity(), st.share()));
    }

    #[test]
    fn first_demand_resets_total() {
        let mut st = amf(30, 2);
        st.update_state(block(3, 0)).unwrap();
        st.weight_totals[0] = 17;
        st.demand(UserId(0), 4, block(3, 3)).unwrap();
        assert_eq!(st.weight_total(0), 1);
        assert_eq!(st.reset_epoch(), Some(3));
        st.demand(UserId(1), 4, block(3, 3)).unwrap();
        assert_eq!(st.weight_total(0), 2);
    }

    #[test]
    fn second_demand_rejected_without_change() {
        let mut st = amf(30, 1);
        st.demand(UserId(0), 5, block(0, 3)).unwrap();
        let snapshot = st.users[0].clone();
        let totals = st.weight_totals;
        assert_eq!(
            st.demand(UserId(0), 9, block(0, 3)).unwrap(),
            DemandOutcome::Rejected(DemandRejection::AlreadyDemanded)
        );
        assert_eq!(st.users[0], snapshot);
        assert_eq!(st.weight_totals, totals);
    }

    #[test]
    fn demand_rejections() {
        let mut st = amf(30, 1);
        assert_eq!(
            st.demand(UserId(0), 0, 0).unwrap(),
            DemandOutcome::Rejected(DemandRejection::EmptyDemand)
        );
        assert_eq!(
            st.demand(UserId(5), 3, 0).unwrap(),
            DemandOutcome::Rejected(DemandRejection::Unregistered)
        );
    }

    #[test]
    fn weights_follow_cumulative_demand() {
        let clock = ClockParams::new(0, 12, 3).unwrap();
        let policy = WeightPolicy::reciprocal(1000).unwrap();
        let mut st = FaucetState::new(clock, 30u64, policy);
        let u = st.register();
        let first = st.demand(u, 10, block(0, 3)).unwrap();
        assert_eq!(
            first,
            DemandOutcome::Accepted {
                weight: 100,
                parity: 1
            }
        );
        let second = st.demand(u, 10, block(1, 3)).unwrap();
        assert_eq!(
            second,
            DemandOutcome::Accepted {
                weight: 50,
                parity: 0
            }
        );
        assert_eq!(st.user(u).unwrap().cumulative_demand(), 20);
    }

    #[test]
    fn weighted_shares_split_by_weight() {
        let clock = ClockParams::new(0, 12, 3).unwrap();
        let policy = WeightPolicy::reciprocal(1000).unwrap();
        let mut st = FaucetState::new(clock, 12u64, policy);
        for _ in 0..2 {
            st.register();
        }
        // lifetime demands 5 and 10: weights 200 and 100
        st.demand(UserId(0), 5, block(0, 3)).unwrap();
        st.demand(UserId(1), 10, block(0, 3)).unwrap();
        st.update_state(block(1, 0)).unwrap();
        assert_eq!(st.share(), 12 * 1000 / 300);
        assert_eq!(claim_all(&mut st, 1, 0), vec![5, 4]);
    }

    #[test]
    fn claim_guards() {
        let mut st = amf(30, 2);
        assert_eq!(
            st.claim(UserId(0), block(0, 0)).unwrap(),
            ClaimOutcome::NoOp(ClaimNoOp::StaleDemand)
        );
        assert_eq!(
            st.claim(UserId(9), block(0, 0)).unwrap(),
            ClaimOutcome::NoOp(ClaimNoOp::Unregistered)
        );
        st.demand(UserId(0), 20, block(0, 3)).unwrap();
        assert_eq!(
            st.claim(UserId(1), block(1, 0)).unwrap(),
            ClaimOutcome::NoOp(ClaimNoOp::StaleDemand)
        );
        let g = st.claim(UserId(0), block(1, 0)).unwrap();
        assert_eq!(g.granted(), 20);
        assert_eq!(
            st.claim(UserId(0), block(1, 0)).unwrap(),
            ClaimOutcome::NoOp(ClaimNoOp::NothingOwed)
        );
        // Demand expires after its claim epoch.
        assert_eq!(
            st.claim(UserId(0), block(2, 0)).unwrap(),
            ClaimOutcome::NoOp(ClaimNoOp::StaleDemand)
        );
    }

    #[test]
    fn repeat_claim_in_round_is_idempotent() {
        let mut st = amf(10, 2);
        demand_all(&mut st, 0, &[30, 30]);
        assert_eq!(st.claim(UserId(0), block(1, 0)).unwrap().granted(), 5);
        let snapshot = (st.users.clone(), st.capacity, st.weight_totals, st.share);
        assert_eq!(
            st.claim(UserId(0), block(1, 0) + 1).unwrap(),
            ClaimOutcome::NoOp(ClaimNoOp::AlreadyClaimedThisRound)
        );
        assert_eq!(
            snapshot,
            (st.users.clone(), st.capacity, st.weight_totals, st.share)
        );
    }

    #[test]
    fn depletion_is_first_come_first_served() {
        // 7 = 2 * 3 + 1; the single leftover unit goes to the first claimant
        // of the next round even though it has the largest demand.
        let mut st = amf(7, 3);
        demand_all(&mut st, 0, &[9, 4, 3]);
        assert_eq!(claim_all(&mut st, 1, 0), vec![2, 2, 2]);
        assert_eq!(st.capacity(), 1);
        let out = st.claim(UserId(0), block(1, 1)).unwrap();
        let ClaimOutcome::Granted(g) = out else {
            panic!("expected a grant, got {out:?}");
        };
        assert!(g.floor_guard);
        assert_eq!(g.amount, 1);
        assert_eq!(
            st.claim(UserId(1), block(1, 1)).unwrap(),
            ClaimOutcome::NoOp(ClaimNoOp::NoCapacity)
        );
    }

    #[test]
    fn quiet_epoch_clears_stale_weight_total() {
        let mut st = amf(10, 1);
        st.demand(UserId(0), 50, block(0, 3)).unwrap();
        st.claim(UserId(0), block(1, 0)).unwrap();
        assert_eq!(st.weight_total(1), 1);
        // No demands in epoch 1, nothing is claimable in epoch 3.
        st.update_state(block(3, 0)).unwrap();
        assert_eq!(st.weight_total(1), 0);
        assert_eq!(st.share(), 0);
    }

    #[test]
    fn fixed_point_weight_examples() {
        assert_eq!(fixed_point_weight(1000u64, 10), 100);
        assert_eq!(fixed_point_weight(1000u64, 20), 50);
        assert_eq!(fixed_point_weight(1000u64, 3), 333);
        assert_eq!(fixed_point_weight(1000u64, 0), 0);
    }

    #[test]
    fn precision_must_be_power_of_ten() {
        assert!(WeightPolicy::reciprocal(1_000_000_000u64).is_ok());
        assert!(WeightPolicy::reciprocal(10u64).is_ok());
        assert!(WeightPolicy::reciprocal(1u64).is_err());
        assert!(WeightPolicy::reciprocal(0u64).is_err());
        assert!(WeightPolicy::reciprocal(250u64).is_err());
    }

    #[test]
    fn fresh_state_has_zero_balances() {
        let mut st = amf(30, 3);
        assert!(st.final_balances().values().all(|&b| b == 0));
        demand_all(&mut st, 0, &[1, 2, 3]);
        st.update_state(block(1, 2)).unwrap();
        assert!(st.final_balances().values().all(|&b| b == 0));
    }
}
