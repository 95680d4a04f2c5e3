//! Reference max-min water-filling over a plain sorted list.
//!
//! This is the ground truth the heap-based distributor and the autonomous
//! faucet are checked against, so it shares no code with either: no heap, no
//! parity buffers, no fixed-point weights. Each round hands every pending
//! demand the same unit share (scaled by `w / Σw` when weighted, multiplying
//! before dividing), with one unit each once capacity drops below the number
//! of pending demands.
//!
//! [`is_maxmin_fair`] checks the fairness definition directly and
//! [`brute_force`] enumerates every feasible allocation of a tiny instance, so
//! the water-filling itself can be validated.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::num::Amount;
use crate::UserId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("user {0} appears twice")]
    DuplicateUser(UserId),
    #[error("user {0} has an empty demand")]
    ZeroDemand(UserId),
    #[error("{weights} weights for {demands} demands")]
    WeightCount { demands: usize, weights: usize },
    #[error("user {0} has a zero weight")]
    ZeroWeight(UserId),
    #[error("allocation names user {0} who has no demand")]
    UnknownUser(UserId),
    #[error("user {user} allocated {allocated} above demand {demand}")]
    AboveDemand {
        user: UserId,
        allocated: u128,
        demand: u128,
    },
    #[error("allocated {allocated} exceeds capacity {capacity}")]
    AboveCapacity { allocated: u128, capacity: u128 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllocationProblem<T> {
    demands: Vec<(UserId, T)>,
    capacity: T,
    weights: Option<Vec<T>>,
}

impl<T: Amount> AllocationProblem<T> {
    pub fn new(demands: Vec<(UserId, T)>, capacity: T) -> Result<Self, OracleError> {
        let mut seen = BTreeSet::new();
        for &(user, amount) in &demands {
            if !seen.insert(user) {
                return Err(OracleError::DuplicateUser(user));
            }
            if amount.is_zero() {
                return Err(OracleError::ZeroDemand(user));
            }
        }
        Ok(AllocationProblem {
            demands,
            capacity,
            weights: None,
        })
    }

    pub fn weighted(
        demands: Vec<(UserId, T)>,
        weights: Vec<T>,
        capacity: T,
    ) -> Result<Self, OracleError> {
        if weights.len() != demands.len() {
            return Err(OracleError::WeightCount {
                demands: demands.len(),
                weights: weights.len(),
            });
        }
        if let Some(k) = weights.iter().position(|w| w.is_zero()) {
            return Err(OracleError::ZeroWeight(demands[k].0));
        }
        let mut problem = Self::new(demands, capacity)?;
        problem.weights = Some(weights);
        Ok(problem)
    }

    /// Convenience constructor numbering users `0..n` in order.
    pub fn from_amounts(amounts: &[T], capacity: T) -> Result<Self, OracleError> {
        Self::new(numbered(amounts), capacity)
    }

    pub fn demands(&self) -> &[(UserId, T)] {
        &self.demands
    }

    pub fn capacity(&self) -> T {
        self.capacity
    }

    pub fn weights(&self) -> Option<&[T]> {
        self.weights.as_deref()
    }

    fn weight(&self, k: usize) -> T {
        self.weights.as_ref().map_or_else(T::one, |w| w[k])
    }

    pub fn total_demand(&self) -> T {
        self.demands
            .iter()
            .fold(T::zero(), |acc, &(_, d)| acc.saturating_add(d))
    }
}

fn numbered<T: Copy>(amounts: &[T]) -> Vec<(UserId, T)> {
    amounts
        .iter()
        .enumerate()
        .map(|(k, &a)| (UserId(k as u64), a))
        .collect()
}

/// Order in which pending demands are served inside a round.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum ServiceOrder {
    /// Smallest remaining demand first, ties to the lower id.
    #[default]
    Ascending,
    /// A fixed arrival order; users not listed follow in ascending order.
    Given(Vec<UserId>),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WaterfillOptions {
    pub order: ServiceOrder,
    /// Stop after this many rounds even if demand and capacity remain.
    pub max_rounds: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Waterfill<T> {
    pub allocations: BTreeMap<UserId, T>,
    pub rounds: usize,
    pub remaining_capacity: T,
    /// Every demand was fully served.
    pub satisfied_all: bool,
}

struct Pending<T> {
    user: UserId,
    remaining: T,
    weight: T,
    rank: usize,
}

pub fn waterfill<T: Amount>(problem: &AllocationProblem<T>) -> Waterfill<T> {
    waterfill_with(problem, &WaterfillOptions::default())
}

pub fn waterfill_with<T: Amount>(
    problem: &AllocationProblem<T>,
    options: &WaterfillOptions,
) -> Waterfill<T> {
    let arrival: BTreeMap<UserId, usize> = match &options.order {
        ServiceOrder::Ascending => BTreeMap::new(),
        ServiceOrder::Given(order) => order.iter().enumerate().map(|(k, &u)| (u, k)).collect(),
    };
    let mut pending: Vec<Pending<T>> = problem
        .demands
        .iter()
        .enumerate()
        .map(|(k, &(user, remaining))| Pending {
            user,
            remaining,
            weight: problem.weight(k),
            rank: arrival.get(&user).copied().unwrap_or(usize::MAX),
        })
        .collect();
    let mut allocations: BTreeMap<UserId, T> = problem
        .demands
        .iter()
        .map(|&(u, _)| (u, T::zero()))
        .collect();
    let mut capacity = problem.capacity;
    let mut rounds = 0;

    while !pending.is_empty()
        && !capacity.is_zero()
        && options.max_rounds.is_none_or(|m| rounds < m)
    {
        rounds += 1;
        pending.sort_by(|a, b| {
            a.rank
                .cmp(&b.rank)
                .then(a.remaining.cmp(&b.remaining))
                .then(a.user.cmp(&b.user))
        });
        let total_weight = pending
            .iter()
            .fold(T::zero(), |acc, p| acc.saturating_add(p.weight));
        let round_capacity = capacity;
        for p in pending.iter_mut() {
            if capacity.is_zero() {
                break;
            }
            let share = round_capacity
                .mul_div_floor(p.weight, total_weight)
                .unwrap_or_else(T::max_value)
                .max(T::one());
            let grant = share.min(p.remaining).min(capacity);
            p.remaining = p.remaining - grant;
            capacity = capacity - grant;
            let slot = allocations
                .get_mut(&p.user)
                .expect("every demander has a slot");
            *slot = *slot + grant;
        }
        pending.retain(|p| !p.remaining.is_zero());
    }

    Waterfill {
        allocations,
        rounds,
        remaining_capacity: capacity,
        satisfied_all: pending.is_empty(),
    }
}

/// Result of a fairness check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fairness {
    Fair,
    /// `needy` could gain a unit from `donor` and still sit at or below the
    /// donor's level. `donor` is `None` when spare capacity was left unused.
    Unfair {
        needy: UserId,
        donor: Option<UserId>,
    },
}

impl Fairness {
    pub fn is_fair(&self) -> bool {
        matches!(self, Fairness::Fair)
    }
}

/// Checks an allocation against the max-min definition, tolerating the
/// one-unit gap that integer division leaves between users at the same level.
///
/// Under weights the levels compared are `allocation / weight`.
pub fn is_maxmin_fair<T: Amount>(
    problem: &AllocationProblem<T>,
    allocation: &BTreeMap<UserId, T>,
) -> Result<Fairness, OracleError> {
    let index: BTreeMap<UserId, usize> = problem
        .demands
        .iter()
        .enumerate()
        .map(|(k, &(u, _))| (u, k))
        .collect();
    if let Some(u) = allocation.keys().find(|u| !index.contains_key(u)) {
        return Err(OracleError::UnknownUser(*u));
    }

    let mut total: u128 = 0;
    let mut levels = Vec::with_capacity(problem.demands.len());
    for (k, &(user, demand)) in problem.demands.iter().enumerate() {
        let allocated = allocation.get(&user).copied().unwrap_or_else(T::zero);
        if allocated > demand {
            return Err(OracleError::AboveDemand {
                user,
                allocated: allocated.as_u128(),
                demand: demand.as_u128(),
            });
        }
        total += allocated.as_u128();
        levels.push((
            user,
            allocated.as_u128(),
            demand.as_u128(),
            problem.weight(k).as_u128(),
        ));
    }
    let capacity = problem.capacity.as_u128();
    if total > capacity {
        return Err(OracleError::AboveCapacity {
            allocated: total,
            capacity,
        });
    }

    // (a / w) compared exactly by cross-multiplication.
    let level_cmp = |a: &(UserId, u128, u128, u128), b: &(UserId, u128, u128, u128)| {
        (a.1 * b.3).cmp(&(b.1 * a.3)).then(a.0.cmp(&b.0))
    };
    let mut needy: Vec<_> = levels.iter().filter(|l| l.1 < l.2).copied().collect();
    needy.sort_by(level_cmp);
    let mut donors: Vec<_> = levels.iter().filter(|l| l.1 > 0).copied().collect();
    donors.sort_by(|a, b| level_cmp(b, a));

    if let Some(first) = needy.first() {
        if total < capacity {
            return Ok(Fairness::Unfair {
                needy: first.0,
                donor: None,
            });
        }
    }
    for u in &needy {
        for v in &donors {
            if v.0 == u.0 {
                continue;
            }
            // (a_v - 1) / w_v >= (a_u + 1) / w_u
            if (v.1 - 1) * u.3 >= (u.1 + 1) * v.3 {
                return Ok(Fairness::Unfair {
                    needy: u.0,
                    donor: Some(v.0),
                });
            }
        }
    }
    Ok(Fairness::Fair)
}

/// Every feasible allocation whose ascending vector of levels `a / w` is
/// lexicographically largest. Exponential: meant for a handful of users and
/// small capacities only.
pub fn brute_force<T: Amount>(problem: &AllocationProblem<T>) -> Vec<BTreeMap<UserId, T>> {
    let n = problem.demands.len();
    let demands: Vec<u128> = problem.demands.iter().map(|d| d.1.as_u128()).collect();
    let weights: Vec<u128> = (0..n).map(|k| problem.weight(k).as_u128()).collect();
    let capacity = problem.capacity.as_u128();

    let sorted_levels = |alloc: &[u128]| {
        let mut lv: Vec<(u128, u128)> =
            alloc.iter().copied().zip(weights.iter().copied()).collect();
        lv.sort_by(|a, b| (a.0 * b.1).cmp(&(b.0 * a.1)));
        lv
    };
    let cmp_levels = |a: &[(u128, u128)], b: &[(u128, u128)]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x.0 * y.1).cmp(&(y.0 * x.1)))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
    };

    let mut best: Vec<Vec<u128>> = Vec::new();
    let mut best_levels: Vec<(u128, u128)> = Vec::new();
    let mut current = vec![0u128; n];
    loop {
        if current.iter().sum::<u128>() <= capacity {
            let lv = sorted_levels(&current);
            match if best.is_empty() {
                Ordering::Greater
            } else {
                cmp_levels(&lv, &best_levels)
            } {
                Ordering::Greater => {
                    best = vec![current.clone()];
                    best_levels = lv;
                }
                Ordering::Equal => best.push(current.clone()),
                Ordering::Less => {}
            }
        }
        // odometer increment
        let mut k = 0;
        while k < n {
            if current[k] < demands[k] {
                current[k] += 1;
                break;
            }
            current[k] = 0;
            k += 1;
        }
        if k == n {
            break;
        }
    }

    best.into_iter()
        .map(|alloc| {
            problem
                .demands
                .iter()
                .zip(alloc)
                .map(|(&(u, _), a)| {
                    (
                        u,
                        <T as num_traits::NumCast>::from(a).expect("bounded by a demand of type T"),
                    )
                })
                .collect()
        })
        .collect()
}
