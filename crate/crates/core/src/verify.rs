//! Cross-checks a simulated run against the water-filling oracle.
//!
//! Each epoch record is turned back into an [`AllocationProblem`] and solved
//! independently. The conventional variant must match the ascending-order
//! solution. The autonomous variants serve claims in arrival order for a
//! bounded number of rounds, so they are held to the oracle run with the same
//! order and round limit; where that differs from the ascending-order solution
//! (capacity ran out mid-round and the first claimers got more), the epoch is
//! reported as a first-come-first-served exception instead of a failure,
//! provided the totals agree.

use std::collections::BTreeMap;
use std::fmt;

use log::{info, warn};

use crate::oracle::{waterfill_with, AllocationProblem, ServiceOrder, WaterfillOptions};
use crate::sim::{EpochRecord, RunOutput};
use crate::{Units, UserId};

/// Unbounded rounds the reference experiments never exceeded.
pub const EXPECTED_ROUND_BOUND: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MismatchKind {
    Grant,
    Balance,
    OpeningCapacity,
    ClosingCapacity,
    Conservation,
    InvalidRecord,
}

impl fmt::Display for MismatchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MismatchKind::Grant => "grant",
            MismatchKind::Balance => "final balance",
            MismatchKind::OpeningCapacity => "opening capacity",
            MismatchKind::ClosingCapacity => "closing capacity",
            MismatchKind::Conservation => "conservation",
            MismatchKind::InvalidRecord => "invalid epoch record",
        })
    }
}

/// First disagreement between the run and the oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub kind: MismatchKind,
    pub epoch: Option<u64>,
    pub user: Option<UserId>,
    pub got: Units,
    pub want: Units,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mismatch", self.kind)?;
        if let Some(e) = self.epoch {
            write!(f, " at epoch {e}")?;
        }
        if let Some(u) = self.user {
            write!(f, " for user {u}")?;
        }
        write!(f, ": got {}, want {}", self.got, self.want)
    }
}

/// An epoch where arrival order changed individual grants. Totals compare
/// both orders without a round limit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FcfsException {
    pub epoch: u64,
    /// Users whose grant differs from the ascending-order solution.
    pub users_affected: usize,
    pub granted_total: Units,
    pub ascending_total: Units,
}

impl FcfsException {
    pub fn totals_match(&self) -> bool {
        self.granted_total == self.ascending_total
    }
}

/// An epoch whose water-filling needs more rounds than expected, or more
/// than the claim rounds available.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundFinding {
    pub epoch: u64,
    pub rounds: usize,
    pub claim_rounds: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub epochs_checked: usize,
    pub mismatch: Option<Mismatch>,
    pub fcfs_exceptions: Vec<FcfsException>,
    pub round_findings: Vec<RoundFinding>,
    /// Largest unbounded round count over all epochs.
    pub max_rounds: usize,
}

impl VerifyReport {
    pub fn is_ok(&self) -> bool {
        self.mismatch.is_none()
    }
}

pub fn verify_run(run: &RunOutput) -> VerifyReport {
    let mut report = VerifyReport::default();
    let mut expected: BTreeMap<UserId, Units> = run.balances.keys().map(|&u| (u, 0)).collect();
    let mut carried: Option<Units> = None;
    let epoch_capacity = epoch_capacity(run);

    for record in &run.records {
        report.epochs_checked += 1;
        if let (Some(prev), Some(c)) = (carried, epoch_capacity) {
            let want = prev + c;
            if record.opening_capacity != want {
                return fail(
                    report,
                    MismatchKind::OpeningCapacity,
                    record,
                    None,
                    record.opening_capacity,
                    want,
                );
            }
        }

        let problem = match problem_of(record) {
            Ok(p) => p,
            Err(e) => {
                warn!("epoch {}: {e}", record.epoch);
                return fail(report, MismatchKind::InvalidRecord, record, None, 0, 0);
            }
        };
        let unbounded = waterfill_with(&problem, &WaterfillOptions::default());
        report.max_rounds = report.max_rounds.max(unbounded.rounds);

        // arrival order without the round limit, for the order and round findings
        let fcfs = record.service_order.as_ref().map(|order| {
            let opts = WaterfillOptions {
                order: ServiceOrder::Given(order.clone()),
                max_rounds: None,
            };
            (order, waterfill_with(&problem, &opts))
        });
        let want = match &fcfs {
            None => unbounded.clone(),
            Some((order, free)) => {
                let rounds = free.rounds.max(unbounded.rounds);
                report.max_rounds = report.max_rounds.max(rounds);
                if rounds > EXPECTED_ROUND_BOUND || free.rounds as u64 > run.claim_rounds {
                    warn!(
                        "epoch {}: water-filling needs {} rounds, {} claim rounds available",
                        record.epoch, rounds, run.claim_rounds
                    );
                    report.round_findings.push(RoundFinding {
                        epoch: record.epoch,
                        rounds,
                        claim_rounds: run.claim_rounds,
                    });
                }
                waterfill_with(
                    &problem,
                    &WaterfillOptions {
                        order: ServiceOrder::Given((*order).clone()),
                        max_rounds: Some(run.claim_rounds as usize),
                    },
                )
            }
        };

        for (&user, &w) in &want.allocations {
            let got = record.grants.get(&user).copied().unwrap_or(0);
            if got != w {
                return fail(report, MismatchKind::Grant, record, Some(user), got, w);
            }
        }
        if let Some((&user, &got)) = record
            .grants
            .iter()
            .find(|(u, &g)| g > 0 && !want.allocations.contains_key(u))
        {
            return fail(report, MismatchKind::Grant, record, Some(user), got, 0);
        }

        if let Some((_, free)) = &fcfs {
            if free.allocations != unbounded.allocations {
                let differing = free
                    .allocations
                    .iter()
                    .filter(|(u, a)| unbounded.allocations.get(u) != Some(a))
                    .count();
                let exception = FcfsException {
                    epoch: record.epoch,
                    users_affected: differing,
                    granted_total: free.allocations.values().sum(),
                    ascending_total: unbounded.allocations.values().sum(),
                };
                info!(
                    "epoch {}: first-come-first-served grants differ for {} user(s), totals {} vs {}",
                    exception.epoch,
                    exception.users_affected,
                    exception.granted_total,
                    exception.ascending_total
                );
                report.fcfs_exceptions.push(exception);
            }
        }

        let granted: Units = want.allocations.values().sum();
        let closing = record.opening_capacity - granted;
        if record.closing_capacity != closing {
            return fail(
                report,
                MismatchKind::ClosingCapacity,
                record,
                None,
                record.closing_capacity,
                closing,
            );
        }
        carried = Some(closing);
        for (u, a) in want.allocations {
            *expected.entry(u).or_insert(0) += a;
        }
    }

    let users: Vec<UserId> = expected
        .keys()
        .chain(run.balances.keys())
        .copied()
        .collect();
    for user in users {
        let got = run.balances.get(&user).copied().unwrap_or(0);
        let want = expected.get(&user).copied().unwrap_or(0);
        if got != want {
            report.mismatch = Some(Mismatch {
                kind: MismatchKind::Balance,
                epoch: None,
                user: Some(user),
                got,
                want,
            });
            return report;
        }
    }
    if !run.is_conserved() {
        report.mismatch = Some(Mismatch {
            kind: MismatchKind::Conservation,
            epoch: None,
            user: None,
            got: run.total_balance() + run.remaining_capacity,
            want: run.injected,
        });
    }
    report
}

fn fail(
    mut report: VerifyReport,
    kind: MismatchKind,
    record: &EpochRecord,
    user: Option<UserId>,
    got: Units,
    want: Units,
) -> VerifyReport {
    report.mismatch = Some(Mismatch {
        kind,
        epoch: Some(record.epoch),
        user,
        got,
        want,
    });
    report
}

/// Per-epoch injection, recovered from the first record: nothing is carried
/// into the first allocating epoch.
fn epoch_capacity(run: &RunOutput) -> Option<Units> {
    let epochs = run.records.len() as Units;
    (epochs > 0).then(|| run.injected / epochs)
}

fn problem_of(
    record: &EpochRecord,
) -> Result<AllocationProblem<Units>, crate::oracle::OracleError> {
    match &record.weights {
        Some(w) => {
            AllocationProblem::weighted(record.demands.clone(), w.clone(), record.opening_capacity)
        }
        None => AllocationProblem::new(record.demands.clone(), record.opening_capacity),
    }
}

/// Corrupts a run so that verification must fail: one unit moves from the
/// pool to the lowest-numbered user's final balance.
pub fn inject_fault(run: &mut RunOutput) {
    if let Some((_, balance)) = run.balances.iter_mut().next() {
        *balance += 1;
        run.remaining_capacity = run.remaining_capacity.saturating_sub(1);
    } else {
        run.balances.insert(UserId(0), 1);
    }
}
