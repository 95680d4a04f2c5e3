//! Cost summaries over executed receipts.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use super::{write_rows, ActionKind, RunOutput, Variant};

pub const COST_HEADER: &[&str] = &[
    "variant",
    "n",
    "action",
    "round",
    "count",
    "total",
    "mean",
    "over_budget",
];

pub const SCALING_HEADER: &[&str] = &[
    "n",
    "cmf_distribute_mean",
    "autonomous_claim_mean",
    "autonomous_demand_mean",
];

/// Aggregate cost of one action kind in one round position at one `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CostRow {
    pub variant: Variant,
    pub n: u64,
    pub action: &'static str,
    /// Round position within the epoch (0-based).
    pub round: u64,
    pub count: u64,
    pub total: u64,
    /// Integer mean, rounded down.
    pub mean: u64,
    pub over_budget: u64,
}

/// Mean costs of the headline calls at one `n`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ScalingRow {
    pub n: u64,
    pub cmf_distribute_mean: Option<u64>,
    pub autonomous_claim_mean: Option<u64>,
    pub autonomous_demand_mean: Option<u64>,
}

#[derive(Default)]
struct Acc {
    count: u64,
    total: u64,
    over_budget: u64,
}

impl Acc {
    fn add(&mut self, cost: u64, over: bool) {
        self.count += 1;
        self.total = self.total.saturating_add(cost);
        self.over_budget += over as u64;
    }

    fn mean(&self) -> Option<u64> {
        (self.count > 0).then(|| self.total / self.count)
    }
}

/// Groups every non-filler receipt by variant, `n`, action and round.
pub fn cost_report(runs: &[RunOutput]) -> Vec<CostRow> {
    let mut groups: BTreeMap<(Variant, u64, ActionKind, u64), Acc> = BTreeMap::new();
    for run in runs {
        for r in run.receipts.iter().filter(|r| r.kind != ActionKind::Noop) {
            groups
                .entry((run.variant, run.n, r.kind, r.round))
                .or_default()
                .add(r.cost, r.over_budget);
        }
    }
    groups
        .into_iter()
        .map(|((variant, n, kind, round), acc)| CostRow {
            variant,
            n,
            action: kind.as_str(),
            round,
            count: acc.count,
            total: acc.total,
            mean: acc.total / acc.count,
            over_budget: acc.over_budget,
        })
        .collect()
}

/// Per-`n` comparison of the conventional distribute call against the
/// autonomous claim and demand calls.
pub fn scaling_table(runs: &[RunOutput]) -> Vec<ScalingRow> {
    let mut by_n: BTreeMap<u64, [Acc; 3]> = BTreeMap::new();
    for run in runs {
        let accs = by_n.entry(run.n).or_default();
        for r in &run.receipts {
            let slot = match (run.variant.is_autonomous(), r.kind) {
                (false, ActionKind::Distribute) => 0,
                (true, ActionKind::Claim) => 1,
                (true, ActionKind::Demand) => 2,
                _ => continue,
            };
            accs[slot].add(r.cost, r.over_budget);
        }
    }
    by_n.into_iter()
        .map(|(n, accs)| ScalingRow {
            n,
            cmf_distribute_mean: accs[0].mean(),
            autonomous_claim_mean: accs[1].mean(),
            autonomous_demand_mean: accs[2].mean(),
        })
        .collect()
}

pub fn write_cost_report<W: Write>(out: W, rows: &[CostRow]) -> csv::Result<()> {
    write_rows(out, COST_HEADER, rows.iter())
}

/// Missing means are written as empty fields.
pub fn write_scaling<W: Write>(out: W, rows: &[ScalingRow]) -> csv::Result<()> {
    write_rows(out, SCALING_HEADER, rows.iter())
}
