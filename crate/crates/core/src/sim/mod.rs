//! Deterministic instant-seal chain simulator.
//!
//! Every transaction occupies its own block, so block numbers double as a
//! transaction counter. With `n` users, `k` rounds per epoch and round span
//! `RS`, the schedule is:
//!
//! * epoch 0: `n` registrations, empty filler blocks up to the last round,
//!   then `n` demand calls;
//! * every later epoch: for the autonomous variants, `k − 1` claim rounds in
//!   which each user calls `claim` once (in id order); for the conventional
//!   variant, one `distribute` call by the authority followed by filler. The
//!   last round again holds `n` demand calls.
//!
//! Rounds are padded with filler transactions up to their span. Each
//! transaction is priced with the scenario's [`CostModel`] and flagged when it
//! exceeds the block budget; over-budget transactions still execute, the flag
//! is the finding.

mod report;
pub mod rng;
mod scenario;

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use log::{debug, info, warn};
use serde::Serialize;

use crate::cmf::{CmfError, CmfState, DistributionRow};
use crate::faucet::{ClaimNoOp, ClaimOutcome, DemandOutcome, DemandRejection, FaucetState};
use crate::meter::OpCounts;
use crate::{Units, UserId};

pub use report::{
    cost_report, scaling_table, write_cost_report, write_scaling, CostRow, ScalingRow, COST_HEADER,
    SCALING_HEADER,
};
pub use rng::{next_demand, splitmix64, DemandStream};
pub use scenario::{Plan, Scenario, ScenarioError, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionKind {
    Register,
    Demand,
    Claim,
    Distribute,
    Noop,
}

impl ActionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ActionKind::Register => "register",
            ActionKind::Demand => "demand",
            ActionKind::Claim => "claim",
            ActionKind::Distribute => "distribute",
            ActionKind::Noop => "noop",
        }
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Actor {
    User(UserId),
    Authority,
    Nobody,
}

impl fmt::Display for Actor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Actor::User(u) => write!(f, "{u}"),
            Actor::Authority => f.write_str("authority"),
            Actor::Nobody => f.write_str("-"),
        }
    }
}

/// What a transaction achieved, as a stable kebab-case tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Ok,
    /// Granted, with the user share raised from zero to one unit.
    FloorGuard,
    Rejected(DemandRejection),
    Skipped(ClaimNoOp),
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Ok => "ok",
            Outcome::FloorGuard => "floor-guard",
            Outcome::Rejected(DemandRejection::EmptyDemand) => "rejected-empty-demand",
            Outcome::Rejected(DemandRejection::Unregistered) => "rejected-unregistered",
            Outcome::Rejected(DemandRejection::AlreadyDemanded) => "rejected-already-demanded",
            Outcome::Skipped(ClaimNoOp::Unregistered) => "noop-unregistered",
            Outcome::Skipped(ClaimNoOp::StaleDemand) => "noop-stale-demand",
            Outcome::Skipped(ClaimNoOp::NoCapacity) => "noop-no-capacity",
            Outcome::Skipped(ClaimNoOp::NothingOwed) => "noop-nothing-owed",
            Outcome::Skipped(ClaimNoOp::AlreadyClaimedThisRound) => "noop-already-claimed",
        }
    }

    /// The call changed balances or demand state.
    pub fn took_effect(self) -> bool {
        matches!(self, Outcome::Ok | Outcome::FloorGuard)
    }
}

/// One executed transaction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TxReceipt {
    pub block: u64,
    pub epoch: u64,
    pub round: u64,
    pub kind: ActionKind,
    pub actor: Actor,
    pub outcome: Outcome,
    /// Demanded, granted or distributed amount.
    pub amount: Units,
    /// Unit share in force after the transaction.
    pub share: Units,
    pub capacity_after: Units,
    pub ops: OpCounts,
    pub cost: u64,
    pub over_budget: bool,
}

/// `block,epoch,round,actor,action,amount,share,capacity,cost,over_budget`
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceRow {
    pub block: u64,
    pub epoch: u64,
    pub round: u64,
    pub actor: String,
    pub action: &'static str,
    pub amount: Units,
    pub share: Units,
    pub capacity: Units,
    pub cost: u64,
    pub over_budget: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
struct ReceiptRow {
    block: u64,
    epoch: u64,
    round: u64,
    action: &'static str,
    actor: String,
    outcome: &'static str,
    amount: Units,
    storage_reads: u64,
    storage_writes: u64,
    heap_moves: u64,
    arithmetic_ops: u64,
    cost: u64,
    over_budget: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
struct BalanceRow {
    user: u64,
    balance: Units,
}

impl TxReceipt {
    pub fn trace_row(&self) -> TraceRow {
        TraceRow {
            block: self.block,
            epoch: self.epoch,
            round: self.round,
            actor: self.actor.to_string(),
            action: self.kind.as_str(),
            amount: self.amount,
            share: self.share,
            capacity: self.capacity_after,
            cost: self.cost,
            over_budget: self.over_budget as u8,
        }
    }

    fn receipt_row(&self) -> ReceiptRow {
        ReceiptRow {
            block: self.block,
            epoch: self.epoch,
            round: self.round,
            action: self.kind.as_str(),
            actor: self.actor.to_string(),
            outcome: self.outcome.as_str(),
            amount: self.amount,
            storage_reads: self.ops.storage_reads,
            storage_writes: self.ops.storage_writes,
            heap_moves: self.ops.heap_moves,
            arithmetic_ops: self.ops.arithmetic_ops,
            cost: self.cost,
            over_budget: self.over_budget as u8,
        }
    }
}

/// The allocation problem one epoch solved, and what was actually granted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpochRecord {
    /// Epoch in which the grants happened (demands are from the one before).
    pub epoch: u64,
    pub opening_capacity: Units,
    pub demands: Vec<(UserId, Units)>,
    /// Snapshot weights aligned with `demands` (weighted variant only).
    pub weights: Option<Vec<Units>>,
    /// Claim arrival order; `None` means ascending-demand service.
    pub service_order: Option<Vec<UserId>>,
    pub grants: BTreeMap<UserId, Units>,
    /// Claim rounds (or distribute iterations) that granted anything.
    pub rounds_used: usize,
    pub closing_capacity: Units,
}

/// Everything a scenario run produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub variant: Variant,
    pub n: u64,
    pub claim_rounds: u64,
    pub receipts: Vec<TxReceipt>,
    pub records: Vec<EpochRecord>,
    pub distributions: Vec<DistributionRow>,
    pub balances: BTreeMap<UserId, Units>,
    pub remaining_capacity: Units,
    pub injected: Units,
}

impl RunOutput {
    pub fn trace(&self) -> Vec<TraceRow> {
        self.receipts.iter().map(TxReceipt::trace_row).collect()
    }

    pub fn over_budget(&self) -> impl Iterator<Item = &TxReceipt> {
        self.receipts.iter().filter(|r| r.over_budget)
    }

    pub fn total_balance(&self) -> Units {
        self.balances.values().sum()
    }

    /// Balances plus what is left in the pool equal everything injected.
    pub fn is_conserved(&self) -> bool {
        self.total_balance() + self.remaining_capacity == self.injected
    }

    pub fn write_trace<W: Write>(&self, out: W) -> csv::Result<()> {
        write_rows(
            out,
            TRACE_HEADER,
            self.receipts.iter().map(TxReceipt::trace_row),
        )
    }

    pub fn write_receipts<W: Write>(&self, out: W) -> csv::Result<()> {
        write_rows(
            out,
            RECEIPT_HEADER,
            self.receipts.iter().map(TxReceipt::receipt_row),
        )
    }

    pub fn write_balances<W: Write>(&self, out: W) -> csv::Result<()> {
        write_rows(
            out,
            BALANCE_HEADER,
            self.balances.iter().map(|(u, &b)| BalanceRow {
                user: u.0,
                balance: b,
            }),
        )
    }

    pub fn write_distributions<W: Write>(&self, out: W) -> csv::Result<()> {
        write_rows(out, DISTRIBUTION_HEADER, self.distributions.iter().cloned())
    }
}

pub(crate) fn write_rows<W: Write, R: Serialize>(
    out: W,
    header: &[&str],
    rows: impl Iterator<Item = R>,
) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub const TRACE_HEADER: &[&str] = &[
    "block",
    "epoch",
    "round",
    "actor",
    "action",
    "amount",
    "share",
    "capacity",
    "cost",
    "over_budget",
];

pub const RECEIPT_HEADER: &[&str] = &[
    "block",
    "epoch",
    "round",
    "action",
    "actor",
    "outcome",
    "amount",
    "storage_reads",
    "storage_writes",
    "heap_moves",
    "arithmetic_ops",
    "cost",
    "over_budget",
];

pub const BALANCE_HEADER: &[&str] = &["user", "balance"];

pub const DISTRIBUTION_HEADER: &[&str] = &[
    "epoch",
    "iteration",
    "user",
    "allocated",
    "share",
    "remaining_capacity",
];

enum Engine {
    Conventional(CmfState<Units>),
    Autonomous(FaucetState<Units>),
}

impl Engine {
    fn capacity(&self) -> Units {
        match self {
            Engine::Conventional(c) => c.capacity(),
            Engine::Autonomous(f) => f.capacity(),
        }
    }

    fn share(&self) -> Units {
        match self {
            Engine::Conventional(_) => 0,
            Engine::Autonomous(f) => f.share(),
        }
    }

    fn take_ops(&mut self) -> OpCounts {
        match self {
            Engine::Conventional(c) => c.take_ops(),
            Engine::Autonomous(f) => f.take_ops(),
        }
    }
}

struct Chain {
    plan: Plan,
    engine: Engine,
    block: u64,
    receipts: Vec<TxReceipt>,
}

struct TxEffect {
    kind: ActionKind,
    actor: Actor,
    outcome: Outcome,
    amount: Units,
    share: Option<Units>,
}

impl Chain {
    fn seal(&mut self, effect: TxEffect) {
        let pos = self
            .plan
            .clock
            .locate(self.block)
            .expect("the schedule never runs before deployment");
        let ops = self.engine.take_ops();
        let cost = self.plan.cost_model.price(&ops);
        let over_budget = self.plan.cost_model.is_over_budget(cost);
        if over_budget {
            warn!(
                "block {}: {} by {} costs {cost}, over the budget of {}",
                self.block, effect.kind, effect.actor, self.plan.cost_model.block_budget
            );
        }
        self.receipts.push(TxReceipt {
            block: self.block,
            epoch: pos.epoch,
            round: pos.round,
            kind: effect.kind,
            actor: effect.actor,
            outcome: effect.outcome,
            amount: effect.amount,
            share: effect.share.unwrap_or_else(|| self.engine.share()),
            capacity_after: self.engine.capacity(),
            ops,
            cost,
            over_budget,
        });
        self.block += 1;
    }

    fn fill_until(&mut self, block: u64) {
        while self.block < block {
            self.engine.take_ops();
            self.seal(TxEffect {
                kind: ActionKind::Noop,
                actor: Actor::Nobody,
                outcome: Outcome::Ok,
                amount: 0,
                share: None,
            });
        }
    }
}

/// Runs a scenario end to end.
pub fn run_scenario(scenario: &Scenario) -> Result<RunOutput, ScenarioError> {
    let plan = scenario.plan()?;
    Ok(run_plan(plan))
}

pub fn run_plan(plan: Plan) -> RunOutput {
    info!(
        "running {} with n={} for {} epochs (seed {})",
        plan.variant, plan.n, plan.epochs, plan.seed
    );
    let engine = match plan.variant {
        Variant::Cmf => Engine::Conventional(CmfState::new(plan.epoch_capacity)),
        Variant::Amf | Variant::Wamf => Engine::Autonomous(FaucetState::new(
            plan.clock,
            plan.epoch_capacity,
            plan.policy,
        )),
    };
    let mut rng = DemandStream::new(plan.seed, plan.demand_lo, plan.demand_hi)
        .expect("range validated by plan");
    let clock = plan.clock;
    let n = plan.n;
    let claim_rounds = plan.claim_rounds;
    let mut chain = Chain {
        block: clock.offset(),
        engine,
        receipts: Vec::new(),
        plan,
    };

    let mut records = Vec::new();
    let mut distributions = Vec::new();
    // accepted demands of the previous window, with their weights
    let mut window: Vec<(UserId, Units, Units)> = Vec::new();

    for epoch in 0..chain.plan.epochs {
        let start = clock.epoch_start(epoch);
        let demand_start = start + claim_rounds * clock.round_span();

        if epoch == 0 {
            for _ in 0..n {
                let user = match &mut chain.engine {
                    Engine::Conventional(c) => c.register(),
                    Engine::Autonomous(f) => f.register(),
                };
                chain.seal(TxEffect {
                    kind: ActionKind::Register,
                    actor: Actor::User(user),
                    outcome: Outcome::Ok,
                    amount: 0,
                    share: None,
                });
            }
        } else {
            let record = match &chain.engine {
                Engine::Conventional(_) => {
                    run_distribution(&mut chain, epoch, &window, &mut distributions)
                }
                Engine::Autonomous(_) => run_claim_rounds(&mut chain, epoch, &window),
            };
            records.push(record);
        }
        chain.fill_until(demand_start);

        window.clear();
        let script = chain
            .plan
            .scripted_demands
            .as_ref()
            .map(|s| s.get(epoch as usize).cloned().unwrap_or_default());
        for u in 0..n {
            let user = UserId(u);
            let amount = match &script {
                Some(row) => row.get(u as usize).copied().unwrap_or(0),
                None => rng.next().expect("validated range never runs dry"),
            };
            if amount == 0 {
                chain.fill_until(chain.block + 1);
                continue;
            }
            let block = chain.block;
            let (outcome, weight) = match &mut chain.engine {
                Engine::Conventional(c) => match c.submit_demand(user, amount) {
                    Ok(()) => (Outcome::Ok, 1),
                    Err(e) => {
                        debug!("demand by {user} rejected: {e}");
                        let reason = match e {
                            CmfError::EmptyDemand(_) => DemandRejection::EmptyDemand,
                            CmfError::AlreadyDemanded(_) => DemandRejection::AlreadyDemanded,
                            CmfError::Unregistered(_) => DemandRejection::Unregistered,
                        };
                        (Outcome::Rejected(reason), 0)
                    }
                },
                Engine::Autonomous(f) => match f.demand(user, amount, block) {
                    Ok(DemandOutcome::Accepted { weight, .. }) => (Outcome::Ok, weight),
                    Ok(DemandOutcome::Rejected(r)) => (Outcome::Rejected(r), 0),
                    Err(e) => unreachable!("scheduled block precedes deployment: {e}"),
                },
            };
            if outcome.took_effect() {
                window.push((user, amount, weight));
            }
            chain.seal(TxEffect {
                kind: ActionKind::Demand,
                actor: Actor::User(user),
                outcome,
                amount,
                share: None,
            });
        }
        chain.fill_until(clock.epoch_start(epoch + 1));
    }

    let (balances, remaining_capacity, injected) = match &chain.engine {
        Engine::Conventional(c) => (c.balances().clone(), c.capacity(), c.injected()),
        Engine::Autonomous(f) => (f.final_balances(), f.capacity(), f.injected()),
    };
    let over = chain.receipts.iter().filter(|r| r.over_budget).count();
    if over > 0 {
        warn!("{over} transaction(s) exceeded the block budget");
    }
    RunOutput {
        variant: chain.plan.variant,
        n,
        claim_rounds,
        receipts: chain.receipts,
        records,
        distributions,
        balances,
        remaining_capacity,
        injected,
    }
}

fn run_distribution(
    chain: &mut Chain,
    epoch: u64,
    window: &[(UserId, Units, Units)],
    rows: &mut Vec<DistributionRow>,
) -> EpochRecord {
    let Engine::Conventional(cmf) = &mut chain.engine else {
        unreachable!("distribution only runs on the conventional engine");
    };
    let report = cmf.distribute();
    rows.extend(report.rows(epoch));
    let total = report.total_allocated();
    let first_share = report.iterations.first().map_or(0, |it| it.share);
    let record = EpochRecord {
        epoch,
        opening_capacity: report.opening_capacity,
        demands: window.iter().map(|&(u, a, _)| (u, a)).collect(),
        weights: None,
        service_order: None,
        grants: report.allocations.clone(),
        rounds_used: report.iterations.len(),
        closing_capacity: report.final_capacity,
    };
    chain.seal(TxEffect {
        kind: ActionKind::Distribute,
        actor: Actor::Authority,
        outcome: Outcome::Ok,
        amount: total,
        share: Some(first_share),
    });
    record
}

fn run_claim_rounds(
    chain: &mut Chain,
    epoch: u64,
    window: &[(UserId, Units, Units)],
) -> EpochRecord {
    let clock = chain.plan.clock;
    let n = chain.plan.n;
    let weighted = chain.plan.policy.is_weighted();
    let start = clock.epoch_start(epoch);
    let mut grants: BTreeMap<UserId, Units> = window.iter().map(|&(u, _, _)| (u, 0)).collect();
    let mut rounds_used = 0;

    for round in 0..chain.plan.claim_rounds {
        chain.fill_until(start + round * clock.round_span());
        let mut granted_this_round = false;
        for u in 0..n {
            let user = UserId(u);
            let block = chain.block;
            let Engine::Autonomous(faucet) = &mut chain.engine else {
                unreachable!("claims only run on the autonomous engine");
            };
            let outcome = faucet
                .claim(user, block)
                .unwrap_or_else(|e| unreachable!("scheduled block precedes deployment: {e}"));
            let (outcome, amount) = match outcome {
                ClaimOutcome::Granted(g) => {
                    *grants.entry(user).or_insert(0) += g.amount;
                    granted_this_round |= g.amount > 0;
                    let tag = if g.floor_guard {
                        Outcome::FloorGuard
                    } else {
                        Outcome::Ok
                    };
                    (tag, g.amount)
                }
                ClaimOutcome::NoOp(reason) => (Outcome::Skipped(reason), 0),
            };
            chain.seal(TxEffect {
                kind: ActionKind::Claim,
                actor: Actor::User(user),
                outcome,
                amount,
                share: None,
            });
        }
        rounds_used += granted_this_round as usize;
    }

    let Engine::Autonomous(faucet) = &chain.engine else {
        unreachable!("claims only run on the autonomous engine");
    };
    EpochRecord {
        epoch,
        opening_capacity: faucet.opening_capacity(),
        demands: window.iter().map(|&(u, a, _)| (u, a)).collect(),
        weights: weighted.then(|| window.iter().map(|&(_, _, w)| w).collect()),
        service_order: Some((0..n).map(UserId).collect()),
        grants,
        rounds_used,
        closing_capacity: faucet.capacity(),
    }
}

/// Worst transaction costs of the conventional and autonomous variants at one
/// user count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BudgetProbe {
    pub n: u64,
    pub cmf_max_cost: u64,
    pub cmf_over_budget: bool,
    pub autonomous_max_cost: u64,
    pub autonomous_over_budget: bool,
}

impl BudgetProbe {
    /// Compares the worst distribute call of a conventional run with the
    /// worst claim or demand call of an autonomous run at the same `n`.
    pub fn compare(cmf: &RunOutput, autonomous: &RunOutput, budget: u64) -> Self {
        let worst = |run: &RunOutput, kinds: &[ActionKind]| {
            run.receipts
                .iter()
                .filter(|r| kinds.contains(&r.kind))
                .map(|r| r.cost)
                .max()
                .unwrap_or(0)
        };
        let cmf_max_cost = worst(cmf, &[ActionKind::Distribute]);
        let autonomous_max_cost = worst(autonomous, &[ActionKind::Claim, ActionKind::Demand]);
        BudgetProbe {
            n: cmf.n,
            cmf_max_cost,
            cmf_over_budget: cmf_max_cost > budget,
            autonomous_max_cost,
            autonomous_over_budget: autonomous_max_cost > budget,
        }
    }
}

/// Smallest probed `n` at which a distribute call breaks the block budget
/// while no autonomous call does.
pub fn first_over_budget(probes: &[BudgetProbe]) -> Option<u64> {
    probes
        .iter()
        .filter(|p| p.cmf_over_budget && !p.autonomous_over_budget)
        .map(|p| p.n)
        .min()
}

/// Runs the conventional variant and the scenario's autonomous variant (AMF
/// when the scenario itself is conventional) for every `n` and locates the
/// budget threshold.
pub fn budget_threshold(
    template: &Scenario,
    ns: &[u64],
) -> Result<(Vec<BudgetProbe>, Option<u64>), ScenarioError> {
    let autonomous = if template.variant.is_autonomous() {
        template.variant
    } else {
        Variant::Amf
    };
    let mut probes = Vec::with_capacity(ns.len());
    for &n in ns {
        let cmf = run_scenario(&template.with_n(n).with_variant(Variant::Cmf))?;
        let amf = run_scenario(&template.with_n(n).with_variant(autonomous))?;
        probes.push(BudgetProbe::compare(
            &cmf,
            &amf,
            template.cost_model.block_budget,
        ));
    }
    let threshold = first_over_budget(&probes);
    Ok((probes, threshold))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace_bytes(run: &RunOutput) -> Vec<u8> {
        let mut buf = Vec::new();
        run.write_trace(&mut buf).unwrap();
        buf
    }

    #[test]
    fn zero_epochs_is_empty() {
        let run = run_scenario(&Scenario::standard(Variant::Amf, 4, 0, 1)).unwrap();
        assert!(run.receipts.is_empty());
        assert!(run.balances.is_empty());
        assert_eq!(
            String::from_utf8(trace_bytes(&run)).unwrap(),
            "block,epoch,round,actor,action,amount,share,capacity,cost,over_budget\n"
        );
    }

    #[test]
    fn one_tx_per_block() {
        for variant in [Variant::Cmf, Variant::Amf, Variant::Wamf] {
            let run = run_scenario(&Scenario::standard(variant, 5, 3, 2)).unwrap();
            assert_eq!(run.receipts.len(), 3 * 20);
            for (k, r) in run.receipts.iter().enumerate() {
                assert_eq!(r.block, k as u64);
                assert_eq!(r.over_budget, r.cost > run_budget());
            }
        }
    }

    fn run_budget() -> u64 {
        crate::meter::CostModel::default().block_budget
    }

    #[test]
    fn schedule_shape() {
        let run = run_scenario(&Scenario::standard(Variant::Amf, 3, 2, 0)).unwrap();
        let kinds: Vec<_> = run.receipts.iter().map(|r| r.kind.as_str()).collect();
        let epoch0 = [
            "register", "register", "register", "noop", "noop", "noop", "noop", "noop", "noop",
            "demand", "demand", "demand",
        ];
        assert_eq!(&kinds[..12], &epoch0);
        assert!(kinds[12..21].iter().all(|k| *k == "claim"));
        assert!(kinds[21..24].iter().all(|k| *k == "demand"));
        assert!(run.receipts[12..].iter().all(|r| r.epoch == 1));
        assert_eq!(run.receipts[15].round, 1);
    }

    #[test]
    fn cmf_schedule_has_one_distribute_per_epoch() {
        let run = run_scenario(&Scenario::standard(Variant::Cmf, 4, 3, 0)).unwrap();
        let d: Vec<_> = run
            .receipts
            .iter()
            .filter(|r| r.kind == ActionKind::Distribute)
            .map(|r| (r.block, r.actor))
            .collect();
        assert_eq!(d, vec![(16, Actor::Authority), (32, Actor::Authority)]);
        assert_eq!(run.records.len(), 2);
    }

    #[test]
    fn runs_are_deterministic() {
        let sc = Scenario::standard(Variant::Wamf, 7, 4, 42);
        let a = run_scenario(&sc).unwrap();
        let b = run_scenario(&sc).unwrap();
        assert_eq!(a, b);
        assert_eq!(trace_bytes(&a), trace_bytes(&b));
    }

    #[test]
    fn seeds_change_demands() {
        let a = run_scenario(&Scenario::standard(Variant::Amf, 7, 3, 1)).unwrap();
        let b = run_scenario(&Scenario::standard(Variant::Amf, 7, 3, 2)).unwrap();
        assert_ne!(a.records, b.records);
    }

    #[test]
    fn conservation_holds() {
        for variant in [Variant::Cmf, Variant::Amf, Variant::Wamf] {
            for seed in 0..5 {
                let run = run_scenario(&Scenario::standard(variant, 9, 5, seed)).unwrap();
                assert!(run.is_conserved(), "{variant} seed {seed}");
                assert_eq!(run.injected, 4 * 180);
            }
        }
    }

    #[test]
    fn skipped_scripted_demand_is_filler() {
        let sc = Scenario {
            scripted_demands: Some(vec![vec![5, 0, 7]]),
            ..Scenario::standard(Variant::Amf, 3, 2, 0)
        };
        let run = run_scenario(&sc).unwrap();
        assert_eq!(run.receipts[10].kind, ActionKind::Noop);
        assert_eq!(run.records[0].demands, vec![(UserId(0), 5), (UserId(2), 7)]);
        assert_eq!(run.balances[&UserId(1)], 0);
    }

    #[test]
    fn budget_threshold_surfaces_n_star() {
        let mut template = Scenario::standard(Variant::Amf, 1, 3, 0);
        template.cost_model.block_budget = 400_000;
        let (probes, threshold) = budget_threshold(&template, &[2, 5, 40, 80]).unwrap();
        assert_eq!(probes.len(), 4);
        assert!(probes
            .windows(2)
            .all(|w| w[0].cmf_max_cost < w[1].cmf_max_cost));
        assert!(probes.iter().all(|p| !p.autonomous_over_budget));
        let n_star = threshold.expect("distribute outgrows a 400k budget");
        assert!(probes
            .iter()
            .filter(|p| p.n < n_star)
            .all(|p| !p.cmf_over_budget));
    }

    #[test]
    fn receipts_csv_header() {
        let run = run_scenario(&Scenario::standard(Variant::Amf, 2, 1, 0)).unwrap();
        let mut buf = Vec::new();
        run.write_receipts(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(
            "block,epoch,round,action,actor,outcome,amount,storage_reads,storage_writes,heap_moves,arithmetic_ops,cost,over_budget\n0,0,0,register,0,ok,"
        ));
    }
}
