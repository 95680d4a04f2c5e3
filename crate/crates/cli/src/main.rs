use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use fairfaucet::sim::{
    cost_report, first_over_budget, run_scenario, scaling_table, write_cost_report, write_scaling,
    BudgetProbe, RunOutput, Scenario, Variant,
};
use fairfaucet::verify::{inject_fault, verify_run};

const EXIT_MISMATCH: u8 = 1;
const EXIT_INPUT: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "fairfaucet", version, about = "Max-min fair faucet simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Execute a scenario and write trace, receipts and balances as CSV.
    Run {
        #[command(flatten)]
        input: ScenarioArgs,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
    },
    /// Execute a scenario and check every epoch against the water-filling oracle.
    Verify {
        #[command(flatten)]
        input: ScenarioArgs,
        /// Corrupt the run before checking it.
        #[arg(long)]
        inject_fault: bool,
    },
    /// Summarize transaction costs, comparing the conventional distributor
    /// with the autonomous variant.
    CostReport {
        #[command(flatten)]
        input: ScenarioArgs,
        /// User counts to sweep, e.g. `n=10,50,100,500`.
        #[arg(long, value_parser = parse_sweep)]
        sweep: Option<Sweep>,
        /// Also write cost_report.csv and scaling.csv here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run the sweep's scenarios on separate threads.
        #[arg(long)]
        parallel: bool,
    },
    /// Regenerate the pinned fixtures of the two worked examples.
    Golden {
        /// Fixture directory.
        #[arg(long)]
        out: PathBuf,
        /// Overwrite existing fixtures.
        #[arg(long)]
        force: bool,
    },
}

#[derive(Args, Debug)]
struct ScenarioArgs {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Override the scenario's seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl ScenarioArgs {
    fn load(&self) -> Result<Scenario> {
        let mut scenario = Scenario::load(&self.scenario)?;
        if let Some(seed) = self.seed {
            scenario.seed = seed;
        }
        scenario.plan()?;
        Ok(scenario)
    }
}

/// User counts of an n-sweep.
#[derive(Debug, Clone)]
struct Sweep(Vec<u64>);

fn parse_sweep(text: &str) -> Result<Sweep, String> {
    let list = text
        .strip_prefix("n=")
        .ok_or_else(|| format!("expected n=<list>, got {text:?}"))?;
    let ns = list
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .map_err(|e| format!("bad user count {t:?}: {e}"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if ns.contains(&0) {
        return Err("user counts must be positive".into());
    }
    Ok(Sweep(ns))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FAIRFAUCET_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { input, out } => cmd_run(&input, &out),
        Command::Verify {
            input,
            inject_fault,
        } => cmd_verify(&input, inject_fault),
        Command::CostReport {
            input,
            sweep,
            out,
            parallel,
        } => cmd_cost_report(&input, sweep, out.as_deref(), parallel),
        Command::Golden { out, force } => cmd_golden(&out, force),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn cmd_run(input: &ScenarioArgs, out: &Path) -> Result<ExitCode> {
    let scenario = input.load()?;
    let run = run_scenario(&scenario)?;
    write_outputs(&run, out)?;
    let over = run.over_budget().count();
    println!(
        "{} n={} epochs={}: {} transactions, {} granted, {} left in the pool",
        run.variant,
        run.n,
        scenario.epochs,
        run.receipts.len(),
        run.total_balance(),
        run.remaining_capacity
    );
    if over > 0 {
        println!("warning: {over} transaction(s) exceeded the block budget");
    }
    Ok(ExitCode::SUCCESS)
}

fn write_outputs(run: &RunOutput, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    run.write_trace(create(&dir.join("trace.csv"))?)?;
    run.write_receipts(create(&dir.join("receipts.csv"))?)?;
    run.write_balances(create(&dir.join("balances.csv"))?)?;
    if run.variant == Variant::Cmf {
        run.write_distributions(create(&dir.join("distributions.csv"))?)?;
    }
    info!("wrote outputs to {}", dir.display());
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn cmd_verify(input: &ScenarioArgs, fault: bool) -> Result<ExitCode> {
    let scenario = input.load()?;
    let mut run = run_scenario(&scenario)?;
    if fault {
        warn!("injecting a fault into the run before verification");
        inject_fault(&mut run);
    }
    let report = verify_run(&run);
    for e in &report.fcfs_exceptions {
        println!(
            "note: epoch {} ran out of capacity mid-round; first-come-first-served grants differ \
             from ascending order for {} user(s); totals {} granted vs {} oracle ({})",
            e.epoch,
            e.users_affected,
            e.granted_total,
            e.ascending_total,
            if e.totals_match() { "match" } else { "differ" }
        );
    }
    for f in &report.round_findings {
        println!(
            "finding: epoch {} needs {} water-filling rounds ({} claim rounds available)",
            f.epoch, f.rounds, f.claim_rounds
        );
    }
    match &report.mismatch {
        None => {
            println!(
                "ok: {} epoch(s) match the oracle, at most {} round(s)",
                report.epochs_checked, report.max_rounds
            );
            Ok(ExitCode::SUCCESS)
        }
        Some(m) => {
            println!("mismatch: {m}");
            Ok(ExitCode::from(EXIT_MISMATCH))
        }
    }
}

fn cmd_cost_report(
    input: &ScenarioArgs,
    sweep: Option<Sweep>,
    out: Option<&Path>,
    parallel: bool,
) -> Result<ExitCode> {
    let scenario = input.load()?;
    let ns = sweep.map_or_else(|| vec![scenario.n], |s| s.0);
    let autonomous = if scenario.variant.is_autonomous() {
        scenario.variant
    } else {
        Variant::Amf
    };
    let jobs: Vec<Scenario> = ns
        .iter()
        .flat_map(|&n| {
            let s = scenario.with_n(n);
            [s.with_variant(Variant::Cmf), s.with_variant(autonomous)]
        })
        .collect();
    for job in &jobs {
        job.plan()?;
    }
    let runs = run_all(&jobs, parallel)?;

    let rows = cost_report(&runs);
    let scaling: Vec<_> = scaling_table(&runs)
        .into_iter()
        .filter(|r| {
            r.cmf_distribute_mean.is_some()
                || r.autonomous_claim_mean.is_some()
                || r.autonomous_demand_mean.is_some()
        })
        .collect();

    let stdout = io::stdout();
    let mut w = stdout.lock();
    writeln!(w, "# cost by variant, n, action and round")?;
    write_cost_report(&mut w, &rows)?;
    writeln!(w, "# mean cost against n")?;
    write_scaling(&mut w, &scaling)?;
    let probes: Vec<BudgetProbe> = runs
        .chunks(2)
        .map(|pair| BudgetProbe::compare(&pair[0], &pair[1], scenario.cost_model.block_budget))
        .collect();
    if scenario.epochs > 1 {
        match first_over_budget(&probes) {
            Some(n) => writeln!(
                w,
                "# distribute first exceeds the block budget at n={n} while no {autonomous} call does"
            )?,
            None => writeln!(w, "# no swept n puts distribute over the block budget")?,
        }
    }
    if let Some(dir) = out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        write_cost_report(create(&dir.join("cost_report.csv"))?, &rows)?;
        write_scaling(create(&dir.join("scaling.csv"))?, &scaling)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn run_all(jobs: &[Scenario], parallel: bool) -> Result<Vec<RunOutput>> {
    if !parallel {
        return jobs.iter().map(|s| Ok(run_scenario(s)?)).collect();
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|s| scope.spawn(move || run_scenario(s)))
            .collect();
        handles
            .into_iter()
            .map(|h| Ok(h.join().expect("simulation thread panicked")?))
            .collect()
    })
}

fn cmd_golden(dir: &Path, force: bool) -> Result<ExitCode> {
    let fixtures = [
        ("amf_table", Scenario::amf_table()),
        ("cmf_table", Scenario::cmf_table()),
    ];
    if !force {
        if let Some((name, _)) = fixtures.iter().find(|(name, _)| dir.join(name).exists()) {
            bail!(
                "{} already exists; pass --force to overwrite",
                dir.join(name).display()
            );
        }
    }
    for (name, scenario) in &fixtures {
        let target = dir.join(name);
        let run = run_scenario(scenario)?;
        write_outputs(&run, &target)?;
        fs::write(target.join("scenario.json"), scenario.to_json() + "\n")?;
        println!("wrote {}", target.display());
    }
    Ok(ExitCode::SUCCESS)
}
