//! `uavdql` command-line runner.
//!
//! Every command that takes `--seed` is bit-reproducible on the same build.
//! Settings resolve as: command-line flag, then `UAVDQL_*` environment
//! variable, then `--config` TOML file, then built-in defaults.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use uavdql_core::baselines::greedy_rollout;
use uavdql_core::env::{generate_scenario, EpisodeTrace, NodeId};
use uavdql_core::learner::{evaluate_policy, train, SelectorRule};
use uavdql_core::metrics::{self, delay_report, DelayReport};
use uavdql_core::oracle::{optimal_by_dp, optimal_by_permutation, DP_LIMIT};
use uavdql_core::{Error, Preset, QTablePair, RevenueWeights, RunConfig, Scenario};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_CAPACITY: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "uavdql",
    version,
    about = "Priority- and energy-aware UAV serving order via Double Q-Learning"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random scenario file.
    Generate(GenerateArgs),
    /// Train Double Q-Learning tables and write the curve, tables and converged trace.
    Train(TrainArgs),
    /// Roll out the greedy policy of saved tables.
    Evaluate(EvaluateArgs),
    /// Roll out the nearest-neighbor baseline.
    Greedy(BaselineArgs),
    /// Exact optimal serving order.
    Oracle(OracleArgs),
    /// Greedy vs trained DQL vs oracle, per weight preset.
    Compare(CompareArgs),
    /// Train every weight preset and report per-class delay and energy.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, env = "UAVDQL_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 6)]
    pub nodes: usize,
    /// Grid size as WxH.
    #[arg(long, default_value = "6x6", value_parser = parse_grid)]
    pub grid: (u32, u32),
    /// Cell side in meters.
    #[arg(long, default_value_t = 50.0)]
    pub cell: f64,
    /// Output scenario file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Clone, Default)]
pub struct RunArgs {
    /// TOML file with [power], [weights] and [hyper] tables.
    #[arg(long, env = "UAVDQL_CONFIG")]
    pub config: Option<PathBuf>,
    /// Weight preset (default, dql1, dql2, dql3) or w1,w2,w3.
    #[arg(long, env = "UAVDQL_WEIGHTS")]
    pub weights: Option<RevenueWeights>,
    #[arg(long, env = "UAVDQL_ALPHA")]
    pub alpha: Option<f64>,
    #[arg(long, env = "UAVDQL_GAMMA")]
    pub gamma: Option<f64>,
    #[arg(long, env = "UAVDQL_EPISODES")]
    pub episodes: Option<usize>,
    #[arg(long, env = "UAVDQL_EPS_FULL_UNTIL")]
    pub eps_full_until: Option<usize>,
    #[arg(long, env = "UAVDQL_EPS_ZERO_AT")]
    pub eps_zero_at: Option<usize>,
    /// Table selector rule between updates: random or alternate.
    #[arg(long, env = "UAVDQL_SELECTOR")]
    pub selector: Option<SelectorRule>,
}

impl RunArgs {
    pub fn resolve(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => load_config(path)?,
            None => RunConfig::default(),
        };
        if let Some(w) = self.weights {
            cfg.weights = w;
        }
        let h = &mut cfg.hyper;
        if let Some(v) = self.alpha {
            h.alpha = v;
        }
        if let Some(v) = self.gamma {
            h.gamma = v;
        }
        if let Some(v) = self.episodes {
            h.episodes = v;
        }
        if let Some(v) = self.eps_full_until {
            h.eps_full_until = v;
        }
        if let Some(v) = self.eps_zero_at {
            h.eps_zero_at = v;
        }
        if let Some(v) = self.selector {
            h.selector_rule = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn load_config(path: &Path) -> anyhow::Result<RunConfig> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cfg: RunConfig =
        toml::from_str(&text).map_err(|e| DataError(format!("{}: {e}", path.display())))?;
    Ok(cfg)
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, env = "UAVDQL_SCENARIO")]
    pub scenario: PathBuf,
    #[arg(long, env = "UAVDQL_SEED", default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub run: RunArgs,
    /// Output directory.
    #[arg(long, env = "UAVDQL_OUT", default_value = "out")]
    pub out: PathBuf,
    /// Add trailing moving-average columns over this many episodes.
    #[arg(long)]
    pub smooth: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long, env = "UAVDQL_SCENARIO")]
    pub scenario: PathBuf,
    /// Table dump written by `train`.
    #[arg(long)]
    pub tables: PathBuf,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, env = "UAVDQL_OUT")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[arg(long, env = "UAVDQL_SCENARIO")]
    pub scenario: PathBuf,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, env = "UAVDQL_OUT")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OracleMethod {
    Dp,
    Permutation,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, env = "UAVDQL_SCENARIO")]
    pub scenario: PathBuf,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_enum, default_value_t = OracleMethod::Dp)]
    pub method: OracleMethod,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long, env = "UAVDQL_SCENARIO")]
    pub scenario: PathBuf,
    #[arg(long, env = "UAVDQL_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated weight presets to train.
    #[arg(long, value_delimiter = ',', default_value = "default")]
    pub presets: Vec<Preset>,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, env = "UAVDQL_OUT")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, env = "UAVDQL_SCENARIO")]
    pub scenario: PathBuf,
    #[arg(long, env = "UAVDQL_SEED", default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, env = "UAVDQL_OUT", default_value = "out")]
    pub out: PathBuf,
}

/// Bad input data or configuration; exit status 3.
#[derive(Debug)]
pub struct DataError(pub String);

impl std::fmt::Display for DataError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for DataError {}

fn parse_grid(s: &str) -> Result<(u32, u32), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("grid must look like 6x6, got `{s}`"))?;
    let w = w
        .trim()
        .parse()
        .map_err(|_| format!("bad grid width `{w}`"))?;
    let h = h
        .trim()
        .parse()
        .map_err(|_| format!("bad grid height `{h}`"))?;
    Ok((w, h))
}

/// Exit status for an error returned by [`run`].
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Capacity { .. } => EXIT_CAPACITY,
                _ => EXIT_DATA,
            };
        }
        if cause.downcast_ref::<DataError>().is_some() {
            return EXIT_DATA;
        }
    }
    1
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Generate(a) => cmd_generate(&a),
        Command::Train(a) => cmd_train(&a).map(|_| ()),
        Command::Evaluate(a) => cmd_evaluate(&a),
        Command::Greedy(a) => cmd_greedy(&a),
        Command::Oracle(a) => cmd_oracle(&a),
        Command::Compare(a) => cmd_compare(&a).map(|_| ()),
        Command::Sweep(a) => cmd_sweep(&a),
    }
}

fn ensure_dir(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn format_order(order: &[NodeId]) -> String {
    order
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join("-")
}

fn scenario_summary(s: &Scenario) -> String {
    let mut out = format!(
        "{}x{} grid, cell {} m, start ({}, {}), {} nodes",
        s.grid_width(),
        s.grid_height(),
        s.cell_side(),
        s.uav_start().gx,
        s.uav_start().gy,
        s.node_count()
    );
    for n in s.nodes() {
        let _ = write!(
            out,
            "\n  node {} at ({}, {}) priority {}",
            n.id, n.cell.gx, n.cell.gy, n.priority
        );
    }
    out
}

fn trace_summary(label: &str, trace: &EpisodeTrace, gamma: f64, report: &DelayReport) -> String {
    let mut out = format!(
        "{label}: order {} | discounted return {:.3} | accumulated revenue {:.3} | energy {:.1} J | path {:.1} m",
        format_order(&trace.order()),
        trace.discounted_return(gamma),
        trace.accumulated_revenue(),
        trace.total_energy(),
        trace.path_length(),
    );
    for c in &report.classes {
        match c.mean_delay {
            Some(d) => {
                let _ = write!(
                    out,
                    "\n  priority {} ({} nodes): mean delay {:.1} s",
                    c.class, c.count, d
                );
            }
            None => {
                let _ = write!(out, "\n  priority {}: no nodes", c.class);
            }
        }
    }
    out
}

fn write_trace_outputs(
    dir: &Path,
    prefix: &str,
    trace: &EpisodeTrace,
    scenario: &Scenario,
) -> anyhow::Result<DelayReport> {
    let report = delay_report(trace, scenario)?;
    metrics::trace_csv(trace, &dir.join(format!("{prefix}trace.csv")))?;
    metrics::delay_report_csv(&report, &dir.join(format!("{prefix}delays.csv")))?;
    Ok(report)
}

pub fn cmd_generate(a: &GenerateArgs) -> anyhow::Result<()> {
    let (w, h) = a.grid;
    let scenario = generate_scenario(a.seed, w, h, a.cell, a.nodes)?;
    match &a.out {
        Some(path) => {
            scenario.save(path)?;
            println!("wrote {}", path.display());
            println!("{}", scenario_summary(&scenario));
        }
        None => print!("{}", scenario.to_text()),
    }
    Ok(())
}

/// Paths written by `train`.
#[derive(Debug, Clone)]
pub struct TrainOutputs {
    pub curve: PathBuf,
    pub tables: PathBuf,
    pub trace: Option<PathBuf>,
}

pub fn cmd_train(a: &TrainArgs) -> anyhow::Result<TrainOutputs> {
    let scenario = Scenario::load(&a.scenario)?;
    let cfg = a.run.resolve()?;
    if a.smooth == Some(0) {
        bail!(DataError("--smooth must be at least 1".into()));
    }
    ensure_dir(&a.out)?;
    let (tables, curve) = train(&scenario, &cfg, a.seed)?;

    let outputs = TrainOutputs {
        curve: a.out.join("curve.csv"),
        tables: a.out.join("qtables.txt"),
        trace: (cfg.hyper.episodes > 0).then(|| a.out.join("trace.csv")),
    };
    metrics::training_curve_csv(&curve, a.smooth, &outputs.curve)?;
    tables.save(&outputs.tables)?;
    println!("trained {} episodes (seed {})", curve.len(), a.seed);
    if cfg.hyper.episodes == 0 {
        eprintln!("warning: --episodes 0, tables are empty and no trace was written");
        return Ok(outputs);
    }
    let trace = evaluate_policy(&scenario, &cfg, &tables)?;
    let report = write_trace_outputs(&a.out, "", &trace, &scenario)?;
    println!("{}", trace_summary("dql", &trace, cfg.hyper.gamma, &report));
    Ok(outputs)
}

pub fn cmd_evaluate(a: &EvaluateArgs) -> anyhow::Result<()> {
    let scenario = Scenario::load(&a.scenario)?;
    let cfg = a.run.resolve()?;
    let tables = QTablePair::load(&a.tables)?;
    if let Some((key, _, _)) = tables.table_a.iter().chain(tables.table_b.iter()).next() {
        if key.priorities.len() != scenario.node_count() {
            bail!(DataError(format!(
                "tables are for {} nodes, scenario has {}",
                key.priorities.len(),
                scenario.node_count()
            )));
        }
    }
    let trace = evaluate_policy(&scenario, &cfg, &tables)?;
    let report = delay_report(&trace, &scenario)?;
    if let Some(dir) = &a.out {
        ensure_dir(dir)?;
        write_trace_outputs(dir, "", &trace, &scenario)?;
    }
    println!("{}", trace_summary("dql", &trace, cfg.hyper.gamma, &report));
    Ok(())
}

pub fn cmd_greedy(a: &BaselineArgs) -> anyhow::Result<()> {
    let scenario = Scenario::load(&a.scenario)?;
    let cfg = a.run.resolve()?;
    let trace = greedy_rollout(&scenario, &cfg.power, &cfg.weights)?;
    let report = delay_report(&trace, &scenario)?;
    if let Some(dir) = &a.out {
        ensure_dir(dir)?;
        write_trace_outputs(dir, "greedy_", &trace, &scenario)?;
    }
    println!(
        "{}",
        trace_summary("greedy", &trace, cfg.hyper.gamma, &report)
    );
    Ok(())
}

pub fn cmd_oracle(a: &OracleArgs) -> anyhow::Result<()> {
    let scenario = Scenario::load(&a.scenario)?;
    let cfg = a.run.resolve()?;
    let gamma = cfg.hyper.gamma;
    let best = match a.method {
        OracleMethod::Dp => optimal_by_dp(&scenario, &cfg.power, &cfg.weights, gamma)?,
        OracleMethod::Permutation => {
            optimal_by_permutation(&scenario, &cfg.power, &cfg.weights, gamma)?
        }
    };
    println!("order {}", format_order(&best.order));
    println!("discounted return {}", best.discounted_return);
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub preset: String,
    pub policy: &'static str,
    pub order: Vec<NodeId>,
    pub discounted_return: f64,
    pub total_energy: f64,
    pub mean_delays: [Option<f64>; 4],
}

impl CompareRow {
    fn new(
        preset: String,
        policy: &'static str,
        trace: &EpisodeTrace,
        scenario: &Scenario,
        gamma: f64,
    ) -> anyhow::Result<Self> {
        let report = delay_report(trace, scenario)?;
        let mut mean_delays = [None; 4];
        for c in &report.classes {
            mean_delays[c.class as usize - 1] = c.mean_delay;
        }
        Ok(Self {
            preset,
            policy,
            order: trace.order(),
            discounted_return: trace.discounted_return(gamma),
            total_energy: report.total_energy,
            mean_delays,
        })
    }
}

fn preset_config(
    base: &RunConfig,
    preset: Preset,
    explicit: Option<RevenueWeights>,
) -> (String, RunConfig) {
    match explicit {
        // an explicit --weights replaces the preset list with a single arm
        Some(w) => (format!("{},{},{}", w.w1, w.w2, w.w3), base.with_weights(w)),
        None => (
            preset.name().to_string(),
            base.with_weights(preset.weights()),
        ),
    }
}

pub fn cmd_compare(a: &CompareArgs) -> anyhow::Result<Vec<CompareRow>> {
    let scenario = Scenario::load(&a.scenario)?;
    let base = a.run.resolve()?;
    let gamma = base.hyper.gamma;
    let oracle_ok = scenario.node_count() <= DP_LIMIT;
    if !oracle_ok {
        eprintln!(
            "notice: {} nodes exceed the oracle limit of {DP_LIMIT}; oracle rows omitted",
            scenario.node_count()
        );
    }
    let arms: Vec<(String, RunConfig)> = match a.run.weights {
        Some(w) => vec![preset_config(&base, Preset::Default, Some(w))],
        None => a
            .presets
            .iter()
            .map(|&p| preset_config(&base, p, None))
            .collect(),
    };

    let results: Vec<anyhow::Result<Vec<CompareRow>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = arms
            .iter()
            .map(|(name, cfg)| {
                let scenario = &scenario;
                scope.spawn(move || -> anyhow::Result<Vec<CompareRow>> {
                    let mut rows = Vec::new();
                    let greedy = greedy_rollout(scenario, &cfg.power, &cfg.weights)?;
                    rows.push(CompareRow::new(
                        name.clone(),
                        "greedy",
                        &greedy,
                        scenario,
                        gamma,
                    )?);
                    let (tables, _) = train(scenario, cfg, a.seed)?;
                    let dql = evaluate_policy(scenario, cfg, &tables)?;
                    rows.push(CompareRow::new(name.clone(), "dql", &dql, scenario, gamma)?);
                    if oracle_ok {
                        let best = optimal_by_dp(scenario, &cfg.power, &cfg.weights, gamma)?;
                        let trace =
                            EpisodeTrace::rollout(scenario, &best.order, &cfg.power, &cfg.weights)?;
                        rows.push(CompareRow::new(
                            name.clone(),
                            "oracle",
                            &trace,
                            scenario,
                            gamma,
                        )?);
                    }
                    Ok(rows)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("compare arm panicked"))
            .collect()
    });
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }

    print!("{}", compare_table(&rows));
    if let Some(dir) = &a.out {
        ensure_dir(dir)?;
        let path = dir.join("compare.csv");
        std::fs::write(&path, compare_csv(&rows))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(rows)
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(|d| d.to_string()).unwrap_or_default()
}

pub fn compare_csv(rows: &[CompareRow]) -> String {
    let mut out = String::from(
        "preset,policy,order,discounted_return,total_energy_J,mean_delay_p1_s,mean_delay_p2_s,mean_delay_p3_s,mean_delay_p4_s\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "\"{}\",{},{},{},{},{},{},{},{}",
            r.preset,
            r.policy,
            format_order(&r.order),
            r.discounted_return,
            r.total_energy,
            opt_cell(r.mean_delays[0]),
            opt_cell(r.mean_delays[1]),
            opt_cell(r.mean_delays[2]),
            opt_cell(r.mean_delays[3]),
        );
    }
    out
}

fn compare_table(rows: &[CompareRow]) -> String {
    let mut out = format!(
        "{:<14} {:<7} {:<14} {:>16} {:>12} {:>9} {:>9} {:>9} {:>9}\n",
        "preset", "policy", "order", "disc. return", "energy J", "p1 s", "p2 s", "p3 s", "p4 s"
    );
    let fmt = |v: Option<f64>| v.map(|d| format!("{d:.1}")).unwrap_or_else(|| "-".into());
    for r in rows {
        let _ = writeln!(
            out,
            "{:<14} {:<7} {:<14} {:>16.2} {:>12.1} {:>9} {:>9} {:>9} {:>9}",
            r.preset,
            r.policy,
            format_order(&r.order),
            r.discounted_return,
            r.total_energy,
            fmt(r.mean_delays[0]),
            fmt(r.mean_delays[1]),
            fmt(r.mean_delays[2]),
            fmt(r.mean_delays[3]),
        );
    }
    out
}

pub fn cmd_sweep(a: &SweepArgs) -> anyhow::Result<()> {
    let scenario = Scenario::load(&a.scenario)?;
    let base = a.run.resolve()?;
    let gamma = base.hyper.gamma;
    ensure_dir(&a.out)?;

    let greedy = greedy_rollout(&scenario, &base.power, &base.weights)?;
    let mut rows = vec![CompareRow::new(
        "-".into(),
        "greedy",
        &greedy,
        &scenario,
        gamma,
    )?];
    write_trace_outputs(&a.out, "greedy_", &greedy, &scenario)?;

    let results: Vec<anyhow::Result<(Preset, EpisodeTrace, uavdql_core::learner::TrainingCurve)>> =
        std::thread::scope(|scope| {
            let handles: Vec<_> = Preset::ALL
                .iter()
                .map(|&preset| {
                    let cfg = base.with_weights(preset.weights());
                    let scenario = &scenario;
                    scope.spawn(move || -> anyhow::Result<_> {
                        let (tables, curve) = train(scenario, &cfg, a.seed)?;
                        Ok((preset, evaluate_policy(scenario, &cfg, &tables)?, curve))
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("sweep arm panicked"))
                .collect()
        });
    for r in results {
        let (preset, trace, curve) = r?;
        let prefix = format!("{preset}_");
        write_trace_outputs(&a.out, &prefix, &trace, &scenario)?;
        metrics::training_curve_csv(&curve, None, &a.out.join(format!("{prefix}curve.csv")))?;
        rows.push(CompareRow::new(
            preset.name().into(),
            "dql",
            &trace,
            &scenario,
            gamma,
        )?);
    }
    print!("{}", compare_table(&rows));
    let path = a.out.join("sweep.csv");
    std::fs::write(&path, compare_csv(&rows))
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
