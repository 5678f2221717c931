//! Acceptance gate. Each criterion runs in turn and prints one PASS/FAIL
//! line; the process exits nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config as ProptestConfig, TestRunner};

use uavdql_core::baselines::greedy_rollout;
use uavdql_core::env::{distance, generate_scenario, EpisodeTrace, NodeId, Point, SimState};
use uavdql_core::learner::{evaluate_policy, train, train_into, QTablePair, Selector, StateKey};
use uavdql_core::oracle::{optimal_by_dp, optimal_by_permutation};
use uavdql_core::{Hyperparams, PowerParams, Preset, RevenueWeights, RunConfig, Scenario};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

fn six_nodes(seed: u64) -> Scenario {
    generate_scenario(seed, 6, 6, 50.0, 6).unwrap()
}

fn c1_power_model() -> Outcome {
    let p = PowerParams::default();
    let cruise = p.power(5.0).unwrap();
    let hover = p.power(0.0).unwrap();
    check(
        (cruise - 215.84).abs() <= 0.01 && hover == 235.9,
        format!("P(5) = {cruise:.5} W (215.84 ± 0.01), P(0) = {hover} W (235.9 exact)"),
    )
}

fn c2_update_arithmetic() -> Outcome {
    let mut pair = QTablePair::new();
    let s = StateKey {
        uav_cell: uavdql_core::env::Cell::new(0, 0),
        priorities: vec![4, 3, 2, 1],
    };
    let next = StateKey {
        uav_cell: uavdql_core::env::Cell::new(1, 0),
        priorities: vec![0, 3, 2, 1],
    };
    pair.update(&s, 0, -545.84, &next, false, 0.5, 0.95);
    let q = pair.table_a.get(&s, 0);
    if q != -272.92 {
        return Err(format!("worked update gave {q}, expected -272.92"));
    }

    let scenario = six_nodes(31);
    let cfg = RunConfig {
        hyper: Hyperparams {
            episodes: 100,
            ..Hyperparams::default()
        },
        ..RunConfig::default()
    };
    let mut from_a = QTablePair::with_selector(Selector::A);
    let mut from_b = QTablePair::with_selector(Selector::B);
    let curve_a = train_into(&scenario, &cfg, &mut from_a, 5).unwrap();
    let curve_b = train_into(&scenario, &cfg, &mut from_b, 5).unwrap();
    let swapped = from_a.swapped() == from_b && curve_a == curve_b;
    let entries = from_a.table_a.len() + from_a.table_b.len();
    check(
        swapped && entries > 0,
        format!(
            "update = {q}; 100-episode A/B swap symmetry bit-exact: {swapped} ({entries} entries)"
        ),
    )
}

fn c3_oracle_cross_check() -> Outcome {
    let (p, w) = (PowerParams::default(), RevenueWeights::default());
    let start = Instant::now();
    let mut mismatches = Vec::new();
    for seed in 0..20 {
        let s = six_nodes(seed);
        let perm = optimal_by_permutation(&s, &p, &w, 0.95).unwrap();
        let dp = optimal_by_dp(&s, &p, &w, 0.95).unwrap();
        if perm.order != dp.order || !rel_close(perm.discounted_return, dp.discounted_return, 1e-9)
        {
            mismatches.push(seed);
        }
    }
    let elapsed = start.elapsed();
    check(
        mismatches.is_empty() && elapsed < Duration::from_secs(1),
        format!(
            "20 scenarios, mismatched seeds {mismatches:?}, {:.3} s (< 1 s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn c4_learner_beats_greedy() -> Outcome {
    let cfg = RunConfig::default();
    let gamma = cfg.hyper.gamma;
    let mut wins = 0;
    let mut slowest = Duration::ZERO;
    for seed in 0..10u64 {
        let s = six_nodes(seed);
        let started = Instant::now();
        let (tables, curve) = train(&s, &cfg, seed).unwrap();
        let dql = evaluate_policy(&s, &cfg, &tables).unwrap();
        slowest = slowest.max(started.elapsed());
        assert_eq!(curve.len(), 8000);
        let greedy = greedy_rollout(&s, &cfg.power, &cfg.weights).unwrap();
        let oracle = optimal_by_dp(&s, &cfg.power, &cfg.weights, gamma).unwrap();
        let (d, g) = (
            dql.discounted_return(gamma),
            greedy.discounted_return(gamma),
        );
        if d >= g {
            wins += 1;
        }
        println!(
            "    seed {seed}: dql {d:.2} greedy {g:.2} oracle {:.2} gap {:.2} | energy dql {:.0} J greedy {:.0} J",
            oracle.discounted_return,
            oracle.discounted_return - d,
            dql.total_energy(),
            greedy.total_energy()
        );
    }
    check(
        wins >= 8 && slowest < Duration::from_secs(120),
        format!(
            "DQL >= Greedy on {wins}/10 (need 8); slowest scenario {:.2} s",
            slowest.as_secs_f64()
        ),
    )
}

fn c5_weight_regimes() -> Outcome {
    let mut failures = Vec::new();
    let mut used = Vec::new();
    let mut seed = 0u64;
    while used.len() < 5 {
        let s = six_nodes(seed);
        seed += 1;
        let pr = s.priorities();
        if !(pr.contains(&4) && pr.contains(&1)) {
            continue;
        }
        used.push(seed - 1);
        let mut energy = Vec::new();
        let mut high_first = false;
        for preset in [Preset::Dql1, Preset::Dql2, Preset::Dql3] {
            let cfg = RunConfig::default().with_weights(preset.weights());
            let (tables, _) = train(&s, &cfg, seed - 1).unwrap();
            let trace = evaluate_policy(&s, &cfg, &tables).unwrap();
            if preset == Preset::Dql1 {
                let order = trace.order();
                let pos = |class: u8| order.iter().position(|&n| pr[n] == class);
                let last4 = order.iter().rposition(|&n| pr[n] == 4);
                high_first = matches!((last4, pos(1)), (Some(l4), Some(f1)) if l4 < f1);
            }
            energy.push(trace.total_energy());
        }
        let ordered = energy[2] <= energy[1] * 1.01 && energy[1] <= energy[0] * 1.01;
        println!(
            "    seed {}: DQL1 serves all p4 before p1: {high_first}; E(DQL1,2,3) = {:.0}, {:.0}, {:.0} J",
            seed - 1,
            energy[0],
            energy[1],
            energy[2]
        );
        if !(high_first && ordered) {
            failures.push(seed - 1);
        }
    }
    check(
        failures.is_empty(),
        format!("scenarios {used:?}; failing {failures:?}"),
    )
}

/// Shortest open path from `start` through all points, by plain recursion.
fn brute_force_path(start: Point, points: &[Point]) -> f64 {
    fn go(at: Point, rest: &mut Vec<Point>, acc: f64, best: &mut f64) {
        if rest.is_empty() {
            *best = best.min(acc);
            return;
        }
        for i in 0..rest.len() {
            let p = rest.remove(i);
            let d = ((p.x - at.x).powi(2) + (p.y - at.y).powi(2)).sqrt();
            go(p, rest, acc + d, best);
            rest.insert(i, p);
        }
    }
    let mut best = f64::INFINITY;
    go(start, &mut points.to_vec(), 0.0, &mut best);
    best
}

fn c6_shortest_path_degeneracy() -> Outcome {
    let weights = RevenueWeights::new(0.0, 0.0, 1.0).unwrap();
    let power = PowerParams::default();
    let mut bad_paths = Vec::new();
    for n in 1..=7 {
        for seed in 0..4 {
            let s = generate_scenario(1000 + seed, 6, 6, 50.0, n).unwrap();
            let best = optimal_by_dp(&s, &power, &weights, 1.0).unwrap();
            let trace = EpisodeTrace::rollout(&s, &best.order, &power, &weights).unwrap();
            let points: Vec<Point> = s
                .nodes()
                .iter()
                .map(|nd| Point::new(nd.cell.gx as f64 * 50.0, nd.cell.gy as f64 * 50.0))
                .collect();
            let shortest = brute_force_path(Point::new(0.0, 0.0), &points);
            if !rel_close(trace.path_length(), shortest, 1e-9) {
                bad_paths.push((n, seed));
            }
        }
    }

    let mut cfg = RunConfig::default().with_weights(weights);
    cfg.hyper.gamma = 1.0;
    let mut matched = 0;
    for seed in 0..5u64 {
        let s = six_nodes(200 + seed);
        let (tables, _) = train(&s, &cfg, seed).unwrap();
        let learned = evaluate_policy(&s, &cfg, &tables)
            .unwrap()
            .discounted_return(1.0);
        let optimum = optimal_by_dp(&s, &cfg.power, &cfg.weights, 1.0)
            .unwrap()
            .discounted_return;
        let within = (learned - optimum).abs() <= 0.01 * optimum.abs();
        matched += usize::from(within);
        println!(
            "    seed {}: learner {learned:.2} oracle {optimum:.2} within 1%: {within}",
            200 + seed
        );
    }
    check(
        bad_paths.is_empty() && matched >= 3,
        format!("oracle = brute-force shortest path on 28 instances (n<=7), mismatches {bad_paths:?}; learner within 1% on {matched}/5 (need 3)"),
    )
}

fn scenario_strategy() -> impl Strategy<Value = Scenario> {
    (any::<u64>(), 1usize..=8).prop_map(|(seed, n)| generate_scenario(seed, 6, 6, 50.0, n).unwrap())
}

fn c7_trace_invariants() -> Outcome {
    let mut runner = TestRunner::new(ProptestConfig {
        cases: 128,
        failure_persistence: None,
        ..ProptestConfig::default()
    });
    let power = PowerParams::default();
    let weights = RevenueWeights::default();
    let result = runner.run(&(scenario_strategy(), any::<u64>()), |(s, seed)| {
        let n = s.node_count();
        let cfg = RunConfig {
            hyper: Hyperparams {
                episodes: 20,
                eps_full_until: 5,
                eps_zero_at: 15,
                ..Hyperparams::default()
            },
            ..RunConfig::default()
        };
        let (tables, _) = train(&s, &cfg, seed).unwrap();
        for trace in [
            evaluate_policy(&s, &cfg, &tables).unwrap(),
            greedy_rollout(&s, &power, &weights).unwrap(),
        ] {
            prop_assert_eq!(trace.steps.len(), n);
            let mut served: Vec<NodeId> = trace.order();
            served.sort_unstable();
            prop_assert_eq!(served, (0..n).collect::<Vec<_>>());
            prop_assert!(trace.is_complete());
            let sum_ts: f64 = trace.steps.iter().map(|t| t.t_s).sum();
            let by_length = trace.path_length() / power.speed;
            prop_assert!((trace.duration() - sum_ts).abs() <= 1e-9 * sum_ts.max(1.0));
            prop_assert!((trace.duration() - by_length).abs() <= 1e-9 * by_length.max(1.0));
        }

        let greedy = greedy_rollout(&s, &power, &weights).unwrap();
        let mut prev: &SimState = &greedy.initial;
        for t in &greedy.steps {
            for other in prev.unserved() {
                prop_assert!(t.distance <= distance(prev.uav_pos, s.node_position(other)));
            }
            prev = &t.next_state;
        }
        let mut rotated = s.priorities();
        rotated.rotate_left(1);
        let relabeled = s.with_priorities(&rotated).unwrap();
        prop_assert_eq!(
            greedy.order(),
            greedy_rollout(&relabeled, &power, &weights)
                .unwrap()
                .order()
        );
        Ok(())
    });
    let schedule = Hyperparams::default().schedule();
    let (e0, e6400) = (schedule.epsilon(0), schedule.epsilon(6400));
    match result {
        Ok(()) => check(
            e0 == 1.0 && e6400 == 0.0,
            format!("128 random cases passed; epsilon(0) = {e0}, epsilon(6400) = {e6400}"),
        ),
        Err(e) => Err(format!("property failed: {e}")),
    }
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn c8_reproducible_train() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("scenario.txt");
    six_nodes(7).save(&scenario).unwrap();
    let bin = env!("CARGO_BIN_EXE_uavdql");
    let run = |out: &str| {
        let status = Command::new(bin)
            .args(["train", "--seed", "42", "--weights", "dql2", "--scenario"])
            .arg(&scenario)
            .arg("--out")
            .arg(dir.path().join(out))
            .env_remove("UAVDQL_SEED")
            .output()
            .unwrap();
        assert!(
            status.status.success(),
            "{}",
            String::from_utf8_lossy(&status.stderr)
        );
    };
    run("first");
    run("second");
    let mut same = Vec::new();
    for file in ["curve.csv", "qtables.txt", "trace.csv"] {
        let a = read(&dir.path().join("first").join(file));
        let b = read(&dir.path().join("second").join(file));
        same.push((file, !a.is_empty() && a == b));
    }
    check(
        same.iter().all(|(_, ok)| *ok),
        format!("byte-identical outputs: {same:?}"),
    )
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 power model", c1_power_model),
        ("2 update arithmetic + A/B symmetry", c2_update_arithmetic),
        ("3 oracle cross-check", c3_oracle_cross_check),
        ("4 learner vs greedy", c4_learner_beats_greedy),
        ("5 weight-regime orderings", c5_weight_regimes),
        ("6 shortest-path degeneracy", c6_shortest_path_degeneracy),
        ("7 episode/trace invariants", c7_trace_invariants),
        ("8 reproducible train", c8_reproducible_train),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {name}: PASS ({secs:.2} s) {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {name}: FAIL ({secs:.2} s) {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 8 acceptance criteria passed");
}
