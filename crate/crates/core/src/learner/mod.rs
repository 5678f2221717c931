//! Tabular Double Q-Learning over serving orders.
//!
//! Each decision is "which unserved node next". The selected table both
//! chooses the action and receives the update. After every update the
//! selector moves on according to [`SelectorRule`]: a fair coin by default,
//! or strict A, B, A, ... alternation.
//!
//! Strict alternation starting every episode on the same table means that
//! with an even node count A only ever learns at even depths and B at odd
//! ones, so each table's bootstrap argmax reads rows it never wrote.

mod schedule;
mod table;

pub use schedule::{EpsilonSchedule, Hyperparams, SelectorRule};
pub use table::{QTable, QTablePair, Selector, StateKey};

use rand::Rng;

use crate::config::RunConfig;
use crate::env::{apply_action, EpisodeTrace, NodeId, Scenario, SimState};
use crate::error::{Error, Result};
use crate::seeding::{self, Stream};

/// Epsilon-greedy choice with the currently selected table.
pub fn select_action<R: Rng + ?Sized>(
    tables: &QTablePair,
    state: &StateKey,
    eps: f64,
    rng: &mut R,
) -> Result<NodeId> {
    let unserved: Vec<NodeId> = state.unserved().collect();
    if unserved.is_empty() {
        return Err(Error::Contract("no unserved node to select".into()));
    }
    if rng.gen::<f64>() < eps {
        return Ok(unserved[rng.gen_range(0..unserved.len())]);
    }
    Ok(tables.active().argmax(state).unwrap_or(unserved[0]))
}

/// One training episode from the start cell until every node is served.
pub fn run_episode<R: Rng + ?Sized>(
    scenario: &Scenario,
    cfg: &RunConfig,
    tables: &mut QTablePair,
    episode: usize,
    rng: &mut R,
) -> Result<EpisodeTrace> {
    let eps = cfg.hyper.schedule().epsilon(episode);
    let mut trace = EpisodeTrace::new(SimState::initial(scenario));
    let mut key = StateKey::of(&trace.initial);
    while !key.is_terminal() {
        let action = select_action(tables, &key, eps, rng)?;
        let t = apply_action(
            scenario,
            trace.last_state(),
            action,
            &cfg.power,
            &cfg.weights,
        )?;
        let next = StateKey::of(&t.next_state);
        tables.update(
            &key,
            action,
            t.revenue,
            &next,
            next.is_terminal(),
            cfg.hyper.alpha,
            cfg.hyper.gamma,
        );
        // update() toggled; undo it half the time under the random rule
        if cfg.hyper.selector_rule == SelectorRule::Random && rng.gen::<bool>() {
            tables.selector = tables.selector.toggled();
        }
        trace.steps.push(t);
        key = next;
    }
    Ok(trace)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub episode: usize,
    /// Undiscounted sum of step revenues.
    pub accumulated_revenue: f64,
    pub total_energy: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingCurve {
    pub points: Vec<CurvePoint>,
}

impl TrainingCurve {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Trains fresh tables for `cfg.hyper.episodes` episodes.
pub fn train(
    scenario: &Scenario,
    cfg: &RunConfig,
    seed: u64,
) -> Result<(QTablePair, TrainingCurve)> {
    let mut tables = QTablePair::new();
    let curve = train_into(scenario, cfg, &mut tables, seed)?;
    Ok((tables, curve))
}

/// Continues training `tables` in place; episode indices start at 0.
pub fn train_into(
    scenario: &Scenario,
    cfg: &RunConfig,
    tables: &mut QTablePair,
    seed: u64,
) -> Result<TrainingCurve> {
    cfg.validate()?;
    let mut rng = seeding::stream(seed, Stream::Exploration);
    let schedule = cfg.hyper.schedule();
    let mut points = Vec::with_capacity(cfg.hyper.episodes);
    for episode in 0..cfg.hyper.episodes {
        let trace = run_episode(scenario, cfg, tables, episode, &mut rng)?;
        points.push(CurvePoint {
            episode,
            accumulated_revenue: trace.accumulated_revenue(),
            total_energy: trace.total_energy(),
            epsilon: schedule.epsilon(episode),
        });
    }
    Ok(TrainingCurve { points })
}

/// Greedy rollout on the mean of both tables, without exploration or
/// updates.
pub fn evaluate_policy(
    scenario: &Scenario,
    cfg: &RunConfig,
    tables: &QTablePair,
) -> Result<EpisodeTrace> {
    let mut trace = EpisodeTrace::new(SimState::initial(scenario));
    loop {
        let key = StateKey::of(trace.last_state());
        let Some(action) = tables.mean_argmax(&key) else {
            break;
        };
        let t = apply_action(
            scenario,
            trace.last_state(),
            action,
            &cfg.power,
            &cfg.weights,
        )?;
        trace.steps.push(t);
    }
    Ok(trace)
}
