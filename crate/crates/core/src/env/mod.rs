//! Scenario geometry and the serve-a-node transition.
//!
//! An episode starts with the UAV at the start cell and every node waiting
//! at its initial priority. Each action flies straight to one unserved node
//! at cruise speed, collects its data instantly, and zeroes its priority. The
//! episode ends once every priority is zero; there is no return leg.

mod scenario;

pub use scenario::{generate_scenario, Cell, NodePoint, Point, Scenario, MAX_PRIORITY};

use crate::energy::PowerParams;
use crate::error::{Error, Result};
use crate::revenue::{revenue, RevenueWeights};

pub type NodeId = usize;

pub fn distance(a: Point, b: Point) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Mutable episode state.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub uav_pos: Point,
    /// Grid cell the UAV is perched over (the start cell or a node's cell).
    pub uav_cell: Cell,
    /// Current priority per node; 0 once served.
    pub priorities: Vec<u8>,
    /// Seconds since episode start.
    pub clock: f64,
}

impl SimState {
    pub fn initial(scenario: &Scenario) -> Self {
        Self {
            uav_pos: scenario.start_position(),
            uav_cell: scenario.uav_start(),
            priorities: scenario.priorities(),
            clock: 0.0,
        }
    }

    pub fn is_terminal(&self) -> bool {
        is_terminal(self)
    }

    pub fn unserved(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.priorities
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0)
            .map(|(i, _)| i)
    }

    pub fn waiting_sum(&self) -> u32 {
        self.priorities.iter().map(|&p| u32::from(p)).sum()
    }
}

pub fn is_terminal(state: &SimState) -> bool {
    state.priorities.iter().all(|&p| p == 0)
}

/// Flight and revenue accounting for one leg.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leg {
    pub distance: f64,
    pub t_s: f64,
    pub energy: f64,
    pub revenue: f64,
}

impl Leg {
    /// Leg from `from` to `to`, serving a node of priority `served_priority`
    /// while `waiting_others` priority units (excluding it) keep waiting.
    pub fn compute(
        from: Point,
        to: Point,
        served_priority: u8,
        waiting_others: u32,
        power: &PowerParams,
        weights: &RevenueWeights,
    ) -> Result<Self> {
        let distance = distance(from, to);
        let t_s = power.flight_time(distance);
        let energy = power.flight_energy(distance)?;
        let revenue = revenue(weights, served_priority, waiting_others, t_s, energy)?;
        Ok(Self {
            distance,
            t_s,
            energy,
            revenue,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub action: NodeId,
    /// Priority of the served node before service.
    pub priority: u8,
    pub t_s: f64,
    pub distance: f64,
    pub energy: f64,
    pub revenue: f64,
    pub next_state: SimState,
}

/// Flies to node `action`, serves it and returns the transition.
pub fn apply_action(
    scenario: &Scenario,
    state: &SimState,
    action: NodeId,
    power: &PowerParams,
    weights: &RevenueWeights,
) -> Result<Transition> {
    let Some(&priority) = state.priorities.get(action) else {
        return Err(Error::Contract(format!(
            "action {action} is not a node of this scenario"
        )));
    };
    if priority == 0 {
        return Err(Error::Contract(format!("node {action} is already served")));
    }
    let target = scenario.node_position(action);
    let waiting_others = state.waiting_sum() - u32::from(priority);
    let leg = Leg::compute(
        state.uav_pos,
        target,
        priority,
        waiting_others,
        power,
        weights,
    )?;

    let mut priorities = state.priorities.clone();
    priorities[action] = 0;
    let next_state = SimState {
        uav_pos: target,
        uav_cell: scenario.nodes()[action].cell,
        priorities,
        clock: state.clock + leg.t_s,
    };
    Ok(Transition {
        action,
        priority,
        t_s: leg.t_s,
        distance: leg.distance,
        energy: leg.energy,
        revenue: leg.revenue,
        next_state,
    })
}

/// Sum of `γ^k R_k`, evaluated from the last step backwards
/// (`R0 + γ(R1 + γ(R2 + ...))`). Every discounted return in the crate goes
/// through this so that equal revenue sequences give bit-equal returns.
pub fn discounted_sum(revenues: impl DoubleEndedIterator<Item = f64>, gamma: f64) -> f64 {
    revenues.rev().fold(0.0, |acc, r| r + gamma * acc)
}

/// Ordered record of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeTrace {
    pub initial: SimState,
    pub steps: Vec<Transition>,
}

impl EpisodeTrace {
    pub fn new(initial: SimState) -> Self {
        Self {
            initial,
            steps: Vec::new(),
        }
    }

    /// Replays a fixed serving order.
    pub fn rollout(
        scenario: &Scenario,
        order: &[NodeId],
        power: &PowerParams,
        weights: &RevenueWeights,
    ) -> Result<Self> {
        let mut trace = Self::new(SimState::initial(scenario));
        for &a in order {
            let t = apply_action(scenario, trace.last_state(), a, power, weights)?;
            trace.steps.push(t);
        }
        Ok(trace)
    }

    pub fn last_state(&self) -> &SimState {
        self.steps
            .last()
            .map(|t| &t.next_state)
            .unwrap_or(&self.initial)
    }

    pub fn is_complete(&self) -> bool {
        is_terminal(self.last_state())
    }

    pub fn order(&self) -> Vec<NodeId> {
        self.steps.iter().map(|t| t.action).collect()
    }

    pub fn accumulated_revenue(&self) -> f64 {
        self.steps.iter().map(|t| t.revenue).sum()
    }

    pub fn discounted_return(&self, gamma: f64) -> f64 {
        discounted_sum(self.steps.iter().map(|t| t.revenue), gamma)
    }

    pub fn total_energy(&self) -> f64 {
        self.steps.iter().map(|t| t.energy).sum()
    }

    pub fn path_length(&self) -> f64 {
        self.steps.iter().map(|t| t.distance).sum()
    }

    pub fn duration(&self) -> f64 {
        self.last_state().clock
    }
}
