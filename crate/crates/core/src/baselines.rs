//! Nearest-neighbor serving: always fly to the closest unserved node.
//! Priorities play no part in the choice; revenue is still accounted so the
//! baseline can be compared on the same scale as the learner.

use crate::energy::PowerParams;
use crate::env::{apply_action, distance, EpisodeTrace, NodeId, Scenario, SimState};
use crate::error::Result;
use crate::revenue::RevenueWeights;

/// Closest unserved node to the UAV, lowest id on ties.
pub fn nearest_unserved(scenario: &Scenario, state: &SimState) -> Option<NodeId> {
    let mut best: Option<(NodeId, f64)> = None;
    for id in state.unserved() {
        let d = distance(state.uav_pos, scenario.node_position(id));
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((id, d));
        }
    }
    best.map(|(id, _)| id)
}

pub fn greedy_rollout(
    scenario: &Scenario,
    power: &PowerParams,
    weights: &RevenueWeights,
) -> Result<EpisodeTrace> {
    let mut trace = EpisodeTrace::new(SimState::initial(scenario));
    while let Some(next) = nearest_unserved(scenario, trace.last_state()) {
        let t = apply_action(scenario, trace.last_state(), next, power, weights)?;
        trace.steps.push(t);
    }
    Ok(trace)
}
