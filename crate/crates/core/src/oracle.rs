//! Exact maximizers of the discounted mission revenue `Σ γ^k R_k` over all
//! serving orders: plain enumeration for small instances and a subset DP
//! over (last served node, served set) for larger ones.

use crate::energy::PowerParams;
use crate::env::{apply_action, discounted_sum, Leg, NodeId, Point, Scenario, SimState};
use crate::error::{Error, Result};
use crate::revenue::RevenueWeights;

pub const PERMUTATION_LIMIT: usize = 9;
pub const DP_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalOrder {
    pub order: Vec<NodeId>,
    pub discounted_return: f64,
}

/// Enumerates all `n!` orders in lexicographic order; the first maximal one
/// wins.
pub fn optimal_by_permutation(
    scenario: &Scenario,
    power: &PowerParams,
    weights: &RevenueWeights,
    gamma: f64,
) -> Result<OptimalOrder> {
    let n = scenario.node_count();
    if n > PERMUTATION_LIMIT {
        return Err(Error::Capacity {
            what: "permutation oracle",
            limit: PERMUTATION_LIMIT,
            nodes: n,
        });
    }
    let mut search = Enumeration {
        scenario,
        power,
        weights,
        gamma,
        order: Vec::with_capacity(n),
        revenues: Vec::with_capacity(n),
        best: None,
    };
    search.descend(&SimState::initial(scenario))?;
    let (order, ret) = search.best.expect("at least the empty order");
    Ok(OptimalOrder {
        order,
        discounted_return: ret,
    })
}

struct Enumeration<'a> {
    scenario: &'a Scenario,
    power: &'a PowerParams,
    weights: &'a RevenueWeights,
    gamma: f64,
    order: Vec<NodeId>,
    revenues: Vec<f64>,
    best: Option<(Vec<NodeId>, f64)>,
}

impl Enumeration<'_> {
    fn descend(&mut self, state: &SimState) -> Result<()> {
        let unserved: Vec<NodeId> = state.unserved().collect();
        if unserved.is_empty() {
            let ret = discounted_sum(self.revenues.iter().copied(), self.gamma);
            if self.best.as_ref().is_none_or(|(_, b)| ret > *b) {
                self.best = Some((self.order.clone(), ret));
            }
            return Ok(());
        }
        for a in unserved {
            let t = apply_action(self.scenario, state, a, self.power, self.weights)?;
            self.order.push(a);
            self.revenues.push(t.revenue);
            self.descend(&t.next_state)?;
            self.order.pop();
            self.revenues.pop();
        }
        Ok(())
    }
}

/// Held-Karp style DP. `value(pos, mask) = max_j R(pos -> j | mask) +
/// γ value(j, mask ∪ {j})`, evaluated in the same Horner order as
/// [`discounted_sum`], so results agree bit-for-bit with enumeration.
pub fn optimal_by_dp(
    scenario: &Scenario,
    power: &PowerParams,
    weights: &RevenueWeights,
    gamma: f64,
) -> Result<OptimalOrder> {
    let n = scenario.node_count();
    if n > DP_LIMIT {
        return Err(Error::Capacity {
            what: "subset DP oracle",
            limit: DP_LIMIT,
            nodes: n,
        });
    }
    if n == 0 {
        return Ok(OptimalOrder {
            order: Vec::new(),
            discounted_return: 0.0,
        });
    }
    let dp = SubsetDp::solve(scenario, power, weights, gamma)?;
    let mut order = Vec::with_capacity(n);
    let mut pos = None;
    let mut mask = 0usize;
    while mask != dp.full {
        let (next, _) = dp.best_step(pos, mask)?;
        order.push(next);
        mask |= 1 << next;
        pos = Some(next);
    }
    Ok(OptimalOrder {
        order,
        discounted_return: dp.start_value,
    })
}

struct SubsetDp<'a> {
    scenario: &'a Scenario,
    power: &'a PowerParams,
    weights: &'a RevenueWeights,
    gamma: f64,
    n: usize,
    full: usize,
    priorities: Vec<u8>,
    /// `value[mask * n + last]`, only meaningful when `last ∈ mask`.
    value: Vec<f64>,
    start_value: f64,
}

impl<'a> SubsetDp<'a> {
    fn solve(
        scenario: &'a Scenario,
        power: &'a PowerParams,
        weights: &'a RevenueWeights,
        gamma: f64,
    ) -> Result<Self> {
        let n = scenario.node_count();
        let full = (1usize << n) - 1;
        let mut dp = Self {
            scenario,
            power,
            weights,
            gamma,
            n,
            full,
            priorities: scenario.priorities(),
            value: vec![f64::NAN; (full + 1) * n],
            start_value: f64::NAN,
        };
        for last in 0..n {
            dp.value[full * n + last] = 0.0;
        }
        for mask in (1..full).rev() {
            for last in (0..n).filter(|&l| mask & (1 << l) != 0) {
                let (_, v) = dp.best_step(Some(last), mask)?;
                dp.value[mask * n + last] = v;
            }
        }
        dp.start_value = dp.best_step(None, 0)?.1;
        Ok(dp)
    }

    fn leg(&self, from: Point, to: NodeId, mask: usize) -> Result<Leg> {
        let remaining: u32 = (0..self.n)
            .filter(|&i| mask & (1 << i) == 0)
            .map(|i| u32::from(self.priorities[i]))
            .sum();
        let served = self.priorities[to];
        Leg::compute(
            from,
            self.scenario.node_position(to),
            served,
            remaining - u32::from(served),
            self.power,
            self.weights,
        )
    }

    /// Best next node from `pos` (None = start) with `mask` served.
    fn best_step(&self, pos: Option<NodeId>, mask: usize) -> Result<(NodeId, f64)> {
        let from = match pos {
            Some(p) => self.scenario.node_position(p),
            None => self.scenario.start_position(),
        };
        let mut best: Option<(NodeId, f64)> = None;
        for j in (0..self.n).filter(|&j| mask & (1 << j) == 0) {
            let next_mask = mask | (1 << j);
            let tail = self.value[next_mask * self.n + j];
            let v = self.leg(from, j, mask)?.revenue + self.gamma * tail;
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((j, v));
            }
        }
        Ok(best.expect("mask is not full"))
    }
}
