//! Per-service revenue: a priority reward minus a waiting-delay penalty and a
//! flight-energy penalty.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RevenueWeights {
    /// Reward per unit of served priority.
    pub w1: f64,
    /// Penalty per unit of waiting priority per second, 1/s.
    pub w2: f64,
    /// Penalty per joule of flight energy, 1/J.
    pub w3: f64,
}

impl Default for RevenueWeights {
    fn default() -> Self {
        Preset::Default.weights()
    }
}

impl RevenueWeights {
    pub fn new(w1: f64, w2: f64, w3: f64) -> Result<Self> {
        let w = Self { w1, w2, w3 };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("w1", self.w1), ("w2", self.w2), ("w3", self.w3)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Domain(format!(
                    "weight {name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            w1: self.w1 * c,
            w2: self.w2 * c,
            w3: self.w3 * c,
        }
    }
}

/// Named weight regimes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Preset {
    Default,
    /// Very high reward for serving high-priority nodes.
    Dql1,
    /// Very high waiting-delay penalty.
    Dql2,
    /// Very high energy penalty.
    Dql3,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Default, Preset::Dql1, Preset::Dql2, Preset::Dql3];

    pub fn weights(self) -> RevenueWeights {
        let (w1, w2, w3) = match self {
            Preset::Default => (30.0, 7.5, 0.1),
            Preset::Dql1 => (30_000.0, 7.5, 0.1),
            Preset::Dql2 => (30.0, 750.0, 0.1),
            Preset::Dql3 => (30.0, 7.5, 100.0),
        };
        RevenueWeights { w1, w2, w3 }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Default => "default",
            Preset::Dql1 => "dql1",
            Preset::Dql2 => "dql2",
            Preset::Dql3 => "dql3",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Domain(format!("unknown weight preset `{s}`")))
    }
}

/// Accepts a preset name or an explicit `w1,w2,w3` triple.
impl FromStr for RevenueWeights {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Ok(p) = s.parse::<Preset>() {
            return Ok(p.weights());
        }
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::Domain(format!(
                "weights must be a preset (default, dql1, dql2, dql3) or w1,w2,w3; got `{s}`"
            )));
        }
        let mut vals = [0.0; 3];
        for (slot, part) in vals.iter_mut().zip(&parts) {
            *slot = part
                .parse()
                .map_err(|_| Error::Domain(format!("weight `{part}` is not a number")))?;
        }
        RevenueWeights::new(vals[0], vals[1], vals[2])
    }
}

/// Revenue for serving a node of priority `served_priority` after `t_s`
/// seconds of flight that consumed `energy` joules, while nodes with total
/// priority `waiting_priority_sum` (excluding the served one) kept waiting.
pub fn revenue(
    weights: &RevenueWeights,
    served_priority: u8,
    waiting_priority_sum: u32,
    t_s: f64,
    energy: f64,
) -> Result<f64> {
    if served_priority == 0 {
        return Err(Error::Contract(
            "served priority is 0: node was already served".into(),
        ));
    }
    Ok(weights.w1 * f64::from(served_priority)
        - weights.w2 * f64::from(waiting_priority_sum) * t_s
        - weights.w3 * energy)
}
