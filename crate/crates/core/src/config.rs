use serde::{Deserialize, Serialize};

use crate::energy::PowerParams;
use crate::error::Result;
use crate::learner::Hyperparams;
use crate::revenue::RevenueWeights;

/// Everything a training or evaluation run needs besides the scenario.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub power: PowerParams,
    pub weights: RevenueWeights,
    pub hyper: Hyperparams,
}

impl RunConfig {
    pub fn with_weights(mut self, weights: RevenueWeights) -> Self {
        self.weights = weights;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.power.validate()?;
        self.weights.validate()?;
        self.hyper.validate()
    }
}
