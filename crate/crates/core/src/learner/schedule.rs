use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparams {
    /// Learning rate, in (0, 1].
    pub alpha: f64,
    /// Per-decision discount factor, in [0, 1].
    pub gamma: f64,
    pub episodes: usize,
    /// Episodes before this index explore fully.
    pub eps_full_until: usize,
    /// Episodes from this index on never explore.
    pub eps_zero_at: usize,
    pub selector_rule: SelectorRule,
}

/// How the acting/updated table changes between decisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectorRule {
    /// Switch tables with probability 1/2 after each update.
    #[default]
    Random,
    /// Switch tables after every update.
    Alternate,
}

impl std::str::FromStr for SelectorRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "random" => Ok(SelectorRule::Random),
            "alternate" => Ok(SelectorRule::Alternate),
            _ => Err(Error::Domain(format!(
                "unknown selector rule `{s}` (random|alternate)"
            ))),
        }
    }
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            gamma: 0.95,
            episodes: 8000,
            eps_full_until: 1000,
            eps_zero_at: 6400,
            selector_rule: SelectorRule::Random,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Domain(format!(
                "alpha must be in (0, 1], got {}",
                self.alpha
            )));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::Domain(format!(
                "gamma must be in [0, 1], got {}",
                self.gamma
            )));
        }
        if self.eps_full_until > self.eps_zero_at {
            return Err(Error::Domain(format!(
                "eps_full_until ({}) must not exceed eps_zero_at ({})",
                self.eps_full_until, self.eps_zero_at
            )));
        }
        // a shortened run may stop before the ramp ends; only the ramp order
        // is structural
        Ok(())
    }

    pub fn schedule(&self) -> EpsilonSchedule {
        EpsilonSchedule {
            full_until: self.eps_full_until,
            zero_at: self.eps_zero_at,
        }
    }
}

/// Exploration rate per episode: 1 before `full_until`, 0 from `zero_at`,
/// linear in between.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpsilonSchedule {
    pub full_until: usize,
    pub zero_at: usize,
}

impl EpsilonSchedule {
    pub fn epsilon(&self, episode: usize) -> f64 {
        if episode < self.full_until {
            1.0
        } else if episode >= self.zero_at {
            0.0
        } else {
            let span = (self.zero_at - self.full_until) as f64;
            ((self.zero_at - episode) as f64 / span).clamp(0.0, 1.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_ramp() {
        let s = Hyperparams::default().schedule();
        assert_eq!(s.epsilon(0), 1.0);
        assert_eq!(s.epsilon(999), 1.0);
        assert_eq!(s.epsilon(1000), 1.0);
        assert_eq!(s.epsilon(3700), 0.5);
        assert_eq!(s.epsilon(6399), 1.0 / 5400.0);
        assert_eq!(s.epsilon(6400), 0.0);
        assert_eq!(s.epsilon(7999), 0.0);
    }

    #[test]
    fn step_schedule() {
        let s = EpsilonSchedule {
            full_until: 10,
            zero_at: 10,
        };
        assert_eq!(s.epsilon(9), 1.0);
        assert_eq!(s.epsilon(10), 0.0);
    }

    #[test]
    fn validation() {
        assert!(Hyperparams::default().validate().is_ok());
        assert!(Hyperparams {
            alpha: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(Hyperparams {
            alpha: 1.5,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(Hyperparams {
            gamma: -0.1,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(Hyperparams {
            eps_full_until: 7000,
            ..Default::default()
        }
        .validate()
        .is_err());
    }

    proptest! {
        #[test]
        fn bounded_and_nonincreasing(full in 0usize..500, extra in 0usize..500, e in 0usize..1200) {
            let s = EpsilonSchedule { full_until: full, zero_at: full + extra };
            let (a, b) = (s.epsilon(e), s.epsilon(e + 1));
            prop_assert!((0.0..=1.0).contains(&a));
            prop_assert!(b <= a);
        }
    }
}
