//! Rotary-wing propulsion power and the energy spent on a straight leg at
//! constant cruise speed.
//!
//! The power curve is the usual three-term model: blade profile power,
//! induced power, and fuselage parasite power,
//!
//! ```text
//! P(V) = P0 (1 + 3V²/U²) + Pi (sqrt(1 + V⁴/4v0⁴) - V²/2v0²)^½ + ½ d0 ρ s A V³
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Airframe constants of the power model plus the cruise speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerParams {
    /// Blade profile power in hover, W.
    pub blade_profile_power: f64,
    /// Induced power in hover, W.
    pub induced_power: f64,
    /// Rotor blade tip speed, m/s.
    pub tip_speed: f64,
    /// Mean rotor induced velocity in hover, m/s.
    pub mean_induced_velocity: f64,
    /// Fuselage drag ratio.
    pub fuselage_drag_ratio: f64,
    /// Air density, kg/m³.
    pub air_density: f64,
    /// Rotor solidity.
    pub rotor_solidity: f64,
    /// Rotor disc area, m².
    pub rotor_disc_area: f64,
    /// Cruise speed, m/s.
    pub speed: f64,
}

impl Default for PowerParams {
    fn default() -> Self {
        Self {
            blade_profile_power: 29.4,
            induced_power: 206.5,
            tip_speed: 96.0,
            mean_induced_velocity: 7.5,
            fuselage_drag_ratio: 0.9,
            air_density: 1.225,
            rotor_solidity: 0.1,
            rotor_disc_area: 0.181,
            speed: 5.0,
        }
    }
}

impl PowerParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("blade_profile_power", self.blade_profile_power),
            ("induced_power", self.induced_power),
            ("tip_speed", self.tip_speed),
            ("mean_induced_velocity", self.mean_induced_velocity),
            ("fuselage_drag_ratio", self.fuselage_drag_ratio),
            ("air_density", self.air_density),
            ("rotor_solidity", self.rotor_solidity),
            ("rotor_disc_area", self.rotor_disc_area),
            ("speed", self.speed),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Domain(format!(
                    "power parameter {name} must be positive and finite, got {value}"
                )));
            }
        }
        Ok(())
    }

    /// The three terms of the power curve at `speed`: (blade profile,
    /// induced, parasite).
    pub fn power_terms(&self, speed: f64) -> Result<(f64, f64, f64)> {
        if !(speed >= 0.0 && speed.is_finite()) {
            return Err(Error::Domain(format!(
                "speed must be finite and nonnegative, got {speed}"
            )));
        }
        let v2 = speed * speed;
        let u2 = self.tip_speed * self.tip_speed;
        let v0_2 = self.mean_induced_velocity * self.mean_induced_velocity;

        let profile = self.blade_profile_power * (1.0 + 3.0 * v2 / u2);
        // sqrt(1 + x²) >= x for x >= 0, so the radicand is never negative;
        // max() only absorbs rounding.
        let inner = (1.0 + v2 * v2 / (4.0 * v0_2 * v0_2)).sqrt() - v2 / (2.0 * v0_2);
        let induced = self.induced_power * inner.max(0.0).sqrt();
        let parasite = 0.5
            * self.fuselage_drag_ratio
            * self.air_density
            * self.rotor_solidity
            * self.rotor_disc_area
            * v2
            * speed;
        Ok((profile, induced, parasite))
    }

    /// Propulsion power at `speed`, W.
    pub fn power(&self, speed: f64) -> Result<f64> {
        let (profile, induced, parasite) = self.power_terms(speed)?;
        Ok(profile + induced + parasite)
    }

    /// Power at the configured cruise speed, W.
    pub fn cruise_power(&self) -> f64 {
        // speed is validated positive wherever params enter the system
        self.power(self.speed).unwrap_or(f64::NAN)
    }

    /// Energy to fly `distance` meters at the cruise speed, J.
    pub fn flight_energy(&self, distance: f64) -> Result<f64> {
        if !(distance >= 0.0 && distance.is_finite()) {
            return Err(Error::Domain(format!(
                "distance must be finite and nonnegative, got {distance}"
            )));
        }
        if distance == 0.0 {
            return Ok(0.0);
        }
        Ok(self.power(self.speed)? * (distance / self.speed))
    }

    /// Flight time for `distance` meters at the cruise speed, s.
    pub fn flight_time(&self, distance: f64) -> f64 {
        distance / self.speed
    }
}

/// Free-function form of [`PowerParams::power`].
pub fn power(params: &PowerParams, speed: f64) -> Result<f64> {
    params.power(speed)
}

/// Free-function form of [`PowerParams::flight_energy`].
pub fn flight_energy(params: &PowerParams, distance: f64) -> Result<f64> {
    params.flight_energy(distance)
}
