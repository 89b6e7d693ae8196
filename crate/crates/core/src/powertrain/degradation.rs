use serde::{Deserialize, Serialize};

use super::PowertrainError;

/// Semi-empirical Arrhenius capacity-loss fit with C-rate dependent
/// pre-exponential factor and activation energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegradationParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Activation energy intercept, J.
    pub d: f64,
    /// Activation energy slope, J per C-rate.
    pub e: f64,
    /// Ah-throughput exponent.
    #[serde(default = "default_z")]
    pub z: f64,
    /// Gas constant, J/(mol K).
    #[serde(rename = "R_gas", default = "default_r_gas")]
    pub r_gas: f64,
    /// Cell temperature, K.
    #[serde(rename = "T", default = "default_t")]
    pub t: f64,
    /// Capacity loss, percent, at which the cell reaches end of life.
    #[serde(default = "default_eol")]
    pub eol_percent: f64,
}

fn default_z() -> f64 {
    0.55
}
fn default_r_gas() -> f64 {
    8.314
}
fn default_t() -> f64 {
    296.15
}
fn default_eol() -> f64 {
    20.0
}

impl Default for DegradationParams {
    fn default() -> Self {
        Self {
            a: 1.345,
            b: 0.2563,
            c: 9.179,
            d: 46868.0,
            e: -470.3,
            z: default_z(),
            r_gas: default_r_gas(),
            t: default_t(),
            eol_percent: default_eol(),
        }
    }
}

impl DegradationParams {
    pub fn validate(&self) -> Result<(), PowertrainError> {
        if !(self.t > 0.0) {
            return Err(PowertrainError::InvalidParam(format!("T = {} must be positive", self.t)));
        }
        if !(self.z > 0.0 && self.z <= 1.0) {
            return Err(PowertrainError::InvalidParam(format!("z = {} must be in (0, 1]", self.z)));
        }
        if !(self.r_gas > 0.0 && self.eol_percent > 0.0) {
            return Err(PowertrainError::InvalidParam(
                "R_gas and eol_percent must be positive".into(),
            ));
        }
        Ok(())
    }

    /// `ln A` of the pre-exponential factor at `c_rate`.
    pub fn ln_pre_exponential(&self, c_rate: f64) -> f64 {
        self.a * (-self.b * c_rate).exp() + self.c
    }

    /// Activation energy at `c_rate`, J.
    pub fn activation_energy(&self, c_rate: f64) -> f64 {
        self.d + self.e * c_rate
    }

    /// Loss per unit `Ah^z`, i.e. `A exp(-Ea / (R T))`.
    fn rate_factor(&self, c_rate: f64) -> f64 {
        (self.ln_pre_exponential(c_rate) - self.activation_energy(c_rate) / (self.r_gas * self.t))
            .exp()
    }
}

/// Capacity loss in percent after `ah` ampere-hours of throughput at a
/// constant `c_rate`.
pub fn capacity_loss(ah: f64, c_rate: f64, dp: &DegradationParams) -> f64 {
    if ah <= 0.0 {
        return 0.0;
    }
    dp.rate_factor(c_rate) * ah.powf(dp.z)
}

/// Throughput, Ah, at which the capacity loss reaches the end-of-life
/// threshold at `c_rate`.
pub fn end_of_life_throughput(c_rate: f64, dp: &DegradationParams) -> f64 {
    (dp.eol_percent / dp.rate_factor(c_rate)).powf(1.0 / dp.z)
}

/// Laps until end of life for a cell that averages `avg_current` amperes of
/// discharge and delivers `ah_per_lap` ampere-hours each lap.
///
/// Returns `f64::INFINITY` when the cell is never discharged.
pub fn cycle_life_objective(avg_current: f64, ah_per_lap: f64, dp: &DegradationParams, q_max: f64) -> f64 {
    if avg_current <= 0.0 || ah_per_lap <= 0.0 {
        return f64::INFINITY;
    }
    end_of_life_throughput(avg_current / q_max, dp) / ah_per_lap
}
