//! Plant models: modified Shepherd battery cell, pack sizing, Arrhenius
//! capacity loss and a series-resistance supercapacitor pack.

mod battery;
mod degradation;
mod supercap;

pub use battery::{
    battery_current_from_power, battery_terminal_voltage, step_battery, BatteryParams,
    BatteryState, BatteryStep,
};
pub use degradation::{
    capacity_loss, cycle_life_objective, end_of_life_throughput, DegradationParams,
};
pub use supercap::{
    max_deliverable_power, request_bounds, step_supercapacitor, ScBand, ScParams, ScState, ScStep,
};

pub(crate) use battery::charge_power_limit;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PowertrainError {
    #[error("battery depleted: it = {it} Ah reached Q_max = {q_max} Ah")]
    Depleted { it: f64, q_max: f64 },
    #[error("no mass left for battery cells: {remaining_kg} kg after supercapacitors")]
    Sizing { remaining_kg: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
}

/// Number of cells that fit in the HESS mass budget next to `n_sc` banks.
pub fn battery_count(
    m_hess: f64,
    n_sc: usize,
    m_bank: f64,
    m_cell: f64,
) -> Result<usize, PowertrainError> {
    let remaining = m_hess - n_sc as f64 * m_bank;
    let n = (remaining / m_cell).floor();
    if !(remaining > 0.0) || n < 1.0 {
        return Err(PowertrainError::Sizing {
            remaining_kg: remaining,
        });
    }
    let mut n = n as usize;
    // floor of a rounded quotient can overshoot by one
    while n as f64 * m_cell + n_sc as f64 * m_bank > m_hess {
        n -= 1;
    }
    Ok(n)
}
