use serde::{Deserialize, Serialize};

use super::PowertrainError;

/// Supercapacitor bank parameters. The pack is `n_sc` identical banks in
/// series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScParams {
    /// Capacitance of one bank, F.
    #[serde(rename = "C_bank")]
    pub c_bank: f64,
    /// Series resistance of one bank, ohm.
    #[serde(rename = "R_s")]
    pub r_s: f64,
    /// Rated voltage of one bank, V.
    #[serde(rename = "V_bank_max", default = "default_v_bank")]
    pub v_bank_max: f64,
    /// Mass of one bank, kg.
    pub m_bank: f64,
    /// DC/DC converter efficiency.
    pub eta_dc: f64,
    #[serde(default = "default_n_sc")]
    pub n_sc: usize,
}

fn default_v_bank() -> f64 {
    2.85
}
fn default_n_sc() -> usize {
    1
}

impl Default for ScParams {
    fn default() -> Self {
        Self {
            c_bank: 3400.0,
            r_s: 2.2e-4,
            v_bank_max: default_v_bank(),
            m_bank: 0.52,
            eta_dc: 0.95,
            n_sc: default_n_sc(),
        }
    }
}

impl ScParams {
    pub fn with_banks(mut self, n_sc: usize) -> Self {
        self.n_sc = n_sc;
        self
    }

    pub fn validate(&self) -> Result<(), PowertrainError> {
        let positive = [
            ("C_bank", self.c_bank),
            ("R_s", self.r_s),
            ("V_bank_max", self.v_bank_max),
            ("m_bank", self.m_bank),
            ("eta_dc", self.eta_dc),
        ];
        if let Some((name, v)) = positive.iter().find(|(_, v)| !(v.is_finite() && *v > 0.0)) {
            return Err(PowertrainError::InvalidParam(format!("{name} = {v} must be positive")));
        }
        if self.eta_dc > 1.0 {
            return Err(PowertrainError::InvalidParam(format!(
                "eta_dc = {} must be in (0, 1]",
                self.eta_dc
            )));
        }
        if self.n_sc == 0 {
            return Err(PowertrainError::InvalidParam("n_sc must be at least 1".into()));
        }
        Ok(())
    }

    /// Pack capacitance `C_bank / n_sc`, F.
    pub fn c_total(&self) -> f64 {
        self.c_bank / self.n_sc as f64
    }

    /// Pack series resistance `n_sc * R_s`, ohm.
    pub fn r_total(&self) -> f64 {
        self.n_sc as f64 * self.r_s
    }

    /// Pack open-circuit voltage at full charge, V.
    pub fn v_max(&self) -> f64 {
        self.n_sc as f64 * self.v_bank_max
    }
}

/// Operating envelope enforced on every supercapacitor step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScBand {
    pub soe_min: f64,
    pub soe_max: f64,
    /// Current magnitude limit, A.
    pub i_max: f64,
}

impl Default for ScBand {
    fn default() -> Self {
        Self {
            soe_min: 0.1,
            soe_max: 0.99,
            i_max: 2000.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScState {
    /// Pack open-circuit voltage, V.
    pub v_ct: f64,
    /// State of energy, `v_ct^2 / V_ctmax^2`.
    pub soe: f64,
}

impl ScState {
    pub fn from_voltage(v_ct: f64, sp: &ScParams) -> Self {
        Self {
            v_ct,
            soe: soe_of(v_ct, sp.v_max()),
        }
    }

    /// Highest voltage whose state of energy does not exceed `soe`.
    pub fn at_soe(soe: f64, sp: &ScParams) -> Self {
        Self::from_voltage(voltage_at_most(soe, sp.v_max()), sp)
    }
}

#[inline]
fn soe_of(v: f64, v_max: f64) -> f64 {
    let r = v / v_max;
    r * r
}

fn voltage_at_most(soe: f64, v_max: f64) -> f64 {
    let mut v = v_max * soe.sqrt();
    while soe_of(v, v_max) > soe {
        v = v.next_down();
    }
    v
}

fn voltage_at_least(soe: f64, v_max: f64) -> f64 {
    let mut v = v_max * soe.sqrt();
    while soe_of(v, v_max) < soe {
        v = v.next_up();
    }
    v
}

/// Outcome of one supercapacitor step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScStep {
    pub state: ScState,
    /// Request actually served after clamping, W (wheel side).
    pub p_req: f64,
    /// Power leaving the ideal capacitor, `v_ct * i_sc`, W.
    pub p_sc: f64,
    /// Pack current, A, discharge positive.
    pub i_sc: f64,
}

/// Pack current for a wheel-side request. Discharge requests are divided by
/// the converter efficiencies, charge requests multiplied by them; the
/// discriminant must be non-negative.
fn current_for_request(v: f64, p_req: f64, sp: &ScParams, eta_ad: f64) -> f64 {
    let eta = eta_ad * sp.eta_dc;
    let p_term = if p_req >= 0.0 { p_req / eta } else { p_req * eta };
    let r = sp.r_total();
    let disc = (v * v - 4.0 * r * p_term).max(0.0);
    // (v - sqrt(disc)) / 2r without the cancellation
    let den = v + disc.sqrt();
    if den == 0.0 {
        0.0
    } else {
        2.0 * p_term / den
    }
}

/// Wheel-side request that draws pack current `i`.
fn request_for_current(v: f64, i: f64, sp: &ScParams, eta_ad: f64) -> f64 {
    let eta = eta_ad * sp.eta_dc;
    let terminal = v * i - sp.r_total() * i * i;
    if i >= 0.0 {
        terminal * eta
    } else {
        terminal / eta
    }
}

/// Largest discharge request the pack can serve at voltage `v`,
/// `v^2 eta_AD eta_dc / (4 R_sct)`.
pub fn max_deliverable_power(v: f64, sp: &ScParams, eta_ad: f64) -> f64 {
    v * v * eta_ad * sp.eta_dc / (4.0 * sp.r_total())
}

/// Feasible request interval `(p_lo, p_hi)` for one step of `dt` seconds:
/// the current limit, the state-of-energy band reached within the step and
/// the discriminant of the discharge branch.
pub fn request_bounds(
    state: &ScState,
    dt: f64,
    sp: &ScParams,
    eta_ad: f64,
    band: &ScBand,
) -> (f64, f64) {
    let (i_lo, i_hi) = current_bounds(state, dt, sp, band);
    (
        request_for_current(state.v_ct, i_lo, sp, eta_ad).min(0.0),
        request_for_current(state.v_ct, i_hi, sp, eta_ad).max(0.0),
    )
}

fn current_bounds(state: &ScState, dt: f64, sp: &ScParams, band: &ScBand) -> (f64, f64) {
    let v_max = sp.v_max();
    let c = sp.c_total();
    let v = state.v_ct;
    let v_lo = voltage_at_least(band.soe_min, v_max);
    let v_hi = voltage_at_most(band.soe_max, v_max);
    // within a relative 1e-12 of an edge counts as sitting on it
    let i_dis = if v <= v_lo * (1.0 + 1e-12) {
        0.0
    } else {
        (v - v_lo) * c / dt
    };
    let i_chg = if v >= v_hi * (1.0 - 1e-12) {
        0.0
    } else {
        (v_hi - v) * c / dt
    };
    let i_peak = v / (2.0 * sp.r_total());
    (-band.i_max.min(i_chg), band.i_max.min(i_dis).min(i_peak))
}

/// Advance the pack by `dt` under request `p_req` (wheel side, discharge
/// positive). The request is first clamped into [`request_bounds`].
pub fn step_supercapacitor(
    state: &ScState,
    p_req: f64,
    dt: f64,
    sp: &ScParams,
    eta_ad: f64,
    band: &ScBand,
) -> ScStep {
    let (p_lo, p_hi) = request_bounds(state, dt, sp, eta_ad, band);
    let p_req = p_req.clamp(p_lo, p_hi);
    if p_req == 0.0 {
        return ScStep {
            state: *state,
            p_req,
            p_sc: 0.0,
            i_sc: 0.0,
        };
    }
    let (i_lo, i_hi) = current_bounds(state, dt, sp, band);
    let i_sc = current_for_request(state.v_ct, p_req, sp, eta_ad).clamp(i_lo, i_hi);
    let v_max = sp.v_max();
    let mut v_next = state.v_ct - i_sc * dt / sp.c_total();
    // keep rounding from stepping across the band edge that was targeted
    if i_sc > 0.0 {
        v_next = v_next.max(voltage_at_least(band.soe_min, v_max).min(state.v_ct));
    } else {
        v_next = v_next.min(voltage_at_most(band.soe_max, v_max).max(state.v_ct));
    }
    ScStep {
        state: ScState::from_voltage(v_next, sp),
        p_req,
        p_sc: state.v_ct * i_sc,
        i_sc,
    }
}
