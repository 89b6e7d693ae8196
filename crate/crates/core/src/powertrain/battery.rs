use serde::{Deserialize, Serialize};

use super::PowertrainError;

/// Per-cell parameters of the modified Shepherd model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatteryParams {
    /// Voltage constant, V.
    #[serde(rename = "E0")]
    pub e0: f64,
    /// Polarization resistance, ohm.
    #[serde(rename = "K")]
    pub k: f64,
    /// Maximum cell capacity, Ah.
    #[serde(rename = "Q_max")]
    pub q_max: f64,
    /// Internal resistance, ohm.
    #[serde(rename = "R")]
    pub r: f64,
    /// Exponential-zone amplitude, V.
    #[serde(rename = "A")]
    pub a_exp: f64,
    /// Exponential-zone time-constant inverse, 1/Ah.
    #[serde(rename = "B")]
    pub b_exp: f64,
    /// Cell mass, kg.
    pub m_cell: f64,
    /// DC/AC converter plus motor efficiency.
    #[serde(rename = "eta_AD")]
    pub eta_ad: f64,
}

impl Default for BatteryParams {
    fn default() -> Self {
        Self {
            e0: 3.43,
            k: 8.85e-5,
            q_max: 55.0,
            r: 1.33e-3,
            a_exp: 0.761,
            b_exp: 0.040,
            m_cell: 1.15,
            eta_ad: 0.96,
        }
    }
}

impl BatteryParams {
    pub fn validate(&self) -> Result<(), PowertrainError> {
        let positive = [
            ("E0", self.e0),
            ("K", self.k),
            ("Q_max", self.q_max),
            ("R", self.r),
            ("A", self.a_exp),
            ("B", self.b_exp),
            ("m_cell", self.m_cell),
            ("eta_AD", self.eta_ad),
        ];
        if let Some((name, v)) = positive.iter().find(|(_, v)| !(v.is_finite() && *v > 0.0)) {
            return Err(PowertrainError::InvalidParam(format!("{name} = {v} must be positive")));
        }
        if self.eta_ad > 1.0 {
            return Err(PowertrainError::InvalidParam(format!(
                "eta_AD = {} must be in (0, 1]",
                self.eta_ad
            )));
        }
        Ok(())
    }
}

/// Integrator state of one (representative) cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryState {
    /// State of charge, percent.
    pub soc: f64,
    /// Charge drawn since full, Ah.
    pub it: f64,
    /// Last applied cell current, A, discharge positive.
    pub i: f64,
}

impl BatteryState {
    pub fn full() -> Self {
        Self {
            soc: 100.0,
            it: 0.0,
            i: 0.0,
        }
    }

    /// Resting state whose state of charge does not exceed `soc_percent`.
    pub fn at_soc(soc_percent: f64, p: &BatteryParams) -> Self {
        let mut it = p.q_max * (1.0 - soc_percent / 100.0);
        while soc_of(it, p) > soc_percent {
            it = it.next_up();
        }
        Self {
            soc: soc_of(it, p),
            it,
            i: 0.0,
        }
    }

    /// Coulomb counting with current `i` held for `dt` seconds.
    pub fn advance(&self, i: f64, dt: f64, p: &BatteryParams) -> Self {
        let it = self.it + i * dt / 3600.0;
        Self {
            soc: soc_of(it, p),
            it,
            i,
        }
    }
}

#[inline]
pub(crate) fn soc_of(it: f64, p: &BatteryParams) -> f64 {
    100.0 * (1.0 - it / p.q_max)
}

/// Cell terminal voltage for current `i` at the charge level of `state`.
/// Discharge (`i >= 0`) and charge use separate polarization terms.
pub fn battery_terminal_voltage(
    state: &BatteryState,
    i: f64,
    p: &BatteryParams,
) -> Result<f64, PowertrainError> {
    let it = state.it;
    if it >= p.q_max {
        return Err(PowertrainError::Depleted { it, q_max: p.q_max });
    }
    let q = p.q_max;
    let polarization = p.k * q / (q - it);
    let exp_zone = p.a_exp * (-p.b_exp * it).exp();
    let v = if i >= 0.0 {
        p.e0 - polarization * it - polarization * i - p.r * i + exp_zone
    } else {
        // singular at it = 0.1 Q_max; keep the sign, bound the magnitude
        let eps = 1e-6 * q;
        let mut den = it - 0.1 * q;
        if den.abs() < eps {
            den = if den < 0.0 { -eps } else { eps };
        }
        p.e0 - polarization * it - p.k * q / den * i - p.r * i + exp_zone
    };
    Ok(v)
}

/// Cell current drawn for a pack-level power request (wheel side).
///
/// Discharge divides by the converter efficiency, charge multiplies by it.
pub fn battery_current_from_power(p_req: f64, n_bat: usize, v_bat: f64, p: &BatteryParams) -> f64 {
    let n = n_bat as f64;
    if p_req >= 0.0 {
        p_req / (n * v_bat * p.eta_ad)
    } else {
        p_req * p.eta_ad / (n * v_bat)
    }
}

/// Result of one battery step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryStep {
    pub state: BatteryState,
    /// Terminal voltage used to convert power into current, V.
    pub voltage: f64,
    /// State of charge fell to or below the floor.
    pub depleted: bool,
}

/// Advance the battery under a constant pack power request.
///
/// The voltage is evaluated at the previous step's current, the current is
/// then derived from that voltage and integrated with explicit Euler.
pub fn step_battery(
    state: &BatteryState,
    p_req: f64,
    dt: f64,
    n_bat: usize,
    p: &BatteryParams,
    soc_floor_percent: f64,
) -> Result<BatteryStep, PowertrainError> {
    let voltage = battery_terminal_voltage(state, state.i, p)?;
    if voltage <= 0.0 {
        return Err(PowertrainError::Depleted {
            it: state.it,
            q_max: p.q_max,
        });
    }
    let i = if p_req == 0.0 {
        0.0
    } else {
        battery_current_from_power(p_req, n_bat, voltage, p)
    };
    let next = state.advance(i, dt, p);
    Ok(BatteryStep {
        state: next,
        voltage,
        depleted: next.soc <= soc_floor_percent,
    })
}

/// Largest pack charging power (as a negative wheel-side request) that keeps
/// the state of charge at or below `soc_ceiling_percent` after one step.
pub(crate) fn charge_power_limit(
    state: &BatteryState,
    dt: f64,
    n_bat: usize,
    p: &BatteryParams,
    soc_ceiling_percent: f64,
) -> Result<f64, PowertrainError> {
    let it_min = p.q_max * (1.0 - soc_ceiling_percent / 100.0);
    let headroom_ah = (state.it - it_min).max(0.0);
    // keep a sliver in reserve so rounding never lands above the ceiling
    let i_max = headroom_ah * 3600.0 / dt * (1.0 - 1e-9);
    let voltage = battery_terminal_voltage(state, state.i, p)?;
    Ok(-(i_max * n_bat as f64 * voltage / p.eta_ad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_cell_at_rest() {
        let p = BatteryParams::default();
        let v = battery_terminal_voltage(&BatteryState::full(), 0.0, &p).unwrap();
        assert_eq!(v, 4.191);
    }

    #[test]
    fn full_cell_at_one_c() {
        let p = BatteryParams::default();
        let v = battery_terminal_voltage(&BatteryState::full(), 55.0, &p).unwrap();
        let expected = 4.191 - (8.85e-5 * 55.0 + 1.33e-3 * 55.0);
        assert!((v - expected).abs() < 1e-12);
    }

    #[test]
    fn voltage_falls_as_charge_is_drawn() {
        let p = BatteryParams::default();
        let mut prev = f64::INFINITY;
        for k in 0..54 {
            let s = BatteryState {
                it: k as f64,
                ..BatteryState::full()
            };
            let v = battery_terminal_voltage(&s, 30.0, &p).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn depleted_cell_is_an_error() {
        let p = BatteryParams::default();
        let s = BatteryState {
            it: 55.0,
            ..BatteryState::full()
        };
        assert!(matches!(
            battery_terminal_voltage(&s, 1.0, &p),
            Err(PowertrainError::Depleted { .. })
        ));
    }

    #[test]
    fn charge_singularity_is_guarded() {
        let p = BatteryParams::default();
        let s = BatteryState {
            it: 5.5,
            ..BatteryState::full()
        };
        let v = battery_terminal_voltage(&s, -1.0, &p).unwrap();
        assert!(v.is_finite());
    }

    #[test]
    fn current_from_power_examples() {
        let p = BatteryParams::default();
        assert_eq!(battery_current_from_power(0.0, 263, 4.0, &p), 0.0);
        let i = battery_current_from_power(10_000.0, 263, 4.0, &p);
        assert!((i - 10_000.0 / (263.0 * 4.0 * 0.96)).abs() < 1e-12);
        assert!((i - 9.9).abs() < 0.01);
        let ic = battery_current_from_power(-10_000.0, 263, 4.0, &p);
        assert!(ic < 0.0 && ic.abs() < i);
    }

    #[test]
    fn zero_power_leaves_state_unchanged() {
        let p = BatteryParams::default();
        let s0 = BatteryState::at_soc(90.0, &p);
        let mut s = s0;
        for _ in 0..1000 {
            s = step_battery(&s, 0.0, 1.0, 263, &p, 20.0).unwrap().state;
        }
        assert_eq!(s, s0);
    }

    #[test]
    fn constant_current_closed_form() {
        let p = BatteryParams::default();
        let mut s = BatteryState::full();
        for _ in 0..3600 {
            s = s.advance(53.0, 1.0, &p);
        }
        assert!((s.it - 53.0).abs() < 1e-9);
        assert!((s.soc - 100.0 * (1.0 - 53.0 / 55.0)).abs() < 1e-9);
        assert!((s.soc - 3.636).abs() < 1e-3);
    }

    #[test]
    fn halved_step_constant_current() {
        let p = BatteryParams::default();
        let (mut a, mut b) = (BatteryState::full(), BatteryState::full());
        for _ in 0..3600 {
            a = a.advance(53.0, 1.0, &p);
        }
        for _ in 0..7200 {
            b = b.advance(53.0, 0.5, &p);
        }
        assert!(((a.it - b.it) / a.it).abs() <= 1e-6);
    }

    /// Under constant power the one-step-lag Euler scheme is first order:
    /// halving the step roughly halves the gap to a fine reference.
    #[test]
    fn constant_power_is_first_order() {
        let p = BatteryParams::default();
        let run = |dt: f64| {
            let mut s = BatteryState::at_soc(90.0, &p);
            let steps = (1800.0 / dt).round() as usize;
            for _ in 0..steps {
                s = step_battery(&s, 60_000.0, dt, 263, &p, 0.0).unwrap().state;
            }
            s.it
        };
        let reference = run(1.0 / 64.0);
        let e1 = (run(1.0) - reference).abs();
        let e2 = (run(0.5) - reference).abs();
        let ratio = e1 / e2;
        assert!((1.7..2.3).contains(&ratio), "ratio {ratio}");
        assert!(e1 / reference < 1e-4);
    }

    #[test]
    fn depletion_flagged_at_floor() {
        let p = BatteryParams::default();
        let s = BatteryState::at_soc(20.5, &p);
        let step = step_battery(&s, 200_000.0, 10.0, 263, &p, 20.0).unwrap();
        assert!(step.depleted);
    }

    #[test]
    fn at_soc_never_exceeds_target() {
        let p = BatteryParams::default();
        for soc in [90.0, 89.9, 33.3, 70.1] {
            let s = BatteryState::at_soc(soc, &p);
            assert!(s.soc <= soc && soc - s.soc < 1e-9);
        }
    }

    #[test]
    fn charge_limit_respects_ceiling() {
        let p = BatteryParams::default();
        let s = BatteryState::at_soc(89.99, &p);
        let limit = charge_power_limit(&s, 1.0, 263, &p, 90.0).unwrap();
        assert!(limit < 0.0);
        let next = step_battery(&s, limit, 1.0, 263, &p, 20.0).unwrap().state;
        assert!(next.soc <= 90.0);
        assert!(next.soc > 89.999);
    }
}
