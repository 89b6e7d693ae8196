//! Drive cycles: demand power from a velocity trace, cycle files and a
//! seeded synthetic race lap.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CycleError {
    #[error("cannot read drive cycle {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("drive cycle row {row}: {msg}")]
    Row { row: usize, msg: String },
    #[error("drive cycle: {0}")]
    Invalid(String),
}

/// Road-load parameters, SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleParams {
    /// Vehicle mass, kg.
    pub m_v: f64,
    /// Aerodynamic coefficient `rho Cd A`, N s^2 / m^2.
    pub rho_cd_a: f64,
    pub f_roll: f64,
    pub g: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self::from_table_units(570.0, 0.075, 0.016, 9.81)
    }
}

impl VehicleParams {
    /// Build from an aerodynamic coefficient given in h^2 N / km^2 (velocity
    /// in km/h), the unit road-load tables usually quote.
    pub fn from_table_units(m_v: f64, rho_cd_a_kmh: f64, f_roll: f64, g: f64) -> Self {
        Self {
            m_v,
            rho_cd_a: rho_cd_a_kmh * 3.6 * 3.6,
            f_roll,
            g,
        }
    }

    pub fn validate(&self) -> Result<(), CycleError> {
        let ok = [self.m_v, self.rho_cd_a, self.f_roll, self.g]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        if ok {
            Ok(())
        } else {
            Err(CycleError::Invalid(format!("vehicle parameters must be positive: {self:?}")))
        }
    }
}

/// Wheel power to follow velocity `v` with acceleration `a`. Negative values
/// are braking power available for regeneration.
#[inline]
pub fn demand_power(v: f64, a: f64, vp: &VehicleParams) -> f64 {
    (0.5 * vp.rho_cd_a * v * v + vp.f_roll * vp.m_v * vp.g + vp.m_v * a) * v
}

/// One lap sampled at a uniform step.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveCycle {
    dt: f64,
    t: Vec<f64>,
    v: Vec<f64>,
    a: Vec<f64>,
    p_dem: Vec<f64>,
    peak_power: f64,
}

impl DriveCycle {
    /// Derive acceleration (forward difference, zero on the last sample) and
    /// demand power from a uniformly sampled velocity trace.
    pub fn from_velocity(t: Vec<f64>, v: Vec<f64>, vp: &VehicleParams) -> Result<Self, CycleError> {
        if t.len() != v.len() {
            return Err(CycleError::Invalid("time and velocity lengths differ".into()));
        }
        if t.len() < 2 {
            return Err(CycleError::Invalid("need at least two samples".into()));
        }
        let dt = t[1] - t[0];
        for (k, w) in t.windows(2).enumerate() {
            let step = w[1] - w[0];
            if !(step > 0.0) {
                return Err(CycleError::Row {
                    row: k + 2,
                    msg: format!("time {} does not increase", w[1]),
                });
            }
            if (step - dt).abs() > 1e-9 * dt.max(1.0) {
                return Err(CycleError::Row {
                    row: k + 2,
                    msg: format!("time step {step} differs from {dt}"),
                });
            }
        }
        if let Some(k) = v.iter().position(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(CycleError::Row {
                row: k + 1,
                msg: format!("velocity {} is negative or not finite", v[k]),
            });
        }
        let n = v.len();
        let a: Vec<f64> = (0..n)
            .map(|k| if k + 1 < n { (v[k + 1] - v[k]) / dt } else { 0.0 })
            .collect();
        let p_dem: Vec<f64> = v.iter().zip(&a).map(|(&v, &a)| demand_power(v, a, vp)).collect();
        let peak_power = p_dem.iter().fold(0.0f64, |m, p| m.max(p.abs()));
        Ok(Self {
            dt,
            t,
            v,
            a,
            p_dem,
            peak_power,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn p_dem(&self) -> &[f64] {
        &self.p_dem
    }

    /// Largest `|p_dem|`, W, used to normalize controller power.
    pub fn peak_power(&self) -> f64 {
        self.peak_power
    }

    /// Simulated time of one lap: every sample holds for one step.
    pub fn lap_duration(&self) -> f64 {
        self.len() as f64 * self.dt
    }

    /// Energy of the positive demand samples, J.
    pub fn traction_energy(&self) -> f64 {
        self.p_dem.iter().filter(|p| **p > 0.0).sum::<f64>() * self.dt
    }
}

#[derive(Debug, Deserialize, Serialize)]
struct CycleRow {
    t: f64,
    v: f64,
}

/// Read a `t,v` comma-separated file (SI units, uniform step).
pub fn load_drive_cycle(path: &Path, vp: &VehicleParams) -> Result<DriveCycle, CycleError> {
    let io_err = |source: std::io::Error| CycleError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = std::fs::File::open(path).map_err(io_err)?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| CycleError::Row { row: 0, msg: e.to_string() })?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["t", "v"] {
        return Err(CycleError::Row {
            row: 0,
            msg: format!("header must be `t,v`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut t = Vec::new();
    let mut v = Vec::new();
    for (k, rec) in reader.deserialize::<CycleRow>().enumerate() {
        let rec = rec.map_err(|e| CycleError::Row {
            row: k + 1,
            msg: e.to_string(),
        })?;
        t.push(rec.t);
        v.push(rec.v);
    }
    DriveCycle::from_velocity(t, v, vp)
}

/// Write the `t,v` columns of `cycle`; [`load_drive_cycle`] reads it back
/// bit-identically.
pub fn write_drive_cycle(path: &Path, cycle: &DriveCycle) -> Result<(), CycleError> {
    let io_err = |source: std::io::Error| CycleError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(e.into()))?;
    for (&t, &v) in cycle.t.iter().zip(&cycle.v) {
        w.serialize(CycleRow { t, v }).map_err(|e| io_err(e.into()))?;
    }
    w.flush().map_err(io_err)
}

/// Parameters of the synthetic lap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticCycle {
    /// Lap duration, s.
    pub duration: f64,
    /// Top speed, m/s.
    pub v_peak: f64,
    pub seed: u64,
    #[serde(default = "default_dt")]
    pub dt: f64,
}

fn default_dt() -> f64 {
    1.0
}

impl Default for SyntheticCycle {
    fn default() -> Self {
        Self {
            duration: 300.0,
            v_peak: 55.0,
            seed: 7,
            dt: 1.0,
        }
    }
}

/// Seeded standing-start race lap: repeated acceleration bursts, short
/// cruises and hard braking, ending at rest so laps chain without a jump.
pub fn synthesize_test_cycle(
    duration: f64,
    v_peak: f64,
    seed: u64,
    dt: f64,
    vp: &VehicleParams,
) -> Result<DriveCycle, CycleError> {
    if !(duration >= 10.0) || !(dt > 0.0) || dt > duration / 10.0 {
        return Err(CycleError::Invalid(format!(
            "synthetic lap needs duration >= 10 s and at least 10 samples (duration {duration}, dt {dt})"
        )));
    }
    if !(v_peak >= 0.0) {
        return Err(CycleError::Invalid(format!("v_peak {v_peak} is negative")));
    }
    let n = (duration / dt).floor() as usize;
    let t: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
    let mut v = vec![0.0; n];
    if v_peak == 0.0 {
        return DriveCycle::from_velocity(t, v, vp);
    }

    #[derive(Clone, Copy)]
    enum Phase {
        Accel { target: f64, a0: f64 },
        Cruise { left: usize },
        Brake { target: f64, rate: f64 },
    }
    const FINAL_BRAKE: f64 = 7.0;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let accel = |rng: &mut ChaCha8Rng| Phase::Accel {
        target: rng.gen_range(0.6..=1.0) * v_peak,
        a0: rng.gen_range(4.0..6.0),
    };
    let mut phase = accel(&mut rng);
    for k in 1..n {
        let cur = v[k - 1];
        let left = n - k;
        let stop_steps = (cur / (FINAL_BRAKE * dt)).ceil() as usize;
        if left <= stop_steps + 1 {
            // linear run-out to rest on the last sample
            v[k] = if left <= 1 { 0.0 } else { cur - cur / left as f64 };
            continue;
        }
        let (next, new_phase) = match phase {
            Phase::Accel { target, a0 } => {
                let a = a0 * (1.0 - cur / (1.15 * v_peak)).max(0.1);
                let next = (cur + a * dt).min(target);
                let done = next >= target;
                let cruise = Phase::Cruise {
                    left: (rng.gen_range(4.0..15.0) / dt).round() as usize,
                };
                (next, if done { cruise } else { phase })
            }
            Phase::Cruise { left } => {
                let p = if left <= 1 {
                    Phase::Brake {
                        target: rng.gen_range(0.2..0.5) * v_peak,
                        rate: rng.gen_range(5.0..9.0),
                    }
                } else {
                    Phase::Cruise { left: left - 1 }
                };
                (cur, p)
            }
            Phase::Brake { target, rate } => {
                let target = target.min(cur);
                let next = (cur - rate * dt).max(target);
                (next, if next <= target { accel(&mut rng) } else { phase })
            }
        };
        v[k] = next;
        phase = new_phase;
    }
    DriveCycle::from_velocity(t, v, vp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standstill_needs_no_power() {
        let vp = VehicleParams::default();
        assert_eq!(demand_power(0.0, 3.0, &vp), 0.0);
        assert_eq!(demand_power(0.0, -3.0, &vp), 0.0);
    }

    #[test]
    fn cruise_at_30_mps() {
        let vp = VehicleParams::default();
        let p = demand_power(30.0, 0.0, &vp);
        let expected = (0.5 * 0.972 * 900.0 + 0.016 * 570.0 * 9.81) * 30.0;
        assert!((p - expected).abs() < 1e-6);
        assert!((p - 15_806.0).abs() < 1.0, "{p}");
    }

    #[test]
    fn hard_braking_regenerates() {
        let vp = VehicleParams::default();
        assert!(demand_power(30.0, -3.0, &vp) < 0.0);
    }

    #[test]
    fn table_unit_conversion() {
        let vp = VehicleParams::default();
        assert!((vp.rho_cd_a - 0.972).abs() < 1e-12);
    }

    #[test]
    fn forward_difference_acceleration() {
        let vp = VehicleParams::default();
        let c = DriveCycle::from_velocity(vec![0.0, 1.0, 2.0], vec![0.0, 2.0, 3.0], &vp).unwrap();
        assert_eq!(c.a(), &[2.0, 1.0, 0.0]);
        for k in 0..3 {
            assert_eq!(c.p_dem()[k], demand_power(c.v()[k], c.a()[k], &vp));
        }
    }

    #[test]
    fn rejects_non_uniform_or_decreasing_time() {
        let vp = VehicleParams::default();
        let err = DriveCycle::from_velocity(vec![0.0, 1.0, 0.5], vec![0.0; 3], &vp).unwrap_err();
        assert!(matches!(err, CycleError::Row { row: 3, .. }));
        let err = DriveCycle::from_velocity(vec![0.0, 1.0, 3.0], vec![0.0; 3], &vp).unwrap_err();
        assert!(matches!(err, CycleError::Row { row: 3, .. }));
        let err = DriveCycle::from_velocity(vec![0.0, 1.0], vec![0.0, -1.0], &vp).unwrap_err();
        assert!(matches!(err, CycleError::Row { row: 2, .. }));
    }

    #[test]
    fn synthetic_is_deterministic() {
        let vp = VehicleParams::default();
        let a = synthesize_test_cycle(300.0, 55.0, 3, 1.0, &vp).unwrap();
        let b = synthesize_test_cycle(300.0, 55.0, 3, 1.0, &vp).unwrap();
        assert_eq!(a, b);
        let c = synthesize_test_cycle(300.0, 55.0, 4, 1.0, &vp).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_peak_speed_is_stationary() {
        let vp = VehicleParams::default();
        let c = synthesize_test_cycle(60.0, 0.0, 1, 1.0, &vp).unwrap();
        assert!(c.p_dem().iter().all(|p| *p == 0.0));
        assert_eq!(c.peak_power(), 0.0);
    }

    #[test]
    fn default_lap_brakes_and_reaches_speed() {
        let vp = VehicleParams::default();
        let s = SyntheticCycle::default();
        let c = synthesize_test_cycle(s.duration, s.v_peak, s.seed, s.dt, &vp).unwrap();
        assert_eq!(c.len(), 300);
        assert!(c.p_dem().iter().any(|p| *p < 0.0));
        assert_eq!(c.v()[0], 0.0);
        assert_eq!(*c.v().last().unwrap(), 0.0);
        let v_max = c.v().iter().cloned().fold(0.0, f64::max);
        assert!(v_max > 0.6 * s.v_peak && v_max <= s.v_peak);
        // tractive lower bound from rest to the top speed reached
        assert!(c.traction_energy() >= 0.5 * vp.m_v * v_max * v_max);
    }

    #[test]
    fn too_short_is_rejected() {
        let vp = VehicleParams::default();
        assert!(synthesize_test_cycle(5.0, 30.0, 1, 1.0, &vp).is_err());
    }
}
