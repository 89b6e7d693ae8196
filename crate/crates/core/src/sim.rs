//! Closed-loop lap simulation of the fuzzy-managed hybrid pack.
//!
//! Every controller in a population is stepped in lockstep: one batched
//! fuzzy evaluation per time step covers all designs still running, and
//! finished designs drop out of the batch.

use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::cycle::DriveCycle;
use crate::exec::Exec;
use crate::fis::{decode_genome, FisBatch, FisError, FisSpec, MfGenome};
use crate::powertrain::{
    battery_count, charge_power_limit, cycle_life_objective, request_bounds, step_battery,
    step_supercapacitor, BatteryParams, BatteryState, DegradationParams, PowertrainError, ScBand,
    ScParams, ScState,
};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid design: {0}")]
    Design(String),
    #[error("invalid limits: {0}")]
    Limits(String),
    #[error(transparent)]
    Fis(#[from] FisError),
    #[error(transparent)]
    Powertrain(#[from] PowertrainError),
    #[error("cannot write trace {path}: {msg}")]
    Io { path: String, msg: String },
}

/// Sizing plus membership-function genome.
#[derive(Debug, Clone, PartialEq)]
pub struct HessDesign {
    pub n_sc: usize,
    pub genome: MfGenome,
}

impl HessDesign {
    pub fn new(n_sc: usize, genome: MfGenome) -> Result<Self, SimError> {
        if n_sc == 0 {
            return Err(SimError::Design("n_sc must be at least 1".into()));
        }
        Ok(Self { n_sc, genome })
    }

    /// Battery cells left in the mass budget, or `None` if none fit.
    pub fn n_bat(&self, params: &SimParams) -> Option<usize> {
        battery_count(
            params.m_hess,
            self.n_sc,
            params.supercap.m_bank,
            params.battery.m_cell,
        )
        .ok()
    }
}

/// State bounds enforced during a run. `soc` is a fraction here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimLimits {
    pub soc_min: f64,
    pub soc_max: f64,
    pub soe_min: f64,
    pub soe_max: f64,
    /// Supercapacitor current magnitude limit, A.
    pub i_sc_max: f64,
}

impl Default for SimLimits {
    fn default() -> Self {
        Self {
            soc_min: 0.2,
            soc_max: 0.9,
            soe_min: 0.1,
            soe_max: 0.99,
            i_sc_max: 2000.0,
        }
    }
}

impl SimLimits {
    pub fn validate(&self) -> Result<(), SimError> {
        let unit = |lo: f64, hi: f64| (0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi) && lo < hi;
        if !unit(self.soc_min, self.soc_max) {
            return Err(SimError::Limits(format!(
                "soc range [{}, {}] must be increasing within [0, 1]",
                self.soc_min, self.soc_max
            )));
        }
        if !unit(self.soe_min, self.soe_max) || self.soe_min <= 0.0 {
            return Err(SimError::Limits(format!(
                "soe range [{}, {}] must be increasing within (0, 1]",
                self.soe_min, self.soe_max
            )));
        }
        if !(self.i_sc_max > 0.0) {
            return Err(SimError::Limits(format!("i_sc_max = {} must be positive", self.i_sc_max)));
        }
        Ok(())
    }

    fn band(&self) -> ScBand {
        ScBand {
            soe_min: self.soe_min,
            soe_max: self.soe_max,
            i_max: self.i_sc_max,
        }
    }
}

/// Everything a run needs besides the design and the cycle.
#[derive(Debug, Clone)]
pub struct SimParams {
    pub battery: BatteryParams,
    /// Bank parameters; the bank count comes from the design.
    pub supercap: ScParams,
    pub degradation: DegradationParams,
    /// HESS mass budget, kg.
    pub m_hess: f64,
    pub limits: SimLimits,
    /// Stop after this many laps even if the battery still has charge.
    pub max_laps: f64,
    /// Controller whose membership functions the genome reshapes.
    pub template: FisSpec,
    pub exec: Exec,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            battery: BatteryParams::default(),
            supercap: ScParams::default(),
            degradation: DegradationParams::default(),
            m_hess: 320.0,
            limits: SimLimits::default(),
            max_laps: 1000.0,
            template: FisSpec::hess_template(),
            exec: Exec::default(),
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<(), SimError> {
        self.battery.validate()?;
        self.supercap.validate()?;
        self.degradation.validate()?;
        self.limits.validate()?;
        if !(self.m_hess > 0.0) {
            return Err(SimError::Design(format!("m_hess = {} must be positive", self.m_hess)));
        }
        if !(self.max_laps > 0.0) {
            return Err(SimError::Limits(format!("max_laps = {} must be positive", self.max_laps)));
        }
        Ok(())
    }
}

/// Per-step series of one run. `soc` is a fraction, powers are wheel-side W.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimTrace {
    pub t: Vec<f64>,
    pub soc: Vec<f64>,
    pub soe: Vec<f64>,
    /// Demand actually served (regeneration beyond what both packs accept
    /// goes to the friction brakes).
    pub p_dem: Vec<f64>,
    pub p_reqbat: Vec<f64>,
    pub p_reqsc: Vec<f64>,
    pub p_sc: Vec<f64>,
    pub i_sc: Vec<f64>,
}

impl SimTrace {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

#[derive(Serialize)]
struct TraceRow {
    t: f64,
    soc: f64,
    soe: f64,
    p_dem: f64,
    p_reqbat: f64,
    p_reqsc: f64,
    p_sc: f64,
}

/// Write `trace` as `t,soc,soe,p_dem,p_reqbat,p_reqsc,p_sc`.
pub fn write_trace(path: &Path, trace: &SimTrace) -> Result<(), SimError> {
    let io = |e: &dyn std::fmt::Display| SimError::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(|e| io(&e))?;
    for k in 0..trace.len() {
        w.serialize(TraceRow {
            t: trace.t[k],
            soc: trace.soc[k],
            soe: trace.soe[k],
            p_dem: trace.p_dem[k],
            p_reqbat: trace.p_reqbat[k],
            p_reqsc: trace.p_reqsc[k],
            p_sc: trace.p_sc[k],
        })
        .map_err(|e| io(&e))?;
    }
    w.flush().map_err(|e| io(&e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    /// Laps completed, fractional.
    pub j_laps: f64,
    /// Laps until battery end of life at this lap's usage.
    pub j_lifebat: f64,
    /// Average per-cell discharge current over the run, A.
    pub avg_cell_current: f64,
    /// Per-cell discharge throughput per lap, Ah.
    pub ah_per_lap: f64,
    /// Battery cells in the pack; 0 for an infeasible design.
    pub n_bat: usize,
    pub feasible: bool,
    pub trace: Option<SimTrace>,
}

impl SimResult {
    fn infeasible() -> Self {
        Self {
            j_laps: 0.0,
            j_lifebat: 0.0,
            avg_cell_current: 0.0,
            ah_per_lap: 0.0,
            n_bat: 0,
            feasible: false,
            trace: None,
        }
    }
}

/// The maximized objective pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Objectives {
    pub j_laps: f64,
    pub j_lifebat: f64,
}

impl Objectives {
    /// At least as good in both objectives and strictly better in one.
    pub fn dominates(&self, other: &Objectives) -> bool {
        self.j_laps >= other.j_laps
            && self.j_lifebat >= other.j_lifebat
            && (self.j_laps > other.j_laps || self.j_lifebat > other.j_lifebat)
    }

    pub fn to_array(self) -> [f64; 2] {
        [self.j_laps, self.j_lifebat]
    }
}

pub fn evaluate_objectives(result: &SimResult) -> Objectives {
    if !result.feasible {
        return Objectives {
            j_laps: 0.0,
            j_lifebat: 0.0,
        };
    }
    Objectives {
        j_laps: result.j_laps,
        j_lifebat: result.j_lifebat,
    }
}

/// Round toward zero onto a 2^-16 W grid. Sums and differences of grid
/// values within the plant's power range are exact, so the battery share
/// plus the supercapacitor share reproduces the served demand bit for bit.
#[inline]
fn quantize(p: f64) -> f64 {
    const SCALE: f64 = 65536.0;
    (p * SCALE).trunc() / SCALE
}

struct Ctx<'a> {
    cycle: &'a DriveCycle,
    params: &'a SimParams,
    band: ScBand,
    peak: f64,
    max_steps: u64,
}

struct Plant {
    slot: usize,
    n_bat: usize,
    sp: ScParams,
    bat: BatteryState,
    sc: ScState,
    steps: u64,
    ah_discharged: f64,
    done: bool,
    trace: Option<SimTrace>,
}

impl Plant {
    fn new(slot: usize, n_sc: usize, n_bat: usize, ctx: &Ctx, record: bool) -> Self {
        let p = ctx.params;
        let sp = p.supercap.with_banks(n_sc);
        let bat = BatteryState::at_soc(100.0 * p.limits.soc_max, &p.battery);
        Self {
            slot,
            n_bat,
            sp,
            bat,
            sc: ScState::at_soe(p.limits.soe_max, &sp),
            steps: 0,
            ah_discharged: 0.0,
            done: bat.soc <= 100.0 * p.limits.soc_min,
            trace: record.then(SimTrace::default),
        }
    }

    fn inputs(&self, ctx: &Ctx) -> [f64; 3] {
        let k = (self.steps % ctx.cycle.len() as u64) as usize;
        [self.bat.soc / 100.0, self.sc.soe, ctx.cycle.p_dem()[k] / ctx.peak]
    }

    /// Advance one cycle sample with normalized supercapacitor command `u`.
    fn step(&mut self, u: f64, ctx: &Ctx) {
        let p = ctx.params;
        let bp = &p.battery;
        let dt = ctx.cycle.dt();
        let k = (self.steps % ctx.cycle.len() as u64) as usize;

        let (p_lo, p_hi) = request_bounds(&self.sc, dt, &self.sp, bp.eta_ad, &ctx.band);
        let p_bat_min = match charge_power_limit(&self.bat, dt, self.n_bat, bp, 100.0 * p.limits.soc_max) {
            Ok(v) => v,
            Err(_) => {
                self.done = true;
                return;
            }
        };

        let p_dem = quantize(ctx.cycle.p_dem()[k]);
        let mut p_sc = quantize((u * ctx.peak).clamp(p_lo, p_hi));
        let mut p_bat = p_dem - p_sc;
        if p_bat < p_bat_min {
            // battery at its ceiling: the supercapacitor absorbs what it can,
            // the friction brakes take the rest
            p_sc = quantize((p_dem - p_bat_min).max(p_lo));
            p_bat = (p_dem - p_sc).max(quantize(p_bat_min));
        }
        let served = p_bat + p_sc;

        let sc_step = step_supercapacitor(&self.sc, p_sc, dt, &self.sp, bp.eta_ad, &ctx.band);
        debug_assert_eq!(sc_step.p_req, p_sc);
        let bat_step = match step_battery(&self.bat, p_bat, dt, self.n_bat, bp, 100.0 * p.limits.soc_min) {
            Ok(s) => s,
            Err(_) => {
                self.done = true;
                return;
            }
        };

        if let Some(tr) = self.trace.as_mut() {
            tr.t.push(self.steps as f64 * dt);
            tr.soc.push(bat_step.state.soc / 100.0);
            tr.soe.push(sc_step.state.soe);
            tr.p_dem.push(served);
            tr.p_reqbat.push(p_bat);
            tr.p_reqsc.push(p_sc);
            tr.p_sc.push(sc_step.p_sc);
            tr.i_sc.push(sc_step.i_sc);
        }

        self.sc = sc_step.state;
        self.bat = bat_step.state;
        self.ah_discharged += self.bat.i.max(0.0) * dt / 3600.0;
        self.steps += 1;
        self.done = bat_step.depleted || self.steps >= ctx.max_steps;
    }

    fn finish(self, ctx: &Ctx) -> SimResult {
        let elapsed = self.steps as f64 * ctx.cycle.dt();
        let j_laps = elapsed / ctx.cycle.lap_duration();
        let avg_cell_current = if elapsed > 0.0 {
            self.ah_discharged * 3600.0 / elapsed
        } else {
            0.0
        };
        let ah_per_lap = if j_laps > 0.0 {
            self.ah_discharged / j_laps
        } else {
            0.0
        };
        let p = ctx.params;
        SimResult {
            j_laps,
            j_lifebat: cycle_life_objective(avg_cell_current, ah_per_lap, &p.degradation, p.battery.q_max),
            avg_cell_current,
            ah_per_lap,
            n_bat: self.n_bat,
            feasible: true,
            trace: self.trace,
        }
    }
}

enum Policy {
    Fuzzy(Vec<FisSpec>),
    BatteryOnly,
}

fn run(
    sizes: &[usize],
    policy: Policy,
    cycle: &DriveCycle,
    params: &SimParams,
    record: bool,
) -> Result<Vec<SimResult>, SimError> {
    params.validate()?;
    let peak = if cycle.peak_power() > 0.0 {
        cycle.peak_power()
    } else {
        1.0
    };
    let ctx = Ctx {
        cycle,
        params,
        band: params.limits.band(),
        peak,
        max_steps: (params.max_laps * cycle.len() as f64).ceil() as u64,
    };

    let mut results: Vec<Option<SimResult>> = vec![None; sizes.len()];
    let mut plants = Vec::new();
    let mut specs = Vec::new();
    for (slot, &n_sc) in sizes.iter().enumerate() {
        if n_sc == 0 {
            return Err(SimError::Design("n_sc must be at least 1".into()));
        }
        let n_bat = battery_count(params.m_hess, n_sc, params.supercap.m_bank, params.battery.m_cell);
        match n_bat {
            Ok(n_bat) => {
                plants.push(Plant::new(slot, n_sc, n_bat, &ctx, record));
                if let Policy::Fuzzy(all) = &policy {
                    specs.push(all[slot].clone());
                }
            }
            Err(_) => results[slot] = Some(SimResult::infeasible()),
        }
    }

    let mut batch = match (&policy, specs.is_empty()) {
        (Policy::Fuzzy(_), false) => Some(FisBatch::from_specs(&specs)?.with_exec(params.exec)),
        _ => None,
    };
    drop(specs);

    let exec = params.exec;
    let mut x = Vec::new();
    loop {
        let keep: Vec<bool> = plants.iter().map(|p| !p.done).collect();
        if keep.iter().any(|k| !k) {
            if let Some(b) = batch.as_mut() {
                b.retain(&keep);
            }
            let mut live = Vec::with_capacity(plants.len());
            for p in plants {
                if p.done {
                    let slot = p.slot;
                    results[slot] = Some(p.finish(&ctx));
                } else {
                    live.push(p);
                }
            }
            plants = live;
        }
        if plants.is_empty() {
            break;
        }

        let u = match batch.as_ref() {
            Some(b) => {
                x.clear();
                x.extend(plants.iter().flat_map(|p| p.inputs(&ctx)));
                b.evaluate(&x)?
            }
            None => vec![0.0; plants.len()],
        };
        exec.for_each_mut(&mut plants, |i, p| p.step(u[i], &ctx));
    }

    Ok(results.into_iter().map(|r| r.expect("every slot finishes")).collect())
}

/// Run one design until the battery reaches its floor (or the lap guard).
pub fn simulate(
    design: &HessDesign,
    cycle: &DriveCycle,
    params: &SimParams,
    record_trace: bool,
) -> Result<SimResult, SimError> {
    let spec = decode_genome(&design.genome, &params.template)?;
    let mut out = run(&[design.n_sc], Policy::Fuzzy(vec![spec]), cycle, params, record_trace)?;
    Ok(out.remove(0))
}

/// Run many designs in lockstep through one batched controller. Results are
/// in input order and bit-identical to running [`simulate`] on each.
pub fn simulate_population(
    designs: &[HessDesign],
    cycle: &DriveCycle,
    params: &SimParams,
) -> Result<Vec<SimResult>, SimError> {
    if designs.is_empty() {
        return Ok(Vec::new());
    }
    let specs = designs
        .iter()
        .map(|d| decode_genome(&d.genome, &params.template))
        .collect::<Result<Vec<_>, _>>()?;
    let sizes: Vec<usize> = designs.iter().map(|d| d.n_sc).collect();
    run(&sizes, Policy::Fuzzy(specs), cycle, params, false)
}

/// Baseline that never commands the supercapacitor: the battery serves the
/// whole demand.
pub fn simulate_battery_only(
    n_sc: usize,
    cycle: &DriveCycle,
    params: &SimParams,
    record_trace: bool,
) -> Result<SimResult, SimError> {
    let mut out = run(&[n_sc], Policy::BatteryOnly, cycle, params, record_trace)?;
    Ok(out.remove(0))
}

/// Paired run of two controllers on the same sizing.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub a: SimResult,
    pub b: SimResult,
    /// `(b - a) / a` in percent.
    pub laps_change_pct: f64,
    pub lifebat_change_pct: f64,
}

fn relative_change_pct(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (b - a) / a * 100.0
    }
}

pub fn compare_designs(
    a: &HessDesign,
    b: &HessDesign,
    cycle: &DriveCycle,
    params: &SimParams,
    record_trace: bool,
) -> Result<Comparison, SimError> {
    if a.n_sc != b.n_sc {
        return Err(SimError::Design(format!(
            "compared designs must share n_sc (got {} and {})",
            a.n_sc, b.n_sc
        )));
    }
    let ra = simulate(a, cycle, params, record_trace)?;
    let rb = simulate(b, cycle, params, record_trace)?;
    Ok(Comparison {
        laps_change_pct: relative_change_pct(ra.j_laps, rb.j_laps),
        lifebat_change_pct: relative_change_pct(ra.j_lifebat, rb.j_lifebat),
        a: ra,
        b: rb,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycle::{synthesize_test_cycle, VehicleParams};

    fn lap() -> DriveCycle {
        synthesize_test_cycle(300.0, 55.0, 7, 1.0, &VehicleParams::default()).unwrap()
    }

    #[test]
    fn quantized_shares_add_up_exactly() {
        for (a, b) in [(123_456.789, 98_765.432_1), (-54_321.123, 11.5), (1e-7, -3e5)] {
            let (qa, qb) = (quantize(a), quantize(b));
            let d = qa - qb;
            assert_eq!(d + qb, qa);
        }
    }

    #[test]
    fn dominance() {
        let a = Objectives { j_laps: 10.0, j_lifebat: 5000.0 };
        let b = Objectives { j_laps: 9.0, j_lifebat: 4000.0 };
        assert!(a.dominates(&b));
        assert!(!b.dominates(&a));
        assert!(!a.dominates(&a));
    }

    #[test]
    fn infeasible_sizing_is_the_sentinel() {
        let params = SimParams::default();
        let d = HessDesign::new(1000, MfGenome::initial()).unwrap();
        let r = simulate(&d, &lap(), &params, false).unwrap();
        assert!(!r.feasible);
        let o = evaluate_objectives(&r);
        assert_eq!((o.j_laps, o.j_lifebat), (0.0, 0.0));
    }

    #[test]
    fn zero_sc_banks_rejected() {
        assert!(HessDesign::new(0, MfGenome::initial()).is_err());
    }

    #[test]
    fn zero_demand_hits_the_lap_guard() {
        let vp = VehicleParams::default();
        let still = synthesize_test_cycle(60.0, 0.0, 1, 1.0, &vp).unwrap();
        let params = SimParams {
            max_laps: 3.0,
            ..SimParams::default()
        };
        let d = HessDesign::new(32, MfGenome::initial()).unwrap();
        let r = simulate(&d, &still, &params, true).unwrap();
        assert_eq!(r.j_laps, 3.0);
        let tr = r.trace.unwrap();
        assert!(tr.soc.iter().all(|s| *s == tr.soc[0]));
        assert_eq!(r.j_lifebat, f64::INFINITY);
    }

    #[test]
    fn run_is_deterministic_and_terminates_at_the_floor() {
        let params = SimParams::default();
        let d = HessDesign::new(32, MfGenome::initial()).unwrap();
        let cycle = lap();
        let a = simulate(&d, &cycle, &params, true).unwrap();
        let b = simulate(&d, &cycle, &params, true).unwrap();
        assert_eq!(a, b);
        assert!(a.j_laps > 1.0 && a.j_laps < 1000.0);
        let tr = a.trace.as_ref().unwrap();
        assert!(*tr.soc.last().unwrap() <= 0.2);
        assert!(tr.soc[..tr.len() - 1].iter().all(|s| *s > 0.2 && *s <= 0.9));
    }

    #[test]
    fn population_matches_single_runs() {
        let params = SimParams::default();
        let cycle = lap();
        let mut g = MfGenome::initial().into_genes();
        g.swap(0, 3);
        g[10] = 0.05;
        let designs = vec![
            HessDesign::new(32, MfGenome::initial()).unwrap(),
            HessDesign::new(1000, MfGenome::initial()).unwrap(),
            HessDesign::new(80, MfGenome::new(g).unwrap()).unwrap(),
            HessDesign::new(5, MfGenome::initial()).unwrap(),
        ];
        let pop = simulate_population(&designs, &cycle, &params).unwrap();
        for (d, r) in designs.iter().zip(&pop) {
            assert_eq!(&simulate(d, &cycle, &params, false).unwrap(), r);
        }
    }

    #[test]
    fn compare_refuses_unequal_sizing() {
        let params = SimParams::default();
        let a = HessDesign::new(32, MfGenome::initial()).unwrap();
        let b = HessDesign::new(33, MfGenome::initial()).unwrap();
        assert!(compare_designs(&a, &b, &lap(), &params, false).is_err());
        let same = compare_designs(&a, &a, &lap(), &params, false).unwrap();
        assert_eq!(same.laps_change_pct, 0.0);
        assert_eq!(same.lifebat_change_pct, 0.0);
    }
}
