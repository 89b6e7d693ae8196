//! Toolkit configuration file (TOML). Every section is optional and falls
//! back to the reference vehicle.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cycle::{load_drive_cycle, synthesize_test_cycle, CycleError, DriveCycle, SyntheticCycle, VehicleParams};
use crate::exec::Exec;
use crate::fis::{FisError, FisSpec};
use crate::moo::{MooConfig, MooError};
use crate::powertrain::{BatteryParams, DegradationParams, PowertrainError, ScParams};
use crate::sim::{SimError, SimLimits, SimParams};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config {path}: {msg}")]
    Parse { path: String, msg: String },
    #[error("config: {0}")]
    Powertrain(#[from] PowertrainError),
    #[error("config: {0}")]
    Sim(#[from] SimError),
    #[error("config: {0}")]
    Moo(#[from] MooError),
    #[error("config: {0}")]
    Cycle(#[from] CycleError),
    #[error("config: fis template: {0}")]
    Fis(#[from] FisError),
}

/// Road-load parameters as usually tabulated: aerodynamic coefficient in
/// h^2 N / km^2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleConfig {
    pub m_v: f64,
    #[serde(rename = "rho_CdA")]
    pub rho_cd_a: f64,
    pub f: f64,
    pub g: f64,
}

impl Default for VehicleConfig {
    fn default() -> Self {
        Self {
            m_v: 570.0,
            rho_cd_a: 0.075,
            f: 0.016,
            g: 9.81,
        }
    }
}

impl VehicleConfig {
    pub fn params(&self) -> VehicleParams {
        VehicleParams::from_table_units(self.m_v, self.rho_cd_a, self.f, self.g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HessConfig {
    /// Mass budget shared by cells and supercapacitor banks, kg.
    #[serde(rename = "m_HESS")]
    pub m_hess: f64,
    pub max_laps: f64,
}

impl Default for HessConfig {
    fn default() -> Self {
        Self {
            m_hess: 320.0,
            max_laps: 1000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CycleConfig {
    /// `t,v` file; relative paths resolve against the config file. Takes
    /// precedence over `synthetic`.
    pub file: Option<PathBuf>,
    pub synthetic: SyntheticCycle,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FisConfig {
    /// Controller template file; the built-in HESS template otherwise.
    pub template: Option<PathBuf>,
    /// Output discretization override.
    pub n_dis: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToolkitConfig {
    pub seed: u64,
    pub vehicle: VehicleConfig,
    pub battery: BatteryParams,
    pub supercapacitor: ScParams,
    pub degradation: DegradationParams,
    pub hess: HessConfig,
    pub limits: SimLimits,
    pub cycle: CycleConfig,
    pub fis: FisConfig,
    pub moo: MooConfig,
    /// Directory relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for ToolkitConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            vehicle: VehicleConfig::default(),
            battery: BatteryParams::default(),
            supercapacitor: ScParams::default(),
            degradation: DegradationParams::default(),
            hess: HessConfig::default(),
            limits: SimLimits::default(),
            cycle: CycleConfig::default(),
            fis: FisConfig::default(),
            moo: MooConfig::default(),
            base_dir: PathBuf::from("."),
        }
    }
}

impl ToolkitConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, ConfigError> {
        toml::from_str(s).map_err(|e| ConfigError::Parse {
            path: "<string>".into(),
            msg: e.message().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        let mut cfg: Self = toml::from_str(&text).map_err(|e| ConfigError::Parse {
            path: path.display().to_string(),
            msg: e.to_string().trim().replace('\n', " "),
        })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.vehicle.params().validate()?;
        self.battery.validate()?;
        self.supercapacitor.validate()?;
        self.degradation.validate()?;
        self.limits.validate()?;
        self.moo_config().validate()?;
        if !(self.hess.m_hess > 0.0 && self.hess.max_laps > 0.0) {
            return Err(SimError::Design("m_HESS and max_laps must be positive".into()).into());
        }
        Ok(())
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn fis_template(&self) -> Result<FisSpec, ConfigError> {
        let spec = match &self.fis.template {
            Some(p) => {
                let path = self.resolve(p);
                let text = std::fs::read_to_string(&path).map_err(|source| ConfigError::Read {
                    path: path.display().to_string(),
                    source,
                })?;
                FisSpec::from_toml_str(&text)?
            }
            None => FisSpec::hess_template(),
        };
        Ok(match self.fis.n_dis {
            Some(n) => spec.with_n_dis(n)?,
            None => spec,
        })
    }

    pub fn sim_params(&self) -> Result<SimParams, ConfigError> {
        Ok(SimParams {
            battery: self.battery,
            supercap: self.supercapacitor,
            degradation: self.degradation,
            m_hess: self.hess.m_hess,
            limits: self.limits,
            max_laps: self.hess.max_laps,
            template: self.fis_template()?,
            exec: Exec::default(),
        })
    }

    pub fn drive_cycle(&self) -> Result<DriveCycle, ConfigError> {
        let vp = self.vehicle.params();
        let c = match &self.cycle.file {
            Some(p) => load_drive_cycle(&self.resolve(p), &vp)?,
            None => {
                let s = &self.cycle.synthetic;
                synthesize_test_cycle(s.duration, s.v_peak, s.seed, s.dt, &vp)?
            }
        };
        Ok(c)
    }

    pub fn moo_config(&self) -> MooConfig {
        MooConfig {
            seed: self.seed,
            ..self.moo
        }
    }
}
