//! TOML experiment configuration.
//!
//! ```toml
//! seed = 7
//! output_dir = "out"
//!
//! [warp]
//! family = "cosh"            # or "quadratic" (alpha) or "dss" (mass, kappa, grid_size)
//!
//! [base]
//! variant = "flat_torus"     # or "sphere_axisym"
//! dim = 2
//! points = 64
//!
//! [initial_data]
//! kind = "sine_product"
//! offset = 0.3
//! amplitude = 0.1
//!
//! [flow]
//! t_end = 5.0
//! ```
//!
//! Every section rejects unknown keys and TOML itself rejects duplicates.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use warpflow::base::BaseManifold;
use warpflow::flow::{FlowConfig, InitialData};
use warpflow::warp::{
    build_dss_warp, make_builtin_warp, BuiltinFamily, DssParameters, DssReport, WarpingFunction,
};

use crate::CliError;

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub warp: WarpConfig,
    #[serde(default)]
    pub base: BaseConfig,
    #[serde(default)]
    pub initial_data: Option<InitialData>,
    #[serde(default)]
    pub flow: FlowConfig,
    #[serde(default)]
    pub barrier: Option<BarrierConfig>,
    #[serde(default)]
    pub conditions: ConditionsConfig,
    #[serde(default)]
    pub validate: ValidateConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum WarpConfig {
    /// `h = cosh r` on `(−r_max, r_max)`, unbounded by default.
    Cosh {
        #[serde(default)]
        r_max: Option<f64>,
    },
    /// `h = 1 + α r²`.
    Quadratic {
        alpha: f64,
        #[serde(default)]
        r_max: Option<f64>,
    },
    /// Tabulated de Sitter–Schwarzschild profile; `n` defaults to the base's ambient dimension.
    Dss {
        #[serde(default = "one")]
        mass: f64,
        #[serde(default)]
        kappa: f64,
        #[serde(default)]
        n: Option<usize>,
        #[serde(default = "dss_grid")]
        grid_size: usize,
        #[serde(default)]
        s_cap: Option<f64>,
    },
}

fn one() -> f64 {
    1.0
}

fn dss_grid() -> usize {
    2048
}

impl Default for WarpConfig {
    fn default() -> Self {
        WarpConfig::Cosh { r_max: None }
    }
}

impl WarpConfig {
    /// Builds the warp for a base of ambient dimension `ambient`.
    pub fn build(&self, ambient: usize) -> Result<(WarpingFunction, Option<DssReport>), CliError> {
        let bad = |e: warpflow::WarpError| CliError::Config(format!("[warp] {e}"));
        match *self {
            WarpConfig::Cosh { r_max } => Ok((
                make_builtin_warp(BuiltinFamily::Cosh, &[], r_max.unwrap_or(f64::INFINITY))
                    .map_err(bad)?,
                None,
            )),
            WarpConfig::Quadratic { alpha, r_max } => Ok((
                make_builtin_warp(
                    BuiltinFamily::Quadratic,
                    &[alpha],
                    r_max.unwrap_or(f64::INFINITY),
                )
                .map_err(bad)?,
                None,
            )),
            WarpConfig::Dss {
                mass,
                kappa,
                n,
                grid_size,
                s_cap,
            } => {
                let n = n.unwrap_or(ambient);
                if n != ambient {
                    return Err(CliError::Config(format!(
                        "[warp] n = {n} does not match the base ambient dimension {ambient}"
                    )));
                }
                let params = DssParameters::new(n, mass, kappa).map_err(bad)?;
                let (w, report) = build_dss_warp(&params, grid_size, s_cap).map_err(bad)?;
                Ok((w, Some(report)))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseKind {
    FlatTorus,
    SphereAxisym,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaseConfig {
    pub variant: BaseKind,
    pub dim: usize,
    /// Points per torus axis, or nodes from pole to pole on the sphere.
    pub points: usize,
    /// Torus periods; unit by default.
    pub periods: Option<Vec<f64>>,
}

impl Default for BaseConfig {
    fn default() -> Self {
        BaseConfig {
            variant: BaseKind::FlatTorus,
            dim: 2,
            points: 64,
            periods: None,
        }
    }
}

impl BaseConfig {
    pub fn build(&self) -> Result<BaseManifold, CliError> {
        self.build_with_points(self.points)
    }

    pub fn build_with_points(&self, points: usize) -> Result<BaseManifold, CliError> {
        let built = match self.variant {
            BaseKind::FlatTorus => {
                let periods = self.periods.clone().unwrap_or_else(|| vec![1.0; self.dim]);
                BaseManifold::flat_torus(&vec![points; self.dim], &periods)
            }
            BaseKind::SphereAxisym => {
                if self.periods.is_some() {
                    return Err(CliError::Config(
                        "[base] periods only apply to flat_torus".into(),
                    ));
                }
                BaseManifold::sphere_axisym(self.dim, points)
            }
        };
        built.map_err(|e| CliError::Config(format!("[base] {e}")))
    }

    /// Grid size with half the spacing.
    pub fn refined_points(&self) -> usize {
        match self.variant {
            BaseKind::FlatTorus => 2 * self.points,
            BaseKind::SphereAxisym => 2 * self.points - 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierConfig {
    /// Initial slice height.
    pub a: f64,
    #[serde(default = "one")]
    pub f0_bar: f64,
    #[serde(default = "barrier_t_end")]
    pub t_end: f64,
    #[serde(default = "barrier_dt")]
    pub dt: f64,
}

fn barrier_t_end() -> f64 {
    10.0
}

fn barrier_dt() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConditionsConfig {
    /// Ricci lower bound of the base; taken from the base when absent.
    pub rho: Option<f64>,
    pub points: usize,
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
}

impl Default for ConditionsConfig {
    fn default() -> Self {
        ConditionsConfig {
            rho: None,
            points: 1024,
            r_min: None,
            r_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateConfig {
    pub offset: f64,
    pub amplitude: f64,
    pub max_mode: i32,
    /// Guard for the second mean-curvature evaluation.
    pub theta_min: f64,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        ValidateConfig {
            offset: 0.0,
            amplitude: 0.15,
            max_mode: 2,
            theta_min: warpflow::geometry::DEFAULT_THETA_MIN,
        }
    }
}

/// One sweep axis: a dotted key of the config and the values it takes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: String,
    #[serde(default)]
    pub values: Vec<toml::Value>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Checks the values that deserialization alone cannot.
    pub fn validate(&self) -> Result<(), CliError> {
        self.flow
            .validate()
            .map_err(|e| CliError::Config(format!("[flow] {e}")))?;
        if self.conditions.points < 2 {
            return Err(CliError::Config("[conditions] points must be >= 2".into()));
        }
        if !(self.validate.theta_min > 0.0) {
            return Err(CliError::Config(
                "[validate] theta_min must be positive".into(),
            ));
        }
        if self.validate.max_mode < 1 {
            return Err(CliError::Config("[validate] max_mode must be >= 1".into()));
        }
        if let Some(b) = &self.barrier {
            if !(b.t_end > 0.0 && b.dt > 0.0) {
                return Err(CliError::Config(
                    "[barrier] t_end and dt must be positive".into(),
                ));
            }
        }
        self.base.build()?;
        Ok(())
    }

    /// Ambient dimension implied by the base section.
    pub fn ambient_dim(&self) -> usize {
        self.base.dim + 1
    }

    pub fn barrier_section(&self) -> Result<&BarrierConfig, CliError> {
        self.barrier
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [barrier] section".into()))
    }

    pub fn initial_section(&self) -> Result<&InitialData, CliError> {
        self.initial_data
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [initial_data] section".into()))
    }

    /// Config with `parameter` (a dotted key) set to `value`, re-validated.
    pub fn with_override(&self, parameter: &str, value: &toml::Value) -> Result<Self, CliError> {
        let mut tree =
            toml::Value::try_from(self).map_err(|e| CliError::Internal(e.to_string()))?;
        let keys: Vec<&str> = parameter.split('.').collect();
        let (leaf, path) = keys
            .split_last()
            .filter(|(l, _)| !l.is_empty())
            .ok_or_else(|| {
                CliError::Config(format!("[sweep] invalid parameter name {parameter:?}"))
            })?;
        let mut node = &mut tree;
        for key in path {
            let table = node.as_table_mut().ok_or_else(|| {
                CliError::Config(format!("[sweep] {parameter}: {key} is not a section"))
            })?;
            node = table
                .entry(key.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        }
        node.as_table_mut()
            .ok_or_else(|| {
                CliError::Config(format!("[sweep] {parameter}: parent is not a section"))
            })?
            .insert(leaf.to_string(), value.clone());
        let cfg: ExperimentConfig = tree.try_into().map_err(|e: toml::de::Error| {
            CliError::Config(format!("{parameter} = {value}: {}", e.message()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }
}
