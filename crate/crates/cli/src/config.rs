//! Run configuration: strict key-value tree loaded from TOML or JSON.

use serde::{Deserialize, Serialize};
use spinboson::open::ReflectionParams;
use spinboson::twisted::TwistConfig;
use spinboson::yang_baxter::ModelParams;
use spinboson::C64;
use std::path::Path;

/// Complex scalar serialized as an `[re, im]` pair everywhere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cx(pub [f64; 2]);

impl Cx {
    pub fn c(&self) -> C64 {
        C64::new(self.0[0], self.0[1])
    }
    pub fn from_c(z: C64) -> Self {
        Cx([z.re, z.im])
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub eta: Cx,
    pub z0: Cx,
    pub z1: Cx,
    pub beta_c: Cx,
    pub gamma_c: Cx,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwistSection {
    /// Twist matrix rows, `[[K11, K12], [K21, K22]]`.
    pub k: [[Cx; 2]; 2],
    /// Free gauge parameter mixing the monodromy entries.
    pub g_c: Cx,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpenSection {
    pub xi_p: Cx,
    pub xi_m: Cx,
    pub kappa_p: Cx,
    pub kappa_m: Cx,
    pub theta_p: Cx,
    pub theta_m: Cx,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twist: Option<TwistSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub open: Option<OpenSection>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsSection {
    pub n_t: usize,
    pub margin: usize,
    pub seed: u64,
    /// Maximal Bethe root count searched by the `bethe` task.
    pub m_max: usize,
    pub leak_tol: f64,
}

impl Default for NumericsSection {
    fn default() -> Self {
        Self { n_t: 24, margin: 4, seed: 0, m_max: 4, leak_tol: 1e-8 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum QcSection {
    /// Diagonal-boundary expansion: τ⁰/τ¹/τ² spectra and the Q ODEs.
    OpenDiagonal { xi_p: Cx, xi_m: Cx, k_max: usize },
    /// Non-diagonal hamiltonian construction and transfer matching.
    OpenNondiagonal {
        mu1_m: Cx,
        nu1_m: Cx,
        xi1_m: Cx,
        xi0_p: Cx,
        xi1_p: Cx,
        lambda: Cx,
    },
    /// Twisted Gaudin Bethe system and its second-order ODE.
    Gaudin { u: f64, v: f64, x: f64, m_max: usize },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScanSection {
    /// χ-grid of the conjectured Bethe system at the physical p∞.
    Conjectured { chi_start: Cx, chi_step: Cx, chi_count: usize, m_max: usize },
    /// (U, V, X) grid of the Gaudin system.
    Gaudin { points: Vec<[f64; 3]>, m_max: usize },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Optional task echo; must agree with the subcommand when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<String>,
    pub model: ModelSection,
    pub boundary: BoundarySection,
    #[serde(default)]
    pub numerics: NumericsSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qc: Option<QcSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSection>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },
    #[error("validation error: {0}")]
    Validation(String),
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    let cfg: RunConfig = match path.extension().and_then(|e| e.to_str()) {
        Some("json") => serde_json::from_str(&text).map_err(|e| ConfigError::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })?,
        _ => toml::from_str(&text).map_err(|e| ConfigError::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })?,
    };
    validate(&cfg)?;
    Ok(cfg)
}

pub fn validate(cfg: &RunConfig) -> Result<(), ConfigError> {
    match (&cfg.boundary.twist, &cfg.boundary.open) {
        (Some(_), Some(_)) => {
            return Err(ConfigError::Validation(
                "exactly one boundary must be configured; both `boundary.twist` and `boundary.open` are present".into(),
            ))
        }
        (None, None) => {
            return Err(ConfigError::Validation(
                "exactly one boundary must be configured; neither `boundary.twist` nor `boundary.open` is present".into(),
            ))
        }
        _ => {}
    }
    if cfg.numerics.n_t < 8 {
        return Err(ConfigError::Validation(format!(
            "numerics.n_t = {} below the minimum 8",
            cfg.numerics.n_t
        )));
    }
    if cfg.numerics.margin >= cfg.numerics.n_t {
        return Err(ConfigError::Validation("numerics.margin must be below n_t".into()));
    }
    Ok(())
}

impl RunConfig {
    pub fn model_params(&self) -> Result<ModelParams, ConfigError> {
        ModelParams::new(
            self.model.eta.c(),
            self.model.z0.c(),
            self.model.z1.c(),
            self.model.beta_c.c(),
            self.model.gamma_c.c(),
            self.numerics.n_t,
            self.numerics.margin,
        )
        .map_err(|e| ConfigError::Validation(e.to_string()))
    }

    pub fn twist_config(&self) -> Result<TwistConfig, ConfigError> {
        let t = self
            .boundary
            .twist
            .as_ref()
            .ok_or_else(|| ConfigError::Validation("this task needs `boundary.twist`".into()))?;
        let k = ndarray::array![
            [t.k[0][0].c(), t.k[0][1].c()],
            [t.k[1][0].c(), t.k[1][1].c()]
        ];
        TwistConfig::from_twist(&k, t.g_c.c()).map_err(|e| ConfigError::Validation(e.to_string()))
    }

    pub fn reflection_params(&self) -> Result<ReflectionParams, ConfigError> {
        let o = self
            .boundary
            .open
            .as_ref()
            .ok_or_else(|| ConfigError::Validation("this task needs `boundary.open`".into()))?;
        ReflectionParams::new(
            o.xi_p.c(),
            o.xi_m.c(),
            o.kappa_p.c(),
            o.kappa_m.c(),
            o.theta_p.c(),
            o.theta_m.c(),
        )
        .map_err(|e| ConfigError::Validation(e.to_string()))
    }
}
