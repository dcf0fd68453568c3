//! Self-describing result envelope plus JSON/CSV/report emission.

use crate::config::{Cx, RunConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Warn,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: CheckStatus,
    pub residual: f64,
    pub tolerance: f64,
}

impl CheckRecord {
    pub fn gauge(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        let status = if residual.is_finite() && residual <= tolerance {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        Self { name: name.into(), status, residual, tolerance }
    }

    pub fn warn(name: impl Into<String>, residual: f64) -> Self {
        Self { name: name.into(), status: CheckStatus::Warn, residual, tolerance: f64::INFINITY }
    }

    pub fn failed(name: impl Into<String>, message: &str) -> Self {
        Self {
            name: format!("{} [{message}]", name.into()),
            status: CheckStatus::Fail,
            residual: f64::INFINITY,
            tolerance: 0.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub index: usize,
    /// Polynomial coefficients by power of the spectral parameter.
    pub coeffs: Vec<Cx>,
    pub leak: f64,
    pub trusted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sector_charge: Option<f64>,
    pub holdout_error: f64,
    pub defective: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RootRow {
    pub m: usize,
    pub variant: String,
    pub roots: Vec<Cx>,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatchRow {
    pub bethe_index: usize,
    pub exact_index: usize,
    pub distance: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanRow {
    pub chi: Cx,
    pub p_inf: Cx,
    pub zeta: Cx,
    pub states: usize,
    pub best_match: f64,
    pub mean_residual: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Envelope {
    pub schema_version: u32,
    pub artifact_version: String,
    pub task: String,
    pub seed: u64,
    pub config_echo: RunConfig,
    pub checks: Vec<CheckRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub spectra: Vec<SpectrumRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub roots: Vec<RootRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub matches: Vec<MatchRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scan: Vec<ScanRow>,
    /// Wall-clock duration; excluded from the determinism hash.
    pub timing_ms: f64,
    /// SHA-256 of the envelope JSON with `timing_ms = 0` and this field
    /// empty: identical config + seed must reproduce it byte for byte.
    pub determinism_hash: String,
}

impl Envelope {
    pub fn new(task: &str, cfg: &RunConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            task: task.to_string(),
            seed: cfg.numerics.seed,
            config_echo: cfg.clone(),
            checks: Vec::new(),
            spectra: Vec::new(),
            roots: Vec::new(),
            matches: Vec::new(),
            scan: Vec::new(),
            timing_ms: 0.0,
            determinism_hash: String::new(),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    /// Fill the determinism hash (timing field excluded).
    pub fn seal(&mut self, timing_ms: f64) {
        self.timing_ms = 0.0;
        self.determinism_hash = String::new();
        let canonical = serde_json::to_string(self).expect("envelope serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        let digest = hasher.finalize();
        let mut hex = String::with_capacity(64);
        for byte in digest.as_slice() {
            hex.push_str(&format!("{byte:02x}"));
        }
        self.determinism_hash = hex;
        self.timing_ms = timing_ms;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmitFormat {
    Json,
    Csv,
    Both,
}

/// Write the envelope (JSON always), the text report, and the CSV tables
/// when requested.  Returns the list of files written.
pub fn emit(env: &Envelope, out_dir: &Path, format: EmitFormat) -> std::io::Result<Vec<String>> {
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    let json_path = out_dir.join(format!("{}-envelope.json", env.task));
    std::fs::write(&json_path, serde_json::to_string_pretty(env)?)?;
    written.push(json_path.display().to_string());

    if matches!(format, EmitFormat::Csv | EmitFormat::Both) {
        if !env.spectra.is_empty() {
            let path = out_dir.join("spectra.csv");
            let mut w = csv::Writer::from_path(&path)?;
            let max_deg = env.spectra.iter().map(|s| s.coeffs.len()).max().unwrap_or(0);
            let mut header = vec!["index".to_string()];
            for k in 0..max_deg {
                header.push(format!("c{k}_re"));
                header.push(format!("c{k}_im"));
            }
            header.extend(["leak".into(), "trusted".into(), "sector_charge".into()]);
            w.write_record(&header)?;
            for row in &env.spectra {
                let mut rec = vec![row.index.to_string()];
                for k in 0..max_deg {
                    let c = row.coeffs.get(k).copied().unwrap_or(Cx([0.0, 0.0]));
                    rec.push(format!("{:?}", c.0[0]));
                    rec.push(format!("{:?}", c.0[1]));
                }
                rec.push(format!("{:?}", row.leak));
                rec.push(row.trusted.to_string());
                rec.push(match row.sector_charge {
                    Some(q) => format!("{q}"),
                    None => String::new(),
                });
                w.write_record(&rec)?;
            }
            w.flush()?;
            written.push(path.display().to_string());
        }
        if !env.roots.is_empty() {
            let path = out_dir.join("roots.csv");
            let mut w = csv::Writer::from_path(&path)?;
            let max_m = env.roots.iter().map(|r| r.roots.len()).max().unwrap_or(0);
            let mut header = vec!["m".to_string(), "variant".to_string(), "residual".to_string()];
            for k in 0..max_m {
                header.push(format!("root{k}_re"));
                header.push(format!("root{k}_im"));
            }
            w.write_record(&header)?;
            for row in &env.roots {
                let mut rec =
                    vec![row.m.to_string(), row.variant.clone(), format!("{:?}", row.residual)];
                for k in 0..max_m {
                    let c = row.roots.get(k).copied().unwrap_or(Cx([f64::NAN, f64::NAN]));
                    rec.push(format!("{:?}", c.0[0]));
                    rec.push(format!("{:?}", c.0[1]));
                }
                w.write_record(&rec)?;
            }
            w.flush()?;
            written.push(path.display().to_string());
        }
    }

    let report_path = out_dir.join("report.txt");
    let mut report = String::new();
    report.push_str(&format!(
        "task {}  (schema v{}, artifact v{})\n",
        env.task, env.schema_version, env.artifact_version
    ));
    report.push_str(&format!("seed {}\n", env.seed));
    report.push_str(&format!("config hash {}\n", env.determinism_hash));
    let (mut pass, mut fail, mut warn) = (0usize, 0usize, 0usize);
    for c in &env.checks {
        match c.status {
            CheckStatus::Pass => pass += 1,
            CheckStatus::Fail => fail += 1,
            CheckStatus::Warn => warn += 1,
        }
        let tag = match c.status {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Warn => "warn",
        };
        report.push_str(&format!(
            "  [{tag}] {} (residual {:.3e}, tol {:.1e})\n",
            c.name, c.residual, c.tolerance
        ));
    }
    report.push_str(&format!("{pass} passed, {fail} failed, {warn} informational\n"));
    std::fs::write(&report_path, report)?;
    written.push(report_path.display().to_string());
    Ok(written)
}
