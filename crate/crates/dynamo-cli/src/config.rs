//! Run configuration: a single JSON document with defaults for every field,
//! so the minimal file is `{}`. Unknown keys, malformed JSON, invalid values
//! and a missing file each produce a distinct diagnostic.

use dynamo_core::velocity::{diagonal_index, eps_n};
use dynamo_core::{Grid3, Result as CoreResult};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config file {path} cannot be read: {source}")]
    MissingFile {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config file {path} is not valid JSON: {message}")]
    Malformed { path: PathBuf, message: String },
    #[error("config file {path} has an unrecognized key: {message}")]
    UnknownKey { path: PathBuf, message: String },
    #[error("config file {path} has an invalid value: {message}")]
    InvalidValue { path: PathBuf, message: String },
}

/// Block size selector: a fixed `n`, or the diagonal enumeration
/// 1; 1,2; 1,2,3; … that visits every block size infinitely often.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BlockSize {
    Fixed(u32),
    Diagonal(DiagonalTag),
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub enum DiagonalTag {
    #[serde(rename = "diagonal")]
    Diagonal,
}

/// Diffusivity: explicit, or `"auto"` for `ε_n = 1/(N₀²n²)` matched to the
/// first interval's block size.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpsSpec {
    Value(f64),
    Auto(AutoTag),
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub enum AutoTag {
    #[serde(rename = "auto")]
    Auto,
}

/// Growth-rate budget for the schedule: explicit, or `"measure"` to take the
/// maximum of `Re p(j)` over the configured sweep before building anything.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaSpec {
    Value(f64),
    Measure(MeasureTag),
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub enum MeasureTag {
    #[serde(rename = "measure")]
    Measure,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Collocation grid `(nx, ny, nz)`; axes even and at least 4.
    pub grid: [usize; 3],
    /// ABC amplitude, in `(0, 1)`.
    pub delta: f64,
    /// Base spatial frequency `N₀` of the rescaled flow.
    pub n0: u32,
    /// Block size, or `"diagonal"`.
    pub n: BlockSize,
    /// Diffusivity, or `"auto"`.
    pub eps: EpsSpec,
    /// Time step; `null` selects the CFL-capped default per segment.
    pub dt: Option<f64>,
    /// Number of schedule intervals.
    pub intervals: usize,
    /// Growth-rate budget `λ̂`, or `"measure"`.
    pub lambda_hat: LambdaSpec,
    /// Decay-phase closeness tolerance `η`, in `(0, 1)`.
    pub eta: f64,
    /// Prefactor constant `C ≥ 1` of the schedule lengths.
    pub c_prefactor: f64,
    /// Bloch truncation `K ≥ 2` for eigensolves.
    pub k_trunc: usize,
    /// Bloch offsets swept by the rate measurement; the two smallest also
    /// give the first-order slope estimate.
    pub j_sweep: Vec<f64>,
    /// Record one energy sample every this many solver steps.
    pub sample_every: usize,
    /// Dealias cutoff override; `null` derives it from the schedule.
    pub dealias_limit: Option<i64>,
    pub out_dir: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid: [96, 96, 96],
            delta: 0.2,
            n0: 32,
            n: BlockSize::Fixed(1),
            eps: EpsSpec::Auto(AutoTag::Auto),
            dt: None,
            intervals: 1,
            lambda_hat: LambdaSpec::Measure(MeasureTag::Measure),
            eta: 0.1,
            c_prefactor: 1.0,
            k_trunc: 5,
            j_sweep: vec![
                0.002, 0.004, 0.006, 0.008, 0.01, 0.0125, 0.015, 0.0175, 0.02, 0.0225, 0.025,
                0.03, 0.035, 0.04,
            ],
            sample_every: 16,
            dealias_limit: None,
            out_dir: PathBuf::from("out"),
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> std::result::Result<(), String> {
        Grid3::new(self.grid[0], self.grid[1], self.grid[2])
            .map_err(|e| e.to_string())?;
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(format!("delta must lie in (0,1), got {}", self.delta));
        }
        if self.n0 < 1 {
            return Err("n0 must be at least 1".into());
        }
        if let BlockSize::Fixed(n) = self.n {
            if n < 1 {
                return Err("n must be at least 1".into());
            }
        }
        if let EpsSpec::Value(e) = self.eps {
            if e <= 0.0 {
                return Err(format!("eps must be positive, got {e}"));
            }
        }
        if let Some(dt) = self.dt {
            if dt <= 0.0 {
                return Err(format!("dt must be positive, got {dt}"));
            }
        }
        if self.intervals < 1 {
            return Err("intervals must be at least 1".into());
        }
        if let LambdaSpec::Value(l) = self.lambda_hat {
            if l <= 0.0 {
                return Err(format!("lambda_hat must be positive, got {l}"));
            }
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(format!("eta must lie in (0,1), got {}", self.eta));
        }
        if self.c_prefactor < 1.0 {
            return Err(format!(
                "c_prefactor must be at least 1, got {}",
                self.c_prefactor
            ));
        }
        if self.k_trunc < 2 {
            return Err("k_trunc must be at least 2".into());
        }
        if self.j_sweep.len() < 2 || self.j_sweep.iter().any(|&j| j <= 0.0) {
            return Err("j_sweep needs at least two positive offsets".into());
        }
        if self.sample_every < 1 {
            return Err("sample_every must be at least 1".into());
        }
        if let Some(l) = self.dealias_limit {
            if l < 1 {
                return Err(format!("dealias_limit must be at least 1, got {l}"));
            }
        }
        Ok(())
    }

    pub fn grid3(&self) -> CoreResult<Grid3> {
        Grid3::new(self.grid[0], self.grid[1], self.grid[2])
    }

    /// Block size of interval `k` (1-based).
    pub fn block(&self, k: usize) -> CoreResult<u32> {
        match self.n {
            BlockSize::Fixed(n) => Ok(n),
            BlockSize::Diagonal(_) => Ok(diagonal_index(k as u64)? as u32),
        }
    }

    /// Fixed block size handed to the schedule builder, `None` for diagonal.
    pub fn fixed_n(&self) -> Option<u32> {
        match self.n {
            BlockSize::Fixed(n) => Some(n),
            BlockSize::Diagonal(_) => None,
        }
    }

    /// Diffusivity after resolving `"auto"` against the first interval.
    pub fn resolved_eps(&self) -> CoreResult<f64> {
        match self.eps {
            EpsSpec::Value(e) => Ok(e),
            EpsSpec::Auto(_) => Ok(eps_n(self.block(1)?, self.n0)),
        }
    }
}

pub fn parse_config(path: &Path) -> std::result::Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::MissingFile {
        path: path.to_path_buf(),
        source,
    })?;
    let config: RunConfig = serde_json::from_str(&text).map_err(|e| {
        let message = e.to_string();
        if e.is_syntax() || e.is_eof() {
            ConfigError::Malformed {
                path: path.to_path_buf(),
                message,
            }
        } else if message.starts_with("unknown field") {
            ConfigError::UnknownKey {
                path: path.to_path_buf(),
                message,
            }
        } else {
            ConfigError::InvalidValue {
                path: path.to_path_buf(),
                message,
            }
        }
    })?;
    config
        .validate()
        .map_err(|message| ConfigError::InvalidValue {
            path: path.to_path_buf(),
            message,
        })?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn parse_str(json: &str) -> std::result::Result<RunConfig, ConfigError> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(json.as_bytes()).unwrap();
        drop(f);
        parse_config(&path)
    }

    #[test]
    fn minimal_file_gets_defaults() {
        let c = parse_str(r#"{"delta": 0.2, "n0": 8, "n": 1}"#).unwrap();
        assert_eq!(c.grid, [96, 96, 96]);
        assert_eq!(c.intervals, 1);
        assert!(matches!(c.lambda_hat, LambdaSpec::Measure(_)));
        assert_eq!(c.eta, 0.1);
        assert_eq!(c.block(1).unwrap(), 1);
    }

    #[test]
    fn auto_eps_resolves_to_the_block_bracket() {
        let c = parse_str(r#"{"eps": "auto", "n": 2, "n0": 4}"#).unwrap();
        assert_eq!(c.resolved_eps().unwrap(), 1.0 / 64.0);
        let c = parse_str(r#"{"eps": 0.5}"#).unwrap();
        assert_eq!(c.resolved_eps().unwrap(), 0.5);
    }

    #[test]
    fn diagonal_mode_round_trips() {
        let c = parse_str(r#"{"n": "diagonal", "intervals": 3}"#).unwrap();
        assert!(c.fixed_n().is_none());
        assert_eq!(c.block(3).unwrap(), 2);
        let json = serde_json::to_string(&c).unwrap();
        assert!(json.contains(r#""n":"diagonal""#));
    }

    #[test]
    fn each_failure_mode_is_distinct() {
        assert!(matches!(
            parse_config(Path::new("/nonexistent/config.json")),
            Err(ConfigError::MissingFile { .. })
        ));
        assert!(matches!(
            parse_str(r#"{"delta": 0.2,"#),
            Err(ConfigError::Malformed { .. })
        ));
        assert!(matches!(
            parse_str(r#"{"detla": 0.2}"#),
            Err(ConfigError::UnknownKey { .. })
        ));
        assert!(matches!(
            parse_str(r#"{"dt": -0.5}"#),
            Err(ConfigError::InvalidValue { .. })
        ));
        assert!(matches!(
            parse_str(r#"{"delta": 1.5}"#),
            Err(ConfigError::InvalidValue { .. })
        ));
    }
}
