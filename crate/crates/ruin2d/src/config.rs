//! TOML experiment configuration: one document per run, fully deterministic.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::asymptotics::{AsymptoticKind, DEFAULT_REGIME_THRESHOLD};
use crate::claims::ClaimDistribution;
use crate::ide::SolveKind;
use crate::model::ModelParams;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config:\n{}", .0.join("\n"))]
    Invalid(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelParams,
    pub claim: ClaimDistribution,
    #[serde(default)]
    pub simulate: Option<SimulateSection>,
    #[serde(default)]
    pub solve: Option<SolveSection>,
    #[serde(default)]
    pub asymptotics: Option<AsymptoticsSection>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    /// Initial reserve pairs (u1, u2) in original coordinates.
    pub reserves: Vec<[f64; 2]>,
    pub horizons: Vec<f64>,
    pub n: u64,
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Number of full event-path dumps to write (first paths of the run).
    #[serde(default)]
    pub dump_paths: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSection {
    pub kind: SolveKind,
    /// Laplace argument.
    pub s: f64,
    /// Far edge of the normalized wedge domain.
    pub vmax: f64,
    /// Grid nodes per axis.
    pub n_nodes: usize,
    /// Operator step size; derived from a 0.7 contraction target if absent.
    #[serde(default)]
    pub h_step: Option<f64>,
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// MC samples per boundary-table point.
    pub boundary_n: u64,
    /// Boundary-table spacing in normalized coordinates; grid spacing if absent.
    #[serde(default)]
    pub boundary_spacing: Option<f64>,
    #[serde(default = "default_bias_budget")]
    pub bias_budget: f64,
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Probe points (u1, u2) for the solver-vs-MC cross-check table.
    #[serde(default)]
    pub probes: Vec<[f64; 2]>,
    /// MC samples per probe point.
    #[serde(default = "default_probe_n")]
    pub probe_n: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymptoticsSection {
    pub kind: AsymptoticKind,
    /// Sweep points (x1, x2) in normalized coordinates, nondecreasing.
    pub grid: Vec<[f64; 2]>,
    pub horizon: f64,
    /// MC samples per sweep point.
    pub n: u64,
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_regime_threshold")]
    pub regime_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Output directory; overridable by --out and the RUIN2D_OUT_DIR env var.
    #[serde(default)]
    pub dir: Option<PathBuf>,
}

fn default_workers() -> usize {
    0 // 0 = all available cores; results are worker-count invariant
}

fn default_max_iter() -> usize {
    500
}

fn default_bias_budget() -> f64 {
    1e-6
}

fn default_probe_n() -> u64 {
    100_000
}

fn default_regime_threshold() -> f64 {
    DEFAULT_REGIME_THRESHOLD
}

impl ExperimentConfig {
    /// Parse and validate a TOML config; also returns the SHA-256 of the raw
    /// file bytes, which every output embeds for reproducibility.
    pub fn load(path: &Path) -> Result<(Self, String), ConfigError> {
        let bytes = std::fs::read(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let hash = hex_digest(&bytes);
        let text = String::from_utf8_lossy(&bytes);
        let mut config: ExperimentConfig = toml::from_str(&text)?;
        config.validate()?;
        Ok((config, hash))
    }

    /// Validate all sections, reporting every violation; rebuilds derived
    /// claim state after deserialization.
    pub fn validate(&mut self) -> Result<(), ConfigError> {
        let mut errors = Vec::new();
        if let Err(v) = self.model.validate() {
            errors.extend(v.iter().map(|e| e.to_string()));
        }
        match self.claim.normalized() {
            Ok(claim) => self.claim = claim,
            Err(e) => errors.push(e.to_string()),
        }
        if self.simulate.is_none() && self.solve.is_none() && self.asymptotics.is_none() {
            errors.push("config has no simulate, solve or asymptotics section".into());
        }
        if let Some(sim) = &self.simulate {
            if sim.reserves.is_empty() {
                errors.push("simulate.reserves must not be empty".into());
            }
            if sim.horizons.is_empty() || sim.horizons.iter().any(|&t| !(t > 0.0)) {
                errors.push("simulate.horizons must be nonempty and positive".into());
            }
            if sim.n == 0 {
                errors.push("simulate.n must be positive".into());
            }
            if sim.reserves.iter().any(|r| r[0] < 0.0 || r[1] < 0.0) {
                errors.push("simulate.reserves must be nonnegative".into());
            }
        }
        if let Some(solve) = &self.solve {
            if !(solve.s > 0.0) {
                errors.push(format!("solve.s must be positive (got {})", solve.s));
            }
            if !(solve.vmax > 0.0) || solve.n_nodes < 3 {
                errors.push("solve needs vmax > 0 and n_nodes >= 3".into());
            }
            if !(solve.tol > 0.0) {
                errors.push("solve.tol must be positive".into());
            }
            if let Some(h) = solve.h_step {
                if !(h > 0.0) {
                    errors.push("solve.h_step must be positive".into());
                }
            }
            // the solver tolerance must dominate the boundary-table MC noise:
            // a Bernoulli-scale SE bound of 0.5 / sqrt(n) has to stay below tol/2
            let se_bound = 0.5 / (solve.boundary_n.max(1) as f64).sqrt();
            if solve.boundary_n == 0 || se_bound > 0.5 * solve.tol {
                errors.push(format!(
                    "solve.boundary_n = {} gives boundary SE bound {:.2e}, above tol/2 = {:.2e}; \
                     increase boundary_n to at least {}",
                    solve.boundary_n,
                    se_bound,
                    0.5 * solve.tol,
                    (1.0 / solve.tol).powi(2).ceil() as u64
                ));
            }
            if !(solve.bias_budget > 0.0 && solve.bias_budget < 1.0) {
                errors.push("solve.bias_budget must be in (0, 1)".into());
            }
        }
        if let Some(asy) = &self.asymptotics {
            if asy.grid.is_empty() {
                errors.push("asymptotics.grid must not be empty".into());
            }
            if asy
                .grid
                .windows(2)
                .any(|w| w[1][0] < w[0][0] || w[1][1] < w[0][1])
            {
                errors.push("asymptotics.grid must be nondecreasing in both coordinates".into());
            }
            if asy.grid.iter().any(|p| p[0] > p[1]) {
                errors.push(
                    "asymptotics.grid points must satisfy x1 <= x2 (non-degenerate regime)".into(),
                );
            }
            if !(asy.horizon > 0.0) {
                errors.push("asymptotics.horizon must be positive".into());
            }
            if asy.n == 0 {
                errors.push("asymptotics.n must be positive".into());
            }
            if !(asy.regime_threshold > 0.0) {
                errors.push("asymptotics.regime_threshold must be positive".into());
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(errors))
        }
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[model]
r = 0.05
lambda = 1.0
c1 = 2.0
c2 = 1.0
delta1 = 0.5
delta2 = 0.5

[claim]
family = "exponential"
mean = 1.0

[simulate]
reserves = [[1.0, 3.0]]
horizons = [10.0]
n = 1000
seed = 7
"#;

    #[test]
    fn minimal_config_parses_and_validates() {
        let mut config: ExperimentConfig = toml::from_str(MINIMAL).unwrap();
        config.validate().unwrap();
        let sim = config.simulate.unwrap();
        assert_eq!(sim.n, 1000);
        assert_eq!(sim.workers, 0);
        assert_eq!(sim.dump_paths, 0);
    }

    #[test]
    fn reg_varying_claim_is_rebuilt_on_validate() {
        let text = MINIMAL.replace(
            "family = \"exponential\"\nmean = 1.0",
            "family = \"reg_varying\"\nalpha = 1.5\nbeta = 1.0",
        );
        let mut config: ExperimentConfig = toml::from_str(&text).unwrap();
        config.validate().unwrap();
        let rv = config.claim.as_reg_varying().unwrap();
        assert!(rv.splice_point() > 0.0, "splice point must be recomputed");
    }

    #[test]
    fn all_violations_reported_at_once() {
        let text = MINIMAL
            .replace("r = 0.05", "r = 0.0")
            .replace("delta1 = 0.5", "delta1 = 0.3")
            .replace("n = 1000", "n = 0");
        let mut config: ExperimentConfig = toml::from_str(&text).unwrap();
        let err = config.validate().unwrap_err();
        match err {
            ConfigError::Invalid(errors) => {
                assert!(errors.len() >= 3, "expected >= 3 violations: {errors:?}")
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn unknown_fields_rejected() {
        let text = MINIMAL.replace("seed = 7", "seed = 7\nbogus_field = 1");
        assert!(toml::from_str::<ExperimentConfig>(&text).is_err());
    }

    #[test]
    fn boundary_budget_must_dominate_tolerance() {
        let text = format!(
            "{MINIMAL}\n[solve]\nkind = \"min\"\ns = 0.5\nvmax = 20.0\nn_nodes = 41\ntol = 1e-3\nboundary_n = 100\nseed = 1\n"
        );
        let mut config: ExperimentConfig = toml::from_str(&text).unwrap();
        let err = config.validate().unwrap_err();
        assert!(err.to_string().contains("boundary"), "got: {err}");
    }

    #[test]
    fn hash_is_stable_and_hex() {
        let h = hex_digest(b"abc");
        assert_eq!(
            h,
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
