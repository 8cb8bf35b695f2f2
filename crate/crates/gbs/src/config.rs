//! JSON experiment and sweep configuration files.

use std::path::Path;

use gbs_core::interferometer::UNITARY_TOL;
use gbs_core::{haar_random_unitary, CMatrix, Complex, ExperimentConfig, GbsModel, Interferometer, Transmission};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Overall transmission or its three factors.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum TransmissionSpec {
    Overall(f64),
    Components {
        source: f64,
        interferometer: f64,
        detector: f64,
    },
}

/// One experiment as written in a config file.
///
/// ```json
/// { "ports": 2, "inputs": 1, "squeezing": 0.5, "eta_t": 0.9, "eta_ind": 0.8, "seed": 7 }
/// ```
///
/// `eta_t` may be an object `{ "source": .., "interferometer": .., "detector": .. }`.
/// Without `unitary`, the interferometer is Haar-random from `seed`; with it,
/// `unitary` lists rows of `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub ports: usize,
    pub inputs: usize,
    pub squeezing: serde_json::Value,
    pub eta_t: TransmissionSpec,
    pub eta_ind: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unitary: Option<Vec<Vec<[f64; 2]>>>,
}

/// A parsed experiment: validated config plus interferometer.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub file: ExperimentFile,
    pub config: ExperimentConfig,
    pub interferometer: Interferometer,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl ExperimentFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| config_err(format!("malformed config: {e}")))
    }

    fn squeezing(&self) -> CliResult<f64> {
        match &self.squeezing {
            serde_json::Value::Number(n) => n.as_f64().ok_or_else(|| config_err("squeezing is not a number")),
            serde_json::Value::Array(_) => Err(config_err(
                "per-port squeezing is not supported: all inputs share one squeezing parameter",
            )),
            other => Err(config_err(format!("squeezing must be a number, got {other}"))),
        }
    }

    /// Validates and builds the experiment.
    pub fn build(&self) -> CliResult<Experiment> {
        let transmission = match self.eta_t {
            TransmissionSpec::Overall(t) => Transmission::Overall(t),
            TransmissionSpec::Components {
                source,
                interferometer,
                detector,
            } => Transmission::Components {
                source,
                interferometer,
                detector,
            },
        };
        let mut config = ExperimentConfig::new(self.ports, self.inputs, self.squeezing()?, 1.0, self.eta_ind)?
            .with_transmission(transmission)?
            .with_seed(self.seed);
        if let Some(tol) = self.tol {
            config = config.with_tol(tol)?;
        }
        let interferometer = match &self.unitary {
            Some(rows) => {
                if rows.len() != self.ports || rows.iter().any(|r| r.len() != self.ports) {
                    return Err(config_err(format!("unitary must be {0} x {0}", self.ports)));
                }
                let m = CMatrix::from_fn(self.ports, self.ports, |i, j| Complex::new(rows[i][j][0], rows[i][j][1]));
                Interferometer::new(m, UNITARY_TOL)?
            }
            None => haar_random_unitary(self.ports, self.seed)?,
        };
        Ok(Experiment {
            file: self.clone(),
            config,
            interferometer,
        })
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex(&Sha256::digest(canonical.as_bytes()))
    }
}

impl Experiment {
    pub fn load(path: &Path) -> CliResult<Self> {
        ExperimentFile::load(path)?.build()
    }

    /// Replaces the seed (and with it a Haar-random interferometer).
    pub fn with_seed(mut self, seed: u64) -> CliResult<Self> {
        self.file.seed = seed;
        self.file.build()
    }

    pub fn with_eta_ind(mut self, eta_ind: f64) -> CliResult<Self> {
        self.file.eta_ind = eta_ind;
        self.file.build()
    }

    pub fn model(&self) -> CliResult<GbsModel> {
        Ok(GbsModel::new(self.config, self.interferometer.clone())?)
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// How the sampler truncates each virtual mode's photon number.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Default)]
#[serde(rename_all = "snake_case")]
pub enum TruncationSpec {
    #[default]
    Auto,
    Factor(f64),
}

impl From<TruncationSpec> for gbs_core::Truncation {
    fn from(t: TruncationSpec) -> Self {
        match t {
            TruncationSpec::Auto => gbs_core::Truncation::Auto,
            TruncationSpec::Factor(f) => gbs_core::Truncation::Factor(f),
        }
    }
}

/// Where the fidelity denominator's distinguishable probabilities come from.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
pub enum Denominator {
    /// The same empirical `P_sim` as the numerator.
    #[default]
    Sampled,
    /// Exact `P_dis` in numerator and denominator.
    Exact,
}

/// A fidelity sweep grid.
///
/// Every combination of `photons`, `eta_ind` and `haar_seeds` is one sweep
/// point; each point reports every `n_cut`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub ports: usize,
    pub inputs: usize,
    pub squeezing: f64,
    pub eta_t: f64,
    pub eta_ind: Vec<f64>,
    pub n_cut: Vec<u32>,
    /// Photon numbers `N` of the test pattern `(1, .., 1, 0, ..)`.
    pub photons: Vec<usize>,
    pub haar_seeds: Vec<u64>,
    pub epsilon: f64,
    /// Samples per point; defaults to `ceil(1 / epsilon)`.
    #[serde(default)]
    pub n_samples: Option<u64>,
    #[serde(default)]
    pub sample_seed: u64,
    #[serde(default)]
    pub truncation: TruncationSpec,
    #[serde(default)]
    pub denominator: Denominator,
}

impl SweepGrid {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        let grid: SweepGrid =
            serde_json::from_str(&text).map_err(|e| config_err(format!("malformed sweep grid: {e}")))?;
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.eta_ind.is_empty() || self.n_cut.is_empty() || self.photons.is_empty() || self.haar_seeds.is_empty() {
            return Err(config_err("sweep grid axes must be non-empty"));
        }
        for &eta in &self.eta_ind {
            ExperimentConfig::new(self.ports, self.inputs, self.squeezing, self.eta_t, eta)?;
        }
        if let Some(&n) = self.photons.iter().find(|&&n| n > self.ports) {
            return Err(config_err(format!("N = {n} exceeds K = {}", self.ports)));
        }
        if !(self.epsilon > 0.0) {
            return Err(config_err("epsilon must be positive"));
        }
        Ok(())
    }

    /// Config of one sweep point.
    pub fn config(&self, eta_ind: f64) -> CliResult<ExperimentConfig> {
        Ok(ExperimentConfig::new(self.ports, self.inputs, self.squeezing, self.eta_t, eta_ind)?)
    }
}
