//! Physical parameters and numerical controls of an experiment.

use alloc::format;

use crate::{Error, Result};

/// Default tolerance for Hermiticity, symmetry and residue checks.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Uniform transmission of the setup, either as the three loss stages or as
/// their product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transmission {
    Components {
        source: f64,
        interferometer: f64,
        detector: f64,
    },
    Overall(f64),
}

impl Transmission {
    /// Overall transmission `eta_t = eta_s * eta_u * eta_d`.
    pub fn overall(&self) -> f64 {
        match *self {
            Transmission::Components {
                source,
                interferometer,
                detector,
            } => source * interferometer * detector,
            Transmission::Overall(t) => t,
        }
    }
}

/// Experiment description: `ports` output/input ports (K), of which the first
/// `inputs` (M) carry squeezed vacuum with common squeezing `squeezing` (r).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub ports: usize,
    pub inputs: usize,
    pub squeezing: f64,
    pub transmission: Transmission,
    /// Probability that a photon stays in the indistinguishable mode.
    pub eta_ind: f64,
    pub seed: u64,
    pub tol: f64,
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidConfig(format!("{name} = {v} is outside [0, 1]")));
    }
    Ok(())
}

impl ExperimentConfig {
    /// Builds and validates a config with overall transmission `eta_t`.
    pub fn new(
        ports: usize,
        inputs: usize,
        squeezing: f64,
        eta_t: f64,
        eta_ind: f64,
    ) -> Result<Self> {
        let cfg = ExperimentConfig {
            ports,
            inputs,
            squeezing,
            transmission: Transmission::Overall(eta_t),
            eta_ind,
            seed: 0,
            tol: DEFAULT_TOL,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Result<Self> {
        self.tol = tol;
        self.validate()?;
        Ok(self)
    }

    pub fn with_eta_ind(mut self, eta_ind: f64) -> Result<Self> {
        self.eta_ind = eta_ind;
        self.validate()?;
        Ok(self)
    }

    pub fn with_transmission(mut self, transmission: Transmission) -> Result<Self> {
        self.transmission = transmission;
        self.validate()?;
        Ok(self)
    }

    pub fn eta_t(&self) -> f64 {
        self.transmission.overall()
    }

    pub fn validate(&self) -> Result<()> {
        if self.ports == 0 {
            return Err(Error::InvalidConfig("K must be at least 1".into()));
        }
        if self.inputs == 0 || self.inputs > self.ports {
            return Err(Error::InvalidConfig(format!(
                "M = {} must satisfy 1 <= M <= K = {}",
                self.inputs, self.ports
            )));
        }
        if !(self.squeezing.is_finite() && self.squeezing >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "r = {} must be finite and non-negative",
                self.squeezing
            )));
        }
        match self.transmission {
            Transmission::Components {
                source,
                interferometer,
                detector,
            } => {
                check_unit("eta_s", source)?;
                check_unit("eta_u", interferometer)?;
                check_unit("eta_d", detector)?;
            }
            Transmission::Overall(t) => check_unit("eta_t", t)?,
        }
        check_unit("eta_ind", self.eta_ind)?;
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!("tol = {} must be positive", self.tol)));
        }
        Ok(())
    }
}
