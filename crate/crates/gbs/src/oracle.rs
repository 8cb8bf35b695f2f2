//! Comparison of the Gaussian engine with the Fock-space oracle.

use gbs_core::fock::{fock_pnr_distribution, threshold_from_pnr, FockGuard};
use gbs_core::pattern::compositions;
use gbs_core::{ClickPattern, OutputPattern};

use crate::{parallel, CliResult, Experiment};

/// Agreement required for a pass.
pub const ORACLE_TOL: f64 = 1e-6;

/// Largest photon number compared for PNR patterns.
pub const PNR_MAX_PHOTONS: u32 = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub cutoff: u32,
    pub tail: f64,
    pub pnr_patterns: usize,
    pub pnr_max_error: f64,
    pub click_patterns: usize,
    pub threshold_max_error: f64,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.pnr_max_error <= ORACLE_TOL && self.threshold_max_error <= ORACLE_TOL
    }
}

/// Compares every PNR pattern with at most [`PNR_MAX_PHOTONS`] photons and
/// every click pattern.
pub fn oracle_check(exp: &Experiment, cutoff: Option<u32>, guard: FockGuard) -> CliResult<OracleReport> {
    let oracle = fock_pnr_distribution(&exp.config, &exp.interferometer, cutoff, guard)?;
    let model = exp.model()?;
    let k = model.ports();
    let max_n = PNR_MAX_PHOTONS.min(oracle.cutoff());
    let mut pnr_patterns = 0;
    let mut pnr_max_error = 0.0f64;
    for n in 0..=max_n {
        for c in compositions(n, k) {
            let s = OutputPattern::new(c);
            let engine = parallel::prob_total_exact_par(&model, &s)?;
            let fock = oracle.prob(&s).unwrap_or(0.0);
            pnr_max_error = pnr_max_error.max((engine - fock).abs());
            pnr_patterns += 1;
        }
    }
    let clicks = threshold_from_pnr(oracle.probs());
    let mut threshold_max_error = 0.0f64;
    for mask in 0..1u64 << k {
        let u = ClickPattern::from_mask(mask, k);
        let engine = parallel::prob_threshold_par(&model, &u)?;
        let fock = clicks.get(&u).copied().unwrap_or(0.0);
        threshold_max_error = threshold_max_error.max((engine - fock).abs());
    }
    Ok(OracleReport {
        cutoff: oracle.cutoff(),
        tail: oracle.tail(),
        pnr_patterns,
        pnr_max_error,
        click_patterns: 1 << k,
        threshold_max_error,
    })
}
