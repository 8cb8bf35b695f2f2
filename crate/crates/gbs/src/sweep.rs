//! Fidelity sweeps over `(N, eta_ind, Haar seed)` grids.

use std::io::Write;
use std::time::Instant;

use gbs_core::approx::{fidelity_from_terms, FidelityRecord, IndistinguishableTerms};
use gbs_core::fit::{fit_exp_decay, fit_exp_eta, fit_linear, ExpDecayFit, ExpEtaFit, LinearFit};
use gbs_core::pnr::DEFAULT_SUBPATTERN_GUARD;
use gbs_core::sampler::estimate_p_sim;
use gbs_core::{haar_random_unitary, DistinguishableSource, GbsModel, OutputPattern};
use rayon::prelude::*;

use crate::{fmt_f64, CliResult, Denominator, SweepGrid};

/// CSV header of sweep records.
pub const CSV_HEADER: [&str; 7] = ["eta_ind", "N_cut", "epsilon", "pattern", "F", "haar_seed", "runtime_ms"];

/// Bound on the decay rate searched by the exponential fit in `N`.
const DECAY_RATE_BOUND: f64 = 5.0;

/// Records of one sweep point, one per `N_cut <= N`.
fn run_point(grid: &SweepGrid, photons: usize, eta_ind: f64, haar_seed: u64, timing: bool) -> CliResult<Vec<FidelityRecord>> {
    let model = GbsModel::new(grid.config(eta_ind)?, haar_random_unitary(grid.ports, haar_seed)?)?;
    let s = OutputPattern::leading_ones(grid.ports, photons)?;
    let terms = IndistinguishableTerms::compute(&model, &s, s.total())?;
    let (source, epsilon): (Box<dyn DistinguishableSource>, f64) = match grid.denominator {
        Denominator::Sampled => (
            Box::new(estimate_p_sim(
                &model,
                grid.truncation.into(),
                grid.epsilon,
                grid.sample_seed,
                grid.n_samples,
                Some(&s),
            )?),
            grid.epsilon,
        ),
        Denominator::Exact => (Box::new(model.dist_table(&s, DEFAULT_SUBPATTERN_GUARD)?), 0.0),
    };
    let order = terms.order_terms(source.as_ref());
    let mut out = Vec::new();
    for &n_cut in grid.n_cut.iter().filter(|&&c| c <= s.total()) {
        let fidelity = fidelity_from_terms(&order, n_cut)?;
        let runtime_ms = if timing {
            let start = Instant::now();
            let t = IndistinguishableTerms::compute(&model, &s, n_cut)?;
            let p: f64 = t.order_terms(source.as_ref()).iter().sum();
            std::hint::black_box(p);
            start.elapsed().as_secs_f64() * 1e3
        } else {
            f64::NAN
        };
        out.push(FidelityRecord {
            eta_ind,
            n_cut,
            epsilon,
            pattern: s.clone(),
            fidelity,
            haar_seed,
            runtime_ms,
        });
    }
    Ok(out)
}

/// Runs every grid point (in parallel) and returns the records in grid
/// order: `N`, then `eta_ind`, then Haar seed, then `N_cut`.
///
/// `runtime_ms` is NaN unless `timing` is set.
pub fn run_sweep(grid: &SweepGrid, timing: bool) -> CliResult<Vec<FidelityRecord>> {
    grid.validate()?;
    let mut points = Vec::new();
    for &n in &grid.photons {
        for &eta in &grid.eta_ind {
            for &seed in &grid.haar_seeds {
                points.push((n, eta, seed));
            }
        }
    }
    let per_point = points
        .par_iter()
        .map(|&(n, eta, seed)| {
            log::debug!("sweep point N={n} eta_ind={eta} haar_seed={seed}");
            run_point(grid, n, eta, seed, timing)
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(per_point.into_iter().flatten().collect())
}

/// Writes records as CSV; an unmeasured runtime is left empty.
pub fn write_csv(out: impl Write, records: &[FidelityRecord]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            fmt_f64(r.eta_ind),
            r.n_cut.to_string(),
            fmt_f64(r.epsilon),
            r.pattern.to_string(),
            fmt_f64(r.fidelity),
            r.haar_seed.to_string(),
            if r.runtime_ms.is_nan() { String::new() } else { fmt_f64(r.runtime_ms) },
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Mean and sample standard deviation of `F` over Haar seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanFidelity {
    pub photons: u32,
    pub eta_ind: f64,
    pub n_cut: u32,
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

/// Fits of mean `F` against `eta_ind` at fixed `(N, N_cut)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaFits {
    pub photons: u32,
    pub n_cut: u32,
    pub exp_eta: ExpEtaFit,
    pub linear: Option<LinearFit>,
}

/// Fits of mean `F` against `N` at fixed `(eta_ind, N_cut)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonFits {
    pub eta_ind: f64,
    pub n_cut: u32,
    pub linear: LinearFit,
    pub exp_decay: ExpDecayFit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub means: Vec<MeanFidelity>,
    pub eta_fits: Vec<EtaFits>,
    pub photon_fits: Vec<PhotonFits>,
}

/// Averages over seeds and fits the trends in `eta_ind` and in `N`.
pub fn summarize(records: &[FidelityRecord]) -> CliResult<SweepSummary> {
    let mut means: Vec<MeanFidelity> = Vec::new();
    let mut values: Vec<Vec<f64>> = Vec::new();
    for r in records {
        let key = (r.pattern.total(), r.eta_ind, r.n_cut);
        match means.iter().position(|m| (m.photons, m.eta_ind, m.n_cut) == key) {
            Some(i) => values[i].push(r.fidelity),
            None => {
                means.push(MeanFidelity {
                    photons: key.0,
                    eta_ind: key.1,
                    n_cut: key.2,
                    mean: 0.0,
                    std: 0.0,
                    count: 0,
                });
                values.push(vec![r.fidelity]);
            }
        }
    }
    for (m, v) in means.iter_mut().zip(&values) {
        let n = v.len() as f64;
        m.mean = v.iter().sum::<f64>() / n;
        m.std = if v.len() > 1 {
            (v.iter().map(|x| (x - m.mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        m.count = v.len();
    }

    let mut eta_fits = Vec::new();
    let mut keys: Vec<(u32, u32)> = means.iter().map(|m| (m.photons, m.n_cut)).collect();
    keys.dedup();
    keys.sort_unstable();
    keys.dedup();
    for (photons, n_cut) in keys {
        let pts: Vec<(f64, f64)> = means
            .iter()
            .filter(|m| m.photons == photons && m.n_cut == n_cut)
            .map(|m| (m.eta_ind, m.mean))
            .collect();
        eta_fits.push(EtaFits {
            photons,
            n_cut,
            exp_eta: fit_exp_eta(&pts)?,
            linear: fit_linear(&pts).ok(),
        });
    }

    let mut photon_fits = Vec::new();
    let mut keys: Vec<(f64, u32)> = Vec::new();
    for m in &means {
        if !keys.contains(&(m.eta_ind, m.n_cut)) {
            keys.push((m.eta_ind, m.n_cut));
        }
    }
    for (eta_ind, n_cut) in keys {
        let pts: Vec<(f64, f64)> = means
            .iter()
            .filter(|m| m.eta_ind == eta_ind && m.n_cut == n_cut)
            .map(|m| (m.photons as f64, m.mean))
            .collect();
        if let (Ok(linear), Ok(exp_decay)) = (fit_linear(&pts), fit_exp_decay(&pts, DECAY_RATE_BOUND)) {
            photon_fits.push(PhotonFits {
                eta_ind,
                n_cut,
                linear,
                exp_decay,
            });
        }
    }
    Ok(SweepSummary {
        means,
        eta_fits,
        photon_fits,
    })
}

impl SweepSummary {
    /// Plain-text report: three CSV tables, each preceded by a `#` title.
    pub fn write_report(&self, mut out: impl Write) -> CliResult<()> {
        writeln!(out, "# mean fidelity over Haar seeds")?;
        writeln!(out, "N,eta_ind,N_cut,mean_F,std_F,seeds")?;
        for m in &self.means {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                m.photons,
                fmt_f64(m.eta_ind),
                m.n_cut,
                fmt_f64(m.mean),
                fmt_f64(m.std),
                m.count
            )?;
        }
        writeln!(out, "# fit F = 1 - c exp(eta_ind) and F = a + b eta_ind per (N, N_cut)")?;
        writeln!(out, "N,N_cut,c,ssr_exp,ssr_linear")?;
        for f in &self.eta_fits {
            let lin = f.linear.map(|l| fmt_f64(l.ssr)).unwrap_or_default();
            writeln!(out, "{},{},{},{},{}", f.photons, f.n_cut, fmt_f64(f.exp_eta.c), fmt_f64(f.exp_eta.ssr), lin)?;
        }
        writeln!(out, "# fit F = a + b N and F = a exp(-k N) per (eta_ind, N_cut)")?;
        writeln!(out, "eta_ind,N_cut,linear_slope,ssr_linear,exp_rate,ssr_exp")?;
        for f in &self.photon_fits {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                fmt_f64(f.eta_ind),
                f.n_cut,
                fmt_f64(f.linear.slope),
                fmt_f64(f.linear.ssr),
                fmt_f64(f.exp_decay.rate),
                fmt_f64(f.exp_decay.ssr)
            )?;
        }
        Ok(())
    }
}
