//! Rayon drivers for the core computations.
//!
//! Work is split into pieces fixed by the problem size alone (sampler
//! blocks, Gray-code chunks, sub-patterns), and partial results are combined
//! in piece order, so every result is bit-identical for any thread count.

use gbs_core::approx::IndistinguishableTerms;
use gbs_core::pnr::DEFAULT_SUBPATTERN_GUARD;
use gbs_core::sampler::{samples_for_epsilon, SampleCounts, VirtualSampler};
use gbs_core::subset::chunks;
use gbs_core::{ClickPattern, DistinguishableSource, EmpiricalDistribution, GbsModel, OutputPattern, Truncation};
use rayon::prelude::*;

use crate::{CliError, CliResult};

/// Runs `f` on a pool of `threads` workers (all cores when `None` or 0).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Failed(format!("cannot start thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Parallel counterpart of [`gbs_core::sampler::estimate_p_sim`]; returns an
/// identical distribution.
pub fn estimate_p_sim_par(
    model: &GbsModel,
    truncation: Truncation,
    epsilon: f64,
    seed: u64,
    n_samples: Option<u64>,
    restrict: Option<&OutputPattern>,
) -> CliResult<EmpiricalDistribution> {
    let n = match n_samples {
        Some(n) => n,
        None => samples_for_epsilon(epsilon)?,
    };
    if let Some(r) = restrict {
        if r.ports() != model.ports() {
            return Err(gbs_core::Error::DimensionMismatch {
                expected: model.ports(),
                found: r.ports(),
            }
            .into());
        }
    }
    let sampler = VirtualSampler::new(model, truncation)?;
    let parts: Vec<SampleCounts> = (0..VirtualSampler::block_count(n))
        .into_par_iter()
        .map(|b| sampler.count_block(seed, n, b, restrict))
        .collect();
    let mut dist = sampler.empty_distribution(epsilon, seed, restrict);
    for p in &parts {
        dist.absorb(p);
    }
    Ok(dist)
}

/// Threshold probability with Gray-code chunks evaluated in parallel.
pub fn prob_threshold_par(model: &GbsModel, clicked: &ClickPattern) -> CliResult<f64> {
    if clicked.ports().iter().any(|&p| p >= model.ports()) {
        return Err(CliError::Config(format!("clicked port outside the {} ports", model.ports())));
    }
    let parts = chunks(clicked.len())
        .into_par_iter()
        .map(|r| model.threshold_chunk(clicked, r))
        .collect::<Result<Vec<f64>, _>>()?;
    Ok(parts.iter().sum())
}

/// Indistinguishable-mode terms of all sub-patterns with at most `max_order`
/// photons, evaluated in parallel.
pub fn indistinguishable_terms_par(
    model: &GbsModel,
    target: &OutputPattern,
    max_order: u32,
) -> CliResult<IndistinguishableTerms> {
    let groups = model
        .subpatterns_by_order(target)?
        .into_iter()
        .take(max_order as usize + 1)
        .map(|g| {
            g.into_par_iter()
                .map(|s0| model.prob_indistinguishable(&s0).map(|p| (s0, p)))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(IndistinguishableTerms::from_groups(target.clone(), groups)?)
}

/// Exact `P(s)`, equal to [`GbsModel::prob_total_exact`] bit for bit.
pub fn prob_total_exact_par(model: &GbsModel, s: &OutputPattern) -> CliResult<f64> {
    if s.ports() != model.ports() {
        return Err(CliError::Config(format!(
            "pattern has {} entries, the experiment has {} ports",
            s.ports(),
            model.ports()
        )));
    }
    let table = model.dist_table(s, DEFAULT_SUBPATTERN_GUARD)?;
    let mut total = 0.0;
    for group in model.subpatterns_by_order(s)? {
        let values = group
            .par_iter()
            .map(|s0| {
                let rest = s.checked_sub(s0).expect("sub-pattern");
                let pd = table.p_dis(&rest);
                if pd == 0.0 {
                    Ok(None)
                } else {
                    model.prob_indistinguishable(s0).map(|p| Some(p * pd))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        for v in values.into_iter().flatten() {
            total += v;
        }
    }
    Ok(total)
}
