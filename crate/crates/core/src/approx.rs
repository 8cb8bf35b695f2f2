//! Truncated approximation of PNR probabilities and its fidelity.
//!
//! Grouping the exact sum by the number `n` of indistinguishable photons gives
//! `P(s) = sum_n P_n(s)`. Keeping only `n <= N_cut` avoids every Hafnian
//! larger than `2 N_cut`.

use alloc::vec::Vec;

use crate::model::GbsModel;
use crate::pattern::OutputPattern;
use crate::pnr::DistinguishableSource;
use crate::sampler::EmpiricalDistribution;
use crate::{Error, Result};

/// Indistinguishable-mode probabilities `P0(s0)` of the sub-patterns of a
/// target, grouped by photon number.
#[derive(Debug, Clone, PartialEq)]
pub struct IndistinguishableTerms {
    target: OutputPattern,
    groups: Vec<Vec<(OutputPattern, f64)>>,
}

impl IndistinguishableTerms {
    /// Evaluates every sub-pattern with at most `max_order` photons.
    pub fn compute(model: &GbsModel, target: &OutputPattern, max_order: u32) -> Result<Self> {
        let groups = model
            .subpatterns_by_order(target)?
            .into_iter()
            .take(max_order as usize + 1)
            .map(|g| {
                g.into_iter()
                    .map(|s0| model.prob_indistinguishable(&s0).map(|p| (s0, p)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(IndistinguishableTerms {
            target: target.clone(),
            groups,
        })
    }

    /// Wraps precomputed groups; `groups[n]` must hold the sub-patterns with
    /// `n` photons.
    pub fn from_groups(target: OutputPattern, groups: Vec<Vec<(OutputPattern, f64)>>) -> Result<Self> {
        for (n, g) in groups.iter().enumerate() {
            if g.iter().any(|(s0, _)| s0.total() as usize != n || !s0.dominated_by(&target)) {
                return Err(Error::InvalidArgument(alloc::format!(
                    "group {n} holds a pattern that is not an {n}-photon sub-pattern of {target}"
                )));
            }
        }
        Ok(IndistinguishableTerms { target, groups })
    }

    pub fn target(&self) -> &OutputPattern {
        &self.target
    }

    /// Largest photon number evaluated.
    pub fn max_order(&self) -> u32 {
        self.groups.len() as u32 - 1
    }

    /// `P_n(s) = sum_{s0: |s0| = n} P0(s0) P_dis(s - s0)` for `n = 0..=max_order`.
    pub fn order_terms(&self, source: &dyn DistinguishableSource) -> Vec<f64> {
        self.groups
            .iter()
            .map(|g| {
                g.iter()
                    .map(|(s0, p0)| {
                        if *p0 == 0.0 {
                            return 0.0;
                        }
                        let rest = self.target.checked_sub(s0).expect("sub-pattern");
                        p0 * source.p_dis(&rest)
                    })
                    .sum()
            })
            .collect()
    }
}

/// `P_approx(s, N_cut) = sum_{n <= N_cut} P_n(s)` with `P_dis` taken from
/// `source`.
pub fn p_approx(
    model: &GbsModel,
    s: &OutputPattern,
    n_cut: u32,
    source: &dyn DistinguishableSource,
) -> Result<f64> {
    if n_cut > s.total() {
        return Err(Error::InvalidArgument(alloc::format!(
            "N_cut = {n_cut} exceeds N = {}",
            s.total()
        )));
    }
    let terms = IndistinguishableTerms::compute(model, s, n_cut)?;
    Ok(terms.order_terms(source).iter().sum())
}

/// One fidelity evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityRecord {
    pub eta_ind: f64,
    pub n_cut: u32,
    pub epsilon: f64,
    pub pattern: OutputPattern,
    pub fidelity: f64,
    pub haar_seed: u64,
    /// Wall-clock time of the `P_approx` evaluation; zero when not measured.
    pub runtime_ms: f64,
}

/// `F = sum_{n <= N_cut} P_n / sum_n P_n` from the full list of order terms.
pub fn fidelity_from_terms(order_terms: &[f64], n_cut: u32) -> Result<f64> {
    let total: f64 = order_terms.iter().sum();
    if !(total > 0.0) {
        return Err(Error::UndefinedFidelity);
    }
    let kept: f64 = order_terms.iter().take(n_cut as usize + 1).sum();
    Ok(kept / total)
}

/// Fidelity of `P_approx(N_cut)` against the complete sum, both built on the
/// same empirical `P_sim`.
pub fn fidelity(
    model: &GbsModel,
    s: &OutputPattern,
    n_cut: u32,
    p_sim: &EmpiricalDistribution,
    haar_seed: u64,
) -> Result<FidelityRecord> {
    p_sim.check_model(model)?;
    if n_cut > s.total() {
        return Err(Error::InvalidArgument(alloc::format!(
            "N_cut = {n_cut} exceeds N = {}",
            s.total()
        )));
    }
    let terms = IndistinguishableTerms::compute(model, s, s.total())?;
    let f = fidelity_from_terms(&terms.order_terms(p_sim), n_cut)?;
    Ok(FidelityRecord {
        eta_ind: model.config().eta_ind,
        n_cut,
        epsilon: p_sim.epsilon(),
        pattern: s.clone(),
        fidelity: f,
        haar_seed,
        runtime_ms: 0.0,
    })
}

/// Fidelity with the exact distinguishable probabilities in both numerator
/// and denominator.
pub fn fidelity_exact(model: &GbsModel, s: &OutputPattern, n_cut: u32) -> Result<f64> {
    let table = model.dist_table(s, crate::pnr::DEFAULT_SUBPATTERN_GUARD)?;
    let terms = IndistinguishableTerms::compute(model, s, s.total())?;
    fidelity_from_terms(&terms.order_terms(&table), n_cut)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{estimate_p_sim, Truncation};
    use crate::{haar_random_unitary, ExperimentConfig};

    fn model(k: usize, m: usize, r: f64, eta_t: f64, eta_ind: f64, seed: u64) -> GbsModel {
        let cfg = ExperimentConfig::new(k, m, r, eta_t, eta_ind).unwrap();
        GbsModel::new(cfg, haar_random_unitary(k, seed).unwrap()).unwrap()
    }

    #[test]
    fn full_order_with_exact_source_is_exact() {
        let md = model(4, 3, 0.8, 0.9, 0.6, 1);
        let s = OutputPattern::new(alloc::vec![1, 2, 0, 1]);
        let table = md.dist_table(&s, 1000).unwrap();
        let approx = p_approx(&md, &s, 4, &table).unwrap();
        let exact = md.prob_total_exact(&s).unwrap();
        assert!((approx - exact).abs() < 1e-15 * exact.max(1e-300) * 10.0);
        assert_eq!(fidelity_exact(&md, &s, 4).unwrap(), 1.0);
    }

    #[test]
    fn zero_order_is_vacuum_times_p_dis() {
        let md = model(3, 2, 0.8, 0.9, 0.6, 2);
        let s = OutputPattern::new(alloc::vec![1, 1, 0]);
        let d = estimate_p_sim(&md, Truncation::Auto, 1e-4, 1, None, None).unwrap();
        let a = p_approx(&md, &s, 0, &d).unwrap();
        let b = md.prob_indistinguishable(&OutputPattern::zeros(3)).unwrap() * d.prob(&s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn approximation_is_monotone_in_cutoff() {
        let md = model(4, 3, 0.9, 0.9, 0.5, 3);
        let s = OutputPattern::leading_ones(4, 4).unwrap();
        let d = estimate_p_sim(&md, Truncation::Auto, 1e-5, 4, None, Some(&s)).unwrap();
        let mut prev = 0.0;
        for n_cut in 0..=4 {
            let f = fidelity(&md, &s, n_cut, &d, 0).unwrap().fidelity;
            assert!(f >= prev && f <= 1.0 + 1e-12);
            prev = f;
        }
        assert!((prev - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mostly_distinguishable_light_needs_no_interference() {
        let md = model(4, 2, 0.8, 0.9, 1e-4, 5);
        let s = OutputPattern::new(alloc::vec![1, 0, 1, 0]);
        assert!(fidelity_exact(&md, &s, 0).unwrap() > 0.999);
    }

    #[test]
    fn ideal_light_keeps_only_the_top_order() {
        let md = model(4, 2, 0.8, 0.9, 1.0, 6);
        let s = OutputPattern::leading_ones(4, 3).unwrap();
        let terms = IndistinguishableTerms::compute(&md, &s, 3).unwrap();
        let table = md.dist_table(&s, 100).unwrap();
        let p = terms.order_terms(&table);
        assert!(p[..3].iter().all(|&x| x == 0.0));
        assert!(p[3] > 0.0);
        assert_eq!(fidelity_exact(&md, &s, 2).unwrap(), 0.0);
    }

    #[test]
    fn order_terms_decay_for_low_indistinguishability() {
        let md = model(6, 3, 0.9, 0.9, 0.2, 7);
        let s = OutputPattern::leading_ones(6, 5).unwrap();
        let table = md.dist_table(&s, 1000).unwrap();
        let p = IndistinguishableTerms::compute(&md, &s, 5).unwrap().order_terms(&table);
        for w in p.windows(2) {
            assert!(w[1] < w[0], "{p:?}");
        }
    }

    #[test]
    fn errors() {
        let md = model(3, 2, 0.8, 0.9, 0.6, 8);
        let other = model(3, 2, 0.8, 0.9, 0.6, 9);
        let s = OutputPattern::new(alloc::vec![1, 1, 0]);
        let d = estimate_p_sim(&other, Truncation::Auto, 1e-2, 1, None, None).unwrap();
        assert_eq!(fidelity(&md, &s, 1, &d, 0), Err(Error::ModelMismatch));
        let table = md.dist_table(&s, 100).unwrap();
        assert!(p_approx(&md, &s, 3, &table).is_err());
        let vac = model(3, 2, 0.0, 0.9, 0.6, 8);
        assert_eq!(fidelity_exact(&vac, &s, 1), Err(Error::UndefinedFidelity));
        assert_eq!(fidelity_from_terms(&[0.0, 0.0], 1), Err(Error::UndefinedFidelity));
    }
}
