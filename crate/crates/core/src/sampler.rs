//! Sampling the combined distinguishable-photon output.
//!
//! Each virtual mode independently emits `N` photons drawn from its truncated
//! photon-number distribution, and each photon lands on output port `j` with
//! probability `|T_{j,m}|^2`. Sample streams are split into fixed-size blocks,
//! each driven by its own ChaCha stream, so results depend only on the seed
//! and the sample count.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::weighted::WeightedAliasIndex;

use crate::model::GbsModel;
use crate::pattern::OutputPattern;
use crate::pnr::DistinguishableSource;
use crate::{Error, Result};

/// Samples per RNG block.
pub const BLOCK_SIZE: u64 = 1 << 16;

/// Tail mass tolerated by [`Truncation::Auto`].
pub const AUTO_TAIL: f64 = 1e-6;

/// Truncation of the per-mode photon-number range.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Truncation {
    /// `N_t = max(1, ceil(t * mean))` for factor `t`.
    Factor(f64),
    /// Smallest `N_t >= max(1, ceil(10 * mean))` whose tail mass is below
    /// [`AUTO_TAIL`].
    #[default]
    Auto,
}

impl Truncation {
    /// Truncation point `N_t` for `model`.
    pub fn cutoff(&self, model: &GbsModel) -> Result<u32> {
        let mean = model.coefficients().alpha_d;
        let floor = |t: f64| -> Result<u32> {
            let v = libm::ceil(mean * t);
            if !(v.is_finite() && v < 1e6) {
                return Err(Error::InvalidArgument(alloc::format!(
                    "truncation {t} x {mean} is not a usable photon number"
                )));
            }
            Ok((v as u32).max(1))
        };
        match *self {
            Truncation::Factor(t) => {
                if !(t > 0.0 && t.is_finite()) {
                    return Err(Error::InvalidArgument(alloc::format!(
                        "truncation factor {t} must be positive"
                    )));
                }
                floor(t)
            }
            Truncation::Auto => {
                let mut n = floor(10.0)?;
                let mut cum: f64 = (0..=n).map(|k| model.virtual_number_prob(k)).sum();
                while 1.0 - cum >= AUTO_TAIL {
                    n += 1;
                    cum += model.virtual_number_prob(n);
                    if n > 100_000 {
                        return Err(Error::Numerical("photon-number tail does not converge".into()));
                    }
                }
                Ok(n)
            }
        }
    }
}

/// Photon-number distribution of one virtual mode, renormalized over
/// `0..=N_t`. Also returns the discarded tail mass.
pub fn photon_number_pmf(model: &GbsModel, truncation: Truncation) -> Result<(Vec<f64>, f64)> {
    let n_t = truncation.cutoff(model)?;
    let raw: Vec<f64> = (0..=n_t).map(|n| model.virtual_number_prob(n)).collect();
    let kept: f64 = raw.iter().sum();
    Ok((raw.iter().map(|p| p / kept).collect(), (1.0 - kept).max(0.0)))
}

/// Algorithm for drawing distinguishable-photon patterns from one model.
#[derive(Debug, Clone)]
pub struct VirtualSampler {
    ports: usize,
    cutoff: u32,
    tail: f64,
    pmf: Vec<f64>,
    number: Option<WeightedAliasIndex<f64>>,
    port_tables: Vec<WeightedAliasIndex<f64>>,
    fingerprint: u64,
    truncation: Truncation,
}

impl VirtualSampler {
    pub fn new(model: &GbsModel, truncation: Truncation) -> Result<Self> {
        let cutoff = truncation.cutoff(model)?;
        let (pmf, tail) = photon_number_pmf(model, truncation)?;
        let alias_err = |e: rand_distr::weighted::Error| Error::Numerical(alloc::format!("alias table: {e}"));
        // a point mass at zero needs no table
        let number = if pmf[0] == 1.0 {
            None
        } else {
            Some(WeightedAliasIndex::new(pmf.clone()).map_err(alias_err)?)
        };
        let port_tables = (1..=model.inputs())
            .map(|m| WeightedAliasIndex::new(model.virtual_weights(m).to_vec()).map_err(alias_err))
            .collect::<Result<Vec<_>>>()?;
        Ok(VirtualSampler {
            ports: model.ports(),
            cutoff,
            tail,
            pmf,
            number,
            port_tables,
            fingerprint: model.fingerprint(),
            truncation,
        })
    }

    /// The truncation point `N_t`.
    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    /// Mass discarded by the truncation, per virtual mode.
    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn ports(&self) -> usize {
        self.ports
    }

    /// Adds one sample to `counts` and returns its photon number.
    pub fn sample_into<R: rand::Rng + ?Sized>(&self, rng: &mut R, counts: &mut [u32]) -> u32 {
        let Some(number) = &self.number else {
            return 0;
        };
        let mut total = 0;
        for table in &self.port_tables {
            let n = number.sample(rng) as u32;
            for _ in 0..n {
                counts[table.sample(rng)] += 1;
            }
            total += n;
        }
        total
    }

    /// One sampled pattern.
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> OutputPattern {
        let mut counts = vec![0u32; self.ports];
        self.sample_into(rng, &mut counts);
        OutputPattern::new(counts)
    }

    /// RNG driving block `block` of the stream seeded by `seed`.
    pub fn block_rng(seed: u64, block: u64) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(block + 1);
        rng
    }

    /// Number of blocks covering `n_samples`.
    pub fn block_count(n_samples: u64) -> u64 {
        n_samples.div_ceil(BLOCK_SIZE)
    }

    /// Runs block `block` of an `n_samples` stream, calling `visit` with each
    /// sampled pattern in order.
    pub fn run_block(&self, seed: u64, n_samples: u64, block: u64, mut visit: impl FnMut(&[u32])) {
        let start = block * BLOCK_SIZE;
        let len = BLOCK_SIZE.min(n_samples.saturating_sub(start));
        let mut rng = Self::block_rng(seed, block);
        let mut counts = vec![0u32; self.ports];
        for _ in 0..len {
            counts.iter_mut().for_each(|c| *c = 0);
            self.sample_into(&mut rng, &mut counts);
            visit(&counts);
        }
    }

    /// Counts of one block, restricted to sub-patterns of `restrict` when given.
    pub fn count_block(
        &self,
        seed: u64,
        n_samples: u64,
        block: u64,
        restrict: Option<&OutputPattern>,
    ) -> SampleCounts {
        let mut acc = SampleCounts::new(self.ports);
        self.run_block(seed, n_samples, block, |c| acc.record(c, restrict));
        acc
    }

    /// Empty distribution tagged with this sampler's provenance.
    pub fn empty_distribution(
        &self,
        epsilon: f64,
        seed: u64,
        restrict: Option<&OutputPattern>,
    ) -> EmpiricalDistribution {
        EmpiricalDistribution {
            counts: SampleCounts::new(self.ports),
            epsilon,
            seed,
            fingerprint: self.fingerprint,
            truncation: self.truncation,
            restriction: restrict.cloned(),
        }
    }
}

/// Raw occurrence counts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SampleCounts {
    table: BTreeMap<OutputPattern, u64>,
    excluded: u64,
    samples: u64,
    photons: u64,
    port_photons: Vec<u64>,
}

impl SampleCounts {
    pub fn new(ports: usize) -> Self {
        SampleCounts {
            port_photons: vec![0; ports],
            ..Default::default()
        }
    }

    /// Records one sample; samples outside `restrict` only count as excluded.
    pub fn record(&mut self, counts: &[u32], restrict: Option<&OutputPattern>) {
        self.samples += 1;
        for (acc, &c) in self.port_photons.iter_mut().zip(counts) {
            *acc += c as u64;
            self.photons += c as u64;
        }
        if let Some(r) = restrict {
            if counts.iter().zip(r.counts()).any(|(&c, &m)| c > m) {
                self.excluded += 1;
                return;
            }
        }
        if let Some(v) = self.table.get_mut(counts) {
            *v += 1;
        } else {
            self.table.insert(OutputPattern::new(counts.to_vec()), 1);
        }
    }

    /// Adds the counts of `other`.
    pub fn merge(&mut self, other: &SampleCounts) {
        for (k, v) in &other.table {
            *self.table.entry(k.clone()).or_insert(0) += v;
        }
        self.excluded += other.excluded;
        self.samples += other.samples;
        self.photons += other.photons;
        for (a, b) in self.port_photons.iter_mut().zip(&other.port_photons) {
            *a += b;
        }
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn excluded(&self) -> u64 {
        self.excluded
    }

    /// Total photons over all samples.
    pub fn photons(&self) -> u64 {
        self.photons
    }

    /// Total photons per output port over all samples.
    pub fn port_photons(&self) -> &[u64] {
        &self.port_photons
    }

    pub fn table(&self) -> &BTreeMap<OutputPattern, u64> {
        &self.table
    }
}

/// Frequency table `P_sim` of sampled distinguishable patterns.
///
/// When built with a restriction `s`, only sub-patterns of `s` are tabulated;
/// every other sample is counted in [`Self::excluded`].
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    counts: SampleCounts,
    epsilon: f64,
    seed: u64,
    fingerprint: u64,
    truncation: Truncation,
    restriction: Option<OutputPattern>,
}

impl EmpiricalDistribution {
    /// Adds counts (e.g. of one block).
    pub fn absorb(&mut self, counts: &SampleCounts) {
        self.counts.merge(counts);
    }

    pub fn counts(&self) -> &SampleCounts {
        &self.counts
    }

    pub fn n_samples(&self) -> u64 {
        self.counts.samples
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    pub fn restriction(&self) -> Option<&OutputPattern> {
        self.restriction.as_ref()
    }

    /// Fingerprint of the model that produced the samples.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// Number of samples outside the restriction.
    pub fn excluded(&self) -> u64 {
        self.counts.excluded
    }

    /// Empirical probability of `pattern`, zero when never seen.
    ///
    /// Fails for patterns outside the restriction, whose counts were not kept.
    pub fn prob(&self, pattern: &OutputPattern) -> Result<f64> {
        if let Some(r) = &self.restriction {
            if pattern.ports() != r.ports() || !pattern.dominated_by(r) {
                return Err(Error::InvalidArgument(alloc::format!(
                    "pattern {pattern} lies outside the tabulated restriction {r}"
                )));
            }
        }
        if self.counts.samples == 0 {
            return Ok(0.0);
        }
        Ok(self.counts.table.get(pattern).copied().unwrap_or(0) as f64 / self.counts.samples as f64)
    }

    /// `(pattern, probability)` pairs in pattern order.
    pub fn iter(&self) -> impl Iterator<Item = (&OutputPattern, f64)> + '_ {
        let n = self.counts.samples as f64;
        self.counts.table.iter().map(move |(k, &v)| (k, v as f64 / n))
    }

    /// Mean photons emitted per virtual mode.
    pub fn mean_photons_per_mode(&self, inputs: usize) -> f64 {
        self.counts.photons as f64 / (self.counts.samples as f64 * inputs as f64)
    }

    /// Fails unless the samples were drawn from `model`.
    pub fn check_model(&self, model: &GbsModel) -> Result<()> {
        if self.fingerprint != model.fingerprint() {
            return Err(Error::ModelMismatch);
        }
        Ok(())
    }
}

impl DistinguishableSource for EmpiricalDistribution {
    fn p_dis(&self, pattern: &OutputPattern) -> f64 {
        self.prob(pattern).expect("empirical lookup outside the restriction")
    }
}

/// Number of samples for accuracy `epsilon`, `ceil(1 / epsilon)`.
pub fn samples_for_epsilon(epsilon: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(alloc::format!("epsilon = {epsilon} must be positive")));
    }
    let n = libm::ceil(1.0 / epsilon);
    if n > 1e15 {
        return Err(Error::GuardExceeded {
            what: "sample count",
            size: n as u128,
            limit: 1_000_000_000_000_000,
        });
    }
    Ok(n as u64)
}

/// Builds `P_sim` serially from `n_samples` samples (default `ceil(1/eps)`).
pub fn estimate_p_sim(
    model: &GbsModel,
    truncation: Truncation,
    epsilon: f64,
    seed: u64,
    n_samples: Option<u64>,
    restrict: Option<&OutputPattern>,
) -> Result<EmpiricalDistribution> {
    let n = match n_samples {
        Some(n) => n,
        None => samples_for_epsilon(epsilon)?,
    };
    if let Some(r) = restrict {
        r.check_ports(model.ports())?;
    }
    let sampler = VirtualSampler::new(model, truncation)?;
    let mut dist = sampler.empty_distribution(epsilon, seed, restrict);
    for b in 0..VirtualSampler::block_count(n) {
        dist.absorb(&sampler.count_block(seed, n, b, restrict));
    }
    Ok(dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{haar_random_unitary, ExperimentConfig};

    fn model(k: usize, m: usize, r: f64, eta_t: f64, eta_ind: f64, seed: u64) -> GbsModel {
        let cfg = ExperimentConfig::new(k, m, r, eta_t, eta_ind).unwrap();
        GbsModel::new(cfg, haar_random_unitary(k, seed).unwrap()).unwrap()
    }

    #[test]
    fn pmf_limits() {
        let vac = model(2, 1, 0.0, 0.9, 0.5, 1);
        let (pmf, tail) = photon_number_pmf(&vac, Truncation::Factor(10.0)).unwrap();
        assert_eq!(pmf, alloc::vec![1.0, 0.0]);
        assert_eq!(tail, 0.0);
        let md = model(2, 1, 0.9, 0.9, 0.5, 1);
        let c = md.coefficients();
        let p0 = 1.0 / ((1.0 + c.alpha_d).powi(2) - c.beta_d.powi(2)).sqrt();
        assert!((md.virtual_number_prob(0) - p0).abs() < 1e-15);
        let (pmf, tail) = photon_number_pmf(&md, Truncation::Factor(200.0)).unwrap();
        assert!(tail < 1e-14);
        let mean: f64 = pmf.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
        assert!((mean - c.alpha_d).abs() < 1e-6);
        assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cutoffs() {
        // alpha_d ~ 0.095 at eta_ind = 0.9, so t = 10 keeps one photon
        let md = model(2, 1, 0.9, 0.9, 0.9, 1);
        assert_eq!(Truncation::Factor(10.0).cutoff(&md).unwrap(), 1);
        let auto = Truncation::Auto.cutoff(&md).unwrap();
        let (_, tail) = photon_number_pmf(&md, Truncation::Auto).unwrap();
        assert!(tail < AUTO_TAIL);
        assert!(auto > 1);
        let (_, tail1) = photon_number_pmf(&md, Truncation::Factor(10.0)).unwrap();
        assert!(tail1 > 1e-3);
        assert!(Truncation::Factor(0.0).cutoff(&md).is_err());
        let vac = model(2, 1, 0.0, 0.9, 0.9, 1);
        assert_eq!(Truncation::Auto.cutoff(&vac).unwrap(), 1);
    }

    #[test]
    fn ideal_inputs_never_emit_distinguishable_photons() {
        let md = model(3, 2, 0.9, 0.9, 1.0, 2);
        let d = estimate_p_sim(&md, Truncation::Auto, 1e-3, 5, None, None).unwrap();
        assert_eq!(d.n_samples(), 1000);
        assert_eq!(d.prob(&OutputPattern::zeros(3)).unwrap(), 1.0);
        assert_eq!(d.counts().table().len(), 1);
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let md = model(4, 2, 0.9, 0.9, 0.3, 3);
        let s = VirtualSampler::new(&md, Truncation::Auto).unwrap();
        let draw = |seed| {
            let mut rng = VirtualSampler::block_rng(seed, 0);
            (0..50).map(|_| s.sample(&mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
        assert_ne!(draw(9), draw(10));
        let a = estimate_p_sim(&md, Truncation::Auto, 1e-5, 4, Some(150_000), None).unwrap();
        let b = estimate_p_sim(&md, Truncation::Auto, 1e-5, 4, Some(150_000), None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn samples_respect_truncation_and_table_is_normalized() {
        let md = model(3, 2, 0.9, 0.9, 0.2, 4);
        let d = estimate_p_sim(&md, Truncation::Factor(2.0), 1e-4, 1, None, None).unwrap();
        let n_t = Truncation::Factor(2.0).cutoff(&md).unwrap();
        let total: f64 = d.iter().map(|(p, v)| {
            assert!(p.total() <= 2 * n_t);
            v
        }).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn restricted_table_keeps_subpatterns_only() {
        let md = model(3, 2, 0.9, 0.9, 0.2, 4);
        let target = OutputPattern::new(alloc::vec![1, 1, 0]);
        let full = estimate_p_sim(&md, Truncation::Auto, 1e-4, 8, None, None).unwrap();
        let part = estimate_p_sim(&md, Truncation::Auto, 1e-4, 8, None, Some(&target)).unwrap();
        for t in [[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]] {
            let t = OutputPattern::new(t.to_vec());
            assert_eq!(full.prob(&t).unwrap(), part.prob(&t).unwrap());
        }
        let kept: u64 = part.counts().table().values().sum();
        assert_eq!(kept + part.excluded(), part.n_samples());
        assert!(part.prob(&OutputPattern::new(alloc::vec![0, 0, 1])).is_err());
    }

    #[test]
    fn mean_photons_per_mode_is_alpha_d() {
        let md = model(3, 2, 0.9, 0.9, 0.4, 5);
        let d = estimate_p_sim(&md, Truncation::Auto, 1e-6, 12, None, None).unwrap();
        let (pmf, _) = photon_number_pmf(&md, Truncation::Auto).unwrap();
        let mean: f64 = pmf.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
        let var: f64 = pmf.iter().enumerate().map(|(n, p)| (n as f64 - mean).powi(2) * p).sum();
        let se = (var / (2.0 * d.n_samples() as f64)).sqrt();
        let got = d.mean_photons_per_mode(2);
        assert!((got - md.coefficients().alpha_d).abs() < 3.0 * se + 1e-6, "{got} vs {mean} (se {se})");
    }

    #[test]
    fn matches_exact_distinguishable_distribution() {
        let md = model(3, 2, 0.8, 0.9, 0.5, 6);
        let d = estimate_p_sim(&md, Truncation::Auto, 1e-6, 3, None, None).unwrap();
        let mut tv = 0.0;
        let mut covered = 0.0;
        for n in 0..=6 {
            for c in crate::pattern::compositions(n, 3) {
                let p = OutputPattern::new(c);
                let exact = md.prob_dist_exact(&p).unwrap();
                covered += exact;
                tv += (exact - d.prob(&p).unwrap()).abs();
            }
        }
        tv = 0.5 * (tv + (1.0 - covered));
        assert!(tv < 0.005, "tv = {tv}");
        let s = OutputPattern::new(alloc::vec![1, 1, 0]);
        let exact = md.prob_dist_exact(&s).unwrap();
        let se = (exact * (1.0 - exact) / d.n_samples() as f64).sqrt();
        assert!((d.prob(&s).unwrap() - exact).abs() < 3.0 * se);
    }

    #[test]
    fn model_mismatch_is_detected() {
        let a = model(3, 2, 0.8, 0.9, 0.5, 6);
        let b = model(3, 2, 0.8, 0.9, 0.5, 7);
        let d = estimate_p_sim(&a, Truncation::Auto, 1e-2, 3, None, None).unwrap();
        assert!(d.check_model(&a).is_ok());
        assert_eq!(d.check_model(&b), Err(Error::ModelMismatch));
    }

    #[test]
    fn epsilon_sets_sample_count() {
        assert_eq!(samples_for_epsilon(1.0 / 1024.0).unwrap(), 1024);
        assert_eq!(samples_for_epsilon(0.3).unwrap(), 4);
        assert!(samples_for_epsilon(0.0).is_err());
    }
}
