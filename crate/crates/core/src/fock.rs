//! Brute-force Fock-space oracle for tiny systems.
//!
//! Each squeezed input is expanded in the Fock basis, sent through a loss
//! beamsplitter (ancilla `l`) and the distinguishability beamsplitter (virtual
//! mode `b`), and reduced to the single-mode states of the indistinguishable
//! and virtual parts. The indistinguishable parts of all inputs are
//! propagated jointly through `T`, each virtual part through its own copy of
//! `T`, and the resulting sector distributions are convolved. Everything is
//! computed from `cfg` scalars and the raw matrix `T`, never from the
//! Gaussian engine.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::pattern::{ClickPattern, OutputPattern};
use crate::{Complex, Error, ExperimentConfig, Interferometer, Result};

/// Output mass deficit targeted by the automatic cutoff.
pub const AUTO_TAIL: f64 = 1e-9;
/// Largest output mass deficit accepted for an explicit cutoff.
pub const MAX_TAIL: f64 = 1e-6;
/// Source-state tail mass targeted by the automatic cutoff.
pub const SOURCE_TAIL: f64 = 1e-12;
/// Largest automatic cutoff tried.
pub const MAX_CUTOFF: u32 = 80;

/// Size limits of the oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockGuard {
    pub max_ports: usize,
    pub max_inputs: usize,
}

impl Default for FockGuard {
    fn default() -> Self {
        FockGuard {
            max_ports: 2,
            max_inputs: 1,
        }
    }
}

/// Joint PNR distribution over all patterns with at most `cutoff` photons.
#[derive(Debug, Clone, PartialEq)]
pub struct FockDistribution {
    probs: BTreeMap<OutputPattern, f64>,
    cutoff: u32,
    tail: f64,
}

impl FockDistribution {
    /// Probability of `s`; `None` above the photon cutoff.
    pub fn prob(&self, s: &OutputPattern) -> Option<f64> {
        if s.total() > self.cutoff {
            return None;
        }
        Some(self.probs.get(s).copied().unwrap_or(0.0))
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    /// `1 - sum of all tabulated probabilities`.
    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn probs(&self) -> &BTreeMap<OutputPattern, f64> {
        &self.probs
    }
}

/// Fock amplitudes `<n|S(r)|0>` of single-mode squeezed vacuum for
/// `n <= cutoff`: `c_0 = 1/sqrt(cosh r)`,
/// `c_{2n+2} = -tanh r sqrt((2n+1)/(2n+2)) c_{2n}`, odd terms zero.
pub fn squeezed_vacuum_amplitudes(r: f64, cutoff: u32) -> Vec<f64> {
    let mut c = vec![0.0; cutoff as usize + 1];
    c[0] = 1.0 / r.cosh().sqrt();
    let mut n = 0usize;
    while n + 2 <= cutoff as usize {
        c[n + 2] = -r.tanh() * (((n + 1) as f64) / ((n + 2) as f64)).sqrt() * c[n];
        n += 2;
    }
    c
}

/// `(t a^dag + r c^dag)^n / sqrt(n!) |0>` expanded as amplitudes of
/// `|n-k>|k>`, `k = 0..=n`.
fn split_photons(n: usize, t: f64, r: f64) -> Vec<f64> {
    // coefficient of (a^dag)^(n-k) (c^dag)^k is C(n,k) t^(n-k) r^k / sqrt(n!),
    // and (a^dag)^j (c^dag)^k |0> = sqrt(j! k!) |j>|k>
    let mut ln_fact = vec![0.0f64; n + 1];
    for i in 1..=n {
        ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
    }
    (0..=n)
        .map(|k| {
            let ln_binom = ln_fact[n] - ln_fact[k] - ln_fact[n - k];
            let scale = (ln_binom - 0.5 * ln_fact[n] + 0.5 * (ln_fact[n - k] + ln_fact[k])).exp();
            scale * t.powi((n - k) as i32) * r.powi(k as i32)
        })
        .collect()
}

/// Reduced single-mode states `(rho_a, rho_b)` of one input after loss and the
/// distinguishability splitter.
fn input_states(cfg: &ExperimentConfig, cutoff: u32) -> (DMatrix<f64>, DMatrix<f64>) {
    let c = squeezed_vacuum_amplitudes(cfg.squeezing, cutoff);
    let d = cutoff as usize + 1;
    let (t_loss, r_loss) = (cfg.eta_t().sqrt(), (1.0 - cfg.eta_t()).sqrt());
    let (t_ind, r_ind) = (cfg.eta_ind.sqrt(), (1.0 - cfg.eta_ind).sqrt());
    // psi[a][l][b]
    let mut psi = vec![0.0f64; d * d * d];
    let at = |a: usize, l: usize, b: usize| (a * d + l) * d + b;
    for (n, &cn) in c.iter().enumerate() {
        if cn == 0.0 {
            continue;
        }
        for (l, &x) in split_photons(n, t_loss, r_loss).iter().enumerate() {
            let kept = n - l;
            for (b, &y) in split_photons(kept, t_ind, r_ind).iter().enumerate() {
                psi[at(kept - b, l, b)] += cn * x * y;
            }
        }
    }
    let mut rho_a = DMatrix::zeros(d, d);
    let mut rho_b = DMatrix::zeros(d, d);
    for a in 0..d {
        for a2 in 0..d {
            let mut s = 0.0;
            for l in 0..d {
                for b in 0..d {
                    s += psi[at(a, l, b)] * psi[at(a2, l, b)];
                }
            }
            rho_a[(a, a2)] = s;
        }
    }
    for b in 0..d {
        for b2 in 0..d {
            let mut s = 0.0;
            for a in 0..d {
                for l in 0..d {
                    s += psi[at(a, l, b)] * psi[at(a, l, b2)];
                }
            }
            rho_b[(b, b2)] = s;
        }
    }
    (rho_a, rho_b)
}

/// Pure-state decomposition `rho = sum_k w_k |v_k><v_k|`.
fn branches(rho: DMatrix<f64>) -> Vec<(f64, Vec<f64>)> {
    let eig = SymmetricEigen::new(rho);
    (0..eig.eigenvalues.len())
        .filter(|&k| eig.eigenvalues[k] > 1e-18)
        .map(|k| (eig.eigenvalues[k], eig.eigenvectors.column(k).iter().copied().collect()))
        .collect()
}

/// Polynomial in the output creation operators, keyed by exponent vectors.
type Poly = BTreeMap<Vec<u32>, Complex>;

fn poly_mul(p: &Poly, q: &Poly, max_degree: u32) -> Poly {
    let mut out = Poly::new();
    for (e1, c1) in p {
        let d1: u32 = e1.iter().sum();
        for (e2, c2) in q {
            if d1 + e2.iter().sum::<u32>() > max_degree {
                continue;
            }
            let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
            *out.entry(e).or_insert(Complex::new(0.0, 0.0)) += c1 * c2;
        }
    }
    out
}

/// `sum_n v_n (sum_j T_{j,col} x_j)^n / sqrt(n!)`.
fn input_poly(t: &Interferometer, col: usize, v: &[f64], max_degree: u32) -> Poly {
    let k = t.ports();
    let mut linear = Poly::new();
    for j in 0..k {
        let mut e = vec![0u32; k];
        e[j] = 1;
        linear.insert(e, t.matrix()[(j, col)]);
    }
    let mut power = Poly::new();
    power.insert(vec![0u32; k], Complex::new(1.0, 0.0));
    let mut out = Poly::new();
    let mut fact = 1.0f64;
    for (n, &vn) in v.iter().enumerate() {
        if n as u32 > max_degree {
            break;
        }
        if n > 0 {
            fact *= n as f64;
            power = poly_mul(&power, &linear, max_degree);
        }
        if vn != 0.0 {
            for (e, c) in &power {
                *out.entry(e.clone()).or_insert(Complex::new(0.0, 0.0)) += c * (vn / fact.sqrt());
            }
        }
    }
    out
}

/// Eigen-branches `(weight, amplitudes)` of a reduced input state.
type Branches = Vec<(f64, Vec<f64>)>;

/// PNR distribution of the inputs `(column, state)` sent jointly through `T`.
fn sector_distribution(
    t: &Interferometer,
    inputs: &[(usize, &Branches)],
    max_degree: u32,
) -> BTreeMap<Vec<u32>, f64> {
    let polys: Vec<Vec<(f64, Poly)>> = inputs
        .iter()
        .map(|(col, br)| {
            br.iter()
                .map(|(w, v)| (*w, input_poly(t, *col, v, max_degree)))
                .collect()
        })
        .collect();
    let mut out = BTreeMap::new();
    let mut choice = vec![0usize; polys.len()];
    loop {
        let mut weight = 1.0;
        let mut state = Poly::new();
        state.insert(vec![0u32; t.ports()], Complex::new(1.0, 0.0));
        for (i, &c) in choice.iter().enumerate() {
            let (w, p) = &polys[i][c];
            weight *= w;
            state = poly_mul(&state, p, max_degree);
        }
        for (e, c) in state {
            // x^e |0> = sqrt(prod e_j!) |e>
            let norm: f64 = e.iter().map(|&n| (1..=n).map(|i| i as f64).product::<f64>()).product();
            *out.entry(e).or_insert(0.0) += weight * c.norm_sqr() * norm;
        }
        let mut i = 0;
        loop {
            if i == choice.len() {
                return out;
            }
            choice[i] += 1;
            if choice[i] < polys[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

fn convolve(p: &BTreeMap<Vec<u32>, f64>, q: &BTreeMap<Vec<u32>, f64>, max_degree: u32) -> BTreeMap<Vec<u32>, f64> {
    let mut out = BTreeMap::new();
    for (e1, a) in p {
        let d1: u32 = e1.iter().sum();
        for (e2, b) in q {
            if d1 + e2.iter().sum::<u32>() > max_degree {
                continue;
            }
            let e: Vec<u32> = e1.iter().zip(e2).map(|(x, y)| x + y).collect();
            *out.entry(e).or_insert(0.0) += a * b;
        }
    }
    out
}

fn distribution_at(cfg: &ExperimentConfig, t: &Interferometer, cutoff: u32) -> FockDistribution {
    let (rho_a, rho_b) = input_states(cfg, cutoff);
    let ind = branches(rho_a);
    let vir = branches(rho_b);
    let inputs: Vec<(usize, &Branches)> = (0..cfg.inputs).map(|m| (m, &ind)).collect();
    let mut total = sector_distribution(t, &inputs, cutoff);
    for m in 0..cfg.inputs {
        let sector = sector_distribution(t, &[(m, &vir)], cutoff);
        total = convolve(&total, &sector, cutoff);
    }
    let probs: BTreeMap<OutputPattern, f64> =
        total.into_iter().map(|(e, p)| (OutputPattern::new(e), p)).collect();
    let mass: f64 = probs.values().sum();
    FockDistribution {
        probs,
        cutoff,
        tail: (1.0 - mass).max(0.0),
    }
}

/// Joint PNR distribution of the full model at photon cutoff `cutoff`
/// (chosen automatically when `None`).
pub fn fock_pnr_distribution(
    cfg: &ExperimentConfig,
    t: &Interferometer,
    cutoff: Option<u32>,
    guard: FockGuard,
) -> Result<FockDistribution> {
    cfg.validate()?;
    if t.ports() != cfg.ports {
        return Err(Error::DimensionMismatch {
            expected: cfg.ports,
            found: t.ports(),
        });
    }
    if cfg.ports > guard.max_ports {
        return Err(Error::GuardExceeded {
            what: "Fock oracle ports",
            size: cfg.ports as u128,
            limit: guard.max_ports as u128,
        });
    }
    if cfg.inputs > guard.max_inputs {
        return Err(Error::GuardExceeded {
            what: "Fock oracle squeezed inputs",
            size: cfg.inputs as u128,
            limit: guard.max_inputs as u128,
        });
    }
    let sinh2 = cfg.squeezing.sinh().powi(2);
    let minimum = 2 * libm::ceil(sinh2) as u32 + 4;
    match cutoff {
        Some(c) => {
            if c < minimum {
                return Err(Error::InvalidArgument(alloc::format!(
                    "cutoff {c} below the minimum {minimum} for r = {}",
                    cfg.squeezing
                )));
            }
            let d = distribution_at(cfg, t, c);
            if d.tail > MAX_TAIL {
                return Err(Error::TailMass {
                    tail: d.tail,
                    limit: MAX_TAIL,
                });
            }
            Ok(d)
        }
        None => {
            let mut c = minimum;
            loop {
                let source: f64 = squeezed_vacuum_amplitudes(cfg.squeezing, c).iter().map(|x| x * x).sum();
                let d = distribution_at(cfg, t, c);
                if d.tail < AUTO_TAIL && 1.0 - source < SOURCE_TAIL {
                    return Ok(d);
                }
                if c >= MAX_CUTOFF {
                    return Err(Error::TailMass {
                        tail: d.tail,
                        limit: AUTO_TAIL,
                    });
                }
                c += 2;
            }
        }
    }
}

/// Click-pattern probabilities obtained by grouping PNR patterns by support.
pub fn threshold_from_pnr<'a>(
    dist: impl IntoIterator<Item = (&'a OutputPattern, &'a f64)>,
) -> BTreeMap<ClickPattern, f64> {
    let mut out = BTreeMap::new();
    for (s, p) in dist {
        *out.entry(s.support()).or_insert(0.0) += p;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{haar_random_unitary, CMatrix};

    fn ident(k: usize) -> Interferometer {
        Interferometer::new(CMatrix::identity(k, k), 1e-12).unwrap()
    }

    #[test]
    fn vacuum_is_a_point_mass() {
        let cfg = ExperimentConfig::new(2, 1, 0.0, 0.8, 0.6).unwrap();
        let d = fock_pnr_distribution(&cfg, &haar_random_unitary(2, 1).unwrap(), None, FockGuard::default()).unwrap();
        let nonzero: Vec<_> = d.probs().iter().filter(|(_, &p)| p > 1e-15).collect();
        assert_eq!(nonzero.len(), 1);
        assert_eq!(*nonzero[0].0, OutputPattern::zeros(2));
        assert!((nonzero[0].1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn squeezed_vacuum_photon_statistics() {
        // P(2n) = (2n)! tanh^2n r / (4^n n!^2 cosh r), odd terms vanish
        let r: f64 = 0.7;
        let mut fact = vec![1.0f64; 40];
        for i in 1..40 {
            fact[i] = fact[i - 1] * i as f64;
        }
        let cfg = ExperimentConfig::new(1, 1, r, 1.0, 1.0).unwrap();
        let d = fock_pnr_distribution(&cfg, &ident(1), None, FockGuard::default()).unwrap();
        for n in 0..8usize {
            let expect = fact[2 * n] * r.tanh().powi(2 * n as i32) / (4f64.powi(n as i32) * fact[n].powi(2) * r.cosh());
            let got = d.prob(&OutputPattern::new(vec![2 * n as u32])).unwrap();
            assert!((got - expect).abs() < 1e-11, "n={n}: {got} vs {expect}");
            assert!(d.prob(&OutputPattern::new(vec![2 * n as u32 + 1])).unwrap() < 1e-15);
        }
    }

    #[test]
    fn loss_thins_the_photon_number() {
        // mean photon number of the output is eta_t sinh^2 r for any eta_ind
        let r: f64 = 0.5;
        for eta_ind in [0.0, 0.3, 1.0] {
            let cfg = ExperimentConfig::new(2, 1, r, 0.7, eta_ind).unwrap();
            let d = fock_pnr_distribution(&cfg, &haar_random_unitary(2, 3).unwrap(), None, FockGuard::default()).unwrap();
            let mean: f64 = d.probs().iter().map(|(s, p)| s.total() as f64 * p).sum();
            assert!((mean - 0.7 * r.sinh().powi(2)).abs() < 1e-7, "{mean}");
            assert!(d.tail() < AUTO_TAIL);
        }
    }

    #[test]
    fn guards_and_cutoffs() {
        let cfg = ExperimentConfig::new(3, 1, 0.5, 0.7, 0.5).unwrap();
        let t = haar_random_unitary(3, 1).unwrap();
        assert!(fock_pnr_distribution(&cfg, &t, None, FockGuard::default()).unwrap_err().is_guard());
        let cfg = ExperimentConfig::new(2, 2, 0.5, 0.7, 0.5).unwrap();
        let t = haar_random_unitary(2, 1).unwrap();
        assert!(fock_pnr_distribution(&cfg, &t, None, FockGuard::default()).unwrap_err().is_guard());
        let cfg = ExperimentConfig::new(2, 1, 1.2, 0.9, 0.5).unwrap();
        assert!(matches!(
            fock_pnr_distribution(&cfg, &t, Some(2), FockGuard::default()),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            fock_pnr_distribution(&cfg, &t, Some(10), FockGuard::default()),
            Err(Error::TailMass { .. })
        ));
    }

    #[test]
    fn threshold_aggregation() {
        let mut vac = BTreeMap::new();
        vac.insert(OutputPattern::zeros(2), 1.0);
        let t = threshold_from_pnr(&vac);
        assert_eq!(t.len(), 1);
        assert_eq!(t[&ClickPattern::empty()], 1.0);

        let cfg = ExperimentConfig::new(2, 1, 0.5, 0.8, 0.5).unwrap();
        let d = fock_pnr_distribution(&cfg, &haar_random_unitary(2, 4).unwrap(), None, FockGuard::default()).unwrap();
        let clicks = threshold_from_pnr(d.probs());
        let a: f64 = clicks.values().sum();
        let b: f64 = d.probs().values().sum();
        assert!((a - b).abs() < 1e-14);
        assert_eq!(clicks.len(), 4);
    }
}
