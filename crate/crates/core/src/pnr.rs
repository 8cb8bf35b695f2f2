//! Exact photon-number-resolving output probabilities.
//!
//! The total probability of a pattern `s` splits over sub-patterns `s0 <= s`
//! carried by the indistinguishable mode:
//! `P(s) = sum_{s0} P0(s0) P_dis(s - s0)`, where `P0` is a Hafnian and
//! `P_dis` combines the closed-form virtual-mode probabilities of all inputs.

use alloc::vec;
use alloc::vec::Vec;

use crate::matfunc::{g_over_factorial, hafnian};
use crate::model::{select_by_pattern, GbsModel};
use crate::pattern::{compositions, enumerate_subpatterns, OutputPattern};
use crate::special::ln_factorial;
use crate::{Error, Result};

/// Default limit on the number of decompositions summed by
/// [`GbsModel::prob_dist_exact`].
pub const DEFAULT_DECOMPOSITION_GUARD: u128 = 1_000_000;

/// Default limit on the number of sub-patterns of a target pattern.
pub const DEFAULT_SUBPATTERN_GUARD: u128 = 1_000_000;

/// Anything that assigns a probability to distinguishable-photon patterns.
pub trait DistinguishableSource {
    /// Probability that the virtual modes jointly produce `pattern`.
    fn p_dis(&self, pattern: &OutputPattern) -> f64;
}

/// The box of sub-patterns `t <= s`, indexed in mixed radix over the ports
/// where `s` is nonzero (first such port varies fastest).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubpatternBox {
    target: OutputPattern,
    active: Vec<usize>,
    strides: Vec<usize>,
    size: usize,
}

impl SubpatternBox {
    pub fn new(target: &OutputPattern, guard: u128) -> Result<Self> {
        let active: Vec<usize> = (0..target.ports()).filter(|&k| target.counts()[k] > 0).collect();
        let mut strides = Vec::with_capacity(active.len());
        let mut size: u128 = 1;
        for &k in &active {
            strides.push(size as usize);
            size *= target.counts()[k] as u128 + 1;
            if size > guard {
                return Err(Error::GuardExceeded {
                    what: "sub-patterns of the target pattern",
                    size,
                    limit: guard,
                });
            }
        }
        Ok(SubpatternBox {
            target: target.clone(),
            active,
            strides,
            size: size as usize,
        })
    }

    pub fn target(&self) -> &OutputPattern {
        &self.target
    }

    /// Number of sub-patterns, `prod_k (s_k + 1)`.
    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Ports where the target is nonzero.
    pub fn active_ports(&self) -> &[usize] {
        &self.active
    }

    /// Index of `t`, or `None` unless `t <= target`.
    pub fn index(&self, t: &OutputPattern) -> Option<usize> {
        if t.ports() != self.target.ports() || !t.dominated_by(&self.target) {
            return None;
        }
        Some(self.active.iter().zip(&self.strides).map(|(&k, &st)| t.counts()[k] as usize * st).sum())
    }

    /// Per-active-port counts of the sub-pattern at `index`.
    pub fn digits(&self, index: usize) -> Vec<u32> {
        self.active
            .iter()
            .map(|&k| {
                let radix = self.target.counts()[k] as usize + 1;
                let st = self.strides[self.active.iter().position(|&a| a == k).unwrap()];
                ((index / st) % radix) as u32
            })
            .collect()
    }

    /// The full sub-pattern at `index`.
    pub fn pattern(&self, index: usize) -> OutputPattern {
        let mut counts = vec![0u32; self.target.ports()];
        for (&k, d) in self.active.iter().zip(self.digits(index)) {
            counts[k] = d;
        }
        OutputPattern::new(counts)
    }

    /// Calls `f(idx(t))` for every `t <= digits`.
    fn for_each_below(&self, digits: &[u32], mut f: impl FnMut(usize)) {
        let mut cur = vec![0u32; digits.len()];
        let mut idx = 0usize;
        loop {
            f(idx);
            let mut p = 0;
            loop {
                if p == digits.len() {
                    return;
                }
                if cur[p] < digits[p] {
                    cur[p] += 1;
                    idx += self.strides[p];
                    break;
                }
                idx -= cur[p] as usize * self.strides[p];
                cur[p] = 0;
                p += 1;
            }
        }
    }
}

/// Exact `P_dis(t)` for every sub-pattern `t` of a target pattern.
#[derive(Debug, Clone)]
pub struct DistTable {
    domain: SubpatternBox,
    values: Vec<f64>,
}

impl DistTable {
    pub fn domain(&self) -> &SubpatternBox {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `P_dis(t)`; `None` when `t` lies outside the table.
    pub fn get(&self, t: &OutputPattern) -> Option<f64> {
        self.domain.index(t).map(|i| self.values[i])
    }
}

impl DistinguishableSource for DistTable {
    fn p_dis(&self, pattern: &OutputPattern) -> f64 {
        self.get(pattern).expect("pattern outside the exact distinguishable table")
    }
}

impl GbsModel {
    /// `Haf(A_s0) / (prod_k s0_k! sqrt(det Q^(0)))`.
    pub fn prob_indistinguishable(&self, s0: &OutputPattern) -> Result<f64> {
        s0.check_ports(self.ports())?;
        let sub = select_by_pattern(self.kernel0(), s0)?;
        let haf = hafnian(&sub, self.tol())?;
        let log_norm: f64 = s0.counts().iter().map(|&c| ln_factorial(c)).sum::<f64>()
            + 0.5 * self.det_q0().ln();
        let p = haf * (-log_norm).exp();
        let tol = self.tol();
        if p.im.abs() > tol || p.re < -tol || p.re > 1.0 + tol {
            return Err(Error::Numerical(alloc::format!(
                "indistinguishable probability {} + {}i for pattern {s0}",
                p.re,
                p.im
            )));
        }
        Ok(p.re.clamp(0.0, 1.0))
    }

    /// Untruncated probability that virtual mode `m` emits `n` photons,
    /// `G(n) / (n! sqrt(det Q^(m)))`.
    pub fn virtual_number_prob(&self, n: u32) -> f64 {
        let c = self.coefficients();
        g_over_factorial(n, c.alpha_d_p, c.beta_d_p) / self.det_qm().sqrt()
    }

    /// `G(N) / sqrt(det Q^(m)) prod_k |T_{k,m}|^(2 s_k) / s_k!` for
    /// `1 <= m <= M`.
    pub fn prob_virtual(&self, m: usize, sm: &OutputPattern) -> Result<f64> {
        if m == 0 || m > self.inputs() {
            return Err(Error::InvalidArgument(alloc::format!(
                "virtual mode {m} outside 1..={}",
                self.inputs()
            )));
        }
        sm.check_ports(self.ports())?;
        let n = sm.total();
        Ok(self.virtual_number_prob(n) * multinomial_weight(self.virtual_weights(m), sm.counts(), n))
    }

    /// [`Self::prob_dist_exact_with_guard`] with
    /// [`DEFAULT_DECOMPOSITION_GUARD`].
    pub fn prob_dist_exact(&self, s_dis: &OutputPattern) -> Result<f64> {
        self.prob_dist_exact_with_guard(s_dis, DEFAULT_DECOMPOSITION_GUARD)
    }

    /// Sum over every way of splitting `s_dis` into `M` virtual-mode
    /// patterns of the product of their probabilities.
    ///
    /// Decompositions are streamed as a product of per-port compositions.
    pub fn prob_dist_exact_with_guard(&self, s_dis: &OutputPattern, guard: u128) -> Result<f64> {
        s_dis.check_ports(self.ports())?;
        let m = self.inputs();
        let active: Vec<usize> = (0..self.ports()).filter(|&k| s_dis.counts()[k] > 0).collect();
        let mut size: u128 = 1;
        for &k in &active {
            let s = s_dis.counts()[k] as u64;
            size = size.saturating_mul(
                crate::special::binomial_exact(m as u64 - 1 + s, s).unwrap_or(u128::MAX),
            );
        }
        if size > guard {
            return Err(Error::GuardExceeded {
                what: "distinguishable decompositions",
                size,
                limit: guard,
            });
        }
        let number: Vec<f64> = (0..=s_dis.total()).map(|n| self.virtual_number_prob(n)).collect();
        if m == 0 {
            return Ok(if s_dis.total() == 0 { 1.0 } else { 0.0 });
        }
        // per active port: (composition, prod_m w_{k,m}^c_m / c_m!)
        let per_port: Vec<Vec<(Vec<u32>, f64)>> = active
            .iter()
            .map(|&k| {
                compositions(s_dis.counts()[k], m)
                    .into_iter()
                    .map(|c| {
                        let mut ln = 0.0;
                        let mut zero = false;
                        for (mm, &cm) in c.iter().enumerate() {
                            if cm > 0 {
                                let w = self.virtual_weights(mm + 1)[k];
                                if w == 0.0 {
                                    zero = true;
                                }
                                ln += cm as f64 * w.ln() - ln_factorial(cm);
                            }
                        }
                        (c, if zero { 0.0 } else { ln.exp() })
                    })
                    .collect()
            })
            .collect();
        let mut choice = vec![0usize; active.len()];
        let mut totals = vec![0u32; m];
        let mut sum = 0.0;
        loop {
            totals.iter_mut().for_each(|t| *t = 0);
            let mut w = 1.0;
            for (p, &c) in choice.iter().enumerate() {
                let (comp, f) = &per_port[p][c];
                w *= f;
                for (t, &cm) in totals.iter_mut().zip(comp) {
                    *t += cm;
                }
            }
            if w != 0.0 {
                for &t in &totals {
                    w *= number[t as usize] * libm::exp(ln_factorial(t));
                }
                sum += w;
            }
            // odometer over ports
            let mut p = 0;
            loop {
                if p == choice.len() {
                    return Ok(sum);
                }
                choice[p] += 1;
                if choice[p] < per_port[p].len() {
                    break;
                }
                choice[p] = 0;
                p += 1;
            }
        }
    }

    /// Exact `P_dis(t)` for all `t <= s`, by convolving the virtual modes
    /// one at a time: `F_m(y) = sum_{t <= y} F_{m-1}(y - t) P_m(t)`.
    pub fn dist_table(&self, s: &OutputPattern, guard: u128) -> Result<DistTable> {
        s.check_ports(self.ports())?;
        let domain = SubpatternBox::new(s, guard)?;
        let len = domain.len();
        let mut f = vec![0.0; len];
        f[0] = 1.0;
        let digits: Vec<Vec<u32>> = (0..len).map(|i| domain.digits(i)).collect();
        let totals: Vec<u32> = digits.iter().map(|d| d.iter().sum()).collect();
        let number: Vec<f64> = (0..=s.total()).map(|n| self.virtual_number_prob(n)).collect();
        for m in 1..=self.inputs() {
            let weights: Vec<f64> = domain.active.iter().map(|&k| self.virtual_weights(m)[k]).collect();
            let pm: Vec<f64> = (0..len)
                .map(|i| number[totals[i] as usize] * multinomial_weight(&weights, &digits[i], totals[i]))
                .collect();
            let mut next = vec![0.0; len];
            for y in 0..len {
                let mut acc = 0.0;
                domain.for_each_below(&digits[y], |t| acc += f[y - t] * pm[t]);
                next[y] = acc;
            }
            f = next;
        }
        Ok(DistTable { domain, values: f })
    }

    /// The sub-patterns `s0 <= s` grouped by photon number `n = 0..=N`.
    pub fn subpatterns_by_order(&self, s: &OutputPattern) -> Result<Vec<Vec<OutputPattern>>> {
        s.check_ports(self.ports())?;
        SubpatternBox::new(s, DEFAULT_SUBPATTERN_GUARD)?;
        (0..=s.total()).map(|n| enumerate_subpatterns(s, n)).collect()
    }

    /// `P(s) = sum_{s0 <= s} P0(s0) P_dis(s - s0)` with exact `P_dis`.
    pub fn prob_total_exact(&self, s: &OutputPattern) -> Result<f64> {
        let table = self.dist_table(s, DEFAULT_SUBPATTERN_GUARD)?;
        let mut total = 0.0;
        for group in self.subpatterns_by_order(s)? {
            for s0 in group {
                let rest = s.checked_sub(&s0).expect("sub-pattern");
                let pd = table.p_dis(&rest);
                if pd != 0.0 {
                    total += self.prob_indistinguishable(&s0)? * pd;
                }
            }
        }
        Ok(total)
    }
}

/// `n! prod_k w_k^(c_k) / c_k!` for counts `c` summing to `n`.
fn multinomial_weight(weights: &[f64], counts: &[u32], n: u32) -> f64 {
    let mut ln = ln_factorial(n);
    for (&w, &c) in weights.iter().zip(counts) {
        if c > 0 {
            if w == 0.0 {
                return 0.0;
            }
            ln += c as f64 * w.ln() - ln_factorial(c);
        }
    }
    ln.exp()
}
