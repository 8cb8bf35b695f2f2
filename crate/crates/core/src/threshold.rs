//! Threshold-detector click probabilities.
//!
//! The probability of clicks on exactly the ports `U` is an inclusion-exclusion
//! sum of no-click marginals, `P(U) = sum_{V subset U} (-1)^(|U|-|V|)
//! prod_{m'=0..M} P~^(m')(R)` with `R = [K] \ V`. The indistinguishable
//! marginal is a determinant; each virtual marginal has a closed form.

use alloc::vec::Vec;
use core::ops::Range;

use crate::linalg::{det_pd, select_paired};
use crate::matfunc::torontonian;
use crate::model::GbsModel;
use crate::pattern::ClickPattern;
use crate::subset::{gray, serial_sum};
use crate::{Error, Result};

/// Above this many clicked ports, marginal products are accumulated as logs.
pub const LOG_PRODUCT_THRESHOLD: usize = 20;

fn check_ports(model: &GbsModel, ports: &[usize]) -> Result<()> {
    if let Some(&p) = ports.iter().find(|&&p| p >= model.ports()) {
        return Err(Error::InvalidArgument(alloc::format!(
            "port {p} outside 0..{}",
            model.ports()
        )));
    }
    Ok(())
}

impl GbsModel {
    /// `1 / sqrt(det Q^(0)_R)` with rows and columns `(R, R+K)`; 1 for empty `R`.
    pub fn marginal_noclick_indist(&self, r: &[usize]) -> Result<f64> {
        check_ports(self, r)?;
        let sub = select_paired(&self.q0().data, r, self.ports());
        Ok(1.0 / det_pd(&sub, self.tol())?.sqrt())
    }

    /// `1 / sqrt((1 + T a_d)^2 - (T b_d)^2)` with `T = sum_{j in R} |T_{j,m}|^2`.
    pub fn marginal_noclick_virtual(&self, m: usize, r: &[usize]) -> Result<f64> {
        if m == 0 || m > self.inputs() {
            return Err(Error::InvalidArgument(alloc::format!(
                "virtual mode {m} outside 1..={}",
                self.inputs()
            )));
        }
        check_ports(self, r)?;
        let w = self.virtual_weights(m);
        let t: f64 = r.iter().map(|&j| w[j]).sum();
        let c = self.coefficients();
        Ok(1.0 / ((1.0 + t * c.alpha_d).powi(2) - (t * c.beta_d).powi(2)).sqrt())
    }

    /// Probability of clicks on exactly the ports of `clicked`.
    pub fn prob_threshold(&self, clicked: &ClickPattern) -> Result<f64> {
        check_ports(self, clicked.ports())?;
        serial_sum(clicked.len(), |range| self.threshold_chunk(clicked, range))
    }

    /// Partial sum of [`Self::prob_threshold`] over Gray-code indices `range`.
    pub fn threshold_chunk(&self, clicked: &ClickPattern, range: Range<u64>) -> Result<f64> {
        self.threshold_terms(clicked, range, clicked.len() > LOG_PRODUCT_THRESHOLD)
    }

    fn threshold_terms(&self, clicked: &ClickPattern, range: Range<u64>, log_space: bool) -> Result<f64> {
        let u = clicked.len();
        let k = self.ports();
        let mut in_v = alloc::vec![false; k];
        let mut rest: Vec<usize> = Vec::with_capacity(k);
        let mut total = 0.0;
        for i in range {
            let mask = gray(i);
            in_v.iter_mut().for_each(|b| *b = false);
            let mut v_len = 0;
            for (b, &p) in clicked.ports().iter().enumerate() {
                if mask >> b & 1 == 1 {
                    in_v[p] = true;
                    v_len += 1;
                }
            }
            rest.clear();
            rest.extend((0..k).filter(|&j| !in_v[j]));
            let first = self.marginal_noclick_indist(&rest)?;
            let term = if log_space {
                let mut ln = first.ln();
                for m in 1..=self.inputs() {
                    ln += self.marginal_noclick_virtual(m, &rest)?.ln();
                }
                ln.exp()
            } else {
                let mut p = first;
                for m in 1..=self.inputs() {
                    p *= self.marginal_noclick_virtual(m, &rest)?;
                }
                p
            };
            if (u - v_len) % 2 == 1 {
                total -= term;
            } else {
                total += term;
            }
        }
        Ok(total)
    }

    /// `Tor(Q_U) / sqrt(det Q)` on the indistinguishable mode alone; equals
    /// [`Self::prob_threshold`] when `eta_ind = 1`.
    pub fn prob_threshold_ideal(&self, clicked: &ClickPattern) -> Result<f64> {
        check_ports(self, clicked.ports())?;
        Ok(torontonian(&self.q0().data, clicked, self.tol())? / self.det_q0().sqrt())
    }
}
