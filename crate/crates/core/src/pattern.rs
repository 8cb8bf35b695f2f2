//! Output patterns for PNR and threshold detection.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Result};

/// Photon counts per output port.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OutputPattern(Vec<u32>);

impl OutputPattern {
    pub fn new(counts: Vec<u32>) -> Self {
        OutputPattern(counts)
    }

    pub fn zeros(ports: usize) -> Self {
        OutputPattern(vec![0; ports])
    }

    /// `photons` single photons on the leading ports, zero elsewhere.
    pub fn leading_ones(ports: usize, photons: usize) -> Result<Self> {
        if photons > ports {
            return Err(Error::InvalidArgument(alloc::format!(
                "cannot place {photons} single photons on {ports} ports"
            )));
        }
        let mut counts = vec![0; ports];
        counts[..photons].iter_mut().for_each(|c| *c = 1);
        Ok(OutputPattern(counts))
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn ports(&self) -> usize {
        self.0.len()
    }

    /// Total photon number N.
    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Port indices with each port `k` repeated `s_k` times.
    pub fn repeated_ports(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(k, &c)| core::iter::repeat_n(k, c as usize))
            .collect()
    }

    /// Componentwise `self <= other`.
    pub fn dominated_by(&self, other: &OutputPattern) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Componentwise difference; `None` unless `other <= self`.
    pub fn checked_sub(&self, other: &OutputPattern) -> Option<OutputPattern> {
        if !other.dominated_by(self) {
            return None;
        }
        Some(OutputPattern(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    pub fn add(&self, other: &OutputPattern) -> OutputPattern {
        OutputPattern(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Set of ports with at least one photon.
    pub fn support(&self) -> ClickPattern {
        ClickPattern(self.0.iter().enumerate().filter(|(_, &c)| c > 0).map(|(k, _)| k).collect())
    }

    pub(crate) fn check_ports(&self, ports: usize) -> Result<()> {
        if self.0.len() != ports {
            return Err(Error::DimensionMismatch {
                expected: ports,
                found: self.0.len(),
            });
        }
        Ok(())
    }
}

impl core::borrow::Borrow<[u32]> for OutputPattern {
    fn borrow(&self) -> &[u32] {
        &self.0
    }
}

impl fmt::Display for OutputPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Clicked ports of a threshold measurement, zero-based and sorted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ClickPattern(Vec<usize>);

impl ClickPattern {
    /// Canonicalises (sorts, deduplicates) and checks every port is `< ports`.
    pub fn new(mut clicked: Vec<usize>, ports: usize) -> Result<Self> {
        clicked.sort_unstable();
        clicked.dedup();
        if let Some(&p) = clicked.iter().find(|&&p| p >= ports) {
            return Err(Error::InvalidArgument(alloc::format!(
                "clicked port {p} outside [0, {ports})"
            )));
        }
        Ok(ClickPattern(clicked))
    }

    pub fn empty() -> Self {
        ClickPattern(Vec::new())
    }

    /// Pattern from a bit mask over ports `0..ports`.
    pub fn from_mask(mask: u64, ports: usize) -> Self {
        ClickPattern((0..ports).filter(|&k| mask >> k & 1 == 1).collect())
    }

    pub fn ports(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, port: usize) -> bool {
        self.0.binary_search(&port).is_ok()
    }
}

/// All `t <= s` with `sum(t) = n`, starting from the pattern that fills the
/// leading ports first (descending lexicographic order).
pub fn enumerate_subpatterns(s: &OutputPattern, n: u32) -> Result<Vec<OutputPattern>> {
    if n > s.total() {
        return Err(Error::InvalidArgument(alloc::format!(
            "sub-pattern size {n} exceeds N = {}",
            s.total()
        )));
    }
    let counts = s.counts();
    let k = counts.len();
    // suffix[i] = photons available on ports i..
    let mut suffix = vec![0u32; k + 1];
    for i in (0..k).rev() {
        suffix[i] = suffix[i + 1] + counts[i];
    }
    let mut out = Vec::new();
    let mut cur = vec![0u32; k];
    fill(counts, &suffix, 0, n, &mut cur, &mut out);
    Ok(out)
}

fn fill(
    counts: &[u32],
    suffix: &[u32],
    port: usize,
    remaining: u32,
    cur: &mut Vec<u32>,
    out: &mut Vec<OutputPattern>,
) {
    if port == counts.len() {
        if remaining == 0 {
            out.push(OutputPattern(cur.clone()));
        }
        return;
    }
    let hi = counts[port].min(remaining);
    let lo = remaining.saturating_sub(suffix[port + 1]);
    for c in (lo..=hi).rev() {
        cur[port] = c;
        fill(counts, suffix, port + 1, remaining - c, cur, out);
    }
    cur[port] = 0;
}

/// Weak compositions of `total` into `parts` non-negative parts.
pub fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; parts];
    compose(total, 0, &mut cur, &mut out);
    out
}

fn compose(remaining: u32, idx: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if idx + 1 == cur.len() {
        cur[idx] = remaining;
        out.push(cur.clone());
        return;
    }
    for c in (0..=remaining).rev() {
        cur[idx] = c;
        compose(remaining - c, idx + 1, cur, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pat(c: &[u32]) -> OutputPattern {
        OutputPattern::new(c.to_vec())
    }

    #[test]
    fn subpatterns_examples() {
        assert_eq!(
            enumerate_subpatterns(&pat(&[1, 1]), 1).unwrap(),
            vec![pat(&[1, 0]), pat(&[0, 1])]
        );
        assert_eq!(enumerate_subpatterns(&pat(&[2]), 2).unwrap(), vec![pat(&[2])]);
        let six = enumerate_subpatterns(&pat(&[1, 1, 1, 1]), 2).unwrap();
        assert_eq!(six.len(), 6);
        assert!(six.windows(2).all(|w| w[0] > w[1]));
        assert!(enumerate_subpatterns(&pat(&[1, 1]), 3).is_err());
    }

    #[test]
    fn subpattern_counts_cover_all_configurations() {
        // sum_n |{t <= s : |t| = n}| = prod (s_k + 1)
        let s = pat(&[2, 0, 3, 1]);
        let total: usize = (0..=s.total())
            .map(|n| enumerate_subpatterns(&s, n).unwrap().len())
            .sum();
        assert_eq!(total, 3 * 4 * 2);
    }

    #[test]
    fn compositions_count() {
        assert_eq!(compositions(3, 1), vec![vec![3]]);
        // C(total + parts - 1, parts - 1)
        assert_eq!(compositions(4, 3).len(), 15);
        assert_eq!(compositions(0, 4), vec![vec![0, 0, 0, 0]]);
    }

    #[test]
    fn click_pattern_is_canonical() {
        let c = ClickPattern::new(vec![3, 1, 3], 4).unwrap();
        assert_eq!(c.ports(), &[1, 3]);
        assert!(ClickPattern::new(vec![4], 4).is_err());
        assert_eq!(pat(&[0, 2, 0, 1]).support(), c);
        assert_eq!(pat(&[2, 0, 1]).repeated_ports(), vec![0, 0, 2]);
    }
}
