use alloc::vec::Vec;
use core::ops::Range;


use crate::linalg::{det_pd, inverse, select_paired};
use crate::pattern::ClickPattern;
use crate::subset::{gray, serial_sum};
use crate::{CMatrix, Error, Result};

/// `Tor(Q_U) = sum_{V subset U} (-1)^(|U|-|V|) / sqrt(det((Q^-1)_V))`, with
/// `(Q^-1)_V` the rows and columns `(V, V+K)`. `U = {}` gives 1.
pub fn torontonian(q: &CMatrix, clicked: &ClickPattern, tol: f64) -> Result<f64> {
    let qinv = inverse(q)?;
    torontonian_from_inverse(&qinv, clicked, tol)
}

/// [`torontonian`] given a precomputed `Q^-1`.
pub fn torontonian_from_inverse(qinv: &CMatrix, clicked: &ClickPattern, tol: f64) -> Result<f64> {
    serial_sum(clicked.len(), |r| torontonian_chunk(qinv, clicked, r, tol))
}

/// Partial Torontonian over Gray-code indices `range`.
pub fn torontonian_chunk(
    qinv: &CMatrix,
    clicked: &ClickPattern,
    range: Range<u64>,
    tol: f64,
) -> Result<f64> {
    if qinv.nrows() % 2 == 1 {
        return Err(Error::OddDimension(qinv.nrows()));
    }
    let half = qinv.nrows() / 2;
    if let Some(&p) = clicked.ports().last() {
        if p >= half {
            return Err(Error::DimensionMismatch {
                expected: half,
                found: p + 1,
            });
        }
    }
    let u = clicked.len();
    let mut total = 0.0;
    let mut sel: Vec<usize> = Vec::with_capacity(u);
    for i in range {
        let mask = gray(i);
        sel.clear();
        sel.extend((0..u).filter(|&b| mask >> b & 1 == 1).map(|b| clicked.ports()[b]));
        let det = det_pd(&select_paired(qinv, &sel, half), tol)?;
        let term = 1.0 / det.sqrt();
        if (u - sel.len()) % 2 == 1 {
            total -= term;
        } else {
            total += term;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Complex;

    #[test]
    fn vacuum_never_clicks() {
        let q = CMatrix::identity(4, 4);
        let one = ClickPattern::new(alloc::vec![0], 2).unwrap();
        assert!(torontonian(&q, &one, 1e-10).unwrap().abs() < 1e-15);
        assert_eq!(torontonian(&q, &ClickPattern::empty(), 1e-10).unwrap(), 1.0);
    }

    #[test]
    fn single_mode_thermal_click_probability() {
        // thermal state with mean n: Q = (1+n) I, P(click) = n/(1+n)
        let n = 0.7;
        let q = CMatrix::identity(2, 2) * Complex::new(1.0 + n, 0.0);
        let one = ClickPattern::new(alloc::vec![0], 1).unwrap();
        let p = torontonian(&q, &one, 1e-10).unwrap() / (1.0 + n);
        assert!((p - n / (1.0 + n)).abs() < 1e-14);
    }
}
