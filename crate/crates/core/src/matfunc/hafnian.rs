use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{power_traces, symmetry_deviation};
use crate::{CMatrix, Complex, Error, Result};

/// Largest dimension accepted by [`hafnian_bruteforce`].
pub const MAX_BRUTEFORCE_DIM: usize = 14;

fn check_symmetric_even(a: &CMatrix, tol: f64) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    if a.nrows() % 2 == 1 {
        return Err(Error::OddDimension(a.nrows()));
    }
    let scale = a.iter().fold(1.0f64, |s, z| s.max(z.norm()));
    let deviation = symmetry_deviation(a);
    if deviation > tol * scale {
        return Err(Error::NotSymmetric { deviation });
    }
    Ok(a.nrows() / 2)
}

/// Hafnian of a complex symmetric `2n x 2n` matrix.
///
/// Power-trace formula: `haf(A) = sum_Z (-1)^(n-|Z|) f((A X)_Z)` over subsets
/// `Z` of the vertex pairs `(i, i+n)`, where `X` swaps the two halves and
/// `f(C)` is the `lambda^n` coefficient of `exp(sum_j tr(C^j) lambda^j / 2j)`.
/// Cost is `O(n^3 2^n)`. The empty matrix has Hafnian 1.
pub fn hafnian(a: &CMatrix, tol: f64) -> Result<Complex> {
    let n = check_symmetric_even(a, tol)?;
    if n == 0 {
        return Ok(Complex::new(1.0, 0.0));
    }
    assert!(n < 64, "hafnian of a {}x{} matrix", 2 * n, 2 * n);
    let mut total = Complex::new(0.0, 0.0);
    let mut idx: Vec<usize> = Vec::with_capacity(2 * n);
    for mask in 0u64..(1u64 << n) {
        idx.clear();
        idx.extend((0..n).filter(|&i| mask >> i & 1 == 1));
        let z = idx.len();
        let mut term = if z == 0 {
            Complex::new(0.0, 0.0)
        } else {
            for t in 0..z {
                idx.push(idx[t] + n);
            }
            // (A X)_{r,c} = A_{r, partner(c)}
            let c = CMatrix::from_fn(2 * z, 2 * z, |r, col| {
                let cc = idx[col];
                let partner = if cc < n { cc + n } else { cc - n };
                a[(idx[r], partner)]
            });
            exp_series_coefficient(&power_traces(&c, n), n)
        };
        if (n - z) % 2 == 1 {
            term = -term;
        }
        total += term;
    }
    Ok(total)
}

/// `[lambda^n] exp(sum_{j=1..n} traces[j-1] lambda^j / (2j))`.
fn exp_series_coefficient(traces: &[Complex], n: usize) -> Complex {
    let g: Vec<Complex> = traces.iter().enumerate().map(|(j, &p)| p / (2.0 * (j + 1) as f64)).collect();
    let mut e = vec![Complex::new(0.0, 0.0); n + 1];
    e[0] = Complex::new(1.0, 0.0);
    for k in 1..=n {
        let mut acc = Complex::new(0.0, 0.0);
        for j in 1..=k {
            acc += g[j - 1] * e[k - j] * j as f64;
        }
        e[k] = acc / k as f64;
    }
    e[n]
}

/// Hafnian by explicit enumeration of all `(2n-1)!!` perfect matchings.
pub fn hafnian_bruteforce(a: &CMatrix, tol: f64) -> Result<Complex> {
    if a.nrows() > MAX_BRUTEFORCE_DIM {
        return Err(Error::GuardExceeded {
            what: "brute-force hafnian dimension",
            size: a.nrows() as u128,
            limit: MAX_BRUTEFORCE_DIM as u128,
        });
    }
    check_symmetric_even(a, tol)?;
    let mut free: Vec<usize> = (0..a.nrows()).collect();
    Ok(match_rest(a, &mut free))
}

fn match_rest(a: &CMatrix, free: &mut Vec<usize>) -> Complex {
    if free.is_empty() {
        return Complex::new(1.0, 0.0);
    }
    let first = free.remove(0);
    let mut total = Complex::new(0.0, 0.0);
    for pos in 0..free.len() {
        let partner = free.remove(pos);
        total += a[(first, partner)] * match_rest(a, free);
        free.insert(pos, partner);
    }
    free.insert(0, first);
    total
}
