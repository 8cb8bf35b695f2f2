//! Dense complex linear-algebra helpers shared by the matrix functions.

use alloc::vec;
use alloc::vec::Vec;

use crate::{CMatrix, Complex, Error, Result};

/// Largest entry modulus of `m - m^T`.
pub fn symmetry_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            dev = dev.max((m[(i, j)] - m[(j, i)]).norm());
        }
    }
    dev
}

/// Largest entry modulus of `m - m^dag`.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Largest entry modulus of `m^dag m - I`.
pub fn unitarity_deviation(m: &CMatrix) -> f64 {
    let prod = m.adjoint() * m;
    let n = prod.nrows();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { Complex::new(1.0, 0.0) } else { Complex::new(0.0, 0.0) };
            dev = dev.max((prod[(i, j)] - target).norm());
        }
    }
    dev
}

/// Selects rows and columns `(idx, idx + half)` of a `2*half` square matrix,
/// in that order.
pub fn select_paired(m: &CMatrix, idx: &[usize], half: usize) -> CMatrix {
    let sel: Vec<usize> = idx.iter().copied().chain(idx.iter().map(|&i| i + half)).collect();
    select(m, &sel)
}

/// Selects rows and columns `sel` (repetitions allowed) of a square matrix.
pub fn select(m: &CMatrix, sel: &[usize]) -> CMatrix {
    CMatrix::from_fn(sel.len(), sel.len(), |i, j| m[(sel[i], sel[j])])
}

/// Determinant of a Hermitian positive-definite matrix via Cholesky.
///
/// The empty matrix has determinant 1.
pub fn det_pd(m: &CMatrix, tol: f64) -> Result<f64> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Ok(1.0);
    }
    let scale = m.iter().fold(1.0f64, |s, z| s.max(z.norm()));
    let dev = hermiticity_deviation(m);
    if dev > tol * scale {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let chol = m.clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l_dirty();
    let mut det = Complex::new(1.0, 0.0);
    for i in 0..m.nrows() {
        let d = l[(i, i)];
        if !(d.re > 0.0) || d.im.abs() > tol * d.re {
            return Err(Error::NotPositiveDefinite);
        }
        det *= d * d;
    }
    if det.im.abs() > tol * det.re.abs().max(1.0) {
        return Err(Error::Numerical(alloc::format!(
            "determinant has imaginary residue {:e}",
            det.im
        )));
    }
    Ok(det.re)
}

/// Matrix inverse via LU with partial pivoting.
pub fn inverse(m: &CMatrix) -> Result<CMatrix> {
    m.clone().try_inverse().ok_or(Error::Singular)
}

/// Power traces `tr(C^j)` for `j = 1..=count`.
///
/// Uses a unitary Hessenberg reduction, the Hessenberg characteristic
/// polynomial recurrence and Newton's identities, `O(d^3 + count*d)` overall.
pub fn power_traces(c: &CMatrix, count: usize) -> Vec<Complex> {
    let d = c.nrows();
    let mut traces = vec![Complex::new(0.0, 0.0); count];
    if d == 0 || count == 0 {
        return traces;
    }
    let coeffs = char_poly(c);
    // coeffs[i] is c_i of x^d + c_1 x^{d-1} + ... + c_d, with coeffs[0] = 1.
    for j in 1..=count {
        let mut acc = Complex::new(0.0, 0.0);
        let upper = (j - 1).min(d);
        for i in 1..=upper {
            acc += coeffs[i] * traces[j - i - 1];
        }
        if j <= d {
            acc += coeffs[j] * j as f64;
        }
        traces[j - 1] = -acc;
    }
    traces
}

/// Monic characteristic polynomial coefficients `[1, c_1, ..., c_d]`.
pub fn char_poly(c: &CMatrix) -> Vec<Complex> {
    let d = c.nrows();
    let h = if d > 2 { c.clone().hessenberg().h() } else { c.clone() };
    // polys[k] holds det(x I - H[..k, ..k]) in ascending powers of x.
    let zero = Complex::new(0.0, 0.0);
    let one = Complex::new(1.0, 0.0);
    let mut polys: Vec<Vec<Complex>> = Vec::with_capacity(d + 1);
    polys.push(vec![one]);
    for k in 0..d {
        let mut next = vec![zero; k + 2];
        let prev = &polys[k];
        for (p, &a) in prev.iter().enumerate() {
            next[p + 1] += a;
            next[p] -= h[(k, k)] * a;
        }
        let mut sub = one;
        for i in (0..k).rev() {
            sub *= h[(i + 1, i)];
            let coef = h[(i, k)] * sub;
            if coef == zero {
                continue;
            }
            for (p, &a) in polys[i].iter().enumerate() {
                next[p] -= coef * a;
            }
        }
        polys.push(next);
    }
    let mut out = polys.pop().unwrap();
    out.reverse();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[(f64, f64)]]) -> CMatrix {
        let n = rows.len();
        CMatrix::from_fn(n, n, |i, j| Complex::new(rows[i][j].0, rows[i][j].1))
    }

    #[test]
    fn det_of_small_matrices() {
        assert_eq!(det_pd(&CMatrix::identity(5, 5), 1e-10).unwrap(), 1.0);
        let d = mat(&[&[(2.0, 0.0), (0.0, 0.0)], &[(0.0, 0.0), (3.0, 0.0)]]);
        assert!((det_pd(&d, 1e-10).unwrap() - 6.0).abs() < 1e-14);
        assert_eq!(det_pd(&CMatrix::zeros(0, 0), 1e-10).unwrap(), 1.0);
    }

    #[test]
    fn det_rejects_indefinite_and_non_hermitian() {
        let m = mat(&[&[(1.0, 0.0), (2.0, 0.0)], &[(2.0, 0.0), (1.0, 0.0)]]);
        assert_eq!(det_pd(&m, 1e-10), Err(Error::NotPositiveDefinite));
        let m = mat(&[&[(1.0, 0.0), (0.5, 0.0)], &[(0.1, 0.0), (1.0, 0.0)]]);
        assert!(matches!(det_pd(&m, 1e-10), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn power_traces_match_repeated_products() {
        let m = mat(&[
            &[(0.3, 0.1), (1.0, -0.2), (0.0, 0.5), (0.2, 0.0)],
            &[(-0.4, 0.0), (0.1, 0.7), (0.9, 0.0), (0.0, -0.3)],
            &[(0.2, 0.2), (0.0, 0.0), (-0.6, 0.1), (0.5, 0.5)],
            &[(0.1, -0.1), (0.3, 0.0), (0.0, 0.2), (0.8, 0.0)],
        ]);
        let traces = power_traces(&m, 7);
        let mut p = m.clone();
        for t in traces {
            assert!((p.trace() - t).norm() < 1e-12, "{} vs {}", p.trace(), t);
            p = &p * &m;
        }
    }

    #[test]
    fn paired_selection_repeats_indices() {
        let m = CMatrix::from_fn(4, 4, |i, j| Complex::new((10 * i + j) as f64, 0.0));
        let s = select_paired(&m, &[0, 0], 2);
        let expect = [0usize, 0, 2, 2];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(s[(i, j)].re, (10 * expect[i] + expect[j]) as f64);
            }
        }
    }
}
