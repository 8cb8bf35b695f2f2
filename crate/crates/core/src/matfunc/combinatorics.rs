
use crate::special::{binomial_exact, double_factorial_exact, factorial_exact};
use crate::{CMatrix, Complex, Error, Result};

/// Number of perfect matchings of `2n` vertices, split into two halves of
/// `n`, that use exactly `q` within-half pairs:
/// `f_q = (n!)^2 / ((q!!)^2 (n-q)!)` for even `q <= n`.
pub fn f_coefficient(n: u32, q: u32) -> Result<u128> {
    if q % 2 == 1 {
        return Err(Error::InvalidArgument(alloc::format!("q = {q} must be even")));
    }
    if q > n {
        return Err(Error::InvalidArgument(alloc::format!("q = {q} exceeds n = {n}")));
    }
    let overflow = || Error::Numerical(alloc::format!("f_coefficient({n}, {q}) overflows u128"));
    // C(n,q)^2 ((q-1)!!)^2 (n-q)!
    let choose = binomial_exact(n as u64, q as u64).ok_or_else(overflow)?;
    let inner = double_factorial_exact(q as i64 - 1).ok_or_else(overflow)?;
    let cross = factorial_exact(n - q).ok_or_else(overflow)?;
    choose
        .checked_mul(choose)
        .and_then(|v| v.checked_mul(inner))
        .and_then(|v| v.checked_mul(inner))
        .and_then(|v| v.checked_mul(cross))
        .ok_or_else(overflow)
}

/// `G(N)/N! = sum_q (f_q / N!) beta'^q alpha'^(N-q)` over even `q`.
///
/// Uses `f_0/N! = 1` and `f_{q+2}/f_q = (N-q)(N-q-1)/(q+2)^2`, so no
/// factorial is ever formed.
pub fn g_over_factorial(n: u32, alpha_p: f64, beta_p: f64) -> f64 {
    let mut ratio = 1.0;
    let mut total = 0.0;
    let mut q = 0u32;
    loop {
        total += ratio * beta_p.powi(q as i32) * alpha_p.powi((n - q) as i32);
        if q + 2 > n {
            break;
        }
        let (nq, q2) = ((n - q) as f64, (q + 2) as f64);
        ratio *= nq * (nq - 1.0) / (q2 * q2);
        q += 2;
    }
    total
}

/// `G(N) = Haf(H)` for the two-weight matrix `H` of [`g_matrix`].
pub fn g_function(n: u32, alpha_p: f64, beta_p: f64) -> f64 {
    g_over_factorial(n, alpha_p, beta_p) * crate::special::factorial(n)
}

/// The `2N x 2N` matrix with `beta'` between vertices of the same half and
/// `alpha'` across halves.
pub fn g_matrix(n: usize, alpha_p: f64, beta_p: f64) -> CMatrix {
    CMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let v = if (i < n) == (j < n) { beta_p } else { alpha_p };
        Complex::new(v, 0.0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matfunc::hafnian_bruteforce;

    /// Counts within-half pairs over all perfect matchings of `2n` vertices.
    fn count_by_enumeration(n: usize) -> alloc::vec::Vec<u128> {
        fn rec(free: &mut alloc::vec::Vec<usize>, n: usize, within: usize, out: &mut [u128]) {
            if free.is_empty() {
                out[within] += 1;
                return;
            }
            let a = free.remove(0);
            for pos in 0..free.len() {
                let b = free.remove(pos);
                let w = within + usize::from((a < n) == (b < n));
                rec(free, n, w, out);
                free.insert(pos, b);
            }
            free.insert(0, a);
        }
        let mut out = alloc::vec![0u128; n + 1];
        rec(&mut (0..2 * n).collect(), n, 0, &mut out);
        out
    }

    #[test]
    fn small_values_match_enumeration() {
        assert_eq!(f_coefficient(2, 0).unwrap(), 2);
        assert_eq!(f_coefficient(2, 2).unwrap(), 1);
        assert_eq!(f_coefficient(0, 0).unwrap(), 1);
        for n in 1..=6u32 {
            let counts = count_by_enumeration(n as usize);
            for q in 0..=n {
                if q % 2 == 0 {
                    assert_eq!(f_coefficient(n, q).unwrap(), counts[q as usize], "n={n} q={q}");
                } else {
                    assert_eq!(counts[q as usize], 0);
                }
            }
        }
    }

    #[test]
    fn closed_form_agrees_with_factorial_form() {
        for n in 0..=16u32 {
            for q in (0..=n).step_by(2) {
                let num = factorial_exact(n).unwrap().pow(2);
                let den = double_factorial_exact(q as i64).unwrap().pow(2) * factorial_exact(n - q).unwrap();
                assert_eq!(num % den, 0);
                assert_eq!(f_coefficient(n, q).unwrap(), num / den);
            }
        }
    }

    #[test]
    fn rejects_bad_q() {
        assert!(f_coefficient(4, 1).is_err());
        assert!(f_coefficient(2, 4).is_err());
    }

    #[test]
    fn g_small_cases() {
        let (a, b) = (0.37, 0.81);
        assert_eq!(g_function(0, a, b), 1.0);
        assert!((g_function(1, a, b) - a).abs() < 1e-15);
        assert!((g_function(2, a, b) - (2.0 * a * a + b * b)).abs() < 1e-14);
        for n in 2..=6usize {
            let brute = hafnian_bruteforce(&g_matrix(n, a, b), 1e-12).unwrap().re;
            let g = g_function(n as u32, a, b);
            assert!((g - brute).abs() <= 1e-9 * brute.abs(), "N={n}: {g} vs {brute}");
        }
    }

    #[test]
    fn g_handles_zero_weights() {
        // only within-half matchings survive when alpha' = 0
        assert_eq!(g_function(3, 0.0, 0.5), 0.0);
        assert!((g_function(4, 0.0, 0.5) - 9.0 * 0.0625).abs() < 1e-15);
        assert_eq!(g_function(3, 0.2, 0.0), 6.0 * 0.2f64.powi(3));
    }
}
