//! Factorials and related integer helpers.


/// `n!` as an exact integer, `None` on `u128` overflow.
pub fn factorial_exact(n: u32) -> Option<u128> {
    (1..=n as u128).try_fold(1u128, |acc, k| acc.checked_mul(k))
}

/// `n!!` (double factorial) with `0!! = (-1)!! = 1`; `None` on overflow.
pub fn double_factorial_exact(n: i64) -> Option<u128> {
    let mut acc = 1u128;
    let mut k = n;
    while k > 1 {
        acc = acc.checked_mul(k as u128)?;
        k -= 2;
    }
    Some(acc)
}

/// `C(n, k)` as an exact integer, `None` on overflow.
pub fn binomial_exact(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc = 1u128;
    for i in 0..k as u128 {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = acc.checked_mul(n as u128 - i)? / (i + 1);
    }
    Some(acc)
}

/// `ln(n!)`; exact integer products up to 20!, log-gamma above.
pub fn ln_factorial(n: u32) -> f64 {
    if n <= 20 {
        (factorial_exact(n).unwrap() as f64).ln()
    } else {
        libm::lgamma(n as f64 + 1.0)
    }
}

/// `n!` as a float; exact integer arithmetic up to 20!, log-gamma above.
pub fn factorial(n: u32) -> f64 {
    if n <= 20 {
        factorial_exact(n).unwrap() as f64
    } else {
        ln_factorial(n).exp()
    }
}
