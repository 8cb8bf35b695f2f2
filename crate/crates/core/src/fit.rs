//! Least-squares fits used by the sweep reports.

use crate::{Error, Result};

/// `F ~ 1 - c e^eta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpEtaFit {
    pub c: f64,
    /// Sum of squared residuals.
    pub ssr: f64,
}

/// `y ~ intercept + slope x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    pub ssr: f64,
}

/// `y ~ amplitude e^(-rate x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpDecayFit {
    pub amplitude: f64,
    pub rate: f64,
    pub ssr: f64,
}

fn need(points: &[(f64, f64)], n: usize) -> Result<()> {
    if points.len() < n {
        return Err(Error::InvalidArgument(alloc::format!(
            "fit needs at least {n} points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::InvalidArgument("fit points must be finite".into()));
    }
    Ok(())
}

/// Fits `F = 1 - c e^eta` to `(eta, F)` points; `c` has the closed form
/// `sum (1-F) e^eta / sum e^(2 eta)`.
pub fn fit_exp_eta(points: &[(f64, f64)]) -> Result<ExpEtaFit> {
    need(points, 1)?;
    let num: f64 = points.iter().map(|&(e, f)| (1.0 - f) * e.exp()).sum();
    let den: f64 = points.iter().map(|&(e, _)| (2.0 * e).exp()).sum();
    let c = num / den;
    let ssr = points.iter().map(|&(e, f)| (f - (1.0 - c * e.exp())).powi(2)).sum();
    Ok(ExpEtaFit { c, ssr })
}

/// Ordinary least squares line.
pub fn fit_linear(points: &[(f64, f64)]) -> Result<LinearFit> {
    need(points, 2)?;
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("fit needs distinct x values".into()));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Ok(LinearFit {
        intercept,
        slope,
        ssr,
    })
}

/// Least-squares `a e^(-rate x)`: for each rate the best amplitude is
/// `sum y e^(-rate x) / sum e^(-2 rate x)`; the rate is found by a grid scan
/// over `[-rate_bound, rate_bound]` refined by golden-section search.
pub fn fit_exp_decay(points: &[(f64, f64)], rate_bound: f64) -> Result<ExpDecayFit> {
    need(points, 2)?;
    let eval = |rate: f64| -> (f64, f64) {
        let num: f64 = points.iter().map(|&(x, y)| y * (-rate * x).exp()).sum();
        let den: f64 = points.iter().map(|&(x, _)| (-2.0 * rate * x).exp()).sum();
        let a = num / den;
        let ssr = points.iter().map(|&(x, y)| (y - a * (-rate * x).exp()).powi(2)).sum();
        (a, ssr)
    };
    const GRID: usize = 4000;
    let step = 2.0 * rate_bound / GRID as f64;
    let mut best = (0usize, f64::INFINITY);
    for i in 0..=GRID {
        let ssr = eval(-rate_bound + i as f64 * step).1;
        if ssr < best.1 {
            best = (i, ssr);
        }
    }
    let center = -rate_bound + best.0 as f64 * step;
    let (mut lo, mut hi) = (center - step, center + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if eval(a).1 < eval(b).1 {
            hi = b;
        } else {
            lo = a;
        }
    }
    let mut rate = 0.5 * (lo + hi);
    let (mut amplitude, mut ssr) = eval(rate);
    if best.1 < ssr {
        rate = center;
        (amplitude, ssr) = eval(rate);
    }
    Ok(ExpDecayFit { amplitude, rate, ssr })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn recovers_exact_models() {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| {
            let e = i as f64 / 10.0;
            (e, 1.0 - 0.03 * e.exp())
        }).collect();
        let f = fit_exp_eta(&pts).unwrap();
        assert!((f.c - 0.03).abs() < 1e-14 && f.ssr < 1e-28);

        let pts: Vec<(f64, f64)> = (3..10).map(|n| (n as f64, 0.9 - 0.07 * n as f64)).collect();
        let l = fit_linear(&pts).unwrap();
        assert!((l.slope + 0.07).abs() < 1e-12 && (l.intercept - 0.9).abs() < 1e-12);

        let pts: Vec<(f64, f64)> = (3..10).map(|n| (n as f64, 2.0 * (-0.3 * n as f64).exp())).collect();
        let d = fit_exp_decay(&pts, 5.0).unwrap();
        assert!((d.rate - 0.3).abs() < 1e-7, "{d:?}");
        assert!((d.amplitude - 2.0).abs() < 1e-6);
    }

    #[test]
    fn linear_data_prefers_linear_model() {
        let pts: Vec<(f64, f64)> = (3..10).map(|n| (n as f64, 0.95 - 0.1 * n as f64)).collect();
        assert!(fit_linear(&pts).unwrap().ssr < fit_exp_decay(&pts, 5.0).unwrap().ssr);
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(fit_linear(&[(1.0, 2.0)]).is_err());
        assert!(fit_linear(&[(1.0, 2.0), (1.0, 3.0)]).is_err());
        assert!(fit_exp_eta(&[]).is_err());
        assert!(fit_exp_decay(&[(0.0, f64::NAN), (1.0, 1.0)], 1.0).is_err());
    }
}
