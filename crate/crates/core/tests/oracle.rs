//! Gaussian engine against the independent Fock-space oracle.

use gbs_core::fock::{fock_pnr_distribution, threshold_from_pnr, FockGuard};
use gbs_core::pattern::compositions;
use gbs_core::{haar_random_unitary, ClickPattern, ExperimentConfig, GbsModel, OutputPattern};

fn compare(k: usize, m: usize, r: f64, eta_t: f64, eta_ind: f64, seed: u64, guard: FockGuard) -> (f64, f64) {
    let cfg = ExperimentConfig::new(k, m, r, eta_t, eta_ind).unwrap();
    let t = haar_random_unitary(k, seed).unwrap();
    let oracle = fock_pnr_distribution(&cfg, &t, None, guard).unwrap();
    let model = GbsModel::new(cfg, t).unwrap();
    let mut pnr_err = 0.0f64;
    for n in 0..=4 {
        for c in compositions(n, k) {
            let s = OutputPattern::new(c);
            let a = model.prob_total_exact(&s).unwrap();
            let b = oracle.prob(&s).unwrap();
            pnr_err = pnr_err.max((a - b).abs());
        }
    }
    let clicks = threshold_from_pnr(oracle.probs());
    let mut thr_err = 0.0f64;
    for mask in 0..1u64 << k {
        let u = ClickPattern::from_mask(mask, k);
        let a = model.prob_threshold(&u).unwrap();
        let b = clicks.get(&u).copied().unwrap_or(0.0);
        thr_err = thr_err.max((a - b).abs());
    }
    (pnr_err, thr_err)
}

#[test]
fn two_port_grid_agrees_with_fock_oracle() {
    for r in [0.3, 0.6] {
        for eta_t in [0.7, 1.0] {
            for eta_ind in [0.0, 0.5, 1.0] {
                let (p, t) = compare(2, 1, r, eta_t, eta_ind, 17, FockGuard::default());
                assert!(p < 1e-6 && t < 1e-6, "r={r} eta_t={eta_t} eta_ind={eta_ind}: {p:e} {t:e}");
            }
        }
    }
}

#[test]
fn three_ports_two_inputs_agree_with_fock_oracle() {
    let guard = FockGuard { max_ports: 3, max_inputs: 2 };
    let (p, t) = compare(3, 2, 0.25, 0.8, 0.6, 5, guard);
    assert!(p < 1e-6 && t < 1e-6, "{p:e} {t:e}");
}
