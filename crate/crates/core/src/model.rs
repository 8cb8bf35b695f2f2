//! Covariances, Q-function matrices and Hafnian kernels of the
//! indistinguishable mode and the virtual modes.
//!
//! Complex matrices use the ordering `(a_1..a_K, a_1^dag..a_K^dag)`. Mode
//! index `0` is the indistinguishable mode; `m = 1..=M` is the virtual mode
//! fed from input port `m` (column `m-1` of `T`).

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::linalg::{det_pd, select_paired};
use crate::{CMatrix, Error, ExperimentConfig, Interferometer, OutputPattern, Result};

/// Scalar coefficients of the Q and kernel matrices.
///
/// `alpha_*` is a mean photon number per squeezed input and `beta_*` the
/// matching pair amplitude; primed values are the kernel coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeCoefficients {
    pub alpha_i: f64,
    pub beta_i: f64,
    pub alpha_d: f64,
    pub beta_d: f64,
    pub alpha_i_p: f64,
    pub beta_i_p: f64,
    pub alpha_d_p: f64,
    pub beta_d_p: f64,
}

/// Kernel coefficients from Q coefficients, inverting `I + [[a, b], [b, a]]`:
/// `a' = 1 - (1+a)/((1+a)^2 - b^2)`, `b' = b/((1+a)^2 - b^2)`.
pub fn primed(alpha: f64, beta: f64) -> (f64, f64) {
    let den = (1.0 + alpha) * (1.0 + alpha) - beta * beta;
    (1.0 - (1.0 + alpha) / den, beta / den)
}

/// Q and kernel coefficients for transmission `eta` into a mode.
fn mode_terms(eta: f64, r: f64) -> (f64, f64, f64, f64) {
    let (s, c) = (r.sinh(), r.cosh());
    let s2 = s * s;
    let den = 1.0 + eta * (2.0 - eta) * s2;
    (eta * s2, eta * s * c, (1.0 - eta) * eta * s2 / den, eta * s * c / den)
}

/// All eight mode coefficients of `cfg`.
pub fn coefficients(cfg: &ExperimentConfig) -> ModeCoefficients {
    let eta_t = cfg.eta_t();
    let (alpha_i, beta_i, alpha_i_p, beta_i_p) = mode_terms(eta_t * cfg.eta_ind, cfg.squeezing);
    let (alpha_d, beta_d, alpha_d_p, beta_d_p) =
        mode_terms(eta_t * (1.0 - cfg.eta_ind), cfg.squeezing);
    ModeCoefficients {
        alpha_i,
        beta_i,
        alpha_d,
        beta_d,
        alpha_i_p,
        beta_i_p,
        alpha_d_p,
        beta_d_p,
    }
}

/// Diagonal quadrature variances `(X, Y)` of a squeezed input after
/// transmission `eta`.
pub fn quadrature_variances(eta: f64, r: f64) -> (f64, f64) {
    (eta * (2.0 * r).exp() + 1.0 - eta, eta * (-2.0 * r).exp() + 1.0 - eta)
}

/// Real `2K x 2K` covariances in `(q_1, p_1, ..., q_K, p_K)` ordering for
/// modes `0..=M`, before the interferometer.
pub fn build_real_covariances(cfg: &ExperimentConfig) -> Result<Vec<DMatrix<f64>>> {
    cfg.validate()?;
    let k = cfg.ports;
    let eta_t = cfg.eta_t();
    let (xi, yi) = quadrature_variances(eta_t * cfg.eta_ind, cfg.squeezing);
    let (xd, yd) = quadrature_variances(eta_t * (1.0 - cfg.eta_ind), cfg.squeezing);
    let mut out = Vec::with_capacity(cfg.inputs + 1);
    let mut v0 = DMatrix::<f64>::identity(2 * k, 2 * k);
    for m in 0..cfg.inputs {
        v0[(2 * m, 2 * m)] = xi;
        v0[(2 * m + 1, 2 * m + 1)] = yi;
    }
    out.push(v0);
    for m in 0..cfg.inputs {
        let mut v = DMatrix::<f64>::identity(2 * k, 2 * k);
        v[(2 * m, 2 * m)] = xd;
        v[(2 * m + 1, 2 * m + 1)] = yd;
        out.push(v);
    }
    Ok(out)
}

/// Q-function covariance of one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct QMatrix {
    pub mode: usize,
    pub data: CMatrix,
}

/// Hafnian kernel `A` of one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub mode: usize,
    pub data: CMatrix,
}

impl KernelMatrix {
    pub fn ports(&self) -> usize {
        self.data.nrows() / 2
    }
}

fn check_model_inputs(cfg: &ExperimentConfig, t: &Interferometer, mode: usize) -> Result<()> {
    cfg.validate()?;
    if t.ports() != cfg.ports {
        return Err(Error::DimensionMismatch {
            expected: cfg.ports,
            found: t.ports(),
        });
    }
    if mode > cfg.inputs {
        return Err(Error::InvalidArgument(alloc::format!(
            "mode index {mode} outside [0, {}]",
            cfg.inputs
        )));
    }
    Ok(())
}

/// Builds `[[x * P, y * S], [y * S*, x * P*]]`-shaped sums over the given
/// input columns, with `P = t t^dag` and `S = t t^T`.
fn block_sum(t: &CMatrix, columns: &[usize], tl: (f64, bool), tr: (f64, bool)) -> CMatrix {
    // tl: coefficient of t t^dag (conjugated if flag), tr: of t t^T
    let k = t.nrows();
    let mut out = CMatrix::zeros(2 * k, 2 * k);
    for &m in columns {
        let col = t.column(m);
        for i in 0..k {
            for j in 0..k {
                let herm = col[i] * col[j].conj();
                let sym = col[i] * col[j];
                let (p, pc) = if tl.1 { (herm.conj(), herm) } else { (herm, herm.conj()) };
                let (s, sc) = if tr.1 { (sym.conj(), sym) } else { (sym, sym.conj()) };
                out[(i, j)] += p * tl.0;
                out[(i, j + k)] += s * tr.0;
                out[(i + k, j)] += sc * tr.0;
                out[(i + k, j + k)] += pc * tl.0;
            }
        }
    }
    out
}

/// Q matrix of mode `mode`:
/// `Q0 = I + [T + T*] [[Da, Db], [Db, Da]] [T^dag + T^T]` and
/// `Qm = I + [[a_d E2, b_d E1], [b_d E1*, a_d E2*]]` with `E1 = t t^T`,
/// `E2 = t t^dag` for column `t` of input `m`.
pub fn q_matrix(cfg: &ExperimentConfig, t: &Interferometer, mode: usize) -> Result<QMatrix> {
    check_model_inputs(cfg, t, mode)?;
    let c = coefficients(cfg);
    let (alpha, beta, cols): (f64, f64, Vec<usize>) = if mode == 0 {
        (c.alpha_i, c.beta_i, (0..cfg.inputs).collect())
    } else {
        (c.alpha_d, c.beta_d, alloc::vec![mode - 1])
    };
    let k = cfg.ports;
    let data = CMatrix::identity(2 * k, 2 * k) + block_sum(t.matrix(), &cols, (alpha, false), (beta, false));
    Ok(QMatrix { mode, data })
}

/// Kernel of mode `mode`:
/// `A0 = [T* + T] [[Db', Da'], [Da', Db']] [T^dag + T^T]` and
/// `Am = [[b_d' E1*, a_d' E2*], [a_d' E2, b_d' E1]]`.
pub fn kernel_matrix(cfg: &ExperimentConfig, t: &Interferometer, mode: usize) -> Result<KernelMatrix> {
    check_model_inputs(cfg, t, mode)?;
    let c = coefficients(cfg);
    let (alpha_p, beta_p, cols): (f64, f64, Vec<usize>) = if mode == 0 {
        (c.alpha_i_p, c.beta_i_p, (0..cfg.inputs).collect())
    } else {
        (c.alpha_d_p, c.beta_d_p, alloc::vec![mode - 1])
    };
    let k = cfg.ports;
    let raw = block_sum(t.matrix(), &cols, (alpha_p, true), (beta_p, true));
    // raw = [[a' E2*, b' E1*], [b' E1, a' E2]]; swap block columns.
    let data = CMatrix::from_fn(2 * k, 2 * k, |i, j| raw[(i, (j + k) % (2 * k))]);
    Ok(KernelMatrix { mode, data })
}

/// `A_s`: rows and columns `(L, L+K)` of `A`, where `L` lists port `k`
/// `s_k` times.
pub fn select_by_pattern(a: &KernelMatrix, s: &OutputPattern) -> Result<CMatrix> {
    s.check_ports(a.ports())?;
    Ok(select_paired(&a.data, &s.repeated_ports(), a.ports()))
}

/// A configured experiment with its interferometer and the cached matrices
/// every probability needs.
#[derive(Debug, Clone)]
pub struct GbsModel {
    cfg: ExperimentConfig,
    interferometer: Interferometer,
    coeffs: ModeCoefficients,
    q0: QMatrix,
    kernel0: KernelMatrix,
    det_q0: f64,
    det_qm: f64,
    /// `weights[m][j] = |T_{j,m}|^2` for input columns `m < M`.
    weights: Vec<Vec<f64>>,
}

impl GbsModel {
    pub fn new(cfg: ExperimentConfig, interferometer: Interferometer) -> Result<Self> {
        check_model_inputs(&cfg, &interferometer, 0)?;
        let coeffs = coefficients(&cfg);
        let q0 = q_matrix(&cfg, &interferometer, 0)?;
        let kernel0 = kernel_matrix(&cfg, &interferometer, 0)?;
        let det_q0 = det_pd(&q0.data, cfg.tol)?;
        let det_qm = (1.0 + coeffs.alpha_d).powi(2) - coeffs.beta_d.powi(2);
        let weights = (0..cfg.inputs).map(|m| interferometer.column_weights(m)).collect();
        Ok(GbsModel {
            cfg,
            interferometer,
            coeffs,
            q0,
            kernel0,
            det_q0,
            det_qm,
            weights,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    pub fn interferometer(&self) -> &Interferometer {
        &self.interferometer
    }

    pub fn coefficients(&self) -> &ModeCoefficients {
        &self.coeffs
    }

    pub fn ports(&self) -> usize {
        self.cfg.ports
    }

    pub fn inputs(&self) -> usize {
        self.cfg.inputs
    }

    pub fn tol(&self) -> f64 {
        self.cfg.tol
    }

    pub fn q0(&self) -> &QMatrix {
        &self.q0
    }

    pub fn kernel0(&self) -> &KernelMatrix {
        &self.kernel0
    }

    /// `det Q^(0)`.
    pub fn det_q0(&self) -> f64 {
        self.det_q0
    }

    /// `det Q^(m) = (1 + a_d)^2 - b_d^2`, the same for every virtual mode.
    pub fn det_qm(&self) -> f64 {
        self.det_qm
    }

    /// `|T_{j,m-1}|^2` over output ports `j` for virtual mode `m`.
    pub fn virtual_weights(&self, m: usize) -> &[f64] {
        &self.weights[m - 1]
    }

    pub fn q_matrix(&self, mode: usize) -> Result<QMatrix> {
        q_matrix(&self.cfg, &self.interferometer, mode)
    }

    pub fn kernel_matrix(&self, mode: usize) -> Result<KernelMatrix> {
        kernel_matrix(&self.cfg, &self.interferometer, mode)
    }

    /// Stable 64-bit fingerprint of the configuration and interferometer.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv::new();
        h.word(self.cfg.ports as u64);
        h.word(self.cfg.inputs as u64);
        h.word(self.cfg.squeezing.to_bits());
        h.word(self.cfg.eta_t().to_bits());
        h.word(self.cfg.eta_ind.to_bits());
        for z in self.interferometer.matrix().iter() {
            h.word(z.re.to_bits());
            h.word(z.im.to_bits());
        }
        h.0
    }
}

struct Fnv(u64);

impl Fnv {
    fn new() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }

    fn word(&mut self, w: u64) {
        for b in w.to_le_bytes() {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermiticity_deviation, inverse, symmetry_deviation};
    use crate::{haar_random_unitary, Complex};

    fn cfg(k: usize, m: usize, r: f64, eta_t: f64, eta_ind: f64) -> ExperimentConfig {
        ExperimentConfig::new(k, m, r, eta_t, eta_ind).unwrap()
    }

    fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
        (a - b).iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    #[test]
    fn vacuum_matrices() {
        let c = cfg(4, 3, 0.0, 0.8, 0.4);
        let t = haar_random_unitary(4, 3).unwrap();
        for v in build_real_covariances(&c).unwrap() {
            assert_eq!(v, DMatrix::identity(8, 8));
        }
        let co = coefficients(&c);
        for x in [co.alpha_i, co.beta_i, co.alpha_d, co.beta_d, co.alpha_i_p, co.beta_i_p, co.alpha_d_p, co.beta_d_p] {
            assert_eq!(x, 0.0);
        }
        for mode in 0..=3 {
            assert_eq!(q_matrix(&c, &t, mode).unwrap().data, CMatrix::identity(8, 8));
            assert_eq!(kernel_matrix(&c, &t, mode).unwrap().data, CMatrix::zeros(8, 8));
        }
    }

    #[test]
    fn fully_indistinguishable_has_empty_virtual_modes() {
        let c = cfg(3, 2, 0.7, 0.9, 1.0);
        let co = coefficients(&c);
        assert_eq!((co.alpha_d, co.beta_d, co.alpha_d_p, co.beta_d_p), (0.0, 0.0, 0.0, 0.0));
        let covs = build_real_covariances(&c).unwrap();
        for v in &covs[1..] {
            assert_eq!(*v, DMatrix::identity(6, 6));
        }
        let t = haar_random_unitary(3, 5).unwrap();
        assert_eq!(kernel_matrix(&c, &t, 2).unwrap().data, CMatrix::zeros(6, 6));
    }

    #[test]
    fn reference_values() {
        // 30-digit evaluations of the closed forms at r = 0.9, eta_t = eta_ind = 0.9
        let c = cfg(2, 1, 0.9, 0.9, 0.9);
        let covs = build_real_covariances(&c).unwrap();
        assert!((covs[0][(0, 0)] - 5.090_214_446_174_486).abs() < 1e-12);
        assert!((covs[0][(1, 1)] - 0.323_892_099_459_485_1).abs() < 1e-12);
        let co = coefficients(&c);
        assert!((co.alpha_i - 0.853_526_636_408_492_9).abs() < 1e-12);
        assert!((co.beta_i - 1.191_580_586_678_750_3).abs() < 1e-12);
        assert!((co.alpha_d - 0.094_836_292_934_277_0).abs() < 1e-12);
        assert!((co.beta_d - 0.132_397_842_964_305_6).abs() < 1e-12);
        assert!((co.alpha_d_p - 0.073_066_039_947_326_82).abs() < 1e-12);
        assert!((co.beta_d_p - 0.112_093_522_724_226).abs() < 1e-12);
        assert!((co.alpha_i_p - 0.080_453_602_534_914_11).abs() < 1e-12);
        assert!((co.beta_i_p - 0.591_150_736_248_873_4).abs() < 1e-12);
    }

    #[test]
    fn primed_map_reproduces_primed_pairs() {
        for &(r, et, ei) in &[(0.3, 1.0, 0.5), (0.9, 0.9, 0.9), (1.4, 0.6, 0.2), (0.5, 1.0, 0.0)] {
            let co = coefficients(&cfg(2, 1, r, et, ei));
            let (ap, bp) = primed(co.alpha_i, co.beta_i);
            assert!((ap - co.alpha_i_p).abs() < 1e-12 && (bp - co.beta_i_p).abs() < 1e-12);
            let (ap, bp) = primed(co.alpha_d, co.beta_d);
            assert!((ap - co.alpha_d_p).abs() < 1e-12 && (bp - co.beta_d_p).abs() < 1e-12);
        }
    }

    #[test]
    fn mean_photon_number_matches_real_covariance() {
        // <a^dag a> = (V_qq + V_pp - 2) / 4 per squeezed port
        let c = cfg(3, 2, 0.8, 0.85, 0.7);
        let covs = build_real_covariances(&c).unwrap();
        let co = coefficients(&c);
        assert!(((covs[0][(0, 0)] + covs[0][(1, 1)] - 2.0) / 4.0 - co.alpha_i).abs() < 1e-12);
        assert!(((covs[2][(2, 2)] + covs[2][(3, 3)] - 2.0) / 4.0 - co.alpha_d).abs() < 1e-12);
        let ident = Interferometer::new(CMatrix::identity(3, 3), 1e-12).unwrap();
        let q0 = q_matrix(&c, &ident, 0).unwrap().data;
        for j in 0..3 {
            let expect = if j < 2 { 1.0 + co.alpha_i } else { 1.0 };
            assert!((q0[(j, j)].re - expect).abs() < 1e-12);
        }
        // total photon number is preserved by any unitary
        let t = haar_random_unitary(3, 11).unwrap();
        let q0 = q_matrix(&c, &t, 0).unwrap().data;
        let trace: f64 = (0..3).map(|j| q0[(j, j)].re - 1.0).sum();
        assert!((trace - 2.0 * co.alpha_i).abs() < 1e-12);
    }

    #[test]
    fn q_matrices_are_hermitian_positive_with_closed_form_virtual_det() {
        let c = cfg(5, 3, 0.9, 0.9, 0.6);
        let t = haar_random_unitary(5, 21).unwrap();
        let co = coefficients(&c);
        for mode in 0..=3 {
            let q = q_matrix(&c, &t, mode).unwrap().data;
            assert!(hermiticity_deviation(&q) < 1e-12);
            let det = det_pd(&q, 1e-10).unwrap();
            assert!(det >= 1.0 - 1e-10);
            let eig = nalgebra::SymmetricEigen::new(q.clone()).eigenvalues;
            assert!(eig.iter().all(|&e| e > 0.0));
            if mode > 0 {
                let closed = (1.0 + co.alpha_d).powi(2) - co.beta_d.powi(2);
                assert!((det - closed).abs() < 1e-10 * closed);
            } else {
                let closed = ((1.0 + co.alpha_i).powi(2) - co.beta_i.powi(2)).powi(3);
                assert!((det - closed).abs() < 1e-10 * closed);
            }
        }
    }

    #[test]
    fn kernel_equals_swap_times_one_minus_inverse() {
        let c = cfg(4, 3, 0.9, 0.8, 0.7);
        let t = haar_random_unitary(4, 2).unwrap();
        for mode in 0..=3 {
            let q = q_matrix(&c, &t, mode).unwrap().data;
            let a = kernel_matrix(&c, &t, mode).unwrap().data;
            assert!(symmetry_deviation(&a) < 1e-12);
            let b = CMatrix::identity(8, 8) - inverse(&q).unwrap();
            let swapped = CMatrix::from_fn(8, 8, |i, j| b[((i + 4) % 8, j)]);
            assert!(max_diff(&a, &swapped) < 1e-8, "mode {mode}");
        }
    }

    #[test]
    fn indistinguishable_limit_is_lossy_gbs() {
        let (k, m, r, eta) = (4, 2, 0.6, 0.75);
        let c = cfg(k, m, r, eta, 1.0);
        let t = haar_random_unitary(k, 9).unwrap();
        let tm = t.matrix();
        let (alpha, beta) = (eta * r.sinh().powi(2), eta * r.sinh() * r.cosh());
        let mut w = CMatrix::zeros(2 * k, 2 * k);
        let mut d = CMatrix::zeros(2 * k, 2 * k);
        for i in 0..k {
            for j in 0..k {
                w[(i, j)] = tm[(i, j)];
                w[(i + k, j + k)] = tm[(i, j)].conj();
            }
        }
        for i in 0..m {
            d[(i, i)] = Complex::new(alpha, 0.0);
            d[(i + k, i + k)] = Complex::new(alpha, 0.0);
            d[(i, i + k)] = Complex::new(beta, 0.0);
            d[(i + k, i)] = Complex::new(beta, 0.0);
        }
        let lossy = CMatrix::identity(2 * k, 2 * k) + &w * d * w.adjoint();
        let q0 = q_matrix(&c, &t, 0).unwrap().data;
        assert!(max_diff(&q0, &lossy) < 1e-13);
        for mode in 1..=m {
            assert_eq!(q_matrix(&c, &t, mode).unwrap().data, CMatrix::identity(2 * k, 2 * k));
        }
    }

    #[test]
    fn pattern_selection() {
        let c = cfg(2, 1, 0.5, 1.0, 0.5);
        let t = haar_random_unitary(2, 4).unwrap();
        let a = kernel_matrix(&c, &t, 0).unwrap();
        let ones = select_by_pattern(&a, &OutputPattern::new(alloc::vec![1, 1])).unwrap();
        assert_eq!(ones, a.data);
        let empty = select_by_pattern(&a, &OutputPattern::zeros(2)).unwrap();
        assert_eq!(empty.nrows(), 0);
        let two = select_by_pattern(&a, &OutputPattern::new(alloc::vec![2, 0])).unwrap();
        let idx = [0usize, 0, 2, 2];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(two[(i, j)], a.data[(idx[i], idx[j])]);
            }
        }
        assert!(select_by_pattern(&a, &OutputPattern::zeros(3)).is_err());
    }

    #[test]
    fn model_rejects_mismatched_interferometer() {
        let c = cfg(3, 1, 0.5, 1.0, 0.5);
        let t = haar_random_unitary(2, 4).unwrap();
        assert!(GbsModel::new(c, t).is_err());
    }
}
