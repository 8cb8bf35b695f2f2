//! Linear interferometers and Haar-random generation.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::unitarity_deviation;
use crate::{CMatrix, Complex, Error, Result};

/// Default unitarity tolerance for validated interferometers.
pub const UNITARY_TOL: f64 = 1e-10;

/// A K x K unitary; column `m` holds the output amplitudes of input port `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Interferometer {
    matrix: CMatrix,
    tol: f64,
}

impl Interferometer {
    /// Wraps `matrix`, rejecting it unless `max |T^dag T - I| <= tol`.
    pub fn new(matrix: CMatrix, tol: f64) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        if matrix.nrows() == 0 {
            return Err(Error::InvalidArgument("interferometer needs K >= 1".into()));
        }
        let deviation = unitarity_deviation(&matrix);
        if !(deviation <= tol) {
            return Err(Error::NotUnitary { deviation, tol });
        }
        Ok(Interferometer { matrix, tol })
    }

    pub fn ports(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// `|T_{j,m}|^2` for all output ports `j` of input column `m`.
    pub fn column_weights(&self, m: usize) -> Vec<f64> {
        self.matrix.column(m).iter().map(|z| z.norm_sqr()).collect()
    }

    /// Relabels output ports: row `i` of the result is row `perm[i]`.
    pub fn permuted_outputs(&self, perm: &[usize]) -> Result<Self> {
        let k = self.ports();
        let m = CMatrix::from_fn(k, k, |i, j| self.matrix[(perm[i], j)]);
        Interferometer::new(m, self.tol)
    }
}

/// Haar-distributed K x K unitary, deterministic in `seed`.
///
/// QR of a complex Ginibre matrix with the phases of `diag(R)` moved into `Q`.
pub fn haar_random_unitary(ports: usize, seed: u64) -> Result<Interferometer> {
    if ports == 0 {
        return Err(Error::InvalidArgument("K must be at least 1".into()));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let scale = core::f64::consts::FRAC_1_SQRT_2;
    let z = CMatrix::from_fn(ports, ports, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex::new(re * scale, im * scale)
    });
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..ports {
        let d = r[(j, j)];
        let n = d.norm();
        let phase = if n > 0.0 { d / n } else { Complex::new(1.0, 0.0) };
        for i in 0..ports {
            q[(i, j)] *= phase;
        }
    }
    Interferometer::new(q, UNITARY_TOL)
}
