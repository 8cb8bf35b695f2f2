//! Matrix functions: Hafnians, the two-weight Hafnian closed form, the
//! Torontonian and positive-definite determinants.

mod combinatorics;
mod hafnian;
mod torontonian;

pub use crate::linalg::det_pd;
pub use combinatorics::{f_coefficient, g_function, g_matrix, g_over_factorial};
pub use hafnian::{hafnian, hafnian_bruteforce, MAX_BRUTEFORCE_DIM};
pub use torontonian::{torontonian, torontonian_chunk, torontonian_from_inverse};
