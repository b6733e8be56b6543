//! Reproducible Gaussian and Haar-orthogonal matrices.
//!
//! The bit stream is ChaCha20 keyed by the 64-bit seed (little-endian in the
//! first eight key bytes, remaining key bytes zero) with the ChaCha stream id
//! set to `stream`. Normal deviates come from the Box–Muller transform, both
//! outputs of each pair used in order, with `libm` transcendental functions so
//! the values do not depend on the platform math library. Matrices are filled
//! in column-major order, so `gaussian_matrix(m, k, s)` is exactly the first
//! `k` columns of `gaussian_matrix(m, n, s)` for any `n >= k`.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::qr::{householder_qr, DEFAULT_BLOCK_SIZE};

/// Seed plus stream id; distinct streams give independent draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct RngSeed {
    pub seed: u64,
    pub stream: u64,
}

impl RngSeed {
    pub const fn new(seed: u64, stream: u64) -> Self {
        RngSeed { seed, stream }
    }

    /// Same seed, stream shifted by `offset`.
    pub const fn offset(self, offset: u64) -> Self {
        RngSeed {
            seed: self.seed,
            stream: self.stream.wrapping_add(offset),
        }
    }
}

/// Sequence of standard normal deviates.
pub struct GaussianStream {
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: RngSeed) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.seed.to_le_bytes());
        let mut rng = ChaCha20Rng::from_seed(key);
        rng.set_stream(seed.stream);
        GaussianStream { rng, spare: None }
    }

    /// Uniform on `(0, 1]` with 53 random bits.
    fn open_unit(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.open_unit();
        let u2 = (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let radius = libm::sqrt(-2.0 * libm::log(u1));
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(radius * libm::sin(angle));
        radius * libm::cos(angle)
    }
}

/// `m x n` matrix of i.i.d. standard normals, filled column by column.
pub fn gaussian_matrix(m: usize, n: usize, seed: RngSeed) -> Matrix {
    let mut stream = GaussianStream::new(seed);
    let data = (0..m * n).map(|_| stream.next_normal()).collect();
    Matrix::from_col_major(m, n, data).expect("length matches by construction")
}

/// Haar-distributed `n x n` orthogonal matrix: the `Q` factor of a Gaussian
/// matrix under the `diag(R) >= 0` sign convention.
pub fn haar_orthogonal(n: usize, seed: RngSeed) -> Matrix {
    let g = gaussian_matrix(n, n, seed);
    householder_qr(&g, DEFAULT_BLOCK_SIZE)
        .expect("Gaussian samples are finite and square")
        .q
}
