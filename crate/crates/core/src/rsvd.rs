//! Randomized SVD sharing the PowerURV sample.

use serde::{Deserialize, Serialize};

use crate::error::{LinalgError, Result};
use crate::factor::{orthonormalize, power_sample, require_tall};
use crate::matrix::Matrix;
use crate::random::{gaussian_matrix, RngSeed};
use crate::svd::svd;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RsvdParams {
    pub ell: usize,
    pub q: usize,
    pub reorth: bool,
    pub seed: RngSeed,
}

/// `A ≈ U diag(sigma) Vᵀ` with `ell` terms.
#[derive(Debug, Clone)]
pub struct RsvdFactorization {
    pub u: Matrix,
    pub sigma: Vec<f64>,
    pub v: Matrix,
    pub params: RsvdParams,
    pub warnings: Vec<String>,
}

impl RsvdFactorization {
    /// `U(:, 1:k)` and `diag(sigma(1:k)) V(:, 1:k)ᵀ`.
    pub fn truncate(&self, k: usize) -> Result<(Matrix, Matrix)> {
        let ell = self.sigma.len();
        if k > ell {
            return Err(LinalgError::InvalidArgument(format!(
                "truncation rank {k} exceeds ell = {ell}"
            )));
        }
        let uk = self.u.columns(0..k);
        let mut mk = self.v.columns(0..k).transpose();
        for j in 0..mk.cols() {
            for i in 0..k {
                mk[(i, j)] *= self.sigma[i];
            }
        }
        Ok((uk, mk))
    }
}

/// Randomized SVD with `q` power steps.
///
/// The Gaussian test matrix is `gaussian_matrix(n, ell, seed)`, which is the
/// first `ell` columns of the `n x n` draw `power_urv` makes with the same
/// seed. The sample `A (AᵀA)^q G` follows the same re-orthonormalization
/// policy as `power_urv`.
pub fn rsvd(a: &Matrix, ell: usize, q: usize, reorth: bool, seed: RngSeed) -> Result<RsvdFactorization> {
    require_tall(a, "rsvd")?;
    a.check_finite()?;
    let (m, n) = a.shape();
    if ell == 0 || ell >= m.min(n) {
        return Err(LinalgError::InvalidArgument(format!(
            "ell must satisfy 1 <= ell < min(m, n) = {}, got {ell}",
            m.min(n)
        )));
    }
    let mut warnings = Vec::new();
    let g = gaussian_matrix(n, ell, seed);
    let right = power_sample(a, g, q, reorth, &mut warnings)?;
    let y = a.matmul(&right);
    let basis = orthonormalize(&y, "range basis", &mut warnings)?;
    // SVD of the ell x n projection, taken on its tall transpose.
    let projected_t = a.tr_matmul(&basis);
    let small = svd(&projected_t)?;
    Ok(RsvdFactorization {
        u: basis.matmul(&small.v),
        sigma: small.sigma,
        v: small.u,
        params: RsvdParams { ell, q, reorth, seed },
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::haar_orthogonal;

    #[test]
    fn ell_out_of_range_is_rejected() {
        let a = haar_orthogonal(6, RngSeed::new(1, 1));
        for ell in [0, 6, 7] {
            assert!(matches!(
                rsvd(&a, ell, 0, true, RngSeed::default()),
                Err(LinalgError::InvalidArgument(_))
            ));
        }
    }

    #[test]
    fn factors_have_expected_shapes_and_orthonormality() {
        let a = crate::random::gaussian_matrix(30, 20, RngSeed::new(4, 4));
        let f = rsvd(&a, 8, 1, true, RngSeed::new(4, 0)).unwrap();
        assert_eq!(f.u.shape(), (30, 8));
        assert_eq!(f.v.shape(), (20, 8));
        assert!(f.u.orthogonality_error() <= 10.0 * 30.0 * f64::EPSILON);
        assert!(f.v.orthogonality_error() <= 10.0 * 30.0 * f64::EPSILON);
        assert!(f.sigma.windows(2).all(|w| w[0] >= w[1]));
        let (uk, mk) = f.truncate(3).unwrap();
        assert_eq!((uk.shape(), mk.shape()), ((30, 3), (3, 20)));
        assert!(f.truncate(9).is_err());
    }
}
