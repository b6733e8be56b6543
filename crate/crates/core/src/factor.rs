//! URV factorizations `A = U R Vᵀ`: DDH-URV, PowerURV, QLP and plain CPQR,
//! plus truncation to rank-`k` approximants.

use serde::{Deserialize, Serialize};

use crate::error::{LinalgError, Result};
use crate::matrix::Matrix;
use crate::qr::{cpqr, householder_qr, DEFAULT_BLOCK_SIZE};
use crate::random::{gaussian_matrix, RngSeed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UrvAlgorithm {
    Ddh,
    PowerUrv,
    Qlp,
    Cpqr,
}

impl UrvAlgorithm {
    pub fn name(self) -> &'static str {
        match self {
            UrvAlgorithm::Ddh => "ddh",
            UrvAlgorithm::PowerUrv => "powerurv",
            UrvAlgorithm::Qlp => "qlp",
            UrvAlgorithm::Cpqr => "cpqr",
        }
    }
}

/// How a factorization was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub algorithm: UrvAlgorithm,
    pub q: usize,
    pub reorth: bool,
    pub seed: Option<RngSeed>,
    /// Numerical rank deficiencies met while orthonormalizing samples.
    pub warnings: Vec<String>,
}

impl Provenance {
    fn deterministic(algorithm: UrvAlgorithm) -> Self {
        Provenance {
            algorithm,
            q: 0,
            reorth: false,
            seed: None,
            warnings: Vec::new(),
        }
    }
}

/// `A = U R Vᵀ` with `U` `m x n` orthonormal, `R` `n x n` upper triangular
/// (exact zeros below the diagonal) and `V` `n x n` orthogonal.
#[derive(Debug, Clone)]
pub struct UrvFactorization {
    pub u: Matrix,
    pub r: Matrix,
    pub v: Matrix,
    pub provenance: Provenance,
}

impl UrvFactorization {
    pub fn rank_bound(&self) -> usize {
        self.r.rows()
    }

    pub fn reconstruct(&self) -> Matrix {
        self.u.matmul(&self.r).matmul_tr(&self.v)
    }

    /// `U(:, 1:k)` and `R(1:k, :) Vᵀ`; their product is the rank-`k`
    /// approximant. `k = 0` gives empty factors.
    pub fn truncate(&self, k: usize) -> Result<(Matrix, Matrix)> {
        let n = self.rank_bound();
        if k > n {
            return Err(LinalgError::InvalidArgument(format!(
                "truncation rank {k} exceeds {n}"
            )));
        }
        let uk = self.u.columns(0..k);
        let mk = self.r.block(0..k, 0..n).matmul_tr(&self.v);
        Ok((uk, mk))
    }
}

pub fn truncate(f: &UrvFactorization, k: usize) -> Result<(Matrix, Matrix)> {
    f.truncate(k)
}

pub(crate) fn require_tall(a: &Matrix, what: &str) -> Result<()> {
    if a.rows() < a.cols() {
        return Err(LinalgError::Dimension(format!(
            "{what} needs rows >= cols, got {}x{} (transpose first)",
            a.rows(),
            a.cols()
        )));
    }
    if a.cols() == 0 {
        return Err(LinalgError::Dimension(format!("{what} needs at least one column")));
    }
    Ok(())
}

/// Orthonormal basis for the columns of `y` via unpivoted QR. A zero `y`
/// is a rank collapse; tiny diagonal entries of `R` are recorded as warnings.
pub(crate) fn orthonormalize(y: &Matrix, stage: &str, warnings: &mut Vec<String>) -> Result<Matrix> {
    let norm = y.frobenius_norm();
    if norm == 0.0 {
        return Err(LinalgError::RankCollapse {
            stage: stage.to_string(),
        });
    }
    let f = householder_qr(y, DEFAULT_BLOCK_SIZE)?;
    let threshold = f64::EPSILON * norm;
    let deficient = (0..f.r.rows()).filter(|&i| f.r[(i, i)] < threshold).count();
    if deficient > 0 {
        warnings.push(format!(
            "{stage}: {deficient} of {} directions below eps*|Y|",
            f.r.rows()
        ));
    }
    Ok(f.q)
}

/// `(AᵀA)^q G`, optionally re-orthonormalizing after every application of
/// `A` and of `Aᵀ`. Column spans of every leading block are preserved by the
/// re-orthonormalizations, only the basis changes.
pub(crate) fn power_sample(
    a: &Matrix,
    mut y: Matrix,
    q: usize,
    reorth: bool,
    warnings: &mut Vec<String>,
) -> Result<Matrix> {
    for step in 1..=q {
        let z = a.matmul(&y);
        if reorth {
            let z = orthonormalize(&z, &format!("power step {step} after A"), warnings)?;
            let back = a.tr_matmul(&z);
            y = orthonormalize(&back, &format!("power step {step} after A^T"), warnings)?;
        } else {
            y = a.tr_matmul(&z);
        }
    }
    if y.frobenius_norm() == 0.0 {
        return Err(LinalgError::RankCollapse {
            stage: format!("power iteration with q = {q}"),
        });
    }
    y.check_finite()?;
    Ok(y)
}

/// PowerURV: `V` from the unpivoted QR of `(AᵀA)^q G` with `G` an `n x n`
/// Gaussian draw, then `A V = U R`. With `q = 0` this is exactly DDH-URV.
pub fn power_urv(a: &Matrix, q: usize, reorth: bool, seed: RngSeed) -> Result<UrvFactorization> {
    require_tall(a, "power_urv")?;
    a.check_finite()?;
    let n = a.cols();
    let mut warnings = Vec::new();
    let g = gaussian_matrix(n, n, seed);
    let y = power_sample(a, g, q, reorth, &mut warnings)?;
    let v = orthonormalize(&y, "final QR of the sample", &mut warnings)?;
    let qr = householder_qr(&a.matmul(&v), DEFAULT_BLOCK_SIZE)?;
    Ok(UrvFactorization {
        u: qr.q,
        r: qr.r,
        v,
        provenance: Provenance {
            algorithm: UrvAlgorithm::PowerUrv,
            q,
            reorth,
            seed: Some(seed),
            warnings,
        },
    })
}

/// DDH-URV: `V` Haar orthogonal, then `A V = U R`.
pub fn ddh_urv(a: &Matrix, seed: RngSeed) -> Result<UrvFactorization> {
    let mut f = power_urv(a, 0, true, seed)?;
    f.provenance.algorithm = UrvAlgorithm::Ddh;
    f.provenance.reorth = false;
    Ok(f)
}

/// Stewart's QLP applied to `Aᵀ`: `Aᵀ P₁ = Q₁ R₁`, then
/// `(R₁ P₁ᵀ)ᵀ P₂ = Q₂ R₂`, giving `U = Q₂`, `R = R₂`, `V = Q₁ P₂`.
pub fn qlp(a: &Matrix) -> Result<UrvFactorization> {
    require_tall(a, "qlp")?;
    let first = cpqr(&a.transpose())?;
    // Undo the first permutation: column perm[j] of R₁P₁ᵀ is column j of R₁.
    let (n, m) = first.r.shape();
    let mut unpermuted = Matrix::zeros(n, m);
    for (j, &src) in first.perm.iter().enumerate() {
        unpermuted.col_mut(src).copy_from_slice(first.r.col(j));
    }
    let second = cpqr(&unpermuted.transpose())?;
    Ok(UrvFactorization {
        v: first.q.permute_cols(&second.perm),
        u: second.q,
        r: second.r,
        provenance: Provenance::deterministic(UrvAlgorithm::Qlp),
    })
}

/// Column-pivoted QR viewed as a URV factorization with `V = P`.
pub fn cpqr_urv(a: &Matrix) -> Result<UrvFactorization> {
    require_tall(a, "cpqr_urv")?;
    let f = cpqr(a)?;
    Ok(UrvFactorization {
        v: f.permutation_matrix(),
        u: f.q,
        r: f.r,
        provenance: Provenance::deterministic(UrvAlgorithm::Cpqr),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::haar_orthogonal;

    fn check_urv(a: &Matrix, f: &UrvFactorization, c: f64) {
        let (m, n) = a.shape();
        let eps = f64::EPSILON;
        assert!(f.u.orthogonality_error() <= 10.0 * m.max(n) as f64 * eps);
        assert!(f.v.orthogonality_error() <= 10.0 * n as f64 * eps);
        assert_eq!(f.r.max_abs_below_diagonal(), 0.0);
        let resid = f.reconstruct().sub(a).frobenius_norm();
        assert!(resid <= c * m.max(n) as f64 * eps * a.frobenius_norm(), "resid {resid}");
    }

    #[test]
    fn zero_matrix_has_zero_r() {
        let a = Matrix::zeros(6, 4);
        let f = ddh_urv(&a, RngSeed::new(1, 0)).unwrap();
        assert_eq!(f.r, Matrix::zeros(4, 4));
        assert_eq!(f.reconstruct(), a);
    }

    #[test]
    fn zero_matrix_with_power_steps_collapses() {
        let a = Matrix::zeros(6, 4);
        for reorth in [true, false] {
            assert!(matches!(
                power_urv(&a, 1, reorth, RngSeed::new(1, 0)),
                Err(LinalgError::RankCollapse { .. })
            ));
        }
    }

    #[test]
    fn wide_input_is_rejected() {
        let a = Matrix::zeros(3, 5);
        assert!(matches!(qlp(&a), Err(LinalgError::Dimension(_))));
        assert!(matches!(ddh_urv(&a, RngSeed::default()), Err(LinalgError::Dimension(_))));
    }

    #[test]
    fn qlp_of_sorted_diagonal() {
        let a = Matrix::from_diagonal(3, 3, &[3.0, 2.0, 1.0]);
        let f = qlp(&a).unwrap();
        let d: Vec<f64> = (0..3).map(|i| f.r[(i, i)].abs()).collect();
        assert_eq!(d, vec![3.0, 2.0, 1.0]);
        check_urv(&a, &f, 10.0);
    }

    #[test]
    fn all_algorithms_factor_a_haar_matrix() {
        let a = haar_orthogonal(12, RngSeed::new(5, 5));
        let algs: Vec<UrvFactorization> = vec![
            ddh_urv(&a, RngSeed::new(5, 0)).unwrap(),
            power_urv(&a, 2, true, RngSeed::new(5, 0)).unwrap(),
            power_urv(&a, 2, false, RngSeed::new(5, 0)).unwrap(),
            qlp(&a).unwrap(),
            cpqr_urv(&a).unwrap(),
        ];
        for f in &algs {
            check_urv(&a, f, 100.0);
        }
    }

    #[test]
    fn truncate_bounds() {
        let a = haar_orthogonal(5, RngSeed::new(2, 2));
        let f = qlp(&a).unwrap();
        let (u0, m0) = f.truncate(0).unwrap();
        assert_eq!((u0.shape(), m0.shape()), ((5, 0), (0, 5)));
        assert!(f.truncate(6).is_err());
        let (u5, m5) = truncate(&f, 5).unwrap();
        assert!(u5.matmul(&m5).sub(&a).frobenius_norm() < 1e-13);
    }

    #[test]
    fn provenance_tags() {
        let a = haar_orthogonal(4, RngSeed::new(1, 1));
        let d = ddh_urv(&a, RngSeed::new(3, 0)).unwrap();
        assert_eq!(d.provenance.algorithm, UrvAlgorithm::Ddh);
        assert_eq!(d.provenance.seed, Some(RngSeed::new(3, 0)));
        let p = power_urv(&a, 2, false, RngSeed::new(3, 0)).unwrap();
        assert_eq!((p.provenance.q, p.provenance.reorth), (2, false));
        assert_eq!(qlp(&a).unwrap().provenance.seed, None);
    }
}
