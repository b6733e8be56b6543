//! Rank-revealing quality metrics: truncation error profiles, block
//! singular-value profiles, projection errors and the RSVD/PowerURV
//! range-equivalence check.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{LinalgError, Result};
use crate::factor::{power_urv, Provenance, UrvFactorization};
use crate::io::fmt_f64;
use crate::matrix::{axpy, dot, Matrix};
use crate::random::RngSeed;
use crate::rsvd::{rsvd, RsvdFactorization, RsvdParams};
use crate::svd::{singular_values, spectral_norm};

pub const PROFILE_CSV_HEADER: &str = "k,abs_sp,abs_fro,rel_sp,rel_fro,sigma_ref,smin_r11,smax_r22";

/// Which factorization a profile was measured on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProfileSource {
    Urv(Provenance),
    Rsvd(RsvdParams),
}

/// Errors of the rank-`k` approximants for `k = 0..=n`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorProfile {
    pub k: Vec<usize>,
    pub abs_spectral: Vec<f64>,
    pub abs_frobenius: Vec<f64>,
    pub rel_spectral: Vec<f64>,
    pub rel_frobenius: Vec<f64>,
    /// `sigma_ref[k]` is `σ_{k+1}(A)`, zero past the rank bound.
    pub sigma_ref: Vec<f64>,
    pub source: ProfileSource,
}

impl ErrorProfile {
    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    /// `abs_spectral[k] / sigma_ref[k]` for the ranks where `sigma_ref` is
    /// positive.
    pub fn optimality_ratios(&self) -> Vec<(usize, f64)> {
        self.k
            .iter()
            .filter(|&&k| self.sigma_ref[k] > 0.0)
            .map(|&k| (k, self.abs_spectral[k] / self.sigma_ref[k]))
            .collect()
    }
}

/// Block singular values of `R` for `k = 0..=n`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RevealProfile {
    pub k: Vec<usize>,
    /// `σ_min(R(1:k, 1:k))`; `+inf` at `k = 0` (empty block).
    pub smin_r11: Vec<f64>,
    /// `σ_max(R(k+1:n, k+1:n))`; zero at `k = n`.
    pub smax_r22: Vec<f64>,
    pub sigma_ref: Vec<f64>,
}

/// `σ_{k+1}(A)` for `k = 0..=n`.
pub fn reference_sigmas(a: &Matrix) -> Result<Vec<f64>> {
    let sigma = singular_values(a)?;
    Ok((0..=a.cols()).map(|k| sigma.get(k).copied().unwrap_or(0.0)).collect())
}

/// Error profile of `A ≈ U(:,1:k) R(1:k,:) Vᵀ`.
pub fn error_profile(a: &Matrix, f: &UrvFactorization) -> Result<ErrorProfile> {
    let sigma_ref = reference_sigmas(a)?;
    error_profile_with_reference(a, f, sigma_ref)
}

/// As [`error_profile`] with precomputed `σ_{k+1}(A)` values, so repeated
/// runs on one matrix pay for the SVD once.
pub fn error_profile_with_reference(
    a: &Matrix,
    f: &UrvFactorization,
    sigma_ref: Vec<f64>,
) -> Result<ErrorProfile> {
    check_shapes(a, &f.u, f.v.rows())?;
    let (u, m) = f.truncate(f.rank_bound())?;
    let (abs_spectral, abs_frobenius) = truncation_errors(a, &u, &m);
    Ok(assemble(a, abs_spectral, abs_frobenius, sigma_ref, ProfileSource::Urv(f.provenance.clone())))
}

/// Error profile of the RSVD approximants. Ranks above `ell` reuse the
/// full rank-`ell` approximant, so the profile still has `n + 1` rows.
pub fn rsvd_error_profile(a: &Matrix, f: &RsvdFactorization, sigma_ref: Vec<f64>) -> Result<ErrorProfile> {
    check_shapes(a, &f.u, f.v.rows())?;
    let (u, m) = f.truncate(f.sigma.len())?;
    let (abs_spectral, abs_frobenius) = truncation_errors(a, &u, &m);
    Ok(assemble(a, abs_spectral, abs_frobenius, sigma_ref, ProfileSource::Rsvd(f.params)))
}

fn check_shapes(a: &Matrix, u: &Matrix, v_rows: usize) -> Result<()> {
    if u.rows() != a.rows() || v_rows != a.cols() {
        return Err(LinalgError::Dimension(format!(
            "factors of a {}x{} matrix do not fit A ({}x{})",
            u.rows(),
            v_rows,
            a.rows(),
            a.cols()
        )));
    }
    Ok(())
}

/// Spectral and Frobenius norms of `A - U(:,1:k) M(1:k,:)` for
/// `k = 0..=A.cols()`, by rank-one downdates of a running residual.
fn truncation_errors(a: &Matrix, u: &Matrix, m: &Matrix) -> (Vec<f64>, Vec<f64>) {
    let n = a.cols();
    let r = u.cols();
    let mut resid = a.clone();
    let mut spectral = Vec::with_capacity(n + 1);
    let mut frobenius = Vec::with_capacity(n + 1);
    for k in 0..=n {
        if k > 0 && k <= r {
            let uk = u.col(k - 1);
            for j in 0..n {
                let coef = m[(k - 1, j)];
                if coef != 0.0 {
                    axpy(-coef, uk, resid.col_mut(j));
                }
            }
        }
        if k > r {
            spectral.push(spectral[r]);
            frobenius.push(frobenius[r]);
        } else {
            spectral.push(spectral_norm(&resid));
            frobenius.push(resid.frobenius_norm());
        }
    }
    (spectral, frobenius)
}

fn assemble(
    a: &Matrix,
    abs_spectral: Vec<f64>,
    abs_frobenius: Vec<f64>,
    sigma_ref: Vec<f64>,
    source: ProfileSource,
) -> ErrorProfile {
    let norm_sp = abs_spectral[0];
    let norm_fro = abs_frobenius[0];
    let relative = |v: &[f64], d: f64| -> Vec<f64> {
        v.iter().map(|&x| if d > 0.0 { x / d } else { 0.0 }).collect()
    };
    debug_assert_eq!(norm_fro, a.frobenius_norm());
    ErrorProfile {
        k: (0..abs_spectral.len()).collect(),
        rel_spectral: relative(&abs_spectral, norm_sp),
        rel_frobenius: relative(&abs_frobenius, norm_fro),
        abs_spectral,
        abs_frobenius,
        sigma_ref,
        source,
    }
}

/// `σ_min` of every leading block and `σ_max` of every trailing block of
/// `R`.
pub fn reveal_profile(f: &UrvFactorization, a: &Matrix) -> Result<RevealProfile> {
    let sigma_ref = reference_sigmas(a)?;
    reveal_profile_with_reference(f, sigma_ref)
}

pub fn reveal_profile_with_reference(f: &UrvFactorization, sigma_ref: Vec<f64>) -> Result<RevealProfile> {
    let r = &f.r;
    let n = r.rows();
    if r.cols() != n {
        return Err(LinalgError::Dimension(format!("R must be square, got {}x{}", n, r.cols())));
    }
    let smax_r22 = (0..=n).map(|k| spectral_norm(&r.block(k..n, k..n))).collect();
    Ok(RevealProfile {
        k: (0..=n).collect(),
        smin_r11: leading_block_smin(r)?,
        smax_r22,
        sigma_ref,
    })
}

/// `σ_min(R(1:k,1:k)) = 1 / ‖R(1:k,1:k)⁻¹‖₂`, using that the inverse of a
/// leading triangular block is the leading block of the inverse.
fn leading_block_smin(r: &Matrix) -> Result<Vec<f64>> {
    let n = r.rows();
    let nonsingular = (0..n).take_while(|&i| r[(i, i)] != 0.0).count();
    let inv = upper_triangular_inverse(&r.block(0..nonsingular, 0..nonsingular));
    let mut out = vec![f64::INFINITY];
    for k in 1..=n {
        if k > nonsingular {
            out.push(0.0);
            continue;
        }
        let block = inv.block(0..k, 0..k);
        let s = if block.as_slice().iter().all(|x| x.is_finite()) {
            1.0 / spectral_norm(&block)
        } else {
            // The inverse overflowed; fall back to the SVD of the block.
            singular_values(&r.block(0..k, 0..k))?.last().copied().unwrap_or(0.0)
        };
        out.push(s);
    }
    Ok(out)
}

fn upper_triangular_inverse(r: &Matrix) -> Matrix {
    let n = r.rows();
    let mut inv = Matrix::zeros(n, n);
    for j in 0..n {
        inv[(j, j)] = 1.0 / r[(j, j)];
        for i in (0..j).rev() {
            let s: f64 = (i + 1..=j).map(|l| r[(i, l)] * inv[(l, j)]).sum();
            inv[(i, j)] = -s / r[(i, i)];
        }
    }
    inv
}

/// `‖A − U(:,1:k) U(:,1:k)ᵀ A‖₂`.
pub fn projection_error(a: &Matrix, u: &Matrix, k: usize) -> Result<f64> {
    check_projector(a, u, k)?;
    let uk = u.columns(0..k);
    let projected = uk.matmul(&uk.tr_matmul(a));
    Ok(spectral_norm(&a.sub(&projected)))
}

/// [`projection_error`] for every `k = 0..=kmax`.
pub fn projection_error_curve(a: &Matrix, u: &Matrix, kmax: usize) -> Result<Vec<f64>> {
    check_projector(a, u, kmax)?;
    let mut resid = a.clone();
    let mut out = vec![spectral_norm(&resid)];
    for k in 0..kmax {
        let uk = u.col(k);
        for j in 0..resid.cols() {
            let c = dot(uk, resid.col(j));
            axpy(-c, uk, resid.col_mut(j));
        }
        out.push(spectral_norm(&resid));
    }
    Ok(out)
}

fn check_projector(a: &Matrix, u: &Matrix, k: usize) -> Result<()> {
    if u.rows() != a.rows() {
        return Err(LinalgError::Dimension(format!(
            "U has {} rows, A has {}",
            u.rows(),
            a.rows()
        )));
    }
    if k > u.cols() {
        return Err(LinalgError::InvalidArgument(format!(
            "k = {k} exceeds the {} columns of U",
            u.cols()
        )));
    }
    Ok(())
}

/// Outcome of [`lemma_check`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LemmaReport {
    /// `‖U(:,1:ℓ)U(:,1:ℓ)ᵀA − U_rsvd U_rsvdᵀA‖_F / ‖A‖_F`.
    pub discrepancy: f64,
    /// The sample matrix lost rank somewhere, so the discrepancy carries
    /// no guarantee.
    pub rank_deficient: bool,
    pub warnings: Vec<String>,
}

/// Runs `power_urv` and `rsvd` on the same Gaussian draw and compares the
/// projectors onto their leading `ell`-dimensional ranges.
pub fn lemma_check(a: &Matrix, ell: usize, q: usize, reorth: bool, seed: RngSeed) -> Result<LemmaReport> {
    let r = rsvd(a, ell, q, reorth, seed)?;
    let p = power_urv(a, q, reorth, seed)?;
    let up = p.u.columns(0..ell);
    let diff = up.matmul(&up.tr_matmul(a)).sub(&r.u.matmul(&r.u.tr_matmul(a)));
    let norm = a.frobenius_norm();
    let mut warnings = p.provenance.warnings;
    warnings.extend(r.warnings);
    Ok(LemmaReport {
        discrepancy: if norm > 0.0 { diff.frobenius_norm() / norm } else { 0.0 },
        rank_deficient: !warnings.is_empty(),
        warnings,
    })
}

/// Writes the profile as CSV with one row per `k`. Without a reveal
/// profile the last two columns are `NaN`.
pub fn write_profile_csv<W: Write>(w: &mut W, p: &ErrorProfile, reveal: Option<&RevealProfile>) -> Result<()> {
    if let Some(rv) = reveal {
        if rv.k.len() != p.k.len() {
            return Err(LinalgError::Dimension(format!(
                "reveal profile has {} rows, error profile {}",
                rv.k.len(),
                p.k.len()
            )));
        }
    }
    writeln!(w, "{PROFILE_CSV_HEADER}")?;
    for i in 0..p.len() {
        let (smin, smax) = reveal.map_or((f64::NAN, f64::NAN), |rv| (rv.smin_r11[i], rv.smax_r22[i]));
        let fields = [
            p.abs_spectral[i],
            p.abs_frobenius[i],
            p.rel_spectral[i],
            p.rel_frobenius[i],
            p.sigma_ref[i],
            smin,
            smax,
        ];
        let line: Vec<String> = fields.iter().map(|&v| fmt_f64(v)).collect();
        writeln!(w, "{},{}", p.k[i], line.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::{ddh_urv, qlp};
    use crate::random::{gaussian_matrix, haar_orthogonal};

    #[test]
    fn diagonal_reveal_profile() {
        let a = Matrix::from_diagonal(3, 3, &[3.0, 2.0, 1.0]);
        let f = qlp(&a).unwrap();
        let rv = reveal_profile(&f, &a).unwrap();
        assert_eq!(rv.smin_r11[0], f64::INFINITY);
        for (got, want) in rv.smin_r11[1..].iter().zip([3.0, 2.0, 1.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        for (got, want) in rv.smax_r22.iter().zip([3.0, 2.0, 1.0, 0.0]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_rank_row_is_the_norm() {
        let a = gaussian_matrix(12, 7, RngSeed::new(8, 1));
        let f = ddh_urv(&a, RngSeed::new(8, 0)).unwrap();
        let p = error_profile(&a, &f).unwrap();
        assert_eq!(p.len(), 8);
        assert_eq!(p.rel_spectral[0], 1.0);
        assert_eq!(p.rel_frobenius[0], 1.0);
        assert_eq!(p.abs_frobenius[0], a.frobenius_norm());
        assert!((p.abs_spectral[0] - p.sigma_ref[0]).abs() < 1e-13 * p.sigma_ref[0]);
        assert!(p.abs_frobenius[7] < 1e-13 * a.frobenius_norm());
    }

    #[test]
    fn singular_leading_block() {
        let mut r = Matrix::from_diagonal(3, 3, &[2.0, 0.0, 1.0]);
        r[(0, 2)] = 1.0;
        let s = leading_block_smin(&r).unwrap();
        assert_eq!(s[2], 0.0);
        assert_eq!(s[3], 0.0);
        assert!((s[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn triangular_inverse() {
        let mut r = Matrix::from_fn(5, 5, |i, j| if i <= j { 1.0 + (i * 5 + j) as f64 } else { 0.0 });
        r[(4, 4)] = 0.5;
        let inv = upper_triangular_inverse(&r);
        assert!(r.matmul(&inv).sub(&Matrix::identity(5)).frobenius_norm() < 1e-12);
    }

    #[test]
    fn curve_matches_pointwise() {
        let a = gaussian_matrix(10, 6, RngSeed::new(3, 1));
        let u = haar_orthogonal(10, RngSeed::new(3, 2));
        let curve = projection_error_curve(&a, &u, 6).unwrap();
        for (k, &c) in curve.iter().enumerate() {
            let direct = projection_error(&a, &u, k).unwrap();
            assert!((c - direct).abs() <= 1e-12 * curve[0]);
        }
        assert!(projection_error(&a, &u, 11).is_err());
    }

    #[test]
    fn csv_layout() {
        let a = gaussian_matrix(5, 3, RngSeed::new(1, 1));
        let f = qlp(&a).unwrap();
        let p = error_profile(&a, &f).unwrap();
        let mut buf = Vec::new();
        write_profile_csv(&mut buf, &p, None).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], PROFILE_CSV_HEADER);
        assert!(lines[1].starts_with("0,"));
        assert!(lines[4].ends_with("NaN,NaN"));
    }
}
