//! Householder QR factorizations: the blocked unpivoted kernel and the
//! column-pivoted variant.
//!
//! Reflectors follow the LAPACK convention `H = I - tau * v * vᵀ` with
//! `v[0] = 1` stored implicitly. Both factorizations normalize signs so that
//! `diag(R) >= 0`.

use crate::error::{LinalgError, Result};
use crate::matrix::{axpy, dot, norm2, Matrix};

pub const DEFAULT_BLOCK_SIZE: usize = 32;

/// Squared-norm downdates below this fraction of the column's original
/// squared norm trigger a recomputation from scratch.
const NORM_RECOMPUTE_FRACTION: f64 = 1e-2;

/// Pivot candidates whose trailing norm is within this multiple of `|R(1,1)|`
/// of the largest are treated as tied. Without it, exact ties such as the
/// ones in Kahan's matrix are broken by downdating roundoff.
pub const PIVOT_TIE_TOLERANCE: f64 = 1e-14;

/// Thin QR factors `A = Q R`, `Q` is `m x n`, `R` is `n x n`.
#[derive(Debug, Clone)]
pub struct QrResult {
    pub q: Matrix,
    pub r: Matrix,
}

/// Column-pivoted QR: `A[:, perm] = Q R`.
#[derive(Debug, Clone)]
pub struct CpqrResult {
    pub q: Matrix,
    pub r: Matrix,
    /// Column `j` of `Q R` is column `perm[j]` of the input.
    pub perm: Vec<usize>,
}

impl CpqrResult {
    /// The permutation matrix `P` with `A P = Q R`.
    pub fn permutation_matrix(&self) -> Matrix {
        let n = self.perm.len();
        let mut p = Matrix::zeros(n, n);
        for (j, &src) in self.perm.iter().enumerate() {
            p[(src, j)] = 1.0;
        }
        p
    }
}

/// Turns `x` into a Householder vector in place and returns `tau`.
/// On return `x[0]` holds `beta` and `x[1..]` the reflector tail.
fn make_reflector(x: &mut [f64]) -> f64 {
    let alpha = x[0];
    let xnorm = norm2(&x[1..]);
    if xnorm == 0.0 {
        return 0.0;
    }
    let beta = -libm::hypot(alpha, xnorm).copysign(alpha);
    let tau = (beta - alpha) / beta;
    let inv = 1.0 / (alpha - beta);
    x[1..].iter_mut().for_each(|v| *v *= inv);
    x[0] = beta;
    tau
}

/// Applies `I - tau v vᵀ` to `c`, where `v = [1, tail]`.
#[inline]
fn apply_reflector(tau: f64, tail: &[f64], c: &mut [f64]) {
    if tau == 0.0 {
        return;
    }
    let (head, rest) = c.split_first_mut().unwrap();
    let w = tau * (*head + dot(tail, rest));
    *head -= w;
    axpy(-w, tail, rest);
}

fn require_tall(a: &Matrix, what: &str) -> Result<()> {
    if a.rows() < a.cols() {
        return Err(LinalgError::Dimension(format!(
            "{what} needs rows >= cols, got {}x{} (transpose first)",
            a.rows(),
            a.cols()
        )));
    }
    Ok(())
}

/// Blocked Householder QR with compact-WY updates of the trailing matrix.
///
/// Panels of `block_size` columns are factored with level-2 reflector
/// applications; the accumulated block reflector `I - V T Vᵀ` is then applied
/// to the rest of the matrix in one pass. Any block size yields the same
/// factorization up to roundoff.
pub fn householder_qr(a: &Matrix, block_size: usize) -> Result<QrResult> {
    require_tall(a, "householder_qr")?;
    if block_size == 0 {
        return Err(LinalgError::InvalidArgument("block_size must be >= 1".into()));
    }
    a.check_finite()?;
    let (m, n) = a.shape();
    let mut w = a.clone();
    let mut tau = vec![0.0; n];
    let mut blocks = Vec::new();

    let mut j = 0;
    while j < n {
        let nb = block_size.min(n - j);
        for c in j..j + nb {
            tau[c] = make_reflector(&mut w.col_mut(c)[c..]);
            for t in c + 1..j + nb {
                let (vc, ct) = w.col_pair_mut(c, t);
                apply_reflector(tau[c], &vc[c + 1..m], &mut ct[c..m]);
            }
        }
        let t = block_t_factor(&w, &tau, j, nb);
        if j + nb < n {
            let (left, right) = w.as_mut_slice().split_at_mut((j + nb) * m);
            apply_block_reflector(&left[j * m..], m, j, &t, right, true);
        }
        blocks.push((j, t));
        j += nb;
    }

    let mut r = Matrix::zeros(n, n);
    for c in 0..n {
        r.col_mut(c)[..=c].copy_from_slice(&w.col(c)[..=c]);
    }

    // Backward accumulation; columns left of a block are untouched by it.
    let mut q = Matrix::eye(m, n);
    for (j, t) in blocks.iter().rev() {
        let nb = t.rows();
        let v = &w.as_slice()[j * m..(j + nb) * m];
        apply_block_reflector(v, m, *j, t, &mut q.as_mut_slice()[j * m..], false);
    }

    normalize_signs(&mut q, &mut r);
    Ok(QrResult { q, r })
}

/// Upper-triangular `T` such that `H_j ... H_{j+nb-1} = I - V T Vᵀ`.
fn block_t_factor(w: &Matrix, tau: &[f64], j: usize, nb: usize) -> Matrix {
    let m = w.rows();
    let mut t = Matrix::zeros(nb, nb);
    let mut z = vec![0.0; nb];
    for i in 0..nb {
        let ci = j + i;
        t[(i, i)] = tau[ci];
        if i == 0 || tau[ci] == 0.0 {
            continue;
        }
        let vi = &w.col(ci)[ci + 1..m];
        for (p, zp) in z.iter_mut().enumerate().take(i) {
            let vp = w.col(j + p);
            // v_i is zero above row ci and one at row ci.
            *zp = -tau[ci] * (vp[ci] + dot(&vp[ci + 1..m], vi));
        }
        for row in 0..i {
            let mut s = 0.0;
            for p in row..i {
                s += t[(row, p)] * z[p];
            }
            t[(row, i)] = s;
        }
    }
    t
}

/// Applies `I - V T Vᵀ` (or `I - V Tᵀ Vᵀ` when `transpose`) to every
/// column stored in `target`, touching rows `j..m` only. `v` holds the block's
/// reflector columns, each of length `m`, with the unit diagonal implicit.
fn apply_block_reflector(
    v: &[f64],
    m: usize,
    j: usize,
    t: &Matrix,
    target: &mut [f64],
    transpose: bool,
) {
    let nb = t.rows();
    let tail = |i: usize| &v[i * m + j + i + 1..(i + 1) * m];
    let mut coeff = vec![0.0; nb];
    let mut mixed = vec![0.0; nb];
    for col in target.chunks_exact_mut(m) {
        let col = &mut col[j..];
        for (i, ci) in coeff.iter_mut().enumerate() {
            *ci = col[i] + dot(tail(i), &col[i + 1..]);
        }
        for (row, out) in mixed.iter_mut().enumerate() {
            *out = if transpose {
                (0..=row).map(|p| t[(p, row)] * coeff[p]).sum()
            } else {
                (row..nb).map(|p| t[(row, p)] * coeff[p]).sum()
            };
        }
        for (i, &mi) in mixed.iter().enumerate() {
            if mi != 0.0 {
                col[i] -= mi;
                axpy(-mi, tail(i), &mut col[i + 1..]);
            }
        }
    }
}

/// Flips signs so every diagonal entry of `r` is nonnegative; `q` absorbs
/// the matching column signs and zeros below the diagonal stay exact.
fn normalize_signs(q: &mut Matrix, r: &mut Matrix) {
    let k = r.rows().min(r.cols());
    for i in 0..k {
        if r[(i, i)] < 0.0 {
            for c in i..r.cols() {
                r[(i, c)] = -r[(i, c)];
            }
            q.col_mut(i).iter_mut().for_each(|v| *v = -*v);
        }
    }
}

/// Householder QR with column pivoting on the largest trailing column norm.
///
/// Accepts any shape. For an `m x n` input with `k = min(m, n)`, `q` is
/// `m x k` and `r` is `k x n` upper trapezoidal. Column norms within
/// `PIVOT_TIE_TOLERANCE * |R(1,1)|` of the largest count as ties, and ties go
/// to the lowest remaining column index.
pub fn cpqr(a: &Matrix) -> Result<CpqrResult> {
    a.check_finite()?;
    let (m, n) = a.shape();
    let k = m.min(n);
    let mut w = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut norms: Vec<f64> = (0..n).map(|c| norm2(w.col(c)).powi(2)).collect();
    let mut original = norms.clone();
    let mut tau = vec![0.0; k];
    let mut r11 = 0.0f64;

    for j in 0..k {
        let best = norms[j..].iter().copied().fold(0.0, f64::max).sqrt();
        if j == 0 {
            r11 = best;
        }
        let cut = (best - PIVOT_TIE_TOLERANCE * r11).max(0.0);
        let p = (j..n).find(|&c| norms[c].sqrt() >= cut).unwrap_or(j);
        if p != j {
            w.swap_cols(p, j);
            perm.swap(p, j);
            norms.swap(p, j);
            original.swap(p, j);
        }

        tau[j] = make_reflector(&mut w.col_mut(j)[j..]);
        for c in j + 1..n {
            let (vj, cc) = w.col_pair_mut(j, c);
            apply_reflector(tau[j], &vj[j + 1..m], &mut cc[j..m]);
        }

        for c in j + 1..n {
            if norms[c] == 0.0 {
                continue;
            }
            let top = w[(j, c)];
            norms[c] -= top * top;
            if norms[c] < NORM_RECOMPUTE_FRACTION * original[c] {
                norms[c] = norm2(&w.col(c)[j + 1..]).powi(2);
            }
        }
    }

    let mut r = Matrix::zeros(k, n);
    for c in 0..n {
        let top = (c + 1).min(k);
        r.col_mut(c)[..top].copy_from_slice(&w.col(c)[..top]);
    }

    let mut q = Matrix::eye(m, k);
    for j in (0..k).rev() {
        if tau[j] == 0.0 {
            continue;
        }
        let tail = &w.col(j)[j + 1..m];
        for c in j..k {
            apply_reflector(tau[j], tail, &mut q.col_mut(c)[j..m]);
        }
    }

    normalize_signs(&mut q, &mut r);
    Ok(CpqrResult { q, r, perm })
}
