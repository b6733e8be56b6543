//! One-sided Jacobi SVD and an exact spectral-norm routine.

use crate::error::{LinalgError, Result};
use crate::matrix::{dot, norm2, Matrix};
use crate::qr::cpqr;

pub const MAX_SWEEPS: usize = 30;

/// Thin SVD `A = U diag(sigma) Vᵀ` with `k = min(m, n)` terms.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub u: Matrix,
    pub sigma: Vec<f64>,
    pub v: Matrix,
}

impl SvdResult {
    pub fn reconstruct(&self) -> Matrix {
        let mut us = self.u.clone();
        for (j, &s) in self.sigma.iter().enumerate() {
            us.col_mut(j).iter_mut().for_each(|x| *x *= s);
        }
        us.matmul_tr(&self.v)
    }
}

/// Full thin SVD by one-sided (Hestenes) Jacobi.
///
/// The input is first reduced by column-pivoted QR, `A P = Q R`, and the
/// rotations act on the columns of `Rᵀ`. Graded triangles from the pivoted
/// factorization converge in far fewer sweeps than the raw input. Wide
/// inputs are handled through the transpose.
pub fn svd(a: &Matrix) -> Result<SvdResult> {
    a.check_finite()?;
    if a.rows() < a.cols() {
        let t = svd(&a.transpose())?;
        return Ok(SvdResult {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        });
    }
    let n = a.cols();
    let (scaled, exponent) = binary_scaled(a);
    let f = cpqr(&scaled)?;
    // Rᵀ W = X with orthogonal columns, so R = W Σ X̂ᵀ where X̂ holds the
    // normalized columns of X, and A = (Q W) Σ (P X̂)ᵀ.
    let mut work = f.r.transpose();
    let mut w = Matrix::identity(n);
    jacobi_sweeps(&mut work, Some(&mut w))?;

    let (sigma, order) = sorted_column_norms(&work);
    let mut w_sorted = Matrix::zeros(n, n);
    let mut x_sorted = Matrix::zeros(n, n);
    let mut missing = Vec::new();
    for (dst, &src) in order.iter().enumerate() {
        w_sorted.col_mut(dst).copy_from_slice(w.col(src));
        if sigma[dst] > 0.0 {
            let inv = 1.0 / sigma[dst];
            for (o, &x) in x_sorted.col_mut(dst).iter_mut().zip(work.col(src)) {
                *o = x * inv;
            }
        } else {
            missing.push(dst);
        }
    }
    complete_orthonormal(&mut x_sorted, &missing);
    let mut v = Matrix::zeros(n, n);
    for (j, &src) in f.perm.iter().enumerate() {
        for c in 0..n {
            v[(src, c)] = x_sorted[(j, c)];
        }
    }
    Ok(SvdResult {
        u: f.q.matmul(&w_sorted),
        sigma: unscale(sigma, exponent),
        v,
    })
}

/// Singular values only, nonincreasing.
pub fn singular_values(a: &Matrix) -> Result<Vec<f64>> {
    a.check_finite()?;
    let (scaled, exponent) = binary_scaled(a);
    let mut work = cpqr(&scaled)?.r.transpose();
    jacobi_sweeps(&mut work, None)?;
    Ok(unscale(sorted_column_norms(&work).0, exponent))
}

/// `a` multiplied by a power of two so its largest entry lies in `[1, 2)`,
/// and the exponent that undoes it. Keeps squared norms clear of overflow
/// and underflow.
fn binary_scaled(a: &Matrix) -> (Matrix, i32) {
    let top = a.max_abs();
    if top == 0.0 {
        return (a.clone(), 0);
    }
    let exponent = libm::ilogb(top);
    let mut s = a.clone();
    s.as_mut_slice().iter_mut().for_each(|x| *x = libm::scalbn(*x, -exponent));
    (s, exponent)
}

fn unscale(mut sigma: Vec<f64>, exponent: i32) -> Vec<f64> {
    sigma.iter_mut().for_each(|x| *x = libm::scalbn(*x, exponent));
    sigma
}

/// Row-cyclic sweeps of plane rotations until every column pair is
/// orthogonal to working precision.
fn jacobi_sweeps(work: &mut Matrix, mut v: Option<&mut Matrix>) -> Result<()> {
    let (rows, n) = work.shape();
    let tol = rows as f64 * f64::EPSILON;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let (ci, cj) = work.col_pair_mut(i, j);
                let alpha = dot(ci, ci);
                let beta = dot(cj, cj);
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma = dot(ci, cj);
                if gamma.abs() <= tol * alpha.sqrt() * beta.sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = 1.0f64.copysign(zeta) / (zeta.abs() + libm::hypot(1.0, zeta));
                let c = 1.0 / libm::hypot(1.0, t);
                let s = c * t;
                rotate(ci, cj, c, s);
                if let Some(v) = v.as_deref_mut() {
                    let (vi, vj) = v.col_pair_mut(i, j);
                    rotate(vi, vj, c, s);
                }
            }
        }
        if !rotated {
            return Ok(());
        }
    }
    Err(LinalgError::SvdNoConvergence { sweeps: MAX_SWEEPS })
}

#[inline]
fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let (xa, yb) = (*a, *b);
        *a = c * xa - s * yb;
        *b = s * xa + c * yb;
    }
}

/// Column norms sorted nonincreasing, with the source column of each.
/// Norms too small to normalize safely are reported as zero.
fn sorted_column_norms(work: &Matrix) -> (Vec<f64>, Vec<usize>) {
    let norms: Vec<f64> = (0..work.cols()).map(|j| norm2(work.col(j))).collect();
    let mut order: Vec<usize> = (0..work.cols()).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
    let floor = f64::MIN_POSITIVE / f64::EPSILON;
    let sigma = order
        .iter()
        .map(|&j| if norms[j] < floor { 0.0 } else { norms[j] })
        .collect();
    (sigma, order)
}

/// Fills the listed columns of `u` with unit vectors orthogonal to every
/// other column, trying coordinate directions in turn.
fn complete_orthonormal(u: &mut Matrix, missing: &[usize]) {
    if missing.is_empty() {
        return;
    }
    let m = u.rows();
    let mut filled: Vec<usize> = (0..u.cols()).filter(|c| !missing.contains(c)).collect();
    let mut candidate = 0;
    for &dst in missing {
        while candidate < m {
            let mut x = vec![0.0; m];
            x[candidate] = 1.0;
            candidate += 1;
            for _ in 0..2 {
                for &f in &filled {
                    let col = u.col(f);
                    let p = dot(col, &x);
                    x.iter_mut().zip(col).for_each(|(xi, ci)| *xi -= p * ci);
                }
            }
            let nx = norm2(&x);
            if nx > 0.5 {
                x.iter_mut().for_each(|xi| *xi /= nx);
                u.col_mut(dst).copy_from_slice(&x);
                filled.push(dst);
                break;
            }
        }
    }
}

/// Largest singular value, computed exactly (to roundoff) from the largest
/// eigenvalue of the smaller Gram matrix.
pub fn spectral_norm(a: &Matrix) -> f64 {
    let scale = a.max_abs();
    if scale == 0.0 || a.is_empty() {
        return 0.0;
    }
    let mut s = a.clone();
    s.scale(1.0 / scale);
    let g = if s.rows() >= s.cols() {
        s.gram()
    } else {
        s.transpose().gram()
    };
    largest_symmetric_eigenvalue(g).max(0.0).sqrt() * scale
}

/// Householder tridiagonalization followed by Sturm-sequence bisection.
pub fn largest_symmetric_eigenvalue(mut g: Matrix) -> f64 {
    let n = g.rows();
    assert_eq!(n, g.cols());
    if n == 0 {
        return 0.0;
    }
    let (d, e) = tridiagonalize(&mut g);
    bisect_largest(&d, &e)
}

/// Reduces the symmetric `g` (destroyed) to tridiagonal `(diag, offdiag)`.
fn tridiagonalize(g: &mut Matrix) -> (Vec<f64>, Vec<f64>) {
    let n = g.rows();
    let mut e = vec![0.0; n.saturating_sub(1)];
    let mut p = vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        // Reflector annihilating g[k+2.., k].
        let x = &mut g.col_mut(k)[k + 1..];
        let alpha = x[0];
        let xnorm = norm2(&x[1..]);
        if xnorm == 0.0 {
            e[k] = alpha;
            continue;
        }
        let beta = -libm::hypot(alpha, xnorm).copysign(alpha);
        let tau = (beta - alpha) / beta;
        let inv = 1.0 / (alpha - beta);
        x[0] = 1.0;
        x[1..].iter_mut().for_each(|v| *v *= inv);
        e[k] = beta;
        let v: Vec<f64> = x.to_vec();
        let len = n - k - 1;

        // p = tau * S v, with S = g[k+1.., k+1..]
        for (jj, pj) in p[..len].iter_mut().enumerate() {
            let col = &g.col(k + 1 + jj)[k + 1..];
            *pj = tau * dot(col, &v);
        }
        let kappa = 0.5 * tau * dot(&p[..len], &v);
        for (pj, vj) in p[..len].iter_mut().zip(&v) {
            *pj -= kappa * vj;
        }
        // S -= v pᵀ + p vᵀ
        for jj in 0..len {
            let (vj, pj) = (v[jj], p[jj]);
            let col = &mut g.col_mut(k + 1 + jj)[k + 1..];
            for ((c, &vi), &pi) in col.iter_mut().zip(&v).zip(&p[..len]) {
                *c -= vi * pj + pi * vj;
            }
        }
    }
    if n >= 2 {
        e[n - 2] = g[(n - 1, n - 2)];
    }
    let d = (0..n).map(|i| g[(i, i)]).collect();
    (d, e)
}

/// Number of eigenvalues of the tridiagonal strictly below `x`.
fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let tiny = f64::MIN_POSITIVE;
    let mut count = 0;
    let mut q = d[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..d.len() {
        if q.abs() < tiny {
            q = -tiny;
        }
        q = d[i] - x - e[i - 1] * e[i - 1] / q;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn bisect_largest(d: &[f64], e: &[f64]) -> f64 {
    let n = d.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let radius = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < n { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - radius);
        hi = hi.max(d[i] + radius);
    }
    let span = lo.abs().max(hi.abs());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * span.max(f64::MIN_POSITIVE) {
            break;
        }
        if sturm_count(d, e, mid) == n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}
