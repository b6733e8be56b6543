//! Benchmark matrices: three synthetic spectra `A = U D Vᵀ` with Haar
//! factors, a Nyström discretization of a boundary integral operator on a
//! five-pointed star, and Kahan's matrix.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{LinalgError, Result};
use crate::matrix::Matrix;
use crate::random::{haar_orthogonal, RngSeed};

pub const DEFAULT_ROWS: usize = 200;
pub const DEFAULT_COLS: usize = 160;
pub const DEFAULT_BIE_POINTS: usize = 200;
pub const DEFAULT_KAHAN_THETA: f64 = 1.2;

/// Amplitude of the star boundary `r(t) = 1 + 0.3 cos(5t)`.
const STAR_AMPLITUDE: f64 = 0.3;
const STAR_ARMS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    FastDecay,
    SlowDecay,
    SShaped,
    BoundaryIntegral,
    Kahan,
}

/// Everything needed to regenerate a benchmark matrix bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestMatrixSpec {
    pub kind: MatrixKind,
    pub m: usize,
    pub n: usize,
    pub seed: RngSeed,
    /// Kahan angle; ignored by the other kinds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    /// Fast decay only: use `(1e-20)^(k-1)` verbatim instead of the
    /// graded `10^(-20 (k-1)/(n-1))`.
    #[serde(default)]
    pub literal_decay: bool,
}

impl TestMatrixSpec {
    /// Default sizes: 200x160 for the synthetic spectra, 200x200 for the
    /// integral equation, 96x96 for Kahan.
    pub fn new(kind: MatrixKind, seed: RngSeed) -> Self {
        let (m, n) = match kind {
            MatrixKind::BoundaryIntegral => (DEFAULT_BIE_POINTS, DEFAULT_BIE_POINTS),
            MatrixKind::Kahan => (96, 96),
            _ => (DEFAULT_ROWS, DEFAULT_COLS),
        };
        TestMatrixSpec {
            kind,
            m,
            n,
            seed,
            theta: (kind == MatrixKind::Kahan).then_some(DEFAULT_KAHAN_THETA),
            literal_decay: false,
        }
    }

    /// The matrix and, for the synthetic spectra, its exact singular values.
    pub fn generate(&self) -> Result<(Matrix, Option<Vec<f64>>)> {
        match self.kind {
            MatrixKind::FastDecay => {
                gen_fast_decay(self.m, self.n, self.seed, self.literal_decay).map(|(a, s)| (a, Some(s)))
            }
            MatrixKind::SlowDecay => gen_slow_decay(self.m, self.n, self.seed).map(|(a, s)| (a, Some(s))),
            MatrixKind::SShaped => gen_s_shaped(self.m, self.n, self.seed).map(|(a, s)| (a, Some(s))),
            MatrixKind::BoundaryIntegral => {
                if self.m != self.n {
                    return Err(LinalgError::Dimension("the BIE matrix is square".into()));
                }
                gen_bie(self.n).map(|a| (a, None))
            }
            MatrixKind::Kahan => {
                if self.m != self.n {
                    return Err(LinalgError::Dimension("the Kahan matrix is square".into()));
                }
                gen_kahan(self.n, self.theta.unwrap_or(DEFAULT_KAHAN_THETA)).map(|a| (a, None))
            }
        }
    }
}

/// Graded or literal fast decay; see [`TestMatrixSpec::literal_decay`].
pub fn fast_decay_spectrum(n: usize, literal: bool) -> Vec<f64> {
    if literal {
        // Repeated products of 1e-20; underflows to zero from k = 18 on.
        return std::iter::successors(Some(1.0f64), |d| Some(d * 1e-20))
            .take(n)
            .collect();
    }
    let last = n.saturating_sub(1).max(1) as f64;
    (0..n)
        .map(|k| libm::pow(10.0, -20.0 * k as f64 / last))
        .collect()
}

pub fn slow_decay_spectrum(n: usize) -> Vec<f64> {
    (1..=n).map(|k| 1.0 / k as f64).collect()
}

/// `10^-(1 + tanh(5(2k/n - 1)))` for `k <= n/2`, then a `1e-2` plateau.
pub fn s_shaped_spectrum(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|k| {
            if 2 * k <= n {
                let x = 5.0 * (-1.0 + 2.0 * k as f64 / n as f64);
                libm::pow(10.0, -(1.0 + libm::tanh(x)))
            } else {
                1e-2
            }
        })
        .collect()
}

/// `U(:, 1:n) diag(d) Vᵀ` with `U` (`m x m`) and `V` (`n x n`) Haar on
/// consecutive streams of `seed`.
pub fn with_spectrum(m: usize, n: usize, seed: RngSeed, d: &[f64]) -> Result<Matrix> {
    if m < n || n == 0 {
        return Err(LinalgError::Dimension(format!(
            "spectral test matrices need m >= n >= 1, got {m}x{n}"
        )));
    }
    let u = haar_orthogonal(m, seed);
    let v = haar_orthogonal(n, seed.offset(1));
    let mut ud = u.columns(0..n);
    for (j, &dj) in d.iter().enumerate() {
        ud.col_mut(j).iter_mut().for_each(|x| *x *= dj);
    }
    Ok(ud.matmul_tr(&v))
}

pub fn gen_fast_decay(m: usize, n: usize, seed: RngSeed, literal: bool) -> Result<(Matrix, Vec<f64>)> {
    let d = fast_decay_spectrum(n, literal);
    Ok((with_spectrum(m, n, seed, &d)?, d))
}

pub fn gen_slow_decay(m: usize, n: usize, seed: RngSeed) -> Result<(Matrix, Vec<f64>)> {
    let d = slow_decay_spectrum(n);
    Ok((with_spectrum(m, n, seed, &d)?, d))
}

pub fn gen_s_shaped(m: usize, n: usize, seed: RngSeed) -> Result<(Matrix, Vec<f64>)> {
    let d = s_shaped_spectrum(n);
    Ok((with_spectrum(m, n, seed, &d)?, d))
}

/// Star boundary point, first and second derivatives at parameter `t`.
fn star(t: f64) -> ([f64; 2], [f64; 2], [f64; 2]) {
    let (s, c) = (libm::sin(t), libm::cos(t));
    let (s5, c5) = (libm::sin(STAR_ARMS * t), libm::cos(STAR_ARMS * t));
    let r = 1.0 + STAR_AMPLITUDE * c5;
    let dr = -STAR_ARMS * STAR_AMPLITUDE * s5;
    let ddr = -STAR_ARMS * STAR_ARMS * STAR_AMPLITUDE * c5;
    let x = [r * c, r * s];
    let dx = [dr * c - r * s, dr * s + r * c];
    let ddx = [ddr * c - 2.0 * dr * s - r * c, ddr * s + 2.0 * dr * c - r * s];
    (x, dx, ddx)
}

/// Nyström matrix `I/2 + h K` of the double-layer operator on the star
/// `r(t) = 1 + 0.3 cos(5t)` with the trapezoidal rule on `n` nodes.
///
/// `K(t, s) = <x(t) - x(s), ν(s)> / (2π |x(t) - x(s)|²) · |x'(s)|` with `ν`
/// the unit normal pointing into the domain, which makes `I/2 + K` the
/// second-kind operator of the interior Dirichlet problem. The diagonal uses
/// the smooth limit `-κ(t) |x'(t)| / (4π)` with the curvature signed
/// relative to `ν`.
pub fn gen_bie(n: usize) -> Result<Matrix> {
    if n < 50 || !n.is_multiple_of(2) {
        return Err(LinalgError::InvalidArgument(format!(
            "BIE discretization needs an even n >= 50, got {n}"
        )));
    }
    let h = 2.0 * PI / n as f64;
    let nodes: Vec<_> = (0..n).map(|i| star(i as f64 * h)).collect();
    Ok(Matrix::from_fn(n, n, |i, j| {
        let (xt, _, _) = nodes[i];
        let (xs, dxs, ddxs) = nodes[j];
        let speed = libm::hypot(dxs[0], dxs[1]);
        // Inward normal of a counter-clockwise curve.
        let nu = [-dxs[1] / speed, dxs[0] / speed];
        let kernel = if i == j {
            // <x'', ν> / (2 |x'|²) is the limit of the quotient; κ = -<x'', ν>/|x'|².
            let kappa = -(ddxs[0] * nu[0] + ddxs[1] * nu[1]) / (speed * speed);
            -kappa * speed / (4.0 * PI)
        } else {
            let d = [xt[0] - xs[0], xt[1] - xs[1]];
            let dist2 = d[0] * d[0] + d[1] * d[1];
            (d[0] * nu[0] + d[1] * nu[1]) / (2.0 * PI * dist2) * speed
        };
        let diag = if i == j { 0.5 } else { 0.0 };
        diag + h * kernel
    }))
}

/// Kahan's matrix `diag(1, s, ..., s^(n-1)) T` with `s = sin θ` and `T` unit
/// upper triangular with every strictly upper entry `-cos θ`.
pub fn gen_kahan(n: usize, theta: f64) -> Result<Matrix> {
    if n < 2 {
        return Err(LinalgError::InvalidArgument("Kahan matrix needs n >= 2".into()));
    }
    if !(theta > 0.0 && theta < PI / 2.0) {
        return Err(LinalgError::InvalidArgument(format!(
            "Kahan angle must lie in (0, pi/2), got {theta}"
        )));
    }
    let (s, c) = (libm::sin(theta), libm::cos(theta));
    Ok(Matrix::from_fn(n, n, |i, j| {
        let scale = libm::pow(s, i as f64);
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => scale,
            std::cmp::Ordering::Less => -c * scale,
            std::cmp::Ordering::Greater => 0.0,
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_decay_endpoints() {
        let graded = fast_decay_spectrum(160, false);
        assert_eq!(graded[0], 1.0);
        assert!((graded[159] / 1e-20 - 1.0).abs() < 1e-12);
        let literal = fast_decay_spectrum(160, true);
        assert_eq!(literal[0], 1.0);
        assert_eq!(literal[1], 1e-20);
        assert!(literal[17..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn slow_decay_values() {
        let d = slow_decay_spectrum(160);
        assert_eq!(d[0], 1.0);
        assert_eq!(d[159], 0.00625);
        assert_eq!(d[0] / d[159], 160.0);
    }

    #[test]
    fn s_shaped_values() {
        let d = s_shaped_spectrum(160);
        assert!((d[79] - 0.1).abs() < 1e-16);
        assert_eq!(d[99], 1e-2);
        assert_eq!(d[159], 1e-2);
        let first = 10f64.powf(-(1.0 + (5.0f64 * (-1.0 + 2.0 / 160.0)).tanh()));
        assert!((d[0] - first).abs() < 1e-15);
        // 1 + tanh(-4.9375) is about 1.03e-4.
        assert!(d[0] > 0.9997 && d[0] < 0.9998, "{}", d[0]);
    }

    #[test]
    fn kahan_two_by_two() {
        let a = gen_kahan(2, PI / 3.0).unwrap();
        let s = (PI / 3.0).sin();
        assert_eq!(a[(0, 0)], 1.0);
        assert!((a[(0, 1)] + 0.5).abs() < 1e-15);
        assert_eq!(a[(1, 0)], 0.0);
        assert!((a[(1, 1)] - s).abs() < 1e-15);
        assert!((a[(1, 1)] - 0.8660254037844386).abs() < 1e-15);
    }

    #[test]
    fn kahan_diagonal_is_geometric() {
        let a = gen_kahan(8, 1.2).unwrap();
        let s = 1.2f64.sin();
        for k in 0..8 {
            assert!((a[(k, k)] - s.powi(k as i32)).abs() < 1e-15);
        }
        assert!(gen_kahan(1, 1.2).is_err());
        assert!(gen_kahan(4, 2.0).is_err());
    }

    #[test]
    fn bie_rejects_bad_sizes() {
        assert!(gen_bie(48).is_err());
        assert!(gen_bie(51).is_err());
        assert_eq!(gen_bie(50).unwrap().shape(), (50, 50));
    }

    #[test]
    fn bie_diagonal_matches_off_diagonal_limit() {
        // The kernel is smooth, so the diagonal value should be close to its
        // neighbours evaluated at nearby parameters.
        let t = 0.37;
        let (xs, dxs, _) = star(t);
        let speed = dxs[0].hypot(dxs[1]);
        let nu = [-dxs[1] / speed, dxs[0] / speed];
        let near = |dt: f64| {
            let (xt, _, _) = star(t + dt);
            let d = [xt[0] - xs[0], xt[1] - xs[1]];
            (d[0] * nu[0] + d[1] * nu[1]) / (2.0 * PI * (d[0] * d[0] + d[1] * d[1])) * speed
        };
        let limit = 0.5 * (near(1e-5) + near(-1e-5));
        let (_, _, ddx) = star(t);
        let kappa = -(ddx[0] * nu[0] + ddx[1] * nu[1]) / (speed * speed);
        let diag = -kappa * speed / (4.0 * PI);
        assert!((limit - diag).abs() < 1e-8, "{limit} vs {diag}");
    }

    #[test]
    fn bie_reproduces_constant_density() {
        // The inward-normal double layer maps the constant 1 to 1/2 on the
        // boundary, so every row of I/2 + hK sums to one up to quadrature error.
        let n = 200;
        let a = gen_bie(n).unwrap();
        for i in 0..n {
            let row: f64 = (0..n).map(|j| a[(i, j)]).sum();
            assert!((row - 1.0).abs() < 1e-10, "row {i} sums to {row}");
        }
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = TestMatrixSpec::new(MatrixKind::Kahan, RngSeed::new(7, 1));
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains("\"kind\":\"kahan\""));
        let back: TestMatrixSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
    }
}
