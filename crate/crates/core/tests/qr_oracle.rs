use proptest::prelude::*;
use urv_core::matrix::Matrix;
use urv_core::qr::{cpqr, householder_qr, DEFAULT_BLOCK_SIZE, PIVOT_TIE_TOLERANCE};
use urv_core::random::{gaussian_matrix, RngSeed};

const EPS: f64 = f64::EPSILON;

/// Textbook Householder QR: one reflector at a time applied to a full
/// `m x m` accumulator, then signs fixed so `diag(R) >= 0`.
fn textbook_qr(a: &Matrix) -> (Matrix, Matrix) {
    let (m, n) = a.shape();
    let mut r = a.clone();
    let mut q = Matrix::identity(m);
    for j in 0..n {
        let x: Vec<f64> = (j..m).map(|i| r[(i, j)]).collect();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let mut v = x.clone();
        v[0] += norm.copysign(x[0]);
        let vv: f64 = v.iter().map(|t| t * t).sum();
        // H = I - 2 v vᵀ / vᵀv on rows j..m of R and columns j..m of Q.
        for c in 0..n {
            let s: f64 = (j..m).map(|i| v[i - j] * r[(i, c)]).sum::<f64>() * 2.0 / vv;
            for i in j..m {
                r[(i, c)] -= s * v[i - j];
            }
        }
        for row in 0..m {
            let s: f64 = (j..m).map(|i| q[(row, i)] * v[i - j]).sum::<f64>() * 2.0 / vv;
            for i in j..m {
                q[(row, i)] -= s * v[i - j];
            }
        }
    }
    let mut q = q.columns(0..n);
    let mut r = r.block(0..n, 0..n);
    for i in 0..n {
        for c in 0..i {
            r[(i, c)] = 0.0;
        }
        if r[(i, i)] < 0.0 {
            for c in 0..n {
                r[(i, c)] = -r[(i, c)];
            }
            for row in 0..m {
                q[(row, i)] = -q[(row, i)];
            }
        }
    }
    (q, r)
}

#[test]
fn blocked_matches_textbook() {
    for (m, n) in [(40, 40), (90, 33), (64, 17), (7, 1)] {
        let a = gaussian_matrix(m, n, RngSeed::new(m as u64, n as u64));
        let (q0, r0) = textbook_qr(&a);
        for nb in [1, 8, DEFAULT_BLOCK_SIZE, 100] {
            let f = householder_qr(&a, nb).unwrap();
            let dr = f.r.sub(&r0).frobenius_norm() / a.frobenius_norm();
            let dq = f.q.sub(&q0).frobenius_norm();
            assert!(dr < 1e-13 && dq < 1e-12, "{m}x{n} nb={nb}: dr={dr:e} dq={dq:e}");
        }
    }
}

#[test]
fn block_sizes_agree_to_roundoff() {
    let a = gaussian_matrix(120, 100, RngSeed::new(11, 2));
    let base = householder_qr(&a, 1).unwrap();
    for nb in [2, 8, 31, 32, 33, 100] {
        let f = householder_qr(&a, nb).unwrap();
        assert!(f.r.sub(&base.r).frobenius_norm() <= 1e-13 * a.frobenius_norm());
    }
}

#[test]
fn deterministic() {
    let a = gaussian_matrix(50, 30, RngSeed::new(1, 2));
    let f = householder_qr(&a, 8).unwrap();
    let g = householder_qr(&a.clone(), 8).unwrap();
    assert_eq!((f.q, f.r), (g.q, g.r));
    let c = cpqr(&a).unwrap();
    let d = cpqr(&a).unwrap();
    assert_eq!((c.q, c.r, c.perm), (d.q, d.r, d.perm));
}

#[test]
fn rejects_bad_input() {
    assert!(householder_qr(&Matrix::zeros(3, 4), 8).is_err());
    assert!(householder_qr(&Matrix::zeros(4, 3), 0).is_err());
    let mut a = Matrix::zeros(4, 3);
    a[(2, 1)] = f64::NAN;
    assert!(householder_qr(&a, 8).is_err());
    assert!(cpqr(&a).is_err());
}

#[test]
fn cpqr_handles_rank_deficiency() {
    // Third column is the sum of the first two.
    let mut a = gaussian_matrix(10, 4, RngSeed::new(9, 9));
    for i in 0..10 {
        a[(i, 2)] = a[(i, 0)] + a[(i, 1)];
    }
    let f = cpqr(&a).unwrap();
    assert!(f.r[(3, 3)].abs() <= 1e-14 * f.r[(0, 0)].abs());
    assert!(f.r[(2, 2)].abs() > 1e-3);
}

fn arb_matrix(max: usize) -> impl Strategy<Value = Matrix> {
    (1usize..max, 1usize..max, any::<u64>())
        .prop_map(|(m, n, s)| gaussian_matrix(m, n, RngSeed::new(s, 3)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn qr_invariants(a in arb_matrix(40), nb in 1usize..40) {
        let a = if a.rows() < a.cols() { a.transpose() } else { a };
        let (m, n) = a.shape();
        let f = householder_qr(&a, nb).unwrap();
        let tol = 10.0 * m.max(n) as f64 * EPS;
        prop_assert!(f.q.orthogonality_error() <= tol);
        prop_assert_eq!(f.r.max_abs_below_diagonal(), 0.0);
        prop_assert!((0..n).all(|i| f.r[(i, i)] >= 0.0));
        prop_assert!(f.q.matmul(&f.r).sub(&a).frobenius_norm() <= tol * a.frobenius_norm());
    }

    #[test]
    fn cpqr_invariants(a in arb_matrix(40)) {
        let (m, n) = a.shape();
        let f = cpqr(&a).unwrap();
        let k = m.min(n);
        let tol = 10.0 * m.max(n) as f64 * EPS;
        prop_assert!(f.q.orthogonality_error() <= tol);
        let ap = a.permute_cols(&f.perm);
        prop_assert!(f.q.matmul(&f.r).sub(&ap).frobenius_norm() <= tol * a.frobenius_norm());
        let slack = PIVOT_TIE_TOLERANCE * f.r[(0, 0)].abs();
        for i in 1..k {
            prop_assert!(f.r[(i, i)].abs() <= f.r[(i - 1, i - 1)].abs() + slack);
        }
        let mut sorted = f.perm.clone();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, (0..n).collect::<Vec<_>>());
    }
}
