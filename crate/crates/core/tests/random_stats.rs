use urv_core::random::{gaussian_matrix, haar_orthogonal, GaussianStream, RngSeed};

const TRIALS: u64 = 10_000;

#[test]
fn pooled_gaussian_moments() {
    // 3 sigma bands for N = 1e5 are about 0.0095 (mean) and 0.0134 (variance).
    for seed in [RngSeed::new(0, 0), RngSeed::new(123, 7)] {
        let g = gaussian_matrix(400, 250, seed);
        let xs = g.as_slice();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() <= 0.02, "mean {mean}");
        assert!((0.98..=1.02).contains(&var), "variance {var}");
        let kurt = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n / var.powi(2);
        assert!((kurt - 3.0).abs() < 0.1, "kurtosis {kurt}");
    }
}

#[test]
fn stream_matches_matrix_fill() {
    let seed = RngSeed::new(5, 1);
    let mut s = GaussianStream::new(seed);
    let direct: Vec<f64> = (0..12).map(|_| s.next_normal()).collect();
    assert_eq!(gaussian_matrix(4, 3, seed).as_slice(), direct.as_slice());
}

#[test]
fn haar_one_by_one_is_a_fair_sign() {
    let mut positive = 0;
    for s in 0..TRIALS {
        let q = haar_orthogonal(1, RngSeed::new(s, 0))[(0, 0)];
        assert!(q == 1.0 || q == -1.0);
        positive += usize::from(q > 0.0);
    }
    let freq = positive as f64 / TRIALS as f64;
    assert!((freq - 0.5).abs() <= 0.015, "{freq}");
}

#[test]
fn haar_two_by_two_moment_and_determinant() {
    let mut moment = 0.0;
    let mut negative_det = 0;
    for s in 0..TRIALS {
        let q = haar_orthogonal(2, RngSeed::new(s, 1));
        moment += q[(0, 0)].powi(2);
        let det = q[(0, 0)] * q[(1, 1)] - q[(0, 1)] * q[(1, 0)];
        assert!((det.abs() - 1.0).abs() <= 1e-12);
        negative_det += usize::from(det < 0.0);
    }
    let moment = moment / TRIALS as f64;
    assert!((moment - 0.5).abs() <= 0.015, "{moment}");
    // Haar measure on O(2) puts half its mass on each component.
    let frac = negative_det as f64 / TRIALS as f64;
    assert!((frac - 0.5).abs() <= 0.02, "{frac}");
}

#[test]
fn rotated_haar_keeps_entry_moments() {
    let n = 4;
    let w_fixed = [
        haar_orthogonal(n, RngSeed::new(99, 99)),
        urv_core::matrix::Matrix::identity(n),
    ];
    for w in &w_fixed {
        let mut second = vec![0.0; n * n];
        let trials = 4000;
        for s in 0..trials {
            let q = w.matmul(&haar_orthogonal(n, RngSeed::new(s, 2)));
            for (acc, x) in second.iter_mut().zip(q.as_slice()) {
                *acc += x * x;
            }
        }
        for m in second {
            // E q_ij^2 = 1/n; the sample standard error is about 0.003 here.
            assert!((m / trials as f64 - 0.25).abs() < 0.02);
        }
    }
}

#[test]
fn haar_determinant_is_unit_for_larger_n() {
    for n in [3usize, 8, 20] {
        let q = haar_orthogonal(n, RngSeed::new(n as u64, 5));
        assert!(q.orthogonality_error() <= 10.0 * n as f64 * f64::EPSILON);
        // |det Q| from the R factor of an unpivoted QR of Q itself.
        let f = urv_core::qr::householder_qr(&q, 4).unwrap();
        let det: f64 = (0..n).map(|i| f.r[(i, i)]).product();
        assert!((det.abs() - 1.0).abs() <= 1e-12);
    }
}
