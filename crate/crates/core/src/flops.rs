//! Leading-order flop counts for the dense rank-revealing algorithms.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{LinalgError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlopAlgorithm {
    GolubReinsch,
    Qlp,
    RandUtv,
    PowerUrv,
}

impl FlopAlgorithm {
    pub const ALL: [FlopAlgorithm; 4] = [
        FlopAlgorithm::GolubReinsch,
        FlopAlgorithm::Qlp,
        FlopAlgorithm::RandUtv,
        FlopAlgorithm::PowerUrv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FlopAlgorithm::GolubReinsch => "golub-reinsch",
            FlopAlgorithm::Qlp => "qlp",
            FlopAlgorithm::RandUtv => "randutv",
            FlopAlgorithm::PowerUrv => "powerurv",
        }
    }
}

impl fmt::Display for FlopAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FlopAlgorithm {
    type Err = LinalgError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace(['_', ' '], "-");
        match key.as_str() {
            "golub-reinsch" | "svd" => Ok(FlopAlgorithm::GolubReinsch),
            "qlp" => Ok(FlopAlgorithm::Qlp),
            "randutv" => Ok(FlopAlgorithm::RandUtv),
            "powerurv" | "power-urv" => Ok(FlopAlgorithm::PowerUrv),
            _ => Err(LinalgError::InvalidArgument(format!("unknown algorithm tag {s:?}"))),
        }
    }
}

/// A flop count split by the kind of kernel doing the work.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlopModel {
    pub algorithm: FlopAlgorithm,
    pub total: f64,
    /// Matrix-matrix multiplication and unpivoted QR.
    pub gemm_qr: f64,
    /// Column-pivoted QR.
    pub cpqr: f64,
    pub other: f64,
}

/// Leading-order flop count of `alg` on an `m x n` matrix with `q` power
/// steps (`q` is ignored by the deterministic algorithms).
///
/// Each polynomial is evaluated as an integer numerator over a common
/// denominator of 3, so values are exact for moderate sizes.
pub fn flop_estimate(alg: FlopAlgorithm, m: usize, n: usize, q: usize) -> Result<FlopModel> {
    if n == 0 || m < n {
        return Err(LinalgError::InvalidArgument(format!(
            "flop models need m >= n >= 1, got m = {m}, n = {n}"
        )));
    }
    let (m, n, q) = (m as f64, n as f64, q as f64);
    let total = match alg {
        FlopAlgorithm::GolubReinsch => 4.0 * m * m * n + 8.0 * m * n * n + 9.0 * n * n * n,
        FlopAlgorithm::Qlp => (6.0 * m * n * n + 2.0 * n * n * n) / 3.0,
        FlopAlgorithm::RandUtv => {
            (3.0 * (5.0 + 2.0 * q) * m * n * n - (3.0 + 2.0 * q) * n * n * n) / 3.0
        }
        FlopAlgorithm::PowerUrv => {
            let c = 2.0 * q + 1.0;
            (6.0 * c * m * m * n + 6.0 * c * m * n * n - 2.0 * c * n * n * n) / 3.0
        }
    };
    let (gemm_qr, cpqr, other) = match alg {
        FlopAlgorithm::GolubReinsch => (0.0, 0.0, total),
        FlopAlgorithm::Qlp => (0.0, total, 0.0),
        FlopAlgorithm::RandUtv | FlopAlgorithm::PowerUrv => (total, 0.0, 0.0),
    };
    Ok(FlopModel {
        algorithm: alg,
        total,
        gemm_qr,
        cpqr,
        other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tags_parse() {
        for alg in FlopAlgorithm::ALL {
            assert_eq!(alg.name().parse::<FlopAlgorithm>().unwrap(), alg);
        }
        assert!("strassen".parse::<FlopAlgorithm>().is_err());
    }

    #[test]
    fn rejects_wide_and_empty() {
        assert!(flop_estimate(FlopAlgorithm::Qlp, 3, 4, 0).is_err());
        assert!(flop_estimate(FlopAlgorithm::Qlp, 3, 0, 0).is_err());
    }

    #[test]
    fn randutv_square() {
        // (5 + 2q) - (3 + 2q)/3 = (12 + 4q)/3
        let n = 30usize;
        let f = flop_estimate(FlopAlgorithm::RandUtv, n, n, 2).unwrap();
        assert_eq!(f.total, 20.0 * (n * n * n) as f64 / 3.0);
    }

    proptest! {
        #[test]
        fn positive_and_classified(n in 1usize..500, extra in 0usize..500, q in 0usize..6) {
            for alg in FlopAlgorithm::ALL {
                let f = flop_estimate(alg, n + extra, n, q).unwrap();
                prop_assert!(f.total > 0.0);
                prop_assert_eq!(f.gemm_qr + f.cpqr + f.other, f.total);
            }
        }
    }
}
