//! Closed-form size bounds, as base-2 logarithms, for the blocks `G^{j,N}_{k,l}`
//! and for the off-diagonal sums `V_{m,n}`. Constants are not included.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Regimes for `||G^{j,N}_{k,l}||_q`: `J*` have `k >= j`, `K*` have `k <= j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GRegime {
    J1,
    J2,
    J3,
    K1,
    K2,
    K3,
    K4,
    K5,
    K6,
}

impl GRegime {
    pub const ALL: [GRegime; 9] =
        [GRegime::J1, GRegime::J2, GRegime::J3, GRegime::K1, GRegime::K2, GRegime::K3, GRegime::K4, GRegime::K5, GRegime::K6];

    pub fn label(self) -> &'static str {
        match self {
            GRegime::J1 => "J1",
            GRegime::J2 => "J2",
            GRegime::J3 => "J3",
            GRegime::K1 => "K1",
            GRegime::K2 => "K2",
            GRegime::K3 => "K3",
            GRegime::K4 => "K4",
            GRegime::K5 => "K5",
            GRegime::K6 => "K6",
        }
    }

    pub fn applies(self, j: i64, k: i64, l: i64, n: i64) -> bool {
        match self {
            GRegime::J1 => k >= j && l >= j + n,
            GRegime::J2 => k >= j && j <= l && l <= j + n,
            GRegime::J3 => k >= j && l <= j,
            GRegime::K1 => k <= j && j <= l - n,
            GRegime::K2 => k <= l - n && l - n <= j && j <= l,
            GRegime::K3 => l - n <= k && k <= j && j <= l,
            GRegime::K4 => l - n <= k && k <= l && l <= j,
            GRegime::K5 => k <= l - n && l <= j,
            GRegime::K6 => l <= k && k <= j,
        }
    }

    /// `log2` of the bound for `||G||_q`.
    pub fn log2_bound(self, j: i64, k: i64, l: i64, n: i64, q: f64) -> f64 {
        let (j, k, l, n) = (j as f64, k as f64, l as f64, n as f64);
        match self {
            GRegime::J1 => (j - l) + (j - k) / q,
            GRegime::J2 => (j - l) + (l - n - k) / q,
            GRegime::J3 => (l - j) + (l - k - n) / q,
            GRegime::K1 => k - l,
            GRegime::K2 => k - j - n,
            GRegime::K3 => 2.0 * k - j - l + (l - k - n) / q,
            GRegime::K4 => 2.0 * k - 2.0 * j + (l - k - n) / q,
            GRegime::K5 => l + k - 2.0 * j - n,
            GRegime::K6 => 3.0 * k + l - 4.0 * j - n / q,
        }
    }
}

/// Regimes for `V_{m,n}`: `Neg*` have `m <= 0`, `Pos*` have `m >= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VRegime {
    Neg1,
    Neg2,
    Neg3,
    Pos1,
    Pos2,
    Pos3,
    Pos4,
    Pos5,
    Pos6,
}

impl VRegime {
    pub const ALL: [VRegime; 9] =
        [VRegime::Neg1, VRegime::Neg2, VRegime::Neg3, VRegime::Pos1, VRegime::Pos2, VRegime::Pos3, VRegime::Pos4, VRegime::Pos5, VRegime::Pos6];

    pub fn applies(self, m: i64, n: i64, nn: i64) -> bool {
        match self {
            VRegime::Neg1 => m <= 0 && n >= m,
            VRegime::Neg2 => m <= 0 && m - nn <= n && n <= m,
            VRegime::Neg3 => m <= 0 && n <= m - nn,
            VRegime::Pos1 => 0 <= m && m <= n,
            VRegime::Pos2 => 0 <= n && n <= m && m <= n + nn,
            VRegime::Pos3 => n <= 0 && 0 <= m && m <= n + nn,
            VRegime::Pos4 => n <= 0 && 0 <= n + nn && n + nn <= m,
            VRegime::Pos5 => 0 <= n && n <= m - nn,
            VRegime::Pos6 => n + nn <= 0 && 0 <= m,
        }
    }

    /// `log2` of the bound for `V_{m,n}` at `N = nn`.
    pub fn log2_bound(self, m: i64, n: i64, nn: i64, q: f64, s: f64) -> f64 {
        let (m, n, nn) = (m as f64, n as f64, nn as f64);
        let a = 1.0 / q - 1.0 - s;
        match self {
            VRegime::Neg1 => nn * a - n * (1.0 + s) + m * (1.0 + 1.0 / q),
            VRegime::Neg2 => nn * a + n * a + m,
            VRegime::Neg3 => (nn + n) * (1.0 / q - s) + nn + n - m,
            VRegime::Pos1 => nn * a - n * (1.0 + s),
            VRegime::Pos2 => nn * a - m - s * n,
            VRegime::Pos3 => nn * a + n * a - m,
            VRegime::Pos4 => nn * (1.0 / q - s) - 2.0 * m + n * (1.0 / q - s),
            VRegime::Pos5 => nn * (1.0 / q - s) - 2.0 * m + n * (1.0 - s),
            VRegime::Pos6 => (nn + n) * (1.0 - s) - 4.0 * m,
        }
    }
}

/// The smallest applicable bound for `V_{m,n}` and its regime.
pub fn v_bound(m: i64, n: i64, nn: i64, q: f64, s: f64) -> Result<(VRegime, f64)> {
    VRegime::ALL
        .iter()
        .filter(|r| r.applies(m, n, nn))
        .map(|&r| (r, r.log2_bound(m, n, nn, q, s)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::Regime(format!("no regime for (m, n) = ({m}, {n}) at N = {nn}")))
}

/// `min{s + 1, 1/q - s - 1} / 2`.
pub fn epsilon(q: f64, s: f64) -> f64 {
    (s + 1.0).min(1.0 / q - s - 1.0) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn v_regimes_exhaust_the_plane(m in -60i64..60, n in -60i64..60, nn in 1i64..20) {
            prop_assert!(v_bound(m, n, nn, 1.2, -0.5).is_ok());
        }

        #[test]
        fn g_regimes_exhaust_the_index_space(j in 0i64..30, k in 0i64..30, l in 0i64..40, nn in 1i64..10) {
            prop_assume!(l >= nn);
            prop_assert!(GRegime::ALL.iter().any(|r| r.applies(j, k, l, nn)));
        }

        #[test]
        fn shared_boundaries_agree_for_v(m in 0i64..30, nn in 1i64..12) {
            // on m = n both Pos1 and Pos2 apply and coincide
            let (q, s) = (1.2, -0.5);
            prop_assert!((VRegime::Pos1.log2_bound(m, m, nn, q, s) - VRegime::Pos2.log2_bound(m, m, nn, q, s)).abs() < 1e-9);
        }
    }

    #[test]
    fn epsilon_at_p1() {
        assert!((epsilon(1.2, -0.5) - (1.0f64 / 3.0).min(0.5) / 2.0).abs() < 1e-15);
    }
}
