//! The test functions `f_N = sum_l 2^{-ls} sum_nu eta_{l,nu}`.

use crate::dyadic::{DyadicRational, FrequencyConfig};
use crate::error::{Error, Result};
use crate::kernels::KernelSet;
use crate::norms::SpaceParams;
use crate::projection::apply_projection;
use crate::pwpoly::PwPoly;

/// Default cap on the number of exact pieces of a test function.
pub const DEFAULT_PIECE_CAP: u64 = 2_000_000;

/// One level of a test function: `weight * f`, with `f` exact.
#[derive(Clone, Debug, PartialEq)]
pub struct TestLevel {
    pub l: i64,
    pub weight: f64,
    pub f: PwPoly,
}

/// The weights `2^{-ls}` are irrational for general `s`, so levels are kept apart.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    pub n: i64,
    pub levels: Vec<TestLevel>,
}

impl TestFunction {
    pub fn eval_f64(&self, x: f64) -> f64 {
        self.levels.iter().map(|t| t.weight * t.f.eval_f64(x)).sum()
    }

    pub fn piece_count(&self) -> usize {
        self.levels.iter().map(|t| t.f.pieces().len()).sum()
    }

    /// Level-wise `P_E`.
    pub fn project(&self, cfg: &FrequencyConfig) -> TestFunction {
        let levels = self.levels.iter().map(|t| TestLevel { l: t.l, weight: t.weight, f: apply_projection(&t.f, cfg) }).collect();
        TestFunction { n: self.n, levels }
    }
}

/// Centre of `eta_{l,nu}` with `nu = 2^N t + 2^{N-1}`, i.e. `(t + 1/2) 2^{N-l}`.
pub fn bump_centre(l: i64, n: i64, t: i64) -> DyadicRational {
    DyadicRational::new(2 * t + 1, n - l - 1)
}

/// Predicted piece count `sum_l 2^{l-N} * #pieces(eta)`.
pub fn test_function_pieces(cfg: &FrequencyConfig, kernels: &KernelSet) -> u64 {
    let per = kernels.eta.pieces().len() as u64;
    cfg.levels().iter().map(|&l| (1u64 << (l - cfg.n).min(62)).saturating_mul(per)).fold(0u64, |a, b| a.saturating_add(b))
}

/// Whether all bump supports `(c - r 2^{-l}, c + r 2^{-l})` are pairwise disjoint, decided exactly.
pub fn bumps_disjoint(cfg: &FrequencyConfig, kernels: &KernelSet) -> bool {
    let Some((lo, hi)) = kernels.eta.support() else { return true };
    let mut iv: Vec<(DyadicRational, DyadicRational)> = Vec::new();
    for l in cfg.levels() {
        for t in 0..(1i64 << (l - cfg.n)) {
            let c = bump_centre(l, cfg.n, t);
            iv.push((&c + &lo.shl(-l), &c + &hi.shl(-l)));
        }
    }
    iv.sort();
    iv.windows(2).all(|w| w[0].1 <= w[1].0)
}

pub fn build_test_function(n: i64, cfg: &FrequencyConfig, kernels: &KernelSet, params: &SpaceParams, cap: u64) -> Result<TestFunction> {
    if cfg.n != n {
        return Err(Error::Domain(format!("configuration is for N={}, not {n}", cfg.n)));
    }
    cfg.validate()?;
    let cost = test_function_pieces(cfg, kernels);
    if cost > cap {
        return Err(Error::Cost(format!("test function needs {cost} pieces, cap is {cap}")));
    }
    let mut levels = Vec::new();
    for l in cfg.levels() {
        let base = kernels.eta.affine_image(l, &DyadicRational::zero());
        let mut terms = Vec::with_capacity(base.pieces().len() << (l - n));
        for t in 0..(1i64 << (l - n)) {
            let c = bump_centre(l, n, t);
            for p in base.pieces() {
                terms.push((&p.left + &c, &p.right + &c, p.coeffs.clone()));
            }
        }
        levels.push(TestLevel { l, weight: (-(l as f64) * params.s).exp2(), f: PwPoly::from_terms(terms) });
    }
    Ok(TestFunction { n, levels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::{build_frequency_config, default_candidates};
    use crate::projection::haar_coefficients;
    use num_traits::Zero;

    #[test]
    fn piece_count_is_predicted() {
        let ks = KernelSet::default_set();
        let cfg = build_frequency_config(&[2, 4], 2, 2).unwrap();
        let f = build_test_function(2, &cfg, ks, &SpaceParams::new(4.0, 1.2, -0.5), DEFAULT_PIECE_CAP).unwrap();
        // levels 4 and 6: 4 + 16 bumps
        assert_eq!(f.piece_count() as u64, 20 * ks.eta.pieces().len() as u64);
        assert_eq!(test_function_pieces(&cfg, ks), 20 * ks.eta.pieces().len() as u64);
        assert!(bumps_disjoint(&cfg, ks));
    }

    #[test]
    fn cost_cap_enforced() {
        let ks = KernelSet::default_set();
        let cfg = build_frequency_config(&default_candidates(5, 2), 5, 2).unwrap();
        let r = build_test_function(5, &cfg, ks, &SpaceParams::new(4.0, 1.2, -0.5), 1000);
        assert!(matches!(r, Err(Error::Cost(_))));
    }

    #[test]
    fn diagonal_level_gives_single_coefficient() {
        let ks = KernelSet::default_set();
        let n = 3;
        let cfg = build_frequency_config(&default_candidates(n, 2), n, 2).unwrap();
        let f = build_test_function(n, &cfg, ks, &SpaceParams::new(4.0, 1.2, -0.5), DEFAULT_PIECE_CAP).unwrap();
        for &k in &cfg.exponents {
            let expect = -DyadicRational::pow2(1 - n - k).to_rational();
            for lv in &f.levels {
                let t = haar_coefficients(&lv.f, k);
                if lv.l == k + n {
                    assert_eq!(t.entries.len(), 1usize << k);
                    assert!(t.entries.values().all(|c| *c == expect));
                } else if lv.l > k + n {
                    assert!(t.entries.values().all(|c| c.is_zero()));
                }
            }
        }
    }
}
