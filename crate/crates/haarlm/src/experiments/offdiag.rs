//! The off-diagonal sums `V_{m,n} = 2^{-s(n+N)} (sum_k ||G^{k+m,N}_{k,k+N+n}||_q^q)^{1/q}`.

use super::bounds::{epsilon, v_bound, VRegime};
use super::diagonal::diagonal_point;
use super::{ExperimentConfig, RunMode};
use crate::dyadic::FrequencyConfig;
use crate::error::{Error, Result};
use crate::kernels::KernelSet;
use crate::projection::{block_profile, direct_block};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairValue {
    pub m: i64,
    pub n: i64,
    pub value: f64,
    pub regime: VRegime,
    /// The regime bound without its constant.
    pub bound: f64,
    pub ratio: f64,
    pub blocks: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OffDiagonalReport {
    pub n: i64,
    pub r: i64,
    pub window: i64,
    pub pairs: Vec<PairValue>,
    pub window_sum: f64,
    /// Largest `V / bound` in the window.
    pub constant: f64,
    /// Largest `V / bound` in the window per regime; the constants used for the tail.
    pub regime_constants: Vec<(VRegime, f64)>,
    /// Sum over every contributing pair outside the window of its regime constant
    /// (or `constant` for a regime absent from the window) times its bound.
    pub tail_bound: f64,
    pub tail_pairs: usize,
    pub u: f64,
    pub d: f64,
    pub ratio: f64,
    /// `window_sum / d`, free of any tail constant.
    pub window_ratio: f64,
    pub epsilon: f64,
    /// Pair with the largest value.
    pub dominant: Option<(i64, i64)>,
}

/// `A` as a bit set for fast `A ∩ (A - m) ∩ (A - n)` tests.
struct ExpSet {
    bits: Vec<u64>,
    max: i64,
}

impl ExpSet {
    fn new(a: &[i64]) -> Self {
        let max = *a.iter().max().unwrap_or(&0);
        let mut bits = vec![0u64; (max as usize) / 64 + 1];
        for &k in a {
            bits[k as usize / 64] |= 1 << (k % 64);
        }
        ExpSet { bits, max }
    }

    fn has(&self, k: i64) -> bool {
        k >= 0 && k <= self.max && self.bits[k as usize / 64] >> (k % 64) & 1 == 1
    }
}

/// `k` in `A` with `k + m` and `k + n` in `A`.
fn block_ks(a: &[i64], set: &ExpSet, m: i64, n: i64) -> Vec<i64> {
    a.iter().copied().filter(|&k| set.has(k + m) && set.has(k + n)).collect()
}

/// `sum_k ||G^{k+m,N}_{k,k+N+n}||_q^q` over the given `k`.
pub fn block_sum(m: i64, n: i64, ks: &[i64], nn: i64, kernels: &KernelSet, config: &ExperimentConfig) -> Result<f64> {
    let q = config.params.q;
    let direct = |k: i64| direct_block(k, k + nn + n, k + m, nn, kernels).and_then(|g| g.lq_norm_pow(q, &config.spec));
    if config.mode == RunMode::Direct {
        return ks.iter().map(|&k| direct(k)).sum();
    }
    let prof = block_profile(m, n, nn, kernels, q, &config.spec)?;
    ks.iter().map(|&k| if k < prof.min_k() { direct(k) } else { prof.norm_pow(k) }).sum()
}

fn in_pairs(m: i64, n: i64, r: i64) -> bool {
    m.abs() >= r || n.abs() >= r
}

pub fn run_offdiagonal(config: &ExperimentConfig, kernels: &KernelSet, nn: i64) -> Result<OffDiagonalReport> {
    config.validate()?;
    let (q, s) = (config.params.q, config.params.s);
    let cfg: FrequencyConfig = config.frequency_config(nn)?;
    let a = &cfg.exponents;
    let set = ExpSet::new(a);
    let w = config.window();
    let span = cfg.max_exponent() - cfg.exponents[0];
    let mut pairs = Vec::new();
    for m in -w.min(span)..=w.min(span) {
        for n in -w.min(span)..=w.min(span) {
            if !in_pairs(m, n, config.r) {
                continue;
            }
            let ks = block_ks(a, &set, m, n);
            if ks.is_empty() {
                continue;
            }
            let sum = block_sum(m, n, &ks, nn, kernels, config)?;
            let value = (-s * (n + nn) as f64).exp2() * sum.powf(1.0 / q);
            let (regime, lb) = v_bound(m, n, nn, q, s)?;
            let bound = lb.exp2();
            pairs.push(PairValue { m, n, value, regime, bound, ratio: value / bound, blocks: ks.len() });
        }
    }
    let window_sum: f64 = pairs.iter().map(|p| p.value).sum();
    let constant = pairs.iter().map(|p| p.ratio).fold(0.0, f64::max);
    let regime_constants: Vec<(VRegime, f64)> = VRegime::ALL
        .iter()
        .filter_map(|&r| {
            let c = pairs.iter().filter(|p| p.regime == r).map(|p| p.ratio).fold(f64::NAN, f64::max);
            (!c.is_nan()).then_some((r, c))
        })
        .collect();
    let constant_of = |r: VRegime| regime_constants.iter().find(|x| x.0 == r).map_or(constant, |x| x.1);
    let mut tail = 0.0;
    let mut tail_pairs = 0;
    for m in -span..=span {
        for n in -span..=span {
            if (m.abs() <= w && n.abs() <= w) || !in_pairs(m, n, config.r) {
                continue;
            }
            if !a.iter().any(|&k| set.has(k + m) && set.has(k + n)) {
                continue;
            }
            let (r, lb) = v_bound(m, n, nn, q, s)?;
            tail += constant_of(r) * lb.exp2();
            tail_pairs += 1;
        }
    }
    let tail_bound = tail;
    if tail_pairs > 0 && constant == 0.0 {
        return Err(Error::Tail("no nonzero pair in the window to calibrate the tail constant".into()));
    }
    let d = diagonal_point(config, kernels, nn)?.d;
    let u = window_sum + tail_bound;
    let dominant = pairs.iter().max_by(|x, y| x.value.total_cmp(&y.value)).map(|p| (p.m, p.n));
    Ok(OffDiagonalReport {
        n: nn,
        r: config.r,
        window: w,
        pairs,
        window_sum,
        constant,
        regime_constants,
        tail_bound,
        tail_pairs,
        u,
        d,
        ratio: u / d,
        window_ratio: window_sum / d,
        epsilon: epsilon(q, s),
        dominant,
    })
}

/// Reports for each `N` and the first `N` with `U(N) <= D(N)/2`.
pub fn offdiagonal_sweep(config: &ExperimentConfig, kernels: &KernelSet) -> Result<(Vec<OffDiagonalReport>, Option<i64>)> {
    let reps: Vec<OffDiagonalReport> = config.n_list.iter().map(|&n| run_offdiagonal(config, kernels, n)).collect::<Result<_>>()?;
    let n0 = reps.iter().find(|r| r.u <= 0.5 * r.d).map(|r| r.n);
    Ok((reps, n0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::P1;
    use crate::projection::{apply_projection, direct_block};
    use crate::pwpoly::PwPoly;

    #[test]
    fn bitset_membership() {
        let s = ExpSet::new(&[2, 4, 70, 130]);
        assert!(s.has(70) && s.has(130) && !s.has(3) && !s.has(131) && !s.has(-2));
    }

    #[test]
    fn periodic_and_direct_block_sums_agree() {
        let ks = KernelSet::default_set();
        let mut per = ExperimentConfig::new(P1, vec![4], 2);
        let mut dir = per.clone();
        per.mode = RunMode::Periodic;
        dir.mode = RunMode::Direct;
        let cfg = per.frequency_config(4).unwrap();
        let set = ExpSet::new(&cfg.exponents);
        for (m, n) in [(2, 0), (-2, 0), (0, 2), (0, -2), (2, 2), (-2, 2), (2, -2), (4, -4)] {
            let kk = block_ks(&cfg.exponents, &set, m, n);
            let a = block_sum(m, n, &kk, 4, ks, &per).unwrap();
            let b = block_sum(m, n, &kk, 4, ks, &dir).unwrap();
            assert!((a - b).abs() <= 1e-8 * b.abs().max(1e-300), "({m},{n}): {a} vs {b}");
        }
    }

    /// `2^{ks} psi_k * P_E f_N = sum_{j,l} 2^{ks} 2^{-ls} G^{j,N}_{k,l}` exactly, with unit weights.
    #[test]
    fn decomposition_identity() {
        let ks = KernelSet::default_set();
        let n = 2;
        let cfg = crate::dyadic::build_frequency_config(&[2, 4], n, 2).unwrap();
        let mut f = PwPoly::zero();
        for l in cfg.levels() {
            for t in 0..(1i64 << (l - n)) {
                let nu = (1 << n) * t + (1 << (n - 1));
                f = f.add(&crate::kernels::eta_translate(&ks.eta, l, nu));
            }
        }
        let pf = apply_projection(&f, &cfg);
        for k in 1..=5 {
            let direct = crate::norms::psi_k(ks, k).convolve(&pf);
            let mut sum = PwPoly::zero();
            for &j in &cfg.exponents {
                for l in cfg.levels() {
                    sum = sum.add(&direct_block(k, l, j, n, ks).unwrap());
                }
            }
            assert_eq!(sum, direct, "k={k}");
        }
    }
}
