//! The diagonal blocks `G^{k,N}_{k,k+N}` and their growth in `N`.

use super::{fit_slope, ExperimentConfig, RunMode, SlopeFit};
use crate::dyadic::{DyadicRational, FrequencyConfig};
use crate::error::{Error, Result};
use crate::kernels::KernelSet;
use crate::projection::{block_profile, direct_block, BlockProfile};
use crate::quad::QuadratureSpec;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagonalPoint {
    pub n: i64,
    /// `(k, ||G^{k,N}_{k,k+N}||_q^q)`.
    pub per_k: Vec<(i64, f64)>,
    pub d: f64,
    /// `c_1 R^{-1/q} 2^{N(1/q - 1 - s)}`.
    pub lower_bound: f64,
    /// Largest relative gap between periodic and direct block norms, when both ran.
    pub mode_gap: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagonalReport {
    pub points: Vec<DiagonalPoint>,
    pub fit: SlopeFit,
    pub target_slope: f64,
    pub c1: f64,
    /// `min_{N,k} 2^{Nq} ||G^{k,N}_{k,k+N}||_q^q`, to be compared with `c1_block`.
    pub per_k_floor: f64,
    /// The per-block constant behind `c1`.
    pub c1_block: f64,
}

/// `int_0^{1/2} eta`.
pub fn eta_half_mass(kernels: &KernelSet) -> f64 {
    let cut = kernels.eta.restrict(&DyadicRational::zero(), &DyadicRational::new(1, -1));
    cut.integral().to_f64().unwrap_or(0.0)
}

/// `(c_1, c)` with `||G^{k,N}_{k,k+N}||_q^q >= c 2^{-Nq}` for each `k` and
/// `D(N) >= c_1 R^{-1/q} 2^{N(1/q-1-s)}` once `#A >= 2^{N-1}/R`.
///
/// Half of the `2^k` cells carry `|2^k <h, eta>| = 2^{1-N} int_0^{1/2} eta` times
/// `|psi_k * h| >= c_0` on an interval of length `|J| 2^{-k}`.
pub fn lower_constants(kernels: &KernelSet, q: f64) -> (f64, f64) {
    let jl = kernels.j.length().to_f64();
    let a = 2.0 * eta_half_mass(kernels);
    let c = 0.5 * (a * kernels.c0).powf(q) * jl;
    let c1 = (0.5 * c).powf(1.0 / q);
    (c1, c)
}

/// `||G^{k,N}_{k,k+N}||_q^q` for every `k` in `A`, periodic where the profile allows.
fn diagonal_norms(cfg: &FrequencyConfig, kernels: &KernelSet, q: f64, spec: &QuadratureSpec, mode: &RunMode, profile: Option<&BlockProfile>) -> Result<(Vec<(i64, f64)>, Option<f64>)> {
    let n = cfg.n;
    let mut out = Vec::new();
    let mut gap: Option<f64> = None;
    for &k in &cfg.exponents {
        let direct = || direct_block(k, k + n, k, n, kernels).and_then(|g| g.lq_norm_pow(q, spec));
        let v = match (mode, profile) {
            (RunMode::Direct, _) | (_, None) => direct()?,
            (_, Some(p)) if k < p.min_k() => direct()?,
            (RunMode::Periodic, Some(p)) => p.norm_pow(k)?,
            (RunMode::Both, Some(p)) => {
                let a = p.norm_pow(k)?;
                let b = direct()?;
                let g = (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
                gap = Some(gap.map_or(g, |x: f64| x.max(g)));
                a
            }
        };
        out.push((k, v));
    }
    Ok((out, gap))
}

/// `D(N) = 2^{-Ns} (sum_k ||G^{k,N}_{k,k+N}||_q^q)^{1/q}`.
pub fn diagonal_value(per_k: &[(i64, f64)], n: i64, q: f64, s: f64) -> f64 {
    (-(n as f64) * s).exp2() * per_k.iter().map(|p| p.1).sum::<f64>().powf(1.0 / q)
}

pub fn diagonal_point(config: &ExperimentConfig, kernels: &KernelSet, n: i64) -> Result<DiagonalPoint> {
    let pr = config.params;
    let cfg = config.frequency_config(n)?;
    if config.mode != RunMode::Periodic {
        config.check_direct(&cfg)?;
    }
    let profile = match config.mode {
        RunMode::Direct => None,
        _ => Some(block_profile(0, 0, n, kernels, pr.q, &config.spec)?),
    };
    let (per_k, mode_gap) = diagonal_norms(&cfg, kernels, pr.q, &config.spec, &config.mode, profile.as_ref())?;
    let d = diagonal_value(&per_k, n, pr.q, pr.s);
    let (c1, _) = lower_constants(kernels, pr.q);
    let lower_bound = c1 * (config.r as f64).powf(-1.0 / pr.q) * (n as f64 * pr.target_slope()).exp2();
    Ok(DiagonalPoint { n, per_k, d, lower_bound, mode_gap })
}

/// Runs every `N`, fits the slope and checks the lower bound.
pub fn run_diagonal(config: &ExperimentConfig, kernels: &KernelSet) -> Result<DiagonalReport> {
    config.validate()?;
    let pr = config.params;
    let points: Vec<DiagonalPoint> = config.n_list.iter().map(|&n| diagonal_point(config, kernels, n)).collect::<Result<_>>()?;
    let fit = fit_slope(&points.iter().map(|p| (p.n as f64, p.d)).collect::<Vec<_>>())?;
    let (c1, c) = lower_constants(kernels, pr.q);
    let per_k_floor = points
        .iter()
        .flat_map(|p| p.per_k.iter().map(move |&(_, v)| v * ((p.n as f64) * pr.q).exp2()))
        .fold(f64::INFINITY, f64::min);
    let report = DiagonalReport { points, fit, target_slope: pr.target_slope(), c1, per_k_floor, c1_block: c };
    if let Some(p) = report.points.iter().find(|p| !(p.d >= p.lower_bound)) {
        return Err(Error::AssertFail(format!("D({}) = {:e} is below the lower bound {:e}", p.n, p.d, p.lower_bound)));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::P1;

    #[test]
    fn periodic_and_direct_agree() {
        let ks = KernelSet::default_set();
        let mut cfg = ExperimentConfig::new(P1, vec![3, 4, 5], 2);
        cfg.mode = RunMode::Both;
        for n in [3, 4, 5] {
            let p = diagonal_point(&cfg, ks, n).unwrap();
            assert!(p.mode_gap.unwrap() < 1e-8, "N={n}: {:?}", p.mode_gap);
        }
    }

    #[test]
    fn every_block_beats_the_per_block_constant() {
        let ks = KernelSet::default_set();
        let cfg = ExperimentConfig::new(P1, vec![4, 5, 6, 7], 4);
        let r = run_diagonal(&cfg, ks).unwrap();
        assert!(r.per_k_floor >= r.c1_block, "{} < {}", r.per_k_floor, r.c1_block);
    }
}
