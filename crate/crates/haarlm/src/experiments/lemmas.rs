//! Sweeps of the block, coefficient and convolution size bounds over index grids.
//!
//! Every family is generated from a base point by offsets `o_i in 0..=doublings`
//! along its free indices. The lower band has all offsets below `doublings`; the
//! upper band is the rest. A bound with an absolute constant keeps the
//! band-to-band growth of the largest ratio small.

use super::bounds::GRegime;
use crate::dyadic::{nu_of_mu, DyadicRational};
use crate::error::{Error, Result};
use crate::kernels::{eta_translate, haar_pw, KernelSet};
use crate::norms::psi_k;
use crate::projection::{block_profile, BlockProfile, direct_block, haar_coefficients};
use crate::quad::QuadratureSpec;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

/// Allowed band-to-band growth.
pub const STABILITY_LIMIT: f64 = 2.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaRanges {
    pub n_list: Vec<i64>,
    pub doublings: i64,
    /// Starting gap between a Haar level and a finer-scale kernel or bump level.
    pub margin: i64,
    pub q: f64,
    pub spec: QuadratureSpec,
}

impl LemmaRanges {
    pub fn new(n_list: Vec<i64>, q: f64) -> Self {
        LemmaRanges { n_list, doublings: 2, margin: 8, q, spec: QuadratureSpec::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaRow {
    pub lemma: String,
    pub regime: String,
    pub j: i64,
    pub k: i64,
    pub l: i64,
    pub n: i64,
    pub measured: f64,
    pub bound: f64,
    pub ratio: f64,
    pub upper: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaSummary {
    pub lemma: String,
    pub regime: String,
    pub rows: usize,
    pub zeros: usize,
    pub max_ratio: f64,
    pub lower_max: f64,
    pub upper_max: f64,
    /// `upper_max / lower_max`; `0` when the family vanishes identically.
    pub stability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub rows: Vec<LemmaRow>,
    pub summaries: Vec<LemmaSummary>,
    /// Coefficients of bumps inside one half of a Haar interval, or outside it.
    pub zero_cases: usize,
    pub zero_cases_exact: bool,
    pub max_stability: f64,
}

impl LemmaReport {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        for s in &self.summaries {
            if !s.max_ratio.is_finite() || !(s.stability < STABILITY_LIMIT) {
                v.push(format!("{} {}: max ratio {:e}, stability {:.3}", s.lemma, s.regime, s.max_ratio, s.stability));
            }
        }
        for r in &self.rows {
            if !r.ratio.is_finite() {
                v.push(format!("{} {} at (j,k,l,N)=({},{},{},{}): ratio {}", r.lemma, r.regime, r.j, r.k, r.l, r.n, r.ratio));
            }
        }
        if !self.zero_cases_exact {
            v.push("a coefficient forced to vanish is nonzero".into());
        }
        v
    }
}

fn offsets(d: i64, dims: usize) -> Vec<(Vec<i64>, bool)> {
    let mut out = vec![(Vec::new(), false)];
    for _ in 0..dims {
        out = out.into_iter().flat_map(|(v, up)| (0..=d).map(move |o| ([v.clone(), vec![o]].concat(), up || o == d))).collect();
    }
    out
}

/// `(j, k, l)` from offsets, per regime. Where a regime puts the Haar level `j`
/// above a kernel or bump level, the gap starts at `margin`.
fn g_point(r: GRegime, o: &[i64], n: i64, margin: i64) -> (i64, i64, i64) {
    let (a, b, c, g) = (o[0], o[1], o[2], margin);
    match r {
        GRegime::J1 => (1 + a, 1 + a + b, 1 + a + n + c),
        GRegime::J2 => (2 + a, 2 + a + b, 2 + a + n - c),
        GRegime::J3 => (n + a + g + b, n + a + g + b + c, n + a),
        GRegime::K1 => (1 + a + g + b, 1 + a, 1 + a + g + b + n + c),
        GRegime::K2 => (1 + a + g + b + c, 1 + a, 1 + a + g + b + n),
        GRegime::K3 => (n + 3 + c - b, 3 + c + a, n + 3 + c),
        GRegime::K4 => (n + 1 + c + g + b, 1 + c + a, n + 1 + c),
        GRegime::K5 => (1 + a + n + b + g + c, 1 + a, 1 + a + n + b),
        GRegime::K6 => (n + a + b + g + c, n + a + b, n + a),
    }
}

/// `||G^{j,N}_{k,l}||_q` through the periodic profile, or directly for small `k`.
pub fn g_block_norm(j: i64, k: i64, l: i64, n: i64, kernels: &KernelSet, q: f64, spec: &QuadratureSpec) -> Result<f64> {
    let prof = block_profile(j - k, l - n - k, n, kernels, q, spec)?;
    g_norm_from(&prof, j, k, l, n, kernels, q, spec)
}

/// The `l <= k <= j` bound with `2^{j-k}` overlapping Haar indices per point
/// instead of `2^{k-j}`: `2^{k+l-2j} 2^{-N/q}`.
pub fn k6_recounted_log2(j: i64, k: i64, l: i64, n: i64, q: f64) -> f64 {
    (k + l - 2 * j) as f64 - n as f64 / q
}

fn g_norm_from(prof: &BlockProfile, j: i64, k: i64, l: i64, n: i64, kernels: &KernelSet, q: f64, spec: &QuadratureSpec) -> Result<f64> {
    let v = if k < prof.min_k() { direct_block(k, l, j, n, kernels)?.lq_norm_pow(q, spec)? } else { prof.norm_pow(k)? };
    Ok(v.max(0.0).powf(1.0 / q))
}

fn summarize(rows: &[LemmaRow]) -> Vec<LemmaSummary> {
    let mut groups: BTreeMap<(String, String), Vec<&LemmaRow>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.lemma.clone(), r.regime.clone())).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((lemma, regime), rs)| {
            let mx = |f: &dyn Fn(&&LemmaRow) -> bool| rs.iter().filter(|r| f(r)).map(|r| r.ratio).fold(0.0, f64::max);
            let lower_max = mx(&|r| !r.upper);
            let upper_max = mx(&|r| r.upper);
            let stability = if upper_max == 0.0 {
                0.0
            } else if lower_max == 0.0 {
                f64::INFINITY
            } else {
                upper_max / lower_max
            };
            LemmaSummary {
                lemma,
                regime,
                rows: rs.len(),
                zeros: rs.iter().filter(|r| r.measured == 0.0).count(),
                max_ratio: lower_max.max(upper_max),
                lower_max,
                upper_max,
                stability,
            }
        })
        .collect()
}

fn row(lemma: &str, regime: &str, (j, k, l, n): (i64, i64, i64, i64), measured: f64, log2_bound: f64, upper: bool) -> LemmaRow {
    let bound = log2_bound.exp2();
    LemmaRow { lemma: lemma.into(), regime: regime.into(), j, k, l, n, measured, bound, ratio: measured / bound, upper }
}

fn block_rows(ranges: &LemmaRanges, kernels: &KernelSet) -> Result<Vec<LemmaRow>> {
    let mut rows = Vec::new();
    for &n in &ranges.n_list {
        let mut profiles: HashMap<(i64, i64), BlockProfile> = HashMap::new();
        for r in GRegime::ALL {
            for (o, upper) in offsets(ranges.doublings, 3) {
                let (j, k, l) = g_point(r, &o, n, ranges.margin);
                if !r.applies(j, k, l, n) || j < 0 || k < 1 || l < n {
                    continue;
                }
                let key = (j - k, l - n - k);
                if !profiles.contains_key(&key) {
                    profiles.insert(key, block_profile(key.0, key.1, n, kernels, ranges.q, &ranges.spec)?);
                }
                let g = g_norm_from(&profiles[&key], j, k, l, n, kernels, ranges.q, &ranges.spec)?;
                rows.push(row("block", r.label(), (j, k, l, n), g, r.log2_bound(j, k, l, n, ranges.q), upper));
                if r == GRegime::K6 {
                    rows.push(row("block-recounted", r.label(), (j, k, l, n), g, k6_recounted_log2(j, k, l, n, ranges.q), upper));
                }
            }
        }
    }
    Ok(rows)
}

/// `max_{nu, mu} |<eta_{l,nu}, h_{j,mu}>|`, over all relative positions.
fn max_coefficient(kernels: &KernelSet, j: i64, l: i64) -> f64 {
    let count = if l >= j { (1i64 << (l - j)) + 1 } else { 1 };
    (0..count)
        .flat_map(|nu| haar_coefficients(&eta_translate(&kernels.eta, l, nu), j).entries.into_values())
        .map(|c| c.abs().to_f64().unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max)
}

fn coefficient_rows(ranges: &LemmaRanges, kernels: &KernelSet) -> Vec<LemmaRow> {
    let d = ranges.doublings;
    let mut rows = Vec::new();
    for (o, upper) in offsets(d, 2) {
        let (j, l) = (1 + o[0], 1 + o[0] + o[1]);
        rows.push(row("coefficient", "l>=j", (j, 0, l, 0), max_coefficient(kernels, j, l), -(l as f64), upper));
        let (l, j) = (1 + o[0], 1 + o[0] + ranges.margin + o[1]);
        rows.push(row("coefficient", "l<=j", (j, 0, l, 0), max_coefficient(kernels, j, l), (l - 2 * j) as f64, upper));
    }
    rows
}

fn convolution_rows(ranges: &LemmaRanges, kernels: &KernelSet) -> Result<Vec<LemmaRow>> {
    let d = ranges.doublings;
    let mut rows = Vec::new();
    for (o, upper) in offsets(d, 2) {
        let (j, k) = (1 + o[0], 1 + o[0] + o[1]);
        let g = psi_k(kernels, k).convolve(&haar_pw(j, 0));
        rows.push(row("haar-conv-lq", "k>=j", (j, k, 0, 0), g.lq_norm(ranges.q, &ranges.spec)?, -(k as f64) / ranges.q, upper));
        let (k, j) = (1 + o[0], 1 + o[0] + ranges.margin + o[1]);
        let g = psi_k(kernels, k).convolve(&haar_pw(j, 0));
        rows.push(row("haar-conv-sup", "k<=j", (j, k, 0, 0), g.sup_norm(), (2 * k - 2 * j) as f64, upper));
    }
    Ok(rows)
}

/// Bumps inside `I^+`, inside `I^-` and outside `I_{j,mu}`: coefficient exactly `0`.
pub fn zero_cases(kernels: &KernelSet, n_list: &[i64]) -> (usize, bool) {
    let mut count = 0;
    let mut exact = true;
    for &n in n_list {
        for j in 1..=4 {
            // bumps at level l > j + N never meet a breakpoint of h_{j,mu}
            for l in (j + n + 1)..=(j + n + 2) {
                for t in 0..(1i64 << (l - n)) {
                    let f = eta_translate(&kernels.eta, l, nu_of_mu(n, t));
                    let tab = haar_coefficients(&f, j);
                    count += 1;
                    exact &= tab.entries.values().all(|c| c.is_zero());
                }
            }
        }
    }
    // a bump far outside I_{2,0}
    let f = eta_translate(&kernels.eta, 6, 40);
    let c = haar_coefficients(&f, 2).get(0);
    count += 1;
    exact &= c.is_zero() && DyadicRational::new(40, -6) > DyadicRational::new(1, -2);
    (count, exact)
}

/// Sweeps every family without asserting.
pub fn sweep_lemmas(ranges: &LemmaRanges, kernels: &KernelSet) -> Result<LemmaReport> {
    let mut rows = block_rows(ranges, kernels)?;
    rows.extend(coefficient_rows(ranges, kernels));
    rows.extend(convolution_rows(ranges, kernels)?);
    let summaries = summarize(&rows);
    let max_stability = summaries.iter().map(|s| s.stability).fold(0.0, f64::max);
    let (zero_cases, zero_cases_exact) = zero_cases(kernels, &ranges.n_list);
    Ok(LemmaReport { rows, summaries, zero_cases, zero_cases_exact, max_stability })
}

/// Sweeps and asserts finiteness, band stability and exact zeros.
pub fn verify_lemmas(ranges: &LemmaRanges, kernels: &KernelSet) -> Result<LemmaReport> {
    let rep = sweep_lemmas(ranges, kernels)?;
    let v = rep.violations();
    if !v.is_empty() {
        return Err(Error::AssertFail(v.join("; ")));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_split_into_bands() {
        let o = offsets(2, 2);
        assert_eq!(o.len(), 9);
        assert_eq!(o.iter().filter(|x| !x.1).count(), 4);
    }

    #[test]
    fn generated_points_lie_in_their_regime() {
        for n in [3, 4, 5] {
            for r in GRegime::ALL {
                let inside = offsets(2, 3).iter().filter(|(o, _)| {
                    let (j, k, l) = g_point(r, o, n, 5);
                    r.applies(j, k, l, n)
                }).count();
                assert!(inside >= 8, "{r:?} N={n}: {inside}");
            }
        }
    }

    #[test]
    fn forced_zeros_are_exact() {
        let (count, exact) = zero_cases(KernelSet::default_set(), &[3]);
        assert!(count > 10 && exact);
    }
}
