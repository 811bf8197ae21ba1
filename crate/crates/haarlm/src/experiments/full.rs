//! Full local-means norms of `f_N` and `P_E f_N` at desk scale.
//!
//! Both functions are sums of translates of one shape per level, so every
//! `psi_k * (level)` is assembled from a few tabulated references. For
//! `P_E f_N`, levels with `k <= l - N - 7` cancel exactly away from the ends of
//! `[0, 1]`; their edge remainder has the closed form of [`periodic_edge`].

use super::testfn::bump_centre;
use crate::dyadic::{DyadicRational, FrequencyConfig};
use crate::error::{Error, Result};
use crate::kernels::{eta_translate, KernelSet};
use crate::lmeans::{sum_parts, Atom, AtomSet, LmParams, RefPoly, Shape};
use crate::norms::{geometric_tail, psi_k, tail_bound, tail_constants, SpaceParams, Smoothness};
use crate::poly::{self, Q};
use crate::projection::apply_projection;
use crate::pwpoly::PwPoly;
use crate::quad::QuadratureSpec;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

/// Settings of a full-norm evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FullSettings {
    pub params: SpaceParams,
    /// Highest local-means level; `None` picks the default for the function.
    pub k_max: Option<i64>,
    /// Relative tolerance for the discarded parts.
    pub tol: f64,
    pub spec: QuadratureSpec,
    /// Levels `k` in `[l - band.0, l + band.1]` are kept for `f_N`.
    pub band: (i64, i64),
}

impl FullSettings {
    pub fn new(params: SpaceParams) -> Self {
        FullSettings { params, k_max: None, tol: 1e-2, spec: QuadratureSpec { nodes: 6, refinement: 2, rel_tol: 1e-6 }, band: (4, 4) }
    }
}

/// A full norm together with its error budget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FullNorm {
    pub value: f64,
    pub k_max: i64,
    /// Bound for dropped `(l, k)` terms, in norm units.
    pub pruned_bound: f64,
    /// Bound for `k > k_max`, in norm units.
    pub tail_bound: f64,
    pub quadrature_error: f64,
    pub per_k: Vec<f64>,
    pub cells: u64,
    pub components: usize,
    pub unique_components: usize,
}

impl FullNorm {
    pub fn truncation_bound(&self) -> f64 {
        self.pruned_bound + self.tail_bound
    }
}

fn check_budget(r: FullNorm, tol: f64, what: &str) -> Result<FullNorm> {
    if !(r.truncation_bound() <= tol * r.value) {
        return Err(Error::Tail(format!(
            "{what}: truncation bound {:e} exceeds {tol:e} x value {:e} at k_max={}",
            r.truncation_bound(),
            r.value,
            r.k_max
        )));
    }
    Ok(r)
}

fn weight(l: i64, s: f64) -> f64 {
    (-(l as f64) * s).exp2()
}

/// `2^d g(2^d x)`.
fn dilate_l1(g: &PwPoly, d: i64) -> PwPoly {
    g.affine_image(d, &DyadicRational::zero()).scale(&DyadicRational::pow2(d).to_rational())
}

/// `(psi_k * eta_l)(x)` with `eta_l = eta(2^l .)`, through the table of `psi_{k-l} * eta`.
pub fn level_convolution(kernels: &KernelSet, k: i64, l: i64) -> Arc<PwPoly> {
    type Table = Mutex<HashMap<(i64, i64), Arc<PwPoly>>>;
    static CACHE: OnceLock<Table> = OnceLock::new();
    let compute = || {
        let g = if k == 0 { dilate_l1(&kernels.psi0, -l) } else { dilate_l1(&kernels.psi, k - l) };
        g.convolve(&kernels.eta)
    };
    let key = if k == 0 { (0, -l) } else { (1, k - l) };
    let base = if std::ptr::eq(kernels, KernelSet::default_set()) {
        let cache = CACHE.get_or_init(Default::default);
        let hit = cache.lock().unwrap().get(&key).cloned();
        match hit {
            Some(v) => v,
            None => {
                let v = Arc::new(compute());
                cache.lock().unwrap().insert(key, v.clone());
                v
            }
        }
    } else {
        Arc::new(compute())
    };
    Arc::new(base.affine_image(l, &DyadicRational::zero()))
}

fn span_len(f: &PwPoly) -> DyadicRational {
    f.support().map(|(a, b)| &b - &a).unwrap_or_else(DyadicRational::zero)
}

fn grid(x: &DyadicRational, unit: i64) -> Result<i64> {
    crate::lmeans::to_grid(x, unit)
}

/// Runs `at` from `start` upwards until the truncation bound fits the tolerance.
/// A fixed `k_max` is tried once.
fn with_budget(st: &FullSettings, start: i64, what: &str, at: impl Fn(i64) -> Result<FullNorm>) -> Result<FullNorm> {
    let mut k = st.k_max.unwrap_or(start);
    let decay = (st.params.s - 1.0 / st.params.p).exp2();
    for _ in 0..6 {
        let r = at(k)?;
        let room = st.tol * r.value - r.pruned_bound;
        if st.k_max.is_some() || r.truncation_bound() <= st.tol * r.value || room <= 0.0 || r.tail_bound == 0.0 {
            return check_budget(r, st.tol, what);
        }
        // the tail shrinks geometrically in k_max
        k += ((0.8 * room / r.tail_bound).ln() / decay.ln()).ceil().max(1.0) as i64;
    }
    Err(Error::Tail(format!("{what}: no k_max up to {k} meets the tolerance")))
}

/// `||f_N||` by local means over levels `k <= k_max` (default from `max L + 4` up).
pub fn test_function_norm(cfg: &FrequencyConfig, kernels: &KernelSet, st: &FullSettings) -> Result<FullNorm> {
    let max_l = *cfg.levels().last().unwrap();
    with_budget(st, max_l + 4, "test function", |k| test_function_norm_at(cfg, kernels, st, k))
}

fn test_function_norm_at(cfg: &FrequencyConfig, kernels: &KernelSet, st: &FullSettings, k_max: i64) -> Result<FullNorm> {
    let pr = st.params;
    pr.check()?;
    let n = cfg.n;
    let levels = cfg.levels();
    let max_l = *levels.last().unwrap();
    let unit = k_max.max(max_l) + 8;
    let nk = (k_max + 1) as usize;
    let mut shapes = Vec::new();
    let mut atoms = Vec::new();
    let mut pruned = 0.0;
    for (li, &l) in levels.iter().enumerate() {
        let w = weight(l, pr.s);
        let period = DyadicRational::pow2(n - l);
        let mut refs = vec![None; nk];
        for k in 0..=k_max {
            let g = level_convolution(kernels, k, l);
            if g.is_zero() {
                continue;
            }
            if k >= l - st.band.0 && k <= l + st.band.1 {
                refs[k as usize] = Some(RefPoly::from_pwpoly(&g, unit)?);
            } else {
                // Hoelder over at most m overlapping translates
                let m = span_len(&g).to_rational() / period.to_rational();
                let m = m.ceil().to_integer().to_f64().unwrap().max(1.0);
                let count = ((l - n) as f64).exp2();
                let gp = g.lq_norm(pr.p, &QuadratureSpec::default())?;
                pruned += ((k as f64) * pr.s).exp2() * w * m.powf(1.0 - 1.0 / pr.p) * count.powf(1.0 / pr.p) * gp;
            }
        }
        shapes.push(Shape { refs });
        for t in 0..(1i64 << (l - n)) {
            atoms.push(Atom { shape: li as u32, pos: grid(&bump_centre(l, n, t), unit)?, w });
        }
    }
    // f_N'' over disjoint bumps
    let e2 = kernels.eta.nth_derivative(2).lq_norm_pow(pr.p, &QuadratureSpec::default())?;
    let d2: f64 = levels
        .iter()
        .map(|&l| weight(l, pr.s).powf(pr.p) * ((l - n) as f64).exp2() * ((2 * l) as f64 * pr.p - l as f64).exp2() * e2)
        .sum::<f64>()
        .powf(1.0 / pr.p);
    let tc = tail_constants(kernels, pr.p)?;
    let tail = tail_bound(&Smoothness { jump_total: 0.0, d1_lp: 0.0, d2_lp: Some(d2) }, &tc, k_max, &pr);
    let set = AtomSet { unit, shapes, atoms };
    let window = 1i64 << (unit - max_l + 2);
    let r = evaluate(&set, kernels, cfg.min_exponent(), &pr, st, k_max, window)?;
    Ok(FullNorm { pruned_bound: pruned, tail_bound: tail, ..r })
}

/// Grid ranges covering the line once after folding. The integrand is even about `1/2`;
/// when the kernel reach is at most half the period `2^{-min A}`, it is also periodic
/// on the part of `[0, 1]` the ends cannot see, so one period carries the bulk.
fn fold_ranges(kernels: &KernelSet, min_a: i64, unit: i64) -> Vec<(i64, i64, f64)> {
    let reach = [&kernels.psi0, &kernels.psi]
        .iter()
        .filter_map(|g| g.support())
        .map(|(a, b)| if -&a > b { -&a } else { b })
        .max()
        .unwrap_or_else(DyadicRational::zero);
    if min_a >= 1 && reach <= DyadicRational::pow2(-min_a - 1) {
        let (p, m) = (1i64 << (unit - min_a), (1i64 << min_a) as f64);
        vec![(i64::MIN, p / 2, 2.0), (p / 2, p, 2.0 * (m - 1.0))]
    } else {
        vec![(i64::MIN, 1i64 << (unit - 1), 2.0)]
    }
}

fn evaluate(set: &AtomSet, kernels: &KernelSet, min_a: i64, pr: &SpaceParams, st: &FullSettings, k_max: i64, window: i64) -> Result<FullNorm> {
    let prm = LmParams {
        p: pr.p,
        q: pr.q,
        s: pr.s,
        k_max: k_max as usize,
        spec: st.spec,
        window,
        ranges: fold_ranges(kernels, min_a, set.unit),
    };
    let res = set.evaluate(&prm)?;
    Ok(FullNorm {
        value: res.integral.max(0.0).powf(1.0 / pr.p),
        k_max,
        pruned_bound: 0.0,
        tail_bound: 0.0,
        quadrature_error: res.quad_err,
        per_k: res.per_k,
        cells: res.cells,
        components: res.components,
        unique_components: res.unique_components,
    })
}

/// `kappa * P_+` near `0`, where `P_+` is the `T`-periodic extension of `pattern`
/// (supported in `[0, T)`, mean zero) to `[0, inf)`.
///
/// Requires every knot of `kappa` to be a multiple of `T`. Integrating by parts
/// `d + 1` times with mean-zero periodic antiderivatives `Q_i` gives
/// `Q_{d+1}(x) kappa^{(d)}(x) - sum_{i=1}^{d+1} Q_i(0) kappa^{(i-1)}(x)`.
pub fn periodic_edge(kappa: &PwPoly, pattern: &PwPoly, period: &DyadicRational) -> Result<PwPoly> {
    let zero = DyadicRational::zero();
    if kappa.is_zero() || pattern.is_zero() {
        return Ok(PwPoly::zero());
    }
    let (a, b) = pattern.support().unwrap();
    if a < zero || &b > period {
        return Err(Error::Support("pattern must live in [0, T)".into()));
    }
    if !pattern.integral().is_zero() {
        return Err(Error::Domain("pattern must have mean zero".into()));
    }
    let tq = period.to_rational();
    for pc in kappa.pieces() {
        for x in [&pc.left, &pc.right] {
            if !(x.to_rational() / &tq).is_integer() {
                return Err(Error::Domain("kernel knots must be multiples of the period".into()));
            }
        }
    }
    let d = kappa.degree();
    let one = PwPoly::indicator(zero.clone(), period.clone());
    let mut qs: Vec<PwPoly> = Vec::with_capacity(d + 1);
    let mut cur = pattern.clone();
    for _ in 0..=d {
        let a = cur.antiderivative()?;
        let mean = a.integral() / &tq;
        cur = a.sub(&one.scale(&mean));
        qs.push(cur.clone());
    }
    let top = qs.last().unwrap();
    let kd = kappa.nth_derivative(d);
    let mut terms = Vec::new();
    for pc in kd.pieces() {
        let c = &pc.coeffs[0];
        if c.is_zero() {
            continue;
        }
        let first = (pc.left.to_rational() / &tq).to_integer().to_i64().unwrap();
        let last = (pc.right.to_rational() / &tq).to_integer().to_i64().unwrap();
        for nu in first..last {
            let off = period * &DyadicRational::from_int(nu);
            for qp in top.pieces() {
                terms.push((&qp.left + &off, &qp.right + &off, poly::scale(&qp.coeffs, c)));
            }
        }
    }
    let main = PwPoly::from_terms(terms);
    let mut corr: Vec<(Q, PwPoly)> = Vec::new();
    let mut kder = kappa.clone();
    for q in &qs {
        let v = q.eval_dyadic(&zero);
        if !v.is_zero() {
            corr.push((-v, kder.clone()));
        }
        kder = kder.derivative();
    }
    let mut parts: Vec<(Q, &PwPoly)> = vec![(Q::from_integer(1.into()), &main)];
    parts.extend(corr.iter().map(|(c, f)| (c.clone(), f)));
    Ok(PwPoly::linear_combination(&parts))
}

/// `P_E eta_{l,nu}` translated so that the bump centre is at `0`.
pub fn projected_bump(cfg: &FrequencyConfig, kernels: &KernelSet, l: i64) -> PwPoly {
    let c = bump_centre(l, cfg.n, 0);
    let nu = crate::dyadic::nu_of_mu(cfg.n, 0);
    apply_projection(&eta_translate(&kernels.eta, l, nu), cfg).translate(&-&c)
}

/// `int_{-inf}^x g - (int g) H(x)`, compactly supported when `g` is and its support contains `0`.
fn heaviside_remainder(g: &PwPoly) -> Result<PwPoly> {
    let (_, r) = g.support().ok_or_else(|| Error::Degenerate("empty kernel".into()))?;
    let m = g.integral();
    let rq = r.to_rational();
    let ramp = PwPoly::from_piece(DyadicRational::zero(), r.clone(), vec![Q::zero(), &m / &rq]);
    let g_flat = g.sub(&PwPoly::indicator(DyadicRational::zero(), r.clone()).scale(&(&m / &rq)));
    let minus = PwPoly::indicator(DyadicRational::zero(), r).scale(&m);
    Ok(g_flat.antiderivative()?.add(&ramp).sub(&minus))
}

/// Jumps of a step function as `(grid position, size)`.
fn step_jumps(f: &PwPoly, unit: i64) -> Result<Vec<(i64, f64)>> {
    crate::norms::jumps(f).into_iter().map(|(x, j)| Ok((grid(&x, unit)?, j.to_f64().unwrap()))).collect()
}

/// `||P_E f_N||` by local means over `k <= k_max` (default from `max A + 3` up).
pub fn projected_norm(cfg: &FrequencyConfig, kernels: &KernelSet, st: &FullSettings) -> Result<FullNorm> {
    with_budget(st, cfg.max_exponent() + 3, "projected test function", |k| projected_norm_at(cfg, kernels, st, k))
}

fn projected_norm_at(cfg: &FrequencyConfig, kernels: &KernelSet, st: &FullSettings, k_max: i64) -> Result<FullNorm> {
    let pr = st.params;
    pr.check()?;
    let n = cfg.n;
    let levels = cfg.levels();
    let max_a = cfg.max_exponent();
    let unit = k_max.max(max_a) + 10;
    let nk = (k_max + 1) as usize;
    let big_psi: Vec<Option<RefPoly>> = (0..=k_max)
        .map(|k| if k == 0 { Ok(None) } else { RefPoly::from_pwpoly(&kernels.big_psi.affine_image(k, &DyadicRational::zero()), unit).map(Some) })
        .collect::<Result<_>>()?;
    // theta * S = m S + sum_i J_i (Theta - m H)(x - p_i) with compact Theta - m H
    let theta_mass = kernels.psi0.integral();
    let theta_jump = RefPoly::from_pwpoly(&heaviside_remainder(&kernels.psi0)?, unit)?;
    let mut shapes = Vec::new();
    let mut atoms = Vec::new();
    let mut edge: Vec<Vec<(RefPoly, f64)>> = vec![Vec::new(); nk];
    let mut all_jumps: BTreeMap<i64, f64> = BTreeMap::new();
    for (li, &l) in levels.iter().enumerate() {
        let w = weight(l, pr.s);
        let sl = projected_bump(cfg, kernels, l);
        let period = DyadicRational::pow2(n - l);
        let js = step_jumps(&sl, unit)?;
        let step = RefPoly::from_pwpoly(&sl.scale(&theta_mass), unit)?;
        let first = (l - n - 6).max(0);
        let mut refs = vec![None; nk];
        for k in 0..=k_max {
            if k < first {
                let pattern = sl.translate(&period.shl(-1));
                let kappa = if k == 0 { kernels.psi0.clone() } else { psi_k(kernels, k) };
                let e = periodic_edge(&kappa, &pattern, &period)?;
                if !e.is_zero() {
                    edge[k as usize].push((RefPoly::from_pwpoly(&e, unit)?, w));
                }
                continue;
            }
            let base = if k == 0 { &theta_jump } else { big_psi[k as usize].as_ref().unwrap() };
            let mut parts: Vec<(&RefPoly, i64, f64)> = js.iter().map(|&(x, j)| (base, x, j)).collect();
            if k == 0 {
                parts.push((&step, 0, 1.0));
            }
            let (lo, hi) = (js[0].0 + base.a[0], js.last().unwrap().0 + base.b.last().unwrap());
            let r = sum_parts(&parts, lo, hi, unit);
            if !r.is_empty() {
                refs[k as usize] = Some(r);
            }
        }
        shapes.push(Shape { refs });
        for t in 0..(1i64 << (l - n)) {
            let pos = grid(&bump_centre(l, n, t), unit)?;
            atoms.push(Atom { shape: li as u32, pos, w });
            for &(x, j) in &js {
                *all_jumps.entry(pos + x).or_insert(0.0) += w * j;
            }
        }
    }
    let edge_refs: Vec<Option<RefPoly>> = edge
        .iter()
        .map(|v| {
            if v.is_empty() {
                return None;
            }
            let parts: Vec<(&RefPoly, i64, f64)> = v.iter().map(|(r, w)| (r, 0, *w)).collect();
            let lo = v.iter().map(|(r, _)| r.a[0]).min().unwrap();
            let hi = v.iter().map(|(r, _)| *r.b.last().unwrap()).max().unwrap();
            Some(sum_parts(&parts, lo, hi, unit)).filter(|r| !r.is_empty())
        })
        .collect();
    if edge_refs.iter().any(|r| r.is_some()) {
        shapes.push(Shape { refs: edge_refs });
        atoms.push(Atom { shape: (shapes.len() - 1) as u32, pos: 0, w: 1.0 });
    }
    let tail = step_tail(&all_jumps, unit, kernels, k_max, &pr)?;
    let set = AtomSet { unit, shapes, atoms };
    let window = 1i64 << (unit - max_a);
    let r = evaluate(&set, kernels, cfg.min_exponent(), &pr, st, k_max, window)?;
    Ok(FullNorm { tail_bound: tail, ..r })
}

/// Tail bound for a step function whose jumps are further apart than the reach of
/// every `Psi(2^k .)` with `k > k_max`: the pieces then decouple and
/// `||(sum_{k>k_max} 2^{ksq} |psi_k * f|^q)^{1/q}||_p <= ||J||_{l^p} ||Psi||_p sum_k 2^{k(s - 1/p)}`.
fn step_tail(jumps: &BTreeMap<i64, f64>, unit: i64, kernels: &KernelSet, k_max: i64, pr: &SpaceParams) -> Result<f64> {
    let pos: Vec<i64> = jumps.iter().filter(|(_, v)| **v != 0.0).map(|(x, _)| *x).collect();
    let gap = pos.windows(2).map(|w| w[1] - w[0]).min().unwrap_or(i64::MAX);
    let (lo, hi) = kernels.big_psi.support().ok_or_else(|| Error::Degenerate("empty Psi".into()))?;
    let reach = (&hi - &lo).shl(-(k_max + 1));
    if grid(&reach, unit)? > gap {
        return Err(Error::Tail(format!("jumps closer than the kernel reach at k={}", k_max + 1)));
    }
    let lp = jumps.values().map(|v| v.abs().powf(pr.p)).sum::<f64>().powf(1.0 / pr.p);
    let tc = tail_constants(kernels, pr.p)?;
    Ok(lp * tc.psi_lp * geometric_tail(k_max, pr.s - 1.0 / pr.p))
}

/// `||f_N||` and `||P_E f_N||` at one `N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FullRatioPoint {
    pub n: i64,
    pub f_norm: FullNorm,
    pub pf_norm: FullNorm,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FullRatioReport {
    pub points: Vec<FullRatioPoint>,
    pub fit: super::SlopeFit,
    pub strictly_increasing: bool,
    /// `max / min` of `||f_N||` over the sweep.
    pub f_spread: f64,
}

pub fn full_point(config: &super::ExperimentConfig, kernels: &KernelSet, n: i64) -> Result<FullRatioPoint> {
    let cfg = config.frequency_config(n)?;
    let mut st = FullSettings::new(config.params);
    st.k_max = config.k_max;
    st.tol = config.tol;
    let f_norm = test_function_norm(&cfg, kernels, &st)?;
    let pf_norm = projected_norm(&cfg, kernels, &st)?;
    let ratio = pf_norm.value / f_norm.value;
    Ok(FullRatioPoint { n, f_norm, pf_norm, ratio })
}

/// `||P_E f_N|| / ||f_N||` over `config.n_list`.
pub fn run_full_ratio(config: &super::ExperimentConfig, kernels: &KernelSet) -> Result<FullRatioReport> {
    config.validate()?;
    let points: Vec<FullRatioPoint> = config.n_list.iter().map(|&n| full_point(config, kernels, n)).collect::<Result<_>>()?;
    let fit = super::fit_slope(&points.iter().map(|p| (p.n as f64, p.ratio)).collect::<Vec<_>>())?;
    let strictly_increasing = points.windows(2).all(|w| w[1].ratio > w[0].ratio);
    let fs: Vec<f64> = points.iter().map(|p| p.f_norm.value).collect();
    let f_spread = fs.iter().cloned().fold(0.0, f64::max) / fs.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(FullRatioReport { points, fit, strictly_increasing, f_spread })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::haar_pw;

    #[test]
    fn edge_formula_matches_truncated_sum() {
        let ks = KernelSet::default_set();
        let kappa = psi_k(ks, 1);
        let period = DyadicRational::pow2(-9);
        let pattern = haar_pw(9, 0).add(&haar_pw(10, 1).scale(&poly::q(3)));
        let e = periodic_edge(&kappa, &pattern, &period).unwrap();
        let count = 64;
        let parts: Vec<PwPoly> = (0..count).map(|nu| pattern.translate(&(&period * &DyadicRational::from_int(nu)))).collect();
        let refs: Vec<(Q, &PwPoly)> = parts.iter().map(|p| (poly::q(1), p)).collect();
        let direct = kappa.convolve(&PwPoly::linear_combination(&refs));
        let (lo, hi) = (DyadicRational::new(-1, -3), &period * &DyadicRational::from_int(count) - DyadicRational::new(1, -5));
        assert!(e.equals_on(&direct, &lo, &hi));
        // nothing survives beyond the kernel reach
        let (_, top) = kappa.support().unwrap();
        assert!(e.support().unwrap().1 <= top);
    }
}

#[cfg(test)]
mod jump_form {
    use super::*;
    use crate::dyadic::build_frequency_config;

    #[test]
    fn theta_on_step_function_via_jumps() {
        let ks = KernelSet::default_set();
        let cfg = build_frequency_config(&[2, 4], 2, 2).unwrap();
        let sl = projected_bump(&cfg, ks, 4);
        let rem = heaviside_remainder(&ks.psi0).unwrap();
        assert!(rem.support().is_some());
        let mut parts = vec![(ks.psi0.integral(), sl.clone())];
        for (x, j) in crate::norms::jumps(&sl) {
            parts.push((j, rem.translate(&x)));
        }
        let refs: Vec<(Q, &PwPoly)> = parts.iter().map(|(c, f)| (c.clone(), f)).collect();
        assert_eq!(PwPoly::linear_combination(&refs), ks.psi0.convolve(&sl));
    }
}

#[cfg(test)]
mod oracle {
    use super::*;
    use crate::dyadic::build_frequency_config;
    use crate::experiments::testfn::{build_test_function, DEFAULT_PIECE_CAP};
    use crate::norms::local_means_norm_tol;

    #[test]
    fn single_level_matches_exact_norm() {
        let ks = KernelSet::default_set();
        let cfg = build_frequency_config(&[2], 2, 2).unwrap();
        let pr = SpaceParams::new(4.0, 1.2, -1.0);
        let f = build_test_function(2, &cfg, ks, &pr, DEFAULT_PIECE_CAP).unwrap();
        let lv = &f.levels[0];
        let exact = lv.f.scale(&poly::q(lv.weight as i64));
        let mut st = FullSettings::new(pr);
        st.band = (100, 100);
        st.k_max = Some(10);
        st.tol = 1.0;
        let ours = test_function_norm(&cfg, ks, &st).unwrap();
        let want = local_means_norm_tol(&exact, &pr, ks, 10, &QuadratureSpec::default(), 1.0).unwrap();
        eprintln!("{} {} {:?} {:?}", ours.value, want.value, ours.per_k, want.k_contributions);
        assert!((ours.value - want.value).abs() < 1e-6 * want.value);
    }
}

#[cfg(test)]
mod annihilation {
    use crate::dyadic::{nu_of_mu, FrequencyConfig};
    use crate::kernels::{eta_translate, KernelSet};
    use crate::projection::apply_projection;
    use crate::pwpoly::PwPoly;

    /// Bumps at levels `l` with `l > j + N` for every kept `j` have all coefficients `0`.
    #[test]
    fn shifted_exponents_kill_the_test_function() {
        let ks = KernelSet::default_set();
        let cfg = crate::dyadic::build_frequency_config(&[3, 5], 2, 2).unwrap();
        let mut f = PwPoly::zero();
        for l in cfg.levels() {
            for t in 0..(1i64 << (l - cfg.n)) {
                f = f.add(&eta_translate(&ks.eta, l, nu_of_mu(cfg.n, t)));
            }
        }
        let shifted = FrequencyConfig { n: 2, r: 1, exponents: vec![1, 2] };
        assert!(apply_projection(&f, &shifted).is_zero());
        assert!(!apply_projection(&f, &cfg).is_zero());
    }
}
