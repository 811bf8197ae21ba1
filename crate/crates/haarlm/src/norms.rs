//! Local-means Triebel-Lizorkin quasi-norms with truncation control.

use crate::dyadic::DyadicRational;
use crate::error::{Error, Result};
use crate::kernels::KernelSet;
use crate::lmeans::{Atom, AtomSet, LmParams, RefPoly, Shape};
use crate::poly::{self, Q};
use crate::pwpoly::PwPoly;
use crate::quad::QuadratureSpec;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

/// Relative tolerance applied to truncation bounds unless a caller supplies one.
pub const DEFAULT_TAIL_TOL: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceParams {
    pub p: f64,
    pub q: f64,
    pub s: f64,
}

impl SpaceParams {
    pub fn new(p: f64, q: f64, s: f64) -> Self {
        SpaceParams { p, q, s }
    }

    pub fn p_conj(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    pub fn q_conj(&self) -> f64 {
        self.q / (self.q - 1.0)
    }

    /// `1/q - 1 - s`, the growth exponent of the projections.
    pub fn target_slope(&self) -> f64 {
        1.0 / self.q - 1.0 - self.s
    }

    pub fn check(&self) -> Result<()> {
        if !(self.p > 1.0 && self.q > 1.0 && self.p.is_finite() && self.q.is_finite() && self.s.is_finite()) {
            return Err(Error::Domain(format!("need 1 < p, q < inf and finite s, got {self:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    UnconditionalRange,
    TheoremIiRange,
    TheoremIRange,
    Endpoint,
    OutOfRange,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::UnconditionalRange => "unconditional-range",
            Regime::TheoremIiRange => "theorem-ii-range",
            Regime::TheoremIRange => "theorem-i-range",
            Regime::Endpoint => "endpoint",
            Regime::OutOfRange => "out-of-range",
        };
        f.write_str(s)
    }
}

pub fn validate_params(pr: &SpaceParams) -> Regime {
    if pr.check().is_err() {
        return Regime::OutOfRange;
    }
    let (ip, iq, s) = (1.0 / pr.p, 1.0 / pr.q, pr.s);
    let edges = [ip - 1.0, iq - 1.0, ip, iq];
    if edges.iter().any(|e| (s - e).abs() <= 1e-12) {
        return Regime::Endpoint;
    }
    let lo = (ip - 1.0).max(iq - 1.0);
    let hi = ip.min(iq);
    if lo < s && s < hi {
        return Regime::UnconditionalRange;
    }
    if pr.q < pr.p && ip - 1.0 < s && s < iq - 1.0 {
        return Regime::TheoremIiRange;
    }
    if pr.p < pr.q && iq < s && s < ip {
        return Regime::TheoremIRange;
    }
    Regime::OutOfRange
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub value: f64,
    /// `int 2^{ksq} |psi_k * f|^q` for each `k`.
    pub k_contributions: BTreeMap<i64, f64>,
    pub k_max: i64,
    /// Upper bound for the change of `value` caused by omitted terms (`k > k_max`, pruned bands).
    pub truncation_bound: f64,
    pub quadrature_error: f64,
    pub params: SpaceParams,
}

impl NormReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// `psi_k = 2^k psi(2^k .)` for `k >= 1`, `psi_0`.
pub fn psi_k(kernels: &KernelSet, k: i64) -> PwPoly {
    if k == 0 {
        kernels.psi0.clone()
    } else {
        kernels.psi.affine_image(k, &DyadicRational::zero()).scale(&DyadicRational::pow2(k).to_rational())
    }
}

/// Constants entering the high-frequency tail bounds.
#[derive(Clone, Copy, Debug)]
pub struct TailConstants {
    /// `||Psi||_1`, `||Psi||_p` and `||Psi_2||_1` with `Psi_2' = Psi`.
    pub psi_l1: f64,
    pub psi_lp: f64,
    pub psi2_l1: f64,
}

impl TailConstants {
    pub fn new(kernels: &KernelSet, p: f64) -> Result<Self> {
        let spec = QuadratureSpec::default();
        let big = &kernels.big_psi;
        let psi2 = big.antiderivative()?;
        Ok(TailConstants { psi_l1: big.lq_norm(1.0, &spec)?, psi_lp: big.lq_norm(p, &spec)?, psi2_l1: psi2.lq_norm(1.0, &spec)? })
    }
}

/// `sum_{k > k_max} 2^{k a}`; infinite unless `a < 0`.
pub fn geometric_tail(k_max: i64, a: f64) -> f64 {
    if a >= 0.0 {
        f64::INFINITY
    } else {
        ((k_max + 1) as f64 * a).exp2() / (1.0 - a.exp2())
    }
}

/// Smoothness data of a function used for tail bounds: total jump, `||f'||_p` when `f` is
/// continuous, `||f''||_p` when `f` is `C^1`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Smoothness {
    pub jump_total: f64,
    pub d1_lp: f64,
    pub d2_lp: Option<f64>,
}

/// Jumps `f(x+) - f(x-)` at every breakpoint.
pub fn jumps(f: &PwPoly) -> Vec<(DyadicRational, Q)> {
    let mut out = Vec::new();
    let mut prev: Option<(DyadicRational, Q)> = None;
    for p in f.pieces() {
        let start = p.coeffs.first().cloned().unwrap_or_else(Q::zero);
        let left = match prev.take() {
            Some((r, v)) if r == p.left => v,
            Some((r, v)) => {
                if !v.is_zero() {
                    out.push((r, -v));
                }
                Q::zero()
            }
            None => Q::zero(),
        };
        let j = start - left;
        if !j.is_zero() {
            out.push((p.left.clone(), j));
        }
        prev = Some((p.right.clone(), poly::eval(&p.coeffs, &p.len().to_rational())));
    }
    if let Some((r, v)) = prev {
        if !v.is_zero() {
            out.push((r, -v));
        }
    }
    out
}

pub fn smoothness(f: &PwPoly, p: f64) -> Result<Smoothness> {
    let spec = QuadratureSpec::default();
    let jt: f64 = jumps(f).iter().map(|(_, j)| j.to_f64().unwrap().abs()).sum();
    let d1 = f.derivative();
    let d1_lp = d1.lq_norm(p, &spec)?;
    let d2_lp = if jt == 0.0 && jumps(&d1).is_empty() { Some(d1.derivative().lq_norm(p, &spec)?) } else { None };
    Ok(Smoothness { jump_total: jt, d1_lp, d2_lp })
}

/// Bound for `||(sum_{k>k_max} 2^{ksq}|psi_k*f|^q)^{1/q}||_p` given the smoothness of `f`
/// (weights of several pieces combine by the triangle inequality).
pub fn tail_bound(sm: &Smoothness, tc: &TailConstants, k_max: i64, pr: &SpaceParams) -> f64 {
    if sm.jump_total > 0.0 {
        sm.jump_total * tc.psi_lp * geometric_tail(k_max, pr.s - 1.0 / pr.p) + sm.d1_lp * tc.psi_l1 * geometric_tail(k_max, pr.s - 1.0)
    } else if let Some(d2) = sm.d2_lp {
        d2 * tc.psi2_l1 * geometric_tail(k_max, pr.s - 2.0)
    } else {
        sm.d1_lp * tc.psi_l1 * geometric_tail(k_max, pr.s - 1.0)
    }
}

/// Finest grid exponent needed by the breakpoints of `fs`.
pub fn grid_unit<'a>(fs: impl IntoIterator<Item = &'a PwPoly>) -> i64 {
    let mut u = 0;
    for f in fs {
        for p in f.pieces() {
            for x in [&p.left, &p.right] {
                if !x.is_zero() {
                    u = u.max(-x.exponent());
                }
            }
        }
    }
    u
}

/// Window width: a power of two near `len / target` in grid units.
pub fn window_for(len: i64, target: i64) -> i64 {
    let w = (len / target.max(1)).max(1);
    1i64 << (63 - w.leading_zeros() as i64)
}

pub fn local_means_norm(f: &PwPoly, params: &SpaceParams, kernels: &KernelSet, k_max: i64, spec: &QuadratureSpec) -> Result<NormReport> {
    local_means_norm_tol(f, params, kernels, k_max, spec, DEFAULT_TAIL_TOL)
}

/// As [`local_means_norm`] with an explicit relative tolerance for the truncation bound.
pub fn local_means_norm_tol(
    f: &PwPoly,
    params: &SpaceParams,
    kernels: &KernelSet,
    k_max: i64,
    spec: &QuadratureSpec,
    tol: f64,
) -> Result<NormReport> {
    params.check()?;
    spec.validate()?;
    if k_max < 0 {
        return Err(Error::Domain("k_max must be nonnegative".into()));
    }
    let empty = NormReport {
        value: 0.0,
        k_contributions: (0..=k_max).map(|k| (k, 0.0)).collect(),
        k_max,
        truncation_bound: 0.0,
        quadrature_error: 0.0,
        params: *params,
    };
    if f.is_zero() {
        return Ok(empty);
    }
    let convs: Vec<PwPoly> = (0..=k_max).map(|k| psi_k(kernels, k).convolve(f)).collect();
    let unit = grid_unit(convs.iter());
    let refs = convs
        .iter()
        .map(|g| if g.is_zero() { Ok(None) } else { RefPoly::from_pwpoly(g, unit).map(Some) })
        .collect::<Result<Vec<_>>>()?;
    let set = AtomSet { unit, shapes: vec![Shape { refs }], atoms: vec![Atom { shape: 0, pos: 0, w: 1.0 }] };
    let span = set.components().first().map(|c| c.1 - c.0).unwrap_or(1);
    let prm = LmParams { p: params.p, q: params.q, s: params.s, k_max: k_max as usize, spec: *spec, window: window_for(span, 16), ranges: Vec::new() };
    let res = set.evaluate(&prm)?;
    let value = res.integral.max(0.0).powf(1.0 / params.p);
    let tc = tail_constants(kernels, params.p)?;
    let bound = tail_bound(&smoothness(f, params.p)?, &tc, k_max, params);
    if !(bound <= tol * value) {
        return Err(Error::Tail(format!("truncation bound {bound:e} exceeds {tol:e} x value {value:e} at k_max={k_max}")));
    }
    Ok(NormReport {
        value,
        k_contributions: res.per_k.iter().enumerate().map(|(k, v)| (k as i64, *v)).collect(),
        k_max,
        truncation_bound: bound,
        quadrature_error: res.quad_err,
        params: *params,
    })
}

/// Tail constants of the shared default kernels are cached per `p`.
pub fn tail_constants(kernels: &KernelSet, p: f64) -> Result<TailConstants> {
    static CACHE: OnceLock<std::sync::Mutex<Vec<(u64, TailConstants)>>> = OnceLock::new();
    if !std::ptr::eq(kernels, KernelSet::default_set()) {
        return TailConstants::new(kernels, p);
    }
    let cache = CACHE.get_or_init(Default::default);
    if let Some((_, t)) = cache.lock().unwrap().iter().find(|(b, _)| *b == p.to_bits()) {
        return Ok(*t);
    }
    let t = TailConstants::new(kernels, p)?;
    cache.lock().unwrap().push((p.to_bits(), t));
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regimes() {
        assert_eq!(validate_params(&SpaceParams::new(4.0, 1.2, -0.5)), Regime::TheoremIiRange);
        assert_eq!(validate_params(&SpaceParams::new(2.0, 2.0, 0.0)), Regime::UnconditionalRange);
        assert_eq!(validate_params(&SpaceParams::new(4.0, 1.2, -1.0 / 6.0)), Regime::Endpoint);
        assert_eq!(validate_params(&SpaceParams::new(1.5, 3.0, 0.5)), Regime::TheoremIRange);
        assert_eq!(validate_params(&SpaceParams::new(0.5, 3.0, 0.5)), Regime::OutOfRange);
        assert_eq!(validate_params(&SpaceParams::new(2.0, 2.0, 3.0)), Regime::OutOfRange);
    }

    #[test]
    fn jumps_of_indicator_and_tent() {
        let ind = PwPoly::indicator(DyadicRational::zero(), DyadicRational::new(1, -1));
        let j = jumps(&ind);
        assert_eq!(j.len(), 2);
        assert_eq!(j[0].1, poly::q(1));
        assert_eq!(j[1].1, poly::q(-1));
        let k = KernelSet::default_set();
        assert!(jumps(&k.eta).is_empty());
        assert!(jumps(&k.eta.derivative()).is_empty());
    }

    #[test]
    fn zero_function_has_zero_norm() {
        let r = local_means_norm(&PwPoly::zero(), &SpaceParams::new(4.0, 1.2, -0.5), KernelSet::default_set(), 4, &QuadratureSpec::default())
            .unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn p_equals_q_factorizes() {
        let k = KernelSet::default_set();
        let f = crate::kernels::eta_translate(&k.eta, 3, 5).add(&crate::kernels::eta_translate(&k.eta, 5, 3).scale(&poly::q(-2)));
        let pr = SpaceParams::new(1.5, 1.5, -0.5);
        let spec = QuadratureSpec::default();
        let r = local_means_norm(&f, &pr, k, 12, &spec).unwrap();
        let mut want = 0.0;
        for kk in 0..=12 {
            let g = psi_k(k, kk).convolve(&f);
            want += (kk as f64 * pr.s * pr.q).exp2() * g.lq_norm_pow(pr.q, &spec).unwrap();
        }
        let want = want.powf(1.0 / pr.q);
        assert!((r.value - want).abs() < 1e-9 * want, "{} vs {want}", r.value);
        assert!(r.truncation_bound < 1e-6 * r.value);
    }
}
