//! Haar coefficients, the projection `P_E`, and the convolution blocks `G`
//! in direct and periodic (one translation cell) form.

use crate::dyadic::{DyadicRational, FrequencyConfig};
use crate::error::{Error, Result};
use crate::kernels::KernelSet;
use crate::poly::{self, Q};
use crate::pwpoly::PwPoly;
use crate::quad::QuadratureSpec;
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Sparse table `mu -> <f, h_{j,mu}>`.
#[derive(Clone, Debug, PartialEq)]
pub struct HaarCoeffTable {
    pub j: i64,
    pub entries: BTreeMap<i64, Q>,
}

impl HaarCoeffTable {
    pub fn get(&self, mu: i64) -> Q {
        self.entries.get(&mu).cloned().unwrap_or_else(Q::zero)
    }
}

/// Cumulative integral `x -> int_{-inf}^x f` with exact prefix sums.
pub struct Cumulative<'a> {
    f: &'a PwPoly,
    prefix: Vec<Q>,
    anti: Vec<Vec<Q>>,
}

impl<'a> Cumulative<'a> {
    pub fn new(f: &'a PwPoly) -> Self {
        let mut prefix = Vec::with_capacity(f.pieces().len() + 1);
        let mut acc = Q::zero();
        prefix.push(acc.clone());
        let mut anti = Vec::with_capacity(f.pieces().len());
        for p in f.pieces() {
            acc += poly::integral(&p.coeffs, &p.len().to_rational());
            prefix.push(acc.clone());
            anti.push(poly::antiderivative(&p.coeffs));
        }
        Cumulative { f, prefix, anti }
    }

    pub fn at(&self, x: &DyadicRational) -> Q {
        let ps = self.f.pieces();
        let i = ps.partition_point(|p| &p.left <= x);
        if i == 0 {
            return Q::zero();
        }
        let p = &ps[i - 1];
        if x >= &p.right {
            return self.prefix[i].clone();
        }
        &self.prefix[i - 1] + poly::eval(&self.anti[i - 1], &(x - &p.left).to_rational())
    }
}

/// `<f, h_{j,mu}>` for every `mu` whose interval meets the support of `f`.
pub fn haar_coefficients(f: &PwPoly, j: i64) -> HaarCoeffTable {
    let cum = Cumulative::new(f);
    let mut mus = BTreeSet::new();
    for p in f.pieces() {
        let lo = p.left.shl(j).floor();
        let hi = p.right.shl(j).ceil();
        let (lo, hi) = (lo.to_i64().unwrap(), hi.to_i64().unwrap());
        for mu in lo..hi {
            mus.insert(mu);
        }
    }
    let mut entries = BTreeMap::new();
    for mu in mus {
        let c = haar_pairing(&cum, j, mu);
        if !c.is_zero() {
            entries.insert(mu, c);
        }
    }
    HaarCoeffTable { j, entries }
}

fn haar_pairing(cum: &Cumulative<'_>, j: i64, mu: i64) -> Q {
    let a = DyadicRational::new(mu, -j);
    let m = DyadicRational::new(2 * mu + 1, -j - 1);
    let b = DyadicRational::new(mu + 1, -j);
    cum.at(&m) * poly::q(2) - cum.at(&a) - cum.at(&b)
}

/// `P_E f = sum_{j in A} sum_{0 <= mu < 2^j} 2^j <f, h_{j,mu}> h_{j,mu}`.
pub fn apply_projection(f: &PwPoly, cfg: &FrequencyConfig) -> PwPoly {
    let mut terms = Vec::new();
    for &j in &cfg.exponents {
        let t = haar_coefficients(f, j);
        let scale = DyadicRational::pow2(j).to_rational();
        for (mu, c) in t.entries.range(0..(1i64 << j)) {
            let w = c * &scale;
            let a = DyadicRational::new(*mu, -j);
            let m = DyadicRational::new(2 * mu + 1, -j - 1);
            let b = DyadicRational::new(mu + 1, -j);
            terms.push((a, m.clone(), vec![w.clone()]));
            terms.push((m, b, vec![-w]));
        }
    }
    PwPoly::from_terms(terms)
}

/// Nonzero pairs `(mu, t, <eta_{b,nu}, h_{a,mu}>)` with `nu = 2^N t + 2^{N-1}`.
///
/// A pairing vanishes unless the bump support contains a Haar breakpoint, so
/// the enumeration runs over whichever of breakpoints or bumps is sparser.
pub fn coefficient_pairs(
    eta: &PwPoly,
    a: i64,
    mu_range: Option<(i64, i64)>,
    b: i64,
    n: i64,
    t_range: (i64, i64),
) -> Vec<(i64, i64, Q)> {
    let Some((elo, ehi)) = eta.support() else {
        return Vec::new();
    };
    let cum = Cumulative::new(eta);
    let centre = |t: i64| DyadicRational::new(2 * t + 1, n - b - 1);
    let bump_lo = |t: i64| &centre(t) + &elo.shl(-b);
    let bump_hi = |t: i64| &centre(t) + &ehi.shl(-b);
    let mut pairs: BTreeSet<(i64, i64)> = BTreeSet::new();
    let mu_ok = |mu: i64| mu_range.map_or(true, |(lo, hi)| mu >= lo && mu < hi);
    let push_bp = |u: i64, t: i64, pairs: &mut BTreeSet<(i64, i64)>| {
        // breakpoint u 2^{-a-1}
        if u % 2 == 0 {
            for mu in [u / 2 - 1, u / 2] {
                if mu_ok(mu) {
                    pairs.insert((mu, t));
                }
            }
        } else {
            let mu = (u - 1) / 2;
            if mu_ok(mu) {
                pairs.insert((mu, t));
            }
        }
    };
    let n_bumps = t_range.1 - t_range.0;
    let n_bp = match mu_range {
        Some((lo, hi)) => 2 * (hi - lo) + 1,
        None => i64::MAX,
    };
    if n_bumps <= n_bp {
        for t in t_range.0..t_range.1 {
            let ulo = bump_lo(t).shl(a + 1).ceil().to_i64().unwrap();
            let uhi = bump_hi(t).shl(a + 1).floor().to_i64().unwrap();
            for u in ulo..=uhi {
                push_bp(u, t, &mut pairs);
            }
        }
    } else {
        let (lo, hi) = mu_range.unwrap();
        for u in (2 * lo)..=(2 * hi) {
            let beta = DyadicRational::new(u, -a - 1);
            // centre(t) in [beta - ehi 2^-b, beta - elo 2^-b]
            let cl = &beta - &ehi.shl(-b);
            let ch = &beta - &elo.shl(-b);
            let tlo = (cl.shl(b - n + 1) - DyadicRational::one()).shl(-1).ceil().to_i64().unwrap();
            let thi = (ch.shl(b - n + 1) - DyadicRational::one()).shl(-1).floor().to_i64().unwrap();
            for t in tlo.max(t_range.0)..=thi.min(t_range.1 - 1) {
                push_bp(u, t, &mut pairs);
            }
        }
    }
    let scale = DyadicRational::pow2(-b).to_rational();
    let mut out = Vec::new();
    for (mu, t) in pairs {
        let nu = DyadicRational::new((t << n) + (1i64 << (n - 1)), 0);
        // int_{-inf}^x eta_{b,nu} = 2^{-b} E(2^b x - nu)
        let e = |x: DyadicRational| cum.at(&(&x.shl(b) - &nu));
        let x0 = DyadicRational::new(mu, -a);
        let xm = DyadicRational::new(2 * mu + 1, -a - 1);
        let x1 = DyadicRational::new(mu + 1, -a);
        let c = (e(xm) * poly::q(2) - e(x0) - e(x1)) * &scale;
        if !c.is_zero() {
            out.push((mu, t, c));
        }
    }
    out
}

/// Translation weights `p -> W_p` so that `sum_pairs 2^a c (h_{a,mu} * psi) = sum_p W_p Psi(. - p)`.
pub fn translation_weights(a: i64, pairs: &[(i64, i64, Q)]) -> BTreeMap<DyadicRational, Q> {
    let mut w: BTreeMap<DyadicRational, Q> = BTreeMap::new();
    let s = DyadicRational::pow2(a).to_rational();
    for (mu, _, c) in pairs {
        let v = c * &s;
        let pts = [
            (DyadicRational::new(*mu, -a), v.clone()),
            (DyadicRational::new(2 * mu + 1, -a - 1), -(v.clone() * poly::q(2))),
            (DyadicRational::new(mu + 1, -a), v.clone()),
        ];
        for (p, x) in pts {
            *w.entry(p).or_insert_with(Q::zero) += x;
        }
    }
    w.retain(|_, v| !v.is_zero());
    w
}

/// `sum_p W_p F(. - p)`.
pub fn sum_translates(f: &PwPoly, weights: &BTreeMap<DyadicRational, Q>) -> PwPoly {
    let mut terms = Vec::new();
    for (p, w) in weights {
        for pc in f.pieces() {
            terms.push((&pc.left + p, &pc.right + p, poly::scale(&pc.coeffs, w)));
        }
    }
    PwPoly::from_terms(terms)
}

/// Assembly mode for `G` blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Direct,
    Periodic,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Mode::Direct),
            "periodic" => Ok(Mode::Periodic),
            _ => Err(Error::Parse(format!("unknown mode {s}"))),
        }
    }
}

/// One translation cell plus explicit boundary windows, in `y = 2^k x`.
///
/// The block is `G(x) = g(2^k x)` where `g` equals `cell` repeated with period
/// `period` on the interior, `left` near `y = 0` and `right(y - 2^k)` near `y = 2^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicRep {
    pub k: i64,
    pub period: DyadicRational,
    /// The periodised function on `[0, period)`.
    pub cell: PwPoly,
    /// Number of interior cells.
    pub cell_count: BigInt,
    /// Number of cells absorbed by each boundary window.
    pub window_cells: i64,
    /// `g` on `[-1/16, window_cells * period)`.
    pub left: PwPoly,
    /// `g(2^k + z)` for `z` in `[-window_cells * period, 1/16)`.
    pub right: PwPoly,
}

impl PeriodicRep {
    /// Expand into the full block in `x`.
    pub fn expand(&self) -> PwPoly {
        let count = self.cell_count.to_i64().expect("expansion needs a small cell count");
        let w = DyadicRational::from_int(self.window_cells);
        let mut parts: Vec<(Q, PwPoly)> = vec![(Q::one(), self.left.clone())];
        for c in 0..count {
            let off = &self.period * &(&w + &DyadicRational::from_int(c));
            parts.push((Q::one(), self.cell.translate(&off)));
        }
        parts.push((Q::one(), self.right.translate(&DyadicRational::pow2(self.k))));
        let refs: Vec<(Q, &PwPoly)> = parts.iter().map(|(a, b)| (a.clone(), b)).collect();
        PwPoly::linear_combination(&refs).affine_image(self.k, &DyadicRational::zero())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GValue {
    Direct(PwPoly),
    Periodic(PeriodicRep),
}

/// Block `G^{j,N}_{k,l}`.
#[derive(Clone, Debug, PartialEq)]
pub struct GComponent {
    pub k: i64,
    pub l: i64,
    pub j: i64,
    pub n: i64,
    pub value: GValue,
}

/// Periodic representation of the block with `j = k + m`, `l = k + N + n`, in `y = 2^k x`.
pub fn periodic_block(k: i64, m: i64, nn: i64, n: i64, kernels: &KernelSet) -> Result<PeriodicRep> {
    let lo = m.min(nn);
    if k + lo < 0 {
        return Err(Error::Mode(format!("block (k={k}, m={m}, n={nn}) has no full period")));
    }
    let period = DyadicRational::pow2(-lo);
    // 1/16 bounds the reach of Psi
    let reach = DyadicRational::pow2(-4);
    let w = reach.shl(lo).ceil().to_i64().unwrap().max(1);
    let cells = BigInt::one() << ((k + lo) as usize);
    if cells < BigInt::from(2 * w) {
        return Err(Error::Mode(format!("period 2^{} exceeds the window for k={k}", -lo)));
    }
    let bumps_per_cell = 1i64 << (nn - lo);
    let pairs = coefficient_pairs(&kernels.eta, m, None, n + nn, n, (0, bumps_per_cell));
    let weights = translation_weights(m, &pairs);
    let c = sum_translates(&kernels.big_psi, &weights);
    let shifted = |range: std::ops::RangeInclusive<i64>| -> PwPoly {
        let parts: Vec<PwPoly> = range.map(|i| c.translate(&(&period * &DyadicRational::from_int(i)))).collect();
        let refs: Vec<(Q, &PwPoly)> = parts.iter().map(|p| (Q::one(), p)).collect();
        PwPoly::linear_combination(&refs)
    };
    let wd = DyadicRational::from_int(w);
    let cell = shifted(-w..=w).restrict(&DyadicRational::zero(), &period);
    let left = shifted(0..=2 * w).restrict(&-&reach, &(&period * &wd));
    let right = shifted(-2 * w..=-1).restrict(&-(&period * &wd), &reach);
    Ok(PeriodicRep { k, period, cell, cell_count: cells - BigInt::from(2 * w), window_cells: w, left, right })
}

/// Direct block in `x`.
pub fn direct_block(k: i64, l: i64, j: i64, n: i64, kernels: &KernelSet) -> Result<PwPoly> {
    if j < 0 || l < n || k < 0 {
        return Err(Error::Domain(format!("invalid block indices k={k} l={l} j={j} N={n}")));
    }
    if j > 30 || l - n > 30 {
        return Err(Error::Cost(format!("direct block with j={j}, l={l} too large")));
    }
    let pairs = coefficient_pairs(&kernels.eta, j, Some((0, 1i64 << j)), l, n, (0, 1i64 << (l - n)));
    let weights = translation_weights(j, &pairs);
    let psi_k = kernels.big_psi.affine_image(k, &DyadicRational::zero());
    Ok(sum_translates(&psi_k, &weights))
}

/// Assemble `G^{j,N}_{k,l}` in the requested mode.
pub fn assemble_g(k: i64, l: i64, j: i64, n: i64, kernels: &KernelSet, mode: Mode) -> Result<GComponent> {
    let value = match mode {
        Mode::Direct => GValue::Direct(direct_block(k, l, j, n, kernels)?),
        Mode::Periodic => GValue::Periodic(periodic_block(k, j - k, l - n - k, n, kernels)?),
    };
    Ok(GComponent { k, l, j, n, value })
}

/// `||G||_q^q`.
pub fn g_norm_pow(g: &GComponent, q: f64, spec: &QuadratureSpec) -> Result<f64> {
    match &g.value {
        GValue::Direct(f) => f.lq_norm_pow(q, spec),
        GValue::Periodic(p) => periodic_norm_pow(p, q, spec),
    }
}

/// `||G||_q`.
pub fn g_norm(g: &GComponent, q: f64, spec: &QuadratureSpec) -> Result<f64> {
    Ok(g_norm_pow(g, q, spec)?.powf(1.0 / q))
}

/// `2^{-k} [count * int_cell |g|^q + int_left |g|^q + int_right |g|^q]`.
pub fn periodic_norm_pow(p: &PeriodicRep, q: f64, spec: &QuadratureSpec) -> Result<f64> {
    let ic = p.cell.lq_norm_pow(q, spec)?;
    let il = p.left.lq_norm_pow(q, spec)?;
    let ir = p.right.lq_norm_pow(q, spec)?;
    let frac = DyadicRational::new(p.cell_count.clone(), -p.k).to_f64();
    Ok(frac * ic + crate::dyadic::ldexp(il + ir, -p.k))
}

/// The `k`-independent integrals of a block family `(m, n, N)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockProfile {
    pub m: i64,
    pub n: i64,
    pub big_n: i64,
    pub q: f64,
    /// `min(m, n)`: the period is `2^{-lo}` in `y`.
    pub lo: i64,
    pub window_cells: i64,
    pub cell: f64,
    pub boundary: f64,
}

impl BlockProfile {
    /// Smallest `k` for which the block has a valid periodic form.
    pub fn min_k(&self) -> i64 {
        let mut k = (-self.lo).max(0);
        while (k + self.lo) < 62 && (1i64 << (k + self.lo)) < 2 * self.window_cells {
            k += 1;
        }
        k
    }

    /// `||G^{k+m,N}_{k,k+N+n}||_q^q`.
    pub fn norm_pow(&self, k: i64) -> Result<f64> {
        if k < self.min_k() {
            return Err(Error::Mode(format!("k={k} below the periodic range of ({}, {})", self.m, self.n)));
        }
        let count = &(BigInt::one() << ((k + self.lo) as usize)) - BigInt::from(2 * self.window_cells);
        let frac = DyadicRational::new(count, -k).to_f64();
        Ok(frac * self.cell + crate::dyadic::ldexp(self.boundary, -k))
    }
}

/// Compute the cell and boundary integrals once; valid for every admissible `k`.
pub fn block_profile(m: i64, n: i64, big_n: i64, kernels: &KernelSet, q: f64, spec: &QuadratureSpec) -> Result<BlockProfile> {
    let lo = m.min(n);
    let mut k = (-lo).max(0);
    let rep = loop {
        match periodic_block(k, m, n, big_n, kernels) {
            Ok(r) => break r,
            Err(Error::Mode(_)) if k < 80 => k += 1,
            Err(e) => return Err(e),
        }
    };
    Ok(BlockProfile {
        m,
        n,
        big_n,
        q,
        lo,
        window_cells: rep.window_cells,
        cell: rep.cell.lq_norm_pow(q, spec)?,
        boundary: rep.left.lq_norm_pow(q, spec)? + rep.right.lq_norm_pow(q, spec)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::build_frequency_config;
    use crate::kernels::{eta_translate, haar_pw};

    #[test]
    fn projection_reproduces_members_and_kills_others() {
        let cfg = build_frequency_config(&[2, 4], 2, 2).unwrap();
        let h = haar_pw(2, 3);
        assert_eq!(apply_projection(&h, &cfg), h);
        assert!(apply_projection(&haar_pw(3, 1), &cfg).is_zero());
    }

    #[test]
    fn coefficient_identity_small() {
        let ks = KernelSet::default_set();
        let (k, n) = (2i64, 3i64);
        for mu in 0..(1i64 << k) {
            let f = eta_translate(&ks.eta, k + n, crate::dyadic::nu_of_mu(n, mu));
            let t = haar_coefficients(&f, k);
            assert_eq!(t.get(mu), -DyadicRational::pow2(1 - n - k).to_rational());
        }
    }

    #[test]
    fn periodic_matches_direct_small() {
        let ks = KernelSet::default_set();
        let g = direct_block(2, 5, 2, 3, ks).unwrap();
        assert!(!g.is_zero());
        let p = periodic_block(2, 0, 0, 3, ks).unwrap();
        assert_eq!(p.expand(), g);
    }
}
