//! Streaming evaluation of `int (sum_k W_k |g_k|^q)^{p/q}` where every `g_k` is a
//! weighted sum of translates of tabulated floating-point pieces.

use crate::dyadic::DyadicRational;
use crate::error::{Error, Result};
use crate::poly;
use crate::pwpoly::PwPoly;
use crate::quad::{self, QuadratureSpec};
use std::collections::HashMap;

/// Piecewise polynomial in floating point with integer breakpoints in units of `2^-unit`.
/// Coefficients of piece `i` are in `x - a_i`, `x` measured in real units.
#[derive(Clone, Debug, Default)]
pub struct RefPoly {
    pub a: Vec<i64>,
    pub b: Vec<i64>,
    pub nc: usize,
    pub c: Vec<f64>,
}

impl RefPoly {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn coeffs(&self, i: usize) -> &[f64] {
        &self.c[i * self.nc..(i + 1) * self.nc]
    }

    pub fn span(&self) -> Option<(i64, i64)> {
        if self.a.is_empty() {
            None
        } else {
            Some((self.a[0], *self.b.last().unwrap()))
        }
    }

    /// Exact conversion of the breakpoints; fails if one is not a multiple of `2^-unit`.
    pub fn from_pwpoly(f: &PwPoly, unit: i64) -> Result<RefPoly> {
        let nc = f.pieces().iter().map(|p| p.coeffs.len()).max().unwrap_or(1).max(1);
        let mut r = RefPoly { nc, ..Default::default() };
        for p in f.pieces() {
            r.a.push(to_grid(&p.left, unit)?);
            r.b.push(to_grid(&p.right, unit)?);
            let mut c = poly::to_f64(&p.coeffs);
            c.resize(nc, 0.0);
            r.c.extend(c);
        }
        Ok(r)
    }

    pub fn sup_abs(&self, unit: i64) -> f64 {
        let sc = scale(unit);
        (0..self.len())
            .map(|i| quad::FPoly::new(0.0, (self.b[i] - self.a[i]) as f64 * sc, self.coeffs(i).to_vec()).sup_abs())
            .fold(0.0, f64::max)
    }
}

pub fn scale(unit: i64) -> f64 {
    crate::dyadic::ldexp(1.0, -unit)
}

pub fn to_grid(x: &DyadicRational, unit: i64) -> Result<i64> {
    let e = x.exponent() + unit;
    if e < 0 {
        return Err(Error::Domain(format!("breakpoint {} finer than grid 2^-{unit}", x.to_f64())));
    }
    let v = x.mantissa() << (e as usize);
    i64::try_from(v).map_err(|_| Error::Cost("grid coordinate overflow".into()))
}

/// `out += w * p(x + delta)` in Taylor form.
pub fn shift_add(c: &[f64], delta: f64, w: f64, out: &mut [f64]) {
    let n = c.len();
    if delta == 0.0 {
        for i in 0..n {
            out[i] += w * c[i];
        }
        return;
    }
    let mut t = [0.0f64; 32];
    let t = &mut t[..n];
    t.copy_from_slice(c);
    for i in 0..n.saturating_sub(1) {
        for j in (i..n - 1).rev() {
            t[j] += delta * t[j + 1];
        }
    }
    for i in 0..n {
        out[i] += w * t[i];
    }
}

/// Weighted sum of shifted copies, restricted to `[lo, hi)`.
pub fn sum_parts(parts: &[(&RefPoly, i64, f64)], lo: i64, hi: i64, unit: i64) -> RefPoly {
    let sc = scale(unit);
    let mut bp: Vec<i64> = Vec::new();
    let mut nc = 1;
    for (r, sh, _) in parts {
        nc = nc.max(r.nc);
        let (s, e) = piece_range(r, lo - sh, hi - sh);
        for i in s..e {
            bp.push((r.a[i] + sh).max(lo));
            bp.push((r.b[i] + sh).min(hi));
        }
    }
    bp.sort_unstable();
    bp.dedup();
    if bp.len() < 2 {
        return RefPoly { nc, ..Default::default() };
    }
    let ne = bp.len() - 1;
    let mut acc = vec![0.0; ne * nc];
    for (r, sh, w) in parts {
        let (s, e) = piece_range(r, lo - sh, hi - sh);
        for i in s..e {
            let pa = r.a[i] + sh;
            let x0 = pa.max(lo);
            let x1 = (r.b[i] + sh).min(hi);
            let mut k = bp.partition_point(|&v| v < x0);
            while k < ne && bp[k] < x1 {
                shift_add(r.coeffs(i), (bp[k] - pa) as f64 * sc, *w, &mut acc[k * nc..k * nc + r.nc]);
                k += 1;
            }
        }
    }
    let mut out = RefPoly { nc, ..Default::default() };
    for k in 0..ne {
        let c = &acc[k * nc..(k + 1) * nc];
        if c.iter().all(|&v| v == 0.0) {
            continue;
        }
        out.a.push(bp[k]);
        out.b.push(bp[k + 1]);
        out.c.extend_from_slice(c);
    }
    out
}

/// Indices of pieces meeting `[lo, hi)`.
fn piece_range(r: &RefPoly, lo: i64, hi: i64) -> (usize, usize) {
    let s = r.b.partition_point(|&b| b <= lo);
    let e = r.a.partition_point(|&a| a < hi);
    (s, e.max(s))
}

/// A shape: its convolutions with `psi_k`, indexed by `k`, relative to the atom position.
#[derive(Clone, Debug, Default)]
pub struct Shape {
    pub refs: Vec<Option<RefPoly>>,
}

impl Shape {
    fn reach(&self, k: usize) -> Option<(i64, i64)> {
        self.refs.get(k).and_then(|r| r.as_ref()).and_then(|r| r.span())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub shape: u32,
    pub pos: i64,
    pub w: f64,
}

#[derive(Clone, Debug, Default)]
pub struct AtomSet {
    pub unit: i64,
    pub shapes: Vec<Shape>,
    pub atoms: Vec<Atom>,
}

#[derive(Clone, Debug)]
pub struct LmParams {
    pub p: f64,
    pub q: f64,
    pub s: f64,
    pub k_max: usize,
    pub spec: QuadratureSpec,
    /// Window width in grid units.
    pub window: i64,
    /// Weighted grid ranges `(lo, hi, weight)` whose weighted integrals sum to the
    /// integral over the line; empty means the whole line.
    pub ranges: Vec<(i64, i64, f64)>,
}

#[derive(Clone, Debug, Default)]
pub struct LmResult {
    /// `int Phi`.
    pub integral: f64,
    /// `int 2^{ksq}|g_k|^q` per `k`.
    pub per_k: Vec<f64>,
    pub quad_err: f64,
    pub components: usize,
    pub unique_components: usize,
    pub cells: u64,
}

impl AtomSet {
    fn atom_reach(&self, a: &Atom) -> Option<(i64, i64)> {
        let sh = &self.shapes[a.shape as usize];
        let mut r: Option<(i64, i64)> = None;
        for k in 0..sh.refs.len() {
            if let Some((lo, hi)) = sh.reach(k) {
                r = Some(match r {
                    None => (lo, hi),
                    Some((x, y)) => (x.min(lo), y.max(hi)),
                });
            }
        }
        r.map(|(lo, hi)| (a.pos + lo, a.pos + hi))
    }

    /// Groups of atoms with overlapping reach, each sorted by position.
    pub fn components(&self) -> Vec<(i64, i64, Vec<usize>)> {
        let mut idx: Vec<(i64, i64, usize)> =
            self.atoms.iter().enumerate().filter_map(|(i, a)| self.atom_reach(a).map(|(l, h)| (l, h, i))).collect();
        idx.sort_unstable();
        let mut out: Vec<(i64, i64, Vec<usize>)> = Vec::new();
        for (l, h, i) in idx {
            match out.last_mut() {
                Some(c) if l < c.1 => {
                    c.1 = c.1.max(h);
                    c.2.push(i);
                }
                _ => out.push((l, h, vec![i])),
            }
        }
        for c in &mut out {
            c.2.sort_by_key(|&i| (self.atoms[i].pos, self.atoms[i].shape));
        }
        out
    }

    pub fn evaluate(&self, prm: &LmParams) -> Result<LmResult> {
        prm.spec.validate()?;
        if prm.window <= 0 {
            return Err(Error::Domain("window must be positive".into()));
        }
        let nk = prm.k_max + 1;
        let comps = self.components();
        let whole = [(i64::MIN, i64::MAX, 1.0)];
        let ranges: &[(i64, i64, f64)] = if prm.ranges.is_empty() { &whole } else { &prm.ranges };
        // whole components share one integration per distinct signature; cut ones are done alone
        let mut seen: HashMap<Vec<(u32, i64, u64)>, usize> = HashMap::new();
        let mut jobs: Vec<(usize, i64, i64, f64)> = Vec::new();
        let mut count = 0;
        for &(rlo, rhi, wt) in ranges {
            for (ci, c) in comps.iter().enumerate() {
                if c.1 <= rlo || c.0 >= rhi {
                    continue;
                }
                count += 1;
                if c.0 >= rlo && c.1 <= rhi {
                    let p0 = self.atoms[c.2[0]].pos;
                    let sig: Vec<(u32, i64, u64)> =
                        c.2.iter().map(|&i| (self.atoms[i].shape, self.atoms[i].pos - p0, self.atoms[i].w.to_bits())).collect();
                    match seen.get(&sig) {
                        Some(&u) => jobs[u].3 += wt,
                        None => {
                            seen.insert(sig, jobs.len());
                            jobs.push((ci, c.0, c.1, wt));
                        }
                    }
                } else {
                    jobs.push((ci, c.0.max(rlo), c.1.min(rhi), wt));
                }
            }
        }
        let mut res = LmResult { per_k: vec![0.0; nk], components: count, unique_components: jobs.len(), ..Default::default() };
        for (ci, lo, hi, m) in jobs {
            let r = self.integrate_component(lo, hi, &comps[ci].2, prm)?;
            res.integral += m * r.integral;
            res.quad_err += m * r.quad_err;
            res.cells += r.cells;
            for k in 0..nk {
                res.per_k[k] += m * r.per_k[k];
            }
        }
        Ok(res)
    }

    fn integrate_component(&self, lo: i64, hi: i64, members: &[usize], prm: &LmParams) -> Result<LmResult> {
        let nk = prm.k_max + 1;
        // per k: members having a reference at k, sorted by position, and the extreme reaches
        let mut per_k: Vec<(Vec<usize>, i64, i64)> = Vec::with_capacity(nk);
        for k in 0..nk {
            let mut v = Vec::new();
            let (mut rl, mut rh) = (i64::MAX, i64::MIN);
            for &i in members {
                if let Some((a, b)) = self.shapes[self.atoms[i].shape as usize].reach(k) {
                    v.push(i);
                    rl = rl.min(a);
                    rh = rh.max(b);
                }
            }
            per_k.push((v, rl, rh));
        }
        let w = prm.window;
        let start = lo.div_euclid(w) * w;
        let mut res = LmResult { per_k: vec![0.0; nk], ..Default::default() };
        let mut x = start;
        let wk: Vec<f64> = (0..nk).map(|k| (k as f64 * prm.s * prm.q).exp2()).collect();
        while x < hi {
            let (w0, w1) = (x.max(lo), (x + w).min(hi));
            let mut gs: Vec<(usize, RefPoly)> = Vec::new();
            for k in 0..nk {
                let (ref v, rl, rh) = per_k[k];
                if v.is_empty() {
                    continue;
                }
                // atoms with pos in (w0 - rh, w1 - rl)
                let s = v.partition_point(|&i| self.atoms[i].pos <= w0 - rh);
                let e = v.partition_point(|&i| self.atoms[i].pos < w1 - rl);
                let mut parts = Vec::new();
                for &i in &v[s..e.max(s)] {
                    let a = &self.atoms[i];
                    let r = self.shapes[a.shape as usize].refs[k].as_ref().unwrap();
                    let (pa, pb) = r.span().unwrap();
                    if a.pos + pa < w1 && a.pos + pb > w0 {
                        parts.push((r, a.pos, a.w));
                    }
                }
                if parts.is_empty() {
                    continue;
                }
                let g = sum_parts(&parts, w0, w1, self.unit);
                if !g.is_empty() {
                    gs.push((k, g));
                }
            }
            if !gs.is_empty() {
                let r = integrate_window(&gs, &wk, prm, self.unit)?;
                res.integral += r.integral;
                res.quad_err += r.quad_err;
                res.cells += r.cells;
                for k in 0..nk {
                    res.per_k[k] += r.per_k[k];
                }
            }
            x = w1;
        }
        Ok(res)
    }
}

fn integrate_window(gs: &[(usize, RefPoly)], wk: &[f64], prm: &LmParams, unit: i64) -> Result<LmResult> {
    let sc = scale(unit);
    let nk = wk.len();
    let mut bp: Vec<i64> = Vec::new();
    for (_, g) in gs {
        bp.extend_from_slice(&g.a);
        bp.extend_from_slice(&g.b);
    }
    bp.sort_unstable();
    bp.dedup();
    let mut res = LmResult { per_k: vec![0.0; nk], ..Default::default() };
    let mut ptr = vec![0usize; gs.len()];
    let maxnc = gs.iter().map(|(_, g)| g.nc).max().unwrap_or(1);
    let mut buf = vec![0.0; gs.len() * maxnc];
    let mut act: Vec<(usize, usize, usize)> = Vec::with_capacity(gs.len());
    let mut tmp_k = vec![0.0; nk];
    for e in 0..bp.len().saturating_sub(1) {
        let (e0, e1) = (bp[e], bp[e + 1]);
        let h = (e1 - e0) as f64 * sc;
        act.clear();
        for (gi, (k, g)) in gs.iter().enumerate() {
            let p = &mut ptr[gi];
            while *p < g.len() && g.b[*p] <= e0 {
                *p += 1;
            }
            if *p < g.len() && g.a[*p] <= e0 {
                let off = act.len() * maxnc;
                let dst = &mut buf[off..off + g.nc];
                dst.iter_mut().for_each(|v| *v = 0.0);
                shift_add(g.coeffs(*p), (e0 - g.a[*p]) as f64 * sc, 1.0, dst);
                let mut hp = 1.0;
                for v in dst.iter_mut() {
                    *v *= hp;
                    hp *= h;
                }
                act.push((*k, off, g.nc));
            }
        }
        if act.is_empty() {
            continue;
        }
        res.cells += 1;
        tmp_k.iter_mut().for_each(|v| *v = 0.0);
        let (v, err) = integrate_cell(&act, &buf, wk, prm, &mut tmp_k)?;
        res.integral += v * h;
        res.quad_err += err * h;
        for k in 0..nk {
            res.per_k[k] += tmp_k[k] * h;
        }
    }
    Ok(res)
}

/// `int_0^1 (sum W_k |P_k(u)|^q)^{p/q} du`, with per-k parts added to `per_k`.
fn integrate_cell(act: &[(usize, usize, usize)], buf: &[f64], wk: &[f64], prm: &LmParams, per_k: &mut [f64]) -> Result<(f64, f64)> {
    let mut pts: Vec<(f64, bool)> = vec![(0.0, false), (1.0, false)];
    for &(_, off, nc) in act {
        let c = &buf[off..off + nc];
        let c0 = c[0].abs();
        let rest: f64 = c[1..].iter().map(|v| v.abs()).sum();
        let mag = c0 + rest;
        if mag == 0.0 {
            continue;
        }
        if c0 <= 1e-12 * mag {
            pts[0].1 = true;
        }
        if quad::horner(c, 1.0).abs() <= 1e-12 * mag {
            pts[1].1 = true;
        }
        if c0 > rest {
            continue;
        }
        for r in quad::real_roots(c, 0.0, 1.0) {
            pts.push((r, true));
        }
    }
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut merged: Vec<(f64, bool)> = Vec::with_capacity(pts.len());
    for p in pts {
        match merged.last_mut() {
            Some(l) if p.0 - l.0 < 1e-14 => l.1 |= p.1,
            _ => merged.push(p),
        }
    }
    // sup bound of the integrand on the cell; errors below a small fraction of it are roundoff
    let bound: f64 = act
        .iter()
        .map(|&(k, off, nc)| wk[k] * buf[off..off + nc].iter().map(|v| v.abs()).sum::<f64>().powf(prm.q))
        .sum::<f64>()
        .powf(prm.p / prm.q);
    let floor = 1e-2 * prm.spec.rel_tol * bound;
    let (mut total, mut err) = (0.0, 0.0);
    for wdw in merged.windows(2) {
        let (v, e) = adaptive(act, buf, wk, prm, floor, wdw[0].0, wdw[1].0, wdw[0].1, wdw[1].1, per_k)?;
        total += v;
        err += e;
    }
    Ok((total, err))
}

#[allow(clippy::too_many_arguments)]
fn adaptive(
    act: &[(usize, usize, usize)],
    buf: &[f64],
    wk: &[f64],
    prm: &LmParams,
    floor: f64,
    a: f64,
    b: f64,
    sl: bool,
    sr: bool,
    per_k: &mut [f64],
) -> Result<(f64, f64)> {
    if sl && sr {
        let m = 0.5 * (a + b);
        let (v1, e1) = adaptive(act, buf, wk, prm, floor, a, m, true, false, per_k)?;
        let (v2, e2) = adaptive(act, buf, wk, prm, floor, m, b, false, true, per_k)?;
        return Ok((v1 + v2, e1 + e2));
    }
    let r = prm.p / prm.q;
    let mut tmp = vec![0.0; per_k.len()];
    let mut stack = vec![(a, b, sl, sr, 0u32)];
    let (mut total, mut err) = (0.0, 0.0);
    while let Some((a, b, sl, sr, depth)) = stack.pop() {
        let coarse = rule(act, buf, wk, prm.q, r, a, b, sl, sr, prm.spec.nodes, None);
        tmp.iter_mut().for_each(|v| *v = 0.0);
        let fine = rule(act, buf, wk, prm.q, r, a, b, sl, sr, prm.spec.nodes * prm.spec.refinement, Some(&mut tmp));
        let e = (fine - coarse).abs();
        if e <= prm.spec.rel_tol * fine.abs() || e <= floor * (b - a) {
            total += fine;
            err += e;
            for (p, t) in per_k.iter_mut().zip(&tmp) {
                *p += t;
            }
            continue;
        }
        if depth >= 40 {
            return Err(Error::Tolerance(format!("local-means quadrature did not converge: {e:e} vs {fine:e}")));
        }
        let m = 0.5 * (a + b);
        stack.push((a, m, sl, false, depth + 1));
        stack.push((m, b, false, sr, depth + 1));
    }
    Ok((total, err))
}

#[allow(clippy::too_many_arguments)]
fn rule(
    act: &[(usize, usize, usize)],
    buf: &[f64],
    wk: &[f64],
    q: f64,
    r: f64,
    a: f64,
    b: f64,
    sl: bool,
    sr: bool,
    n: usize,
    mut per_k: Option<&mut [f64]>,
) -> f64 {
    let (x, w) = quad::gauss_legendre(n);
    let h = b - a;
    let mut s = 0.0;
    for (xi, wi) in x.iter().zip(w) {
        let (pt, jac) = if sl {
            (a + h * xi.powi(4), 4.0 * h * xi.powi(3))
        } else if sr {
            (b - h * xi.powi(4), 4.0 * h * xi.powi(3))
        } else {
            (a + h * xi, h)
        };
        let mut sum = 0.0;
        for &(k, off, nc) in act {
            let v = quad::horner(&buf[off..off + nc], pt).abs();
            if v > 0.0 {
                let t = wk[k] * v.powf(q);
                sum += t;
                if let Some(pk) = per_k.as_deref_mut() {
                    pk[k] += wi * jac * t;
                }
            }
        }
        if sum > 0.0 {
            s += wi * jac * sum.powf(r);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::q;

    fn tent() -> PwPoly {
        let z = DyadicRational::zero();
        let h = DyadicRational::new(1, -1);
        let o = DyadicRational::one();
        PwPoly::from_terms(vec![(z, h.clone(), vec![q(0), q(1)]), (h, o, vec![q(1) / q(2), q(-1)])])
    }

    #[test]
    fn sum_parts_matches_exact_translates() {
        let f = tent();
        let r = RefPoly::from_pwpoly(&f, 4).unwrap();
        let g = sum_parts(&[(&r, 0, 1.0), (&r, 4, -2.0)], -16, 32, 4);
        let exact = f.add(&f.translate(&DyadicRational::new(1, -2)).scale(&q(-2)));
        for i in -5..40 {
            let x = i as f64 / 37.0;
            let xi = (x * 16.0).floor() as i64;
            let j = g.b.partition_point(|&b| b <= xi);
            let v = if j < g.len() && g.a[j] <= xi {
                quad::horner(g.coeffs(j), x - g.a[j] as f64 / 16.0)
            } else {
                0.0
            };
            assert!((v - exact.eval_f64(x)).abs() < 1e-14, "x={x}");
        }
    }

    #[test]
    fn single_k_reduces_to_lq() {
        // one k, p = q: integral equals ||g||_q^q
        let f = tent();
        let r = RefPoly::from_pwpoly(&f, 4).unwrap();
        let set = AtomSet {
            unit: 4,
            shapes: vec![Shape { refs: vec![Some(r)] }],
            atoms: vec![Atom { shape: 0, pos: 0, w: 1.0 }, Atom { shape: 0, pos: 3, w: -0.5 }],
        };
        let prm = LmParams { p: 1.7, q: 1.7, s: -0.5, k_max: 0, spec: QuadratureSpec::default(), window: 8, ranges: Vec::new() };
        let got = set.evaluate(&prm).unwrap().integral;
        let g = f.add(&f.translate(&DyadicRational::new(3, -4)).scale(&(q(-1) / q(2))));
        let want = g.lq_norm_pow(1.7, &QuadratureSpec::default()).unwrap();
        assert!((got - want).abs() < 1e-11 * want);
    }

    #[test]
    fn identical_components_deduplicated() {
        let r = RefPoly::from_pwpoly(&tent(), 4).unwrap();
        let set = AtomSet {
            unit: 4,
            shapes: vec![Shape { refs: vec![Some(r)] }],
            atoms: (0..5).map(|i| Atom { shape: 0, pos: 40 * i, w: 2.0 }).collect(),
        };
        let prm = LmParams { p: 3.0, q: 1.5, s: -0.5, k_max: 0, spec: QuadratureSpec::default(), window: 8, ranges: Vec::new() };
        let res = set.evaluate(&prm).unwrap();
        assert_eq!((res.components, res.unique_components), (5, 1));
        let one = AtomSet { atoms: vec![set.atoms[0]], ..set.clone() }.evaluate(&prm).unwrap();
        assert!((res.integral - 5.0 * one.integral).abs() < 1e-12 * res.integral);
    }
}
