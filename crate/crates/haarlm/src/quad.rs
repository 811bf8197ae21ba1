//! Floating-point quadrature for non-polynomial integrands such as `|g|^q`:
//! root isolation on each piece, then paired Gauss-Legendre rules.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

/// Gauss-Legendre order, refinement factor and relative tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub nodes: usize,
    pub refinement: usize,
    pub rel_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { nodes: 16, refinement: 2, rel_tol: 1e-10 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nodes < 4 || self.refinement < 2 || !(self.rel_tol > 0.0) {
            return Err(Error::Domain(format!("invalid quadrature spec {self:?}")));
        }
        Ok(())
    }
}

/// A floating-point polynomial piece on `[left, left + len)`, coefficients in `x - left`.
#[derive(Clone, Debug, PartialEq)]
pub struct FPoly {
    pub left: f64,
    pub len: f64,
    pub c: Vec<f64>,
}

impl FPoly {
    pub fn new(left: f64, len: f64, c: Vec<f64>) -> Self {
        FPoly { left, len, c }
    }

    /// Coefficients in the unit variable `u = (x - left) / len`.
    pub fn unit_coeffs(&self) -> Vec<f64> {
        let mut pw = 1.0;
        self.c
            .iter()
            .map(|c| {
                let v = c * pw;
                pw *= self.len;
                v
            })
            .collect()
    }

    pub fn eval_local(&self, t: f64) -> f64 {
        horner(&self.c, t)
    }

    pub fn sup_abs(&self) -> f64 {
        let u = self.unit_coeffs();
        let d = deriv(&u);
        let mut m = horner(&u, 0.0).abs().max(horner(&u, 1.0).abs());
        for r in real_roots(&d, 0.0, 1.0) {
            m = m.max(horner(&u, r).abs());
        }
        m
    }
}

pub fn horner(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |a, x| a * t + x)
}

pub fn deriv(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(i, x)| x * i as f64).collect()
}

/// Real roots of `c` in the open interval `(lo, hi)`, found by splitting at
/// critical points and bisecting every sign change.
pub fn real_roots(c: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let mut c = c.to_vec();
    let scale = c.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if scale == 0.0 {
        return Vec::new();
    }
    while c.len() > 1 && c.last().unwrap().abs() <= 1e-300 {
        c.pop();
    }
    if c.len() <= 1 {
        return Vec::new();
    }
    if c.len() == 2 {
        let r = -c[0] / c[1];
        return if r > lo && r < hi { vec![r] } else { Vec::new() };
    }
    let crit = real_roots(&deriv(&c), lo, hi);
    let mut pts = Vec::with_capacity(crit.len() + 2);
    pts.push(lo);
    pts.extend(crit);
    pts.push(hi);
    let mut roots = Vec::new();
    for w in pts.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (mut fa, fb) = (horner(&c, a), horner(&c, b));
        if fa == 0.0 {
            if a > lo && a < hi && roots.last().map_or(true, |&r: &f64| r < a) {
                roots.push(a);
            }
            continue;
        }
        if fb == 0.0 || (fa > 0.0) == (fb > 0.0) {
            continue;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let fm = horner(&c, m);
            if fm == 0.0 {
                a = m;
                b = m;
                break;
            }
            if (fm > 0.0) == (fa > 0.0) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        roots.push(0.5 * (a + b));
    }
    for w in pts.windows(2).skip(1) {
        // roots exactly at interior critical points
        let x = w[0];
        if horner(&c, x) == 0.0 && !roots.contains(&x) {
            roots.push(x);
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<std::sync::Mutex<Vec<(usize, &'static (Vec<f64>, Vec<f64>))>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| std::sync::Mutex::new(Vec::new()));
    let mut g = cache.lock().unwrap();
    if let Some((_, r)) = g.iter().find(|(k, _)| *k == n) {
        return r;
    }
    let rule: &'static (Vec<f64>, Vec<f64>) = Box::leak(Box::new(compute_gl(n)));
    g.push((n, rule));
    rule
}

fn compute_gl(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = 0.5 * (1.0 - z);
        w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Integrand on `[0,1]` possibly with an algebraic kink at either end.
/// Returns the pair of rule values (coarse, fine).
fn rule_pair<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, sing_l: bool, sing_r: bool, spec: &QuadratureSpec) -> (f64, f64) {
    let run = |n: usize| -> f64 {
        let (x, w) = gauss_legendre(n);
        let h = b - a;
        let mut s = 0.0;
        for (xi, wi) in x.iter().zip(w) {
            // grading substitution v^4 removes |x - root|^q endpoint behaviour
            let (pt, jac) = match (sing_l, sing_r) {
                (true, false) => (a + h * xi.powi(4), 4.0 * h * xi.powi(3)),
                (false, true) => (b - h * xi.powi(4), 4.0 * h * xi.powi(3)),
                _ => (a + h * xi, h),
            };
            s += wi * jac * f(pt);
        }
        s
    };
    (run(spec.nodes), run(spec.nodes * spec.refinement))
}

/// Adaptive paired-rule integration over `[a, b]`; errors if bisection depth is exhausted.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    sing_l: bool,
    sing_r: bool,
    spec: &QuadratureSpec,
    abs_floor: f64,
) -> Result<(f64, f64)> {
    if sing_l && sing_r {
        let m = 0.5 * (a + b);
        let (v1, e1) = integrate_adaptive(f, a, m, true, false, spec, abs_floor)?;
        let (v2, e2) = integrate_adaptive(f, m, b, false, true, spec, abs_floor)?;
        return Ok((v1 + v2, e1 + e2));
    }
    let mut stack = vec![(a, b, sing_l, sing_r, 0u32)];
    let (mut total, mut err) = (0.0, 0.0);
    while let Some((a, b, sl, sr, depth)) = stack.pop() {
        let (c, fi) = rule_pair(f, a, b, sl, sr, spec);
        let e = (fi - c).abs();
        if e <= spec.rel_tol * fi.abs() || e <= abs_floor * (b - a) {
            total += fi;
            err += e;
            continue;
        }
        if depth >= 40 {
            return Err(Error::Tolerance(format!("no convergence on [{a}, {b}]: rule difference {e:e} vs value {fi:e}")));
        }
        let m = 0.5 * (a + b);
        stack.push((a, m, sl, false, depth + 1));
        stack.push((m, b, false, sr, depth + 1));
    }
    Ok((total, err))
}

/// Split points of one unit-scaled polynomial in `[0,1]`: roots and critical points,
/// each flagged when the polynomial vanishes there.
pub fn split_points(u: &[f64]) -> Vec<(f64, bool)> {
    let sup = u.iter().fold(0.0f64, |a, x| a + x.abs()).max(1e-300);
    let mut pts: Vec<f64> = vec![0.0, 1.0];
    pts.extend(real_roots(u, 0.0, 1.0));
    pts.extend(real_roots(&deriv(u), 0.0, 1.0));
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    pts.into_iter().map(|t| (t, horner(u, t).abs() <= 1e-11 * sup)).collect()
}

/// `int |f|^q` over a list of pieces.
pub fn integrate_abs_pow(pieces: &[FPoly], q: f64, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    let mut total = 0.0;
    for p in pieces {
        let u = p.unit_coeffs();
        let sup = p.sup_abs();
        if sup == 0.0 {
            continue;
        }
        let f = |t: f64| horner(&u, t).abs().powf(q);
        let floor = spec.rel_tol * 1e-6 * sup.powf(q);
        let pts = split_points(&u);
        let mut s = 0.0;
        for w in pts.windows(2) {
            let (v, _) = integrate_adaptive(&f, w[0].0, w[1].0, w[0].1, w[1].1, spec, floor)?;
            s += v;
        }
        total += s * p.len;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_integrates_polynomials() {
        let (x, w) = gauss_legendre(16);
        let s: f64 = x.iter().zip(w).map(|(x, w)| w * x.powi(31)).sum();
        assert!((s - 1.0 / 32.0).abs() < 1e-15);
    }

    #[test]
    fn roots_found() {
        // (t - 0.25)(t - 0.5)(t - 0.9)
        let c = [-0.1125, 0.9 * 0.75 + 0.125, -1.65, 1.0];
        let r = real_roots(&c, 0.0, 1.0);
        assert_eq!(r.len(), 3);
        for (a, b) in r.iter().zip([0.25, 0.5, 0.9]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn abs_pow_of_linear() {
        // int_0^1 |t - 1/3|^1.2 dt
        let p = FPoly::new(0.0, 1.0, vec![-1.0 / 3.0, 1.0]);
        let v = integrate_abs_pow(&[p], 1.2, &QuadratureSpec::default()).unwrap();
        let want = ((1.0f64 / 3.0).powf(2.2) + (2.0f64 / 3.0).powf(2.2)) / 2.2;
        assert!((v - want).abs() < 1e-13 * want);
    }
}
