//! Analysis kernels and the mollifier, built as high-order derivatives of a
//! centred cardinal B-spline, together with their certification.

use crate::dyadic::{DyadicInterval, DyadicRational};
use crate::error::{Error, Result};
use crate::poly::{self, Q};
use crate::pwpoly::{FourierEvaluator, PwPoly};
use crate::quad;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

/// Construction parameters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelSpec {
    /// Vanishing moments of the mollifier.
    pub m0: usize,
    /// Vanishing moments of the analysis kernel.
    pub m1: usize,
    /// Spline order of the base bump.
    pub r: usize,
    /// Base bump support radius as `(mantissa, exponent)`.
    pub radius: (i64, i64),
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec { m0: 8, m1: 8, r: 12, radius: (3, -6) }
    }
}

impl KernelSpec {
    pub fn radius(&self) -> DyadicRational {
        DyadicRational::new(self.radius.0, self.radius.1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m0 % 2 != 0 || self.m1 % 2 != 0 {
            return Err(Error::Domain("moment orders must be even".into()));
        }
        if self.r < self.m0 + 3 || self.r < self.m1 + 3 {
            return Err(Error::Domain(format!("spline order {} too small", self.r)));
        }
        if self.radius() >= DyadicRational::pow2(-4) || self.radius().signum() <= 0 {
            return Err(Error::Domain("radius must lie in (0, 1/16)".into()));
        }
        Ok(())
    }
}

/// Knot spacing `2^e`: the largest power of two with `r 2^e / 2 <= radius`.
pub fn knot_exponent(r: usize, radius: &DyadicRational) -> i64 {
    let two_radius = radius.shl(1);
    let mut e = two_radius.exponent() + two_radius.mantissa().bits() as i64 + 1;
    while &DyadicRational::new(r as i64, e) > &two_radius {
        e -= 1;
    }
    e
}

/// Cardinal B-spline of order `r` on knots `0..r`.
pub fn cardinal_bspline(r: usize) -> PwPoly {
    let bx = PwPoly::indicator(DyadicRational::zero(), DyadicRational::one());
    (1..r).fold(bx.clone(), |acc, _| acc.convolve(&bx))
}

/// Even spline bump of order `r` with dyadic knots, supported in `[-radius, radius]`.
pub fn build_base_bump(r: usize, radius: &DyadicRational) -> PwPoly {
    assert!(r >= 2, "spline order must be >= 2");
    let e = knot_exponent(r, radius);
    // theta(x) = M_r(x / 2^e + r / 2)
    let shift = -DyadicRational::new(r as i64, e - 1);
    cardinal_bspline(r).affine_image(-e, &shift)
}

fn derivative_value_at_zero(theta: &PwPoly, m: usize) -> Q {
    theta.nth_derivative(m).eval(&Q::zero())
}

/// `eta = -theta^{(M0+1)} / theta^{(M0)}(0)`.
pub fn build_eta(spec: &KernelSpec) -> Result<PwPoly> {
    spec.validate()?;
    let theta = build_base_bump(spec.r, &spec.radius());
    let v = derivative_value_at_zero(&theta, spec.m0);
    if v.is_zero() {
        return Err(Error::Degenerate(format!("theta^({}) vanishes at 0", spec.m0)));
    }
    Ok(theta.nth_derivative(spec.m0 + 1).scale(&(-Q::one() / v)))
}

/// `(psi_0, psi, Psi)` with `psi_0 = theta`, `psi = theta^{(M1+1)} / theta^{(M1)}(0)` and `Psi(0) = 1`.
pub fn build_psi_pair(spec: &KernelSpec) -> Result<(PwPoly, PwPoly, PwPoly)> {
    spec.validate()?;
    let theta = build_base_bump(spec.r, &spec.radius());
    let v = derivative_value_at_zero(&theta, spec.m1);
    if v.is_zero() {
        return Err(Error::Degenerate(format!("theta^({}) vanishes at 0", spec.m1)));
    }
    let c = Q::one() / v;
    let psi = theta.nth_derivative(spec.m1 + 1).scale(&c);
    let big_psi = psi.antiderivative()?;
    Ok((theta, psi, big_psi))
}

/// Sampled Fourier moduli of both kernels.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub epsilon: f64,
    pub grid: usize,
    /// `min |psi0^(xi)| / psi0^(0)` over `(-eps, eps)`.
    pub psi0_margin: f64,
    /// `min |psi^(xi)| / (|xi|^{M+1} |m_{M+1}| / (M+1)!)` over the annulus.
    pub psi_margin: f64,
    pub raw_min_psi0: f64,
    pub raw_min_psi: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Minimal normalised margin required by [`certify_admissibility`].
pub const ADMISSIBILITY_THRESHOLD: f64 = 1e-3;

/// Sample `|psi0^|` on `(-eps, eps)` and `|psi^|` on `eps/4 < |xi| < eps`.
pub fn certify_admissibility(psi0: &PwPoly, psi: &PwPoly, epsilon: f64, grid: usize) -> Result<AdmissibilityReport> {
    if !(epsilon > 0.0) || grid < 64 {
        return Err(Error::Domain("need eps > 0 and grid >= 64".into()));
    }
    let base = psi0.integral().to_f64().unwrap_or(0.0).abs();
    let mut order = 0usize;
    while order < 64 && psi.moment(order).is_zero() {
        order += 1;
    }
    let lead = psi.moment(order).to_f64().unwrap_or(0.0).abs() / (1..=order).fold(1.0, |a, i| a * i as f64);
    let (f0, f1) = (FourierEvaluator::new(psi0), FourierEvaluator::new(psi));
    let mut raw0 = f64::INFINITY;
    let mut m0 = f64::INFINITY;
    for i in 0..grid {
        let xi = -epsilon + (i as f64 + 0.5) * 2.0 * epsilon / grid as f64;
        let v = f0.eval(xi).norm();
        raw0 = raw0.min(v);
        m0 = m0.min(if base > 0.0 { v / base } else { 0.0 });
    }
    let mut raw1 = f64::INFINITY;
    let mut m1 = f64::INFINITY;
    for i in 0..grid {
        let a = epsilon / 4.0 + (i as f64 + 0.5) * 0.75 * epsilon / grid as f64;
        for xi in [a, -a] {
            let v = f1.eval(xi).norm();
            raw1 = raw1.min(v);
            m1 = m1.min(if lead > 0.0 { v / (lead * xi.abs().powi(order as i32)) } else { 0.0 });
        }
    }
    let pass = raw0 > 0.0 && raw1 > 0.0 && m0 >= ADMISSIBILITY_THRESHOLD && m1 >= ADMISSIBILITY_THRESHOLD;
    let rep = AdmissibilityReport {
        epsilon,
        grid,
        psi0_margin: m0,
        psi_margin: m1,
        raw_min_psi0: raw0,
        raw_min_psi: raw1,
        threshold: ADMISSIBILITY_THRESHOLD,
        pass,
    };
    if !pass {
        return Err(Error::Admissibility(format!("{rep:?}")));
    }
    Ok(rep)
}

/// Haar function `h_{j,mu}` as a piecewise polynomial.
pub fn haar_pw(j: i64, mu: i64) -> PwPoly {
    let l = DyadicRational::new(mu, -j);
    let m = DyadicRational::new(2 * mu + 1, -j - 1);
    let r = DyadicRational::new(mu + 1, -j);
    PwPoly::linear_combination(&[
        (Q::one(), &PwPoly::indicator(l, m.clone())),
        (-Q::one(), &PwPoly::indicator(m, r)),
    ])
}

/// Resolution of the calibration interval endpoints.
pub const CALIBRATION_GRID: i64 = 16;

/// Verify `psi * h_00 = -2 Psi(. - 1/2)` on `[1/4, 3/4]` and return `(J, c_0)` where
/// `|psi * h_00| >= c_0 / 2` on `J`, `c_0 = Psi(0)`.
pub fn find_calibration_interval(psi: &PwPoly) -> Result<(DyadicInterval, f64)> {
    let big_psi = psi.antiderivative()?;
    let conv = psi.convolve(&haar_pw(0, 0));
    let half = DyadicRational::pow2(-1);
    let target = big_psi.translate(&half).scale(&poly::q(-2));
    let (a, b) = (DyadicRational::new(1, -2), DyadicRational::new(3, -2));
    if !conv.equals_on(&target, &a, &b) {
        return Err(Error::Calibration("psi * h_00 differs from -2 Psi(. - 1/2) on [1/4, 3/4]".into()));
    }
    let c0q = big_psi.eval(&Q::zero());
    let c0 = c0q.to_f64().unwrap_or(0.0);
    if !(c0 > 0.0) {
        return Err(Error::Calibration("Psi(0) must be positive".into()));
    }
    // |2 Psi(y)| >= c0/2  <=>  Psi(y) >= c0/4 near y = 0 (Psi is even and positive there)
    let level = &c0q / poly::q(4);
    let shifted = big_psi.sub(&PwPoly::indicator(DyadicRational::new(-1, 0), DyadicRational::new(1, 0)).scale(&level));
    let mut first_root = f64::INFINITY;
    for p in shifted.to_fpolys() {
        let l = p.left;
        let r = l + p.len;
        if r <= 0.0 {
            continue;
        }
        let u = p.unit_coeffs();
        let mut cands = quad::real_roots(&u, 0.0, 1.0);
        if quad::horner(&u, 0.0) == 0.0 {
            cands.push(0.0);
        }
        for t in cands {
            let x = l + t * p.len;
            if x > 0.0 {
                first_root = first_root.min(x);
            }
        }
    }
    let grid = DyadicRational::pow2(-CALIBRATION_GRID);
    let mut k = (first_root.min(0.25) * (1u64 << CALIBRATION_GRID) as f64).floor() as i64;
    // exact confirmation at the chosen endpoint; shrink if rounding put it past the root
    while k > 0 && shifted.eval_dyadic(&DyadicRational::new(k, -CALIBRATION_GRID)) < Q::zero() {
        k -= 1;
    }
    let w = &grid * &DyadicRational::from_int(k);
    if w.shl(1) < DyadicRational::pow2(-8) {
        return Err(Error::Calibration(format!("calibration interval too short: half width {w}")));
    }
    let j = DyadicInterval::new(&half - &w, &half + &w)?;
    Ok((j, c0))
}

/// `eta_{l,nu}(x) = eta(2^l x - nu)`.
pub fn eta_translate(eta: &PwPoly, l: i64, nu: i64) -> PwPoly {
    eta.affine_image(l, &DyadicRational::new(nu, -l))
}

/// Calibrated kernels.
#[derive(Clone, Debug)]
pub struct KernelSet {
    pub spec: KernelSpec,
    pub eta: PwPoly,
    pub psi0: PwPoly,
    pub psi: PwPoly,
    pub big_psi: PwPoly,
    pub epsilon: f64,
    pub j: DyadicInterval,
    pub c0: f64,
}

impl KernelSet {
    /// Build and certify every kernel.
    pub fn build(spec: &KernelSpec, epsilon: f64) -> Result<Self> {
        let eta = build_eta(spec)?;
        let (psi0, psi, big_psi) = build_psi_pair(spec)?;
        certify_admissibility(&psi0, &psi, epsilon, 256)?;
        let (j, c0) = find_calibration_interval(&psi)?;
        Ok(KernelSet { spec: spec.clone(), eta, psi0, psi, big_psi, epsilon, j, c0 })
    }

    /// Shared default kernel set (`M0 = M1 = 8`, `r = 12`, knots `2^-7`, `eps = 1`).
    pub fn default_set() -> &'static KernelSet {
        static SET: OnceLock<KernelSet> = OnceLock::new();
        SET.get_or_init(|| KernelSet::build(&KernelSpec::default(), 1.0).expect("default kernels certify"))
    }

    /// `psi * h_00 = Psi(x) + Psi(x - 1) - 2 Psi(x - 1/2)`.
    pub fn psi_haar(&self) -> PwPoly {
        self.psi.convolve(&haar_pw(0, 0))
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "# kernelset m0={} m1={} r={} eps={} J={} {} {} {} c0={}\n",
            self.spec.m0,
            self.spec.m1,
            self.spec.r,
            self.epsilon,
            self.j.left.mantissa(),
            self.j.left.exponent(),
            self.j.right.mantissa(),
            self.j.right.exponent(),
            self.c0
        );
        for (name, f) in [("eta", &self.eta), ("psi0", &self.psi0), ("psi", &self.psi), ("Psi", &self.big_psi)] {
            s.push_str(&format!("## {name}\n"));
            s.push_str(&f.to_text());
        }
        s
    }

    /// Parse the format written by [`KernelSet::to_text`].
    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::Parse(m.to_string());
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty kernel file"))?;
        let mut m0 = None;
        let mut m1 = None;
        let mut r = None;
        let mut eps = None;
        let mut c0 = None;
        let mut jv: Vec<&str> = Vec::new();
        let toks: Vec<&str> = header.trim_start_matches('#').split_whitespace().collect();
        let mut i = 0;
        while i < toks.len() {
            let t = toks[i];
            if let Some(v) = t.strip_prefix("m0=") {
                m0 = v.parse().ok();
            } else if let Some(v) = t.strip_prefix("m1=") {
                m1 = v.parse().ok();
            } else if let Some(v) = t.strip_prefix("r=") {
                r = v.parse().ok();
            } else if let Some(v) = t.strip_prefix("eps=") {
                eps = v.parse().ok();
            } else if let Some(v) = t.strip_prefix("c0=") {
                c0 = v.parse().ok();
            } else if let Some(v) = t.strip_prefix("J=") {
                jv = vec![v];
                jv.extend(toks.iter().skip(i + 1).take(3));
                i += 3;
            }
            i += 1;
        }
        if jv.len() != 4 {
            return Err(bad("missing J in header"));
        }
        let j = DyadicInterval::new(DyadicRational::parse_pair(jv[0], jv[1])?, DyadicRational::parse_pair(jv[2], jv[3])?)?;
        let mut sections: Vec<(String, String)> = Vec::new();
        for line in lines {
            if let Some(name) = line.strip_prefix("## ") {
                sections.push((name.trim().to_string(), String::new()));
            } else if let Some(last) = sections.last_mut() {
                last.1.push_str(line);
                last.1.push('\n');
            }
        }
        let get = |n: &str| -> Result<PwPoly> {
            let body = sections.iter().find(|(k, _)| k == n).ok_or_else(|| bad(&format!("missing section {n}")))?;
            PwPoly::from_text(&body.1)
        };
        let spec = KernelSpec {
            m0: m0.ok_or_else(|| bad("missing m0"))?,
            m1: m1.ok_or_else(|| bad("missing m1"))?,
            r: r.ok_or_else(|| bad("missing r"))?,
            radius: KernelSpec::default().radius,
        };
        Ok(KernelSet {
            spec,
            eta: get("eta")?,
            psi0: get("psi0")?,
            psi: get("psi")?,
            big_psi: get("Psi")?,
            epsilon: eps.ok_or_else(|| bad("missing eps"))?,
            j,
            c0: c0.ok_or_else(|| bad("missing c0"))?,
        })
    }

    /// Exact moment, parity and support checks; returns a list of failures.
    pub fn check(&self) -> Vec<String> {
        let mut fails = Vec::new();
        for n in 0..=self.spec.m0 {
            if !self.eta.moment(n).is_zero() {
                fails.push(format!("eta moment {n} nonzero"));
            }
        }
        for n in 0..=self.spec.m1 {
            if !self.psi.moment(n).is_zero() {
                fails.push(format!("psi moment {n} nonzero"));
            }
        }
        if self.eta.reflect() != self.eta.scale(&-Q::one()) {
            fails.push("eta not odd".into());
        }
        if self.psi.reflect() != self.psi.scale(&-Q::one()) {
            fails.push("psi not odd".into());
        }
        if self.psi0.reflect() != self.psi0 {
            fails.push("psi0 not even".into());
        }
        if self.big_psi.reflect() != self.big_psi {
            fails.push("Psi not even".into());
        }
        let lim = DyadicRational::pow2(-4);
        for (name, f) in [("eta", &self.eta), ("psi0", &self.psi0), ("psi", &self.psi), ("Psi", &self.big_psi)] {
            match f.support() {
                Some((a, b)) if a > -&lim && b < lim => {}
                _ => fails.push(format!("{name} support not inside (-1/16, 1/16)")),
            }
        }
        let half_int = self.eta.restrict(&DyadicRational::zero(), &DyadicRational::pow2(-1)).integral();
        if half_int != Q::one() {
            fails.push(format!("int_0^(1/2) eta = {half_int}, expected 1"));
        }
        if self.big_psi.eval(&Q::zero()) != Q::one() {
            fails.push("Psi(0) != 1".into());
        }
        let (a, b) = (DyadicRational::new(1, -2), DyadicRational::new(3, -2));
        if !self.j.is_subset_of(&DyadicInterval { left: a, right: b }) {
            fails.push("J not inside [1/4, 3/4]".into());
        }
        if self.big_psi.eval(&Q::zero()).is_negative() {
            fails.push("Psi(0) negative".into());
        }
        fails
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::q;

    #[test]
    fn tent_for_order_two() {
        let rad = DyadicRational::pow2(-5);
        let t = build_base_bump(2, &rad);
        assert_eq!(t.integral(), rad.to_rational());
        assert_eq!(t.support(), Some((-&rad, rad.clone())));
        assert_eq!(t.eval(&Q::zero()), q(1));
    }

    #[test]
    fn bump_is_even_and_smooth() {
        let rad = DyadicRational::pow2(-5);
        for r in [4usize, 7, 12] {
            let t = build_base_bump(r, &rad);
            assert_eq!(t.reflect(), t);
            let (a, b) = t.support().unwrap();
            assert!(a >= -&rad && b <= rad);
            // C^{r-2}: one-sided derivative values agree at every knot
            for m in 0..=(r - 2) {
                let d = t.nth_derivative(m);
                for w in d.pieces().windows(2) {
                    let left_val = poly::eval(&w[0].coeffs, &w[0].len().to_rational());
                    assert_eq!(left_val, w[1].coeffs.first().cloned().unwrap_or_default(), "r={r} m={m}");
                }
            }
        }
    }

    #[test]
    fn knot_spacing_default() {
        assert_eq!(knot_exponent(12, &DyadicRational::pow2(-5)), -8);
        assert_eq!(knot_exponent(12, &KernelSpec::default().radius()), -7);
        assert_eq!(knot_exponent(2, &DyadicRational::pow2(-5)), -5);
    }

    #[test]
    fn zero_of_bump_transform_fails_admissibility() {
        let ks = KernelSet::default_set();
        // theta^ vanishes first at 2 pi / h with h = 2^-8
        let xi0 = 2.0 * std::f64::consts::PI * 256.0;
        let eps = xi0 * 1.0000001;
        let bad = certify_admissibility(&ks.psi0, &ks.psi, eps, 64);
        assert!(matches!(bad, Err(Error::Admissibility(_))));
    }
}
