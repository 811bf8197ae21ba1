//! Compactly supported piecewise polynomials with dyadic breakpoints and exact
//! rational coefficients stored in the local variable `x - left`.

use crate::dyadic::DyadicRational;
use crate::error::{Error, Result};
use crate::poly::{self, Q};
use crate::quad::{self, FPoly, QuadratureSpec};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};
use std::fmt::Write as _;

/// One polynomial piece on `[left, right)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Piece {
    pub left: DyadicRational,
    pub right: DyadicRational,
    /// Coefficients in `x - left`, lowest degree first.
    pub coeffs: Vec<Q>,
}

impl Piece {
    pub fn len(&self) -> DyadicRational {
        &self.right - &self.left
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }
}

/// Canonical piecewise polynomial: sorted disjoint nonzero pieces, adjacent
/// pieces never continue the same polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct PwPoly {
    pieces: Vec<Piece>,
}

fn dq(x: &DyadicRational) -> Q {
    x.to_rational()
}

impl PwPoly {
    pub fn zero() -> Self {
        PwPoly { pieces: Vec::new() }
    }

    /// Polynomial `coeffs` (in `x - left`) on `[left, right)`.
    pub fn from_piece(left: DyadicRational, right: DyadicRational, coeffs: Vec<Q>) -> Self {
        assert!(left < right, "empty piece");
        Self::from_pieces(vec![Piece { left, right, coeffs }])
    }

    /// Indicator of `[left, right)`.
    pub fn indicator(left: DyadicRational, right: DyadicRational) -> Self {
        Self::from_piece(left, right, vec![Q::one()])
    }

    /// Build from pieces that may touch but must not overlap.
    pub fn from_pieces(mut pieces: Vec<Piece>) -> Self {
        pieces.sort_by(|a, b| a.left.cmp(&b.left));
        for w in pieces.windows(2) {
            assert!(w[0].right <= w[1].left, "overlapping pieces");
        }
        let mut out: Vec<Piece> = Vec::with_capacity(pieces.len());
        for mut p in pieces {
            poly::trim(&mut p.coeffs);
            if p.coeffs.is_empty() || p.left >= p.right {
                continue;
            }
            if let Some(last) = out.last_mut() {
                if last.right == p.left {
                    let cont = poly::taylor_shift(&last.coeffs, &dq(&last.len()));
                    let mut cont = cont;
                    poly::trim(&mut cont);
                    if cont == p.coeffs {
                        last.right = p.right;
                        continue;
                    }
                }
            }
            out.push(p);
        }
        PwPoly { pieces: out }
    }

    /// Sum of possibly overlapping weighted terms `(left, right, coeffs)`.
    pub fn from_terms(terms: Vec<(DyadicRational, DyadicRational, Vec<Q>)>) -> Self {
        if terms.is_empty() {
            return Self::zero();
        }
        let mut bps: Vec<DyadicRational> = Vec::with_capacity(terms.len() * 2);
        for (l, r, _) in &terms {
            bps.push(l.clone());
            bps.push(r.clone());
        }
        bps.sort();
        bps.dedup();
        let mut acc: Vec<Vec<Q>> = vec![Vec::new(); bps.len().saturating_sub(1)];
        let bq: Vec<Q> = bps.iter().map(dq).collect();
        for (l, r, c) in &terms {
            if l >= r || poly::is_zero(c) {
                continue;
            }
            let s = bps.binary_search(l).unwrap();
            let e = bps.binary_search(r).unwrap();
            let lq = dq(l);
            for i in s..e {
                let shifted = poly::taylor_shift(c, &(&bq[i] - &lq));
                poly::add_into(&mut acc[i], &shifted);
            }
        }
        let pieces = acc
            .into_iter()
            .enumerate()
            .map(|(i, coeffs)| Piece { left: bps[i].clone(), right: bps[i + 1].clone(), coeffs })
            .collect();
        Self::from_pieces(pieces)
    }

    /// `sum_i w_i f_i`.
    pub fn linear_combination(items: &[(Q, &PwPoly)]) -> Self {
        let mut terms = Vec::new();
        for (w, f) in items {
            if w.is_zero() {
                continue;
            }
            for p in &f.pieces {
                terms.push((p.left.clone(), p.right.clone(), poly::scale(&p.coeffs, w)));
            }
        }
        Self::from_terms(terms)
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.pieces.iter().map(|p| p.degree()).max().unwrap_or(0)
    }

    /// Convex hull of the support, `None` for the zero function.
    pub fn support(&self) -> Option<(DyadicRational, DyadicRational)> {
        Some((self.pieces.first()?.left.clone(), self.pieces.last()?.right.clone()))
    }

    /// Lebesgue measure of the union of piece intervals.
    pub fn support_measure(&self) -> DyadicRational {
        self.pieces.iter().fold(DyadicRational::zero(), |a, p| &a + &p.len())
    }

    pub fn add(&self, other: &PwPoly) -> PwPoly {
        Self::linear_combination(&[(Q::one(), self), (Q::one(), other)])
    }

    pub fn sub(&self, other: &PwPoly) -> PwPoly {
        Self::linear_combination(&[(Q::one(), self), (-Q::one(), other)])
    }

    pub fn scale(&self, w: &Q) -> PwPoly {
        if w.is_zero() {
            return Self::zero();
        }
        PwPoly {
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece { left: p.left.clone(), right: p.right.clone(), coeffs: poly::scale(&p.coeffs, w) })
                .collect(),
        }
    }

    /// Exact value, right-continuous at breakpoints.
    pub fn eval(&self, x: &Q) -> Q {
        let i = self.pieces.partition_point(|p| &dq(&p.left) <= x);
        if i == 0 {
            return Q::zero();
        }
        let p = &self.pieces[i - 1];
        let lq = dq(&p.left);
        if x < &dq(&p.right) {
            poly::eval(&p.coeffs, &(x - &lq))
        } else {
            Q::zero()
        }
    }

    pub fn eval_dyadic(&self, x: &DyadicRational) -> Q {
        self.eval(&dq(x))
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let i = self.pieces.partition_point(|p| p.left.to_f64() <= x);
        if i == 0 {
            return 0.0;
        }
        let p = &self.pieces[i - 1];
        if x >= p.right.to_f64() {
            return 0.0;
        }
        let t = x - p.left.to_f64();
        poly::to_f64(&p.coeffs).iter().rev().fold(0.0, |a, c| a * t + c)
    }

    /// `x -> f(2^l (x - shift))`.
    pub fn affine_image(&self, l: i64, shift: &DyadicRational) -> PwPoly {
        let s = dq(&DyadicRational::pow2(l));
        PwPoly {
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece {
                    left: shift + &p.left.shl(-l),
                    right: shift + &p.right.shl(-l),
                    coeffs: poly::dilate(&p.coeffs, &s),
                })
                .collect(),
        }
    }

    /// `x -> f(x - shift)`.
    pub fn translate(&self, shift: &DyadicRational) -> PwPoly {
        PwPoly {
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece { left: &p.left + shift, right: &p.right + shift, coeffs: p.coeffs.clone() })
                .collect(),
        }
    }

    /// `x -> f(-x)` (breakpoint values follow the half-open convention).
    pub fn reflect(&self) -> PwPoly {
        let pieces = self
            .pieces
            .iter()
            .rev()
            .map(|p| {
                let len = dq(&p.len());
                let c = poly::compose_linear(&p.coeffs, &len, &-Q::one());
                Piece { left: -&p.right, right: -&p.left, coeffs: c }
            })
            .collect();
        Self::from_pieces(pieces)
    }

    /// Restriction to `[a, b)`.
    pub fn restrict(&self, a: &DyadicRational, b: &DyadicRational) -> PwPoly {
        let mut out = Vec::new();
        for p in &self.pieces {
            let l = DyadicRational::max(&p.left, a);
            let r = DyadicRational::min(&p.right, b);
            if l >= r {
                continue;
            }
            let c = poly::taylor_shift(&p.coeffs, &dq(&(&l - &p.left)));
            out.push(Piece { left: l, right: r, coeffs: c });
        }
        Self::from_pieces(out)
    }

    /// Piecewise derivative (jumps are ignored).
    pub fn derivative(&self) -> PwPoly {
        Self::from_pieces(
            self.pieces
                .iter()
                .map(|p| Piece { left: p.left.clone(), right: p.right.clone(), coeffs: poly::derivative(&p.coeffs) })
                .collect(),
        )
    }

    pub fn nth_derivative(&self, n: usize) -> PwPoly {
        (0..n).fold(self.clone(), |f, _| f.derivative())
    }

    /// Antiderivative vanishing at `-inf`; requires `int f = 0` so the result is compactly supported.
    pub fn antiderivative(&self) -> Result<PwPoly> {
        let mut c = Q::zero();
        let mut out = Vec::new();
        let mut prev_right: Option<DyadicRational> = None;
        for p in &self.pieces {
            if let Some(pr) = &prev_right {
                if pr < &p.left && !c.is_zero() {
                    out.push(Piece { left: pr.clone(), right: p.left.clone(), coeffs: vec![c.clone()] });
                }
            }
            let mut a = poly::antiderivative(&p.coeffs);
            a[0] = c.clone();
            c += poly::integral(&p.coeffs, &dq(&p.len()));
            out.push(Piece { left: p.left.clone(), right: p.right.clone(), coeffs: a });
            prev_right = Some(p.right.clone());
        }
        if !c.is_zero() {
            return Err(Error::Support(format!("integral {c} is nonzero; antiderivative is not compactly supported")));
        }
        Ok(Self::from_pieces(out))
    }

    pub fn integral(&self) -> Q {
        self.pieces.iter().fold(Q::zero(), |a, p| a + poly::integral(&p.coeffs, &dq(&p.len())))
    }

    /// `int f(x) x^n dx`.
    pub fn moment(&self, n: usize) -> Q {
        self.moment_about(n, &Q::zero())
    }

    /// `int f(x) (x - c)^n dx`.
    pub fn moment_about(&self, n: usize, c: &Q) -> Q {
        let mut total = Q::zero();
        for p in &self.pieces {
            let a = dq(&p.left) - c;
            // (a + t)^n expanded in t
            let mut binom = Vec::with_capacity(n + 1);
            let mut apow = vec![Q::one(); n + 1];
            for i in 1..=n {
                apow[i] = &apow[i - 1] * &a;
            }
            for i in 0..=n {
                binom.push(Q::from_integer(poly::binomial(n, i)) * &apow[n - i]);
            }
            total += poly::integral(&poly::mul(&binom, &p.coeffs), &dq(&p.len()));
        }
        total
    }

    /// Exact `int f g`.
    pub fn inner_product(&self, other: &PwPoly) -> Q {
        let (a, b) = (&self.pieces, &other.pieces);
        let (mut i, mut j) = (0, 0);
        let mut total = Q::zero();
        while i < a.len() && j < b.len() {
            let l = DyadicRational::max(&a[i].left, &b[j].left);
            let r = DyadicRational::min(&a[i].right, &b[j].right);
            if l < r {
                let pa = poly::taylor_shift(&a[i].coeffs, &dq(&(&l - &a[i].left)));
                let pb = poly::taylor_shift(&b[j].coeffs, &dq(&(&l - &b[j].left)));
                total += poly::integral(&poly::mul(&pa, &pb), &dq(&(&r - &l)));
            }
            if a[i].right <= b[j].right {
                i += 1;
            } else {
                j += 1;
            }
        }
        total
    }

    /// Exact convolution.
    pub fn convolve(&self, other: &PwPoly) -> PwPoly {
        let mut terms = Vec::new();
        for p in &self.pieces {
            for g in &other.pieces {
                let base = &p.left + &g.left;
                for (a, b, c) in convolve_pieces(&p.coeffs, &dq(&p.len()), &p.len(), &g.coeffs, &dq(&g.len()), &g.len()) {
                    terms.push((&base + &a, &base + &b, c));
                }
            }
        }
        Self::from_terms(terms)
    }

    /// Pointwise Fourier transform `int f(x) e^{-i x xi} dx` in floating point.
    pub fn fourier_eval(&self, xi: f64) -> Complex64 {
        FourierEvaluator::new(self).eval(xi)
    }

    /// Floating-point copies of the pieces.
    pub fn to_fpolys(&self) -> Vec<FPoly> {
        self.pieces.iter().map(|p| FPoly::new(p.left.to_f64(), p.len().to_f64(), poly::to_f64(&p.coeffs))).collect()
    }

    /// `(int |f|^q)^{1/q}` by root-split Gauss-Legendre quadrature.
    pub fn lq_norm(&self, q: f64, spec: &QuadratureSpec) -> Result<f64> {
        Ok(self.lq_norm_pow(q, spec)?.powf(1.0 / q))
    }

    /// `int |f|^q`.
    pub fn lq_norm_pow(&self, q: f64, spec: &QuadratureSpec) -> Result<f64> {
        quad::integrate_abs_pow(&self.to_fpolys(), q, spec)
    }

    /// `sup |f|` via critical points of each piece.
    pub fn sup_norm(&self) -> f64 {
        self.to_fpolys().iter().map(|p| p.sup_abs()).fold(0.0, f64::max)
    }

    /// Exact equality of the restrictions to `[a, b)`.
    pub fn equals_on(&self, other: &PwPoly, a: &DyadicRational, b: &DyadicRational) -> bool {
        self.sub(other).restrict(a, b).is_zero()
    }

    /// Line format: `left_mantissa left_exp right_mantissa right_exp c0 ... cd`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for p in &self.pieces {
            write!(s, "{} {} {} {}", p.left.mantissa(), p.left.exponent(), p.right.mantissa(), p.right.exponent()).unwrap();
            for c in &p.coeffs {
                write!(s, " {}/{}", c.numer(), c.denom()).unwrap();
            }
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<PwPoly> {
        let mut pieces = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let tok: Vec<&str> = line.split_whitespace().collect();
            if tok.len() < 4 {
                return Err(Error::Parse(format!("short line: {line}")));
            }
            let left = DyadicRational::parse_pair(tok[0], tok[1])?;
            let right = DyadicRational::parse_pair(tok[2], tok[3])?;
            let coeffs = tok[4..].iter().map(|t| parse_rational(t)).collect::<Result<Vec<_>>>()?;
            if left >= right {
                return Err(Error::Parse(format!("empty piece: {line}")));
            }
            pieces.push(Piece { left, right, coeffs });
        }
        for w in pieces.windows(2) {
            if w[0].right > w[1].left {
                return Err(Error::Parse("pieces overlap or are unsorted".into()));
            }
        }
        Ok(Self::from_pieces(pieces))
    }
}

/// Reusable Fourier evaluation: exact centred moments for small `|xi|`,
/// closed-form integration by parts per piece otherwise.
pub struct FourierEvaluator {
    pieces: Vec<FPoly>,
    centre: f64,
    half: f64,
    moments: Vec<f64>,
    sup: f64,
}

impl FourierEvaluator {
    const TERMS: usize = 48;

    pub fn new(f: &PwPoly) -> Self {
        let Some((lo, hi)) = f.support() else {
            return FourierEvaluator { pieces: Vec::new(), centre: 0.0, half: 0.0, moments: Vec::new(), sup: 0.0 };
        };
        let c = (&lo + &hi).shl(-1);
        let cq = dq(&c);
        let moments = (0..Self::TERMS).map(|n| f.moment_about(n, &cq).to_f64().unwrap_or(0.0)).collect();
        let pieces = f.to_fpolys();
        let sup = pieces.iter().map(|p| p.sup_abs()).fold(0.0, f64::max);
        FourierEvaluator { pieces, centre: c.to_f64(), half: (&hi - &lo).to_f64() / 2.0, moments, sup }
    }

    pub fn eval(&self, xi: f64) -> Complex64 {
        if self.pieces.is_empty() {
            return Complex64::new(0.0, 0.0);
        }
        if xi.abs() * self.half <= 1.0 {
            // vanishing moments drop out exactly, so no cancellation for small xi
            let mut sum = Complex64::new(0.0, 0.0);
            let mut fact = 1.0f64;
            for (n, m) in self.moments.iter().enumerate() {
                if n > 0 {
                    fact *= n as f64;
                }
                sum += Complex64::new(0.0, -xi).powu(n as u32) * (m / fact);
                let tail = self.sup * 2.0 * self.half * (xi.abs() * self.half).powi(n as i32 + 1) / (fact * (n + 1) as f64);
                if n > 0 && tail < 1e-17 * sum.norm() {
                    break;
                }
            }
            return sum * Complex64::new(0.0, -xi * self.centre).exp();
        }
        let ixi = Complex64::new(0.0, xi);
        let mut sum = Complex64::new(0.0, 0.0);
        for p in &self.pieces {
            let l = p.len;
            let mut d = p.c.clone();
            // int_0^L p(t) e^{-i xi t} dt = [-e^{-i xi t} sum_k p^{(k)}(t) / (i xi)^{k+1}]_0^L
            let mut acc = Complex64::new(0.0, 0.0);
            let mut pw = ixi;
            let e = Complex64::new(0.0, -xi * l).exp();
            while !d.is_empty() {
                let at_l = quad::horner(&d, l);
                acc += (e * (-at_l) + d[0]) / pw;
                pw *= ixi;
                d = quad::deriv(&d);
            }
            sum += acc * Complex64::new(0.0, -xi * p.left).exp();
        }
        sum
    }
}

pub fn parse_rational(t: &str) -> Result<Q> {
    let bad = || Error::Parse(format!("bad rational {t}"));
    match t.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.parse().map_err(|_| bad())?;
            let d: BigInt = d.parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => Ok(Q::from_integer(t.parse().map_err(|_| bad())?)),
    }
}

/// Convolution of `P` on `[0, L1)` with `G` on `[0, L2)`, as pieces on `[0, L1+L2)`.
fn convolve_pieces(
    p: &[Q],
    l1: &Q,
    l1d: &DyadicRational,
    g: &[Q],
    l2: &Q,
    l2d: &DyadicRational,
) -> Vec<(DyadicRational, DyadicRational, Vec<Q>)> {
    // P(u) G(t-u) = sum_a t^a R_a(u)
    let dg = g.len();
    let mut r: Vec<Vec<Q>> = vec![Vec::new(); dg.max(1)];
    for (k, gk) in g.iter().enumerate() {
        if gk.is_zero() {
            continue;
        }
        for i in 0..=k {
            let c = gk * Q::from_integer(poly::binomial(k, i)) * if i % 2 == 0 { Q::one() } else { -Q::one() };
            // t^{k-i} u^i
            let mut ui = vec![Q::zero(); i + 1];
            ui[i] = c;
            let term = poly::mul(&ui, p);
            poly::add_into(&mut r[k - i], &term);
        }
    }
    let s: Vec<Vec<Q>> = r.iter().map(|ra| poly::antiderivative(ra)).collect();
    // H(t) on a region given hi(t) = h0 + h1 t and lo(t) = o0 + o1 t
    let region = |h0: &Q, h1: &Q, o0: &Q, o1: &Q| -> Vec<Q> {
        let mut out: Vec<Q> = Vec::new();
        for (a, sa) in s.iter().enumerate() {
            if sa.is_empty() {
                continue;
            }
            let mut diff = poly::compose_linear(sa, h0, h1);
            let lo = poly::compose_linear(sa, o0, o1);
            poly::add_scaled_into(&mut diff, &lo, &-Q::one());
            let mut shifted = vec![Q::zero(); a];
            shifted.extend(diff);
            poly::add_into(&mut out, &shifted);
        }
        out
    };
    let zero = Q::zero();
    let one = Q::one();
    let total = l1 + l2;
    let totald = l1d + l2d;
    let (amin, amind, amax, amaxd) =
        if l1 <= l2 { (l1, l1d, l2, l2d) } else { (l2, l2d, l1, l1d) };
    let _ = amax;
    let mut out = Vec::new();
    // [0, min): lo = 0, hi = t
    out.push((DyadicRational::zero(), amind.clone(), region(&zero, &one, &zero, &zero)));
    // [min, max)
    if amin != amax {
        let c = if l1 <= l2 {
            region(l1, &zero, &zero, &zero)
        } else {
            region(&zero, &one, &-l2, &one)
        };
        out.push((amind.clone(), amaxd.clone(), poly::taylor_shift(&c, amin)));
    }
    // [max, L1+L2): lo = t - L2, hi = L1
    let c = region(l1, &zero, &-l2, &one);
    out.push((amaxd.clone(), totald, poly::taylor_shift(&c, amax)));
    let _ = total;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::q;

    fn d(m: i64, e: i64) -> DyadicRational {
        DyadicRational::new(m, e)
    }

    fn boxf() -> PwPoly {
        PwPoly::indicator(d(0, 0), d(1, 0))
    }

    fn haar00() -> PwPoly {
        PwPoly::from_pieces(vec![
            Piece { left: d(0, 0), right: d(1, -1), coeffs: vec![q(1)] },
            Piece { left: d(1, -1), right: d(1, 0), coeffs: vec![q(-1)] },
        ])
    }

    #[test]
    fn box_conv_box_is_hat() {
        let h = boxf().convolve(&boxf());
        assert_eq!(h.eval(&q(1)), q(1));
        assert_eq!(h.eval(&Q::new(1.into(), 2.into())), Q::new(1.into(), 2.into()));
        assert_eq!(h.support(), Some((d(0, 0), d(2, 0))));
        assert_eq!(h.pieces().len(), 2);
    }

    #[test]
    fn merge_adjacent() {
        let f = PwPoly::from_pieces(vec![
            Piece { left: d(0, 0), right: d(1, 0), coeffs: vec![q(0), q(1)] },
            Piece { left: d(1, 0), right: d(2, 0), coeffs: vec![q(1), q(1)] },
        ]);
        assert_eq!(f.pieces().len(), 1);
        assert!(boxf().sub(&boxf()).is_zero());
    }

    #[test]
    fn affine_and_moments() {
        let f = boxf().convolve(&haar00());
        let g = f.affine_image(3, &d(3, -5));
        assert_eq!(g.integral(), f.integral() / q(8));
        assert_eq!(boxf().moment(1), Q::new(1.into(), 2.into()));
        assert_eq!(haar00().antiderivative().unwrap().eval(&Q::new(1.into(), 2.into())), Q::new(1.into(), 2.into()));
        assert!(boxf().antiderivative().is_err());
    }

    #[test]
    fn haar_inner_products() {
        let h = |j: i64, mu: i64| haar00().affine_image(j, &d(mu, -j));
        assert_eq!(h(3, 2).inner_product(&h(3, 2)), Q::new(1.into(), 8.into()));
        assert_eq!(h(3, 2).inner_product(&h(3, 5)), q(0));
        assert_eq!(h(1, 0).inner_product(&h(3, 1)), q(0));
    }

    #[test]
    fn reflect_and_text_roundtrip() {
        let f = boxf().convolve(&haar00());
        assert_eq!(f.reflect().reflect(), f);
        assert_eq!(haar00().reflect().translate(&d(1, 0)), haar00().scale(&q(-1)));
        let t = f.to_text();
        assert_eq!(PwPoly::from_text(&t).unwrap(), f);
    }

    #[test]
    fn fourier_at_zero_is_integral() {
        let f = boxf().convolve(&boxf()).convolve(&boxf());
        let v = f.fourier_eval(0.0);
        assert!((v.re - 1.0).abs() < 1e-14 && v.im.abs() < 1e-14);
        // box transform (1 - e^{-i xi}) / (i xi) cubed
        for xi in [0.3f64, 2.5, 7.0] {
            let b = (Complex64::new(1.0, 0.0) - Complex64::new(0.0, -xi).exp()) / Complex64::new(0.0, xi);
            let want = b * b * b;
            assert!((f.fourier_eval(xi) - want).norm() < 1e-12, "xi={xi}");
        }
    }
}
