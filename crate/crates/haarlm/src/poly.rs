//! Dense univariate polynomials with exact rational coefficients, lowest degree first.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn trim(p: &mut Vec<Q>) {
    while p.last().map_or(false, |c| c.is_zero()) {
        p.pop();
    }
}

pub fn is_zero(p: &[Q]) -> bool {
    p.iter().all(|c| c.is_zero())
}

pub fn add_into(acc: &mut Vec<Q>, p: &[Q]) {
    if acc.len() < p.len() {
        acc.resize(p.len(), Q::zero());
    }
    for (a, c) in acc.iter_mut().zip(p) {
        if !c.is_zero() {
            *a += c;
        }
    }
}

pub fn add_scaled_into(acc: &mut Vec<Q>, p: &[Q], w: &Q) {
    if acc.len() < p.len() {
        acc.resize(p.len(), Q::zero());
    }
    for (a, c) in acc.iter_mut().zip(p) {
        if !c.is_zero() {
            *a += c * w;
        }
    }
}

pub fn scale(p: &[Q], w: &Q) -> Vec<Q> {
    p.iter().map(|c| c * w).collect()
}

pub fn mul(a: &[Q], b: &[Q]) -> Vec<Q> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Q::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

pub fn eval(p: &[Q], t: &Q) -> Q {
    let mut acc = Q::zero();
    for c in p.iter().rev() {
        acc = acc * t + c;
    }
    acc
}

/// Coefficients of `p(t + h)`.
pub fn taylor_shift(p: &[Q], h: &Q) -> Vec<Q> {
    let mut c = p.to_vec();
    if h.is_zero() {
        return c;
    }
    let n = c.len();
    for i in 0..n {
        for k in (i..n.saturating_sub(1)).rev() {
            let t = &c[k + 1] * h;
            c[k] += t;
        }
    }
    c
}

/// Coefficients of `p(s t)`.
pub fn dilate(p: &[Q], s: &Q) -> Vec<Q> {
    let mut pw = Q::one();
    p.iter()
        .map(|c| {
            let v = c * &pw;
            pw = &pw * s;
            v
        })
        .collect()
}

pub fn derivative(p: &[Q]) -> Vec<Q> {
    p.iter().enumerate().skip(1).map(|(i, c)| c * q(i as i64)).collect()
}

/// Antiderivative vanishing at 0.
pub fn antiderivative(p: &[Q]) -> Vec<Q> {
    let mut out = Vec::with_capacity(p.len() + 1);
    out.push(Q::zero());
    for (i, c) in p.iter().enumerate() {
        out.push(c / q(i as i64 + 1));
    }
    out
}

/// `int_0^L p`.
pub fn integral(p: &[Q], len: &Q) -> Q {
    let mut acc = Q::zero();
    for (i, c) in p.iter().enumerate().rev() {
        acc = acc * len + c / q(i as i64 + 1);
    }
    acc * len
}

/// `p(a + b t)` as a polynomial in `t`.
pub fn compose_linear(p: &[Q], a: &Q, b: &Q) -> Vec<Q> {
    let shifted = taylor_shift(p, a);
    dilate(&shifted, b)
}

pub fn binomial(n: usize, k: usize) -> BigInt {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

pub fn to_f64(p: &[Q]) -> Vec<f64> {
    use num_traits::ToPrimitive;
    p.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_and_compose() {
        // p(t) = 1 + 2t + 3t^2
        let p = vec![q(1), q(2), q(3)];
        let s = taylor_shift(&p, &q(2));
        // p(t+2) = 17 + 14t + 3t^2
        assert_eq!(s, vec![q(17), q(14), q(3)]);
        assert_eq!(eval(&p, &q(5)), q(86));
        let c = compose_linear(&p, &q(1), &q(-1));
        assert_eq!(eval(&c, &q(3)), eval(&p, &q(-2)));
        assert_eq!(integral(&p, &q(1)), q(3));
        assert_eq!(derivative(&antiderivative(&p)), p);
        assert_eq!(binomial(6, 2), BigInt::from(15));
    }
}
