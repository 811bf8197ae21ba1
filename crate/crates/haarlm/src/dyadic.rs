//! Exact dyadic rationals, dyadic intervals, Haar indices and the index sets
//! (frequency exponents and sample positions) the rest of the crate is built on.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Exact value `mantissa * 2^exponent`.
///
/// Canonical: mantissa odd, or mantissa zero with exponent zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DyadicRational {
    mantissa: BigInt,
    exponent: i64,
}

impl DyadicRational {
    pub fn new(mantissa: impl Into<BigInt>, exponent: i64) -> Self {
        let mut m: BigInt = mantissa.into();
        let mut e = exponent;
        if m.is_zero() {
            return Self::zero();
        }
        let tz = m.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            m >>= tz;
            e += tz as i64;
        }
        DyadicRational { mantissa: m, exponent: e }
    }

    pub fn zero() -> Self {
        DyadicRational { mantissa: BigInt::zero(), exponent: 0 }
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_int(v: i64) -> Self {
        Self::new(BigInt::from(v), 0)
    }

    /// `2^e`.
    pub fn pow2(e: i64) -> Self {
        DyadicRational { mantissa: BigInt::one(), exponent: e }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn signum(&self) -> i32 {
        if self.mantissa.is_positive() {
            1
        } else if self.mantissa.is_negative() {
            -1
        } else {
            0
        }
    }

    /// Multiply by `2^e` exactly.
    pub fn shl(&self, e: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        DyadicRational { mantissa: self.mantissa.clone(), exponent: self.exponent + e }
    }

    pub fn abs(&self) -> Self {
        DyadicRational { mantissa: self.mantissa.abs(), exponent: self.exponent }
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exponent >= 0 {
            BigRational::from_integer(&self.mantissa << (self.exponent as usize))
        } else {
            BigRational::new(self.mantissa.clone(), BigInt::one() << ((-self.exponent) as usize))
        }
    }

    /// Exact conversion from a rational whose denominator is a power of two.
    pub fn from_rational(r: &BigRational) -> Option<Self> {
        let d = r.denom();
        if d.is_zero() {
            return None;
        }
        let tz = d.trailing_zeros().unwrap_or(0);
        if (d >> tz) != BigInt::one() {
            return None;
        }
        Some(Self::new(r.numer().clone(), -(tz as i64)))
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.mantissa.bits() as i64;
        // keep the leading 63 bits so the mantissa converts without overflow
        let (m, e) = if bits > 63 {
            let sh = bits - 63;
            (&self.mantissa >> (sh as usize), self.exponent + sh)
        } else {
            (self.mantissa.clone(), self.exponent)
        };
        ldexp(m.to_f64().unwrap_or(0.0), e)
    }

    /// Largest integer `<= self`.
    pub fn floor(&self) -> BigInt {
        if self.exponent >= 0 {
            &self.mantissa << (self.exponent as usize)
        } else {
            self.mantissa.div_floor(&(BigInt::one() << ((-self.exponent) as usize)))
        }
    }

    pub fn floor_i64(&self) -> i64 {
        self.floor().to_i64().expect("floor does not fit in i64")
    }

    /// Smallest integer `>= self`.
    pub fn ceil(&self) -> BigInt {
        -(-self).floor()
    }

    pub fn min(a: &Self, b: &Self) -> Self {
        if a <= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    pub fn max(a: &Self, b: &Self) -> Self {
        if a >= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    /// Mantissa and exponent after aligning both operands to the smaller exponent.
    fn aligned(a: &Self, b: &Self) -> (BigInt, BigInt, i64) {
        if a.is_zero() {
            return (BigInt::zero(), b.mantissa.clone(), b.exponent);
        }
        if b.is_zero() {
            return (a.mantissa.clone(), BigInt::zero(), a.exponent);
        }
        let e = a.exponent.min(b.exponent);
        let am = &a.mantissa << ((a.exponent - e) as usize);
        let bm = &b.mantissa << ((b.exponent - e) as usize);
        (am, bm, e)
    }

    /// Parse `m e` style or a plain integer or `a/2^k` rational string.
    pub fn parse_pair(m: &str, e: &str) -> Result<Self> {
        let m: BigInt = m.parse().map_err(|_| Error::Parse(format!("bad mantissa {m}")))?;
        let e: i64 = e.parse().map_err(|_| Error::Parse(format!("bad exponent {e}")))?;
        Ok(Self::new(m, e))
    }
}

/// `x * 2^e` without intermediate overflow for moderate `x`.
pub fn ldexp(x: f64, e: i64) -> f64 {
    let mut v = x;
    let mut e = e;
    while e > 1000 {
        v *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        v *= 2f64.powi(-1000);
        e += 1000;
    }
    v * 2f64.powi(e as i32)
}

impl Default for DyadicRational {
    fn default() -> Self {
        Self::zero()
    }
}

impl fmt::Debug for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*2^{}", self.mantissa, self.exponent)
    }
}

impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_rational())
    }
}

impl Ord for DyadicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        let (s1, s2) = (self.signum(), other.signum());
        if s1 != s2 {
            return s1.cmp(&s2);
        }
        let (a, b, _) = Self::aligned(self, other);
        a.cmp(&b)
    }
}

impl PartialOrd for DyadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<'a> Add<&'a DyadicRational> for &'a DyadicRational {
    type Output = DyadicRational;
    fn add(self, rhs: &DyadicRational) -> DyadicRational {
        let (a, b, e) = DyadicRational::aligned(self, rhs);
        DyadicRational::new(a + b, e)
    }
}

impl<'a> Sub<&'a DyadicRational> for &'a DyadicRational {
    type Output = DyadicRational;
    fn sub(self, rhs: &DyadicRational) -> DyadicRational {
        let (a, b, e) = DyadicRational::aligned(self, rhs);
        DyadicRational::new(a - b, e)
    }
}

impl<'a> Mul<&'a DyadicRational> for &'a DyadicRational {
    type Output = DyadicRational;
    fn mul(self, rhs: &DyadicRational) -> DyadicRational {
        DyadicRational::new(&self.mantissa * &rhs.mantissa, self.exponent + rhs.exponent)
    }
}

impl Neg for &DyadicRational {
    type Output = DyadicRational;
    fn neg(self) -> DyadicRational {
        DyadicRational { mantissa: -&self.mantissa, exponent: self.exponent }
    }
}

impl Neg for DyadicRational {
    type Output = DyadicRational;
    fn neg(self) -> DyadicRational {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<DyadicRational> for DyadicRational {
            type Output = DyadicRational;
            fn $m(self, rhs: DyadicRational) -> DyadicRational {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl From<i64> for DyadicRational {
    fn from(v: i64) -> Self {
        Self::from_int(v)
    }
}

/// Half-open interval `[left, right)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DyadicInterval {
    pub left: DyadicRational,
    pub right: DyadicRational,
}

impl DyadicInterval {
    pub fn new(left: DyadicRational, right: DyadicRational) -> Result<Self> {
        if left >= right {
            return Err(Error::Domain(format!("empty interval [{left}, {right})")));
        }
        Ok(DyadicInterval { left, right })
    }

    pub fn length(&self) -> DyadicRational {
        &self.right - &self.left
    }

    pub fn contains(&self, x: &DyadicRational) -> bool {
        &self.left <= x && x < &self.right
    }

    /// `self` lies inside `other`.
    pub fn is_subset_of(&self, other: &DyadicInterval) -> bool {
        other.left <= self.left && self.right <= other.right
    }

    pub fn midpoint(&self) -> DyadicRational {
        (&self.left + &self.right).shl(-1)
    }
}

/// Haar index `(j, mu)`; `j = -1` denotes the indicator of `[mu, mu+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HaarIndex {
    pub j: i64,
    pub mu: i64,
}

impl HaarIndex {
    pub fn new(j: i64, mu: i64) -> Self {
        assert!(j >= -1, "Haar level must be >= -1");
        HaarIndex { j, mu }
    }

    /// Support `I_{j,mu}`.
    pub fn interval(&self) -> DyadicInterval {
        let j = self.j.max(0);
        DyadicInterval {
            left: DyadicRational::new(self.mu, -j),
            right: DyadicRational::new(self.mu + 1, -j),
        }
    }

    /// Left child `I^+` and right child `I^-` (only for `j >= 0`).
    pub fn children(&self) -> (DyadicInterval, DyadicInterval) {
        let i = self.interval();
        let mid = i.midpoint();
        (
            DyadicInterval { left: i.left, right: mid.clone() },
            DyadicInterval { left: mid, right: i.right },
        )
    }
}

/// Value of `h_{j,mu}` at `x`, right-continuous at breakpoints.
pub fn evaluate_haar(idx: HaarIndex, x: &DyadicRational) -> i32 {
    if idx.j == -1 {
        return if idx.interval().contains(x) { 1 } else { 0 };
    }
    let (plus, minus) = idx.children();
    if plus.contains(x) {
        1
    } else if minus.contains(x) {
        -1
    } else {
        0
    }
}

/// Frequency exponents and derived mollifier levels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyConfig {
    pub n: i64,
    pub r: i64,
    /// Sorted, R-separated Haar levels.
    pub exponents: Vec<i64>,
}

impl FrequencyConfig {
    /// Mollifier levels `j + N`.
    pub fn levels(&self) -> Vec<i64> {
        self.exponents.iter().map(|j| j + self.n).collect()
    }

    pub fn contains_exponent(&self, j: i64) -> bool {
        self.exponents.binary_search(&j).is_ok()
    }

    pub fn min_exponent(&self) -> i64 {
        *self.exponents.first().expect("nonempty exponent set")
    }

    pub fn max_exponent(&self) -> i64 {
        *self.exponents.last().expect("nonempty exponent set")
    }

    /// Checks separation and both cardinality bounds.
    pub fn validate(&self) -> Result<()> {
        if self.exponents.is_empty() {
            return Err(Error::Cardinality("empty exponent set".into()));
        }
        for w in self.exponents.windows(2) {
            if w[1] - w[0] < self.r {
                return Err(Error::Separation(format!("{} and {} closer than {}", w[0], w[1], self.r)));
            }
        }
        let c = self.exponents.len() as i64;
        if c * self.r < pow2_i64(self.n - 1) {
            return Err(Error::Cardinality(format!("{c} exponents below floor 2^{}/{}", self.n - 1, self.r)));
        }
        if c > pow2_i64(self.n) {
            return Err(Error::Cardinality(format!("{c} exponents above 2^{}", self.n)));
        }
        Ok(())
    }
}

fn pow2_i64(e: i64) -> i64 {
    if e < 0 {
        0
    } else if e >= 62 {
        i64::MAX
    } else {
        1i64 << e
    }
}

/// Greedy R-separated subset of sorted candidates truncated to `2^N` members.
pub fn build_frequency_config(candidates: &[i64], n: i64, r: i64) -> Result<FrequencyConfig> {
    if n < 1 || r < 1 {
        return Err(Error::Domain(format!("need N >= 1 and R >= 1, got N={n} R={r}")));
    }
    if candidates.is_empty() {
        return Err(Error::Separation("no candidate exponents".into()));
    }
    let mut sorted = candidates.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted[0] < 1 {
        return Err(Error::Domain("candidate exponents must be positive".into()));
    }
    let cap = pow2_i64(n) as usize;
    let mut chosen: Vec<i64> = Vec::new();
    for &c in &sorted {
        if chosen.len() >= cap {
            break;
        }
        if chosen.last().map_or(true, |&p| c - p >= r) {
            chosen.push(c);
        }
    }
    let cfg = FrequencyConfig { n, r, exponents: chosen };
    cfg.validate()?;
    Ok(cfg)
}

/// Default candidates `{R, 2R, ..., ceil(2^{N-1}/R) R}`: the shortest progression meeting the floor.
pub fn default_candidates(n: i64, r: i64) -> Vec<i64> {
    let need = (pow2_i64(n - 1) + r - 1) / r;
    (1..=need.max(1)).map(|t| t * r).collect()
}

/// Sample positions at level `l`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleIndexSet {
    pub level: i64,
    pub n: i64,
    pub positions: Vec<i64>,
}

impl SampleIndexSet {
    /// Centre `2^{-l} nu`.
    pub fn centre(&self, nu: i64) -> DyadicRational {
        DyadicRational::new(nu, -self.level)
    }
}

/// All `nu` in `[0, 2^l)` congruent to `2^{N-1}` mod `2^N`.
pub fn sample_positions(l: i64, n: i64) -> Result<SampleIndexSet> {
    if n < 1 || l < n {
        return Err(Error::Domain(format!("need l >= N >= 1, got l={l} N={n}")));
    }
    if l - n > 40 || l > 62 {
        return Err(Error::Cost(format!("2^{} sample positions requested", l - n)));
    }
    let step = 1i64 << n;
    let first = 1i64 << (n - 1);
    let positions = (0..(1i64 << (l - n))).map(|t| first + t * step).collect();
    Ok(SampleIndexSet { level: l, n, positions })
}

/// `nu_N(mu) = 2^N mu + 2^{N-1}`.
pub fn nu_of_mu(n: i64, mu: i64) -> i64 {
    (mu << n) + (1i64 << (n - 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(m: i64, e: i64) -> DyadicRational {
        DyadicRational::new(m, e)
    }

    #[test]
    fn canonical_form() {
        let x = d(12, -4);
        assert_eq!(x.mantissa(), &BigInt::from(3));
        assert_eq!(x.exponent(), -2);
        assert_eq!(d(0, 7), DyadicRational::zero());
        assert_eq!(DyadicRational::zero().exponent(), 0);
    }

    #[test]
    fn ring_ops_match_rationals() {
        let a = d(5, -3);
        let b = d(-7, 2);
        assert_eq!((&a + &b).to_rational(), a.to_rational() + b.to_rational());
        assert_eq!((&a - &b).to_rational(), a.to_rational() - b.to_rational());
        assert_eq!((&a * &b).to_rational(), a.to_rational() * b.to_rational());
        assert!(b < a);
        assert_eq!(d(-3, -1).floor(), BigInt::from(-2));
        assert_eq!(d(3, -1).ceil(), BigInt::from(2));
        assert_eq!(d(3, -2).to_f64(), 0.75);
    }

    #[test]
    fn haar_examples() {
        assert_eq!(evaluate_haar(HaarIndex::new(0, 0), &d(1, -2)), 1);
        assert_eq!(evaluate_haar(HaarIndex::new(0, 0), &d(3, -2)), -1);
        // 0.9 is not dyadic; 0.9 lies outside [1/4,1/2) just like 29/32
        assert_eq!(evaluate_haar(HaarIndex::new(2, 1), &d(29, -5)), 0);
        // right limit at breakpoints
        assert_eq!(evaluate_haar(HaarIndex::new(0, 0), &d(1, -1)), -1);
        assert_eq!(evaluate_haar(HaarIndex::new(0, 0), &d(1, 0)), 0);
        assert_eq!(evaluate_haar(HaarIndex::new(-1, 2), &d(2, 0)), 1);
    }

    #[test]
    fn haar_integrates_to_zero_on_fine_partition() {
        for j in 0..5 {
            for mu in [-3i64, 0, 5] {
                let idx = HaarIndex::new(j, mu);
                let fine = j + 4;
                let iv = idx.interval();
                let mut total = DyadicRational::zero();
                let mut x = iv.left.clone();
                let h = DyadicRational::pow2(-fine);
                while x < iv.right {
                    let v = DyadicRational::from_int(evaluate_haar(idx, &x) as i64);
                    total = &total + &(&v * &h);
                    x = &x + &h;
                }
                assert!(total.is_zero());
            }
        }
    }

    #[test]
    fn frequency_examples() {
        let cands: Vec<i64> = (1..=32).map(|t| 2 * t).collect();
        let cfg = build_frequency_config(&cands, 3, 2).unwrap();
        assert_eq!(cfg.exponents, vec![2, 4, 6, 8, 10, 12, 14, 16]);
        assert_eq!(cfg.levels()[0], 5);
        assert!(matches!(build_frequency_config(&[3], 4, 2), Err(Error::Cardinality(_))));
        let cfg = build_frequency_config(&[5, 6], 1, 3).unwrap();
        assert_eq!(cfg.exponents, vec![5]);
        assert!(matches!(build_frequency_config(&[5, 6], 3, 3), Err(Error::Cardinality(_))));
        assert!(matches!(build_frequency_config(&[], 3, 3), Err(Error::Separation(_))));
    }

    #[test]
    fn default_candidates_meet_floor() {
        for n in 1..12 {
            for r in [1, 2, 4, 8] {
                let cfg = build_frequency_config(&default_candidates(n, r), n, r).unwrap();
                assert!(cfg.exponents.len() as i64 * r >= 1 << (n - 1));
            }
        }
        assert_eq!(default_candidates(5, 2), vec![2, 4, 6, 8, 10, 12, 14, 16]);
    }

    #[test]
    fn sample_examples() {
        assert_eq!(sample_positions(3, 3).unwrap().positions, vec![4]);
        assert_eq!(sample_positions(3, 2).unwrap().positions, vec![2, 6]);
        let s = sample_positions(5, 2).unwrap();
        assert_eq!(s.positions, (0..8).map(|t| 2 + 4 * t).collect::<Vec<_>>());
        assert!(matches!(sample_positions(2, 3), Err(Error::Domain(_))));
        assert_eq!(nu_of_mu(3, 2), 20);
    }
}
