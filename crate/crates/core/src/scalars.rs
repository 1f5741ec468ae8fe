//! Exact scalars: the ring H_p = Z[1/p], its p-adic absolute value, the
//! canonical residue χ : H_p → Z/(p−1)Z, and the max-plus value type
//! R_max = Q ∪ {−∞}.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;
use crate::rational::{fmt_rational, parse_rational, pow_rational, Rational};

/// A prime number, validated on construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Self, Error> {
        if p < 2 || (2..).take_while(|d| d * d <= p).any(|d| p.is_multiple_of(d)) {
            return Err(Error::InvalidPrime(p));
        }
        Ok(Prime(p))
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn as_bigint(self) -> BigInt {
        BigInt::from(self.0)
    }

    pub fn as_rational(self) -> Rational {
        Rational::from_integer(self.as_bigint())
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// p-adic valuation of a nonzero integer.
pub fn valuation(n: &BigInt, p: u64) -> u32 {
    assert!(!n.is_zero(), "valuation of zero");
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

/// An element `num / p^pexp` of H_p, kept normalized: either `pexp == 0` or
/// `p ∤ num`. Zero is `0 / p^0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HpScalar {
    num: BigInt,
    pexp: u32,
    p: Prime,
}

impl HpScalar {
    pub fn new(p: Prime, num: BigInt, pexp: u32) -> Self {
        let mut h = HpScalar { num, pexp, p };
        h.normalize();
        h
    }

    pub fn zero(p: Prime) -> Self {
        HpScalar { num: BigInt::zero(), pexp: 0, p }
    }

    pub fn from_int(p: Prime, n: i64) -> Self {
        HpScalar::new(p, BigInt::from(n), 0)
    }

    /// Fails unless the reduced denominator of `r` is a power of `p`.
    pub fn from_rational(p: Prime, r: &Rational) -> Result<Self, Error> {
        let not_in = || Error::NotInHp { value: fmt_rational(r), p: p.get() };
        let mut den = r.denom().clone();
        let pb = p.as_bigint();
        let mut k = 0u32;
        while !den.is_one() {
            let (q, rem) = den.div_rem(&pb);
            if !rem.is_zero() {
                return Err(not_in());
            }
            den = q;
            k += 1;
        }
        Ok(HpScalar::new(p, r.numer().clone(), k))
    }

    pub fn parse(p: Prime, s: &str) -> Result<Self, Error> {
        HpScalar::from_rational(p, &parse_rational(s)?)
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.pexp = 0;
            return;
        }
        let pb = self.p.as_bigint();
        while self.pexp > 0 {
            let (q, r) = self.num.div_rem(&pb);
            if !r.is_zero() {
                break;
            }
            self.num = q;
            self.pexp -= 1;
        }
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn numerator(&self) -> &BigInt {
        &self.num
    }

    pub fn pexp(&self) -> u32 {
        self.pexp
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn signum(&self) -> i32 {
        if self.num.is_zero() {
            0
        } else if self.num.is_positive() {
            1
        } else {
            -1
        }
    }

    pub fn to_rational(&self) -> Rational {
        Rational::new(self.num.clone(), num_traits::pow(self.p.as_bigint(), self.pexp as usize))
    }

    /// |h|_p = p^(pexp − v_p(num)), and |0|_p = 0.
    pub fn padic_abs(&self) -> Rational {
        if self.num.is_zero() {
            return Rational::zero();
        }
        let v = valuation(&self.num, self.p.get()) as i64;
        pow_rational(self.p.get(), self.pexp as i64 - v)
    }

    /// The canonical residue in Z/(p−1)Z. Since p ≡ 1 mod (p−1), every power
    /// of p acts as 1 and the residue is just `num mod (p−1)`.
    pub fn chi(&self) -> u64 {
        let m = BigInt::from(self.p.get() - 1);
        self.num.mod_floor(&m).to_u64().expect("residue fits in u64")
    }

    /// Multiplies by p^k (k may be negative).
    pub fn scale_by_p_power(&self, k: i64) -> Self {
        if k >= 0 {
            let f = num_traits::pow(self.p.as_bigint(), k as usize);
            HpScalar::new(self.p, &self.num * f, self.pexp)
        } else {
            HpScalar::new(self.p, self.num.clone(), self.pexp + (-k) as u32)
        }
    }

    /// Exact division by a positive integer coprime to p, if the quotient
    /// stays in H_p.
    pub fn div_exact(&self, d: u64) -> Option<Self> {
        assert!(d > 0 && !d.is_multiple_of(self.p.get()), "divisor must be positive and prime to p");
        let (q, r) = self.num.div_rem(&BigInt::from(d));
        r.is_zero().then(|| HpScalar::new(self.p, q, self.pexp))
    }

    fn check_prime(&self, other: &Self) {
        assert_eq!(self.p, other.p, "H_p scalars over different primes");
    }

    fn aligned(&self, other: &Self) -> (BigInt, BigInt, u32) {
        let e = self.pexp.max(other.pexp);
        let pb = self.p.as_bigint();
        let a = &self.num * num_traits::pow(pb.clone(), (e - self.pexp) as usize);
        let b = &other.num * num_traits::pow(pb, (e - other.pexp) as usize);
        (a, b, e)
    }
}

impl fmt::Display for HpScalar {
    /// `"a"` when pexp = 0, otherwise `"a/p^k"`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pexp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}^{}", self.num, self.p, self.pexp)
        }
    }
}

impl PartialOrd for HpScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HpScalar {
    fn cmp(&self, other: &Self) -> Ordering {
        self.check_prime(other);
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }
}

impl Add for &HpScalar {
    type Output = HpScalar;
    fn add(self, other: &HpScalar) -> HpScalar {
        self.check_prime(other);
        let (a, b, e) = self.aligned(other);
        HpScalar::new(self.p, a + b, e)
    }
}

impl Sub for &HpScalar {
    type Output = HpScalar;
    fn sub(self, other: &HpScalar) -> HpScalar {
        self.check_prime(other);
        let (a, b, e) = self.aligned(other);
        HpScalar::new(self.p, a - b, e)
    }
}

impl Mul for &HpScalar {
    type Output = HpScalar;
    fn mul(self, other: &HpScalar) -> HpScalar {
        self.check_prime(other);
        HpScalar::new(self.p, &self.num * &other.num, self.pexp + other.pexp)
    }
}

impl Neg for &HpScalar {
    type Output = HpScalar;
    fn neg(self) -> HpScalar {
        HpScalar { num: -&self.num, pexp: self.pexp, p: self.p }
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for HpScalar {
            type Output = HpScalar;
            fn $m(self, other: HpScalar) -> HpScalar { (&self).$m(&other) }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for HpScalar {
    type Output = HpScalar;
    fn neg(self) -> HpScalar {
        -&self
    }
}

/// An element of R_max. The derived order puts `NegInf` below every finite
/// value, so `max` is the semiring addition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RMax {
    NegInf,
    Finite(Rational),
}

impl RMax {
    pub fn zero() -> Self {
        RMax::NegInf
    }

    pub fn one() -> Self {
        RMax::Finite(Rational::zero())
    }

    pub fn finite(r: Rational) -> Self {
        RMax::Finite(r)
    }

    pub fn is_neg_inf(&self) -> bool {
        matches!(self, RMax::NegInf)
    }

    pub fn as_finite(&self) -> Option<&Rational> {
        match self {
            RMax::Finite(r) => Some(r),
            RMax::NegInf => None,
        }
    }

    /// Semiring addition: max.
    pub fn join(&self, other: &Self) -> Self {
        std::cmp::max(self, other).clone()
    }

    /// Semiring multiplication: ordinary sum, −∞ absorbing.
    pub fn times(&self, other: &Self) -> Self {
        match (self, other) {
            (RMax::Finite(a), RMax::Finite(b)) => RMax::Finite(a + b),
            _ => RMax::NegInf,
        }
    }

    pub fn parse(s: &str) -> Result<Self, Error> {
        if s.trim() == "-inf" {
            Ok(RMax::NegInf)
        } else {
            parse_rational(s).map(RMax::Finite)
        }
    }
}

impl fmt::Display for RMax {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RMax::NegInf => write!(f, "-inf"),
            RMax::Finite(r) => write!(f, "{}", fmt_rational(r)),
        }
    }
}
