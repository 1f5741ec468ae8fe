//! The periodic orbit C_p = R*₊ / p^Z.
//!
//! Points are represented by their class representative in [1, p). A global
//! section of K_p is a continuous piecewise-affine function on [1, p] with
//! slopes in H_p whose values at 1 and p agree; periodicity f(pλ) = f(λ)
//! forces f'(pλ) = f'(λ)/p, so the slope entering the class {1} from the
//! left is `p·s_m` when the last arc has slope `s_m`.
//!
//! A divisor stores, at each point λ, the H_p coefficient d; its real value
//! there is λ·d.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::Error;
use crate::piecewise::{Interval, PiecewiseAffine};
use crate::rational::{fmt_rational, int, Rational};
use crate::scalars::{HpScalar, Prime, RMax};

/// Brings λ > 0 into [1, p); returns the representative and the k with
/// `rep = λ·p^k`.
pub fn normalize_point(p: Prime, lambda: &Rational) -> Result<(Rational, i64), Error> {
    if !lambda.is_positive() {
        return Err(Error::NonPositivePoint(fmt_rational(lambda)));
    }
    let pr = p.as_rational();
    let mut r = lambda.clone();
    let mut k = 0i64;
    while r >= pr {
        r /= &pr;
        k -= 1;
    }
    while r < Rational::one() {
        r *= &pr;
        k += 1;
    }
    Ok((r, k))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PointCp {
    p: Prime,
    rep: Rational,
}

impl PointCp {
    pub fn new(p: Prime, lambda: &Rational) -> Result<Self, Error> {
        let (rep, _) = normalize_point(p, lambda)?;
        Ok(PointCp { p, rep })
    }

    pub fn rep(&self) -> &Rational {
        &self.rep
    }

    pub fn prime(&self) -> Prime {
        self.p
    }
}

impl fmt::Display for PointCp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", fmt_rational(&self.rep))
    }
}

/// A global section of K_p (or the bottom section −∞).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CircleFunction {
    p: Prime,
    kinks: Vec<Rational>,
    slopes: Vec<HpScalar>,
    anchor: RMax,
}

impl CircleFunction {
    /// Validates ordering, slope count and closure, then merges equal
    /// adjacent slopes.
    pub fn new(p: Prime, kinks: Vec<Rational>, slopes: Vec<HpScalar>, anchor: RMax) -> Result<Self, Error> {
        if slopes.len() != kinks.len() + 1 {
            return Err(Error::SlopeCount { expected: kinks.len() + 1, got: slopes.len() });
        }
        if let Some(s) = slopes.iter().find(|s| s.prime() != p) {
            return Err(Error::PrimeMismatch(p.get(), s.prime().get()));
        }
        let pr = p.as_rational();
        let sorted = kinks.windows(2).all(|w| w[0] < w[1]);
        if !sorted || !kinks.iter().all(|k| *k > Rational::one() && *k < pr) {
            let list: Vec<_> = kinks.iter().map(fmt_rational).collect();
            return Err(Error::BadKinks(list.join(", ")));
        }
        if anchor.is_neg_inf() {
            if !kinks.is_empty() {
                return Err(Error::Inconsistent("the bottom function has no kinks".into()));
            }
            return Ok(CircleFunction::bottom(p));
        }
        let total = period_integral(&pr, &kinks, &slopes);
        if !total.is_zero() {
            return Err(Error::Closure(fmt_rational(&total)));
        }
        let mut out_kinks = Vec::with_capacity(kinks.len());
        let mut out_slopes: Vec<HpScalar> = Vec::with_capacity(slopes.len());
        let mut slopes = slopes.into_iter();
        out_slopes.push(slopes.next().expect("at least one slope"));
        for (k, s) in kinks.into_iter().zip(slopes) {
            if out_slopes.last() != Some(&s) {
                out_kinks.push(k);
                out_slopes.push(s);
            }
        }
        Ok(CircleFunction { p, kinks: out_kinks, slopes: out_slopes, anchor })
    }

    /// Same as [`new`](Self::new) with slopes given as rationals in H_p.
    pub fn from_rationals(p: Prime, kinks: Vec<Rational>, slopes: &[Rational], anchor: RMax) -> Result<Self, Error> {
        let slopes = slopes.iter().map(|s| HpScalar::from_rational(p, s)).collect::<Result<_, _>>()?;
        CircleFunction::new(p, kinks, slopes, anchor)
    }

    pub fn bottom(p: Prime) -> Self {
        CircleFunction { p, kinks: vec![], slopes: vec![HpScalar::zero(p)], anchor: RMax::NegInf }
    }

    pub fn constant(p: Prime, c: Rational) -> Self {
        CircleFunction { p, kinks: vec![], slopes: vec![HpScalar::zero(p)], anchor: RMax::Finite(c) }
    }

    /// Builds the function from its description on an arbitrary fundamental
    /// window `[start, p·start]`: kinks inside the open window, one slope per
    /// piece, and the value at `start`.
    pub fn from_window(
        p: Prime,
        start: &Rational,
        kinks: Vec<Rational>,
        slopes: &[Rational],
        value_at_start: RMax,
    ) -> Result<Self, Error> {
        let (a, k) = normalize_point(p, start)?;
        let pr = p.as_rational();
        let shift = crate::rational::pow_rational(p.get(), k);
        let window = Interval::bounded(a.clone(), &a * &pr)?;
        let kinks: Vec<Rational> = kinks.iter().map(|b| b * &shift).collect();
        let slopes: Vec<Rational> = slopes.iter().map(|s| s / &shift).collect();
        let g = PiecewiseAffine::new(window, kinks, slopes, value_at_start)?;
        let RMax::Finite(_) = g.anchor() else {
            return Ok(CircleFunction::bottom(p));
        };
        let end = g.value_at(&(&a * &pr))?;
        if end != *g.anchor() {
            let diff = end.as_finite().expect("finite") - g.anchor().as_finite().expect("finite");
            return Err(Error::Closure(fmt_rational(&diff)));
        }
        // arcs of [1, p): first [1, a) (the tail of the window divided by p),
        // then [a, p)
        let mut cuts: Vec<Rational> = g.kinks().iter().filter(|b| **b > pr).map(|b| b / &pr).collect();
        if a > Rational::one() {
            cuts.push(a.clone());
        }
        cuts.extend(g.kinks().iter().filter(|b| **b < pr).cloned());
        let mut slopes = Vec::with_capacity(cuts.len() + 1);
        let mut lo = Rational::one();
        for i in 0..=cuts.len() {
            let hi = cuts.get(i).cloned().unwrap_or_else(|| pr.clone());
            let mid = (&lo + &hi) / int(2);
            let s = if mid < a {
                let there = &mid * &pr;
                slope_at(&g, &there) * &pr
            } else {
                slope_at(&g, &mid)
            };
            slopes.push(HpScalar::from_rational(p, &s)?);
            lo = hi;
        }
        let anchor = g.value_at(&pr)?;
        CircleFunction::new(p, cuts, slopes, anchor)
    }

    /// Reads a periodic function off its restriction to [1, p].
    pub fn from_piecewise(p: Prime, f: &PiecewiseAffine) -> Result<Self, Error> {
        let expected = Interval::bounded(Rational::one(), p.as_rational())?;
        if *f.domain() != expected {
            return Err(Error::InvalidDomain(format!("expected {expected}, got {}", f.domain())));
        }
        CircleFunction::from_rationals(p, f.kinks().to_vec(), f.slopes(), f.anchor().clone())
    }

    /// The restriction to [1, p] as an ordinary piecewise-affine function.
    pub fn to_piecewise(&self) -> PiecewiseAffine {
        let domain = Interval::bounded(Rational::one(), self.p.as_rational()).expect("p > 1");
        let slopes = self.slopes.iter().map(HpScalar::to_rational).collect();
        PiecewiseAffine::new(domain, self.kinks.clone(), slopes, self.anchor.clone())
            .expect("circle functions are valid on [1, p]")
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn kinks(&self) -> &[Rational] {
        &self.kinks
    }

    pub fn slopes(&self) -> &[HpScalar] {
        &self.slopes
    }

    pub fn anchor(&self) -> &RMax {
        &self.anchor
    }

    pub fn is_bottom(&self) -> bool {
        self.anchor.is_neg_inf()
    }

    /// Value at any λ > 0.
    pub fn value_at(&self, lambda: &Rational) -> Result<RMax, Error> {
        let (rep, _) = normalize_point(self.p, lambda)?;
        self.to_piecewise().value_at(&rep)
    }

    fn check_prime(&self, other: &Self) -> Result<(), Error> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch(self.p.get(), other.p.get()));
        }
        Ok(())
    }

    /// Pointwise max.
    pub fn join(&self, other: &Self) -> Result<Self, Error> {
        self.check_prime(other)?;
        CircleFunction::from_piecewise(self.p, &self.to_piecewise().join(&other.to_piecewise())?)
    }

    /// Pointwise sum.
    pub fn times(&self, other: &Self) -> Result<Self, Error> {
        self.check_prime(other)?;
        CircleFunction::from_piecewise(self.p, &self.to_piecewise().times(&other.to_piecewise())?)
    }

    /// Adds a real constant.
    pub fn shift(&self, c: &Rational) -> Self {
        let anchor = self.anchor.times(&RMax::Finite(c.clone()));
        CircleFunction { anchor, ..self.clone() }
    }

    /// Order coefficient at the class {1}: `s_0 − p·s_m`.
    pub fn wrap_order(&self) -> HpScalar {
        let last = self.slopes.last().expect("at least one slope");
        &self.slopes[0] - &last.scale_by_p_power(1)
    }

    /// The divisor (f). At an interior kink β the coefficient is the slope
    /// jump; its real order is β times that.
    pub fn divisor(&self) -> Result<Divisor, Error> {
        if self.is_bottom() {
            return Err(Error::Bottom);
        }
        let mut d = Divisor::zero(self.p);
        d.insert(Rational::one(), self.wrap_order());
        for (i, k) in self.kinks.iter().enumerate() {
            d.insert(k.clone(), &self.slopes[i + 1] - &self.slopes[i]);
        }
        Ok(d)
    }
}

impl fmt::Display for CircleFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_bottom() {
            return write!(f, "-inf on C_{}", self.p);
        }
        write!(f, "f(1) = {}; slope {}", self.anchor, self.slopes[0])?;
        for (k, s) in self.kinks.iter().zip(&self.slopes[1..]) {
            write!(f, ", then {} from {}", s, fmt_rational(k))?;
        }
        Ok(())
    }
}

/// ∫_1^p f' over one period.
fn period_integral(pr: &Rational, kinks: &[Rational], slopes: &[HpScalar]) -> Rational {
    let mut lo = Rational::one();
    let mut total = Rational::zero();
    for (i, s) in slopes.iter().enumerate() {
        let hi = kinks.get(i).unwrap_or(pr);
        total += s.to_rational() * (hi - &lo);
        lo = hi.clone();
    }
    total
}

fn slope_at(g: &PiecewiseAffine, x: &Rational) -> Rational {
    let i = g.kinks().partition_point(|k| k <= x);
    g.slopes()[i].clone()
}

/// A finitely supported map from points of C_p to H_p coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Divisor {
    p: Prime,
    support: BTreeMap<Rational, HpScalar>,
}

/// Why a divisor fails to be principal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Obstruction {
    pub degree: Rational,
    pub chi: u64,
}

impl Obstruction {
    pub fn degree_obstructs(&self) -> bool {
        !self.degree.is_zero()
    }

    pub fn chi_obstructs(&self) -> bool {
        self.chi != 0
    }
}

impl Divisor {
    pub fn zero(p: Prime) -> Self {
        Divisor { p, support: BTreeMap::new() }
    }

    /// Builds a divisor from `(λ, d)` pairs with arbitrary λ > 0; the real
    /// value λ·d is kept when λ is moved to its representative.
    pub fn from_pairs(p: Prime, pairs: impl IntoIterator<Item = (Rational, HpScalar)>) -> Result<Self, Error> {
        let mut d = Divisor::zero(p);
        for (lambda, c) in pairs {
            if c.prime() != p {
                return Err(Error::PrimeMismatch(p.get(), c.prime().get()));
            }
            let (rep, k) = normalize_point(p, &lambda)?;
            d.insert(rep, c.scale_by_p_power(-k));
        }
        Ok(d)
    }

    /// Adds `c` at the representative `rep` (which must lie in [1, p)).
    fn insert(&mut self, rep: Rational, c: HpScalar) {
        let sum = match self.support.remove(&rep) {
            Some(old) => &old + &c,
            None => c,
        };
        if !sum.is_zero() {
            self.support.insert(rep, sum);
        }
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// `(representative, coefficient)` in increasing order of representative.
    pub fn iter(&self) -> impl Iterator<Item = (&Rational, &HpScalar)> {
        self.support.iter()
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn coeff(&self, rep: &Rational) -> HpScalar {
        self.support.get(rep).cloned().unwrap_or_else(|| HpScalar::zero(self.p))
    }

    pub fn add(&self, other: &Self) -> Result<Self, Error> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch(self.p.get(), other.p.get()));
        }
        let mut out = self.clone();
        for (r, c) in &other.support {
            out.insert(r.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        Divisor { p: self.p, support: self.support.iter().map(|(r, c)| (r.clone(), -c)).collect() }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, Error> {
        self.add(&other.neg())
    }

    /// Σ λ·d over the support.
    pub fn degree(&self) -> Rational {
        self.support.iter().map(|(r, c)| r * c.to_rational()).sum()
    }

    /// Σ χ(d) in Z/(p−1)Z.
    pub fn chi(&self) -> u64 {
        let m = self.p.get() - 1;
        self.support.values().map(|c| c.chi()).sum::<u64>() % m.max(1)
    }

    /// The Jacobian class (deg, χ) of the divisor class group.
    pub fn class(&self) -> (Rational, u64) {
        (self.degree(), self.chi())
    }

    pub fn is_effective(&self) -> bool {
        self.support.values().all(|c| c.signum() >= 0)
    }

    /// Returns `f` with `(f) = self`, anchored at f(1) = 0, or the
    /// obstruction when `deg ≠ 0` or `χ ≠ 0`.
    ///
    /// The slopes are `s_i = s_0 + Σ_{j ≤ i} d_j` over interior points, and
    /// the coefficient at {1} gives `s_0(1 − p) = d_{1} + p·Σ d_j`, solvable
    /// in H_p exactly when χ vanishes. Closure then follows from deg = 0.
    pub fn principal_witness(&self) -> Result<CircleFunction, Obstruction> {
        let (degree, chi) = self.class();
        if !degree.is_zero() || chi != 0 {
            return Err(Obstruction { degree, chi });
        }
        let p = self.p;
        let one = Rational::one();
        let interior: Vec<(&Rational, &HpScalar)> = self.support.iter().filter(|(r, _)| **r != one).collect();
        let interior_sum = interior.iter().fold(HpScalar::zero(p), |acc, (_, c)| &acc + c);
        let rhs = &self.coeff(&one) + &interior_sum.scale_by_p_power(1);
        let s0 = (-&rhs).div_exact(p.get() - 1).expect("χ = 0 makes the wrap equation solvable");
        let mut slopes = vec![s0];
        for (_, c) in &interior {
            let next = slopes.last().expect("nonempty") + *c;
            slopes.push(next);
        }
        let kinks = interior.iter().map(|(r, _)| (*r).clone()).collect();
        Ok(CircleFunction::new(p, kinks, slopes, RMax::one()).expect("deg = 0 gives closure"))
    }

    pub fn is_principal(&self) -> bool {
        self.principal_witness().is_ok()
    }
}

impl fmt::Display for Divisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.support.is_empty() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self.support.iter().map(|(r, c)| format!("{} -> {}", fmt_rational(r), c)).collect();
        write!(f, "{{{}}}", terms.join(", "))
    }
}
