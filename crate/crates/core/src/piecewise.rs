//! Continuous piecewise-affine functions on intervals of [0, ∞).
//!
//! A function is stored by its value at the left endpoint (`anchor`), the
//! interior kinks and one slope per piece, so continuity holds by
//! construction. Adjacent pieces with equal slopes are merged, which makes
//! structural equality coincide with equality of functions.

use std::fmt;

use num_traits::{One, Zero};

use crate::error::Error;
use crate::germ::Germ;
use crate::rational::{fmt_rational, int, Rational};
use crate::scalars::RMax;

/// Closed interval `[lo, hi]` with `0 ≤ lo < hi`; `hi = None` means +∞.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: Rational,
    hi: Option<Rational>,
}

impl Interval {
    pub fn new(lo: Rational, hi: Option<Rational>) -> Result<Self, Error> {
        if lo < Rational::zero() {
            return Err(Error::InvalidDomain(format!("left endpoint {} < 0", fmt_rational(&lo))));
        }
        if let Some(h) = &hi {
            if *h <= lo {
                return Err(Error::InvalidDomain(format!("[{}, {}] is empty", fmt_rational(&lo), fmt_rational(h))));
            }
        }
        Ok(Interval { lo, hi })
    }

    pub fn bounded(lo: Rational, hi: Rational) -> Result<Self, Error> {
        Interval::new(lo, Some(hi))
    }

    /// `[0, ∞)`.
    pub fn half_line() -> Self {
        Interval { lo: Rational::zero(), hi: None }
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> Option<&Rational> {
        self.hi.as_ref()
    }

    pub fn contains(&self, x: &Rational) -> bool {
        *x >= self.lo && self.hi.as_ref().is_none_or(|h| x <= h)
    }

    pub fn is_interior(&self, x: &Rational) -> bool {
        *x > self.lo && self.hi.as_ref().is_none_or(|h| x < h)
    }

    fn scaled(&self, factor: &Rational) -> Self {
        Interval { lo: &self.lo * factor, hi: self.hi.as_ref().map(|h| h * factor) }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.hi {
            Some(h) => write!(f, "[{}, {}]", fmt_rational(&self.lo), fmt_rational(h)),
            None => write!(f, "[{}, inf)", fmt_rational(&self.lo)),
        }
    }
}

/// One affine piece `λ ↦ slope·λ + intercept` on `[start, end]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Piece {
    pub start: Rational,
    pub end: Option<Rational>,
    pub slope: Rational,
    pub intercept: Rational,
}

impl Piece {
    fn value(&self, x: &Rational) -> Rational {
        &self.slope * x + &self.intercept
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PiecewiseAffine {
    domain: Interval,
    kinks: Vec<Rational>,
    slopes: Vec<Rational>,
    anchor: RMax,
}

impl PiecewiseAffine {
    pub fn new(domain: Interval, kinks: Vec<Rational>, slopes: Vec<Rational>, anchor: RMax) -> Result<Self, Error> {
        if slopes.len() != kinks.len() + 1 {
            return Err(Error::SlopeCount { expected: kinks.len() + 1, got: slopes.len() });
        }
        let sorted = kinks.windows(2).all(|w| w[0] < w[1]);
        if !sorted || !kinks.iter().all(|k| domain.is_interior(k)) {
            let list: Vec<_> = kinks.iter().map(fmt_rational).collect();
            return Err(Error::BadKinks(list.join(", ")));
        }
        if anchor.is_neg_inf() {
            if !kinks.is_empty() {
                return Err(Error::Inconsistent("the bottom function has no kinks".into()));
            }
            return Ok(PiecewiseAffine::bottom(domain));
        }
        Ok(PiecewiseAffine::merged(domain, kinks, slopes, anchor))
    }

    /// Drops kinks whose adjacent slopes agree.
    fn merged(domain: Interval, kinks: Vec<Rational>, slopes: Vec<Rational>, anchor: RMax) -> Self {
        let mut out_kinks = Vec::with_capacity(kinks.len());
        let mut out_slopes = Vec::with_capacity(slopes.len());
        let mut slopes = slopes.into_iter();
        out_slopes.push(slopes.next().expect("at least one slope"));
        for (k, s) in kinks.into_iter().zip(slopes) {
            if out_slopes.last() != Some(&s) {
                out_kinks.push(k);
                out_slopes.push(s);
            }
        }
        PiecewiseAffine { domain, kinks: out_kinks, slopes: out_slopes, anchor }
    }

    pub fn bottom(domain: Interval) -> Self {
        PiecewiseAffine { domain, kinks: vec![], slopes: vec![Rational::zero()], anchor: RMax::NegInf }
    }

    pub fn constant(domain: Interval, c: Rational) -> Self {
        PiecewiseAffine { domain, kinks: vec![], slopes: vec![Rational::zero()], anchor: RMax::Finite(c) }
    }

    /// `λ ↦ slope·λ + intercept` on the whole domain.
    pub fn affine(domain: Interval, slope: Rational, intercept: Rational) -> Self {
        let anchor = RMax::Finite(&slope * domain.lo() + intercept);
        PiecewiseAffine { domain, kinks: vec![], slopes: vec![slope], anchor }
    }

    pub fn domain(&self) -> &Interval {
        &self.domain
    }

    pub fn kinks(&self) -> &[Rational] {
        &self.kinks
    }

    pub fn slopes(&self) -> &[Rational] {
        &self.slopes
    }

    pub fn anchor(&self) -> &RMax {
        &self.anchor
    }

    pub fn is_bottom(&self) -> bool {
        self.anchor.is_neg_inf()
    }

    /// Slopes strictly increase across every kink (the bottom function and
    /// affine functions count as convex).
    pub fn is_convex(&self) -> bool {
        self.slopes.windows(2).all(|w| w[0] < w[1])
    }

    /// The affine pieces, left to right. Empty for the bottom function.
    pub fn pieces(&self) -> Vec<Piece> {
        let RMax::Finite(mut value) = self.anchor.clone() else {
            return vec![];
        };
        let mut start = self.domain.lo.clone();
        let mut out = Vec::with_capacity(self.slopes.len());
        for (i, slope) in self.slopes.iter().enumerate() {
            let end = self.kinks.get(i).cloned().or_else(|| self.domain.hi.clone());
            let intercept = &value - slope * &start;
            if let Some(e) = &end {
                value = &value + slope * (e - &start);
            }
            out.push(Piece { start: start.clone(), end: end.clone(), slope: slope.clone(), intercept });
            if let Some(e) = end {
                start = e;
            }
        }
        out
    }

    pub fn value_at(&self, x: &Rational) -> Result<RMax, Error> {
        if !self.domain.contains(x) {
            return Err(Error::OutsideDomain(fmt_rational(x)));
        }
        let RMax::Finite(anchor) = &self.anchor else {
            return Ok(RMax::NegInf);
        };
        let mut value = anchor.clone();
        let mut start = &self.domain.lo;
        for (i, slope) in self.slopes.iter().enumerate() {
            match self.kinks.get(i) {
                Some(k) if k < x => {
                    value += slope * (k - start);
                    start = k;
                }
                _ => {
                    value += slope * (x - start);
                    break;
                }
            }
        }
        Ok(RMax::Finite(value))
    }

    /// Slope of the piece to the right of `x` (`x` may be the left endpoint).
    fn right_slope(&self, x: &Rational) -> &Rational {
        let i = self.kinks.partition_point(|k| k <= x);
        &self.slopes[i]
    }

    /// Slope of the piece to the left of `x`.
    fn left_slope(&self, x: &Rational) -> &Rational {
        let i = self.kinks.partition_point(|k| k < x);
        &self.slopes[i]
    }

    fn check_domain(&self, other: &Self) -> Result<(), Error> {
        if self.domain != other.domain {
            return Err(Error::DomainMismatch);
        }
        Ok(())
    }

    /// Pointwise max (the semiring addition).
    pub fn join(&self, other: &Self) -> Result<Self, Error> {
        self.check_domain(other)?;
        if self.is_bottom() {
            return Ok(other.clone());
        }
        if other.is_bottom() {
            return Ok(self.clone());
        }
        let (pf, pg) = (self.pieces(), other.pieces());
        let mut cuts = merge_sorted(&self.kinks, &other.kinks);
        // crossing points inside each common sub-interval
        let common = cuts.clone();
        let mut lo = self.domain.lo.clone();
        for i in 0..=common.len() {
            let hi = common.get(i).cloned().or_else(|| self.domain.hi.clone());
            let probe = probe_point(&lo, hi.as_ref());
            let a = piece_at(&pf, &probe);
            let b = piece_at(&pg, &probe);
            if a.slope != b.slope {
                let x = (&b.intercept - &a.intercept) / (&a.slope - &b.slope);
                if x > lo && hi.as_ref().is_none_or(|h| x < *h) {
                    cuts.push(x);
                }
            }
            if let Some(h) = hi {
                lo = h;
            }
        }
        cuts.sort();
        let mut slopes = Vec::with_capacity(cuts.len() + 1);
        let mut lo = self.domain.lo.clone();
        for i in 0..=cuts.len() {
            let hi = cuts.get(i).cloned().or_else(|| self.domain.hi.clone());
            let probe = probe_point(&lo, hi.as_ref());
            let a = piece_at(&pf, &probe);
            let b = piece_at(&pg, &probe);
            slopes.push(if a.value(&probe) >= b.value(&probe) { a.slope.clone() } else { b.slope.clone() });
            if let Some(h) = hi {
                lo = h;
            }
        }
        let anchor = self.anchor.join(&other.anchor);
        Ok(PiecewiseAffine::merged(self.domain.clone(), cuts, slopes, anchor))
    }

    /// Pointwise sum (the semiring multiplication).
    pub fn times(&self, other: &Self) -> Result<Self, Error> {
        self.check_domain(other)?;
        if self.is_bottom() || other.is_bottom() {
            return Ok(PiecewiseAffine::bottom(self.domain.clone()));
        }
        let cuts = merge_sorted(&self.kinks, &other.kinks);
        let mut slopes = Vec::with_capacity(cuts.len() + 1);
        let mut lo = self.domain.lo.clone();
        for i in 0..=cuts.len() {
            let hi = cuts.get(i).cloned().or_else(|| self.domain.hi.clone());
            let probe = probe_point(&lo, hi.as_ref());
            slopes.push(self.right_slope(&probe) + other.right_slope(&probe));
            if let Some(h) = hi {
                lo = h;
            }
        }
        let anchor = self.anchor.times(&other.anchor);
        Ok(PiecewiseAffine::merged(self.domain.clone(), cuts, slopes, anchor))
    }

    /// `λ ↦ −f(λ)`; the bottom function has no negative.
    pub fn negate(&self) -> Result<Self, Error> {
        let RMax::Finite(a) = &self.anchor else {
            return Err(Error::Bottom);
        };
        Ok(PiecewiseAffine {
            domain: self.domain.clone(),
            kinks: self.kinks.clone(),
            slopes: self.slopes.iter().map(|s| -s).collect(),
            anchor: RMax::Finite(-a),
        })
    }

    /// The action γ_n(f)(λ) = f(nλ), defined on (1/n)·domain.
    pub fn gamma(&self, n: u64) -> Self {
        assert!(n >= 1, "gamma action needs n ≥ 1");
        let nr = int(n as i64);
        let inv = nr.recip();
        PiecewiseAffine {
            domain: self.domain.scaled(&inv),
            kinks: self.kinks.iter().map(|k| k * &inv).collect(),
            slopes: self.slopes.iter().map(|s| s * &nr).collect(),
            anchor: self.anchor.clone(),
        }
    }

    /// The germ `(f(λ), λ·f'₊(λ), λ·f'₋(λ))` at an interior point.
    pub fn germ_at(&self, x: &Rational) -> Result<Germ, Error> {
        if !self.domain.is_interior(x) {
            return if self.domain.contains(x) {
                Err(Error::BoundaryGerm(fmt_rational(x)))
            } else {
                Err(Error::OutsideDomain(fmt_rational(x)))
            };
        }
        match self.value_at(x)? {
            RMax::NegInf => Ok(Germ::Bottom),
            RMax::Finite(v) => Ok(Germ::new(v, x * self.right_slope(x), x * self.left_slope(x))),
        }
    }

    /// Order `h₊ − h₋` at an interior point.
    pub fn order_at(&self, x: &Rational) -> Result<Rational, Error> {
        match self.germ_at(x)? {
            Germ::Bottom => Err(Error::Bottom),
            g => Ok(g.order().expect("finite germ")),
        }
    }
}

impl fmt::Display for PiecewiseAffine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_bottom() {
            return write!(f, "-inf on {}", self.domain);
        }
        write!(f, "f({}) = {} on {}", fmt_rational(self.domain.lo()), self.anchor, self.domain)?;
        write!(f, "; slope {}", fmt_rational(&self.slopes[0]))?;
        for (k, s) in self.kinks.iter().zip(&self.slopes[1..]) {
            write!(f, ", then {} from {}", fmt_rational(s), fmt_rational(k))?;
        }
        Ok(())
    }
}

fn merge_sorted(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut out: Vec<Rational> = a.iter().chain(b).cloned().collect();
    out.sort();
    out.dedup();
    out
}

fn probe_point(lo: &Rational, hi: Option<&Rational>) -> Rational {
    match hi {
        Some(h) => (lo + h) / int(2),
        None => lo + Rational::one(),
    }
}

fn piece_at<'a>(pieces: &'a [Piece], x: &Rational) -> &'a Piece {
    pieces
        .iter()
        .find(|p| *x >= p.start && p.end.as_ref().is_none_or(|e| x < e))
        .or(pieces.last())
        .expect("non-bottom function has pieces")
}
