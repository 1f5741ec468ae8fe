//! Newton polygons with vertices in H × Q and the Legendre transform.
//!
//! A polygon is stored by its reduced vertex list: x strictly increasing, y
//! strictly decreasing, chord slopes strictly decreasing. Each such vertex
//! `(x, y)` is the unique maximizer of `λx + y` on a nonempty open interval
//! of λ ≥ 0, and ℓ_N(λ) = max_j(λx_j + y_j) identifies the polygons with the
//! convex piecewise-affine functions on [0, ∞) with slopes in H.

use std::fmt;

use num_traits::{One, Zero};

use crate::error::Error;
use crate::piecewise::{Interval, PiecewiseAffine};
use crate::rational::{fmt_rational, Rational};
use crate::scalars::{Prime, RMax};

/// A rank-one slope group `scale · Z[1/p]`, or `scale · Z` when `p = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SlopeGroup {
    p: u64,
    scale: Rational,
}

impl SlopeGroup {
    pub fn new(p: u64, scale: Rational) -> Result<Self, Error> {
        if p != 1 {
            Prime::new(p)?;
        }
        if scale <= Rational::zero() {
            return Err(Error::Inconsistent(format!("scale {} must be positive", fmt_rational(&scale))));
        }
        Ok(SlopeGroup { p, scale })
    }

    /// The integers.
    pub fn integers() -> Self {
        SlopeGroup { p: 1, scale: Rational::one() }
    }

    /// H_p itself.
    pub fn hp(p: Prime) -> Self {
        SlopeGroup { p: p.get(), scale: Rational::one() }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn scale(&self) -> &Rational {
        &self.scale
    }

    pub fn contains(&self, x: &Rational) -> bool {
        let q = x / &self.scale;
        let mut den = q.denom().clone();
        if self.p == 1 {
            return den.is_one();
        }
        let p = num_bigint::BigInt::from(self.p);
        while (&den % &p).is_zero() {
            den /= &p;
        }
        den.is_one()
    }

    fn check(&self, x: &Rational) -> Result<(), Error> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::SlopeNotInGroup(fmt_rational(x)))
        }
    }
}

pub type Vertex = (Rational, Rational);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NewtonPolygon {
    group: SlopeGroup,
    vertices: Vec<Vertex>,
}

impl NewtonPolygon {
    /// Reduces an arbitrary finite vertex set (duplicates and dominated
    /// points allowed) to its extreme points.
    pub fn reduce(group: SlopeGroup, raw: impl IntoIterator<Item = Vertex>) -> Result<Self, Error> {
        let mut pts: Vec<Vertex> = raw.into_iter().collect();
        for (x, _) in &pts {
            group.check(x)?;
        }
        // x descending, and for equal x the largest y first
        pts.sort_by(|a, b| b.0.cmp(&a.0).then(b.1.cmp(&a.1)));
        // staircase: keep a point only if it beats every point to its right in y
        let mut stairs: Vec<Vertex> = Vec::with_capacity(pts.len());
        for pt in pts {
            if stairs.last().is_none_or(|last| pt.1 > last.1) {
                stairs.push(pt);
            }
        }
        stairs.reverse();
        // upper hull with strictly decreasing chord slopes
        let mut hull: Vec<Vertex> = Vec::with_capacity(stairs.len());
        for pt in stairs {
            while hull.len() >= 2 {
                let (a, b) = (&hull[hull.len() - 2], &hull[hull.len() - 1]);
                if chord(a, b) <= chord(b, &pt) {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(pt);
        }
        Ok(NewtonPolygon { group, vertices: hull })
    }

    /// The empty polygon (ℓ = −∞), zero of the semiring.
    pub fn zero(group: SlopeGroup) -> Self {
        NewtonPolygon { group, vertices: vec![] }
    }

    /// The single vertex (0, 0) (ℓ = 0), unit of the semiring.
    pub fn one(group: SlopeGroup) -> Self {
        NewtonPolygon { group, vertices: vec![(Rational::zero(), Rational::zero())] }
    }

    pub fn group(&self) -> &SlopeGroup {
        &self.group
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn is_zero(&self) -> bool {
        self.vertices.is_empty()
    }

    /// ℓ_N(λ) evaluated directly from the vertices.
    pub fn support(&self, lambda: &Rational) -> RMax {
        self.vertices.iter().map(|(x, y)| RMax::Finite(lambda * x + y)).max().unwrap_or(RMax::NegInf)
    }

    /// ℓ_N as a convex piecewise-affine function on [0, ∞).
    pub fn legendre(&self) -> PiecewiseAffine {
        let Some((_, y0)) = self.vertices.first() else {
            return PiecewiseAffine::bottom(Interval::half_line());
        };
        let kinks = self.vertices.windows(2).map(|w| -chord(&w[0], &w[1])).collect();
        let slopes = self.vertices.iter().map(|(x, _)| x.clone()).collect();
        PiecewiseAffine::new(Interval::half_line(), kinks, slopes, RMax::Finite(y0.clone()))
            .expect("reduced polygons give increasing positive kinks")
    }

    /// Inverse of [`legendre`](Self::legendre).
    pub fn from_function(group: SlopeGroup, f: &PiecewiseAffine) -> Result<Self, Error> {
        if *f.domain() != Interval::half_line() {
            return Err(Error::InvalidDomain(format!("expected [0, inf), got {}", f.domain())));
        }
        if f.is_bottom() {
            return Ok(NewtonPolygon::zero(group));
        }
        if !f.is_convex() {
            return Err(Error::NotConvex);
        }
        for s in f.slopes() {
            group.check(s)?;
        }
        let vertices = f.pieces().into_iter().map(|piece| (piece.slope, piece.intercept));
        NewtonPolygon::reduce(group, vertices)
    }

    fn check_group(&self, other: &Self) -> Result<(), Error> {
        if self.group != other.group {
            return Err(Error::GroupMismatch);
        }
        Ok(())
    }

    /// Semiring addition: ℓ is the pointwise max.
    pub fn join(&self, other: &Self) -> Result<Self, Error> {
        self.check_group(other)?;
        let all = self.vertices.iter().chain(&other.vertices).cloned();
        NewtonPolygon::reduce(self.group.clone(), all)
    }

    /// Semiring multiplication: Minkowski sum, ℓ is the pointwise sum.
    pub fn times(&self, other: &Self) -> Result<Self, Error> {
        self.check_group(other)?;
        let sums = self.vertices.iter().flat_map(|(x, y)| other.vertices.iter().map(move |(x2, y2)| (x + x2, y + y2)));
        NewtonPolygon::reduce(self.group.clone(), sums.collect::<Vec<_>>())
    }

    /// The unique `M` with `divisor · M = self`, if it exists. Multiplicative
    /// cancellation is what makes this well defined.
    pub fn quotient(&self, divisor: &Self) -> Result<Option<Self>, Error> {
        self.check_group(divisor)?;
        if divisor.is_zero() {
            return Ok(None);
        }
        if self.is_zero() {
            return Ok(Some(NewtonPolygon::zero(self.group.clone())));
        }
        let diff = self.legendre().times(&divisor.legendre().negate()?)?;
        if !diff.is_convex() || !diff.slopes().iter().all(|s| self.group.contains(s)) {
            return Ok(None);
        }
        let q = NewtonPolygon::from_function(self.group.clone(), &diff)?;
        Ok((divisor.times(&q)? == *self).then_some(q))
    }
}

impl fmt::Display for NewtonPolygon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vs: Vec<String> =
            self.vertices.iter().map(|(x, y)| format!("({}, {})", fmt_rational(x), fmt_rational(y))).collect();
        write!(f, "{{{}}}", vs.join(", "))
    }
}

/// Slope of the chord from `a` to `b` (requires a.x < b.x).
fn chord(a: &Vertex, b: &Vertex) -> Rational {
    (&b.1 - &a.1) / (&b.0 - &a.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use proptest::prelude::*;

    fn z() -> SlopeGroup {
        SlopeGroup::integers()
    }

    fn poly(vs: &[(i64, i64)]) -> NewtonPolygon {
        NewtonPolygon::reduce(z(), vs.iter().map(|&(x, y)| (int(x), int(y)))).unwrap()
    }

    fn verts(vs: &[(i64, i64)]) -> Vec<Vertex> {
        vs.iter().map(|&(x, y)| (int(x), int(y))).collect()
    }

    /// Brute-force check that two raw vertex sets have the same ℓ at λ.
    fn same_support(a: &[(i64, i64)], b: &NewtonPolygon) -> bool {
        (0..60).map(|k| rat(k, 7)).all(|l| {
            let direct = a.iter().map(|&(x, y)| &l * int(x) + int(y)).max().unwrap();
            b.support(&l) == RMax::Finite(direct)
        })
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(poly(&[(0, 0), (0, -1)]).vertices(), verts(&[(0, 0)]));
        // (0,0) only ties at λ = 0, so it is not a vertex
        let p = poly(&[(0, 0), (1, 0), (2, 0)]);
        assert_eq!(p.vertices(), verts(&[(2, 0)]));
        assert!(same_support(&[(0, 0), (1, 0), (2, 0)], &p));
        let q = poly(&[(0, 0), (1, 0), (2, -3)]);
        assert_eq!(q.vertices(), verts(&[(1, 0), (2, -3)]));
        assert!(same_support(&[(0, 0), (1, 0), (2, -3)], &q));
        // a point on the chord is dropped
        assert_eq!(poly(&[(0, 0), (1, -1), (2, -2), (3, -5)]).vertices(), verts(&[(0, 0), (2, -2), (3, -5)]));
        assert!(poly(&[]).is_zero());
        assert!(NewtonPolygon::reduce(z(), vec![(rat(1, 2), int(0))]).is_err());
    }

    #[test]
    fn legendre_examples() {
        let c = poly(&[(0, 0)]).legendre();
        assert!(c.kinks().is_empty());
        assert_eq!(c.anchor(), &RMax::Finite(int(0)));
        let h = poly(&[(0, 0), (1, -1)]).legendre();
        assert_eq!(h.kinks(), &[int(1)]);
        assert_eq!(h.slopes(), &[int(0), int(1)]);
        let t = poly(&[(0, 0), (1, 0), (2, -3)]).legendre();
        assert_eq!(t.kinks(), &[int(3)]);
        assert_eq!(t.slopes(), &[int(1), int(2)]);
        assert!(poly(&[]).legendre().is_bottom());
    }

    #[test]
    fn from_function_examples() {
        let five = PiecewiseAffine::constant(Interval::half_line(), int(5));
        assert_eq!(NewtonPolygon::from_function(z(), &five).unwrap().vertices(), verts(&[(0, 5)]));
        let h = PiecewiseAffine::new(Interval::half_line(), vec![int(1)], vec![int(0), int(1)], RMax::one()).unwrap();
        assert_eq!(NewtonPolygon::from_function(z(), &h).unwrap().vertices(), verts(&[(0, 0), (1, -1)]));
        let concave =
            PiecewiseAffine::new(Interval::half_line(), vec![int(1)], vec![int(1), int(0)], RMax::one()).unwrap();
        assert_eq!(NewtonPolygon::from_function(z(), &concave), Err(Error::NotConvex));
        let half = PiecewiseAffine::affine(Interval::half_line(), rat(1, 2), int(0));
        assert!(matches!(NewtonPolygon::from_function(z(), &half), Err(Error::SlopeNotInGroup(_))));
        let h3 = SlopeGroup::new(3, rat(1, 2)).unwrap();
        assert!(NewtonPolygon::from_function(h3.clone(), &half).is_ok());
        assert!(h3.contains(&rat(1, 18)));
        assert!(!h3.contains(&rat(1, 4)));
    }

    #[test]
    fn semiring_examples() {
        let n = poly(&[(0, 0), (1, -1), (3, -7)]);
        assert_eq!(poly(&[(0, 0)]).times(&n).unwrap(), n);
        assert_eq!(poly(&[(1, 0)]).times(&poly(&[(2, 3)])).unwrap(), poly(&[(3, 3)]));
        assert_eq!(poly(&[(0, 0)]).join(&poly(&[(1, -1)])).unwrap(), poly(&[(0, 0), (1, -1)]));
        let zero = NewtonPolygon::zero(z());
        assert_eq!(zero.join(&n).unwrap(), n);
        assert!(zero.times(&n).unwrap().is_zero());
        let other = NewtonPolygon::one(SlopeGroup::hp(Prime::new(2).unwrap()));
        assert_eq!(n.join(&other), Err(Error::GroupMismatch));
    }

    #[test]
    fn quotient_recovers_factor() {
        let n = poly(&[(0, 0), (1, -1), (3, -7)]);
        let m = poly(&[(-1, 2), (2, -4)]);
        let prod = n.times(&m).unwrap();
        assert_eq!(prod.quotient(&n).unwrap(), Some(m));
        // (0,0),(1,-1) does not divide (0,0),(2,-1)
        assert_eq!(poly(&[(0, 0), (2, -1)]).quotient(&poly(&[(0, 0), (1, -1)])).unwrap(), None);
    }

    fn arb_poly() -> impl Strategy<Value = NewtonPolygon> {
        prop::collection::vec((-6i64..6, -20i64..20), 0..7).prop_map(|vs| poly(&vs))
    }

    proptest! {
        #[test]
        fn reduced_vertices_are_strict(n in arb_poly()) {
            let v = n.vertices();
            prop_assert!(v.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 > w[1].1));
            prop_assert!(v.windows(3).all(|w| chord(&w[0], &w[1]) > chord(&w[1], &w[2])));
        }

        #[test]
        fn legendre_round_trip(n in arb_poly()) {
            let f = n.legendre();
            prop_assert!(f.is_convex());
            prop_assert_eq!(NewtonPolygon::from_function(z(), &f).unwrap(), n);
        }

        #[test]
        fn operations_are_pointwise(a in arb_poly(), b in arb_poly(), k in 0i64..100) {
            let l = rat(k, 9);
            let j = a.join(&b).unwrap();
            let t = a.times(&b).unwrap();
            prop_assert_eq!(j.support(&l), a.support(&l).join(&b.support(&l)));
            prop_assert_eq!(t.support(&l), a.support(&l).times(&b.support(&l)));
            prop_assert_eq!(t.legendre().value_at(&l).unwrap(), t.support(&l));
        }
    }
}
