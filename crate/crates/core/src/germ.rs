//! Stalk semirings of the structure sheaf.
//!
//! [`Germ`] is the semiring R_H of germs `(x, h₊, h₋)` at a point: `x` is the
//! value and `h±` are the one-sided slopes scaled by the point. [`Lex`] is
//! Z_H = (R × H)_max with the lexicographic order. Both carry the evaluation
//! character `(x, …) ↦ x` into R_max.

use std::cmp::Ordering;
use std::fmt;

use crate::rational::{fmt_rational, Rational};
use crate::scalars::RMax;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Germ {
    /// Germ of the constant −∞; the zero of R_H.
    Bottom,
    Triple {
        x: Rational,
        h_plus: Rational,
        h_minus: Rational,
    },
}

impl Germ {
    pub fn new(x: Rational, h_plus: Rational, h_minus: Rational) -> Self {
        Germ::Triple { x, h_plus, h_minus }
    }

    /// The multiplicative unit `(0, 0, 0)`.
    pub fn one() -> Self {
        let z = Rational::from_integer(0.into());
        Germ::new(z.clone(), z.clone(), z)
    }

    /// Germs of convex functions have `h₊ ≥ h₋`.
    pub fn is_convex(&self) -> bool {
        match self {
            Germ::Bottom => true,
            Germ::Triple { h_plus, h_minus, .. } => h_plus >= h_minus,
        }
    }

    /// `h₊ − h₋`, the order of the underlying function at the point.
    pub fn order(&self) -> Option<Rational> {
        match self {
            Germ::Bottom => None,
            Germ::Triple { h_plus, h_minus, .. } => Some(h_plus - h_minus),
        }
    }

    /// Max of two germs: the larger value wins; on a tie the right slopes
    /// take the max and the left slopes the min.
    pub fn join(&self, other: &Self) -> Self {
        match (self, other) {
            (Germ::Bottom, g) | (g, Germ::Bottom) => g.clone(),
            (Germ::Triple { x, h_plus, h_minus }, Germ::Triple { x: x2, h_plus: hp2, h_minus: hm2 }) => match x.cmp(x2)
            {
                Ordering::Greater => self.clone(),
                Ordering::Less => other.clone(),
                Ordering::Equal => Germ::new(x.clone(), h_plus.max(hp2).clone(), h_minus.min(hm2).clone()),
            },
        }
    }

    /// Componentwise sum; bottom absorbs.
    pub fn mul(&self, other: &Self) -> Self {
        match (self, other) {
            (Germ::Triple { x, h_plus, h_minus }, Germ::Triple { x: x2, h_plus: hp2, h_minus: hm2 }) => {
                Germ::new(x + x2, h_plus + hp2, h_minus + hm2)
            }
            _ => Germ::Bottom,
        }
    }

    /// The evaluation character R_H → R_max.
    pub fn eval_char(&self) -> RMax {
        match self {
            Germ::Bottom => RMax::NegInf,
            Germ::Triple { x, .. } => RMax::Finite(x.clone()),
        }
    }
}

impl fmt::Display for Germ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Germ::Bottom => write!(f, "-inf"),
            Germ::Triple { x, h_plus, h_minus } => {
                write!(f, "({}, {}, {})", fmt_rational(x), fmt_rational(h_plus), fmt_rational(h_minus))
            }
        }
    }
}

/// An element of Z_H. The derived order is exactly the lexicographic one
/// with `Bottom` below everything.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Lex {
    Bottom,
    Pair { x: Rational, h: Rational },
}

impl Lex {
    pub fn new(x: Rational, h: Rational) -> Self {
        Lex::Pair { x, h }
    }

    pub fn one() -> Self {
        let z = Rational::from_integer(0.into());
        Lex::new(z.clone(), z)
    }

    pub fn join(&self, other: &Self) -> Self {
        std::cmp::max(self, other).clone()
    }

    pub fn mul(&self, other: &Self) -> Self {
        match (self, other) {
            (Lex::Pair { x, h }, Lex::Pair { x: x2, h: h2 }) => Lex::new(x + x2, h + h2),
            _ => Lex::Bottom,
        }
    }

    pub fn eval_char(&self) -> RMax {
        match self {
            Lex::Bottom => RMax::NegInf,
            Lex::Pair { x, .. } => RMax::Finite(x.clone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn g(x: i64, hp: i64, hm: i64) -> Germ {
        Germ::new(int(x), int(hp), int(hm))
    }

    #[test]
    fn germ_join_examples() {
        assert_eq!(g(0, 2, 1).join(&g(-1, 5, -5)), g(0, 2, 1));
        assert_eq!(g(-1, 5, -5).join(&g(0, 2, 1)), g(0, 2, 1));
        assert_eq!(g(0, 2, 1).join(&g(0, 3, -1)), g(0, 3, -1));
        assert_eq!(g(0, 2, 1).join(&Germ::Bottom), g(0, 2, 1));
    }

    #[test]
    fn germ_mul_examples() {
        let a = Germ::new(int(1), int(2), int(0));
        let b = Germ::new(int(-3), rat(1, 2), rat(1, 2));
        assert_eq!(a.mul(&b), Germ::new(int(-2), rat(5, 2), rat(1, 2)));
        assert_eq!(Germ::one().mul(&a), a);
        assert_eq!(Germ::Bottom.mul(&a), Germ::Bottom);
    }

    #[test]
    fn lex_examples() {
        let l = |x, h| Lex::new(int(x), int(h));
        assert_eq!(l(0, 1).join(&l(0, 2)), l(0, 2));
        assert_eq!(l(1, -5).join(&l(0, 100)), l(1, -5));
        assert_eq!(l(1, 2).mul(&l(3, 4)), l(4, 6));
        assert_eq!(Lex::Bottom.join(&l(0, 0)), l(0, 0));
        assert_eq!(Lex::Bottom.mul(&l(0, 0)), Lex::Bottom);
        assert_eq!(l(7, 3).eval_char(), RMax::Finite(int(7)));
    }

    #[test]
    fn eval_char_examples() {
        assert_eq!(g(7, 1, 0).eval_char(), RMax::Finite(int(7)));
        assert_eq!(Germ::Bottom.eval_char(), RMax::NegInf);
        assert_eq!(g(2, 3, 5).order(), Some(int(-2)));
        assert!(!g(2, 3, 5).is_convex());
    }
}
