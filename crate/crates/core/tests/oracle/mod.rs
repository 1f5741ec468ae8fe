//! Exhaustive enumeration of H⁰(D)^{p^n} strata, independent of the
//! library's dimension search.
//!
//! Strata are indexed by the number of unit free kinks in each gap between
//! consecutive support points, the jumps at the support points and the first
//! slope. A stratum with the most free kinks never needs a jump larger than
//! one lattice unit (such a kink splits into several nearby unit kinks), so
//! only unit free kinks are enumerated, from the largest count downwards.
//! Every claimed stratum is backed by an explicit section that is checked
//! through the public API.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use scaling_site::curve::{CircleFunction, Divisor};
use scaling_site::rational::{pow_rational, Rational};
use scaling_site::riemann_roch::{member_h0, norm_p};
use scaling_site::scalars::{HpScalar, Prime, RMax};

pub struct Oracle {
    p: Prime,
    n: u32,
    u: Rational,
    pr: Rational,
    degree: Rational,
    wrap_coeff: Rational,
    /// interior support points and their coefficients
    points: Vec<(Rational, Rational)>,
    divisor: Divisor,
}

fn q(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

impl Oracle {
    pub fn new(d: &Divisor, n: u32) -> Self {
        let p = d.prime();
        let one = Rational::one();
        Oracle {
            p,
            n,
            u: pow_rational(p.get(), -(n as i64)),
            pr: p.as_rational(),
            degree: d.degree(),
            wrap_coeff: d.coeff(&one).to_rational(),
            points: d.iter().filter(|(x, _)| **x != one).map(|(x, c)| (x.clone(), c.to_rational())).collect(),
            divisor: d.clone(),
        }
    }

    /// Left ends of the gaps: 1, q_1, …, q_r.
    fn left_ends(&self) -> Vec<Rational> {
        std::iter::once(Rational::one()).chain(self.points.iter().map(|(x, _)| x.clone())).collect()
    }

    /// Right ends of the gaps: q_1, …, q_r, p.
    fn right_ends(&self) -> Vec<Rational> {
        self.points.iter().map(|(x, _)| x.clone()).chain(std::iter::once(self.pr.clone())).collect()
    }

    /// Dimension and a witness section from the top stratum.
    pub fn dimension(&self) -> (u64, Option<CircleFunction>) {
        if self.degree.is_negative() {
            return (0, None);
        }
        // each free kink has excess x·u > u
        let k_max = (&self.degree / &self.u).ceil().to_integer() - BigInt::one();
        let mut k = k_max;
        while k.is_positive() {
            let kk: usize = k.to_string().parse().unwrap();
            if let Some(f) = self.search_free(kk) {
                return (kk as u64, Some(f));
            }
            k -= 1;
        }
        match self.search_constant() {
            Some(f) => (1, Some(f)),
            None => (0, None),
        }
    }

    fn search_free(&self, k: usize) -> Option<CircleFunction> {
        let gaps = self.points.len() + 1;
        let lefts = self.left_ends();
        let mut counts = vec![0usize; gaps];
        self.distribute(k, 0, &mut counts, &Rational::zero(), &lefts)
    }

    fn distribute(
        &self,
        left: usize,
        g: usize,
        counts: &mut Vec<usize>,
        cost: &Rational,
        lefts: &[Rational],
    ) -> Option<CircleFunction> {
        if g + 1 == counts.len() {
            counts[g] = left;
            let total = cost + &self.u * q(left as i64) * &lefts[g];
            if total >= self.degree {
                return None;
            }
            let mut jumps = Vec::new();
            return self.choose_jumps(counts, &total, &mut jumps);
        }
        for c in (0..=left).rev() {
            let next = cost + &self.u * q(c as i64) * &lefts[g];
            if next >= self.degree {
                continue;
            }
            counts[g] = c;
            if let Some(f) = self.distribute(left - c, g + 1, counts, &next, lefts) {
                return Some(f);
            }
        }
        None
    }

    /// Enumerates support jumps with total excess below the remaining budget.
    fn choose_jumps(&self, counts: &[usize], cost: &Rational, jumps: &mut Vec<Rational>) -> Option<CircleFunction> {
        let j = jumps.len();
        if j == self.points.len() {
            return self.solve_free(counts, jumps);
        }
        let (x, c) = &self.points[j];
        let mut jump = ((-c) / &self.u).ceil() * &self.u;
        loop {
            let next = cost + x * (&jump + c);
            if next >= self.degree {
                return None;
            }
            jumps.push(jump.clone());
            if let Some(f) = self.choose_jumps(counts, &next, jumps) {
                return Some(f);
            }
            jumps.pop();
            jump += &self.u;
        }
    }

    /// Looks for a first slope making the stratum nonempty and builds a
    /// section in it.
    fn solve_free(&self, counts: &[usize], jumps: &[Rational]) -> Option<CircleFunction> {
        let pm1 = &self.pr - Rational::one();
        let rise = &self.u * q(counts.iter().sum::<usize>() as i64);
        let jump_sum: Rational = jumps.iter().sum();
        let weighted: Rational = self.points.iter().zip(jumps).map(|((x, _), j)| (&self.pr - x) * j).sum();
        let (lefts, rights) = (self.left_ends(), self.right_ends());
        // ∫ f' over the period is (p−1)s_0 + Σ jumps·(p − position)
        let lo: Rational = counts.iter().zip(&rights).map(|(c, b)| &self.u * q(*c as i64) * (&self.pr - b)).sum();
        let hi: Rational = counts.iter().zip(&lefts).map(|(c, a)| &self.u * q(*c as i64) * (&self.pr - a)).sum();
        // −((p−1)s_0 + weighted) must lie strictly between lo and hi
        let s_min = (-&hi - &weighted) / &pm1;
        let s_max = (-&lo - &weighted) / &pm1;
        let mut s0 = ((&s_min / &self.u).floor() + Rational::one()) * &self.u;
        // order at {1}: s_0 − p·s_last ≥ −c_1
        let wrap_max = (&self.wrap_coeff - &self.pr * (&jump_sum + &rise)) / &pm1;
        while s0 < s_max && s0 <= wrap_max {
            if let Some(f) = self.place(counts, jumps, &s0, &weighted) {
                return Some(f);
            }
            s0 += &self.u;
        }
        None
    }

    fn place(
        &self,
        counts: &[usize],
        jumps: &[Rational],
        s0: &Rational,
        weighted: &Rational,
    ) -> Option<CircleFunction> {
        let pm1 = &self.pr - Rational::one();
        let target = -(&pm1 * s0 + weighted);
        let (lefts, rights) = (self.left_ends(), self.right_ends());
        let mut eps = Rational::one();
        for _ in 0..200 {
            let mut right_cluster = Vec::new();
            let mut left_cluster = Vec::new();
            for (g, c) in counts.iter().enumerate() {
                for i in 1..=*c {
                    right_cluster.push(&rights[g] - &eps * q((*c + 1 - i) as i64));
                    left_cluster.push(&lefts[g] + &eps * q(i as i64));
                }
            }
            let fits = counts.iter().enumerate().all(|(g, c)| &eps * q(*c as i64 + 1) < &rights[g] - &lefts[g]);
            if fits {
                let value = |xs: &[Rational]| -> Rational { xs.iter().map(|x| &self.u * (&self.pr - x)).sum() };
                let (vr, vl) = (value(&right_cluster), value(&left_cluster));
                if vr < target && target < vl {
                    let theta = (&target - &vr) / (&vl - &vr);
                    let xs: Vec<Rational> = right_cluster
                        .iter()
                        .zip(&left_cluster)
                        .map(|(r, l)| r * (Rational::one() - &theta) + l * &theta)
                        .collect();
                    return Some(self.build(&xs, jumps, s0));
                }
            }
            eps /= q(2);
        }
        None
    }

    fn build(&self, free: &[Rational], jumps: &[Rational], s0: &Rational) -> CircleFunction {
        let mut events: Vec<(Rational, Rational)> = free.iter().map(|x| (x.clone(), self.u.clone())).collect();
        events.extend(self.points.iter().zip(jumps).map(|((x, _), j)| (x.clone(), j.clone())));
        events.sort_by(|a, b| a.0.cmp(&b.0));
        let mut slopes = vec![s0.clone()];
        for (_, j) in &events {
            let s = slopes.last().unwrap() + j;
            slopes.push(s);
        }
        let kinks: Vec<Rational> = events.into_iter().map(|e| e.0).collect();
        let f = CircleFunction::from_rationals(self.p, kinks, &slopes, RMax::Finite(Rational::zero()))
            .expect("oracle section must close up");
        self.certify(&f);
        f
    }

    fn certify(&self, f: &CircleFunction) {
        assert!(member_h0(f, &self.divisor).unwrap(), "oracle section {f} not in H0({})", self.divisor);
        assert!(norm_p(f).unwrap() <= pow_rational(self.p.get(), self.n as i64), "oracle section {f} too steep");
    }

    /// Sections without free kinks: X = 0 exactly.
    fn search_constant(&self) -> Option<CircleFunction> {
        let mut jumps = Vec::new();
        self.constant_jumps(&Rational::zero(), &mut jumps)
    }

    fn constant_jumps(&self, cost: &Rational, jumps: &mut Vec<Rational>) -> Option<CircleFunction> {
        let j = jumps.len();
        if j == self.points.len() {
            let pm1 = &self.pr - Rational::one();
            let weighted: Rational = self.points.iter().zip(jumps.iter()).map(|((x, _), j)| (&self.pr - x) * j).sum();
            let s0 = -weighted / &pm1;
            if !(&s0 / &self.u).is_integer() {
                return None;
            }
            let jump_sum: Rational = jumps.iter().sum();
            let wrap = &s0 - &self.pr * (&s0 + &jump_sum);
            if wrap + &self.wrap_coeff < Rational::zero() {
                return None;
            }
            return Some(self.build(&[], jumps, &s0));
        }
        let (x, c) = &self.points[j];
        let mut jump = ((-c) / &self.u).ceil() * &self.u;
        loop {
            let next = cost + x * (&jump + c);
            if next > self.degree {
                return None;
            }
            jumps.push(jump.clone());
            if let Some(f) = self.constant_jumps(&next, jumps) {
                return Some(f);
            }
            jumps.pop();
            jump += &self.u;
        }
    }
}

/// `Σ_{d>0} rep·d`, the search bound B.
pub fn positive_mass(d: &Divisor) -> Rational {
    d.iter().filter(|(_, c)| c.signum() > 0).map(|(x, c)| x * c.to_rational()).sum()
}

pub fn divisor(p: u64, pairs: &[(&str, &str)]) -> Divisor {
    use scaling_site::rational::parse_rational;
    let p = Prime::new(p).unwrap();
    let pairs = pairs
        .iter()
        .map(|(x, c)| (parse_rational(x).unwrap(), HpScalar::from_rational(p, &parse_rational(c).unwrap()).unwrap()));
    Divisor::from_pairs(p, pairs).unwrap()
}

/// Regression fixtures with nonnegative degree; their negatives are the
/// mirror cases with Dim_R = 0.
pub fn rr_fixtures() -> Vec<Divisor> {
    vec![
        divisor(2, &[]),
        divisor(2, &[("1", "1")]),
        divisor(3, &[("1", "1/3")]),
        divisor(3, &[("1", "1")]),
        divisor(5, &[("1", "1")]),
        divisor(7, &[("1", "1")]),
        divisor(2, &[("3/2", "1")]),
        divisor(3, &[("2", "1")]),
        divisor(3, &[("2", "1"), ("1", "-1")]),
        divisor(5, &[("2", "1"), ("3", "-1/5")]),
        divisor(3, &[("1", "2"), ("2", "-1")]),
        divisor(3, &[("1", "4/3"), ("2", "-2/3")]),
        divisor(2, &[("1", "3"), ("3/2", "-2")]),
        divisor(5, &[("1", "2"), ("2", "-1")]),
        divisor(5, &[("1", "1"), ("2", "1"), ("3", "1"), ("4", "-1")]),
        divisor(7, &[("3", "1"), ("5", "-1/7")]),
        divisor(2, &[("5/4", "1/2"), ("7/4", "1/4")]),
        divisor(3, &[("3/2", "2/3"), ("5/2", "1/3")]),
        divisor(5, &[("1", "1/5")]),
        divisor(3, &[("1", "1"), ("2", "-1/3"), ("5/2", "1/3")]),
    ]
}
