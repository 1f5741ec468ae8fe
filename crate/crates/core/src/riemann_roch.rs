//! The norm filtration of H⁰(D), its combinatorial dimension and the
//! continuous dimension Dim_R.
//!
//! On representatives λ ∈ [1, p) the bound ‖f‖_p ≤ p^n holds exactly when all
//! slopes lie in the lattice u·Z with u = p^{-n}. Everything below is
//! measured in units of u, so slopes and jumps become integers.
//!
//! A section of H⁰(D)^{p^n} is described by its first slope `σ·u`, a jump
//! `J_j·u ≥ −c_j` at each interior support point `q_j`, and `k` further
//! kinks of positive jump at free positions. Write `T` for the total free
//! rise, `S = Σ J_j`, `w_j = p − q_j` and `X = (p−1)σ + Σ J_j·w_j`.
//! Feasibility reduces to
//!
//! * the order at {1}: `(p−1)σ + p·S + p·T ≤ c_1/u`;
//! * closure, `Σ r·(p − x) = −X` over the free kinks, which for unit jumps
//!   at distinct positions in (1, p) needs `0 < −X < (p−1)·T` (and, for a
//!   single kink, that it does not land on a support point).
//!
//! Each free kink with unit jump adds one position; the closure equation
//! removes one and the additive constant adds one back, so a stratum with
//! `T` unit kinks has dimension `T`. The constants-only stratum (`T = 0`,
//! `X = 0`) has dimension 1.
//!
//! Lowering some `J_j` by one unit while adding one unit of free rise keeps
//! every constraint satisfied, so the largest `T` is reached with every
//! `J_j` at its floor `⌈−c_j/u⌉`. For that choice the best `σ` is the least
//! one satisfying the closure bound, found by bisection.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::curve::{CircleFunction, Divisor};
use crate::error::Error;
use crate::rational::{fmt_rational, pow_rational, Rational};
use crate::scalars::{HpScalar, Prime, RMax};

/// ‖f‖_p = max over arcs of |s|_p / (left end of the arc).
pub fn norm_p(f: &CircleFunction) -> Result<Rational, Error> {
    if f.is_bottom() {
        return Err(Error::Bottom);
    }
    let mut best = f.slopes()[0].padic_abs();
    for (k, s) in f.kinks().iter().zip(&f.slopes()[1..]) {
        let v = s.padic_abs() / k;
        if v > best {
            best = v;
        }
    }
    Ok(best)
}

/// Whether `D + (f) ≥ 0`. The bottom section always belongs.
pub fn member_h0(f: &CircleFunction, d: &Divisor) -> Result<bool, Error> {
    if f.prime() != d.prime() {
        return Err(Error::PrimeMismatch(f.prime().get(), d.prime().get()));
    }
    if f.is_bottom() {
        return Ok(true);
    }
    Ok(f.divisor()?.add(d)?.is_effective())
}

/// The divisor data at one level of the filtration, in lattice units.
struct Level {
    p: Prime,
    n: u32,
    pr: Rational,
    /// `c_1 / u`
    wrap_budget: Rational,
    /// `(q_j, ⌈−c_j/u⌉, p − q_j)`
    interior: Vec<(Rational, BigInt, Rational)>,
}

/// A point of the top stratum: first slope, jumps at support points and the
/// number of unit free kinks.
struct Configuration {
    sigma: BigInt,
    jumps: Vec<BigInt>,
    free: BigInt,
}

impl Level {
    fn new(d: &Divisor, n: u32) -> Self {
        let p = d.prime();
        let pr = p.as_rational();
        let scale = pow_rational(p.get(), n as i64);
        let one = Rational::one();
        let wrap_budget = d.coeff(&one).to_rational() * &scale;
        let interior = d
            .iter()
            .filter(|(q, _)| **q != one)
            .map(|(q, c)| {
                let floor = (-(c.to_rational() * &scale)).ceil().to_integer();
                (q.clone(), floor, &pr - q)
            })
            .collect();
        Level { p, n, pr, wrap_budget, interior }
    }

    fn pm1(&self) -> Rational {
        &self.pr - Rational::one()
    }

    /// `X` for the given first slope and support jumps.
    fn closure_offset(&self, sigma: &BigInt, jumps: &[BigInt]) -> Rational {
        let mut x = self.pm1() * Rational::from_integer(sigma.clone());
        for ((_, _, w), j) in self.interior.iter().zip(jumps) {
            x += w * Rational::from_integer(j.clone());
        }
        x
    }

    /// Largest free rise allowed by the order at {1}.
    fn wrap_cap(&self, sigma: &BigInt, jump_sum: &BigInt) -> BigInt {
        let num = &self.wrap_budget
            - &self.pr * Rational::from_integer(jump_sum.clone())
            - self.pm1() * Rational::from_integer(sigma.clone());
        (num / &self.pr).floor().to_integer()
    }

    fn lands_on_support(&self, target: &Rational) -> bool {
        self.interior.iter().any(|(_, _, w)| w == target)
    }

    /// Best configuration with at least one free kink for fixed support
    /// jumps.
    fn best_free(&self, jumps: &[BigInt]) -> Option<Configuration> {
        let jump_sum: BigInt = jumps.iter().sum();
        let offset = self.closure_offset(&BigInt::zero(), jumps);
        let pm1 = self.pm1();
        // closure bound (p−1)(σ + cap(σ)) + offset > 0 is monotone in σ
        let bound = |sigma: &BigInt| {
            let cap = self.wrap_cap(sigma, &jump_sum);
            &pm1 * Rational::from_integer(sigma + cap) + &offset > Rational::zero()
        };
        // X < 0 caps σ from above
        let top = (-&offset / &pm1).ceil().to_integer() - 1;
        if !bound(&top) {
            return None;
        }
        let mut step = BigInt::one();
        let mut low = &top - &step;
        while bound(&low) {
            step *= 2;
            low = &top - &step;
        }
        let mut high = top.clone();
        while &high - &low > BigInt::one() {
            let mid: BigInt = (&low + &high).div_floor(&BigInt::from(2));
            if bound(&mid) {
                high = mid;
            } else {
                low = mid;
            }
        }
        let mut sigma = high;
        while sigma <= top {
            let free = self.wrap_cap(&sigma, &jump_sum);
            if free < BigInt::one() {
                return None;
            }
            let single = free.is_one();
            if !single || !self.lands_on_support(&-self.closure_offset(&sigma, jumps)) {
                return Some(Configuration { sigma, jumps: jumps.to_vec(), free });
            }
            sigma += 1;
        }
        None
    }

    /// A constants-only-dimensional configuration: no free kinks, `X = 0`.
    fn constant_stratum(&self, jumps: &[BigInt]) -> Option<Configuration> {
        let offset = self.closure_offset(&BigInt::zero(), jumps);
        let sigma = -offset / self.pm1();
        if !sigma.is_integer() {
            return None;
        }
        let sigma = sigma.to_integer();
        let jump_sum: BigInt = jumps.iter().sum();
        (self.wrap_cap(&sigma, &jump_sum) >= BigInt::zero()).then(|| Configuration {
            sigma,
            jumps: jumps.to_vec(),
            free: BigInt::zero(),
        })
    }

    fn top_stratum(&self) -> Option<Configuration> {
        let floors: Vec<BigInt> = self.interior.iter().map(|(_, f, _)| f.clone()).collect();
        if let Some(c) = self.best_free(&floors) {
            return Some(c);
        }
        if let Some(c) = self.constant_stratum(&floors) {
            return Some(c);
        }
        (0..floors.len()).find_map(|j| {
            let mut raised = floors.clone();
            raised[j] += 1;
            self.constant_stratum(&raised)
        })
    }

    fn unit(&self, k: &BigInt) -> HpScalar {
        HpScalar::new(self.p, k.clone(), self.n)
    }

    /// An explicit section realizing the configuration, with f(1) = 0.
    fn realize(&self, c: &Configuration) -> CircleFunction {
        let mut events: Vec<(Rational, HpScalar)> =
            self.interior.iter().zip(&c.jumps).map(|((q, _, _), j)| (q.clone(), self.unit(j))).collect();
        if c.free.is_positive() {
            let k = c.free.to_i64().expect("free kink count fits in i64");
            let target = -self.closure_offset(&c.sigma, &c.jumps);
            let centre = &self.pr - &target / Rational::from_integer(c.free.clone());
            let positions = self.spread(&centre, k);
            events.extend(positions.into_iter().map(|x| (x, self.unit(&BigInt::one()))));
        }
        events.sort_by(|a, b| a.0.cmp(&b.0));
        let mut slopes = vec![self.unit(&c.sigma)];
        for (_, j) in &events {
            let next = slopes.last().expect("nonempty") + j;
            slopes.push(next);
        }
        let kinks = events.into_iter().map(|(x, _)| x).collect();
        CircleFunction::new(self.p, kinks, slopes, RMax::one()).expect("configurations satisfy closure")
    }

    /// `k` distinct points of (1, p) off the support, averaging `centre`.
    fn spread(&self, centre: &Rational, k: i64) -> Vec<Rational> {
        let one = Rational::one();
        if k == 1 {
            return vec![centre.clone()];
        }
        // offsets 1, …, k−1 and −k(k−1)/2: distinct, nonzero, summing to 0
        let offsets: Vec<Rational> =
            (1..k).chain(std::iter::once(-k * (k - 1) / 2)).map(|d| Rational::from_integer(BigInt::from(d))).collect();
        let room = std::cmp::min(centre - &one, &self.pr - centre);
        let mut eps = room / Rational::from_integer(BigInt::from(k * k));
        loop {
            let xs: Vec<Rational> = offsets.iter().map(|d| centre + &eps * d).collect();
            if !xs.iter().any(|x| self.interior.iter().any(|(q, _, _)| q == x)) {
                return xs;
            }
            eps /= Rational::from_integer(BigInt::from(2));
        }
    }
}

/// dim_top of H⁰(D)^{p^n}: 0 when only the bottom section is left.
pub fn dim_filtration(d: &Divisor, n: u32) -> u64 {
    if d.degree().is_negative() {
        return 0;
    }
    match Level::new(d, n).top_stratum() {
        Some(c) if c.free.is_positive() => c.free.to_u64().expect("dimension fits in u64"),
        Some(_) => 1,
        None => 0,
    }
}

/// A section in the top-dimensional stratum of H⁰(D)^{p^n}, if any.
pub fn top_stratum_section(d: &Divisor, n: u32) -> Option<CircleFunction> {
    if d.degree().is_negative() {
        return None;
    }
    let level = Level::new(d, n);
    level.top_stratum().map(|c| level.realize(&c))
}

/// `(1 + |deg D|)·p^{1−nMax}`.
pub fn tolerance(p: Prime, degree: &Rational, n_max: u32) -> Rational {
    (Rational::one() + degree.abs()) * pow_rational(p.get(), 1 - n_max as i64)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelRow {
    pub n: u32,
    pub dim: u64,
    /// `p^{-n}·dim`
    pub normalized: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiltrationReport {
    pub divisor: Divisor,
    pub levels: Vec<LevelRow>,
    pub limit_estimate: Rational,
}

/// Levels n = 0..=n_max; the estimate of Dim_R is the normalized value at
/// `n_max`.
pub fn dim_r(d: &Divisor, n_max: u32) -> FiltrationReport {
    let p = d.prime().get();
    let levels: Vec<LevelRow> = (0..=n_max)
        .into_par_iter()
        .map(|n| {
            let dim = dim_filtration(d, n);
            let normalized = Rational::from_integer(BigInt::from(dim)) * pow_rational(p, -(n as i64));
            LevelRow { n, dim, normalized }
        })
        .collect();
    let limit_estimate = levels.last().expect("at least level 0").normalized.clone();
    FiltrationReport { divisor: d.clone(), levels, limit_estimate }
}

impl FiltrationReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,dim,normalized\n");
        for row in &self.levels {
            out.push_str(&format!("{},{},{}\n", row.n, row.dim, fmt_rational(&row.normalized)));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "divisor": crate::io::divisor_to_json(&self.divisor),
            "levels": self.levels.iter().map(|r| json!({
                "n": r.n,
                "dim": r.dim,
                "normalized": fmt_rational(&r.normalized),
            })).collect::<Vec<_>>(),
            "limitEstimate": fmt_rational(&self.limit_estimate),
        })
    }
}

impl fmt::Display for FiltrationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "H0({})", self.divisor)?;
        for row in &self.levels {
            writeln!(f, "  n={:<3} dim={:<10} normalized={}", row.n, row.dim, fmt_rational(&row.normalized))?;
        }
        write!(f, "  Dim_R estimate {}", fmt_rational(&self.limit_estimate))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RrReport {
    pub degree: Rational,
    pub positive: FiltrationReport,
    pub negative: FiltrationReport,
    /// `Dim_R(D) − Dim_R(−D)` at `n_max`
    pub difference: Rational,
    pub tolerance: Rational,
    pub pass: bool,
}

/// Checks `Dim_R(H⁰(D)) − Dim_R(H⁰(−D)) = deg D` within the tolerance.
pub fn rr_check(d: &Divisor, n_max: u32) -> RrReport {
    let degree = d.degree();
    let positive = dim_r(d, n_max);
    let negative = dim_r(&d.neg(), n_max);
    let difference = &positive.limit_estimate - &negative.limit_estimate;
    let tolerance = tolerance(d.prime(), &degree, n_max);
    let pass = (&difference - &degree).abs() <= tolerance;
    RrReport { degree, positive, negative, difference, tolerance, pass }
}

impl RrReport {
    pub fn verdict(&self) -> &'static str {
        if self.pass {
            "PASS"
        } else {
            "FAIL"
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "degree": fmt_rational(&self.degree),
            "positive": self.positive.to_json(),
            "negative": self.negative.to_json(),
            "difference": fmt_rational(&self.difference),
            "tolerance": fmt_rational(&self.tolerance),
            "verdict": self.verdict(),
        })
    }
}

impl fmt::Display for RrReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.positive)?;
        writeln!(f, "{}", self.negative)?;
        write!(
            f,
            "Dim_R(D) - Dim_R(-D) = {}, deg D = {}, tolerance {}: {}",
            fmt_rational(&self.difference),
            fmt_rational(&self.degree),
            fmt_rational(&self.tolerance),
            self.verdict()
        )
    }
}
