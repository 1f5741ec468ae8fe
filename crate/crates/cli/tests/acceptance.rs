//! Acceptance criteria 1–10, one PASS/FAIL line each.

#[path = "../../core/tests/oracle/mod.rs"]
mod oracle;

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_traits::Signed;
use oracle::{positive_mass, rr_fixtures, Oracle};
use scaling_site::curve::Divisor;
use scaling_site::rational::{fmt_rational, int, parse_rational, pow_rational, Rational};
use scaling_site::riemann_roch::{dim_filtration, rr_check};
use scaling_site::scalars::{HpScalar, Prime};
use scaling_site::verify::{self, Gen, VerifyConfig};

const SEED: u64 = 0x5ca11e;

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn from_checks(failures: Vec<String>, summary: String) -> Verdict {
        match failures.first() {
            None => Verdict { pass: true, detail: summary },
            Some(first) => {
                Verdict { pass: false, detail: format!("{summary}; {} failures, first: {first}", failures.len()) }
            }
        }
    }
}

/// Runs the named properties at `count` cases each.
fn properties(names: &[&str], count: u64) -> (Vec<String>, u64) {
    let mut failures = Vec::new();
    let mut cases = 0;
    for name in names {
        let report = verify::run(&VerifyConfig { seed: SEED, count, filter: Some(name.to_string()), fault: None });
        let outcome = report.outcome(name).unwrap_or_else(|| panic!("no property {name}"));
        cases += outcome.cases;
        if let Some(c) = &outcome.failure {
            failures.push(format!("{name} case {}: {}", c.case, c.message));
        }
    }
    (failures, cases)
}

fn secs(d: Duration) -> String {
    format!("{:.2} s", d.as_secs_f64())
}

fn semiring_axioms() -> Verdict {
    let start = Instant::now();
    let (mut failures, cases) =
        properties(&["newton.semiring", "germs.rh-semiring", "germs.zh-semiring", "scalars.rmax-semiring"], 10_000);
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(30) {
        failures.push(format!("runtime {} exceeds 30 s", secs(elapsed)));
    }
    Verdict::from_checks(failures, format!("{cases} cases over 4 algebras in {}", secs(elapsed)))
}

fn legendre_duality() -> Verdict {
    let (failures, cases) = properties(&["newton.legendre-round-trip", "newton.legendre-pointwise"], 1000);
    Verdict::from_checks(failures, format!("{cases} cases, 100 λ per pointwise case"))
}

fn cancellation() -> Verdict {
    let (failures, cases) = properties(&["newton.cancellation"], 1000);
    Verdict::from_checks(failures, format!("{cases} triples"))
}

fn size_of(case: u64) -> u32 {
    (case % 8) as u32 + 1
}

fn conservation() -> Verdict {
    let mut failures = Vec::new();
    let mut checked = 0;
    for p in [2, 3, 5] {
        let prime = Prime::new(p).unwrap();
        let mut found = 0;
        let mut case = 0;
        while found < 1000 {
            let f = Gen::new(SEED, &format!("acceptance.conservation.{p}"), case, size_of(case), None).circle(prime);
            case += 1;
            if f.is_bottom() {
                continue;
            }
            found += 1;
            match f.divisor() {
                Ok(d) => {
                    let (degree, chi) = d.class();
                    if degree != int(0) || chi != 0 {
                        failures.push(format!("{f}: degree {} and χ {chi}", fmt_rational(&degree)));
                    }
                }
                Err(e) => failures.push(format!("{f}: {e}")),
            }
        }
        checked += found;
    }
    Verdict::from_checks(failures, format!("{checked} functions over p = 2, 3, 5"))
}

fn jacobian() -> Verdict {
    let mut failures = Vec::new();
    let mut principal = 0;
    let mut rejected = 0;
    for p in [2, 3, 5, 7] {
        let prime = Prime::new(p).unwrap();
        for case in 0..1000 {
            let mut g = Gen::new(SEED, &format!("acceptance.jacobian.{p}"), case, size_of(case), None);
            let d = g.degree_zero_divisor(prime, 0);
            match d.principal_witness() {
                Ok(w) if w.divisor().ok().as_ref() == Some(&d) => principal += 1,
                Ok(w) => failures.push(format!("witness {w} does not reproduce {d}")),
                Err(o) => failures.push(format!("{d} rejected: {o:?}")),
            }
            if p > 2 {
                let chi = g.range(1, p as i64 - 2) as u64;
                let d = g.degree_zero_divisor(prime, chi);
                match d.principal_witness() {
                    Err(o) if o.chi_obstructs() && !o.degree_obstructs() => rejected += 1,
                    Err(o) => failures.push(format!("{d}: wrong obstruction {o:?}")),
                    Ok(w) => failures.push(format!("{d} with χ = {chi} accepted with witness {w}")),
                }
            }
        }
    }
    let (classes, cases) = properties(&["curve.jacobian-p5"], 1000);
    failures.extend(classes);
    Verdict::from_checks(
        failures,
        format!(
            "{principal} principal round trips, {rejected} χ rejections, {cases} sets of p = 5 class representatives"
        ),
    )
}

fn single_point(p: u64, coeff: &str) -> Divisor {
    let prime = Prime::new(p).unwrap();
    let c = HpScalar::from_rational(prime, &parse_rational(coeff).unwrap()).unwrap();
    Divisor::from_pairs(prime, [(int(1), c)]).unwrap()
}

fn frozen_sequence(p: u64, coeff: &str, expected: &[u64], failures: &mut Vec<String>) -> Duration {
    let d = single_point(p, coeff);
    let degree = d.degree();
    let start = Instant::now();
    for (n, want) in expected.iter().enumerate() {
        let n = n as u32;
        let got = dim_filtration(&d, n);
        if got != *want {
            failures.push(format!("{d} at n = {n}: dimension {got}, frozen {want}"));
        }
        let normalized = Rational::from_integer(got.into()) * pow_rational(p, -(n as i64));
        if n >= 2 && (normalized.clone() - &degree).abs() > pow_rational(p, 1 - n as i64) {
            failures.push(format!(
                "{d} at n = {n}: {} is too far from {}",
                fmt_rational(&normalized),
                fmt_rational(&degree)
            ));
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(60) {
        failures.push(format!("{d}: runtime {} exceeds 60 s", secs(elapsed)));
    }
    elapsed
}

fn riemann_roch_degree() -> Verdict {
    let mut failures = Vec::new();
    let a = frozen_sequence(2, "1", &[1, 1, 3, 7, 15, 31, 63, 127, 255], &mut failures);
    let b = frozen_sequence(3, "1/3", &[1, 1, 1, 7, 25, 79, 241, 727, 2185], &mut failures);
    Verdict::from_checks(failures, format!("p = 2 in {}, p = 3 in {}, n = 0..8", secs(a), secs(b)))
}

fn riemann_roch_formula() -> Verdict {
    let mut failures = Vec::new();
    let fixtures = rr_fixtures();
    let mut divisors = fixtures.clone();
    divisors.extend(fixtures.iter().map(Divisor::neg));
    for d in &divisors {
        let report = rr_check(d, 6);
        let mirror_dim_zero = report.degree >= int(0) || report.positive.levels.iter().all(|l| l.dim == 0);
        if !report.pass || !mirror_dim_zero {
            failures.push(format!(
                "{d}: difference {} for degree {} (tolerance {})",
                fmt_rational(&report.difference),
                fmt_rational(&report.degree),
                fmt_rational(&report.tolerance)
            ));
        }
    }
    Verdict::from_checks(failures, format!("{} fixtures and {} mirrors at nMax = 6", fixtures.len(), fixtures.len()))
}

fn oracle_cross_check() -> Verdict {
    let mut failures = Vec::new();
    let mut checked = 0;
    let fixtures = rr_fixtures();
    let mut divisors = fixtures.clone();
    divisors.extend(fixtures.iter().map(Divisor::neg));
    for d in &divisors {
        let mass = positive_mass(d);
        for n in 0..=8u32 {
            if mass.clone() * pow_rational(d.prime().get(), n as i64) > int(200) {
                break;
            }
            let (expected, _) = Oracle::new(d, n).dimension();
            let got = dim_filtration(d, n);
            if got != expected {
                failures.push(format!("{d} at n = {n}: {got}, brute force {expected}"));
            }
            checked += 1;
        }
    }
    Verdict::from_checks(failures, format!("{checked} (divisor, n) levels with B·p^n ≤ 200"))
}

fn homomorphisms() -> Verdict {
    let (failures, cases) =
        properties(&["germs.germ-at-homomorphism", "piecewise.gamma-action", "germs.eval-char-homomorphism"], 1000);
    Verdict::from_checks(failures, format!("{cases} cases"))
}

fn determinism() -> Verdict {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_scaling-site"))
            .args(["verify", "--seed", "12345", "--count", "100"])
            .output()
            .expect("binary runs")
    };
    let (a, b) = (run(), run());
    let mut failures = Vec::new();
    if !a.status.success() {
        failures.push(format!("verify exited with {}", a.status));
    }
    if a.stdout != b.stdout {
        failures.push("reports differ".into());
    }
    Verdict::from_checks(failures, format!("two runs, {} identical bytes", a.stdout.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("semiring axioms", semiring_axioms),
        ("Legendre duality", legendre_duality),
        ("multiplicative cancellation", cancellation),
        ("conservation on C_p", conservation),
        ("Jacobian classification", jacobian),
        ("Dim_R = deg", riemann_roch_degree),
        ("Riemann-Roch formula", riemann_roch_formula),
        ("brute-force cross-check", oracle_cross_check),
        ("homomorphisms", homomorphisms),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let verdict = check();
        let mark = if verdict.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {mark}  {name}: {}", i + 1, verdict.detail);
        if !verdict.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
