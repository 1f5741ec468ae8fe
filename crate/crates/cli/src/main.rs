mod svg;

use std::fmt;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use scaling_site::curve::{CircleFunction, Divisor};
use scaling_site::io;
use scaling_site::newton::NewtonPolygon;
use scaling_site::piecewise::PiecewiseAffine;
use scaling_site::rational::{fmt_rational, int};
use scaling_site::riemann_roch::rr_check;
use scaling_site::scalars::RMax;
use scaling_site::verify::{self, Fault, VerifyConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
    Svg,
}

/// Exact max-plus computations on Newton polygons and the periodic orbits C_p.
#[derive(Debug, Parser)]
#[command(name = "scaling-site", version)]
struct RunConfig {
    /// Expected prime; inputs over a different prime are rejected.
    #[arg(long, global = true)]
    p: Option<u64>,
    /// Largest filtration level for `rr`.
    #[arg(long = "n-max", global = true, default_value_t = 6)]
    n_max: u32,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Seed for `verify`.
    #[arg(long, global = true, default_value_t = VerifyConfig::default().seed)]
    seed: u64,
    /// Cases per property for `verify`.
    #[arg(long, global = true, default_value_t = VerifyConfig::default().count)]
    count: u64,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Legendre transform of a Newton polygon, with the round-trip check.
    Legendre { file: String },
    /// Divisor, degree and χ of a global section of K_p.
    Divisor { file: String },
    /// Jacobian class of a divisor and a witness when it is principal.
    Jacobian { file: String },
    /// Filtration dimensions of H0(D) and H0(-D) and the Riemann-Roch check.
    Rr { file: String },
    /// Seeded property suite over every module.
    Verify {
        /// Only properties whose name starts with this prefix.
        #[arg(long)]
        only: Option<String>,
        #[arg(long, hide = true)]
        inject_fault: Option<Fault>,
    },
    /// SVG plot of a function file (piecewise-affine or on C_p).
    Plot { file: String },
}

enum Failure {
    /// A checked property does not hold.
    Property(String),
    /// Unreadable or invalid input.
    Input(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Property(_) => 1,
            Failure::Input(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Property(m) => write!(f, "property failure: {m}"),
            Failure::Input(m) => write!(f, "input error: {m}"),
        }
    }
}

impl From<scaling_site::Error> for Failure {
    fn from(e: scaling_site::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

/// Output text plus an optional property failure discovered while
/// producing it.
struct Output {
    body: String,
    failure: Option<String>,
}

impl Output {
    fn ok(body: String) -> Self {
        Output { body, failure: None }
    }
}

fn read_input(path: &str) -> Result<String, Failure> {
    let mut text = String::new();
    if path == "-" {
        std::io::stdin().read_to_string(&mut text).map_err(|e| Failure::Input(format!("stdin: {e}")))?;
    } else {
        text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{path}: {e}")))?;
    }
    Ok(text)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn check_prime(config: &RunConfig, found: u64) -> Result<(), Failure> {
    match config.p {
        Some(p) if p != found => Err(Failure::Input(format!("--p {p} given but the input is over p = {found}"))),
        _ => Ok(()),
    }
}

fn breakpoints_csv(f: &PiecewiseAffine) -> String {
    let mut out = String::from("lambda,value\n");
    if f.is_bottom() {
        return out;
    }
    let mut xs = vec![f.domain().lo().clone()];
    xs.extend(f.kinks().iter().cloned());
    if let Some(h) = f.domain().hi() {
        xs.push(h.clone());
    }
    for x in xs {
        let v = f.value_at(&x).expect("breakpoints lie in the domain");
        out.push_str(&format!("{},{}\n", fmt_rational(&x), v));
    }
    out
}

fn legendre(config: &RunConfig, file: &str) -> Result<Output, Failure> {
    let polygon = io::parse_polygon(&read_input(file)?)?;
    let f = polygon.legendre();
    let back = NewtonPolygon::from_function(polygon.group().clone(), &f)?;
    let round_trip = back == polygon;
    let failure = (!round_trip).then(|| format!("fromFunction(legendre N) = {back} differs from N = {polygon}"));
    let body = match config.format {
        Format::Text => {
            let shown = if f.is_bottom() { "constant -inf".to_string() } else { f.to_string() };
            format!("polygon {polygon}\nlegendre {shown}\nround trip {}\n", if round_trip { "ok" } else { "FAILED" })
        }
        Format::Json => pretty(&json!({
            "polygon": io::polygon_to_json(&polygon),
            "function": io::piecewise_to_json(&f),
            "roundTrip": round_trip,
        })),
        Format::Csv => breakpoints_csv(&f),
        Format::Svg => svg::function(&f, &format!("legendre of {polygon}")),
    };
    Ok(Output { body, failure })
}

fn divisor(config: &RunConfig, file: &str) -> Result<Output, Failure> {
    let f = io::parse_circle(&read_input(file)?)?;
    check_prime(config, f.prime().get())?;
    let d = f.divisor()?;
    let (degree, chi) = d.class();
    let conserved = degree == int(0) && chi == 0;
    let failure = (!conserved).then(|| format!("sum of orders {} and χ {chi} for {f}", fmt_rational(&degree)));
    let verdict = if conserved { "ok" } else { "FAILED" };
    let body = match config.format {
        Format::Text => {
            let mut s = format!("f: {f}\ndivisor {d}\n");
            for (x, c) in d.iter() {
                s.push_str(&format!("  order {} at {}\n", fmt_rational(&(x * c.to_rational())), fmt_rational(x)));
            }
            s.push_str(&format!(
                "degree {}\nchi {chi}\nsum of orders {} ({verdict})\n",
                fmt_rational(&degree),
                fmt_rational(&degree)
            ));
            s
        }
        Format::Json => pretty(&json!({
            "function": io::circle_to_json(&f),
            "divisor": io::divisor_to_json(&d),
            "orders": d.iter().map(|(x, c)| json!({"point": fmt_rational(x), "order": fmt_rational(&(x * c.to_rational()))})).collect::<Vec<_>>(),
            "degree": fmt_rational(&degree),
            "chi": chi,
            "sumOfOrders": verdict,
        })),
        Format::Csv => {
            let mut s = String::from("point,coeff,order\n");
            for (x, c) in d.iter() {
                s.push_str(&format!("{},{},{}\n", fmt_rational(x), c, fmt_rational(&(x * c.to_rational()))));
            }
            s
        }
        Format::Svg => svg::function(&f.to_piecewise(), &format!("f on [1, {}]", f.prime())),
    };
    Ok(Output { body, failure })
}

fn jacobian(config: &RunConfig, file: &str) -> Result<Output, Failure> {
    let d = io::parse_divisor(&read_input(file)?)?;
    check_prime(config, d.prime().get())?;
    let (degree, chi) = d.class();
    let witness = d.principal_witness();
    let mut failure = None;
    if let Ok(w) = &witness {
        if w.divisor()? != d {
            failure = Some(format!("witness {w} does not reproduce {d}"));
        }
    }
    let body = match config.format {
        Format::Text | Format::Csv => {
            let mut s =
                format!("divisor {d}\ndegree {}\nchi {chi} (mod {})\n", fmt_rational(&degree), d.prime().get() - 1);
            match &witness {
                Ok(w) => s.push_str(&format!("principal: yes\nwitness {w}\n")),
                Err(o) => {
                    let mut why = Vec::new();
                    if o.degree_obstructs() {
                        why.push("degree");
                    }
                    if o.chi_obstructs() {
                        why.push("chi");
                    }
                    s.push_str(&format!("principal: no (obstructed by {})\n", why.join(" and ")));
                }
            }
            s
        }
        Format::Json => pretty(&json!({
            "divisor": io::divisor_to_json(&d),
            "degree": fmt_rational(&degree),
            "chi": chi,
            "principal": witness.is_ok(),
            "obstruction": witness.as_ref().err().map(|o| json!({"degree": o.degree_obstructs(), "chi": o.chi_obstructs()})),
            "witness": witness.as_ref().ok().map(io::circle_to_json),
        })),
        Format::Svg => match &witness {
            Ok(w) => svg::function(&w.to_piecewise(), &format!("witness for {d}")),
            Err(_) => {
                svg::function(&CircleFunction::bottom(d.prime()).to_piecewise(), &format!("{d} is not principal"))
            }
        },
    };
    Ok(Output { body, failure })
}

fn rr(config: &RunConfig, file: &str) -> Result<Output, Failure> {
    let d: Divisor = io::parse_divisor(&read_input(file)?)?;
    check_prime(config, d.prime().get())?;
    if config.n_max < 2 {
        return Err(Failure::Input(format!("--n-max must be at least 2, got {}", config.n_max)));
    }
    let report = rr_check(&d, config.n_max);
    let failure = (!report.pass).then(|| {
        format!(
            "Dim_R(D) - Dim_R(-D) = {} is not within {} of deg D = {}",
            fmt_rational(&report.difference),
            fmt_rational(&report.tolerance),
            fmt_rational(&report.degree)
        )
    });
    let body = match config.format {
        Format::Text => {
            let mut s = report.to_string();
            s.push('\n');
            if report.degree < int(0) {
                s.push_str("deg D < 0: H0(D) contains only -inf, Dim_R(H0(D)) = 0\n");
            }
            s
        }
        Format::Json => pretty(&report.to_json()),
        Format::Csv => {
            let mut s = String::from("n,dim,normalized,dim_neg,normalized_neg\n");
            for (a, b) in report.positive.levels.iter().zip(&report.negative.levels) {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    a.n,
                    a.dim,
                    fmt_rational(&a.normalized),
                    b.dim,
                    fmt_rational(&b.normalized)
                ));
            }
            s
        }
        Format::Svg => svg::convergence(&report.positive, &report.degree, &format!("p^-n dim H0({d})^(p^n)")),
    };
    Ok(Output { body, failure })
}

fn run_verify(config: &RunConfig, only: &Option<String>, fault: Option<Fault>) -> Result<Output, Failure> {
    let report = verify::run(&VerifyConfig { seed: config.seed, count: config.count, filter: only.clone(), fault });
    if report.outcomes.is_empty() {
        return Err(Failure::Input(format!("no property matches {:?}", only.as_deref().unwrap_or(""))));
    }
    if config.count == 0 {
        eprintln!("warning: no cases");
    }
    let failed: Vec<&str> = report.outcomes.iter().filter(|o| o.failure.is_some()).map(|o| o.name).collect();
    let failure = (!failed.is_empty()).then(|| format!("counterexamples for {}", failed.join(", ")));
    let body = match config.format {
        Format::Json => pretty(&json!({
            "seed": report.seed,
            "count": report.count,
            "properties": report.outcomes.iter().map(|o| json!({
                "name": o.name,
                "cases": o.cases,
                "passed": o.failure.is_none(),
                "counterexample": o.failure.as_ref().map(|c| json!({
                    "case": c.case,
                    "size": c.size,
                    "originalSize": c.original_size,
                    "message": c.message,
                })),
            })).collect::<Vec<_>>(),
        })),
        _ => format!("{report}\n"),
    };
    Ok(Output { body, failure })
}

fn plot(config: &RunConfig, file: &str) -> Result<Output, Failure> {
    let text = read_input(file)?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| Failure::Input(e.to_string()))?;
    let (f, title) = if doc.get("p").is_some() {
        let c = io::parse_circle(&text)?;
        check_prime(config, c.prime().get())?;
        (c.to_piecewise(), format!("f on C_{}", c.prime()))
    } else {
        (io::parse_piecewise(&text)?, "f".to_string())
    };
    let body = match config.format {
        Format::Csv => breakpoints_csv(&f),
        _ => svg::function(&f, &title),
    };
    if f.anchor() == &RMax::NegInf {
        eprintln!("note: the function is -inf; the plot is empty");
    }
    Ok(Output::ok(body))
}

fn execute(config: &RunConfig) -> Result<Output, Failure> {
    match &config.command {
        Command::Legendre { file } => legendre(config, file),
        Command::Divisor { file } => divisor(config, file),
        Command::Jacobian { file } => jacobian(config, file),
        Command::Rr { file } => rr(config, file),
        Command::Verify { only, inject_fault } => run_verify(config, only, *inject_fault),
        Command::Plot { file } => plot(config, file),
    }
}

fn emit(config: &RunConfig, body: &str) -> Result<(), Failure> {
    match &config.out {
        Some(path) => std::fs::write(path, body).map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes()).map_err(|e| Failure::Input(format!("stdout: {e}")))
        }
    }
}

fn main() -> ExitCode {
    let config = match RunConfig::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = execute(&config).and_then(|out| {
        emit(&config, &out.body)?;
        match out.failure {
            Some(m) => Err(Failure::Property(m)),
            None => Ok(()),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("scaling-site: {f}");
            ExitCode::from(f.code())
        }
    }
}
