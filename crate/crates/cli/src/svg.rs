//! Minimal SVG output. Data stays exact until the final coordinate mapping.

use std::fmt::Write;

use scaling_site::piecewise::PiecewiseAffine;
use scaling_site::rational::{fmt_rational, int, to_f64, Rational};
use scaling_site::riemann_roch::FiltrationReport;
use scaling_site::scalars::RMax;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 40.0;

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn around(xs: &[f64], ys: &[f64]) -> Frame {
        let lo = |v: &[f64]| v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = |v: &[f64]| v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let (mut y0, mut y1) = (lo(ys), hi(ys));
        if y1 - y0 < 1e-9 {
            y0 -= 1.0;
            y1 += 1.0;
        }
        let (mut x0, mut x1) = (lo(xs), hi(xs));
        if x1 - x0 < 1e-9 {
            x0 -= 1.0;
            x1 += 1.0;
        }
        Frame { x0, x1, y0, y1 }
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let sx = MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN);
        let sy = HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN);
        (sx, sy)
    }
}

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{MARGIN}" y="24" font-family="monospace" font-size="13">{}</text>"#, escape(title));
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn axes(s: &mut String, frame: &Frame, x_label: &str, y_label: &str) {
    let (ax, ay) = frame.map(frame.x0, frame.y0);
    let (bx, _) = frame.map(frame.x1, frame.y0);
    let (_, cy) = frame.map(frame.x0, frame.y1);
    let _ = writeln!(s, r##"<line x1="{ax:.3}" y1="{ay:.3}" x2="{bx:.3}" y2="{ay:.3}" stroke="#888"/>"##);
    let _ = writeln!(s, r##"<line x1="{ax:.3}" y1="{ay:.3}" x2="{ax:.3}" y2="{cy:.3}" stroke="#888"/>"##);
    let _ = writeln!(
        s,
        r#"<text x="{:.3}" y="{:.3}" font-family="monospace" font-size="11">{}</text>"#,
        bx - 60.0,
        ay + 16.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.3}" y="{:.3}" font-family="monospace" font-size="11">{}</text>"#,
        ax + 4.0,
        cy - 6.0,
        escape(y_label)
    );
}

/// Right end used for drawing a function on an unbounded domain.
fn drawing_end(f: &PiecewiseAffine) -> Rational {
    match f.domain().hi() {
        Some(h) => h.clone(),
        None => {
            let lo = f.domain().lo().clone();
            let last = f.kinks().last().cloned().unwrap_or_else(|| lo.clone());
            (&last - &lo) * Rational::new(3.into(), 2.into()) + &lo + int(1)
        }
    }
}

/// The graph of `f` as a polyline through its breakpoints.
pub fn function(f: &PiecewiseAffine, title: &str) -> String {
    let mut s = header(title);
    if f.is_bottom() {
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" font-family="monospace" font-size="13">f = -inf (empty plot)</text>"#,
            WIDTH / 2.0 - 80.0,
            HEIGHT / 2.0
        );
        s.push_str("</svg>\n");
        return s;
    }
    let mut xs_exact: Vec<Rational> = vec![f.domain().lo().clone()];
    xs_exact.extend(f.kinks().iter().cloned());
    xs_exact.push(drawing_end(f));
    let points: Vec<(f64, f64)> = xs_exact
        .iter()
        .map(|x| {
            let y = match f.value_at(x).expect("breakpoints lie in the domain") {
                RMax::Finite(v) => v,
                RMax::NegInf => unreachable!("finite function"),
            };
            (to_f64(x), to_f64(&y))
        })
        .collect();
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let frame = Frame::around(&xs, &ys);
    let lo = fmt_rational(f.domain().lo());
    let hi = f.domain().hi().map(fmt_rational).unwrap_or_else(|| "inf".into());
    axes(&mut s, &frame, &format!("λ ∈ [{lo}, {hi}]"), "f(λ)");
    let path: Vec<String> = points
        .iter()
        .map(|(x, y)| {
            let (a, b) = frame.map(*x, *y);
            format!("{a:.3},{b:.3}")
        })
        .collect();
    let _ = writeln!(s, r##"<polyline fill="none" stroke="#1f5fa8" stroke-width="2" points="{}"/>"##, path.join(" "));
    for (x, y) in &points[1..points.len() - 1] {
        let (a, b) = frame.map(*x, *y);
        let _ = writeln!(s, r##"<circle cx="{a:.3}" cy="{b:.3}" r="3" fill="#c0392b"/>"##);
    }
    s.push_str("</svg>\n");
    s
}

/// Normalized dimensions against n, with the degree as a reference line.
pub fn convergence(report: &FiltrationReport, degree: &Rational, title: &str) -> String {
    let mut s = header(title);
    let xs: Vec<f64> = report.levels.iter().map(|l| l.n as f64).collect();
    let mut ys: Vec<f64> = report.levels.iter().map(|l| to_f64(&l.normalized)).collect();
    ys.push(to_f64(degree));
    let frame = Frame::around(&xs, &ys);
    axes(&mut s, &frame, "n", "p^-n dim");
    let (ax, ay) = frame.map(frame.x0, to_f64(degree));
    let (bx, _) = frame.map(frame.x1, to_f64(degree));
    let _ = writeln!(
        s,
        r##"<line x1="{ax:.3}" y1="{ay:.3}" x2="{bx:.3}" y2="{ay:.3}" stroke="#27ae60" stroke-dasharray="6 4"/>"##
    );
    let _ = writeln!(
        s,
        r##"<text x="{:.3}" y="{:.3}" font-family="monospace" font-size="11" fill="#27ae60">deg = {}</text>"##,
        bx - 90.0,
        ay - 6.0,
        escape(&fmt_rational(degree))
    );
    let path: Vec<String> = report
        .levels
        .iter()
        .map(|l| {
            let (a, b) = frame.map(l.n as f64, to_f64(&l.normalized));
            format!("{a:.3},{b:.3}")
        })
        .collect();
    let _ = writeln!(s, r##"<polyline fill="none" stroke="#1f5fa8" stroke-width="2" points="{}"/>"##, path.join(" "));
    for l in &report.levels {
        let (a, b) = frame.map(l.n as f64, to_f64(&l.normalized));
        let _ = writeln!(s, r##"<circle cx="{a:.3}" cy="{b:.3}" r="3" fill="#c0392b"/>"##);
    }
    s.push_str("</svg>\n");
    s
}
