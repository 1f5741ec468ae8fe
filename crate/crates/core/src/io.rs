//! JSON documents for polygons, functions and divisors.
//!
//! Rationals are strings `"a"`, `"a/b"` or `"a/p^k"`; the bottom value is
//! `"-inf"` and an unbounded right endpoint is `"inf"`. Malformed fields are
//! reported with the line and column of the offending token.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::curve::{CircleFunction, Divisor};
use crate::error::Error;
use crate::newton::{NewtonPolygon, SlopeGroup};
use crate::piecewise::{Interval, PiecewiseAffine};
use crate::rational::{fmt_rational, parse_rational, Rational};
use crate::scalars::{HpScalar, Prime, RMax};

/// A rational read from a JSON string or integer.
#[derive(Debug, Clone)]
struct Q(Rational);

/// A rational, `"inf"` (as `None`) or `"-inf"` (as bottom), depending on
/// where it is accepted.
#[derive(Debug, Clone)]
enum Extended {
    Finite(Rational),
    PosInf,
    NegInf,
}

struct ExtendedVisitor;

impl<'de> Visitor<'de> for ExtendedVisitor {
    type Value = Extended;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a rational string such as \"3/4\", an integer, or \"inf\"/\"-inf\"")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Extended, E> {
        Ok(Extended::Finite(Rational::from_integer(v.into())))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Extended, E> {
        Ok(Extended::Finite(Rational::from_integer(v.into())))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Extended, E> {
        match v.trim() {
            "inf" | "+inf" => Ok(Extended::PosInf),
            "-inf" => Ok(Extended::NegInf),
            s => parse_rational(s).map(Extended::Finite).map_err(|_| E::custom(format!("malformed rational {v:?}"))),
        }
    }
}

impl<'de> Deserialize<'de> for Extended {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        d.deserialize_any(ExtendedVisitor)
    }
}

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match Extended::deserialize(d)? {
            Extended::Finite(r) => Ok(Q(r)),
            _ => Err(de::Error::custom("expected a finite rational")),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolygonDoc {
    #[serde(default = "integers")]
    p: u64,
    scale: Option<Q>,
    vertices: Vec<(Q, Q)>,
}

fn integers() -> u64 {
    1
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PiecewiseDoc {
    domain: (Q, Extended),
    anchor: Extended,
    #[serde(default)]
    kinks: Vec<Q>,
    slopes: Vec<Q>,
    convex: Option<bool>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CircleDoc {
    p: u64,
    domain: Option<(Q, Q)>,
    anchor: Extended,
    #[serde(default)]
    kinks: Vec<Q>,
    slopes: Vec<Q>,
    convex: Option<bool>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DivisorDoc {
    p: u64,
    #[serde(default)]
    support: Vec<SupportEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SupportEntry {
    point: Q,
    coeff: Q,
}

fn read<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T, Error> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn rationals(v: Vec<Q>) -> Vec<Rational> {
    v.into_iter().map(|q| q.0).collect()
}

fn anchor_value(e: Extended) -> Result<RMax, Error> {
    match e {
        Extended::Finite(r) => Ok(RMax::Finite(r)),
        Extended::NegInf => Ok(RMax::NegInf),
        Extended::PosInf => Err(Error::Parse("anchor cannot be +inf".into())),
    }
}

fn strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(fmt_rational).collect()
}

pub fn parse_polygon(text: &str) -> Result<NewtonPolygon, Error> {
    let doc: PolygonDoc = read(text)?;
    let scale = doc.scale.map(|q| q.0).unwrap_or_else(|| Rational::from_integer(1.into()));
    let group = SlopeGroup::new(doc.p, scale)?;
    NewtonPolygon::reduce(group, doc.vertices.into_iter().map(|(x, y)| (x.0, y.0)))
}

pub fn polygon_to_json(n: &NewtonPolygon) -> Value {
    json!({
        "p": n.group().p(),
        "scale": fmt_rational(n.group().scale()),
        "vertices": n.vertices().iter().map(|(x, y)| [fmt_rational(x), fmt_rational(y)]).collect::<Vec<_>>(),
    })
}

pub fn parse_piecewise(text: &str) -> Result<PiecewiseAffine, Error> {
    let doc: PiecewiseDoc = read(text)?;
    let hi = match doc.domain.1 {
        Extended::Finite(r) => Some(r),
        Extended::PosInf => None,
        Extended::NegInf => return Err(Error::InvalidDomain("right endpoint -inf".into())),
    };
    let domain = Interval::new(doc.domain.0 .0, hi)?;
    let f = PiecewiseAffine::new(domain, rationals(doc.kinks), rationals(doc.slopes), anchor_value(doc.anchor)?)?;
    if doc.convex == Some(true) && !f.is_convex() {
        return Err(Error::NotConvex);
    }
    Ok(f)
}

pub fn piecewise_to_json(f: &PiecewiseAffine) -> Value {
    let hi = f.domain().hi().map(fmt_rational).unwrap_or_else(|| "inf".into());
    json!({
        "domain": [fmt_rational(f.domain().lo()), hi],
        "anchor": f.anchor().to_string(),
        "kinks": strings(f.kinks()),
        "slopes": strings(f.slopes()),
        "convex": f.is_convex(),
    })
}

pub fn parse_circle(text: &str) -> Result<CircleFunction, Error> {
    let doc: CircleDoc = read(text)?;
    let p = Prime::new(doc.p)?;
    if let Some((lo, hi)) = &doc.domain {
        if lo.0 != Rational::from_integer(1.into()) || hi.0 != p.as_rational() {
            return Err(Error::InvalidDomain(format!("expected [1, {p}]")));
        }
    }
    let f = CircleFunction::from_rationals(p, rationals(doc.kinks), &rationals(doc.slopes), anchor_value(doc.anchor)?)?;
    if doc.convex == Some(true) && !f.to_piecewise().is_convex() {
        return Err(Error::NotConvex);
    }
    Ok(f)
}

pub fn circle_to_json(f: &CircleFunction) -> Value {
    json!({
        "p": f.prime().get(),
        "domain": ["1", f.prime().get().to_string()],
        "anchor": f.anchor().to_string(),
        "kinks": strings(f.kinks()),
        "slopes": f.slopes().iter().map(HpScalar::to_string).collect::<Vec<_>>(),
        "convex": f.to_piecewise().is_convex(),
    })
}

pub fn parse_divisor(text: &str) -> Result<Divisor, Error> {
    let doc: DivisorDoc = read(text)?;
    let p = Prime::new(doc.p)?;
    let pairs = doc
        .support
        .into_iter()
        .map(|e| Ok((e.point.0, HpScalar::from_rational(p, &e.coeff.0)?)))
        .collect::<Result<Vec<_>, Error>>()?;
    Divisor::from_pairs(p, pairs)
}

pub fn divisor_to_json(d: &Divisor) -> Value {
    json!({
        "p": d.prime().get(),
        "support": d.iter().map(|(r, c)| json!({"point": fmt_rational(r), "coeff": c.to_string()})).collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn polygon_round_trip() {
        let text = r#"{"p": 1, "scale": "1", "vertices": [["0","0"], ["1","-1"], ["0","-3"]]}"#;
        let n = parse_polygon(text).unwrap();
        assert_eq!(n.vertices(), [(int(0), int(0)), (int(1), int(-1))]);
        let back = parse_polygon(&polygon_to_json(&n).to_string()).unwrap();
        assert_eq!(back, n);
    }

    #[test]
    fn malformed_rational_is_line_anchored() {
        let text = "{\"p\": 1,\n \"vertices\": [[\"0\", \"1/x\"]]}";
        let Err(Error::Parse(msg)) = parse_polygon(text) else { panic!("expected a parse error") };
        assert!(msg.contains("line 2"), "{msg}");
        assert!(msg.contains("malformed rational"), "{msg}");
    }

    #[test]
    fn piecewise_round_trip() {
        let text = r#"{"domain": ["0", "inf"], "anchor": "0", "kinks": ["1"], "slopes": ["0", "1"], "convex": true}"#;
        let f = parse_piecewise(text).unwrap();
        assert_eq!(f.value_at(&int(3)).unwrap(), RMax::Finite(int(2)));
        assert_eq!(parse_piecewise(&piecewise_to_json(&f).to_string()).unwrap(), f);
        let bottom = r#"{"domain": [0, 2], "anchor": "-inf", "slopes": ["0"]}"#;
        assert!(parse_piecewise(bottom).unwrap().is_bottom());
        let concave = r#"{"domain": [0, 2], "anchor": "0", "kinks": ["1"], "slopes": ["1", "0"], "convex": true}"#;
        assert_eq!(parse_piecewise(concave), Err(Error::NotConvex));
    }

    #[test]
    fn circle_and_divisor_round_trip() {
        let text = r#"{"p": 3, "anchor": "0", "kinks": ["2"], "slopes": ["1/3", "-1/3"]}"#;
        let f = parse_circle(text).unwrap();
        assert_eq!(parse_circle(&circle_to_json(&f).to_string()).unwrap(), f);
        let d = f.divisor().unwrap();
        let dj = divisor_to_json(&d);
        assert_eq!(dj["support"][0]["coeff"], "4/3^1");
        assert_eq!(parse_divisor(&dj.to_string()).unwrap(), d);
        let bad = r#"{"p": 3, "anchor": "0", "kinks": ["2"], "slopes": ["1/3", "1/3"]}"#;
        assert!(matches!(parse_circle(bad), Err(Error::Closure(_))));
        let not_hp = r#"{"p": 3, "support": [{"point": "2", "coeff": "1/2"}]}"#;
        assert!(matches!(parse_divisor(not_hp), Err(Error::NotInHp { .. })));
        let d2 = parse_divisor(r#"{"p": 2, "support": [{"point": "5", "coeff": 1}]}"#).unwrap();
        assert_eq!(d2.degree(), int(5));
        assert_eq!(d2.iter().next().unwrap().0, &rat(5, 4));
    }
}
