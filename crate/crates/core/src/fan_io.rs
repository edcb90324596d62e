//! JSON documents for fans, support functions, blow-up logs, certificates and
//! bend reports, plus the builtin fan corpus.
//!
//! Ray order in a fan document defines ray indices and is never changed by
//! the serializers. Rationals are strings of the form `"p"` or `"p/q"`.

use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;
use serde_json::{Map, Number, Value};

use crate::certificates::{BendReport, Certificate, FarkasCertificate, SupportFunction};
use crate::error::{Error, Result};
use crate::exact_arith::{Covector, LatticeVector, Rational};
use crate::fan_model::Fan;
use crate::registry::Registry;
use crate::sign_adapt::{BlowupLog, BlowupStep};

pub const FAN_SCHEMA: &str = "fan/1";
pub const SUPPORT_SCHEMA: &str = "support/1";
pub const LOG_SCHEMA: &str = "blowuplog/1";
pub const CERT_SCHEMA: &str = "cert/1";
pub const BENDS_SCHEMA: &str = "bends/1";
pub const BASIS_SCHEMA: &str = "basis/1";

// ---------------------------------------------------------------------------
// Builtin corpus

fn oda75() -> Fan {
    Fan::from_i64s(
        3,
        &[
            &[1, 0, 0],
            &[0, 1, 0],
            &[0, 0, 1],
            &[-1, -1, -1],
            &[-1, -1, 0],
            &[0, -1, -1],
            &[-1, 0, -1],
        ],
        &[
            &[0, 1, 2],
            &[0, 1, 6],
            &[0, 2, 5],
            &[0, 5, 6],
            &[1, 2, 4],
            &[1, 4, 6],
            &[2, 4, 5],
            &[3, 4, 5],
            &[3, 4, 6],
            &[3, 5, 6],
        ],
    )
    .expect("builtin fan is well formed")
}

fn p2() -> Fan {
    Fan::from_i64s(2, &[&[1, 0], &[0, 1], &[-1, -1]], &[&[0, 1], &[0, 2], &[1, 2]])
        .expect("builtin fan is well formed")
}

fn p1p1() -> Fan {
    Fan::from_i64s(
        2,
        &[&[1, 0], &[0, 1], &[-1, 0], &[0, -1]],
        &[&[0, 1], &[1, 2], &[2, 3], &[0, 3]],
    )
    .expect("builtin fan is well formed")
}

fn p1p1p1() -> Fan {
    let rays: [&[i64]; 6] = [&[1, 0, 0], &[0, 1, 0], &[0, 0, 1], &[-1, 0, 0], &[0, -1, 0], &[0, 0, -1]];
    let mut cones = Vec::new();
    for x in [0, 3] {
        for y in [1, 4] {
            for z in [2, 5] {
                cones.push(vec![x, y, z]);
            }
        }
    }
    let cones: Vec<&[usize]> = cones.iter().map(Vec::as_slice).collect();
    Fan::from_i64s(3, &rays, &cones).expect("builtin fan is well formed")
}

fn p3() -> Fan {
    Fan::from_i64s(
        3,
        &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1], &[-1, -1, -1]],
        &[&[0, 1, 2], &[0, 1, 3], &[0, 2, 3], &[1, 2, 3]],
    )
    .expect("builtin fan is well formed")
}

fn hexagon() -> Fan {
    Fan::from_i64s(
        2,
        &[&[1, 0], &[1, 1], &[0, 1], &[-1, 0], &[-1, -1], &[0, -1]],
        &[&[0, 1], &[1, 2], &[2, 3], &[3, 4], &[4, 5], &[0, 5]],
    )
    .expect("builtin fan is well formed")
}

pub fn builtins() -> Registry<fn() -> Fan> {
    Registry::new()
        .register("oda75", oda75 as fn() -> Fan)
        .register("p2", p2)
        .register("p1p1", p1p1)
        .register("p1p1p1", p1p1p1)
        .register("p3", p3)
        .register("hexagon", hexagon)
}

pub fn builtin(name: &str) -> Result<Fan> {
    builtins().get(name).map(|f| f())
}

// ---------------------------------------------------------------------------
// Output

/// Pretty-prints JSON with arrays of scalars kept on a single line.
pub fn render_json(value: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, value, 0);
    out.push('\n');
    out
}

fn is_flat(value: &Value) -> bool {
    match value {
        Value::Array(items) => items.iter().all(|v| !v.is_array() && !v.is_object()),
        Value::Object(_) => false,
        _ => true,
    }
}

fn write_value(out: &mut String, value: &Value, indent: usize) {
    let pad = "  ".repeat(indent + 1);
    match value {
        Value::Object(map) if !map.is_empty() => {
            out.push_str("{\n");
            for (i, (k, v)) in map.iter().enumerate() {
                let _ = write!(out, "{pad}{}: ", Value::String(k.clone()));
                write_value(out, v, indent + 1);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            let _ = write!(out, "{}}}", "  ".repeat(indent));
        }
        Value::Array(items) if !items.is_empty() && !is_flat(value) => {
            out.push_str("[\n");
            for (i, v) in items.iter().enumerate() {
                out.push_str(&pad);
                write_value(out, v, indent + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            let _ = write!(out, "{}]", "  ".repeat(indent));
        }
        Value::Array(items) => {
            out.push('[');
            for (i, v) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&v.to_string());
            }
            out.push(']');
        }
        other => out.push_str(&other.to_string()),
    }
}

fn int_value(c: &BigInt) -> Value {
    Value::Number(Number::from_str(&c.to_string()).expect("integers are valid JSON numbers"))
}

fn vector_value(coords: &[BigInt]) -> Value {
    Value::Array(coords.iter().map(int_value).collect())
}

fn index_value(i: usize) -> Value {
    Value::Number(i.into())
}

fn indices_value(ix: &[usize]) -> Value {
    Value::Array(ix.iter().copied().map(index_value).collect())
}

pub fn format_rational(q: &Rational) -> String {
    q.to_string()
}

fn rational_value(q: &Rational) -> Value {
    Value::String(format_rational(q))
}

fn object(pairs: Vec<(&str, Value)>) -> Value {
    Value::Object(pairs.into_iter().map(|(k, v)| (k.to_owned(), v)).collect::<Map<_, _>>())
}

pub fn serialize_fan(fan: &Fan) -> String {
    render_json(&object(vec![
        ("schema", FAN_SCHEMA.into()),
        ("dim", index_value(fan.dim())),
        ("rays", Value::Array(fan.rays().iter().map(|r| vector_value(r.coords())).collect())),
        ("cones", Value::Array(fan.cones().iter().map(|c| indices_value(c)).collect())),
    ]))
}

pub fn serialize_support(h: &SupportFunction) -> String {
    render_json(&support_object(SUPPORT_SCHEMA, None, h))
}

fn support_object(schema: &str, kind: Option<&str>, h: &SupportFunction) -> Value {
    let mut pairs = vec![("schema", Value::from(schema))];
    if let Some(kind) = kind {
        pairs.push(("kind", kind.into()));
    }
    pairs.push(("fan_rays", index_value(h.values.len())));
    pairs.push(("values", Value::Array(h.values.iter().map(rational_value).collect())));
    object(pairs)
}

pub fn serialize_log(log: &BlowupLog) -> String {
    let steps = log
        .steps
        .iter()
        .map(|s| {
            object(vec![
                ("step", index_value(s.step)),
                ("normal", vector_value(s.normal.coords())),
                ("u", vector_value(s.u.coords())),
                ("v", vector_value(s.v.coords())),
                ("s", vector_value(s.s.coords())),
                ("u_idx", index_value(s.u_idx)),
                ("v_idx", index_value(s.v_idx)),
                ("s_idx", index_value(s.s_idx)),
            ])
        })
        .collect();
    let per_normal = log
        .per_normal
        .iter()
        .map(|(m, count)| object(vec![("normal", vector_value(m.coords())), ("count", index_value(*count))]))
        .collect();
    render_json(&object(vec![
        ("schema", LOG_SCHEMA.into()),
        ("steps", Value::Array(steps)),
        ("per_normal", Value::Array(per_normal)),
    ]))
}

pub fn serialize_certificate(cert: &Certificate) -> String {
    match cert {
        Certificate::Ample(h) => render_json(&support_object(CERT_SCHEMA, Some("ample"), h)),
        Certificate::Farkas(f) => {
            let multipliers = f
                .multipliers
                .iter()
                .map(|(wall, l)| object(vec![("wall", indices_value(wall)), ("lambda", rational_value(l))]))
                .collect();
            render_json(&object(vec![
                ("schema", CERT_SCHEMA.into()),
                ("kind", "farkas".into()),
                ("multipliers", Value::Array(multipliers)),
            ]))
        }
    }
}

pub fn serialize_bends(rep: &BendReport) -> String {
    let walls = rep
        .per_wall
        .iter()
        .map(|(w, b)| {
            object(vec![
                ("wall", indices_value(&w.ray_indices)),
                ("a", index_value(w.side_a)),
                ("b", index_value(w.side_b)),
                ("bend", rational_value(b)),
            ])
        })
        .collect();
    render_json(&object(vec![
        ("schema", BENDS_SCHEMA.into()),
        ("walls", Value::Array(walls)),
        ("min_bend", rational_value(&rep.min_bend)),
        ("distinct_values", Value::Array(rep.distinct_values.iter().map(rational_value).collect())),
        ("all_positive", rep.all_positive.into()),
    ]))
}

// ---------------------------------------------------------------------------
// Input

fn parse_err(ctx: &str, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("{ctx}: {msg}"))
}

fn parse_document(text: &str, schema: &str) -> Result<Map<String, Value>> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let Value::Object(map) = value else {
        return Err(Error::Parse("document root must be a JSON object".into()));
    };
    match map.get("schema") {
        Some(Value::String(s)) if s == schema => Ok(map),
        Some(other) => Err(parse_err("schema", format!("expected \"{schema}\", found {other}"))),
        None => Err(parse_err("schema", "missing field")),
    }
}

fn field<'a>(map: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    map.get(key).ok_or_else(|| parse_err(key, "missing field"))
}

fn as_array<'a>(v: &'a Value, ctx: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| parse_err(ctx, "expected an array"))
}

fn as_bigint(v: &Value, ctx: &str) -> Result<BigInt> {
    match v {
        Value::Number(n) => BigInt::from_str(&n.to_string()).map_err(|_| parse_err(ctx, format!("{n} is not an integer"))),
        other => Err(parse_err(ctx, format!("expected an integer, found {other}"))),
    }
}

fn as_index(v: &Value, ctx: &str) -> Result<usize> {
    v.as_u64()
        .and_then(|n| usize::try_from(n).ok())
        .ok_or_else(|| parse_err(ctx, format!("expected a nonnegative index, found {v}")))
}

fn as_vector(v: &Value, ctx: &str) -> Result<Vec<BigInt>> {
    as_array(v, ctx)?
        .iter()
        .enumerate()
        .map(|(i, c)| as_bigint(c, &format!("{ctx}[{i}]")))
        .collect()
}

fn as_indices(v: &Value, ctx: &str) -> Result<Vec<usize>> {
    as_array(v, ctx)?
        .iter()
        .enumerate()
        .map(|(i, c)| as_index(c, &format!("{ctx}[{i}]")))
        .collect()
}

/// Parses `"p"` or `"p/q"`; a leading U+2212 minus sign is accepted.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim().replace('\u{2212}', "-");
    let bad = || Error::Parse(format!("invalid rational `{text}`"));
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t.as_str(), "1"),
    };
    let num = BigInt::from_str(num).map_err(|_| bad())?;
    let den = BigInt::from_str(den).map_err(|_| bad())?;
    if den == BigInt::from(0) {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

fn as_rational(v: &Value, ctx: &str) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s).map_err(|e| parse_err(ctx, e)),
        Value::Number(n) => parse_rational(&n.to_string()).map_err(|e| parse_err(ctx, e)),
        other => Err(parse_err(ctx, format!("expected a rational string, found {other}"))),
    }
}

pub fn parse_fan(text: &str) -> Result<Fan> {
    let doc = parse_document(text, FAN_SCHEMA)?;
    let dim = as_index(field(&doc, "dim")?, "dim")?;
    let rays = as_array(field(&doc, "rays")?, "rays")?
        .iter()
        .enumerate()
        .map(|(i, r)| as_vector(r, &format!("rays[{i}]")).map(LatticeVector::new))
        .collect::<Result<Vec<_>>>()?;
    let cones = as_array(field(&doc, "cones")?, "cones")?
        .iter()
        .enumerate()
        .map(|(i, c)| as_indices(c, &format!("cones[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    Fan::new(dim, rays, cones)
}

fn parse_values(doc: &Map<String, Value>) -> Result<SupportFunction> {
    let values = as_array(field(doc, "values")?, "values")?
        .iter()
        .enumerate()
        .map(|(i, v)| as_rational(v, &format!("values[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    if let Some(count) = doc.get("fan_rays") {
        let count = as_index(count, "fan_rays")?;
        if count != values.len() {
            return Err(parse_err("fan_rays", format!("declares {count} rays but {} values given", values.len())));
        }
    }
    Ok(SupportFunction::new(values))
}

pub fn parse_support(text: &str) -> Result<SupportFunction> {
    parse_values(&parse_document(text, SUPPORT_SCHEMA)?)
}

pub fn parse_log(text: &str) -> Result<BlowupLog> {
    let doc = parse_document(text, LOG_SCHEMA)?;
    let steps = as_array(field(&doc, "steps")?, "steps")?
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let ctx = format!("steps[{i}]");
            let obj = s.as_object().ok_or_else(|| parse_err(&ctx, "expected an object"))?;
            let get = |k: &str| obj.get(k).ok_or_else(|| parse_err(&format!("{ctx}.{k}"), "missing field"));
            let vec = |k: &str| -> Result<Vec<BigInt>> { as_vector(get(k)?, &format!("{ctx}.{k}")) };
            let idx = |k: &str| -> Result<usize> { as_index(get(k)?, &format!("{ctx}.{k}")) };
            let step = BlowupStep {
                step: idx("step")?,
                normal: Covector::new(vec("normal")?),
                u: LatticeVector::new(vec("u")?),
                v: LatticeVector::new(vec("v")?),
                s: LatticeVector::new(vec("s")?),
                u_idx: idx("u_idx")?,
                v_idx: idx("v_idx")?,
                s_idx: idx("s_idx")?,
            };
            if step.u.add(&step.v) != step.s {
                return Err(Error::InvariantViolation(format!("{ctx}: s is not u + v")));
            }
            Ok(step)
        })
        .collect::<Result<Vec<_>>>()?;
    let per_normal = as_array(field(&doc, "per_normal")?, "per_normal")?
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let ctx = format!("per_normal[{i}]");
            let obj = p.as_object().ok_or_else(|| parse_err(&ctx, "expected an object"))?;
            let normal = obj.get("normal").ok_or_else(|| parse_err(&format!("{ctx}.normal"), "missing field"))?;
            let count = obj.get("count").ok_or_else(|| parse_err(&format!("{ctx}.count"), "missing field"))?;
            Ok((
                Covector::new(as_vector(normal, &format!("{ctx}.normal"))?),
                as_index(count, &format!("{ctx}.count"))?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let total: usize = per_normal.iter().map(|p| p.1).sum();
    if total != steps.len() {
        return Err(Error::InvariantViolation(format!(
            "per_normal counts sum to {total} but the log has {} steps",
            steps.len()
        )));
    }
    Ok(BlowupLog { steps, per_normal })
}

pub fn parse_certificate(text: &str) -> Result<Certificate> {
    let doc = parse_document(text, CERT_SCHEMA)?;
    match field(&doc, "kind")?.as_str() {
        Some("ample") => parse_values(&doc).map(Certificate::Ample),
        Some("farkas") => {
            let multipliers = as_array(field(&doc, "multipliers")?, "multipliers")?
                .iter()
                .enumerate()
                .map(|(i, m)| {
                    let ctx = format!("multipliers[{i}]");
                    let obj = m.as_object().ok_or_else(|| parse_err(&ctx, "expected an object"))?;
                    let wall = obj.get("wall").ok_or_else(|| parse_err(&format!("{ctx}.wall"), "missing field"))?;
                    let lambda = obj.get("lambda").ok_or_else(|| parse_err(&format!("{ctx}.lambda"), "missing field"))?;
                    Ok((as_indices(wall, &format!("{ctx}.wall"))?, as_rational(lambda, &format!("{ctx}.lambda"))?))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Certificate::Farkas(FarkasCertificate { multipliers }))
        }
        _ => Err(parse_err("kind", "expected \"ample\" or \"farkas\"")),
    }
}

/// Reads a basis as `{"schema": "basis/1", "columns": [...]}` or as a bare
/// matrix given row by row. Returns the basis vectors (matrix columns).
pub fn parse_basis(text: &str) -> Result<Vec<LatticeVector>> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if value.is_object() {
        let doc = parse_document(text, BASIS_SCHEMA)?;
        return as_array(field(&doc, "columns")?, "columns")?
            .iter()
            .enumerate()
            .map(|(i, c)| as_vector(c, &format!("columns[{i}]")).map(LatticeVector::new))
            .collect();
    }
    let rows = as_array(&value, "matrix")?
        .iter()
        .enumerate()
        .map(|(i, r)| as_vector(r, &format!("matrix[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse(format!("basis matrix must be {n}x{n}")));
    }
    Ok((0..n).map(|j| LatticeVector::new(rows.iter().map(|r| r[j].clone()).collect())).collect())
}

pub fn serialize_basis(columns: &[LatticeVector]) -> String {
    render_json(&object(vec![
        ("schema", BASIS_SCHEMA.into()),
        ("columns", Value::Array(columns.iter().map(|c| vector_value(c.coords())).collect())),
    ]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan_model::validate_fan;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn builtins_are_smooth_and_complete() {
        for name in builtins().names() {
            let fan = builtin(name).unwrap();
            let rep = validate_fan(&fan);
            assert!(rep.all_pass(), "{name}: {:?}", rep.diagnostics);
        }
        assert!(matches!(builtin("nope"), Err(Error::UnknownName(_))));
    }

    #[test]
    fn builtin_shapes() {
        let p2 = builtin("p2").unwrap();
        assert_eq!(p2.cones(), &[vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(p2.ray(2), &LatticeVector::from_i64s(&[-1, -1]));
        assert_eq!(builtin("p1p1").unwrap().cones().len(), 4);
        assert_eq!(builtin("oda75").unwrap().f_vector().0, [7, 15, 10]);
    }

    #[test]
    fn fan_round_trip() {
        for name in builtins().names() {
            let fan = builtin(name).unwrap();
            let text = serialize_fan(&fan);
            assert_eq!(parse_fan(&text).unwrap(), fan);
            assert_eq!(serialize_fan(&parse_fan(&text).unwrap()), text);
        }
    }

    #[test]
    fn fan_text_layout() {
        let text = serialize_fan(&builtin("p2").unwrap());
        assert_eq!(
            text,
            "{\n  \"schema\": \"fan/1\",\n  \"dim\": 2,\n  \"rays\": [\n    [1,0],\n    [0,1],\n    [-1,-1]\n  ],\n  \"cones\": [\n    [0,1],\n    [0,2],\n    [1,2]\n  ]\n}\n"
        );
    }

    #[test]
    fn big_coordinates_survive() {
        let big = "123456789012345678901234567890";
        let text = format!(
            "{{\"schema\":\"fan/1\",\"dim\":2,\"rays\":[[1,{big}],[0,1]],\"cones\":[[0,1]]}}"
        );
        let fan = parse_fan(&text).unwrap();
        assert_eq!(fan.ray(0).coords()[1].to_string(), big);
        assert!(serialize_fan(&fan).contains(big));
    }

    #[test]
    fn fan_invariant_errors() {
        let nonprim = r#"{"schema":"fan/1","dim":3,"rays":[[2,4,6]],"cones":[]}"#;
        assert!(matches!(parse_fan(nonprim), Err(Error::InvariantViolation(m)) if m.contains("rays[0]")));
        let short = r#"{"schema":"fan/1","dim":3,"rays":[[1,0,0],[0,1,0]],"cones":[[0,1]]}"#;
        assert!(matches!(parse_fan(short), Err(Error::InvariantViolation(m)) if m.contains("cones[0]")));
        let syntax = "{\"schema\":\"fan/1\",\n\"dim\": 3,,}";
        assert!(matches!(parse_fan(syntax), Err(Error::Parse(m)) if m.contains("line 2")));
        let wrong = r#"{"schema":"support/1","values":[]}"#;
        assert!(matches!(parse_fan(wrong), Err(Error::Parse(_))));
        let frac = r#"{"schema":"fan/1","dim":2,"rays":[[1.5,0]],"cones":[]}"#;
        assert!(matches!(parse_fan(frac), Err(Error::Parse(m)) if m.contains("rays[0][0]")));
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("\u{2212}10/2").unwrap(), q(-5, 1));
        assert_eq!(parse_rational("-10/2").unwrap(), q(-5, 1));
        assert_eq!(parse_rational("7").unwrap(), q(7, 1));
        assert_eq!(format_rational(&q(-13, 2)), "-13/2");
        assert_eq!(format_rational(&q(4, 2)), "2");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn support_round_trip_and_count_check() {
        let h = SupportFunction::new(vec![q(-5, 1), q(-13, 2), q(0, 1)]);
        assert_eq!(parse_support(&serialize_support(&h)).unwrap(), h);
        let bad = r#"{"schema":"support/1","fan_rays":4,"values":["1"]}"#;
        assert!(parse_support(bad).is_err());
    }

    #[test]
    fn certificate_round_trip() {
        let farkas = Certificate::Farkas(FarkasCertificate {
            multipliers: vec![(vec![0, 6], q(1, 1)), (vec![1, 4], q(1, 2))],
        });
        assert_eq!(parse_certificate(&serialize_certificate(&farkas)).unwrap(), farkas);
        let ample = Certificate::Ample(SupportFunction::new(vec![q(-1, 2); 4]));
        assert_eq!(parse_certificate(&serialize_certificate(&ample)).unwrap(), ample);
    }

    #[test]
    fn basis_formats() {
        let cols = parse_basis("[[0,0,1],[0,1,0],[1,0,0]]").unwrap();
        assert_eq!(cols[0], LatticeVector::from_i64s(&[0, 0, 1]));
        let skew = parse_basis("[[1,1],[0,1]]").unwrap();
        assert_eq!(skew[1], LatticeVector::from_i64s(&[1, 1]));
        assert_eq!(parse_basis(&serialize_basis(&skew)).unwrap(), skew);
        assert!(parse_basis("[[1,0],[0]]").is_err());
    }
}
