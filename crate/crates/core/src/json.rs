//! JSON encodings shared by the library and the CLI (schema `fdiv/1`).
//!
//! - field: `{"p":2,"e":2,"modulus":[1,1,1]}`
//! - element: coordinate list `[c_0, ..., c_{e-1}]`; a bare integer is read as
//!   a prime-field residue
//! - (Laurent) polynomial: `{"exp": element}` with string integer keys
//! - matrix: row-major nested lists
//! - operator: `{"k": poly}`

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use crate::bundle_p1::{BundleP1, FdivTowerP1};
use crate::diffops::DividedOperator;
use crate::dmod::DModulePresentation;
use crate::error::{Error, Result};
use crate::field::{Fe, Field, FieldSpec};
use crate::laurent::{LaurentMatrix, LaurentPoly};
use crate::linalg::Mat;
use crate::poly::{Poly, PolyMatrix};
use crate::spectral::SpectralPage;
use crate::towers::{SemilinearMap, TowerShape, TwistedTower};

pub const SCHEMA: &str = "fdiv/1";

fn err(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Json(format!("{}: {msg}", if path.is_empty() { "<root>" } else { path }))
}

fn at(path: &str, key: impl std::fmt::Display) -> String {
    format!("{path}[{key}]")
}

fn field_of<'a>(v: &'a Value, key: &str, path: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| err(path, format!("missing key \"{key}\"")))
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| err(path, "expected a list"))
}

fn as_usize(v: &Value, path: &str) -> Result<usize> {
    v.as_u64().map(|n| n as usize).ok_or_else(|| err(path, "expected a nonnegative integer"))
}

fn as_i64(v: &Value, path: &str) -> Result<i64> {
    v.as_i64().ok_or_else(|| err(path, "expected an integer"))
}

/// Parse text, keeping serde's line/column position in the message.
pub fn parse(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Json(format!("parse error: {e}")))
}

/// Add the schema tag and seed to a top-level object.
pub fn envelope(seed: u64, body: Value) -> Value {
    let mut out = Map::new();
    out.insert("schema".into(), json!(SCHEMA));
    out.insert("seed".into(), json!(seed));
    if let Value::Object(m) = body {
        out.extend(m);
    } else {
        out.insert("result".into(), body);
    }
    Value::Object(out)
}

pub fn encode_field(f: &Field) -> Value {
    serde_json::to_value(f.spec()).expect("field spec serializes")
}

pub fn decode_field(v: &Value) -> Result<Field> {
    let spec: FieldSpec = serde_json::from_value(v.clone()).map_err(|e| err("field", e))?;
    Field::new(spec)
}

pub fn encode_fe(a: Fe, f: &Field) -> Value {
    json!(f.coords(a))
}

pub fn decode_fe(v: &Value, f: &Field, path: &str) -> Result<Fe> {
    match v {
        Value::Number(_) => Ok(f.from_int(as_i64(v, path)?)),
        Value::Array(xs) => {
            let coords: Vec<u64> = xs.iter().enumerate().map(|(i, c)| Ok(as_i64(c, &at(path, i))?.rem_euclid(f.p() as i64) as u64)).collect::<Result<_>>()?;
            f.from_coords(&coords).map_err(|e| err(path, e))
        }
        _ => Err(err(path, "expected an element (integer or coordinate list)")),
    }
}

pub fn encode_laurent(a: &LaurentPoly, f: &Field) -> Value {
    let mut m = Map::new();
    for (k, c) in a.terms() {
        m.insert(k.to_string(), encode_fe(c, f));
    }
    Value::Object(m)
}

pub fn decode_laurent(v: &Value, f: &Field, path: &str) -> Result<LaurentPoly> {
    if let Some(n) = v.as_i64() {
        return Ok(LaurentPoly::constant(f.from_int(n)));
    }
    let obj = v.as_object().ok_or_else(|| err(path, "expected an {\"exp\": coeff} object"))?;
    let mut terms = Vec::new();
    for (k, c) in obj {
        let e: i64 = k.parse().map_err(|_| err(path, format!("exponent key \"{k}\" is not an integer")))?;
        terms.push((e, decode_fe(c, f, &format!("{path}.{k}"))?));
    }
    Ok(LaurentPoly::from_terms(terms, f))
}

pub fn encode_poly(a: &Poly, f: &Field) -> Value {
    encode_laurent(&LaurentPoly::from_poly(a), f)
}

pub fn decode_poly(v: &Value, f: &Field, path: &str) -> Result<Poly> {
    decode_laurent(v, f, path)?.to_poly().ok_or_else(|| err(path, "negative exponent in a polynomial"))
}

fn decode_grid<T>(v: &Value, path: &str, mut cell: impl FnMut(&Value, &str) -> Result<T>) -> Result<Vec<Vec<T>>> {
    let rows = as_array(v, path)?;
    let mut out = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let rp = at(path, i);
        let cells = as_array(row, &rp)?;
        out.push(cells.iter().enumerate().map(|(j, c)| cell(c, &at(&rp, j))).collect::<Result<Vec<T>>>()?);
        if out[i].len() != out[0].len() {
            return Err(err(&rp, "ragged matrix"));
        }
    }
    Ok(out)
}

pub fn encode_mat(m: &Mat, f: &Field) -> Value {
    Value::Array((0..m.rows()).map(|i| Value::Array(m.row(i).iter().map(|&a| encode_fe(a, f)).collect())).collect())
}

/// `shape` fixes the dimensions, which an empty row-major list cannot carry.
pub fn decode_mat(v: &Value, f: &Field, shape: Option<(usize, usize)>, path: &str) -> Result<Mat> {
    let rows = decode_grid(v, path, |c, p| decode_fe(c, f, p))?;
    let cols = rows.first().map_or(0, Vec::len);
    if let Some((r, c)) = shape {
        if rows.len() != r || (r > 0 && cols != c) {
            return Err(err(path, format!("expected a {r}x{c} matrix, got {}x{cols}", rows.len())));
        }
        return Ok(Mat::from_rows(c, rows));
    }
    Ok(Mat::from_rows(cols, rows))
}

pub fn encode_poly_matrix(m: &PolyMatrix, f: &Field) -> Value {
    Value::Array(
        (0..m.rows()).map(|i| Value::Array((0..m.cols()).map(|j| encode_poly(m.get(i, j), f)).collect())).collect(),
    )
}

pub fn decode_poly_matrix(v: &Value, f: &Field, path: &str) -> Result<PolyMatrix> {
    PolyMatrix::from_rows(decode_grid(v, path, |c, p| decode_poly(c, f, p))?).map_err(|e| err(path, e))
}

pub fn encode_laurent_matrix(m: &LaurentMatrix, f: &Field) -> Value {
    Value::Array(
        (0..m.rows()).map(|i| Value::Array(m.row(i).iter().map(|a| encode_laurent(a, f)).collect())).collect(),
    )
}

pub fn decode_laurent_matrix(v: &Value, f: &Field, path: &str) -> Result<LaurentMatrix> {
    LaurentMatrix::from_rows(decode_grid(v, path, |c, p| decode_laurent(c, f, p))?).map_err(|e| err(path, e))
}

pub fn encode_operator(op: &DividedOperator, f: &Field) -> Value {
    let mut m = Map::new();
    for (k, a) in op.terms() {
        m.insert(k.to_string(), encode_poly(a, f));
    }
    Value::Object(m)
}

pub fn decode_operator(v: &Value, f: &Field, path: &str) -> Result<DividedOperator> {
    let obj = v.as_object().ok_or_else(|| err(path, "expected a {\"k\": poly} object"))?;
    let mut terms = Vec::new();
    for (k, a) in obj {
        let k: usize = k.parse().map_err(|_| err(path, format!("order key \"{k}\" is not a nonnegative integer")))?;
        terms.push((k, decode_poly(a, f, &format!("{path}.{k}"))?));
    }
    Ok(DividedOperator::from_terms(terms))
}

pub fn decode_bundle(v: &Value, f: &Field, path: &str) -> Result<BundleP1> {
    BundleP1::new(decode_laurent_matrix(v, f, path)?, f)
}

pub fn encode_p1_tower(t: &FdivTowerP1, f: &Field) -> Value {
    let bundles: Vec<Value> = t.bundles().iter().map(|b| encode_laurent_matrix(b.transition(), f)).collect();
    match t {
        FdivTowerP1::Truncated { .. } => json!({"kind": "truncated", "bundles": bundles}),
        FdivTowerP1::Periodic { isos, .. } => json!({
            "kind": "periodic",
            "bundles": bundles,
            "isos": isos.iter().map(|c| encode_mat(c, f)).collect::<Vec<_>>(),
        }),
    }
}

/// `{"kind":"truncated"|"periodic","bundles":[...],"isos":[...]}`; truncated
/// bundles are listed `E_0, ..., E_N`.
pub fn decode_p1_tower(v: &Value, f: &Field) -> Result<FdivTowerP1> {
    let kind = field_of(v, "kind", "")?.as_str().ok_or_else(|| err("kind", "expected a string"))?;
    let bundles = as_array(field_of(v, "bundles", "")?, "bundles")?
        .iter()
        .enumerate()
        .map(|(i, b)| decode_bundle(b, f, &at("bundles", i)))
        .collect::<Result<Vec<_>>>()?;
    match kind {
        "truncated" => FdivTowerP1::truncated(bundles, f),
        "periodic" => {
            let isos = as_array(field_of(v, "isos", "")?, "isos")?
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let r = bundles.get(i).map_or(0, BundleP1::rank);
                    decode_mat(c, f, Some((r, r)), &at("isos", i))
                })
                .collect::<Result<Vec<_>>>()?;
            FdivTowerP1::periodic(bundles, isos, f)
        }
        other => Err(err("kind", format!("unknown tower kind \"{other}\""))),
    }
}

pub fn encode_twisted_tower(t: &TwistedTower, f: &Field) -> Value {
    let maps: Vec<Value> =
        t.maps().iter().map(|m| json!({"matrix": encode_mat(&m.matrix, f), "twist": m.twist})).collect();
    match t.shape() {
        TowerShape::Truncated => json!({"kind": "truncated", "levels": t.dims(), "maps": maps}),
        TowerShape::Periodic { period, .. } => {
            json!({"kind": "periodic", "levels": t.dims(), "maps": maps, "period": period})
        }
    }
}

/// `{"kind":...,"levels":[dims],"maps":[{"matrix":...,"twist":t}]}`, with
/// `"period"` for periodic towers (default: all listed levels repeat).
pub fn decode_twisted_tower(v: &Value, f: &Field, path: &str) -> Result<TwistedTower> {
    let kp = format!("{path}.kind");
    let kind = field_of(v, "kind", path)?.as_str().ok_or_else(|| err(&kp, "expected a string"))?;
    let lp = format!("{path}.levels");
    let dims: Vec<usize> =
        as_array(field_of(v, "levels", path)?, &lp)?.iter().enumerate().map(|(i, d)| as_usize(d, &at(&lp, i))).collect::<Result<_>>()?;
    let mp = format!("{path}.maps");
    let raw = as_array(field_of(v, "maps", path)?, &mp)?;
    let period = match (kind, v.get("period")) {
        ("periodic", Some(p)) => Some(as_usize(p, &format!("{path}.period"))?),
        ("periodic", None) => Some(dims.len()),
        ("truncated", _) => None,
        (other, _) => return Err(err(&kp, format!("unknown tower kind \"{other}\""))),
    };
    let source_dim = |n: usize| match period {
        Some(m) if n + 1 >= dims.len() => dims.get(dims.len().saturating_sub(m)).copied().unwrap_or(0),
        _ => dims.get(n + 1).copied().unwrap_or(0),
    };
    let mut maps = Vec::with_capacity(raw.len());
    for (n, m) in raw.iter().enumerate() {
        let p = at(&mp, n);
        let shape = (dims.get(n).copied().unwrap_or(0), source_dim(n));
        let matrix = decode_mat(field_of(m, "matrix", &p)?, f, Some(shape), &format!("{p}.matrix"))?;
        let twist = match m.get("twist") {
            Some(t) => as_i64(t, &format!("{p}.twist"))?,
            None => 0,
        };
        maps.push(SemilinearMap::new(matrix, twist));
    }
    match period {
        Some(m) => TwistedTower::periodic(dims, maps, m),
        None => TwistedTower::truncated(dims, maps),
    }
    .map_err(|e| err(path, e))
}

pub fn encode_page(page: &SpectralPage) -> Value {
    let dims: BTreeMap<String, usize> = page.entries().map(|((s, t), d)| (format!("{s},{t}"), d)).collect();
    json!({"M": page.m(), "N": page.n(), "dims": dims})
}

pub fn decode_page(v: &Value) -> Result<SpectralPage> {
    let m = as_usize(field_of(v, "M", "")?, "M")?;
    let n = as_usize(field_of(v, "N", "")?, "N")?;
    let obj = field_of(v, "dims", "")?.as_object().ok_or_else(|| err("dims", "expected an {\"s,t\": d} object"))?;
    let mut entries = Vec::new();
    for (k, d) in obj {
        let p = format!("dims.{k}");
        let (s, t) = k.split_once(',').ok_or_else(|| err(&p, "key must look like \"s,t\""))?;
        let s: usize = s.trim().parse().map_err(|_| err(&p, "bad s"))?;
        let t: usize = t.trim().parse().map_err(|_| err(&p, "bad t"))?;
        entries.push(((s, t), as_usize(d, &p)?));
    }
    SpectralPage::new(m, n, entries).map_err(|e| err("dims", e))
}

/// List of tower matrices `A_0, ..., A_{N-1}` over `k[x]`.
pub fn decode_poly_tower(v: &Value, f: &Field) -> Result<Vec<PolyMatrix>> {
    as_array(v, "")?.iter().enumerate().map(|(i, m)| decode_poly_matrix(m, f, &at("", i))).collect()
}

pub fn encode_module(m: &DModulePresentation) -> Value {
    let f = m.field();
    json!({"field": encode_field(f), "actions": m.actions().iter().map(|a| encode_poly_matrix(a, f)).collect::<Vec<_>>()})
}

/// `{"actions":[...]}`, the action of `D_{p^m}` on the basis for each `m`.
pub fn decode_module(v: &Value, f: &Field) -> Result<DModulePresentation> {
    let actions = as_array(field_of(v, "actions", "")?, "actions")?
        .iter()
        .enumerate()
        .map(|(i, a)| decode_poly_matrix(a, f, &at("actions", i)))
        .collect::<Result<Vec<_>>>()?;
    DModulePresentation::new(f.clone(), actions)
}

/// `{"towers":[tower_0, tower_1, ...]}`, one twisted tower per degree.
pub fn decode_tower_set(v: &Value, f: &Field) -> Result<Vec<TwistedTower>> {
    as_array(field_of(v, "towers", "")?, "towers")?
        .iter()
        .enumerate()
        .map(|(i, t)| decode_twisted_tower(t, f, &at("towers", i)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laurent_roundtrip() {
        let f = Field::new(FieldSpec::extension(2, vec![1, 1, 1])).unwrap();
        let a = LaurentPoly::from_terms([(-2, f.generator_u()), (3, f.one())], &f);
        let v = encode_laurent(&a, &f);
        assert_eq!(v, json!({"-2": [0, 1], "3": [1, 0]}));
        assert_eq!(decode_laurent(&v, &f, "").unwrap(), a);
    }

    #[test]
    fn page_roundtrip() {
        let page = SpectralPage::new(2, 1, [((0, 1), 1), ((2, 0), 3)]).unwrap();
        let v = encode_page(&page);
        assert_eq!(v, json!({"M": 2, "N": 1, "dims": {"0,1": 1, "2,0": 3}}));
        assert_eq!(decode_page(&v).unwrap(), page);
    }

    #[test]
    fn tower_roundtrip_keeps_empty_shapes() {
        let f = Field::prime(3).unwrap();
        let t = TwistedTower::truncated(vec![0, 2], vec![SemilinearMap::new(Mat::zeros(0, 2), 1)]).unwrap();
        let v = encode_twisted_tower(&t, &f);
        assert_eq!(decode_twisted_tower(&v, &f, "").unwrap(), t);
    }

    #[test]
    fn errors_carry_paths() {
        let f = Field::prime(2).unwrap();
        let v = json!([[{"0": 1}, {"x": 1}]]);
        let e = decode_laurent_matrix(&v, &f, "bundle").unwrap_err();
        assert!(e.to_string().contains("bundle[0][1]"), "{e}");
        let e = parse("{\n  \"a\": [1,\n}").unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
    }
}
