//! CSV and JSON formats for matrices, decompositions, verdicts and value
//! tables. Rationals are always written exactly as `p/q` (or `p`).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::meet_matrix::{Decomposition, MeetMatrix};
use crate::pd::PdVerdict;
use crate::poset::{Element, LatticeFamily};
use crate::{parse_rational, Rational};

pub const SCHEMA: u32 = 1;

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::Parse { line, message: e.to_string() }
}

fn write_rows<I, R>(rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    for r in rows {
        w.write_record(r).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 output")
}

/// Row-major CSV of the matrix entries.
pub fn matrix_csv(m: &MeetMatrix) -> String {
    let n = m.dim();
    write_rows((0..n).map(|i| m.matrix.row(i).iter().map(ToString::to_string).collect::<Vec<_>>()))
}

#[derive(Serialize, Deserialize)]
struct MatrixDoc {
    schema: u32,
    labels: Vec<Element>,
    order_map: Vec<usize>,
    entries: Vec<Vec<String>>,
}

/// JSON document with the subset labels, the lexicographic axis lengths and
/// the entries.
pub fn matrix_json(m: &MeetMatrix, order_map: &[usize]) -> Value {
    let n = m.dim();
    let doc = MatrixDoc {
        schema: SCHEMA,
        labels: m.subset.members().to_vec(),
        order_map: order_map.to_vec(),
        entries: (0..n).map(|i| m.matrix.row(i).iter().map(ToString::to_string).collect()).collect(),
    };
    serde_json::to_value(doc).expect("serializable")
}

fn strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

/// The factors as 0/1 rows with their subset labels, `Λ`, the order map and
/// the reconstruction residual.
pub fn decomposition_json(d: &Decomposition, residual: &Rational) -> Value {
    let factors: Vec<Value> = d
        .factors
        .iter()
        .zip(&d.subsets)
        .map(|(e, s)| {
            let rows: Vec<Vec<u8>> = (0..e.dim()).map(|i| (0..e.dim()).map(|j| e.get(i, j) as u8).collect()).collect();
            json!({ "labels": s.members(), "entries": rows })
        })
        .collect();
    let multi: Vec<Vec<usize>> = (0..d.order_map.len()).map(|i| d.order_map.multi(i)).collect();
    json!({
        "schema": SCHEMA,
        "factors": factors,
        "diag": strings(&d.diag),
        "order_map": { "dims": d.order_map.dims(), "multi_indices": multi },
        "signature": d.signature(),
        "residual": residual.to_string(),
    })
}

pub fn verdict_json(v: &PdVerdict) -> Value {
    let mut out = serde_json::to_value(v).expect("serializable");
    out.as_object_mut().expect("struct").insert("schema".into(), json!(SCHEMA));
    out
}

fn coords(e: &Element) -> Vec<String> {
    match e.as_point() {
        Some(p) => p.iter().map(ToString::to_string).collect(),
        None => vec![e.to_string()],
    }
}

/// `i1,...,id,value` rows with a header line.
pub fn table_csv<'a>(arity: usize, rows: impl IntoIterator<Item = (&'a Element, &'a Rational)>) -> String {
    let header: Vec<String> = (1..=arity).map(|i| format!("i{i}")).chain(["value".to_string()]).collect();
    let body = rows.into_iter().map(|(e, v)| {
        let mut r = coords(e);
        r.push(v.to_string());
        r
    });
    write_rows(std::iter::once(header).chain(body))
}

fn parse_key(fields: &[&str], family: &LatticeFamily) -> std::result::Result<Element, String> {
    if family.is_integer() {
        let p: Vec<u64> = fields
            .iter()
            .map(|f| f.trim().parse::<u64>().map_err(|_| format!("`{f}` is not a positive integer")))
            .collect::<std::result::Result<_, _>>()?;
        Ok(Element::point(&p))
    } else {
        match fields {
            [id] => Ok(Element::label(id.trim())),
            _ => Err("explicit lattices take `id,value` rows".into()),
        }
    }
}

/// Reads a value table for `family`: CSV rows `i1,...,id,value` (`id,value`
/// for explicit lattices, optional header, `#` comments), or a matrix JSON
/// document, whose entry `(i, j)` is the value at `x_i ∧ x_j`.
pub fn read_value_table(text: &str, family: &LatticeFamily) -> Result<HashMap<Element, Rational>> {
    if text.trim_start().starts_with('{') {
        return read_matrix_json(text, family);
    }
    let arity = if family.is_integer() { family.arity() } else { 1 };
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = HashMap::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(k + 1);
        let fields: Vec<&str> = rec.iter().collect();
        if k == 0 && fields.first().is_some_and(|f| f.starts_with('i') || *f == "id") {
            continue;
        }
        if fields.len() != arity + 1 {
            return Err(Error::Parse { line, message: format!("expected {} fields, found {}", arity + 1, fields.len()) });
        }
        let key = parse_key(&fields[..arity], family).map_err(|message| Error::Parse { line, message })?;
        if !family.contains(&key) {
            return Err(Error::UnknownElement(key.to_string()));
        }
        let value = parse_rational(fields[arity]).map_err(|e| Error::Parse { line, message: e.to_string() })?;
        if out.insert(key.clone(), value).is_some() {
            return Err(Error::DuplicateElement(key.to_string()));
        }
    }
    if out.is_empty() {
        return Err(Error::Parse { line: 0, message: "value table is empty".into() });
    }
    Ok(out)
}

fn read_matrix_json(text: &str, family: &LatticeFamily) -> Result<HashMap<Element, Rational>> {
    let doc: MatrixDoc =
        serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })?;
    let n = doc.labels.len();
    if doc.entries.len() != n || doc.entries.iter().any(|r| r.len() != n) {
        return Err(Error::Parse { line: 0, message: "entries do not match the labels".into() });
    }
    if let Some(bad) = doc.labels.iter().find(|e| !family.contains(e)) {
        return Err(Error::UnknownElement(bad.to_string()));
    }
    let mut out = HashMap::new();
    for i in 0..n {
        for j in 0..n {
            let key = family.meet(&doc.labels[i], &doc.labels[j]);
            let v = parse_rational(&doc.entries[i][j])?;
            match out.get(&key) {
                Some(old) if old != &v => {
                    return Err(Error::Parse { line: 0, message: format!("conflicting values at {key}") })
                }
                _ => {
                    out.insert(key, v);
                }
            }
        }
    }
    Ok(out)
}
