use super::{build_poset, LatticeFamily, MeetSemilattice};
use crate::error::{Error, Result};

/// Parses a Hasse-diagram description.
///
/// ```text
/// # diamond
/// elem 0
/// elem a
/// edge 0 a
/// ```
///
/// Implicit families are declared with a single `family divisor d=2` or
/// `family min d=2` record instead of `elem`/`edge` records.
pub fn parse_hasse(text: &str) -> Result<LatticeFamily> {
    let mut elems: Vec<String> = Vec::new();
    let mut edges: Vec<(String, String)> = Vec::new();
    let mut family: Option<LatticeFamily> = None;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse { line: lineno + 1, message };
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            ["elem", id] => elems.push(id.to_string()),
            ["edge", lo, hi] => edges.push((lo.to_string(), hi.to_string())),
            ["family", kind, rest @ ..] => {
                if family.is_some() {
                    return Err(err("duplicate family record".into()));
                }
                let mut d = 1usize;
                for r in rest {
                    match r.strip_prefix("d=").map(str::parse::<usize>) {
                        Some(Ok(v)) if v >= 1 => d = v,
                        _ => return Err(err(format!("bad family parameter `{r}`"))),
                    }
                }
                family = Some(match *kind {
                    "divisor" => LatticeFamily::divisor(d),
                    "min" => LatticeFamily::min(d),
                    other => return Err(err(format!("unknown family `{other}`"))),
                });
            }
            _ => return Err(err(format!("unrecognized record `{line}`"))),
        }
    }

    match family {
        Some(f) if elems.is_empty() && edges.is_empty() => Ok(f),
        Some(_) => Err(Error::Parse {
            line: 0,
            message: "a family record cannot be mixed with elem/edge records".into(),
        }),
        None => {
            let poset = build_poset(&elems, &edges)?;
            Ok(LatticeFamily::explicit(MeetSemilattice::new(poset)?))
        }
    }
}
