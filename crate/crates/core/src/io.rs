//! JSON file formats and dump emitters.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::algebra::FiniteAlgebra;
use crate::error::{Error, Result};
use crate::free::FreeAlgebra;
use crate::geometry::ClosedLattice;
use crate::terms::{Signature, Term};
use crate::variety::VarietySpec;
use crate::verbal::WordSystem;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    signature: Signature,
    #[serde(default)]
    algebras: Vec<RawAlgebra>,
    #[serde(default)]
    identities: Vec<[String; 2]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAlgebra {
    name: String,
    size: usize,
    ops: BTreeMap<String, Value>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWords {
    words: BTreeMap<String, String>,
}

/// Contents of an algebra file.
#[derive(Debug, Clone)]
pub struct AlgebraFile {
    pub signature: Arc<Signature>,
    pub algebras: Vec<FiniteAlgebra>,
    pub identities: Vec<(Term, Term)>,
}

fn flatten(v: &Value, arity: usize, size: usize, out: &mut Vec<usize>) -> Result<()> {
    if arity == 0 {
        let n = v
            .as_u64()
            .ok_or_else(|| Error::InvalidTable(format!("expected an element, found {v}")))?;
        out.push(n as usize);
        return Ok(());
    }
    let rows = v
        .as_array()
        .ok_or_else(|| Error::InvalidTable(format!("expected a row of {size}, found {v}")))?;
    if rows.len() != size {
        return Err(Error::InvalidTable(format!(
            "row has {} entries, expected {size}",
            rows.len()
        )));
    }
    for r in rows {
        flatten(r, arity - 1, size, out)?;
    }
    Ok(())
}

fn nest(values: &[usize], arity: usize, size: usize) -> Value {
    if arity == 0 {
        return Value::from(values[0]);
    }
    let stride = values.len() / size;
    Value::Array(
        values
            .chunks(stride)
            .map(|c| nest(c, arity - 1, size))
            .collect(),
    )
}

pub fn parse_algebra_file(text: &str) -> Result<AlgebraFile> {
    let raw: RawFile = serde_json::from_str(text)?;
    let signature = Arc::new(raw.signature);
    let mut algebras = Vec::with_capacity(raw.algebras.len());
    for a in raw.algebras {
        for name in a.ops.keys() {
            if signature.index_of(name).is_none() {
                return Err(Error::UnknownSymbol(name.clone()));
            }
        }
        let mut tables = Vec::with_capacity(signature.len());
        for op in 0..signature.len() {
            let name = signature.name(op);
            let v = a.ops.get(name).ok_or_else(|| {
                Error::InvalidTable(format!("`{}` has no table for `{name}`", a.name))
            })?;
            let mut values = Vec::new();
            flatten(v, signature.arity(op), a.size, &mut values)
                .map_err(|e| Error::InvalidTable(format!("`{}`, `{name}`: {e}", a.name)))?;
            tables.push(values);
        }
        algebras.push(FiniteAlgebra::new(
            a.name,
            signature.clone(),
            a.size,
            tables,
        )?);
    }
    let identities = raw
        .identities
        .iter()
        .map(|[l, r]| {
            Ok((
                Term::parse(l, &signature, usize::MAX)?,
                Term::parse(r, &signature, usize::MAX)?,
            ))
        })
        .collect::<Result<_>>()?;
    Ok(AlgebraFile {
        signature,
        algebras,
        identities,
    })
}

/// A variety file is an algebra file whose algebras generate the variety.
pub fn parse_variety(text: &str) -> Result<VarietySpec> {
    let f = parse_algebra_file(text)?;
    if f.algebras.is_empty() {
        return Err(Error::Input("variety file lists no generators".into()));
    }
    VarietySpec::new(f.algebras, f.identities)
}

/// Algebras over the variety's signature.
pub fn parse_algebras(text: &str, variety: &VarietySpec) -> Result<Vec<FiniteAlgebra>> {
    let f = parse_algebra_file(text)?;
    if *f.signature != **variety.signature() {
        return Err(Error::SignatureMismatch);
    }
    let sig = variety.signature();
    f.algebras
        .into_iter()
        .map(|a| {
            let tables = a.tables().iter().map(|t| t.values().to_vec()).collect();
            FiniteAlgebra::new(a.name(), sig.clone(), a.size(), tables)
        })
        .collect()
}

pub fn parse_words(text: &str, signature: &Arc<Signature>) -> Result<WordSystem> {
    let raw: RawWords = serde_json::from_str(text)?;
    WordSystem::parse(
        signature.clone(),
        raw.words.iter().map(|(k, v)| (k.as_str(), v.as_str())),
    )
}

pub fn algebra_file_json(signature: &Signature, algebras: &[FiniteAlgebra]) -> Value {
    let algs: Vec<Value> = algebras
        .iter()
        .map(|a| {
            let ops: serde_json::Map<String, Value> = (0..signature.len())
                .map(|op| {
                    (
                        signature.name(op).to_string(),
                        nest(a.table(op).values(), signature.arity(op), a.size()),
                    )
                })
                .collect();
            serde_json::json!({"name": a.name(), "size": a.size(), "ops": ops})
        })
        .collect();
    serde_json::json!({"signature": signature, "algebras": algs})
}

pub fn words_json(ws: &WordSystem) -> Value {
    let words: BTreeMap<String, String> = ws.to_texts().into_iter().collect();
    serde_json::json!({ "words": words })
}

#[derive(Debug, Clone, Serialize)]
pub struct FreeElement {
    pub index: usize,
    pub witness: String,
    pub depth: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct FreeDump {
    pub variety: String,
    pub rank: usize,
    pub size: usize,
    pub generators: Vec<usize>,
    pub elements: Vec<FreeElement>,
}

impl FreeDump {
    pub fn new(b: &FreeAlgebra) -> FreeDump {
        let sig = b.algebra().signature();
        FreeDump {
            variety: b.variety_fingerprint().to_string(),
            rank: b.rank(),
            size: b.size(),
            generators: b.generators().to_vec(),
            elements: (0..b.size())
                .map(|e| FreeElement {
                    index: e,
                    witness: b.witness(e).to_text(sig),
                    depth: b.depth(e),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CongruenceDump {
    pub index: usize,
    pub partition: String,
    pub blocks: Vec<Vec<String>>,
    pub points: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct LatticeDump {
    pub algebra: String,
    pub rank: usize,
    pub free_size: usize,
    pub bottom: usize,
    pub top: usize,
    pub congruences: Vec<CongruenceDump>,
    pub hasse: Vec<[usize; 2]>,
}

impl LatticeDump {
    pub fn new(b: &FreeAlgebra, l: &ClosedLattice) -> LatticeDump {
        LatticeDump {
            algebra: l.algebra().to_string(),
            rank: l.rank(),
            free_size: b.size(),
            bottom: l.bottom(),
            top: l.top(),
            congruences: l
                .elements()
                .iter()
                .enumerate()
                .map(|(i, c)| CongruenceDump {
                    index: i,
                    partition: c.partition.encode(),
                    blocks: crate::equivalence::witness_blocks(b, &c.partition),
                    points: c.points.len(),
                })
                .collect(),
            hasse: l.hasse().iter().map(|&(a, b)| [a, b]).collect(),
        }
    }

    /// Hasse diagram, least element at the bottom.
    pub fn to_dot(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "digraph \"Cl_{}(W({}))\" {{", self.algebra, self.rank);
        s.push_str("  rankdir=BT;\n  node [shape=box];\n");
        for c in &self.congruences {
            let label: Vec<String> = c
                .blocks
                .iter()
                .map(|b| format!("{{{}}}", b.join(", ")))
                .collect();
            let _ = writeln!(
                s,
                "  n{} [label=\"{}\"];",
                c.index,
                escape(&label.join(" | "))
            );
        }
        for [a, b] in &self.hasse {
            let _ = writeln!(s, "  n{a} -> n{b};");
        }
        s.push_str("}\n");
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "Cl_{}(W({})): {} closed congruences on {} elements\n",
            self.algebra,
            self.rank,
            self.congruences.len(),
            self.free_size
        );
        for c in &self.congruences {
            let blocks: Vec<String> = c
                .blocks
                .iter()
                .map(|b| format!("{{{}}}", b.join(", ")))
                .collect();
            let _ = writeln!(
                s,
                "  [{}] {}  ({} points)",
                c.index,
                blocks.join(" | "),
                c.points
            );
        }
        for [a, b] in &self.hasse {
            let _ = writeln!(s, "  {a} < {b}");
        }
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::geometry::PointSpace;

    const S2_FILE: &str = r#"{"signature":[{"name":"meet","arity":2}], "algebras":[{"name":"S2","size":2,"ops":{"meet":[[0,0],[0,1]]}}]}"#;

    #[test]
    fn parses_the_documented_example() {
        let f = parse_algebra_file(S2_FILE).unwrap();
        assert_eq!(f.algebras.len(), 1);
        assert!(f.algebras[0].same_tables(&corpus::s2()));
    }

    #[test]
    fn round_trips_group_tables() {
        let sig = corpus::group_signature();
        let algs = vec![corpus::s3(), corpus::z2()];
        let text = algebra_file_json(&sig, &algs).to_string();
        let f = parse_algebra_file(&text).unwrap();
        for (a, b) in f.algebras.iter().zip(&algs) {
            assert!(a.same_tables(b));
            assert_eq!(a.name(), b.name());
        }
        // Constants are scalars.
        assert!(text.contains(r#""e":0"#));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(parse_algebra_file("{"), Err(Error::Json(_))));
        let wrong_row = S2_FILE.replace("[[0,0],[0,1]]", "[[0,0],[0]]");
        assert!(matches!(
            parse_algebra_file(&wrong_row),
            Err(Error::InvalidTable(_))
        ));
        let unknown = S2_FILE.replace(
            r#""meet":[[0,0],[0,1]]"#,
            r#""meet":[[0,0],[0,1]],"join":[[0,1],[1,1]]"#,
        );
        assert!(matches!(
            parse_algebra_file(&unknown),
            Err(Error::UnknownSymbol(_))
        ));
        let out_of_range = S2_FILE.replace("[[0,0],[0,1]]", "[[0,0],[0,2]]");
        assert!(parse_algebra_file(&out_of_range).is_err());
        let none = r#"{"signature":[{"name":"meet","arity":2}]}"#;
        assert!(matches!(parse_variety(none), Err(Error::Input(_))));
    }

    #[test]
    fn algebras_must_match_the_variety() {
        let v = parse_variety(S2_FILE).unwrap();
        let groups = algebra_file_json(&corpus::group_signature(), &[corpus::z2()]).to_string();
        assert!(matches!(
            parse_algebras(&groups, &v),
            Err(Error::SignatureMismatch)
        ));
        assert_eq!(parse_algebras(S2_FILE, &v).unwrap().len(), 1);
    }

    #[test]
    fn declared_identities() {
        let text = r#"{"signature":[{"name":"meet","arity":2}],
            "algebras":[{"name":"S2","size":2,"ops":{"meet":[[0,0],[0,1]]}}],
            "identities":[["meet(x1,x2)","meet(x2,x1)"]]}"#;
        let v = parse_variety(text).unwrap();
        assert_eq!(v.identities().len(), 1);
        let bad = text.replace("meet(x2,x1)", "x1");
        assert!(matches!(parse_variety(&bad), Err(Error::Input(_))));
    }

    #[test]
    fn words_file() {
        let sig = corpus::group_signature();
        let ws = parse_words(
            r#"{"words": {"mul": "mul(x2,x1)", "inv": "inv(x1)", "e": "e"}}"#,
            &sig,
        )
        .unwrap();
        assert_eq!(ws.word(0).to_text(&sig), "mul(x2,x1)");
        let back = parse_words(&words_json(&ws).to_string(), &sig).unwrap();
        assert_eq!(back, ws);
        assert!(parse_words(r#"{"words": {"mul": "mul(x2,x1)"}}"#, &sig).is_err());
    }

    #[test]
    fn dumps() {
        let v = parse_variety(S2_FILE).unwrap();
        let b = v.free(2, 100).unwrap();
        let d = FreeDump::new(&b);
        assert_eq!(d.size, 3);
        let w: Vec<&str> = d.elements.iter().map(|e| e.witness.as_str()).collect();
        assert_eq!(w, ["x1", "x2", "meet(x1,x2)"]);
        let l = PointSpace::new(b.clone(), &corpus::s2(), 100)
            .unwrap()
            .closed_lattice();
        let ld = LatticeDump::new(&b, &l);
        let dot = ld.to_dot();
        assert_eq!(dot.matches(" [label=").count(), 4);
        assert_eq!(dot.matches(" -> ").count(), 4);
        assert!(dot.contains("{x1, meet(x1,x2)} | {x2}"));
    }
}
