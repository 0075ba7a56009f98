//! JSON formats. Every file carries `schema_version`; indices are 1-based.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::cone_complex::LatticeVector;
use crate::error::{MirrorError, Result};
use crate::scattering2d::{Mode, Wall, WallStructure};
use crate::snc_pair::{Pair, PairDescriptor};
use crate::theta_algebra::InvariantTable;
use crate::trop_types::TropicalType;
use crate::trunc_ring::{CurveClass, LaurentElement, Mono, Q};

pub const SCHEMA_VERSION: u32 = 1;

fn parse_value(text: &str) -> Result<Value> {
    let v: Value = serde_json::from_str(text).map_err(|e| MirrorError::Parse(e.to_string()))?;
    let found = v.get("schema_version").and_then(Value::as_u64).ok_or_else(|| MirrorError::Parse("missing schema_version".into()))?;
    if found != SCHEMA_VERSION as u64 {
        return Err(MirrorError::SchemaVersion { found: found as u32, expected: SCHEMA_VERSION });
    }
    Ok(v)
}

fn from_value<T: for<'de> Deserialize<'de>>(v: Value) -> Result<T> {
    serde_json::from_value(v).map_err(|e| MirrorError::Parse(e.to_string()))
}

fn with_version<T: Serialize>(body: &T) -> String {
    let mut v = serde_json::to_value(body).expect("serializable");
    let mut out = serde_json::Map::new();
    out.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
    if let Value::Object(m) = &mut v {
        out.extend(std::mem::take(m));
    }
    serde_json::to_string_pretty(&Value::Object(out)).expect("serializable") + "\n"
}

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| MirrorError::Parse(format!("{}: {e}", path.display())))
}

pub fn parse_pair(text: &str) -> Result<PairDescriptor> {
    let mut v = parse_value(text)?;
    v.as_object_mut().expect("object").remove("schema_version");
    let d: PairDescriptor = from_value(v)?;
    d.validate()?;
    Ok(d)
}

pub fn serialize_pair(d: &PairDescriptor) -> String {
    with_version(d)
}

pub fn load_pair(path: &Path) -> Result<Pair> {
    Pair::new(parse_pair(&read_file(path)?)?)
}

mod qstr {
    use super::Q;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&q.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        s.trim().parse::<Q>().map_err(|_| serde::de::Error::custom(format!("bad rational {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableEntry {
    pub p: Vec<i64>,
    pub q: Vec<i64>,
    pub r: Vec<i64>,
    pub beta: Vec<i64>,
    #[serde(with = "qstr")]
    pub n: Q,
}

#[derive(Serialize, Deserialize)]
struct TableFile {
    entries: Vec<TableEntry>,
}

pub fn parse_table(text: &str, d: &PairDescriptor) -> Result<InvariantTable> {
    let f: TableFile = from_value(parse_value(text)?)?;
    let mut t = InvariantTable::new();
    for e in f.entries {
        t.insert(d, &LatticeVector(e.p), &LatticeVector(e.q), &LatticeVector(e.r), &CurveClass(e.beta), e.n)?;
    }
    Ok(t)
}

pub fn table_entries(t: &InvariantTable) -> Vec<TableEntry> {
    t.entries()
        .map(|((p, q, r, b), n)| TableEntry { p: p.0.clone(), q: q.0.clone(), r: r.0.clone(), beta: b.0.clone(), n: n.clone() })
        .collect()
}

/// One entry per line.
pub fn serialize_table(t: &InvariantTable) -> String {
    let lines: Vec<String> = table_entries(t).iter().map(|e| format!("    {}", serde_json::to_string(e).expect("serializable"))).collect();
    if lines.is_empty() {
        return format!("{{\n  \"schema_version\": {SCHEMA_VERSION},\n  \"entries\": []\n}}\n");
    }
    format!("{{\n  \"schema_version\": {SCHEMA_VERSION},\n  \"entries\": [\n{}\n  ]\n}}\n", lines.join(",\n"))
}

pub fn load_table(path: &Path, d: &PairDescriptor) -> Result<InvariantTable> {
    parse_table(&read_file(path)?, d)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub m: Vec<i64>,
    pub beta: Vec<i64>,
    #[serde(with = "qstr")]
    pub c: Q,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WallJson {
    pub direction: Vec<i64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub line: bool,
    /// Terms of `f - 1`.
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeJson {
    Planar,
    Looijenga,
}

#[derive(Serialize, Deserialize)]
struct WallsFile {
    mode: ModeJson,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    class_names: Vec<String>,
    walls: Vec<WallJson>,
}

pub fn wall_to_json(w: &Wall) -> WallJson {
    let terms = w
        .function
        .terms()
        .filter(|(k, _)| k.beta.iter().any(|&b| b != 0) || k.m.iter().any(|&x| x != 0))
        .map(|(k, c)| TermJson { m: k.m.clone(), beta: k.beta.clone(), c: c.clone() })
        .collect();
    WallJson { direction: w.direction.clone(), line: w.line, terms }
}

pub fn wall_from_json(w: &WallJson, rank: usize) -> Result<Wall> {
    let dim = w.direction.len();
    let mut f = LaurentElement::one_laurent(rank, dim);
    for t in &w.terms {
        if t.beta.len() != rank || t.m.len() != dim {
            return Err(MirrorError::Parse(format!("wall term has the wrong shape: {t:?}")));
        }
        f.add_term(Mono::new(t.beta.clone(), t.m.clone()), t.c.clone());
    }
    Wall::new(w.direction.clone(), w.line, f)
}

/// Planar files need `class_names`; looijenga files need the pair.
pub fn parse_walls(text: &str, pair: Option<&Pair>) -> Result<WallStructure> {
    let f: WallsFile = from_value(parse_value(text)?)?;
    match f.mode {
        ModeJson::Planar => {
            let rank = f.class_names.len();
            if rank == 0 {
                return Err(MirrorError::Parse("planar structures need class_names".into()));
            }
            let walls = f.walls.iter().map(|w| wall_from_json(w, rank)).collect::<Result<Vec<_>>>()?;
            WallStructure::planar(rank, f.class_names, walls)
        }
        ModeJson::Looijenga => {
            let pair = pair.ok_or_else(|| MirrorError::Precondition("looijenga structures need a pair".into()))?;
            let walls = f.walls.iter().map(|w| wall_from_json(w, pair.rank())).collect::<Result<Vec<_>>>()?;
            WallStructure::looijenga(pair, walls)
        }
    }
}

pub fn serialize_walls(s: &WallStructure) -> String {
    let mode = match s.mode {
        Mode::Planar => ModeJson::Planar,
        Mode::Looijenga => ModeJson::Looijenga,
    };
    let class_names = if s.mode == Mode::Planar { s.class_names.clone() } else { vec![] };
    with_version(&WallsFile { mode, class_names, walls: s.walls.iter().map(wall_to_json).collect() })
}

pub fn load_walls(path: &Path, pair: Option<&Pair>) -> Result<WallStructure> {
    parse_walls(&read_file(path)?, pair)
}

pub fn parse_type(text: &str) -> Result<TropicalType> {
    let mut v = parse_value(text)?;
    v.as_object_mut().expect("object").remove("schema_version");
    let t: TropicalType = from_value(v)?;
    t.validate()?;
    Ok(t)
}

pub fn serialize_type(t: &TropicalType) -> String {
    with_version(t)
}

pub fn load_type(path: &Path) -> Result<TropicalType> {
    parse_type(&read_file(path)?)
}
