//! JSON and CSV formats.
//!
//! Big integers are written as JSON numbers when they fit in 64 bits and as
//! decimal strings otherwise; both forms are accepted on input. Resolution
//! class indices are 0-based positions in the `blocks` array of the file.

use crate::constructor::IngredientBundle;
use crate::design::{Block, Design, DesignError, Resolution, ResolutionError};
use crate::generators::{complete_design, round_robin_one_factorization, GenError};
use crate::solver::{
    Constructible, DedupMode, PairResolution, PairSpec, ProblemSpec, Scenario, SolutionRecord, SolverError,
};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error(transparent)]
    Resolution(#[from] ResolutionError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Generator(#[from] GenError),
}

/// A big integer in JSON form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Big(pub BigInt);

impl Serialize for Big {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0.to_i64() {
            Some(x) => s.serialize_i64(x),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Big {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            I(i64),
            U(u64),
            S(String),
        }
        match Raw::deserialize(d).map_err(|_| serde::de::Error::custom("expected an integer or a decimal string"))? {
            Raw::I(x) => Ok(Big(x.into())),
            Raw::U(x) => Ok(Big(x.into())),
            Raw::S(s) => s
                .parse()
                .map(Big)
                .map_err(|_| serde::de::Error::custom(format!("not an integer: {s:?}"))),
        }
    }
}

fn big_map(m: &BTreeMap<u32, BigInt>) -> BTreeMap<u32, Big> {
    m.iter().map(|(&k, v)| (k, Big(v.clone()))).collect()
}

fn unbig_map(m: BTreeMap<u32, Big>) -> BTreeMap<u32, BigInt> {
    m.into_iter().map(|(k, v)| (k, v.0)).collect()
}

pub fn read_file(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), IoError> {
    std::fs::write(path, contents).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct DesignFile {
    v: u32,
    k: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda: Option<Big>,
    blocks: Vec<Block>,
}

/// Declared metadata of a design file; never trusted by the verifiers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DesignMeta {
    pub t: Option<u32>,
    pub lambda: Option<BigInt>,
}

pub fn design_to_json(d: &Design, meta: &DesignMeta) -> String {
    let file = DesignFile {
        v: d.v(),
        k: d.k(),
        t: meta.t,
        lambda: meta.lambda.clone().map(Big),
        blocks: d.blocks().to_vec(),
    };
    serde_json::to_string(&file).expect("designs serialize") + "\n"
}

pub fn design_from_json(text: &str) -> Result<(Design, DesignMeta), IoError> {
    let file: DesignFile = serde_json::from_str(text)?;
    design_from_file(file)
}

fn design_from_file(file: DesignFile) -> Result<(Design, DesignMeta), IoError> {
    let meta = DesignMeta {
        t: file.t,
        lambda: file.lambda.map(|b| b.0),
    };
    Ok((Design::new(file.v, file.k, file.blocks)?, meta))
}

#[derive(Debug, Serialize, Deserialize)]
struct ResolutionFile {
    v: u32,
    k: u32,
    s: u32,
    tau: u64,
    blocks: Vec<Block>,
    classes: Vec<Vec<usize>>,
}

pub fn resolution_to_json(r: &Resolution) -> String {
    let file = ResolutionFile {
        v: r.design.v(),
        k: r.design.k(),
        s: r.s,
        tau: r.tau,
        blocks: r.design.blocks().to_vec(),
        classes: r.classes.clone(),
    };
    serde_json::to_string(&file).expect("resolutions serialize") + "\n"
}

pub fn resolution_from_json(text: &str) -> Result<Resolution, IoError> {
    let file: ResolutionFile = serde_json::from_str(text)?;
    resolution_from_file(file)
}

fn resolution_from_file(f: ResolutionFile) -> Result<Resolution, IoError> {
    Ok(Resolution::from_raw(f.v, f.k, f.blocks, f.classes, f.s, f.tau)?)
}

#[derive(Debug, Serialize, Deserialize)]
#[allow(non_snake_case)]
struct PairFile {
    i: u32,
    #[serde(default)]
    in_R: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    s_left: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    s_right: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    N: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda_cap_left: Option<Big>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda_cap_right: Option<Big>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ProblemFile {
    #[serde(default)]
    name: String,
    t: u32,
    k: u32,
    v1: u32,
    v2: u32,
    #[serde(default)]
    pairs: Vec<PairFile>,
    #[serde(default)]
    dedup: DedupMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_m: Option<Big>,
}

/// Only pairs that differ from a plain pair are written.
pub fn problem_to_json(spec: &ProblemSpec) -> String {
    let pairs = spec
        .pairs
        .iter()
        .filter(|p| p.resolution.is_some() || p.cap_left.is_some() || p.cap_right.is_some())
        .map(|p| PairFile {
            i: p.i,
            in_R: p.in_r(),
            s_left: p.resolution.map(|r| r.s_left),
            s_right: p.resolution.map(|r| r.s_right),
            N: p.resolution.map(|r| r.n),
            lambda_cap_left: p.cap_left.clone().map(Big),
            lambda_cap_right: p.cap_right.clone().map(Big),
        })
        .collect();
    let Scenario { t, k, v1, v2 } = spec.scenario;
    let file = ProblemFile {
        name: spec.name.clone(),
        t,
        k,
        v1,
        v2,
        pairs,
        dedup: spec.dedup,
        max_m: spec.max_m.clone().map(Big),
    };
    serde_json::to_string_pretty(&file).expect("problems serialize") + "\n"
}

pub fn problem_from_json(text: &str) -> Result<ProblemSpec, IoError> {
    let file: ProblemFile = serde_json::from_str(text)?;
    let mut listed = Vec::new();
    for p in file.pairs {
        let resolution = match (p.in_R, p.s_left, p.s_right, p.N) {
            (true, Some(s_left), Some(s_right), Some(n)) => Some(PairResolution { s_left, s_right, n }),
            (true, ..) => {
                return Err(IoError::Format(format!("pair {} is in R but lacks s_left, s_right or N", p.i)));
            }
            (false, None, None, None) => None,
            (false, ..) => {
                return Err(IoError::Format(format!("pair {} has resolution data but in_R is false", p.i)));
            }
        };
        listed.push(PairSpec {
            i: p.i,
            resolution,
            cap_left: p.lambda_cap_left.map(|b| b.0),
            cap_right: p.lambda_cap_right.map(|b| b.0),
        });
    }
    let scenario = Scenario {
        t: file.t,
        k: file.k,
        v1: file.v1,
        v2: file.v2,
    };
    let mut spec = ProblemSpec::new(file.name, scenario, listed)?;
    spec.dedup = file.dedup;
    spec.max_m = file.max_m.map(|b| b.0);
    spec.validate()?;
    Ok(spec)
}

#[derive(Debug, Serialize, Deserialize)]
struct SolutionLine {
    m: Big,
    lambda: Big,
    u: Vec<u8>,
    z: BTreeMap<u32, u64>,
    lambda_left: BTreeMap<u32, Big>,
    lambda_right: BTreeMap<u32, Big>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    constructible: Option<Constructible>,
    #[serde(default = "one")]
    orbit: u32,
}

fn one() -> u32 {
    1
}

pub fn solution_to_json(rec: &SolutionRecord) -> String {
    let line = SolutionLine {
        m: Big(rec.m.clone()),
        lambda: Big(rec.lambda.clone()),
        u: rec.u.iter().map(|&b| b as u8).collect(),
        z: rec.z.clone(),
        lambda_left: big_map(&rec.lambda_left),
        lambda_right: big_map(&rec.lambda_right),
        constructible: rec.constructible,
        orbit: rec.orbit,
    };
    serde_json::to_string(&line).expect("solutions serialize")
}

pub fn solution_from_json(text: &str) -> Result<SolutionRecord, IoError> {
    let line: SolutionLine = serde_json::from_str(text)?;
    let u = line
        .u
        .iter()
        .map(|&b| match b {
            0 => Ok(false),
            1 => Ok(true),
            _ => Err(IoError::Format(format!("u entries must be 0 or 1, got {b}"))),
        })
        .collect::<Result<_, _>>()?;
    Ok(SolutionRecord {
        lambda: line.lambda.0,
        m: line.m.0,
        u,
        z: line.z,
        lambda_left: unbig_map(line.lambda_left),
        lambda_right: unbig_map(line.lambda_right),
        constructible: line.constructible,
        orbit: line.orbit,
    })
}

pub fn solutions_to_jsonl(records: &[SolutionRecord]) -> String {
    records.iter().map(|r| solution_to_json(r) + "\n").collect()
}

pub fn solutions_from_jsonl(text: &str) -> Result<Vec<SolutionRecord>, IoError> {
    text.lines().filter(|l| !l.trim().is_empty()).map(solution_from_json).collect()
}

/// CSV view of solutions: `m`, then `z{i}` of pairs in R and `u{i}` of
/// trivial pairs, then `lambda{j}` and `lambdabar{j}`. The `lambdabar`
/// columns are dropped when every record has equal left and right indices.
pub fn emit_table(spec: &ProblemSpec, records: &[SolutionRecord]) -> String {
    let left = spec.left_columns();
    let right = spec.right_columns();
    let symmetric = left == right && records.iter().all(|r| r.lambda_left == r.lambda_right);
    let mut header = vec!["m".to_string()];
    header.extend(spec.resolved_pairs().iter().map(|i| format!("z{i}")));
    header.extend(spec.trivial_pairs().iter().map(|i| format!("u{i}")));
    header.extend(left.iter().map(|j| format!("lambda{j}")));
    if !symmetric {
        header.extend(right.iter().map(|j| format!("lambdabar{j}")));
    }
    let keep = header.len() - 1;
    let mut sorted: Vec<&SolutionRecord> = records.iter().collect();
    sorted.sort_by_cached_key(|r| (r.m.clone(), r.table_row(spec)));
    let mut out = header.join(",") + "\n";
    for r in sorted {
        let row = r.table_row(spec);
        let _ = write!(out, "{}", r.m);
        for cell in &row[..keep] {
            let _ = write!(out, ",{cell}");
        }
        out.push('\n');
    }
    out
}

/// Reads an ingredient bundle. Entries are inline design or resolution
/// objects, paths relative to `base`, or the generator names `"complete"`
/// (designs) and `"round-robin"` (resolutions).
///
/// ```json
/// {"left": {"1": "complete"}, "right": {"3": "complete"},
///  "resolutions": {"2": {"left": "round-robin", "right": "k6.json"}}}
/// ```
pub fn bundle_from_json(text: &str, spec: &ProblemSpec, base: &Path, budget: u64) -> Result<IngredientBundle, IoError> {
    let root: Value = serde_json::from_str(text)?;
    let sc = spec.scenario;
    let mut bundle = IngredientBundle::default();
    let section = |name: &str| -> Result<BTreeMap<u32, Value>, IoError> {
        match root.get(name) {
            None => Ok(BTreeMap::new()),
            Some(v) => Ok(serde_json::from_value(v.clone())?),
        }
    };
    for (i, entry) in section("left")? {
        bundle.left.insert(i, bundle_design(&entry, sc.v1, i, base, budget)?);
    }
    for (j, entry) in section("right")? {
        bundle.right.insert(j, bundle_design(&entry, sc.v2, j, base, budget)?);
    }
    for (i, entry) in section("resolutions")? {
        let side = |name: &str| {
            entry
                .get(name)
                .ok_or_else(|| IoError::Format(format!("resolution entry {i} lacks \"{name}\"")))
        };
        let left = bundle_resolution(side("left")?, sc.v1, i, base)?;
        let right = bundle_resolution(side("right")?, sc.v2, sc.k.saturating_sub(i), base)?;
        bundle.resolutions.insert(i, (left, right));
    }
    Ok(bundle)
}

fn bundle_design(entry: &Value, v: u32, k: u32, base: &Path, budget: u64) -> Result<Design, IoError> {
    match entry {
        Value::String(s) if s == "complete" => Ok(complete_design(v, k, budget)?),
        Value::String(path) => Ok(design_from_json(&read_file(&base.join(path))?)?.0),
        other => Ok(design_from_file(serde_json::from_value(other.clone())?)?.0),
    }
}

fn bundle_resolution(entry: &Value, v: u32, k: u32, base: &Path) -> Result<Resolution, IoError> {
    match entry {
        Value::String(s) if s == "round-robin" => {
            if k != 2 {
                return Err(IoError::Format(format!("round-robin gives block size 2, pair needs {k}")));
            }
            Ok(round_robin_one_factorization(v)?)
        }
        Value::String(path) => resolution_from_json(&read_file(&base.join(path))?),
        other => resolution_from_file(serde_json::from_value(other.clone())?),
    }
}
