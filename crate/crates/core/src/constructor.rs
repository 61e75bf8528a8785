//! Assembly of explicit designs from a solution record and ingredient designs.
//!
//! Points `0..v1` form `X1` and `v1..v1+v2` form `X2`. Right ingredients live
//! on `0..v2` and are shifted by `v1` when joined.

use crate::arith::binomial;
use crate::design::{
    class_distance, is_simple, verify_resolution, verify_t_design, Block, Design, DesignError, Resolution,
    ResolutionError, TVerdict,
};
use crate::generators::{complete_design, GenError};
use crate::solver::{
    evaluate_l, left_containment, right_containment, w_eps_from_z, PairRole, ProblemSpec, SolutionRecord, SolverError,
};
use crate::subsets::for_each_subset;
use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PointPartition {
    pub v1: u32,
    pub v2: u32,
}

impl PointPartition {
    pub fn v(&self) -> u32 {
        self.v1 + self.v2
    }

    /// Number of points of `block` in `X1`.
    pub fn left_part(&self, block: &[u32]) -> u32 {
        block.iter().filter(|&&p| p < self.v1).count() as u32
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

#[derive(Debug, Error)]
pub enum ConstructError {
    #[error("missing-ingredient: pair ({i}, {j}) needs its {side} design")]
    MissingIngredient { i: u32, j: u32, side: Side },
    #[error("pair ({i}, {j}), {side} ingredient: {reason}")]
    BadIngredient { i: u32, j: u32, side: Side, reason: String },
    #[error("class counts differ: {left} on the left, {right} on the right")]
    ClassCountMismatch { left: usize, right: usize },
    #[error("distance window {eps}..={w} invalid for {n} classes")]
    Window { eps: u8, w: u64, n: usize },
    #[error("ingredient on {found} points, partition side has {expected}")]
    PointCount { expected: u32, found: u32 },
    #[error("pair ({i}, {j}) produced the repeated block {block:?}")]
    Duplicate { i: u32, j: u32, block: Block },
    #[error("assembled blocks are not a {t}-design: {witness:?} lies in {count} blocks, expected {expected}")]
    NotDesign { t: u32, witness: Vec<u32>, count: u64, expected: BigInt },
    #[error("assembled design has index {found}, record claims {expected}")]
    IndexMismatch { expected: BigInt, found: u64 },
    #[error("assembled design has {found} blocks, expected {expected}")]
    BlockCount { expected: BigInt, found: usize },
    #[error("predicted L values {0:?} are not all equal to Lambda")]
    Prediction(Vec<BigInt>),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error(transparent)]
    Resolution(#[from] ResolutionError),
    #[error(transparent)]
    Generator(#[from] GenError),
}

/// Ingredients for one scenario. Left designs are keyed by block size `i`,
/// right designs by block size `k - i`, resolutions by `i`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngredientBundle {
    pub left: BTreeMap<u32, Design>,
    pub right: BTreeMap<u32, Design>,
    pub resolutions: BTreeMap<u32, (Resolution, Resolution)>,
}

impl IngredientBundle {
    /// Adds a complete design for every used side whose index is that of the
    /// complete design.
    pub fn fill_complete(&mut self, spec: &ProblemSpec, rec: &SolutionRecord, budget: u64) -> Result<(), GenError> {
        let sc = spec.scenario;
        for i in used_pairs(rec) {
            let j = sc.k - i;
            if spec.role(i) == PairRole::Resolved {
                continue;
            }
            let full_left = rec.lambda_left.get(&i).is_none_or(|l| *l == spec.complete_index(i, sc.v1));
            let full_right = rec.lambda_right.get(&j).is_none_or(|l| *l == spec.complete_index(j, sc.v2));
            if full_left && !self.left.contains_key(&i) {
                self.left.insert(i, complete_design(sc.v1, i, budget)?);
            }
            if full_right && !self.right.contains_key(&j) {
                self.right.insert(j, complete_design(sc.v2, j, budget)?);
            }
        }
        Ok(())
    }
}

fn used_pairs(rec: &SolutionRecord) -> impl Iterator<Item = u32> + '_ {
    rec.u.iter().enumerate().filter(|(_, &on)| on).map(|(i, _)| i as u32)
}

fn shifted(block: &[u32], right: &[u32], v1: u32) -> Block {
    block.iter().copied().chain(right.iter().map(|p| p + v1)).collect()
}

/// Every left block joined with every shifted right block.
pub fn cross_union(left: &Design, right: &Design, partition: PointPartition) -> Result<Vec<Block>, ConstructError> {
    check_points(left.v(), partition.v1)?;
    check_points(right.v(), partition.v2)?;
    Ok(left
        .blocks()
        .iter()
        .flat_map(|a| right.blocks().iter().map(move |b| shifted(a, b, partition.v1)))
        .collect())
}

fn check_points(found: u32, expected: u32) -> Result<(), ConstructError> {
    if found != expected {
        return Err(ConstructError::PointCount { expected, found });
    }
    Ok(())
}

/// Unions of a block of left class `h` with a block of right class `j` over
/// all class pairs with `eps <= d(h, j) <= w`.
pub fn resolution_union(
    res_left: &Resolution,
    res_right: &Resolution,
    eps: u8,
    w: u64,
    partition: PointPartition,
) -> Result<Vec<Block>, ConstructError> {
    let n = res_left.class_count();
    if n != res_right.class_count() {
        return Err(ConstructError::ClassCountMismatch {
            left: n,
            right: res_right.class_count(),
        });
    }
    if eps > 1 || w > (n / 2) as u64 {
        return Err(ConstructError::Window { eps, w, n });
    }
    check_points(res_left.design.v(), partition.v1)?;
    check_points(res_right.design.v(), partition.v2)?;
    let mut out = Vec::new();
    for h in 1..=n {
        for j in 1..=n {
            let d = class_distance(h, j, n)? as u64;
            if d < eps as u64 || d > w {
                continue;
            }
            for a in res_left.class_blocks(h) {
                for b in res_right.class_blocks(j) {
                    out.push(shifted(a, b, partition.v1));
                }
            }
        }
    }
    Ok(out)
}

/// Recomputed L values and block counts of a record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    /// `L_{r,t-r}` for `r = 0..=t`.
    pub l: Vec<BigInt>,
    /// Blocks contributed by each used pair, keyed by `i`.
    pub pair_blocks: BTreeMap<u32, BigInt>,
}

pub fn predicted_counts(spec: &ProblemSpec, rec: &SolutionRecord) -> Result<Prediction, SolverError> {
    let sc = spec.scenario;
    let l = evaluate_l(spec, rec)?;
    let mut pair_blocks = BTreeMap::new();
    for i in used_pairs(rec) {
        let j = sc.k - i;
        let left = rec.lambda_left.get(&i).cloned().unwrap_or_else(|| spec.complete_index(i, sc.v1));
        let right = rec.lambda_right.get(&j).cloned().unwrap_or_else(|| spec.complete_index(j, sc.v2));
        let full = left_containment(&sc, i, &left, 0)? * right_containment(&sc, j, &right, 0)?;
        let count = match spec.pair(i).resolution {
            Some(res) => {
                let z = rec.z.get(&i).copied().unwrap_or(0);
                full * BigInt::from(z) / BigInt::from(res.n)
            }
            None => full,
        };
        pair_blocks.insert(i, count);
    }
    Ok(Prediction { l, pair_blocks })
}

/// Per-pair data of a build.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairReport {
    pub i: u32,
    pub j: u32,
    pub blocks: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildReport {
    pub t: u32,
    pub v: u32,
    pub k: u32,
    pub lambda: BigInt,
    pub blocks: usize,
    pub pairs: Vec<PairReport>,
    pub predicted: Prediction,
    pub verified_lambda: u64,
    pub simple: bool,
}

#[derive(Debug, Clone)]
pub struct Build {
    pub design: Design,
    pub report: BuildReport,
}

fn expect_index(
    d: &Design,
    strength: u32,
    expected: &BigInt,
    budget: u64,
    fail: impl Fn(String) -> ConstructError,
) -> Result<(), ConstructError> {
    match verify_t_design(d, strength, budget)? {
        TVerdict::Regular { lambda } if BigInt::from(lambda) == *expected => Ok(()),
        TVerdict::Regular { lambda } => Err(fail(format!("{strength}-index {lambda}, expected {expected}"))),
        TVerdict::Irregular { witness, count, .. } => Err(fail(format!(
            "not a {strength}-design, {witness:?} lies in {count} blocks"
        ))),
    }
}

/// The blocks of every used pair, in pair order, after checking each
/// ingredient against the record. No check is made on the union itself.
pub fn union_blocks(
    spec: &ProblemSpec,
    rec: &SolutionRecord,
    bundle: &IngredientBundle,
    budget: u64,
) -> Result<(Vec<Block>, Vec<PairReport>), ConstructError> {
    spec.validate()?;
    let sc = spec.scenario;
    let part = PointPartition { v1: sc.v1, v2: sc.v2 };
    let mut blocks = Vec::new();
    let mut reports = Vec::new();
    for i in used_pairs(rec) {
        let j = sc.k - i;
        let bad = |side: Side| move |reason: String| ConstructError::BadIngredient { i, j, side, reason };
        let missing = |side: Side| ConstructError::MissingIngredient { i, j, side };
        let shape = |d: &Design, v: u32, block: u32, side: Side| -> Result<(), ConstructError> {
            if d.v() != v || d.k() != block {
                return Err(bad(side)(format!("{}-subsets of {} points, expected {block}-subsets of {v}", d.k(), d.v())));
            }
            Ok(())
        };
        let role = spec.role(i);
        let mut report = PairReport {
            i,
            j,
            blocks: 0,
            z: None,
            w: None,
            eps: None,
        };
        let family = match role {
            PairRole::Off => return Err(SolverError::Contract(format!("pair ({i}, {j}) cannot be used")).into()),
            PairRole::Resolved => {
                let res = spec.pair(i).resolution.expect("resolved pairs carry resolution data");
                let (rl, rr) = bundle.resolutions.get(&i).ok_or_else(|| missing(Side::Left))?;
                for (r, side, v, block, s) in [
                    (rl, Side::Left, sc.v1, i, res.s_left),
                    (rr, Side::Right, sc.v2, j, res.s_right),
                ] {
                    shape(&r.design, v, block, side)?;
                    verify_resolution(r, budget).map_err(|e| bad(side)(e.to_string()))?;
                    if r.s != s || r.class_count() as u64 != res.n {
                        return Err(bad(side)(format!(
                            "{}-resolution with {} classes, expected {s}-resolution with {}",
                            r.s,
                            r.class_count(),
                            res.n
                        )));
                    }
                    let strength = sc.t.min(block);
                    expect_index(&r.design, strength, &spec.complete_index(block, v), budget, bad(side))?;
                }
                let z = rec
                    .z
                    .get(&i)
                    .copied()
                    .ok_or_else(|| SolverError::Contract(format!("missing z of pair ({i}, {j})")))?;
                let (w, eps) = w_eps_from_z(z, res.n)?;
                report.z = Some(z);
                report.w = Some(w);
                report.eps = Some(eps);
                resolution_union(rl, rr, eps, w, part)?
            }
            _ => {
                let left = bundle.left.get(&i).ok_or_else(|| missing(Side::Left))?;
                let right = bundle.right.get(&j).ok_or_else(|| missing(Side::Right))?;
                shape(left, sc.v1, i, Side::Left)?;
                shape(right, sc.v2, j, Side::Right)?;
                let li = match role {
                    PairRole::LeftVariable | PairRole::BothVariable => rec.lambda_left.get(&i).cloned(),
                    _ => Some(spec.complete_index(i, sc.v1)),
                }
                .ok_or_else(|| SolverError::Contract(format!("missing left index of pair ({i}, {j})")))?;
                let ri = match role {
                    PairRole::RightVariable | PairRole::BothVariable => rec.lambda_right.get(&j).cloned(),
                    _ => Some(spec.complete_index(j, sc.v2)),
                }
                .ok_or_else(|| SolverError::Contract(format!("missing right index of pair ({i}, {j})")))?;
                expect_index(left, sc.t.min(i), &li, budget, bad(Side::Left))?;
                expect_index(right, sc.t.min(j), &ri, budget, bad(Side::Right))?;
                cross_union(left, right, part)?
            }
        };
        report.blocks = family.len();
        blocks.extend(family);
        reports.push(report);
    }
    Ok((blocks, reports))
}

/// Builds the design of a record and verifies it: simplicity, the index
/// `Lambda` by exhaustive counting, and the block count.
pub fn assemble(
    spec: &ProblemSpec,
    rec: &SolutionRecord,
    bundle: &IngredientBundle,
    budget: u64,
) -> Result<Build, ConstructError> {
    let sc = spec.scenario;
    let (t, k, v) = (sc.t, sc.k, sc.v());
    let predicted = predicted_counts(spec, rec)?;
    if predicted.l.iter().any(|l| *l != rec.lambda) {
        return Err(ConstructError::Prediction(predicted.l));
    }
    let (blocks, pairs) = union_blocks(spec, rec, bundle, budget)?;
    let design = Design::new(v, k, blocks)?;
    if let Some(w) = design.blocks().windows(2).find(|w| w[0] == w[1]) {
        let i = PointPartition { v1: sc.v1, v2: sc.v2 }.left_part(&w[0]);
        return Err(ConstructError::Duplicate {
            i,
            j: k - i,
            block: w[0].clone(),
        });
    }
    let verified_lambda = match verify_t_design(&design, t, budget)? {
        TVerdict::Regular { lambda } => lambda,
        TVerdict::Irregular { witness, count, .. } => {
            return Err(ConstructError::NotDesign {
                t,
                witness,
                count,
                expected: rec.lambda.clone(),
            })
        }
    };
    if BigInt::from(verified_lambda) != rec.lambda {
        return Err(ConstructError::IndexMismatch {
            expected: rec.lambda.clone(),
            found: verified_lambda,
        });
    }
    let expected = &rec.lambda * binomial(v as u64, t as i64) / binomial(k as u64, t as i64);
    if BigInt::from(design.len()) != expected {
        return Err(ConstructError::BlockCount {
            expected,
            found: design.len(),
        });
    }
    let report = BuildReport {
        t,
        v,
        k,
        lambda: rec.lambda.clone(),
        blocks: design.len(),
        pairs,
        predicted,
        verified_lambda,
        simple: is_simple(&design),
    };
    Ok(Build { design, report })
}

/// Brute-force `L_{r,t-r}` of a block multiset: for each `r`, the common
/// number of blocks through every `t`-set meeting `X1` in `r` points, or
/// `None` if those counts differ.
pub fn observed_l(blocks: &[Block], partition: PointPartition, t: u32, budget: u64) -> Result<Vec<Option<u64>>, DesignError> {
    let v = partition.v();
    let mut counts: HashMap<Vec<u32>, u64> = HashMap::new();
    let mut updates = 0u64;
    for b in blocks {
        for_each_subset(b, t as usize, |s| {
            *counts.entry(s.to_vec()).or_insert(0) += 1;
        });
        updates += crate::subsets::binomial_u64(b.len() as u64, t as u64);
        if updates > budget {
            return Err(DesignError::BudgetExceeded { needed: updates, budget });
        }
    }
    let mut out: Vec<Option<Option<u64>>> = vec![None; t as usize + 1];
    let all: Vec<u32> = (0..v).collect();
    for_each_subset(&all, t as usize, |s| {
        let r = partition.left_part(s) as usize;
        let c = counts.get(s).copied().unwrap_or(0);
        out[r] = match out[r] {
            None => Some(Some(c)),
            Some(Some(prev)) if prev == c => Some(Some(c)),
            _ => Some(None),
        };
    });
    Ok(out.into_iter().map(|o| o.flatten()).collect())
}

/// True when every value of the table is zero.
pub fn all_zero(l: &[BigInt]) -> bool {
    l.iter().all(Zero::is_zero)
}
