//! Enumeration of the ingredient assignments that make every `L_{r,t-r}`
//! equal.
//!
//! A [`ProblemSpec`] fixes `t`, `k`, the split `v = v1 + v2` and the pairs
//! `(i, k-i)`. Pairs in `R` combine two large sets through the class distance
//! and contribute `z_i` partner classes; the rest contribute the full cross
//! union of their ingredients. The unknowns are
//!
//! * `z_i` in `0..=N` for resolved pairs (`0` switches the pair off),
//! * `u_i` in `{0, 1}` for pairs whose two ingredients are complete,
//! * a multiplier `m` in `0..=lambda_max/lambda_min` for every ingredient with
//!   block size above `t` (`0` switches the pair off).

mod engine;
pub mod terms;

use crate::arith::{lambda_max, lambda_min, lim, ArithError};
use crate::catalog::Catalog;
use crate::scalar::Scalar;
use engine::{Constraint, EngineError, Model, TermVars};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

pub use terms::{
    basic_term, classify_case, lambda_star_term, left_containment, right_containment, w_eps_from_z, z_from_w_eps, Case,
};

/// Default bound on search nodes per solve.
pub const DEFAULT_NODE_LIMIT: u64 = 1 << 36;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("contract violation: {0}")]
    Contract(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("search budget of {0} nodes exhausted")]
    Budget(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Scenario {
    pub t: u32,
    pub k: u32,
    pub v1: u32,
    pub v2: u32,
}

impl Scenario {
    pub fn v(&self) -> u32 {
        self.v1 + self.v2
    }
}

/// Resolution data of a pair in `R`: both ingredients are large sets with
/// `n` classes, of strengths `s_left` and `s_right`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PairResolution {
    pub s_left: u32,
    pub s_right: u32,
    pub n: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairSpec {
    pub i: u32,
    pub resolution: Option<PairResolution>,
    /// Largest admissible index for the left ingredient, if capped.
    pub cap_left: Option<BigInt>,
    pub cap_right: Option<BigInt>,
}

impl PairSpec {
    pub fn plain(i: u32) -> Self {
        Self {
            i,
            resolution: None,
            cap_left: None,
            cap_right: None,
        }
    }

    pub fn resolved(i: u32, s_left: u32, s_right: u32, n: u64) -> Self {
        Self {
            i,
            resolution: Some(PairResolution { s_left, s_right, n }),
            cap_left: None,
            cap_right: None,
        }
    }

    pub fn in_r(&self) -> bool {
        self.resolution.is_some()
    }
}

/// How a pair enters the system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairRole {
    /// An ingredient cannot exist (block size above the point count) or the
    /// pair contributes nothing.
    Off,
    Resolved,
    /// Both ingredients complete; only `u_i` is free.
    Trivial,
    /// Left complete, right index free.
    RightVariable,
    /// Right complete, left index free.
    LeftVariable,
    /// Both indices free; their product enters the equations.
    BothVariable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DedupMode {
    #[default]
    Symmetric,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemSpec {
    pub name: String,
    pub scenario: Scenario,
    /// One entry per `i = 0..=k`, in order.
    pub pairs: Vec<PairSpec>,
    pub dedup: DedupMode,
    /// Largest `m = Lambda / lambda_min` searched for.
    pub max_m: Option<BigInt>,
}

fn contract<T>(msg: String) -> Result<T, SolverError> {
    Err(SolverError::Contract(msg))
}

impl ProblemSpec {
    /// Builds a spec from the listed pairs; unlisted `i` are plain pairs.
    pub fn new(name: impl Into<String>, scenario: Scenario, listed: Vec<PairSpec>) -> Result<Self, SolverError> {
        let mut pairs: Vec<Option<PairSpec>> = vec![None; scenario.k as usize + 1];
        for p in listed {
            if p.i > scenario.k {
                return contract(format!("pair i = {} exceeds k = {}", p.i, scenario.k));
            }
            let slot = &mut pairs[p.i as usize];
            if slot.is_some() {
                return contract(format!("pair i = {} listed twice", p.i));
            }
            *slot = Some(p);
        }
        let pairs = pairs
            .into_iter()
            .enumerate()
            .map(|(i, p)| p.unwrap_or_else(|| PairSpec::plain(i as u32)))
            .collect();
        let spec = Self {
            name: name.into(),
            scenario,
            pairs,
            dedup: DedupMode::Symmetric,
            max_m: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn t(&self) -> u32 {
        self.scenario.t
    }

    pub fn k(&self) -> u32 {
        self.scenario.k
    }

    pub fn v(&self) -> u32 {
        self.scenario.v()
    }

    pub fn pair(&self, i: u32) -> &PairSpec {
        &self.pairs[i as usize]
    }

    pub fn lambda_min(&self) -> BigInt {
        lambda_min(self.t(), self.k(), self.v())
    }

    pub fn lambda_max(&self) -> BigInt {
        lambda_max(self.t(), self.k(), self.v())
    }

    pub fn lim(&self) -> BigInt {
        lim(self.t(), self.k(), self.v())
    }

    /// Largest multiplier searched for.
    pub fn m_cap(&self) -> BigInt {
        let full = self.lambda_max() / self.lambda_min();
        match &self.max_m {
            Some(m) if *m < full => m.clone(),
            _ => full,
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let Scenario { t, k, v1, v2 } = self.scenario;
        if k < t || v1 + v2 < k {
            return contract(format!("need v >= k >= t, got t = {t}, k = {k}, v = {}", v1 + v2));
        }
        if self.pairs.len() != k as usize + 1 || self.pairs.iter().enumerate().any(|(i, p)| p.i as usize != i) {
            return contract("pairs must cover i = 0..=k in order".into());
        }
        if let Some(m) = &self.max_m {
            if m.is_zero() || m.sign() == num_bigint::Sign::Minus {
                return contract(format!("max_m must be positive, got {m}"));
            }
        }
        for p in &self.pairs {
            let (i, j) = (p.i, k - p.i);
            for (cap, side) in [(&p.cap_left, "left"), (&p.cap_right, "right")] {
                if cap.as_ref().is_some_and(|c| c.sign() == num_bigint::Sign::Minus) {
                    return contract(format!("negative {side} cap on pair ({i}, {j})"));
                }
            }
            let Some(res) = p.resolution else { continue };
            if i > v1 || j > v2 {
                return contract(format!("resolved pair ({i}, {j}) does not fit on {v1} + {v2} points"));
            }
            if res.n == 0 {
                return contract(format!("pair ({i}, {j}) has N = 0"));
            }
            if res.s_left + res.s_right < 2 * (t / 2) {
                return contract(format!(
                    "pair ({i}, {j}): s_left + s_right = {} is below 2*floor(t/2) = {}",
                    res.s_left + res.s_right,
                    2 * (t / 2)
                ));
            }
            for (s, block, v, side) in [(res.s_left, i, v1, "left"), (res.s_right, j, v2, "right")] {
                if s > t || s > block {
                    return contract(format!("pair ({i}, {j}): {side} strength {s} exceeds min(t, {block})"));
                }
                let blocks_through = crate::arith::binomial((v - s) as u64, (block - s) as i64);
                if !blocks_through.is_multiple_of(&BigInt::from(res.n)) {
                    return contract(format!(
                        "pair ({i}, {j}): N = {} does not divide C({}, {}) = {blocks_through} on the {side}",
                        res.n,
                        v - s,
                        block - s
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn role(&self, i: u32) -> PairRole {
        let Scenario { t, k, v1, v2 } = self.scenario;
        let j = k - i;
        if i > v1 || j > v2 {
            return PairRole::Off;
        }
        if self.pair(i).in_r() {
            return PairRole::Resolved;
        }
        // a cap below lambda_min leaves only the absent design
        let p = self.pair(i);
        let shut_left = i > t && p.cap_left.as_ref().is_some_and(|c| *c < lambda_min(t, i, v1));
        let shut_right = j > t && p.cap_right.as_ref().is_some_and(|c| *c < lambda_min(t, j, v2));
        if shut_left || shut_right {
            return PairRole::Off;
        }
        match (i <= t, j <= t) {
            (true, true) => PairRole::Trivial,
            (true, false) => PairRole::RightVariable,
            (false, true) => PairRole::LeftVariable,
            (false, false) => PairRole::BothVariable,
        }
    }

    /// Index of the complete design of block size `block` on `v` points, at
    /// strength `min(t, block)`; zero when `block > v`.
    pub fn complete_index(&self, block: u32, v: u32) -> BigInt {
        if block > v {
            return BigInt::zero();
        }
        lambda_max(self.t().min(block), block, v)
    }

    /// Whether swapping `X1` and `X2` maps the problem to itself.
    pub fn is_symmetric(&self) -> bool {
        let k = self.k();
        self.scenario.v1 == self.scenario.v2
            && self.pairs.iter().all(|p| {
                let q = self.pair(k - p.i);
                let mirrored = p.resolution.map(|r| PairResolution {
                    s_left: r.s_right,
                    s_right: r.s_left,
                    n: r.n,
                });
                q.resolution == mirrored && q.cap_left == p.cap_right && q.cap_right == p.cap_left
            })
    }

    /// Block sizes `j` of the free left ingredients (pairs `(j, k-j)`).
    pub fn left_columns(&self) -> Vec<u32> {
        (0..=self.k())
            .filter(|&i| matches!(self.role(i), PairRole::LeftVariable | PairRole::BothVariable))
            .collect()
    }

    /// Block sizes `j` of the free right ingredients (pairs `(k-j, j)`).
    pub fn right_columns(&self) -> Vec<u32> {
        let k = self.k();
        let mut cols: Vec<u32> = (0..=k)
            .filter(|&i| matches!(self.role(i), PairRole::RightVariable | PairRole::BothVariable))
            .map(|i| k - i)
            .collect();
        cols.sort_unstable();
        cols
    }

    /// Pairs in `R` that can be used.
    pub fn resolved_pairs(&self) -> Vec<u32> {
        (0..=self.k()).filter(|&i| self.role(i) == PairRole::Resolved).collect()
    }

    /// Pairs with both ingredients complete and outside `R`.
    pub fn trivial_pairs(&self) -> Vec<u32> {
        (0..=self.k()).filter(|&i| self.role(i) == PairRole::Trivial).collect()
    }
}

/// Existence status of the ingredients a solution needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Constructible {
    Yes,
    Unknown,
    MissingIngredient,
}

/// One solution of the system.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SolutionRecord {
    pub lambda: BigInt,
    pub m: BigInt,
    /// `u_i` for `i = 0..=k`.
    pub u: Vec<bool>,
    /// `z_i` of used pairs in `R`.
    pub z: BTreeMap<u32, u64>,
    /// Index of the left ingredient of block size `j`, for used pairs with a
    /// free left index.
    pub lambda_left: BTreeMap<u32, BigInt>,
    /// Index of the right ingredient of block size `j`.
    pub lambda_right: BTreeMap<u32, BigInt>,
    pub constructible: Option<Constructible>,
    /// Size of the left/right swap orbit this record stands for.
    pub orbit: u32,
}

impl SolutionRecord {
    /// Image under swapping `X1` and `X2`.
    pub fn mirrored(&self) -> SolutionRecord {
        let k = self.u.len() as u32 - 1;
        SolutionRecord {
            lambda: self.lambda.clone(),
            m: self.m.clone(),
            u: self.u.iter().rev().copied().collect(),
            z: self.z.iter().map(|(&i, &z)| (k - i, z)).collect(),
            lambda_left: self.lambda_right.clone(),
            lambda_right: self.lambda_left.clone(),
            constructible: self.constructible,
            orbit: self.orbit,
        }
    }

    /// Row of the solution table: `z` of each pair in `R`, `u` of each trivial
    /// pair, then left and right indices (0 for unused pairs).
    pub fn table_row(&self, spec: &ProblemSpec) -> Vec<BigInt> {
        let mut row = Vec::new();
        for i in spec.resolved_pairs() {
            row.push(BigInt::from(self.z.get(&i).copied().unwrap_or(0)));
        }
        for i in spec.trivial_pairs() {
            row.push(BigInt::from(self.u[i as usize] as u8));
        }
        for j in spec.left_columns() {
            row.push(self.lambda_left.get(&j).cloned().unwrap_or_default());
        }
        for j in spec.right_columns() {
            row.push(self.lambda_right.get(&j).cloned().unwrap_or_default());
        }
        row
    }

    /// Representative order within a swap orbit: left indices, then right
    /// indices, then the remaining columns.
    fn orbit_key(&self, spec: &ProblemSpec) -> Vec<BigInt> {
        let row = self.table_row(spec);
        let split = spec.resolved_pairs().len() + spec.trivial_pairs().len();
        let mut key = row[split..].to_vec();
        key.extend_from_slice(&row[..split]);
        key
    }

    fn uses_pair(&self, i: u32) -> bool {
        self.u[i as usize]
    }
}

/// Evaluates every `L_{r,t-r}` of a record from the term formulas.
pub fn evaluate_l(spec: &ProblemSpec, rec: &SolutionRecord) -> Result<Vec<BigInt>, SolverError> {
    let sc = &spec.scenario;
    let (t, k) = (sc.t, sc.k);
    if rec.u.len() != k as usize + 1 {
        return contract(format!("record has {} u entries, expected {}", rec.u.len(), k + 1));
    }
    let mut l = vec![BigInt::zero(); t as usize + 1];
    for i in 0..=k {
        if !rec.uses_pair(i) {
            continue;
        }
        let j = k - i;
        let role = spec.role(i);
        let left = match role {
            PairRole::LeftVariable | PairRole::BothVariable => rec
                .lambda_left
                .get(&i)
                .cloned()
                .ok_or_else(|| SolverError::Contract(format!("missing left index of pair ({i}, {j})")))?,
            _ => spec.complete_index(i, sc.v1),
        };
        let right = match role {
            PairRole::RightVariable | PairRole::BothVariable => rec
                .lambda_right
                .get(&j)
                .cloned()
                .ok_or_else(|| SolverError::Contract(format!("missing right index of pair ({i}, {j})")))?,
            _ => spec.complete_index(j, sc.v2),
        };
        for r in 0..=t {
            let term = match role {
                PairRole::Off => return contract(format!("pair ({i}, {j}) cannot be used")),
                PairRole::Resolved => {
                    let z = rec
                        .z
                        .get(&i)
                        .copied()
                        .ok_or_else(|| SolverError::Contract(format!("missing z of pair ({i}, {j})")))?;
                    lambda_star_term(sc, spec.pair(i), r, &left, &right, z)?
                }
                _ => basic_term(sc, i, r, &left, &right)?,
            };
            l[r as usize] += term;
        }
    }
    Ok(l)
}

/// Variable layout of a built system.
#[derive(Debug, Clone)]
enum Slot {
    Off,
    Z(usize),
    U(usize),
    Left(usize, BigInt),
    Right(usize, BigInt),
    Both(usize, usize, BigInt, BigInt),
}

struct Built {
    slots: Vec<Slot>,
    model: Model<BigInt>,
}

fn build(spec: &ProblemSpec) -> Result<Built, SolverError> {
    let sc = &spec.scenario;
    let (t, k, v1, v2) = (sc.t, sc.k, sc.v1, sc.v2);
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    let mut terms = Vec::new();
    let mut coefs: Vec<Vec<BigInt>> = Vec::new();
    let mut slots = Vec::new();
    fn new_var(lo: &mut Vec<BigInt>, hi: &mut Vec<BigInt>, top: BigInt) -> usize {
        lo.push(BigInt::zero());
        hi.push(top);
        hi.len() - 1
    }
    let multiplier_cap = |block: u32, v: u32, cap: &Option<BigInt>| -> (BigInt, BigInt) {
        let lmin = lambda_min(t, block, v);
        let full = lambda_max(t, block, v) / &lmin;
        let top = match cap {
            Some(c) => (c / &lmin).min(full),
            None => full,
        };
        (lmin, top)
    };
    for i in 0..=k {
        let j = k - i;
        let p = spec.pair(i);
        let complete_l = spec.complete_index(i, v1);
        let complete_r = spec.complete_index(j, v2);
        let row = |l: &BigInt, r: &BigInt| -> Result<Vec<BigInt>, SolverError> {
            (0..=t).map(|q| basic_term(sc, i, q, l, r)).collect()
        };
        let (slot, vars, coef) = match spec.role(i) {
            PairRole::Off => (Slot::Off, None, vec![]),
            PairRole::Resolved => {
                let coef = (0..=t)
                    .map(|q| lambda_star_term(sc, p, q, &complete_l, &complete_r, 1))
                    .collect::<Result<Vec<_>, _>>()?;
                let n = p.resolution.unwrap().n;
                let x = new_var(&mut lo, &mut hi, BigInt::from(n));
                (Slot::Z(x), Some(TermVars::One(x)), coef)
            }
            PairRole::Trivial => {
                let x = new_var(&mut lo, &mut hi, BigInt::one());
                (Slot::U(x), Some(TermVars::One(x)), row(&complete_l, &complete_r)?)
            }
            PairRole::RightVariable => {
                let (lmin, top) = multiplier_cap(j, v2, &p.cap_right);
                let x = new_var(&mut lo, &mut hi, top);
                let coef = row(&complete_l, &lmin)?;
                (Slot::Right(x, lmin), Some(TermVars::One(x)), coef)
            }
            PairRole::LeftVariable => {
                let (lmin, top) = multiplier_cap(i, v1, &p.cap_left);
                let x = new_var(&mut lo, &mut hi, top);
                let coef = row(&lmin, &complete_r)?;
                (Slot::Left(x, lmin), Some(TermVars::One(x)), coef)
            }
            PairRole::BothVariable => {
                let (lmin_l, top_l) = multiplier_cap(i, v1, &p.cap_left);
                let (lmin_r, top_r) = multiplier_cap(j, v2, &p.cap_right);
                let a = new_var(&mut lo, &mut hi, top_l);
                let b = new_var(&mut lo, &mut hi, top_r);
                let coef = row(&lmin_l, &lmin_r)?;
                (Slot::Both(a, b, lmin_l, lmin_r), Some(TermVars::Two(a, b)), coef)
            }
        };
        match vars {
            Some(vars) if coef.iter().any(|c| !c.is_zero()) => {
                terms.push(vars);
                coefs.push(coef);
                slots.push(slot);
            }
            Some(TermVars::One(x)) => {
                hi[x] = BigInt::zero();
                slots.push(Slot::Off);
            }
            Some(TermVars::Two(a, b)) => {
                hi[a] = BigInt::zero();
                hi[b] = BigInt::zero();
                slots.push(Slot::Off);
            }
            None => slots.push(slot),
        }
    }
    // Lambda is the last variable
    let lambda = new_var(&mut lo, &mut hi, spec.m_cap() * spec.lambda_min());
    lo[lambda] = BigInt::one();
    terms.push(TermVars::One(lambda));
    let mut model = Model::new(lo, hi, terms);
    for r in 0..=t as usize {
        let mut coef: Vec<(usize, BigInt)> = coefs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c[r].is_zero())
            .map(|(term, c)| (term, c[r].clone()))
            .collect();
        coef.push((coefs.len(), BigInt::from(-1)));
        model.constraints.push(Constraint {
            coef,
            lo: BigInt::zero(),
            hi: BigInt::zero(),
        });
    }
    model.eliminate();
    Ok(Built { slots, model })
}

fn decode(spec: &ProblemSpec, slots: &[Slot], x: &[BigInt]) -> Result<SolutionRecord, SolverError> {
    let k = spec.k();
    let mut rec = SolutionRecord {
        lambda: BigInt::zero(),
        m: BigInt::zero(),
        u: vec![false; k as usize + 1],
        z: BTreeMap::new(),
        lambda_left: BTreeMap::new(),
        lambda_right: BTreeMap::new(),
        constructible: None,
        orbit: 1,
    };
    for (i, slot) in (0..=k).zip(slots) {
        let j = k - i;
        let on = match slot {
            Slot::Off => false,
            Slot::Z(a) => {
                let z = x[*a].to_u64().expect("z fits");
                if z > 0 {
                    rec.z.insert(i, z);
                }
                z > 0
            }
            Slot::U(a) => x[*a].is_one(),
            Slot::Left(a, lmin) => {
                if !x[*a].is_zero() {
                    rec.lambda_left.insert(i, &x[*a] * lmin);
                }
                !x[*a].is_zero()
            }
            Slot::Right(a, lmin) => {
                if !x[*a].is_zero() {
                    rec.lambda_right.insert(j, &x[*a] * lmin);
                }
                !x[*a].is_zero()
            }
            Slot::Both(a, b, lmin_l, lmin_r) => {
                let on = !x[*a].is_zero();
                if on {
                    rec.lambda_left.insert(i, &x[*a] * lmin_l);
                    rec.lambda_right.insert(j, &x[*b] * lmin_r);
                }
                on
            }
        };
        rec.u[i as usize] = on;
    }
    let l = evaluate_l(spec, &rec)?;
    if l.iter().any(|x| *x != l[0]) {
        return contract(format!("solver produced unequal L values {l:?}"));
    }
    rec.lambda = l[0].clone();
    let (m, rem) = rec.lambda.div_rem(&spec.lambda_min());
    if !rem.is_zero() {
        return contract(format!("Lambda = {} is not a multiple of lambda_min", rec.lambda));
    }
    rec.m = m;
    Ok(rec)
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub node_limit: u64,
    pub parallel: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            node_limit: DEFAULT_NODE_LIMIT,
            parallel: true,
        }
    }
}

fn run_engine<T: Scalar>(model: &Model<T>, opts: &SolveOptions) -> Result<Option<Vec<Vec<BigInt>>>, SolverError> {
    match model.solve(opts.node_limit, opts.parallel) {
        Ok(sols) => Ok(Some(sols.iter().map(|s| s.iter().map(Scalar::to_big).collect()).collect())),
        Err(EngineError::Overflow) => Ok(None),
        Err(EngineError::NodeLimit) => Err(SolverError::Budget(opts.node_limit)),
    }
}

/// All solutions with `1 <= m <= m_cap`, without deduplication, sorted by
/// `m` and then by table row.
pub fn enumerate_solutions(spec: &ProblemSpec, opts: &SolveOptions) -> Result<Vec<SolutionRecord>, SolverError> {
    spec.validate()?;
    let built = build(spec)?;
    let raw = match built.model.narrow::<i128>() {
        Some(fast) => run_engine(&fast, opts)?,
        None => None,
    };
    let raw = match raw {
        Some(r) => r,
        None => run_engine(&built.model, opts)?.expect("big integers do not overflow"),
    };
    let mut out = raw
        .iter()
        .map(|x| decode(spec, &built.slots, x))
        .collect::<Result<Vec<_>, _>>()?;
    sort_records(spec, &mut out);
    Ok(out)
}

pub fn sort_records(spec: &ProblemSpec, records: &mut [SolutionRecord]) {
    records.sort_by_cached_key(|r| (r.m.clone(), r.table_row(spec)));
}

/// Keeps one record per left/right swap orbit when the problem is symmetric.
pub fn dedup_symmetric(spec: &ProblemSpec, records: Vec<SolutionRecord>) -> Vec<SolutionRecord> {
    if !spec.is_symmetric() {
        return records;
    }
    let mut seen: BTreeSet<Vec<BigInt>> = BTreeSet::new();
    let mut out = Vec::new();
    for rec in records {
        let mirror = rec.mirrored();
        let (ka, kb) = (rec.orbit_key(spec), mirror.orbit_key(spec));
        let fixed = ka == kb;
        let (mut rep, key) = if kb < ka { (mirror, kb) } else { (rec, ka) };
        if seen.insert(key) {
            rep.orbit = if fixed { 1 } else { 2 };
            out.push(rep);
        }
    }
    sort_records(spec, &mut out);
    out
}

/// Annotates each record with the existence status of its ingredients.
pub fn filter_by_existence(spec: &ProblemSpec, records: &mut [SolutionRecord], catalog: &Catalog) {
    for rec in records.iter_mut() {
        rec.constructible = Some(existence(spec, rec, catalog));
    }
}

fn existence(spec: &ProblemSpec, rec: &SolutionRecord, catalog: &Catalog) -> Constructible {
    let Scenario { t, k, v1, v2 } = spec.scenario;
    let mut status = Constructible::Yes;
    for i in 0..=k {
        if !rec.uses_pair(i) {
            continue;
        }
        let j = k - i;
        if let Some(res) = spec.pair(i).resolution {
            let has = |s, block, v| catalog.large_sets(s, block, v).iter().any(|ls| ls.n == res.n);
            if !has(res.s_left, i, v1) || !has(res.s_right, j, v2) {
                return Constructible::MissingIngredient;
            }
            continue;
        }
        if let Some(l) = rec.lambda_left.get(&i) {
            if !catalog.design_known(t, v1, i, l) {
                status = Constructible::Unknown;
            }
        }
        if let Some(l) = rec.lambda_right.get(&j) {
            if !catalog.design_known(t, v2, j, l) {
                status = Constructible::Unknown;
            }
        }
    }
    status
}

/// Solution counts in both counting modes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub raw: usize,
    pub raw_up_to_lim: usize,
    pub deduplicated: usize,
    pub deduplicated_up_to_lim: usize,
    pub distinct_m: usize,
    pub distinct_m_up_to_lim: usize,
    pub constructible: Option<usize>,
}

pub fn summarize(spec: &ProblemSpec, raw: &[SolutionRecord], dedup: &[SolutionRecord]) -> SolveSummary {
    let lim = spec.lim();
    let le = |r: &&SolutionRecord| r.m <= lim;
    let distinct = |rs: &mut dyn Iterator<Item = &SolutionRecord>| rs.map(|r| r.m.clone()).collect::<BTreeSet<_>>().len();
    let constructible = if dedup.iter().all(|r| r.constructible.is_some()) && !dedup.is_empty() {
        Some(
            dedup
                .iter()
                .filter(|r| r.m <= lim && r.constructible == Some(Constructible::Yes))
                .count(),
        )
    } else {
        None
    };
    SolveSummary {
        raw: raw.len(),
        raw_up_to_lim: raw.iter().filter(le).count(),
        deduplicated: dedup.len(),
        deduplicated_up_to_lim: dedup.iter().filter(le).count(),
        distinct_m: distinct(&mut raw.iter()),
        distinct_m_up_to_lim: distinct(&mut raw.iter().filter(le)),
        constructible,
    }
}
