//! Explicit designs, resolutions and brute-force verification.
//!
//! Points are the integers `0..v`. A [`Design`] is always held in canonical
//! form: every block sorted ascending and the block list sorted
//! lexicographically. Class indices of a [`Resolution`] refer to positions in
//! that canonical block list.

use crate::subsets::{binomial_u64, combinations, for_each_subset, BinomialTable};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::HashMap;
use thiserror::Error;

pub type Block = Vec<u32>;

/// Default limit on counter updates performed by a single verification.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Dense counter arrays are used up to this many t-subsets, a hash map beyond.
const DENSE_LIMIT: u64 = 1 << 26;

/// Blocks per shard for the parallel counter sweep.
const SHARD: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DesignError {
    #[error("block {index} has {found} points, expected {expected}")]
    BlockSize {
        index: usize,
        expected: u32,
        found: usize,
    },
    #[error("block {index} contains point {point} outside 0..{v}")]
    PointOutOfRange { index: usize, point: u32, v: u32 },
    #[error("block {index} repeats point {point}")]
    RepeatedPoint { index: usize, point: u32 },
    #[error("block size {k} exceeds point count {v}")]
    BlockTooLarge { k: u32, v: u32 },
    #[error("strength {t} exceeds block size {k}")]
    StrengthTooLarge { t: u32, k: u32 },
    #[error("verification needs {needed} counter updates, budget is {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },
    #[error("class index {index} outside 1..={n}")]
    ClassIndex { index: usize, n: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Design {
    v: u32,
    k: u32,
    blocks: Vec<Block>,
}

impl Design {
    /// Validates the blocks and brings them into canonical form.
    pub fn new(v: u32, k: u32, blocks: Vec<Block>) -> Result<Self, DesignError> {
        let (design, _) = Self::with_permutation(v, k, blocks)?;
        Ok(design)
    }

    /// Like [`Design::new`], also returning `perm` with `perm[raw] = canonical`
    /// position of each input block.
    pub fn with_permutation(
        v: u32,
        k: u32,
        mut blocks: Vec<Block>,
    ) -> Result<(Self, Vec<usize>), DesignError> {
        if k > v {
            return Err(DesignError::BlockTooLarge { k, v });
        }
        for (index, block) in blocks.iter_mut().enumerate() {
            if block.len() != k as usize {
                return Err(DesignError::BlockSize {
                    index,
                    expected: k,
                    found: block.len(),
                });
            }
            block.sort_unstable();
            for w in block.windows(2) {
                if w[0] == w[1] {
                    return Err(DesignError::RepeatedPoint { index, point: w[0] });
                }
            }
            if let Some(&point) = block.last().filter(|&&p| p >= v) {
                return Err(DesignError::PointOutOfRange { index, point, v });
            }
        }
        let mut order: Vec<usize> = (0..blocks.len()).collect();
        order.sort_by(|&a, &b| blocks[a].cmp(&blocks[b]).then(a.cmp(&b)));
        let mut perm = vec![0; blocks.len()];
        for (pos, &raw) in order.iter().enumerate() {
            perm[raw] = pos;
        }
        let mut slots: Vec<Option<Block>> = blocks.into_iter().map(Some).collect();
        let sorted = order
            .iter()
            .map(|&raw| slots[raw].take().expect("each block moved once"))
            .collect();
        Ok((Self { v, k, blocks: sorted }, perm))
    }

    /// Builds from blocks already known to be valid, canonicalizing them.
    pub(crate) fn from_valid(v: u32, k: u32, mut blocks: Vec<Block>) -> Self {
        for b in &mut blocks {
            b.sort_unstable();
        }
        blocks.sort();
        Self { v, k, blocks }
    }

    pub fn v(&self) -> u32 {
        self.v
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn into_blocks(self) -> Vec<Block> {
        self.blocks
    }

    /// The design formed by the blocks at `indices`.
    pub fn subdesign(&self, indices: &[usize]) -> Design {
        let blocks = indices.iter().map(|&i| self.blocks[i].clone()).collect();
        Design::from_valid(self.v, self.k, blocks)
    }
}

/// True iff no block is repeated.
pub fn is_simple(d: &Design) -> bool {
    d.blocks.windows(2).all(|w| w[0] != w[1])
}

/// Outcome of counting blocks through every t-subset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TVerdict {
    /// Every t-subset lies in exactly `lambda` blocks.
    Regular { lambda: u64 },
    /// `witness` lies in `count` blocks while the lexicographically first
    /// t-subset lies in `reference`.
    Irregular {
        witness: Vec<u32>,
        count: u64,
        reference: u64,
    },
}

impl TVerdict {
    pub fn lambda(&self) -> Option<u64> {
        match self {
            TVerdict::Regular { lambda } => Some(*lambda),
            TVerdict::Irregular { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountingMethod {
    /// Accumulate a counter per t-subset over all blocks; cost `b * C(k, t)`.
    Sweep,
    /// Enumerate t-subsets and count containing blocks; cost `C(v, t) * b`.
    Enumerate,
}

/// Checks that `d` is a t-design using the counter sweep.
pub fn verify_t_design(d: &Design, t: u32, budget: u64) -> Result<TVerdict, DesignError> {
    verify_t_design_with(d, t, CountingMethod::Sweep, budget)
}

pub fn verify_t_design_with(
    d: &Design,
    t: u32,
    method: CountingMethod,
    budget: u64,
) -> Result<TVerdict, DesignError> {
    if t > d.k {
        return Err(DesignError::StrengthTooLarge { t, k: d.k });
    }
    let b = d.blocks.len() as u64;
    let needed = match method {
        CountingMethod::Sweep => b.saturating_mul(binomial_u64(d.k as u64, t as u64)),
        CountingMethod::Enumerate => b.saturating_mul(binomial_u64(d.v as u64, t as u64)),
    };
    if needed > budget {
        return Err(DesignError::BudgetExceeded { needed, budget });
    }
    match method {
        CountingMethod::Sweep => Ok(sweep(d, t)),
        CountingMethod::Enumerate => Ok(enumerate(d, t)),
    }
}

fn first_irregular(v: u32, t: u32, mut count_of: impl FnMut(&[u32]) -> u64) -> TVerdict {
    let mut reference = None;
    for subset in combinations(v, t) {
        let c = count_of(&subset);
        match reference {
            None => reference = Some(c),
            Some(r) if r != c => {
                return TVerdict::Irregular {
                    witness: subset,
                    count: c,
                    reference: r,
                }
            }
            _ => {}
        }
    }
    TVerdict::Regular {
        lambda: reference.unwrap_or(0),
    }
}

fn sweep(d: &Design, t: u32) -> TVerdict {
    let total = binomial_u64(d.v as u64, t as u64);
    if total <= DENSE_LIMIT {
        let table = BinomialTable::new(d.v as usize, t as usize);
        let size = total as usize;
        let count_chunk = |chunk: &[Block]| {
            let mut counts = vec![0u32; size];
            for block in chunk {
                for_each_subset(block, t as usize, |s| counts[table.rank(s)] += 1);
            }
            counts
        };
        let counts = if d.blocks.len() > SHARD {
            d.blocks
                .par_chunks(SHARD)
                .map(count_chunk)
                .reduce(
                    || vec![0u32; size],
                    |mut a, b| {
                        for (x, y) in a.iter_mut().zip(b) {
                            *x += y;
                        }
                        a
                    },
                )
        } else {
            count_chunk(&d.blocks)
        };
        first_irregular(d.v, t, |s| counts[table.rank(s)] as u64)
    } else {
        let mut counts: HashMap<Vec<u32>, u64> = HashMap::new();
        for block in &d.blocks {
            for_each_subset(block, t as usize, |s| *counts.entry(s.to_vec()).or_insert(0) += 1);
        }
        if counts.is_empty() {
            return TVerdict::Regular { lambda: 0 };
        }
        let mut values = counts.values();
        let first = values.next().copied().unwrap_or(0);
        // an uncovered t-subset has count 0 while covered ones do not
        if (counts.len() as u64) == total && values.all(|&c| c == first) {
            TVerdict::Regular { lambda: first }
        } else {
            first_irregular(d.v, t, |s| counts.get(s).copied().unwrap_or(0))
        }
    }
}

fn enumerate(d: &Design, t: u32) -> TVerdict {
    if d.v <= 128 {
        let masks: Vec<u128> = d
            .blocks
            .iter()
            .map(|b| b.iter().fold(0u128, |m, &p| m | 1u128 << p))
            .collect();
        first_irregular(d.v, t, |s| {
            let target = s.iter().fold(0u128, |m, &p| m | 1u128 << p);
            masks.iter().filter(|&&m| m & target == target).count() as u64
        })
    } else {
        first_irregular(d.v, t, |s| {
            d.blocks
                .iter()
                .filter(|b| s.iter().all(|p| b.binary_search(p).is_ok()))
                .count() as u64
        })
    }
}

/// Counts blocks through `samples` random t-subsets drawn with a seeded
/// generator. A regular verdict here is evidence, not proof.
pub fn sample_t_design(d: &Design, t: u32, samples: u64, seed: u64) -> Result<TVerdict, DesignError> {
    if t > d.k {
        return Err(DesignError::StrengthTooLarge { t, k: d.k });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<u32> = (0..d.v).collect();
    let mut reference = None;
    for _ in 0..samples {
        let mut subset: Vec<u32> = points.choose_multiple(&mut rng, t as usize).copied().collect();
        subset.sort_unstable();
        let count = d
            .blocks
            .iter()
            .filter(|b| subset.iter().all(|p| b.binary_search(p).is_ok()))
            .count() as u64;
        match reference {
            None => reference = Some(count),
            Some(r) if r != count => {
                return Ok(TVerdict::Irregular {
                    witness: subset,
                    count,
                    reference: r,
                })
            }
            _ => {}
        }
    }
    Ok(TVerdict::Regular {
        lambda: reference.unwrap_or(0),
    })
}

/// Cyclic distance between classes `h` and `j` (1-based) among `n` classes.
pub fn class_distance(h: usize, j: usize, n: usize) -> Result<usize, DesignError> {
    for index in [h, j] {
        if index == 0 || index > n {
            return Err(DesignError::ClassIndex { index, n });
        }
    }
    let diff = h.abs_diff(j);
    Ok(diff.min(n - diff))
}

/// Replaces every block by its complement in `0..v`.
pub fn complement_design(d: &Design) -> Design {
    let blocks = d
        .blocks
        .iter()
        .map(|b| (0..d.v).filter(|p| b.binary_search(p).is_err()).collect())
        .collect();
    Design::from_valid(d.v, d.v - d.k, blocks)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResolutionError {
    #[error("class {class} refers to block {index}, design has {blocks} blocks")]
    IndexOutOfRange {
        class: usize,
        index: usize,
        blocks: usize,
    },
    #[error("block {index} appears in class {first} and class {second}")]
    Overlap {
        index: usize,
        first: usize,
        second: usize,
    },
    #[error("block {index} is not in any class")]
    Uncovered { index: usize },
    #[error("class {class} is empty")]
    EmptyClass { class: usize },
    #[error("class {class} has {found} blocks, class 1 has {expected}")]
    UnequalClassSizes {
        class: usize,
        expected: usize,
        found: usize,
    },
    #[error("class {class} is not an {s}-design: {witness:?} lies in {count} blocks, expected {reference}")]
    ClassNotDesign {
        class: usize,
        s: u32,
        witness: Vec<u32>,
        count: u64,
        reference: u64,
    },
    #[error("class {class} has index {found}, expected {expected}")]
    IndexMismatch {
        class: usize,
        expected: u64,
        found: u64,
    },
    #[error(transparent)]
    Design(#[from] DesignError),
}

/// A partition of a design's blocks into ordered classes, each an
/// `s-(v, k, tau)` design. Class order defines [`class_distance`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resolution {
    pub design: Design,
    /// Class `h` (1-based in the public API) is `classes[h - 1]`, a list of
    /// positions in `design.blocks()`.
    pub classes: Vec<Vec<usize>>,
    pub s: u32,
    pub tau: u64,
}

impl Resolution {
    /// Builds a resolution from blocks in arbitrary order; class indices refer
    /// to the input order and are remapped to canonical positions.
    pub fn from_raw(
        v: u32,
        k: u32,
        blocks: Vec<Block>,
        classes: Vec<Vec<usize>>,
        s: u32,
        tau: u64,
    ) -> Result<Self, ResolutionError> {
        let nblocks = blocks.len();
        let (design, perm) = Design::with_permutation(v, k, blocks)?;
        let mut mapped = Vec::with_capacity(classes.len());
        for (c, class) in classes.into_iter().enumerate() {
            let mut out = Vec::with_capacity(class.len());
            for index in class {
                if index >= nblocks {
                    return Err(ResolutionError::IndexOutOfRange {
                        class: c + 1,
                        index,
                        blocks: nblocks,
                    });
                }
                out.push(perm[index]);
            }
            out.sort_unstable();
            mapped.push(out);
        }
        Ok(Self {
            design,
            classes: mapped,
            s,
            tau,
        })
    }

    /// Builds a resolution from a list of classes, each a list of blocks.
    pub fn from_class_blocks(
        v: u32,
        k: u32,
        class_blocks: Vec<Vec<Block>>,
        s: u32,
        tau: u64,
    ) -> Result<Self, ResolutionError> {
        let mut blocks = Vec::new();
        let mut classes = Vec::new();
        for cb in class_blocks {
            let start = blocks.len();
            blocks.extend(cb);
            classes.push((start..blocks.len()).collect());
        }
        Self::from_raw(v, k, blocks, classes, s, tau)
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    /// Blocks of class `h`, 1-based.
    pub fn class_blocks(&self, h: usize) -> impl Iterator<Item = &Block> {
        self.classes[h - 1].iter().map(|&i| &self.design.blocks()[i])
    }

    /// Class `h` (1-based) as a design.
    pub fn class_design(&self, h: usize) -> Design {
        self.design.subdesign(&self.classes[h - 1])
    }

    /// Relabels classes so that old class `h` becomes class `h + shift` (mod N).
    pub fn rotated(&self, shift: usize) -> Resolution {
        let n = self.classes.len();
        let mut classes = vec![Vec::new(); n];
        for (h, class) in self.classes.iter().enumerate() {
            classes[(h + shift) % n] = class.clone();
        }
        Resolution {
            design: self.design.clone(),
            classes,
            s: self.s,
            tau: self.tau,
        }
    }
}

/// Checks the partition invariants and that every class is an
/// `s-(v, k, tau)` design. Returns the confirmed `(s, tau)`.
pub fn verify_resolution(r: &Resolution, budget: u64) -> Result<(u32, u64), ResolutionError> {
    let nblocks = r.design.len();
    let mut owner: Vec<Option<usize>> = vec![None; nblocks];
    for (c, class) in r.classes.iter().enumerate() {
        if class.is_empty() {
            return Err(ResolutionError::EmptyClass { class: c + 1 });
        }
        for &index in class {
            if index >= nblocks {
                return Err(ResolutionError::IndexOutOfRange {
                    class: c + 1,
                    index,
                    blocks: nblocks,
                });
            }
            if let Some(first) = owner[index] {
                return Err(ResolutionError::Overlap {
                    index,
                    first: first + 1,
                    second: c + 1,
                });
            }
            owner[index] = Some(c);
        }
    }
    if let Some(index) = owner.iter().position(Option::is_none) {
        return Err(ResolutionError::Uncovered { index });
    }
    let expected = r.classes.first().map_or(0, Vec::len);
    for (c, class) in r.classes.iter().enumerate() {
        if class.len() != expected {
            return Err(ResolutionError::UnequalClassSizes {
                class: c + 1,
                expected,
                found: class.len(),
            });
        }
    }
    for h in 1..=r.classes.len() {
        match verify_t_design(&r.class_design(h), r.s, budget)? {
            TVerdict::Regular { lambda } if lambda == r.tau => {}
            TVerdict::Regular { lambda } => {
                return Err(ResolutionError::IndexMismatch {
                    class: h,
                    expected: r.tau,
                    found: lambda,
                })
            }
            TVerdict::Irregular {
                witness,
                count,
                reference,
            } => {
                return Err(ResolutionError::ClassNotDesign {
                    class: h,
                    s: r.s,
                    witness,
                    count,
                    reference,
                })
            }
        }
    }
    Ok((r.s, r.tau))
}
