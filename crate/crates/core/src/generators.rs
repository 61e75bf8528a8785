//! Ingredient generators. Every output is checked by the verifiers of
//! [`crate::design`] before it is returned.

use crate::design::{
    verify_resolution, verify_t_design, Block, Design, DesignError, Resolution, ResolutionError, TVerdict,
};
use crate::subsets::{binomial_u64, combinations, for_each_subset, BinomialTable};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("C({v}, {k}) = {needed} blocks exceeds the budget of {budget}")]
    TooLarge { v: u32, k: u32, needed: u64, budget: u64 },
    #[error("a 1-factorization needs an even number of points, got {0}")]
    OddPointCount(u32),
    #[error("invalid large set parameters LS[{n}]({s},{k},{v})")]
    Parameters { s: u32, k: u32, v: u32, n: u64 },
    #[error("search space exhausted after {nodes} nodes without a large set")]
    Exhausted { nodes: u64 },
    #[error("search budget of {budget} nodes exhausted, outcome inconclusive")]
    BudgetExceeded { budget: u64 },
    #[error("generated object failed verification: {0}")]
    Verification(String),
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error(transparent)]
    Resolution(#[from] ResolutionError),
}

/// All `k`-subsets of `0..v`. For `k = 0` this is the single empty block.
pub fn complete_design(v: u32, k: u32, budget: u64) -> Result<Design, GenError> {
    if k > v {
        return Err(DesignError::BlockTooLarge { k, v }.into());
    }
    let needed = binomial_u64(v as u64, k as u64);
    if needed > budget {
        return Err(GenError::TooLarge { v, k, needed, budget });
    }
    let d = Design::new(v, k, combinations(v, k).collect())?;
    match verify_t_design(&d, k, budget)? {
        TVerdict::Regular { lambda: 1 } => Ok(d),
        other => Err(GenError::Verification(format!("complete design verdict {other:?}"))),
    }
}

/// The circle-method 1-factorization of `K_v`, an `LS[v-1](1, 2, v)`.
pub fn round_robin_one_factorization(v: u32) -> Result<Resolution, GenError> {
    if v % 2 == 1 || v < 2 {
        return Err(GenError::OddPointCount(v));
    }
    let n = v - 1;
    let classes = (0..n)
        .map(|r| {
            let mut class = vec![vec![r, n]];
            for j in 1..v / 2 {
                class.push(vec![(r + j) % n, (r + n - j) % n]);
            }
            class
        })
        .collect();
    let res = Resolution::from_class_blocks(v, 2, classes, 1, 1)?;
    verify_resolution(&res, u64::MAX)?;
    Ok(res)
}

struct Search {
    n: usize,
    tau: u64,
    /// s-subset ids of each block.
    block_subsets: Vec<Vec<usize>>,
    /// Blocks through each s-subset.
    subset_blocks: Vec<Vec<usize>>,
    /// `count[c * subsets + S]`.
    count: Vec<u64>,
    owner: Vec<Option<usize>>,
    nodes: u64,
    budget: u64,
}

enum Outcome {
    Found,
    Dead,
    Budget,
}

impl Search {
    fn subsets(&self) -> usize {
        self.subset_blocks.len()
    }

    fn fits(&self, b: usize, c: usize) -> bool {
        let base = c * self.subsets();
        self.owner[b].is_none() && self.block_subsets[b].iter().all(|&s| self.count[base + s] < self.tau)
    }

    fn place(&mut self, b: usize, c: usize, on: bool) {
        let base = c * self.subsets();
        for &s in &self.block_subsets[b] {
            if on {
                self.count[base + s] += 1;
            } else {
                self.count[base + s] -= 1;
            }
        }
        self.owner[b] = on.then_some(c);
    }

    /// The unfilled `(class, s-subset)` cell with the fewest candidate
    /// blocks, with its candidates; `None` once every cell is full.
    fn tightest(&self) -> Option<(usize, Vec<usize>)> {
        let mut best: Option<(usize, Vec<usize>)> = None;
        for c in 0..self.n {
            let base = c * self.subsets();
            for s in 0..self.subsets() {
                let deficit = self.tau - self.count[base + s];
                if deficit == 0 {
                    continue;
                }
                let cands: Vec<usize> = self.subset_blocks[s].iter().copied().filter(|&b| self.fits(b, c)).collect();
                if (cands.len() as u64) < deficit {
                    return Some((c, Vec::new()));
                }
                if best.as_ref().is_none_or(|(_, bc)| cands.len() < bc.len()) {
                    best = Some((c, cands));
                }
            }
        }
        best
    }

    fn run(&mut self) -> Outcome {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Outcome::Budget;
        }
        let Some((c, cands)) = self.tightest() else {
            return Outcome::Found;
        };
        for b in cands {
            self.place(b, c, true);
            match self.run() {
                Outcome::Dead => self.place(b, c, false),
                done => return done,
            }
        }
        Outcome::Dead
    }
}

/// Depth-first search for an `LS[n](s, k, v)`: blocks of the complete design
/// are assigned to `n` classes so that every class is an `s-(v, k, tau)`
/// design. The most constrained `(class, s-subset)` cell is filled first;
/// its candidate blocks are tried in canonical order.
pub fn backtrack_large_set(s: u32, k: u32, v: u32, n: u64, budget: u64) -> Result<Resolution, GenError> {
    let bad = GenError::Parameters { s, k, v, n };
    if !(s <= k && k <= v) || n == 0 {
        return Err(bad);
    }
    let through = binomial_u64((v - s) as u64, (k - s) as u64);
    if !through.is_multiple_of(n) {
        return Err(bad);
    }
    let tau = through / n;
    let blocks: Vec<Block> = complete_design(v, k, budget)?.into_blocks();
    let table = BinomialTable::new(v as usize, s as usize);
    let nsub = binomial_u64(v as u64, s as u64) as usize;
    let mut subset_blocks = vec![Vec::new(); nsub];
    let mut block_subsets = Vec::with_capacity(blocks.len());
    for (b, block) in blocks.iter().enumerate() {
        let mut ids = Vec::new();
        for_each_subset(block, s as usize, |sub| ids.push(table.rank(sub)));
        for &id in &ids {
            subset_blocks[id].push(b);
        }
        block_subsets.push(ids);
    }
    let mut search = Search {
        n: n as usize,
        tau,
        block_subsets,
        subset_blocks,
        count: vec![0; n as usize * nsub],
        owner: vec![None; blocks.len()],
        nodes: 0,
        budget,
    };
    match search.run() {
        Outcome::Budget => Err(GenError::BudgetExceeded { budget }),
        Outcome::Dead => Err(GenError::Exhausted { nodes: search.nodes }),
        Outcome::Found => {
            let mut classes = vec![Vec::new(); n as usize];
            for (b, owner) in search.owner.iter().enumerate() {
                match owner {
                    Some(c) => classes[*c].push(b),
                    None => return Err(GenError::Verification(format!("block {b} left unassigned"))),
                }
            }
            let res = Resolution::from_raw(v, k, blocks, classes, s, tau)?;
            verify_resolution(&res, u64::MAX)?;
            Ok(res)
        }
    }
}
