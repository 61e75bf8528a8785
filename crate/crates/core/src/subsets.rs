//! Small helpers for k-subsets of `0..n`: lexicographic iteration and
//! colexicographic ranking into a dense counter array.

/// Table of binomial coefficients `C(n, r)` for `n <= max_n`, `r <= max_r`, saturating.
#[derive(Debug, Clone)]
pub(crate) struct BinomialTable {
    max_r: usize,
    rows: Vec<u64>,
}

impl BinomialTable {
    pub(crate) fn new(max_n: usize, max_r: usize) -> Self {
        let width = max_r + 1;
        let mut rows = vec![0u64; (max_n + 1) * width];
        for n in 0..=max_n {
            rows[n * width] = 1;
            for r in 1..=max_r.min(n) {
                let a = rows[(n - 1) * width + r - 1];
                let b = rows[(n - 1) * width + r];
                rows[n * width + r] = a.saturating_add(b);
            }
        }
        Self { max_r, rows }
    }

    pub(crate) fn get(&self, n: usize, r: usize) -> u64 {
        if r > n {
            return 0;
        }
        self.rows[n * (self.max_r + 1) + r]
    }

    /// Colex rank of a strictly increasing subset.
    pub(crate) fn rank(&self, subset: &[u32]) -> usize {
        subset
            .iter()
            .enumerate()
            .map(|(i, &p)| self.get(p as usize, i + 1) as usize)
            .sum()
    }
}

/// Saturating `C(n, r)` in `u64`.
pub fn binomial_u64(n: u64, r: u64) -> u64 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 1..=r as u128 {
        acc = acc * (n as u128 - r as u128 + i) / i;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Advances `c` to the next `c.len()`-subset of `0..n` in lexicographic
/// order. Returns false after the last subset.
pub fn next_combination(c: &mut [u32], n: u32) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - (k - i) as u32 {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// All `r`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: u32, r: u32) -> Combinations {
    Combinations {
        n,
        current: if r <= n { Some((0..r).collect()) } else { None },
    }
}

pub struct Combinations {
    n: u32,
    current: Option<Vec<u32>>,
}

impl Iterator for Combinations {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        let out = self.current.clone()?;
        let mut c = out.clone();
        self.current = if next_combination(&mut c, self.n) {
            Some(c)
        } else {
            None
        };
        Some(out)
    }
}

/// Calls `f` with every `r`-subset of the sorted slice `items`.
pub(crate) fn for_each_subset(items: &[u32], r: usize, mut f: impl FnMut(&[u32])) {
    if r > items.len() {
        return;
    }
    let mut idx: Vec<u32> = (0..r as u32).collect();
    let mut buf = vec![0u32; r];
    loop {
        for (b, &i) in buf.iter_mut().zip(&idx) {
            *b = items[i as usize];
        }
        f(&buf);
        if !next_combination(&mut idx, items.len() as u32) {
            break;
        }
    }
}
