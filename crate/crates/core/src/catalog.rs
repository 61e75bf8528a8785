//! Catalogs of large sets and of simple designs known to exist.

use crate::arith::{binomial, lambda_max, lambda_min};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

const LARGE_SETS: &str = include_str!("../data/catalog/large_sets.json");
const KNOWN_DESIGNS: &str = include_str!("../data/catalog/known_designs.json");

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("malformed catalog: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("LS[{n}]({s},{k},{v}): {n} does not divide C({}, {})", v - s, k - s)]
    ClassCount { s: u32, k: u32, v: u32, n: u64 },
    #[error("{t}-({v},{k}): m = {m} exceeds lambda_max / lambda_min")]
    Multiplier { t: u32, v: u32, k: u32, m: u64 },
    #[error("invalid parameters {0}")]
    Parameters(String),
}

/// `LS[N](s, k, v)`: a partition of the complete `k`-subset design on `v`
/// points into `N` classes, each an `s-(v, k, tau)` design.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LargeSetRecord {
    pub s: u32,
    pub k: u32,
    pub v: u32,
    #[serde(rename = "N")]
    pub n: u64,
    pub source: String,
    #[serde(default)]
    pub explicit: bool,
}

impl LargeSetRecord {
    pub fn tau(&self) -> BigInt {
        binomial((self.v - self.s) as u64, (self.k - self.s) as i64) / BigInt::from(self.n)
    }

    fn check(&self) -> Result<(), CatalogError> {
        if !(self.v >= self.k && self.k >= self.s) || self.n == 0 {
            return Err(CatalogError::Parameters(format!("LS[{}]({},{},{})", self.n, self.s, self.k, self.v)));
        }
        let through = binomial((self.v - self.s) as u64, (self.k - self.s) as i64);
        if !through.is_multiple_of(&BigInt::from(self.n)) {
            return Err(CatalogError::ClassCount {
                s: self.s,
                k: self.k,
                v: self.v,
                n: self.n,
            });
        }
        Ok(())
    }
}

/// Multipliers `m` for which a simple `t-(v, k, m lambda_min)` design is
/// recorded to exist.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnownDesignRecord {
    pub t: u32,
    pub v: u32,
    pub k: u32,
    pub known_m: BTreeSet<u64>,
    pub source: String,
}

impl KnownDesignRecord {
    fn check(&self) -> Result<(), CatalogError> {
        if !(self.v >= self.k && self.k >= self.t) {
            return Err(CatalogError::Parameters(format!("{}-({},{})", self.t, self.v, self.k)));
        }
        let top = lambda_max(self.t, self.k, self.v) / lambda_min(self.t, self.k, self.v);
        if let Some(&m) = self.known_m.iter().find(|&&m| m == 0 || BigInt::from(m) > top) {
            return Err(CatalogError::Multiplier {
                t: self.t,
                v: self.v,
                k: self.k,
                m,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Catalog {
    pub large_sets: Vec<LargeSetRecord>,
    pub known_designs: Vec<KnownDesignRecord>,
}

impl Catalog {
    /// The catalog shipped with the crate.
    pub fn builtin() -> Self {
        Self::from_json(LARGE_SETS, KNOWN_DESIGNS).expect("shipped catalog is well formed")
    }

    pub fn from_json(large_sets: &str, known_designs: &str) -> Result<Self, CatalogError> {
        let catalog = Catalog {
            large_sets: serde_json::from_str(large_sets)?,
            known_designs: serde_json::from_str(known_designs)?,
        };
        catalog.check()?;
        Ok(catalog)
    }

    pub fn check(&self) -> Result<(), CatalogError> {
        self.large_sets.iter().try_for_each(LargeSetRecord::check)?;
        self.known_designs.iter().try_for_each(KnownDesignRecord::check)
    }

    /// All large sets with the given `(s, k, v)`.
    pub fn large_sets(&self, s: u32, k: u32, v: u32) -> Vec<&LargeSetRecord> {
        self.large_sets.iter().filter(|r| (r.s, r.k, r.v) == (s, k, v)).collect()
    }

    /// Whether a simple `t-(v, k, lambda)` design is known.
    ///
    /// Complete designs are always known, and so is the supplement of a
    /// known design in the complete design.
    pub fn design_known(&self, t: u32, v: u32, k: u32, lambda: &BigInt) -> bool {
        if k > v || lambda.is_zero() {
            return false;
        }
        if k <= t {
            return true;
        }
        let top = lambda_max(t, k, v);
        if *lambda == top {
            return true;
        }
        let lmin = lambda_min(t, k, v);
        let (m, rem) = lambda.div_rem(&lmin);
        if !rem.is_zero() || *lambda > top {
            return false;
        }
        let supplement = &top / &lmin - &m;
        self.known_designs
            .iter()
            .filter(|r| (r.t, r.v, r.k) == (t, v, k))
            .flat_map(|r| r.known_m.iter())
            .any(|&x| BigInt::from(x) == m || BigInt::from(x) == supplement)
    }
}
