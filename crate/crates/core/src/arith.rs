//! Exact combinatorial arithmetic on design parameters.
//!
//! Everything here works on arbitrary-precision integers. Intermediate
//! quotients are checked for exactness; a non-integral result means the
//! parameter set is not admissible.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("invalid parameters {t}-({v},{k}): require v >= k >= t")]
    InvalidTriple { t: u32, v: u32, k: u32 },
    #[error("index {lambda} out of range for {t}-({v},{k}) (max {max})")]
    IndexOutOfRange {
        t: u32,
        v: u32,
        k: u32,
        lambda: BigInt,
        max: BigInt,
    },
    #[error("{t}-({v},{k},{lambda}) is not admissible: lambda_{s} is not integral")]
    NotIntegral {
        t: u32,
        v: u32,
        k: u32,
        lambda: BigInt,
        s: u32,
    },
    #[error("s = {s} exceeds t = {t}")]
    StrengthOutOfRange { s: u32, t: u32 },
}

/// `C(n, r)`, zero when `r < 0` or `r > n`.
pub fn binomial(n: u64, r: i64) -> BigInt {
    if r < 0 || r as u64 > n {
        return BigInt::zero();
    }
    let r = (r as u64).min(n - r as u64);
    let mut acc = BigInt::one();
    for i in 1..=r {
        // acc * (n - r + i) is divisible by i at every step
        acc *= n - r + i;
        acc /= i;
    }
    acc
}

/// Binomial taking signed arguments, zero outside `0 <= r <= n`.
pub fn binomial_i(n: i64, r: i64) -> BigInt {
    if n < 0 {
        return BigInt::zero();
    }
    binomial(n as u64, r)
}

fn check_triple(t: u32, k: u32, v: u32) -> Result<(), ArithError> {
    if v >= k && k >= t {
        Ok(())
    } else {
        Err(ArithError::InvalidTriple { t, v, k })
    }
}

/// A `t-(v, k, lambda)` parameter set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParameterSet {
    pub t: u32,
    pub v: u32,
    pub k: u32,
    pub lambda: BigInt,
}

impl ParameterSet {
    /// Builds a parameter set, checking `v >= k >= t` and `0 < lambda <= lambda_max`.
    pub fn new(t: u32, v: u32, k: u32, lambda: impl Into<BigInt>) -> Result<Self, ArithError> {
        check_triple(t, k, v)?;
        let lambda = lambda.into();
        let max = lambda_max(t, k, v);
        if !lambda.is_positive() || lambda > max {
            return Err(ArithError::IndexOutOfRange {
                t,
                v,
                k,
                lambda,
                max,
            });
        }
        Ok(Self { t, v, k, lambda })
    }

    /// True when `lambda` is a multiple of `lambda_min`.
    pub fn is_admissible(&self) -> bool {
        self.lambda
            .is_multiple_of(&lambda_min(self.t, self.k, self.v))
    }

    /// Number of blocks, `lambda_0`.
    pub fn block_count(&self) -> Result<BigInt, ArithError> {
        lambda_s(self, 0)
    }
}

impl std::fmt::Display for ParameterSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}-({},{},{})", self.t, self.v, self.k, self.lambda)
    }
}

/// `lambda * C(v-s, t-s) / C(k-s, t-s)`, the number of blocks through an `s`-set.
pub fn lambda_s(p: &ParameterSet, s: u32) -> Result<BigInt, ArithError> {
    if s > p.t {
        return Err(ArithError::StrengthOutOfRange { s, t: p.t });
    }
    let num = &p.lambda * binomial((p.v - s) as u64, (p.t - s) as i64);
    let den = binomial((p.k - s) as u64, (p.t - s) as i64);
    let (q, rem) = num.div_rem(&den);
    if !rem.is_zero() {
        return Err(ArithError::NotIntegral {
            t: p.t,
            v: p.v,
            k: p.k,
            lambda: p.lambda.clone(),
            s,
        });
    }
    Ok(q)
}

/// Smallest positive index satisfying every divisibility condition
/// `C(k-s, t-s) | lambda * C(v-s, t-s)`, `0 <= s <= t`.
///
/// Panics if `v >= k >= t` does not hold.
pub fn lambda_min(t: u32, k: u32, v: u32) -> BigInt {
    check_triple(t, k, v).expect("lambda_min requires v >= k >= t");
    (0..=t).fold(BigInt::one(), |acc, s| {
        let den = binomial((k - s) as u64, (t - s) as i64);
        let num = binomial((v - s) as u64, (t - s) as i64);
        let reduced = &den / den.gcd(&num);
        acc.lcm(&reduced)
    })
}

/// Index of the complete design, `C(v-t, k-t)`.
pub fn lambda_max(t: u32, k: u32, v: u32) -> BigInt {
    check_triple(t, k, v).expect("lambda_max requires v >= k >= t");
    binomial((v - t) as u64, (k - t) as i64)
}

/// Reporting cap `floor(lambda_max / (2 lambda_min))`.
pub fn lim(t: u32, k: u32, v: u32) -> BigInt {
    lambda_max(t, k, v) / (lambda_min(t, k, v) * 2)
}

/// Parameters of the design obtained by complementing every block.
pub fn complement_params(p: &ParameterSet) -> Result<ParameterSet, ArithError> {
    let kc = p.v - p.k;
    if p.t > kc {
        return Err(ArithError::InvalidTriple {
            t: p.t,
            v: p.v,
            k: kc,
        });
    }
    let num = &p.lambda * binomial(kc as u64, p.t as i64);
    let den = binomial(p.k as u64, p.t as i64);
    let (q, rem) = num.div_rem(&den);
    if !rem.is_zero() {
        return Err(ArithError::NotIntegral {
            t: p.t,
            v: p.v,
            k: p.k,
            lambda: p.lambda.clone(),
            s: p.t,
        });
    }
    Ok(ParameterSet {
        t: p.t,
        v: p.v,
        k: kc,
        lambda: q,
    })
}

/// Number of blocks of an ingredient design on `v` points with block size
/// `block` that contain a fixed `r`-subset.
///
/// For `block <= t` the ingredient is the complete `block`-subset design and
/// `index` is ignored. Otherwise the ingredient is a `t-(v, block, index)`
/// design and `r <= t` is required.
pub fn containment(v: u32, block: u32, t: u32, index: &BigInt, r: u32) -> Result<BigInt, ArithError> {
    if block <= t || r > block {
        return Ok(binomial_i(v as i64 - r as i64, block as i64 - r as i64));
    }
    if block > v {
        return Ok(BigInt::zero());
    }
    if r > t {
        return Err(ArithError::StrengthOutOfRange { s: r, t });
    }
    lambda_s(
        &ParameterSet {
            t,
            v,
            k: block,
            lambda: index.clone(),
        },
        r,
    )
}
