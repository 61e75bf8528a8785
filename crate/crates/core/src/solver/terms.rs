//! Per-pair contributions to the block counts `L_{r,t-r}`.

use super::{PairSpec, Scenario, SolverError};
use crate::arith::{containment, lambda_s, ParameterSet};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

/// The three ways a t-set can meet a pair of resolved ingredients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    /// Both parts are covered within single classes.
    A,
    /// Left part within a class, right part only through the whole design.
    B,
    /// Right part within a class, left part only through the whole design.
    C,
}

/// Number of partner classes `z` for a distance window `eps <= d <= w`.
pub fn z_from_w_eps(w: u64, eps: u8, n: u64) -> Result<u64, SolverError> {
    if eps > 1 {
        return Err(SolverError::Contract(format!("eps must be 0 or 1, got {eps}")));
    }
    if w > n / 2 {
        return Err(SolverError::Contract(format!("window w = {w} exceeds floor({n}/2)")));
    }
    let eps = eps as u64;
    if 2 * w < n {
        Ok(2 * w + 1 - eps)
    } else {
        Ok(2 * w - eps)
    }
}

/// Smallest `(w, eps)` realizing `z` partner classes out of `n`.
pub fn w_eps_from_z(z: u64, n: u64) -> Result<(u64, u8), SolverError> {
    if z == 0 || z > n {
        return Err(SolverError::Contract(format!("z = {z} outside 1..={n}")));
    }
    let w = z / 2;
    if z % 2 == 1 {
        Ok((w, 0))
    } else if 2 * w < n {
        Ok((w, 1))
    } else {
        Ok((w, 0))
    }
}

/// Which of the cases applies to `T_{(r, t-r)}` for resolution strengths
/// `s_left` and `s_right`.
pub fn classify_case(r: u32, s_left: u32, s_right: u32, t: u32) -> Result<Case, SolverError> {
    if r > t {
        return Err(SolverError::Contract(format!("r = {r} exceeds t = {t}")));
    }
    match (r <= s_left, t - r <= s_right) {
        (true, true) => Ok(Case::A),
        (true, false) => Ok(Case::B),
        (false, true) => Ok(Case::C),
        (false, false) => Err(SolverError::Contract(format!(
            "r = {r} exceeds s_left = {s_left} and t - r = {} exceeds s_right = {s_right}",
            t - r
        ))),
    }
}

/// Blocks of the left ingredient of size `i` through an `r`-subset of X1.
pub fn left_containment(sc: &Scenario, i: u32, lambda: &BigInt, r: u32) -> Result<BigInt, SolverError> {
    Ok(containment(sc.v1, i, sc.t, lambda, r)?)
}

/// Blocks of the right ingredient of size `j` through an `r`-subset of X2.
pub fn right_containment(sc: &Scenario, j: u32, lambda: &BigInt, r: u32) -> Result<BigInt, SolverError> {
    Ok(containment(sc.v2, j, sc.t, lambda, r)?)
}

/// Blocks of one resolution class through an `r`-subset, `r <= s`.
///
/// The class is an `s-(v, block, tau)` design with `tau` the ingredient's
/// `s`-index divided by the class count.
fn class_containment(
    v: u32,
    block: u32,
    t: u32,
    lambda: &BigInt,
    s: u32,
    n: u64,
    r: u32,
) -> Result<BigInt, SolverError> {
    let through_s = containment(v, block, t, lambda, s)?;
    let (tau, rem) = through_s.div_rem(&BigInt::from(n));
    if !rem.is_zero() {
        return Err(SolverError::Contract(format!(
            "{n} classes do not divide the {s}-index {through_s} of a block-size {block} ingredient on {v} points"
        )));
    }
    if tau.is_zero() {
        return Ok(BigInt::zero());
    }
    Ok(lambda_s(
        &ParameterSet {
            t: s,
            v,
            k: block,
            lambda: tau,
        },
        r,
    )?)
}

/// `Lambda*_{r,t-r}` of an R-pair: blocks of the resolution family through a
/// fixed `T_{(r,t-r)}` when every class is joined with `z` partner classes.
pub fn lambda_star_term(
    sc: &Scenario,
    pair: &PairSpec,
    r: u32,
    lambda_left: &BigInt,
    lambda_right: &BigInt,
    z: u64,
) -> Result<BigInt, SolverError> {
    let res = pair
        .resolution
        .as_ref()
        .ok_or_else(|| SolverError::Contract(format!("pair ({}, {}) is not in R", pair.i, sc.k - pair.i)))?;
    if z == 0 || z > res.n {
        return Err(SolverError::Contract(format!("z = {z} outside 1..={}", res.n)));
    }
    let i = pair.i;
    let j = sc.k - i;
    let tr = sc.t - r;
    let z = BigInt::from(z);
    let term = match classify_case(r, res.s_left, res.s_right, sc.t)? {
        Case::A => {
            class_containment(sc.v1, i, sc.t, lambda_left, res.s_left, res.n, r)?
                * class_containment(sc.v2, j, sc.t, lambda_right, res.s_right, res.n, tr)?
                * BigInt::from(res.n)
                * z
        }
        Case::B => {
            class_containment(sc.v1, i, sc.t, lambda_left, res.s_left, res.n, r)?
                * right_containment(sc, j, lambda_right, tr)?
                * z
        }
        Case::C => {
            left_containment(sc, i, lambda_left, r)?
                * class_containment(sc.v2, j, sc.t, lambda_right, res.s_right, res.n, tr)?
                * z
        }
    };
    Ok(term)
}

/// `lambda^{(i)}_r * lambdabar^{(k-i)}_{t-r}`: blocks of the full union family
/// of pair `(i, k-i)` through a fixed `T_{(r,t-r)}`.
pub fn basic_term(
    sc: &Scenario,
    i: u32,
    r: u32,
    lambda_left: &BigInt,
    lambda_right: &BigInt,
) -> Result<BigInt, SolverError> {
    Ok(left_containment(sc, i, lambda_left, r)? * right_containment(sc, sc.k - i, lambda_right, sc.t - r)?)
}
