//! Bounded enumeration of small integer linear systems.
//!
//! A [`Model`] has integer variables with box domains, terms that are either a
//! single variable or the product of two variables that vanish together, and
//! constraints `lo <= sum a_t * term_t <= hi` with signed coefficients.
//!
//! [`Model::eliminate`] runs Gauss-Jordan elimination over the equality
//! constraints, choosing the widest linear variables as pivots. The search
//! branches only on the remaining free variables; each reduced row then holds
//! a single pivot, so interval propagation on the reduced rows both prunes the
//! free variables and pins every pivot once they are fixed.

use crate::scalar::{div_ceil, Scalar};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use rayon::prelude::*;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum EngineError {
    Overflow,
    NodeLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum TermVars {
    One(usize),
    /// Product of two variables that are zero together or nonzero together.
    Two(usize, usize),
}

#[derive(Debug, Clone)]
pub(crate) struct Constraint<T> {
    pub coef: Vec<(usize, T)>,
    pub lo: T,
    pub hi: T,
}

#[derive(Debug, Clone)]
pub(crate) struct Model<T> {
    pub lo: Vec<T>,
    pub hi: Vec<T>,
    pub terms: Vec<TermVars>,
    pub constraints: Vec<Constraint<T>>,
    /// Variables determined by the others through a reduced row.
    pub pivot: Vec<bool>,
}

type Domains<T> = (Vec<T>, Vec<T>);

macro_rules! checked {
    ($a:expr, $op:ident, $b:expr) => {
        $a.$op($b).ok_or(EngineError::Overflow)?
    };
}

impl<T: Scalar> Model<T> {
    pub(crate) fn new(lo: Vec<T>, hi: Vec<T>, terms: Vec<TermVars>) -> Self {
        let n = lo.len();
        Model {
            lo,
            hi,
            terms,
            constraints: Vec::new(),
            pivot: vec![false; n],
        }
    }

    fn term_bounds(&self, term: TermVars, lo: &[T], hi: &[T]) -> Result<(T, T), EngineError> {
        Ok(match term {
            TermVars::One(j) => (lo[j].clone(), hi[j].clone()),
            TermVars::Two(a, b) => (checked!(lo[a], checked_mul, &lo[b]), checked!(hi[a], checked_mul, &hi[b])),
        })
    }

    /// Range of `a * term` for a term ranging over `[tl, th]`.
    fn scaled(a: &T, tl: &T, th: &T) -> Result<(T, T), EngineError> {
        let x = checked!(a, checked_mul, tl);
        let y = checked!(a, checked_mul, th);
        Ok(if x <= y { (x, y) } else { (y, x) })
    }

    /// Tightens `lo`/`hi` to a fixed point. Returns false on infeasibility.
    fn propagate(&self, lo: &mut [T], hi: &mut [T]) -> Result<bool, EngineError> {
        loop {
            let mut changed = false;
            for c in &self.constraints {
                let mut smin = T::zero();
                let mut smax = T::zero();
                let mut parts = Vec::with_capacity(c.coef.len());
                for (t, a) in &c.coef {
                    let (tl, th) = self.term_bounds(self.terms[*t], lo, hi)?;
                    let (cl, ch) = Self::scaled(a, &tl, &th)?;
                    smin = checked!(smin, checked_add, &cl);
                    smax = checked!(smax, checked_add, &ch);
                    parts.push((cl, ch));
                }
                if smin > c.hi || smax < c.lo {
                    return Ok(false);
                }
                for ((t, a), (cl, ch)) in c.coef.iter().zip(&parts) {
                    // a single free variable with an effective coefficient
                    let (j, eff) = match self.terms[*t] {
                        TermVars::One(j) => (j, a.clone()),
                        TermVars::Two(x, y) => {
                            if lo[x] == hi[x] {
                                (y, checked!(a, checked_mul, &lo[x]))
                            } else if lo[y] == hi[y] {
                                (x, checked!(a, checked_mul, &lo[y]))
                            } else {
                                continue;
                            }
                        }
                    };
                    if eff.is_zero() || lo[j] == hi[j] {
                        continue;
                    }
                    // this term's contribution lies in [need, room]
                    let need = checked!(c.lo, checked_sub, &checked!(smax, checked_sub, ch));
                    let room = checked!(c.hi, checked_sub, &checked!(smin, checked_sub, cl));
                    let (new_lo, new_hi) = if eff.is_positive() {
                        (div_ceil(&need, &eff), room.div_floor(&eff))
                    } else {
                        let neg = -eff;
                        (div_ceil(&-room, &neg), (-need).div_floor(&neg))
                    };
                    if new_lo > lo[j] {
                        lo[j] = new_lo;
                        changed = true;
                    }
                    if new_hi < hi[j] {
                        hi[j] = new_hi;
                        changed = true;
                    }
                    if lo[j] > hi[j] {
                        return Ok(false);
                    }
                }
            }
            for term in &self.terms {
                if let TermVars::Two(a, b) = *term {
                    let zero = T::zero();
                    let one = T::one();
                    if (hi[a] == zero) != (hi[b] == zero) {
                        hi[a] = zero.clone();
                        hi[b] = zero;
                        changed = true;
                    }
                    if (lo[a] >= one) != (lo[b] >= one) {
                        if lo[a] < one {
                            lo[a] = one.clone();
                        }
                        if lo[b] < one {
                            lo[b] = one;
                        }
                        changed = true;
                    }
                    if lo[a] > hi[a] || lo[b] > hi[b] {
                        return Ok(false);
                    }
                }
            }
            if !changed {
                return Ok(true);
            }
        }
    }

    fn satisfied(&self, x: &[T]) -> Result<bool, EngineError> {
        for c in &self.constraints {
            let mut s = T::zero();
            for (t, a) in &c.coef {
                let (v, _) = self.term_bounds(self.terms[*t], x, x)?;
                s = checked!(s, checked_add, &checked!(a, checked_mul, &v));
            }
            if s < c.lo || s > c.hi {
                return Ok(false);
            }
        }
        for term in &self.terms {
            if let TermVars::Two(a, b) = *term {
                if x[a].is_zero() != x[b].is_zero() {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Next variable to branch on: the narrowest unfixed free variable, the
    /// left factor of a product before its right factor.
    fn choose(&self, lo: &[T], hi: &[T]) -> Option<usize> {
        let mut deferred = vec![false; lo.len()];
        for term in &self.terms {
            if let TermVars::Two(a, b) = *term {
                if lo[a] != hi[a] {
                    deferred[b] = true;
                }
            }
        }
        let mut best: Option<(usize, T)> = None;
        for pass_pivots in [false, true] {
            for j in 0..lo.len() {
                if lo[j] == hi[j] || deferred[j] || self.pivot[j] != pass_pivots {
                    continue;
                }
                let width = hi[j].clone() - lo[j].clone();
                if best.as_ref().is_none_or(|(_, w)| width < *w) {
                    best = Some((j, width));
                }
            }
            if best.is_some() {
                break;
            }
        }
        best.map(|(j, _)| j)
    }

    fn dfs(
        &self,
        mut lo: Vec<T>,
        mut hi: Vec<T>,
        nodes: &AtomicU64,
        limit: u64,
        stop: &AtomicBool,
        out: &mut Vec<Vec<T>>,
    ) -> Result<(), EngineError> {
        if stop.load(Ordering::Relaxed) {
            return Err(EngineError::NodeLimit);
        }
        if nodes.fetch_add(1, Ordering::Relaxed) >= limit {
            stop.store(true, Ordering::Relaxed);
            return Err(EngineError::NodeLimit);
        }
        if !self.propagate(&mut lo, &mut hi)? {
            return Ok(());
        }
        match self.choose(&lo, &hi) {
            None => {
                if self.satisfied(&lo)? {
                    out.push(lo);
                }
                Ok(())
            }
            Some(j) => {
                let top = hi[j].clone();
                let mut value = lo[j].clone();
                while value <= top {
                    let mut l = lo.clone();
                    let mut h = hi.clone();
                    l[j] = value.clone();
                    h[j] = value.clone();
                    self.dfs(l, h, nodes, limit, stop, out)?;
                    value = value + T::one();
                }
                Ok(())
            }
        }
    }

    /// All assignments satisfying every constraint, in unspecified order.
    pub(crate) fn solve(&self, node_limit: u64, parallel: bool) -> Result<Vec<Vec<T>>, EngineError> {
        let nodes = AtomicU64::new(0);
        let stop = AtomicBool::new(false);
        if !parallel {
            let mut out = Vec::new();
            self.dfs(self.lo.clone(), self.hi.clone(), &nodes, node_limit, &stop, &mut out)?;
            return Ok(out);
        }

        // breadth-first split into independent subtrees
        let target = 16 * rayon::current_num_threads().max(1);
        let mut frontier: Vec<Domains<T>> = vec![(self.lo.clone(), self.hi.clone())];
        let mut done: Vec<Vec<T>> = Vec::new();
        for _ in 0..6 {
            if frontier.len() >= target || frontier.is_empty() {
                break;
            }
            let mut next = Vec::new();
            for (mut lo, mut hi) in frontier {
                nodes.fetch_add(1, Ordering::Relaxed);
                if !self.propagate(&mut lo, &mut hi)? {
                    continue;
                }
                match self.choose(&lo, &hi) {
                    None => {
                        if self.satisfied(&lo)? {
                            done.push(lo);
                        }
                    }
                    Some(j) => {
                        let mut value = lo[j].clone();
                        while value <= hi[j] {
                            let mut l = lo.clone();
                            let mut h = hi.clone();
                            l[j] = value.clone();
                            h[j] = value.clone();
                            next.push((l, h));
                            value = value + T::one();
                        }
                    }
                }
            }
            frontier = next;
        }
        let parts: Vec<Result<Vec<Vec<T>>, EngineError>> = frontier
            .into_par_iter()
            .map(|(lo, hi)| {
                let mut out = Vec::new();
                self.dfs(lo, hi, &nodes, node_limit, &stop, &mut out)?;
                Ok(out)
            })
            .collect();
        for part in parts {
            done.extend(part?);
        }
        Ok(done)
    }

    pub(crate) fn narrow<U: Scalar>(&self) -> Option<Model<U>> {
        let conv = |x: &T| U::from_big(&x.to_big());
        Some(Model {
            lo: self.lo.iter().map(conv).collect::<Option<_>>()?,
            hi: self.hi.iter().map(conv).collect::<Option<_>>()?,
            terms: self.terms.clone(),
            constraints: self
                .constraints
                .iter()
                .map(|c| {
                    Some(Constraint {
                        coef: c.coef.iter().map(|(t, a)| Some((*t, conv(a)?))).collect::<Option<_>>()?,
                        lo: conv(&c.lo)?,
                        hi: conv(&c.hi)?,
                    })
                })
                .collect::<Option<_>>()?,
            pivot: self.pivot.clone(),
        })
    }
}

impl Model<BigInt> {
    /// Appends the Gauss-Jordan reduction of the equality constraints and
    /// marks its pivot variables.
    pub(crate) fn eliminate(&mut self) {
        let width = self.terms.len();
        let mut rows: Vec<(Vec<BigInt>, BigInt)> = self
            .constraints
            .iter()
            .filter(|c| c.lo == c.hi)
            .map(|c| {
                let mut row = vec![BigInt::zero(); width];
                for (t, a) in &c.coef {
                    row[*t] += a;
                }
                (row, c.lo.clone())
            })
            .collect();
        // widest single-variable terms first
        let span = |t: usize| match self.terms[t] {
            TermVars::One(j) => &self.hi[j] - &self.lo[j],
            TermVars::Two(..) => BigInt::zero(),
        };
        let mut candidates: Vec<usize> = (0..width)
            .filter(|&t| matches!(self.terms[t], TermVars::One(_)))
            .collect();
        candidates.sort_by(|&a, &b| span(b).cmp(&span(a)).then(a.cmp(&b)));
        let mut used = vec![false; rows.len()];
        for col in candidates {
            let Some(p) = (0..rows.len()).find(|&r| !used[r] && !rows[r].0[col].is_zero()) else {
                continue;
            };
            used[p] = true;
            if let TermVars::One(j) = self.terms[col] {
                self.pivot[j] = true;
            }
            let (prow, prhs) = rows[p].clone();
            let pa = prow[col].clone();
            for (r, (row, rhs)) in rows.iter_mut().enumerate() {
                if r == p || row[col].is_zero() {
                    continue;
                }
                let a = row[col].clone();
                for (x, y) in row.iter_mut().zip(&prow) {
                    *x = &*x * &pa - &a * y;
                }
                *rhs = &*rhs * &pa - &a * &prhs;
                normalize(row, rhs);
            }
        }
        for (r, (row, rhs)) in rows.into_iter().enumerate() {
            if !used[r] {
                continue;
            }
            let coef: Vec<(usize, BigInt)> = row.into_iter().enumerate().filter(|(_, a)| !a.is_zero()).collect();
            self.constraints.push(Constraint {
                coef,
                lo: rhs.clone(),
                hi: rhs,
            });
        }
    }
}

fn normalize(row: &mut [BigInt], rhs: &mut BigInt) {
    let g = row.iter().fold(rhs.clone(), |g, x| g.gcd(x));
    if !g.is_zero() && g != BigInt::from(1) {
        for x in row.iter_mut() {
            *x /= &g;
        }
        *rhs /= &g;
    }
}
