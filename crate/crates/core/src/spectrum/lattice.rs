//! The product lattice `{∏_i σ_{k_i} : k ∈ ℕ^d}` behind tensor-product spectra.
//!
//! Products are always formed left to right, `((σ_{k_1}·σ_{k_2})·…)·σ_{k_d}`,
//! so that every routine here sees bit-identical values for the same lattice
//! point. Floating-point multiplication of positive numbers is monotone, which
//! keeps the pruning bounds below exact.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::univariate::Univariate;
use crate::error::{capacity, Result};

/// Largest lattice coordinate probed by the exponential searches.
const MAX_INDEX: u64 = 1 << 62;

pub(crate) fn product(univariate: &Univariate, idx: &[u64]) -> f64 {
    idx.iter().fold(1.0, |acc, &k| acc * univariate.value(k))
}

#[derive(Debug)]
struct Node {
    value: f64,
    idx: Box<[u64]>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // Max-heap on value; equal values pop in lexicographic index order.
    fn cmp(&self, other: &Self) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

/// First `k` values of the non-increasing rearrangement of the `d`-th tensor
/// power of `univariate`.
///
/// Best-first search over the lattice. Every point other than `(1,…,1)` has a
/// unique parent, obtained by decrementing its last coordinate that exceeds
/// one, and parents never have smaller values than their children. A point is
/// therefore pushed exactly once, when its parent is popped, and no visited
/// set is needed. Finite univariate lists may yield fewer than `k` values.
pub fn tensor_rearrange(univariate: &Univariate, d: u32, k: usize, limit: usize) -> Result<Vec<f64>> {
    if k > limit {
        return Err(capacity(format!(
            "{k} tensor-product values requested, materialization limit is {limit}; use counting instead"
        )));
    }
    let d = d as usize;
    let len = univariate.len();
    let mut out = Vec::with_capacity(k);
    if k == 0 || d == 0 || univariate.is_empty() {
        return Ok(out);
    }
    let mut heap = BinaryHeap::new();
    let root = vec![1u64; d].into_boxed_slice();
    heap.push(Node {
        value: product(univariate, &root),
        idx: root,
    });
    while out.len() < k {
        let Some(node) = heap.pop() else { break };
        out.push(node.value);
        let last = node.idx.iter().rposition(|&c| c > 1).unwrap_or(0);
        for i in last..d {
            let next = node.idx[i] + 1;
            if len.is_some_and(|n| next > n) {
                continue;
            }
            let mut idx = node.idx.clone();
            idx[i] = next;
            heap.push(Node {
                value: product(univariate, &idx),
                idx,
            });
        }
    }
    Ok(out)
}

/// Outcome of a lattice count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct LatticeCount {
    pub count: u64,
    pub cap_hit: bool,
}

/// Counts lattice points whose product satisfies `pred`, which must be
/// monotone: if `pred(v)` holds then so does `pred(w)` for every `w ≥ v`.
///
/// The recursion fixes one coordinate at a time and stops a level as soon as
/// even the most favorable completion, all remaining factors equal to `σ_1`,
/// fails the predicate. The last coordinate is resolved by exponential plus
/// binary search. Counting stops once the total exceeds `cap`.
pub(crate) fn count_lattice(univariate: &Univariate, d: u32, pred: &dyn Fn(f64) -> bool, cap: u64) -> LatticeCount {
    let mut state = Counter {
        univariate,
        d: d as usize,
        pred,
        cap,
        total: 0,
        cap_hit: false,
    };
    if d == 0 || univariate.is_empty() {
        return LatticeCount {
            count: 0,
            cap_hit: false,
        };
    }
    state.level(0, 1.0);
    if state.cap_hit {
        LatticeCount {
            count: cap,
            cap_hit: true,
        }
    } else {
        LatticeCount {
            count: state.total,
            cap_hit: false,
        }
    }
}

struct Counter<'a> {
    univariate: &'a Univariate,
    d: usize,
    pred: &'a dyn Fn(f64) -> bool,
    cap: u64,
    total: u64,
    cap_hit: bool,
}

impl Counter<'_> {
    fn level(&mut self, level: usize, prefix: f64) {
        if level + 1 == self.d {
            match self.last_level(prefix) {
                Some(n) => {
                    self.total = self.total.saturating_add(n);
                    if self.total > self.cap {
                        self.cap_hit = true;
                    }
                }
                None => self.cap_hit = true,
            }
            return;
        }
        let s1 = self.univariate.first();
        let remaining = self.d - level - 1;
        let mut k = 1u64;
        loop {
            if self.univariate.len().is_some_and(|n| k > n) {
                break;
            }
            let p = prefix * self.univariate.value(k);
            let best = (0..remaining).fold(p, |acc, _| acc * s1);
            if !(self.pred)(best) {
                break;
            }
            self.level(level + 1, p);
            if self.cap_hit {
                return;
            }
            k += 1;
        }
    }

    /// Largest `k` with `pred(prefix·σ_k)`, `None` when it exceeds the probe range.
    fn last_level(&self, prefix: f64) -> Option<u64> {
        let holds = |k: u64| (self.pred)(prefix * self.univariate.value(k));
        monotone_last_true(holds, self.univariate.len())
    }
}

/// Largest `k ≥ 1` with `holds(k)` for a predicate that is true on an initial
/// segment of the positive integers; 0 when `holds(1)` fails, `None` when the
/// segment reaches beyond `2^62`.
pub(crate) fn monotone_last_true(holds: impl Fn(u64) -> bool, bound: Option<u64>) -> Option<u64> {
    let holds = |k: u64| bound.is_none_or(|n| k <= n) && holds(k);
    if !holds(1) {
        return Some(0);
    }
    let mut lo = 1u64;
    let mut hi = 2u64;
    if let Some(n) = bound {
        hi = hi.min(n + 1);
    }
    while holds(hi) {
        lo = hi;
        if hi >= MAX_INDEX {
            return None;
        }
        hi = hi.saturating_mul(2).min(MAX_INDEX);
        if let Some(n) = bound {
            hi = hi.min(n + 1);
        }
    }
    // holds(lo) && !holds(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}
