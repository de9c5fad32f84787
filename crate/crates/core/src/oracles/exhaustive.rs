use std::collections::HashMap;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::function::TruthTable;

pub const MAX_EXHAUSTIVE_DIM: usize = 4;
pub const MAX_EXHAUSTIVE_ELL: usize = 4;

/// Outcome counts over every `(start, step sequence)` pair of length `ℓ`,
/// each pair carrying probability `1 / (2^n n^ℓ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExhaustiveWalkStats {
    pub n: usize,
    pub ell: usize,
    pub walks: u64,
    pub rejecting: u64,
    pub endpoints_differ: u64,
}

impl ExhaustiveWalkStats {
    pub fn rejection_probability(&self) -> Ratio<u64> {
        Ratio::new(self.rejecting, self.walks)
    }

    pub fn endpoints_differ_probability(&self) -> Ratio<u64> {
        Ratio::new(self.endpoints_differ, self.walks)
    }
}

fn check_size(f: &TruthTable, ell: usize) -> Result<()> {
    if f.dim() > MAX_EXHAUSTIVE_DIM || ell > MAX_EXHAUSTIVE_ELL {
        return Err(Error::InstanceTooLarge {
            what: "exhaustive walk enumeration",
            detail: format!(
                "n = {}, ell = {ell}; limits are n <= {MAX_EXHAUSTIVE_DIM}, ell <= {MAX_EXHAUSTIVE_ELL}",
                f.dim()
            ),
        });
    }
    Ok(())
}

/// Calls `visit(vertices)` for every start vertex and step sequence, where
/// `vertices[i]` is the index of `p_i`.
fn for_each_walk(n: usize, ell: usize, mut visit: impl FnMut(&[u64])) {
    let mut verts = vec![0u64; ell + 1];
    let mut digits = vec![0usize; ell];
    for start in 0..1u64 << n {
        verts[0] = start;
        digits.iter_mut().for_each(|d| *d = 0);
        loop {
            for i in 0..ell {
                verts[i + 1] = verts[i] ^ (1 << digits[i]);
            }
            visit(&verts);
            // odometer over {0..n}^ell
            let mut i = 0;
            while i < ell && digits[i] == n - 1 {
                digits[i] = 0;
                i += 1;
            }
            if i == ell {
                break;
            }
            digits[i] += 1;
        }
    }
}

/// Exact per-walk simulation of one tester invocation at fixed `ℓ`.
///
/// Bisection rule: keep `lo < hi` with differing values, probe
/// `mid = (lo + hi) / 2`, keep the left half when `f(p_mid) != f(p_lo)`.
pub fn exhaustive_walk_stats(f: &TruthTable, ell: usize) -> Result<ExhaustiveWalkStats> {
    check_size(f, ell)?;
    let n = f.dim();
    let (mut walks, mut rejecting, mut differ) = (0u64, 0u64, 0u64);
    for_each_walk(n, ell, |v| {
        walks += 1;
        if f.get(v[0]) == f.get(v[ell]) {
            return;
        }
        differ += 1;
        let (mut lo, mut hi) = (0, ell);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if f.get(v[mid]) != f.get(v[lo]) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let (lower, upper) = if v[lo] < v[hi] { (v[lo], v[hi]) } else { (v[hi], v[lo]) };
        if f.get(lower) && !f.get(upper) {
            rejecting += 1;
        }
    });
    Ok(ExhaustiveWalkStats { n, ell, walks, rejecting, endpoints_differ: differ })
}

/// Exact probability that one tester invocation with walk length `ℓ`
/// rejects `f`.
pub fn exhaustive_rejection_probability(f: &TruthTable, ell: usize) -> Result<Ratio<u64>> {
    Ok(exhaustive_walk_stats(f, ell)?.rejection_probability())
}

/// Probabilities, by enumeration, that a walk crosses exactly one
/// influential edge, in direction `from -> to`, at step `t`.
#[derive(Clone, Debug)]
pub struct UniqueCrossings {
    pub n: usize,
    pub ell: usize,
    pub walks: u64,
    counts: HashMap<(usize, u64, u64), u64>,
}

impl UniqueCrossings {
    pub fn probability(&self, t: usize, from: u64, to: u64) -> Ratio<u64> {
        Ratio::new(self.counts.get(&(t, from, to)).copied().unwrap_or(0), self.walks)
    }

    /// Every `(t, from, to)` with nonzero probability.
    pub fn support(&self) -> impl Iterator<Item = (usize, u64, u64)> + '_ {
        self.counts.keys().copied()
    }
}

pub fn unique_crossing_probabilities(f: &TruthTable, ell: usize) -> Result<UniqueCrossings> {
    check_size(f, ell)?;
    let n = f.dim();
    let mut counts = HashMap::new();
    let mut walks = 0;
    for_each_walk(n, ell, |v| {
        walks += 1;
        let mut crossing = None;
        for t in 1..=ell {
            if f.get(v[t - 1]) != f.get(v[t]) {
                if crossing.is_some() {
                    return;
                }
                crossing = Some((t, v[t - 1], v[t]));
            }
        }
        if let Some(key) = crossing {
            *counts.entry(key).or_insert(0) += 1;
        }
    });
    Ok(UniqueCrossings { n, ell, walks, counts })
}
