use num_rational::Ratio;
use rand::Rng;
use serde::Serialize;

use crate::error::Result;
use crate::function::{BooleanFunction, TruthTable};
use crate::hypercube::{sample_edge, Edge, Point};
use crate::stats::{wilson_interval, Z95};

/// Exact edge counts of a function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfluenceReport {
    pub n: usize,
    pub influential_count: u64,
    pub violating_count: u64,
    /// `I(f) = influential_count / 2^(n-1)`.
    pub total_influence: Ratio<u64>,
}

impl InfluenceReport {
    /// Number of edges of `H_n`, `n · 2^(n-1)`.
    pub fn edge_count(&self) -> u64 {
        self.n as u64 * (1u64 << (self.n - 1))
    }
}

// LOW_HALF[b] has bit i set iff bit b of i is 0, for i in 0..64.
const LOW_HALF: [u64; 6] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0f0f_0f0f_0f0f_0f0f,
    0x00ff_00ff_00ff_00ff,
    0x0000_ffff_0000_ffff,
    0x0000_0000_ffff_ffff,
];

/// Counts influential and violating edges over all `n · 2^(n-1)` edges,
/// one coordinate at a time with word-parallel comparisons.
pub fn influence_report(f: &TruthTable) -> Result<InfluenceReport> {
    let n = f.dim();
    let words = f.words();
    let (mut influential, mut violating) = (0u64, 0u64);
    for (b, &low) in LOW_HALF.iter().enumerate().take(n) {
        let shift = 1u32 << b;
        for &w in words {
            let up = w >> shift;
            influential += u64::from(((w ^ up) & low).count_ones());
            violating += u64::from((w & !up & low).count_ones());
        }
    }
    for b in 6..n {
        let stride = 1usize << (b - 6);
        for j in (0..words.len()).filter(|j| j & stride == 0) {
            let (lo, hi) = (words[j], words[j + stride]);
            influential += u64::from((lo ^ hi).count_ones());
            violating += u64::from((lo & !hi).count_ones());
        }
    }
    Ok(InfluenceReport {
        n,
        influential_count: influential,
        violating_count: violating,
        total_influence: Ratio::new(influential, 1u64 << (n - 1)),
    })
}

/// All violating edges `(x, x + e_i)` with `f(x) = 1`, `f(x + e_i) = 0`.
pub fn violating_edges(f: &TruthTable) -> Vec<Edge> {
    let n = f.dim();
    let mut out = Vec::new();
    for x in 0..f.len() {
        if !f.get(x) {
            continue;
        }
        for b in 0..n {
            let up = x | (1 << b);
            if up != x && !f.get(up) {
                out.push(Edge::spanning(&Point::from_index_unchecked(n, x), b + 1));
            }
        }
    }
    out
}

/// True iff `f` has no violating edge, i.e. is monotone.
pub fn is_monotone(f: &TruthTable) -> bool {
    influence_report(f).map(|r| r.violating_count == 0).unwrap_or(false)
}

/// Fraction of influential edges that are violating.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeRatio {
    pub ratio: Ratio<u64>,
    /// Set when `f` has no influential edges; the ratio is then reported as 0.
    pub degenerate: bool,
}

pub fn violating_influential_ratio(f: &TruthTable) -> Result<EdgeRatio> {
    let r = influence_report(f)?;
    Ok(if r.influential_count == 0 {
        EdgeRatio { ratio: Ratio::from_integer(0), degenerate: true }
    } else {
        EdgeRatio { ratio: Ratio::new(r.violating_count, r.influential_count), degenerate: false }
    })
}

/// Sampling estimate of the violating/influential ratio for functions too
/// large to tabulate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampledEdgeRatio {
    pub samples: u64,
    pub influential: u64,
    pub violating: u64,
    pub ratio: f64,
    /// 95% Wilson interval on the ratio, conditional on the influential count.
    pub low: f64,
    pub high: f64,
    pub degenerate: bool,
}

pub fn sampled_violating_ratio<F, R>(f: &F, rng: &mut R, samples: u64) -> SampledEdgeRatio
where
    F: BooleanFunction + ?Sized,
    R: Rng + ?Sized,
{
    let (mut influential, mut violating) = (0u64, 0u64);
    for _ in 0..samples {
        let e = sample_edge(rng, f.dim());
        let (lo, hi) = (f.eval(e.lower()), f.eval(&e.upper()));
        if lo != hi {
            influential += 1;
            violating += u64::from(lo);
        }
    }
    let (low, high) = wilson_interval(violating, influential, Z95);
    SampledEdgeRatio {
        samples,
        influential,
        violating,
        ratio: if influential == 0 { 0.0 } else { violating as f64 / influential as f64 },
        low,
        high,
        degenerate: influential == 0,
    }
}
