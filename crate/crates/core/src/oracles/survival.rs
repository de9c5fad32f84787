use crate::error::{Error, Result};
use crate::function::TruthTable;
use crate::hypercube::{Edge, Point};
use crate::oracles::violating_edges;

/// Largest dimension for survival tables.
pub const MAX_SURVIVAL_DIM: usize = 20;

/// Survival values at or above `1/2 - STICKY_TOLERANCE` count as sticky.
pub const STICKY_TOLERANCE: f64 = 1e-12;

/// Survival values within this distance of `1/2` are reported as boundary
/// cases.
pub const BOUNDARY_BAND: f64 = 1e-9;

/// Exact survival probabilities `s[ℓ][x]`: the probability that an `ℓ`-step
/// simple random walk from `x` crosses no influential edge. Equivalently
/// `Pr[Z_{x,ℓ} = 0]` where `Z_{x,ℓ}` counts influential edges on the walk.
#[derive(Clone, Debug)]
pub struct StickyTable {
    n: usize,
    rows: Vec<Vec<f64>>,
}

impl StickyTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ell_max(&self) -> usize {
        self.rows.len() - 1
    }

    /// `s[ell][x]`. Panics if `ell > ell_max` or `x >= 2^n`.
    #[inline]
    pub fn get(&self, ell: usize, x: u64) -> f64 {
        self.rows[ell][x as usize]
    }

    pub fn row(&self, ell: usize) -> Option<&[f64]> {
        self.rows.get(ell).map(Vec::as_slice)
    }

    fn check_ell(&self, ell: usize) -> Result<()> {
        if ell > self.ell_max() {
            return Err(Error::IndexOutOfRange { index: ell, min: 0, max: self.ell_max() });
        }
        Ok(())
    }
}

/// Runs the recurrence
/// `s[ℓ][x] = (1/n) Σ_{i : f(x) = f(x ⊕ e_i)} s[ℓ-1][x ⊕ e_i]`, `s[0][x] = 1`.
pub fn survival_table(f: &TruthTable, ell_max: usize) -> Result<StickyTable> {
    let n = f.dim();
    if n > MAX_SURVIVAL_DIM {
        return Err(Error::DimensionTooLarge { what: "survival table", n, max: MAX_SURVIVAL_DIM });
    }
    if ell_max == 0 {
        return Err(Error::InvalidParameter("ell_max must be at least 1".into()));
    }
    let size = f.len() as usize;
    // quiet[x]: coordinates whose edge at x is not influential
    let quiet: Vec<u32> = (0..size as u64)
        .map(|x| (0..n).filter(|&b| f.get(x) == f.get(x ^ (1 << b))).fold(0u32, |m, b| m | 1 << b))
        .collect();
    let inv_n = 1.0 / n as f64;
    let mut rows = vec![vec![1.0; size]];
    for ell in 1..=ell_max {
        let prev = &rows[ell - 1];
        let next: Vec<f64> = (0..size)
            .map(|x| {
                let mut m = quiet[x];
                let mut acc = 0.0;
                while m != 0 {
                    let b = m.trailing_zeros();
                    acc += prev[x ^ (1 << b)];
                    m &= m - 1;
                }
                acc * inv_n
            })
            .collect();
        rows.push(next);
    }
    Ok(StickyTable { n, rows })
}

/// The `ℓ`-sticky vertices and `F_ℓ`, the violating edges with both
/// endpoints `ℓ`-sticky.
#[derive(Clone, Debug)]
pub struct FEllSet {
    pub ell: usize,
    sticky: Vec<bool>,
    pub edges: Vec<Edge>,
    /// Vertices whose survival value lies within [`BOUNDARY_BAND`] of 1/2.
    pub boundary: Vec<u64>,
}

impl FEllSet {
    #[inline]
    pub fn is_sticky(&self, x: u64) -> bool {
        self.sticky[x as usize]
    }

    pub fn sticky_vertices(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.sticky.len() as u64).filter(|&x| self.sticky[x as usize])
    }

    /// The set `N` of non-sticky vertices.
    pub fn nonsticky_vertices(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.sticky.len() as u64).filter(|&x| !self.sticky[x as usize])
    }

    pub fn nonsticky_count(&self) -> u64 {
        self.sticky.iter().filter(|s| !**s).count() as u64
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

pub fn sticky_set(f: &TruthTable, table: &StickyTable, ell: usize) -> Result<FEllSet> {
    if table.n() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), found: table.n() });
    }
    table.check_ell(ell)?;
    let row = &table.rows[ell];
    let sticky: Vec<bool> = row.iter().map(|&s| s >= 0.5 - STICKY_TOLERANCE).collect();
    let boundary = (0..row.len() as u64).filter(|&x| (row[x as usize] - 0.5).abs() <= BOUNDARY_BAND).collect();
    let edges =
        violating_edges(f).into_iter().filter(|e| sticky[index(e.lower())] && sticky[index(&e.upper())]).collect();
    Ok(FEllSet { ell, sticky, edges, boundary })
}

#[inline]
fn index(x: &Point) -> usize {
    x.index().expect("survival tables are limited to n <= 20") as usize
}

/// Probability that an `ℓ`-walk from a uniform start crosses the directed
/// edge `from -> to` at step `t` and no other influential edge:
/// `(1/(n 2^n)) · s[t-1][from] · s[ℓ-t][to]`.
pub fn claim_product(table: &StickyTable, ell: usize, t: usize, from: u64, to: u64) -> f64 {
    let n = table.n();
    table.get(t - 1, from) * table.get(ell - t, to) / (n as f64 * (1u64 << n) as f64)
}

/// `Σ_{(u,v) ∈ F_ℓ} Pr[E_{u,v}]`, where `E_{u,v}` is the event that the walk
/// crosses `(u,v)` exactly once and crosses no other influential edge. The
/// events are disjoint and each forces the tester to find and reject the
/// violation `(u,v)`, so the sum lower-bounds the rejection probability at
/// walk length `ℓ`.
///
/// The undirected edge is crossed at step `t` in either direction with
/// probability `1/(n 2^n)` each, so each `(u,v,t)` term is the sum of the two
/// directed [`claim_product`]s.
pub fn event_probability_sum(f: &TruthTable, table: &StickyTable, ell: usize) -> Result<f64> {
    let set = sticky_set(f, table, ell)?;
    Ok(event_probability_sum_for(table, &set))
}

pub fn event_probability_sum_for(table: &StickyTable, set: &FEllSet) -> f64 {
    let ell = set.ell;
    set.edges
        .iter()
        .map(|e| {
            let (u, v) = (e.lower().index().unwrap_or(0), e.upper().index().unwrap_or(0));
            (1..=ell).map(|t| claim_product(table, ell, t, u, v) + claim_product(table, ell, t, v, u)).sum::<f64>()
        })
        .sum()
}

/// The explicit-constant lower bound `ℓ · |F_ℓ| / (4 n 2^n)`.
pub fn f_ell_bound(n: usize, ell: usize, f_ell_size: usize) -> f64 {
    (ell * f_ell_size) as f64 / (4.0 * n as f64 * (1u64 << n) as f64)
}

/// Checks `|N| / 2^n <= 2 ℓ I(f) / n` in integers, using
/// `I(f) = influential / 2^(n-1)`: equivalent to `|N| · n <= 4 ℓ · influential`.
pub fn nonsticky_fraction_within_bound(n: usize, ell: usize, nonsticky: u64, influential: u64) -> bool {
    u128::from(nonsticky) * n as u128 <= 4 * ell as u128 * u128::from(influential)
}
