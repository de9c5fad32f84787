use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::function::TruthTable;
use crate::oracles::flow::FlowNetwork;
use crate::oracles::influence_report;

pub const MAX_DISTANCE_DIM: usize = 16;
pub const MAX_BRUTEFORCE_DIM: usize = 4;

/// Exact distance to monotonicity with a closest monotone function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceReport {
    pub flips: u64,
    /// `flips / 2^n`.
    pub distance: Ratio<u64>,
    pub witness: TruthTable,
}

/// Binary isotonic regression as a minimum s-t cut.
///
/// Node `x` sits on the source side iff the witness `g` has `g(x) = 1`.
/// Arcs: `s -> x` with capacity 1 when `f(x) = 1` (cut iff `g(x) = 0`),
/// `x -> t` with capacity 1 when `f(x) = 0` (cut iff `g(x) = 1`), and an
/// uncuttable arc `x -> x + e_i` for every hypercube edge, which forbids
/// `g(x) = 1, g(x + e_i) = 0` and so makes the source side an up-set.
pub fn distance_to_monotonicity(f: &TruthTable) -> Result<DistanceReport> {
    let n = f.dim();
    if n > MAX_DISTANCE_DIM {
        return Err(Error::DimensionTooLarge { what: "min-cut distance oracle", n, max: MAX_DISTANCE_DIM });
    }
    let size = f.len() as usize;
    let (source, sink) = (size, size + 1);
    let unbounded = size as u64 + 1;
    let mut net = FlowNetwork::new(size + 2);
    for x in 0..size {
        if f.get(x as u64) {
            net.add_arc(source, x, 1);
        } else {
            net.add_arc(x, sink, 1);
        }
        for b in 0..n {
            if x & (1 << b) == 0 {
                net.add_arc(x, x | (1 << b), unbounded);
            }
        }
    }
    let flips = net.max_flow(source, sink);
    let side = net.source_side(source);
    let witness = TruthTable::from_fn(n, |x| side[x as usize])?;
    debug_assert_eq!(witness.hamming_distance(f)?, flips);
    Ok(DistanceReport { flips, distance: Ratio::new(flips, f.len()), witness })
}

/// Every monotone function on `n <= 4` variables (6, 20, 168 of them for
/// `n = 2, 3, 4`), found by filtering all `2^(2^n)` tables.
pub fn monotone_functions(n: usize) -> Result<Vec<TruthTable>> {
    if n == 0 || n > MAX_BRUTEFORCE_DIM {
        return Err(Error::DimensionTooLarge { what: "monotone function enumeration", n, max: MAX_BRUTEFORCE_DIM });
    }
    let mut out = Vec::new();
    for packed in 0..1u64 << (1u32 << n) {
        let t = TruthTable::from_packed(n, packed)?;
        if influence_report(&t)?.violating_count == 0 {
            out.push(t);
        }
    }
    Ok(out)
}

/// Minimum number of flips to reach a monotone function, by scanning all
/// monotone functions.
pub fn distance_bruteforce(f: &TruthTable) -> Result<u64> {
    let all = monotone_functions(f.dim())?;
    distance_bruteforce_among(f, &all)
}

/// As [`distance_bruteforce`] with a precomputed list from
/// [`monotone_functions`].
pub fn distance_bruteforce_among(f: &TruthTable, monotone: &[TruthTable]) -> Result<u64> {
    let packed = f.packed().filter(|_| f.dim() <= MAX_BRUTEFORCE_DIM).ok_or(Error::DimensionTooLarge {
        what: "brute-force distance oracle",
        n: f.dim(),
        max: MAX_BRUTEFORCE_DIM,
    })?;
    monotone
        .iter()
        .map(|g| g.packed().map(|q| u64::from((q ^ packed).count_ones())))
        .min()
        .flatten()
        .ok_or_else(|| Error::InvalidParameter("empty or mismatched monotone list".into()))
}
