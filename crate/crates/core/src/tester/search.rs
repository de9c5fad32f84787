use crate::error::{Error, Result};
use crate::function::BooleanFunction;
use crate::hypercube::{Edge, Point, WalkPath};

/// Locates an influential edge on `path` given `f(p_0) != f(p_ℓ)`.
///
/// Invariant: `lo < hi` and `f(p_lo) != f(p_hi)`. Each round probes
/// `mid = ⌊(lo + hi) / 2⌋` and keeps `[lo, mid]` when `f(p_mid) != f(p_lo)`
/// (the left half wins whenever it qualifies), else `[mid, hi]`. Uses at most
/// `⌈log₂ ℓ⌉` queries besides the two endpoints, which the caller supplies.
///
/// Returns the canonical edge `(p_{t-1}, p_t)` and `t`.
pub(crate) fn bisect(path: &WalkPath, start_value: bool, mut query: impl FnMut(&Point) -> bool) -> (Edge, usize) {
    let (mut lo, mut hi) = (0usize, path.len());
    let mut lo_value = start_value;
    let mut probe = path.cursor();
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let v = query(probe.seek(mid));
        if v != lo_value {
            hi = mid;
        } else {
            lo = mid;
            lo_value = v;
        }
    }
    let t = hi;
    (Edge::spanning(probe.seek(lo), path.step(t)), t)
}

/// Binary search for an influential edge on a walk whose endpoints receive
/// different values. Queries `f` directly (no caching).
pub fn binary_search_influential<F: BooleanFunction + ?Sized>(f: &F, path: &WalkPath) -> Result<(Edge, usize)> {
    if path.dim() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), found: path.dim() });
    }
    let start = f.eval(path.start());
    if path.is_empty() || start == f.eval(&path.end()) {
        return Err(Error::Precondition("walk endpoints have equal values".into()));
    }
    Ok(bisect(path, start, |x| f.eval(x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::FnFunction;

    /// A function that reads `values[i]` at `p_i` for the walk
    /// 0000 -> 1000 -> 1100 -> 1110 -> 1111 (weight = position).
    fn staircase(values: &'static [bool]) -> (FnFunction<impl Fn(&Point) -> bool + Send + Sync>, WalkPath) {
        let n = values.len() - 1;
        let f = FnFunction::new(n, move |x: &Point| values[x.weight() as usize]);
        let path = WalkPath::new(Point::zeros(n), 1..=n).unwrap();
        (f, path)
    }

    #[test]
    fn trace_examples() {
        let (f, p) = staircase(&[false, false, true, true]);
        let (e, t) = binary_search_influential(&f, &p).unwrap();
        assert_eq!(t, 2);
        assert_eq!(e, p.edge_at(2).unwrap());

        let (f, p) = staircase(&[true, false]);
        assert_eq!(binary_search_influential(&f, &p).unwrap().1, 1);

        // mid = 1 already differs from p_0, so the left half is kept.
        let (f, p) = staircase(&[false, true, false, true]);
        assert_eq!(binary_search_influential(&f, &p).unwrap().1, 1);
    }

    #[test]
    fn equal_endpoints_rejected() {
        let (f, p) = staircase(&[false, true, false]);
        assert!(matches!(binary_search_influential(&f, &p), Err(Error::Precondition(_))));
        let empty = WalkPath::new(Point::zeros(2), []).unwrap();
        assert!(binary_search_influential(&f, &empty).is_err());
    }

    #[test]
    fn query_budget() {
        // ell = 16 needs at most 4 probes
        let (f, p) = staircase(&[
            false, false, false, false, false, false, false, false, false, false, false, false, false, false, false,
            true, true,
        ]);
        let mut probes = 0;
        let (_, t) = bisect(&p, false, |x| {
            probes += 1;
            f.eval(x)
        });
        assert_eq!(t, 15);
        assert!(probes <= 4);
    }
}
