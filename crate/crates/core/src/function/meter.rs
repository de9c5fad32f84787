use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::function::BooleanFunction;
use crate::hypercube::Point;

/// Query counts of one or more tester invocations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryStats {
    /// Evaluations forwarded to the underlying function.
    pub total: u64,
    /// Distinct points queried, counted per invocation and summed.
    pub distinct: u64,
}

impl std::ops::AddAssign for QueryStats {
    fn add_assign(&mut self, rhs: QueryStats) {
        self.total += rhs.total;
        self.distinct += rhs.distinct;
    }
}

/// Counting wrapper around a function under test.
///
/// The cache lives for one tester invocation ([`QueryMeter::begin_run`]
/// clears it). With caching on, a repeated query is answered from the cache
/// and not forwarded; with caching off every query is forwarded but repeats
/// still count once towards `distinct`.
pub struct QueryMeter<'a, F: ?Sized> {
    inner: &'a F,
    caching: bool,
    requests: u64,
    stats: QueryStats,
    cache: SmallVec<[(Point, bool); 8]>,
}

impl<'a, F: BooleanFunction + ?Sized> QueryMeter<'a, F> {
    pub fn new(inner: &'a F) -> Self {
        QueryMeter { inner, caching: true, requests: 0, stats: QueryStats::default(), cache: SmallVec::new() }
    }

    pub fn uncached(inner: &'a F) -> Self {
        QueryMeter { caching: false, ..QueryMeter::new(inner) }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    pub fn inner(&self) -> &'a F {
        self.inner
    }

    /// Starts a new invocation: forgets cached answers, keeps the counters.
    pub fn begin_run(&mut self) {
        self.cache.clear();
    }

    pub fn query(&mut self, x: &Point) -> bool {
        self.requests += 1;
        let hit = self.cache.iter().find(|(p, _)| p == x).map(|&(_, v)| v);
        match hit {
            Some(v) if self.caching => v,
            Some(_) => {
                self.stats.total += 1;
                self.inner.eval(x)
            }
            None => {
                self.stats.total += 1;
                self.stats.distinct += 1;
                let v = self.inner.eval(x);
                self.cache.push((x.clone(), v));
                v
            }
        }
    }

    pub fn stats(&self) -> QueryStats {
        self.stats
    }

    /// Queries issued by the caller, cached or not.
    pub fn requests(&self) -> u64 {
        self.requests
    }
}
