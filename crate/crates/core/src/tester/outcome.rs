use std::fmt;

use crate::function::QueryStats;
use crate::hypercube::Edge;

/// A violating edge found by a tester, with where it was found.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    /// `lower ≺ upper` with `f(lower) = 1` and `f(upper) = 0`.
    pub edge: Edge,
    /// Length of the walk that exposed the edge (1 for the edge sampler).
    pub walk_length: usize,
    /// Position `t` of the edge on that walk, `1 <= t <= walk_length`.
    pub step: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject(Witness),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub verdict: Verdict,
    /// Walk length of the (last) invocation; `None` for the edge sampler.
    pub walk_length: Option<usize>,
    /// Queries spent by this call, as counted by its meter.
    pub stats: QueryStats,
    /// Invocations performed (1 for a single run).
    pub runs: u64,
}

impl Outcome {
    pub fn is_reject(&self) -> bool {
        matches!(self.verdict, Verdict::Reject(_))
    }

    pub fn witness(&self) -> Option<&Witness> {
        match &self.verdict {
            Verdict::Reject(w) => Some(w),
            Verdict::Accept => None,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Accept => f.write_str("ACCEPT"),
            Verdict::Reject(w) => {
                write!(f, "REJECT violation {} (walk length {}, step {})", w.edge, w.walk_length, w.step)
            }
        }
    }
}
