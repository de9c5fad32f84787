//! Exact ground truth for small dimensions: edge counts and total
//! influence, survival tables and sticky sets, exhaustive walk enumeration,
//! and the distance to monotonicity.

mod distance;
mod exhaustive;
pub mod flow;
mod influence;
mod survival;

pub use distance::{
    distance_bruteforce, distance_bruteforce_among, distance_to_monotonicity, monotone_functions, DistanceReport,
    MAX_BRUTEFORCE_DIM, MAX_DISTANCE_DIM,
};
pub use exhaustive::{
    exhaustive_rejection_probability, exhaustive_walk_stats, unique_crossing_probabilities, ExhaustiveWalkStats,
    UniqueCrossings, MAX_EXHAUSTIVE_DIM, MAX_EXHAUSTIVE_ELL,
};
pub use influence::{
    influence_report, is_monotone, sampled_violating_ratio, violating_edges, violating_influential_ratio, EdgeRatio,
    InfluenceReport, SampledEdgeRatio,
};
pub use survival::{
    claim_product, event_probability_sum, event_probability_sum_for, f_ell_bound, nonsticky_fraction_within_bound,
    sticky_set, survival_table, FEllSet, StickyTable, BOUNDARY_BAND, MAX_SURVIVAL_DIM, STICKY_TOLERANCE,
};
