//! The adaptive random-walk + binary-search tester, its amplified and
//! dispatching forms, and the edge-sampling baseline.

mod adaptive;
mod baseline;
mod outcome;
mod search;

pub use adaptive::{
    pilot_repetitions, query_bound, query_bound_for_length, run_amplified, run_once, run_once_metered, run_with_length,
    AmplifyConfig,
};
pub use baseline::{
    edge_sampler, estimate_influence, is_violation, run_dispatched, DispatchConfig, DispatchOutcome, InfluenceEstimate,
    Regime,
};
pub use outcome::{Outcome, Verdict, Witness};
pub use search::binary_search_influential;
