//! A laboratory for adaptive monotonicity testing of Boolean functions on
//! the hypercube `{0,1}^n`.
//!
//! * [`hypercube`]: points, canonical edges, the partial order and walks.
//! * [`function`]: query access, dense truth tables, generator families and
//!   query metering.
//! * [`oracles`]: exact small-`n` ground truth (influence, survival tables,
//!   sticky sets, exhaustive rejection probabilities, distance to
//!   monotonicity via minimum cut).
//! * [`tester`]: the random-walk + binary-search tester, its amplified form
//!   and the edge-sampling baseline.
//! * [`harness`]: Monte Carlo estimation, sweeps, CSV/JSON reports and the
//!   verification suite behind the `hypermono` CLI.

pub mod error;
pub mod function;
pub mod harness;
pub mod hypercube;
pub mod oracles;
pub mod stats;
pub mod stream;
pub mod tester;

pub use error::{Error, Result};
pub use function::{BooleanFunction, FamilyFunction, FamilySpec, QueryMeter, QueryStats, TruthTable};
pub use hypercube::{Edge, Point, WalkPath};
