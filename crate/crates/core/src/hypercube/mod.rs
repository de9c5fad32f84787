//! Vertices, canonical edges, the coordinate-wise partial order and random
//! walks on the hypercube `H_n`.

mod edge;
mod point;
mod walk;

pub use edge::Edge;
pub use point::Point;
pub use walk::{
    ceil_log2, random_walk, random_walk_with, sample_edge, sample_point, sample_walk_length, PathCursor, StepRule,
    WalkLength, WalkPath,
};
