use std::fmt;

use crate::error::{Error, Result};
use crate::hypercube::Point;

/// An undirected edge of `H_n` in canonical form: the lower endpoint plus
/// the coordinate that separates it from the upper endpoint.
///
/// The lower endpoint always has the edge coordinate cleared, so
/// `lower ≺ upper` and each undirected edge has exactly one representation.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    lower: Point,
    coord: usize,
}

impl Edge {
    pub fn new(lower: Point, coord: usize) -> Result<Edge> {
        if lower.get(coord)? {
            return Err(Error::InvalidParameter(format!("lower endpoint {lower} has coordinate {coord} set")));
        }
        Ok(Edge { lower, coord })
    }

    /// Canonical edge joining two adjacent points, in either order.
    pub fn between(a: &Point, b: &Point) -> Result<Edge> {
        a.check_same_dim(b)?;
        let coord =
            a.adjacent_coord(b).ok_or_else(|| Error::InvalidParameter(format!("{a} and {b} are not adjacent")))?;
        Ok(Edge::spanning(a, coord))
    }

    /// Canonical edge through `x` along `coord` (1-based, unchecked).
    #[inline]
    pub(crate) fn spanning(x: &Point, coord: usize) -> Edge {
        let mut lower = x.clone();
        if lower.bit(coord - 1) {
            lower.toggle(coord - 1);
        }
        Edge { lower, coord }
    }

    #[inline]
    pub fn lower(&self) -> &Point {
        &self.lower
    }

    pub fn upper(&self) -> Point {
        let mut up = self.lower.clone();
        up.toggle(self.coord - 1);
        up
    }

    #[inline]
    pub fn coord(&self) -> usize {
        self.coord
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.lower.dim()
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {} (coordinate {})", self.lower, self.upper(), self.coord)
    }
}

impl fmt::Debug for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Edge(lower={}, coord={})", self.lower, self.coord)
    }
}
