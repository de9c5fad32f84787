//! Query access to Boolean functions on the hypercube: the
//! [`BooleanFunction`] trait, dense truth tables, the generator families and
//! the query meter.

mod family;
mod meter;
mod table;

use std::sync::Arc;

pub use family::{instantiate, FamilyFunction, FamilySpec};
pub use meter::{QueryMeter, QueryStats};
pub use table::{TruthTable, MAX_TABLE_DIM};

use crate::error::{Error, Result};
use crate::hypercube::Point;

/// A total, deterministic map `{0,1}^n -> {0,1}`.
///
/// `eval` may assume `x.dim() == self.dim()`; use [`evaluate`] when the
/// point comes from outside.
pub trait BooleanFunction: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &Point) -> bool;
}

impl<F: BooleanFunction + ?Sized> BooleanFunction for &F {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &Point) -> bool {
        (**self).eval(x)
    }
}

impl<F: BooleanFunction + ?Sized> BooleanFunction for Box<F> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &Point) -> bool {
        (**self).eval(x)
    }
}

impl<F: BooleanFunction + ?Sized> BooleanFunction for Arc<F> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &Point) -> bool {
        (**self).eval(x)
    }
}

/// `f(x)`, checking dimensions.
pub fn evaluate<F: BooleanFunction + ?Sized>(f: &F, x: &Point) -> Result<bool> {
    if x.dim() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), found: x.dim() });
    }
    Ok(f.eval(x))
}

/// Adapts a closure into a [`BooleanFunction`].
#[derive(Clone)]
pub struct FnFunction<G> {
    dim: usize,
    g: G,
}

impl<G: Fn(&Point) -> bool + Send + Sync> FnFunction<G> {
    pub fn new(dim: usize, g: G) -> Self {
        FnFunction { dim, g }
    }
}

impl<G: Fn(&Point) -> bool + Send + Sync> BooleanFunction for FnFunction<G> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &Point) -> bool {
        (self.g)(x)
    }
}

/// Tabulates `f` by evaluating it on every point. Requires `n <= 30`.
pub fn to_truth_table<F: BooleanFunction + ?Sized>(f: &F) -> Result<TruthTable> {
    let n = f.dim();
    if n > MAX_TABLE_DIM {
        return Err(Error::DimensionTooLarge { what: "dense truth table", n, max: MAX_TABLE_DIM });
    }
    TruthTable::from_fn(n, |i| f.eval(&Point::from_index_unchecked(n, i)))
}
