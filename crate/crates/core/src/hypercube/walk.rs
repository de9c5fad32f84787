use rand::Rng;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::hypercube::point::{word_count, Words};
use crate::hypercube::{Edge, Point};

/// A walk on `H_n`: a start vertex and the coordinate crossed at each step.
///
/// Vertices `p_0..=p_ℓ` and edges `e_1..=e_ℓ` are derived on demand, so a
/// walk of length `ℓ` costs `O(ℓ)` storage even when `n` is huge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkPath {
    start: Point,
    // 1-based coordinates
    steps: SmallVec<[u32; 8]>,
}

impl WalkPath {
    pub fn new(start: Point, steps: impl IntoIterator<Item = usize>) -> Result<WalkPath> {
        let mut out = SmallVec::new();
        for i in steps {
            start.check_coord(i)?;
            out.push(i as u32);
        }
        Ok(WalkPath { start, steps: out })
    }

    /// Number of edges `ℓ`.
    #[inline]
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.start.dim()
    }

    #[inline]
    pub fn start(&self) -> &Point {
        &self.start
    }

    pub fn steps(&self) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.steps.iter().map(|&c| c as usize)
    }

    /// Coordinate crossed by edge `e_t`, `1 <= t <= ℓ`.
    #[inline]
    pub fn step(&self, t: usize) -> usize {
        self.steps[t - 1] as usize
    }

    /// Vertex `p_i` for `0 <= i <= ℓ`.
    pub fn vertex(&self, i: usize) -> Result<Point> {
        if i > self.len() {
            return Err(Error::IndexOutOfRange { index: i, min: 0, max: self.len() });
        }
        let mut x = self.start.clone();
        for &c in &self.steps[..i] {
            x.toggle(c as usize - 1);
        }
        Ok(x)
    }

    pub fn end(&self) -> Point {
        self.vertex(self.len()).expect("end vertex is always in range")
    }

    pub fn vertices(&self) -> impl Iterator<Item = Point> + '_ {
        let mut x = self.start.clone();
        std::iter::once(x.clone()).chain(self.steps.iter().map(move |&c| {
            x.toggle(c as usize - 1);
            x.clone()
        }))
    }

    /// Canonical edge `e_t` between `p_{t-1}` and `p_t`, `1 <= t <= ℓ`.
    pub fn edge_at(&self, t: usize) -> Result<Edge> {
        if t == 0 || t > self.len() {
            return Err(Error::IndexOutOfRange { index: t, min: 1, max: self.len() });
        }
        let before = self.vertex(t - 1)?;
        Ok(Edge::spanning(&before, self.step(t)))
    }

    pub fn cursor(&self) -> PathCursor<'_> {
        PathCursor { path: self, pos: 0, point: self.start.clone() }
    }
}

/// Moves along a [`WalkPath`] by replaying step flips, so seeking between
/// positions `a` and `b` costs `|a - b|` bit toggles.
#[derive(Clone, Debug)]
pub struct PathCursor<'a> {
    path: &'a WalkPath,
    pos: usize,
    point: Point,
}

impl PathCursor<'_> {
    #[inline]
    pub fn position(&self) -> usize {
        self.pos
    }

    #[inline]
    pub fn point(&self) -> &Point {
        &self.point
    }

    /// Moves to `p_target`. Panics if `target > ℓ`.
    pub fn seek(&mut self, target: usize) -> &Point {
        assert!(target <= self.path.len(), "cursor target beyond end of path");
        let (lo, hi) = if target < self.pos { (target, self.pos) } else { (self.pos, target) };
        for &c in &self.path.steps[lo..hi] {
            self.point.toggle(c as usize - 1);
        }
        self.pos = target;
        &self.point
    }
}

/// A uniformly random vertex of `{0,1}^n`.
pub fn sample_point<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Point {
    if n <= 64 {
        let raw: u64 = rng.gen();
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        return Point::from_index_unchecked(n, raw & mask);
    }
    let words: Words = (0..word_count(n)).map(|_| rng.gen::<u64>()).collect();
    Point::from_words(n, words)
}

/// A uniformly random edge of `H_n`: a uniform coordinate, then a uniform
/// lower endpoint with that coordinate cleared.
pub fn sample_edge<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Edge {
    let coord = rng.gen_range(1..=n);
    let mut lower = sample_point(rng, n);
    if lower.bit(coord - 1) {
        lower.toggle(coord - 1);
    }
    Edge::spanning(&lower, coord)
}

/// `⌈log₂ n⌉` for `n >= 1`.
#[inline]
pub fn ceil_log2(n: usize) -> u32 {
    assert!(n >= 1);
    usize::BITS - (n - 1).leading_zeros()
}

/// A walk length `ℓ = 2^k` drawn by the tester.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct WalkLength {
    pub k: u32,
    pub ell: usize,
}

impl WalkLength {
    pub fn from_exponent(k: u32) -> WalkLength {
        WalkLength { k, ell: 1usize << k }
    }

    /// Every length the tester can choose at dimension `n`, i.e.
    /// `2^0, 2^1, ..., 2^⌈log₂ n⌉`.
    pub fn all(n: usize) -> impl Iterator<Item = WalkLength> {
        (0..=ceil_log2(n)).map(WalkLength::from_exponent)
    }
}

/// Draws `k` uniformly from `{0, 1, ..., ⌈log₂ n⌉}` and sets `ℓ = 2^k`.
pub fn sample_walk_length<R: Rng + ?Sized>(rng: &mut R, n: usize) -> WalkLength {
    let k = rng.gen_range(0..=ceil_log2(n));
    WalkLength::from_exponent(k)
}

/// Transition rule of the walk.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum StepRule {
    /// Every step moves to a uniformly random neighbour.
    #[default]
    Simple,
    /// Each step stays put with probability 1/2. Not the tester's walk; kept
    /// as a mutant for the verification suite.
    Lazy,
}

/// An `ℓ`-step simple random walk from `x`.
pub fn random_walk<R: Rng + ?Sized>(rng: &mut R, x: &Point, ell: usize) -> WalkPath {
    random_walk_with(rng, x, ell, StepRule::Simple)
}

pub fn random_walk_with<R: Rng + ?Sized>(rng: &mut R, x: &Point, ell: usize, rule: StepRule) -> WalkPath {
    let n = x.dim() as u32;
    let mut steps = SmallVec::with_capacity(ell);
    for _ in 0..ell {
        if rule == StepRule::Lazy && rng.gen::<bool>() {
            continue;
        }
        steps.push(rng.gen_range(1..=n));
    }
    WalkPath { start: x.clone(), steps }
}
