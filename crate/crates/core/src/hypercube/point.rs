use std::fmt;
use std::str::FromStr;

use smallvec::SmallVec;

use crate::error::{Error, Result};

pub(crate) type Words = SmallVec<[u64; 1]>;

/// A vertex of the hypercube `{0,1}^n`.
///
/// Coordinates are numbered `1..=n`. Coordinate `i` lives in bit `i - 1` of
/// the little-endian word vector, so for `n <= 64` the integer index of a
/// point is `sum_i x_i * 2^(i-1)`. The textual form writes coordinate 1
/// leftmost: `"100"` is the point with only `x_1` set (index 1).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Point {
    dim: u32,
    words: Words,
}

#[inline]
pub(crate) fn word_count(dim: usize) -> usize {
    dim.div_ceil(64)
}

/// Mask of the valid bits in the last word of a `dim`-bit vector.
#[inline]
pub(crate) fn tail_mask(dim: usize) -> u64 {
    match dim % 64 {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

impl Point {
    /// The all-zeros point. Panics if `dim == 0`.
    pub fn zeros(dim: usize) -> Point {
        assert!(dim >= 1, "hypercube dimension must be positive");
        assert!(dim <= u32::MAX as usize, "hypercube dimension too large");
        Point { dim: dim as u32, words: smallvec::smallvec![0; word_count(dim)] }
    }

    /// Builds the point with integer encoding `index`. Requires `dim <= 64`
    /// and `index < 2^dim`.
    pub fn from_index(dim: usize, index: u64) -> Result<Point> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if dim > 64 {
            return Err(Error::DimensionTooLarge { what: "integer point encoding", n: dim, max: 64 });
        }
        if index & !tail_mask(dim) != 0 {
            return Err(Error::InvalidParameter(format!("index {index} does not fit in {dim} bits")));
        }
        Ok(Point::from_index_unchecked(dim, index))
    }

    #[inline]
    pub(crate) fn from_index_unchecked(dim: usize, index: u64) -> Point {
        debug_assert!((1..=64).contains(&dim));
        Point { dim: dim as u32, words: smallvec::smallvec![index] }
    }

    pub(crate) fn from_words(dim: usize, mut words: Words) -> Point {
        debug_assert_eq!(words.len(), word_count(dim));
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(dim);
        }
        Point { dim: dim as u32, words }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    /// Integer encoding, available when `n <= 64`.
    #[inline]
    pub fn index(&self) -> Option<u64> {
        (self.dim <= 64).then(|| self.words[0])
    }

    #[inline]
    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    /// Value of coordinate `i` (1-based).
    pub fn get(&self, i: usize) -> Result<bool> {
        self.check_coord(i)?;
        Ok(self.bit(i - 1))
    }

    #[inline]
    pub(crate) fn bit(&self, b: usize) -> bool {
        (self.words[b >> 6] >> (b & 63)) & 1 == 1
    }

    #[inline]
    pub(crate) fn toggle(&mut self, b: usize) {
        self.words[b >> 6] ^= 1u64 << (b & 63);
    }

    #[inline]
    pub(crate) fn check_coord(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.dim() {
            Err(Error::CoordinateOutOfRange { coord: i, dim: self.dim() })
        } else {
            Ok(())
        }
    }

    #[inline]
    pub(crate) fn check_same_dim(&self, other: &Point) -> Result<()> {
        if self.dim != other.dim {
            Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() })
        } else {
            Ok(())
        }
    }

    /// Returns a copy with coordinate `i` toggled.
    pub fn flip(&self, i: usize) -> Result<Point> {
        self.check_coord(i)?;
        let mut y = self.clone();
        y.toggle(i - 1);
        Ok(y)
    }

    /// Strict coordinate-wise order: `self <= other` in every coordinate and
    /// `self != other`.
    pub fn precedes(&self, other: &Point) -> Result<bool> {
        self.check_same_dim(other)?;
        let below = self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0);
        Ok(below && self.words != other.words)
    }

    /// Hamming weight.
    pub fn weight(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    /// Hamming distance to `other`.
    pub fn distance(&self, other: &Point) -> Result<u64> {
        self.check_same_dim(other)?;
        Ok(self.words.iter().zip(&other.words).map(|(a, b)| u64::from((a ^ b).count_ones())).sum())
    }

    /// The unique coordinate (1-based) where `self` and `other` differ, if
    /// they are adjacent in `H_n`.
    pub(crate) fn adjacent_coord(&self, other: &Point) -> Option<usize> {
        if self.dim != other.dim {
            return None;
        }
        let mut found = None;
        for (w, (a, b)) in self.words.iter().zip(&other.words).enumerate() {
            let d = a ^ b;
            if d == 0 {
                continue;
            }
            if d.count_ones() != 1 || found.is_some() {
                return None;
            }
            found = Some(w * 64 + d.trailing_zeros() as usize + 1);
        }
        found
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = (0..self.dim()).map(|b| if self.bit(b) { '1' } else { '0' }).collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Point({self})")
    }
}

impl FromStr for Point {
    type Err = Error;

    /// Parses `x_1 x_2 ... x_n` written as a string of `0`/`1`.
    fn from_str(s: &str) -> Result<Point> {
        if s.is_empty() {
            return Err(Error::InvalidParameter("empty point".into()));
        }
        let mut p = Point::zeros(s.len());
        for (b, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => p.toggle(b),
                other => {
                    return Err(Error::InvalidParameter(format!("illegal character {other:?} in point")));
                }
            }
        }
        Ok(p)
    }
}
