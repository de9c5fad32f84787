use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::function::BooleanFunction;
use crate::hypercube::Point;

/// Largest dimension stored densely (2^30 bits = 128 MiB).
pub const MAX_TABLE_DIM: usize = 30;

/// Dense truth table of `f : {0,1}^n -> {0,1}`, bit `i` holding `f(i)` for
/// the point with integer encoding `i`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TruthTable {
    dim: u32,
    bits: Vec<u64>,
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    if dim > MAX_TABLE_DIM {
        return Err(Error::DimensionTooLarge { what: "dense truth table", n: dim, max: MAX_TABLE_DIM });
    }
    Ok(())
}

impl TruthTable {
    pub fn constant(dim: usize, value: bool) -> Result<TruthTable> {
        TruthTable::from_fn(dim, |_| value)
    }

    /// Builds the table from `value(index)` for every index in `0..2^n`.
    pub fn from_fn(dim: usize, mut value: impl FnMut(u64) -> bool) -> Result<TruthTable> {
        check_dim(dim)?;
        let len = 1u64 << dim;
        let mut bits = vec![0u64; (len as usize).div_ceil(64)];
        for idx in 0..len {
            if value(idx) {
                bits[(idx >> 6) as usize] |= 1 << (idx & 63);
            }
        }
        Ok(TruthTable { dim: dim as u32, bits })
    }

    /// Table of a function on at most 6 variables packed into one word.
    pub fn from_packed(dim: usize, packed: u64) -> Result<TruthTable> {
        check_dim(dim)?;
        if dim > 6 {
            return Err(Error::DimensionTooLarge { what: "packed truth table", n: dim, max: 6 });
        }
        let len = 1u32 << dim;
        if len < 64 && packed >> len != 0 {
            return Err(Error::InvalidParameter(format!("packed table has bits beyond 2^{dim}")));
        }
        Ok(TruthTable { dim: dim as u32, bits: vec![packed] })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    /// Number of entries, `2^n`.
    #[inline]
    pub fn len(&self) -> u64 {
        1u64 << self.dim
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// `f(index)`. Panics if `index >= 2^n`.
    #[inline]
    pub fn get(&self, index: u64) -> bool {
        assert!(index < self.len(), "truth table index {index} out of range");
        (self.bits[(index >> 6) as usize] >> (index & 63)) & 1 == 1
    }

    pub fn set(&mut self, index: u64, value: bool) {
        assert!(index < self.len(), "truth table index {index} out of range");
        let w = &mut self.bits[(index >> 6) as usize];
        if value {
            *w |= 1 << (index & 63);
        } else {
            *w &= !(1 << (index & 63));
        }
    }

    /// Packed form for `n <= 6`.
    pub fn packed(&self) -> Option<u64> {
        (self.dim <= 6).then(|| self.bits[0])
    }

    /// Backing words; bits past `2^n` are zero.
    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.bits
    }

    pub fn count_ones(&self) -> u64 {
        self.bits.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len()).map(|i| self.get(i))
    }

    /// Number of points where the two tables differ.
    pub fn hamming_distance(&self, other: &TruthTable) -> Result<u64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(self.bits.iter().zip(&other.bits).map(|(a, b)| u64::from((a ^ b).count_ones())).sum())
    }

    /// The values as `0`/`1` characters in index order.
    pub fn to_bit_string(&self) -> String {
        self.iter().map(|b| if b { '1' } else { '0' }).collect()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<TruthTable> {
        fs::read_to_string(path)?.parse()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_string())?;
        Ok(())
    }
}

impl BooleanFunction for TruthTable {
    #[inline]
    fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    fn eval(&self, x: &Point) -> bool {
        debug_assert_eq!(x.dim(), self.dim());
        self.get(x.words()[0])
    }
}

/// File form: `n=<int>` on the first line, then the `2^n` values on the
/// second line, terminated by a single newline.
impl fmt::Display for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n={}", self.dim)?;
        writeln!(f, "{}", self.to_bit_string())
    }
}

impl fmt::Debug for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dim <= 8 {
            write!(f, "TruthTable(n={}, {})", self.dim, self.to_bit_string())
        } else {
            write!(f, "TruthTable(n={}, {} ones)", self.dim, self.count_ones())
        }
    }
}

impl FromStr for TruthTable {
    type Err = Error;

    fn from_str(text: &str) -> Result<TruthTable> {
        let bad = |msg: String| Error::TruthTableFormat(msg);
        let body = text.strip_suffix('\n').unwrap_or(text);
        let (header, values) =
            body.split_once('\n').ok_or_else(|| bad("expected a header line and a values line".into()))?;
        let dim: usize = header
            .strip_prefix("n=")
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| bad(format!("bad header {header:?}, expected `n=<int>`")))?;
        if dim == 0 || dim > MAX_TABLE_DIM {
            return Err(bad(format!("dimension {dim} outside 1..={MAX_TABLE_DIM}")));
        }
        let expected = 1usize << dim;
        if values.len() != expected {
            return Err(bad(format!("expected {expected} values for n={dim}, found {}", values.len())));
        }
        let mut table = TruthTable::constant(dim, false)?;
        for (idx, c) in values.bytes().enumerate() {
            match c {
                b'0' => {}
                b'1' => table.set(idx as u64, true),
                other => return Err(bad(format!("illegal character {:?} at position {idx}", other as char))),
            }
        }
        Ok(table)
    }
}
