use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::BooleanFunction;
use crate::hypercube::{sample_point, Point};
use crate::stream::mix64;

/// A named function family. Together with `n` it determines the function
/// exactly, including the seeded families.
///
/// Text form (used in config files and CSV labels):
/// `dictator(i)`, `antidictator(i)`, `majority`, `parity`, `threshold(t)`,
/// `bernoulli(p,seed)`, `monotone(seed,cones)` and
/// `blended(<base>,noise_coord,mask,seed)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum FamilySpec {
    /// `f(x) = x_i`.
    Dictator(usize),
    /// `f(x) = 1 - x_i`.
    AntiDictator(usize),
    /// Strict majority; odd `n` only.
    Majority,
    Parity,
    /// `f(x) = [|x| >= t]`.
    Threshold(u64),
    /// Each point independently 1 with probability `p`.
    RandomBernoulli {
        p: f64,
        seed: u64,
    },
    /// Union of `cones` up-sets above seeded uniform apexes.
    RandomMonotone {
        seed: u64,
        cones: usize,
    },
    /// A monotone base XOR the anti-dictator on `noise_coord`, restricted to
    /// the subcube whose `mask` coordinates (bit `j-1` for coordinate `j`)
    /// are pinned to seeded values.
    Blended {
        base: Box<FamilySpec>,
        noise_coord: usize,
        mask: u64,
        seed: u64,
    },
}

impl FamilySpec {
    /// Whether the family is monotone for every valid `n`.
    pub fn is_monotone_family(&self) -> bool {
        matches!(
            self,
            FamilySpec::Dictator(_)
                | FamilySpec::Majority
                | FamilySpec::Threshold(_)
                | FamilySpec::RandomMonotone { .. }
        )
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilySpec::Dictator(i) => write!(f, "dictator({i})"),
            FamilySpec::AntiDictator(i) => write!(f, "antidictator({i})"),
            FamilySpec::Majority => f.write_str("majority"),
            FamilySpec::Parity => f.write_str("parity"),
            FamilySpec::Threshold(t) => write!(f, "threshold({t})"),
            FamilySpec::RandomBernoulli { p, seed } => write!(f, "bernoulli({p},{seed})"),
            FamilySpec::RandomMonotone { seed, cones } => write!(f, "monotone({seed},{cones})"),
            FamilySpec::Blended { base, noise_coord, mask, seed } => {
                write!(f, "blended({base},{noise_coord},{mask:#x},{seed})")
            }
        }
    }
}

fn split_top_level(args: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, c) in args.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(args[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(args[start..].trim());
    out
}

fn parse_u64(s: &str) -> Option<u64> {
    match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16).ok(),
        None => s.parse().ok(),
    }
}

impl FromStr for FamilySpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<FamilySpec> {
        let text = text.trim();
        let fail = |reason: &str| Error::FamilySpec { spec: text.to_string(), reason: reason.to_string() };
        let (name, args) = match text.find('(') {
            Some(open) => {
                let inner = text[open + 1..].strip_suffix(')').ok_or_else(|| fail("missing closing parenthesis"))?;
                (&text[..open], split_top_level(inner))
            }
            None => (text, Vec::new()),
        };
        let arity = |want: usize| -> Result<()> {
            if args.len() == want {
                Ok(())
            } else {
                Err(fail(&format!("expected {want} argument(s), found {}", args.len())))
            }
        };
        let int = |s: &str| parse_u64(s).ok_or_else(|| fail(&format!("bad integer {s:?}")));
        let coord_or_default = || -> Result<usize> {
            if args.is_empty() {
                Ok(1)
            } else {
                arity(1)?;
                Ok(int(args[0])? as usize)
            }
        };
        match name.trim().to_ascii_lowercase().as_str() {
            "dictator" => Ok(FamilySpec::Dictator(coord_or_default()?)),
            "antidictator" | "anti-dictator" => Ok(FamilySpec::AntiDictator(coord_or_default()?)),
            "majority" => arity(0).map(|_| FamilySpec::Majority),
            "parity" => arity(0).map(|_| FamilySpec::Parity),
            "threshold" => {
                arity(1)?;
                Ok(FamilySpec::Threshold(int(args[0])?))
            }
            "bernoulli" => {
                arity(2)?;
                let p = args[0].parse().map_err(|_| fail("bad probability"))?;
                Ok(FamilySpec::RandomBernoulli { p, seed: int(args[1])? })
            }
            "monotone" => {
                arity(2)?;
                Ok(FamilySpec::RandomMonotone { seed: int(args[0])?, cones: int(args[1])? as usize })
            }
            "blended" => {
                arity(4)?;
                Ok(FamilySpec::Blended {
                    base: Box::new(args[0].parse()?),
                    noise_coord: int(args[1])? as usize,
                    mask: int(args[2])?,
                    seed: int(args[3])?,
                })
            }
            _ => Err(fail("unknown family")),
        }
    }
}

#[derive(Clone, Debug)]
enum Kind {
    Dictator(usize),
    AntiDictator(usize),
    Majority,
    Parity,
    Threshold(u64),
    Bernoulli { p: f64, key: u64 },
    Monotone(Vec<Point>),
    Blended { base: Box<FamilyFunction>, noise_bit: usize, mask: u64, fixed: u64 },
}

/// A [`FamilySpec`] instantiated at a dimension. Evaluates in `O(n / 64)`
/// per query (`O(cones · n / 64)` for random monotone functions), so it
/// serves as a query handle for dimensions far beyond dense tables.
#[derive(Clone, Debug)]
pub struct FamilyFunction {
    spec: FamilySpec,
    dim: usize,
    kind: Kind,
}

impl FamilyFunction {
    pub fn spec(&self) -> &FamilySpec {
        &self.spec
    }
}

/// Builds the function described by `spec` on `{0,1}^n`.
pub fn instantiate(spec: &FamilySpec, n: usize) -> Result<FamilyFunction> {
    let invalid = |reason: String| Error::FamilySpec { spec: spec.to_string(), reason };
    if n == 0 {
        return Err(invalid("dimension must be positive".into()));
    }
    let coord = |i: usize| -> Result<usize> {
        if (1..=n).contains(&i) {
            Ok(i - 1)
        } else {
            Err(invalid(format!("coordinate {i} outside 1..={n}")))
        }
    };
    let kind = match spec {
        FamilySpec::Dictator(i) => Kind::Dictator(coord(*i)?),
        FamilySpec::AntiDictator(i) => Kind::AntiDictator(coord(*i)?),
        FamilySpec::Majority if n.is_multiple_of(2) => return Err(invalid(format!("majority needs odd n, got {n}"))),
        FamilySpec::Majority => Kind::Majority,
        FamilySpec::Parity => Kind::Parity,
        FamilySpec::Threshold(t) if *t > n as u64 + 1 => {
            return Err(invalid(format!("threshold {t} exceeds n + 1 = {}", n + 1)))
        }
        FamilySpec::Threshold(t) => Kind::Threshold(*t),
        FamilySpec::RandomBernoulli { p, seed } => {
            if !(0.0..=1.0).contains(p) {
                return Err(invalid(format!("probability {p} outside [0, 1]")));
            }
            Kind::Bernoulli { p: *p, key: mix64(*seed) }
        }
        FamilySpec::RandomMonotone { seed, cones } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            Kind::Monotone((0..*cones).map(|_| sample_point(&mut rng, n)).collect())
        }
        FamilySpec::Blended { base, noise_coord, mask, seed } => {
            if !base.is_monotone_family() {
                return Err(invalid(format!("base {base} is not a monotone family")));
            }
            let noise_bit = coord(*noise_coord)?;
            if n < 64 && mask >> n != 0 {
                return Err(invalid(format!("mask {mask:#x} names coordinates beyond n = {n}")));
            }
            if noise_bit < 64 && (mask >> noise_bit) & 1 == 1 {
                return Err(invalid("mask pins the noise coordinate".into()));
            }
            let fixed = ChaCha8Rng::seed_from_u64(*seed).gen::<u64>() & mask;
            Kind::Blended { base: Box::new(instantiate(base, n)?), noise_bit, mask: *mask, fixed }
        }
    };
    Ok(FamilyFunction { spec: spec.clone(), dim: n, kind })
}

fn point_hash(key: u64, x: &Point) -> u64 {
    x.words().iter().fold(mix64(key ^ x.dim() as u64), |h, &w| mix64(h ^ w))
}

impl BooleanFunction for FamilyFunction {
    #[inline]
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &Point) -> bool {
        debug_assert_eq!(x.dim(), self.dim);
        match &self.kind {
            Kind::Dictator(b) => x.bit(*b),
            Kind::AntiDictator(b) => !x.bit(*b),
            Kind::Majority => 2 * x.weight() > self.dim as u64,
            Kind::Parity => x.weight() % 2 == 1,
            Kind::Threshold(t) => x.weight() >= *t,
            Kind::Bernoulli { p, key } => {
                let u = (point_hash(*key, x) >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                u < *p
            }
            Kind::Monotone(apexes) => {
                apexes.iter().any(|a| a.words().iter().zip(x.words()).all(|(aw, xw)| aw & !xw == 0))
            }
            Kind::Blended { base, noise_bit, mask, fixed } => {
                let in_subcube = x.words()[0] & mask == *fixed;
                base.eval(x) ^ (in_subcube && !x.bit(*noise_bit))
            }
        }
    }
}
