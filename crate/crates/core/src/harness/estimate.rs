use std::fmt;
use std::io;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::function::{BooleanFunction, QueryMeter, TruthTable};
use crate::hypercube::{ceil_log2, StepRule, WalkLength};
use crate::oracles::{
    exhaustive_rejection_probability, f_ell_bound, sticky_set, survival_table, MAX_EXHAUSTIVE_DIM, MAX_EXHAUSTIVE_ELL,
};
use crate::stats::{standard_error, wilson_interval, Z95};
use crate::stream::{stream_id, trial_rng};
use crate::tester::run_once_metered;

/// Oracle columns are filled for `n` up to this dimension.
pub const MAX_ORACLE_DIM: usize = 16;

/// Walk-length column of an [`EstimateRow`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EllLabel {
    Fixed(usize),
    /// `ℓ` drawn by the tester itself.
    Mixed,
}

impl fmt::Display for EllLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EllLabel::Fixed(ell) => write!(f, "{ell}"),
            EllLabel::Mixed => f.write_str("mixed"),
        }
    }
}

impl FromStr for EllLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<EllLabel> {
        match s {
            "mixed" => Ok(EllLabel::Mixed),
            _ => s.parse().map(EllLabel::Fixed).map_err(|_| Error::InvalidParameter(format!("bad ell label {s:?}"))),
        }
    }
}

impl Serialize for EllLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for EllLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<EllLabel, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One Monte Carlo cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub family: String,
    pub n: usize,
    pub ell: EllLabel,
    pub trials: u64,
    pub rejections: u64,
    pub rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    /// Mean distinct queries per invocation.
    pub mean_queries: f64,
    /// `ℓ · |F_ℓ| / (4 n 2^n)`; the mean over `ℓ` for mixed rows.
    pub oracle_bound: Option<f64>,
    /// Exact rejection probability; the mean over `ℓ` for mixed rows.
    pub exact_rate: Option<f64>,
}

pub const CSV_HEADER: &str =
    "family,n,ell,trials,rejections,rate,wilson_low,wilson_high,mean_queries,oracle_bound,exact_rate";

impl EstimateRow {
    fn from_tally(family: &str, n: usize, ell: EllLabel, tally: Tally) -> EstimateRow {
        let (wilson_low, wilson_high) = wilson_interval(tally.rejections, tally.trials, Z95);
        EstimateRow {
            family: family.to_string(),
            n,
            ell,
            trials: tally.trials,
            rejections: tally.rejections,
            rate: tally.rate(),
            wilson_low,
            wilson_high,
            mean_queries: tally.distinct_queries as f64 / tally.trials as f64,
            oracle_bound: None,
            exact_rate: None,
        }
    }

    pub fn standard_error(&self) -> f64 {
        standard_error(self.rate, self.trials)
    }
}

/// Raw counts of a batch of invocations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Tally {
    pub trials: u64,
    pub rejections: u64,
    pub distinct_queries: u64,
    pub total_queries: u64,
    /// Largest distinct-query count of a single invocation.
    pub max_distinct: u64,
}

impl Tally {
    pub fn rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.rejections as f64 / self.trials as f64
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.trials += other.trials;
        self.rejections += other.rejections;
        self.distinct_queries += other.distinct_queries;
        self.total_queries += other.total_queries;
        self.max_distinct = self.max_distinct.max(other.max_distinct);
        self
    }
}

/// Settings of a Monte Carlo batch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McOptions {
    pub trials: u64,
    pub seed: u64,
    pub stratify_by_ell: bool,
    pub rule: StepRule,
}

impl McOptions {
    pub fn new(trials: u64, seed: u64, stratify_by_ell: bool) -> McOptions {
        McOptions { trials, seed, stratify_by_ell, rule: StepRule::Simple }
    }
}

/// `trials` invocations of the tester, trial `i` drawing from stream
/// `(seed, stream_id(tag, i))`. `ell = None` lets each invocation draw its
/// own walk length. Runs on the rayon pool; the result does not depend on
/// the number of workers.
pub fn run_trials<F>(f: &F, ell: Option<usize>, trials: u64, seed: u64, tag: u64, rule: StepRule) -> Tally
where
    F: BooleanFunction + ?Sized,
{
    (0..trials)
        .into_par_iter()
        .fold(Tally::default, |acc, i| {
            let mut meter = QueryMeter::new(f);
            let out = run_once_metered(&mut meter, &mut trial_rng(seed, stream_id(tag, i)), ell, rule);
            Tally {
                trials: acc.trials + 1,
                rejections: acc.rejections + u64::from(out.is_reject()),
                distinct_queries: acc.distinct_queries + out.stats.distinct,
                total_queries: acc.total_queries + out.stats.total,
                max_distinct: acc.max_distinct.max(out.stats.distinct),
            }
        })
        .reduce(Tally::default, Tally::merge)
}

/// Stream tag of a stratum: 0 for mixed, `1 + k` for `ℓ = 2^k`.
fn stratum_tag(ell: Option<usize>) -> u64 {
    ell.map_or(0, |l| 1 + u64::from(ceil_log2(l)))
}

/// Monte Carlo rejection rate of the tester on `f`.
///
/// Mixed mode returns one row. Stratified mode fixes each `ℓ = 2^k`,
/// `k = 0..=⌈log₂ n⌉`, in turn with `trials / (⌈log₂ n⌉ + 1)` runs each and
/// returns one row per `ℓ`.
pub fn mc_estimate<F>(f: &F, family: &str, opts: &McOptions) -> Result<Vec<EstimateRow>>
where
    F: BooleanFunction + ?Sized,
{
    if opts.trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let n = f.dim();
    if !opts.stratify_by_ell {
        let tally = run_trials(f, None, opts.trials, opts.seed, stratum_tag(None), opts.rule);
        return Ok(vec![EstimateRow::from_tally(family, n, EllLabel::Mixed, tally)]);
    }
    let lengths: Vec<WalkLength> = WalkLength::all(n).collect();
    let per = opts.trials / lengths.len() as u64;
    if per == 0 {
        return Err(Error::InvalidParameter(format!(
            "{} trials cannot be split over {} walk lengths",
            opts.trials,
            lengths.len()
        )));
    }
    Ok(lengths
        .iter()
        .map(|wl| {
            let tally = run_trials(f, Some(wl.ell), per, opts.seed, stratum_tag(Some(wl.ell)), opts.rule);
            EstimateRow::from_tally(family, n, EllLabel::Fixed(wl.ell), tally)
        })
        .collect())
}

/// Oracle values of one walk length.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleCell {
    pub ell: usize,
    pub f_ell_size: usize,
    pub bound: f64,
    pub exact: Option<f64>,
}

/// Oracle values for every walk length the tester can draw at `f.dim()`.
pub fn oracle_cells(f: &TruthTable) -> Result<Vec<OracleCell>> {
    let n = f.dim();
    if n > MAX_ORACLE_DIM {
        return Err(Error::DimensionTooLarge { what: "oracle columns", n, max: MAX_ORACLE_DIM });
    }
    let lengths: Vec<WalkLength> = WalkLength::all(n).collect();
    let table = survival_table(f, lengths.last().map_or(1, |w: &WalkLength| w.ell))?;
    lengths
        .iter()
        .map(|wl| {
            let set = sticky_set(f, &table, wl.ell)?;
            let exact = if n <= MAX_EXHAUSTIVE_DIM && wl.ell <= MAX_EXHAUSTIVE_ELL {
                let r = exhaustive_rejection_probability(f, wl.ell)?;
                Some(*r.numer() as f64 / *r.denom() as f64)
            } else {
                None
            };
            Ok(OracleCell { ell: wl.ell, f_ell_size: set.len(), bound: f_ell_bound(n, wl.ell, set.len()), exact })
        })
        .collect()
}

/// Fills `oracle_bound` and `exact_rate` where the dimension permits. Mixed
/// rows get the averages over `ℓ`, matching the tester's uniform choice of
/// `k`. Rows of other dimensions are left alone.
pub fn attach_oracles(f: &TruthTable, rows: &mut [EstimateRow]) -> Result<()> {
    if f.dim() > MAX_ORACLE_DIM {
        return Ok(());
    }
    let cells = oracle_cells(f)?;
    let count = cells.len() as f64;
    for row in rows.iter_mut().filter(|r| r.n == f.dim()) {
        match row.ell {
            EllLabel::Fixed(ell) => {
                if let Some(c) = cells.iter().find(|c| c.ell == ell) {
                    row.oracle_bound = Some(c.bound);
                    row.exact_rate = c.exact;
                }
            }
            EllLabel::Mixed => {
                row.oracle_bound = Some(cells.iter().map(|c| c.bound).sum::<f64>() / count);
                row.exact_rate = cells.iter().map(|c| c.exact).sum::<Option<f64>>().map(|s| s / count);
            }
        }
    }
    Ok(())
}

pub fn write_csv<W: io::Write>(out: W, rows: &[EstimateRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: io::Read>(input: R) -> Result<Vec<EstimateRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.iter().collect::<Vec<_>>().join(",");
    if header != CSV_HEADER {
        return Err(Error::Config(format!("unexpected CSV header {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}
