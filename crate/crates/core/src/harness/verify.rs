use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::panic::{self, AssertUnwindSafe};
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use num_rational::Ratio;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::{instantiate, to_truth_table, BooleanFunction, FamilySpec, QueryMeter, TruthTable};
use crate::harness::config::ExperimentConfig;
use crate::harness::estimate::{
    attach_oracles, mc_estimate, oracle_cells, read_csv, run_trials, write_csv, EllLabel, McOptions, CSV_HEADER,
};
use crate::hypercube::{random_walk, sample_point, Edge, Point, StepRule, WalkLength, WalkPath};
use crate::oracles::{
    claim_product, distance_bruteforce_among, distance_to_monotonicity, event_probability_sum, exhaustive_walk_stats,
    influence_report, is_monotone, monotone_functions, nonsticky_fraction_within_bound, sticky_set, survival_table,
    unique_crossing_probabilities, StickyTable,
};
use crate::stats::{chi_square_critical, chi_square_uniform, standard_error};
use crate::stream::{mix64, stream_id, trial_rng, TrialRng};
use crate::tester::{
    binary_search_influential, is_violation, query_bound, query_bound_for_length, run_amplified, run_once,
    run_once_metered, AmplifyConfig,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    /// `n <= 4` exhaustive checks and `10^5`-trial estimates.
    Quick,
    /// Oracle sweeps up to `n = 12` (all `2^16` functions at `n = 4`) and
    /// `10^6`-trial estimates.
    Full,
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Level> {
        match s {
            "quick" => Ok(Level::Quick),
            "full" => Ok(Level::Full),
            _ => Err(Error::InvalidParameter(format!("unknown verify level {s:?} (quick|full)"))),
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Quick => "quick",
            Level::Full => "full",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    pub level: Level,
    pub seed: u64,
    /// Walk used by every Monte Carlo check. [`StepRule::Lazy`] is a mutant
    /// the suite is expected to catch.
    pub rule: StepRule,
    /// Restrict to these identifiers; the coverage meta-check then fails.
    pub only: Option<Vec<String>>,
}

impl VerifyOptions {
    pub fn new(level: Level, seed: u64) -> VerifyOptions {
        VerifyOptions { level, seed, rule: StepRule::Simple, only: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub id: String,
    pub passed: bool,
    pub detail: String,
    /// Wall-clock time; the only nondeterministic field of a report.
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub level: Level,
    pub seed: u64,
    pub mutated_walk: bool,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{status} {:<32} {:>8.2}s  {}", c.id, c.seconds, c.detail)?;
        }
        let failed = self.failures().count();
        write!(f, "{} checks, {failed} failed", self.checks.len())
    }
}

/// Identifiers of every invariant the suite checks.
pub const INVARIANTS: &[&str] = &[
    "hypercube.canonical-edge",
    "hypercube.stationarity",
    "hypercube.uniform-edge-marginal",
    "hypercube.reproducible",
    "function.meter-conservation",
    "function.generator-determinism",
    "function.random-monotone",
    "function.truth-table-round-trip",
    "oracle.edge-count-identity",
    "oracle.survival-table",
    "oracle.nonsticky-fraction",
    "oracle.sticky-nesting",
    "oracle.crossing-product",
    "oracle.sandwich",
    "oracle.distance-equivalence",
    "oracle.witness-validity",
    "tester.one-sided",
    "tester.query-bound",
    "tester.exact-vs-oracle",
    "tester.sticky-edge-bound",
    "tester.binary-search",
    "tester.amplified-budget",
    "harness.determinism",
    "harness.csv-schema",
    "harness.row-invariants",
    "harness.config-round-trip",
];

pub const META_CHECK: &str = "meta.coverage";

struct Failure(String);

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure(format!("error: {e}"))
    }
}

type Check = std::result::Result<String, Failure>;

macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        // negated so that NaN comparisons fail
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !$cond {
            return Err(Failure(format!($($arg)+)));
        }
    };
}

struct Ctx {
    full: bool,
    seed: u64,
    rule: StepRule,
    trials: u64,
}

impl Ctx {
    fn pick<T>(&self, quick: T, full: T) -> T {
        if self.full {
            full
        } else {
            quick
        }
    }

    fn rng(&self, tag: u64) -> TrialRng {
        trial_rng(self.seed, stream_id(0x7E_0000 + tag, 0))
    }

    fn sub_seed(&self, tag: u64) -> u64 {
        mix64(self.seed ^ mix64(tag))
    }
}

fn spec(s: &str) -> FamilySpec {
    s.parse().expect("built-in family spec")
}

fn table_of(s: &FamilySpec, n: usize) -> Result<TruthTable> {
    to_truth_table(&instantiate(s, n)?)
}

/// Seeded corpus member `i` at dimension `n`: Bernoulli functions of
/// varying density, a monotone function blended with an anti-dictator on a
/// subcube, and an anti-dictator.
fn corpus_spec(n: usize, seed: u64, i: u64) -> FamilySpec {
    const DENSITIES: [f64; 4] = [0.5, 0.2, 0.8, 0.05];
    let h = mix64(seed ^ mix64(i.wrapping_add(n as u64) ^ 0xC0FF));
    match i % 6 {
        4 if n >= 2 => {
            let low = n.min(63);
            let noise = 1 + (h % low as u64) as usize;
            let free = ((1u64 << low) - 1) & !(1u64 << (noise - 1));
            let mask = free & (h >> 8) & (h >> 16);
            let base = FamilySpec::RandomMonotone { seed: h >> 3, cones: 1 + (h % 4) as usize };
            FamilySpec::Blended { base: Box::new(base), noise_coord: noise, mask, seed: h >> 5 }
        }
        5 => FamilySpec::AntiDictator(1 + (h % n as u64) as usize),
        _ => FamilySpec::RandomBernoulli { p: DENSITIES[(i % 4) as usize], seed: h },
    }
}

fn corpus(n: usize, count: u64, seed: u64) -> Result<Vec<(FamilySpec, TruthTable)>> {
    (0..count)
        .map(|i| {
            let s = corpus_spec(n, seed, i);
            let t = table_of(&s, n)?;
            Ok((s, t))
        })
        .collect()
}

/// Every function on `n <= 4` variables.
fn all_tables(n: usize) -> Result<Vec<TruthTable>> {
    (0..1u64 << (1u32 << n)).map(|packed| TruthTable::from_packed(n, packed)).collect()
}

fn ratio_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

// ---------------------------------------------------------------- hypercube

fn canonical_edge(ctx: &Ctx) -> Check {
    let mut rng = ctx.rng(1);
    let paths = ctx.pick(2_000, 20_000);
    let mut edges = 0;
    for i in 0..paths {
        let n = [1, 3, 5, 70][i % 4];
        let ell = rng.gen_range(1..=8);
        let start = sample_point(&mut rng, n);
        let path = random_walk(&mut rng, &start, ell);
        for t in 1..=ell {
            let e = path.edge_at(t)?;
            let (a, b) = (path.vertex(t - 1)?, path.vertex(t)?);
            ensure!(
                e == Edge::between(&a, &b)? && e == Edge::between(&b, &a)?,
                "edge_at({t}) not canonical on {a} -> {b}"
            );
            let back = WalkPath::new(b.clone(), [path.step(t)])?.edge_at(1)?;
            ensure!(back == e, "reverse crossing of {e} gives {back}");
            ensure!(e.lower().precedes(&e.upper())? && !e.lower().get(e.coord())?, "edge {e} not oriented upward");
            edges += 1;
        }
    }
    Ok(format!("{edges} edges on {paths} walks"))
}

fn stationarity(ctx: &Ctx) -> Check {
    let (n, ell, samples) = ctx.pick((3, 4, 100_000u64), (4, 8, 1_000_000));
    let mut rng = ctx.rng(2);
    let mut counts = vec![vec![0u64; 1 << n]; ell + 1];
    for _ in 0..samples {
        let start = sample_point(&mut rng, n);
        let path = random_walk(&mut rng, &start, ell);
        for (t, v) in path.vertices().enumerate() {
            counts[t][v.index().unwrap_or(0) as usize] += 1;
        }
    }
    // alpha = 0.001 per step
    let critical = chi_square_critical((1u64 << n) - 1, 3.090_232);
    let worst = counts.iter().map(|c| chi_square_uniform(c)).fold(0.0, f64::max);
    ensure!(worst <= critical, "chi-square {worst:.2} exceeds {critical:.2}");
    Ok(format!("n = {n}, t <= {ell}, {samples} walks, max chi-square {worst:.2} <= {critical:.2}"))
}

fn uniform_edge_marginal(_: &Ctx) -> Check {
    let mut cases = 0;
    for n in 1..=3usize {
        for ell in 1..=3usize {
            let sequences = n.pow(ell as u32);
            let mut counts: Vec<HashMap<(u64, usize), u64>> = vec![HashMap::new(); ell + 1];
            for start in 0..1u64 << n {
                for seq in 0..sequences {
                    let steps = (0..ell).map(|j| 1 + seq / n.pow(j as u32) % n);
                    let path = WalkPath::new(Point::from_index(n, start)?, steps)?;
                    for (t, slot) in counts.iter_mut().enumerate().skip(1) {
                        let e = path.edge_at(t)?;
                        *slot.entry((e.lower().index().unwrap_or(0), e.coord())).or_default() += 1;
                    }
                }
            }
            let edges = n << (n - 1);
            let expected = ((1usize << n) * sequences / edges) as u64;
            for (t, slot) in counts.iter().enumerate().skip(1) {
                ensure!(slot.len() == edges, "n = {n}, ell = {ell}, t = {t}: {} of {edges} edges reached", slot.len());
                ensure!(
                    slot.values().all(|&c| c == expected),
                    "n = {n}, ell = {ell}, t = {t}: counts not all {expected}"
                );
            }
            cases += 1;
        }
    }
    Ok(format!("exact enumeration, {cases} (n, ell) cases"))
}

fn reproducible(ctx: &Ctx) -> Check {
    let f = instantiate(&spec("bernoulli(0.3,77)"), 40)?;
    for i in 0..ctx.pick(500, 5_000) {
        let draw = |master: u64| {
            let mut rng = trial_rng(master, stream_id(3, i));
            let x = sample_point(&mut rng, 40);
            random_walk(&mut rng, &x, 16)
        };
        ensure!(draw(ctx.seed) == draw(ctx.seed), "walk {i} differs between identical seeds");
        let a = run_once(&f, &mut trial_rng(ctx.seed, stream_id(4, i)));
        let b = run_once(&f, &mut trial_rng(ctx.seed, stream_id(4, i)));
        ensure!(a == b, "tester outcome {i} differs between identical seeds");
    }
    let differs = (0..64).any(|i| {
        let x = sample_point(&mut trial_rng(ctx.seed, stream_id(5, i)), 40);
        x != sample_point(&mut trial_rng(ctx.seed ^ 1, stream_id(5, i)), 40)
    });
    ensure!(differs, "different seeds produced identical points");
    Ok("walks and outcomes replay exactly".into())
}

// ---------------------------------------------------------------- function

struct Counting<F> {
    inner: F,
    evals: AtomicU64,
}

impl<F: BooleanFunction> BooleanFunction for Counting<F> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eval(&self, x: &Point) -> bool {
        self.evals.fetch_add(1, Ordering::Relaxed);
        self.inner.eval(x)
    }
}

fn meter_conservation(ctx: &Ctx) -> Check {
    let f = Counting { inner: instantiate(&spec("bernoulli(0.4,5)"), 24)?, evals: AtomicU64::new(0) };
    let mut rng = ctx.rng(6);
    let mut meter = QueryMeter::new(&f);
    let (mut total, mut distinct) = (0, 0);
    for _ in 0..ctx.pick(5_000, 50_000) {
        let out = run_once_metered(&mut meter, &mut rng, None, ctx.rule);
        total += out.stats.total;
        distinct += out.stats.distinct;
    }
    let evals = f.evals.load(Ordering::Relaxed);
    ensure!(
        meter.stats().total == total && total == evals,
        "meter {} / outcomes {total} / evaluations {evals}",
        meter.stats().total
    );
    ensure!(meter.stats().distinct == distinct, "distinct {} vs {distinct}", meter.stats().distinct);

    f.evals.store(0, Ordering::Relaxed);
    let tally = run_trials(&f, None, ctx.pick(20_000, 200_000), ctx.seed, 7, ctx.rule);
    ensure!(tally.total_queries == f.evals.load(Ordering::Relaxed), "parallel tally disagrees with evaluation count");

    f.evals.store(0, Ordering::Relaxed);
    let config = AmplifyConfig::new(0.5, 1.0)?.with_repetitions(300);
    let out = run_amplified(&f, &config, &mut rng)?;
    ensure!(out.stats.total == f.evals.load(Ordering::Relaxed), "amplified stats disagree with evaluation count");
    Ok(format!("{evals} evaluations accounted for"))
}

fn generator_determinism(ctx: &Ctx) -> Check {
    let mut count = 0;
    for n in [1usize, 3, 5, 8, 11] {
        let mut specs: Vec<FamilySpec> =
            ["dictator(1)", "antidictator(1)", "parity", "threshold(2)"].iter().map(|s| spec(s)).collect();
        if n % 2 == 1 {
            specs.push(FamilySpec::Majority);
        }
        specs.extend((0..ctx.pick(12, 60)).map(|i| corpus_spec(n, ctx.seed, i)));
        specs.push(FamilySpec::RandomMonotone { seed: ctx.seed, cones: 3 });
        for s in &specs {
            let (a, b) = (table_of(s, n)?, table_of(s, n)?);
            ensure!(a == b, "{s} at n = {n} is not deterministic");
            let reparsed: FamilySpec = s.to_string().parse()?;
            ensure!(table_of(&reparsed, n)? == a, "{s} changes after a text round trip");
            count += 1;
        }
    }
    Ok(format!("{count} (spec, n) pairs"))
}

fn random_monotone(ctx: &Ctx) -> Check {
    let (max_n, seeds) = ctx.pick((10, 6u64), (12, 25));
    for n in 1..=max_n {
        for s in 0..seeds {
            let cones = 1 + (s % 7) as usize;
            let f = table_of(&FamilySpec::RandomMonotone { seed: ctx.sub_seed(s), cones }, n)?;
            ensure!(is_monotone(&f), "monotone({},{cones}) at n = {n} has a violating edge", ctx.sub_seed(s));
        }
    }
    Ok(format!("n = 1..={max_n}, {seeds} seeds each"))
}

fn truth_table_round_trip(ctx: &Ctx) -> Check {
    let mut rng = ctx.rng(8);
    for n in 1..=ctx.pick(10, 14) {
        let f = TruthTable::from_fn(n, |_| rng.gen())?;
        let text = f.to_string();
        ensure!(text.parse::<TruthTable>()? == f, "n = {n} does not round-trip");
        ensure!(text.trim_end_matches('\n').parse::<TruthTable>()? == f, "n = {n} needs its trailing newline");
    }
    for bad in ["n=2\n011\n", "n=2\n01a0\n", "n=2\n0110\n\n", "n=2 \n0110\n", "m=2\n0110\n"] {
        ensure!(bad.parse::<TruthTable>().is_err(), "malformed table {bad:?} accepted");
    }
    Ok("tables up to the largest tested n round-trip; malformed input rejected".into())
}

// ---------------------------------------------------------------- oracles

fn edge_count_identity(ctx: &Ctx) -> Check {
    let identity = |f: &TruthTable| -> std::result::Result<(), Failure> {
        let n = f.dim();
        let r = influence_report(f)?;
        // each influential edge seen once from each endpoint
        let mut directed = 0u64;
        let mut violating = 0u64;
        for x in 0..f.len() {
            for b in 0..n {
                let y = x ^ (1 << b);
                if f.get(x) != f.get(y) {
                    directed += 1;
                    violating += u64::from(x < y && f.get(x));
                }
            }
        }
        ensure!(
            2 * r.influential_count == directed,
            "n = {n}: influential {} vs directed {directed}",
            r.influential_count
        );
        ensure!(
            r.total_influence * Ratio::from_integer(1u64 << n) == Ratio::from_integer(directed),
            "n = {n}: I(f) mismatch"
        );
        ensure!(r.violating_count == violating, "n = {n}: violating {} vs {violating}", r.violating_count);
        ensure!(violating <= r.influential_count && r.influential_count <= r.edge_count(), "n = {n}: count ordering");
        Ok(())
    };
    let all = all_tables(4)?;
    all.par_iter().try_for_each(identity)?;
    let per_n = ctx.pick(5, 25);
    for n in 5..=12 {
        for (_, f) in corpus(n, per_n, ctx.sub_seed(9))? {
            identity(&f)?;
        }
    }
    Ok(format!("all {} functions at n = 4 and {} seeded functions at n = 5..=12", all.len(), 8 * per_n))
}

fn check_table(f: &TruthTable, table: &StickyTable) -> std::result::Result<(), Failure> {
    let n = f.dim();
    ensure!(table.row(0).is_some_and(|r| r.iter().all(|&s| s == 1.0)), "s[0] is not identically 1");
    for ell in 1..=table.ell_max() {
        for x in 0..f.len() {
            let s = table.get(ell, x);
            ensure!((0.0..=1.0).contains(&s), "s[{ell}][{x}] = {s}");
            ensure!(s <= table.get(ell - 1, x) + 1e-15, "survival increases at ({ell}, {x})");
            let sum: f64 =
                (0..n).map(|b| x ^ (1 << b)).filter(|&y| f.get(x) == f.get(y)).map(|y| table.get(ell - 1, y)).sum();
            ensure!((s - sum / n as f64).abs() <= 1e-12, "recurrence fails at ({ell}, {x})");
        }
    }
    Ok(())
}

fn survival_tables(ctx: &Ctx) -> Check {
    let mut count = 0;
    for n in 1..=ctx.pick(8, 12) {
        for (_, f) in corpus(n, ctx.pick(6, 20), ctx.sub_seed(10))? {
            check_table(&f, &survival_table(&f, 1 << crate::hypercube::ceil_log2(n))?)?;
            count += 1;
        }
    }
    let anti = survival_table(&table_of(&spec("antidictator(1)"), 2)?, 2)?;
    ensure!(anti.row(1) == Some(&[0.5; 4][..]) && anti.row(2) == Some(&[0.25; 4][..]), "anti-dictator survival values");
    Ok(format!("{count} tables satisfy the recurrence, range and monotonicity"))
}

/// Seeded corpus for the sticky-vertex checks, `n = 4..=12`.
fn sticky_corpus(ctx: &Ctx) -> Result<Vec<TruthTable>> {
    let per_n = ctx.pick(5, 23);
    let mut out = Vec::new();
    for n in 4..=12 {
        out.extend(corpus(n, per_n, ctx.sub_seed(11))?.into_iter().map(|(_, t)| t));
    }
    Ok(out)
}

fn nonsticky_fraction(ctx: &Ctx) -> Check {
    let fs = sticky_corpus(ctx)?;
    let mut cells = 0;
    for f in &fs {
        let n = f.dim();
        let influential = influence_report(f)?.influential_count;
        let lengths: Vec<WalkLength> = WalkLength::all(n).collect();
        let table = survival_table(f, lengths.last().map_or(1, |w| w.ell))?;
        for wl in &lengths {
            let set = sticky_set(f, &table, wl.ell)?;
            let nonsticky = set.nonsticky_count();
            ensure!(
                nonsticky_fraction_within_bound(n, wl.ell, nonsticky, influential),
                "n = {n}, ell = {}: |N| = {nonsticky} exceeds 2 ell I(f) 2^n / n with {influential} influential edges",
                wl.ell
            );
            cells += 1;
        }
    }
    Ok(format!("{} functions, {cells} (f, ell) cells, exact integer comparison", fs.len()))
}

fn sticky_nesting(ctx: &Ctx) -> Check {
    let fs = sticky_corpus(ctx)?;
    let mut pairs = 0;
    for f in &fs {
        let lengths: Vec<WalkLength> = WalkLength::all(f.dim()).collect();
        let table = survival_table(f, lengths.last().map_or(1, |w| w.ell))?;
        let sets = lengths.iter().map(|wl| sticky_set(f, &table, wl.ell)).collect::<Result<Vec<_>>>()?;
        for w in sets.windows(2) {
            let (shorter, longer) = (&w[0], &w[1]);
            ensure!(
                longer.sticky_vertices().all(|x| shorter.is_sticky(x)),
                "n = {}: a {}-sticky vertex is not {}-sticky",
                f.dim(),
                longer.ell,
                shorter.ell
            );
            pairs += 1;
        }
    }
    Ok(format!("{pairs} nested pairs over {} functions", fs.len()))
}

fn crossing_product_for(f: &TruthTable) -> std::result::Result<usize, Failure> {
    let n = f.dim();
    let table = survival_table(f, 4)?;
    let scale = 2.0 / (n as f64 * (1u64 << n) as f64);
    let mut terms = 0;
    for ell in [1, 2, 4] {
        let uc = unique_crossing_probabilities(f, ell)?;
        for (t, from, to) in uc.support() {
            ensure!(
                (from ^ to).is_power_of_two() && f.get(from) != f.get(to),
                "support entry {from} -> {to} is not influential"
            );
            ensure!(t >= 1 && t <= ell, "support step {t} outside 1..={ell}");
        }
        for t in 1..=ell {
            for u in 0..f.len() {
                for b in 0..n {
                    let v = u ^ (1 << b);
                    if f.get(u) == f.get(v) {
                        continue;
                    }
                    let exact = ratio_f64(uc.probability(t, u, v));
                    let product = claim_product(&table, ell, t, u, v);
                    ensure!(
                        (exact - product).abs() <= 1e-9,
                        "n = {n}, ell = {ell}, t = {t}, {u} -> {v}: {exact} vs {product}"
                    );
                    if u < v {
                        let both = exact + ratio_f64(uc.probability(t, v, u));
                        let sym = scale
                            * 0.5
                            * (table.get(t - 1, u) * table.get(ell - t, v)
                                + table.get(t - 1, v) * table.get(ell - t, u));
                        ensure!((both - sym).abs() <= 1e-9, "undirected ({u}, {v}) at t = {t}: {both} vs {sym}");
                    }
                    terms += 1;
                }
            }
        }
    }
    Ok(terms)
}

fn crossing_product(ctx: &Ctx) -> Check {
    let mut tables = all_tables(3)?;
    let extra = ctx.pick(0, 300);
    tables.extend(corpus(4, extra, ctx.sub_seed(12))?.into_iter().map(|(_, t)| t));
    let terms: usize =
        tables.par_iter().map(crossing_product_for).collect::<std::result::Result<Vec<_>, _>>()?.iter().sum();
    Ok(format!("all 256 functions at n = 3 plus {extra} at n = 4; {terms} directed terms within 1e-9"))
}

fn sandwich_for(f: &TruthTable) -> std::result::Result<(), Failure> {
    let table = survival_table(f, 4)?;
    for ell in [1, 2, 3, 4] {
        let stats = exhaustive_walk_stats(f, ell)?;
        let events = event_probability_sum(f, &table, ell)?;
        let reject = stats.rejection_probability();
        ensure!(
            events <= ratio_f64(reject) + 1e-12,
            "n = {}, ell = {ell}: event sum {events} > rejection {reject}",
            f.dim()
        );
        ensure!(
            reject <= stats.endpoints_differ_probability(),
            "n = {}, ell = {ell}: rejection above Pr[endpoints differ]",
            f.dim()
        );
    }
    Ok(())
}

fn sandwich(ctx: &Ctx) -> Check {
    let mut tables = all_tables(2)?;
    tables.extend(all_tables(3)?);
    if ctx.full {
        tables.extend(all_tables(4)?);
    } else {
        tables.extend(corpus(4, 300, ctx.sub_seed(13))?.into_iter().map(|(_, t)| t));
    }
    tables.par_iter().try_for_each(sandwich_for)?;
    Ok(format!("{} functions, ell = 1..=4", tables.len()))
}

fn distance_equivalence(ctx: &Ctx) -> Check {
    let mut checked = 0;
    for n in 1..=3 {
        let monotone = monotone_functions(n)?;
        for f in all_tables(n)? {
            let cut = distance_to_monotonicity(&f)?.flips;
            ensure!(cut == distance_bruteforce_among(&f, &monotone)?, "n = {n}: {f}");
            checked += 1;
        }
    }
    let monotone4 = monotone_functions(4)?;
    let fours: Vec<TruthTable> = if ctx.full {
        all_tables(4)?
    } else {
        let mut rng = ctx.rng(14);
        (0..2000).map(|_| TruthTable::from_packed(4, rng.gen::<u64>() & 0xFFFF)).collect::<Result<_>>()?
    };
    fours.par_iter().try_for_each(|f| -> std::result::Result<(), Failure> {
        let cut = distance_to_monotonicity(f)?.flips;
        let brute = distance_bruteforce_among(f, &monotone4)?;
        ensure!(cut == brute, "n = 4, {}: min cut {cut} vs brute force {brute}", f.to_bit_string());
        Ok(())
    })?;
    Ok(format!("{} functions agree", checked + fours.len()))
}

fn witness_validity(ctx: &Ctx) -> Check {
    let (lo, hi, per_n) = ctx.pick((5, 10, 4), (8, 14, 29));
    let mut count = 0;
    for n in lo..=hi {
        for (s, f) in corpus(n, per_n, ctx.sub_seed(15))? {
            let r = distance_to_monotonicity(&f)?;
            ensure!(is_monotone(&r.witness), "{s} at n = {n}: witness not monotone");
            ensure!(r.witness.hamming_distance(&f)? == r.flips, "{s} at n = {n}: witness not at distance {}", r.flips);
            ensure!((r.flips == 0) == is_monotone(&f), "{s} at n = {n}: zero distance disagrees with monotonicity");
            count += 1;
        }
    }
    Ok(format!("{count} witnesses at n = {lo}..={hi}"))
}

// ---------------------------------------------------------------- tester

fn one_sided(ctx: &Ctx) -> Check {
    let monotone: Vec<(FamilySpec, usize)> = vec![
        (spec("dictator(1)"), 16),
        (spec("majority"), 101),
        (spec("threshold(3)"), 9),
        (FamilySpec::RandomMonotone { seed: ctx.sub_seed(16), cones: 4 }, 12),
        (FamilySpec::RandomMonotone { seed: ctx.sub_seed(17), cones: 9 }, 20),
    ];
    let per = ctx.trials / monotone.len() as u64;
    for (i, (s, n)) in monotone.iter().enumerate() {
        let f = instantiate(s, *n)?;
        let tally = run_trials(&f, None, per, ctx.seed, 0x100 + i as u64, ctx.rule);
        ensure!(tally.rejections == 0, "{s} at n = {n} rejected {} times", tally.rejections);
    }
    let mut rng = ctx.rng(18);
    let mut witnesses = 0;
    for (i, n) in (0..ctx.pick(20u64, 100)).zip([3usize, 6, 9, 33, 80].iter().cycle()) {
        let f = instantiate(&corpus_spec(*n, ctx.seed, i), *n)?;
        for _ in 0..200 {
            let mut meter = QueryMeter::new(&f);
            let out = run_once_metered(&mut meter, &mut rng, None, ctx.rule);
            if let Some(w) = out.witness() {
                ensure!(is_violation(&f, &w.edge), "witness {} does not re-verify", w.edge);
                witnesses += 1;
            }
        }
    }
    Ok(format!(
        "{} runs on monotone inputs, 0 rejections; {witnesses} witnesses re-verified",
        per * monotone.len() as u64
    ))
}

fn query_bound_check(ctx: &Ctx) -> Check {
    let dims: Vec<usize> = ctx.pick(vec![1, 2, 3, 5, 16, 100, 1024], vec![1, 2, 3, 5, 16, 100, 1024, 1 << 16]);
    let mut runs = 0;
    for &n in &dims {
        for (s, f) in [
            ("parity", instantiate(&FamilySpec::Parity, n)?),
            ("bernoulli", instantiate(&corpus_spec(n, ctx.seed, 0), n)?),
        ] {
            for wl in WalkLength::all(n) {
                let trials = (ctx.pick(4_000, 20_000) / wl.ell as u64).max(4);
                let tally = run_trials(&f, Some(wl.ell), trials, ctx.seed, 0x200 + wl.k as u64, ctx.rule);
                let bound = query_bound_for_length(wl.ell);
                ensure!(
                    tally.max_distinct <= bound,
                    "{s} n = {n}, ell = {}: {} distinct > {bound}",
                    wl.ell,
                    tally.max_distinct
                );
                ensure!(tally.max_distinct <= query_bound(n), "{s} n = {n}: exceeds the dimension bound");
                runs += trials;
            }
        }
    }
    Ok(format!("{runs} runs, n up to {}", dims.last().unwrap_or(&0)))
}

/// Functions small enough for the exhaustive oracle.
fn exact_corpus(ctx: &Ctx) -> Result<Vec<(String, TruthTable)>> {
    let mut out = Vec::new();
    for (s, n) in [("antidictator(1)", 2), ("antidictator(2)", 3), ("antidictator(1)", 4), ("parity", 2), ("parity", 4)]
    {
        out.push((format!("{s} n={n}"), table_of(&spec(s), n)?));
    }
    for (s, f) in corpus(4, ctx.pick(4, 12), ctx.sub_seed(19))? {
        out.push((format!("{s} n=4"), f));
    }
    Ok(out)
}

fn exact_vs_oracle(ctx: &Ctx) -> Check {
    let mut cells = 0;
    let mut worst = 0.0f64;
    for (i, (label, f)) in exact_corpus(ctx)?.iter().enumerate() {
        for wl in WalkLength::all(f.dim()) {
            let exact = ratio_f64(exhaustive_walk_stats(f, wl.ell)?.rejection_probability());
            let tally = run_trials(f, Some(wl.ell), ctx.trials, ctx.seed, 0x300 + 8 * i as u64 + wl.k as u64, ctx.rule);
            let se = standard_error(exact, tally.trials);
            let gap = (tally.rate() - exact).abs();
            ensure!(
                gap <= 3.0 * se,
                "{label}, ell = {}: rate {:.5} vs exact {exact:.5} ({:.1} standard errors)",
                wl.ell,
                tally.rate(),
                gap / se
            );
            if se > 0.0 {
                worst = worst.max(gap / se);
            }
            cells += 1;
        }
    }
    Ok(format!("{cells} cells at {} trials, largest deviation {worst:.2} standard errors", ctx.trials))
}

fn sticky_edge_bound(ctx: &Ctx) -> Check {
    let mut cases: Vec<(String, TruthTable)> = exact_corpus(ctx)?;
    let far_dims = ctx.pick(vec![6], vec![8, 10, 12]);
    for &n in &far_dims {
        cases.push((format!("antidictator(1) n={n}"), table_of(&spec("antidictator(1)"), n)?));
        for i in 0..ctx.pick(1u64, 4) {
            let s = FamilySpec::Blended {
                base: Box::new(FamilySpec::RandomMonotone { seed: ctx.sub_seed(20 + i), cones: 2 }),
                noise_coord: 1 + i as usize,
                mask: 1 << (n - 1),
                seed: ctx.sub_seed(30 + i),
            };
            cases.push((format!("{s} n={n}"), table_of(&s, n)?));
        }
    }
    let mut cells = 0;
    for (i, (label, f)) in cases.iter().enumerate() {
        let n = f.dim();
        let lengths: Vec<WalkLength> = WalkLength::all(n).collect();
        let table = survival_table(f, lengths.last().map_or(1, |w| w.ell))?;
        let bounds = oracle_cells(f)?;
        for (wl, cell) in lengths.iter().zip(&bounds) {
            let events = event_probability_sum(f, &table, wl.ell)?;
            let tally = run_trials(f, Some(wl.ell), ctx.trials, ctx.seed, 0x400 + 8 * i as u64 + wl.k as u64, ctx.rule);
            let upper = tally.rate() + 3.0 * standard_error(tally.rate(), tally.trials);
            ensure!(
                upper >= cell.bound,
                "{label}, ell = {}: rate {:.5} + 3 se below {:.5}",
                wl.ell,
                tally.rate(),
                cell.bound
            );
            ensure!(
                upper >= events,
                "{label}, ell = {}: rate {:.5} + 3 se below the exact crossing-event sum {events:.5}",
                wl.ell,
                tally.rate()
            );
            ensure!(events + 1e-12 >= cell.bound, "{label}, ell = {}: crossing-event sum below its constant", wl.ell);
            cells += 1;
        }
    }
    Ok(format!("{cells} cells at {} trials", ctx.trials))
}

/// The bisection rule traced on precomputed path values.
fn reference_bisection(values: &[bool]) -> usize {
    let (mut lo, mut hi) = (0, values.len() - 1);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if values[mid] != values[lo] {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn binary_search(ctx: &Ctx) -> Check {
    let mut rng = ctx.rng(21);
    let mut searched = 0;
    for i in 0..ctx.pick(20_000u64, 200_000) {
        let n = [2usize, 3, 7, 10, 100][(i % 5) as usize];
        let f = instantiate(&corpus_spec(n, ctx.seed, i % 50), n)?;
        let ell = rng.gen_range(1..=32);
        let start = sample_point(&mut rng, n);
        let path = random_walk(&mut rng, &start, ell);
        let values: Vec<bool> = path.vertices().map(|v| f.eval(&v)).collect();
        if values[0] == values[ell] {
            ensure!(binary_search_influential(&f, &path).is_err(), "search accepted equal endpoint values");
            continue;
        }
        let (e, t) = binary_search_influential(&f, &path)?;
        ensure!((1..=ell).contains(&t), "t = {t} outside 1..={ell}");
        ensure!(e == path.edge_at(t)?, "returned edge is not step {t} of the path");
        ensure!(values[t - 1] != values[t], "returned edge is not influential");
        ensure!(t == reference_bisection(&values), "tie-break differs from the left-first rule");
        searched += 1;
    }
    Ok(format!("{searched} searches"))
}

fn amplified_budget(ctx: &Ctx) -> Check {
    let mut rng = ctx.rng(22);
    for (s, n) in [("majority", 9usize), ("antidictator(1)", 8), ("parity", 5), ("dictator(2)", 40)] {
        let f = instantiate(&spec(s), n)?;
        for (eps, reps) in [(0.5, Some(50u64)), (0.25, Some(400)), (0.5, None)] {
            let mut config = AmplifyConfig::new(eps, 1.0)?;
            config.max_repetitions = 2_000;
            if let Some(r) = reps {
                config = config.with_repetitions(r);
            }
            let r = config.repetitions(n);
            let out = run_amplified(&f, &config, &mut rng)?;
            ensure!(r >= 1 && r <= config.max_repetitions && out.runs <= r, "{s}: {} runs, R = {r}", out.runs);
            ensure!(
                out.stats.distinct <= out.runs * query_bound(n),
                "{s}: {} distinct queries over {} runs",
                out.stats.distinct,
                out.runs
            );
            ensure!(out.is_reject() || out.runs == r, "{s}: accepted after {} of {r} runs", out.runs);
            if spec(s).is_monotone_family() {
                ensure!(!out.is_reject(), "{s}: monotone input rejected");
            }
        }
    }
    Ok("repetitions and query totals within their caps".into())
}

// ---------------------------------------------------------------- harness

fn harness_determinism(ctx: &Ctx) -> Check {
    let f = instantiate(&spec("bernoulli(0.3,12)"), 6)?;
    let opts = McOptions { rule: ctx.rule, ..McOptions::new(ctx.pick(20_000, 200_000), ctx.seed, true) };
    let a = mc_estimate(&f, "f", &opts)?;
    let b = mc_estimate(&f, "f", &opts)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(2).build().map_err(|e| Failure(e.to_string()))?;
    let c = pool.install(|| mc_estimate(&f, "f", &opts))?;
    ensure!(a == b && b == c, "rows differ between identical runs or worker counts");
    let (mut x, mut y) = (Vec::new(), Vec::new());
    write_csv(&mut x, &a)?;
    write_csv(&mut y, &c)?;
    ensure!(x == y, "CSV bytes differ");
    Ok(format!("{} rows reproduced byte for byte", a.len()))
}

fn csv_schema(ctx: &Ctx) -> Check {
    let f = table_of(&spec("antidictator(1)"), 6)?;
    let mut rows = mc_estimate(&f, "antidictator(1)", &McOptions::new(4_000, ctx.seed, true))?;
    rows.extend(mc_estimate(&f, "antidictator(1)", &McOptions::new(1_000, ctx.seed, false))?);
    let bare = rows.clone();
    attach_oracles(&f, &mut rows)?;
    let mut buf = Vec::new();
    write_csv(&mut buf, &bare)?;
    let text = String::from_utf8(buf.clone()).map_err(|e| Failure(e.to_string()))?;
    ensure!(text.lines().next() == Some(CSV_HEADER), "header is {:?}", text.lines().next());
    ensure!(text.lines().skip(1).all(|l| l.ends_with(",,")), "absent oracle values are not empty fields");
    ensure!(read_csv(buf.as_slice())? == bare, "CSV does not round-trip");
    let mut buf = Vec::new();
    write_csv(&mut buf, &rows)?;
    let back = read_csv(buf.as_slice())?;
    ensure!(
        back == rows && back.iter().all(|r| r.oracle_bound.is_some() && r.exact_rate.is_none()),
        "oracle columns lost"
    );
    ensure!(back.last().is_some_and(|r| r.ell == EllLabel::Mixed), "mixed row label");
    Ok("header, empty fields and round trip".into())
}

fn row_invariants(ctx: &Ctx) -> Check {
    let mut rows = Vec::new();
    for (s, n) in [("majority", 7), ("antidictator(1)", 5), ("parity", 9), ("bernoulli(0.02,4)", 12)] {
        let f = instantiate(&spec(s), n)?;
        for stratify in [true, false] {
            rows.extend(mc_estimate(
                &f,
                s,
                &McOptions { rule: ctx.rule, ..McOptions::new(10_000, ctx.seed, stratify) },
            )?);
        }
    }
    for r in &rows {
        ensure!(
            r.wilson_low <= r.rate && r.rate <= r.wilson_high,
            "{} n = {} ell = {}: interval",
            r.family,
            r.n,
            r.ell
        );
        ensure!(r.rejections <= r.trials, "{} n = {}: rejections exceed trials", r.family, r.n);
        if r.family == "majority" {
            ensure!(r.rate == 0.0, "monotone control rejected");
        }
    }
    Ok(format!("{} rows", rows.len()))
}

fn config_round_trip(ctx: &Ctx) -> Check {
    for (i, s) in
        ["antidictator(1)", "blended(monotone(4,2),2,0x4,9)", "bernoulli(0.125,3)", "threshold(2)"].iter().enumerate()
    {
        let c = ExperimentConfig {
            family: spec(s),
            n_values: vec![4, 6 + i],
            trials: 1 + ctx.seed % 1000,
            seed: ctx.seed,
            stratify_by_ell: i % 2 == 0,
            output: format!("out-{i}.csv").into(),
        };
        let back: ExperimentConfig = c.to_string().parse()?;
        ensure!(back == c, "{s} does not round-trip");
    }
    Ok("configs round-trip through their file form".into())
}

fn run_check(id: &str, ctx: &Ctx) -> Check {
    match id {
        "hypercube.canonical-edge" => canonical_edge(ctx),
        "hypercube.stationarity" => stationarity(ctx),
        "hypercube.uniform-edge-marginal" => uniform_edge_marginal(ctx),
        "hypercube.reproducible" => reproducible(ctx),
        "function.meter-conservation" => meter_conservation(ctx),
        "function.generator-determinism" => generator_determinism(ctx),
        "function.random-monotone" => random_monotone(ctx),
        "function.truth-table-round-trip" => truth_table_round_trip(ctx),
        "oracle.edge-count-identity" => edge_count_identity(ctx),
        "oracle.survival-table" => survival_tables(ctx),
        "oracle.nonsticky-fraction" => nonsticky_fraction(ctx),
        "oracle.sticky-nesting" => sticky_nesting(ctx),
        "oracle.crossing-product" => crossing_product(ctx),
        "oracle.sandwich" => sandwich(ctx),
        "oracle.distance-equivalence" => distance_equivalence(ctx),
        "oracle.witness-validity" => witness_validity(ctx),
        "tester.one-sided" => one_sided(ctx),
        "tester.query-bound" => query_bound_check(ctx),
        "tester.exact-vs-oracle" => exact_vs_oracle(ctx),
        "tester.sticky-edge-bound" => sticky_edge_bound(ctx),
        "tester.binary-search" => binary_search(ctx),
        "tester.amplified-budget" => amplified_budget(ctx),
        "harness.determinism" => harness_determinism(ctx),
        "harness.csv-schema" => csv_schema(ctx),
        "harness.row-invariants" => row_invariants(ctx),
        "harness.config-round-trip" => config_round_trip(ctx),
        _ => Err(Failure(format!("unknown check {id:?}"))),
    }
}

/// Runs the suite. Every check runs even after a failure; errors inside a
/// check count as failures. The final entry is the coverage meta-check,
/// which fails unless every identifier in [`INVARIANTS`] ran.
pub fn verify(options: &VerifyOptions) -> Result<VerifyReport> {
    if let Some(only) = &options.only {
        if let Some(bad) = only.iter().find(|id| !INVARIANTS.contains(&id.as_str())) {
            return Err(Error::InvalidParameter(format!("unknown check {bad:?}")));
        }
    }
    let full = options.level == Level::Full;
    let ctx = Ctx { full, seed: options.seed, rule: options.rule, trials: if full { 1_000_000 } else { 100_000 } };
    let mut checks = Vec::new();
    for &id in INVARIANTS {
        if options.only.as_ref().is_some_and(|only| !only.iter().any(|o| o == id)) {
            continue;
        }
        let start = Instant::now();
        let (passed, detail) = match panic::catch_unwind(AssertUnwindSafe(|| run_check(id, &ctx))) {
            Ok(Ok(detail)) => (true, detail),
            Ok(Err(Failure(detail))) => (false, detail),
            Err(_) => (false, "panicked".to_string()),
        };
        checks.push(CheckResult { id: id.to_string(), passed, detail, seconds: start.elapsed().as_secs_f64() });
    }
    let ran: BTreeSet<&str> = checks.iter().map(|c| c.id.as_str()).collect();
    let missing: Vec<&str> = INVARIANTS.iter().copied().filter(|id| !ran.contains(id)).collect();
    checks.push(CheckResult {
        id: META_CHECK.to_string(),
        passed: missing.is_empty(),
        detail: if missing.is_empty() {
            format!("all {} identifiers ran", INVARIANTS.len())
        } else {
            format!("missing: {}", missing.join(", "))
        },
        seconds: 0.0,
    });
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport {
        level: options.level,
        seed: options.seed,
        mutated_walk: options.rule != StepRule::Simple,
        passed,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn only(ids: &[&str], rule: StepRule) -> VerifyReport {
        let opts = VerifyOptions {
            rule,
            only: Some(ids.iter().map(|s| s.to_string()).collect()),
            ..VerifyOptions::new(Level::Quick, 5)
        };
        verify(&opts).unwrap()
    }

    #[test]
    fn registry_is_complete() {
        let ctx = Ctx { full: false, seed: 0, rule: StepRule::Simple, trials: 1 };
        assert!(matches!(run_check("nope", &ctx), Err(Failure(_))));
        let unique: BTreeSet<_> = INVARIANTS.iter().collect();
        assert_eq!(unique.len(), INVARIANTS.len());
    }

    #[test]
    fn partial_runs_fail_coverage() {
        let r = only(&["harness.config-round-trip", "hypercube.uniform-edge-marginal"], StepRule::Simple);
        assert_eq!(r.checks.len(), 3);
        assert!(r.checks[..2].iter().all(|c| c.passed));
        let meta = r.checks.last().unwrap();
        assert_eq!(meta.id, META_CHECK);
        assert!(!meta.passed && !r.passed);
        assert!(
            verify(&VerifyOptions { only: Some(vec!["bogus".into()]), ..VerifyOptions::new(Level::Quick, 1) }).is_err()
        );
    }

    #[test]
    fn lazy_walk_is_caught() {
        let r = only(&["tester.sticky-edge-bound"], StepRule::Lazy);
        assert!(!r.checks[0].passed, "{}", r.checks[0].detail);
        assert!(r.mutated_walk);
    }

    #[test]
    fn levels_parse() {
        assert_eq!("quick".parse::<Level>().unwrap(), Level::Quick);
        assert_eq!(Level::Full.to_string(), "full");
        assert!("medium".parse::<Level>().is_err());
    }
}
