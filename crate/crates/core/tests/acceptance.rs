//! End-to-end acceptance checks. Each test prints one `PASS` or `FAIL` line
//! to stderr, bypassing the harness's output capture, then fails on `FAIL`.
//!
//! All randomness derives from `ACCEPTANCE_SEED`; it was fixed before any of
//! these tests ran and is never tuned.

use std::collections::HashMap;
use std::io::Write;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use hypermono::function::{instantiate, to_truth_table, FamilySpec, TruthTable};
use hypermono::harness::{mc_estimate, run_trials, EllLabel, McOptions};
use hypermono::hypercube::{StepRule, WalkLength};
use hypermono::oracles::{
    claim_product, distance_bruteforce_among, distance_to_monotonicity, exhaustive_rejection_probability, f_ell_bound,
    influence_report, is_monotone, monotone_functions, sampled_violating_ratio, sticky_set, survival_table,
    STICKY_TOLERANCE,
};
use hypermono::stats::standard_error;
use hypermono::tester::{edge_sampler, query_bound, run_amplified, AmplifyConfig};

const ACCEPTANCE_SEED: u64 = 0x00C0_FFEE;

type Verdict = Result<String, String>;

fn report(label: &str, verdict: Verdict) {
    let line = match &verdict {
        Ok(detail) => format!("PASS {label}: {detail}\n"),
        Err(detail) => format!("FAIL {label}: {detail}\n"),
    };
    let _ = std::io::stderr().write_all(line.as_bytes());
    if let Err(detail) = verdict {
        panic!("{label}: {detail}");
    }
}

fn rng(tag: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(ACCEPTANCE_SEED);
    r.set_stream(tag);
    r
}

fn table(spec: &FamilySpec, n: usize) -> TruthTable {
    to_truth_table(&instantiate(spec, n).unwrap()).unwrap()
}

fn to_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn all_tables(n: usize) -> Vec<TruthTable> {
    (0..1u64 << (1u32 << n)).map(|packed| TruthTable::from_packed(n, packed).unwrap()).collect()
}

fn random_table<R: Rng>(rng: &mut R, n: usize) -> TruthTable {
    TruthTable::from_fn(n, |_| rng.gen()).unwrap()
}

/// Mixed corpus member `i` at dimension `n >= 2`: dense and sparse random
/// functions, monotone functions, a monotone function with an anti-dictator
/// planted on half the cube, and anti-dictators.
fn corpus_member<R: Rng>(rng: &mut R, n: usize, i: usize) -> FamilySpec {
    let seed = rng.gen();
    match i % 5 {
        0 => FamilySpec::RandomBernoulli { p: 0.5, seed },
        1 => FamilySpec::RandomBernoulli { p: 0.03, seed },
        2 => FamilySpec::RandomMonotone { seed, cones: rng.gen_range(1..6) },
        3 => {
            let noise = rng.gen_range(1..=n);
            let pinned = (noise % n) + 1;
            FamilySpec::Blended {
                base: Box::new(FamilySpec::RandomMonotone { seed, cones: rng.gen_range(1..4) }),
                noise_coord: noise,
                mask: 1 << (pinned - 1),
                seed: rng.gen(),
            }
        }
        _ => FamilySpec::AntiDictator(rng.gen_range(1..=n)),
    }
}

/// 200 corpus members cycling through `n = lo..=hi`.
fn corpus(tag: u64, lo: usize, hi: usize) -> Vec<(FamilySpec, TruthTable)> {
    let mut r = rng(tag);
    (0..200)
        .map(|i| {
            let n = lo + i % (hi - lo + 1);
            let s = corpus_member(&mut r, n, i);
            let t = table(&s, n);
            (s, t)
        })
        .collect()
}

/// `s[j][x]`: probability that a `j`-step walk from `x` crosses no
/// influential edge, by direct recursion over the first step.
fn survival(f: &TruthTable, ell_max: usize) -> Vec<Vec<f64>> {
    let n = f.dim();
    let mut s = vec![vec![1.0; f.len() as usize]];
    for j in 1..=ell_max {
        let prev = &s[j - 1];
        let next = (0..f.len())
            .map(|x| {
                let kept: f64 =
                    (0..n).map(|b| x ^ (1 << b)).filter(|&y| f.get(x) == f.get(y)).map(|y| prev[y as usize]).sum();
                kept / n as f64
            })
            .collect();
        s.push(next);
    }
    s
}

fn sticky(s: &[Vec<f64>], ell: usize, x: u64) -> bool {
    s[ell][x as usize] >= 0.5 - STICKY_TOLERANCE
}

fn max_length(n: usize) -> usize {
    WalkLength::all(n).last().unwrap().ell
}

#[test]
fn one_sidedness() {
    let verdict = (|| {
        let mut cases: Vec<(FamilySpec, usize, u64)> = vec![
            (FamilySpec::Dictator(3), 64, 250_000),
            (FamilySpec::Majority, 101, 250_000),
            (FamilySpec::Threshold(15), 30, 250_000),
        ];
        let mut r = rng(1);
        for _ in 0..50 {
            let n = r.gen_range(4..=200);
            cases.push((FamilySpec::RandomMonotone { seed: r.gen(), cones: r.gen_range(1..10) }, n, 5_000));
        }
        let mut runs = 0;
        for (i, (s, n, trials)) in cases.iter().enumerate() {
            let f = instantiate(s, *n).unwrap();
            let tally = run_trials(&f, None, *trials, ACCEPTANCE_SEED, 0x1_0000 + i as u64, StepRule::Simple);
            if tally.rejections != 0 {
                return Err(format!("{s} at n = {n} rejected {} times", tally.rejections));
            }
            runs += tally.trials;
        }
        if runs != 1_000_000 {
            return Err(format!("ran {runs} invocations"));
        }
        Ok(format!("{runs} runs on {} monotone functions, 0 rejections", cases.len()))
    })();
    report("[1] one-sidedness", verdict);
}

#[test]
fn edge_count_identity() {
    let check = |f: &TruthTable| -> Result<(), String> {
        let n = f.dim();
        let mut influential = 0u64;
        let mut sensitivity = 0u64;
        for x in 0..f.len() {
            for b in 0..n {
                let y = x ^ (1 << b);
                if f.get(x) != f.get(y) {
                    sensitivity += 1;
                    influential += u64::from(x < y);
                }
            }
        }
        let r = influence_report(f).map_err(|e| e.to_string())?;
        // I(f) as the mean sensitivity
        let mean_sensitivity = Ratio::new(sensitivity, f.len());
        let identity = r.total_influence * (1u64 << (n - 1));
        if r.total_influence != mean_sensitivity
            || identity != Ratio::from_integer(influential)
            || r.influential_count != influential
        {
            return Err(format!("{}: I = {}, counted {influential} edges", f.to_bit_string(), r.total_influence));
        }
        Ok(())
    };
    let verdict = (|| {
        all_tables(4).par_iter().try_for_each(check)?;
        let mut r = rng(2);
        let randoms: Vec<TruthTable> = (0..200).map(|i| random_table(&mut r, 5 + i % 8)).collect();
        randoms.par_iter().try_for_each(check)?;
        Ok("all 65536 functions at n = 4 and 200 random functions at n = 5..=12 exact".to_string())
    })();
    report("[2] edge-count identity", verdict);
}

#[test]
fn nonsticky_fraction() {
    let verdict = (|| {
        let mut cells = 0;
        let mut tight = 0.0f64;
        for (s, f) in corpus(3, 4, 12) {
            let n = f.dim();
            let inf = influence_report(&f).unwrap().total_influence;
            let lib = survival_table(&f, max_length(n)).unwrap();
            let naive = survival(&f, max_length(n));
            for wl in WalkLength::all(n) {
                let nonsticky = (0..f.len()).filter(|&x| !sticky(&naive, wl.ell, x)).count() as u64;
                let set = sticky_set(&f, &lib, wl.ell).unwrap();
                if set.nonsticky_count() != nonsticky {
                    return Err(format!(
                        "{s} n = {n} ell = {}: library counts {} non-sticky, recursion {nonsticky}",
                        wl.ell,
                        set.nonsticky_count()
                    ));
                }
                let lhs = Ratio::new(u128::from(nonsticky), 1u128 << n);
                let rhs =
                    Ratio::new(2 * wl.ell as u128 * u128::from(*inf.numer()), n as u128 * u128::from(*inf.denom()));
                if lhs > rhs {
                    return Err(format!("{s} n = {n} ell = {}: non-sticky fraction {lhs} > {rhs}", wl.ell));
                }
                if rhs > Ratio::from_integer(0) {
                    let ratio = *lhs.numer() as f64 / *lhs.denom() as f64 * (*rhs.denom() as f64 / *rhs.numer() as f64);
                    tight = tight.max(ratio);
                }
                cells += 1;
            }
        }
        Ok(format!("{cells} (function, ell) cells, largest fraction/bound {tight:.3}"))
    })();
    report("[3] non-sticky fraction", verdict);
}

#[test]
fn sticky_nesting() {
    let verdict = (|| {
        let mut pairs = 0;
        let mut strict = 0;
        for (s, f) in corpus(3, 4, 12) {
            let n = f.dim();
            let naive = survival(&f, max_length(n));
            let lengths: Vec<WalkLength> = WalkLength::all(n).collect();
            for w in lengths.windows(2) {
                let (half, ell) = (w[0].ell, w[1].ell);
                for x in 0..f.len() {
                    if sticky(&naive, ell, x) && !sticky(&naive, half, x) {
                        return Err(format!("{s} n = {n}: vertex {x} is {ell}-sticky but not {half}-sticky"));
                    }
                    strict += usize::from(sticky(&naive, half, x) && !sticky(&naive, ell, x));
                }
                pairs += 1;
            }
        }
        Ok(format!("{pairs} (ell, ell/2) pairs nested; {strict} vertices lose stickiness when ell doubles"))
    })();
    report("[4] sticky nesting", verdict);
}

#[test]
fn crossing_product() {
    let check = |f: &TruthTable| -> Result<usize, String> {
        let n = f.dim();
        let lib = survival_table(f, 4).unwrap();
        let naive = survival(f, 4);
        for (j, row) in naive.iter().enumerate() {
            for (x, &s) in row.iter().enumerate() {
                if (lib.get(j, x as u64) - s).abs() > 1e-12 {
                    return Err(format!("{}: s[{j}][{x}] differs", f.to_bit_string()));
                }
            }
        }
        let mut terms = 0;
        for ell in [1usize, 2, 4] {
            // every start and step sequence; keep walks with a single influential crossing
            let sequences = n.pow(ell as u32);
            let mut once: HashMap<(usize, u64, u64), u64> = HashMap::new();
            for start in 0..f.len() {
                for seq in 0..sequences {
                    let (mut x, mut rest) = (start, seq);
                    let mut crossings = Vec::new();
                    for t in 1..=ell {
                        let y = x ^ (1 << (rest % n));
                        rest /= n;
                        if f.get(x) != f.get(y) {
                            crossings.push((t, x, y));
                        }
                        x = y;
                    }
                    if let [c] = crossings[..] {
                        *once.entry(c).or_default() += 1;
                    }
                }
            }
            let walks = (f.len() as usize * sequences) as f64;
            let exact = |t: usize, u: u64, v: u64| once.get(&(t, u, v)).copied().unwrap_or(0) as f64 / walks;
            let scale = 2.0 / (n as f64 * f.len() as f64);
            for t in 1..=ell {
                for u in 0..f.len() {
                    for b in 0..n {
                        let v = u ^ (1 << b);
                        if f.get(u) == f.get(v) {
                            continue;
                        }
                        let product = claim_product(&lib, ell, t, u, v);
                        if (exact(t, u, v) - product).abs() > 1e-9 {
                            return Err(format!(
                                "{} ell = {ell} t = {t} {u}->{v}: {} vs {product}",
                                f.to_bit_string(),
                                exact(t, u, v)
                            ));
                        }
                        if u < v {
                            let both = exact(t, u, v) + exact(t, v, u);
                            let averaged = scale
                                * 0.5
                                * (lib.get(t - 1, u) * lib.get(ell - t, v) + lib.get(t - 1, v) * lib.get(ell - t, u));
                            if (both - averaged).abs() > 1e-9 {
                                return Err(format!(
                                    "{} ell = {ell} t = {t} edge ({u},{v}): {both} vs {averaged}",
                                    f.to_bit_string()
                                ));
                            }
                        }
                        terms += 1;
                    }
                }
            }
        }
        Ok(terms)
    };
    let verdict = (|| {
        let terms: usize = all_tables(3).iter().map(check).sum::<Result<usize, String>>()?;
        Ok(format!("all 256 functions at n = 3, ell in {{1, 2, 4}}: {terms} directed terms within 1e-9"))
    })();
    report("[5] crossing product", verdict);
}

#[test]
fn sticky_edge_bound_exact() {
    let verdict = (|| {
        let nonzero = all_tables(4)
            .par_iter()
            .map(|f| -> Result<usize, String> {
                let table = survival_table(f, 4).unwrap();
                let mut nonzero = 0;
                for ell in [1usize, 2, 4] {
                    let size = sticky_set(f, &table, ell).unwrap().len() as u64;
                    let exact = exhaustive_rejection_probability(f, ell).unwrap();
                    let bound = Ratio::new(ell as u64 * size, 4 * 4 * 16);
                    if exact < bound {
                        return Err(format!("{} ell = {ell}: exact {exact} < {bound}", f.to_bit_string()));
                    }
                    nonzero += usize::from(size > 0);
                }
                Ok(nonzero)
            })
            .sum::<Result<usize, String>>()?;
        Ok(format!("all 65536 functions at n = 4, ell in {{1, 2, 4}}; {nonzero} cells with nonempty F_ell"))
    })();
    report("[6a] sticky-edge bound, exact", verdict);
}

/// Anti-dictator plus 20 functions at distance at least 1/16 from monotone,
/// each a monotone function with an anti-dictator planted on a subcube.
fn far_functions(n: usize) -> Vec<(FamilySpec, TruthTable)> {
    let mut out = vec![(FamilySpec::AntiDictator(1), table(&FamilySpec::AntiDictator(1), n))];
    let mut r = rng(0x60 + n as u64);
    while out.len() < 21 {
        let noise = r.gen_range(1..=n);
        let mut mask = 0u64;
        for _ in 0..r.gen_range(1..=2) {
            let c = r.gen_range(1..=n);
            if c != noise {
                mask |= 1 << (c - 1);
            }
        }
        let s = FamilySpec::Blended {
            base: Box::new(FamilySpec::RandomMonotone { seed: r.gen(), cones: r.gen_range(1..4) }),
            noise_coord: noise,
            mask,
            seed: r.gen(),
        };
        let f = table(&s, n);
        if distance_to_monotonicity(&f).unwrap().distance >= Ratio::new(1, 16) {
            out.push((s, f));
        }
    }
    out
}

#[test]
fn sticky_edge_bound_monte_carlo() {
    let verdict = (|| {
        let (mut cells, mut nonzero) = (0, 0);
        let mut margin = f64::INFINITY;
        for n in [8usize, 10, 12] {
            for (i, (s, f)) in far_functions(n).iter().enumerate() {
                let seed = ACCEPTANCE_SEED ^ ((n as u64) << 32) ^ i as u64;
                let rows = mc_estimate(f, &s.to_string(), &McOptions::new(1_000_000, seed, true)).unwrap();
                let table = survival_table(f, max_length(n)).unwrap();
                for row in &rows {
                    let EllLabel::Fixed(ell) = row.ell else { unreachable!() };
                    let bound = f_ell_bound(n, ell, sticky_set(f, &table, ell).unwrap().len());
                    let upper = row.rate + 3.0 * row.standard_error();
                    if upper < bound {
                        return Err(format!("{s} n = {n} ell = {ell}: rate {:.6} + 3 se < {bound:.6}", row.rate));
                    }
                    if bound > 0.0 {
                        nonzero += 1;
                        margin = margin.min(row.rate / bound);
                    }
                    cells += 1;
                }
            }
        }
        Ok(format!("{cells} stratified cells at 10^6 trials per function; {nonzero} with a positive bound, smallest rate/bound {margin:.2}"))
    })();
    report("[6b] sticky-edge bound, Monte Carlo", verdict);
}

#[test]
fn mixed_rate_lower_bound() {
    let verdict = (|| {
        let mut parts = Vec::new();
        for n in [8usize, 16, 32] {
            let (epsilon, influence) = if n <= 16 {
                let t = table(&FamilySpec::AntiDictator(1), n);
                (
                    to_f64(distance_to_monotonicity(&t).unwrap().distance),
                    to_f64(influence_report(&t).unwrap().total_influence),
                )
            } else {
                // too large to tabulate: half the points sit on violating edges, one per point
                (0.5, 1.0)
            };
            let f = instantiate(&FamilySpec::AntiDictator(1), n).unwrap();
            let rows =
                mc_estimate(&f, "antidictator(1)", &McOptions::new(1_000_000, ACCEPTANCE_SEED + n as u64, false))
                    .unwrap();
            let rate = rows[0].rate;
            let bound = epsilon * epsilon / (influence * (n as f64).log2().powi(5));
            if rate < bound {
                return Err(format!("n = {n}: rate {rate:.5} < {bound:.2e}"));
            }
            parts.push(format!("n = {n}: {rate:.4} >= {bound:.2e}"));
        }
        Ok(parts.join(", "))
    })();
    report("[7] mixed-mode rate", verdict);
}

#[test]
fn distance_oracle_equivalence() {
    let verdict = (|| {
        let monotone = monotone_functions(4).unwrap();
        if monotone.len() != 168 {
            return Err(format!("{} monotone functions on 4 variables, expected 168", monotone.len()));
        }
        all_tables(4).par_iter().try_for_each(|f| {
            let cut = distance_to_monotonicity(f).unwrap().flips;
            let brute = distance_bruteforce_among(f, &monotone).unwrap();
            if cut == brute {
                Ok(())
            } else {
                Err(format!("{}: min cut {cut} vs brute force {brute}", f.to_bit_string()))
            }
        })?;
        for (s, f) in corpus(8, 8, 14) {
            let r = distance_to_monotonicity(&f).unwrap();
            let n = f.dim();
            if !is_monotone(&r.witness) || r.witness.hamming_distance(&f).unwrap() != r.flips {
                return Err(format!("{s} n = {n}: witness is not monotone at distance {}", r.flips));
            }
            if r.distance != Ratio::new(r.flips, f.len()) || (r.flips == 0) != is_monotone(&f) {
                return Err(format!("{s} n = {n}: inconsistent distance {}", r.distance));
            }
        }
        Ok("65536 functions at n = 4 match brute force; 200 witnesses at n = 8..=14 valid".to_string())
    })();
    report("[8] distance oracle", verdict);
}

#[test]
fn parity_edge_ratio() {
    let verdict = (|| {
        let n = 64;
        let f = instantiate(&FamilySpec::Parity, n).unwrap();
        let sampled = sampled_violating_ratio(&f, &mut rng(9), 1_000_000);
        if sampled.influential != sampled.samples || (sampled.ratio - 0.5).abs() > 0.01 {
            return Err(format!(
                "violating/influential {:.4} over {} influential edges",
                sampled.ratio, sampled.influential
            ));
        }
        let mut r = rng(10);
        let trials = 1_000_000;
        let rejections = (0..trials).filter(|_| edge_sampler(&f, &mut r, 1).unwrap().is_reject()).count();
        let rate = rejections as f64 / trials as f64;
        if (rate - 0.5).abs() > 0.01 {
            return Err(format!("single-trial edge sampler rate {rate:.4}"));
        }
        Ok(format!("n = 64 (influence 64 > 48): ratio {:.4}, edge sampler rate {rate:.4}", sampled.ratio))
    })();
    report("[9] parity edge ratio", verdict);
}

#[test]
fn query_budget() {
    let verdict = (|| {
        let plan: [(usize, u64); 8] = [
            (2, 200_000),
            (3, 200_000),
            (5, 200_000),
            (16, 150_000),
            (100, 100_000),
            (1024, 100_000),
            (1 << 16, 40_000),
            (1 << 20, 10_000),
        ];
        let mut runs = 0;
        for (j, &(n, trials)) in plan.iter().enumerate() {
            let families =
                [FamilySpec::Parity, FamilySpec::AntiDictator(1), FamilySpec::RandomBernoulli { p: 0.5, seed: 11 }];
            for (i, s) in families.iter().enumerate() {
                let f = instantiate(s, n).unwrap();
                let share = trials / 3 + u64::from(i == 0) * (trials % 3);
                let tally =
                    run_trials(&f, None, share, ACCEPTANCE_SEED, 0xB_0000 + 8 * j as u64 + i as u64, StepRule::Simple);
                if tally.max_distinct > query_bound(n) {
                    return Err(format!(
                        "{s} n = {n}: a run used {} distinct queries > {}",
                        tally.max_distinct,
                        query_bound(n)
                    ));
                }
                runs += tally.trials;
            }
        }
        if runs != 1_000_000 {
            return Err(format!("ran {runs} invocations"));
        }

        let mut amplified = Vec::new();
        for (s, n) in [(FamilySpec::Majority, 101usize), (FamilySpec::AntiDictator(1), 1 << 20)] {
            let f = instantiate(&s, n).unwrap();
            let config = AmplifyConfig::new(0.5, 1.0).unwrap().with_repetitions(2_000);
            let out = run_amplified(&f, &config, &mut rng(12)).unwrap();
            let budget = config.repetitions(n) * query_bound(n);
            if out.runs > config.repetitions(n) || out.stats.distinct > budget || out.stats.total > budget {
                return Err(format!(
                    "{s} n = {n}: {} runs, {} queries against budget {budget}",
                    out.runs, out.stats.total
                ));
            }
            if out.stats.total > out.runs * query_bound(n) {
                return Err(format!("{s} n = {n}: {} queries over {} runs", out.stats.total, out.runs));
            }
            amplified.push(format!("{s} n = {n}: {} runs, {} queries", out.runs, out.stats.total));
        }
        Ok(format!("{runs} runs with n up to 2^20 within 3 + ceil(log2 n); amplified {}", amplified.join("; ")))
    })();
    report("[10] query budget", verdict);
}

#[test]
fn exhaustive_agrees_with_monte_carlo() {
    let verdict = {
        let mut r = rng(11);
        let functions: Vec<TruthTable> = (0..100).map(|_| random_table(&mut r, 4)).collect();
        let mut outside = Vec::new();
        let mut worst = 0.0f64;
        let mut cells = 0;
        for (i, f) in functions.iter().enumerate() {
            for wl in WalkLength::all(4) {
                let exact = to_f64(exhaustive_rejection_probability(f, wl.ell).unwrap());
                let tally = run_trials(
                    f,
                    Some(wl.ell),
                    1_000_000,
                    ACCEPTANCE_SEED,
                    0xE_0000 + 8 * i as u64 + wl.k as u64,
                    StepRule::Simple,
                );
                let se = standard_error(exact, tally.trials);
                let gap = (tally.rate() - exact).abs();
                let z = if se > 0.0 {
                    gap / se
                } else if gap > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                };
                worst = worst.max(z);
                if z > 3.0 {
                    outside.push(format!(
                        "{} ell = {}: {:.5} vs {exact:.5} ({z:.2} se)",
                        f.to_bit_string(),
                        wl.ell,
                        tally.rate()
                    ));
                }
                cells += 1;
            }
        }
        let summary =
            format!("{cells} cells at 10^6 trials, largest deviation {worst:.2} se, {} beyond 3 se", outside.len());
        if outside.is_empty() {
            Ok(summary)
        } else {
            Err(format!("{summary}: {}", outside.join("; ")))
        }
    };
    report("[11] exhaustive vs Monte Carlo", verdict);
}
