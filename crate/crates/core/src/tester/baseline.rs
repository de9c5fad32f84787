use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::{BooleanFunction, QueryMeter};
use crate::hypercube::{sample_edge, Edge};
use crate::stats::{wilson_interval, Z95};
use crate::tester::adaptive::{run_amplified, AmplifyConfig};
use crate::tester::outcome::{Outcome, Verdict, Witness};

/// `f(lower) = 1` and `f(upper) = 0`.
pub fn is_violation<F: BooleanFunction + ?Sized>(f: &F, e: &Edge) -> bool {
    f.eval(e.lower()) && !f.eval(&e.upper())
}

/// Samples `trials` uniform edges, two queries each, and rejects on the
/// first violating one. Effective when violating edges are a constant
/// fraction of all edges.
pub fn edge_sampler<F, R>(f: &F, rng: &mut R, trials: u64) -> Result<Outcome>
where
    F: BooleanFunction + ?Sized,
    R: Rng + ?Sized,
{
    if trials == 0 {
        return Err(Error::InvalidParameter("edge sampler needs at least one trial".into()));
    }
    let mut meter = QueryMeter::new(f);
    for run in 1..=trials {
        meter.begin_run();
        let edge = sample_edge(rng, f.dim());
        if meter.query(edge.lower()) && !meter.query(&edge.upper()) {
            let verdict = Verdict::Reject(Witness { edge, walk_length: 1, step: 1 });
            return Ok(Outcome { verdict, walk_length: None, stats: meter.stats(), runs: run });
        }
    }
    Ok(Outcome { verdict: Verdict::Accept, walk_length: None, stats: meter.stats(), runs: trials })
}

/// Estimate of `I(f) = n · Pr[uniform edge is influential]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InfluenceEstimate {
    pub samples: u64,
    pub influential: u64,
    pub estimate: f64,
    /// 95% Wilson interval, scaled by `n`.
    pub low: f64,
    pub high: f64,
}

pub fn estimate_influence<F, R>(f: &F, rng: &mut R, samples: u64) -> Result<InfluenceEstimate>
where
    F: BooleanFunction + ?Sized,
    R: Rng + ?Sized,
{
    if samples == 0 {
        return Err(Error::InvalidParameter("influence estimate needs at least one sample".into()));
    }
    let n = f.dim() as f64;
    let influential = (0..samples)
        .filter(|_| {
            let e = sample_edge(rng, f.dim());
            f.eval(e.lower()) != f.eval(&e.upper())
        })
        .count() as u64;
    let (low, high) = wilson_interval(influential, samples, Z95);
    Ok(InfluenceEstimate {
        samples,
        influential,
        estimate: n * influential as f64 / samples as f64,
        low: n * low,
        high: n * high,
    })
}

/// Which branch the dispatching tester took.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// `Î <= threshold · √n`: amplified random-walk tester.
    LowInfluence,
    /// `Î > threshold · √n`: edge sampler.
    HighInfluence,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DispatchConfig {
    pub amplify: AmplifyConfig,
    /// Edge samples for the influence estimate; `None` means `max(1000, 20 n)`.
    pub estimate_samples: Option<u64>,
    /// High-influence regime starts above `threshold_factor · √n`.
    pub threshold_factor: f64,
    /// Edge-sampler trials are `⌈edge_trials_factor · n / Î⌉`.
    pub edge_trials_factor: f64,
}

impl DispatchConfig {
    pub fn new(amplify: AmplifyConfig) -> DispatchConfig {
        DispatchConfig { amplify, estimate_samples: None, threshold_factor: 6.0, edge_trials_factor: 8.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DispatchOutcome {
    pub regime: Regime,
    pub estimate: InfluenceEstimate,
    pub outcome: Outcome,
}

/// Full tester: estimates the influence, then runs the edge sampler in the
/// high-influence regime and the amplified walk tester otherwise.
pub fn run_dispatched<F, R>(f: &F, config: &DispatchConfig, rng: &mut R) -> Result<DispatchOutcome>
where
    F: BooleanFunction + ?Sized,
    R: Rng + ?Sized,
{
    let n = f.dim();
    let samples = config.estimate_samples.unwrap_or_else(|| (20 * n as u64).max(1000));
    let estimate = estimate_influence(f, rng, samples)?;
    let threshold = config.threshold_factor * (n as f64).sqrt();
    if estimate.estimate > threshold {
        let trials = ((config.edge_trials_factor * n as f64 / estimate.estimate).ceil() as u64)
            .clamp(1, config.amplify.max_repetitions);
        let outcome = edge_sampler(f, rng, trials)?;
        Ok(DispatchOutcome { regime: Regime::HighInfluence, estimate, outcome })
    } else {
        let outcome = run_amplified(f, &config.amplify, rng)?;
        Ok(DispatchOutcome { regime: Regime::LowInfluence, estimate, outcome })
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::function::{instantiate, FamilySpec, TruthTable};
    use crate::hypercube::Point;

    fn family(s: &str, n: usize) -> crate::function::FamilyFunction {
        instantiate(&s.parse::<FamilySpec>().unwrap(), n).unwrap()
    }

    #[test]
    fn violation_examples() {
        let anti = family("antidictator(1)", 3);
        let dict = family("dictator(1)", 3);
        for idx in 0..8u64 {
            let x = Point::from_index(3, idx).unwrap();
            if idx & 1 == 0 {
                assert!(is_violation(&anti, &Edge::new(x.clone(), 1).unwrap()));
            }
            for c in 1..=3 {
                if let Ok(e) = Edge::new(x.clone(), c) {
                    assert!(!is_violation(&dict, &e));
                }
            }
        }
        let parity: TruthTable = "n=2\n0110\n".parse().unwrap();
        assert!(is_violation(&parity, &Edge::new("01".parse().unwrap(), 1).unwrap()));
    }

    #[test]
    fn edge_sampler_behaviour() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let out = edge_sampler(&family("majority", 7), &mut rng, 500).unwrap();
        // the upper endpoint is only queried when f(lower) = 1
        assert_eq!((out.is_reject(), out.runs), (false, 500));
        assert!((500..=1000).contains(&out.stats.total));
        let out = edge_sampler(&family("parity", 16), &mut rng, 64).unwrap();
        assert!(out.is_reject());
        assert!(is_violation(&family("parity", 16), &out.witness().unwrap().edge));
        assert!(edge_sampler(&family("parity", 4), &mut rng, 0).is_err());
    }

    #[test]
    fn influence_estimates() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let flat = estimate_influence(&TruthTable::constant(5, true).unwrap(), &mut rng, 1000).unwrap();
        assert_eq!(flat.estimate, 0.0);
        let par = estimate_influence(&family("parity", 10), &mut rng, 100_000).unwrap();
        assert_eq!(par.estimate, 10.0);
        let dict = estimate_influence(&family("dictator(1)", 10), &mut rng, 100_000).unwrap();
        assert!((dict.estimate - 1.0).abs() < 0.1);
        assert!(dict.low <= dict.estimate && dict.estimate <= dict.high);
    }

    #[test]
    fn dispatch_regimes() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let config = DispatchConfig::new(AmplifyConfig::new(0.5, 1.0).unwrap());
        let high = run_dispatched(&family("parity", 64), &config, &mut rng).unwrap();
        assert_eq!(high.regime, Regime::HighInfluence);
        assert!(high.outcome.is_reject());
        let low = run_dispatched(&family("antidictator(1)", 64), &config, &mut rng).unwrap();
        assert_eq!(low.regime, Regime::LowInfluence);
        assert!(low.outcome.is_reject());
    }
}
