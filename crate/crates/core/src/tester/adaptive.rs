use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{BooleanFunction, QueryMeter, QueryStats};
use crate::hypercube::{ceil_log2, random_walk_with, sample_point, sample_walk_length, StepRule};
use crate::stream::{stream_id, trial_rng};
use crate::tester::outcome::{Outcome, Verdict, Witness};
use crate::tester::search::bisect;

/// One invocation of the adaptive tester:
///
/// 1. draw `k` uniformly from `{0, ..., ⌈log₂ n⌉}` and set `ℓ = 2^k`;
/// 2. draw a uniform start `x`;
/// 3. walk `ℓ` uniform steps on `H_n` from `x` to `y`;
/// 4. if `f(x) != f(y)`, binary-search the walk for an influential edge and
///    reject if it is a violation;
/// 5. otherwise accept.
///
/// Never rejects a monotone function. Uses at most `2 + ⌈log₂ ℓ⌉` distinct
/// queries.
pub fn run_once<F, R>(f: &F, rng: &mut R) -> Outcome
where
    F: BooleanFunction + ?Sized,
    R: Rng + ?Sized,
{
    let mut meter = QueryMeter::new(f);
    run_once_metered(&mut meter, rng, None, StepRule::Simple)
}

/// Steps 2-5 with the walk length fixed to `ell`.
pub fn run_with_length<F, R>(f: &F, rng: &mut R, ell: usize) -> Outcome
where
    F: BooleanFunction + ?Sized,
    R: Rng + ?Sized,
{
    let mut meter = QueryMeter::new(f);
    run_once_metered(&mut meter, rng, Some(ell), StepRule::Simple)
}

/// The general form: queries go through `meter` (whose per-run cache is
/// reset first), `ell` fixes the walk length when given, and `rule` selects
/// the walk. The returned stats are exactly what this call added to the
/// meter.
pub fn run_once_metered<F, R>(meter: &mut QueryMeter<'_, F>, rng: &mut R, ell: Option<usize>, rule: StepRule) -> Outcome
where
    F: BooleanFunction + ?Sized,
    R: Rng + ?Sized,
{
    let before = meter.stats();
    meter.begin_run();
    let n = meter.dim();
    let ell = ell.unwrap_or_else(|| sample_walk_length(rng, n).ell);
    let x = sample_point(rng, n);
    let path = random_walk_with(rng, &x, ell, rule);

    let fx = meter.query(&x);
    let fy = meter.query(&path.end());
    let mut verdict = Verdict::Accept;
    if fx != fy {
        let (edge, step) = bisect(&path, fx, |p| meter.query(p));
        // both endpoints were probed by the search, so these hit the cache
        if meter.query(edge.lower()) && !meter.query(&edge.upper()) {
            verdict = Verdict::Reject(Witness { edge, walk_length: path.len(), step });
        }
    }
    let after = meter.stats();
    Outcome {
        verdict,
        walk_length: Some(ell),
        stats: QueryStats { total: after.total - before.total, distinct: after.distinct - before.distinct },
        runs: 1,
    }
}

/// Distinct-query bound of a single invocation with walk length `ell`:
/// `2 + ⌈log₂(ℓ + 1)⌉`.
pub fn query_bound_for_length(ell: usize) -> u64 {
    2 + u64::from(ceil_log2(ell + 1))
}

/// Distinct-query bound of a single invocation at dimension `n`, over every
/// walk length it can draw: `2 + ⌈log₂ n⌉ + 1`.
pub fn query_bound(n: usize) -> u64 {
    3 + u64::from(ceil_log2(n))
}

/// Repetition policy for [`run_amplified`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplifyConfig {
    /// Proximity parameter, in `(0, 1)`.
    pub epsilon: f64,
    /// Assumed upper bound on the total influence of the input.
    pub influence_bound: f64,
    pub constant_c: f64,
    pub max_repetitions: u64,
    /// Fixed repetition count, e.g. from [`pilot_repetitions`]; bypasses
    /// the formula but not the cap.
    pub repetitions_override: Option<u64>,
}

impl AmplifyConfig {
    pub const DEFAULT_CONSTANT: f64 = 64.0;
    pub const DEFAULT_MAX_REPETITIONS: u64 = 100_000;

    pub fn new(epsilon: f64, influence_bound: f64) -> Result<AmplifyConfig> {
        let config = AmplifyConfig {
            epsilon,
            influence_bound,
            constant_c: Self::DEFAULT_CONSTANT,
            max_repetitions: Self::DEFAULT_MAX_REPETITIONS,
            repetitions_override: None,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_repetitions(mut self, repetitions: u64) -> AmplifyConfig {
        self.repetitions_override = Some(repetitions);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!("epsilon {} outside (0, 1)", self.epsilon));
        }
        if !(self.influence_bound >= 0.0 && self.influence_bound.is_finite()) {
            return bad(format!("influence bound {} must be finite and non-negative", self.influence_bound));
        }
        if !(self.constant_c > 0.0 && self.constant_c.is_finite()) {
            return bad(format!("constant {} must be positive", self.constant_c));
        }
        if self.max_repetitions == 0 || self.repetitions_override == Some(0) {
            return bad("repetition counts must be at least 1".into());
        }
        Ok(())
    }

    /// `R = ⌈c · I · (log₂ max(n, 2))^9 / ε^4⌉`, at least 1 and at most
    /// `max_repetitions`.
    pub fn repetitions(&self, n: usize) -> u64 {
        let raw = match self.repetitions_override {
            Some(r) => r as f64,
            None => {
                let log_n = (n.max(2) as f64).log2();
                (self.constant_c * self.influence_bound * log_n.powi(9) / self.epsilon.powi(4)).ceil()
            }
        };
        (raw.max(1.0) as u64).min(self.max_repetitions)
    }
}

/// Repeats [`run_once`] up to `R` times, stopping at the first rejection.
pub fn run_amplified<F, R>(f: &F, config: &AmplifyConfig, rng: &mut R) -> Result<Outcome>
where
    F: BooleanFunction + ?Sized,
    R: Rng + ?Sized,
{
    config.validate()?;
    let repetitions = config.repetitions(f.dim());
    let mut meter = QueryMeter::new(f);
    let mut last = None;
    for run in 1..=repetitions {
        let out = run_once_metered(&mut meter, rng, None, StepRule::Simple);
        if out.is_reject() {
            return Ok(Outcome { stats: meter.stats(), runs: run, ..out });
        }
        last = out.walk_length;
    }
    Ok(Outcome { verdict: Verdict::Accept, walk_length: last, stats: meter.stats(), runs: repetitions })
}

/// Calibrates the repetition count from a pilot run on a reference function:
/// estimates the single-run rejection rate `p` from `trials` runs and returns
/// `⌈multiplier / p⌉`. Fails when the pilot sees no rejection.
pub fn pilot_repetitions<F>(reference: &F, trials: u64, seed: u64, multiplier: f64) -> Result<u64>
where
    F: BooleanFunction + ?Sized,
{
    if trials == 0 || multiplier.is_nan() || multiplier <= 0.0 {
        return Err(Error::InvalidParameter("pilot needs trials >= 1 and a positive multiplier".into()));
    }
    let rejections: u64 = (0..trials)
        .into_par_iter()
        .map(|i| u64::from(run_once(reference, &mut trial_rng(seed, stream_id(0xA11, i))).is_reject()))
        .sum();
    if rejections == 0 {
        return Err(Error::Precondition(format!("pilot observed no rejection in {trials} runs")));
    }
    let rate = rejections as f64 / trials as f64;
    Ok((multiplier / rate).ceil() as u64)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::function::{instantiate, FamilySpec};
    use crate::tester::is_violation;

    fn family(s: &str, n: usize) -> crate::function::FamilyFunction {
        instantiate(&s.parse::<FamilySpec>().unwrap(), n).unwrap()
    }

    #[test]
    fn monotone_inputs_always_accept() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (s, n) in [("dictator(3)", 9), ("majority", 11), ("threshold(4)", 8), ("monotone(2,5)", 10)] {
            let f = family(s, n);
            for _ in 0..2000 {
                assert!(!run_once(&f, &mut rng).is_reject());
            }
        }
    }

    #[test]
    fn rejections_carry_verified_witnesses() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = family("bernoulli(0.3,9)", 10);
        let mut seen = 0;
        for _ in 0..5000 {
            let out = run_once(&f, &mut rng);
            assert!(out.stats.distinct <= query_bound(10));
            assert!(out.stats.distinct <= query_bound_for_length(out.walk_length.unwrap()));
            if let Some(w) = out.witness() {
                seen += 1;
                assert!(is_violation(&f, &w.edge));
                assert!(w.step >= 1 && w.step <= w.walk_length);
            }
        }
        assert!(seen > 0);
    }

    #[test]
    fn antidictator_rejection_rate() {
        // exact rate is 1/2 at both ell = 1 and ell = 2
        let f = family("antidictator(1)", 2);
        let trials = 200_000;
        let rejected = (0..trials).filter(|&i| run_once(&f, &mut trial_rng(3, i)).is_reject()).count();
        assert!((rejected as f64 / trials as f64 - 0.5).abs() < 0.005);
    }

    #[test]
    fn repetition_formula() {
        let c = AmplifyConfig::new(0.5, 1.0).unwrap();
        // 64 * 3^9 * 16 exceeds the cap
        assert_eq!(c.repetitions(8), AmplifyConfig::DEFAULT_MAX_REPETITIONS);
        let c = AmplifyConfig { constant_c: 1e-6, ..c };
        assert_eq!(c.repetitions(8), (1e-6 * 19683.0 * 16.0f64).ceil() as u64);
        assert_eq!(c.clone().with_repetitions(7).repetitions(8), 7);
        let zero = AmplifyConfig::new(0.5, 0.0).unwrap();
        assert_eq!(zero.repetitions(100), 1);
        assert!(AmplifyConfig::new(1.0, 1.0).is_err());
        assert!(AmplifyConfig::new(0.5, -1.0).is_err());
    }

    #[test]
    fn amplified_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let monotone = family("majority", 9);
        let config = AmplifyConfig::new(0.25, 3.0).unwrap().with_repetitions(500);
        let out = run_amplified(&monotone, &config, &mut rng).unwrap();
        assert_eq!((out.is_reject(), out.runs), (false, 500));
        assert!(out.stats.distinct <= 500 * query_bound(9));

        let far = family("antidictator(1)", 8);
        let out = run_amplified(&far, &config, &mut rng).unwrap();
        assert!(out.is_reject() && out.runs < 500);
    }

    #[test]
    fn pilot_calibration() {
        let far = family("antidictator(1)", 8);
        let r = pilot_repetitions(&far, 20_000, 5, 5.0).unwrap();
        assert!((5..100).contains(&r), "{r}");
        assert!(pilot_repetitions(&family("dictator(1)", 8), 1000, 5, 5.0).is_err());
    }
}
