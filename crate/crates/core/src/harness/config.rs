use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::function::{instantiate, to_truth_table, FamilySpec};
use crate::harness::estimate::{attach_oracles, mc_estimate, write_csv, EstimateRow, McOptions, MAX_ORACLE_DIM};

/// A sweep of one family over several dimensions.
///
/// File form, one `key = value` per line, `#` starts a comment:
///
/// ```text
/// family = antidictator(1)
/// n_values = 4,8,16
/// trials = 100000
/// seed = 7
/// stratify_by_ell = true
/// output = sweep.csv
/// ```
///
/// `stratify_by_ell` defaults to `false`; every other key is required.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub family: FamilySpec,
    pub n_values: Vec<usize>,
    pub trials: u64,
    pub seed: u64,
    pub stratify_by_ell: bool,
    pub output: PathBuf,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.n_values.is_empty() {
            return Err(Error::Config("n_values must not be empty".into()));
        }
        for &n in &self.n_values {
            instantiate(&self.family, n)?;
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
        fs::read_to_string(path)?.parse()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        Ok(fs::write(path, self.to_string())?)
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ns: Vec<String> = self.n_values.iter().map(ToString::to_string).collect();
        writeln!(f, "family = {}", self.family)?;
        writeln!(f, "n_values = {}", ns.join(","))?;
        writeln!(f, "trials = {}", self.trials)?;
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "stratify_by_ell = {}", self.stratify_by_ell)?;
        writeln!(f, "output = {}", self.output.display())
    }
}

impl FromStr for ExperimentConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<ExperimentConfig> {
        let mut family = None;
        let mut n_values = None;
        let mut trials = None;
        let mut seed = None;
        let mut stratify = None;
        let mut output = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |what: String| Error::Config(format!("line {}: {what}", lineno + 1));
            let (key, value) =
                line.split_once('=').ok_or_else(|| bad(format!("expected key = value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let num = |v: &str| v.parse::<u64>().map_err(|_| bad(format!("{key}: bad integer {v:?}")));
            let duplicate = || bad(format!("duplicate key {key}"));
            match key {
                "family" => {
                    if family.replace(value.parse::<FamilySpec>()?).is_some() {
                        return Err(duplicate());
                    }
                }
                "n_values" => {
                    let ns = value.split(',').map(|v| num(v.trim()).map(|n| n as usize)).collect::<Result<Vec<_>>>()?;
                    if n_values.replace(ns).is_some() {
                        return Err(duplicate());
                    }
                }
                "trials" => {
                    if trials.replace(num(value)?).is_some() {
                        return Err(duplicate());
                    }
                }
                "seed" => {
                    if seed.replace(num(value)?).is_some() {
                        return Err(duplicate());
                    }
                }
                "stratify_by_ell" => {
                    let b =
                        value.parse::<bool>().map_err(|_| bad(format!("stratify_by_ell: bad boolean {value:?}")))?;
                    if stratify.replace(b).is_some() {
                        return Err(duplicate());
                    }
                }
                "output" => {
                    if output.replace(PathBuf::from(value)).is_some() {
                        return Err(duplicate());
                    }
                }
                _ => return Err(bad(format!("unknown key {key:?}"))),
            }
        }
        let missing = |key: &str| Error::Config(format!("missing key {key}"));
        let config = ExperimentConfig {
            family: family.ok_or_else(|| missing("family"))?,
            n_values: n_values.ok_or_else(|| missing("n_values"))?,
            trials: trials.ok_or_else(|| missing("trials"))?,
            seed: seed.ok_or_else(|| missing("seed"))?,
            stratify_by_ell: stratify.unwrap_or(false),
            output: output.ok_or_else(|| missing("output"))?,
        };
        config.validate()?;
        Ok(config)
    }
}

/// Runs the sweep and writes its CSV to `config.output`. One row per
/// `(family, n, ℓ)` cell (one `mixed` row per `n` when not stratified),
/// with oracle columns filled for `n <= 16`.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<EstimateRow>> {
    config.validate()?;
    let label = config.family.to_string();
    let opts = McOptions::new(config.trials, config.seed, config.stratify_by_ell);
    let mut rows = Vec::new();
    for &n in &config.n_values {
        let f = instantiate(&config.family, n)?;
        let mut cell = mc_estimate(&f, &label, &opts)?;
        if n <= MAX_ORACLE_DIM {
            attach_oracles(&to_truth_table(&f)?, &mut cell)?;
        }
        rows.extend(cell);
    }
    write_csv(fs::File::create(&config.output)?, &rows)?;
    Ok(rows)
}
