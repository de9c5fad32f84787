use std::io;

use serde::Serialize;

use crate::error::Result;
use crate::function::TruthTable;
use crate::hypercube::WalkLength;
use crate::oracles::{
    distance_to_monotonicity, influence_report, sticky_set, survival_table, MAX_DISTANCE_DIM, MAX_SURVIVAL_DIM,
};

/// `|F_ℓ|` at one walk length.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FEllSize {
    pub ell: usize,
    pub size: usize,
    /// Vertices with survival probability within the boundary band of 1/2.
    pub boundary: usize,
}

/// Oracle summary of one truth table. Rationals are written as `a/b`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub n: usize,
    pub family: String,
    pub influential_count: u64,
    pub violating_count: u64,
    pub total_influence: String,
    /// `None` above the min-cut oracle's dimension limit.
    pub distance: Option<String>,
    pub flips: Option<u64>,
    /// Empty above the survival oracle's dimension limit.
    pub f_ell: Vec<FEllSize>,
}

/// Runs every oracle that fits the dimension of `f`.
pub fn analyze(f: &TruthTable, family: &str) -> Result<AnalysisReport> {
    let n = f.dim();
    let inf = influence_report(f)?;
    let dist = if n <= MAX_DISTANCE_DIM { Some(distance_to_monotonicity(f)?) } else { None };
    let mut f_ell = Vec::new();
    if n <= MAX_SURVIVAL_DIM {
        let lengths: Vec<WalkLength> = WalkLength::all(n).collect();
        let table = survival_table(f, lengths.last().map_or(1, |w| w.ell))?;
        for wl in &lengths {
            let set = sticky_set(f, &table, wl.ell)?;
            f_ell.push(FEllSize { ell: wl.ell, size: set.len(), boundary: set.boundary.len() });
        }
    }
    Ok(AnalysisReport {
        n,
        family: family.to_string(),
        influential_count: inf.influential_count,
        violating_count: inf.violating_count,
        total_influence: inf.total_influence.to_string(),
        distance: dist.as_ref().map(|d| d.distance.to_string()),
        flips: dist.map(|d| d.flips),
        f_ell,
    })
}

#[derive(Serialize)]
struct FlatReport<'a> {
    n: usize,
    family: &'a str,
    influential_count: u64,
    violating_count: u64,
    total_influence: &'a str,
    distance: Option<&'a str>,
    flips: Option<u64>,
    /// `ell:size` pairs separated by `;`.
    f_ell: String,
}

impl AnalysisReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Header plus one row; `f_ell` is packed as `1:2;2:0;...`.
    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<()> {
        let f_ell = self.f_ell.iter().map(|c| format!("{}:{}", c.ell, c.size)).collect::<Vec<_>>().join(";");
        let mut w = csv::Writer::from_writer(out);
        w.serialize(FlatReport {
            n: self.n,
            family: &self.family,
            influential_count: self.influential_count,
            violating_count: self.violating_count,
            total_influence: &self.total_influence,
            distance: self.distance.as_deref(),
            flips: self.flips,
            f_ell,
        })?;
        w.flush()?;
        Ok(())
    }
}
