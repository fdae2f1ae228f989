//! Reproduction harness: lower-bound constructions, regime map and sweeps.
//!
//! Every experiment returns a CSV table whose first line records the full
//! parameter set and library version, plus an optional exponent fit and the
//! pass/fail checks it is responsible for.

mod fit;
mod fpq_lower;
mod lpq_lower;
mod regime;
mod sweeps;

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::greedy::{GreedyConfig, TieBreak};

pub use fit::{fit_linear, fit_loglog, FitResult};
pub use fpq_lower::{exp_fpq_lower, fpq_lower_point, FpqLowerPoint, B_BIAS};
pub use lpq_lower::exp_lpq_lower;
pub use regime::{analytic_winner, exp_tga_vs_wcga, two_block_steps, worst_count, Algorithm, Block, TwoBlock, Winner};
pub use sweeps::{exp_iteration_decay, exp_lebesgue_sweep, sparse_plus_noise, NOISE_SUPPORT};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentId {
    LpqLower,
    FpqLower,
    TgaVsWcga,
    Lebesgue,
    IterationDecay,
}

impl ExperimentId {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentId::LpqLower => "lpq-lower",
            ExperimentId::FpqLower => "fpq-lower",
            ExperimentId::TgaVsWcga => "tga-vs-wcga",
            ExperimentId::Lebesgue => "lebesgue",
            ExperimentId::IterationDecay => "iteration-decay",
        }
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            ExperimentId::LpqLower,
            ExperimentId::FpqLower,
            ExperimentId::TgaVsWcga,
            ExperimentId::Lebesgue,
            ExperimentId::IterationDecay,
        ]
        .into_iter()
        .find(|id| id.as_str() == s)
        .ok_or_else(|| Error::Parse(format!("unknown experiment {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    Lpq,
    Fpq,
}

impl SpaceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SpaceKind::Lpq => "lpq",
            SpaceKind::Fpq => "fpq",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub id: ExperimentId,
    pub space: SpaceKind,
    pub p: f64,
    pub q: f64,
    pub d: usize,
    pub n_min: u32,
    pub n_max: u32,
    /// Reciprocal exponents `1/p`, `1/q` for the regime map.
    pub grid: Vec<f64>,
    /// Lebesgue constant `C`.
    pub c: f64,
    /// Relative noise level for the Lebesgue sweep.
    pub epsilon: f64,
    pub samples: usize,
    pub seed: u64,
    pub config: GreedyConfig,
}

impl ExperimentSpec {
    /// Defaults reproducing the reference runs.
    pub fn new(id: ExperimentId) -> Self {
        let base = ExperimentSpec {
            id,
            space: SpaceKind::Lpq,
            p: 2.0,
            q: 2.0,
            d: 1,
            n_min: 1,
            n_max: 1,
            grid: vec![0.2, 0.35, 0.5, 0.65, 0.8],
            c: 1.0,
            epsilon: 0.01,
            samples: 20,
            seed: 0,
            config: GreedyConfig::default(),
        };
        match id {
            ExperimentId::LpqLower => ExperimentSpec { p: 4.0, q: 4.0 / 3.0, n_min: 4, n_max: 24, ..base },
            ExperimentId::FpqLower => {
                ExperimentSpec { space: SpaceKind::Fpq, p: 1.5, q: 2.0, d: 2, n_min: 6, n_max: 20, ..base }
            }
            ExperimentId::TgaVsWcga => ExperimentSpec { n_min: 32, n_max: 32, ..base },
            ExperimentId::Lebesgue => ExperimentSpec { p: 3.0, q: 1.5, n_min: 2, n_max: 12, ..base },
            ExperimentId::IterationDecay => ExperimentSpec { n_min: 1, n_max: 12, ..base },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        let bad = |m: &str| Err(Error::InvalidParams(m.to_string()));
        if self.n_min == 0 || self.n_min > self.n_max {
            return bad("need 1 <= n_min <= n_max");
        }
        if !(self.c >= 1.0) {
            return bad("C must be at least 1");
        }
        if self.samples == 0 {
            return bad("samples must be positive");
        }
        if self.grid.is_empty() || self.grid.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
            return bad("grid entries must lie in (0, 1)");
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return bad("epsilon must be finite and nonnegative");
        }
        Ok(())
    }

    fn metadata(&self) -> Vec<(String, String)> {
        let tie = match self.config.tie_break {
            TieBreak::Lexicographic => "lexicographic",
            TieBreak::PreferBlockA => "prefer_block_A",
            TieBreak::PreferBlockB => "prefer_block_B",
        };
        let grid: Vec<String> = self.grid.iter().map(|g| g.to_string()).collect();
        [
            ("experiment", self.id.as_str().to_string()),
            ("space", self.space.as_str().to_string()),
            ("p", self.p.to_string()),
            ("q", self.q.to_string()),
            ("d", self.d.to_string()),
            ("n_min", self.n_min.to_string()),
            ("n_max", self.n_max.to_string()),
            ("grid", grid.join(";")),
            ("C", self.c.to_string()),
            ("epsilon", self.epsilon.to_string()),
            ("samples", self.samples.to_string()),
            ("seed", self.seed.to_string()),
            ("tau", self.config.tau.to_string()),
            ("tol", self.config.tol.to_string()),
            ("max_steps", self.config.max_steps.to_string()),
            ("tie_break", tie.to_string()),
            ("version", crate::VERSION.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    fn ns(&self) -> impl Iterator<Item = u32> {
        self.n_min..=self.n_max
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub metadata: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    fn new(spec: &ExperimentSpec, header: &[&str]) -> Self {
        CsvTable { metadata: spec.metadata(), header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push_meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.push((key.to_string(), value.to_string()));
    }

    pub fn render(&self) -> String {
        let mut out = String::from("#");
        for (k, v) in &self.metadata {
            write!(out, " {k}={v}").expect("write to string");
        }
        out.push('\n');
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Values of one column, parsed as floats.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        self.rows.iter().map(|r| r[j].parse().ok()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub table: CsvTable,
    pub fit: Option<FitResult>,
    pub checks: Vec<Check>,
}

impl ExperimentOutput {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    spec.validate()?;
    match spec.id {
        ExperimentId::LpqLower => exp_lpq_lower(spec),
        ExperimentId::FpqLower => exp_fpq_lower(spec),
        ExperimentId::TgaVsWcga => exp_tga_vs_wcga(spec),
        ExperimentId::Lebesgue => exp_lebesgue_sweep(spec, None),
        ExperimentId::IterationDecay => exp_iteration_decay(spec),
    }
}
