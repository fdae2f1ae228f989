//! Frozen constants for the appendix inequalities.
//!
//! The inequalities hold with unspecified constants. Each constant is fitted
//! as the largest observed ratio at `c = 1` on seed 0, stored in a fixture,
//! and later runs assert against it times a headroom factor.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_d1_log, check_democracy, check_disjoint_q_ineq, check_lorentz_sandwich, PropertyReport, SamplerSpec};
use crate::error::{Error, Result};
use crate::fpq::FpqParams;

pub const APPENDIX_GRID: [f64; 5] = [1.25, 1.5, 2.0, 3.0, 4.0];

const FROZEN: &str = include_str!("../../tests/fixtures/calibration.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AppendixCheck {
    DisjointQ,
    Lorentz,
    D1Log,
    Democracy,
}

impl AppendixCheck {
    pub fn has_constant(self) -> bool {
        self != AppendixCheck::DisjointQ
    }

    pub fn spec(self, d: usize) -> SamplerSpec {
        match (self, d) {
            (AppendixCheck::DisjointQ, 1) => SamplerSpec { max_support: 24, max_row: 8, max_level: 8 },
            (AppendixCheck::DisjointQ, _) => SamplerSpec { max_support: 24, max_row: 8, max_level: 5 },
            (AppendixCheck::Lorentz, _) => SamplerSpec { max_support: 256, max_row: 8, max_level: 10 },
            (AppendixCheck::D1Log, _) => SamplerSpec { max_support: 4096, max_row: 8, max_level: 12 },
            (AppendixCheck::Democracy, 1) => SamplerSpec { max_support: 512, max_row: 8, max_level: 10 },
            (AppendixCheck::Democracy, _) => SamplerSpec { max_support: 512, max_row: 8, max_level: 6 },
        }
    }

    fn applies(self, p: f64, q: f64) -> bool {
        match self {
            AppendixCheck::DisjointQ | AppendixCheck::Lorentz => q <= p,
            AppendixCheck::D1Log => q < p,
            AppendixCheck::Democracy => true,
        }
    }

    fn dims(self) -> &'static [usize] {
        match self {
            AppendixCheck::DisjointQ | AppendixCheck::Democracy => &[1, 2],
            AppendixCheck::Lorentz | AppendixCheck::D1Log => &[1],
        }
    }

    fn run(self, params: FpqParams, samples: usize, seed: u64, c: f64) -> Result<PropertyReport> {
        let spec = self.spec(params.d());
        match self {
            AppendixCheck::DisjointQ => check_disjoint_q_ineq(params, &spec, samples, seed),
            AppendixCheck::Lorentz => check_lorentz_sandwich(params, &spec, samples, seed, c),
            AppendixCheck::D1Log => check_d1_log(params, &spec, samples, seed, c),
            AppendixCheck::Democracy => check_democracy(params, &spec, samples, seed, c),
        }
    }
}

/// All `(check, p, q, d)` cases on [`APPENDIX_GRID`].
pub fn appendix_cases() -> Vec<(AppendixCheck, f64, f64, usize)> {
    let checks = [AppendixCheck::DisjointQ, AppendixCheck::Lorentz, AppendixCheck::D1Log, AppendixCheck::Democracy];
    let mut out = Vec::new();
    for check in checks {
        for &d in check.dims() {
            for p in APPENDIX_GRID {
                for q in APPENDIX_GRID {
                    if check.applies(p, q) {
                        out.push((check, p, q, d));
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationEntry {
    pub check: AppendixCheck,
    pub p: f64,
    pub q: f64,
    pub d: usize,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub seed: u64,
    pub samples: usize,
    pub headroom: f64,
    pub entries: Vec<CalibrationEntry>,
}

impl Calibration {
    /// The constants shipped with the crate.
    pub fn frozen() -> Result<Self> {
        Ok(serde_json::from_str(FROZEN)?)
    }

    pub fn constant(&self, check: AppendixCheck, p: f64, q: f64, d: usize) -> Option<f64> {
        self.entries.iter().find(|e| e.check == check && e.p == p && e.q == q && e.d == d).map(|e| e.c)
    }
}

/// Fits every appendix constant on `samples` draws from `seed`.
pub fn calibrate(seed: u64, samples: usize) -> Result<Calibration> {
    let entries = appendix_cases()
        .into_par_iter()
        .filter(|(check, ..)| check.has_constant())
        .map(|(check, p, q, d)| {
            let report = check.run(FpqParams::new(p, q, d)?, samples, seed, 1.0)?;
            let c = report.extra["fitted_c"].as_f64().expect("constant checks record fitted_c");
            Ok(CalibrationEntry { check, p, q, d, c })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Calibration { seed, samples, headroom: 1.05, entries })
}

/// Runs every appendix check with constants from `calibration` times its
/// headroom.
pub fn appendix_suite(calibration: &Calibration, seed: u64, samples: usize) -> Result<Vec<PropertyReport>> {
    appendix_cases()
        .into_par_iter()
        .map(|(check, p, q, d)| {
            let c = if check.has_constant() {
                let frozen = calibration.constant(check, p, q, d).ok_or_else(|| {
                    Error::InvalidParams(format!("no calibrated constant for {check:?} at p={p}, q={q}, d={d}"))
                })?;
                frozen * calibration.headroom
            } else {
                1.0
            };
            check.run(FpqParams::new(p, q, d)?, samples, seed, c)
        })
        .collect()
}
