use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::{fit_loglog, Check, CsvTable, ExperimentOutput, ExperimentSpec, FitResult, SpaceKind};
use crate::error::{Error, Result};
use crate::fpq::FpqParams;
use crate::greedy::{recovery_steps, wcga_run, SIGMA_BRUTEFORCE_LIMIT};
use crate::lpq::LpqParams;
use crate::properties::{log_uniform_coeff, stream_rng, Sampler, SamplerSpec, SupportKind};
use crate::space::SpaceVector;

/// Size of the noise support in the Lebesgue sweep.
pub const NOISE_SUPPORT: usize = 4;

/// `n` log-uniform coefficients plus `noise` Gaussian ones on a disjoint
/// support, the latter scaled to `epsilon` times the norm of the sparse part.
pub fn sparse_plus_noise<S: Sampler>(
    sampler: &S,
    n: usize,
    noise: usize,
    epsilon: f64,
    rng: &mut ChaCha8Rng,
) -> Result<S::Vector> {
    let total = n + if epsilon > 0.0 { noise } else { 0 };
    let spec = SamplerSpec { max_support: total, max_row: 8, max_level: 4 };
    let mut pool = BTreeSet::new();
    for _ in 0..100 {
        if pool.len() >= total {
            break;
        }
        pool.extend(sampler.support(SupportKind::Scatter, &spec, rng));
    }
    if pool.len() < total {
        return Err(Error::InvalidParams(format!("could not draw {total} distinct indices")));
    }
    let mut pool: Vec<_> = pool.into_iter().collect();
    pool.shuffle(rng);
    pool.truncate(total);
    let noise_idx = pool.split_off(n);
    let sparse: BTreeMap<_, f64> = pool.into_iter().map(|i| (i, log_uniform_coeff(rng))).collect();
    let sparse = sampler.build(sparse)?;
    if noise_idx.is_empty() {
        return Ok(sparse);
    }
    let raw: BTreeMap<_, f64> = noise_idx.into_iter().map(|i| (i, StandardNormal.sample(rng))).collect();
    let raw = sampler.build(raw)?;
    let scale = epsilon * sparse.norm()? / raw.norm()?;
    let mut entries = sparse.entries().clone();
    entries.extend(raw.entries().iter().map(|(i, v)| (i.clone(), v * scale)));
    sampler.build(entries)
}

struct SweepRow {
    n: u32,
    trial: usize,
    steps: Option<usize>,
    sigma: f64,
}

fn lebesgue_rows<S: Sampler>(sampler: &S, spec: &ExperimentSpec) -> Result<Vec<SweepRow>> {
    let jobs: Vec<(usize, u32, usize)> = spec
        .ns()
        .flat_map(|n| (0..spec.samples).map(move |t| (n, t)))
        .enumerate()
        .map(|(k, (n, t))| (k, n, t))
        .collect();
    jobs.into_par_iter()
        .map(|(k, n, trial)| {
            let mut rng = stream_rng(spec.seed, k as u64);
            let f = sparse_plus_noise(sampler, n as usize, NOISE_SUPPORT, spec.epsilon, &mut rng)?;
            let meas = recovery_steps(&f, n as usize, spec.c, &spec.config, None, None)?;
            Ok(SweepRow { n, trial, steps: meas.steps_needed, sigma: meas.sigma_n })
        })
        .collect()
}

/// Largest `steps / N^β` over the rows.
fn fitted_constant(rows: &[SweepRow], beta: f64) -> f64 {
    rows.iter()
        .filter_map(|r| r.steps.map(|s| s as f64 / f64::from(r.n).powf(beta)))
        .fold(0.0, f64::max)
}

/// Steps to reach `C σ_N` on sparse-plus-noise vectors, against
/// `⌈c_fit N^β⌉`. Without a supplied `c_fit` the constant is fitted on seed 0
/// of the same sweep.
pub fn exp_lebesgue_sweep(spec: &ExperimentSpec, c_fit: Option<f64>) -> Result<ExperimentOutput> {
    spec.validate()?;
    if spec.n_max as usize + NOISE_SUPPORT > SIGMA_BRUTEFORCE_LIMIT {
        return Err(Error::InvalidParams(format!(
            "N + {NOISE_SUPPORT} must stay within the brute-force limit {SIGMA_BRUTEFORCE_LIMIT}"
        )));
    }
    let beta = LpqParams::new(spec.p, spec.q)?.beta();
    let rows = match spec.space {
        SpaceKind::Lpq => lebesgue_rows(&LpqParams::new(spec.p, spec.q)?, spec),
        SpaceKind::Fpq => lebesgue_rows(&FpqParams::new(spec.p, spec.q, spec.d)?, spec),
    }?;
    let c_fit = match c_fit {
        Some(c) => c,
        None if spec.seed == 0 => fitted_constant(&rows, beta),
        None => {
            let base = ExperimentSpec { seed: 0, ..spec.clone() };
            let calib = match spec.space {
                SpaceKind::Lpq => lebesgue_rows(&LpqParams::new(spec.p, spec.q)?, &base),
                SpaceKind::Fpq => lebesgue_rows(&FpqParams::new(spec.p, spec.q, spec.d)?, &base),
            }?;
            fitted_constant(&calib, beta)
        }
    };

    let mut table = CsvTable::new(spec, &["N", "trial", "steps", "sigma", "bound", "within"]);
    table.push_meta("beta", beta);
    table.push_meta("c_fit", c_fit);
    let mut violations = 0;
    for r in &rows {
        let bound = (c_fit * f64::from(r.n).powf(beta) * (1.0 + 1e-12)).ceil();
        let within = r.steps.is_some_and(|s| s as f64 <= bound);
        violations += usize::from(!within);
        table.rows.push(vec![
            r.n.to_string(),
            r.trial.to_string(),
            r.steps.map_or_else(|| "NA".into(), |s| s.to_string()),
            r.sigma.to_string(),
            bound.to_string(),
            within.to_string(),
        ]);
    }
    let checks = vec![Check {
        name: "lebesgue_bound".into(),
        passed: violations == 0,
        detail: format!("{violations} rows above ceil(c_fit N^beta)"),
    }];
    Ok(ExperimentOutput { table, fit: None, checks })
}

/// Slope of `log ‖f_m‖` against `m` over the nonzero residuals.
fn decay_slope(norms: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> =
        norms.iter().enumerate().filter(|(_, r)| **r > 0.0).map(|(m, r)| (m as f64, r.ln())).collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    sxy / sxx
}

fn decay_rows<S: Sampler>(sampler: &S, spec: &ExperimentSpec) -> Result<Vec<(u32, usize, usize, f64)>> {
    let jobs: Vec<(usize, u32, usize)> = spec
        .ns()
        .flat_map(|n| (0..spec.samples).map(move |t| (n, t)))
        .enumerate()
        .map(|(k, (n, t))| (k, n, t))
        .collect();
    jobs.into_par_iter()
        .map(|(k, n, trial)| {
            let mut rng = stream_rng(spec.seed, k as u64);
            let f = sparse_plus_noise(sampler, n as usize, 0, 0.0, &mut rng)?;
            let trace = wcga_run(&f, &spec.config, None, None)?;
            Ok((n, trial, trace.steps(), decay_slope(&trace.residual_norms)))
        })
        .collect()
}

/// WCGA on `K`-sparse targets: per-run slope of `log ‖f_m‖` before recovery,
/// next to the `K^{rs}` scale, with a log-log fit of the mean slope
/// magnitude against `K`.
pub fn exp_iteration_decay(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    spec.validate()?;
    let (rows, rs) = match spec.space {
        SpaceKind::Lpq => {
            let s = LpqParams::new(spec.p, spec.q)?;
            (decay_rows(&s, spec)?, s.a3_r() * s.d_s())
        }
        SpaceKind::Fpq => {
            let s = FpqParams::new(spec.p, spec.q, spec.d)?;
            (decay_rows(&s, spec)?, s.a3_r() * s.d_s())
        }
    };
    let mut table = CsvTable::new(spec, &["K", "trial", "steps", "slope", "k_rs"]);
    table.push_meta("rs", rs);
    let mut by_k: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    let mut exact = true;
    let mut negative = true;
    for (k, trial, steps, slope) in &rows {
        exact &= *steps == *k as usize;
        if *k >= 2 {
            negative &= *slope < 0.0;
            by_k.entry(*k).or_default().push(slope.abs());
        }
        table.rows.push(vec![
            k.to_string(),
            trial.to_string(),
            steps.to_string(),
            slope.to_string(),
            f64::from(*k).powf(rs).to_string(),
        ]);
    }
    let means: Vec<(f64, f64)> =
        by_k.iter().map(|(k, v)| (f64::from(*k), v.iter().sum::<f64>() / v.len() as f64)).collect();
    let fit: Option<FitResult> = fit_loglog(&means).ok();
    let checks = vec![
        Check { name: "recovery_in_k_steps".into(), passed: exact, detail: "steps = K on every run".into() },
        Check { name: "negative_slope".into(), passed: negative, detail: "slope < 0 for every K >= 2".into() },
    ];
    Ok(ExperimentOutput { table, fit, checks })
}
