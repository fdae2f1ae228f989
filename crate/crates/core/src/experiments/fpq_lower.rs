use rayon::prelude::*;

use super::{fit_linear, Check, CsvTable, ExperimentOutput, ExperimentSpec};
use crate::error::{Error, Result};
use crate::fpq::structured::{an_len, balanced_b, comps};
use crate::fpq::FpqParams;

/// Bias making the `B_m` tiles strictly preferred over `A_n`.
pub const B_BIAS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FpqLowerPoint {
    pub n: u32,
    /// `N = |A_n|`.
    pub big_n: f64,
    /// Largest number of `B_m` tiles `K` with `C ‖x_B‖ < ‖x_A‖`.
    pub k_star: f64,
    /// `K* + 1`: a lower bound for the WCGA count.
    pub psi: f64,
    /// `‖x_B‖ = b K*^{1/p}`, an upper bound for `σ_N`.
    pub sigma: f64,
    pub b: f64,
}

/// `a 1_{A_n} + b 1_{B}` with `a = 1`, `b` balanced and `B` the first `K*`
/// tiles of some `B_m`. Keeping `A_n` shows `σ_N <= ‖x_B‖`. Every `B` tile
/// carries a strictly larger norming coefficient than every `A_n` rectangle
/// and removing tiles changes neither, so the WCGA spends `K*` steps on `B`
/// while the residual still exceeds `‖x_A‖ > C ‖x_B‖`.
pub fn fpq_lower_point(params: &FpqParams, n: u32, c: f64) -> Result<FpqLowerPoint> {
    let d = params.d();
    if (n as usize) < d || n > 60 {
        return Err(Error::InvalidParams(format!("need d <= n <= 60, got n = {n}")));
    }
    let p = params.p();
    let b = balanced_b(params, 1.0, n, B_BIAS);
    let ln2 = std::f64::consts::LN_2;
    let comps = comps(n, d) as f64;
    let ln_xa_p = -(d as f64) * ln2 + (p / params.q()) * comps.ln() + f64::from(n) * ln2;
    let k_star = ((ln_xa_p - p * (c * b).ln()).exp().ceil() - 1.0).max(0.0);
    Ok(FpqLowerPoint {
        n,
        big_n: an_len(n, d) as f64,
        k_star,
        psi: k_star + 1.0,
        sigma: b * k_star.powf(p.recip()),
        b,
    })
}

/// Fits `log(ψ/N)` against `log log N`; the target slope is
/// `p'(d-1)(1/p - 1/q)`.
pub fn exp_fpq_lower(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    spec.validate()?;
    let params = FpqParams::new(spec.p, spec.q, spec.d)?;
    if spec.p > spec.q || !(1..=3).contains(&spec.d) {
        return Err(Error::InvalidParams("requires p <= q and d in {1, 2, 3}".into()));
    }
    let target = params.p_conj() * params.h();
    let points: Vec<FpqLowerPoint> =
        spec.ns().collect::<Vec<_>>().into_par_iter().map(|n| fpq_lower_point(&params, n, spec.c)).collect::<Result<_>>()?;

    let mut table = CsvTable::new(spec, &["n", "N", "K", "psi", "sigma", "psi_over_N", "target_exponent"]);
    for pt in &points {
        table.rows.push(vec![
            pt.n.to_string(),
            pt.big_n.to_string(),
            pt.k_star.to_string(),
            pt.psi.to_string(),
            pt.sigma.to_string(),
            (pt.psi / pt.big_n).to_string(),
            target.to_string(),
        ]);
    }
    let xy: Vec<(f64, f64)> = points.iter().map(|pt| (pt.big_n.ln().ln(), (pt.psi / pt.big_n).ln())).collect();
    let fit = fit_linear(&xy).ok();
    let passed = fit.as_ref().is_some_and(|f| (f.slope - target).abs() <= 0.2);
    let checks = vec![Check {
        name: "fit_exponent".into(),
        passed,
        detail: format!("slope {:?} vs {target} (±0.2)", fit.as_ref().map(|f| f.slope)),
    }];
    Ok(ExperimentOutput { table, fit, checks })
}
