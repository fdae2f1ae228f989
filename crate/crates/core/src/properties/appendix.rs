//! Inequalities behind the democracy bound for `f_{p,q}`.

use std::collections::BTreeSet;

use rand::Rng;
use serde_json::json;

use super::{base_parameters, run_samples, summarize, Outcome, PropertyReport, ReportHeader, Sampler, SamplerSpec};
use crate::error::{Error, Result};
use crate::fpq::{democracy_sum, FpqParams, FpqVector};
use crate::lorentz::lorentz_quasinorm;
use crate::space::SpaceVector;

fn lp_of_coefficients(x: &FpqVector, p: f64) -> f64 {
    x.entries().values().map(|v| v.abs().powf(p)).sum::<f64>().powf(p.recip())
}

/// Records the constant that would make the worst sample tight.
fn with_fitted(mut report: PropertyReport, c: f64) -> PropertyReport {
    report.extra.insert("fitted_c".into(), json!(report.max_violation_ratio * c));
    report
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParams(msg.into()))
    }
}

/// For `p >= q` and disjoint supports,
/// `‖Σ x_n‖ <= (Σ ‖x_n‖^q)^{1/q}`. Each sample splits a random vector into
/// up to six pieces.
pub fn check_disjoint_q_ineq(params: FpqParams, spec: &SamplerSpec, samples: usize, seed: u64) -> Result<PropertyReport> {
    require(params.p() >= params.q(), "requires p >= q")?;
    let q = params.q();
    let outcomes = run_samples(samples, seed, |k, rng| {
        let x = params.sample(k, spec, rng)?;
        let pieces = rng.gen_range(1..=6usize);
        let mut groups = vec![BTreeSet::new(); pieces];
        for i in x.entries().keys() {
            groups[rng.gen_range(0..pieces)].insert(i.clone());
        }
        let mut sum = 0.0;
        for g in &groups {
            sum += x.restrict(g).norm()?.powf(q);
        }
        let ratio = x.norm()? / sum.powf(q.recip());
        let parts: Vec<_> = groups.iter().map(|g| g.len()).collect();
        Ok(Some(Outcome { ratio, witness: json!({"x": params.to_json(&x), "piece_sizes": parts}) }))
    })?;
    let header = ReportHeader {
        property: "disjoint-q-triangle",
        space: "fpq",
        parameters: base_parameters(&params),
        tolerance: 1e-10,
        samples,
        seed,
    };
    Ok(summarize(header, outcomes))
}

/// For `d = 1`, `q <= p`: `‖x‖_{ℓ^p} <= ‖x‖ <= c ‖x‖_{ℓ^{p,q}}`. The ratio
/// reported per sample is the larger of the two sides' quotients.
pub fn check_lorentz_sandwich(
    params: FpqParams,
    spec: &SamplerSpec,
    samples: usize,
    seed: u64,
    c: f64,
) -> Result<PropertyReport> {
    require(params.d() == 1 && params.q() <= params.p(), "requires d = 1 and q <= p")?;
    let (p, q) = (params.p(), params.q());
    let outcomes = run_samples(samples, seed, |k, rng| {
        let x = params.sample(k, spec, rng)?;
        let norm = x.norm()?;
        let coeffs: Vec<f64> = x.entries().values().copied().collect();
        let left = lp_of_coefficients(&x, p) / norm;
        let right = norm / lorentz_quasinorm(&coeffs, p, q);
        Ok(Some((Outcome { ratio: left.max(right / c), witness: json!({"x": params.to_json(&x)}) }, right)))
    })?;
    let fitted = outcomes.iter().fold(0.0, |m: f64, (_, (_, r))| m.max(*r));
    let mut parameters = base_parameters(&params);
    parameters.insert("c".into(), c);
    let header = ReportHeader { property: "lorentz-sandwich", space: "fpq", parameters, tolerance: 1e-10, samples, seed };
    let mut report = summarize(header, outcomes.into_iter().map(|(k, (o, _))| (k, o)).collect());
    report.extra.insert("fitted_c".into(), json!(fitted));
    Ok(report)
}

/// For `d = 1`, `q < p`:
/// `‖Σ_A x_I e_I‖ <= c (1 + log|A|)^{1/q - 1/p} (Σ |x_I|^p)^{1/p}`.
pub fn check_d1_log(params: FpqParams, spec: &SamplerSpec, samples: usize, seed: u64, c: f64) -> Result<PropertyReport> {
    require(params.d() == 1 && params.q() < params.p(), "requires d = 1 and q < p")?;
    let (p, q) = (params.p(), params.q());
    let outcomes = run_samples(samples, seed, |k, rng| {
        let x = params.sample(k, spec, rng)?;
        let n = x.support_len() as f64;
        let bound = c * (1.0 + n.ln()).powf(q.recip() - p.recip()) * lp_of_coefficients(&x, p);
        Ok(Some(Outcome { ratio: x.norm()? / bound, witness: json!({"x": params.to_json(&x)}) }))
    })?;
    let mut parameters = base_parameters(&params);
    parameters.insert("c".into(), c);
    let header = ReportHeader { property: "d1-log", space: "fpq", parameters, tolerance: 1e-10, samples, seed };
    Ok(with_fitted(summarize(header, outcomes), c))
}

/// `‖Σ_{I∈A} e_I‖ <= c |A|^{1/p} (1 + log|A|)^{(d-1)(1/q - 1/p)_+}` over the
/// supports the sampler produces.
pub fn check_democracy(params: FpqParams, spec: &SamplerSpec, samples: usize, seed: u64, c: f64) -> Result<PropertyReport> {
    let p = params.p();
    let h = params.dual().h();
    let outcomes = run_samples(samples, seed, |k, rng| {
        let kind = super::SupportKind::for_sample(k);
        let set: BTreeSet<_> = params.support(kind, spec, rng).into_iter().collect();
        let n = set.len() as f64;
        let bound = c * n.powf(p.recip()) * (1.0 + n.ln()).powf(h);
        let ratio = democracy_sum(params, &set)? / bound;
        let rects: Vec<_> = set.iter().map(|r| params.index_json(r)).collect();
        Ok(Some(Outcome { ratio, witness: json!({"A": rects}) }))
    })?;
    let mut parameters = base_parameters(&params);
    parameters.insert("c".into(), c);
    parameters.insert("h".into(), h);
    let header = ReportHeader { property: "democracy", space: "fpq", parameters, tolerance: 1e-10, samples, seed };
    Ok(with_fitted(summarize(header, outcomes), c))
}
