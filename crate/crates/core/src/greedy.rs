//! WCGA and TGA over the canonical basis, best N-term oracles and
//! Lebesgue-count measurement.

use std::collections::BTreeSet;

use itertools::Itertools;

use crate::chebyshev::{chebyshev_project, SolverConfig};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::space::SpaceVector;

/// Relative tolerance under which two norming coefficients count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Largest support the brute-force best N-term oracle accepts.
pub const SIGMA_BRUTEFORCE_LIMIT: usize = 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Smallest eligible index.
    #[default]
    Lexicographic,
    /// Smallest eligible index in block A, if any.
    PreferBlockA,
    /// Smallest eligible index outside block A, if any.
    PreferBlockB,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChebyshevMode {
    /// Zero the selected coordinates; exact for the canonical basis.
    #[default]
    LatticeExact,
    /// Run the descent solver over the selected unit vectors.
    Iterative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyConfig<T = f64> {
    pub tau: T,
    pub tol: T,
    pub max_steps: usize,
    pub tie_break: TieBreak,
    pub chebyshev_mode: ChebyshevMode,
    pub solver: SolverConfig<T>,
    pub store_approximants: bool,
}

impl<T: Scalar> Default for GreedyConfig<T> {
    fn default() -> Self {
        Self {
            tau: T::one(),
            tol: T::lit(1e-10),
            max_steps: 100_000,
            tie_break: TieBreak::default(),
            chebyshev_mode: ChebyshevMode::default(),
            solver: SolverConfig::default(),
            store_approximants: false,
        }
    }
}

impl<T: Scalar> GreedyConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > T::zero() && self.tau <= T::one()) {
            return Err(Error::InvalidParams(format!("tau must lie in (0, 1], got {}", self.tau)));
        }
        if !(self.tol >= T::zero()) {
            return Err(Error::InvalidParams("tol must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    ZeroResidual,
    MaxSteps,
    TargetMet,
    /// No candidate carries a nonzero norming coefficient.
    NoCandidate,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::ZeroResidual => "zero_residual",
            Termination::MaxSteps => "max_steps",
            Termination::TargetMet => "target_met",
            Termination::NoCandidate => "no_candidate",
        }
    }
}

/// Norming coefficient of the chosen index against the best available one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection<T> {
    pub coeff: T,
    pub sup: T,
}

#[derive(Debug, Clone)]
pub struct GreedyTrace<I, T = f64> {
    pub selected: Vec<I>,
    pub residual_norms: Vec<T>,
    /// Coefficients on `selected` after each step, if requested.
    pub approximants: Option<Vec<Vec<T>>>,
    pub selections: Vec<Selection<T>>,
    pub terminated: Termination,
}

impl<I, T: Scalar> GreedyTrace<I, T> {
    pub fn steps(&self) -> usize {
        self.selected.len()
    }

    pub fn final_norm(&self) -> T {
        *self.residual_norms.last().expect("trace starts with the initial norm")
    }
}

/// Picks among `(index, coeff)` pairs following the weakness rule and tie-break.
pub fn select_index<I: Ord + Clone, T: Scalar>(
    coeffs: &[(I, T)],
    tau: T,
    tie_break: TieBreak,
    block_a: Option<&BTreeSet<I>>,
) -> Option<(I, Selection<T>)> {
    let sup = coeffs.iter().fold(T::zero(), |m, (_, c)| m.max(*c));
    if sup <= T::zero() {
        return None;
    }
    let floor = tau * sup * (T::one() - T::lit(TIE_TOLERANCE));
    let eligible = coeffs.iter().filter(|(_, c)| *c >= floor);
    let in_a = |i: &I| block_a.is_some_and(|a| a.contains(i));
    let pick = match tie_break {
        TieBreak::Lexicographic => eligible.min_by(|x, y| x.0.cmp(&y.0)),
        TieBreak::PreferBlockA | TieBreak::PreferBlockB => {
            let want_a = tie_break == TieBreak::PreferBlockA;
            let all: Vec<_> = eligible.collect();
            all.iter()
                .copied()
                .filter(|(i, _)| in_a(i) == want_a)
                .min_by(|x, y| x.0.cmp(&y.0))
                .or_else(|| all.iter().copied().min_by(|x, y| x.0.cmp(&y.0)))
        }
    }?;
    Some((pick.0.clone(), Selection { coeff: pick.1, sup }))
}

/// Weak Chebyshev Greedy Algorithm over the canonical basis.
///
/// Candidates default to `supp f`; the norming functional of a residual
/// vanishes off its support, so nothing is lost. `block_a` is consulted only
/// by the block tie-breaks.
pub fn wcga_run<T: Scalar, V: SpaceVector<T>>(
    f: &V,
    config: &GreedyConfig<T>,
    candidates: Option<&BTreeSet<V::Index>>,
    block_a: Option<&BTreeSet<V::Index>>,
) -> Result<GreedyTrace<V::Index, T>> {
    wcga_run_until(f, config, candidates, block_a, None)
}

/// [`wcga_run`] that also stops once the residual norm is at most `target`.
pub fn wcga_run_until<T: Scalar, V: SpaceVector<T>>(
    f: &V,
    config: &GreedyConfig<T>,
    candidates: Option<&BTreeSet<V::Index>>,
    block_a: Option<&BTreeSet<V::Index>>,
    target: Option<T>,
) -> Result<GreedyTrace<V::Index, T>> {
    config.validate()?;
    let f_norm = f.norm()?;
    let mut trace = GreedyTrace {
        selected: Vec::new(),
        residual_norms: vec![f_norm],
        approximants: config.store_approximants.then(Vec::new),
        selections: Vec::new(),
        terminated: Termination::ZeroResidual,
    };
    let done = |norm: T| -> Option<Termination> {
        if norm <= config.tol * f_norm {
            Some(Termination::ZeroResidual)
        } else if target.is_some_and(|t| norm <= t) {
            Some(Termination::TargetMet)
        } else {
            None
        }
    };
    if let Some(t) = done(f_norm) {
        trace.terminated = t;
        return Ok(trace);
    }
    let mut residual = f.clone();
    let mut chosen: BTreeSet<V::Index> = BTreeSet::new();
    let mut coeffs: Vec<T> = Vec::new();
    loop {
        if trace.steps() >= config.max_steps {
            trace.terminated = Termination::MaxSteps;
            return Ok(trace);
        }
        let g = residual.norming_coeffs()?;
        let pool: Vec<(V::Index, T)> = match candidates {
            Some(c) => c
                .iter()
                .filter(|i| !chosen.contains(*i))
                .map(|i| (i.clone(), g.get(i).copied().unwrap_or_else(T::zero)))
                .collect(),
            None => g.into_iter().filter(|(i, _)| !chosen.contains(i)).collect(),
        };
        let Some((pick, selection)) = select_index(&pool, config.tau, config.tie_break, block_a) else {
            trace.terminated = Termination::NoCandidate;
            return Ok(trace);
        };
        debug_assert!(selection.coeff >= config.tau * selection.sup - T::lit(TIE_TOLERANCE));
        chosen.insert(pick.clone());
        trace.selected.push(pick);
        trace.selections.push(selection);
        let norm = match config.chebyshev_mode {
            ChebyshevMode::LatticeExact => {
                residual = f.zeroed_on(&chosen);
                coeffs = trace.selected.iter().map(|i| f.get(i)).collect();
                residual.norm()?
            }
            ChebyshevMode::Iterative => {
                let elements: Vec<V> = trace.selected.iter().map(|i| f.unit(i.clone())).collect();
                coeffs.push(T::zero());
                let res = chebyshev_project(f, &elements, &config.solver, Some(&coeffs))?;
                coeffs = res.coefficients;
                residual = res.residual;
                res.residual_norm
            }
        };
        trace.residual_norms.push(norm);
        if let Some(a) = trace.approximants.as_mut() {
            a.push(coeffs.clone());
        }
        if let Some(t) = done(norm) {
            trace.terminated = t;
            return Ok(trace);
        }
    }
}

/// WCGA over an explicit dictionary of unit vectors; selections are
/// positions in `dictionary`.
pub fn wcga_run_dictionary<T: Scalar, V: SpaceVector<T>>(
    f: &V,
    dictionary: &[V],
    config: &GreedyConfig<T>,
) -> Result<GreedyTrace<usize, T>> {
    config.validate()?;
    let f_norm = f.norm()?;
    let mut trace = GreedyTrace {
        selected: Vec::new(),
        residual_norms: vec![f_norm],
        approximants: config.store_approximants.then(Vec::new),
        selections: Vec::new(),
        terminated: Termination::ZeroResidual,
    };
    if f.is_zero() {
        return Ok(trace);
    }
    let mut residual = f.clone();
    let mut coeffs: Vec<T> = Vec::new();
    loop {
        if trace.steps() >= config.max_steps {
            trace.terminated = Termination::MaxSteps;
            return Ok(trace);
        }
        let g = residual.norming_gradient()?;
        let pool: Vec<(usize, T)> = dictionary
            .iter()
            .enumerate()
            .filter(|(j, _)| !trace.selected.contains(j))
            .map(|(j, phi)| (j, crate::space::dot(&g, phi.entries()).abs()))
            .collect();
        let Some((pick, selection)) = select_index(&pool, config.tau, TieBreak::Lexicographic, None) else {
            trace.terminated = Termination::NoCandidate;
            return Ok(trace);
        };
        trace.selected.push(pick);
        trace.selections.push(selection);
        let elements: Vec<V> = trace.selected.iter().map(|&j| dictionary[j].clone()).collect();
        coeffs.push(T::zero());
        let res = chebyshev_project(f, &elements, &config.solver, Some(&coeffs))?;
        coeffs = res.coefficients;
        residual = res.residual;
        trace.residual_norms.push(res.residual_norm);
        if let Some(a) = trace.approximants.as_mut() {
            a.push(coeffs.clone());
        }
        if res.residual_norm <= config.tol * f_norm {
            trace.terminated = Termination::ZeroResidual;
            return Ok(trace);
        }
    }
}

/// Indices of the `n` largest moduli, ties broken lexicographically.
pub fn largest_indices<T: Scalar, V: SpaceVector<T>>(f: &V, n: usize) -> Vec<V::Index> {
    let mut items: Vec<(&V::Index, T)> = f.entries().iter().map(|(i, v)| (i, v.abs())).collect();
    items.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite coefficients").then_with(|| a.0.cmp(b.0)));
    items.into_iter().take(n).map(|(i, _)| i.clone()).collect()
}

/// Thresholding Greedy Algorithm: the `n` largest coefficients, one per step.
pub fn tga_run<T: Scalar, V: SpaceVector<T>>(f: &V, n: usize) -> Result<GreedyTrace<V::Index, T>> {
    let order = largest_indices(f, n);
    let mut trace = GreedyTrace {
        selected: Vec::new(),
        residual_norms: vec![f.norm()?],
        approximants: None,
        selections: Vec::new(),
        terminated: Termination::MaxSteps,
    };
    let mut removed = BTreeSet::new();
    for i in order {
        let coeff = f.get(&i).abs();
        removed.insert(i.clone());
        trace.selected.push(i);
        trace.selections.push(Selection { coeff, sup: coeff });
        trace.residual_norms.push(f.zeroed_on(&removed).norm()?);
    }
    if removed.len() == f.support_len() {
        trace.terminated = Termination::ZeroResidual;
    }
    Ok(trace)
}

/// Exact `σ_N(f)` with an optimal support. The best approximant with support
/// `S` is `f` restricted to `S`, so only supports inside `supp f` of size
/// `min(N, |supp f|)` are searched.
pub fn sigma_n_bruteforce<T: Scalar, V: SpaceVector<T>>(f: &V, n: usize) -> Result<(T, BTreeSet<V::Index>)> {
    let size = f.support_len();
    if size > SIGMA_BRUTEFORCE_LIMIT {
        return Err(Error::SupportTooLarge { size, limit: SIGMA_BRUTEFORCE_LIMIT });
    }
    if n >= size {
        return Ok((T::zero(), f.support()));
    }
    let support: Vec<V::Index> = f.entries().keys().cloned().collect();
    let mut best: Option<(T, BTreeSet<V::Index>)> = None;
    for combo in support.iter().cloned().combinations(n) {
        let s: BTreeSet<V::Index> = combo.into_iter().collect();
        let value = f.zeroed_on(&s).norm()?;
        if best.as_ref().map_or(true, |(b, _)| value < *b) {
            best = Some((value, s));
        }
    }
    Ok(best.expect("at least one support"))
}

/// `‖f‖` after removing the `N` largest coefficients; an upper bound on `σ_N`.
pub fn sigma_n_greedy_upper<T: Scalar, V: SpaceVector<T>>(f: &V, n: usize) -> Result<T> {
    let s: BTreeSet<V::Index> = largest_indices(f, n).into_iter().collect();
    f.zeroed_on(&s).norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaMethod {
    Bruteforce,
    GreedyUpper,
    /// Supplied by the caller, typically a closed-form bound.
    Override,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryMeasurement<T = f64> {
    pub n: usize,
    pub c: T,
    pub sigma_n: T,
    /// Smallest `m` with `‖f_m‖ <= C σ_N`; `None` if the step cap was hit.
    pub steps_needed: Option<usize>,
    pub sigma_method: SigmaMethod,
}

/// Runs the WCGA until `‖f_m‖ <= C σ_N(f)`.
pub fn recovery_steps<T: Scalar, V: SpaceVector<T>>(
    f: &V,
    n: usize,
    c: T,
    config: &GreedyConfig<T>,
    block_a: Option<&BTreeSet<V::Index>>,
    sigma_override: Option<T>,
) -> Result<RecoveryMeasurement<T>> {
    if !(c >= T::one()) {
        return Err(Error::InvalidParams(format!("C must be at least 1, got {c}")));
    }
    let (sigma_n, sigma_method) = match sigma_override {
        Some(s) => (s, SigmaMethod::Override),
        None => (sigma_n_bruteforce(f, n)?.0, SigmaMethod::Bruteforce),
    };
    let target = c * sigma_n;
    let trace = wcga_run_until(f, config, None, block_a, Some(target))?;
    let steps_needed = trace.residual_norms.iter().position(|r| *r <= target);
    Ok(RecoveryMeasurement { n, c, sigma_n, steps_needed, sigma_method })
}
