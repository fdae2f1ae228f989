//! Best approximation of `f` from the span of finitely many unit vectors.
//!
//! The objective `c ↦ ‖f - Σ c_j φ_j‖` is convex with partial derivatives
//! `-F_r(φ_j)`, `r` the residual. Plain gradient steps with Armijo
//! backtracking are interleaved with exact coordinate line searches that
//! bisect on the sign of the directional derivative. The latter matter where
//! the gradient is only Hölder continuous (exponents below 2): there function
//! values stop resolving progress long before the gradient is small.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::space::{dot, SpaceVector};

const ARMIJO_SHRINK: f64 = 0.5;
const ARMIJO_DECREASE: f64 = 1e-4;
const ARMIJO_MAX_HALVINGS: usize = 80;
const SWEEP_EVERY: usize = 10;
const BISECTION_LIMIT: usize = 2200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<T = f64> {
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        Self { tol: T::lit(1e-10), max_iter: 20_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverStatus {
    /// `grad_sup <= tol * max(1, residual_norm)`.
    Converged,
    /// `residual_norm <= tol * ‖f‖`.
    ExactRepresentation,
    /// `f = 0`; the zero result is returned.
    ZeroInput,
    /// Iteration budget spent or no further progress; the best iterate is kept.
    MaxIterExceeded,
}

#[derive(Debug, Clone)]
pub struct ChebyshevResult<V, T = f64> {
    pub coefficients: Vec<T>,
    pub residual: V,
    pub residual_norm: T,
    /// `max_j |F_residual(φ_j)|`.
    pub grad_sup: T,
    pub iterations: usize,
    pub status: SolverStatus,
    /// Residual norm after each accepted update, starting with the initial one.
    pub history: Vec<T>,
}

impl<V, T: Scalar> ChebyshevResult<V, T> {
    pub fn succeeded(&self) -> bool {
        self.status != SolverStatus::MaxIterExceeded
    }

    /// The result, or `MaxIterExceeded` if the solver gave up.
    pub fn ok(self) -> Result<Self> {
        if self.succeeded() {
            Ok(self)
        } else {
            Err(Error::MaxIterExceeded { iterations: self.iterations, grad_sup: self.grad_sup.as_f64() })
        }
    }
}

/// `F_f(g)`, the derivative of the norm at `f` in direction `g`.
pub fn norm_directional_derivative<T: Scalar, V: SpaceVector<T>>(f: &V, g: &V) -> Result<T> {
    f.norming_apply(g)
}

fn residual<T: Scalar, V: SpaceVector<T>>(f: &V, elements: &[V], c: &[T]) -> V {
    let mut entries = f.entries().clone();
    for (phi, &cj) in elements.iter().zip(c) {
        if cj == T::zero() {
            continue;
        }
        for (i, v) in phi.entries() {
            let e = entries.entry(i.clone()).or_insert_with(T::zero);
            *e = *e - cj * *v;
        }
    }
    f.with_entries(entries)
}

struct Point<V, T> {
    c: Vec<T>,
    r: V,
    norm: T,
}

/// Partial derivatives `-F_r(φ_j)`; all zero when `r = 0`.
fn gradient<T: Scalar, V: SpaceVector<T>>(r: &V, elements: &[V]) -> Result<Vec<T>> {
    if r.is_zero() {
        return Ok(vec![T::zero(); elements.len()]);
    }
    let g = r.norming_gradient()?;
    Ok(elements.iter().map(|phi| -dot(&g, phi.entries())).collect())
}

fn sup_abs<T: Scalar>(xs: &[T]) -> T {
    xs.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

fn check_elements<T: Scalar, V: SpaceVector<T>>(f: &V, elements: &[V]) -> Result<()> {
    let tol = T::lit(1e-10).max(T::epsilon() * T::lit(64.0));
    for (j, phi) in elements.iter().enumerate() {
        if !f.same_space(phi) {
            return Err(Error::ParamMismatch);
        }
        let n = phi.norm()?;
        if (n - T::one()).abs() > tol {
            return Err(Error::InvalidParams(format!("dictionary element {j} has norm {n}")));
        }
    }
    Ok(())
}

/// Minimizes `‖f - Σ c_j φ_j‖` over `c`.
pub fn chebyshev_project<T: Scalar, V: SpaceVector<T>>(
    f: &V,
    elements: &[V],
    config: &SolverConfig<T>,
    warm_start: Option<&[T]>,
) -> Result<ChebyshevResult<V, T>> {
    if !(config.tol > T::zero()) {
        return Err(Error::InvalidParams("tol must be positive".into()));
    }
    check_elements(f, elements)?;
    let k = elements.len();
    let f_norm = f.norm()?;
    if f.is_zero() {
        return Ok(ChebyshevResult {
            coefficients: vec![T::zero(); k],
            residual: f.clone(),
            residual_norm: T::zero(),
            grad_sup: T::zero(),
            iterations: 0,
            status: SolverStatus::ZeroInput,
            history: vec![T::zero()],
        });
    }
    let mut c = vec![T::zero(); k];
    if let Some(w) = warm_start {
        for (cj, wj) in c.iter_mut().zip(w) {
            *cj = *wj;
        }
    }
    let r = residual(f, elements, &c);
    let norm = r.norm()?;
    let mut x = Point { c, r, norm };
    let mut history = vec![x.norm];
    let mut status = SolverStatus::MaxIterExceeded;
    let mut grad = gradient(&x.r, elements)?;
    let mut grad_sup = sup_abs(&grad);
    let mut iterations = 0;

    while iterations < config.max_iter {
        if x.norm <= config.tol * f_norm {
            status = SolverStatus::ExactRepresentation;
            break;
        }
        if grad_sup <= config.tol * x.norm.max(T::one()) {
            status = SolverStatus::Converged;
            break;
        }
        iterations += 1;
        let stepped = armijo_step(f, elements, &mut x, &grad)?;
        if !stepped || iterations % SWEEP_EVERY == 0 {
            let moved = coordinate_sweep(f, elements, &mut x)?;
            if !stepped && !moved {
                grad = gradient(&x.r, elements)?;
                grad_sup = sup_abs(&grad);
                break;
            }
        }
        debug_assert!(x.norm <= history[history.len() - 1] * (T::one() + T::lit(1e-12)));
        history.push(x.norm);
        grad = gradient(&x.r, elements)?;
        grad_sup = sup_abs(&grad);
    }
    if status == SolverStatus::MaxIterExceeded {
        if x.norm <= config.tol * f_norm {
            status = SolverStatus::ExactRepresentation;
        } else if grad_sup <= config.tol * x.norm.max(T::one()) {
            status = SolverStatus::Converged;
        }
    }
    Ok(ChebyshevResult {
        coefficients: x.c,
        residual: x.r,
        residual_norm: x.norm,
        grad_sup,
        iterations,
        status,
        history,
    })
}

/// One gradient step with Armijo backtracking from step `1/‖grad‖`.
fn armijo_step<T: Scalar, V: SpaceVector<T>>(
    f: &V,
    elements: &[V],
    x: &mut Point<V, T>,
    grad: &[T],
) -> Result<bool> {
    let g2: T = grad.iter().map(|g| *g * *g).sum();
    if g2 == T::zero() {
        return Ok(false);
    }
    let mut t = g2.sqrt().recip();
    for _ in 0..ARMIJO_MAX_HALVINGS {
        let c: Vec<T> = x.c.iter().zip(grad).map(|(cj, gj)| *cj - t * *gj).collect();
        let r = residual(f, elements, &c);
        let norm = r.norm()?;
        if norm <= x.norm - T::lit(ARMIJO_DECREASE) * t * g2 {
            *x = Point { c, r, norm };
            return Ok(true);
        }
        t = t * T::lit(ARMIJO_SHRINK);
    }
    Ok(false)
}

/// Exact minimization along each coordinate in turn. Returns whether any
/// coefficient changed.
fn coordinate_sweep<T: Scalar, V: SpaceVector<T>>(f: &V, elements: &[V], x: &mut Point<V, T>) -> Result<bool> {
    let mut moved = false;
    for j in 0..elements.len() {
        moved |= coordinate_search(f, elements, x, j)?;
    }
    Ok(moved)
}

fn coordinate_search<T: Scalar, V: SpaceVector<T>>(
    f: &V,
    elements: &[V],
    x: &mut Point<V, T>,
    j: usize,
) -> Result<bool> {
    if x.r.is_zero() {
        return Ok(false);
    }
    let deriv = |cj: T| -> Result<(T, Point<V, T>)> {
        let mut c = x.c.clone();
        c[j] = cj;
        let r = residual(f, elements, &c);
        let d = if r.is_zero() { T::zero() } else { -r.norming_apply(&elements[j])? };
        let norm = r.norm()?;
        Ok((d, Point { c, r, norm }))
    };
    let start = x.c[j];
    let d0 = -x.r.norming_apply(&elements[j])?;
    if d0 == T::zero() {
        return Ok(false);
    }
    // The minimizer along a unit direction lies within 2‖r‖ of the start.
    let reach = T::lit(2.0) * x.norm;
    let far = if d0 > T::zero() { start - reach } else { start + reach };
    let (d_far, p_far) = deriv(far)?;
    let (mut lo, mut hi) = (start, far);
    let mut at_lo: Option<(T, Point<V, T>)> = None;
    let mut at_hi = (d_far, p_far);
    let mut exact = None;
    if d_far != T::zero() && d_far.signum() != d0.signum() {
        for _ in 0..BISECTION_LIMIT {
            let mid = lo + (hi - lo) * T::lit(0.5);
            if mid == lo || mid == hi {
                break;
            }
            let (dm, pm) = deriv(mid)?;
            if dm == T::zero() {
                exact = Some(pm);
                break;
            }
            if dm.signum() == d0.signum() {
                lo = mid;
                at_lo = Some((dm, pm));
            } else {
                hi = mid;
                at_hi = (dm, pm);
            }
        }
    }
    let best = exact.unwrap_or_else(|| match at_lo {
        Some((dl, pl)) if pl.norm < at_hi.1.norm || (pl.norm == at_hi.1.norm && dl.abs() < at_hi.0.abs()) => pl,
        _ => at_hi.1,
    });
    if best.norm <= x.norm && best.c[j] != start {
        *x = best;
        Ok(true)
    } else {
        Ok(false)
    }
}
/// Exact projection onto the span of the coordinate vectors in `s`:
/// keep `f` on `s`, residual is `f` zeroed on `s`.
pub fn canonical_project<T: Scalar, V: SpaceVector<T>>(f: &V, s: &BTreeSet<V::Index>) -> Result<ChebyshevResult<V, T>> {
    let coefficients: Vec<T> = s.iter().map(|i| f.get(i)).collect();
    let residual = f.zeroed_on(s);
    let residual_norm = residual.norm()?;
    let grad_sup = if residual.is_zero() {
        T::zero()
    } else {
        let g = residual.norming_gradient()?;
        s.iter().fold(T::zero(), |m, i| m.max(g.get(i).map_or(T::zero(), |v| v.abs())))
    };
    let status = if f.is_zero() {
        SolverStatus::ZeroInput
    } else if residual.is_zero() {
        SolverStatus::ExactRepresentation
    } else {
        SolverStatus::Converged
    };
    Ok(ChebyshevResult {
        coefficients,
        residual,
        residual_norm,
        grad_sup,
        iterations: 0,
        status,
        history: vec![residual_norm],
    })
}
