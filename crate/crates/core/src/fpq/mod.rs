//! The space f_{p,q} of coefficient sequences over dyadic rectangles of
//! `[0,1]^d`, normed by the L^p norm of the ℓ^q square function
//! `S_q x = (Σ |x_I 1_{I,p}|^q)^{1/q}` with `1_{I,p} = |I|^{-1/p} 1_I`.
//!
//! `S_q x` is constant on the cells of the common refinement of the support
//! rectangles, so norms and functionals are evaluated exactly cell by cell.

mod dyadic;
mod grid;
pub mod haar;
pub mod structured;

use std::collections::{BTreeMap, BTreeSet};

pub use dyadic::{DyadicAxisIndex, Rectangle, MAX_LEVEL};
pub use grid::{RefinementGrid, GRID_BUDGET};

use crate::error::{Error, Result};
use crate::lpq::check_exponent;
use crate::scalar::{conjugate, pairwise_sum, Scalar};
use crate::space::{sanitize, SpaceVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FpqParams<T = f64> {
    p: T,
    q: T,
    d: usize,
}

impl<T: Scalar> FpqParams<T> {
    pub fn new(p: T, q: T, d: usize) -> Result<Self> {
        check_exponent(p, "p")?;
        check_exponent(q, "q")?;
        if d == 0 {
            return Err(Error::InvalidParams("d must be positive".into()));
        }
        Ok(Self { p, q, d })
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn q(&self) -> T {
        self.q
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn p_conj(&self) -> T {
        conjugate(self.p)
    }

    pub fn q_conj(&self) -> T {
        conjugate(self.q)
    }

    pub fn s(&self) -> T {
        self.p_conj().max(self.q_conj())
    }

    pub fn c_pq(&self) -> T {
        self.p.recip().min(self.q.recip())
    }

    /// Log exponent `(d-1)(1/p - 1/q)_+`.
    pub fn h(&self) -> T {
        let gap = (self.p.recip() - self.q.recip()).max(T::zero());
        T::from_usize(self.d - 1).unwrap() * gap
    }

    /// `1` if `p <= q`, else `q'/p'`.
    pub fn alpha_pq(&self) -> T {
        if self.p <= self.q {
            T::one()
        } else {
            self.q_conj() / self.p_conj()
        }
    }

    /// Parameters of the dual space f_{p',q'}.
    pub fn dual(&self) -> Self {
        Self { p: self.p_conj(), q: self.q_conj(), d: self.d }
    }

    pub fn with_pq(&self, p: T, q: T) -> Result<Self> {
        Self::new(p, q, self.d)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FpqVector<T = f64> {
    params: FpqParams<T>,
    entries: BTreeMap<Rectangle, T>,
}

/// Normalized square function on the refinement grid of a vector's support.
struct Field<T> {
    grid: RefinementGrid,
    /// Largest pointwise amplitude `|x_I| |I|^{-1/p}`.
    scale: T,
    /// `(S_q x / scale)^q` per cell.
    sq: Vec<T>,
}

impl<T: Scalar> FpqVector<T> {
    pub fn zero(params: FpqParams<T>) -> Self {
        Self { params, entries: BTreeMap::new() }
    }

    pub fn from_entries<I>(params: FpqParams<T>, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Rectangle, T)>,
    {
        let mut map = BTreeMap::new();
        for (rect, v) in entries {
            if rect.dim() != params.d {
                return Err(Error::InvalidIndex(format!(
                    "rectangle {rect} has {} axes, expected {}",
                    rect.dim(),
                    params.d
                )));
            }
            if map.contains_key(&rect) {
                return Err(Error::InvalidIndex(format!("duplicate entry {rect}")));
            }
            map.insert(rect, v);
        }
        Ok(Self { params, entries: sanitize(map) })
    }

    /// `Σ_{I ∈ A} e_I`.
    pub fn indicator(params: FpqParams<T>, set: &BTreeSet<Rectangle>) -> Result<Self> {
        Self::from_entries(params, set.iter().map(|r| (r.clone(), T::one())))
    }

    pub fn params(&self) -> &FpqParams<T> {
        &self.params
    }

    /// The same coefficients read in f_{p,q} with other exponents.
    pub fn reinterpret(&self, params: FpqParams<T>) -> Result<Self> {
        if params.d != self.params.d {
            return Err(Error::ParamMismatch);
        }
        Ok(Self { params, entries: self.entries.clone() })
    }

    pub fn grid(&self) -> Result<RefinementGrid> {
        RefinementGrid::new(self.params.d, self.entries.keys())
    }

    fn amplitude(&self, rect: &Rectangle, v: T) -> T {
        v.abs() * rect.measure::<T>().powf(-self.params.p.recip())
    }

    fn field(&self) -> Result<Field<T>> {
        let grid = self.grid()?;
        let scale = self
            .entries
            .iter()
            .fold(T::zero(), |m, (r, v)| m.max(self.amplitude(r, *v)));
        let mut sq = vec![T::zero(); grid.cell_count()];
        for (r, v) in &self.entries {
            let w = (self.amplitude(r, *v) / scale).powf(self.params.q);
            grid.for_each_cell(&grid.cell_box(r), |i, _vol: T| sq[i] = sq[i] + w);
        }
        Ok(Field { grid, scale, sq })
    }

    /// `(norm / scale)`, the normalized norm of a field.
    fn normalized_norm(&self, field: &Field<T>) -> T {
        let ratio = self.params.p / self.params.q;
        let mut terms = Vec::with_capacity(field.sq.len());
        field.grid.for_each_cell(&field.grid.full_box(), |i, vol: T| {
            terms.push(vol * field.sq[i].powf(ratio));
        });
        pairwise_sum(&terms).powf(self.params.p.recip())
    }

    /// Square function `S_q x` per cell of [`Self::grid`].
    pub fn square_function(&self) -> Result<Vec<T>> {
        if self.entries.is_empty() {
            return Ok(Vec::new());
        }
        let field = self.field()?;
        let inv = self.params.q.recip();
        Ok(field.sq.iter().map(|s| field.scale * s.powf(inv)).collect())
    }
}

impl<T: Scalar> SpaceVector<T> for FpqVector<T> {
    type Index = Rectangle;

    fn entries(&self) -> &BTreeMap<Rectangle, T> {
        &self.entries
    }

    fn with_entries(&self, entries: BTreeMap<Rectangle, T>) -> Self {
        Self { params: self.params, entries: sanitize(entries) }
    }

    fn same_space(&self, other: &Self) -> bool {
        self.params == other.params
    }

    fn norm(&self) -> Result<T> {
        if self.entries.is_empty() {
            return Ok(T::zero());
        }
        let field = self.field()?;
        Ok(field.scale * self.normalized_norm(&field))
    }

    fn norming_gradient(&self) -> Result<BTreeMap<Rectangle, T>> {
        if self.entries.is_empty() {
            return Err(Error::ZeroVector);
        }
        let (p, q) = (self.params.p, self.params.q);
        let field = self.field()?;
        let nu = self.normalized_norm(&field);
        let expo = (p - q) / q;
        let mut out = BTreeMap::new();
        for (r, v) in &self.entries {
            // |x_I|^{q-1} |I|^{-q/p} ∫_I S^{p-q} / ‖x‖^{p-1}, normalized by the scale.
            let a = self.amplitude(r, *v) / field.scale;
            let mut terms = Vec::new();
            field.grid.for_each_cell(&field.grid.cell_box(r), |i, vol: T| {
                terms.push(vol * field.sq[i].powf(expo));
            });
            let integral = pairwise_sum(&terms);
            let g = a.powf(q - T::one()) * r.measure::<T>().powf(-p.recip()) * integral
                / nu.powf(p - T::one());
            out.insert(r.clone(), g.copysign(*v));
        }
        Ok(out)
    }
}

/// `‖Σ_{I ∈ A} e_I‖`, the democracy function at `A`.
pub fn democracy_sum<T: Scalar>(params: FpqParams<T>, set: &BTreeSet<Rectangle>) -> Result<T> {
    FpqVector::indicator(params, set)?.norm()
}
