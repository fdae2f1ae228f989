use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Coefficients with modulus below this are dropped as structural zeros.
pub const ZERO_CUTOFF: f64 = 1e-300;

/// A finitely supported vector in a Banach space with an absolute,
/// coordinatewise monotone norm over a canonical basis.
pub trait SpaceVector<T: Scalar>: Clone + Debug + PartialEq + Send + Sync + Sized {
    type Index: Clone + Ord + Debug + Send + Sync;

    fn entries(&self) -> &BTreeMap<Self::Index, T>;

    /// A vector in the same space with the given coefficients. Structural
    /// zeros are dropped.
    fn with_entries(&self, entries: BTreeMap<Self::Index, T>) -> Self;

    fn same_space(&self, other: &Self) -> bool;

    fn norm(&self) -> Result<T>;

    /// Signed values `F_x(e_i)` of the norming functional on `supp x`.
    /// The functional vanishes off the support.
    fn norming_gradient(&self) -> Result<BTreeMap<Self::Index, T>>;

    fn support_len(&self) -> usize {
        self.entries().len()
    }

    fn is_zero(&self) -> bool {
        self.entries().is_empty()
    }

    fn get(&self, i: &Self::Index) -> T {
        self.entries().get(i).copied().unwrap_or_else(T::zero)
    }

    fn support(&self) -> BTreeSet<Self::Index> {
        self.entries().keys().cloned().collect()
    }

    fn zero_like(&self) -> Self {
        self.with_entries(BTreeMap::new())
    }

    fn unit(&self, i: Self::Index) -> Self {
        self.with_entries(BTreeMap::from([(i, T::one())]))
    }

    /// `|F_x(e_i)|`.
    fn norming_coeff(&self, i: &Self::Index) -> Result<T> {
        if self.is_zero() {
            return Err(Error::ZeroVector);
        }
        if !self.entries().contains_key(i) {
            return Ok(T::zero());
        }
        Ok(self.norming_gradient()?[i].abs())
    }

    /// `|F_x(e_i)|` for every `i` in the support.
    fn norming_coeffs(&self) -> Result<BTreeMap<Self::Index, T>> {
        Ok(self
            .norming_gradient()?
            .into_iter()
            .map(|(i, g)| (i, g.abs()))
            .collect())
    }

    /// `F_x(y)`.
    fn norming_apply(&self, y: &Self) -> Result<T> {
        if !self.same_space(y) {
            return Err(Error::ParamMismatch);
        }
        let g = self.norming_gradient()?;
        Ok(dot(&g, y.entries()))
    }

    fn restrict(&self, s: &BTreeSet<Self::Index>) -> Self {
        let kept = self
            .entries()
            .iter()
            .filter(|(i, _)| s.contains(i))
            .map(|(i, v)| (i.clone(), *v))
            .collect();
        self.with_entries(kept)
    }

    fn zeroed_on(&self, s: &BTreeSet<Self::Index>) -> Self {
        let kept = self
            .entries()
            .iter()
            .filter(|(i, _)| !s.contains(i))
            .map(|(i, v)| (i.clone(), *v))
            .collect();
        self.with_entries(kept)
    }

    /// Distance to the span of the coordinate vectors in `s`. Exact, since
    /// the best approximant keeps the coordinates in `s`.
    fn dist_to_coord_span(&self, s: &BTreeSet<Self::Index>) -> Result<T> {
        self.zeroed_on(s).norm()
    }

    /// `self + a * y`.
    fn axpy(&self, a: T, y: &Self) -> Self {
        let mut out = self.entries().clone();
        for (i, v) in y.entries() {
            let e = out.entry(i.clone()).or_insert_with(T::zero);
            *e = *e + a * *v;
        }
        self.with_entries(out)
    }

    fn scaled(&self, a: T) -> Self {
        self.with_entries(self.entries().iter().map(|(i, v)| (i.clone(), a * *v)).collect())
    }
}

/// Inner product of two sparse coefficient maps.
pub fn dot<I: Ord, T: Scalar>(a: &BTreeMap<I, T>, b: &BTreeMap<I, T>) -> T {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut acc = T::zero();
    for (i, v) in small {
        if let Some(w) = large.get(i) {
            acc = acc + *v * *w;
        }
    }
    acc
}

pub(crate) fn is_structural_zero<T: Scalar>(v: T) -> bool {
    v == T::zero() || v.abs().as_f64() < ZERO_CUTOFF
}

pub(crate) fn sanitize<I: Ord, T: Scalar>(entries: BTreeMap<I, T>) -> BTreeMap<I, T> {
    entries.into_iter().filter(|(_, v)| !is_structural_zero(*v)).collect()
}
