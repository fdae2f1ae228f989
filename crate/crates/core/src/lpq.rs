//! The mixed-norm space ℓ^p(ℓ^q): rows are measured in ℓ^q, the row norms
//! are then stacked in ℓ^p.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::scalar::{conjugate, Scalar};
use crate::space::{sanitize, SpaceVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpqParams<T = f64> {
    p: T,
    q: T,
}

impl<T: Scalar> LpqParams<T> {
    pub fn new(p: T, q: T) -> Result<Self> {
        check_exponent(p, "p")?;
        check_exponent(q, "q")?;
        Ok(Self { p, q })
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn q(&self) -> T {
        self.q
    }

    pub fn p_conj(&self) -> T {
        conjugate(self.p)
    }

    pub fn q_conj(&self) -> T {
        conjugate(self.q)
    }

    /// A3 exponent `max(1/p', 1/q')`.
    pub fn r(&self) -> T {
        self.p_conj().recip().max(self.q_conj().recip())
    }

    /// D-property power `max(p', q')`.
    pub fn s(&self) -> T {
        self.p_conj().max(self.q_conj())
    }

    /// D-property constant `min(1/p, 1/q)`.
    pub fn c1(&self) -> T {
        self.p.recip().min(self.q.recip())
    }

    /// WCGA Lebesgue exponent `max(p'/q', q'/p')`.
    pub fn beta(&self) -> T {
        let ratio = self.p_conj() / self.q_conj();
        ratio.max(ratio.recip())
    }

    /// TGA Lebesgue exponent `max(p/q, q/p)`.
    pub fn b(&self) -> T {
        let ratio = self.p / self.q;
        ratio.max(ratio.recip())
    }

    /// Exponent of the block weight in the lower-bound vector,
    /// `p'(1/q' - 1/p')`.
    pub fn alpha_psi(&self) -> T {
        self.p_conj() * (self.q_conj().recip() - self.p_conj().recip())
    }

    /// Analytic regime: the WCGA beats the TGA iff `q >= p'` or `q = p`.
    pub fn wcga_wins(&self) -> bool {
        let eps = T::lit(1e-12);
        self.q >= self.p_conj() - eps || (self.q - self.p).abs() <= eps
    }
}

pub(crate) fn check_exponent<T: Scalar>(x: T, name: &str) -> Result<()> {
    if x.is_finite() && x > T::one() {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("{name} must lie in (1, inf), got {x}")))
    }
}

/// Position `(row, col)`, both starting at 1. Ordered row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LpqIndex {
    pub row: u32,
    pub col: u32,
}

impl LpqIndex {
    pub fn new(row: u32, col: u32) -> Result<Self> {
        if row == 0 || col == 0 {
            return Err(Error::InvalidIndex(format!("({row},{col}): indices start at 1")));
        }
        Ok(Self { row, col })
    }
}

/// Shorthand for `LpqIndex::new(row, col).unwrap()`.
pub fn ix(row: u32, col: u32) -> LpqIndex {
    LpqIndex::new(row, col).expect("indices start at 1")
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpqVector<T = f64> {
    params: LpqParams<T>,
    entries: BTreeMap<LpqIndex, T>,
}

impl<T: Scalar> LpqVector<T> {
    pub fn zero(params: LpqParams<T>) -> Self {
        Self { params, entries: BTreeMap::new() }
    }

    pub fn from_entries<I>(params: LpqParams<T>, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = ((u32, u32), T)>,
    {
        let mut map = BTreeMap::new();
        for ((j, k), v) in entries {
            let idx = LpqIndex::new(j, k)?;
            if map.insert(idx, v).is_some() {
                return Err(Error::InvalidIndex(format!("duplicate entry ({j},{k})")));
            }
        }
        Ok(Self { params, entries: sanitize(map) })
    }

    /// Indicator vector `1_A`.
    pub fn indicator(params: LpqParams<T>, set: &BTreeSet<LpqIndex>) -> Self {
        Self { params, entries: set.iter().map(|&i| (i, T::one())).collect() }
    }

    pub fn params(&self) -> &LpqParams<T> {
        &self.params
    }

    /// `Δ_j(x)`, the ℓ^q norm of row `j`.
    pub fn row_norm(&self, row: u32) -> T {
        let lo = LpqIndex { row, col: 0 };
        let hi = LpqIndex { row, col: u32::MAX };
        let vals: Vec<T> = self.entries.range(lo..=hi).map(|(_, v)| *v).collect();
        lq_norm(&vals, self.params.q)
    }

    /// All nonzero row norms, keyed by row.
    pub fn row_norms(&self) -> BTreeMap<u32, T> {
        let mut rows: BTreeMap<u32, Vec<T>> = BTreeMap::new();
        for (i, v) in &self.entries {
            rows.entry(i.row).or_default().push(*v);
        }
        rows.into_iter().map(|(j, vals)| (j, lq_norm(&vals, self.params.q))).collect()
    }
}

/// Scaled ℓ^r norm of a list, safe against overflow.
fn lq_norm<T: Scalar>(vals: &[T], r: T) -> T {
    let m = vals.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if m == T::zero() {
        return T::zero();
    }
    let s: T = vals.iter().map(|v| (v.abs() / m).powf(r)).sum();
    m * s.powf(r.recip())
}

impl<T: Scalar> SpaceVector<T> for LpqVector<T> {
    type Index = LpqIndex;

    fn entries(&self) -> &BTreeMap<LpqIndex, T> {
        &self.entries
    }

    fn with_entries(&self, entries: BTreeMap<LpqIndex, T>) -> Self {
        Self { params: self.params, entries: sanitize(entries) }
    }

    fn same_space(&self, other: &Self) -> bool {
        self.params == other.params
    }

    fn norm(&self) -> Result<T> {
        let rows: Vec<T> = self.row_norms().into_values().collect();
        Ok(lq_norm(&rows, self.params.p))
    }

    fn norming_gradient(&self) -> Result<BTreeMap<LpqIndex, T>> {
        let norm = self.norm()?;
        if norm == T::zero() {
            return Err(Error::ZeroVector);
        }
        let (p, q) = (self.params.p, self.params.q);
        let rows = self.row_norms();
        // Δ^{p-q} |x|^{q-1} / ‖x‖^{p-1}, evaluated on normalized magnitudes.
        Ok(self
            .entries
            .iter()
            .map(|(i, v)| {
                let delta = rows[&i.row] / norm;
                let a = v.abs() / norm;
                let g = delta.powf(p - q) * a.powf(q - T::one());
                (*i, g.copysign(*v))
            })
            .collect())
    }
}

/// Which exponent dominates in the lower-bound construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsiVariant {
    /// `p' >= q'`: one block row with `n` entries.
    PConjDominant,
    /// `q' >= p'`: one block row with `2n` entries.
    QConjDominant,
}

impl PsiVariant {
    pub fn block_len(self, n: u32) -> u32 {
        match self {
            PsiVariant::PConjDominant => n,
            PsiVariant::QConjDominant => 2 * n,
        }
    }
}

/// Index sets `(A, B)` of the lower-bound vector: `A` holds one entry in each
/// of the rows `1..=m`, `B` is a single row `m + 1`.
pub fn psi_blocks(m: u32, n: u32, variant: PsiVariant) -> (BTreeSet<LpqIndex>, BTreeSet<LpqIndex>) {
    let a = (1..=m).map(|j| ix(j, 1)).collect();
    let b = (1..=variant.block_len(n)).map(|k| ix(m + 1, k)).collect();
    (a, b)
}

/// `1_A + n^α 1_B` with the blocks of [`psi_blocks`].
pub fn build_psi_vector<T: Scalar>(
    params: LpqParams<T>,
    m: u32,
    n: u32,
    variant: PsiVariant,
) -> LpqVector<T> {
    let weight = T::from_u32(n).unwrap().powf(params.alpha_psi());
    build_block_vector(params, m, variant.block_len(n), T::one(), weight)
}

/// `u 1_A + v 1_B` where `A` has one entry in each of `m` rows and `B` is a
/// row of length `k`.
pub fn build_block_vector<T: Scalar>(params: LpqParams<T>, m: u32, k: u32, u: T, v: T) -> LpqVector<T> {
    let mut entries = BTreeMap::new();
    for j in 1..=m {
        entries.insert(ix(j, 1), u);
    }
    for c in 1..=k {
        entries.insert(ix(m + 1, c), v);
    }
    LpqVector { params, entries: sanitize(entries) }
}
