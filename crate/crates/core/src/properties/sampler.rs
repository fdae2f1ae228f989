//! Random vectors with structured supports.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use crate::error::Result;
use crate::fpq::{DyadicAxisIndex, FpqParams, FpqVector, Rectangle};
use crate::io::{fpq_to_json, lpq_to_json, IndexJson};
use crate::lpq::{ix, LpqIndex, LpqParams, LpqVector};
use crate::space::SpaceVector;

/// Counter-based stream: one independent generator per `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Magnitude log-uniform on `[1e-3, 1e3]`, random sign.
pub fn log_uniform_coeff(rng: &mut impl Rng) -> f64 {
    let m = 10f64.powf(rng.gen_range(-3.0..=3.0));
    if rng.gen::<bool>() {
        m
    } else {
        -m
    }
}

/// Support size log-uniform on `[1, max]`.
pub fn support_size(rng: &mut impl Rng, max: usize) -> usize {
    let s = (rng.gen_range(0.0..=(max as f64 + 1.0).ln())).exp().floor() as usize;
    s.clamp(1, max.max(1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupportKind {
    /// Whole rows (`ℓ^p(ℓ^q)`) or rectangles of one measure (`f_{p,q}`).
    Rows,
    /// One entry per row plus a dense row; dyadic subtrees in `f_{p,q}`.
    Nested,
    Scatter,
}

impl SupportKind {
    /// Kinds cycle with the sample index so they appear in equal proportion.
    pub fn for_sample(k: usize) -> Self {
        [SupportKind::Rows, SupportKind::Nested, SupportKind::Scatter][k % 3]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerSpec {
    pub max_support: usize,
    /// Rows and columns range over `1..=max_row`.
    pub max_row: u32,
    /// Finest dyadic level per axis.
    pub max_level: u32,
}

impl Default for SamplerSpec {
    fn default() -> Self {
        SamplerSpec { max_support: 12, max_row: 8, max_level: 4 }
    }
}

/// A space the property checks can draw from.
pub trait Sampler: Sync {
    type Vector: SpaceVector<f64> + Send + Sync;

    fn space(&self) -> &'static str;
    fn p(&self) -> f64;
    fn q(&self) -> f64;
    fn dim(&self) -> usize {
        1
    }
    fn support(&self, kind: SupportKind, spec: &SamplerSpec, rng: &mut ChaCha8Rng) -> Vec<<Self::Vector as SpaceVector<f64>>::Index>;
    /// Coefficients for a support of the given kind.
    fn coefficients(
        &self,
        kind: SupportKind,
        support: &[<Self::Vector as SpaceVector<f64>>::Index],
        rng: &mut ChaCha8Rng,
    ) -> Vec<f64> {
        let _ = kind;
        support.iter().map(|_| log_uniform_coeff(rng)).collect()
    }
    fn build(&self, entries: BTreeMap<<Self::Vector as SpaceVector<f64>>::Index, f64>) -> Result<Self::Vector>;
    fn to_json(&self, x: &Self::Vector) -> Value;
    fn index_json(&self, i: &<Self::Vector as SpaceVector<f64>>::Index) -> Value;
    /// Two indices sharing a row (or disjoint rectangles).
    fn pair(&self) -> [<Self::Vector as SpaceVector<f64>>::Index; 2];
    /// Exponent `r` of property A3.
    fn a3_r(&self) -> f64;
    /// Log exponent of the A3 constant; zero when it is uniform.
    fn a3_h(&self) -> f64;
    /// `‖Σ_{i∈A} e*_i‖` in the dual space.
    fn dual_indicator_norm(&self, set: &BTreeSet<<Self::Vector as SpaceVector<f64>>::Index>) -> Result<f64>;
    fn d_s(&self) -> f64;
    fn d_c1(&self) -> f64;

    fn sample(&self, k: usize, spec: &SamplerSpec, rng: &mut ChaCha8Rng) -> Result<Self::Vector> {
        let kind = SupportKind::for_sample(k);
        let support = self.support(kind, spec, rng);
        let coeffs = self.coefficients(kind, &support, rng);
        self.build(support.into_iter().zip(coeffs).collect())
    }
}

impl Sampler for LpqParams<f64> {
    type Vector = LpqVector<f64>;

    fn space(&self) -> &'static str {
        "lpq"
    }

    fn p(&self) -> f64 {
        LpqParams::p(self)
    }

    fn q(&self) -> f64 {
        LpqParams::q(self)
    }

    fn support(&self, kind: SupportKind, spec: &SamplerSpec, rng: &mut ChaCha8Rng) -> Vec<LpqIndex> {
        let n = support_size(rng, spec.max_support);
        let r = spec.max_row.max(1);
        let mut out = BTreeSet::new();
        match kind {
            SupportKind::Rows => {
                let rows = rng.gen_range(1..=3u32.min(r));
                let first = rng.gen_range(1..=r);
                for t in 0..n as u32 {
                    out.insert(ix(first + t % rows, 1 + t / rows));
                }
            }
            SupportKind::Nested => {
                let column = rng.gen_range(0..=n);
                for j in 0..column as u32 {
                    out.insert(ix(j + 1, 1));
                }
                for c in 0..(n - column) as u32 {
                    out.insert(ix(column as u32 + 1, c + 2));
                }
            }
            SupportKind::Scatter => {
                let mut tries = 0;
                while out.len() < n && tries < 50 * n {
                    out.insert(ix(rng.gen_range(1..=r), rng.gen_range(1..=r)));
                    tries += 1;
                }
            }
        }
        out.into_iter().collect()
    }

    fn build(&self, entries: BTreeMap<LpqIndex, f64>) -> Result<LpqVector<f64>> {
        LpqVector::from_entries(*self, entries.into_iter().map(|(i, v)| ((i.row, i.col), v)))
    }

    fn to_json(&self, x: &LpqVector<f64>) -> Value {
        lpq_to_json(x)
    }

    fn index_json(&self, i: &LpqIndex) -> Value {
        i.to_json()
    }

    fn pair(&self) -> [LpqIndex; 2] {
        [ix(1, 1), ix(1, 2)]
    }

    fn a3_r(&self) -> f64 {
        self.r()
    }

    fn a3_h(&self) -> f64 {
        0.0
    }

    fn dual_indicator_norm(&self, set: &BTreeSet<LpqIndex>) -> Result<f64> {
        let dual = LpqParams::new(self.p_conj(), self.q_conj())?;
        LpqVector::indicator(dual, set).norm()
    }

    fn d_s(&self) -> f64 {
        self.s()
    }

    fn d_c1(&self) -> f64 {
        self.c1()
    }
}

fn random_axis(rng: &mut ChaCha8Rng, max_level: u32) -> DyadicAxisIndex {
    if rng.gen_bool(0.1) {
        return DyadicAxisIndex::Zero;
    }
    let level = rng.gen_range(0..=max_level);
    DyadicAxisIndex::Interval { level, offset: rng.gen_range(0..1u64 << level) }
}

/// All level vectors with entries in `0..=max` summing to `total`.
fn level_vectors(d: usize, total: u32, max: u32) -> Vec<Vec<u32>> {
    if d == 1 {
        return if total <= max { vec![vec![total]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 0..=total.min(max) {
        for mut rest in level_vectors(d - 1, total - first, max) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Rectangles inside `root` refined by at most `depth` levels on every axis.
fn subtree(root: &[(u32, u64)], depth: u32) -> Vec<Rectangle> {
    let mut rects: Vec<Vec<(u32, u64)>> = vec![Vec::new()];
    for &(level, offset) in root {
        let mut next = Vec::new();
        for partial in &rects {
            for extra in 0..=depth {
                for k in 0..1u64 << extra {
                    let mut axes = partial.clone();
                    axes.push((level + extra, (offset << extra) + k));
                    next.push(axes);
                }
            }
        }
        rects = next;
    }
    rects.iter().map(|a| Rectangle::from_levels(a).expect("valid subtree")).collect()
}

impl Sampler for FpqParams<f64> {
    type Vector = FpqVector<f64>;

    fn space(&self) -> &'static str {
        "fpq"
    }

    fn p(&self) -> f64 {
        FpqParams::p(self)
    }

    fn q(&self) -> f64 {
        FpqParams::q(self)
    }

    fn dim(&self) -> usize {
        self.d()
    }

    fn support(&self, kind: SupportKind, spec: &SamplerSpec, rng: &mut ChaCha8Rng) -> Vec<Rectangle> {
        let d = self.d();
        let n = support_size(rng, spec.max_support);
        let top = spec.max_level;
        match kind {
            SupportKind::Rows => {
                // Random rectangles of one measure 2^{-total}.
                let total = rng.gen_range(0..=top * d as u32);
                let shapes = level_vectors(d, total, top);
                let mut out = BTreeSet::new();
                let mut tries = 0;
                while out.len() < n && tries < 50 * n {
                    let shape = shapes.choose(rng).expect("nonempty");
                    let axes: Vec<(u32, u64)> = shape.iter().map(|&l| (l, rng.gen_range(0..1u64 << l))).collect();
                    out.insert(Rectangle::from_levels(&axes).expect("valid"));
                    tries += 1;
                }
                out.into_iter().collect()
            }
            SupportKind::Nested => {
                // Largest subtree below a random root that fits the size budget.
                let root: Vec<(u32, u64)> = (0..d)
                    .map(|_| {
                        let l = rng.gen_range(0..=top / 2);
                        (l, rng.gen_range(0..1u64 << l))
                    })
                    .collect();
                let room = top - root.iter().map(|a| a.0).max().unwrap_or(0);
                let size = |k: u32| ((1u64 << (k + 1)) - 1).pow(d as u32);
                let mut depth = 0;
                while depth < room && size(depth + 1) <= n as u64 {
                    depth += 1;
                }
                subtree(&root, depth)
            }
            SupportKind::Scatter => {
                let mut out = BTreeSet::new();
                let mut tries = 0;
                while out.len() < n && tries < 50 * n {
                    let axes = (0..d).map(|_| random_axis(rng, top)).collect();
                    out.insert(Rectangle::new(axes).expect("valid"));
                    tries += 1;
                }
                out.into_iter().collect()
            }
        }
    }

    fn coefficients(&self, kind: SupportKind, support: &[Rectangle], rng: &mut ChaCha8Rng) -> Vec<f64> {
        match kind {
            // Balanced amplitudes |x_I| |I|^{-1/p} with mild jitter: the extremal
            // profile for overlapping supports.
            SupportKind::Nested => support
                .iter()
                .map(|r| {
                    let amp = r.measure::<f64>().powf(self.p().recip()) * rng.gen_range(0.5..=1.0);
                    if rng.gen::<bool>() {
                        amp
                    } else {
                        -amp
                    }
                })
                .collect(),
            _ => support.iter().map(|_| log_uniform_coeff(rng)).collect(),
        }
    }

    fn build(&self, entries: BTreeMap<Rectangle, f64>) -> Result<FpqVector<f64>> {
        FpqVector::from_entries(*self, entries)
    }

    fn to_json(&self, x: &FpqVector<f64>) -> Value {
        fpq_to_json(x)
    }

    fn index_json(&self, i: &Rectangle) -> Value {
        i.to_json()
    }

    fn pair(&self) -> [Rectangle; 2] {
        let first = |k: u64| {
            let mut axes = vec![(1u32, k)];
            axes.extend(std::iter::repeat((0u32, 0u64)).take(self.d() - 1));
            Rectangle::from_levels(&axes).expect("valid")
        };
        [first(0), first(1)]
    }

    fn a3_r(&self) -> f64 {
        1.0 / self.p_conj()
    }

    fn a3_h(&self) -> f64 {
        self.h()
    }

    fn dual_indicator_norm(&self, set: &BTreeSet<Rectangle>) -> Result<f64> {
        FpqVector::indicator(self.dual(), set)?.norm()
    }

    fn d_s(&self) -> f64 {
        self.s()
    }

    fn d_c1(&self) -> f64 {
        self.c_pq()
    }
}
