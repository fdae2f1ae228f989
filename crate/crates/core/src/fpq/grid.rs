use std::ops::Range;

use super::dyadic::Rectangle;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest number of cells a refinement grid may have.
pub const GRID_BUDGET: u128 = 10_000_000;

/// Common refinement of the endpoints of a finite set of dyadic rectangles.
/// Breakpoints on axis `a` are integers over `2^den_levels[a]`.
#[derive(Debug, Clone)]
pub struct RefinementGrid {
    breakpoints: Vec<Vec<u64>>,
    den_levels: Vec<u32>,
    widths: Vec<Vec<f64>>,
    strides: Vec<usize>,
    cells: usize,
}

impl RefinementGrid {
    pub fn new<'a, I>(d: usize, rects: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Rectangle> + Clone,
    {
        let mut den_levels = vec![0u32; d];
        for r in rects.clone() {
            for (a, axis) in r.axes().iter().enumerate() {
                den_levels[a] = den_levels[a].max(axis.level());
            }
        }
        let mut breakpoints: Vec<Vec<u64>> =
            den_levels.iter().map(|&l| vec![0, 1u64 << l]).collect();
        for r in rects {
            for (a, axis) in r.axes().iter().enumerate() {
                let (lo, hi) = axis.endpoints(den_levels[a]);
                breakpoints[a].push(lo);
                breakpoints[a].push(hi);
            }
        }
        for bp in &mut breakpoints {
            bp.sort_unstable();
            bp.dedup();
        }
        let count: u128 = breakpoints.iter().map(|bp| (bp.len() - 1) as u128).product();
        if count > GRID_BUDGET {
            return Err(Error::GridBudgetExceeded { cells: count, budget: GRID_BUDGET });
        }
        let mut strides = vec![1usize; d];
        for a in (0..d.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * (breakpoints[a + 1].len() - 1);
        }
        let widths = breakpoints
            .iter()
            .zip(&den_levels)
            .map(|(bp, &l)| {
                let scale = 2f64.powi(-(l as i32));
                bp.windows(2).map(|w| (w[1] - w[0]) as f64 * scale).collect()
            })
            .collect();
        Ok(Self { breakpoints, den_levels, widths, strides, cells: count as usize })
    }

    pub fn dim(&self) -> usize {
        self.breakpoints.len()
    }

    pub fn cell_count(&self) -> usize {
        self.cells
    }

    pub fn breakpoints(&self, axis: usize) -> &[u64] {
        &self.breakpoints[axis]
    }

    /// Per-axis ranges of cell indices covering `rect`.
    pub fn cell_box(&self, rect: &Rectangle) -> Vec<Range<usize>> {
        rect.axes()
            .iter()
            .enumerate()
            .map(|(a, axis)| {
                let (lo, hi) = axis.endpoints(self.den_levels[a]);
                let bp = &self.breakpoints[a];
                let i = bp.binary_search(&lo).expect("endpoint is a breakpoint");
                let j = bp.binary_search(&hi).expect("endpoint is a breakpoint");
                i..j
            })
            .collect()
    }

    pub fn full_box(&self) -> Vec<Range<usize>> {
        self.breakpoints.iter().map(|bp| 0..bp.len() - 1).collect()
    }

    /// Calls `f(flat_index, volume)` for every cell in the box, in row-major
    /// order with axis 0 slowest.
    pub fn for_each_cell<T: Scalar, F: FnMut(usize, T)>(&self, cell_box: &[Range<usize>], mut f: F) {
        let widths: Vec<Vec<T>> = cell_box
            .iter()
            .zip(&self.widths)
            .map(|(r, w)| w[r.clone()].iter().map(|&x| T::lit(x)).collect())
            .collect();
        self.walk(cell_box, &widths, &mut f);
    }

    fn walk<T: Scalar, F: FnMut(usize, T)>(&self, cell_box: &[Range<usize>], widths: &[Vec<T>], f: &mut F) {
        let d = cell_box.len();
        if cell_box.iter().any(|r| r.is_empty()) {
            return;
        }
        let mut idx: Vec<usize> = cell_box.iter().map(|r| r.start).collect();
        loop {
            let mut flat = 0;
            let mut vol = T::one();
            for a in 0..d {
                flat += idx[a] * self.strides[a];
                vol = vol * widths[a][idx[a] - cell_box[a].start];
            }
            f(flat, vol);
            let mut a = d;
            loop {
                if a == 0 {
                    return;
                }
                a -= 1;
                idx[a] += 1;
                if idx[a] < cell_box[a].end {
                    break;
                }
                idx[a] = cell_box[a].start;
            }
        }
    }

    /// Cell volumes for the whole grid.
    pub fn volumes<T: Scalar>(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.cells];
        self.for_each_cell(&self.full_box(), |i, v| out[i] = v);
        out
    }
}
