//! Tensor Haar system on `[0,1]^d` and the coefficient isometry onto
//! f_{p,2} over rectangles with constant directions.
//!
//! `h_{I,p} = 2^{j/p} h(2^j x - k)`, `H_{I,p}` is the tensor product and the
//! coefficients are `c_I(f) = <f, H_{I,p'}>`.

use std::collections::BTreeMap;

use super::{DyadicAxisIndex, FpqParams, FpqVector, Rectangle};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::space::SpaceVector;

/// Function on `[0,1)^d` constant on the `2^{level d}` cells of side `2^{-level}`.
/// Values are row-major with axis 0 slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction<T = f64> {
    pub d: usize,
    pub level: u32,
    pub values: Vec<T>,
}

impl<T: Scalar> StepFunction<T> {
    pub fn new(d: usize, level: u32, values: Vec<T>) -> Result<Self> {
        let expected = 1usize
            .checked_shl(level * d as u32)
            .ok_or_else(|| Error::InvalidParams("grid too fine".into()))?;
        if d == 0 || values.len() != expected {
            return Err(Error::InvalidParams(format!(
                "step function with d={d}, level={level} needs {expected} values, got {}",
                values.len()
            )));
        }
        Ok(Self { d, level, values })
    }

    /// `(∫ |f|^p)^{1/p}`.
    pub fn lp_norm(&self, p: T) -> T {
        let vol = T::lit(2.0).powi(-((self.level as usize * self.d) as i32));
        let s: T = self.values.iter().map(|v| v.abs().powf(p)).sum();
        (vol * s).powf(p.recip())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HaarExpansion<T = f64> {
    pub d: usize,
    pub p: T,
    pub level: u32,
    pub coefficients: FpqVector<T>,
}

fn side(level: u32) -> usize {
    1usize << level
}

/// Position of an axis index in the in-place transform layout.
fn slot(axis: &DyadicAxisIndex) -> usize {
    match *axis {
        DyadicAxisIndex::Zero => 0,
        DyadicAxisIndex::Interval { level, offset } => (1usize << level) + offset as usize,
    }
}

fn axis_of_slot(s: usize) -> DyadicAxisIndex {
    if s == 0 {
        return DyadicAxisIndex::Zero;
    }
    let level = usize::BITS - 1 - s.leading_zeros();
    DyadicAxisIndex::Interval { level, offset: (s - (1usize << level)) as u64 }
}

fn analyze_line<T: Scalar>(line: &mut [T], level: u32, p: T) {
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let mut avg = line.to_vec();
    for j in (0..level).rev() {
        let n = 1usize << j;
        let scale = two.powf(-T::from_u32(j).unwrap() / p) * half;
        for k in 0..n {
            let (a, b) = (avg[2 * k], avg[2 * k + 1]);
            line[n + k] = scale * (a - b);
            avg[k] = half * (a + b);
        }
    }
    line[0] = avg[0];
}

fn synthesize_line<T: Scalar>(line: &mut [T], level: u32, p: T) {
    let two = T::lit(2.0);
    let mut avg = vec![line[0]];
    for j in 0..level {
        let n = 1usize << j;
        let scale = two.powf(T::from_u32(j).unwrap() / p);
        let mut next = Vec::with_capacity(2 * n);
        for k in 0..n {
            let c = scale * line[n + k];
            next.push(avg[k] + c);
            next.push(avg[k] - c);
        }
        avg = next;
    }
    line.copy_from_slice(&avg);
}

/// Applies a 1D transform along every axis of a row-major cube.
fn along_axes<T: Scalar, F: FnMut(&mut [T])>(data: &mut [T], d: usize, level: u32, mut f: F) {
    let n = side(level);
    let mut line = vec![T::zero(); n];
    for axis in 0..d {
        let stride = n.pow((d - 1 - axis) as u32);
        for base in 0..data.len() {
            if (base / stride) % n != 0 {
                continue;
            }
            for (i, x) in line.iter_mut().enumerate() {
                *x = data[base + i * stride];
            }
            f(&mut line);
            for (i, x) in line.iter().enumerate() {
                data[base + i * stride] = *x;
            }
        }
    }
}

/// Haar coefficients `c_I(f) = <f, H_{I,p'}>` of a step function.
pub fn haar_coefficients<T: Scalar>(f: &StepFunction<T>, p: T) -> Result<HaarExpansion<T>> {
    let params = FpqParams::new(p, T::lit(2.0), f.d)?;
    let mut data = f.values.clone();
    along_axes(&mut data, f.d, f.level, |line| analyze_line(line, f.level, p));
    let n = side(f.level);
    let mut entries = BTreeMap::new();
    for (flat, v) in data.into_iter().enumerate() {
        let mut rest = flat;
        let mut axes = vec![DyadicAxisIndex::Zero; f.d];
        for a in (0..f.d).rev() {
            axes[a] = axis_of_slot(rest % n);
            rest /= n;
        }
        entries.insert(Rectangle::new(axes)?, v);
    }
    let coefficients = FpqVector::zero(params).with_entries(entries);
    Ok(HaarExpansion { d: f.d, p, level: f.level, coefficients })
}

/// `Σ c_I H_{I,p}` sampled on the cells of the expansion's grid.
pub fn haar_reconstruct<T: Scalar>(expansion: &HaarExpansion<T>) -> Result<StepFunction<T>> {
    let (d, level) = (expansion.d, expansion.level);
    let n = side(level);
    let mut data = vec![T::zero(); n.pow(d as u32)];
    for (rect, v) in expansion.coefficients.entries() {
        let mut flat = 0;
        for axis in rect.axes() {
            if matches!(*axis, DyadicAxisIndex::Interval { level: l, .. } if l >= level) {
                return Err(Error::InvalidIndex(format!("{rect} is finer than the grid")));
            }
            flat = flat * n + slot(axis);
        }
        data[flat] = *v;
    }
    along_axes(&mut data, d, level, |line| synthesize_line(line, level, expansion.p));
    StepFunction::new(d, level, data)
}

/// `⦀f⦀ = ‖S(f)‖_{L^p}`, the f_{p,2} norm of the coefficients.
pub fn haar_lp_norm<T: Scalar>(expansion: &HaarExpansion<T>) -> Result<T> {
    expansion.coefficients.norm()
}

/// `H_{I,p}` sampled on a grid of the given level.
pub fn haar_function<T: Scalar>(rect: &Rectangle, p: T, level: u32) -> Result<StepFunction<T>> {
    let params = FpqParams::new(p, T::lit(2.0), rect.dim())?;
    let coefficients = FpqVector::from_entries(params, [(rect.clone(), T::one())])?;
    haar_reconstruct(&HaarExpansion { d: rect.dim(), p, level, coefficients })
}
