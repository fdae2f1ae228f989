use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Deepest supported level; endpoints stay exact integers over `2^MAX_LEVEL`.
pub const MAX_LEVEL: u32 = 60;

/// One axis of a dyadic rectangle: either the constant direction covering
/// all of `[0,1)`, or the interval `2^{-j}[k, k+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DyadicAxisIndex {
    Zero,
    Interval { level: u32, offset: u64 },
}

impl DyadicAxisIndex {
    pub fn interval(level: u32, offset: u64) -> Result<Self> {
        if level > MAX_LEVEL {
            return Err(Error::InvalidIndex(format!("level {level} exceeds {MAX_LEVEL}")));
        }
        if offset >= 1u64 << level {
            return Err(Error::InvalidIndex(format!("offset {offset} out of range at level {level}")));
        }
        Ok(Self::Interval { level, offset })
    }

    /// Level contributing to the measure; the constant direction has length 1.
    pub fn level(&self) -> u32 {
        match self {
            Self::Zero => 0,
            Self::Interval { level, .. } => *level,
        }
    }

    /// Endpoints as integer numerators over `2^den_level`.
    pub fn endpoints(&self, den_level: u32) -> (u64, u64) {
        match *self {
            Self::Zero => (0, 1u64 << den_level),
            Self::Interval { level, offset } => {
                let shift = den_level - level;
                (offset << shift, (offset + 1) << shift)
            }
        }
    }

    pub fn contains(&self, other: &Self) -> bool {
        match (*self, *other) {
            (Self::Zero, _) => true,
            (Self::Interval { .. }, Self::Zero) => false,
            (Self::Interval { level: a, offset: k }, Self::Interval { level: b, offset: l }) => {
                b >= a && (l >> (b - a)) == k
            }
        }
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.contains(other) || other.contains(self)
    }
}

impl fmt::Display for DyadicAxisIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "zero"),
            Self::Interval { level, offset } => write!(f, "{level}:{offset}"),
        }
    }
}

/// Product of `d` dyadic axis indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rectangle {
    axes: Vec<DyadicAxisIndex>,
}

impl Rectangle {
    pub fn new(axes: Vec<DyadicAxisIndex>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidIndex("rectangle needs at least one axis".into()));
        }
        Ok(Self { axes })
    }

    /// Rectangle from `(level, offset)` pairs, one per axis.
    pub fn from_levels(parts: &[(u32, u64)]) -> Result<Self> {
        let axes = parts
            .iter()
            .map(|&(j, k)| DyadicAxisIndex::interval(j, k))
            .collect::<Result<Vec<_>>>()?;
        Self::new(axes)
    }

    /// The full cube `[0,1)^d` in the constant direction on every axis.
    pub fn zero(d: usize) -> Self {
        Self { axes: vec![DyadicAxisIndex::Zero; d] }
    }

    pub fn axes(&self) -> &[DyadicAxisIndex] {
        &self.axes
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// `-log2 |I|`.
    pub fn level_sum(&self) -> u32 {
        self.axes.iter().map(DyadicAxisIndex::level).sum()
    }

    pub fn measure<T: Scalar>(&self) -> T {
        T::lit(2.0).powi(-(self.level_sum() as i32))
    }

    pub fn contains(&self, other: &Self) -> bool {
        self.axes.iter().zip(&other.axes).all(|(a, b)| a.contains(b))
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.axes.iter().zip(&other.axes).all(|(a, b)| a.intersects(b))
    }
}

impl fmt::Display for Rectangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, a) in self.axes.iter().enumerate() {
            if i > 0 {
                write!(f, " x ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "]")
    }
}
