//! The two rectangle families behind the log-factor lower bound, with
//! closed-form evaluators. `A_n` tiles `(0,1/2)^d` with every shape of
//! measure `2^{-n}`, `B_m` tiles `(1/2,1)^d` with one fixed shape.

use std::collections::BTreeSet;

use super::{DyadicAxisIndex, FpqParams, Rectangle};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Number of compositions of `n` into `d` positive parts, `C(n-1, d-1)`.
pub fn comps(n: u32, d: usize) -> u128 {
    if d == 0 || (n as usize) < d {
        return 0;
    }
    let (top, k) = ((n - 1) as u128, (d - 1) as u128);
    let mut c = 1u128;
    for i in 0..k {
        c = c * (top - i) / (i + 1);
    }
    c
}

/// All compositions of `n` into `d` positive parts, lexicographic.
pub fn compositions(n: u32, d: usize) -> Vec<Vec<u32>> {
    fn rec(rest: u32, parts: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 1 {
            prefix.push(rest);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 1..=rest.saturating_sub(parts as u32 - 1) {
            prefix.push(first);
            rec(rest - first, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if d >= 1 && n as usize >= d {
        rec(n, d, &mut Vec::new(), &mut out);
    }
    out
}

/// `|A_n| = comps(n,d) 2^{n-d}`.
pub fn an_len(n: u32, d: usize) -> u128 {
    comps(n, d) << (n as usize - d)
}

/// `|B_m| = Π 2^{m_i - 1}`.
pub fn bm_len(m_vec: &[u32]) -> u128 {
    1u128 << m_vec.iter().map(|&m| m as usize - 1).sum::<usize>()
}

fn product(axes_choices: Vec<Vec<DyadicAxisIndex>>, out: &mut BTreeSet<Rectangle>) {
    let mut idx = vec![0usize; axes_choices.len()];
    loop {
        let axes = idx.iter().zip(&axes_choices).map(|(&i, c)| c[i]).collect();
        out.insert(Rectangle::new(axes).expect("nonempty"));
        let mut a = idx.len();
        loop {
            if a == 0 {
                return;
            }
            a -= 1;
            idx[a] += 1;
            if idx[a] < axes_choices[a].len() {
                break;
            }
            idx[a] = 0;
        }
    }
}

/// `A_n`: rectangles of measure `2^{-n}` inside `[0,1/2]^d`.
pub fn build_an<T: Scalar>(params: &FpqParams<T>, n: u32) -> Result<BTreeSet<Rectangle>> {
    let d = params.d();
    if (n as usize) < d {
        return Err(Error::InvalidParams(format!("A_n needs n >= d, got n={n}, d={d}")));
    }
    let mut out = BTreeSet::new();
    for levels in compositions(n, d) {
        let choices = levels
            .iter()
            .map(|&l| (0..1u64 << (l - 1)).map(|k| DyadicAxisIndex::Interval { level: l, offset: k }).collect())
            .collect();
        product(choices, &mut out);
    }
    Ok(out)
}

/// `B_m`: rectangles inside `[1/2,1]^d` with side `2^{-m_i}` on axis `i`.
pub fn build_bm<T: Scalar>(params: &FpqParams<T>, m_vec: &[u32]) -> Result<BTreeSet<Rectangle>> {
    if m_vec.len() != params.d() || m_vec.iter().any(|&m| m == 0) {
        return Err(Error::InvalidParams("B_m needs d positive levels".into()));
    }
    let mut out = BTreeSet::new();
    let choices = m_vec
        .iter()
        .map(|&l| {
            let half = 1u64 << (l - 1);
            (half..2 * half).map(|k| DyadicAxisIndex::Interval { level: l, offset: k }).collect()
        })
        .collect();
    product(choices, &mut out);
    Ok(out)
}

/// Closed-form norm of `a 1_{A_n} + b 1_{B_m}`, with `m = Σ m_i`.
///
/// On `(0,1/2)^d` every point lies in `comps(n,d)` rectangles of `A_n`; on
/// `(1/2,1)^d` in exactly one rectangle of `B_m`.
pub fn structured_norm<T: Scalar>(params: &FpqParams<T>, a: T, n: u32, b: T, m_vec: &[u32]) -> T {
    let m: u32 = m_vec.iter().sum();
    let (xa, xb) = structured_parts(params, a, n, b, m);
    (xa + xb).powf(params.p().recip())
}

/// `(‖a 1_{A_n}‖^p, ‖b 1_{B_m}‖^p)` with `m = Σ m_i`.
pub fn structured_parts<T: Scalar>(params: &FpqParams<T>, a: T, n: u32, b: T, m: u32) -> (T, T) {
    let (p, q) = (params.p(), params.q());
    let two = T::lit(2.0);
    let half_cube = two.powi(-(params.d() as i32));
    let c = T::from_u128(comps(n, params.d())).unwrap();
    let xa = half_cube * c.powf(p / q) * a.abs().powf(p) * two.powi(n as i32);
    let xb = half_cube * b.abs().powf(p) * two.powi(m as i32);
    (xa, xb)
}

/// Norming coefficients `(on A_n, on B_m)` of `a 1_{A_n} + b 1_{B_m}` scaled by
/// `‖x‖^{p-1}`: `a^{p-1} comps^{(p-q)/q}` and `b^{p-1}`. Removing tiles of
/// `B_m` leaves both unchanged.
pub fn structured_coeffs_scaled<T: Scalar>(params: &FpqParams<T>, a: T, n: u32, b: T) -> (T, T) {
    let (p, q) = (params.p(), params.q());
    let c = T::from_u128(comps(n, params.d())).unwrap();
    let on_a = a.abs().powf(p - T::one()) * c.powf((p - q) / q);
    let on_b = b.abs().powf(p - T::one());
    (on_a, on_b)
}

/// Block weight `b` balancing the two families, `b^{p-1} = a^{p-1} comps^{(p-q)/q}`,
/// raised by the relative `bias` so that `B_m` is strictly preferred.
pub fn balanced_b<T: Scalar>(params: &FpqParams<T>, a: T, n: u32, bias: T) -> T {
    let (on_a, _) = structured_coeffs_scaled(params, a, n, T::zero());
    (on_a * (T::one() + bias)).powf((params.p() - T::one()).recip())
}
