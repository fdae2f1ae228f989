use crate::scalar::Scalar;

/// Discrete Lorentz quasi-norm `(Σ_j (2^{j/p} x*_{2^j})^q)^{1/q}`, where `x*`
/// is the decreasing rearrangement of `|x|` indexed from 1.
pub fn lorentz_quasinorm<T: Scalar>(coeffs: &[T], p: T, q: T) -> T {
    let mut mags: Vec<T> = coeffs.iter().map(|c| c.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).expect("finite coefficients"));
    let two = T::lit(2.0);
    let mut sum = T::zero();
    let mut j = 0u32;
    while let Some(&x) = mags.get((1usize << j) - 1) {
        sum = sum + (two.powf(T::from_u32(j).unwrap() / p) * x).powf(q);
        j += 1;
    }
    sum.powf(q.recip())
}
