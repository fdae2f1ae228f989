use std::collections::BTreeSet;

use approx::assert_relative_eq;
use proptest::prelude::*;
use wcga::lpq::{build_psi_vector, ix, psi_blocks, LpqIndex, LpqParams, LpqVector, PsiVariant};
use wcga::{Error, SpaceVector};

fn params(p: f64, q: f64) -> LpqParams {
    LpqParams::new(p, q).unwrap()
}

fn vec_of(p: f64, q: f64, entries: &[((u32, u32), f64)]) -> LpqVector {
    LpqVector::from_entries(params(p, q), entries.iter().copied()).unwrap()
}

/// Direct transcription of the mixed norm, no scaling.
fn naive_norm(x: &LpqVector) -> f64 {
    let (p, q) = (x.params().p(), x.params().q());
    let mut rows = std::collections::BTreeMap::<u32, f64>::new();
    for (i, v) in x.entries() {
        *rows.entry(i.row).or_default() += v.abs().powf(q);
    }
    rows.values().map(|s| s.powf(p / q)).sum::<f64>().powf(1.0 / p)
}

#[test]
fn rejects_bad_exponents_and_indices() {
    assert!(LpqParams::new(1.0, 2.0).is_err());
    assert!(LpqParams::new(2.0, f64::INFINITY).is_err());
    assert!(matches!(LpqIndex::new(0, 1), Err(Error::InvalidIndex(_))));
    let dup = LpqVector::from_entries(params(2.0, 2.0), [((1, 1), 1.0), ((1, 1), 2.0)]);
    assert!(dup.is_err());
}

#[test]
fn derived_parameters() {
    let pr = params(4.0, 4.0 / 3.0);
    assert_relative_eq!(pr.p_conj(), 4.0 / 3.0, epsilon = 1e-12);
    assert_relative_eq!(pr.q_conj(), 4.0, epsilon = 1e-12);
    assert_relative_eq!(pr.beta(), 3.0, epsilon = 1e-12);
    assert_relative_eq!(pr.b(), 3.0, epsilon = 1e-12);
    assert_relative_eq!(pr.s(), 4.0, epsilon = 1e-12);
    assert_relative_eq!(pr.c1(), 0.25, epsilon = 1e-12);
    assert_relative_eq!(pr.r(), 0.75, epsilon = 1e-12);
    // α = p'(1/q' - 1/p') recomputed by hand: (4/3)(1/4 - 3/4).
    assert_relative_eq!(pr.alpha_psi(), -2.0 / 3.0, epsilon = 1e-12);
    for &(p, q) in &[(1.5, 3.0), (3.0, 1.2), (2.0, 2.0)] {
        let pr = params(p, q);
        assert!((1.0 / p + 1.0 / pr.p_conj() - 1.0).abs() < 1e-12);
        assert!(pr.beta() >= 1.0 && pr.b() >= 1.0);
    }
}

#[test]
fn norm_examples() {
    assert_eq!(vec_of(3.0, 1.5, &[((1, 1), 1.0)]).norm().unwrap(), 1.0);
    let ind = vec_of(3.0, 1.5, &[((1, 1), 1.0), ((2, 1), 1.0), ((3, 1), 1.0)]);
    assert_relative_eq!(ind.norm().unwrap(), 3f64.powf(1.0 / 3.0), max_relative = 1e-14);
    assert_relative_eq!(vec_of(2.0, 2.0, &[((1, 1), 3.0), ((1, 2), 4.0)]).norm().unwrap(), 5.0, max_relative = 1e-15);
    assert_eq!(LpqVector::zero(params(2.0, 3.0)).norm().unwrap(), 0.0);
}

#[test]
fn row_norm_examples() {
    let x = vec_of(2.0, 2.0, &[((1, 1), 3.0), ((1, 2), 4.0)]);
    assert_relative_eq!(x.row_norm(1), 5.0, max_relative = 1e-15);
    assert_eq!(x.row_norm(7), 0.0);
    let n = 9;
    let row: Vec<_> = (1..=n).map(|k| ((1, k), 1.0)).collect();
    let b = vec_of(2.0, 1.7, &row);
    assert_relative_eq!(b.row_norm(1), (n as f64).powf(1.0 / 1.7), max_relative = 1e-14);
}

#[test]
fn norming_coeff_examples() {
    let e = vec_of(3.0, 1.5, &[((1, 1), 1.0)]);
    assert_relative_eq!(e.norming_coeff(&ix(1, 1)).unwrap(), 1.0, max_relative = 1e-15);
    let x = vec_of(2.0, 2.0, &[((1, 1), 3.0), ((1, 2), 4.0)]);
    assert_relative_eq!(x.norming_coeff(&ix(1, 1)).unwrap(), 0.6, max_relative = 1e-14);
    assert_eq!(x.norming_coeff(&ix(5, 5)).unwrap(), 0.0);
    assert!(matches!(LpqVector::zero(params(2.0, 2.0)).norming_coeff(&ix(1, 1)), Err(Error::ZeroVector)));
}

#[test]
fn psi_vector_has_equal_norming_coefficients() {
    for &(p, q) in &[(4.0, 4.0 / 3.0), (1.5, 3.0), (3.0, 1.5), (2.0, 2.0)] {
        let pr = params(p, q);
        let (m, n) = (7, 5);
        let x = build_psi_vector(pr, m, n, PsiVariant::PConjDominant);
        let norm = x.norm().unwrap();
        let expected = norm.powf(-(p - 1.0));
        for i in x.entries().keys() {
            assert_relative_eq!(x.norming_coeff(i).unwrap(), expected, max_relative = 1e-12);
        }
        let (a, b) = psi_blocks(m, n, PsiVariant::PConjDominant);
        assert_eq!(a.len(), m as usize);
        assert_eq!(b.len(), n as usize);
        assert_eq!(x.support(), a.union(&b).cloned().collect::<BTreeSet<_>>());
    }
}

#[test]
fn psi_vector_at_equal_exponents_is_all_ones() {
    for variant in [PsiVariant::PConjDominant, PsiVariant::QConjDominant] {
        let x = build_psi_vector(params(2.5, 2.5), 4, 3, variant);
        assert!(x.entries().values().all(|v| (*v - 1.0).abs() < 1e-15));
        assert_eq!(x.support_len(), 4 + variant.block_len(3) as usize);
    }
}

#[test]
fn restrict_and_distance() {
    let x = vec_of(2.0, 2.0, &[((1, 1), 3.0), ((1, 2), 4.0)]);
    assert_eq!(x.restrict(&x.support()), x);
    assert!(x.restrict(&BTreeSet::new()).is_zero());
    assert_eq!(x.restrict(&BTreeSet::from([ix(1, 1)])), vec_of(2.0, 2.0, &[((1, 1), 3.0)]));
    assert_relative_eq!(x.dist_to_coord_span(&BTreeSet::from([ix(1, 1)])).unwrap(), 4.0, max_relative = 1e-15);
    let e = vec_of(2.0, 2.0, &[((1, 1), 1.0)]);
    assert_eq!(e.dist_to_coord_span(&BTreeSet::from([ix(1, 1)])).unwrap(), 0.0);
}

#[test]
fn apply_examples() {
    let e11 = vec_of(3.0, 1.5, &[((1, 1), 1.0)]);
    let e22 = vec_of(3.0, 1.5, &[((2, 2), 1.0)]);
    assert_eq!(e11.norming_apply(&e22).unwrap(), 0.0);
    let other = vec_of(2.0, 1.5, &[((1, 1), 1.0)]);
    assert!(matches!(e11.norming_apply(&other), Err(Error::ParamMismatch)));
}

#[test]
fn single_precision_agrees_with_double() {
    let x64 = vec_of(3.0, 1.5, &[((1, 1), 0.5), ((1, 3), -2.0), ((4, 2), 1.25)]);
    let p32 = LpqParams::<f32>::new(3.0, 1.5).unwrap();
    let x32 = LpqVector::from_entries(p32, [((1, 1), 0.5f32), ((1, 3), -2.0), ((4, 2), 1.25)]).unwrap();
    assert_relative_eq!(x32.norm().unwrap() as f64, x64.norm().unwrap(), max_relative = 1e-6);
    let g32 = x32.norming_coeff(&ix(1, 3)).unwrap() as f64;
    assert_relative_eq!(g32, x64.norming_coeff(&ix(1, 3)).unwrap(), max_relative = 1e-5);
}

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.25), Just(1.5), Just(2.0), Just(3.0), Just(4.0), 1.1f64..6.0]
}

fn coefficient() -> impl Strategy<Value = f64> {
    (-3.0f64..3.0, any::<bool>()).prop_map(|(e, s)| if s { 10f64.powf(e) } else { -(10f64.powf(e)) })
}

prop_compose! {
    fn lpq_vector()(p in exponent(), q in exponent(),
                    raw in prop::collection::btree_map((1u32..6, 1u32..6), coefficient(), 1..14)) -> LpqVector {
        LpqVector::from_entries(params(p, q), raw).unwrap()
    }
}

prop_compose! {
    fn lpq_pair()(x in lpq_vector(),
                  raw in prop::collection::btree_map((1u32..6, 1u32..6), coefficient(), 0..14)) -> (LpqVector, LpqVector) {
        let y = LpqVector::from_entries(*x.params(), raw).unwrap();
        (x, y)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn norm_matches_naive_formula(x in lpq_vector()) {
        let n = x.norm().unwrap();
        prop_assert!((n - naive_norm(&x)).abs() <= 1e-12 * n);
    }

    #[test]
    fn norming_identity(x in lpq_vector()) {
        let n = x.norm().unwrap();
        prop_assert!((x.norming_apply(&x).unwrap() - n).abs() <= 1e-10 * n);
    }

    #[test]
    fn functional_bound((x, y) in lpq_pair()) {
        let fy = x.norming_apply(&y).unwrap();
        prop_assert!(fy.abs() <= y.norm().unwrap() * (1.0 + 1e-10) + 1e-300);
    }

    #[test]
    fn functional_matches_closed_form((x, y) in lpq_pair()) {
        // ‖x‖^{-(p-1)} Σ_j Δ_j^{p-q} Σ_k |x_jk|^{q-2} x_jk y_jk
        let (p, q) = (x.params().p(), x.params().q());
        let n = naive_norm(&x);
        let mut s = 0.0;
        for (i, v) in x.entries() {
            let d = x.row_norm(i.row);
            s += d.powf(p - q) * v.abs().powf(q - 2.0) * v * y.get(i);
        }
        let expected = s / n.powf(p - 1.0);
        let got = x.norming_apply(&y).unwrap();
        prop_assert!((got - expected).abs() <= 1e-9 * (1.0 + expected.abs()) * y.norm().unwrap().max(1.0));
    }

    #[test]
    fn equal_exponents_collapse(raw in prop::collection::btree_map((1u32..6, 1u32..6), coefficient(), 1..14),
                                p in 1.1f64..6.0) {
        let x = LpqVector::from_entries(params(p, p), raw).unwrap();
        let plain = x.entries().values().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p);
        let n = x.norm().unwrap();
        prop_assert!((n - plain).abs() <= 1e-12 * plain);
    }

    #[test]
    fn monotone_lattice(x in lpq_vector(), damp in prop::collection::vec(0.0f64..=1.0, 14)) {
        let damped = x.with_entries(
            x.entries().iter().zip(damp.iter().cycle()).map(|(( i, v), d)| (*i, v * d)).collect());
        prop_assert!(damped.norm().unwrap() <= x.norm().unwrap() * (1.0 + 1e-14));
    }

    #[test]
    fn norming_coefficient_at_most_one(x in lpq_vector()) {
        for c in x.norming_coeffs().unwrap().values() {
            prop_assert!(*c <= 1.0 + 1e-12);
        }
    }
}
