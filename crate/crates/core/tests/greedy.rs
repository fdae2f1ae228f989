use std::collections::BTreeSet;

use approx::assert_relative_eq;
use proptest::prelude::*;
use wcga::fpq::{DyadicAxisIndex, FpqParams, FpqVector, Rectangle};
use wcga::greedy::{
    recovery_steps, select_index, sigma_n_bruteforce, sigma_n_greedy_upper, tga_run, wcga_run, wcga_run_dictionary,
    ChebyshevMode, SigmaMethod, Termination,
};
use wcga::lpq::{build_psi_vector, ix, psi_blocks, LpqParams, LpqVector, PsiVariant};
use wcga::{Error, GreedyConfig, SpaceVector, TieBreak};

fn lpq(p: f64, q: f64, entries: &[((u32, u32), f64)]) -> LpqVector {
    LpqVector::from_entries(LpqParams::new(p, q).unwrap(), entries.iter().copied()).unwrap()
}

fn witness() -> LpqVector {
    lpq(1.1, 2.0, &[((1, 1), 1.0), ((1, 2), 1.0), ((2, 1), 1.0)])
}

#[test]
fn single_element_takes_one_step() {
    let f = lpq(3.0, 1.5, &[((2, 7), -4.0)]);
    let t = wcga_run(&f, &GreedyConfig::default(), None, None).unwrap();
    assert_eq!(t.selected, vec![ix(2, 7)]);
    assert_eq!(t.residual_norms, vec![4.0, 0.0]);
    assert_eq!(t.terminated, Termination::ZeroResidual);
}

#[test]
fn zero_input_gives_empty_trace() {
    let f = LpqVector::zero(LpqParams::new(2.0, 2.0).unwrap());
    let t = wcga_run(&f, &GreedyConfig::default(), None, None).unwrap();
    assert!(t.selected.is_empty());
    assert_eq!(t.residual_norms, vec![0.0]);
}

#[test]
fn config_rejects_bad_tau() {
    let f = lpq(2.0, 2.0, &[((1, 1), 1.0)]);
    for tau in [0.0, -0.5, 1.5, f64::NAN] {
        let cfg = GreedyConfig { tau, ..GreedyConfig::default() };
        assert!(matches!(wcga_run(&f, &cfg, None, None), Err(Error::InvalidParams(_))));
    }
}

#[test]
fn tie_break_policies() {
    let coeffs = vec![(1u32, 0.5), (2, 0.5 * (1.0 - 1e-14)), (3, 0.5), (4, 0.1)];
    let a = BTreeSet::from([3u32]);
    let pick = |tb, a: Option<&BTreeSet<u32>>| select_index(&coeffs, 1.0, tb, a).unwrap().0;
    assert_eq!(pick(TieBreak::Lexicographic, None), 1);
    assert_eq!(pick(TieBreak::PreferBlockA, Some(&a)), 3);
    assert_eq!(pick(TieBreak::PreferBlockB, Some(&a)), 1);
    // Nothing of the preferred block is eligible: fall back.
    let only_a = BTreeSet::from([4u32]);
    assert_eq!(pick(TieBreak::PreferBlockA, Some(&only_a)), 1);
    assert_eq!(select_index(&coeffs, 0.15, TieBreak::PreferBlockA, Some(&only_a)).unwrap().0, 4);
    assert!(select_index::<u32, f64>(&[(1, 0.0)], 1.0, TieBreak::Lexicographic, None).is_none());
}

#[test]
fn psi_vector_prefer_a_exhausts_a_first() {
    for &(p, q) in &[(1.5, 3.0), (2.0, 4.0), (1.25, 1.5)] {
        let params = LpqParams::new(p, q).unwrap();
        let (m, n) = (6, 4);
        let x = build_psi_vector(params, m, n, PsiVariant::PConjDominant);
        let (a, b) = psi_blocks(m, n, PsiVariant::PConjDominant);
        let cfg = GreedyConfig { tie_break: TieBreak::PreferBlockA, ..GreedyConfig::default() };
        let t = wcga_run(&x, &cfg, None, Some(&a)).unwrap();
        let first: BTreeSet<_> = t.selected[..m as usize].iter().copied().collect();
        assert_eq!(first, a);
        let rest: BTreeSet<_> = t.selected[m as usize..].iter().copied().collect();
        assert_eq!(rest, b);
    }
}

#[test]
fn tga_examples() {
    let f = lpq(2.0, 3.0, &[((1, 1), 3.0), ((1, 2), -5.0), ((2, 1), 1.0), ((3, 3), 4.0)]);
    let t = tga_run(&f, 2).unwrap();
    assert_eq!(t.selected, vec![ix(1, 2), ix(3, 3)]);
    assert_eq!(t.terminated, Termination::MaxSteps);
    let all = tga_run(&f, 10).unwrap();
    assert_eq!(all.final_norm(), 0.0);
    assert_eq!(all.terminated, Termination::ZeroResidual);
}

#[test]
fn sigma_witness_beats_largest_coefficients() {
    let f = witness();
    let (sigma, s) = sigma_n_bruteforce(&f, 1).unwrap();
    assert_relative_eq!(sigma, 2f64.sqrt(), max_relative = 1e-14);
    assert_eq!(s, BTreeSet::from([ix(2, 1)]));
    let upper = sigma_n_greedy_upper(&f, 1).unwrap();
    assert_relative_eq!(upper, 2f64.powf(1.0 / 1.1), max_relative = 1e-14);
    assert!(sigma < upper);
    assert_eq!(sigma_n_bruteforce(&f, 3).unwrap().0, 0.0);
    assert_eq!(sigma_n_greedy_upper(&f, 5).unwrap(), 0.0);
}

#[test]
fn sigma_guard_trips() {
    let entries: Vec<_> = (1..=23).map(|k| ((1, k), 1.0)).collect();
    let f = lpq(2.0, 2.0, &entries);
    assert!(matches!(sigma_n_bruteforce(&f, 3), Err(Error::SupportTooLarge { size: 23, .. })));
    let cfg = GreedyConfig::default();
    assert!(recovery_steps(&f, 3, 1.0, &cfg, None, None).is_err());
    let r = recovery_steps(&f, 3, 1.0, &cfg, None, Some(20f64.sqrt())).unwrap();
    assert_eq!(r.sigma_method, SigmaMethod::Override);
    assert_eq!(r.steps_needed, Some(3));
}

#[test]
fn recovery_of_sparse_vector_needs_at_most_n_steps() {
    let f = lpq(3.0, 1.5, &[((1, 1), 3.0), ((1, 2), -5.0), ((2, 1), 1.0)]);
    let r = recovery_steps(&f, 3, 1.0, &GreedyConfig::default(), None, None).unwrap();
    assert_eq!(r.sigma_n, 0.0);
    assert_eq!(r.steps_needed, Some(3));
    assert!(recovery_steps(&f, 3, 0.5, &GreedyConfig::default(), None, None).is_err());
}

#[test]
fn dictionary_run_matches_canonical_run() {
    let f = lpq(3.0, 1.5, &[((1, 1), 3.0), ((1, 2), -5.0), ((2, 1), 1.0)]);
    let dict: Vec<LpqVector> = f.entries().keys().map(|i| f.unit(*i)).collect();
    let d = wcga_run_dictionary(&f, &dict, &GreedyConfig::default()).unwrap();
    let c = wcga_run(&f, &GreedyConfig::default(), None, None).unwrap();
    let keys: Vec<_> = f.entries().keys().copied().collect();
    assert_eq!(d.selected.iter().map(|j| keys[*j]).collect::<Vec<_>>(), c.selected);
    for (a, b) in d.residual_norms.iter().zip(&c.residual_norms) {
        assert!((a - b).abs() <= 1e-9 * c.residual_norms[0]);
    }
}

#[test]
fn iterative_mode_matches_lattice_mode() {
    let f = lpq(1.25, 3.0, &[((1, 1), 3.0), ((1, 2), -5.0), ((2, 1), 1.0), ((2, 4), 0.25), ((5, 2), 2.0)]);
    let exact = wcga_run(&f, &GreedyConfig::default(), None, None).unwrap();
    let cfg = GreedyConfig { chebyshev_mode: ChebyshevMode::Iterative, store_approximants: true, ..GreedyConfig::default() };
    let it = wcga_run(&f, &cfg, None, None).unwrap();
    assert_eq!(exact.selected, it.selected);
    for (a, b) in exact.residual_norms.iter().zip(&it.residual_norms) {
        assert!((a - b).abs() <= 1e-8 * exact.residual_norms[0]);
    }
    assert_eq!(it.approximants.as_ref().unwrap().len(), it.steps());
}

#[test]
fn trace_json_shape() {
    let t = wcga_run(&witness(), &GreedyConfig::default(), None, None).unwrap();
    let v = wcga::io::trace_to_json(&t);
    assert_eq!(v["terminated"], "zero_residual");
    assert_eq!(v["selected"].as_array().unwrap().len(), 3);
    assert_eq!(v["residual_norms"].as_array().unwrap().len(), 4);
}

fn coefficient() -> impl Strategy<Value = f64> {
    (-3.0f64..3.0, any::<bool>()).prop_map(|(e, s)| if s { 10f64.powf(e) } else { -(10f64.powf(e)) })
}

fn exponent() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![1.25, 1.5, 2.0, 3.0, 4.0])
}

prop_compose! {
    fn lpq_vec(max: usize)(p in exponent(), q in exponent(),
                           raw in prop::collection::btree_map((1u32..6, 1u32..6), coefficient(), 1..max)) -> LpqVector {
        LpqVector::from_entries(LpqParams::new(p, q).unwrap(), raw).unwrap()
    }
}

fn axis() -> impl Strategy<Value = DyadicAxisIndex> {
    prop_oneof![
        1 => Just(DyadicAxisIndex::Zero),
        6 => (0u32..=4).prop_flat_map(|j| (Just(j), 0..(1u64 << j)))
            .prop_map(|(j, k)| DyadicAxisIndex::interval(j, k).unwrap()),
    ]
}

prop_compose! {
    fn fpq_vec(max: usize)(p in exponent(), q in exponent(), d in 1usize..=2)
                          (raw in prop::collection::btree_map(
                               prop::collection::vec(axis(), d).prop_map(|a| Rectangle::new(a).unwrap()),
                               coefficient(), 1..max),
                           p in Just(p), q in Just(q), d in Just(d)) -> FpqVector {
        FpqVector::from_entries(FpqParams::new(p, q, d).unwrap(), raw).unwrap()
    }
}

fn check_trace<V: SpaceVector<f64>>(f: &V, cfg: &GreedyConfig) -> Result<(), TestCaseError> {
    let t = wcga_run(f, cfg, None, None).unwrap();
    let distinct: BTreeSet<_> = t.selected.iter().cloned().collect();
    prop_assert_eq!(distinct.len(), t.selected.len());
    prop_assert_eq!(t.residual_norms[0], f.norm().unwrap());
    prop_assert!(t.residual_norms.windows(2).all(|w| w[1] <= w[0] + 1e-12 * t.residual_norms[0]));
    for s in &t.selections {
        prop_assert!(s.coeff >= cfg.tau * s.sup - 1e-12);
    }
    if cfg.tau == 1.0 {
        prop_assert_eq!(t.steps(), f.support_len());
        prop_assert!(t.final_norm() <= 1e-10 * t.residual_norms[0]);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn lpq_traces_are_sound(f in lpq_vec(13), tau in prop::sample::select(vec![1.0, 0.9, 0.5, 0.1])) {
        check_trace(&f, &GreedyConfig { tau, ..GreedyConfig::default() })?;
    }

    #[test]
    fn fpq_traces_are_sound(f in fpq_vec(9), tau in prop::sample::select(vec![1.0, 0.7, 0.3])) {
        check_trace(&f, &GreedyConfig { tau, ..GreedyConfig::default() })?;
    }

    #[test]
    fn bruteforce_never_exceeds_greedy_upper(f in lpq_vec(12), n in 0usize..12) {
        let (s, witness) = sigma_n_bruteforce(&f, n).unwrap();
        prop_assert!(s <= sigma_n_greedy_upper(&f, n).unwrap() * (1.0 + 1e-12));
        prop_assert_eq!(witness.len(), n.min(f.support_len()));
        prop_assert!((f.zeroed_on(&witness).norm().unwrap() - s).abs() <= 1e-12 * f.norm().unwrap());
    }

    #[test]
    fn bruteforce_never_exceeds_greedy_upper_fpq(f in fpq_vec(9), n in 0usize..9) {
        let (s, _) = sigma_n_bruteforce(&f, n).unwrap();
        prop_assert!(s <= sigma_n_greedy_upper(&f, n).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn tga_equals_wcga_on_disjoint_rows(p in exponent(), q in exponent(),
                                        vals in prop::collection::btree_map(1u32..30, coefficient(), 1..12),
                                        cols in prop::collection::vec(1u32..5, 12)) {
        let entries: Vec<_> = vals.iter().zip(&cols).map(|((r, v), c)| ((*r, *c), *v)).collect();
        let f = LpqVector::from_entries(LpqParams::new(p, q).unwrap(), entries).unwrap();
        let w = wcga_run(&f, &GreedyConfig::default(), None, None).unwrap();
        let t = tga_run(&f, f.support_len()).unwrap();
        for k in 1..=w.steps() {
            let a: BTreeSet<_> = w.selected[..k].iter().collect();
            let b: BTreeSet<_> = t.selected[..k].iter().collect();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn tga_equals_wcga_on_disjoint_rectangles(p in exponent(), q in exponent(),
                                              vals in prop::collection::vec(coefficient(), 1..9)) {
        // Pairwise disjoint level-3 intervals in one dimension.
        let f = FpqVector::from_entries(FpqParams::new(p, q, 1).unwrap(),
            vals.iter().enumerate().map(|(k, v)| (Rectangle::from_levels(&[(3, k as u64)]).unwrap(), *v))).unwrap();
        let w = wcga_run(&f, &GreedyConfig::default(), None, None).unwrap();
        let t = tga_run(&f, f.support_len()).unwrap();
        for k in 1..=w.steps() {
            let a: BTreeSet<_> = w.selected[..k].iter().collect();
            let b: BTreeSet<_> = t.selected[..k].iter().collect();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn decay_slope_is_negative_before_recovery(f in lpq_vec(13), noise in prop::collection::vec(-1.0f64..1.0, 6)) {
        // Sparse part plus a perturbation on fresh rows at 1e-6 of its size.
        let scale = 1e-6 * f.norm().unwrap();
        let extra: Vec<_> = noise.iter().enumerate().map(|(k, v)| (ix(100 + k as u32, 1), scale * v)).collect();
        let mut entries = f.entries().clone();
        entries.extend(extra);
        let g = f.with_entries(entries);
        let t = wcga_run(&g, &GreedyConfig::default(), None, None).unwrap();
        let window = &t.residual_norms[..=f.support_len()];
        prop_assume!(window.len() >= 3);
        let pts: Vec<(f64, f64)> = window.iter().enumerate().map(|(i, r)| (i as f64, r.ln())).collect();
        let n = pts.len() as f64;
        let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
        let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
            / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        prop_assert!(slope < 0.0);
    }
}
