use std::collections::BTreeSet;

use approx::assert_relative_eq;
use proptest::prelude::*;
use wcga::fpq::structured::{
    an_len, balanced_b, bm_len, build_an, build_bm, comps, compositions, structured_coeffs_scaled, structured_norm,
};
use wcga::fpq::{democracy_sum, DyadicAxisIndex, FpqParams, FpqVector, Rectangle, RefinementGrid};
use wcga::lorentz::lorentz_quasinorm;
use wcga::{Error, SpaceVector};

fn params(p: f64, q: f64, d: usize) -> FpqParams {
    FpqParams::new(p, q, d).unwrap()
}

fn iv(j: u32, k: u64) -> DyadicAxisIndex {
    DyadicAxisIndex::interval(j, k).unwrap()
}

fn rect(parts: &[(u32, u64)]) -> Rectangle {
    Rectangle::from_levels(parts).unwrap()
}

/// Norm by brute force on the uniform grid of side `2^-L`, L the deepest level.
fn uniform_grid_norm(x: &FpqVector) -> f64 {
    let (p, q, d) = (x.params().p(), x.params().q(), x.params().d());
    let depth = x.entries().keys().flat_map(|r| r.axes().iter().map(|a| a.level())).max().unwrap_or(0);
    let n = 1u64 << depth;
    let cells = n.pow(d as u32);
    let vol = 1.0 / cells as f64;
    let mut total = 0.0;
    for flat in 0..cells {
        let mut coords = vec![0u64; d];
        let mut rest = flat;
        for a in (0..d).rev() {
            coords[a] = rest % n;
            rest /= n;
        }
        let mut sq = 0.0;
        for (r, v) in x.entries() {
            let inside = r.axes().iter().zip(&coords).all(|(axis, &c)| match *axis {
                DyadicAxisIndex::Zero => true,
                DyadicAxisIndex::Interval { level, offset } => (c >> (depth - level)) == offset,
            });
            if inside {
                let m: f64 = r.measure();
                sq += (v.abs() * m.powf(-1.0 / p)).powf(q);
            }
        }
        total += vol * sq.powf(p / q);
    }
    total.powf(1.0 / p)
}

#[test]
fn axis_index_validation() {
    assert!(DyadicAxisIndex::interval(2, 4).is_err());
    assert!(DyadicAxisIndex::interval(2, 3).is_ok());
    let x = FpqVector::from_entries(params(2.0, 2.0, 2), [(rect(&[(1, 0)]), 1.0)]);
    assert!(matches!(x, Err(Error::InvalidIndex(_))));
}

#[test]
fn single_rectangle_has_unit_norm() {
    for r in [rect(&[(3, 5), (0, 0)]), rect(&[(7, 100), (2, 1)]), Rectangle::zero(2)] {
        let x = FpqVector::from_entries(params(1.7, 3.0, 2), [(r.clone(), 1.0)]).unwrap();
        assert_relative_eq!(x.norm().unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(x.norming_coeff(&r).unwrap(), 1.0, max_relative = 1e-14);
    }
}

#[test]
fn disjoint_rectangles_split_the_integral() {
    let (a, b) = (2.5, -0.75);
    let (p, q) = (3.0, 1.4);
    let x = FpqVector::from_entries(params(p, q, 1), [(rect(&[(2, 0)]), a), (rect(&[(3, 7)]), b)]).unwrap();
    let expected = (a.abs().powf(p) + b.abs().powf(p)).powf(1.0 / p);
    assert_relative_eq!(x.norm().unwrap(), expected, max_relative = 1e-14);
    let n = x.norm().unwrap();
    assert_relative_eq!(x.norming_coeff(&rect(&[(2, 0)])).unwrap(), (a.abs() / n).powf(p - 1.0), max_relative = 1e-13);
    let dropped = x.dist_to_coord_span(&BTreeSet::from([rect(&[(2, 0)])])).unwrap();
    assert_relative_eq!(dropped, (n.powf(p) - a.abs().powf(p)).powf(1.0 / p), max_relative = 1e-13);
}

#[test]
fn nested_pair_hand_integral() {
    for &(p, q) in &[(2.0, 2.0), (1.5, 3.0), (4.0, 1.25)] {
        let x = FpqVector::from_entries(params(p, q, 1), [(rect(&[(0, 0)]), 1.0), (rect(&[(1, 0)]), 1.0)]).unwrap();
        let expected = (0.5 * (1.0 + 2f64.powf(q / p)).powf(p / q) + 0.5).powf(1.0 / p);
        assert_relative_eq!(x.norm().unwrap(), expected, max_relative = 1e-14);
    }
}

#[test]
fn zero_axis_is_distinct_from_level_zero_interval() {
    let z = Rectangle::new(vec![DyadicAxisIndex::Zero]).unwrap();
    let full = rect(&[(0, 0)]);
    assert_ne!(z, full);
    let x = FpqVector::from_entries(params(2.0, 2.0, 1), [(z, 1.0), (full, 1.0)]).unwrap();
    assert_relative_eq!(x.norm().unwrap(), 2f64.sqrt(), max_relative = 1e-15);
}

#[test]
fn grid_guard_trips() {
    let mut entries = Vec::new();
    for k in 0..4000u64 {
        entries.push((rect(&[(12, k), (12, 4095 - k)]), 1.0));
    }
    let x = FpqVector::from_entries(params(2.0, 2.0, 2), entries).unwrap();
    assert!(matches!(x.norm(), Err(Error::GridBudgetExceeded { .. })));
}

#[test]
fn grid_cells_partition_the_cube() {
    let rects = [rect(&[(2, 1), (0, 0)]), rect(&[(3, 6), (4, 9)])];
    let grid = RefinementGrid::new(2, rects.iter()).unwrap();
    let total: f64 = grid.volumes::<f64>().iter().sum();
    assert_relative_eq!(total, 1.0, max_relative = 1e-15);
    assert_eq!(grid.breakpoints(0), &[0, 2, 4, 6, 7, 8]);
}

#[test]
fn democracy_examples() {
    let pr = params(2.5, 1.5, 2);
    assert_relative_eq!(democracy_sum(pr, &BTreeSet::from([rect(&[(2, 1), (3, 3)])])).unwrap(), 1.0, max_relative = 1e-14);
    let disjoint: BTreeSet<_> = (0..8).map(|k| rect(&[(3, k), (0, 0)])).collect();
    assert_relative_eq!(democracy_sum(pr, &disjoint).unwrap(), 8f64.powf(1.0 / 2.5), max_relative = 1e-13);
}

#[test]
fn an_enumeration_matches_counts() {
    // Exhaustive oracle: every rectangle of measure 2^-n inside [0,1/2]^d.
    for d in 1..=2usize {
        for n in d as u32..=6 {
            let pr = params(2.0, 2.0, d);
            let set = build_an(&pr, n).unwrap();
            let mut brute = BTreeSet::new();
            if d == 1 {
                for k in 0..(1u64 << n) {
                    if (k + 1) << 1 <= 1 << n {
                        brute.insert(rect(&[(n, k)]));
                    }
                }
            } else {
                for l1 in 0..=n {
                    let l2 = n - l1;
                    for k1 in 0..(1u64 << l1) {
                        for k2 in 0..(1u64 << l2) {
                            if (k1 + 1) << 1 <= 1 << l1 && (k2 + 1) << 1 <= 1 << l2 {
                                brute.insert(rect(&[(l1, k1), (l2, k2)]));
                            }
                        }
                    }
                }
            }
            assert_eq!(set, brute, "d={d}, n={n}");
            assert_eq!(set.len() as u128, an_len(n, d));
        }
    }
    assert_eq!(build_an(&params(2.0, 2.0, 1), 5).unwrap().len(), 16);
    assert_eq!(build_an(&params(2.0, 2.0, 2), 2).unwrap().len(), 1);
    assert_eq!(comps(7, 3), 15);
    assert_eq!(compositions(4, 2), vec![vec![1, 3], vec![2, 2], vec![3, 1]]);
}

#[test]
fn bm_enumeration() {
    let pr = params(2.0, 2.0, 1);
    let b = build_bm(&pr, &[3]).unwrap();
    let expected: BTreeSet<_> = (4..8).map(|k| rect(&[(3, k)])).collect();
    assert_eq!(b, expected);
    assert_eq!(bm_len(&[3]), 4);
    let b2 = build_bm(&params(2.0, 2.0, 2), &[2, 3]).unwrap();
    assert_eq!(b2.len() as u128, bm_len(&[2, 3]));
    assert!(b2.iter().all(|r| r.level_sum() == 5));
}

#[test]
fn structured_norm_matches_grid() {
    for d in 1..=2usize {
        for &(p, q) in &[(1.5, 2.0), (3.0, 1.5), (2.0, 2.0)] {
            let pr = params(p, q, d);
            for n in d as u32..=8 {
                let m_vec = vec![2; d];
                let (a, b) = (1.3, -0.4);
                let mut entries: Vec<_> = build_an(&pr, n).unwrap().into_iter().map(|r| (r, a)).collect();
                entries.extend(build_bm(&pr, &m_vec).unwrap().into_iter().map(|r| (r, b)));
                let x = FpqVector::from_entries(pr, entries).unwrap();
                let grid = x.norm().unwrap();
                let closed = structured_norm(&pr, a, n, b, &m_vec);
                assert_relative_eq!(grid, closed, max_relative = 1e-10);
            }
        }
    }
}

#[test]
fn structured_special_cases() {
    let pr = params(1.5, 2.0, 2);
    let n = 6;
    let c = comps(n, 2) as f64;
    let only_a = structured_norm(&pr, 1.0, n, 0.0, &[1, 1]);
    let expected = (0.25 * (c * 2f64.powf(n as f64 * 2.0 / 1.5)).powf(1.5 / 2.0)).powf(1.0 / 1.5);
    assert_relative_eq!(only_a, expected, max_relative = 1e-13);
    let p1 = params(3.0, 1.5, 1);
    let only_b = structured_norm(&p1, 0.0, 3, -2.0, &[5]);
    assert_relative_eq!(only_b, 2.0 * 2f64.powf(5.0 / 3.0) * 2f64.powf(-1.0 / 3.0), max_relative = 1e-13);
}

#[test]
fn structured_coefficients_match_grid_functional() {
    let pr = params(1.5, 2.0, 2);
    let n = 5;
    let a = 1.0;
    let b = balanced_b(&pr, a, n, 0.0);
    let m_vec = [2, 2];
    let a_set = build_an(&pr, n).unwrap();
    let b_set = build_bm(&pr, &m_vec).unwrap();
    let mut entries: Vec<_> = a_set.iter().map(|r| (r.clone(), a)).collect();
    entries.extend(b_set.iter().map(|r| (r.clone(), b)));
    let x = FpqVector::from_entries(pr, entries).unwrap();
    let scale = x.norm().unwrap().powf(pr.p() - 1.0);
    let (on_a, on_b) = structured_coeffs_scaled(&pr, a, n, b);
    let g = x.norming_coeffs().unwrap();
    for r in &a_set {
        assert_relative_eq!(g[r] * scale, on_a, max_relative = 1e-10);
    }
    for r in &b_set {
        assert_relative_eq!(g[r] * scale, on_b, max_relative = 1e-10);
    }
    // The balanced weight equalizes the two families.
    assert_relative_eq!(on_a, on_b, max_relative = 1e-12);
}

#[test]
fn lorentz_examples() {
    assert_eq!(lorentz_quasinorm(&[-1.0], 3.0, 1.5), 1.0);
    let (p, q) = (3.0, 1.5);
    for m in [1usize, 2, 3, 7, 8, 33] {
        let ones = vec![1.0; m];
        let top = (m as f64).log2().floor() as i32;
        let expected: f64 = (0..=top).map(|j| 2f64.powf(j as f64 * q / p)).sum::<f64>().powf(1.0 / q);
        assert_relative_eq!(lorentz_quasinorm(&ones, p, q), expected, max_relative = 1e-14);
    }
    assert_relative_eq!(lorentz_quasinorm(&[0.5, -3.0, 2.0], 2.0, 2.0), (9.0f64 + 2.0 * 4.0).sqrt(), max_relative = 1e-14);
}

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.25), Just(1.5), Just(2.0), Just(3.0), Just(4.0), 1.1f64..6.0]
}

fn coefficient() -> impl Strategy<Value = f64> {
    (-3.0f64..3.0, any::<bool>()).prop_map(|(e, s)| if s { 10f64.powf(e) } else { -(10f64.powf(e)) })
}

fn axis(max_level: u32) -> impl Strategy<Value = DyadicAxisIndex> {
    prop_oneof![
        1 => Just(DyadicAxisIndex::Zero),
        6 => (0..=max_level).prop_flat_map(|j| (Just(j), 0..(1u64 << j))).prop_map(|(j, k)| iv(j, k)),
    ]
}

fn rectangle(d: usize) -> impl Strategy<Value = Rectangle> {
    prop::collection::vec(axis(5), d).prop_map(|axes| Rectangle::new(axes).unwrap())
}

prop_compose! {
    fn fpq_vector()(p in exponent(), q in exponent(), d in 1usize..=2)
                   (raw in prop::collection::btree_map(rectangle(d), coefficient(), 1..10), p in Just(p), q in Just(q), d in Just(d))
                   -> FpqVector {
        FpqVector::from_entries(params(p, q, d), raw).unwrap()
    }
}

prop_compose! {
    fn fpq_pair()(x in fpq_vector())
                 (raw in prop::collection::btree_map(rectangle(x.params().d()), coefficient(), 0..10), x in Just(x))
                 -> (FpqVector, FpqVector) {
        let y = FpqVector::from_entries(*x.params(), raw).unwrap();
        (x, y)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn norm_matches_uniform_grid(x in fpq_vector()) {
        let n = x.norm().unwrap();
        prop_assert!((n - uniform_grid_norm(&x)).abs() <= 1e-10 * n);
    }

    #[test]
    fn norming_identity(x in fpq_vector()) {
        let n = x.norm().unwrap();
        prop_assert!((x.norming_apply(&x).unwrap() - n).abs() <= 1e-10 * n);
    }

    #[test]
    fn functional_bound((x, y) in fpq_pair()) {
        prop_assert!(x.norming_apply(&y).unwrap().abs() <= y.norm().unwrap() * (1.0 + 1e-10) + 1e-300);
    }

    #[test]
    fn functional_is_norm_derivative((x, y) in fpq_pair()) {
        prop_assume!(!y.is_zero());
        let (nx, ny) = (x.norm().unwrap(), y.norm().unwrap());
        let y = y.scaled(nx / ny);
        let t = 1e-6;
        let fd = (x.axpy(t, &y).norm().unwrap() - x.axpy(-t, &y).norm().unwrap()) / (2.0 * t);
        let exact = x.norming_apply(&y).unwrap();
        prop_assert!((fd - exact).abs() <= 1e-4 * nx, "fd {} exact {}", fd, exact);
    }

    #[test]
    fn equal_exponents_collapse(raw in prop::collection::btree_map(rectangle(2), coefficient(), 1..10), p in 1.1f64..6.0) {
        let x = FpqVector::from_entries(params(p, p, 2), raw).unwrap();
        let plain = x.entries().values().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p);
        prop_assert!((x.norm().unwrap() - plain).abs() <= 1e-10 * plain);
    }

    #[test]
    fn monotone_lattice(x in fpq_vector(), damp in prop::collection::vec(0.0f64..=1.0, 10)) {
        let damped = x.with_entries(
            x.entries().iter().zip(damp.iter().cycle()).map(|((i, v), d)| (i.clone(), v * d)).collect());
        prop_assert!(damped.norm().unwrap() <= x.norm().unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn spatially_disjoint_functional_vanishes(p in exponent(), q in exponent(), a in coefficient(), b in coefficient()) {
        let pr = params(p, q, 1);
        let x = FpqVector::from_entries(pr, [(rect(&[(2, 0)]), a), (rect(&[(3, 0)]), b)]).unwrap();
        let y = FpqVector::from_entries(pr, [(rect(&[(1, 1)]), 1.0), (rect(&[(4, 12)]), -2.0)]).unwrap();
        prop_assert_eq!(x.norming_apply(&y).unwrap(), 0.0);
    }
}
