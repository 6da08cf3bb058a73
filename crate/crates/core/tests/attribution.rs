mod common;

use common::*;
use excir::centering::CenteringSpec;
use excir::{
    accumulate_rows, block_cir, center_table, cir_scores, class_conditioned_cir, finalize,
    score_with_centers, AccumulatorSet, CenterMethod, DataTable, GroupFamily, WeightVector,
};
use proptest::prelude::*;

fn midmean() -> CenteringSpec {
    CenteringSpec::exact(CenterMethod::Midmean)
}

fn plain(t: &DataTable) -> Vec<f64> {
    cir_scores(t, "y", &GroupFamily::empty(), &midmean(), None)
        .unwrap()
        .cir_vector()
}

#[test]
fn matches_naive_reference_with_groups_and_weights() {
    for seed in 0..25 {
        let t = random_table(seed, 50, 10);
        let (groups, raw) = random_groups(seed, 10);
        let w = random_weights(seed, 50);
        let y = t.output("y").unwrap();

        let (expect_f, expect_g) = naive_scores(t.columns(), y, &raw, None);
        let r = cir_scores(&t, "y", &groups, &midmean(), None).unwrap();
        for (a, b) in r.cir_vector().iter().zip(&expect_f) {
            assert!(rel_close(*a, *b, 1e-10), "seed {seed}: {a} vs {b}");
        }
        for (g, b) in r.groups.iter().zip(&expect_g) {
            assert!(rel_close(g.cir, *b, 1e-10), "seed {seed}: {} vs {b}", g.cir);
        }

        let (expect_f, expect_g) = naive_scores(t.columns(), y, &raw, Some(&w));
        let wv = WeightVector::new(w.clone()).unwrap();
        let r = cir_scores(&t, "y", &groups, &midmean(), Some(&wv)).unwrap();
        for (a, b) in r.cir_vector().iter().zip(&expect_f) {
            assert!(rel_close(*a, *b, 1e-10), "weighted seed {seed}: {a} vs {b}");
        }
        for (g, b) in r.groups.iter().zip(&expect_g) {
            assert!(rel_close(g.cir, *b, 1e-10));
        }
    }
}

#[test]
fn duplicated_feature_is_redundancy_stable() {
    let mut t = random_table(7, 120, 6);
    let before = plain(&t);
    let dup = t.column(2).to_vec();
    t.push_feature("x2_copy", dup).unwrap();
    let after = plain(&t);
    assert_eq!(&after[..6], &before[..]);
    assert_eq!(after[6], after[2]);
}

#[test]
fn singleton_blocks_equal_feature_scores_bit_for_bit() {
    for seed in 0..5 {
        let t = random_table(seed, 9000, 7);
        let groups = GroupFamily::singletons(t.feature_names());
        let features = plain(&t);
        let blocks = block_cir(&t, "y", &groups, &midmean()).unwrap();
        for (g, f) in blocks.groups.iter().zip(&features) {
            assert_eq!(g.cir.to_bits(), f.to_bits());
        }
    }
}

#[test]
fn shard_merge_matches_single_pass() {
    let t = random_table(11, 20_000, 5);
    let (groups, _) = random_groups(11, 5);
    let centered = center_table(&t, "y", &midmean()).unwrap();
    let whole = accumulate_rows(&t, &centered, &groups, None, 0..t.n()).unwrap();
    let half = t.n() / 2;
    let a = accumulate_rows(&t, &centered, &groups, None, 0..half).unwrap();
    let b = accumulate_rows(&t, &centered, &groups, None, half..t.n()).unwrap();
    let ab = a.clone().merge(&b);
    let ba = b.merge(&a);
    let full = finalize(&t, &centered, &groups, &whole, t.n(), false);
    let merged = finalize(&t, &centered, &groups, &ab, t.n(), false);
    for (x, y) in full.features.iter().zip(&merged.features) {
        assert!(rel_close(x.cir, y.cir, 1e-12));
    }
    for (x, y) in ab.features.iter().zip(&ba.features) {
        assert!(rel_close(x.numerator, y.numerator, 1e-12));
    }
    let empty = accumulate_rows(&t, &centered, &groups, None, 0..0).unwrap();
    assert_eq!(whole.clone().merge(&empty), whole);
    assert_eq!(empty, AccumulatorSet::zeros(5, groups.len()));
}

#[test]
fn zero_weight_equals_row_removal_with_fixed_centers() {
    let t = random_table(3, 200, 6);
    let (groups, _) = random_groups(3, 6);
    let centered = center_table(&t, "y", &midmean()).unwrap();
    let mut w = vec![1.0; t.n()];
    w[17] = 0.0;
    w[150] = 0.0;
    let weighted =
        score_with_centers(&t, &centered, &groups, Some(&WeightVector::new(w).unwrap())).unwrap();
    let kept: Vec<usize> = (0..t.n()).filter(|&i| i != 17 && i != 150).collect();
    let sub = t.select_rows(&kept);
    let removed = score_with_centers(&sub, &centered, &groups, None).unwrap();
    for (a, b) in weighted.features.iter().zip(&removed.features) {
        assert!(rel_close(a.cir, b.cir, 1e-12));
    }
    for (a, b) in weighted.groups.iter().zip(&removed.groups) {
        assert!(rel_close(a.cir, b.cir, 1e-12));
    }
}

#[test]
fn uniform_weights_reproduce_unweighted() {
    let t = random_table(5, 300, 4);
    let base = plain(&t);
    let w = WeightVector::uniform(t.n(), 2.5).unwrap();
    let r = cir_scores(&t, "y", &GroupFamily::empty(), &midmean(), Some(&w)).unwrap();
    for (a, b) in r.cir_vector().iter().zip(&base) {
        assert!((a - b).abs() <= 1e-12);
    }
}

#[test]
fn class_conditioning_examples() {
    let t = random_table(21, 150, 5);
    let f1 = t.output("y").unwrap().to_vec();
    let affine: Vec<f64> = f1.iter().map(|v| 2.0 * v + 7.0).collect();
    let neg: Vec<f64> = f1.iter().map(|v| -v).collect();
    let multi = DataTable::new(
        t.feature_names().to_vec(),
        t.columns().to_vec(),
        vec![
            ("c1".into(), f1),
            ("c1_affine".into(), affine),
            ("c2".into(), neg),
        ],
    )
    .unwrap();
    let reports = class_conditioned_cir(
        &multi,
        &["c1", "c1_affine", "c2"],
        &GroupFamily::empty(),
        &midmean(),
    )
    .unwrap();
    let direct = plain(&t);
    let c1 = reports[0].cir_vector();
    assert_eq!(c1, direct);
    for ((a, b), c) in c1
        .iter()
        .zip(reports[1].cir_vector())
        .zip(reports[2].cir_vector())
    {
        assert!((a - b).abs() <= 1e-12);
        assert!((1.0 - a - c).abs() <= 1e-12);
    }
}

#[test]
fn identical_inputs_give_identical_reports() {
    let t = random_table(8, 5000, 8);
    let (groups, _) = random_groups(8, 8);
    let a = cir_scores(&t, "y", &groups, &midmean(), None).unwrap();
    let b = cir_scores(&t.clone(), "y", &groups, &midmean(), None).unwrap();
    assert_eq!(a, b);
}

#[test]
fn single_row_table_is_neutral() {
    let t = DataTable::with_output(vec!["a".into()], vec![vec![4.0]], "y", vec![1.0]).unwrap();
    let r = cir_scores(&t, "y", &GroupFamily::empty(), &midmean(), None).unwrap();
    assert_eq!(r.features[0].cir, 0.5);
    assert!(r.features[0].neutral);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn affine_invariance_and_sign_symmetry(
        seed in 0u64..10_000,
        alpha in 0.1f64..10.0,
        beta in 0.1f64..10.0,
        cx in -100.0f64..100.0,
        cy in -100.0f64..100.0,
    ) {
        let t = random_table(seed, 60, 5);
        let base = plain(&t);
        let y = t.output("y").unwrap();

        let shifted = DataTable::with_output(
            t.feature_names().to_vec(),
            map_features(&t, |_, v| alpha * v + cx),
            "y",
            y.iter().map(|v| beta * v + cy).collect(),
        ).unwrap();
        for (a, b) in plain(&shifted).iter().zip(&base) {
            prop_assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        }

        let neg_x = DataTable::with_output(
            t.feature_names().to_vec(), map_features(&t, |_, v| -v), "y", y.to_vec()).unwrap();
        let neg_y = DataTable::with_output(
            t.feature_names().to_vec(), t.columns().to_vec(), "y", y.iter().map(|v| -v).collect()).unwrap();
        let neg_both = DataTable::with_output(
            t.feature_names().to_vec(), map_features(&t, |_, v| -v), "y", y.iter().map(|v| -v).collect()).unwrap();
        for (((b, nx), ny), nb) in base.iter().zip(plain(&neg_x)).zip(plain(&neg_y)).zip(plain(&neg_both)) {
            prop_assert!((nx - (1.0 - b)).abs() <= 1e-12);
            prop_assert!((ny - (1.0 - b)).abs() <= 1e-12);
            prop_assert!((nb - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn scores_are_bounded(seed in 0u64..10_000, n in 1usize..80, d in 1usize..6) {
        let t = random_table(seed, n, d);
        let (groups, _) = random_groups(seed, d);
        let r = cir_scores(&t, "y", &groups, &midmean(), None).unwrap();
        for f in &r.features {
            prop_assert!((0.0..=1.0).contains(&f.cir));
            prop_assert_eq!(f.neutral, f.accumulator.denominator == 0.0);
            if !f.neutral {
                prop_assert!((f.cir - 0.5 * (1.0 + f.ratio_nd)).abs() <= 1e-15);
            }
        }
        let mut ranks: Vec<usize> = r.features.iter().map(|f| f.rank).collect();
        ranks.sort_unstable();
        prop_assert_eq!(ranks, (1..=d).collect::<Vec<_>>());
        for g in &r.groups {
            prop_assert!((0.0..=1.0).contains(&g.cir));
        }
    }
}
