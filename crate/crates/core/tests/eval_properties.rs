mod support;

use ndarray::{Array2, Axis};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stgan_nd::eval::{
    classify_with_threshold, compute_gca_nda, evaluate_at, pairwise_set_distance, roc_auc, self_set_distance, tau_grid,
    tune_threshold, Truth,
};
use support::{brute_distance, mann_whitney_auc, random_matrix, random_probs};

fn truths_for(rows: usize, n_classes: usize, rng: &mut ChaCha8Rng) -> Vec<Truth> {
    let mut t: Vec<Truth> = (0..rows)
        .map(|_| {
            if rng.random_bool(0.4) {
                Truth::Novel
            } else {
                Truth::Trained(rng.random_range(0..n_classes))
            }
        })
        .collect();
    t[0] = Truth::Novel;
    t[1] = Truth::Trained(0);
    t
}

#[test]
fn set_distance_matches_double_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let (n, m, f) = (rng.random_range(1..30), rng.random_range(1..30), rng.random_range(1..20));
        let x = random_matrix(n, f, &mut rng) * 3.0;
        let y = random_matrix(m, f, &mut rng) * 3.0;
        let fast = pairwise_set_distance(x.view(), y.view()).unwrap();
        for (a, b) in fast.iter().zip(brute_distance(&x, &y, false)) {
            assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        }
        if n >= 2 {
            let own = self_set_distance(x.view()).unwrap();
            for (a, b) in own.iter().zip(brute_distance(&x, &x, true)) {
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn auc_matches_rank_statistic() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for k in 0..50 {
        let n = rng.random_range(4..80);
        // coarse scores in half the instances to exercise ties
        let scores: Vec<f64> = (0..n)
            .map(|_| {
                let s: f64 = rng.random();
                if k % 2 == 0 { (s * 5.0).floor() / 5.0 } else { s }
            })
            .collect();
        let mut is_novel: Vec<bool> = (0..n).map(|_| rng.random_bool(0.4)).collect();
        is_novel[0] = true;
        is_novel[1] = false;
        let (_, auc) = roc_auc(&scores, &is_novel).unwrap();
        let oracle = mann_whitney_auc(&scores, &is_novel);
        assert!((auc - oracle).abs() <= 1e-12, "{auc} vs {oracle}");
    }
}

#[test]
fn zero_threshold_reproduces_argmax_accuracy() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..20 {
        let (rows, n_c) = (rng.random_range(5..60), rng.random_range(2..9));
        let probs = random_probs(rows, n_c, &mut rng);
        let truths = truths_for(rows, n_c, &mut rng);
        let r = evaluate_at(probs.view(), &truths, 0.0).unwrap();
        assert_eq!(r.nda, 0.0);
        let (mut hits, mut trained) = (0usize, 0usize);
        for (row, t) in probs.axis_iter(Axis(0)).zip(&truths) {
            if let Truth::Trained(c) = t {
                trained += 1;
                let mut best = 0;
                for j in 1..n_c {
                    if row[j] > row[best] {
                        best = j;
                    }
                }
                hits += usize::from(best == *c);
            }
        }
        assert_eq!(r.gca, hits as f64 / trained as f64);
    }
}

fn grid_monotone(probs: &Array2<f64>, truths: &[Truth]) {
    let mut prev: Option<(f64, f64)> = None;
    for tau in tau_grid() {
        let r = evaluate_at(probs.view(), truths, tau).unwrap();
        if let Some((g, n)) = prev {
            assert!(r.gca <= g, "GCA rose at tau {tau}");
            assert!(r.nda >= n, "NDA fell at tau {tau}");
        }
        prev = Some((r.gca, r.nda));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gca_and_nda_are_monotone_in_tau(seed in any::<u64>(), rows in 3usize..25, n_c in 2usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let probs = random_probs(rows, n_c, &mut rng);
        let truths = truths_for(rows, n_c, &mut rng);
        grid_monotone(&probs, &truths);
    }

    #[test]
    fn confusion_counts_partition(seed in any::<u64>(), rows in 2usize..40, tau in 0.0f64..=1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let probs = random_probs(rows, 4, &mut rng);
        let truths = truths_for(rows, 4, &mut rng);
        let d = classify_with_threshold(probs.view(), tau).unwrap();
        let r = compute_gca_nda(&d, &truths).unwrap();
        let c = r.confusion;
        let n_novel = truths.iter().filter(|t| **t == Truth::Novel).count();
        prop_assert_eq!(c.correct_trained + c.wrong_trained + c.trained_as_others, rows - n_novel);
        prop_assert_eq!(c.novel_as_others + c.novel_as_class, n_novel);
    }

    #[test]
    fn tuned_threshold_meets_target_when_reachable(seed in any::<u64>(), p in 0.05f64..0.95) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let probs = random_probs(30, 3, &mut rng);
        let truths = truths_for(30, 3, &mut rng);
        let (tau, r) = tune_threshold(probs.view(), &truths, p).unwrap();
        prop_assert_eq!(tau, r.tau);
        let at_zero = evaluate_at(probs.view(), &truths, 0.0).unwrap();
        if at_zero.gca >= p {
            prop_assert!(r.gca >= p);
            // no grid point with GCA >= p has a higher NDA
            for t in tau_grid() {
                let other = evaluate_at(probs.view(), &truths, t).unwrap();
                if other.gca >= p {
                    prop_assert!(other.nda <= r.nda);
                }
            }
        }
    }

    #[test]
    fn set_distance_ignores_row_order_of_x(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_matrix(12, 5, &mut rng);
        let y = random_matrix(7, 5, &mut rng);
        let mut order: Vec<usize> = (0..12).collect();
        order.reverse();
        order.swap(0, 5);
        let shuffled = x.select(Axis(0), &order);
        let a = pairwise_set_distance(x.view(), y.view()).unwrap();
        let b = pairwise_set_distance(shuffled.view(), y.view()).unwrap();
        for (u, v) in a.iter().zip(b.iter()) {
            prop_assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn auc_invariant_under_monotone_transform(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scores: Vec<f64> = (0..40).map(|_| (rng.random::<f64>() * 10.0).floor() / 10.0).collect();
        let mut is_novel: Vec<bool> = (0..40).map(|_| rng.random_bool(0.5)).collect();
        is_novel[0] = true;
        is_novel[1] = false;
        let (_, a) = roc_auc(&scores, &is_novel).unwrap();
        let warped: Vec<f64> = scores.iter().map(|s| (3.0 * s).exp() - 7.0).collect();
        let (_, b) = roc_auc(&warped, &is_novel).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }
}
