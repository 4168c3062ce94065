use fcmstop_core::anomaly::removal_count;
use fcmstop_core::imagery::write_feature_csv;
use fcmstop_core::*;
use proptest::prelude::*;

fn labels(max_n: usize, k: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0..k, 2..max_n)
}

fn label_pair() -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
    (2usize..80).prop_flat_map(|n| (prop::collection::vec(0usize..6, n), prop::collection::vec(0usize..8, n)))
}

fn points(max_n: usize, dims: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-5.0f64..5.0, dims), 8..max_n)
}

proptest! {
    #[test]
    fn rand_is_symmetric_and_bounded((a, b) in label_pair()) {
        let ab = rand_index_contingency(&a, &b).unwrap();
        let ba = rand_index_contingency(&b, &a).unwrap();
        prop_assert_eq!(ab, ba);
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert!((ab - rand_index_pairwise(&a, &b).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn rand_of_a_partition_with_itself_is_one(a in labels(100, 7)) {
        prop_assert_eq!(rand_index_contingency(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn rand_ignores_point_order_and_label_names((a, b) in label_pair(), shift in 1usize..50, seed in any::<u64>()) {
        let n = a.len();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut state = seed;
        for i in (1..n).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (state >> 33) as usize % (i + 1));
        }
        let pa: Vec<usize> = perm.iter().map(|&i| a[i] + shift).collect();
        let pb: Vec<usize> = perm.iter().map(|&i| b[i] * 3).collect();
        prop_assert_eq!(rand_index_contingency(&a, &b).unwrap(), rand_index_contingency(&pa, &pb).unwrap());
    }

    #[test]
    fn init_membership_is_column_stochastic(n in 1usize..200, k in 2usize..9, seed in any::<u64>()) {
        let u = init_membership(n, k, seed).unwrap();
        for s in u.column_sums() {
            prop_assert!((s - 1.0).abs() <= 1e-12);
        }
        prop_assert!((0..n).all(|i| u.column(i).iter().all(|&v| v > 0.0)));
        prop_assert_eq!(u, init_membership(n, k, seed).unwrap());
    }

    #[test]
    fn memberships_stay_stochastic(pts in points(60, 2), k in 2usize..5) {
        let x = FeatureMatrix::from_rows(&pts).unwrap();
        let centers = Centers::from_rows(&pts[..k]).unwrap();
        let u = update_memberships(&x, &centers, 2.0);
        for s in u.column_sums() {
            prop_assert!((s - 1.0).abs() <= 1e-9);
        }
        prop_assert!((0..x.n_points()).all(|i| u.column(i).iter().all(|&v| (0.0..=1.0).contains(&v))));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn fcm_descends_and_is_deterministic(pts in points(150, 3), k in 2usize..5, seed in 0u64..1000) {
        let x = FeatureMatrix::from_rows(&pts).unwrap();
        let config = FcmConfig { n_clusters: k, seed, max_iterations: 100, ..FcmConfig::default() };
        let (state, trace) = match run_fcm(&x, &config) {
            Ok(r) => r,
            Err(Error::DegenerateCluster { .. }) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        for w in trace.objectives.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-9), "{} then {}", w[0], w[1]);
        }
        for s in state.memberships.column_sums() {
            prop_assert!((s - 1.0).abs() <= 1e-9);
        }
        let (_, again) = run_fcm(&x, &config).unwrap();
        prop_assert_eq!(&trace.objectives, &again.objectives);
        prop_assert_eq!(&trace.labels, &again.labels);
        prop_assert_eq!(trace.objectives.len(), trace.labels.len());
        prop_assert_eq!(trace.objectives.len(), trace.iter_times.len());
    }

    #[test]
    fn lof_removal_keeps_the_complement(pts in points(50, 2), frac in 0.01f64..0.5) {
        let k = 3.min(pts.len() - 1);
        let scores = lof_scores(&pts, k).unwrap();
        let (kept, removed) = remove_outliers(&pts, &scores, frac).unwrap();
        let n = pts.len();
        prop_assert_eq!(removed.len(), removal_count(n, frac));
        prop_assert_eq!(kept.len(), n - removed.len());
        prop_assert!(removed.windows(2).all(|w| w[0] < w[1]));
        let floor = removed.iter().map(|&i| scores[i]).fold(f64::INFINITY, f64::min);
        let kept_idx: Vec<usize> = (0..n).filter(|i| !removed.contains(i)).collect();
        prop_assert!(kept_idx.iter().all(|&i| scores[i] <= floor));
    }
}

proptest! {
    #[test]
    fn cost_is_linear_in_hours(price in 0.0f64..10.0, a in 0.0f64..1e5, b in 0.0f64..1e5) {
        let p = PriceSheet::usd(price).unwrap();
        let whole = compute_cost(&p, a + b).unwrap();
        let parts = compute_cost(&p, a).unwrap() + compute_cost(&p, b).unwrap();
        prop_assert!((whole - parts).abs() <= 1e-9 * whole.abs().max(1e-300) + 1e-12);
    }

    #[test]
    fn cost_effectiveness_is_a_fraction(total in 1e-6f64..1e6, share in 0.0f64..=1.0) {
        let r = cost_effectiveness(total * share, total).unwrap();
        prop_assert!((0.0..=1.0).contains(&r));
    }

    #[test]
    fn doubling_the_area_doubles_savings(area in 1.0f64..1e5, hours in 1e-4f64..1.0) {
        let p = PriceSheet::usd(0.424).unwrap();
        // An image footprint of 1000 m^2 makes every km^2 count exact.
        let a = extrapolate_savings(area.round(), 1000.0, hours, &p).unwrap();
        let b = extrapolate_savings(2.0 * area.round(), 1000.0, hours, &p).unwrap();
        prop_assert_eq!(b.image_count, 2 * a.image_count);
        prop_assert_eq!(b.saved_amount, 2.0 * a.saved_amount);
    }

    #[test]
    fn whole_cents_survive_rounding(cents in -10_000_000i64..10_000_000) {
        prop_assert_eq!(Cents::from_amount(cents as f64 / 100.0), Cents(cents));
    }

    #[test]
    fn feature_csv_round_trips(pts in points(30, 3)) {
        let x = FeatureMatrix::from_rows(&pts).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        write_feature_csv(&x, &path).unwrap();
        prop_assert_eq!(load_feature_csv(&path, false).unwrap(), x);
    }
}
