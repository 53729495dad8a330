use maclaurin::data::{fit_apply_scaling, parse_libsvm, split, write_libsvm, Dataset, Norm};
use maclaurin::{FeatureMapSpec, MaclaurinKernel, MapMode, RandomMaclaurinMap, SparseVector};
use proptest::prelude::*;

fn catalog_kernels() -> Vec<MaclaurinKernel> {
    vec![
        MaclaurinKernel::homogeneous(10),
        MaclaurinKernel::homogeneous(3),
        MaclaurinKernel::polynomial(10, 1.0).unwrap(),
        MaclaurinKernel::polynomial(4, 0.5).unwrap(),
        MaclaurinKernel::exponential(1.0).unwrap(),
        MaclaurinKernel::exponential(0.7).unwrap(),
        MaclaurinKernel::vovk_real(10).unwrap(),
        MaclaurinKernel::vovk_infinite(),
    ]
}

fn kernel_strategy() -> impl Strategy<Value = MaclaurinKernel> {
    (0..catalog_kernels().len(), 0.5f64..3.0)
        .prop_map(|(i, c)| catalog_kernels()[i].rescale(c).unwrap())
}

/// Evaluation window: 0.9 of the radius, or a fixed multiple of the scale
/// for entire functions.
fn window(k: &MaclaurinKernel) -> f64 {
    if k.radius().is_finite() {
        0.9 * k.radius()
    } else {
        2.0 * k.scale()
    }
}

fn partial_sum(k: &MaclaurinKernel, t: f64, terms: u32) -> f64 {
    (0..terms)
        .map(|n| k.coefficient(n) * t.powi(n as i32))
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn series_matches_closed_form(k in kernel_strategy(), u in -1.0f64..1.0) {
        let t = u * window(&k);
        let f = k.eval_f(t).unwrap();
        let s = partial_sum(&k, t, 200);
        prop_assert!((s - f).abs() <= 1e-9 * (1.0 + f.abs()), "{k}: t={t} series={s} f={f}");
    }

    #[test]
    fn derivative_matches_finite_difference(k in kernel_strategy(), u in -0.95f64..0.95) {
        let t = u * window(&k);
        let h = 1e-6;
        let fd = (k.eval_f(t + h).unwrap() - k.eval_f(t - h).unwrap()) / (2.0 * h);
        let fp = k.eval_f_prime(t).unwrap();
        prop_assert!((fd - fp).abs() <= 1e-4 * fp.abs().max(1.0), "{k}: t={t} fd={fd} f'={fp}");
    }

    #[test]
    fn rescale_is_input_scaling(
        k in kernel_strategy(),
        c in 0.5f64..4.0,
        x in prop::collection::vec(-0.3f64..0.3, 4),
        y in prop::collection::vec(-0.3f64..0.3, 4),
    ) {
        let scaled = k.rescale(c).unwrap();
        let a = scaled.kernel_value(&x, &y).unwrap();
        let s = c.sqrt();
        let xs: Vec<f64> = x.iter().map(|v| v / s).collect();
        let ys: Vec<f64> = y.iter().map(|v| v / s).collect();
        let b = k.kernel_value(&xs, &ys).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{a} vs {b}");
    }

    #[test]
    fn rescale_composes(k in kernel_strategy(), c1 in 0.5f64..3.0, c2 in 0.5f64..3.0, n in 0u32..30) {
        let a = k.rescale(c1).unwrap().rescale(c2).unwrap().coefficient(n);
        let b = k.rescale(c1 * c2).unwrap().coefficient(n);
        prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(f64::MIN_POSITIVE));
    }

    #[test]
    fn log_coefficient_agrees(k in kernel_strategy(), n in 0u32..80) {
        let a = k.coefficient(n);
        let l = k.log_coefficient(n);
        if a > 0.0 {
            prop_assert!((l.exp() - a).abs() <= 1e-12 * a);
        } else {
            prop_assert_eq!(l, f64::NEG_INFINITY);
        }
        prop_assert!(a >= 0.0);
    }

    #[test]
    fn libsvm_round_trip(rows in prop::collection::vec(
        (prop::sample::select(vec![-1.0, 1.0, 2.0, 7.5]),
         prop::collection::btree_map(0u32..40, -1e6f64..1e6, 0..8)),
        1..30,
    )) {
        let labels: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let vecs: Vec<SparseVector> = rows
            .iter()
            .map(|r| SparseVector::new(r.1.keys().copied().collect(), r.1.values().copied().collect()).unwrap())
            .collect();
        let d = Dataset::new(labels, vecs, 0).unwrap();
        let mut text = Vec::new();
        write_libsvm(&d, &mut text).unwrap();
        prop_assert_eq!(parse_libsvm(&text[..]).unwrap(), d);
    }

    #[test]
    fn scaling_is_idempotent(
        rows in prop::collection::vec(prop::collection::vec(-50.0f64..50.0, 3), 1..20),
        l1 in any::<bool>(),
    ) {
        prop_assume!(rows.iter().flatten().any(|v| *v != 0.0));
        let norm = if l1 { Norm::L1 } else { Norm::L2 };
        let d = Dataset::from_dense(vec![1.0; rows.len()], &rows).unwrap();
        let (once, _, _) = fit_apply_scaling(&d, &d, norm).unwrap();
        prop_assert!((once.max_norm(norm) - 1.0).abs() <= 4.0 * f64::EPSILON);
        let (_, _, s) = fit_apply_scaling(&once, &once, norm).unwrap();
        prop_assert!((s - 1.0).abs() <= 4.0 * f64::EPSILON);
    }

    #[test]
    fn split_is_deterministic_and_partitions(n in 1usize..300, f in 0.01f64..0.99, seed in any::<u64>()) {
        let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64]).collect();
        let d = Dataset::from_dense((0..n).map(|i| i as f64).collect(), &rows).unwrap();
        let (tr, te) = split(&d, f, seed).unwrap();
        let (tr2, te2) = split(&d, f, seed).unwrap();
        prop_assert_eq!(&tr, &tr2);
        prop_assert_eq!(&te, &te2);
        prop_assert_eq!(tr.len(), ((f * n as f64).floor() as usize).min(20_000));
        let mut all: Vec<f64> = tr.labels().iter().chain(te.labels()).copied().collect();
        all.sort_by(f64::total_cmp);
        prop_assert_eq!(all, (0..n).map(|i| i as f64).collect::<Vec<_>>());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn map_outputs_are_finite_and_zero_exactly_off_support(
        k in kernel_strategy(),
        seed in any::<u64>(),
        x in prop::collection::vec(-0.25f64..0.25, 5),
    ) {
        let map = RandomMaclaurinMap::build(&k, &FeatureMapSpec::new(5, 300).with_seed(seed)).unwrap();
        let z = map.raw_features(&x[..]).unwrap();
        prop_assert!(z.iter().all(|v| v.is_finite()));
        for (i, &n) in map.degrees().iter().enumerate() {
            let zero_scale = map.log_scales()[i] == f64::NEG_INFINITY;
            prop_assert_eq!(zero_scale, k.coefficient(n) == 0.0);
            if zero_scale {
                prop_assert_eq!(z[i], 0.0);
            }
        }
    }

    #[test]
    fn output_independent_of_thread_count(seed in any::<u64>(), h01 in any::<bool>()) {
        let k = MaclaurinKernel::polynomial(6, 1.0).unwrap();
        let mode = if h01 { MapMode::H01 } else { MapMode::Plain };
        let spec = FeatureMapSpec::new(7, 257).with_seed(seed).with_mode(mode);
        let rows: Vec<Vec<f64>> = (0..9)
            .map(|r| (0..7).map(|c| ((r * 7 + c) as f64 * 0.37).sin() / 7.0).collect())
            .collect();
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| {
                    let map = RandomMaclaurinMap::build(&k, &spec).unwrap();
                    (map.degrees().to_vec(), map.apply_batch(&rows).unwrap())
                })
        };
        let one = run(1);
        prop_assert_eq!(&one, &run(4));
        let serial = RandomMaclaurinMap::build(&k, &spec).unwrap();
        for (r, row) in rows.iter().enumerate() {
            prop_assert_eq!(&serial.apply(row).unwrap(), &one.1[r]);
        }
    }
}
