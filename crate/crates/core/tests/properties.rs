mod common;

use common::rel_diff;
use decode_energy::model::{build_design_matrix, predict_design, residual_sum_of_squares};
use decode_energy::validation::event_subsets;
use decode_energy::*;
use proptest::prelude::*;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn monotone_counts() -> impl Strategy<Value = [u64; 9]> {
    prop::array::uniform3((0u64..1 << 40, 0.0f64..=1.0, 0.0f64..=1.0)).prop_map(|classes| {
        let mut counts = [0; 9];
        for (c, (reference, f1, f2)) in classes.into_iter().enumerate() {
            let l1 = (reference as f64 * f1) as u64;
            let ll = (l1 as f64 * f2) as u64;
            counts[3 * c] = reference;
            counts[3 * c + 1] = l1.min(reference);
            counts[3 * c + 2] = ll.min(l1);
        }
        counts
    })
}

proptest! {
    #[test]
    fn hits_plus_misses_is_reference(counts in monotone_counts()) {
        let v = EventVector::new(counts).unwrap();
        for class in AccessClass::ALL {
            let reference = v.get(EventKind::new(class, CacheLevel::Reference));
            let l1 = v.get(EventKind::new(class, CacheLevel::L1Miss));
            prop_assert_eq!(v.derive_hits(class, HitLevel::L1) + l1, reference);
        }
    }

    #[test]
    fn pearson_affine_invariance(
        x in prop::collection::vec(-1e6f64..1e6, 3..200),
        a in prop_oneof![0.001f64..1e3, -1e3f64..-0.001],
        b in -1e6f64..1e6,
    ) {
        prop_assume!(x.iter().any(|v| (v - x[0]).abs() > 1e-3));
        let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let r = pearson(&x, &y).unwrap();
        let expected = if a > 0.0 { 1.0 } else { -1.0 };
        prop_assert!((r - expected).abs() < 1e-9, "r = {}", r);
    }

    #[test]
    fn pearson_symmetry_and_bounds(
        pairs in prop::collection::vec((-1e10f64..1e10, -1e10f64..1e10), 3..100),
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        if let (Ok(r1), Ok(r2)) = (pearson(&x, &y), pearson(&y, &x)) {
            prop_assert_eq!(r1, r2);
            prop_assert!(r1.abs() <= 1.0);
        }
    }

    #[test]
    fn relative_error_scale_invariance(
        pairs in prop::collection::vec((0.01f64..100.0, 0.01f64..100.0), 1..100),
        s in 1e-6f64..1e6,
    ) {
        let (pred, actual): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let base = mean_relative_error(&pred, &actual).unwrap();
        let scaled_pred: Vec<f64> = pred.iter().map(|p| p * s).collect();
        let scaled_actual: Vec<f64> = actual.iter().map(|a| a * s).collect();
        let scaled = mean_relative_error(&scaled_pred, &scaled_actual).unwrap();
        prop_assert!(rel_diff(base.mean_relative_error, scaled.mean_relative_error) < 1e-12);
        let mean = base.per_record.iter().map(|(_, e)| e).sum::<f64>() / base.n_records as f64;
        prop_assert!(rel_diff(mean, base.mean_relative_error) < 1e-12);
    }

    #[test]
    fn predict_is_linear(
        a in prop::collection::vec(0u64..1 << 40, 9),
        b in prop::collection::vec(0u64..1 << 40, 9),
        coefs in prop::collection::vec(1e-12f64..1e-6, 9),
    ) {
        let model = ModelCoefficients::new(FeatureSet::nine_pe(), coefs, "p", vec![]).unwrap();
        let values = |v: &[u64]| {
            EventKind::ALL.iter().zip(v).fold(FeatureValues::new(), |acc, (k, c)| {
                acc.with(Predictor::Event(*k), *c as f64)
            })
        };
        let sum: Vec<u64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let pa = predict(&model, &values(&a)).unwrap();
        let pb = predict(&model, &values(&b)).unwrap();
        let pab = predict(&model, &values(&sum)).unwrap();
        prop_assert!(rel_diff(pab, pa + pb) < 1e-12);
    }
}

fn noisy(seed: u64, n: usize, sigma: f64) -> Dataset {
    generate(&GeneratorSpec {
        n_records: n,
        noise_sigma: sigma,
        seed,
        ..GeneratorSpec::paper4()
    })
    .unwrap()
}

#[test]
fn fit_is_optimal_under_perturbation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (seed, fs) in [
        (1, FeatureSet::four_pe()),
        (2, FeatureSet::nine_pe()),
        (3, FeatureSet::one_pe()),
    ] {
        let d = noisy(seed, 200, 0.05);
        let model = fit_least_squares(&d, &fs).unwrap();
        let best = residual_sum_of_squares(&model, &d).unwrap();
        let norm = model
            .coefficients()
            .iter()
            .map(|c| c * c)
            .sum::<f64>()
            .sqrt();
        for _ in 0..100 {
            let mut delta: Vec<f64> = (0..fs.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let dn = delta.iter().map(|d| d * d).sum::<f64>().sqrt();
            let radius = rng.random_range(0.0..1e-3) * norm;
            delta.iter_mut().for_each(|d| *d *= radius / dn);
            let perturbed: Vec<f64> = model
                .coefficients()
                .iter()
                .zip(&delta)
                .map(|(c, d)| c + d)
                .collect();
            let other = ModelCoefficients::new(fs.clone(), perturbed, "p", vec![]).unwrap();
            let ssr = residual_sum_of_squares(&other, &d).unwrap();
            assert!(ssr >= best * (1.0 - 1e-9), "{fs}: {ssr} < {best}");
        }
    }
}

#[test]
fn residuals_orthogonal_to_columns() {
    for seed in 0..5 {
        let d = noisy(seed, 300, 0.05);
        for fs in [
            FeatureSet::one_pe(),
            FeatureSet::four_pe(),
            FeatureSet::nine_pe(),
        ] {
            let model = fit_least_squares(&d, &fs).unwrap();
            let design = build_design_matrix(&d, &fs).unwrap();
            let residual: Vec<f64> = predict_design(&model, &design)
                .iter()
                .zip(design.targets())
                .map(|(p, e)| p - e)
                .collect();
            let rnorm = residual.iter().map(|r| r * r).sum::<f64>().sqrt();
            for j in 0..design.cols() {
                let col: Vec<f64> = (0..design.rows()).map(|i| design.get(i, j)).collect();
                let cnorm = col.iter().map(|c| c * c).sum::<f64>().sqrt();
                let dot: f64 = col.iter().zip(&residual).map(|(c, r)| c * r).sum();
                assert!(dot.abs() / (cnorm * rnorm) < 1e-8, "{fs} column {j}");
            }
        }
    }
}

#[test]
fn scaling_energies_scales_coefficients() {
    let d = noisy(4, 200, 0.05);
    for s in [1e-3, 0.5, 7.0, 1e4] {
        let scaled = Dataset::new(
            d.records()
                .iter()
                .cloned()
                .map(|mut r| {
                    r.energy *= s;
                    r
                })
                .collect(),
        )
        .unwrap();
        for fs in [FeatureSet::four_pe(), FeatureSet::nine_pe()] {
            let base = fit_least_squares(&d, &fs).unwrap();
            let other = fit_least_squares(&scaled, &fs).unwrap();
            for (a, b) in base.coefficients().iter().zip(other.coefficients()) {
                assert!(rel_diff(a * s, *b) < 1e-10);
            }
        }
    }
}

#[test]
fn generated_vectors_always_valid() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for seed in 0..10_000u64 {
        let mut range = || {
            let lo = rng.random_range(0.0..12.0);
            (lo, lo + rng.random_range(0.0..3.0))
        };
        let ranges = [range(), range(), range()];
        let spec = GeneratorSpec {
            n_records: 3,
            reference_ranges: ranges,
            l1_miss_fraction_max: [rng.random(), rng.random(), rng.random()],
            ll_miss_fraction_max: [rng.random(), rng.random(), rng.random()],
            noise_sigma: rng.random_range(0.0..0.3),
            seed,
            ..GeneratorSpec::default()
        };
        let d = generate(&spec).unwrap();
        for r in d.records() {
            assert!(EventVector::new(*r.events.counts()).is_ok());
        }
    }
}

#[test]
fn noiseless_fit_recovers_generator() {
    for seed in 0..5 {
        let spec = GeneratorSpec {
            n_records: 100,
            seed,
            ..GeneratorSpec::paper4()
        };
        let d = generate(&spec).unwrap();
        let truth = spec.truth().unwrap();
        let fitted = fit_least_squares(&d, truth.feature_set()).unwrap();
        for (t, f) in truth.coefficients().iter().zip(fitted.coefficients()) {
            assert!(rel_diff(*t, *f) < 1e-9, "{t} vs {f}");
        }
    }
}

#[test]
fn in_sample_error_is_nested() {
    for seed in 0..20 {
        let d = noisy(1000 + seed, 80, 0.08);
        let one = in_sample_residual(&d, &FeatureSet::one_pe()).unwrap();
        let four = in_sample_residual(&d, &FeatureSet::four_pe()).unwrap();
        let nine = in_sample_residual(&d, &FeatureSet::nine_pe()).unwrap();
        assert!(nine <= four * (1.0 + 1e-12) && four <= one * (1.0 + 1e-12));
    }
}

#[test]
fn folds_partition_the_dataset() {
    for (m, k, seed) in [
        (10, 2, 0),
        (17, 5, 3),
        (100, 10, 42),
        (1344, 10, 0),
        (7, 7, 9),
    ] {
        let d = noisy(seed, m, 0.0);
        let plan = make_folds(&d, k, seed).unwrap();
        let sizes = plan.fold_sizes();
        assert_eq!(sizes.iter().sum::<usize>(), m);
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        let ids: Vec<&str> = plan.assignment().map(|(id, _)| id).collect();
        assert_eq!(ids, d.ids());
    }
}

#[test]
fn fixed_plan_makes_cv_order_independent() {
    let d = noisy(8, 60, 0.05);
    let plan = make_folds(&d, 10, 1).unwrap();
    let mut records = d.records().to_vec();
    records.shuffle(&mut ChaCha8Rng::seed_from_u64(2));
    let shuffled = Dataset::new(records).unwrap();
    let a = cross_validate(&d, &FeatureSet::four_pe(), &plan).unwrap();
    let b = cross_validate(&shuffled, &FeatureSet::four_pe(), &plan).unwrap();
    assert!(rel_diff(a.mean_relative_error, b.mean_relative_error) < 1e-12);
    // a plan recomputed from the permuted order generally differs
    assert_ne!(make_folds(&shuffled, 10, 1).unwrap(), plan);
}

#[test]
fn selected_subset_beats_random_subsets() {
    let d = noisy(21, 150, 0.05);
    let plan = make_folds(&d, 10, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for size in [2, 4, 6] {
        let selection = select_subset(&d, size, &plan).unwrap();
        let candidates = event_subsets(size);
        for _ in 0..20 {
            let pick = candidates.choose(&mut rng).unwrap().clone();
            let fs = FeatureSet::from_events(pick).unwrap();
            let err = cross_validate(&d, &fs, &plan).unwrap().mean_relative_error;
            assert!(selection.report.mean_relative_error <= err);
        }
    }
}
