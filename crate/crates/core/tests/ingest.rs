use dmmd_core::data::partition_by_attribute;
use dmmd_core::synthetic::{presets, MixtureComponent};
use dmmd_core::{Binning, DatasetCollection, EmbeddingTable, MixtureSpec};
use proptest::prelude::*;

/// Exact two-sided tail `P(|X/n − p| > tol)` for `X ~ Binomial(n, p)`, by
/// summing the pmf built with the ratio recurrence.
fn binomial_two_sided_tail(n: u64, p: f64, tol: f64) -> f64 {
    let mut pmf = (1.0 - p).powi(n as i32);
    let mut tail = 0.0;
    for x in 0..=n {
        if ((x as f64 / n as f64) - p).abs() > tol {
            tail += pmf;
        }
        pmf *= (n - x) as f64 / (x + 1) as f64 * p / (1.0 - p);
    }
    tail
}

#[test]
fn gauss3_proportions_near_one_third() {
    // the band is about four standard deviations wide: a correct sampler
    // misses it with probability ~5e-5 per component
    let tail = binomial_two_sided_tail(250, 1.0 / 3.0, 0.12);
    assert!(tail < 1e-4, "tail {tail}");
    let s = presets::gauss3().sample(250, 1).unwrap();
    assert_eq!(s.points.len(), 250);
    for k in 0..3 {
        let p = s.components.iter().filter(|&&c| c == k).count() as f64 / 250.0;
        assert!((p - 1.0 / 3.0).abs() <= 0.12, "component {k}: {p}");
    }
}

#[test]
fn sampling_is_reproducible_and_streams_differ() {
    let spec = presets::gauss3();
    let a = spec.sample(50, 9).unwrap();
    let b = spec.sample(50, 9).unwrap();
    assert_eq!(a, b);
    assert_eq!(spec.sample_stream(50, 9, 0).unwrap(), a);
    assert_ne!(spec.sample_stream(50, 9, 1).unwrap().points, a.points);
    assert_ne!(spec.sample(50, 10).unwrap().points, a.points);
    assert!(spec.sample(0, 1).is_err());
}

#[test]
fn sample_moments_follow_the_spec() {
    let spec = MixtureSpec::new(vec![MixtureComponent {
        mean: vec![1.0, -2.0],
        covariance: vec![2.0, 0.6, 0.6, 1.0],
        weight: 1.0,
    }])
    .unwrap();
    let s = spec.sample(20000, 3).unwrap();
    let n = s.points.len() as f64;
    let mean: Vec<f64> = (0..2).map(|j| s.points.iter().map(|p| p[j]).sum::<f64>() / n).collect();
    let cov = |a: usize, b: usize| s.points.iter().map(|p| (p[a] - mean[a]) * (p[b] - mean[b])).sum::<f64>() / n;
    // standard errors are about 0.01 for the means and 0.02 for the covariances
    assert!((mean[0] - 1.0).abs() < 0.05 && (mean[1] + 2.0).abs() < 0.05);
    assert!((cov(0, 0) - 2.0).abs() < 0.1);
    assert!((cov(0, 1) - 0.6).abs() < 0.1);
    assert!((cov(1, 1) - 1.0).abs() < 0.1);
}

#[test]
fn invalid_mixtures_are_rejected() {
    let comp = |cov: Vec<f64>, w: f64| MixtureComponent {
        mean: vec![0.0, 0.0],
        covariance: cov,
        weight: w,
    };
    assert!(MixtureSpec::new(vec![comp(vec![1.0, 0.0, 0.0, 0.0], 1.0)]).is_err());
    assert!(MixtureSpec::new(vec![comp(vec![1.0, 0.5, 0.4, 1.0], 1.0)]).is_err());
    assert!(MixtureSpec::new(vec![comp(vec![1.0, 0.0, 0.0, 1.0], 0.6)]).is_err());
    assert!(MixtureSpec::new(vec![comp(vec![1.0, 0.0, 0.0, 1.0], 0.5), comp(vec![1.0, 0.0, 0.0, 1.0], 0.5)]).is_ok());
    assert!(MixtureSpec::new(vec![comp(vec![1.0, 2.0, 2.0, 1.0], 1.0)]).is_err());
}

#[test]
fn skewpair_presets_mirror_each_other() {
    let a = presets::skew_a();
    let b = presets::skew_b();
    let n = presets::SKEW_COMPONENTS;
    for k in 0..n {
        assert_eq!(a.components()[k].weight, b.components()[n - 1 - k].weight);
        assert_eq!(a.components()[k].mean, b.components()[k].mean);
    }
    let total: f64 = a.components().iter().map(|c| c.weight).sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert!(presets::skew_balanced().components().iter().all(|c| c.weight == 1.0 / n as f64));
}

fn collection_with_years(years: &[i32], splits: &[usize]) -> (EmbeddingTable, DatasetCollection) {
    let mut table = EmbeddingTable::new(1).unwrap();
    let mut coll = DatasetCollection::new();
    for (i, y) in years.iter().enumerate() {
        table.push(format!("r{i}"), &[i as f64]).unwrap();
        coll.set_attribute("year", i, y.to_string());
    }
    let mut start = 0;
    for (t, &end) in splits.iter().chain([&years.len()]).enumerate() {
        if end > start {
            coll.add_dataset(&table, format!("s{t}"), (start..end).collect()).unwrap();
        }
        start = end;
    }
    (table, coll)
}

proptest! {
    #[test]
    fn partition_is_exhaustive_and_disjoint(
        years in prop::collection::vec(1900i32..2020, 1..200),
        width in 1.0f64..30.0,
        split in 0.0f64..1.0,
        categorical in any::<bool>(),
    ) {
        let cut = ((years.len() as f64) * split) as usize;
        let (table, coll) = collection_with_years(&years, &[cut]);
        let binning = if categorical {
            Binning::Categorical
        } else {
            Binning::Width { width, origin: 1900.0 }
        };
        let p = partition_by_attribute(&table, &coll, "year", &binning).unwrap();
        let mut seen = vec![0u32; years.len()];
        for t in 0..p.len() {
            prop_assert!(!p.rows(t).is_empty());
            for &r in p.rows(t) {
                seen[r] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
        for t in 0..p.len() {
            let first = p.rows(t)[0];
            for &r in p.rows(t) {
                if categorical {
                    prop_assert_eq!(years[r], years[first]);
                } else {
                    let bin = |y: i32| ((y as f64 - 1900.0) / width).floor();
                    prop_assert_eq!(bin(years[r]), bin(years[first]));
                }
                prop_assert_eq!(p.attribute("year", r).map(str::to_string), Some(years[r].to_string()));
            }
        }
    }
}
