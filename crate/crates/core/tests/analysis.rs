mod common;

use common::*;
use dmmd_core::analysis::{
    criticisms, grouped_weights, weight_ratio, weighted_attribute_moments, RatioClass, SharedSupport,
};
use dmmd_core::{DatasetCollection, EmbeddingTable, KernelModel};
use proptest::prelude::*;
use rand::Rng;

fn random_support(inst: &Instance, seed: u64) -> SharedSupport {
    let mut r = rng(seed);
    let n_u = inst.candidates.len();
    let m = r.random_range(1..=n_u);
    let idx = random_subset(&mut r, n_u, m);
    SharedSupport {
        labels: inst.collection.labels().to_vec(),
        rows: idx.iter().map(|&i| inst.candidates[i]).collect(),
        weights: (0..inst.collection.len()).map(|_| random_simplex(&mut r, m)).collect(),
    }
}

/// Witness values by two explicit loops, sorted by (value desc, row asc).
fn exhaustive_ranking(inst: &Instance, s: &SharedSupport, t: usize) -> Vec<(usize, f64)> {
    let rows = inst.collection.rows(t);
    let n = rows.len() as f64;
    let mut all: Vec<(usize, f64)> = rows
        .iter()
        .map(|&r| {
            let x = inst.table.row(r);
            let mut data = 0.0;
            for &q in rows {
                data += k(&inst.kernel, x, inst.table.row(q));
            }
            let mut model = 0.0;
            for (&u, w) in s.rows.iter().zip(&s.weights[t]) {
                model += w * k(&inst.kernel, x, inst.table.row(u));
            }
            (r, data / n - model)
        })
        .collect();
    all.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    all
}

#[test]
fn criticisms_match_exhaustive_sort() {
    for seed in 0..20u64 {
        let mut r = rng(500 + seed);
        let sizes = [r.random_range(5..=40), r.random_range(5..=40)];
        let inst = random_instance(seed, r.random_range(1..=5), &sizes, r.random_range(1..=15));
        let s = random_support(&inst, seed);
        for t in 0..2 {
            let kk = r.random_range(1..=sizes[t]);
            let label = &inst.collection.labels()[t];
            let got = criticisms(&inst.kernel, &inst.table, &inst.collection, &s, label, kk).unwrap();
            let want = exhaustive_ranking(&inst, &s, t);
            assert_eq!(got.entries.len(), kk);
            for (g, w) in got.entries.iter().zip(&want) {
                assert_eq!(g.row, w.0, "seed {seed} dataset {t}");
                assert!((g.witness - w.1).abs() < 1e-12);
            }
            assert!(got.entries.windows(2).all(|p| p[0].witness >= p[1].witness));
        }
    }
}

#[test]
fn planted_outlier_ranks_first() {
    let mut r = rng(11);
    let mut table = EmbeddingTable::new(2).unwrap();
    let mut rows: Vec<usize> = (0..30)
        .map(|i| {
            table
                .push(format!("x{i}"), &[r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)])
                .unwrap()
        })
        .collect();
    let inliers = rows.clone();
    let outlier = table.push("far", &[50.0, 50.0]).unwrap();
    rows.insert(13, outlier);
    let mut coll = DatasetCollection::new();
    coll.add_dataset(&table, "d", rows).unwrap();
    let kernel = KernelModel::single(1.0).unwrap();
    let s = SharedSupport {
        labels: vec!["d".into()],
        rows: inliers.clone(),
        weights: vec![vec![1.0 / 30.0; 30]],
    };
    let c = criticisms(&kernel, &table, &coll, &s, "d", 5).unwrap();
    assert_eq!(c.entries[0].row, outlier);
    assert!((c.entries[0].witness - 1.0 / 31.0).abs() < 1e-12);
    assert!(c.entries[1..].iter().all(|e| e.witness < 0.0));
}

#[test]
fn empirical_measure_gives_zero_witness_and_first_rows() {
    let inst = random_instance(4, 3, &[12], 1);
    let rows = inst.collection.rows(0).to_vec();
    let s = SharedSupport {
        labels: vec!["t0".into()],
        rows: rows.clone(),
        weights: vec![vec![1.0 / 12.0; 12]],
    };
    let c = criticisms(&inst.kernel, &inst.table, &inst.collection, &s, "t0", 4).unwrap();
    assert!(c.entries.iter().all(|e| e.witness == 0.0));
    let got: Vec<usize> = c.entries.iter().map(|e| e.row).collect();
    assert_eq!(got, rows[..4]);
}

#[test]
fn criticism_count_is_bounded_by_dataset_size() {
    let inst = random_instance(5, 2, &[6], 3);
    let s = random_support(&inst, 1);
    assert!(criticisms(&inst.kernel, &inst.table, &inst.collection, &s, "t0", 0).is_err());
    assert!(criticisms(&inst.kernel, &inst.table, &inst.collection, &s, "t0", 7).is_err());
    assert!(criticisms(&inst.kernel, &inst.table, &inst.collection, &s, "t0", 6).is_ok());
}

fn labelled(seed: u64, groups: usize) -> (Instance, SharedSupport, Vec<String>, Vec<f64>) {
    let mut inst = random_instance(seed, 2, &[10, 10, 10], 12);
    let mut r = rng(seed + 99);
    let mut cat = Vec::new();
    let mut num = Vec::new();
    for row in 0..inst.table.len() {
        let g = format!("g{}", r.random_range(0..groups));
        let v = r.random_range(1900.0..2020.0f64).round();
        inst.collection.set_attribute("cls", row, g.clone());
        inst.collection.set_attribute("year", row, v.to_string());
        cat.push(g);
        num.push(v);
    }
    let s = random_support(&inst, seed);
    (inst, s, cat, num)
}

#[test]
fn grouped_weights_match_brute_force() {
    for seed in 0..20 {
        let (inst, s, cat, _) = labelled(seed, 4);
        let g = grouped_weights(&inst.table, &inst.collection, &s, "cls").unwrap();
        for (t, w) in s.weights.iter().enumerate() {
            let total: f64 = g.mass[t].iter().sum();
            assert!((total - 1.0).abs() < 1e-9);
            for (gi, name) in g.groups.iter().enumerate() {
                let mut want = 0.0;
                for (j, &row) in s.rows.iter().enumerate() {
                    if &cat[row] == name {
                        want += w[j];
                    }
                }
                assert!((g.mass[t][gi] - want).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn grouped_weights_name_unlabelled_rows() {
    let (mut inst, s, _, _) = labelled(3, 2);
    inst.collection = {
        let mut c = DatasetCollection::new();
        for t in 0..3 {
            c.add_dataset(&inst.table, format!("t{t}"), inst.collection.rows(t).to_vec()).unwrap();
        }
        c
    };
    let e = grouped_weights(&inst.table, &inst.collection, &s, "cls").unwrap_err();
    let msg = e.to_string();
    assert!(msg.contains("cls"), "{msg}");
    assert!(msg.contains(inst.table.id(s.rows[0])), "{msg}");
}

#[test]
fn moments_match_two_pass_oracle() {
    for seed in 0..20 {
        let (inst, s, _, num) = labelled(seed, 2);
        let got = weighted_attribute_moments(&inst.table, &inst.collection, &s, "year").unwrap();
        for (t, w) in s.weights.iter().enumerate() {
            let a: Vec<f64> = s.rows.iter().map(|&r| num[r]).collect();
            let mean: f64 = w.iter().zip(&a).map(|(wi, ai)| wi * ai).sum();
            let var: f64 = w.iter().zip(&a).map(|(wi, ai)| wi * (ai - mean) * (ai - mean)).sum();
            assert!((got[t].mean - mean).abs() <= 1e-12 * mean.abs(), "seed {seed}");
            assert!((got[t].sd - var.sqrt()).abs() <= 1e-12 * mean.abs(), "seed {seed}");
        }
    }
}

#[test]
fn moments_simple_cases() {
    let mut table = EmbeddingTable::new(1).unwrap();
    let mut coll = DatasetCollection::new();
    for (i, y) in ["1990", "2000", "1987"].iter().enumerate() {
        table.push(format!("r{i}"), &[i as f64]).unwrap();
        coll.set_attribute("year", i, *y);
    }
    coll.add_dataset(&table, "d", vec![0, 1, 2]).unwrap();
    let pair = SharedSupport {
        labels: vec!["d".into()],
        rows: vec![0, 1],
        weights: vec![vec![0.5, 0.5]],
    };
    let m = weighted_attribute_moments(&table, &coll, &pair, "year").unwrap();
    assert_eq!((m[0].mean, m[0].sd), (1995.0, 5.0));
    let single = SharedSupport {
        labels: vec!["d".into()],
        rows: vec![2],
        weights: vec![vec![1.0]],
    };
    let m = weighted_attribute_moments(&table, &coll, &single, "year").unwrap();
    assert_eq!((m[0].mean, m[0].sd), (1987.0, 0.0));
    assert!(weighted_attribute_moments(&table, &coll, &single, "month").is_err());
}

proptest! {
    #[test]
    fn ratio_swap_inverts_and_exchanges_sets(
        pairs in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..30),
        upper in 1.01f64..10.0,
    ) {
        let wa: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let wb: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let s = SharedSupport {
            labels: vec!["a".into(), "b".into()],
            rows: (0..pairs.len()).collect(),
            weights: vec![wa, wb],
        };
        let lower = 1.0 / upper;
        let ab = weight_ratio(&s, "a", "b", upper, lower).unwrap();
        let ba = weight_ratio(&s, "b", "a", upper, lower).unwrap();
        for e in &ab.entries {
            let f = ba.entries.iter().find(|x| x.exemplar == e.exemplar).unwrap();
            if let (Some(x), Some(y)) = (e.ratio, f.ratio) {
                if x > 0.0 {
                    prop_assert!((x * y - 1.0).abs() < 1e-12);
                    prop_assert!(x > 0.0);
                }
            }
        }
        let set = |r: &dmmd_core::analysis::RatioReport, c: RatioClass| -> Vec<usize> {
            r.entries.iter().filter(|e| e.class == c && e.ratio.is_some_and(|f| f > 0.0)).map(|e| e.exemplar).collect()
        };
        let finite_both = |r: &dmmd_core::analysis::RatioReport, c| -> Vec<usize> {
            set(r, c).into_iter().filter(|i| s.weights[0][*i] > 1e-15 && s.weights[1][*i] > 1e-15).collect()
        };
        prop_assert_eq!(finite_both(&ab, RatioClass::OverB), finite_both(&ba, RatioClass::OverA));
        prop_assert_eq!(finite_both(&ab, RatioClass::OverA), finite_both(&ba, RatioClass::OverB));
    }
}
