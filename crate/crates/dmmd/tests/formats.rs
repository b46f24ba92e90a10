use std::fs;

use dmmd::cachefile::{read_cache, write_cache};
use dmmd::coreset::CoresetFile;
use dmmd::manifest::{load_collection, write_collection};
use dmmd::synth::{self, Preset};
use dmmd_core::kernels::build_additive_kernel;
use dmmd_core::selection::fit;
use dmmd_core::{Algorithm, DatasetCollection, EmbeddingTable, FitConfig, GramCache, NoClock};
use proptest::prelude::*;

const DECADES: [usize; 12] = [35, 98, 308, 1682, 2650, 2093, 2319, 2806, 2826, 2621, 2208, 602];

#[test]
fn decade_manifest_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let mut datasets = Vec::new();
    for (t, &n) in DECADES.iter().enumerate() {
        let decade = 1900 + 10 * t;
        let body: String = (0..n).map(|i| format!("{decade}-{i},{},{}\n", i % 7, t)).collect();
        fs::write(dir.path().join(format!("{decade}.csv")), body).unwrap();
        datasets.push(format!(r#"{{"name":"{decade}s","path":"{decade}.csv"}}"#));
    }
    fs::write(
        dir.path().join("m.json"),
        format!(r#"{{"id_column":true,"datasets":[{}]}}"#, datasets.join(",")),
    )
    .unwrap();
    let l = load_collection(&dir.path().join("m.json")).unwrap();
    assert_eq!(l.collection.len(), 12);
    let sizes: Vec<usize> = (0..12).map(|t| l.collection.rows(t).len()).collect();
    assert_eq!(sizes, DECADES);
    assert_eq!(l.table.len(), DECADES.iter().sum::<usize>());
    assert_eq!(l.candidates.len(), l.table.len());
}

fn special_f64() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
        Just(-0.0),
        Just(f64::MIN_POSITIVE / 3.0),
        Just(f64::MAX),
        Just(0.1 + 0.2),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn collection_round_trip_is_bit_exact(
        dim in 1usize..4,
        values in prop::collection::vec(special_f64(), 1..40),
        cut in 0.0f64..1.0,
        pool_every in 1usize..4,
        with_attr in any::<bool>(),
    ) {
        let n = values.len().div_ceil(dim);
        let mut table = EmbeddingTable::new(dim).unwrap();
        for i in 0..n {
            let v: Vec<f64> = (0..dim).map(|j| values[(i * dim + j) % values.len()]).collect();
            table.push(format!("id,{i}\"q"), &v).unwrap();
        }
        let split = ((n as f64 * cut) as usize).clamp(1, n);
        let mut coll = DatasetCollection::new();
        coll.add_dataset(&table, "first set", (0..split).collect()).unwrap();
        coll.add_dataset(&table, "second", (0..n).rev().collect()).unwrap();
        if with_attr {
            for r in (0..n).step_by(2) {
                coll.set_attribute("year", r, format!("{}", 1900 + r));
            }
        }
        let candidates: Vec<usize> = (0..n).step_by(pool_every).collect();
        let dir = tempfile::tempdir().unwrap();
        let m = write_collection(dir.path(), &table, &coll, &candidates).unwrap();
        let l = load_collection(&m).unwrap();
        prop_assert_eq!(l.table.len(), n);
        for r in 0..n {
            let back = l.table.find(table.id(r)).unwrap();
            let same = table.row(r).iter().zip(l.table.row(back)).all(|(a, b)| a.to_bits() == b.to_bits());
            prop_assert!(same);
        }
        prop_assert_eq!(l.collection.labels(), coll.labels());
        for t in 0..2 {
            let ids = |c: &DatasetCollection, tb: &EmbeddingTable| -> Vec<String> {
                c.rows(t).iter().map(|&r| tb.id(r).to_string()).collect()
            };
            prop_assert_eq!(ids(&l.collection, &l.table), ids(&coll, &table));
        }
        let cand_ids: Vec<&str> = l.candidates.iter().map(|&r| l.table.id(r)).collect();
        let want: Vec<&str> = candidates.iter().map(|&r| table.id(r)).collect();
        prop_assert_eq!(cand_ids, want);
        for r in 0..n {
            let back = l.table.find(table.id(r)).unwrap();
            prop_assert_eq!(l.collection.attribute("year", back), coll.attribute("year", r));
        }
    }
}

fn gauss3_cache() -> (synth::Synth, GramCache) {
    let s = synth::build(Preset::Gauss3, 60, 5).unwrap();
    let k = build_additive_kernel(&s.table, &s.collection, 2000, 0).unwrap();
    let cache = GramCache::build(&k, &s.table, &s.collection, &s.candidates, None).unwrap();
    (s, cache)
}

#[test]
fn gram_cache_file_round_trip() {
    let (_, cache) = gauss3_cache();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("g.bin");
    write_cache(&p, &cache).unwrap();
    let back = read_cache(&p).unwrap();
    assert_eq!(back, cache);
    let bits = |xs: &[f64]| xs.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(back.kuu()), bits(cache.kuu()));

    let bytes = fs::read(&p).unwrap();
    fs::write(&p, &bytes[..bytes.len() - 3]).unwrap();
    assert!(read_cache(&p).is_err());
    let mut bad = bytes.clone();
    bad[0] = b'X';
    fs::write(&p, &bad).unwrap();
    assert!(read_cache(&p).is_err());
}

#[test]
fn coreset_file_round_trip() {
    let (s, cache) = gauss3_cache();
    let c = fit(&cache, &FitConfig::new(Algorithm::DmmdOpt, 0.01), &NoClock).unwrap();
    let file = CoresetFile::new(&c, &cache, &s.table, 2000, 0);
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.json");
    file.write(&p).unwrap();
    let back = CoresetFile::read(&p).unwrap();
    assert_eq!(back, file);
    for (row, w) in back.weights.iter().zip(&c.ws.weights) {
        let a: Vec<u64> = row.weights.iter().map(|x| x.to_bits()).collect();
        let b: Vec<u64> = w.iter().map(|x| x.to_bits()).collect();
        assert_eq!(a, b);
    }
    let text = fs::read_to_string(&p).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in ["format", "algorithm", "epsilon_sq", "satisfied", "stop_reason", "kernel", "datasets", "support", "weights", "mmd_sq", "trace"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    // every weight literal carries 17 significant digits
    let raw = &text[text.find("\"weights\"").unwrap()..text.find("\"mmd_sq\"").unwrap()];
    let literals: Vec<&str> = raw
        .split(|ch: char| ch.is_whitespace() || ch == ',' || ch == '[' || ch == ']')
        .filter(|t| t.contains('e') && t.parse::<f64>().is_ok())
        .collect();
    assert!(!literals.is_empty());
    for lit in literals {
        let mantissa = lit.split('e').next().unwrap().trim_start_matches('-');
        assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{lit}");
    }
    let support = back.shared_support(&s.table).unwrap();
    assert_eq!(support.rows, c.support_rows(&cache));
    assert_eq!(back.kernel_model().unwrap().components(), cache.kernel().components());

    let mut t = EmbeddingTable::new(2).unwrap();
    t.push("nobody", &[0.0, 0.0]).unwrap();
    assert!(back.shared_support(&t).is_err());
}

#[test]
fn synth_directories_are_deterministic_and_loadable() {
    for preset in [Preset::Gauss3, Preset::Skewpair] {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        synth::build(preset, 40, 7).unwrap().write(a.path()).unwrap();
        synth::build(preset, 40, 7).unwrap().write(b.path()).unwrap();
        let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        for n in &names {
            assert_eq!(fs::read(a.path().join(n)).unwrap(), fs::read(b.path().join(n)).unwrap());
        }
        let l = load_collection(&a.path().join("manifest.json")).unwrap();
        assert_eq!(l.collection.len(), 2);
        assert!((0..2).all(|t| l.collection.rows(t).len() == 40));
        if preset == Preset::Skewpair {
            assert_eq!(l.candidates.len(), 80);
            let b_rows = l.collection.rows_of("b").unwrap();
            assert_eq!(&l.candidates[..40], b_rows);
            let meta: serde_json::Value =
                serde_json::from_str(&fs::read_to_string(a.path().join("metadata.json")).unwrap()).unwrap();
            assert_eq!(meta["overweighted_in_b"], serde_json::json!([4, 5, 6, 7]));
        }
    }
    let c = synth::build(Preset::Gauss3, 40, 8).unwrap();
    let d = synth::build(Preset::Gauss3, 40, 7).unwrap();
    assert_ne!(c.table.row(0), d.table.row(0));
}
