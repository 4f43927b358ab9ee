use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use stprofile::data_model::{
    Component, ComponentKind, CoordinateSpec, DatasetSchema, Dimension, MappingRef, SplitShares, SubFeature, TableName,
};
use stprofile::storage::{write_dataset, Cell, InMemoryDataset, ValueBlock};

fn stprofile(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stprofile"))
        .args(args)
        .env_remove("STPROFILE_THREADS")
        .output()
        .expect("run stprofile")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn schema(tables: &[TableName], label: SubFeature, mappings: Vec<MappingRef>) -> DatasetSchema {
    DatasetSchema {
        name: "demo".into(),
        shares: SplitShares::new(0.6, 0.2, 0.2),
        coordinates: CoordinateSpec {
            time: vec!["t".into()],
            space: vec!["site".into()],
        },
        tables: tables.iter().map(|t| (*t, format!("{}.csv", t.as_str()))).collect(),
        mappings,
        features: vec![Component {
            kind: ComponentKind::SpaceTime,
            sub_features: vec![SubFeature::inline("x", 2)],
        }],
        labels: vec![Component {
            kind: ComponentKind::SpaceTime,
            sub_features: vec![label],
        }],
    }
}

/// Deterministic pseudo-random value in [0, 1).
fn hash01(i: u64) -> f64 {
    let mut z = i.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 31)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    (z >> 11) as f64 / (1u64 << 53) as f64
}

/// Rows `[t, site, x_0, x_1, y]` with `y = 2 x_0`.
fn demo_dataset(dir: &Path) -> PathBuf {
    let tables = [TableName::Train, TableName::Val, TableName::Test];
    let mut rows = BTreeMap::new();
    let mut k = 0u64;
    for (table, n) in tables.iter().zip([600, 200, 200]) {
        let r: Vec<Vec<Cell>> = (0..n)
            .map(|_| {
                k += 1;
                let (a, b) = (hash01(2 * k), hash01(2 * k + 1));
                vec![
                    Cell::Num((k % 50) as f64),
                    Cell::Num((k % 13) as f64),
                    Cell::Num(a),
                    Cell::Num(b),
                    Cell::Num(2.0 * a),
                ]
            })
            .collect();
        rows.insert(*table, r);
    }
    let data = InMemoryDataset {
        schema: schema(&tables, SubFeature::inline("y", 1), Vec::new()),
        tables: rows,
        stores: BTreeMap::new(),
    };
    write_dataset(&data, dir).unwrap()
}

fn variable_label_dataset(dir: &Path) -> PathBuf {
    let tables = [TableName::Train, TableName::Test];
    let label = SubFeature::mapped("answer", Dimension::Range { min: 1, max: 5 }, "ans");
    let mapping = MappingRef {
        column: "ans".into(),
        file: "answers.json".into(),
        regular: false,
    };
    let row = |k: f64| vec![Cell::Num(k), Cell::Num(0.0), Cell::Num(k), Cell::Num(k), Cell::Id("a".into())];
    let data = InMemoryDataset {
        schema: schema(&tables, label, vec![mapping]),
        tables: BTreeMap::from([(TableName::Train, vec![row(0.0), row(1.0)]), (TableName::Test, vec![row(2.0)])]),
        stores: BTreeMap::from([(
            "ans".into(),
            BTreeMap::from([("a".into(), ValueBlock::Numeric(vec![1.0, 2.0]))]),
        )]),
    };
    write_dataset(&data, dir).unwrap()
}

#[test]
fn capacity_presets_print_reference_rows() {
    let o = stprofile(&["capacity", "--all-presets"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("buildings-92 | 3,206,016 | 56/09/35 % | 521 | 96 | 172M | 90B"));
    assert!(text.contains("days-245 | 3,517,359 | 35/13/52 % | 4,610 | 288 | 355M | 1.6T"));
    assert!(text.contains("pristine-sky | 11,452,416 | 51/12/37 % | 970 | 298 | 1.7B | 1.7T"));
    assert_eq!(text.lines().count(), 10);
}

#[test]
fn capacity_from_arguments_and_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cap.json");
    let o = stprofile(&[
        "capacity", "--n", "430", "--shares", "0.22/0.16/0.62", "--dx", "17-4963", "--dy", "42", "--name", "articles", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("articles | 430 | 22/16/62 % | 17-4,963 | 42 | 0.004M |"));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(json["tool"], "stprofile");
    assert_eq!(json["command"], "capacity");
    assert_eq!(json["result"][0]["ipt"], 3973);
}

#[test]
fn unknown_preset_fails() {
    let o = stprofile(&["capacity", "--preset", "nope"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown preset"));
}

#[test]
fn zero_fraction_split_keeps_all_rows_in_train() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = demo_dataset(dir.path());
    let out = dir.path().join("split");
    let o = stprofile(&[
        "split", "--manifest", manifest.to_str().unwrap(), "--spatial-frac", "0", "--temporal-frac", "0", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("train\t1000\t1.0000"));
    let csv = fs::read_to_string(out.join("assignment.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1001);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",train")));
}

#[test]
fn split_materializes_a_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = demo_dataset(dir.path());
    let out = dir.path().join("split");
    let o = stprofile(&[
        "split", "--manifest", manifest.to_str().unwrap(), "--seed", "3", "--materialize", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("dataset/manifest.toml").exists());
    let o = stprofile(&["capacity", "--manifest", out.join("dataset/manifest.toml").to_str().unwrap()]);
    assert!(o.status.success());
}

#[test]
fn corrupt_table_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = demo_dataset(dir.path());
    let path = dir.path().join("train.csv");
    let mut text = fs::read_to_string(&path).unwrap();
    text.push_str("1,2,not-a-number,4,5\n");
    fs::write(&path, text).unwrap();
    let o = stprofile(&["profile", "--manifest", manifest.to_str().unwrap()]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.starts_with("error: "), "{err}");
    assert!(err.contains("not-a-number"), "{err}");
}

#[test]
fn variable_length_labels_are_unsupported() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = variable_label_dataset(dir.path());
    let o = stprofile(&["benchmark", "--manifest", manifest.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("unsupported task"));
}

#[test]
fn benchmark_prints_a_row() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = demo_dataset(dir.path());
    let out = dir.path().join("bench.json");
    let o = stprofile(&[
        "benchmark", "--manifest", manifest.to_str().unwrap(), "--trees", "16", "--sample-ratio", "0.5", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("demo | 50% | 20 | r2 "));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(json["result"]["train_rows"], 300);
    assert!(json["result"]["metric"].as_f64().unwrap() > 0.9);
}

#[test]
fn score_prints_one_line_per_kind() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = demo_dataset(dir.path());
    let o = stprofile(&["score", "--manifest", manifest.to_str().unwrap(), "--score", "all"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 4);
    let io = text.lines().find(|l| l.starts_with("io\t")).unwrap();
    let v: f64 = io.rsplit('\t').next().unwrap().parse().unwrap();
    assert!((0.0..=1.0).contains(&v));
}

#[test]
fn profile_is_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = demo_dataset(dir.path());
    let mut outputs = Vec::new();
    for threads in ["1", "2", "8"] {
        let out = dir.path().join(format!("profile-{threads}.json"));
        let o = stprofile(&[
            "--threads", threads, "profile", "--manifest", manifest.to_str().unwrap(), "--out", out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(fs::read(out).unwrap());
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
    let json: serde_json::Value = serde_json::from_slice(&outputs[0]).unwrap();
    assert_eq!(json["command"], "profile");
    assert_eq!(json["result"]["capacity"]["dims"]["n"], 1000);
}

#[test]
fn zero_threads_is_rejected() {
    let o = stprofile(&["--threads", "0", "capacity", "--all-presets"]);
    assert!(!o.status.success());
}
