//! Synthetic datasets for the integration tests.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use stprofile::data_model::{
    Component, ComponentKind, CoordinateSpec, DatasetSchema, Dimension, MappingRef, SplitShares, SubFeature, TableName,
    ValueClass,
};
use stprofile::storage::{write_dataset, Cell, InMemoryDataset, Token, ValueBlock};

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// A column of one of several shapes: uniform, normal, small integers
/// (many ties), heavy-tailed with outliers, or constant.
pub fn random_column(rng: &mut ChaCha8Rng, rows: usize) -> Vec<f64> {
    let kind = rng.gen_range(0..5);
    let scale = rng.gen_range(0.1..100.0);
    let shift = rng.gen_range(-50.0..50.0);
    (0..rows)
        .map(|_| match kind {
            0 => shift + scale * rng.gen::<f64>(),
            1 => shift + scale * normal(rng),
            2 => f64::from(rng.gen_range(0..6)),
            3 => {
                let v = normal(rng);
                if rng.gen_bool(0.05) {
                    v * 40.0
                } else {
                    v
                }
            }
            _ => shift,
        })
        .collect()
}

pub fn random_columns(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    (0..cols).map(|_| random_column(rng, rows)).collect()
}

/// Schema with coordinate-only columns `t` and `site`, inline features
/// `x` of width `dx` and labels `y` of width `dy`.
pub fn columns_schema(name: &str, dx: usize, dy: usize, tables: &[TableName]) -> DatasetSchema {
    DatasetSchema {
        name: name.into(),
        shares: SplitShares::new(0.6, 0.2, 0.2),
        coordinates: CoordinateSpec {
            time: vec!["t".into()],
            space: vec!["site".into()],
        },
        tables: tables.iter().map(|t| (*t, format!("{}.csv", t.as_str()))).collect(),
        mappings: Vec::new(),
        features: vec![Component {
            kind: ComponentKind::SpaceTime,
            sub_features: vec![SubFeature::inline("x", dx)],
        }],
        labels: vec![Component {
            kind: ComponentKind::SpaceTime,
            sub_features: vec![SubFeature::inline("y", dy)],
        }],
    }
}

/// Split of column data: (table, feature columns, label columns).
pub type SplitColumns = (TableName, Vec<Vec<f64>>, Vec<Vec<f64>>);

/// Writes a dataset whose rows are `[t, site, x.., y..]`.
pub fn write_columns_dataset(dir: &Path, name: &str, splits: &[SplitColumns]) -> PathBuf {
    let (dx, dy) = (splits[0].1.len(), splits[0].2.len());
    let tables: Vec<TableName> = splits.iter().map(|s| s.0).collect();
    let schema = columns_schema(name, dx, dy, &tables);
    let mut rows_by_table = BTreeMap::new();
    let mut t = 0.0;
    for (table, xs, ys) in splits {
        let n = xs.first().or(ys.first()).map_or(0, Vec::len);
        let rows: Vec<Vec<Cell>> = (0..n)
            .map(|r| {
                t += 1.0;
                let mut row = vec![Cell::Num(t), Cell::Num((r % 7) as f64)];
                row.extend(xs.iter().map(|c| Cell::Num(c[r])));
                row.extend(ys.iter().map(|c| Cell::Num(c[r])));
                row
            })
            .collect();
        rows_by_table.insert(*table, rows);
    }
    let data = InMemoryDataset {
        schema,
        tables: rows_by_table,
        stores: BTreeMap::new(),
    };
    write_dataset(&data, dir).expect("write synthetic dataset")
}

/// Pool table over a `sites x times` grid. Rows: `[t, site, x, y]` with
/// `x = site * times + t` and `y = 2x`.
pub fn grid_dataset(dir: &Path, sites: usize, times: usize) -> PathBuf {
    let mut schema = columns_schema("grid", 1, 1, &[TableName::Pool]);
    schema.shares = SplitShares::new(1.0, 0.0, 0.0);
    let rows: Vec<Vec<Cell>> = (0..sites)
        .flat_map(|s| {
            (0..times).map(move |t| {
                let x = (s * times + t) as f64;
                vec![Cell::Num(t as f64), Cell::Num(s as f64), Cell::Num(x), Cell::Num(2.0 * x)]
            })
        })
        .collect();
    let data = InMemoryDataset {
        schema,
        tables: BTreeMap::from([(TableName::Pool, rows)]),
        stores: BTreeMap::new(),
    };
    write_dataset(&data, dir).expect("write grid dataset")
}

/// Two time components (`day`, `hour`) and two space components (`lat`,
/// `lon`) on a pool table, for splitter property tests.
pub fn multi_coordinate_dataset(dir: &Path, rng: &mut ChaCha8Rng, rows: usize) -> PathBuf {
    let schema = DatasetSchema {
        name: "multi".into(),
        shares: SplitShares::new(1.0, 0.0, 0.0),
        coordinates: CoordinateSpec {
            time: vec!["day".into(), "hour".into()],
            space: vec!["lat".into(), "lon".into()],
        },
        tables: BTreeMap::from([(TableName::Pool, "pool.csv".into())]),
        mappings: Vec::new(),
        features: vec![Component {
            kind: ComponentKind::Time,
            sub_features: vec![SubFeature::inline("x", 1)],
        }],
        labels: vec![Component {
            kind: ComponentKind::Time,
            sub_features: vec![SubFeature::inline("y", 1)],
        }],
    };
    let rows: Vec<Vec<Cell>> = (0..rows)
        .map(|_| {
            vec![
                Cell::Num(f64::from(rng.gen_range(0..30))),
                Cell::Num(f64::from(rng.gen_range(0..24))),
                Cell::Num(f64::from(rng.gen_range(0..5)) * 0.5),
                Cell::Num(f64::from(rng.gen_range(0..4)) * 0.25),
                Cell::Num(rng.gen()),
                Cell::Num(rng.gen()),
            ]
        })
        .collect();
    let data = InMemoryDataset {
        schema,
        tables: BTreeMap::from([(TableName::Pool, rows)]),
        stores: BTreeMap::new(),
    };
    write_dataset(&data, dir).expect("write multi-coordinate dataset")
}

fn random_word(rng: &mut ChaCha8Rng) -> String {
    const WORDS: [&str; 8] = ["alpha", "beta", "gamma", "delta", "na\u{ef}ve", "x,y", "q\"uote", "sp ace"];
    WORDS[rng.gen_range(0..WORDS.len())].to_string()
}

fn awkward_number(rng: &mut ChaCha8Rng) -> f64 {
    match rng.gen_range(0..6) {
        0 => 0.1 + 0.2,
        1 => -0.0,
        2 => f64::MIN_POSITIVE * rng.gen::<f64>(),
        3 => 1e300 * rng.gen::<f64>(),
        4 => -normal(rng) * 1e-7,
        _ => normal(rng),
    }
}

/// Dataset with inline, regular-mapped, irregular numeric and token
/// sub-features on train/val/test tables.
pub fn random_rich_dataset(rng: &mut ChaCha8Rng, rows: [usize; 3]) -> InMemoryDataset {
    let schema = DatasetSchema {
        name: "rich".into(),
        shares: SplitShares::new(0.5, 0.25, 0.25),
        coordinates: CoordinateSpec {
            time: vec!["t".into()],
            space: vec!["node".into()],
        },
        tables: BTreeMap::from([
            (TableName::Train, "train.csv".into()),
            (TableName::Val, "val.csv".into()),
            (TableName::Test, "test.csv".into()),
        ]),
        mappings: vec![
            MappingRef {
                column: "node".into(),
                file: "nodes.csv".into(),
                regular: true,
            },
            MappingRef {
                column: "mol".into(),
                file: "side/mols.json".into(),
                regular: false,
            },
            MappingRef {
                column: "doc".into(),
                file: "docs.json".into(),
                regular: false,
            },
        ],
        features: vec![
            Component {
                kind: ComponentKind::Time,
                sub_features: vec![SubFeature::inline("hour", 1)],
            },
            Component {
                kind: ComponentKind::Space,
                sub_features: vec![SubFeature::mapped("geo", Dimension::Fixed(3), "node")],
            },
            Component {
                kind: ComponentKind::SpaceTime,
                sub_features: vec![
                    SubFeature::inline("w", 2),
                    SubFeature::mapped("atoms", Dimension::Range { min: 1, max: 8 }, "mol"),
                    SubFeature::mapped("text", Dimension::Range { min: 1, max: 6 }, "doc")
                        .with_class(ValueClass::Tokens),
                ],
            },
        ],
        labels: vec![Component {
            kind: ComponentKind::SpaceTime,
            sub_features: vec![SubFeature::inline("y", 2)],
        }],
    };

    let n_nodes = rng.gen_range(1..6);
    let nodes: BTreeMap<String, ValueBlock> = (0..n_nodes)
        .map(|i| {
            (
                format!("n{i}"),
                ValueBlock::Numeric((0..3).map(|_| awkward_number(rng)).collect()),
            )
        })
        .collect();
    let total: usize = rows.iter().sum();
    let mols: BTreeMap<String, ValueBlock> = (0..total.max(1))
        .map(|i| {
            let len = rng.gen_range(1..=8);
            (format!("m{i}"), ValueBlock::Numeric((0..len).map(|_| awkward_number(rng)).collect()))
        })
        .collect();
    let docs: BTreeMap<String, ValueBlock> = (0..total.max(1))
        .map(|i| {
            let len = rng.gen_range(1..=6);
            let mut pos = 0;
            let toks = (0..len)
                .map(|_| {
                    let w = random_word(rng);
                    let t = Token(pos, pos + w.len(), w);
                    pos = t.1 + 1;
                    t
                })
                .collect();
            (format!("d{i}"), ValueBlock::Tokens(toks))
        })
        .collect();

    let mut tables = BTreeMap::new();
    let mut k = 0;
    for (table, n) in [TableName::Train, TableName::Val, TableName::Test].into_iter().zip(rows) {
        let rows: Vec<Vec<Cell>> = (0..n)
            .map(|_| {
                k += 1;
                // layout order: t, hour, node, w_0, w_1, mol, doc, y_0, y_1
                vec![
                    Cell::Num(k as f64),
                    Cell::Num(f64::from(rng.gen_range(0..24))),
                    Cell::Id(format!("n{}", rng.gen_range(0..n_nodes))),
                    Cell::Num(awkward_number(rng)),
                    Cell::Num(awkward_number(rng)),
                    Cell::Id(format!("m{}", k - 1)),
                    Cell::Id(format!("d{}", k - 1)),
                    Cell::Num(awkward_number(rng)),
                    Cell::Num(awkward_number(rng)),
                ]
            })
            .collect();
        tables.insert(table, rows);
    }
    InMemoryDataset {
        schema,
        tables,
        stores: BTreeMap::from([("node".into(), nodes), ("mol".into(), mols), ("doc".into(), docs)]),
    }
}
