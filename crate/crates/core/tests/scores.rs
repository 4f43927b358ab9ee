mod support;

use proptest::prelude::*;
use rand::Rng;

use stprofile::scores::{
    io_score, jsd_probs, outlier_score, pair_score, quantiles, simb_score, stood_score, tukey_filter, InMemorySource,
    ScoreConfig,
};
use stprofile::storage::Group;
use stprofile::Error;
use support::{reference, synth};

const TOL: f64 = 1e-10;

fn source(features: Vec<Vec<f64>>, labels: Vec<Vec<f64>>) -> InMemorySource {
    InMemorySource::new("mem", features, labels).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn quantile_and_fence_examples() {
    let v: Vec<f64> = (1..=10).map(f64::from).collect();
    assert_eq!(quantiles(&v, &[0.25, 0.75]).unwrap(), vec![3.25, 7.75]);
    let mut w: Vec<f64> = (1..=9).map(f64::from).collect();
    w.push(100.0);
    let (kept, fences) = tukey_filter(&w).unwrap();
    assert_eq!(fences.inner, (-3.5, 14.5));
    assert!(!kept.contains(&100.0));
    assert_eq!(kept.len(), 9);
}

#[test]
fn jsd_point_value() {
    let v = jsd_probs(&[1.0, 0.0], &[0.5, 0.5]).unwrap();
    assert!(close(v, 0.3113, 1e-4), "{v}");
    assert!(close(v, reference::jsd(&[1.0, 0.0], &[0.5, 0.5]), 1e-12));
}

#[test]
fn io_point_value() {
    let v = pair_score(&[0.0, 1.0, 2.0], &[0.0, 2.0, 4.0]).unwrap();
    assert!(close(v, 2.0 / std::f64::consts::PI * 2f64.atan(), 1e-12));
    assert!(close(v, 0.7048, 1e-4));
}

#[test]
fn identities() {
    let cfg = ScoreConfig::default();
    let bins = cfg.bins;
    // one value per bin centre: exactly uniform
    let uniform: Vec<f64> = (0..bins).map(|i| i as f64 + 0.5).collect();
    let s = simb_score(&source(vec![uniform.clone()], vec![]), Group::Features, &cfg).unwrap();
    assert!(s.overall.abs() <= TOL, "{}", s.overall);

    let a = source(vec![uniform.clone()], vec![uniform.clone()]);
    let s = stood_score(&a, &a, Group::Features, &cfg).unwrap();
    assert!(s.overall.abs() <= TOL);

    let left: Vec<f64> = (0..1000).map(|i| f64::from(i) / 1000.0).collect();
    let right: Vec<f64> = left.iter().map(|v| v + 2.0).collect();
    let s = stood_score(&source(vec![left.clone()], vec![]), &source(vec![right], vec![]), Group::Features, &cfg).unwrap();
    assert!((s.overall - 1.0).abs() <= TOL, "{}", s.overall);

    let x: Vec<f64> = (0..500).map(f64::from).collect();
    let s = io_score(&source(vec![x.clone()], vec![vec![3.0; 500]]), &cfg).unwrap();
    assert!(s.overall.abs() <= TOL);
    let s = io_score(&source(vec![x.clone()], vec![x.iter().map(|v| v + 7.0).collect()]), &cfg).unwrap();
    assert!((s.overall - 0.5).abs() <= TOL);

    let s = outlier_score(&source(vec![x], vec![]), Group::Features, &cfg).unwrap();
    assert!(s.overall.abs() <= TOL);
}

#[test]
fn empty_and_degenerate_inputs() {
    let cfg = ScoreConfig::default();
    let empty = source(vec![vec![]], vec![vec![]]);
    assert!(matches!(simb_score(&empty, Group::Features, &cfg), Err(Error::EmptyInput(_))));
    let one = source(vec![vec![1.0]], vec![vec![1.0]]);
    assert!(matches!(stood_score(&one, &empty, Group::Features, &cfg), Err(Error::EmptyInput(_))));
    assert!(matches!(io_score(&one, &cfg), Err(Error::EmptyInput(_))));
    let constant = source(vec![vec![2.0; 10]], vec![vec![1.0; 10]]);
    assert!(matches!(io_score(&constant, &cfg), Err(Error::UndefinedScore(_))));
    let s = simb_score(&constant, Group::Features, &cfg).unwrap();
    assert_eq!(s.overall, 1.0);
}

fn check_against_reference(seed: u64, features: Vec<Vec<f64>>, labels: Vec<Vec<f64>>, split: usize) {
    let cfg = ScoreConfig::default();
    let all = source(features.clone(), labels.clone());
    let simb = simb_score(&all, Group::Features, &cfg).unwrap().overall;
    let want = reference::simb(&features, cfg.bins);
    assert!(close(simb, want, TOL), "seed {seed}: simb {simb} vs {want}");
    let simb_l = simb_score(&all, Group::Labels, &cfg).unwrap().overall;
    let want = reference::simb(&labels, cfg.bins);
    assert!(close(simb_l, want, TOL), "seed {seed}: simb labels {simb_l} vs {want}");

    let head = |cols: &[Vec<f64>]| cols.iter().map(|c| c[..split].to_vec()).collect::<Vec<_>>();
    let tail = |cols: &[Vec<f64>]| cols.iter().map(|c| c[split..].to_vec()).collect::<Vec<_>>();
    let a = source(head(&features), head(&labels));
    let b = source(tail(&features), tail(&labels));
    let stood = stood_score(&a, &b, Group::Features, &cfg).unwrap().overall;
    let want = reference::stood(&head(&features), &tail(&features), cfg.bins);
    assert!(close(stood, want, TOL), "seed {seed}: stood {stood} vs {want}");

    match (io_score(&all, &cfg), reference::io(&features, &labels)) {
        (Ok(r), Some(want)) => assert!(close(r.overall, want, TOL), "seed {seed}: io {} vs {want}", r.overall),
        (Err(Error::UndefinedScore(_)), None) => {}
        (got, want) => panic!("seed {seed}: io {got:?} vs {want:?}"),
    }

    let out = outlier_score(&all, Group::Features, &cfg).unwrap().overall;
    let want = reference::outlier(&features);
    assert!(close(out, want, TOL), "seed {seed}: outlier {out} vs {want}");
}

#[test]
fn oracle_equivalence_random_datasets() {
    for seed in 0..50u64 {
        let mut rng = synth::rng(seed);
        let rows = rng.gen_range(4..=10_000);
        let nf = rng.gen_range(1..=20);
        let nl = rng.gen_range(1..=5);
        let features = synth::random_columns(&mut rng, rows, nf);
        let labels = synth::random_columns(&mut rng, rows, nl);
        let split = rng.gen_range(1..rows);
        check_against_reference(seed, features, labels, split);
    }
}

#[test]
fn streaming_is_batch_invariant() {
    let mut rng = synth::rng(99);
    let features = synth::random_columns(&mut rng, 3000, 4);
    let labels = synth::random_columns(&mut rng, 3000, 2);
    let cfg = ScoreConfig::default();
    let run = |batch: usize| {
        let s = source(features.clone(), labels.clone()).with_batch_size(batch);
        [
            simb_score(&s, Group::Features, &cfg).unwrap().overall,
            io_score(&s, &cfg).unwrap().overall,
            outlier_score(&s, Group::Features, &cfg).unwrap().overall,
        ]
    };
    let base = run(3000);
    for batch in [1, 7, 100, 4096] {
        assert_eq!(run(batch), base, "batch {batch}");
    }
}

#[test]
fn scores_are_thread_invariant() {
    let mut rng = synth::rng(5);
    let features = synth::random_columns(&mut rng, 2000, 6);
    let labels = synth::random_columns(&mut rng, 2000, 2);
    let cfg = ScoreConfig::default();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let s = source(features.clone(), labels.clone());
            (
                simb_score(&s, Group::Features, &cfg).unwrap(),
                io_score(&s, &cfg).unwrap(),
            )
        })
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn sampled_io_is_seeded() {
    let mut rng = synth::rng(8);
    let features = synth::random_columns(&mut rng, 5000, 3);
    let labels = synth::random_columns(&mut rng, 5000, 1);
    let cfg = ScoreConfig {
        row_cap: 500,
        ..ScoreConfig::default()
    };
    let s = source(features, labels);
    let a = io_score(&s, &cfg).unwrap();
    let b = io_score(&s, &cfg).unwrap();
    assert_eq!(a.overall, b.overall);
    assert!(a.approximate);
}

#[test]
fn uniform_sample_is_nearly_balanced() {
    let mut rng = synth::rng(1);
    let col: Vec<f64> = (0..1_000_000).map(|_| rng.gen()).collect();
    let s = simb_score(&source(vec![col], vec![]), Group::Features, &ScoreConfig::default()).unwrap();
    assert!(s.overall < 0.05, "{}", s.overall);
}

#[test]
fn shifted_uniforms_match_two_histogram_oracle() {
    let mut rng = synth::rng(2);
    let a: Vec<f64> = (0..1_000_000).map(|_| rng.gen()).collect();
    let b: Vec<f64> = (0..1_000_000).map(|_| 0.5 + rng.gen::<f64>()).collect();
    let cfg = ScoreConfig::default();
    let got = stood_score(&source(vec![a.clone()], vec![]), &source(vec![b.clone()], vec![]), Group::Features, &cfg)
        .unwrap()
        .overall;
    let want = reference::stood(&[a], &[b], cfg.bins);
    assert!(close(got, want, 1e-3), "{got} vs {want}");
}

fn histogram_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..40).prop_flat_map(|n| {
        (
            prop::collection::vec(0u32..20, n),
            prop::collection::vec(0u32..20, n),
        )
    })
    .prop_filter("non-empty mass", |(p, q)| p.iter().any(|&c| c > 0) && q.iter().any(|&c| c > 0))
    .prop_map(|(p, q)| {
        let norm = |v: Vec<u32>| {
            let s: u32 = v.iter().sum();
            v.into_iter().map(|c| f64::from(c) / f64::from(s)).collect::<Vec<f64>>()
        };
        (norm(p), norm(q))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn jsd_properties((p, q) in histogram_pair()) {
        let pq = jsd_probs(&p, &q).unwrap();
        let qp = jsd_probs(&q, &p).unwrap();
        prop_assert!((pq - qp).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&pq));
        prop_assert_eq!(jsd_probs(&p, &p).unwrap(), 0.0);
        if p != q {
            prop_assert!(pq > 0.0);
        }
        prop_assert!((pq - reference::jsd(&p, &q)).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scores_are_bounded_and_permutation_invariant(seed in any::<u64>(), rows in 3usize..400) {
        let mut rng = synth::rng(seed);
        let features = synth::random_columns(&mut rng, rows, 3);
        let labels = synth::random_columns(&mut rng, rows, 1);
        let mut order: Vec<usize> = (0..rows).collect();
        rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
        let permute = |cols: &[Vec<f64>]| cols.iter().map(|c| order.iter().map(|&i| c[i]).collect()).collect::<Vec<Vec<f64>>>();
        let cfg = ScoreConfig::default();
        let a = source(features.clone(), labels.clone());
        let b = source(permute(&features), permute(&labels));
        for group in [Group::Features, Group::Labels] {
            let x = simb_score(&a, group, &cfg).unwrap().overall;
            let y = simb_score(&b, group, &cfg).unwrap().overall;
            prop_assert!((0.0..=1.0).contains(&x));
            prop_assert!((x - y).abs() <= 1e-12);
        }
        let x = outlier_score(&a, Group::Features, &cfg).unwrap().overall;
        let y = outlier_score(&b, Group::Features, &cfg).unwrap().overall;
        prop_assert!((0.0..=1.0).contains(&x));
        prop_assert!((x - y).abs() <= 1e-12);
        if let (Ok(x), Ok(y)) = (io_score(&a, &cfg), io_score(&b, &cfg)) {
            prop_assert!((0.0..=1.0).contains(&x.overall));
            prop_assert!((x.overall - y.overall).abs() <= 1e-12);
        }
        let s = stood_score(&a, &a, Group::Features, &cfg).unwrap().overall;
        prop_assert!(s.abs() <= 1e-12);
    }
}
