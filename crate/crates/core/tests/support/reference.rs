//! Plain in-memory implementations of the four scores, written straight from
//! their definitions. Whole columns are held in memory and sorted; nothing
//! is shared with the streaming engine.

use std::f64::consts::PI;

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() && frac > 0.0 {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i.min(sorted.len() - 1)]
    }
}

fn present(col: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = col.iter().copied().filter(|x| !x.is_nan()).collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// (inner low, inner high, outer low, outer high)
pub fn fences(sorted: &[f64]) -> (f64, f64, f64, f64) {
    let q1 = quantile(sorted, 0.25);
    let q3 = quantile(sorted, 0.75);
    let iqr = q3 - q1;
    (q1 - 1.5 * iqr, q3 + 1.5 * iqr, q1 - 3.0 * iqr, q3 + 3.0 * iqr)
}

fn inside(v: f64, f: (f64, f64, f64, f64)) -> bool {
    f.0 <= v && v <= f.1
}

pub fn histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let mut counts = vec![0.0; bins];
    for &v in values {
        let i = ((v - lo) / (hi - lo) * bins as f64).floor() as usize;
        counts[i.min(bins - 1)] += 1.0;
    }
    let n = values.len() as f64;
    counts.iter().map(|c| c / n).collect()
}

fn kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(&a, &b)| if a == 0.0 { 0.0 } else { a * (a / b).log2() })
        .sum()
}

pub fn jsd(p: &[f64], q: &[f64]) -> f64 {
    let m: Vec<f64> = p.iter().zip(q).map(|(a, b)| (a + b) / 2.0).collect();
    0.5 * kl(p, &m) + 0.5 * kl(q, &m)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn simb(columns: &[Vec<f64>], bins: usize) -> f64 {
    let mut scores = Vec::new();
    for col in columns {
        let sorted = present(col);
        if sorted.is_empty() {
            continue;
        }
        let f = fences(&sorted);
        let kept: Vec<f64> = sorted.iter().copied().filter(|v| inside(*v, f)).collect();
        let (lo, hi) = (kept[0], kept[kept.len() - 1]);
        if lo == hi {
            scores.push(1.0);
            continue;
        }
        let p = histogram(&kept, lo, hi, bins);
        scores.push(jsd(&p, &vec![1.0 / bins as f64; bins]));
    }
    mean(&scores)
}

pub fn stood(a: &[Vec<f64>], b: &[Vec<f64>], bins: usize) -> f64 {
    let mut scores = Vec::new();
    for (ca, cb) in a.iter().zip(b) {
        let mut union = ca.clone();
        union.extend(cb);
        let sorted = present(&union);
        if sorted.is_empty() {
            continue;
        }
        let f = fences(&sorted);
        let ka: Vec<f64> = present(ca).into_iter().filter(|v| inside(*v, f)).collect();
        let kb: Vec<f64> = present(cb).into_iter().filter(|v| inside(*v, f)).collect();
        if ka.is_empty() && kb.is_empty() {
            continue;
        }
        if ka.is_empty() || kb.is_empty() {
            scores.push(1.0);
            continue;
        }
        let lo = ka[0].min(kb[0]);
        let hi = ka[ka.len() - 1].max(kb[kb.len() - 1]);
        if lo == hi {
            scores.push(0.0);
            continue;
        }
        scores.push(jsd(&histogram(&ka, lo, hi, bins), &histogram(&kb, lo, hi, bins)));
    }
    mean(&scores)
}

/// Mean over pairs of the mean normalized slope between feature-sorted
/// neighbours. `None` when no pair has a defined slope.
pub fn io(features: &[Vec<f64>], labels: &[Vec<f64>]) -> Option<f64> {
    let mut pair_scores = Vec::new();
    for f in features {
        for l in labels {
            let mut pts: Vec<(f64, f64)> = f
                .iter()
                .zip(l)
                .filter(|(a, b)| !a.is_nan() && !b.is_nan())
                .map(|(a, b)| (*a, *b))
                .collect();
            pts.sort_by(|p, q| p.partial_cmp(q).unwrap());
            let slopes: Vec<f64> = pts
                .windows(2)
                .filter(|w| w[1].0 != w[0].0)
                .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
                .filter(|d| d.is_finite())
                .map(|d| 2.0 / PI * d.abs().atan())
                .collect();
            if !slopes.is_empty() {
                pair_scores.push(mean(&slopes));
            }
        }
    }
    (!pair_scores.is_empty()).then(|| mean(&pair_scores))
}

/// Linear ramp between inner and outer fences.
pub fn outlier(columns: &[Vec<f64>]) -> f64 {
    let mut scores = Vec::new();
    for col in columns {
        let sorted = present(col);
        if sorted.is_empty() {
            continue;
        }
        let (il, ih, ol, oh) = fences(&sorted);
        let point = |v: f64| {
            if il <= v && v <= ih {
                0.0
            } else if v < ol || v > oh {
                1.0
            } else if v < il {
                (il - v) / (il - ol)
            } else {
                (v - ih) / (oh - ih)
            }
        };
        scores.push(mean(&sorted.iter().map(|&v| point(v)).collect::<Vec<_>>()));
    }
    mean(&scores)
}
