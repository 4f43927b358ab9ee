use crate::error::{Error, Result};
use crate::scores::histogram::Histogram;

/// Kullback-Leibler divergence in bits; `0 * log(0 / q) = 0`.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(pi, _)| **pi > 0.0)
        .map(|(pi, qi)| pi * (pi / qi).log2())
        .sum()
}

/// Jensen-Shannon divergence in bits of two probability vectors over the same
/// bins. Symmetric by construction and clamped to `[0, 1]`.
pub fn jsd_probs(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::IncompatibleHistogram(format!(
            "distributions have {} and {} bins",
            p.len(),
            q.len()
        )));
    }
    let mut acc = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        let m = 0.5 * (pi + qi);
        // summing both terms per bin keeps the result symmetric bit for bit
        let a = if pi > 0.0 { pi * (pi / m).log2() } else { 0.0 };
        let b = if qi > 0.0 { qi * (qi / m).log2() } else { 0.0 };
        acc += a + b;
    }
    Ok((0.5 * acc).clamp(0.0, 1.0))
}

pub fn jsd(p: &Histogram, q: &Histogram) -> Result<f64> {
    if !p.same_edges(q) {
        return Err(Error::IncompatibleHistogram("histograms have different bin edges".into()));
    }
    jsd_probs(&p.normalize()?, &q.normalize()?)
}

/// JSD between a histogram and the uniform distribution over its bins.
pub fn jsd_uniform(p: &Histogram) -> Result<f64> {
    let u = vec![1.0 / p.bins() as f64; p.bins()];
    jsd_probs(&p.normalize()?, &u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fixed_points() {
        assert_eq!(jsd_probs(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert_eq!(jsd_probs(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        let v = jsd_probs(&[1.0, 0.0], &[0.5, 0.5]).unwrap();
        assert!((v - 0.3113).abs() < 1e-4, "{v}");
    }

    #[test]
    fn kl_matches_definition() {
        let kl = kl_divergence(&[0.5, 0.5], &[0.25, 0.75]);
        let expected = 0.5 * (2.0f64).log2() + 0.5 * (0.5f64 / 0.75).log2();
        assert!((kl - expected).abs() < 1e-15);
    }

    #[test]
    fn mismatched_edges() {
        let a = Histogram::new(0.0, 1.0, 4).unwrap();
        let b = Histogram::new(0.0, 1.0, 5).unwrap();
        assert!(matches!(jsd(&a, &b), Err(Error::IncompatibleHistogram(_))));
        assert!(jsd_probs(&[1.0], &[0.5, 0.5]).is_err());
    }

    fn dist(n: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0u32..5, n).prop_filter_map("non-empty", |c| {
            let t: u32 = c.iter().sum();
            (t > 0).then(|| c.iter().map(|&x| f64::from(x) / f64::from(t)).collect())
        })
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded((p, q) in (1usize..20).prop_flat_map(|n| (dist(n), dist(n)))) {
            let a = jsd_probs(&p, &q).unwrap();
            let b = jsd_probs(&q, &p).unwrap();
            prop_assert_eq!(a.to_bits(), b.to_bits());
            prop_assert!((0.0..=1.0).contains(&a));
            prop_assert_eq!(jsd_probs(&p, &p).unwrap(), 0.0);
        }
    }
}
