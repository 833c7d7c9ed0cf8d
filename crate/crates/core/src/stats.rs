//! Sample summaries and distances between distributions.

use std::collections::BTreeMap;

use crate::factor::Key;

/// Quantile levels reported in summaries.
pub const QUANTILE_LEVELS: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub variance: f64,
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
    /// Values at [`QUANTILE_LEVELS`].
    pub quantiles: Vec<f64>,
}

impl Summary {
    /// Weighted summary. Variance uses the reliability-weights correction,
    /// which reduces to the `n - 1` denominator for unit weights.
    ///
    /// # Panics
    /// If `values` is empty or the weights sum to zero.
    pub fn weighted(values: &[f64], weights: &[f64]) -> Summary {
        assert_eq!(values.len(), weights.len());
        let w_sum: f64 = weights.iter().sum();
        assert!(!values.is_empty() && w_sum > 0.0, "empty sample");
        let mean = values.iter().zip(weights).map(|(x, w)| x * w).sum::<f64>() / w_sum;
        let ss: f64 = values
            .iter()
            .zip(weights)
            .map(|(x, w)| w * (x - mean) * (x - mean))
            .sum();
        let w2: f64 = weights.iter().map(|w| w * w).sum();
        let denom = w_sum - w2 / w_sum;
        let variance = if denom > 0.0 { ss / denom } else { 0.0 };

        let mut pairs: Vec<(f64, f64)> = values.iter().copied().zip(weights.iter().copied()).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let quantiles = QUANTILE_LEVELS
            .iter()
            .map(|q| {
                let target = q * w_sum;
                let mut acc = 0.0;
                for (x, w) in &pairs {
                    acc += w;
                    if acc >= target && *w > 0.0 {
                        return *x;
                    }
                }
                pairs[pairs.len() - 1].0
            })
            .collect();
        Summary {
            mean,
            variance,
            std_dev: variance.sqrt(),
            min: pairs[0].0,
            max: pairs[pairs.len() - 1].0,
            quantiles,
        }
    }

    pub fn unweighted(values: &[f64]) -> Summary {
        Self::weighted(values, &vec![1.0; values.len()])
    }
}

/// Total-variation distance `½ Σ |p - q|` between two pmfs.
pub fn total_variation(p: &BTreeMap<Key, f64>, q: &BTreeMap<Key, f64>) -> f64 {
    let mut d = 0.0;
    for (k, a) in p {
        d += (a - q.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, b) in q {
        if !p.contains_key(k) {
            d += b.abs();
        }
    }
    0.5 * d
}

/// Effective sample size of one chain by Geyer's initial positive sequence.
///
/// A constant chain returns its length.
pub fn effective_sample_size(chain: &[f64]) -> f64 {
    let n = chain.len();
    if n < 4 {
        return n as f64;
    }
    let mean = chain.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = chain.iter().map(|x| x - mean).collect();
    let c0 = centered.iter().map(|x| x * x).sum::<f64>() / n as f64;
    if c0 <= 0.0 {
        return n as f64;
    }
    let autocorr = |lag: usize| {
        centered[..n - lag]
            .iter()
            .zip(&centered[lag..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / n as f64
            / c0
    };
    // tau = -1 + 2 Σ_k Γ_k with Γ_k = ρ_{2k} + ρ_{2k+1}, truncated at the
    // first non-positive pair and kept monotone
    let mut tau = -1.0;
    let mut prev = f64::INFINITY;
    let mut k = 0;
    while 2 * k + 1 < n {
        let gamma = autocorr(2 * k) + autocorr(2 * k + 1);
        if gamma <= 0.0 {
            break;
        }
        let gamma = gamma.min(prev);
        tau += 2.0 * gamma;
        prev = gamma;
        k += 1;
    }
    (n as f64 / tau.max(1e-12)).min(n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::key;
    use crate::rng::stream_rng;
    use rand::Rng;

    #[test]
    fn summary_of_known_values() {
        let s = Summary::unweighted(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.variance - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.quantiles[2], 2.0);
        assert_eq!((s.min, s.max), (1.0, 4.0));
        let w = Summary::weighted(&[0.0, 10.0], &[3.0, 1.0]);
        assert_eq!(w.mean, 2.5);
        assert_eq!(w.quantiles[2], 0.0);
    }

    #[test]
    fn tv() {
        let p: BTreeMap<_, _> = [(key(&[0.0]), 0.5), (key(&[1.0]), 0.5)].into();
        let q: BTreeMap<_, _> = [(key(&[1.0]), 0.25), (key(&[2.0]), 0.75)].into();
        assert!((total_variation(&p, &q) - 0.75).abs() < 1e-15);
        assert_eq!(total_variation(&p, &p), 0.0);
    }

    #[test]
    fn ess_of_iid_and_ar1() {
        let mut rng = stream_rng(5, 0);
        let iid: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>()).collect();
        let e = effective_sample_size(&iid);
        assert!(e > 15_000.0, "{e}");

        // AR(1) with rho = 0.9 has tau = (1 + rho) / (1 - rho) = 19
        let mut x = 0.0;
        let ar: Vec<f64> = (0..200_000)
            .map(|_| {
                x = 0.9 * x + (rng.random::<f64>() - 0.5);
                x
            })
            .collect();
        let e = effective_sample_size(&ar);
        let expected = 200_000.0 / 19.0;
        assert!((e / expected - 1.0).abs() < 0.15, "{e} vs {expected}");
        assert_eq!(effective_sample_size(&[1.0; 50]), 50.0);
    }
}
