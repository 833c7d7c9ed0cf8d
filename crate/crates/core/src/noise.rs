//! Exogenous noise priors.

use rand::Rng;
use rand_distr::{Distribution as _, StandardNormal};

/// Tolerance on the total mass of a categorical prior.
pub const CATEGORICAL_MASS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum Distribution {
    Point(f64),
    Normal { mean: f64, std_dev: f64 },
    Uniform { low: f64, high: f64 },
    Categorical { values: Vec<f64>, probs: Vec<f64> },
}

impl Distribution {
    pub fn family(&self) -> &'static str {
        match self {
            Distribution::Point(_) => "Point",
            Distribution::Normal { .. } => "Normal",
            Distribution::Uniform { .. } => "Uniform",
            Distribution::Categorical { .. } => "Categorical",
        }
    }

    /// Parameters in declaration-syntax order.
    pub fn params(&self) -> Vec<f64> {
        match self {
            Distribution::Point(v) => vec![*v],
            Distribution::Normal { mean, std_dev } => vec![*mean, *std_dev],
            Distribution::Uniform { low, high } => vec![*low, *high],
            Distribution::Categorical { values, probs } => values.iter().chain(probs.iter()).copied().collect(),
        }
    }

    /// Build from a family name and its flat argument list.
    ///
    /// Returns `Err` with a description of the expected arity when the
    /// argument count does not fit the family, and `Ok(None)` for an unknown
    /// family name.
    pub fn from_params(family: &str, args: &[f64]) -> Result<Option<Self>, String> {
        let dist = match family {
            "Point" => match args {
                [v] => Distribution::Point(*v),
                _ => return Err("Point takes 1 argument".into()),
            },
            "Normal" => match args {
                [mean, std_dev] => Distribution::Normal {
                    mean: *mean,
                    std_dev: *std_dev,
                },
                _ => return Err("Normal takes 2 arguments (mean, stddev)".into()),
            },
            "Uniform" => match args {
                [low, high] => Distribution::Uniform { low: *low, high: *high },
                _ => return Err("Uniform takes 2 arguments (lo, hi)".into()),
            },
            "Categorical" => {
                if args.is_empty() || !args.len().is_multiple_of(2) {
                    return Err("Categorical takes 2k arguments (v1..vk, p1..pk)".into());
                }
                let k = args.len() / 2;
                Distribution::Categorical {
                    values: args[..k].to_vec(),
                    probs: args[k..].to_vec(),
                }
            }
            _ => return Ok(None),
        };
        Ok(Some(dist))
    }

    /// Check parameter constraints; the error string says what is wrong.
    pub fn check(&self) -> Result<(), String> {
        let finite = self.params().iter().all(|p| p.is_finite());
        if !finite {
            return Err("parameters must be finite".into());
        }
        match self {
            Distribution::Point(_) => Ok(()),
            Distribution::Normal { std_dev, .. } => {
                if *std_dev > 0.0 {
                    Ok(())
                } else {
                    Err(format!("stddev must be > 0, got {std_dev}"))
                }
            }
            Distribution::Uniform { low, high } => {
                if low < high {
                    Ok(())
                } else {
                    Err(format!("need lo < hi, got ({low}, {high})"))
                }
            }
            Distribution::Categorical { values, probs } => {
                if probs.iter().any(|p| *p < 0.0) {
                    return Err("probabilities must be >= 0".into());
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > CATEGORICAL_MASS_TOLERANCE {
                    return Err(format!("probabilities sum to {total}, expected 1"));
                }
                for (i, a) in values.iter().enumerate() {
                    if values[..i].contains(a) {
                        return Err(format!("duplicate value {a}"));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn is_finite_support(&self) -> bool {
        matches!(self, Distribution::Point(_) | Distribution::Categorical { .. })
    }

    /// Support atoms with positive mass, for finite-support priors.
    pub fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            Distribution::Point(v) => Some(vec![(*v, 1.0)]),
            Distribution::Categorical { values, probs } => Some(
                values
                    .iter()
                    .zip(probs)
                    .filter(|(_, p)| **p > 0.0)
                    .map(|(v, p)| (*v, *p))
                    .collect(),
            ),
            _ => None,
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Distribution::Point(v) => *v,
            Distribution::Normal { mean, .. } => *mean,
            Distribution::Uniform { low, high } => 0.5 * (low + high),
            Distribution::Categorical { values, probs } => values.iter().zip(probs).map(|(v, p)| v * p).sum(),
        }
    }

    pub fn std_dev(&self) -> f64 {
        match self {
            Distribution::Point(_) => 0.0,
            Distribution::Normal { std_dev, .. } => *std_dev,
            Distribution::Uniform { low, high } => (high - low) / 12f64.sqrt(),
            Distribution::Categorical { values, probs } => {
                let m = self.mean();
                values
                    .iter()
                    .zip(probs)
                    .map(|(v, p)| p * (v - m) * (v - m))
                    .sum::<f64>()
                    .sqrt()
            }
        }
    }

    /// Log density for continuous priors, up to an additive constant.
    ///
    /// Only meaningful for `Normal` and `Uniform`; finite-support priors
    /// return 0.
    pub fn log_density_unnormalized(&self, x: f64) -> f64 {
        match self {
            Distribution::Normal { mean, std_dev } => {
                let z = (x - mean) / std_dev;
                -0.5 * z * z
            }
            Distribution::Uniform { low, high } => {
                if x >= *low && x < *high {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            _ => 0.0,
        }
    }

    /// Draw one value.
    ///
    /// Normal uses `rand_distr::StandardNormal` (ziggurat); Uniform and
    /// Categorical consume one `f64` in `[0, 1)` each; Point consumes nothing.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Distribution::Point(v) => *v,
            Distribution::Normal { mean, std_dev } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + std_dev * z
            }
            Distribution::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
            Distribution::Categorical { values, probs } => {
                let u = rng.random::<f64>();
                let mut acc = 0.0;
                for (v, p) in values.iter().zip(probs) {
                    acc += p;
                    if u < acc {
                        return *v;
                    }
                }
                // rounding left u above the cumulative total: last positive atom
                values
                    .iter()
                    .zip(probs)
                    .rev()
                    .find(|(_, p)| **p > 0.0)
                    .map(|(v, _)| *v)
                    .unwrap_or(values[0])
            }
        }
    }
}

/// A named noise variable with its prior.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    pub name: String,
    pub distribution: Distribution,
}

impl NoiseSpec {
    pub fn new(name: impl Into<String>, distribution: Distribution) -> Self {
        Self {
            name: name.into(),
            distribution,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn parameter_checks() {
        assert!(Distribution::Normal {
            mean: 0.0,
            std_dev: 0.0
        }
        .check()
        .is_err());
        assert!(Distribution::Uniform { low: 1.0, high: 1.0 }.check().is_err());
        let bad_mass = Distribution::Categorical {
            values: vec![0.0, 1.0],
            probs: vec![0.5, 0.6],
        };
        assert!(bad_mass.check().is_err());
        let dup = Distribution::Categorical {
            values: vec![1.0, 1.0],
            probs: vec![0.5, 0.5],
        };
        assert!(dup.check().is_err());
        let neg = Distribution::Categorical {
            values: vec![0.0, 1.0],
            probs: vec![1.5, -0.5],
        };
        assert!(neg.check().is_err());
        let ok = Distribution::Categorical {
            values: vec![0.0, 1.0],
            probs: vec![0.3, 0.7],
        };
        assert!(ok.check().is_ok());
    }

    #[test]
    fn arity() {
        assert!(Distribution::from_params("Normal", &[0.0]).is_err());
        assert!(Distribution::from_params("Categorical", &[0.0, 1.0, 0.5]).is_err());
        assert_eq!(Distribution::from_params("Gamma", &[1.0, 1.0]), Ok(None));
        assert_eq!(
            Distribution::from_params("Categorical", &[0.0, 1.0, 0.5, 0.5]),
            Ok(Some(Distribution::Categorical {
                values: vec![0.0, 1.0],
                probs: vec![0.5, 0.5]
            }))
        );
    }

    #[test]
    fn categorical_frequencies() {
        let d = Distribution::Categorical {
            values: vec![-1.0, 0.0, 1.0],
            probs: vec![0.2, 0.3, 0.5],
        };
        let mut rng = stream_rng(11, 0);
        let n = 100_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            let v = d.sample(&mut rng);
            counts[(v + 1.0) as usize] += 1;
        }
        for (c, p) in counts.iter().zip([0.2, 0.3, 0.5]) {
            let f = *c as f64 / n as f64;
            // 5 sigma at n = 1e5
            assert!((f - p).abs() < 5.0 * (p * (1.0 - p) / n as f64).sqrt(), "{f} vs {p}");
        }
    }

    #[test]
    fn moments() {
        let u = Distribution::Uniform { low: 0.0, high: 1.0 };
        assert_eq!(u.mean(), 0.5);
        assert!((u.std_dev() - (1.0f64 / 12.0).sqrt()).abs() < 1e-15);
        let c = Distribution::Categorical {
            values: vec![0.0, 1.0],
            probs: vec![0.5, 0.5],
        };
        assert_eq!(c.std_dev(), 0.5);
    }
}
