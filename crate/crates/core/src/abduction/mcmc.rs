//! Random-walk Metropolis–Hastings over the noise vector.
//!
//! The target is `prior(u) · K(facts, forward(u))`, where `K` is a Gaussian
//! kernel `exp(-r² / 2h²)` on each continuous observed residual and an exact
//! indicator on finite-support observations. Continuous coordinates move by
//! a Gaussian random walk; finite-support coordinates are redrawn from their
//! prior, which cancels the prior term in the acceptance ratio.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{
    observations, resolve_facts, tolerance_assignment, AbductionError, Facts, Observation, Posterior,
    PosteriorDiagnostics,
};
use crate::inference::draw_noise;
use crate::model::{NoiseDraw, Scm};
use crate::rng::{stream_rng, Workers};
use crate::stats::effective_sample_size;

pub const DEFAULT_PROPOSAL_SCALE: f64 = 0.5;
/// Prior draws screened for a starting point.
const INIT_CANDIDATES: usize = 1000;
/// Chains accepting less often than this are reported as degenerate.
const MIN_ACCEPTANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McmcOptions {
    /// Retained samples, summed over chains.
    pub n_samples: usize,
    /// Iterations discarded per chain; `None` means 10% of `n_samples`.
    pub burnin: Option<usize>,
    pub seed: u64,
    /// Random-walk step as a multiple of each coordinate's prior standard
    /// deviation.
    pub proposal_scale: f64,
    /// Kernel bandwidth; `None` uses the default rejection tolerance.
    pub bandwidth: Option<f64>,
    pub chains: usize,
    /// Keep every `thin`-th iteration after burn-in.
    pub thin: usize,
    pub workers: Workers,
}

impl McmcOptions {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        McmcOptions {
            n_samples,
            burnin: None,
            seed,
            proposal_scale: DEFAULT_PROPOSAL_SCALE,
            bandwidth: None,
            chains: 1,
            thin: 1,
            workers: Workers::default(),
        }
    }
}

struct Target<'a> {
    scm: &'a Scm,
    obs: &'a [Observation],
    /// Topological slots feeding an observation.
    active: Vec<usize>,
    continuous: Vec<usize>,
}

impl Target<'_> {
    fn log_density(&self, u: &[f64], vals: &mut [f64]) -> Result<f64, AbductionError> {
        let mut lp: f64 = self
            .continuous
            .iter()
            .map(|&j| {
                self.scm.variables()[j]
                    .noise
                    .distribution
                    .log_density_unnormalized(u[j])
            })
            .sum();
        if lp == f64::NEG_INFINITY {
            return Ok(lp);
        }
        for &i in &self.active {
            vals[i] = self.scm.eval_variable(i, vals, u[i])?;
        }
        for o in self.obs {
            let v = vals[o.slot];
            match o.tolerance {
                Some(h) if h > 0.0 => {
                    let z = (v - o.value) / h;
                    lp -= 0.5 * z * z;
                }
                _ if v == o.value => {}
                _ => return Ok(f64::NEG_INFINITY),
            }
        }
        Ok(lp)
    }
}

struct Chain {
    samples: Vec<NoiseDraw>,
    accepted: usize,
    iterations: usize,
}

fn run_chain(
    target: &Target<'_>,
    opts: &McmcOptions,
    chain: usize,
    n_keep: usize,
    burnin: usize,
) -> Result<Chain, AbductionError> {
    let scm = target.scm;
    let mut rng = stream_rng(opts.seed, chain as u64);
    let mut vals = vec![0.0; scm.len()];

    let mut u = vec![0.0; scm.len()];
    let mut lp = f64::NEG_INFINITY;
    let mut cand = vec![0.0; scm.len()];
    for _ in 0..INIT_CANDIDATES {
        draw_noise(scm, &mut rng, &mut cand);
        let l = target.log_density(&cand, &mut vals)?;
        if l > lp {
            lp = l;
            u.copy_from_slice(&cand);
        }
    }
    if lp == f64::NEG_INFINITY {
        return Err(AbductionError::DegenerateChain { acceptance_rate: 0.0 });
    }

    let steps: Vec<f64> = target
        .continuous
        .iter()
        .map(|&j| opts.proposal_scale * scm.variables()[j].noise.distribution.std_dev())
        .collect();
    let discrete: Vec<usize> = (0..scm.len())
        .filter(|&j| {
            scm.variables()[j]
                .noise
                .distribution
                .atoms()
                .is_some_and(|a| a.len() > 1)
        })
        .collect();

    let total = burnin + n_keep * opts.thin;
    let mut samples = Vec::with_capacity(n_keep);
    let mut accepted = 0;
    let mut proposal = u.clone();
    for t in 0..total {
        proposal.copy_from_slice(&u);
        let move_continuous = match (target.continuous.is_empty(), discrete.is_empty()) {
            (false, true) => true,
            (true, _) => false,
            (false, false) => rng.random::<bool>(),
        };
        if move_continuous {
            for (&j, s) in target.continuous.iter().zip(&steps) {
                let z: f64 = rng.sample(StandardNormal);
                proposal[j] += s * z;
            }
        } else if !discrete.is_empty() {
            if rng.random::<bool>() {
                for &j in &discrete {
                    proposal[j] = scm.variables()[j].noise.distribution.sample(&mut rng);
                }
            } else {
                let j = discrete[rng.random_range(0..discrete.len())];
                proposal[j] = scm.variables()[j].noise.distribution.sample(&mut rng);
            }
        }
        let lq = target.log_density(&proposal, &mut vals)?;
        let log_u: f64 = rng.random::<f64>().ln();
        let accept = lq > f64::NEG_INFINITY && log_u < lq - lp;
        if accept {
            std::mem::swap(&mut u, &mut proposal);
            lp = lq;
        }
        if t >= burnin {
            if accept {
                accepted += 1;
            }
            if (t - burnin + 1).is_multiple_of(opts.thin) {
                samples.push(NoiseDraw(u.clone()));
            }
        }
    }
    Ok(Chain {
        samples,
        accepted,
        iterations: total - burnin,
    })
}

/// Sample `P(U | facts)` with Metropolis–Hastings.
///
/// Each chain starts from the best of 1000 prior draws and uses ChaCha8
/// stream `chain index`; chains are concatenated in index order. The
/// reported ESS is the smallest per-coordinate ESS, summed over chains,
/// among coordinates that move.
pub fn abduce_mcmc(scm: &Scm, facts: &Facts, opts: &McmcOptions) -> Result<Posterior, AbductionError> {
    let facts = resolve_facts(scm, facts)?;
    if let Some(h) = opts.bandwidth {
        if !(h > 0.0 && h.is_finite()) {
            return Err(AbductionError::BadBandwidth(h));
        }
    }
    if opts.n_samples == 0 || opts.chains == 0 || opts.thin == 0 {
        return Err(AbductionError::InvalidOptions(
            "n_samples, chains and thin must be at least 1".into(),
        ));
    }
    if !(opts.proposal_scale > 0.0 && opts.proposal_scale.is_finite()) {
        return Err(AbductionError::InvalidOptions(format!(
            "proposal scale must be positive, got {}",
            opts.proposal_scale
        )));
    }
    let obs = observations(scm, &facts, opts.bandwidth, opts.seed)?;
    let slots: Vec<usize> = obs.iter().map(|o| o.slot).collect();
    let reach = scm.ancestors_or_self(&slots);
    let target = Target {
        scm,
        obs: &obs,
        active: scm.order().iter().copied().filter(|&i| reach[i]).collect(),
        continuous: (0..scm.len())
            .filter(|&j| !scm.variables()[j].noise.distribution.is_finite_support())
            .collect(),
    };

    let burnin = opts.burnin.unwrap_or(opts.n_samples / 10);
    let per_chain = |c: usize| opts.n_samples / opts.chains + usize::from(c < opts.n_samples % opts.chains);
    let chains = opts
        .workers
        .run(opts.chains, |c| run_chain(&target, opts, c, per_chain(c), burnin));
    let chains: Vec<Chain> = chains.into_iter().collect::<Result<_, _>>()?;

    let accepted: usize = chains.iter().map(|c| c.accepted).sum();
    let iterations: usize = chains.iter().map(|c| c.iterations).sum();
    let acceptance_rate = accepted as f64 / iterations.max(1) as f64;
    if acceptance_rate < MIN_ACCEPTANCE {
        return Err(AbductionError::DegenerateChain { acceptance_rate });
    }

    let mut ess = f64::INFINITY;
    for j in 0..scm.len() {
        let mut moved = false;
        let mut total = 0.0;
        for c in &chains {
            let series: Vec<f64> = c.samples.iter().map(|s| s.0[j]).collect();
            moved |= series.iter().any(|v| *v != series[0]);
            total += effective_sample_size(&series);
        }
        if moved {
            ess = ess.min(total);
        }
    }
    let samples: Vec<NoiseDraw> = chains.into_iter().flat_map(|c| c.samples).collect();
    if !ess.is_finite() {
        ess = samples.len() as f64;
    }
    Ok(Posterior {
        weights: vec![1.0; samples.len()],
        samples,
        diagnostics: PosteriorDiagnostics {
            acceptance_rate,
            n_proposed: iterations + burnin * opts.chains,
            ess,
            tolerances: tolerance_assignment(scm, &obs),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_scm;

    #[test]
    fn point_model_chain_is_constant() {
        let scm = parse_scm("noise U_A ~ Point(1)\nnoise U_B ~ Point(2)\nvar A = U_A\nvar B = A + U_B\n").unwrap();
        let post = abduce_mcmc(&scm, &[("B", 3.0)].into(), &McmcOptions::new(100, 0)).unwrap();
        assert_eq!(post.samples.len(), 100);
        assert!(post.samples.iter().all(|s| s.0 == vec![1.0, 2.0]));
        let e = abduce_mcmc(&scm, &[("B", 4.0)].into(), &McmcOptions::new(100, 0)).unwrap_err();
        assert_eq!(e.code(), "degenerate_chain");
    }

    #[test]
    fn bad_bandwidth() {
        let scm = parse_scm("noise U_A ~ Normal(0, 1)\nvar A = U_A\n").unwrap();
        let mut opts = McmcOptions::new(10, 0);
        opts.bandwidth = Some(0.0);
        assert_eq!(
            abduce_mcmc(&scm, &[("A", 0.0)].into(), &opts).unwrap_err(),
            AbductionError::BadBandwidth(0.0)
        );
    }

    #[test]
    fn gaussian_posterior_mean() {
        // A = U_A ~ N(0, 1), B = A + U_B with U_B ~ N(0, 1): U_A | B = 2 ~ N(1, 1/2)
        let scm =
            parse_scm("noise U_A ~ Normal(0, 1)\nnoise U_B ~ Normal(0, 1)\nvar A = U_A\nvar B = A + U_B\n").unwrap();
        let mut opts = McmcOptions::new(20_000, 4);
        opts.bandwidth = Some(0.02);
        opts.thin = 10;
        let post = abduce_mcmc(&scm, &[("B", 2.0)].into(), &opts).unwrap();
        let s = post.coordinate_summary(0);
        let se = s.std_dev / post.diagnostics.ess.sqrt();
        assert!((s.mean - 1.0).abs() < 4.0 * se, "mean {} se {se}", s.mean);
        assert!((s.std_dev - 0.5f64.sqrt()).abs() < 0.05, "sd {}", s.std_dev);
        for u in &post.samples {
            assert!((u.0[0] + u.0[1] - 2.0).abs() < 0.15);
        }
    }

    #[test]
    fn chains_are_reproducible() {
        let scm = parse_scm("noise U_A ~ Normal(0, 1)\nnoise U_B ~ Categorical(0, 1, 0.5, 0.5)\nvar A = U_A\nvar B = if A > 0 then U_B else 0\n").unwrap();
        let mut opts = McmcOptions::new(2_000, 9);
        opts.chains = 3;
        let a = abduce_mcmc(&scm, &[("B", 1.0)].into(), &opts).unwrap();
        opts.workers = Workers::new(3);
        let b = abduce_mcmc(&scm, &[("B", 1.0)].into(), &opts).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.samples.len(), 2_000);
        assert!(a.samples.iter().all(|s| s.0[0] > 0.0 && s.0[1] == 1.0));
    }
}
