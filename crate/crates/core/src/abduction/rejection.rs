//! Rejection sampling of the noise posterior.

use super::{
    observations, resolve_facts, tolerance_assignment, AbductionError, Facts, Observation, Posterior,
    PosteriorDiagnostics,
};
use crate::inference::draw_noise;
use crate::model::{NoiseDraw, Scm};
use crate::rng::{shard_sizes, stream_rng, Workers, SHARD_SIZE};

/// Default cap on prior proposals.
pub const DEFAULT_MAX_PROPOSALS: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RejectionOptions {
    pub n_target: usize,
    pub seed: u64,
    /// Matching window for continuous observations; `None` derives one per
    /// variable from the prior predictive.
    pub epsilon: Option<f64>,
    pub max_proposals: usize,
    pub workers: Workers,
}

impl RejectionOptions {
    pub fn new(n_target: usize, seed: u64) -> Self {
        RejectionOptions {
            n_target,
            seed,
            epsilon: None,
            max_proposals: DEFAULT_MAX_PROPOSALS,
            workers: Workers::default(),
        }
    }
}

/// Accepted draws of one shard, with the in-shard index of each acceptance.
type ShardOutput = Result<Vec<(usize, NoiseDraw)>, AbductionError>;

fn run_shard(scm: &Scm, obs: &[Observation], active: &[usize], seed: u64, shard: usize, size: usize) -> ShardOutput {
    let mut rng = stream_rng(seed, shard as u64);
    let mut noise = vec![0.0; scm.len()];
    let mut vals = vec![0.0; scm.len()];
    let mut out = Vec::new();
    for k in 0..size {
        draw_noise(scm, &mut rng, &mut noise);
        for &i in active {
            vals[i] = scm.eval_variable(i, &vals, noise[i])?;
        }
        if obs.iter().all(|o| o.matches(vals[o.slot])) {
            out.push((k, NoiseDraw(noise.clone())));
        }
    }
    Ok(out)
}

/// Draw noise from the prior, run the model forward and keep draws whose
/// observed variables match the facts: exactly for finite-support
/// variables, within `epsilon` otherwise.
///
/// Proposals are split into shards of `SHARD_SIZE`; shard `s` uses stream
/// `s`, and accepted draws are taken in shard order, so the result does not
/// depend on the worker count. Fails with `BudgetExhausted`, carrying the
/// partial sample, when `max_proposals` runs out first.
pub fn abduce_rejection(scm: &Scm, facts: &Facts, opts: &RejectionOptions) -> Result<Posterior, AbductionError> {
    let facts = resolve_facts(scm, facts)?;
    if opts.n_target == 0 {
        return Err(AbductionError::InvalidOptions("n_target must be at least 1".into()));
    }
    if let Some(eps) = opts.epsilon {
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(AbductionError::InvalidOptions(format!(
                "epsilon must be finite and non-negative, got {eps}"
            )));
        }
    }
    let obs = observations(scm, &facts, opts.epsilon, opts.seed)?;
    let slots: Vec<usize> = obs.iter().map(|o| o.slot).collect();
    let reach = scm.ancestors_or_self(&slots);
    let active: Vec<usize> = scm.order().iter().copied().filter(|&i| reach[i]).collect();

    let sizes = shard_sizes(opts.max_proposals);
    let batch = opts.workers.get();
    let mut samples: Vec<NoiseDraw> = Vec::with_capacity(opts.n_target);
    let mut n_proposed = 0;
    let mut next = 0;
    'outer: while next < sizes.len() {
        let end = (next + batch).min(sizes.len());
        let results = opts.workers.run(end - next, |b| {
            run_shard(scm, &obs, &active, opts.seed, next + b, sizes[next + b])
        });
        for (b, shard) in results.into_iter().enumerate() {
            let start = (next + b) * SHARD_SIZE;
            for (k, draw) in shard? {
                samples.push(draw);
                if samples.len() == opts.n_target {
                    n_proposed = start + k + 1;
                    break 'outer;
                }
            }
            n_proposed = start + sizes[next + b];
        }
        next = end;
    }

    let accepted = samples.len();
    let posterior = Posterior {
        weights: vec![1.0; accepted],
        samples,
        diagnostics: PosteriorDiagnostics {
            acceptance_rate: if n_proposed > 0 {
                accepted as f64 / n_proposed as f64
            } else {
                0.0
            },
            n_proposed,
            ess: accepted as f64,
            tolerances: tolerance_assignment(scm, &obs),
        },
    };
    if accepted < opts.n_target {
        return Err(AbductionError::BudgetExhausted {
            accepted,
            n_proposed,
            partial: Box::new(posterior),
        });
    }
    Ok(posterior)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abduction::abduce_exact;
    use crate::dsl::parse_scm;
    use crate::factor::{key, Key};
    use crate::inference::forward_sample;
    use crate::stats::total_variation;
    use std::collections::BTreeMap;

    fn coins() -> Scm {
        parse_scm(
            "noise U_A ~ Categorical(0, 1, 0.5, 0.5)\nnoise U_B ~ Categorical(0, 1, 2, 0.25, 0.25, 0.5)\n\
             noise U_C ~ Categorical(0, 1, 0.75, 0.25)\n\
             var A = U_A\nvar B = if U_B > A then 1 else 0\nvar C = if A + B + U_C >= 2 then 1 else 0\n",
        )
        .unwrap()
    }

    /// Exact `P(U | facts)` by enumerating every noise tuple.
    fn exact_posterior(scm: &Scm, facts: &Facts) -> BTreeMap<Key, f64> {
        let atoms: Vec<Vec<(f64, f64)>> = scm
            .variables()
            .iter()
            .map(|v| v.noise.distribution.atoms().unwrap())
            .collect();
        let mut out = BTreeMap::new();
        let mut total = 0.0;
        let mut stack = vec![(Vec::new(), 1.0)];
        while let Some((u, p)) = stack.pop() {
            if u.len() == atoms.len() {
                let vals = forward_sample(scm, &NoiseDraw(u.clone())).unwrap();
                if facts.iter().all(|(n, v)| vals.get(n) == Some(v)) {
                    *out.entry(key(&u)).or_insert(0.0) += p;
                    total += p;
                }
                continue;
            }
            for &(a, q) in &atoms[u.len()] {
                let mut next = u.clone();
                next.push(a);
                stack.push((next, p * q));
            }
        }
        out.values_mut().for_each(|v| *v /= total);
        out
    }

    fn frequencies(p: &Posterior) -> BTreeMap<Key, f64> {
        let mut out = BTreeMap::new();
        for s in &p.samples {
            *out.entry(key(&s.0)).or_insert(0.0) += 1.0 / p.samples.len() as f64;
        }
        out
    }

    #[test]
    fn matches_enumerated_posterior() {
        let scm = coins();
        let facts: Facts = [("C", 1.0)].into();
        let post = abduce_rejection(&scm, &facts, &RejectionOptions::new(10_000, 1)).unwrap();
        assert_eq!(post.samples.len(), 10_000);
        let tv = total_variation(&frequencies(&post), &exact_posterior(&scm, &facts));
        assert!(tv <= 0.02, "tv = {tv}");
        for s in &post.samples {
            assert_eq!(forward_sample(&scm, s).unwrap().get("C"), Some(1.0));
        }
    }

    #[test]
    fn independent_of_worker_count() {
        let scm = coins();
        let facts: Facts = [("B", 1.0)].into();
        let mut opts = RejectionOptions::new(5_000, 3);
        let a = abduce_rejection(&scm, &facts, &opts).unwrap();
        opts.workers = Workers::new(4);
        let b = abduce_rejection(&scm, &facts, &opts).unwrap();
        assert_eq!(a, b);
        assert!(a.diagnostics.n_proposed > 5_000);
    }

    #[test]
    fn zero_probability_facts_exhaust_the_budget() {
        let scm = coins();
        let mut opts = RejectionOptions::new(10, 0);
        opts.max_proposals = 10_000;
        let e = abduce_rejection(&scm, &[("A", 3.0)].into(), &opts).unwrap_err();
        let AbductionError::BudgetExhausted {
            accepted,
            n_proposed,
            partial,
        } = e
        else {
            panic!("{e:?}")
        };
        assert_eq!((accepted, n_proposed), (0, 10_000));
        assert!(partial.samples.is_empty());
    }

    #[test]
    fn continuous_window_and_full_observation() {
        let scm =
            parse_scm("noise U_A ~ Normal(0, 1)\nnoise U_B ~ Normal(0, 1)\nvar A = U_A\nvar B = A + U_B\n").unwrap();
        let facts: Facts = [("A", 0.5), ("B", 1.0)].into();
        let mut opts = RejectionOptions::new(200, 2);
        opts.epsilon = Some(0.02);
        let post = abduce_rejection(&scm, &facts, &opts).unwrap();
        let exact = abduce_exact(&scm, &facts).unwrap();
        for s in &post.samples {
            assert!((s.0[0] - exact.0[0]).abs() <= 0.02);
            assert!((s.0[1] - exact.0[1]).abs() <= 0.04);
        }
        assert_eq!(post.diagnostics.tolerances.get("A"), Some(0.02));
    }
}
