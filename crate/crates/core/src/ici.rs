//! Individual causal queries `P(Y | indiv(W), do(X), Z)` and individual
//! causal effects.
//!
//! The pipeline has three steps:
//!
//! 1. abduce the noise from the individual's facts `W` ([`indiv`]),
//! 2. apply surgery for `do(X)`,
//! 3. push every abduced noise draw through the mutilated model.
//!
//! Evidence `Z` filters the propagated draws (filter, then normalize); it
//! plays no part in abduction. Facts and intervention may name the same
//! variable, and the intervened value wins.

use thiserror::Error;

use crate::abduction::{
    abduce_exact, abduce_mcmc, abduce_rejection, abduce_update, AbductionError, AbductionResult, Facts, McmcOptions,
    RejectionOptions,
};
use crate::inference::{
    forward_slots, matches_evidence, resolve_evidence, DistributionResult, Empirical, InferenceError,
    DEFAULT_EVIDENCE_WINDOW,
};
use crate::intervention::{surgery, Intervention};
use crate::model::{Assignment, ModelError, NoiseDraw, Scm};
use crate::rng::{Workers, SHARD_SIZE};
use crate::stats::Summary;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IciError {
    #[error(transparent)]
    Abduction(#[from] AbductionError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
}

impl IciError {
    pub fn code(&self) -> &'static str {
        match self {
            IciError::Abduction(e) => e.code(),
            IciError::Inference(e) => e.code(),
        }
    }
}

impl From<ModelError> for IciError {
    fn from(e: ModelError) -> Self {
        IciError::Inference(e.into())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AbductionMethod {
    /// Invert every equation; needs all variables observed.
    Exact,
    /// Closest noise to `baseline` reproducing the facts. Defaults: the
    /// prior means and unit weights.
    Update {
        baseline: Option<NoiseDraw>,
        weights: Option<Vec<f64>>,
    },
    Rejection(RejectionOptions),
    Mcmc(McmcOptions),
}

impl AbductionMethod {
    pub fn name(&self) -> &'static str {
        match self {
            AbductionMethod::Exact => "exact",
            AbductionMethod::Update { .. } => "update",
            AbductionMethod::Rejection(_) => "rejection",
            AbductionMethod::Mcmc(_) => "mcmc",
        }
    }
}

/// Prior mean of every noise.
pub fn prior_means(scm: &Scm) -> NoiseDraw {
    NoiseDraw(scm.variables().iter().map(|v| v.noise.distribution.mean()).collect())
}

/// The individualization operator: abduce noise from `facts`.
pub fn indiv(scm: &Scm, facts: &Facts, method: &AbductionMethod) -> Result<AbductionResult, AbductionError> {
    Ok(match method {
        AbductionMethod::Exact => AbductionResult::Deterministic(abduce_exact(scm, facts)?),
        AbductionMethod::Update { baseline, weights } => {
            let baseline = baseline.clone().unwrap_or_else(|| prior_means(scm));
            let weights = weights.clone().unwrap_or_else(|| vec![1.0; scm.len()]);
            AbductionResult::Deterministic(abduce_update(scm, facts, &baseline, &weights)?)
        }
        AbductionMethod::Rejection(opts) => AbductionResult::Posterior(abduce_rejection(scm, facts, opts)?),
        AbductionMethod::Mcmc(opts) => AbductionResult::Posterior(abduce_mcmc(scm, facts, opts)?),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndividualQuery {
    pub facts: Facts,
    pub intervention: Intervention,
    pub targets: Vec<String>,
    /// Post-intervention evidence `Z`.
    pub evidence: Assignment,
    pub method: AbductionMethod,
    /// Matching window for continuous evidence.
    pub window: f64,
    pub workers: Workers,
}

impl IndividualQuery {
    pub fn new(facts: Facts, intervention: Intervention, targets: Vec<String>, method: AbductionMethod) -> Self {
        IndividualQuery {
            facts,
            intervention,
            targets,
            evidence: Assignment::new(),
            method,
            window: DEFAULT_EVIDENCE_WINDOW,
            workers: Workers::default(),
        }
    }
}

/// Target values of each draw in the mutilated model, `None` when the
/// draw fails the evidence.
fn propagate(
    mutilated: &Scm,
    draws: &[&NoiseDraw],
    targets: &[usize],
    evidence: &Assignment,
    window: f64,
    workers: Workers,
) -> Result<Vec<Option<Vec<f64>>>, IciError> {
    let ev = resolve_evidence(mutilated, evidence)?;
    let n_shards = draws.len().div_ceil(SHARD_SIZE);
    let shards = workers.run(n_shards, |s| {
        draws[s * SHARD_SIZE..((s + 1) * SHARD_SIZE).min(draws.len())]
            .iter()
            .map(|u| {
                let vals = forward_slots(mutilated, u.values()).map_err(InferenceError::from)?;
                let keep = ev
                    .iter()
                    .all(|&(i, z, exact)| matches_evidence(vals[i], z, exact, window));
                Ok(keep.then(|| targets.iter().map(|&i| vals[i]).collect()))
            })
            .collect::<Result<Vec<_>, IciError>>()
    });
    let mut out = Vec::with_capacity(draws.len());
    for shard in shards {
        out.extend(shard?);
    }
    Ok(out)
}

fn check_targets(scm: &Scm, targets: &[String]) -> Result<Vec<usize>, IciError> {
    if targets.is_empty() {
        return Err(InferenceError::InvalidQuery("at least one target is required".into()).into());
    }
    for (i, t) in targets.iter().enumerate() {
        if targets[..i].contains(t) {
            return Err(InferenceError::InvalidQuery(format!("target `{t}` listed twice")).into());
        }
    }
    Ok(scm.resolve(targets)?)
}

/// `P(targets | indiv(facts), do(intervention), evidence)`.
///
/// A deterministic abduction gives a point result; a posterior gives an
/// empirical distribution weighted like the posterior draws.
pub fn ici_query(scm: &Scm, q: &IndividualQuery) -> Result<DistributionResult, IciError> {
    check_targets(scm, &q.targets)?;
    surgery(scm, &q.intervention)?;
    let abduced = indiv(scm, &q.facts, &q.method)?;
    ici_from_abduction(scm, &abduced, q)
}

/// Steps 2 and 3 of [`ici_query`] for an existing abduction; `q.facts` and
/// `q.method` are not consulted.
pub fn ici_from_abduction(
    scm: &Scm,
    abduced: &AbductionResult,
    q: &IndividualQuery,
) -> Result<DistributionResult, IciError> {
    let target_idx = check_targets(scm, &q.targets)?;
    let mutilated = surgery(scm, &q.intervention)?;
    let (draws, weights) = abduced.draws();
    let propagated = propagate(&mutilated, &draws, &target_idx, &q.evidence, q.window, q.workers)?;
    let (samples, weights): (Vec<Vec<f64>>, Vec<f64>) = propagated
        .into_iter()
        .zip(weights)
        .filter_map(|(s, w)| s.map(|s| (s, w)))
        .unzip();
    if samples.is_empty() || weights.iter().sum::<f64>() <= 0.0 {
        return Err(InferenceError::ZeroProbabilityEvidence.into());
    }
    Ok(match abduced {
        AbductionResult::Deterministic(_) => DistributionResult::Point {
            targets: q.targets.clone(),
            values: samples.into_iter().next().expect("one draw"),
        },
        AbductionResult::Posterior(_) => {
            DistributionResult::Empirical(Empirical::new(q.targets.clone(), samples, weights))
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IceRequest {
    pub facts: Facts,
    pub targets: Vec<String>,
    pub do1: Intervention,
    pub do2: Intervention,
    pub method: AbductionMethod,
    pub workers: Workers,
}

/// Paired effect `Y(do1) - Y(do2)` over one shared abduction.
#[derive(Debug, Clone, PartialEq)]
pub struct IceResult {
    pub targets: Vec<String>,
    /// One row per abduced draw, one column per target.
    pub differences: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// Weighted mean difference per target.
    pub mean: Vec<f64>,
    /// Per-target summaries of the difference distribution, for posterior
    /// abduction only.
    pub summary: Option<Vec<Summary>>,
    pub arm1: DistributionResult,
    pub arm2: DistributionResult,
    /// The shared abduction.
    pub abduction: AbductionResult,
}

/// Individual causal effect of `do1` against `do2`. Both arms propagate the
/// same abduced draws, so differences are taken draw by draw.
pub fn ice(scm: &Scm, r: &IceRequest) -> Result<IceResult, IciError> {
    let target_idx = check_targets(scm, &r.targets)?;
    let m1 = surgery(scm, &r.do1)?;
    let m2 = surgery(scm, &r.do2)?;
    let abduced = indiv(scm, &r.facts, &r.method)?;
    let (draws, weights) = abduced.draws();
    let none = Assignment::new();
    let y1 = propagate(&m1, &draws, &target_idx, &none, 0.0, r.workers)?;
    let y2 = propagate(&m2, &draws, &target_idx, &none, 0.0, r.workers)?;
    let collect =
        |ys: Vec<Option<Vec<f64>>>| -> Vec<Vec<f64>> { ys.into_iter().map(|y| y.expect("no evidence")).collect() };
    let (y1, y2) = (collect(y1), collect(y2));
    let differences: Vec<Vec<f64>> = y1
        .iter()
        .zip(&y2)
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
        .collect();

    let w_sum: f64 = weights.iter().sum();
    let mean = (0..target_idx.len())
        .map(|j| differences.iter().zip(&weights).map(|(d, w)| d[j] * w).sum::<f64>() / w_sum)
        .collect();
    let arm = |ys: Vec<Vec<f64>>| match &abduced {
        AbductionResult::Deterministic(_) => DistributionResult::Point {
            targets: r.targets.clone(),
            values: ys.into_iter().next().expect("one draw"),
        },
        AbductionResult::Posterior(_) => {
            DistributionResult::Empirical(Empirical::new(r.targets.clone(), ys, weights.clone()))
        }
    };
    let summary = matches!(abduced, AbductionResult::Posterior(_)).then(|| {
        (0..target_idx.len())
            .map(|j| {
                let col: Vec<f64> = differences.iter().map(|d| d[j]).collect();
                Summary::weighted(&col, &weights)
            })
            .collect()
    });
    Ok(IceResult {
        targets: r.targets.clone(),
        mean,
        summary,
        arm1: arm(y1),
        arm2: arm(y2),
        differences,
        weights,
        abduction: abduced,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_scm;
    use crate::inference::Engine;
    use crate::intervention::intervention_query;

    const EXAMPLE: &str = "noise U_Z ~ Point(2)\nnoise U_X ~ Point(-1)\nnoise U_Y ~ Point(7)\n\
                           var Z = U_Z\nvar X = Z + U_X\nvar Y = X + Z + U_Y\n";

    fn facts() -> Facts {
        [("X", 1.0), ("Y", 10.0), ("Z", 2.0)].into()
    }

    fn y() -> Vec<String> {
        vec!["Y".to_string()]
    }

    #[test]
    fn worked_example_interventions() {
        let scm = parse_scm(EXAMPLE).unwrap();
        for (x, expected) in [(0.0, 9.0), (1.0, 10.0), (2.0, 11.0)] {
            let q = IndividualQuery::new(facts(), [("X", x)].into(), y(), AbductionMethod::Exact);
            let r = ici_query(&scm, &q).unwrap();
            assert_eq!(
                r,
                DistributionResult::Point {
                    targets: y(),
                    values: vec![expected]
                }
            );
        }
    }

    #[test]
    fn worked_example_effect() {
        let scm = parse_scm(EXAMPLE).unwrap();
        let req = IceRequest {
            facts: facts(),
            targets: y(),
            do1: [("X", 1.0)].into(),
            do2: [("X", 0.0)].into(),
            method: AbductionMethod::Exact,
            workers: Workers::default(),
        };
        let r = ice(&scm, &req).unwrap();
        assert_eq!(r.differences, vec![vec![1.0]]);
        assert_eq!(r.mean, vec![1.0]);
        assert!(r.summary.is_none());
    }

    #[test]
    fn indiv_dispatch() {
        let scm = parse_scm(EXAMPLE).unwrap();
        let AbductionResult::Deterministic(u) = indiv(&scm, &facts(), &AbductionMethod::Exact).unwrap() else {
            panic!()
        };
        assert_eq!(u.0, vec![2.0, -1.0, 7.0]);
        let e = indiv(&scm, &[("X", 1.0)].into(), &AbductionMethod::Exact).unwrap_err();
        assert_eq!(e.code(), "partial_observation");
    }

    #[test]
    fn linear_effect_is_the_difference_of_doses() {
        let scm = parse_scm(
            "noise U_Z ~ Normal(0, 1)\nnoise U_X ~ Normal(0, 1)\nnoise U_Y ~ Normal(0, 1)\n\
             var Z = U_Z\nvar X = Z + U_X\nvar Y = X + Z + U_Y\n",
        )
        .unwrap();
        let mut opts = RejectionOptions::new(500, 1);
        opts.epsilon = Some(0.05);
        let req = IceRequest {
            facts: [("X", 1.0)].into(),
            targets: y(),
            do1: [("X", 3.0)].into(),
            do2: [("X", -0.5)].into(),
            method: AbductionMethod::Rejection(opts),
            workers: Workers::default(),
        };
        let r = ice(&scm, &req).unwrap();
        assert_eq!(r.differences.len(), 500);
        assert!(r.differences.iter().all(|d| (d[0] - 3.5).abs() < 1e-12));
        let same = ice(
            &scm,
            &IceRequest {
                do2: req.do1.clone(),
                ..req.clone()
            },
        )
        .unwrap();
        assert!(same.differences.iter().all(|d| d[0] == 0.0));
    }

    #[test]
    fn point_population_matches_intervention_query() {
        let scm = parse_scm(EXAMPLE).unwrap();
        let d: Intervention = [("X", 0.0)].into();
        let q = IndividualQuery::new(
            [("Z", 2.0)].into(),
            d.clone(),
            y(),
            AbductionMethod::Rejection(RejectionOptions::new(50, 0)),
        );
        let a = ici_query(&scm, &q).unwrap();
        let b = intervention_query(&scm, &y(), &d, &Assignment::new(), &Engine::exact()).unwrap();
        assert_eq!(a.to_pmf(), b.to_pmf());
    }

    #[test]
    fn evidence_filters_after_propagation() {
        let scm = parse_scm(
            "noise U_Z ~ Categorical(0, 1, 0.5, 0.5)\nnoise U_X ~ Categorical(0, 1, 0.5, 0.5)\nnoise U_Y ~ Categorical(0, 1, 0.5, 0.5)\n\
             var Z = U_Z\nvar X = Z + U_X\nvar Y = X + Z + U_Y\n",
        )
        .unwrap();
        let mut q = IndividualQuery::new(
            [("X", 1.0)].into(),
            [("X", 0.0)].into(),
            y(),
            AbductionMethod::Rejection(RejectionOptions::new(2_000, 5)),
        );
        q.evidence = [("Z", 1.0)].into();
        let r = ici_query(&scm, &q).unwrap();
        // given X = 1 and Z = 1, U_Y is untouched: Y = 0 + 1 + U_Y
        let pmf = r.to_pmf();
        assert_eq!(pmf.len(), 2);
        q.evidence = [("Z", 5.0)].into();
        assert_eq!(ici_query(&scm, &q).unwrap_err().code(), "zero_probability_evidence");
    }
}
