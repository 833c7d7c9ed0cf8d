//! Abduction: recovering exogenous noise from an individual's observed facts.
//!
//! * [`abduce_exact`] inverts every equation when all variables are observed.
//! * [`abduce_update`] finds the noise closest to a baseline that reproduces
//!   partial facts.
//! * [`abduce_rejection`] and [`abduce_mcmc`] sample the posterior of the
//!   noise given the facts. Continuous observations are matched within a
//!   tolerance window (rejection) or a Gaussian kernel (MCMC), since an exact
//!   match has probability zero.

mod mcmc;
mod optimize;
mod rejection;
mod update;

use thiserror::Error;

use crate::model::{Assignment, EvalError, ModelError, NoiseDraw, Scm};
use crate::rng::{stream_rng, AUX_STREAM};
use crate::stats::Summary;

pub use mcmc::{abduce_mcmc, McmcOptions, DEFAULT_PROPOSAL_SCALE};
pub use rejection::{abduce_rejection, RejectionOptions, DEFAULT_MAX_PROPOSALS};
pub use update::{abduce_update, RESIDUAL_TOLERANCE};

/// Observed values of endogenous variables for one individual.
pub type Facts = Assignment;

/// Forward samples used to estimate default tolerances.
pub const TOLERANCE_PILOT_SAMPLES: usize = 1000;
/// Default tolerance as a fraction of the prior-predictive standard deviation.
pub const TOLERANCE_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AbductionError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("invalid facts: {0}")]
    InvalidFacts(String),
    #[error("invalid options: {0}")]
    InvalidOptions(String),
    #[error("facts leave {} unobserved", .missing.join(", "))]
    PartialObservation { missing: Vec<String> },
    #[error("equation of `{0}` cannot be inverted")]
    NotInvertible(String),
    #[error("no noise assignment reproduces the facts (max residual {residual:e})")]
    NoFeasiblePoint { residual: f64 },
    #[error("abduction objective is not finite")]
    NonFiniteObjective,
    #[error("proposal budget exhausted after {n_proposed} proposals with {accepted} accepted")]
    BudgetExhausted {
        accepted: usize,
        n_proposed: usize,
        partial: Box<Posterior>,
    },
    #[error("chain is degenerate (acceptance rate {acceptance_rate})")]
    DegenerateChain { acceptance_rate: f64 },
    #[error("kernel bandwidth must be positive, got {0}")]
    BadBandwidth(f64),
}

impl AbductionError {
    pub fn code(&self) -> &'static str {
        match self {
            AbductionError::Model(e) => e.code(),
            AbductionError::Eval(_) => "evaluation_error",
            AbductionError::InvalidFacts(_) => "invalid_facts",
            AbductionError::InvalidOptions(_) => "invalid_options",
            AbductionError::PartialObservation { .. } => "partial_observation",
            AbductionError::NotInvertible(_) => "not_invertible",
            AbductionError::NoFeasiblePoint { .. } => "no_feasible_point",
            AbductionError::NonFiniteObjective => "non_finite_objective",
            AbductionError::BudgetExhausted { .. } => "budget_exhausted",
            AbductionError::DegenerateChain { .. } => "degenerate_chain",
            AbductionError::BadBandwidth(_) => "bad_bandwidth",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDiagnostics {
    pub acceptance_rate: f64,
    pub n_proposed: usize,
    pub ess: f64,
    /// Matching window (rejection) or kernel bandwidth (MCMC) per observed
    /// continuous variable; finite-support observations match exactly.
    pub tolerances: Assignment,
}

/// Weighted noise draws approximating `P(U | facts)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    pub samples: Vec<NoiseDraw>,
    pub weights: Vec<f64>,
    pub diagnostics: PosteriorDiagnostics,
}

impl Posterior {
    /// Summary of noise coordinate `j`.
    pub fn coordinate_summary(&self, j: usize) -> Summary {
        let col: Vec<f64> = self.samples.iter().map(|s| s.0[j]).collect();
        Summary::weighted(&col, &self.weights)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AbductionResult {
    Deterministic(NoiseDraw),
    Posterior(Posterior),
}

impl AbductionResult {
    /// Noise draws with their weights.
    pub fn draws(&self) -> (Vec<&NoiseDraw>, Vec<f64>) {
        match self {
            AbductionResult::Deterministic(u) => (vec![u], vec![1.0]),
            AbductionResult::Posterior(p) => (p.samples.iter().collect(), p.weights.clone()),
        }
    }
}

/// Facts as `(slot, value)` pairs, in declaration order.
pub(crate) fn resolve_facts(scm: &Scm, facts: &Facts) -> Result<Vec<(usize, f64)>, AbductionError> {
    if facts.is_empty() {
        return Err(AbductionError::InvalidFacts("at least one fact is required".into()));
    }
    let mut out = Vec::with_capacity(facts.len());
    for (name, v) in facts.iter() {
        let i = scm
            .index_of(name)
            .ok_or_else(|| ModelError::UnknownVariable(name.to_string()))?;
        if !v.is_finite() {
            return Err(AbductionError::InvalidFacts(format!("`{name}` is not finite")));
        }
        out.push((i, v));
    }
    out.sort_by_key(|(i, _)| *i);
    Ok(out)
}

/// An observed variable with its matching rule.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Observation {
    pub slot: usize,
    pub value: f64,
    /// `None` for exact matching (finite-support variables).
    pub tolerance: Option<f64>,
}

impl Observation {
    pub fn matches(&self, v: f64) -> bool {
        match self.tolerance {
            None => v == self.value,
            Some(eps) => (v - self.value).abs() <= eps,
        }
    }
}

/// Build observations. Continuous variables use `tolerance` when given,
/// else [`default_tolerances`].
pub(crate) fn observations(
    scm: &Scm,
    facts: &[(usize, f64)],
    tolerance: Option<f64>,
    seed: u64,
) -> Result<Vec<Observation>, AbductionError> {
    let finite = scm.finite_support_mask();
    let defaults = match tolerance {
        Some(_) => None,
        None => Some(default_tolerances(scm, seed)?),
    };
    Ok(facts
        .iter()
        .map(|&(slot, value)| Observation {
            slot,
            value,
            tolerance: (!finite[slot]).then(|| tolerance.unwrap_or_else(|| defaults.as_ref().expect("defaults")[slot])),
        })
        .collect())
}

pub(crate) fn tolerance_assignment(scm: &Scm, obs: &[Observation]) -> Assignment {
    obs.iter()
        .filter_map(|o| o.tolerance.map(|t| (scm.variables()[o.slot].name.clone(), t)))
        .collect()
}

/// `TOLERANCE_FRACTION` times each variable's prior-predictive standard
/// deviation, estimated from forward samples on the auxiliary stream.
pub fn default_tolerances(scm: &Scm, seed: u64) -> Result<Vec<f64>, EvalError> {
    let mut rng = stream_rng(seed, AUX_STREAM);
    let n = TOLERANCE_PILOT_SAMPLES;
    let mut noise = vec![0.0; scm.len()];
    let mut vals = vec![0.0; scm.len()];
    let mut columns = vec![Vec::with_capacity(n); scm.len()];
    for _ in 0..n {
        crate::inference::draw_noise(scm, &mut rng, &mut noise);
        scm.evaluate_into(&noise, &mut vals)?;
        for (c, v) in columns.iter_mut().zip(&vals) {
            c.push(*v);
        }
    }
    Ok(columns
        .iter()
        .map(|c| TOLERANCE_FRACTION * Summary::unweighted(c).std_dev)
        .collect())
}

/// Invert every equation given a complete observation.
pub fn abduce_exact(scm: &Scm, facts: &Facts) -> Result<NoiseDraw, AbductionError> {
    let obs = resolve_facts(scm, facts)?;
    if obs.len() < scm.len() {
        let missing = scm.names().filter(|n| !facts.contains(n)).map(String::from).collect();
        return Err(AbductionError::PartialObservation { missing });
    }
    let vals: Vec<f64> = obs.iter().map(|(_, v)| *v).collect();
    let mut u = vec![0.0; scm.len()];
    for &i in scm.order() {
        u[i] = scm
            .invert(i, &vals)
            .ok_or_else(|| AbductionError::NotInvertible(scm.variables()[i].name.clone()))??;
    }
    Ok(NoiseDraw(u))
}
