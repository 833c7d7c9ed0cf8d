//! The do-operator: graph surgery, truncated factorization and intervention
//! queries `P(Y | do(X), Z)`.
//!
//! Evidence `Z` is conditioned on in the mutilated model, after surgery.

use crate::expr::Expr;
use crate::factor::{product_all, Factor};
use crate::inference::{association_query, conditional_factors, DistributionResult, Engine, InferenceError};
use crate::model::{validate, Assignment, ModelError, Scm};
use crate::noise::Distribution;

/// A do-assignment `do(X = x)`.
pub type Intervention = Assignment;

fn check_intervention(scm: &Scm, intervention: &Intervention) -> Result<Vec<(usize, f64)>, InferenceError> {
    intervention
        .iter()
        .map(|(name, x)| {
            let i = scm
                .index_of(name)
                .ok_or_else(|| ModelError::UnknownVariable(name.to_string()))?;
            if !x.is_finite() {
                return Err(InferenceError::InvalidQuery(format!(
                    "intervention value for `{name}` is not finite"
                )));
            }
            Ok((i, x))
        })
        .collect()
}

/// Replace each intervened equation by its constant and make its noise an
/// inert `Point(0)`. Everything else is untouched.
pub fn surgery(scm: &Scm, intervention: &Intervention) -> Result<Scm, InferenceError> {
    check_intervention(scm, intervention)?;
    if intervention.is_empty() {
        return Ok(scm.clone());
    }
    let mut raw = scm.to_raw();
    let mut cut_noises = Vec::new();
    for var in &mut raw.variables {
        if let Some(x) = intervention.get(&var.name) {
            var.expr = Expr::num(x);
            cut_noises.extend(var.noise.clone());
        }
    }
    for noise in &mut raw.noises {
        if cut_noises.contains(&noise.spec.name) {
            noise.spec.distribution = Distribution::Point(0.0);
        }
    }
    raw.inverses.retain(|inv| !cut_noises.contains(&inv.noise));
    validate(&raw).map_err(|diags| {
        // surgery only removes edges, so a valid model stays valid
        InferenceError::Model(diags.into_iter().next().expect("diagnostic").error)
    })
}

/// Joint pmf of the mutilated model over all variables (declaration order):
/// the product of `P(V_i | Pa(V_i))` for non-intervened variables times
/// `I(X = x)` for each intervened one.
pub fn truncated_joint(scm: &Scm, intervention: &Intervention, cap: usize) -> Result<Factor, InferenceError> {
    let fixed = check_intervention(scm, intervention)?;
    let mask = vec![true; scm.len()];
    let factors = conditional_factors(scm, &mask, &fixed, cap)?;
    let joint = product_all(&factors);
    let scope: Vec<String> = scm.names().map(String::from).collect();
    Ok(joint.reorder(&scope).expect("every variable has a factor").pruned())
}

/// `P(targets | do(intervention), evidence)`: association on the mutilated
/// model. A target that is itself intervened gets a point mass at its
/// do-value.
pub fn intervention_query(
    scm: &Scm,
    targets: &[String],
    intervention: &Intervention,
    evidence: &Assignment,
    engine: &Engine,
) -> Result<DistributionResult, InferenceError> {
    let mutilated = surgery(scm, intervention)?;
    association_query(&mutilated, targets, evidence, engine)
}
