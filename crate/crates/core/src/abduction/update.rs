//! Constrained update: the noise closest to a baseline that reproduces the
//! observed facts.
//!
//! Minimizes `Σ_i w_i (u_i - b_i)²` over noises that can influence an
//! observed variable, subject to the forward model reproducing the facts.
//! An observed variable with an inverse fixes its noise as a function of its
//! parents, which removes that constraint exactly. Any remaining observed
//! variables enter through a quadratic penalty `λ Σ r²` with `λ` raised
//! from 1 to 1e8 until every residual is below [`RESIDUAL_TOLERANCE`].
//! Noise priors play no role beyond the caller's choice of baseline.

use super::optimize::minimize;
use super::{resolve_facts, AbductionError, Facts};
use crate::model::{NoiseDraw, Scm};

/// Largest residual accepted as reproducing a fact.
pub const RESIDUAL_TOLERANCE: f64 = 1e-6;

const PENALTIES: [f64; 9] = [1.0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8];

struct Problem<'a> {
    scm: &'a Scm,
    baseline: &'a [f64],
    weights: &'a [f64],
    /// Observed value per slot.
    observed: Vec<Option<f64>>,
    /// Slots whose noise can reach an observed variable, in topological order.
    active: Vec<usize>,
    /// Observed slots whose noise is recovered by inversion.
    substituted: Vec<bool>,
    /// Slots optimized directly.
    free: Vec<usize>,
    /// Observed slots matched through the penalty.
    penalized: Vec<usize>,
}

impl Problem<'_> {
    /// Full noise vector and slot values for free coordinates `x`, or `None`
    /// if an equation or inverse fails to evaluate.
    fn build(&self, x: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
        let mut u = self.baseline.to_vec();
        let mut vals = vec![0.0; self.scm.len()];
        for (k, &i) in self.free.iter().enumerate() {
            u[i] = x[k];
        }
        for &i in &self.active {
            if self.substituted[i] {
                vals[i] = self.observed[i].expect("observed");
                u[i] = self.scm.invert(i, &vals)?.ok()?;
            } else {
                vals[i] = self.scm.eval_variable(i, &vals, u[i]).ok()?;
            }
        }
        Some((u, vals))
    }

    fn distance(&self, u: &[f64]) -> f64 {
        self.active
            .iter()
            .map(|&i| self.weights[i] * (u[i] - self.baseline[i]).powi(2))
            .sum()
    }

    fn residuals(&self, vals: &[f64]) -> impl Iterator<Item = f64> + '_ {
        let vals = vals.to_vec();
        self.penalized
            .iter()
            .map(move |&i| vals[i] - self.observed[i].expect("observed"))
    }

    fn objective(&self, x: &[f64], lambda: f64) -> f64 {
        match self.build(x) {
            Some((u, vals)) => self.distance(&u) + lambda * self.residuals(&vals).map(|r| r * r).sum::<f64>(),
            None => f64::INFINITY,
        }
    }

    fn max_residual(&self, x: &[f64]) -> f64 {
        match self.build(x) {
            Some((_, vals)) => self.residuals(&vals).map(f64::abs).fold(0.0, f64::max),
            None => f64::INFINITY,
        }
    }
}

/// Noise closest to `baseline` (weighted squared distance) under which the
/// model reproduces `facts`. Noises with no path to an observed variable
/// stay at their baseline value.
pub fn abduce_update(
    scm: &Scm,
    facts: &Facts,
    baseline: &NoiseDraw,
    weights: &[f64],
) -> Result<NoiseDraw, AbductionError> {
    let obs = resolve_facts(scm, facts)?;
    if baseline.0.len() != scm.len() || baseline.0.iter().any(|v| !v.is_finite()) {
        return Err(AbductionError::InvalidOptions(format!(
            "baseline needs {} finite values",
            scm.len()
        )));
    }
    if weights.len() != scm.len() || weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(AbductionError::InvalidOptions(format!(
            "weights need {} finite non-negative values",
            scm.len()
        )));
    }

    let mut observed = vec![None; scm.len()];
    for &(i, v) in &obs {
        observed[i] = Some(v);
    }
    let slots: Vec<usize> = obs.iter().map(|(i, _)| *i).collect();
    let reach = scm.ancestors_or_self(&slots);
    let active: Vec<usize> = scm.order().iter().copied().filter(|&i| reach[i]).collect();
    let substituted: Vec<bool> = (0..scm.len())
        .map(|i| observed[i].is_some() && scm.variables()[i].inverse.is_some())
        .collect();
    let free: Vec<usize> = (0..scm.len()).filter(|&i| reach[i] && !substituted[i]).collect();
    let penalized: Vec<usize> = (0..scm.len())
        .filter(|&i| observed[i].is_some() && !substituted[i])
        .collect();
    let problem = Problem {
        scm,
        baseline: &baseline.0,
        weights,
        observed,
        active,
        substituted,
        free,
        penalized,
    };

    let mut x: Vec<f64> = problem.free.iter().map(|&i| baseline.0[i]).collect();
    let scale: Vec<f64> = x.iter().map(|v| 0.5 * v.abs().max(1.0)).collect();
    if !problem.objective(&x, 1.0).is_finite() && problem.free.is_empty() {
        return Err(AbductionError::NonFiniteObjective);
    }

    let schedule: &[f64] = if problem.penalized.is_empty() {
        &PENALTIES[..1]
    } else {
        &PENALTIES
    };
    for &lambda in schedule {
        if !problem.free.is_empty() {
            let (nx, fx) = minimize(|x| problem.objective(x, lambda), &x, &scale);
            if !fx.is_finite() {
                return Err(AbductionError::NonFiniteObjective);
            }
            x = nx;
        }
        if problem.max_residual(&x) <= RESIDUAL_TOLERANCE {
            break;
        }
    }
    let residual = problem.max_residual(&x);
    if residual > RESIDUAL_TOLERANCE {
        return Err(AbductionError::NoFeasiblePoint { residual });
    }
    let (u, _) = problem.build(&x).ok_or(AbductionError::NonFiniteObjective)?;
    Ok(NoiseDraw(u))
}
