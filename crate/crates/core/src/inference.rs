//! Forward simulation, exact enumeration and association queries `P(Y | Z)`.
//!
//! Two engines answer association queries:
//!
//! * [`Engine::Exact`] builds one conditional factor `P(V | Pa(V))` per
//!   relevant variable by pushing each noise atom through its equation, then
//!   runs sum-product variable elimination. Requires finite-support noise on
//!   the ancestors of the query.
//! * [`Engine::MonteCarlo`] forward-samples the model and keeps draws that
//!   agree with the evidence: exactly for finite-support variables, within a
//!   window `|v - z| <= window` otherwise. The window makes continuous
//!   conditioning approximate.

use std::collections::BTreeMap;

use rand::Rng;
use thiserror::Error;

use crate::factor::{eliminate, key, Atom, EliminationOrder, Factor, Key};
use crate::model::{Assignment, EvalError, ModelError, NoiseDraw, Scm};
use crate::rng::{shard_sizes, stream_rng, Workers};
use crate::stats::Summary;

/// Default cap on joint (or per-factor) support size.
pub const DEFAULT_SUPPORT_CAP: usize = 1_000_000;
/// Default evidence window for continuous variables.
pub const DEFAULT_EVIDENCE_WINDOW: f64 = 1e-3;
/// Sample count used when the automatic engine falls back to Monte Carlo.
pub const DEFAULT_MC_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InferenceError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("variable `{0}` does not have finite support")]
    NotFiniteSupport(String),
    #[error("support exceeds the cap of {cap} states")]
    SupportTooLarge { cap: usize },
    #[error("evidence has zero probability")]
    ZeroProbabilityEvidence,
    #[error("invalid query: {0}")]
    InvalidQuery(String),
}

impl InferenceError {
    pub fn code(&self) -> &'static str {
        match self {
            InferenceError::Eval(_) => "evaluation_error",
            InferenceError::Model(e) => e.code(),
            InferenceError::NotFiniteSupport(_) => "not_finite_support",
            InferenceError::SupportTooLarge { .. } => "support_too_large",
            InferenceError::ZeroProbabilityEvidence => "zero_probability_evidence",
            InferenceError::InvalidQuery(_) => "invalid_query",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarlo {
    pub n: usize,
    pub seed: u64,
    pub window: f64,
    pub workers: Workers,
}

impl MonteCarlo {
    pub fn new(n: usize, seed: u64) -> Self {
        MonteCarlo {
            n,
            seed,
            window: DEFAULT_EVIDENCE_WINDOW,
            workers: Workers::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Engine {
    Exact { cap: usize, order: EliminationOrder },
    MonteCarlo(MonteCarlo),
}

impl Engine {
    pub fn exact() -> Self {
        Engine::Exact {
            cap: DEFAULT_SUPPORT_CAP,
            order: EliminationOrder::MinDegree,
        }
    }

    pub fn monte_carlo(n: usize, seed: u64) -> Self {
        Engine::MonteCarlo(MonteCarlo::new(n, seed))
    }

    /// Exact when every ancestor of the query has finite-support noise and
    /// the conditional tables fit under the default cap; otherwise Monte
    /// Carlo with [`DEFAULT_MC_SAMPLES`] draws.
    pub fn auto(scm: &Scm, targets: &[String], evidence: &Assignment, seed: u64) -> Self {
        let exact_ok = query_mask(scm, targets, evidence)
            .and_then(|mask| conditional_factors(scm, &mask, &[], DEFAULT_SUPPORT_CAP))
            .is_ok();
        if exact_ok {
            Engine::exact()
        } else {
            Engine::monte_carlo(DEFAULT_MC_SAMPLES, seed)
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Engine::Exact { .. } => "exact",
            Engine::MonteCarlo(_) => "mc",
        }
    }
}

/// Exact probability mass function over target tuples.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    pub targets: Vec<String>,
    pub support: Vec<Vec<f64>>,
    pub probs: Vec<f64>,
}

/// Weighted sample of target tuples.
#[derive(Debug, Clone, PartialEq)]
pub struct Empirical {
    pub targets: Vec<String>,
    pub samples: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// One summary per target.
    pub summary: Vec<Summary>,
}

impl Empirical {
    pub fn new(targets: Vec<String>, samples: Vec<Vec<f64>>, weights: Vec<f64>) -> Self {
        let summary = (0..targets.len())
            .map(|j| {
                let col: Vec<f64> = samples.iter().map(|s| s[j]).collect();
                Summary::weighted(&col, &weights)
            })
            .collect();
        Empirical {
            targets,
            samples,
            weights,
            summary,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DistributionResult {
    Pmf(Pmf),
    Empirical(Empirical),
    /// Degenerate result of a deterministic computation.
    Point {
        targets: Vec<String>,
        values: Vec<f64>,
    },
}

impl DistributionResult {
    pub fn targets(&self) -> &[String] {
        match self {
            DistributionResult::Pmf(p) => &p.targets,
            DistributionResult::Empirical(e) => &e.targets,
            DistributionResult::Point { targets, .. } => targets,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            DistributionResult::Pmf(_) => "pmf",
            DistributionResult::Empirical(_) => "empirical",
            DistributionResult::Point { .. } => "point",
        }
    }

    /// Normalized mass on exact target tuples (empirical samples grouped).
    pub fn to_pmf(&self) -> BTreeMap<Key, f64> {
        let mut out = BTreeMap::new();
        match self {
            DistributionResult::Pmf(p) => {
                for (s, q) in p.support.iter().zip(&p.probs) {
                    *out.entry(key(s)).or_insert(0.0) += q;
                }
            }
            DistributionResult::Empirical(e) => {
                let total: f64 = e.weights.iter().sum();
                for (s, w) in e.samples.iter().zip(&e.weights) {
                    *out.entry(key(s)).or_insert(0.0) += w;
                }
                out.values_mut().for_each(|v| *v /= total);
            }
            DistributionResult::Point { values, .. } => {
                out.insert(key(values), 1.0);
            }
        }
        out
    }

    /// Expected value of `target`.
    pub fn mean(&self, target: &str) -> Option<f64> {
        let j = self.targets().iter().position(|t| t == target)?;
        Some(match self {
            DistributionResult::Pmf(p) => p.support.iter().zip(&p.probs).map(|(s, q)| s[j] * q).sum(),
            DistributionResult::Empirical(e) => e.summary[j].mean,
            DistributionResult::Point { values, .. } => values[j],
        })
    }
}

/// Forward-evaluate all variables from a complete noise draw.
pub fn forward_sample(scm: &Scm, noise: &NoiseDraw) -> Result<Assignment, EvalError> {
    Ok(scm.assignment_from_slots(&forward_slots(scm, noise.values())?))
}

pub(crate) fn forward_slots(scm: &Scm, noise: &[f64]) -> Result<Vec<f64>, EvalError> {
    let mut vals = vec![0.0; scm.len()];
    scm.evaluate_into(noise, &mut vals)?;
    Ok(vals)
}

/// Draw one joint noise vector, coordinates in declaration order.
pub(crate) fn draw_noise<R: Rng + ?Sized>(scm: &Scm, rng: &mut R, out: &mut [f64]) {
    for (u, v) in out.iter_mut().zip(scm.variables()) {
        *u = v.noise.distribution.sample(rng);
    }
}

/// Run `visit` on `n` seeded prior draws `(noise, values)`, sharded, keeping
/// the `Some` results in draw order.
pub(crate) fn simulate<T, F>(scm: &Scm, seed: u64, n: usize, workers: Workers, visit: F) -> Result<Vec<T>, EvalError>
where
    T: Send,
    F: Fn(&[f64], &[f64]) -> Option<T> + Sync + Send,
{
    let sizes = shard_sizes(n);
    let shards = workers.run(sizes.len(), |s| {
        let mut rng = stream_rng(seed, s as u64);
        let mut noise = vec![0.0; scm.len()];
        let mut vals = vec![0.0; scm.len()];
        let mut out = Vec::new();
        for _ in 0..sizes[s] {
            draw_noise(scm, &mut rng, &mut noise);
            scm.evaluate_into(&noise, &mut vals)?;
            if let Some(t) = visit(&noise, &vals) {
                out.push(t);
            }
        }
        Ok(out)
    });
    let mut all = Vec::with_capacity(n);
    for shard in shards {
        all.extend(shard?);
    }
    Ok(all)
}

/// `n` independent joint noise draws. Shard `s` covers draws
/// `[s * SHARD_SIZE, (s + 1) * SHARD_SIZE)` from ChaCha8 stream `s`.
pub fn sample_noise(scm: &Scm, seed: u64, n: usize) -> Vec<NoiseDraw> {
    sample_noise_with(scm, seed, n, Workers::default())
}

pub fn sample_noise_with(scm: &Scm, seed: u64, n: usize, workers: Workers) -> Vec<NoiseDraw> {
    let sizes = shard_sizes(n);
    workers
        .run(sizes.len(), |s| {
            let mut rng = stream_rng(seed, s as u64);
            (0..sizes[s])
                .map(|_| {
                    let mut u = vec![0.0; scm.len()];
                    draw_noise(scm, &mut rng, &mut u);
                    NoiseDraw(u)
                })
                .collect::<Vec<_>>()
        })
        .into_iter()
        .flatten()
        .collect()
}

/// Exact joint pmf over all variables (scope in declaration order), by
/// enumerating every combination of noise atoms.
pub fn enumerate_joint(scm: &Scm, cap: usize) -> Result<Factor, InferenceError> {
    let atoms = all_atoms(scm)?;
    let combos = atoms.iter().try_fold(1usize, |acc, a| acc.checked_mul(a.len()));
    if combos.is_none_or(|c| c > cap) {
        return Err(InferenceError::SupportTooLarge { cap });
    }
    let scope: Vec<String> = scm.names().map(String::from).collect();
    let mut table: BTreeMap<Key, f64> = BTreeMap::new();
    if atoms.iter().any(Vec::is_empty) {
        return Ok(Factor::new(scope, table));
    }
    let mut idx = vec![0usize; atoms.len()];
    let mut noise = vec![0.0; atoms.len()];
    let mut vals = vec![0.0; atoms.len()];
    loop {
        let mut p = 1.0;
        for (i, a) in atoms.iter().enumerate() {
            noise[i] = a[idx[i]].0;
            p *= a[idx[i]].1;
        }
        scm.evaluate_into(&noise, &mut vals)?;
        *table.entry(key(&vals)).or_insert(0.0) += p;
        // mixed-radix increment, last coordinate fastest
        let mut k = atoms.len();
        loop {
            if k == 0 {
                return Ok(Factor::new(scope, table).pruned());
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < atoms[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

fn all_atoms(scm: &Scm) -> Result<Vec<Vec<(f64, f64)>>, InferenceError> {
    scm.variables()
        .iter()
        .map(|v| {
            v.noise
                .distribution
                .atoms()
                .ok_or_else(|| InferenceError::NotFiniteSupport(v.name.clone()))
        })
        .collect()
}

/// `P(v | Pa(v) = pa_values)` obtained by pushing each noise atom of `v`
/// through its equation; masses of atoms mapping to the same value add up.
pub fn noise_to_conditional(scm: &Scm, v: &str, pa_values: &Assignment) -> Result<Factor, InferenceError> {
    let i = scm
        .index_of(v)
        .ok_or_else(|| ModelError::UnknownVariable(v.to_string()))?;
    let var = &scm.variables()[i];
    let atoms = var
        .noise
        .distribution
        .atoms()
        .ok_or_else(|| InferenceError::NotFiniteSupport(v.to_string()))?;
    let mut slots = vec![0.0; scm.len()];
    for &p in var.parent_indices() {
        let name = &scm.variables()[p].name;
        slots[p] = pa_values
            .get(name)
            .ok_or_else(|| InferenceError::InvalidQuery(format!("missing value for parent `{name}` of `{v}`")))?;
    }
    let mut table = BTreeMap::new();
    for (u, q) in atoms {
        let x = scm.eval_variable(i, &slots, u)?;
        *table.entry(vec![Atom::new(x)]).or_insert(0.0) += q;
    }
    Ok(Factor::new(vec![v.to_string()], table))
}

/// Conditional factors `P(V_i | Pa(V_i))` for every variable in `mask`, with
/// each intervened variable replaced by the indicator `I(V_i = x)` (its
/// support collapses to `{x}`).
pub(crate) fn conditional_factors(
    scm: &Scm,
    mask: &[bool],
    intervened: &[(usize, f64)],
    cap: usize,
) -> Result<Vec<Factor>, InferenceError> {
    let mut supports: Vec<Vec<f64>> = vec![Vec::new(); scm.len()];
    let mut factors = Vec::new();
    for &i in scm.order() {
        if !mask[i] {
            continue;
        }
        let var = &scm.variables()[i];
        if let Some(&(_, x)) = intervened.iter().find(|(j, _)| *j == i) {
            supports[i] = vec![x];
            factors.push(Factor::indicator(&var.name, x));
            continue;
        }
        let atoms = var
            .noise
            .distribution
            .atoms()
            .ok_or_else(|| InferenceError::NotFiniteSupport(var.name.clone()))?;
        let parents = var.parent_indices();
        let size = parents
            .iter()
            .try_fold(atoms.len(), |acc, &p| acc.checked_mul(supports[p].len()));
        if size.is_none_or(|s| s > cap) {
            return Err(InferenceError::SupportTooLarge { cap });
        }

        let mut scope: Vec<String> = parents.iter().map(|&p| scm.variables()[p].name.clone()).collect();
        scope.push(var.name.clone());
        let mut table: BTreeMap<Key, f64> = BTreeMap::new();
        let mut slots = vec![0.0; scm.len()];
        let mut idx = vec![0usize; parents.len()];
        let mut values: Vec<Atom> = Vec::new();
        'configs: loop {
            if parents.iter().any(|&p| supports[p].is_empty()) {
                break;
            }
            for (k, &p) in parents.iter().enumerate() {
                slots[p] = supports[p][idx[k]];
            }
            let pa_key: Key = parents.iter().map(|&p| Atom::new(slots[p])).collect();
            for &(u, q) in &atoms {
                let x = scm.eval_variable(i, &slots, u)?;
                let mut k = pa_key.clone();
                k.push(Atom::new(x));
                *table.entry(k).or_insert(0.0) += q;
                values.push(Atom::new(x));
            }
            let mut k = parents.len();
            loop {
                if k == 0 {
                    break 'configs;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < supports[parents[k]].len() {
                    break;
                }
                idx[k] = 0;
            }
        }
        values.sort();
        values.dedup();
        supports[i] = values.into_iter().map(Atom::get).collect();
        factors.push(Factor::new(scope, table));
    }
    Ok(factors)
}

/// Variables relevant to a query: ancestors of targets and evidence.
fn query_mask(scm: &Scm, targets: &[String], evidence: &Assignment) -> Result<Vec<bool>, InferenceError> {
    let mut seeds = scm.resolve(targets)?;
    for name in evidence.keys() {
        seeds.push(
            scm.index_of(name)
                .ok_or_else(|| ModelError::UnknownVariable(name.to_string()))?,
        );
    }
    Ok(scm.ancestors_or_self(&seeds))
}

fn check_query(scm: &Scm, targets: &[String], evidence: &Assignment) -> Result<(), InferenceError> {
    if targets.is_empty() {
        return Err(InferenceError::InvalidQuery("at least one target is required".into()));
    }
    for (i, t) in targets.iter().enumerate() {
        if targets[..i].contains(t) {
            return Err(InferenceError::InvalidQuery(format!("target `{t}` listed twice")));
        }
    }
    scm.resolve(targets)?;
    for (name, v) in evidence.iter() {
        scm.index_of(name)
            .ok_or_else(|| ModelError::UnknownVariable(name.to_string()))?;
        if !v.is_finite() {
            return Err(InferenceError::InvalidQuery(format!("evidence `{name}` is not finite")));
        }
    }
    Ok(())
}

/// `P(targets | evidence)`.
///
/// A target may also appear in the evidence; it then has a point mass at
/// the evidence value (provided the evidence has positive probability).
pub fn association_query(
    scm: &Scm,
    targets: &[String],
    evidence: &Assignment,
    engine: &Engine,
) -> Result<DistributionResult, InferenceError> {
    check_query(scm, targets, evidence)?;
    match engine {
        Engine::Exact { cap, order } => exact_query(scm, targets, evidence, &[], *cap, *order),
        Engine::MonteCarlo(mc) => monte_carlo_query(scm, targets, evidence, mc),
    }
}

pub(crate) fn exact_query(
    scm: &Scm,
    targets: &[String],
    evidence: &Assignment,
    intervened: &[(usize, f64)],
    cap: usize,
    order: EliminationOrder,
) -> Result<DistributionResult, InferenceError> {
    let mask = query_mask(scm, targets, evidence)?;
    let mut factors = conditional_factors(scm, &mask, intervened, cap)?;
    for (name, z) in evidence.iter() {
        factors = factors.into_iter().map(|f| f.reduce(name, z)).collect();
    }
    let free: Vec<String> = targets.iter().filter(|t| !evidence.contains(t)).cloned().collect();
    let hidden: Vec<String> = scm
        .variables()
        .iter()
        .enumerate()
        .filter(|(i, v)| mask[*i] && !evidence.contains(&v.name) && !targets.contains(&v.name))
        .map(|(_, v)| v.name.clone())
        .collect();
    let joint = eliminate(factors, &hidden, order);
    let joint = joint
        .reorder(&free)
        .ok_or_else(|| InferenceError::InvalidQuery("elimination left unexpected variables".into()))?;
    let pmf = joint
        .pruned()
        .normalized()
        .ok_or(InferenceError::ZeroProbabilityEvidence)?;

    let mut support = Vec::with_capacity(pmf.len());
    let mut probs = Vec::with_capacity(pmf.len());
    for (k, p) in pmf.table() {
        let mut free_vals = k.iter();
        let tuple = targets
            .iter()
            .map(|t| {
                evidence
                    .get(t)
                    .unwrap_or_else(|| free_vals.next().expect("arity").get())
            })
            .collect();
        support.push(tuple);
        probs.push(*p);
    }
    Ok(DistributionResult::Pmf(Pmf {
        targets: targets.to_vec(),
        support,
        probs,
    }))
}

/// Does slot `i` agree with evidence value `z`?
pub(crate) fn matches_evidence(value: f64, z: f64, finite_support: bool, window: f64) -> bool {
    if finite_support {
        value == z
    } else {
        (value - z).abs() <= window
    }
}

/// Evidence resolved to `(slot, value, exact)`.
pub(crate) fn resolve_evidence(scm: &Scm, evidence: &Assignment) -> Result<Vec<(usize, f64, bool)>, ModelError> {
    let finite = scm.finite_support_mask();
    evidence
        .iter()
        .map(|(name, z)| {
            let i = scm
                .index_of(name)
                .ok_or_else(|| ModelError::UnknownVariable(name.to_string()))?;
            Ok((i, z, finite[i]))
        })
        .collect()
}

fn monte_carlo_query(
    scm: &Scm,
    targets: &[String],
    evidence: &Assignment,
    mc: &MonteCarlo,
) -> Result<DistributionResult, InferenceError> {
    if mc.n == 0 {
        return Err(InferenceError::InvalidQuery("Monte Carlo needs n >= 1".into()));
    }
    let target_idx = scm.resolve(targets)?;
    let ev = resolve_evidence(scm, evidence)?;
    let window = mc.window;
    let samples = simulate(scm, mc.seed, mc.n, mc.workers, |_, vals| {
        ev.iter()
            .all(|&(i, z, exact)| matches_evidence(vals[i], z, exact, window))
            .then(|| target_idx.iter().map(|&i| vals[i]).collect::<Vec<f64>>())
    })?;
    if samples.is_empty() {
        return Err(InferenceError::ZeroProbabilityEvidence);
    }
    let weights = vec![1.0; samples.len()];
    Ok(DistributionResult::Empirical(Empirical::new(
        targets.to_vec(),
        samples,
        weights,
    )))
}
