//! Structural causal models and their validation.
//!
//! An [`Scm`] holds one structural equation per endogenous variable, each
//! paired with exactly one exogenous noise variable. Models are built from an
//! unvalidated [`RawModel`] (usually lowered from the text format) by
//! [`validate`], which reports every violation it finds rather than stopping
//! at the first.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::dsl::SourceSpan;
use crate::expr::{additive_inverse, EvalCause, Expr, Program};
use crate::noise::{Distribution, NoiseSpec};
use crate::rng::stream_rng;

/// Probe draws used to check declared inverses.
const INVERSE_PROBES: usize = 100;
const INVERSE_TOLERANCE: f64 = 1e-9;
const INVERSE_PROBE_SEED: u64 = 0x1A7E_5EED;

/// Words reserved by the model language.
pub const KEYWORDS: &[&str] = &["noise", "var", "inverse", "if", "then", "else"];

/// `[A-Za-z_][A-Za-z0-9_]*`, excluding keywords.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && !KEYWORDS.contains(&s)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("syntax error: expected {expected}, found {found}")]
    SyntaxError { expected: String, found: String },
    #[error("unknown distribution `{0}`")]
    UnknownDistribution(String),
    #[error("invalid identifier `{0}`")]
    InvalidIdentifier(String),
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("cycle detected: {}", .path.join(" -> "))]
    CycleDetected { path: Vec<String> },
    #[error("noise cardinality violation at `{name}`: {reason}")]
    NoiseCardinalityViolation { name: String, reason: String },
    #[error("unknown reference `{name}` in {location}")]
    UnknownReference { name: String, location: String },
    #[error("bad parameters for noise `{noise}`: {reason}")]
    BadDistributionParams { noise: String, reason: String },
    #[error("invalid inverse for noise `{noise}`: {reason}")]
    InverseMismatch { noise: String, reason: String },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
}

impl ModelError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            ModelError::SyntaxError { .. } => "syntax_error",
            ModelError::UnknownDistribution(_) => "unknown_distribution",
            ModelError::InvalidIdentifier(_) => "invalid_identifier",
            ModelError::DuplicateName(_) => "duplicate_name",
            ModelError::CycleDetected { .. } => "cycle_detected",
            ModelError::NoiseCardinalityViolation { .. } => "noise_cardinality_violation",
            ModelError::UnknownReference { .. } => "unknown_reference",
            ModelError::BadDistributionParams { .. } => "bad_distribution_params",
            ModelError::InverseMismatch { .. } => "inverse_mismatch",
            ModelError::UnknownVariable(_) => "unknown_variable",
        }
    }
}

/// A model error with its source position, when known.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub error: ModelError,
    pub span: Option<SourceSpan>,
}

impl Diagnostic {
    pub fn new(error: ModelError, span: Option<SourceSpan>) -> Self {
        Self { error, span }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.span {
            Some(s) => write!(f, "{}:{}: {}", s.line, s.column, self.error),
            None => write!(f, "{}", self.error),
        }
    }
}

/// Failure while forward-evaluating a structural equation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("evaluating `{var}`: {cause}")]
pub struct EvalError {
    pub var: String,
    pub cause: EvalCause,
}

/// Values keyed by variable (or noise) name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Assignment(BTreeMap<String, f64>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert, returning the previous value if the name was already bound.
    pub fn insert(&mut self, name: impl Into<String>, value: f64) -> Option<f64> {
        self.0.insert(name.into(), value)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: Into<String>> FromIterator<(S, f64)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (S, f64)>>(iter: I) -> Self {
        Assignment(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

impl<S: Into<String>, const N: usize> From<[(S, f64); N]> for Assignment {
    fn from(pairs: [(S, f64); N]) -> Self {
        pairs.into_iter().collect()
    }
}

/// One joint draw of all noise variables, indexed like [`Scm::variables`].
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseDraw(pub Vec<f64>);

impl NoiseDraw {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// Name the values by noise symbol.
    pub fn to_assignment(&self, scm: &Scm) -> Assignment {
        scm.variables
            .iter()
            .zip(&self.0)
            .map(|(v, u)| (v.noise.name.clone(), *u))
            .collect()
    }

    /// Build from named noise values; every noise must be present.
    pub fn from_assignment(scm: &Scm, a: &Assignment) -> Result<Self, ModelError> {
        for name in a.keys() {
            if scm.noise_index(name).is_none() {
                return Err(ModelError::UnknownVariable(name.to_string()));
            }
        }
        scm.variables
            .iter()
            .map(|v| {
                a.get(&v.noise.name)
                    .ok_or_else(|| ModelError::NoiseCardinalityViolation {
                        name: v.noise.name.clone(),
                        reason: "noise draw is missing this coordinate".into(),
                    })
            })
            .collect::<Result<_, _>>()
            .map(NoiseDraw)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawNoise {
    pub spec: NoiseSpec,
    pub span: Option<SourceSpan>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawVariable {
    pub name: String,
    pub expr: Expr,
    /// Name of the noise variable this equation owns.
    pub noise: Option<String>,
    pub span: Option<SourceSpan>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawInverse {
    pub noise: String,
    pub expr: Expr,
    pub span: Option<SourceSpan>,
}

/// An unvalidated model with explicit variable-to-noise linkage.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawModel {
    pub noises: Vec<RawNoise>,
    pub variables: Vec<RawVariable>,
    pub inverses: Vec<RawInverse>,
}

/// Inverse of a structural equation with respect to its noise.
#[derive(Debug, Clone, PartialEq)]
pub struct Inverse {
    pub expr: Expr,
    /// `false` when synthesized from the additive-noise form.
    pub declared: bool,
    program: Program,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub expr: Expr,
    pub noise: NoiseSpec,
    pub inverse: Option<Inverse>,
    parents: Vec<usize>,
    program: Program,
}

impl Variable {
    /// Indices of parent variables, in declaration order.
    pub fn parent_indices(&self) -> &[usize] {
        &self.parents
    }

    pub fn program(&self) -> &Program {
        &self.program
    }
}

/// A validated structural causal model. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Scm {
    variables: Vec<Variable>,
    order: Vec<usize>,
    by_name: HashMap<String, usize>,
    by_noise: HashMap<String, usize>,
}

impl Scm {
    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    /// Index of the variable owning noise `name`.
    pub fn noise_index(&self, name: &str) -> Option<usize> {
        self.by_noise.get(name).copied()
    }

    pub fn variable(&self, name: &str) -> Option<&Variable> {
        self.index_of(name).map(|i| &self.variables[i])
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.variables.iter().map(|v| v.name.as_str())
    }

    /// Variable indices in topological order (ties broken by declaration).
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn topological_order(&self) -> Vec<&str> {
        self.order.iter().map(|&i| self.variables[i].name.as_str()).collect()
    }

    /// Direct causes of `name`: the endogenous names its equation references.
    pub fn parents(&self, name: &str) -> Result<Vec<&str>, ModelError> {
        let i = self
            .index_of(name)
            .ok_or_else(|| ModelError::UnknownVariable(name.to_string()))?;
        Ok(self.variables[i]
            .parents
            .iter()
            .map(|&p| self.variables[p].name.as_str())
            .collect())
    }

    /// Resolve a list of names to indices.
    pub fn resolve(&self, names: &[String]) -> Result<Vec<usize>, ModelError> {
        names
            .iter()
            .map(|n| self.index_of(n).ok_or_else(|| ModelError::UnknownVariable(n.clone())))
            .collect()
    }

    /// `mask[i]` is true when `i` is in `seeds` or has a directed path into
    /// a seed.
    pub fn ancestors_or_self(&self, seeds: &[usize]) -> Vec<bool> {
        let mut mask = vec![false; self.len()];
        let mut stack: Vec<usize> = seeds.to_vec();
        while let Some(i) = stack.pop() {
            if !mask[i] {
                mask[i] = true;
                stack.extend(self.variables[i].parents.iter().copied());
            }
        }
        mask
    }

    /// `mask[i]` is true when `i` is in `seeds` or reachable from a seed.
    pub fn descendants_or_self(&self, seeds: &[usize]) -> Vec<bool> {
        let mut mask = vec![false; self.len()];
        for &s in seeds {
            mask[s] = true;
        }
        for &i in &self.order {
            if !mask[i] && self.variables[i].parents.iter().any(|&p| mask[p]) {
                mask[i] = true;
            }
        }
        mask
    }

    /// `mask[i]` is true when `i` and all its ancestors have finite-support
    /// noise.
    pub fn finite_support_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.len()];
        for &i in &self.order {
            let v = &self.variables[i];
            mask[i] = v.noise.distribution.is_finite_support() && v.parents.iter().all(|&p| mask[p]);
        }
        mask
    }

    /// Evaluate one equation given parent slot values and its noise value.
    pub fn eval_variable(&self, i: usize, vars: &[f64], noise: f64) -> Result<f64, EvalError> {
        self.variables[i].program.eval(vars, noise).map_err(|cause| EvalError {
            var: self.variables[i].name.clone(),
            cause,
        })
    }

    /// Forward-evaluate every variable in topological order.
    pub fn evaluate_into(&self, noise: &[f64], out: &mut [f64]) -> Result<(), EvalError> {
        for &i in &self.order {
            out[i] = self.eval_variable(i, out, noise[i])?;
        }
        Ok(())
    }

    /// Apply the inverse of equation `i` to the slot values in `vars`.
    ///
    /// `None` when the equation has no inverse.
    pub fn invert(&self, i: usize, vars: &[f64]) -> Option<Result<f64, EvalError>> {
        let inv = self.variables[i].inverse.as_ref()?;
        Some(inv.program.eval(vars, 0.0).map_err(|cause| EvalError {
            var: self.variables[i].name.clone(),
            cause,
        }))
    }

    /// Name slot values by variable.
    pub fn assignment_from_slots(&self, vals: &[f64]) -> Assignment {
        self.variables
            .iter()
            .zip(vals)
            .map(|(v, x)| (v.name.clone(), *x))
            .collect()
    }

    /// Back to an unvalidated model; validating it yields an equal `Scm`.
    pub fn to_raw(&self) -> RawModel {
        let mut raw = RawModel::default();
        for v in &self.variables {
            raw.noises.push(RawNoise {
                spec: v.noise.clone(),
                span: None,
            });
            raw.variables.push(RawVariable {
                name: v.name.clone(),
                expr: v.expr.clone(),
                noise: Some(v.noise.name.clone()),
                span: None,
            });
            if let Some(inv) = v.inverse.as_ref().filter(|inv| inv.declared) {
                raw.inverses.push(RawInverse {
                    noise: v.noise.name.clone(),
                    expr: inv.expr.clone(),
                    span: None,
                });
            }
        }
        raw
    }
}

/// Validate a raw model, collecting every violation.
pub fn validate(raw: &RawModel) -> Result<Scm, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let mut err = |e: ModelError, span: Option<SourceSpan>| diags.push(Diagnostic::new(e, span));

    // names and namespaces
    let mut noise_decl: HashMap<&str, usize> = HashMap::new();
    for (k, n) in raw.noises.iter().enumerate() {
        let name = n.spec.name.as_str();
        if !is_identifier(name) {
            err(ModelError::InvalidIdentifier(name.into()), n.span);
        }
        if noise_decl.insert(name, k).is_some() {
            err(ModelError::DuplicateName(name.into()), n.span);
        }
        if let Err(reason) = n.spec.distribution.check() {
            err(
                ModelError::BadDistributionParams {
                    noise: name.into(),
                    reason,
                },
                n.span,
            );
        }
    }
    let mut var_decl: HashMap<&str, usize> = HashMap::new();
    for (i, v) in raw.variables.iter().enumerate() {
        let name = v.name.as_str();
        if !is_identifier(name) {
            err(ModelError::InvalidIdentifier(name.into()), v.span);
        }
        if var_decl.insert(name, i).is_some() || noise_decl.contains_key(name) {
            err(ModelError::DuplicateName(name.into()), v.span);
        }
    }

    // noise linkage: one noise per variable and vice versa
    let mut owner: HashMap<&str, usize> = HashMap::new();
    for (i, v) in raw.variables.iter().enumerate() {
        match v.noise.as_deref() {
            None => err(
                ModelError::NoiseCardinalityViolation {
                    name: v.name.clone(),
                    reason: "variable has no noise variable".into(),
                },
                v.span,
            ),
            Some(n) if !noise_decl.contains_key(n) => err(
                ModelError::UnknownReference {
                    name: n.into(),
                    location: format!("noise of `{}`", v.name),
                },
                v.span,
            ),
            Some(n) => {
                if let Some(&first) = owner.get(n) {
                    err(
                        ModelError::NoiseCardinalityViolation {
                            name: v.name.clone(),
                            reason: format!("noise `{n}` already belongs to `{}`", raw.variables[first].name),
                        },
                        v.span,
                    );
                } else {
                    owner.insert(n, i);
                }
            }
        }
    }
    for n in &raw.noises {
        if !owner.contains_key(n.spec.name.as_str()) {
            err(
                ModelError::NoiseCardinalityViolation {
                    name: n.spec.name.clone(),
                    reason: "noise is not used by any variable".into(),
                },
                n.span,
            );
        }
    }

    // references and parent sets
    let mut parents: Vec<Vec<usize>> = Vec::with_capacity(raw.variables.len());
    for v in &raw.variables {
        let mut ps = Vec::new();
        for r in v.expr.references() {
            if let Some(&p) = var_decl.get(r) {
                ps.push(p);
            } else if noise_decl.contains_key(r) {
                if v.noise.as_deref() != Some(r) {
                    err(
                        ModelError::NoiseCardinalityViolation {
                            name: v.name.clone(),
                            reason: format!("equation references foreign noise `{r}`"),
                        },
                        v.span,
                    );
                }
            } else {
                err(
                    ModelError::UnknownReference {
                        name: r.into(),
                        location: format!("equation of `{}`", v.name),
                    },
                    v.span,
                );
            }
        }
        ps.sort_unstable();
        ps.dedup();
        parents.push(ps);
    }

    // inverses
    let mut inverse_of: HashMap<usize, usize> = HashMap::new();
    for (k, inv) in raw.inverses.iter().enumerate() {
        let Some(&i) = owner.get(inv.noise.as_str()) else {
            if noise_decl.contains_key(inv.noise.as_str()) {
                // unowned noise was already reported
                continue;
            }
            err(
                ModelError::UnknownReference {
                    name: inv.noise.clone(),
                    location: "inverse declaration".into(),
                },
                inv.span,
            );
            continue;
        };
        if inverse_of.insert(i, k).is_some() {
            err(
                ModelError::InverseMismatch {
                    noise: inv.noise.clone(),
                    reason: "inverse declared twice".into(),
                },
                inv.span,
            );
        }
        let var = &raw.variables[i];
        for r in inv.expr.references() {
            let allowed = r == var.name || parents[i].iter().any(|&p| raw.variables[p].name == r);
            if allowed {
                continue;
            }
            if var_decl.contains_key(r) || noise_decl.contains_key(r) {
                err(
                    ModelError::InverseMismatch {
                        noise: inv.noise.clone(),
                        reason: format!("may reference only `{}` and its parents, found `{r}`", var.name),
                    },
                    inv.span,
                );
            } else {
                err(
                    ModelError::UnknownReference {
                        name: r.into(),
                        location: format!("inverse of `{}`", inv.noise),
                    },
                    inv.span,
                );
            }
        }
    }

    // acyclicity
    let order = topological_order(&parents);
    if order.len() < parents.len() {
        for path in cycles(&parents, &order) {
            let span = raw.variables[path[0]].span;
            let path = path.iter().map(|&i| raw.variables[i].name.clone()).collect();
            err(ModelError::CycleDetected { path }, span);
        }
    }

    if !diags.is_empty() {
        return Err(diags);
    }

    // compile
    let mut variables = Vec::with_capacity(raw.variables.len());
    for (i, v) in raw.variables.iter().enumerate() {
        let noise_name = v.noise.as_deref().expect("linkage checked");
        let spec = raw.noises[noise_decl[noise_name]].spec.clone();
        let resolve = |r: &str| {
            if r == noise_name {
                Some(Program::Noise)
            } else {
                var_decl.get(r).map(|&p| Program::Var(p))
            }
        };
        let program = Program::compile(&v.expr, &resolve).expect("references checked");
        let resolve_inv = |r: &str| var_decl.get(r).map(|&p| Program::Var(p));
        let inverse = match inverse_of.get(&i) {
            Some(&k) => {
                let expr = raw.inverses[k].expr.clone();
                let program = Program::compile(&expr, &resolve_inv).expect("references checked");
                Some(Inverse {
                    expr,
                    declared: true,
                    program,
                })
            }
            None => additive_inverse(&v.expr, &v.name, noise_name).map(|expr| {
                let program = Program::compile(&expr, &resolve_inv).expect("synthesized from checked refs");
                Inverse {
                    expr,
                    declared: false,
                    program,
                }
            }),
        };
        variables.push(Variable {
            name: v.name.clone(),
            expr: v.expr.clone(),
            noise: spec,
            inverse,
            parents: parents[i].clone(),
            program,
        });
    }
    let scm = Scm {
        by_name: variables.iter().enumerate().map(|(i, v)| (v.name.clone(), i)).collect(),
        by_noise: variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.noise.name.clone(), i))
            .collect(),
        variables,
        order,
    };

    let mut diags = Vec::new();
    for (i, v) in scm.variables.iter().enumerate() {
        if v.inverse.as_ref().is_some_and(|inv| inv.declared) {
            if let Err(reason) = check_inverse(&scm, i) {
                let span = inverse_of.get(&i).and_then(|&k| raw.inverses[k].span);
                diags.push(Diagnostic::new(
                    ModelError::InverseMismatch {
                        noise: v.noise.name.clone(),
                        reason,
                    },
                    span,
                ));
            }
        }
    }
    if diags.is_empty() {
        Ok(scm)
    } else {
        Err(diags)
    }
}

/// Kahn's algorithm, always releasing the earliest-declared ready variable.
fn topological_order(parents: &[Vec<usize>]) -> Vec<usize> {
    let n = parents.len();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut pending: Vec<usize> = vec![0; n];
    for (i, ps) in parents.iter().enumerate() {
        pending[i] = ps.len();
        for &p in ps {
            children[p].push(i);
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> = (0..n).filter(|&i| pending[i] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(i)) = ready.pop() {
        order.push(i);
        for &c in &children[i] {
            pending[c] -= 1;
            if pending[c] == 0 {
                ready.push(Reverse(c));
            }
        }
    }
    order
}

/// One cycle per strongly connected component among the variables Kahn's
/// algorithm could not order. Each path follows parent links and ends where
/// it started.
fn cycles(parents: &[Vec<usize>], ordered: &[usize]) -> Vec<Vec<usize>> {
    let n = parents.len();
    let mut stuck = vec![true; n];
    for &i in ordered {
        stuck[i] = false;
    }
    let mut reported = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if !stuck[start] || reported[start] {
            continue;
        }
        // BFS along parent edges looking for a path back to `start`
        let mut prev: Vec<Option<usize>> = vec![None; n];
        let mut queue = std::collections::VecDeque::from([start]);
        let mut seen = vec![false; n];
        let mut closing = None;
        'bfs: while let Some(i) = queue.pop_front() {
            for &p in &parents[i] {
                if !stuck[p] {
                    continue;
                }
                if p == start {
                    closing = Some(i);
                    break 'bfs;
                }
                if !seen[p] {
                    seen[p] = true;
                    prev[p] = Some(i);
                    queue.push_back(p);
                }
            }
        }
        // `start` may merely depend on a cycle without lying on one
        let Some(last) = closing else { continue };
        let mut path = vec![last];
        let mut cur = last;
        while let Some(p) = prev[cur] {
            path.push(p);
            cur = p;
        }
        if cur != start {
            path.push(start);
        }
        path.reverse();
        path.push(start);
        for &i in &path {
            reported[i] = true;
        }
        out.push(path);
    }
    out
}

/// Probe a declared inverse: `inverse(forward(pa, u), pa) == u`.
fn check_inverse(scm: &Scm, i: usize) -> Result<(), String> {
    let mut rng = stream_rng(INVERSE_PROBE_SEED, i as u64);
    let mut noise = vec![0.0; scm.len()];
    let mut vals = vec![0.0; scm.len()];
    let mut checked = 0;
    for _ in 0..INVERSE_PROBES * 10 {
        if checked == INVERSE_PROBES {
            break;
        }
        for (u, v) in noise.iter_mut().zip(scm.variables()) {
            *u = v.noise.distribution.sample(&mut rng);
        }
        if scm.evaluate_into(&noise, &mut vals).is_err() {
            continue;
        }
        checked += 1;
        let back = match scm.invert(i, &vals) {
            Some(Ok(u)) => u,
            Some(Err(e)) => return Err(format!("inverse failed at probe: {e}")),
            None => return Ok(()),
        };
        let u = noise[i];
        if (back - u).abs() > INVERSE_TOLERANCE * u.abs().max(1.0) {
            return Err(format!("round trip gave {back} for noise value {u}"));
        }
    }
    Ok(())
}

impl Distribution {
    /// Convenience for tests and programmatic models.
    pub fn categorical(pairs: &[(f64, f64)]) -> Self {
        Distribution::Categorical {
            values: pairs.iter().map(|p| p.0).collect(),
            probs: pairs.iter().map(|p| p.1).collect(),
        }
    }
}
