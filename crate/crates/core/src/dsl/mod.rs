//! Text format for structural causal models (`dsl-v1`).
//!
//! ```text
//! # comment
//! noise U_Z ~ Point(2)
//! noise U_X ~ Normal(0, 1)
//! var Z = U_Z
//! var X = if Z > 1 then Z + U_X else U_X
//! inverse U_X = if Z > 1 then X - Z else X
//! ```
//!
//! One statement per line; LF and CRLF are both accepted. Distributions are
//! `Point(v)`, `Normal(mean, stddev)`, `Uniform(lo, hi)` and
//! `Categorical(v1, .., vk, p1, .., pk)`. Operator precedence from loosest to
//! tightest: `if/then/else`, comparisons (`= != < <= > >=`), `+ -`, `* /`,
//! unary minus.
//!
//! A variable owns the noise its equation references. A variable whose
//! equation references no noise owns `U_<name>` when that noise is declared.

mod lexer;
mod parser;

use std::fmt;

use crate::expr::Expr;
use crate::model::{validate, Diagnostic, ModelError, RawInverse, RawModel, RawNoise, RawVariable, Scm};
use crate::noise::{Distribution, NoiseSpec};

/// Version tag of the model language.
pub const DSL_VERSION: &str = "dsl-v1";

/// 1-based position of a source fragment. Columns count characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StatementKind {
    Noise { name: String, dist: Distribution },
    Var { name: String, expr: Expr },
    Inverse { noise: String, expr: Expr },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statement {
    pub kind: StatementKind,
    pub span: SourceSpan,
}

/// Parsed statements in source order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModelDocument {
    pub statements: Vec<Statement>,
}

impl ModelDocument {
    /// Statements without positions, for structural comparison.
    pub fn kinds(&self) -> Vec<&StatementKind> {
        self.statements.iter().map(|s| &s.kind).collect()
    }

    /// Attach placeholder spans to bare statements.
    pub fn from_kinds(kinds: impl IntoIterator<Item = StatementKind>) -> Self {
        let statements = kinds
            .into_iter()
            .enumerate()
            .map(|(i, kind)| Statement {
                kind,
                span: SourceSpan {
                    line: i + 1,
                    column: 1,
                    length: 0,
                },
            })
            .collect();
        ModelDocument { statements }
    }

    /// Resolve variable-to-noise ownership and produce an unvalidated model.
    pub fn lower(&self) -> RawModel {
        let mut raw = RawModel::default();
        for s in &self.statements {
            if let StatementKind::Noise { name, dist } = &s.kind {
                raw.noises.push(RawNoise {
                    spec: NoiseSpec::new(name.clone(), dist.clone()),
                    span: Some(s.span),
                });
            }
        }
        let is_noise = |n: &str| raw.noises.iter().any(|x| x.spec.name == n);
        let mut variables = Vec::new();
        let mut inverses = Vec::new();
        for s in &self.statements {
            match &s.kind {
                StatementKind::Noise { .. } => {}
                StatementKind::Var { name, expr } => {
                    let refs: Vec<&str> = expr.references().into_iter().filter(|r| is_noise(r)).collect();
                    let conventional = format!("U_{name}");
                    let noise = match refs.as_slice() {
                        [] => is_noise(&conventional).then_some(conventional),
                        [one] => Some(one.to_string()),
                        many => Some(
                            many.iter()
                                .find(|r| **r == conventional)
                                .unwrap_or(&many[0])
                                .to_string(),
                        ),
                    };
                    variables.push(RawVariable {
                        name: name.clone(),
                        expr: expr.clone(),
                        noise,
                        span: Some(s.span),
                    });
                }
                StatementKind::Inverse { noise, expr } => {
                    inverses.push(RawInverse {
                        noise: noise.clone(),
                        expr: expr.clone(),
                        span: Some(s.span),
                    });
                }
            }
        }
        raw.variables = variables;
        raw.inverses = inverses;
        raw
    }
}

impl Scm {
    /// Render as a document; noise declarations precede their variable.
    pub fn to_document(&self) -> ModelDocument {
        let mut kinds = Vec::new();
        for v in self.variables() {
            kinds.push(StatementKind::Noise {
                name: v.noise.name.clone(),
                dist: v.noise.distribution.clone(),
            });
            kinds.push(StatementKind::Var {
                name: v.name.clone(),
                expr: v.expr.clone(),
            });
            if let Some(inv) = v.inverse.as_ref().filter(|i| i.declared) {
                kinds.push(StatementKind::Inverse {
                    noise: v.noise.name.clone(),
                    expr: inv.expr.clone(),
                });
            }
        }
        ModelDocument::from_kinds(kinds)
    }
}

/// Parse model text, recovering at line boundaries so every syntax error is
/// reported.
pub fn parse_model(text: &str) -> Result<ModelDocument, Vec<Diagnostic>> {
    let mut statements = Vec::new();
    let mut diags = Vec::new();
    for (i, line) in text.split('\n').enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        match parser::parse_line(line, i + 1) {
            None => {}
            Some(Ok(s)) => statements.push(s),
            Some(Err(d)) => diags.push(d),
        }
    }
    if diags.is_empty() {
        Ok(ModelDocument { statements })
    } else {
        Err(diags)
    }
}

/// Parse raw bytes; invalid UTF-8 is reported as a diagnostic.
pub fn parse_model_bytes(bytes: &[u8]) -> Result<ModelDocument, Vec<Diagnostic>> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_model(text),
        Err(e) => {
            let valid = &bytes[..e.valid_up_to()];
            let text = String::from_utf8_lossy(valid);
            let line = text.matches('\n').count() + 1;
            let column = text.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
            Err(vec![Diagnostic::new(
                ModelError::SyntaxError {
                    expected: "UTF-8 text".into(),
                    found: "invalid byte sequence".into(),
                },
                Some(SourceSpan {
                    line,
                    column,
                    length: 1,
                }),
            )])
        }
    }
}

/// Parse, lower and validate in one step.
pub fn parse_scm(text: &str) -> Result<Scm, Vec<Diagnostic>> {
    let doc = parse_model(text)?;
    validate(&doc.lower())
}

impl fmt::Display for StatementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatementKind::Noise { name, dist } => {
                let args: Vec<String> = dist.params().iter().map(|v| crate::expr::format_number(*v)).collect();
                write!(f, "noise {name} ~ {}({})", dist.family(), args.join(", "))
            }
            StatementKind::Var { name, expr } => write!(f, "var {name} = {expr}"),
            StatementKind::Inverse { noise, expr } => write!(f, "inverse {noise} = {expr}"),
        }
    }
}

/// Canonical text: one statement per line, comments dropped.
pub fn format_model(doc: &ModelDocument) -> String {
    let mut out = String::new();
    for s in &doc.statements {
        out.push_str(&s.kind.to_string());
        out.push('\n');
    }
    out
}
