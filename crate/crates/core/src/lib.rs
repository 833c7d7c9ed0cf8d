//! Structural causal model engine.
//!
//! Evaluates three kinds of query over a declared SCM:
//!
//! * association, `P(Y | Z)`: [`inference::association_query`]
//! * intervention, `P(Y | do(X), Z)`: [`intervention::intervention_query`]
//! * individual, `P(Y | indiv(W), do(X), Z)`: [`ici::ici_query`], where
//!   `indiv(W)` abduces the exogenous noise from an individual's facts `W`
//!   before the intervention is applied.

pub mod abduction;
pub mod dsl;
pub mod expr;
pub mod factor;
pub mod ici;
pub mod inference;
pub mod intervention;
pub mod model;
pub mod noise;
pub mod rng;
pub mod stats;

pub use abduction::{AbductionError, AbductionResult, Facts, Posterior};
pub use dsl::{format_model, parse_model, parse_model_bytes, parse_scm, ModelDocument, SourceSpan, DSL_VERSION};
pub use factor::{EliminationOrder, Factor};
pub use ici::{ice, ici_query, indiv, AbductionMethod, IceRequest, IceResult, IciError, IndividualQuery};
pub use inference::{association_query, DistributionResult, Engine, InferenceError};
pub use intervention::{intervention_query, surgery, truncated_joint, Intervention};
pub use model::{validate, Assignment, Diagnostic, EvalError, ModelError, NoiseDraw, RawModel, Scm};
pub use noise::{Distribution, NoiseSpec};
pub use rng::Workers;
