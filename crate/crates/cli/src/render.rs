//! JSON and text rendering of results.

use serde_json::{json, Map, Value};

use scm_ici::abduction::{AbductionResult, Posterior};
use scm_ici::expr::format_number;
use scm_ici::stats::{Summary, QUANTILE_LEVELS};
use scm_ici::{Assignment, Diagnostic, DistributionResult, IceResult, Scm};

pub fn assignment(a: &Assignment) -> Value {
    Value::Object(a.iter().map(|(k, v)| (k.to_string(), json!(v))).collect())
}

/// Pairs in the given order (unlike `Assignment`, which sorts by name).
pub fn named(names: &[String], values: &[f64]) -> Value {
    Value::Object(names.iter().zip(values).map(|(k, v)| (k.clone(), json!(v))).collect())
}

pub fn summary(s: &Summary) -> Value {
    let quantiles: Map<String, Value> = QUANTILE_LEVELS
        .iter()
        .zip(&s.quantiles)
        .map(|(q, v)| (format!("q{:02}", (q * 100.0).round() as u32), json!(v)))
        .collect();
    json!({
        "mean": s.mean,
        "std_dev": s.std_dev,
        "variance": s.variance,
        "min": s.min,
        "max": s.max,
        "quantiles": quantiles,
    })
}

pub fn result(r: &DistributionResult, include_samples: bool) -> Value {
    match r {
        DistributionResult::Point { targets, values } => json!({
            "kind": "point",
            "value": named(targets, values),
        }),
        DistributionResult::Pmf(p) => {
            let support: Vec<Value> = p
                .support
                .iter()
                .zip(&p.probs)
                .map(|(s, q)| json!({ "value": named(&p.targets, s), "p": q }))
                .collect();
            json!({ "kind": "pmf", "targets": p.targets, "support": support })
        }
        DistributionResult::Empirical(e) => {
            let summaries: Map<String, Value> = e
                .targets
                .iter()
                .zip(&e.summary)
                .map(|(t, s)| (t.clone(), summary(s)))
                .collect();
            let mut out = json!({
                "kind": "empirical",
                "targets": e.targets,
                "n": e.samples.len(),
                "summary": summaries,
            });
            if include_samples {
                out["samples"] = json!(e.samples);
                out["weights"] = json!(e.weights);
            }
            out
        }
    }
}

pub fn posterior_diagnostics(scm: &Scm, p: &Posterior) -> Value {
    let noise: Map<String, Value> = scm
        .variables()
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let s = p.coordinate_summary(j);
            (v.noise.name.clone(), json!({ "mean": s.mean, "std_dev": s.std_dev }))
        })
        .collect();
    json!({
        "n_samples": p.samples.len(),
        "acceptance_rate": p.diagnostics.acceptance_rate,
        "n_proposed": p.diagnostics.n_proposed,
        "ess": p.diagnostics.ess,
        "tolerances": assignment(&p.diagnostics.tolerances),
        "noise": noise,
    })
}

pub fn abduction(scm: &Scm, a: &AbductionResult) -> Value {
    match a {
        AbductionResult::Deterministic(u) => {
            let names: Vec<String> = scm.variables().iter().map(|v| v.noise.name.clone()).collect();
            json!({ "kind": "deterministic", "noise": named(&names, &u.0) })
        }
        AbductionResult::Posterior(p) => {
            let mut d = Map::new();
            d.insert("kind".into(), json!("posterior"));
            if let Value::Object(rest) = posterior_diagnostics(scm, p) {
                d.extend(rest);
            }
            Value::Object(d)
        }
    }
}

pub fn ice(r: &IceResult, include_samples: bool) -> Value {
    let mut out = match &r.summary {
        None => json!({ "kind": "point", "value": named(&r.targets, &r.mean) }),
        Some(summaries) => {
            let s: Map<String, Value> = r
                .targets
                .iter()
                .zip(summaries)
                .map(|(t, s)| (t.clone(), summary(s)))
                .collect();
            json!({
                "kind": "empirical",
                "targets": r.targets,
                "n": r.differences.len(),
                "mean": named(&r.targets, &r.mean),
                "summary": s,
            })
        }
    };
    if include_samples && r.summary.is_some() {
        out["samples"] = json!(r.differences);
        out["weights"] = json!(r.weights);
    }
    out["arms"] = json!({ "do1": result(&r.arm1, false), "do2": result(&r.arm2, false) });
    out
}

pub fn diagnostic(d: &Diagnostic) -> Value {
    let mut v = json!({ "code": d.error.code(), "message": d.error.to_string() });
    if let Some(span) = d.span {
        v["line"] = json!(span.line);
        v["column"] = json!(span.column);
        v["length"] = json!(span.length);
    }
    v
}

fn fmt_values(names: &[String], values: &[f64]) -> String {
    names
        .iter()
        .zip(values)
        .map(|(n, v)| format!("{n}={}", format_number(*v)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn text_summary(name: &str, s: &Summary) -> String {
    let q: Vec<String> = s.quantiles.iter().map(|v| format!("{v:.6}")).collect();
    format!(
        "{name}: mean={:.6} sd={:.6} min={:.6} max={:.6} quantiles(5,25,50,75,95)=[{}]",
        s.mean,
        s.std_dev,
        s.min,
        s.max,
        q.join(", ")
    )
}

pub fn result_text(r: &DistributionResult) -> String {
    match r {
        DistributionResult::Point { targets, values } => fmt_values(targets, values),
        DistributionResult::Pmf(p) => p
            .support
            .iter()
            .zip(&p.probs)
            .map(|(s, q)| format!("{}  p={q}", fmt_values(&p.targets, s)))
            .collect::<Vec<_>>()
            .join("\n"),
        DistributionResult::Empirical(e) => {
            let mut lines = vec![format!("{} samples", e.samples.len())];
            lines.extend(e.targets.iter().zip(&e.summary).map(|(t, s)| text_summary(t, s)));
            lines.join("\n")
        }
    }
}

pub fn ice_text(r: &IceResult) -> String {
    match &r.summary {
        None => format!("effect: {}", fmt_values(&r.targets, &r.mean)),
        Some(summaries) => {
            let mut lines = vec![format!("effect over {} draws", r.differences.len())];
            lines.extend(r.targets.iter().zip(summaries).map(|(t, s)| text_summary(t, s)));
            lines.join("\n")
        }
    }
}
