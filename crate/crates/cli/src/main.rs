//! `scm-ici`: command-line front end.
//!
//! Exit codes: 0 on success, 1 for model or query errors (reported as JSON
//! with a machine-readable `error.code` under `--format json`), 2 for usage
//! errors.

mod args;
mod render;

use std::io::{self, Read, Write};
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use serde_json::{json, Map, Value};

use scm_ici::abduction::{AbductionError, McmcOptions, RejectionOptions};
use scm_ici::factor::EliminationOrder;
use scm_ici::inference::{forward_sample, sample_noise_with, MonteCarlo, DEFAULT_SUPPORT_CAP};
use scm_ici::{
    association_query, ice, indiv, intervention_query, parse_model_bytes, surgery, validate, AbductionMethod,
    Assignment, Diagnostic, Engine, IceRequest, IciError, IndividualQuery, NoiseDraw, Scm, Workers, DSL_VERSION,
};

use args::{
    AbductionArgs, Cli, Command, EngineArgs, EngineKind, Format, IceArgs, IndivArgs, MethodKind, Pairs, QueryCommand,
};

/// A failed run.
enum Failure {
    Usage(String),
    Domain {
        code: String,
        message: String,
        details: Map<String, Value>,
    },
    Invalid(Vec<Diagnostic>),
}

impl Failure {
    fn domain(code: &str, message: impl ToString) -> Self {
        Failure::Domain {
            code: code.to_string(),
            message: message.to_string(),
            details: Map::new(),
        }
    }
}

impl From<IciError> for Failure {
    fn from(e: IciError) -> Self {
        match e {
            IciError::Abduction(a) => a.into(),
            other => Failure::domain(other.code(), &other),
        }
    }
}

impl From<AbductionError> for Failure {
    fn from(e: AbductionError) -> Self {
        let mut details = Map::new();
        if let AbductionError::BudgetExhausted {
            accepted, n_proposed, ..
        } = &e
        {
            details.insert("accepted".into(), json!(accepted));
            details.insert("n_proposed".into(), json!(n_proposed));
        }
        Failure::Domain {
            code: e.code().to_string(),
            message: e.to_string(),
            details,
        }
    }
}

impl From<scm_ici::InferenceError> for Failure {
    fn from(e: scm_ici::InferenceError) -> Self {
        Failure::domain(e.code(), &e)
    }
}

/// Successful output of a query-like command.
struct Report {
    query: Value,
    result: Value,
    diagnostics: Value,
    text: String,
}

struct Context {
    format: Format,
    workers: Workers,
    verbose: u8,
}

impl Context {
    fn log(&self, msg: impl AsRef<str>) {
        if self.verbose > 0 {
            eprintln!("scm-ici: {}", msg.as_ref());
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let ctx = Context {
        format: cli.format,
        workers: Workers::new(cli.workers),
        verbose: cli.verbose,
    };
    let mut out = io::stdout().lock();
    let code = match dispatch(&cli.command, &ctx, &mut out) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(f) => {
            report_failure(&ctx, f, &mut out);
            1
        }
    };
    let _ = out.flush();
    ExitCode::from(code)
}

fn report_failure(ctx: &Context, f: Failure, out: &mut impl Write) {
    let (code, message, details, diags) = match f {
        Failure::Domain { code, message, details } => (code, message, details, Vec::new()),
        Failure::Invalid(diags) => {
            let first = diags
                .first()
                .map(|d| d.error.code())
                .unwrap_or("invalid_model")
                .to_string();
            let message = diags.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ");
            (first, message, Map::new(), diags)
        }
        Failure::Usage(_) => unreachable!("usage errors are reported before"),
    };
    match ctx.format {
        Format::Json => {
            let mut error = json!({ "code": code, "message": message });
            for (k, v) in details {
                error[k] = v;
            }
            if !diags.is_empty() {
                error["diagnostics"] = Value::Array(diags.iter().map(render::diagnostic).collect());
            }
            let doc = json!({ "error": error, "version": DSL_VERSION });
            let _ = writeln!(out, "{doc}");
        }
        Format::Text => {
            if diags.is_empty() {
                eprintln!("error[{code}]: {message}");
            } else {
                for d in &diags {
                    eprintln!("error[{}]: {d}", d.error.code());
                }
            }
        }
    }
}

fn dispatch(cmd: &Command, ctx: &Context, out: &mut impl Write) -> Result<(), Failure> {
    match cmd {
        Command::Validate(m) => run_validate(&m.model, ctx, out),
        Command::Sample { model, n, seed } => run_sample(&model.model, *n, *seed, ctx, out),
        Command::Query(q) => {
            let report = match q {
                QueryCommand::Assoc(a) => run_assoc(a, ctx)?,
                QueryCommand::Do(a) => run_do(a, ctx)?,
                QueryCommand::Indiv(a) => run_indiv(a, ctx)?,
            };
            emit(report, ctx, out)
        }
        Command::Ice(a) => {
            let report = run_ice(a, ctx)?;
            emit(report, ctx, out)
        }
    }
}

fn emit(r: Report, ctx: &Context, out: &mut impl Write) -> Result<(), Failure> {
    let written = match ctx.format {
        Format::Json => {
            let doc = json!({
                "query": r.query,
                "result": r.result,
                "diagnostics": r.diagnostics,
                "version": DSL_VERSION,
            });
            writeln!(out, "{doc}")
        }
        Format::Text => writeln!(out, "{}", r.text),
    };
    written.map_err(|e| Failure::domain("io_error", e))
}

fn read_model(path: &Path) -> Result<Scm, Failure> {
    let bytes = if path.as_os_str() == "-" {
        let mut buf = Vec::new();
        io::stdin().read_to_end(&mut buf).map(|_| buf)
    } else {
        std::fs::read(path)
    }
    .map_err(|e| Failure::domain("io_error", format!("{}: {e}", path.display())))?;
    let doc = parse_model_bytes(&bytes).map_err(Failure::Invalid)?;
    validate(&doc.lower()).map_err(Failure::Invalid)
}

fn run_validate(path: &Path, ctx: &Context, out: &mut impl Write) -> Result<(), Failure> {
    let scm = read_model(path)?;
    let written = match ctx.format {
        Format::Json => {
            let variables: Vec<Value> = scm
                .variables()
                .iter()
                .map(|v| {
                    let parents: Vec<&str> = v
                        .parent_indices()
                        .iter()
                        .map(|&p| scm.variables()[p].name.as_str())
                        .collect();
                    json!({
                        "name": v.name,
                        "equation": v.expr.to_string(),
                        "noise": v.noise.name,
                        "distribution": v.noise.distribution.family(),
                        "parents": parents,
                        "invertible": v.inverse.is_some(),
                    })
                })
                .collect();
            let doc = json!({
                "valid": true,
                "order": scm.topological_order(),
                "variables": variables,
                "version": DSL_VERSION,
            });
            writeln!(out, "{doc}")
        }
        Format::Text => writeln!(
            out,
            "ok: {} variables, order {}",
            scm.len(),
            scm.topological_order().join(" -> ")
        ),
    };
    written.map_err(|e| Failure::domain("io_error", e))
}

fn run_sample(path: &Path, n: usize, seed: u64, ctx: &Context, out: &mut impl Write) -> Result<(), Failure> {
    let scm = read_model(path)?;
    let draws = sample_noise_with(&scm, seed, n, ctx.workers);
    let mut lines = Vec::with_capacity(draws.len());
    for u in &draws {
        let a = forward_sample(&scm, u).map_err(|e| Failure::domain("evaluation_error", e))?;
        let values: Vec<f64> = scm.names().map(|name| a.get(name).expect("every variable")).collect();
        let names: Vec<String> = scm.names().map(String::from).collect();
        lines.push(match ctx.format {
            Format::Json => render::named(&names, &values).to_string(),
            Format::Text => names
                .iter()
                .zip(&values)
                .map(|(k, v)| format!("{k}={}", scm_ici::expr::format_number(*v)))
                .collect::<Vec<_>>()
                .join(" "),
        });
    }
    for line in lines {
        writeln!(out, "{line}").map_err(|e| Failure::domain("io_error", e))?;
    }
    Ok(())
}

/// Merge repeated `NAME=VALUE` lists; a name may appear once.
fn merge(lists: &[Pairs], flag: &str) -> Result<Assignment, Failure> {
    let mut a = Assignment::new();
    for (name, v) in lists.iter().flatten() {
        if a.insert(name.clone(), *v).is_some() {
            return Err(Failure::Usage(format!("`{name}` given twice in --{flag}")));
        }
    }
    Ok(a)
}

fn check_targets(targets: &[String]) -> Result<(), Failure> {
    for (i, t) in targets.iter().enumerate() {
        if t.trim().is_empty() {
            return Err(Failure::Usage("empty target name".into()));
        }
        if targets[..i].contains(t) {
            return Err(Failure::Usage(format!("target `{t}` given twice")));
        }
    }
    Ok(())
}

fn engine_for(
    scm: &Scm,
    targets: &[String],
    evidence: &Assignment,
    args: &EngineArgs,
    window: f64,
    ctx: &Context,
) -> Engine {
    let mc = Engine::MonteCarlo(MonteCarlo {
        n: args.n,
        seed: args.seed,
        window,
        workers: ctx.workers,
    });
    match args.engine {
        EngineKind::Exact => Engine::Exact {
            cap: DEFAULT_SUPPORT_CAP,
            order: EliminationOrder::MinDegree,
        },
        EngineKind::Mc => mc,
        EngineKind::Auto => match Engine::auto(scm, targets, evidence, args.seed) {
            e @ Engine::Exact { .. } => e,
            Engine::MonteCarlo(_) => mc,
        },
    }
}

fn engine_echo(engine: &Engine, q: &mut Value) {
    q["engine"] = json!(engine.name());
    if let Engine::MonteCarlo(mc) = engine {
        q["n"] = json!(mc.n);
        q["seed"] = json!(mc.seed);
        q["evidence_window"] = json!(mc.window);
    }
}

fn result_diagnostics(r: &scm_ici::DistributionResult) -> Value {
    match r {
        scm_ici::DistributionResult::Empirical(e) => json!({ "n_retained": e.samples.len() }),
        scm_ici::DistributionResult::Pmf(p) => json!({ "support_size": p.support.len() }),
        scm_ici::DistributionResult::Point { .. } => json!({}),
    }
}

fn run_assoc(a: &args::AssocArgs, ctx: &Context) -> Result<Report, Failure> {
    let scm = read_model(&a.model.model)?;
    let targets = &a.targets.targets;
    check_targets(targets)?;
    let evidence = merge(&a.evidence.evidence, "evidence")?;
    let engine = engine_for(&scm, targets, &evidence, &a.engine, a.evidence.evidence_window, ctx);
    ctx.log(format!("association query with the {} engine", engine.name()));
    let r = association_query(&scm, targets, &evidence, &engine)?;
    let mut query = json!({
        "command": "query assoc",
        "model": a.model.model.display().to_string(),
        "targets": targets,
        "evidence": render::assignment(&evidence),
    });
    engine_echo(&engine, &mut query);
    Ok(Report {
        query,
        diagnostics: result_diagnostics(&r),
        result: render::result(&r, a.engine.samples),
        text: render::result_text(&r),
    })
}

fn run_do(a: &args::DoArgs, ctx: &Context) -> Result<Report, Failure> {
    let scm = read_model(&a.model.model)?;
    let targets = &a.targets.targets;
    check_targets(targets)?;
    let evidence = merge(&a.evidence.evidence, "evidence")?;
    let intervention = merge(&a.intervention, "do")?;
    let mutilated = surgery(&scm, &intervention)?;
    let engine = engine_for(
        &mutilated,
        targets,
        &evidence,
        &a.engine,
        a.evidence.evidence_window,
        ctx,
    );
    ctx.log(format!("intervention query with the {} engine", engine.name()));
    let r = intervention_query(&scm, targets, &intervention, &evidence, &engine)?;
    let mut query = json!({
        "command": "query do",
        "model": a.model.model.display().to_string(),
        "targets": targets,
        "do": render::assignment(&intervention),
        "evidence": render::assignment(&evidence),
    });
    engine_echo(&engine, &mut query);
    Ok(Report {
        query,
        diagnostics: result_diagnostics(&r),
        result: render::result(&r, a.engine.samples),
        text: render::result_text(&r),
    })
}

/// Resolve a partial per-noise list against the model, filling gaps.
fn per_noise(scm: &Scm, pairs: &Assignment, fill: impl Fn(usize) -> f64) -> Result<Vec<f64>, Failure> {
    for name in pairs.keys() {
        if scm.noise_index(name).is_none() {
            return Err(Failure::domain("unknown_variable", format!("unknown noise `{name}`")));
        }
    }
    Ok(scm
        .variables()
        .iter()
        .enumerate()
        .map(|(j, v)| pairs.get(&v.noise.name).unwrap_or_else(|| fill(j)))
        .collect())
}

fn method(scm: &Scm, a: &AbductionArgs, ctx: &Context) -> Result<(AbductionMethod, Value), Failure> {
    let mut echo = json!({ "method": format!("{:?}", a.method).to_lowercase() });
    let m = match a.method {
        MethodKind::Exact => AbductionMethod::Exact,
        MethodKind::Update => {
            let means = scm_ici::ici::prior_means(scm);
            let baseline = per_noise(scm, &merge(&a.baseline, "baseline")?, |j| means.0[j])?;
            let weights = per_noise(scm, &merge(&a.weights, "weights")?, |_| 1.0)?;
            echo["baseline"] = render::assignment(&NoiseDraw(baseline.clone()).to_assignment(scm));
            echo["weights"] = render::assignment(&NoiseDraw(weights.clone()).to_assignment(scm));
            AbductionMethod::Update {
                baseline: Some(NoiseDraw(baseline)),
                weights: Some(weights),
            }
        }
        MethodKind::Rejection => {
            let mut o = RejectionOptions::new(a.n, a.seed);
            o.epsilon = a.epsilon;
            o.max_proposals = a.max_proposals;
            o.workers = ctx.workers;
            echo["n"] = json!(a.n);
            echo["seed"] = json!(a.seed);
            echo["epsilon"] = json!(a.epsilon);
            echo["max_proposals"] = json!(a.max_proposals);
            AbductionMethod::Rejection(o)
        }
        MethodKind::Mcmc => {
            let mut o = McmcOptions::new(a.n, a.seed);
            o.burnin = a.burnin;
            o.bandwidth = a.bandwidth;
            o.proposal_scale = a.proposal_scale;
            o.thin = a.thin;
            o.chains = a.chains;
            o.workers = ctx.workers;
            echo["n"] = json!(a.n);
            echo["seed"] = json!(a.seed);
            echo["burnin"] = json!(a.burnin.unwrap_or(a.n / 10));
            echo["bandwidth"] = json!(a.bandwidth);
            echo["proposal_scale"] = json!(a.proposal_scale);
            echo["thin"] = json!(a.thin);
            echo["chains"] = json!(a.chains);
            AbductionMethod::Mcmc(o)
        }
    };
    Ok((m, echo))
}

fn run_indiv(a: &IndivArgs, ctx: &Context) -> Result<Report, Failure> {
    let scm = read_model(&a.model.model)?;
    let targets = &a.targets.targets;
    check_targets(targets)?;
    let facts = merge(&a.abduction.facts, "facts")?;
    let intervention = merge(&a.intervention, "do")?;
    let evidence = merge(&a.evidence.evidence, "evidence")?;
    let (method, echo) = method(&scm, &a.abduction, ctx)?;
    ctx.log(format!("abduction by {}", method.name()));

    let mut q = IndividualQuery::new(facts.clone(), intervention.clone(), targets.clone(), method.clone());
    q.evidence = evidence.clone();
    q.window = a.evidence.evidence_window;
    q.workers = ctx.workers;
    let abduced = indiv(&scm, &facts, &method)?;
    let r = scm_ici::ici::ici_from_abduction(&scm, &abduced, &q)?;

    let mut query = json!({
        "command": "query indiv",
        "model": a.model.model.display().to_string(),
        "targets": targets,
        "facts": render::assignment(&facts),
        "do": render::assignment(&intervention),
        "evidence": render::assignment(&evidence),
    });
    merge_into(&mut query, echo);
    if !evidence.is_empty() {
        query["evidence_window"] = json!(a.evidence.evidence_window);
    }
    let mut diagnostics = json!({ "abduction": render::abduction(&scm, &abduced) });
    merge_into(&mut diagnostics, result_diagnostics(&r));
    Ok(Report {
        query,
        diagnostics,
        result: render::result(&r, a.abduction.samples),
        text: render::result_text(&r),
    })
}

fn run_ice(a: &IceArgs, ctx: &Context) -> Result<Report, Failure> {
    let scm = read_model(&a.model.model)?;
    let targets = &a.targets.targets;
    check_targets(targets)?;
    let facts = merge(&a.abduction.facts, "facts")?;
    let do1 = merge(&a.do1, "do1")?;
    let do2 = merge(&a.do2, "do2")?;
    let (method, echo) = method(&scm, &a.abduction, ctx)?;
    ctx.log(format!("abduction by {}", method.name()));
    let req = IceRequest {
        facts: facts.clone(),
        targets: targets.clone(),
        do1: do1.clone(),
        do2: do2.clone(),
        method,
        workers: ctx.workers,
    };
    let r = ice(&scm, &req)?;
    let mut query = json!({
        "command": "ice",
        "model": a.model.model.display().to_string(),
        "targets": targets,
        "facts": render::assignment(&facts),
        "do1": render::assignment(&do1),
        "do2": render::assignment(&do2),
    });
    merge_into(&mut query, echo);
    let diagnostics = json!({ "abduction": render::abduction(&scm, &r.abduction) });
    Ok(Report {
        query,
        diagnostics,
        result: render::ice(&r, a.abduction.samples),
        text: render::ice_text(&r),
    })
}

fn merge_into(target: &mut Value, extra: Value) {
    if let (Value::Object(t), Value::Object(e)) = (target, extra) {
        t.extend(e);
    }
}
