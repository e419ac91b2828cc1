//! One function per subcommand. Each returns the verdict and result payload of a report.

use std::io::Read;

use beliefscape::forward::{generate_landscape, sample_environment};
use beliefscape::identify::{
    consistency_check, detect_partitional, identify, identify_reduced, identify_single_column,
    identify_underdetermined, identify_underdetermined_with, infer_state, peer_accuracy_matrix, rationalize_noncommon,
    round_trip, signal_priors_identify, ConsistencyVerdict, Feasibility, PartitionOutcome, PriorFamily, RoundTrip,
    StateInference,
};
use beliefscape::{
    fixtures, validate_environment, validate_landscape, BeliefLandscape, Error, InformationalEnvironment,
    PlausibilityReport, Regularizer, StateBeliefMatrix, Tolerances,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::files::{self, Digests, EnvironmentFile, FileError, Format, InputFile, LandscapeFile};
use crate::report::{distribution, labeled, matrix, pick_labels, Verdict};

/// Why a command stopped early.
#[derive(Debug)]
pub enum Stop {
    /// Parse, shape, or numerical failure: exit 1.
    Structural(String),
    /// Bad argument values that clap cannot catch: exit 64.
    Usage(String),
    /// A flagged verdict with its payload: exit 2.
    Verdict(Outcome),
}

impl From<FileError> for Stop {
    fn from(e: FileError) -> Self {
        Stop::Structural(e.to_string())
    }
}

impl From<Error> for Stop {
    fn from(e: Error) -> Self {
        let label = match e {
            Error::NotRationalizable { .. }
            | Error::NegativeStructure { .. }
            | Error::DivisionByZeroStructure { .. } => "not-rationalizable",
            Error::NotModelGenerated
            | Error::NotInHull { .. }
            | Error::NotConvexDependent { .. }
            | Error::InconsistentLandscape(_) => "inconsistent",
            other => return Stop::Structural(other.to_string()),
        };
        Stop::Verdict(Outcome {
            verdict: Verdict::flagged(label),
            result: json!({ "error": e.to_string() }),
            stdout: None,
        })
    }
}

#[derive(Debug)]
pub struct Outcome {
    pub verdict: Verdict,
    pub result: Value,
    /// Replaces the report on standard output (`generate -o -`).
    pub stdout: Option<String>,
}

impl Outcome {
    fn new(verdict: Verdict, result: Value) -> Self {
        Self {
            verdict,
            result,
            stdout: None,
        }
    }
}

pub type CommandResult = Result<Outcome, Stop>;

pub struct Context<'a> {
    pub tol: Tolerances,
    pub validate: bool,
    pub stdin: &'a mut dyn Read,
    pub digests: Digests,
    pub warnings: Vec<String>,
}

fn implausible(report: &PlausibilityReport) -> Stop {
    Stop::Verdict(Outcome::new(
        Verdict::flagged("implausible"),
        json!({
            "violations": report.violations.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "rank": report.rank,
        }),
    ))
}

fn state_labels(l: &BeliefLandscape) -> &[String] {
    l.beliefs().state_labels()
}

fn signal_labels(l: &BeliefLandscape) -> &[String] {
    l.beliefs().signal_labels()
}

impl Context<'_> {
    fn landscape(&mut self, path: &str) -> Result<BeliefLandscape, Stop> {
        let file = files::load_landscape_file(path, self.stdin, &mut self.digests)?;
        let l = file.to_landscape(path)?;
        if self.validate {
            let report = validate_landscape(l.beliefs(), l.hypothetical(), &self.tol)?;
            if !report.plausible {
                return Err(implausible(&report));
            }
        }
        Ok(l)
    }

    fn environment(&mut self, file: &EnvironmentFile, path: &str) -> Result<InformationalEnvironment, Stop> {
        let env = file.to_environment(path)?;
        if self.validate {
            let report = validate_environment(&env, &self.tol);
            if !report.plausible {
                return Err(implausible(&report));
            }
        }
        Ok(env)
    }
}

fn round_trip_json(r: &RoundTrip) -> Value {
    json!({"beliefs": r.beliefs, "hypothetical": r.hypothetical})
}

fn prior_family_json(family: &PriorFamily, states: &[String]) -> Value {
    match family {
        PriorFamily::Unique(p) => json!({"kind": "unique", "prior": distribution(states, p.entries())}),
        PriorFamily::Classes { priors, decomposition } => {
            let classes: Vec<Value> = priors
                .iter()
                .map(|c| json!({"states": pick_labels(states, &c.states), "prior": distribution(states, c.prior.entries())}))
                .collect();
            let transient: Vec<String> = decomposition
                .classes
                .iter()
                .zip(&decomposition.closed)
                .filter(|(_, &closed)| !closed)
                .flat_map(|(c, _)| pick_labels(states, c))
                .collect();
            json!({
                "kind": "classes",
                "classes": classes,
                "transient_states": transient,
                "representative": distribution(states, family.representative().entries()),
            })
        }
    }
}

fn environment_json(env: &InformationalEnvironment) -> Value {
    serde_json::to_value(EnvironmentFile::from_environment(env)).expect("serializable")
}

fn consistency_json(l: &BeliefLandscape, v: &ConsistencyVerdict, tol: &Tolerances) -> Result<Value, Stop> {
    let (states, signals) = (state_labels(l), signal_labels(l));
    let est = &v.estimate;
    let negative: Vec<Value> = est
        .negative
        .iter()
        .map(|n| json!({"state": states[n.state], "signal": signals[n.signal], "value": n.value}))
        .collect();
    let peer = peer_accuracy_matrix(l.beliefs(), &est.structure)?;
    let environment = match &v.prior {
        Some(p) if p.is_nonnegative(tol) => InformationalEnvironment::new(est.structure.clone(), p.representative())
            .ok()
            .map(|e| environment_json(&e)),
        _ => None,
    };
    Ok(json!({
        "structure": labeled(states, signals, est.structure.entries()),
        "regression": {
            "raw": labeled(states, signals, &est.raw),
            "negative_entries": negative,
            "clipped": est.clipped,
            "residual": est.residual,
            "row_sum_error": est.row_sum_error,
        },
        "prior": v.prior.as_ref().map(|p| prior_family_json(p, states)),
        "peer_accuracy": labeled(states, states, &peer),
        "round_trip": v.round_trip.as_ref().map(round_trip_json),
        "failed": v.failed.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "environment": environment,
    }))
}

fn consistency_verdict(consistent: bool) -> Verdict {
    if consistent {
        Verdict::ok("consistent")
    } else {
        Verdict::flagged("inconsistent")
    }
}

pub fn generate(ctx: &mut Context, path: &str, output: Option<&str>) -> CommandResult {
    let file = files::load_environment_file(path, ctx.stdin, &mut ctx.digests)?;
    let env = ctx.environment(&file, path)?;
    let g = generate_landscape(&env, &ctx.tol)?;
    for s in &g.dropped {
        ctx.warnings
            .push(format!("signal {s} has zero marginal probability and was dropped"));
    }
    let landscape = LandscapeFile::from_landscape(&g.landscape);
    let mut outcome = Outcome::new(
        Verdict::ok("generated"),
        json!({
            "landscape": serde_json::to_value(&landscape).expect("serializable"),
            "marginal": distribution(g.marginal.signal_labels(), g.marginal.entries()),
        }),
    );
    match output {
        Some("-") => outcome.stdout = Some(files::to_canonical_json(&landscape)),
        Some(out) => files::save(out, &InputFile::Landscape(landscape), Format::for_path(out))?,
        None => {}
    }
    Ok(outcome)
}

pub fn identify_landscape(ctx: &mut Context, path: &str) -> CommandResult {
    let l = ctx.landscape(path)?;
    let v = consistency_check(&l, &ctx.tol)?;
    if v.estimate.clipped > 0 {
        ctx.warnings
            .push(format!("{} structure entries clipped to [0, 1]", v.estimate.clipped));
    }
    let result = consistency_json(&l, &v, &ctx.tol)?;
    Ok(Outcome::new(consistency_verdict(v.is_consistent()), result))
}

fn check_belief_rows(b: &StateBeliefMatrix, tol: &Tolerances) -> Vec<String> {
    let mut out = Vec::new();
    for (i, row) in b.entries().row_iter().enumerate() {
        if row.iter().any(|&x| !(x >= -tol.entry)) {
            out.push(format!("B row {i} has a negative entry"));
        }
        if !((row.sum() - 1.0).abs() <= tol.stochastic) {
            out.push(format!("B row {i} sums to {}", row.sum()));
        }
    }
    out
}

pub fn identify_column(ctx: &mut Context, path: &str, signal: &str) -> CommandResult {
    let file = files::load_landscape_file(path, ctx.stdin, &mut ctx.digests)?;
    let beliefs = file.beliefs(path)?;
    if ctx.validate {
        let violations = check_belief_rows(&beliefs, &ctx.tol);
        if !violations.is_empty() {
            return Err(Stop::Verdict(Outcome::new(
                Verdict::flagged("implausible"),
                json!({"violations": violations}),
            )));
        }
    }
    let q = file.q_matrix(path)?;
    let column = if q.ncols() == 1 {
        q.column(0).into_owned()
    } else {
        let Some(j) = beliefs.signal_labels().iter().position(|s| s == signal) else {
            return Err(Stop::Usage(format!("unknown signal label {signal:?}")));
        };
        q.column(j).into_owned()
    };
    let x = identify_single_column(&beliefs, &column, &ctx.tol)?;
    let residual = (beliefs.entries() * &x - &column).amax();
    let in_range = x.iter().all(|&v| v >= -ctx.tol.entry && v <= 1.0 + ctx.tol.entry);
    Ok(Outcome::new(
        consistency_verdict(in_range && residual <= ctx.tol.matching),
        json!({
            "signal": signal,
            "likelihood": distribution(beliefs.state_labels(), &x),
            "residual": residual,
        }),
    ))
}

pub fn signal_priors(ctx: &mut Context, path: &str) -> CommandResult {
    let l = ctx.landscape(path)?;
    let r = signal_priors_identify(&l, &ctx.tol)?;
    let (states, signals) = (state_labels(&l), signal_labels(&l));
    let marginals_ok = r.marginals.iter().all(|m| m.is_nonnegative(&ctx.tol));
    let trip = (r.priors.len() == 1).then(|| round_trip(&l, &r.structure, &r.priors[0], &ctx.tol));
    let consistent = marginals_ok && trip.as_ref().is_some_and(|t| t.passes(&ctx.tol));
    Ok(Outcome::new(
        consistency_verdict(consistent),
        json!({
            "marginals": r.marginals.iter().map(|m| distribution(signals, m.entries())).collect::<Vec<_>>(),
            "priors": r.priors.iter().map(|p| distribution(states, p.entries())).collect::<Vec<_>>(),
            "structure": labeled(states, signals, r.structure.entries()),
            "classes": r.classes.as_ref().map(|c| c.closed_classes().map(|k| pick_labels(signals, k)).collect::<Vec<_>>()),
            "round_trip": trip.as_ref().map(round_trip_json),
        }),
    ))
}

fn feasibility_json(f: &Feasibility, states: &[String], signals: &[String]) -> Value {
    match f {
        Feasibility::Unique(x) => json!({"kind": "unique", "dimension": 0, "point": labeled(states, signals, x)}),
        Feasibility::Family { point, directions } => json!({
            "kind": "family",
            "dimension": directions.len(),
            "point": labeled(states, signals, point),
            "directions": directions.iter().map(matrix).collect::<Vec<_>>(),
        }),
        Feasibility::Infeasible { best_min_entry } => json!({"kind": "infeasible", "best_min_entry": best_min_entry}),
    }
}

pub fn ridge(ctx: &mut Context, path: &str, lambda: Option<f64>, reg_path: Option<&str>) -> CommandResult {
    let l = ctx.landscape(path)?;
    let reg = match reg_path {
        Some(p) => Regularizer::new(files::load_matrix(p, ctx.stdin, &mut ctx.digests)?, &ctx.tol)?,
        None => Regularizer::identity(l.n_states()),
    };
    let r = identify_underdetermined_with(&l, &reg, &ctx.tol)?;
    let (states, signals) = (state_labels(&l), signal_labels(&l));
    let at_lambda = match lambda {
        Some(x) => {
            let solution = beliefscape::linalg::ridge_solution_at(l.b(), l.q(), x, &reg)?;
            let gap = (&solution - &r.ridge_limit).amax();
            Some(json!({"lambda": x, "solution": labeled(states, signals, &solution), "gap_to_limit": gap}))
        }
        None => None,
    };
    let verdict = if !r.feasible.is_feasible() {
        Verdict::flagged("infeasible")
    } else {
        consistency_verdict(r.residual <= ctx.tol.matching && r.prior.is_nonnegative(&ctx.tol))
    };
    Ok(Outcome::new(
        verdict,
        json!({
            "ridge_limit": labeled(states, signals, &r.ridge_limit),
            "residual": r.residual,
            "null_basis": r.null_basis.vectors().iter().map(|v| distribution(states, v)).collect::<Vec<_>>(),
            "prior": prior_family_json(&r.prior, states),
            "feasible": feasibility_json(&r.feasible, states, signals),
            "restored": r.restored.as_ref().map(|s| labeled(states, signals, s.entries())),
            "at_lambda": at_lambda,
        }),
    ))
}

/// Consistency verdict for any plausible landscape; never a structural error.
pub fn check(ctx: &mut Context, path: &str) -> CommandResult {
    let l = ctx.landscape(path)?;
    match consistency_check(&l, &ctx.tol) {
        Ok(v) => {
            let result = consistency_json(&l, &v, &ctx.tol)?;
            Ok(Outcome::new(consistency_verdict(v.is_consistent()), result))
        }
        Err(Error::Underdetermined { .. } | Error::RankDeficient { .. }) => {
            match identify_underdetermined(&l, &ctx.tol) {
                Ok(r) => {
                    let mut failed = Vec::new();
                    if r.residual > ctx.tol.matching {
                        failed.push("column-space");
                    }
                    if !r.prior.is_nonnegative(&ctx.tol) {
                        failed.push("prior");
                    }
                    if !r.feasible.is_feasible() {
                        failed.push("feasibility");
                    }
                    Ok(Outcome::new(
                        consistency_verdict(failed.is_empty()),
                        json!({
                            "path": "underdetermined",
                            "failed": failed,
                            "residual": r.residual,
                            "prior": prior_family_json(&r.prior, state_labels(&l)),
                        }),
                    ))
                }
                Err(e) => Ok(Outcome::new(
                    Verdict::flagged("inconsistent"),
                    json!({"error": e.to_string()}),
                )),
            }
        }
        Err(e) => Ok(Outcome::new(
            Verdict::flagged("inconsistent"),
            json!({"error": e.to_string()}),
        )),
    }
}

pub fn rationalize(ctx: &mut Context, path: &str) -> CommandResult {
    let l = ctx.landscape(path)?;
    let r = rationalize_noncommon(&l, &ctx.tol)?;
    let (states, signals) = (state_labels(&l), signal_labels(&l));
    let types: Vec<Value> = signals
        .iter()
        .enumerate()
        .map(|(s, label)| {
            json!({
                "signal": label,
                "prior": distribution(states, r.type_priors[s].entries()),
                "belief_residual": r.belief_residuals[s],
                "hypothetical_residual": r.hypothetical_residuals[s],
            })
        })
        .collect();
    let reproduced = r
        .belief_residuals
        .iter()
        .chain(&r.hypothetical_residuals)
        .all(|&e| e <= ctx.tol.matching);
    let verdict = if reproduced {
        Verdict::ok("rationalizable")
    } else {
        Verdict::flagged("not-rationalizable")
    };
    Ok(Outcome::new(
        verdict,
        json!({"structure": labeled(states, signals, r.structure.entries()), "types": types}),
    ))
}

pub fn reduce(ctx: &mut Context, path: &str) -> CommandResult {
    let l = ctx.landscape(path)?;
    let r = identify_reduced(&l, &ctx.tol)?;
    let (states, signals) = (state_labels(&l), signal_labels(&l));
    let kept = pick_labels(states, &r.reduction.kept);
    let removed = pick_labels(states, &r.reduction.removed);
    let reduced = &r.reduced;
    let embedded_trip = round_trip(&l, r.embedded.structure(), r.embedded.prior(), &ctx.tol);
    if embedded_trip.hypothetical > ctx.tol.matching {
        ctx.warnings.push(format!(
            "the embedded environment reproduces B but not Q (residual {:e}); Q is reproduced on the kept states",
            embedded_trip.hypothetical
        ));
    }
    let consistent = reduced.estimate.is_nonnegative()
        && reduced.prior.is_nonnegative(&ctx.tol)
        && reduced.round_trip.passes(&ctx.tol);
    Ok(Outcome::new(
        consistency_verdict(consistent),
        json!({
            "kept": kept,
            "removed": removed,
            "weights": labeled(&removed, &kept, &r.reduction.weights),
            "reduced_beliefs": labeled(signals, &kept, r.reduction.reduced.b()),
            "reduced": {
                "structure": labeled(&kept, signals, reduced.structure.entries()),
                "prior": prior_family_json(&reduced.prior, &kept),
                "round_trip": round_trip_json(&reduced.round_trip),
            },
            "embedded": environment_json(&r.embedded),
            "embedded_round_trip": round_trip_json(&embedded_trip),
        }),
    ))
}

pub fn partition(ctx: &mut Context, path: &str) -> CommandResult {
    let l = ctx.landscape(path)?;
    let (states, signals) = (state_labels(&l), signal_labels(&l));
    Ok(match detect_partitional(&l, &ctx.tol)? {
        PartitionOutcome::Partitional(p) => {
            let cells: Vec<Value> = p
                .cells
                .iter()
                .zip(signals)
                .map(|(cell, s)| json!({"signal": s, "states": pick_labels(states, cell)}))
                .collect();
            Outcome::new(
                Verdict::ok("partitional"),
                json!({
                    "cells": cells,
                    "zero_prior_states": pick_labels(states, &p.zero_prior_states),
                    "structure": labeled(states, signals, &p.structure(states.len())),
                }),
            )
        }
        PartitionOutcome::NotPartitional => Outcome::new(
            Verdict::flagged("not-partitional"),
            json!({"max_deviation_from_identity": (l.q() - DMatrix::identity(l.n_signals(), l.n_signals())).amax()}),
        ),
    })
}

pub fn infer(ctx: &mut Context, path: &str, signal: &str, share: f64) -> CommandResult {
    if !(0.0..=1.0).contains(&share) {
        return Err(Stop::Usage(format!("--share must lie in [0, 1], got {share}")));
    }
    let structure = match files::load(path, ctx.stdin, &mut ctx.digests)? {
        InputFile::Environment(f) => ctx.environment(&f, path)?.structure().clone(),
        InputFile::Landscape(f) => {
            let l = f.to_landscape(path)?;
            if ctx.validate {
                let report = validate_landscape(l.beliefs(), l.hypothetical(), &ctx.tol)?;
                if !report.plausible {
                    return Err(implausible(&report));
                }
            }
            identify(&l, &ctx.tol)?.structure
        }
    };
    let Some(s) = structure.signal_index(signal) else {
        return Err(Stop::Usage(format!("unknown signal label {signal:?}")));
    };
    let column = structure.signal_column(s);
    let states = structure.state_labels();
    let likelihood = distribution(states, &column);
    Ok(match infer_state(&column, share, &ctx.tol) {
        StateInference::State(t) => Outcome::new(
            Verdict::ok("inferred"),
            json!({"state": states[t], "likelihood": likelihood, "share": share}),
        ),
        StateInference::Ambiguous(ts) => Outcome::new(
            Verdict::ok("ambiguous"),
            json!({"candidates": pick_labels(states, &ts), "likelihood": likelihood, "share": share}),
        ),
    })
}

struct Tally {
    passed: usize,
    total: usize,
    failures: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Self {
            passed: 0,
            total: 0,
            failures: Vec::new(),
        }
    }

    fn record(&mut self, name: impl Into<String>, ok: bool) {
        self.total += 1;
        if ok {
            self.passed += 1;
        } else {
            self.failures.push(name.into());
        }
    }

    fn json(&self) -> Value {
        json!({"passed": self.passed, "total": self.total, "failures": self.failures})
    }
}

fn close(a: &DMatrix<f64>, b: &DMatrix<f64>, eps: f64) -> bool {
    a.shape() == b.shape() && (a - b).amax() <= eps
}

fn close_vec(a: &DVector<f64>, b: &DVector<f64>, eps: f64) -> bool {
    a.len() == b.len() && (a - b).amax() <= eps
}

fn fixture_checks(tol: &Tolerances) -> Tally {
    let mut t = Tally::new();
    for eps in [0.1, 0.5, 0.9] {
        let env = fixtures::ex1_environment(eps);
        let ok = identify(&fixtures::ex1_landscape(eps), tol).is_ok_and(|r| {
            close(r.structure.entries(), env.structure().entries(), 1e-9)
                && r.prior
                    .unique()
                    .is_some_and(|p| close_vec(p.entries(), env.prior().entries(), 1e-9))
        });
        t.record(format!("ex1 eps={eps}"), ok);
    }
    let verdict = |a: f64| consistency_check(&fixtures::ex2_landscape(a, a), tol).map(|v| v.is_consistent());
    t.record("ex2 9/16 inconsistent", verdict(9.0 / 16.0) == Ok(false));
    t.record("ex2 5/8 consistent", verdict(5.0 / 8.0) == Ok(true));
    t.record(
        "ex1 q-tilde inconsistent",
        consistency_check(&fixtures::ex1_q_tilde_landscape(), tol).is_ok_and(|v| !v.is_consistent()),
    );
    let ex3 = fixtures::ex3_environment();
    t.record(
        "ex3 ridge",
        identify_underdetermined(&fixtures::ex3_landscape(), tol).is_ok_and(|r| {
            close(&r.ridge_limit, &fixtures::ex3_ridge_limit(), 1e-9)
                && r.restored
                    .is_some_and(|s| close(s.entries(), ex3.structure().entries(), 1e-9))
                && r.prior
                    .unique()
                    .is_some_and(|p| close_vec(p.entries(), ex3.prior().entries(), 1e-9))
        }),
    );
    t.record(
        "ex4 reduction",
        identify_reduced(&fixtures::ex4_landscape(), tol).is_ok_and(|r| {
            close(r.reduced.structure.entries(), &fixtures::ex4_reduced_structure(), 1e-9)
                && r.reduced
                    .prior
                    .unique()
                    .is_some_and(|p| close_vec(p.entries(), &fixtures::ex4_reduced_prior(), 1e-9))
                && close(
                    r.embedded.structure().entries(),
                    fixtures::ex4_environment().structure().entries(),
                    1e-9,
                )
        }),
    );
    t.record(
        "ex5 partition",
        detect_partitional(&fixtures::ex5_landscape(0.25, 0.25), tol).is_ok_and(
            |p| matches!(p, PartitionOutcome::Partitional(p) if p.cells == vec![vec![0], vec![1, 2], vec![3]]),
        ),
    );
    t
}

pub fn selftest(ctx: &mut Context, seed: u64, trials: usize) -> CommandResult {
    let tol = ctx.tol;
    let fixtures = fixture_checks(&tol);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut regression, mut agreement, mut underdetermined) = (Tally::new(), Tally::new(), Tally::new());
    for trial in 0..trials {
        let n_states = rng.random_range(2..=5);
        let n_signals = rng.random_range(n_states..=8);
        let env = sample_environment(&mut rng, n_states, n_signals);
        let Ok(g) = generate_landscape(&env, &tol) else {
            regression.record(format!("trial {trial}: generation"), false);
            continue;
        };
        let l = g.landscape;
        let r = identify(&l, &tol);
        regression.record(
            format!("trial {trial}"),
            r.as_ref().is_ok_and(|r| {
                close(r.structure.entries(), env.structure().entries(), 1e-8)
                    && r.prior
                        .unique()
                        .is_some_and(|p| close_vec(p.entries(), env.prior().entries(), 1e-8))
            }),
        );
        let sp = signal_priors_identify(&l, &tol);
        agreement.record(
            format!("trial {trial}"),
            match (&r, &sp) {
                (Ok(r), Ok(sp)) => {
                    close(r.structure.entries(), sp.structure.entries(), 1e-8)
                        && sp.priors.len() == 1
                        && r.prior
                            .unique()
                            .is_some_and(|p| close_vec(p.entries(), sp.priors[0].entries(), 1e-8))
                }
                _ => false,
            },
        );

        let n_states = rng.random_range(3..=6);
        let env = sample_environment(&mut rng, n_states, n_states - 1);
        let ok = generate_landscape(&env, &tol).is_ok_and(|g| {
            identify_underdetermined(&g.landscape, &tol).is_ok_and(|u| {
                u.residual <= 1e-8
                    && u.prior
                        .unique()
                        .is_some_and(|p| close_vec(p.entries(), env.prior().entries(), 1e-8))
            })
        });
        underdetermined.record(format!("trial {trial}"), ok);
    }
    let all = [&fixtures, &regression, &agreement, &underdetermined];
    let passed = all.iter().all(|t| t.passed == t.total);
    Ok(Outcome::new(
        if passed {
            Verdict::ok("passed")
        } else {
            Verdict::flagged("failed")
        },
        json!({
            "seed": seed,
            "trials": trials,
            "fixtures": fixtures.json(),
            "regression_round_trip": regression.json(),
            "signal_priors_agreement": agreement.json(),
            "underdetermined_prior": underdetermined.json(),
        }),
    ))
}
