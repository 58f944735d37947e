//! Subcommands behind the `pumped-lindblad` binary.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::config::{Model, RunConfig};
use crate::error::{Error, Result};
use crate::evolution::{evolve, level_populations, populations, stationary_state, uniform_grid, EvolveOptions};
use crate::floquet::{
    build_howland, dilated_order_check, floquet_spectrum, gap_report, heisenberg_resonance_residuals, monodromy,
    monodromy_match, DilatedModel, OrderCheck, Picture,
};
use crate::lindblad::{check_assumptions, oracle_convergence};
use crate::linalg::{self, C64};
use crate::operator_core::bohr_spectrum;
use crate::report::{Record, Report, Verdict};
use crate::reservoir::pv_estimate;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_ASSUMPTION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Check,
    Evolve,
    Floquet,
    Oracle,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Evolve => "evolve",
            Command::Floquet => "floquet",
            Command::Oracle => "oracle",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub out: PathBuf,
    pub force: bool,
    pub order_check: bool,
}

/// Result of one subcommand run.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub code: i32,
    pub written: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

/// Exit code for an error that escaped a subcommand.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Json(_) | Error::Io(_) => EXIT_CONFIG,
        _ => EXIT_NUMERICAL,
    }
}

fn write(dir: &Path, name: &str, content: &str, out: &mut Outcome) -> Result<()> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, content)?;
    out.written.push(path);
    Ok(())
}

fn to_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serialization");
    s.push('\n');
    s
}

fn pairs(v: &[C64]) -> Value {
    json!(v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())
}

fn attested_warnings(report: &Report, out: &mut Outcome) {
    for r in report.records.iter().filter(|r| r.verdict == Verdict::Attested) {
        out.warnings.push(format!("{}: attested, not verified ({})", r.name, r.notes));
    }
}

/// Builds the model; anything that fails here is a configuration problem.
pub fn build_model(cfg: &RunConfig) -> Result<Model> {
    Model::build(cfg).map_err(|e| match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    })
}

pub fn run(cmd: Command, cfg: &RunConfig, opts: &RunOptions) -> Result<Outcome> {
    let model = build_model(cfg)?;
    match cmd {
        Command::Check => cmd_check(&model, opts),
        Command::Evolve => gated(&model, opts, cmd_evolve),
        Command::Floquet => gated(&model, opts, cmd_floquet),
        Command::Oracle => cmd_oracle(&model, opts),
    }
}

pub fn assumption_report(model: &Model) -> Result<Report> {
    let mut report =
        check_assumptions(&model.data, model.reservoir.as_ref(), &model.pump, model.lambda, model.eta, &model.assumption_options())?;
    report.metadata = json!({ "command": "check", "seed": model.config.seed });
    Ok(report)
}

pub fn cmd_check(model: &Model, opts: &RunOptions) -> Result<Outcome> {
    let report = assumption_report(model)?;
    let mut out = Outcome::default();
    write(&opts.out, "report.json", &report.to_json(), &mut out)?;
    attested_warnings(&report, &mut out);
    out.code = if report.any_fail() { EXIT_ASSUMPTION } else { EXIT_OK };
    Ok(out)
}

/// Runs `body` only when the assumption check passes, unless forced.
fn gated(model: &Model, opts: &RunOptions, body: fn(&Model, &RunOptions) -> Result<Outcome>) -> Result<Outcome> {
    if !opts.force {
        let pre = cmd_check(model, opts)?;
        if pre.code != EXIT_OK {
            let mut pre = pre;
            pre.warnings.push("assumption check failed; rerun with --force to proceed".into());
            return Ok(pre);
        }
        let mut out = body(model, opts)?;
        out.written.splice(0..0, pre.written);
        out.warnings.splice(0..0, pre.warnings);
        return Ok(out);
    }
    body(model, opts)
}

pub fn cmd_evolve(model: &Model, opts: &RunOptions) -> Result<Outcome> {
    let sim = &model.config.sim;
    let t_end = model.t_end();
    let grid = uniform_grid(t_end, sim.n_out);
    let traj = evolve(&model.bundle, &model.initial_state()?, t_end, &grid, EvolveOptions { rtol: sim.rtol, atol: sim.atol })?;
    let pops = populations(&model.atom, &traj);
    let stationary = match stationary_state(&model.bundle.averaged_generator()) {
        Ok(rho) => json!(level_populations(&model.atom, rho.matrix())),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let summary = json!({
        "schema_version": crate::report::SCHEMA_VERSION,
        "t_end": t_end,
        "n_out": sim.n_out,
        "rtol": sim.rtol,
        "atol": sim.atol,
        "energies": model.atom.energies(),
        "final_populations": pops.populations.last(),
        "max_trace_drift": traj.max_trace_drift(),
        "min_eigenvalue": traj.min_eigenvalue(),
        "final_purity": pops.purity.last(),
        "averaged_stationary_populations": stationary,
        "steps": traj.stats,
    });
    let mut out = Outcome::default();
    write(&opts.out, "trajectory.csv", &traj.to_csv(&model.atom), &mut out)?;
    write(&opts.out, "summary.json", &to_json(&summary), &mut out)?;
    Ok(out)
}

const PICTURE_TOL: f64 = 1e-8;
const TRUNCATION_TOL: f64 = 1e-8;
const MONODROMY_TOL: f64 = 1e-6;
const HEISENBERG_TOL: f64 = 1e-12;

/// Records of the Floquet analysis at the configured truncation.
pub fn floquet_report(model: &Model, order_check: bool) -> Result<Report> {
    let n = model.config.floquet.n_modes;
    let b = &model.bundle;
    let d = model.atom.dim();
    let mut report = Report::new("floquet");
    report.metadata = json!({ "command": "floquet", "seed": model.config.seed, "n_modes": n, "omega": b.omega });

    let state = build_howland(b, n, Picture::State)?;
    let spec = floquet_spectrum(&state)?;
    let fundamental = spec.fundamental();
    report.push(Record::new(
        "howland_spectrum",
        if fundamental.len() == d * d { Verdict::Pass } else { Verdict::Fail },
        json!({ "dim": state.dim(), "n_modes": n, "fundamental": pairs(&fundamental), "expected_count": d * d }),
        "interior eigenvalues with |Im| <= omega/2",
    ));

    let heis = build_howland(b, n, Picture::Heisenberg)?;
    let residuals = heisenberg_resonance_residuals(&heis, d);
    let max_res = residuals.iter().map(|r| r.1).fold(0.0, f64::max);
    let gap = gap_report(&state, &spec, model.lambda);
    let verdict = if max_res > HEISENBERG_TOL {
        Verdict::Fail
    } else if gap.all_simple {
        Verdict::Pass
    } else {
        Verdict::Attested
    };
    report.push(Record::new(
        "resonances",
        verdict,
        json!({ "max_heisenberg_residual": max_res, "counts": gap.resonance_counts, "all_simple": gap.all_simple }),
        if gap.all_simple { "each i p omega is a simple eigenvalue" } else { "degenerate: some i p omega is not simple" },
    ));
    report.push(Record::new(
        "gap",
        if gap.degenerate { Verdict::Attested } else { Verdict::Pass },
        json!({ "gap": gap.gap, "gap_over_lambda_squared": gap.gap_over_lambda_squared, "degenerate": gap.degenerate }),
        if gap.degenerate { "degenerate gap" } else { "min |Re mu| off the lattice" },
    ));

    let conj = build_howland(b, n, Picture::Conjugated(model.reference_state()?))?;
    let conj_eigs = linalg::eigvals(&conj.matrix)?;
    let heis_eigs = linalg::eigvals(&heis.matrix)?;
    let scale = linalg::fro(&state.matrix).max(1.0);
    let dh = linalg::matched_distance(&spec.eigenvalues, &heis_eigs);
    let dc = linalg::matched_distance(&spec.eigenvalues, &conj_eigs);
    report.push(Record::new(
        "picture_similarity",
        if dh.max(dc) <= PICTURE_TOL * scale { Verdict::Pass } else { Verdict::Fail },
        json!({ "state_vs_heisenberg": dh, "state_vs_conjugated": dc, "tolerance": PICTURE_TOL * scale }),
        "matched eigenvalue distance between pictures",
    ));

    let tau = monodromy(b, 1e-12)?;
    let mm = monodromy_match(&tau, &spec)?;
    report.push(Record::new(
        "monodromy",
        if mm.max_error <= MONODROMY_TOL { Verdict::Pass } else { Verdict::Fail },
        serde_json::to_value(&mm)?,
        "one-period propagator against exp(T mu)",
    ));

    let half = (n / 2).max(2);
    let coarse = floquet_spectrum(&build_howland(b, half, Picture::State)?)?.fundamental();
    let trunc = if coarse.len() == fundamental.len() { linalg::matched_distance(&coarse, &fundamental) } else { f64::INFINITY };
    report.push(Record::new(
        "truncation",
        if trunc <= TRUNCATION_TOL { Verdict::Pass } else { Verdict::Fail },
        json!({ "n_modes": [half, n], "fundamental_distance": if trunc.is_finite() { json!(trunc) } else { Value::Null } }),
        "fundamental eigenvalues at half the truncation",
    ));

    if order_check {
        report.push(order_check_record(model)?);
    }
    Ok(report)
}

/// Kato residuals at `lambda = 0.1` and `0.05` on the dilated probe model
/// built from the configured atom, pump and first coupling.
pub fn order_check(model: &Model) -> Result<OrderCheck> {
    let lambda = 0.1;
    let l2 = model.lambda * model.lambda;
    let ratio = if l2 > 0.0 && model.eta != 0.0 { model.eta / l2 } else { 0.5 };
    // A diagonal part of alternating sign breaks the level parity that would
    // cancel the odd orders in the probe model.
    let mut probe = model.probe_coupling();
    for (k, lvl) in model.atom.levels().iter().enumerate() {
        let s = if k % 2 == 0 { 0.5 } else { -0.5 };
        probe += linalg::scale(&lvl.projection, linalg::r(s));
    }
    let dm = DilatedModel::new(model.atom.h_at().clone(), model.pump.hamiltonian.clone(), probe, model.bundle.omega);
    let base = &model.bundle;
    let m = model.config.floquet.contour_points;
    dilated_order_check(&dm, lambda, ratio, 4, m, |l, eta| {
        let f = build_howland(&base.with_couplings(l, eta), 4, Picture::State)?.matrix;
        let f0 = build_howland(&base.with_couplings(0.0, 0.0), 4, Picture::State)?.matrix;
        Ok((f, f0))
    })
}

fn order_check_record(model: &Model) -> Result<Record> {
    let chk = order_check(model)?;
    let ok = chk.ratio >= 1.0 / 12.0 && chk.ratio <= 1.0 / 5.0;
    Ok(Record::new(
        "order_check",
        if ok { Verdict::Pass } else { Verdict::Fail },
        json!({ "check": chk, "inverse_ratio": 1.0 / chk.ratio, "window": [1.0 / 12.0, 1.0 / 5.0] }),
        "Kato residual at lambda and lambda/2 with eta proportional to lambda^2",
    ))
}

pub fn cmd_floquet(model: &Model, opts: &RunOptions) -> Result<Outcome> {
    let report = floquet_report(model, opts.order_check)?;
    let mut out = Outcome::default();
    write(&opts.out, "floquet.json", &report.to_json(), &mut out)?;
    attested_warnings(&report, &mut out);
    out.code = if report.any_fail() { EXIT_NUMERICAL } else { EXIT_OK };
    Ok(out)
}

const ORACLE_REG: f64 = 1e-2;
const ORDER_WINDOW: (f64, f64) = (0.75, 1.25);
const EXTRAPOLATION_TOL: f64 = 1e-5;

pub fn oracle_report(model: &Model) -> Result<Report> {
    let res = model
        .reservoir
        .as_ref()
        .ok_or_else(|| Error::Config("the oracle needs form factors and couplings, not GKS jumps".into()))?;
    let mut report = Report::new("oracle");
    report.metadata = json!({ "command": "oracle", "seed": model.config.seed });
    let conv = oracle_convergence(&model.atom, res, ORACLE_REG)?;
    let orders_ok = conv.observed_orders.iter().all(|&p| p >= ORDER_WINDOW.0 && p <= ORDER_WINDOW.1);
    let ok = orders_ok && conv.extrapolated_error <= EXTRAPOLATION_TOL;
    report.push(Record::new(
        "resolvent_convergence",
        if ok { Verdict::Pass } else { Verdict::Fail },
        json!({ "convergence": conv, "order_window": [ORDER_WINDOW.0, ORDER_WINDOW.1], "extrapolation_tolerance": EXTRAPOLATION_TOL }),
        "regularized resolvent construction against the closed form",
    ));
    let freqs = bohr_spectrum(&model.atom)?.frequencies();
    let mut rows = Vec::new();
    let mut all_ok = true;
    for (l, ff) in res.form_factors.iter().enumerate() {
        for &w in &freqs {
            match pv_estimate(ff, res.beta, w) {
                Ok(e) => rows.push(json!({
                    "form_factor": l, "bohr_frequency": w,
                    "adaptive": e.adaptive, "trapezoid": e.trapezoid, "imag_residue": e.imag_residue,
                })),
                Err(err @ (Error::DisagreementBetweenRules { .. } | Error::QuadratureNonConvergence(_))) => {
                    all_ok = false;
                    rows.push(json!({ "form_factor": l, "bohr_frequency": w, "error": err.to_string() }));
                }
                Err(e) => return Err(e),
            }
        }
    }
    report.push(Record::new(
        "pv_two_rule",
        if all_ok { Verdict::Pass } else { Verdict::Fail },
        json!(rows),
        "adaptive Gauss-Kronrod against the offset trapezoid sum",
    ));
    Ok(report)
}

pub fn cmd_oracle(model: &Model, opts: &RunOptions) -> Result<Outcome> {
    let report = oracle_report(model)?;
    let mut out = Outcome::default();
    write(&opts.out, "oracle.json", &report.to_json(), &mut out)?;
    out.code = if report.any_fail() { EXIT_NUMERICAL } else { EXIT_OK };
    Ok(out)
}

/// Parses `key=v1,v2,...`, keeping the raw tokens for directory names.
pub fn parse_sweep(spec: &str) -> Result<(String, Vec<(String, f64)>)> {
    let (key, vals) = spec.split_once('=').ok_or_else(|| Error::Config(format!("sweep `{spec}` is not of the form key=v1,v2")))?;
    let vals = vals
        .split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>().map(|v| (t.to_string(), v)).map_err(|_| Error::Config(format!("sweep value `{t}` is not a number")))
        })
        .collect::<Result<Vec<_>>>()?;
    if vals.is_empty() {
        return Err(Error::Config("empty sweep".into()));
    }
    Ok((key.trim().to_string(), vals))
}

/// Runs one subcommand per sweep value concurrently, each in `out/key=value`.
/// The returned code is the largest of the individual codes.
pub fn run_sweep(cmd: Command, cfg: &RunConfig, opts: &RunOptions, sweep: &str) -> Result<Outcome> {
    let (key, vals) = parse_sweep(sweep)?;
    let runs: Vec<(PathBuf, RunConfig)> = vals
        .iter()
        .map(|(tok, v)| Ok((opts.out.join(format!("{key}={tok}")), cfg.with_parameter(&key, *v)?)))
        .collect::<Result<_>>()?;
    let results: Vec<Result<Outcome>> = std::thread::scope(|s| {
        let handles: Vec<_> = runs
            .iter()
            .map(|(dir, c)| {
                let o = RunOptions { out: dir.clone(), ..opts.clone() };
                s.spawn(move || run(cmd, c, &o))
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap_or_else(|_| Err(Error::InvariantViolation("sweep worker panicked".into())))).collect()
    });
    let mut out = Outcome::default();
    let mut index = Vec::new();
    for ((dir, _), (res, (tok, v))) in runs.iter().zip(results.into_iter().zip(&vals)) {
        let name = dir.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        match res {
            Ok(o) => {
                out.code = out.code.max(o.code);
                out.warnings.extend(o.warnings.into_iter().map(|w| format!("{name}: {w}")));
                out.written.extend(o.written);
                index.push(json!({ "dir": name, "value": v, "token": tok, "exit_code": o.code }));
            }
            Err(e) => {
                let code = exit_code(&e);
                out.code = out.code.max(code);
                out.warnings.push(format!("{name}: {e}"));
                index.push(json!({ "dir": name, "value": v, "token": tok, "exit_code": code, "error": e.to_string() }));
            }
        }
    }
    let summary = json!({ "schema_version": crate::report::SCHEMA_VERSION, "command": cmd.name(), "parameter": key, "runs": index });
    write(&opts.out, "sweep.json", &to_json(&summary), &mut out)?;
    Ok(out)
}
