//! Command runners and the exit-code contract.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::Parser;
use serde::Serialize;
use serde_json::{json, Value};
use tgv1d_core::analysis::{
    linspace, segment_affine, NumericSettings, RegimeMap, SegmentTolerances, StructureDescription, INDETERMINATE,
};
use tgv1d_core::certificate::{check_conditions, CertificateReport};
use tgv1d_core::exact::{exact_for, PiecewisePoly};
use tgv1d_core::signal::{add_gaussian_noise, sample_shape};
use tgv1d_core::solver::{solve_tgv2, solve_tv};
use tgv1d_core::{Error, Grid, RegParams, ShapeSpec, Signal};

use crate::cli::{Cli, Command, CompareArgs, ExactArgs, GenerateArgs, ModelArg, SolveArgs, SweepArgs, VerifyArgs};
use crate::io::{
    fmt17, read_json, read_signal, read_solution, sig17, write_csv, write_json, w_at_midpoints, FieldDto, ParamsDto,
    SignalDto, SolutionDto, SolutionFile,
};
use crate::manifest::{self, RunManifest};
use crate::plot::regime_script;
use crate::sweep::{sweep_parallel, MAX_CELLS};

/// Exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success = 0,
    VerificationFailed = 1,
    InputError = 2,
    NotConverged = 3,
    Indeterminate = 4,
}

/// Environment variable overriding `--seed`.
pub const SEED_VAR: &str = "TGV1D_SEED";

/// What a finished command reports for its manifest.
#[derive(Debug)]
struct Outcome {
    status: Status,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    seed: Option<u64>,
}

impl Outcome {
    fn new(status: Status, inputs: &[&Path], outputs: Vec<PathBuf>) -> Self {
        Self { status, inputs: inputs.iter().map(|p| p.to_path_buf()).collect(), outputs, seed: None }
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli, argv: Vec<String>) -> u8 {
    match (cli.replay, cli.command) {
        (Some(path), _) => replay(&path),
        (None, Some(cmd)) => execute(cmd, argv, None),
        (None, None) => {
            eprintln!("error: no command given");
            Status::InputError as u8
        }
    }
}

fn replay(path: &Path) -> u8 {
    let m: RunManifest = match read_json(path) {
        Ok(m) => m,
        Err(e) => return fail(&e),
    };
    match Cli::try_parse_from(&m.argv) {
        Ok(Cli { replay: None, command: Some(cmd) }) => execute(cmd, m.argv, m.seed),
        Ok(_) => fail(&anyhow!("{} does not record a command", path.display())),
        Err(e) => fail(&anyhow!("{} records an invalid command line: {e}", path.display())),
    }
}

fn execute(cmd: Command, argv: Vec<String>, seed_override: Option<u64>) -> u8 {
    let start = Instant::now();
    let result = match &cmd {
        Command::Generate(a) => generate(a, seed_override),
        Command::Solve(a) => solve(a),
        Command::Exact(a) => exact(a),
        Command::Verify(a) => verify(a),
        Command::Sweep(a) => sweep(a),
        Command::Compare(a) => compare(a),
    };
    let outcome = match result {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };
    let m = RunManifest {
        command: cmd.name().to_string(),
        argv,
        parameters: serde_json::to_value(&cmd).unwrap_or(Value::Null),
        inputs: outcome.inputs,
        outputs: outcome.outputs,
        seed: outcome.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_s: start.elapsed().as_secs_f64(),
        exit_code: outcome.status as u8,
    };
    let path = cmd.manifest_override().cloned().or_else(|| m.outputs.first().map(|p| manifest::default_path(p)));
    if let Some(path) = path {
        if let Err(e) = write_json(&path, &m) {
            return fail(&e);
        }
    }
    eprintln!("manifest: {}", serde_json::to_string(&m).unwrap_or_default());
    outcome.status as u8
}

fn fail(e: &anyhow::Error) -> u8 {
    eprintln!("error: {e:#}");
    match e.downcast_ref::<Error>() {
        Some(Error::Indeterminate { .. }) => Status::Indeterminate as u8,
        _ => Status::InputError as u8,
    }
}

/// `TGV1D_SEED` when set.
pub fn env_seed() -> anyhow::Result<Option<u64>> {
    match std::env::var(SEED_VAR) {
        Ok(s) => Ok(Some(s.trim().parse().with_context(|| format!("{SEED_VAR}={s} is not an unsigned integer"))?)),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(anyhow!("{SEED_VAR}: {e}")),
    }
}

fn generate(a: &GenerateArgs, seed_override: Option<u64>) -> anyhow::Result<Outcome> {
    let spec = a.shape.spec()?;
    let f = sample_shape(&spec, spec.grid(a.n)?)?;
    let seed = match seed_override {
        Some(s) => s,
        None => env_seed()?.unwrap_or(a.seed),
    };
    write_json(&a.out, &SignalDto::new(&f, json!({ "shape": spec, "sigma": null, "seed": null })))?;
    let mut outputs = vec![a.out.clone()];
    let mut used_seed = None;
    if a.noise_sigma != 0.0 || a.noisy_out.is_some() {
        let noisy = add_gaussian_noise(&f, a.noise_sigma, seed)?;
        let path = a.noisy_out.clone().unwrap_or_else(|| a.out.with_extension("noisy.json"));
        write_json(&path, &SignalDto::new(&noisy, json!({ "shape": spec, "sigma": a.noise_sigma, "seed": seed })))?;
        println!("wrote {} and {} ({} cells, sigma {}, seed {seed})", a.out.display(), path.display(), a.n, a.noise_sigma);
        outputs.push(path);
        used_seed = Some(seed);
    } else {
        println!("wrote {} ({} cells)", a.out.display(), a.n);
    }
    Ok(Outcome { seed: used_seed, ..Outcome::new(Status::Success, &[], outputs) })
}

fn describe(s: &StructureDescription) {
    println!("structure: {} segments, {} jumps", s.segments.len(), s.jumps.len());
    for j in &s.jumps {
        println!("jump at x = {:.6}, size {:.6}", j.location, j.size);
    }
}

fn solve(a: &SolveArgs) -> anyhow::Result<Outcome> {
    let (f, meta) = read_signal(&a.input)?;
    let model = a.model.unwrap_or(if a.beta.is_some() { ModelArg::Tgv } else { ModelArg::Tv });
    let opts = a.solver.options()?;
    let (sol, beta) = match model {
        ModelArg::Tgv => {
            let beta = a.beta.ok_or_else(|| anyhow!("--model tgv needs --beta"))?;
            (solve_tgv2(&f, RegParams::new(a.alpha, beta)?, opts)?, Some(beta))
        }
        ModelArg::Tv => {
            if a.beta.is_some() {
                eprintln!("warning: --beta is ignored by the TV model");
            }
            (solve_tv(&f, a.alpha, opts)?, None)
        }
    };
    let model_name = match model {
        ModelArg::Tgv => "tgv",
        ModelArg::Tv => "tv",
    };
    let diagnostics = json!({
        "method": opts.method.name(),
        "iterations": sol.iterations,
        "primal_energy": sol.primal_energy,
        "duality_gap": sol.duality_gap,
        "converged": sol.converged,
        "tol": opts.tol,
        "max_iters": opts.max_iters,
        "history": sol.history,
    });
    let dto = SolutionDto {
        grid: sol.u.grid().into(),
        values: sig17(sol.u.values()),
        w: beta.map(|_| FieldDto::new(&sol.w)),
        model: model_name.to_string(),
        params: ParamsDto { alpha: a.alpha, beta },
        diagnostics,
        meta,
    };
    write_json(&a.out, &dto)?;
    let csv = a.csv.clone().unwrap_or_else(|| a.out.with_extension("csv"));
    let x: Vec<f64> = f.grid().midpoints().collect();
    let w = w_at_midpoints(sol.w.values(), f.len());
    write_csv(&csv, &["x", "f", "u", "w"], &[&x, f.values(), sol.u.values(), &w])?;

    let state = if sol.converged { "converged" } else { "not converged" };
    println!("model {model_name}, method {}: {state} after {} iterations", opts.method.name(), sol.iterations);
    println!("energy {:e}, duality gap {:e}", sol.primal_energy, sol.duality_gap);
    let tols = SegmentTolerances::for_data(&f);
    describe(&segment_affine(&sol.u, tols.slope_tol, tols.jump_tol)?);
    let status = if sol.converged {
        Status::Success
    } else {
        eprintln!(
            "error: no convergence within {} iterations: gap {:e} exceeds {:e}",
            opts.max_iters,
            sol.duality_gap,
            opts.tol * (1.0 + sol.primal_energy.abs())
        );
        Status::NotConverged
    };
    Ok(Outcome::new(status, &[&a.input], vec![a.out.clone(), csv]))
}

#[derive(Serialize)]
struct ExactOut<'a> {
    regime: &'a str,
    shape: &'a ShapeSpec,
    params: ParamsDto,
    u: &'a PiecewisePoly,
    w: &'a PiecewisePoly,
    v: &'a PiecewisePoly,
    internal_points: BTreeMap<&'static str, f64>,
}

fn exact(a: &ExactArgs) -> anyhow::Result<Outcome> {
    let spec = a.shape.spec()?;
    let p = RegParams::new(a.alpha, a.beta)?;
    let sol = match exact_for(&spec, p) {
        Ok(sol) => sol,
        Err(e @ Error::Indeterminate { .. }) => {
            println!("{INDETERMINATE}");
            eprintln!("error: {e}");
            return Ok(Outcome::new(Status::Indeterminate, &[], Vec::new()));
        }
        Err(e) => return Err(e.into()),
    };
    let out = ExactOut {
        regime: sol.regime.label(),
        shape: &sol.shape,
        params: ParamsDto { alpha: a.alpha, beta: Some(a.beta) },
        u: &sol.u,
        w: &sol.w,
        v: &sol.v,
        internal_points: sol.internal_points.entries().collect(),
    };
    write_json(&a.out, &out)?;
    let g = spec.grid(a.n)?;
    let x: Vec<f64> = g.midpoints().collect();
    let col = |p: &dyn Fn(f64) -> f64| x.iter().map(|&x| p(x)).collect::<Vec<f64>>();
    let (f, u, w, v) = (col(&|x| spec.eval(x)), col(&|x| sol.u.eval(x)), col(&|x| sol.w.eval(x)), col(&|x| sol.v.eval(x)));
    let csv = a.csv.clone().unwrap_or_else(|| a.out.with_extension("csv"));
    write_csv(&csv, &["x", "f", "u", "w", "v"], &[&x, &f, &u, &w, &v])?;
    println!("{}", sol.regime.label());
    Ok(Outcome::new(Status::Success, &[], vec![a.out.clone(), csv]))
}

fn report_table(r: &CertificateReport) -> String {
    let yes = |b: bool| if b { "ok" } else { "FAIL" };
    let rows = [
        ("closed-form residual", format!("{:e}", r.cf_residual), ""),
        ("max|v'| - alpha", format!("{:e}", r.alpha_margin), yes(r.alpha_feasible)),
        ("max|v| - beta", format!("{:e}", r.beta_margin), yes(r.beta_feasible)),
        ("sign(Du - w) error", format!("{:e} ({} active)", r.sgn_alpha_error, r.sgn_alpha_active), yes(r.sgn_alpha_ok)),
        ("sign(Dw) error", format!("{:e} ({} active)", r.sgn_beta_error, r.sgn_beta_active), yes(r.sgn_beta_ok)),
        (
            "boundary v(a) v'(a) v(b) v'(b)",
            format!("{:e} {:e} {:e} {:e}", r.boundary.v_a, r.boundary.dv_a, r.boundary.v_b, r.boundary.dv_b),
            yes(r.boundary_ok),
        ),
        ("duality gap", format!("{:e}", r.gap), ""),
    ];
    let mut s = String::new();
    for (name, value, ok) in rows {
        s.push_str(&format!("{name:<32} {value:<48} {ok}\n"));
    }
    s.push_str(&format!("verdict: {}\n", if r.pass { "PASS" } else { "FAIL" }));
    s
}

fn verify(a: &VerifyArgs) -> anyhow::Result<Outcome> {
    let (f, _) = read_signal(&a.data)?;
    let sol = read_solution(&a.solution)?;
    let g = *f.grid();
    let u = sol.u_on(&g)?;
    let w = sol.w_on(&g)?;
    let stored = sol.params();
    let alpha = a.alpha.or(stored.map(|p| p.alpha)).ok_or_else(|| anyhow!("--alpha is required"))?;
    let beta = a.beta.or(stored.and_then(|p| p.beta)).ok_or_else(|| anyhow!("--beta is required"))?;
    let report = check_conditions(&f, &u, &w, RegParams::new(alpha, beta)?, a.tol)?;
    print!("{}", report_table(&report));
    let mut outputs = Vec::new();
    if let Some(out) = &a.out {
        write_json(out, &report)?;
        outputs.push(out.clone());
    }
    let status = if report.pass { Status::Success } else { Status::VerificationFailed };
    Ok(Outcome::new(status, &[&a.data, &a.solution], outputs))
}

fn check_range(name: &str, lo: f64, hi: f64, steps: usize) -> anyhow::Result<()> {
    if !(lo > 0.0 && lo.is_finite() && hi.is_finite() && hi >= lo) {
        bail!("{name} range must satisfy 0 < min <= max, got [{lo}, {hi}]");
    }
    if steps < 1 {
        bail!("{name} needs at least one step");
    }
    Ok(())
}

fn write_map_csv(path: &Path, map: &RegimeMap) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    let mut header = vec!["beta\\alpha".to_string()];
    header.extend(map.alphas.iter().map(|&a| fmt17(a)));
    w.write_record(&header)?;
    for (beta, row) in map.betas.iter().zip(&map.labels) {
        let mut rec = vec![fmt17(*beta)];
        rec.extend(row.iter().cloned());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn sweep(a: &SweepArgs) -> anyhow::Result<Outcome> {
    check_range("alpha", a.alpha_min, a.alpha_max, a.alpha_steps)?;
    check_range("beta", a.beta_min, a.beta_max, a.beta_steps)?;
    let cells = a.alpha_steps.saturating_mul(a.beta_steps);
    if cells > MAX_CELLS {
        bail!("{} x {} = {cells} cells exceeds the limit of {MAX_CELLS}", a.alpha_steps, a.beta_steps);
    }
    if a.jobs == Some(0) {
        bail!("--jobs must be at least 1");
    }
    let spec = a.shape.spec()?;
    let settings = NumericSettings { n: a.n, solver: a.solver.options()? };
    let alphas = linspace(a.alpha_min, a.alpha_max, a.alpha_steps);
    let betas = linspace(a.beta_min, a.beta_max, a.beta_steps);
    let map = sweep_parallel(&spec, &alphas, &betas, a.mode.into(), &settings, a.jobs)?;
    write_map_csv(&a.out, &map)?;
    let script = a.script.clone().unwrap_or_else(|| a.out.with_extension("gp"));
    let mode = match map.mode {
        tgv1d_core::analysis::SweepMode::Analytic => "analytic",
        tgv1d_core::analysis::SweepMode::Numeric => "numeric",
    };
    let title = format!("{} regimes ({mode})", spec.kind.name());
    std::fs::write(&script, regime_script(&map, &title)).with_context(|| format!("writing {}", script.display()))?;
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for l in map.labels.iter().flatten() {
        *counts.entry(l.as_str()).or_default() += 1;
    }
    for (label, count) in counts {
        println!("{label:<14} {count}");
    }
    Ok(Outcome::new(Status::Success, &[], vec![a.out.clone(), script]))
}

fn jumps_json(s: &StructureDescription) -> Value {
    s.jumps.iter().map(|j| json!({ "location": j.location, "size": j.size })).collect()
}

/// Largest `|a − b|` over paired jumps, `None` when the counts differ.
fn paired_delta(a: &StructureDescription, b: &StructureDescription, key: fn(&tgv1d_core::analysis::Jump) -> f64) -> Option<f64> {
    (a.jumps.len() == b.jumps.len())
        .then(|| a.jumps.iter().zip(&b.jumps).map(|(p, q)| (key(p) - key(q)).abs()).fold(0.0, f64::max))
}

fn compare(a: &CompareArgs) -> anyhow::Result<Outcome> {
    let r = read_solution(&a.reference)?;
    let c = read_solution(&a.candidate)?;
    let grid = match (&r, &c) {
        (SolutionFile::Sampled { u, .. }, _) | (_, SolutionFile::Sampled { u, .. }) => *u.grid(),
        (SolutionFile::Exact { u, .. }, SolutionFile::Exact { .. }) => {
            let (lo, hi) = u.domain();
            Grid::new(lo, hi, a.n)?
        }
    };
    let ru: Signal = r.u_on(&grid)?;
    let cu: Signal = c.u_on(&grid)?;
    let linf = ru.sup_distance(&cu)?;
    let l2 = ru.l2_distance(&cu)?;
    let tols = SegmentTolerances::for_data(&ru);
    let sr = segment_affine(&ru, tols.slope_tol, tols.jump_tol)?;
    let sc = segment_affine(&cu, tols.slope_tol, tols.jump_tol)?;
    let within = linf <= a.tol;
    let report = json!({
        "l2": l2,
        "linf": linf,
        "tol": a.tol,
        "within_tol": within,
        "reference_jumps": jumps_json(&sr),
        "candidate_jumps": jumps_json(&sc),
        "jump_location_delta": paired_delta(&sr, &sc, |j| j.location),
        "jump_size_delta": paired_delta(&sr, &sc, |j| j.size),
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    let mut outputs = Vec::new();
    if let Some(out) = &a.out {
        let x: Vec<f64> = grid.midpoints().collect();
        let d: Vec<f64> = cu.values().iter().zip(ru.values()).map(|(c, r)| c - r).collect();
        write_csv(out, &["x", "reference", "candidate", "difference"], &[&x, ru.values(), cu.values(), &d])?;
        outputs.push(out.clone());
    }
    if let Some(path) = &a.report {
        write_json(path, &report)?;
        outputs.push(path.clone());
    }
    let status = if within { Status::Success } else { Status::VerificationFailed };
    Ok(Outcome::new(status, &[&a.reference, &a.candidate], outputs))
}
