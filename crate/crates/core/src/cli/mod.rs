//! Command-line front end: `solve`, `sweep`, `converge` and `verify`.

mod config;
mod output;

pub use config::{ConvergeConfig, DomainConfig, Overrides, RunConfig, SweepConfig};

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::analysis::{
    check_ground_state_bounds, classify, convergence_study, extrapolate, sweep_critical_sigma,
    Solved, Solver,
};
use crate::assembly::assemble;
use crate::domain::{build_grid, DomainSpec, MoleculeSize};
use crate::eigen::Method;
use crate::error::{Error, Result};
use crate::sigma::SigmaProfile;
use crate::verify::{run_all, Fidelity};

/// Largest grid on which `--oracle` runs the dense solver.
pub const ORACLE_LIMIT: usize = 2000;

#[derive(Debug, Parser)]
#[command(
    name = "halfline",
    version,
    about = "Spectra of two particles on the half-line with boundary interactions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Lowest eigenvalues at L and 2L, classified against the threshold.
    Solve(RunArgs),
    /// Bisection for the critical constant repulsion.
    Sweep(RunArgs),
    /// Mesh refinement study with Richardson extrapolation.
    Converge(RunArgs),
    /// The acceptance checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON run configuration; defaults apply to missing fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also run the dense solver and report the disagreement (solve only).
    #[arg(long)]
    oracle: bool,
    /// Row partitions of the sparse product.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Molecule size; `inf` removes the binding potential.
    #[arg(long, allow_hyphen_values = true)]
    d: Option<String>,
    /// Truncation length.
    #[arg(long = "L", allow_negative_numbers = true)]
    l: Option<f64>,
    /// Mesh intervals across the strip.
    #[arg(long)]
    k: Option<usize>,
    /// Mesh size.
    #[arg(long, allow_negative_numbers = true)]
    h: Option<f64>,
    /// Constant interaction profile.
    #[arg(long = "sigma-const", allow_negative_numbers = true)]
    sigma_const: Option<f64>,
    /// Number of eigenpairs.
    #[arg(long)]
    nev: Option<usize>,
    /// Write the matrices at L as A.mtx and B.mtx (solve only).
    #[arg(long)]
    export_matrices: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "quick")]
    fidelity: FidelityArg,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FidelityArg {
    Quick,
    Full,
}

/// Exit code for an error: 2 invalid input, 3 non-convergence, 4 analysis
/// precondition.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidConfig(_)
        | Error::Domain(_)
        | Error::Dimension { .. }
        | Error::TruncationInsideCorner { .. }
        | Error::TooLarge { .. }
        | Error::Io(_) => 2,
        Error::NotConverged(_) | Error::Breakdown(_) => 3,
        Error::Precondition(_)
        | Error::NoAsymptoticRegime(_)
        | Error::NonMonotone(_)
        | Error::Quadrature(_) => 4,
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let start = Instant::now();
    let (out, outcome) = match cli.command {
        Command::Verify(v) => (v.out.clone(), cmd_verify(&v)),
        Command::Solve(a) => (
            a.out.clone(),
            with_config(&a).and_then(|c| cmd_solve(&c, &a)),
        ),
        Command::Sweep(a) => (
            a.out.clone(),
            with_config(&a).and_then(|c| cmd_sweep(&c, &a)),
        ),
        Command::Converge(a) => (
            a.out.clone(),
            with_config(&a).and_then(|c| cmd_converge(&c, &a)),
        ),
    };
    match outcome {
        Ok(code) => {
            let timing = json!({ "wall_seconds": start.elapsed().as_secs_f64() });
            if let Err(e) = output::write_json(&out.join("timing.json"), &timing) {
                eprintln!("error: {e}");
                return exit_code(&e);
            }
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn with_config(a: &RunArgs) -> Result<RunConfig> {
    let mut cfg = match &a.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    let d = match a.d.as_deref() {
        None => None,
        Some("inf" | "infinite" | "none") => Some(None),
        Some(s) => Some(Some(s.parse::<f64>().map_err(|_| {
            Error::InvalidConfig(format!("--d expects a number or inf, got {s}"))
        })?)),
    };
    cfg.apply(&Overrides {
        d,
        l: a.l,
        k: a.k,
        h: a.h,
        sigma_const: a.sigma_const,
        seed: a.seed,
        threads: a.threads,
        nev: a.nev,
    });
    cfg.validate()?;
    std::fs::create_dir_all(&a.out)?;
    Ok(cfg)
}

fn solver_for(cfg: &RunConfig) -> Solver {
    Solver::new(cfg.eigen.clone()).with_partitions(cfg.threads)
}

fn metadata(cfg: &RunConfig, command: &str, converged: bool) -> Value {
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "seed": cfg.eigen.seed,
        "threads": cfg.threads,
        "converged": converged,
    })
}

fn cmd_solve(cfg: &RunConfig, a: &RunArgs) -> Result<i32> {
    let spec = cfg.spec()?;
    let long_spec = spec.with_l(2.0 * spec.l())?;
    let profile = cfg.profile()?;
    if a.oracle {
        let n = build_grid(&long_spec)?.len();
        if n > ORACLE_LIMIT {
            return Err(Error::InvalidConfig(format!(
                "--oracle needs at most {ORACLE_LIMIT} unknowns, the 2L grid has {n}"
            )));
        }
    }
    let solver = solver_for(cfg);
    // Without binding potential the bounds are checked against a Richardson
    // limit from the meshes 4h, 2h, h; the coarse solves also warm-start h.
    let mut coarse = Vec::new();
    if spec.size() == MoleculeSize::Infinite {
        let mut prev = None;
        for f in [4.0, 2.0] {
            let Ok(cs) = DomainSpec::infinite(f * spec.h(), spec.l()) else {
                break;
            };
            let solved = solver.run(&cs, &profile, prev.as_ref())?;
            coarse.push((cs.h(), solved.lowest(), solved.pairs.converged[0]));
            prev = Some(solved);
        }
        if coarse.len() < 2 {
            coarse.clear();
        }
        let short = solver.run(&spec, &profile, prev.as_ref())?;
        coarse.push((spec.h(), short.lowest(), short.pairs.converged[0]));
        return finish_solve(cfg, a, spec, long_spec, profile, solver, short, coarse);
    }
    let short = solver.run(&spec, &profile, None)?;
    finish_solve(cfg, a, spec, long_spec, profile, solver, short, coarse)
}

#[allow(clippy::too_many_arguments)]
fn finish_solve(
    cfg: &RunConfig,
    a: &RunArgs,
    spec: DomainSpec,
    long_spec: DomainSpec,
    profile: SigmaProfile,
    solver: Solver,
    short: Solved,
    coarse: Vec<(f64, f64, bool)>,
) -> Result<i32> {
    let long = solver.run(&long_spec, &profile, Some(&short))?;
    if a.export_matrices {
        let op = assemble(&short.geometry, &profile)?;
        let mut a_out = output::create(&a.out.join("A.mtx"))?;
        let mut b_out = output::create(&a.out.join("B.mtx"))?;
        op.export(&mut a_out, &mut b_out)?;
    }
    let result = classify(
        &spec,
        &profile.describe(),
        &short.pairs,
        std::slice::from_ref(&long.pairs),
        cfg.eigen.tol,
    )?;
    let mut result = result;
    if coarse.len() == 3 && coarse.iter().all(|c| c.2) {
        let points: Vec<(f64, f64)> = coarse.iter().map(|c| (c.0, c.1)).collect();
        if let Ok(e) = extrapolate(&points) {
            result = result.with_extrapolation(e);
        }
    }
    let bounds = if spec.size() == MoleculeSize::Infinite {
        check_ground_state_bounds(&profile, &result)
            .ok()
            .map(|b| serde_json::to_value(b).expect("bounds serialize"))
    } else {
        None
    };

    let oracle = if a.oracle {
        let dense = solver.clone().with_method(Method::Dense);
        let ds = dense.run(&spec, &profile, None)?;
        let dl = dense.run(&long_spec, &profile, None)?;
        let dense_result = classify(
            &spec,
            &profile.describe(),
            &ds.pairs,
            std::slice::from_ref(&dl.pairs),
            cfg.eigen.tol,
        )?;
        let disagreement = long
            .pairs
            .values
            .iter()
            .zip(&dl.pairs.values)
            .map(|(x, y)| (x - y).abs() / y.abs().max(1.0))
            .fold(0.0, f64::max);
        println!("dense oracle: max relative disagreement {disagreement:e}");
        Some(json!({
            "eigenvalues": dense_result.eigenvalues,
            "discrete": output::discrete_list(&dense_result),
            "max_rel_disagreement": disagreement,
        }))
    } else {
        None
    };

    let converged = result.all_converged();
    let mut doc = json!({
        "config": cfg,
        "profile": result.profile,
        "threshold": result.threshold,
        "grid_threshold": result.grid_threshold,
        "l_sequence": result.l_sequence,
        "eigenvalues": result.eigenvalues,
        "discrete": output::discrete_list(&result),
        "artifacts": result.artifacts,
        "refused": result.refused,
        "ground_energy": result.ground_energy,
        "extrapolation": result.extrapolation,
        "bounds": bounds,
        "metadata": metadata(cfg, "solve", converged),
    });
    if let Some(o) = oracle {
        doc["oracle"] = o;
    }
    output::write_json(&a.out.join("result.json"), &doc)?;
    output::write_eigenvalue_csv(&a.out.join("eigenvalues.csv"), &result)?;

    println!(
        "threshold {:.10}, lattice threshold {:.10}",
        result.threshold, result.grid_threshold
    );
    for e in &result.discrete {
        println!(
            "discrete eigenvalue {:.12} (drift {:.2e})",
            e.value, e.stability_drift
        );
    }
    if result.discrete.is_empty() {
        println!("no discrete eigenvalue found");
    }
    if let Some(e) = &result.extrapolation {
        println!(
            "extrapolated ground energy {:.10} (error estimate {:.2e})",
            e.limit, e.error_estimate
        );
    }
    if let Some(b) = &bounds {
        println!(
            "ground-state bounds: {}",
            b["status"].as_str().unwrap_or("?")
        );
    }
    if converged {
        Ok(0)
    } else {
        eprintln!(
            "solver did not converge for eigenpairs {:?}; partial results written",
            result.refused
        );
        Ok(3)
    }
}

fn cmd_sweep(cfg: &RunConfig, a: &RunArgs) -> Result<i32> {
    let spec = cfg.spec()?;
    let r = sweep_critical_sigma(
        &spec,
        cfg.sweep.bracket,
        cfg.sweep.tol_sigma,
        &solver_for(cfg),
    )?;
    output::write_trace_csv(&a.out.join("trace.csv"), &r)?;
    let doc = json!({
        "config": cfg,
        "critical_sigma": r.critical_sigma,
        "bracket": r.bracket,
        "tol_sigma": r.tol_sigma,
        "tol_achieved": r.tol_achieved,
        "threshold": spec.threshold(),
        "grid_threshold": r.threshold,
        "history": r.history,
        "evaluations": r.evaluations,
        "metadata": metadata(cfg, "sweep", true),
    });
    output::write_json(&a.out.join("result.json"), &doc)?;
    println!(
        "critical sigma {:.6} (bracket {:.6} .. {:.6})",
        r.critical_sigma, r.bracket.0, r.bracket.1
    );
    Ok(0)
}

fn cmd_converge(cfg: &RunConfig, a: &RunArgs) -> Result<i32> {
    let specs = cfg.convergence_specs()?;
    let profile = cfg.profile()?;
    let study = convergence_study(&specs, &profile, &solver_for(cfg), cfg.converge.check_l)?;
    output::write_convergence_csv(&a.out.join("convergence.csv"), &study)?;
    let threshold = specs[0].threshold();
    let e = study.extrapolation;
    let doc = json!({
        "config": cfg,
        "profile": study.profile,
        "threshold": threshold,
        "rows": study.rows,
        "l_check": study.l_check,
        "l_drift": study.l_drift(),
        "extrapolation": {
            "limit": e.limit,
            "order": if e.order.is_finite() { json!(e.order) } else { json!("infinite") },
            "error_estimate": e.error_estimate,
        },
        "below_threshold": specs[0].d().map(|_| e.limit < threshold),
        "metadata": metadata(cfg, "converge", true),
    });
    output::write_json(&a.out.join("result.json"), &doc)?;
    println!(
        "extrapolated {:.10} (order {:.3}, error estimate {:.2e})",
        e.limit, e.order, e.error_estimate
    );
    Ok(0)
}

fn cmd_verify(v: &VerifyArgs) -> Result<i32> {
    std::fs::create_dir_all(&v.out)?;
    let fidelity = match v.fidelity {
        FidelityArg::Quick => Fidelity::Quick,
        FidelityArg::Full => Fidelity::Full,
    };
    let report = run_all(fidelity, v.threads.max(1), |o| {
        println!("{}", o.line());
        for d in &o.details {
            println!("    {d}");
        }
    });
    output::write_json(&v.out.join("verify.json"), &report)?;
    if report.passed() {
        Ok(0)
    } else {
        let names: Vec<&str> = report.failures().iter().map(|o| o.name.as_str()).collect();
        eprintln!("failed: {}", names.join(", "));
        Ok(1)
    }
}
