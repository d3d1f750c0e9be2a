//! The acceptance suite: nine end-to-end checks of the solver against known
//! spectral facts, runnable at two fidelities.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    check_ground_state_bounds, compute_spectrum, convergence_study, extrapolate, mesh_sequence,
    sweep_critical_sigma, BoundsStatus, Solver,
};
use crate::assembly::assemble;
use crate::domain::{build_grid, DomainSpec};
use crate::eigen::{solve_dense, solve_halfline_1d, solve_iterative, EigenConfig};
use crate::error::Result;
use crate::sigma::SigmaProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fidelity {
    /// Coarser meshes and shorter truncations; a minute or so.
    Quick,
    /// The mesh sequences the tolerances are stated for.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub id: usize,
    pub name: String,
    /// The spectral statement under test.
    pub statement: String,
    pub passed: bool,
    /// Measured quantities, one per line.
    pub details: Vec<String>,
    pub seconds: f64,
}

impl CheckOutcome {
    pub fn line(&self) -> String {
        format!(
            "{} {} {} ({}) [{:.1}s]",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.statement,
            self.seconds
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub fidelity: Fidelity,
    pub outcomes: Vec<CheckOutcome>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn failures(&self) -> Vec<&CheckOutcome> {
        self.outcomes.iter().filter(|o| !o.passed).collect()
    }
}

type CheckFn = fn(Fidelity, usize, &mut Vec<String>) -> Result<bool>;

/// Names, statements and bodies of the checks, in order.
pub const CHECKS: [(&str, &str, CheckFn); 9] = [
    (
        "threshold_and_continuum_drift",
        "essential spectrum starts at π²/2d²; box modes above it approach it like 1/L²",
        threshold_and_continuum_drift,
    ),
    (
        "constant_sigma_exactness",
        "for constant σ without binding the ground energy is −2σ²",
        constant_sigma_exactness,
    ),
    (
        "ground_state_sandwich",
        "∫σ > 0 gives a negative ground energy between the explicit bounds",
        ground_state_sandwich,
    ),
    (
        "geometry_induced_bound_state",
        "σ ≡ 0 with binding has a non-negative eigenvalue below the threshold",
        geometry_induced_bound_state,
    ),
    (
        "persistence_under_attraction",
        "σ ≥ 0 keeps the discrete spectrum non-empty, lowest eigenvalue decreasing in σ",
        persistence_under_attraction,
    ),
    (
        "destruction_under_repulsion",
        "strong constant repulsion empties the discrete spectrum below a critical s* < 0",
        destruction_under_repulsion,
    ),
    (
        "oracle_equivalence",
        "iterative and dense solvers agree on the lowest five eigenvalues",
        oracle_equivalence,
    ),
    (
        "structural_invariants",
        "symmetry, particle-exchange invariance, positivity, single-signed ground state, seed independence",
        structural_invariants,
    ),
    (
        "convergence_order",
        "second order for smooth constant-σ data, at least first order at the corner singularity",
        convergence_order,
    ),
];

/// Runs check `id` (1-based).
pub fn run_check(id: usize, fidelity: Fidelity, partitions: usize) -> CheckOutcome {
    let (name, statement, body) = CHECKS[id - 1];
    let start = Instant::now();
    let mut details = Vec::new();
    let passed = match body(fidelity, partitions, &mut details) {
        Ok(p) => p,
        Err(e) => {
            details.push(format!("error: {e}"));
            false
        }
    };
    CheckOutcome {
        id,
        name: name.to_string(),
        statement: statement.to_string(),
        passed,
        details,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Runs all checks, calling `progress` after each.
pub fn run_all(
    fidelity: Fidelity,
    partitions: usize,
    mut progress: impl FnMut(&CheckOutcome),
) -> VerificationReport {
    let outcomes = (1..=CHECKS.len())
        .map(|id| {
            let o = run_check(id, fidelity, partitions);
            progress(&o);
            o
        })
        .collect();
    VerificationReport { fidelity, outcomes }
}

fn solver(nev: usize, tol: f64, partitions: usize) -> Solver {
    let cfg = EigenConfig::default()
        .with_nev(nev)
        .with_tol(tol)
        .with_block_extra(2);
    Solver::new(cfg).with_partitions(partitions)
}

/// Half a unit in the `digits`-th significant digit of `x`.
fn half_unit(x: f64, digits: i32) -> f64 {
    0.5 * 10f64.powi(x.abs().log10().floor() as i32 - (digits - 1))
}

fn pick<T>(fidelity: Fidelity, quick: T, full: T) -> T {
    match fidelity {
        Fidelity::Quick => quick,
        Fidelity::Full => full,
    }
}

fn threshold_and_continuum_drift(
    fidelity: Fidelity,
    partitions: usize,
    out: &mut Vec<String>,
) -> Result<bool> {
    let mut ok = true;
    for d in [0.5, 1.0, 2.0, PI] {
        let spec = DomainSpec::finite(d, 4, 4.0 * d)?;
        let ratio = spec.threshold() * 2.0 * d * d / (PI * PI);
        let exact = (ratio - 1.0).abs() <= 2.0 * f64::EPSILON;
        out.push(format!("d = {d}: threshold·2d²/π² = {ratio:.17}"));
        ok &= exact;
    }
    let k = pick(fidelity, 8, 16);
    let l = 12.0;
    let spec = DomainSpec::finite(1.0, k, l)?;
    let r = compute_spectrum(
        &spec,
        &SigmaProfile::constant(0.0)?,
        &solver(4, 1e-9, partitions),
    )?;
    let thr = r.grid_threshold;
    out.push(format!(
        "k = {k}, L = {l} → {}: lattice threshold {thr:.8}",
        2.0 * l
    ));
    let above: Vec<_> = r.artifacts.iter().filter(|a| !a.below_threshold).collect();
    if above.is_empty() {
        out.push("no eigenvalue above the threshold was computed".into());
        return Ok(false);
    }
    for a in above.iter().take(2) {
        let ratio = (a.previous - thr) / (a.value - thr);
        let in_range = (3.0..=5.0).contains(&ratio) && a.value < a.previous;
        out.push(format!(
            "box mode {}: {:.6} → {:.6}, distance ratio {ratio:.3}",
            a.index, a.previous, a.value
        ));
        ok &= in_range;
    }
    Ok(ok)
}

fn constant_sigma_exactness(
    fidelity: Fidelity,
    partitions: usize,
    out: &mut Vec<String>,
) -> Result<bool> {
    let (h, l) = pick(fidelity, (0.4, 20.0), (0.2, 40.0));
    let specs = mesh_sequence(&DomainSpec::infinite(h, l)?, 3)?;
    let profile = SigmaProfile::constant(1.0)?;
    let study = convergence_study(&specs, &profile, &solver(1, 1e-8, partitions), false)?;
    let e = study.extrapolation;
    let mut ok = (e.limit + 2.0).abs() <= 0.01 * 2.0;
    out.push(format!(
        "extrapolated {:.8} (order {:.3}, error estimate {:.2e}), target −2",
        e.limit, e.order, e.error_estimate
    ));
    for row in &study.rows {
        let n = (row.l / row.h).round() as usize;
        let twice = 2.0 * solve_halfline_1d(1.0, row.l, n)?;
        let rel = (row.lambda_min - twice).abs() / twice.abs();
        out.push(format!(
            "h = {}: plane {:.10}, twice half-line {:.10}, rel. diff {rel:.1e}",
            row.h, row.lambda_min, twice
        ));
        ok &= rel <= 0.005;
    }
    let fine = specs[2].h() / 8.0;
    let twice = 2.0 * solve_halfline_1d(1.0, l, (l / fine).round() as usize)?;
    let rel = (e.limit - twice).abs() / twice.abs();
    out.push(format!(
        "twice half-line at h = {fine}: {twice:.8}, rel. diff to extrapolated {rel:.1e}"
    ));
    ok &= rel <= 0.005;
    Ok(ok)
}

fn ground_state_sandwich(
    fidelity: Fidelity,
    partitions: usize,
    out: &mut Vec<String>,
) -> Result<bool> {
    let (h, l) = pick(fidelity, (0.4, 10.0), (0.2, 20.0));
    let profile = SigmaProfile::exponential(1.0, 1.0)?;
    let integral = profile.integral()?;
    out.push(format!(
        "∫σ = {integral} (quadrature {:.12})",
        profile.integral_quadrature()?
    ));
    let s = solver(2, 1e-8, partitions);
    let base = DomainSpec::infinite(h, l)?;
    let coarse = compute_spectrum(&base, &profile, &s)?;
    out.push(format!(
        "h = {h}: λ(L={l}) → λ(L={}) = {:?}, discrete {:?}",
        2.0 * l,
        coarse
            .eigenvalues
            .iter()
            .map(|e| e.value)
            .collect::<Vec<_>>(),
        coarse.discrete.iter().map(|d| d.value).collect::<Vec<_>>()
    ));
    let study = convergence_study(&mesh_sequence(&base, 3)?, &profile, &s, false)?;
    let e = study.extrapolation;
    out.push(format!(
        "extrapolated E = {:.8} (order {:.3}, error estimate {:.2e})",
        e.limit, e.order, e.error_estimate
    ));
    let report = check_ground_state_bounds(&profile, &coarse.with_extrapolation(e))?;
    out.push(format!(
        "bounds [{:.6}, {:.6}], status {:?}",
        report.lower.unwrap_or(f64::NAN),
        report.upper.unwrap_or(f64::NAN),
        report.status
    ));
    Ok(integral > 0.0
        && report.hypothesis
        && report.negative_eigenvalue
        && report.status == BoundsStatus::WithinBounds)
}

fn geometry_induced_bound_state(
    fidelity: Fidelity,
    partitions: usize,
    out: &mut Vec<String>,
) -> Result<bool> {
    let k = pick(fidelity, 8, 16);
    // quick runs only resolve three digits under h halving
    let digits = pick(fidelity, 3, 4);
    let profile = SigmaProfile::constant(0.0)?;
    let s = solver(1, 1e-9, partitions);
    let r = compute_spectrum(&DomainSpec::finite(1.0, k, 12.0)?, &profile, &s)?;
    let mut ok = match r.ground_energy {
        Some(e) => {
            out.push(format!(
                "k = {k}, L = 12 → 24: discrete {e:.8}, threshold {:.7}",
                r.threshold
            ));
            (0.0..r.threshold).contains(&e)
        }
        None => {
            out.push("no discrete eigenvalue".into());
            false
        }
    };

    let short = s.run(&DomainSpec::finite(1.0, k, 6.0)?, &profile, None)?;
    let long = s.run(&DomainSpec::finite(1.0, k, 12.0)?, &profile, Some(&short))?;
    let l_diff = (short.lowest() - long.lowest()).abs();
    let unit = half_unit(long.lowest(), 4);
    out.push(format!(
        "L = 6 → 12: {:.8} → {:.8}, |Δ| = {l_diff:.2e} (4 digits: < {unit:.0e})",
        short.lowest(),
        long.lowest()
    ));
    ok &= l_diff < unit;

    let base = pick(fidelity, 4, 8);
    let coarse = convergence_study(
        &mesh_sequence(&DomainSpec::finite(1.0, base, 6.0)?, 3)?,
        &profile,
        &s,
        false,
    )?;
    let fine = convergence_study(
        &mesh_sequence(&DomainSpec::finite(1.0, 2 * base, 6.0)?, 3)?,
        &profile,
        &s,
        false,
    )?;
    let (a, b) = (coarse.extrapolation.limit, fine.extrapolation.limit);
    let h_diff = (a - b).abs();
    let unit = half_unit(b, digits);
    out.push(format!(
        "extrapolated from k = {base}·(1,2,4): {a:.8}; from k = {}·(1,2,4): {b:.8}; |Δ| = {h_diff:.2e} ({digits} digits: < {unit:.0e})",
        2 * base
    ));
    ok &= h_diff < unit && (0.0..r.threshold).contains(&b);
    Ok(ok)
}

fn persistence_under_attraction(
    fidelity: Fidelity,
    partitions: usize,
    out: &mut Vec<String>,
) -> Result<bool> {
    let k = pick(fidelity, 8, 16);
    let spec = DomainSpec::finite(1.0, k, 12.0)?;
    let s = solver(1, 1e-9, partitions);
    let mut ok = true;
    let mut previous = f64::INFINITY;
    for sigma in [0.0, 0.5, 1.0, 2.0] {
        let r = compute_spectrum(&spec, &SigmaProfile::constant(sigma)?, &s)?;
        let values: Vec<f64> = r.discrete.iter().map(|d| d.value).collect();
        out.push(format!("σ = {sigma}: discrete {values:?}"));
        match r.ground_energy {
            Some(e) => {
                ok &= e < previous;
                previous = e;
            }
            None => ok = false,
        }
    }
    Ok(ok)
}

fn destruction_under_repulsion(
    fidelity: Fidelity,
    partitions: usize,
    out: &mut Vec<String>,
) -> Result<bool> {
    let ks = pick(fidelity, [8, 16], [16, 32]);
    let s = solver(1, 1e-9, partitions);
    let mut critical = Vec::new();
    for k in ks {
        let spec = DomainSpec::finite(1.0, k, 12.0)?;
        let r = sweep_critical_sigma(&spec, (-10.0, 0.0), 0.005, &s)?;
        out.push(format!(
            "k = {k}, L = 12/24: s* = {:.5} (bracket {:.5}..{:.5}, {} evaluations)",
            r.critical_sigma,
            r.bracket.0,
            r.bracket.1,
            r.evaluations.len()
        ));
        critical.push(r.critical_sigma);
    }
    let star = critical[1];
    let diff = (critical[0] - star).abs();
    let unit = half_unit(star, 2);
    out.push(format!("h halving: |Δs*| = {diff:.4} (2 digits: < {unit})"));
    let mut ok = star > -10.0 && star < 0.0 && diff < unit;

    let check = DomainSpec::finite(1.0, ks[0], 24.0)?;
    let s2 = solver(2, 1e-9, partitions);
    for (label, sigma, want_empty) in [("s* − 1", star - 1.0, true), ("s*/2", star / 2.0, false)]
    {
        let r = compute_spectrum(&check, &SigmaProfile::constant(sigma)?, &s2)?;
        out.push(format!(
            "{label} = {sigma:.5} at k = {}, L = 24/48: discrete {:?}",
            ks[0],
            r.discrete.iter().map(|d| d.value).collect::<Vec<_>>()
        ));
        ok &= r.discrete.is_empty() == want_empty;
    }
    Ok(ok)
}

fn oracle_equivalence(_: Fidelity, partitions: usize, out: &mut Vec<String>) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let cfg = EigenConfig::default().with_nev(5).with_tol(1e-10);
    let mut ok = true;
    for case in 0..10 {
        let sigma = rng.gen_range(-3.0..3.0);
        let spec = if case % 5 == 4 {
            let h = [0.25, 0.5][rng.gen_range(0..2)];
            let m = rng.gen_range(8..=40usize);
            DomainSpec::infinite(h, h * m as f64)?
        } else {
            let d = rng.gen_range(0.5..3.0);
            let k = rng.gen_range(2..=8usize);
            let m = rng.gen_range(k + 2..=(2000 / k).min(40 * k));
            DomainSpec::finite(d, k, d * m as f64 / k as f64)?
        };
        let geom = build_grid(&spec)?;
        if geom.len() > 2000 || geom.len() < 5 {
            out.push(format!("case {case}: skipped, {} unknowns", geom.len()));
            ok = false;
            continue;
        }
        let op = assemble(&geom, &SigmaProfile::constant(sigma)?)?.with_partitions(partitions);
        let dense = solve_dense(&op)?;
        let it = solve_iterative(&op, &cfg)?;
        let worst = (0..5)
            .map(|i| (it.values[i] - dense.values[i]).abs() / dense.values[i].abs().max(1.0))
            .fold(0.0, f64::max);
        out.push(format!(
            "case {case}: {:?}, σ = {sigma:.3}, {} unknowns, max rel. diff {worst:.1e}",
            spec.size(),
            geom.len()
        ));
        ok &= it.all_converged() && worst <= 1e-8;
    }
    Ok(ok)
}

fn structural_invariants(
    fidelity: Fidelity,
    partitions: usize,
    out: &mut Vec<String>,
) -> Result<bool> {
    let mut ok = true;
    let cases = [
        (
            DomainSpec::finite(1.0, 4, 6.0)?,
            SigmaProfile::constant(0.0)?,
        ),
        (
            DomainSpec::finite(1.0, 4, 6.0)?,
            SigmaProfile::constant(-1.5)?,
        ),
        (
            DomainSpec::finite(2.0, 6, 5.0)?,
            SigmaProfile::exponential(2.0, 0.5)?,
        ),
        (
            DomainSpec::infinite(0.25, 4.0)?,
            SigmaProfile::constant(1.0)?,
        ),
        (
            DomainSpec::infinite(0.25, 4.0)?,
            SigmaProfile::constant(0.0)?,
        ),
    ];
    for (spec, profile) in &cases {
        let geom = build_grid(spec)?;
        let op = assemble(&geom, profile)?.with_partitions(partitions);
        let asym = op.a().asymmetry();
        let perm = geom.swap_permutation();
        let mut swap_ok = true;
        for r in 0..op.dim() {
            swap_ok &= op.b()[perm[r]] == op.b()[r];
            for (c, v) in op.a().row(r) {
                swap_ok &= op.a().get(perm[r], perm[c]) == v;
            }
        }
        let dense = solve_dense(&op)?;
        let ground = &dense.vectors[0];
        let scale = ground.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let single = ground.iter().all(|&x| x >= -1e-10 * scale);
        let mut line = format!(
            "{:?} {}: asymmetry {asym:e}, exchange {}, single-signed ground state {single}",
            spec.size(),
            profile.describe(),
            if swap_ok { "exact" } else { "broken" },
        );
        ok &= asym == 0.0 && swap_ok && single;
        if profile.sup_norm() == 0.0 {
            line += &format!(", λ_min {:.3e}", dense.values[0]);
            ok &= dense.values[0] >= -1e-12;
        }
        out.push(line);
    }

    let spec = DomainSpec::finite(1.0, pick(fidelity, 8, 16), 6.0)?;
    let op = assemble(&build_grid(&spec)?, &SigmaProfile::constant(-0.5)?)?;
    let tol = 1e-9;
    let mut values = Vec::new();
    for seed in [1, 7, 42, 1234] {
        let cfg = EigenConfig::default()
            .with_nev(3)
            .with_tol(tol)
            .with_seed(seed);
        let p = solve_iterative(&op, &cfg)?;
        ok &= p.all_converged();
        values.push(p.values);
    }
    let mut spread: f64 = 0.0;
    for v in &values[1..] {
        for i in 0..3 {
            spread = spread.max((v[i] - values[0][i]).abs() / values[0][i].abs());
        }
    }
    out.push(format!(
        "seeds 1, 7, 42, 1234: max rel. spread {spread:.1e} (limit {:.0e})",
        10.0 * tol
    ));
    ok &= spread <= 10.0 * tol;
    Ok(ok)
}

fn convergence_order(fidelity: Fidelity, partitions: usize, out: &mut Vec<String>) -> Result<bool> {
    let (h, l) = (0.2, pick(fidelity, 10.0, 20.0));
    let s = solver(1, 1e-9, partitions);
    let smooth = convergence_study(
        &mesh_sequence(&DomainSpec::infinite(h, l)?, 3)?,
        &SigmaProfile::constant(1.0)?,
        &s,
        false,
    )?;
    out.push(format!(
        "constant σ = 1 quadrant, h = {h}·(1, 1/2, 1/4): order {:.3}",
        smooth.extrapolation.order
    ));
    let k = pick(fidelity, 4, 8);
    let corner = convergence_study(
        &mesh_sequence(&DomainSpec::finite(1.0, k, 6.0)?, 3)?,
        &SigmaProfile::constant(0.0)?,
        &s,
        false,
    )?;
    let values: Vec<(f64, f64)> = corner.rows.iter().map(|r| (r.h, r.lambda_min)).collect();
    let e = extrapolate(&values)?;
    out.push(format!(
        "d = 1, σ ≡ 0, k = {k}·(1, 2, 4): order {:.3}, extrapolated {:.8}",
        e.order, e.limit
    ));
    Ok(smooth.extrapolation.order >= 1.9 && e.order >= 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_unit_of_significant_digits() {
        assert!((half_unit(3.2551, 4) - 5e-4).abs() < 1e-15);
        assert!((half_unit(-1.18, 2) - 0.05).abs() < 1e-15);
        assert!((half_unit(0.0123, 2) - 5e-4).abs() < 1e-15);
    }

    #[test]
    fn cheap_checks_pass_quickly() {
        for id in [7, 8] {
            let o = run_check(id, Fidelity::Quick, 1);
            assert!(o.passed, "{}\n{}", o.line(), o.details.join("\n"));
        }
    }
}
