use serde::{Deserialize, Serialize};

use super::classify::stability_tolerance;
use super::convergence::require_converged;
use super::{Solved, Solver};
use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::sigma::SigmaProfile;

/// One evaluation of the bound-state predicate at constant σ = `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub s: f64,
    /// Lowest eigenvalue at `2L`.
    pub lambda_min: f64,
    /// Lowest eigenvalue at `L`.
    pub lambda_short: f64,
    pub margin: f64,
    /// Whether `lambda_min < threshold − margin`.
    pub below: bool,
}

/// Bracket after a bisection step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepStep {
    pub iteration: usize,
    pub s_lo: f64,
    pub s_hi: f64,
    /// Lowest eigenvalue at the point that produced this bracket (the upper
    /// endpoint for the initial bracket).
    pub lambda_min: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub spec: DomainSpec,
    /// Midpoint of the final bracket; below it no bound state survives.
    pub critical_sigma: f64,
    pub bracket: (f64, f64),
    pub tol_sigma: f64,
    /// Width of the final bracket.
    pub tol_achieved: f64,
    /// Lattice threshold used by the predicate.
    pub threshold: f64,
    pub history: Vec<SweepStep>,
    /// Every evaluation, in the order performed.
    pub evaluations: Vec<Evaluation>,
}

/// Bisects on the constant interaction strength `s` for the point where the
/// lowest eigenvalue leaves the region below the threshold.
///
/// At `bracket.1` a bound state must exist and at `bracket.0` none. Each
/// evaluation solves at `L` and `2L`; the predicate is
/// `λ(2L) < threshold − max(rel·|λ|, |λ(L) − λ(2L)|)` against the lattice
/// threshold. Both the predicate and `λ(2L)` must be monotone in `s` over all
/// evaluations; a violation aborts the sweep.
pub fn sweep_critical_sigma(
    spec: &DomainSpec,
    bracket: (f64, f64),
    tol_sigma: f64,
    solver: &Solver,
) -> Result<SweepResult> {
    let (lo, hi) = bracket;
    if spec.d().is_none() {
        return Err(Error::InvalidConfig(
            "the sweep needs a finite molecule size".into(),
        ));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidConfig(format!(
            "bracket ({lo}, {hi}) must satisfy lo < hi"
        )));
    }
    if !(tol_sigma > 0.0 && tol_sigma.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "sweep tolerance must be positive, got {tol_sigma}"
        )));
    }
    let long_spec = spec.with_l(2.0 * spec.l())?;
    let threshold = spec.grid_threshold();
    let rel = stability_tolerance(solver.eigen.tol);

    let mut sweep = Sweep {
        spec,
        long_spec: &long_spec,
        solver,
        threshold,
        rel,
        warm: None,
        evaluations: Vec::new(),
    };
    let at_hi = sweep.evaluate(hi)?;
    if !at_hi.below {
        return Err(Error::InvalidConfig(format!(
            "no bound state at the upper end s = {hi} (λ = {}, threshold {threshold})",
            at_hi.lambda_min
        )));
    }
    let at_lo = sweep.evaluate(lo)?;
    if at_lo.below {
        return Err(Error::InvalidConfig(format!(
            "bound state persists at the lower end s = {lo} (λ = {}, threshold {threshold})",
            at_lo.lambda_min
        )));
    }

    let (mut lo, mut hi) = (lo, hi);
    let mut history = vec![SweepStep {
        iteration: 0,
        s_lo: lo,
        s_hi: hi,
        lambda_min: at_hi.lambda_min,
        threshold,
    }];
    while hi - lo > tol_sigma {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let e = sweep.evaluate(mid)?;
        if e.below {
            hi = mid;
        } else {
            lo = mid;
        }
        history.push(SweepStep {
            iteration: history.len(),
            s_lo: lo,
            s_hi: hi,
            lambda_min: e.lambda_min,
            threshold,
        });
    }
    Ok(SweepResult {
        spec: spec.clone(),
        critical_sigma: 0.5 * (lo + hi),
        bracket: (lo, hi),
        tol_sigma,
        tol_achieved: hi - lo,
        threshold,
        history,
        evaluations: sweep.evaluations,
    })
}

struct Sweep<'a> {
    spec: &'a DomainSpec,
    long_spec: &'a DomainSpec,
    solver: &'a Solver,
    threshold: f64,
    rel: f64,
    warm: Option<(Solved, Solved)>,
    evaluations: Vec<Evaluation>,
}

impl Sweep<'_> {
    fn evaluate(&mut self, s: f64) -> Result<Evaluation> {
        let profile = SigmaProfile::constant(s)?;
        let (prev_short, prev_long) = match &self.warm {
            Some((a, b)) => (Some(a), Some(b)),
            None => (None, None),
        };
        let short = self.solver.run(self.spec, &profile, prev_short)?;
        require_converged(&short, self.spec)?;
        let long = self
            .solver
            .run(self.long_spec, &profile, prev_long.or(Some(&short)))?;
        require_converged(&long, self.long_spec)?;

        let lambda_min = long.lowest();
        let lambda_short = short.lowest();
        let margin = (self.rel * lambda_min.abs()).max((lambda_short - lambda_min).abs());
        let e = Evaluation {
            s,
            lambda_min,
            lambda_short,
            margin,
            below: lambda_min < self.threshold - margin,
        };
        self.evaluations.push(e.clone());
        self.warm = Some((short, long));
        self.check_monotone()?;
        Ok(e)
    }

    fn check_monotone(&self) -> Result<()> {
        let mut sorted: Vec<&Evaluation> = self.evaluations.iter().collect();
        sorted.sort_by(|a, b| a.s.total_cmp(&b.s));
        for w in sorted.windows(2) {
            let (a, b) = (w[0], w[1]);
            let slack = self.rel * a.lambda_min.abs().max(b.lambda_min.abs());
            if (a.below && !b.below) || b.lambda_min > a.lambda_min + slack {
                let trace: Vec<String> = sorted
                    .iter()
                    .map(|e| format!("s={} λ={} below={}", e.s, e.lambda_min, e.below))
                    .collect();
                return Err(Error::NonMonotone(format!(
                    "between s = {} and s = {}: {}",
                    a.s,
                    b.s,
                    trace.join("; ")
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::{EigenConfig, Method};

    fn solver() -> Solver {
        Solver::new(EigenConfig::default()).with_method(Method::Dense)
    }

    #[test]
    fn finds_negative_critical_value() {
        let spec = DomainSpec::finite(1.0, 4, 6.0).unwrap();
        let r = sweep_critical_sigma(&spec, (-10.0, 0.0), 0.01, &solver()).unwrap();
        assert!(r.critical_sigma < 0.0 && r.critical_sigma > -10.0);
        assert!(r.tol_achieved <= 0.01);
        assert!(r.bracket.0 < r.critical_sigma && r.critical_sigma < r.bracket.1);
        for w in r.history.windows(2) {
            assert!(w[1].s_lo >= w[0].s_lo && w[1].s_hi <= w[0].s_hi);
        }
        // halving the tolerance nests the bracket
        let finer = sweep_critical_sigma(&spec, (-10.0, 0.0), 0.005, &solver()).unwrap();
        assert!(finer.bracket.0 >= r.bracket.0 && finer.bracket.1 <= r.bracket.1);
    }

    #[test]
    fn rejects_bad_brackets() {
        let spec = DomainSpec::finite(1.0, 4, 6.0).unwrap();
        for b in [(0.0, -10.0), (-10.0, -9.0), (0.0, 1.0)] {
            assert!(matches!(
                sweep_critical_sigma(&spec, b, 0.01, &solver()),
                Err(Error::InvalidConfig(_))
            ));
        }
        let inf = DomainSpec::infinite(0.5, 4.0).unwrap();
        assert!(sweep_critical_sigma(&inf, (-10.0, 0.0), 0.01, &solver()).is_err());
    }
}
