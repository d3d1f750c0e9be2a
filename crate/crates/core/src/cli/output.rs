use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{ConvergenceStudy, SpectralResult, SweepResult};
use crate::error::{Error, Result};

pub(super) fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(BufWriter::new(f))
}

/// Pretty JSON; floats are written as shortest round-trip decimals.
pub(super) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub(super) fn discrete_list(r: &SpectralResult) -> Vec<Value> {
    r.discrete
        .iter()
        .map(|d| json!({ "value": d.value, "stability_drift": d.stability_drift }))
        .collect()
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub(super) fn write_eigenvalue_csv(path: &Path, r: &SpectralResult) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "index,value,residual,converged,class")?;
    for (i, e) in r.eigenvalues.iter().enumerate() {
        let class = if r.refused.contains(&i) {
            "refused"
        } else if r.discrete.iter().any(|d| d.index == i) {
            "discrete"
        } else {
            "artifact"
        };
        writeln!(
            w,
            "{i},{},{},{},{class}",
            num(e.value),
            num(e.residual),
            e.converged
        )?;
    }
    w.flush()?;
    Ok(())
}

pub(super) fn write_trace_csv(path: &Path, r: &SweepResult) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "iteration,s_lo,s_hi,lambda_min,threshold")?;
    for s in &r.history {
        writeln!(
            w,
            "{},{},{},{},{}",
            s.iteration,
            num(s.s_lo),
            num(s.s_hi),
            num(s.lambda_min),
            num(s.threshold)
        )?;
    }
    w.flush()?;
    Ok(())
}

/// One row per mesh; the truncation check, when present, comes last.
pub(super) fn write_convergence_csv(path: &Path, study: &ConvergenceStudy) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "h,L,lambda_min,observed_order")?;
    for row in study.rows.iter().chain(study.l_check.iter()) {
        let order = row.order.map(num).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{order}",
            num(row.h),
            num(row.l),
            num(row.lambda_min)
        )?;
    }
    w.flush()?;
    Ok(())
}
