//! Output formats. Trajectories go out as CSV with 17 significant digits
//! so every value round-trips exactly; reports and point diagnostics go
//! out as JSON with a fixed key order. Files are written atomically.

use std::io::Write;
use std::path::Path;

use firstint_core::brackets::InvolutionMatrix;
use firstint_core::constructor::FieldSample;
use firstint_core::flow::{ConservationReport, Trajectory};

use crate::Failure;

/// Write through a temp file in the destination directory so readers never
/// observe a half-written file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(parent) if !parent.as_os_str().is_empty() => parent,
        _ => Path::new("."),
    };
    let attempt = || -> std::io::Result<()> {
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(contents.as_bytes())?;
        tmp.persist(path).map_err(|e| e.error)?;
        Ok(())
    };
    attempt().map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let dim = traj.states.first().map_or(0, Vec::len);
    let n = dim / 2;
    let m = traj.integral_values.first().map_or(0, Vec::len);
    let mut out = String::from("t");
    for k in 1..=n {
        out.push_str(&format!(",x{k}"));
    }
    for k in 1..=n {
        out.push_str(&format!(",y{k}"));
    }
    for k in 1..=m {
        out.push_str(&format!(",f{k}"));
    }
    out.push('\n');
    for i in 0..traj.times.len() {
        out.push_str(&num(traj.times[i]));
        for v in &traj.states[i] {
            out.push(',');
            out.push_str(&num(*v));
        }
        for v in &traj.integral_values[i] {
            out.push(',');
            out.push_str(&num(*v));
        }
        out.push('\n');
    }
    out
}

pub fn report_json(report: &ConservationReport) -> String {
    // key order is part of the format: termination, steps, rejected, integrals
    let mut out = String::from("{\n");
    out.push_str(&format!("  \"termination\": \"{}\",\n", report.termination.label()));
    out.push_str(&format!("  \"steps\": {},\n", report.steps));
    out.push_str(&format!("  \"rejected\": {},\n", report.rejected));
    out.push_str("  \"integrals\": [\n");
    for (i, drift) in report.integrals.iter().enumerate() {
        out.push_str(&format!(
            "    {{\"name\": \"{}\", \"initial\": {}, \"max_abs_drift\": {}, \
             \"max_rel_drift\": {}}}{}\n",
            drift.name,
            num(drift.initial),
            num(drift.max_abs_drift),
            num(drift.max_rel_drift),
            if i + 1 < report.integrals.len() { "," } else { "" }
        ));
    }
    out.push_str("  ]\n}\n");
    out
}

fn vector_json(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| num(*x)).collect();
    format!("[{}]", parts.join(", "))
}

pub fn sample_json(sample: &FieldSample) -> String {
    let discrepancy = match sample.backend_discrepancy {
        Some(d) => num(d),
        None => "null".to_string(),
    };
    format!(
        "{{\n  \"point\": {},\n  \"velocity\": {},\n  \"case\": \"{}\",\n  \
         \"s_zero\": {},\n  \"s_zero_scale\": {},\n  \"s_n\": {},\n  \
         \"correction_residual\": {},\n  \"backend_discrepancy\": {},\n  \
         \"backend\": \"{}\"\n}}\n",
        vector_json(&sample.point),
        vector_json(&sample.velocity),
        sample.case.label(),
        num(sample.s_zero),
        num(sample.s_zero_scale),
        num(sample.s_n),
        num(sample.correction_residual),
        discrepancy,
        sample.backend_used.label(),
    )
}

pub fn brackets_json(
    point: &[f64],
    rank: usize,
    matrix: &InvolutionMatrix,
    s_zero: f64,
    s_n: f64,
) -> String {
    let n = matrix.n();
    let rows: Vec<String> = (0..n)
        .map(|i| {
            let cells: Vec<String> = (0..n).map(|j| num(matrix.get(i, j))).collect();
            format!("    [{}]", cells.join(", "))
        })
        .collect();
    format!(
        "{{\n  \"point\": {},\n  \"independence_rank\": {},\n  \"involution\": [\n{}\n  ],\n  \
         \"s_zero\": {},\n  \"s_n\": {}\n}}\n",
        vector_json(point),
        rank,
        rows.join(",\n"),
        num(s_zero),
        num(s_n),
    )
}
