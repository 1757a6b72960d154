//! Report emission: provenance blocks, JSON files, node CSVs and the
//! human-readable solve summary.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ellvar_core::{FieldPair, Grid, SolveResult};
use serde_json::{json, Map, Value};

use crate::pipeline::Prepared;
use crate::CliError;

pub fn provenance(prep: &Prepared) -> Value {
    json!({
        "config_sha256": prep.config_hash,
        "seed": prep.seed,
        "grid": {
            "dim": prep.grid.dim(),
            "nodes": prep.grid.nodes(),
            "lower": prep.grid.lower(),
            "upper": prep.grid.upper(),
        },
        "version": env!("CARGO_PKG_VERSION"),
    })
}

/// Serializes `value` (an object) with a `provenance` entry appended.
pub fn with_provenance(value: impl serde::Serialize, prep: &Prepared) -> Value {
    let mut map = match serde_json::to_value(value).expect("report types serialize") {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("value".into(), other);
            m
        }
    };
    map.insert("provenance".into(), provenance(prep));
    Value::Object(map)
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write_json(dir: &Path, name: &str, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    text.push('\n');
    write_text(dir, name, &text)
}

/// One row per node: coordinates, `u`, `v`.
pub fn fields_csv(grid: &Grid, z: &FieldPair) -> String {
    let mut out = String::new();
    let axes: Vec<String> = (1..=grid.dim()).map(|k| format!("x{k}")).collect();
    let _ = writeln!(out, "{},u,v", axes.join(","));
    for i in 0..grid.len() {
        for x in grid.coords(i) {
            let _ = write!(out, "{x:?},");
        }
        let _ = writeln!(out, "{:?},{:?}", z.u[i], z.v[i]);
    }
    out
}

pub fn summary_table(
    results: &[&SolveResult],
    radius: f64,
    alpha_lm: f64,
    verified: bool,
) -> String {
    let mut out = String::new();
    if !verified {
        out.push_str("*** hypotheses unverified ***\n");
    }
    let _ = writeln!(
        out,
        "ball radius t_lm = {radius:.6e}, sphere level alpha_lm = {alpha_lm:.6e}"
    );
    let _ = writeln!(
        out,
        "{:<16} {:>14} {:>11} {:>11} {:>12} {:>6} {:>10} {:<18}",
        "solution", "energy", "residual", "res(H^-1)", "norm", "iters", "converged", "status"
    );
    for r in results {
        let kind = serde_json::to_value(r.kind).expect("kind serializes");
        let status = serde_json::to_value(r.status).expect("status serializes");
        let _ = writeln!(
            out,
            "{:<16} {:>14.6e} {:>11.3e} {:>11.3e} {:>12.6e} {:>6} {:>10} {:<18}",
            kind.as_str().unwrap_or(""),
            r.energy,
            r.residual,
            r.residual_h_minus1,
            r.norm,
            r.iterations,
            r.converged,
            status.as_str().unwrap_or("")
        );
    }
    out
}
