//! The five subcommands.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ellvar_core::functional::{energy_gradient, finite_difference_check};
use ellvar_core::grid::random_field;
use ellvar_core::solvers::{
    endpoint_beyond_sphere, minimize_on_ball, mountain_pass, seed_negative,
};
use ellvar_core::thresholds::sphere_lower_bound_check;
use ellvar_core::{FieldPair, Grid, SolveResult, SolverOptions};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{RunConfig, SweepParameter};
use crate::pipeline::{prepare, Prepared, Tuned};
use crate::report::{fields_csv, summary_table, with_provenance, write_json, write_text};
use crate::{CliError, Command, RunOptions};

/// Largest admissible relative error of the gradient check.
pub const GRADCHECK_TOL: f64 = 1e-5;

pub fn dispatch(command: Command, cfg: RunConfig, opts: &RunOptions) -> Result<(), CliError> {
    let out = opts
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&cfg.out_dir));
    let prep = prepare(cfg, opts.seed)?;
    match command {
        Command::CheckPhi => check_phi(&prep, &out),
        Command::Thresholds => thresholds(&prep, &out),
        Command::Solve => solve(&prep, &out, opts.force),
        Command::Sweep => sweep(&prep, &out),
        Command::Gradcheck => gradcheck(&prep, &out, opts.corrupt_gradient),
    }
}

fn check_phi(prep: &Prepared, out: &Path) -> Result<(), CliError> {
    for (n, r) in prep.phi_reports.iter().enumerate() {
        let name = format!("phi{}.json", n + 1);
        write_json(out, &name, &with_provenance(r, prep))?;
        println!(
            "phi{}: family {} rho0 = {:.6e} rho1 = {:.6e} (phi1) {} (phi1)' {} (phi2) {} (phi3) {} (phi4) {}",
            n + 1,
            r.family,
            r.rho0,
            r.rho1,
            pass(r.pass_phi1),
            pass(r.pass_phi1_prime),
            pass(r.pass_phi2),
            pass(r.pass_phi3),
            pass(r.pass_phi4)
        );
        for w in &r.witnesses {
            println!(
                "  witness {}: s = {:e}, violation = {:e}",
                w.condition, w.s, w.violation
            );
        }
    }
    Ok(())
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

fn thresholds(prep: &Prepared, out: &Path) -> Result<(), CliError> {
    prep.gate()?;
    let sc = prep.sobolev()?;
    let tuned = prep.tune(&sc, None, None)?;
    let sphere = sphere_lower_bound_check(
        &tuned.problem,
        &prep.grid,
        &tuned.report,
        prep.cfg.sphere_samples,
        prep.seed,
    )?;
    let mut value = with_provenance(&tuned.report, prep);
    let map = value.as_object_mut().expect("report is an object");
    map.insert("lambda".into(), json!(tuned.problem.lambda));
    map.insert("mu".into(), json!(tuned.problem.mu));
    map.insert("S_restarts_used".into(), json!(sc.restarts_used));
    map.insert("S_converged".into(), json!(sc.converged));
    map.insert(
        "h1_l2".into(),
        json!(prep.grid.norm_lp(&tuned.problem.weights.h1, 2.0)),
    );
    map.insert(
        "h2_l2".into(),
        json!(prep.grid.norm_lp(&tuned.problem.weights.h2, 2.0)),
    );
    map.insert("a_norm".into(), json!(prep.hypotheses.a_norm));
    map.insert("c_norm".into(), json!(prep.hypotheses.c_norm));
    map.insert(
        "integrability_exponent".into(),
        json!(prep.hypotheses.integrability_exponent),
    );
    map.insert(
        "phi_conditions_failed".into(),
        json!(prep.failed_conditions()),
    );
    map.insert(
        "sphere_check".into(),
        serde_json::to_value(&sphere).expect("sphere check serializes"),
    );
    write_json(out, "thresholds.json", &value)?;

    let r = &tuned.report;
    println!("S2 = {:.6e}, S_ab = {:.6e}", r.inputs.s2, r.inputs.s_ab);
    println!(
        "lambda = {:.6e}, mu = {:.6e}, Lambda0 = {:.6e}",
        tuned.problem.lambda, tuned.problem.mu, r.lambda0
    );
    println!(
        "t_lm = {:.6e}, m_lm = {:.6e}, alpha_lm = {:.6e}, |h|^2 = {:.6e}",
        r.t_lm, r.m_lm, r.alpha_lm, r.h_norm_sq
    );
    println!(
        "admissible_lm = {}, admissible_h = {}",
        r.admissible_lm, r.admissible_h
    );
    match &sphere.skipped {
        Some(why) => println!("sphere check skipped: {why}"),
        None => println!(
            "sphere check: {} violations in {} samples",
            sphere.violations, sphere.samples
        ),
    }
    Ok(())
}

struct Pair {
    ball: Result<SolveResult, CliError>,
    mountain: Result<SolveResult, CliError>,
}

impl Pair {
    fn run(tuned: &Tuned, grid: &Grid, opts: &SolverOptions) -> Pair {
        let (ps, radius) = (&tuned.problem, tuned.report.t_lm);
        let ball = seed_negative(ps, grid, radius)
            .and_then(|z0| minimize_on_ball(ps, grid, radius, &z0, opts))
            .map_err(CliError::from);
        let mountain = endpoint_beyond_sphere(ps, grid, radius)
            .and_then(|end| mountain_pass(ps, grid, radius, &end, opts))
            .map_err(CliError::from);
        Pair { ball, mountain }
    }

    /// Both converged, nontrivial, with energies of opposite signs.
    fn success(&self) -> bool {
        match (&self.ball, &self.mountain) {
            (Ok(b), Ok(m)) => {
                b.converged
                    && m.converged
                    && b.energy < 0.0
                    && m.energy > 0.0
                    && b.classification.nontrivial
                    && m.classification.nontrivial
            }
            _ => false,
        }
    }

    fn diagnostics(&self) -> String {
        let mut msg = String::new();
        for (name, r) in [
            ("ball minimizer", &self.ball),
            ("mountain pass", &self.mountain),
        ] {
            match r {
                Err(e) => {
                    let _ = write!(msg, "{name}: {e}; ");
                }
                Ok(s) => {
                    let status = serde_json::to_value(s.status).expect("status serializes");
                    let _ = write!(
                        msg,
                        "{name}: status {}, energy {:e}, residual {:e}; ",
                        status.as_str().unwrap_or(""),
                        s.energy,
                        s.residual
                    );
                }
            }
        }
        msg.trim_end_matches("; ").to_string()
    }
}

fn solve(prep: &Prepared, out: &Path, force: bool) -> Result<(), CliError> {
    prep.gate()?;
    let sc = prep.sobolev()?;
    let tuned = prep.tune(&sc, None, None)?;
    let mut reasons = prep.failed_conditions();
    if !tuned.report.admissible_lm {
        reasons.push(format!(
            "lambda + mu = {:e} is not below Lambda0 = {:e}",
            tuned.report.lambda_plus_mu, tuned.report.lambda0
        ));
    }
    if !tuned.report.admissible_h {
        reasons.push(format!(
            "|h|^2 = {:e} is outside (0, m_lm = {:e}]",
            tuned.report.h_norm_sq, tuned.report.m_lm
        ));
    }
    let verified = reasons.is_empty();
    if !verified && !force {
        return Err(CliError::Hypothesis(format!(
            "inadmissible configuration ({}); rerun with --force to solve anyway",
            reasons.join("; ")
        )));
    }

    let pair = Pair::run(&tuned, &prep.grid, &prep.cfg.solver);
    let grid = &prep.grid;
    let mut done = Vec::new();
    for (name, r) in [("ball", &pair.ball), ("mountain_pass", &pair.mountain)] {
        if let Ok(s) = r {
            write_json(out, &format!("{name}.json"), &with_provenance(s, prep))?;
            if prep.cfg.fields_csv {
                write_text(out, &format!("{name}_fields.csv"), &fields_csv(grid, &s.z))?;
            }
            done.push(s);
        }
    }
    let result_value = |r: &Result<SolveResult, CliError>| match r {
        Ok(s) => serde_json::to_value(s).expect("solve result serializes"),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let summary = json!({
        "hypotheses_verified": verified,
        "forced": force && !verified,
        "unverified_reasons": reasons,
        "lambda": tuned.problem.lambda,
        "mu": tuned.problem.mu,
        "t_lm": tuned.report.t_lm,
        "alpha_lm": tuned.report.alpha_lm,
        "Lambda0": tuned.report.lambda0,
        "m_lm": tuned.report.m_lm,
        "h_norm_sq": tuned.report.h_norm_sq,
        "ball_minimizer": result_value(&pair.ball),
        "mountain_pass": result_value(&pair.mountain),
        "distinct": pair.success(),
    });
    write_json(out, "solve.json", &with_provenance(summary, prep))?;
    let mut table = summary_table(&done, tuned.report.t_lm, tuned.report.alpha_lm, verified);
    for (name, r) in [
        ("ball minimizer", &pair.ball),
        ("mountain pass", &pair.mountain),
    ] {
        if let Err(e) = r {
            let _ = writeln!(table, "{name}: {e}");
        }
    }
    write_text(out, "summary.txt", &table)?;
    print!("{table}");
    if pair.success() {
        Ok(())
    } else {
        Err(CliError::Solver(pair.diagnostics()))
    }
}

const SWEEP_HEADER: &str =
    "parameter,value,lambda,mu,lambda_plus_mu,Lambda0,m_lm,h_norm_sq,admissible,\
ball_energy,ball_energy_sign,ball_residual,ball_converged,\
mp_energy,mp_energy_sign,mp_residual,mp_converged,status";

fn sweep_row(prep: &Prepared, sc: &ellvar_core::SobolevConstants, value: f64) -> String {
    let parameter = prep.cfg.sweep_parameter;
    let tuned = match parameter {
        SweepParameter::LambdaMuFraction => prep.tune(sc, Some(value), None),
        SweepParameter::HFraction => prep.tune(sc, None, Some(value)),
    };
    let mut row = format!("{},{value:?}", parameter.name());
    let tuned = match tuned {
        Ok(t) => t,
        Err(e) => {
            let _ = write!(
                row,
                ",,,,,,,false,,,,,,,,,\"{}\"",
                e.to_string().replace('"', "'")
            );
            return row;
        }
    };
    let r = &tuned.report;
    let _ = write!(
        row,
        ",{:?},{:?},{:?},{:?},{:?},{:?},{}",
        tuned.problem.lambda,
        tuned.problem.mu,
        r.lambda_plus_mu,
        r.lambda0,
        r.m_lm,
        r.h_norm_sq,
        r.admissible()
    );
    if !r.admissible() {
        row.push_str(",,,,,,,,,inadmissible");
        return row;
    }
    let pair = Pair::run(&tuned, &prep.grid, &prep.cfg.solver);
    for s in [&pair.ball, &pair.mountain] {
        match s {
            Ok(s) => {
                let _ = write!(
                    row,
                    ",{:?},{},{:?},{}",
                    s.energy, s.classification.energy_sign, s.residual, s.converged
                );
            }
            Err(_) => row.push_str(",,,,false"),
        }
    }
    if pair.success() {
        row.push_str(",ok");
    } else {
        let _ = write!(row, ",\"{}\"", pair.diagnostics().replace('"', "'"));
    }
    row
}

fn sweep(prep: &Prepared, out: &Path) -> Result<(), CliError> {
    prep.gate()?;
    let values = &prep.cfg.sweep_values;
    let mut csv = format!("{SWEEP_HEADER}\n");
    if !values.is_empty() {
        let sc = prep.sobolev()?;
        let rows: Vec<String> = values
            .par_iter()
            .map(|&v| sweep_row(prep, &sc, v))
            .collect();
        for row in rows {
            csv.push_str(&row);
            csv.push('\n');
        }
    }
    write_text(out, "sweep.csv", &csv)?;
    print!("{csv}");
    Ok(())
}

fn gradcheck(prep: &Prepared, out: &Path, corrupt: bool) -> Result<(), CliError> {
    let grid = &prep.grid;
    // thresholds may not exist (e.g. zero forcing); the raw problem is then used
    let tuned = prep
        .sobolev()
        .and_then(|sc| prep.tune(&sc, None, None))
        .ok();
    let ps = tuned.as_ref().map_or(&prep.problem, |t| &t.problem);
    let amp = prep.cfg.gradcheck_amplitude;
    let z = FieldPair::new(
        random_field(grid, prep.seed, amp),
        random_field(grid, prep.seed.wrapping_add(1), amp),
    );
    let mut analytic = energy_gradient(ps, grid, &z)?;
    if corrupt {
        for g in [&mut analytic.u, &mut analytic.v] {
            for i in grid.interior().collect::<Vec<_>>() {
                g[i] = 1.01 * g[i] + 1e-3;
            }
        }
    }
    let step = prep.cfg.gradcheck_step;
    let probes = prep.cfg.gradcheck_probes;
    let (worst, coords) =
        finite_difference_check(ps, grid, &z, &analytic, probes, step, prep.seed)?;
    let ok = worst <= GRADCHECK_TOL;
    let report = json!({
        "max_rel_error": worst,
        "tolerance": GRADCHECK_TOL,
        "probes": probes,
        "step": step,
        "amplitude": amp,
        "worst_coords": coords,
        "pass": ok,
        "corrupted": corrupt,
    });
    write_json(out, "gradcheck.json", &with_provenance(report, prep))?;
    println!("max relative error: {worst:e} over {probes} probes (tolerance {GRADCHECK_TOL:e})");
    if ok {
        Ok(())
    } else {
        Err(CliError::Gradcheck(format!(
            "max relative error {worst:e} at node {coords:?}"
        )))
    }
}
