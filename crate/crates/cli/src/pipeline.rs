//! Shared setup: grid and weights from the config, φ certification,
//! hypothesis gates and the multi-pass threshold tuning.

use ellvar_core::phi::certify;
use ellvar_core::thresholds::{sobolev_constants, thresholds_from, EpsPolicy, ThresholdInputs};
use ellvar_core::weights::{check_hypotheses, sample, HypothesisReport, WeightExprs};
use ellvar_core::{
    ConditionReport, Expr, Grid, PhiSpec, ProblemSpec, SobolevConstants, ThresholdReport, WeightSet,
};

use crate::config::{Amount, EpsPolicyName, PhiConfig, RunConfig};
use crate::CliError;

pub struct Prepared {
    pub cfg: RunConfig,
    pub grid: Grid,
    /// `λ = μ = 1` stand-ins while `problem.lambda` is `auto`.
    pub problem: ProblemSpec,
    pub phi_reports: [ConditionReport; 2],
    pub hypotheses: HypothesisReport,
    pub rho0: f64,
    pub rho1: f64,
    pub seed: u64,
    pub config_hash: String,
}

/// Problem with `λ, μ, h` fixed and the thresholds that go with it.
#[derive(Clone)]
pub struct Tuned {
    pub problem: ProblemSpec,
    pub report: ThresholdReport,
}

fn phi_spec(p: &PhiConfig) -> PhiSpec {
    PhiSpec::new(p.family, p.a, p.p, p.r).expect("validated on load")
}

pub fn prepare(mut cfg: RunConfig, seed: Option<u64>) -> Result<Prepared, CliError> {
    let config_hash = cfg.hash();
    let seed = seed.unwrap_or(cfg.solver.seed);
    cfg.solver.seed = seed;
    let grid =
        Grid::new(&cfg.lower, &cfg.upper, &cfg.nodes).map_err(|e| cfg.error_at("grid.nodes", e))?;

    let field = |key: &str, text: &str| -> Result<(Expr, ellvar_core::Field), CliError> {
        let e: Expr = text.parse().map_err(|e| cfg.error_at(key, e))?;
        let f = sample(&e, &grid).map_err(|e| cfg.error_at(key, e))?;
        Ok((e, f))
    };
    let (ea, a) = field("weights.a", &cfg.a)?;
    let (eb, b) = field("weights.b", &cfg.b)?;
    let (ec, c) = field("weights.c", &cfg.c)?;
    let (eh1, h1) = field("weights.h1", &cfg.h1)?;
    let (eh2, h2) = field("weights.h2", &cfg.h2)?;
    let mut weights = WeightSet {
        exprs: WeightExprs {
            a: ea,
            b: eb,
            c: ec,
            h1: eh1,
            h2: eh2,
        },
        a,
        b,
        c,
        h1,
        h2,
    };
    if let Amount::Value(s) = cfg.h_scale {
        weights.scale_forcing(s, s);
    }

    let value = |a: Amount| match a {
        Amount::Auto => 1.0,
        Amount::Value(x) => x,
    };
    let problem = ProblemSpec::new(
        value(cfg.lambda),
        value(cfg.mu),
        cfg.q,
        cfg.alpha,
        cfg.beta,
        phi_spec(&cfg.phi1),
        phi_spec(&cfg.phi2),
        weights,
        &grid,
    )
    .map_err(|e| cfg.error_at("problem.q", e))?;

    let ab = problem.ab_sum();
    let r1 = certify(&problem.phi1, ab, cfg.s_max, cfg.n_samples)
        .map_err(|e| cfg.error_at("phi1.family", e))?;
    let r2 = certify(&problem.phi2, ab, cfg.s_max, cfg.n_samples)
        .map_err(|e| cfg.error_at("phi2.family", e))?;
    let rho0 = r1.rho0.min(r2.rho0);
    let rho1 = r1.rho1.max(r2.rho1);
    let hypotheses = check_hypotheses(&problem.weights, &grid, cfg.q, ab);
    Ok(Prepared {
        cfg,
        grid,
        problem,
        phi_reports: [r1, r2],
        hypotheses,
        rho0,
        rho1,
        seed,
        config_hash,
    })
}

impl Prepared {
    /// (B), (H) and a positive lower bound ρ₀ of φ: without them no
    /// threshold exists.
    pub fn gate(&self) -> Result<(), CliError> {
        match self.hypotheses.first_failure() {
            Some("B") => {
                return Err(CliError::Hypothesis(
                    "(B) fails: b is not positive on any grid cell".into(),
                ))
            }
            Some(_) => {
                return Err(CliError::Hypothesis(format!(
                    "(H) fails: h1 and h2 must both be nonzero on the grid (|h1| = {}, |h2| = {})",
                    self.hypotheses.h1_l2, self.hypotheses.h2_l2
                )))
            }
            None => {}
        }
        if !(self.rho0 > 0.0) {
            return Err(CliError::Hypothesis(format!(
                "(φ1) fails: rho0 = {} is not positive",
                self.rho0
            )));
        }
        Ok(())
    }

    /// Conditions that fail for either φ, as `phiN:condition` labels.
    pub fn failed_conditions(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (n, r) in self.phi_reports.iter().enumerate() {
            for (name, ok) in [
                ("phi1", r.pass_phi1),
                ("phi1_prime", r.pass_phi1_prime),
                ("phi2", r.pass_phi2),
                ("phi3", r.pass_phi3),
                ("phi4", r.pass_phi4),
            ] {
                if !ok {
                    out.push(format!("phi{}:{name}", n + 1));
                }
            }
        }
        out
    }

    pub fn sobolev(&self) -> Result<SobolevConstants, CliError> {
        sobolev_constants(
            &self.grid,
            self.problem.ab_sum(),
            self.cfg.sp_restarts,
            self.seed,
        )
        .map_err(CliError::from)
    }

    pub fn policy(&self) -> EpsPolicy {
        match self.cfg.eps_policy {
            EpsPolicyName::Symmetric => EpsPolicy::Symmetric,
            EpsPolicyName::Golden => EpsPolicy::Golden,
            EpsPolicyName::Fixed => {
                EpsPolicy::Fixed(self.cfg.eps1.unwrap_or(0.0), self.cfg.eps2.unwrap_or(0.0))
            }
        }
    }

    /// Fixes `λ, μ` and `h`. Automatic `λ = μ = f·Λ₀/2` takes Λ₀ from a
    /// first pass at `λ+μ = 1`; automatic `h` rescales each component to
    /// `‖hᵢ‖₂ = f_h·√(m_{λ,μ}/2)`. A fraction override switches the
    /// corresponding quantity to automatic.
    pub fn tune(
        &self,
        sc: &SobolevConstants,
        lm_fraction: Option<f64>,
        h_fraction: Option<f64>,
    ) -> Result<Tuned, CliError> {
        let th = |e: ellvar_core::Error| CliError::Hypothesis(e.to_string());
        let grid = &self.grid;
        let mut ps = self.problem.clone();
        let inputs = ThresholdInputs::from_problem(&ps, grid, sc, self.rho0, self.rho1);
        let policy = self.policy();

        let auto_lm = lm_fraction.is_some() || self.cfg.lambda == Amount::Auto;
        if auto_lm {
            let f = lm_fraction.unwrap_or(self.cfg.lambda_mu_fraction);
            let first = thresholds_from(&inputs, 1.0, ps.weights.forcing_norm_sq(grid), policy)
                .map_err(th)?;
            ps.lambda = 0.5 * f * first.lambda0;
            ps.mu = ps.lambda;
        }
        let mut report = thresholds_from(
            &inputs,
            ps.lambda + ps.mu,
            ps.weights.forcing_norm_sq(grid),
            policy,
        )
        .map_err(th)?;

        let auto_h = h_fraction.is_some() || self.cfg.h_scale == Amount::Auto;
        if auto_h && report.m_lm > 0.0 {
            let target = h_fraction.unwrap_or(self.cfg.h_fraction) * (report.m_lm / 2.0).sqrt();
            let n1 = grid.norm_lp(&ps.weights.h1, 2.0);
            let n2 = grid.norm_lp(&ps.weights.h2, 2.0);
            if n1 > 0.0 && n2 > 0.0 {
                ps.weights.scale_forcing(target / n1, target / n2);
                report = thresholds_from(
                    &inputs,
                    ps.lambda + ps.mu,
                    ps.weights.forcing_norm_sq(grid),
                    policy,
                )
                .map_err(th)?;
            }
        }
        Ok(Tuned {
            problem: ps,
            report,
        })
    }
}
