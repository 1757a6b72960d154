//! Discrete Sobolev constants and the admissibility constants built on them.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functional::{energy, ProblemSpec};
use crate::grid::{random_field, Field, FieldPair, Grid};
use crate::laplacian::{self, SpectralSolver};

const CG_TOL: f64 = 1e-13;
const CG_MAX: usize = 20_000;

/// Smallest eigenvalue of the discrete Dirichlet Laplacian and its
/// eigenfield (unit seminorm, positive), by inverse power iteration.
pub fn ground_state(grid: &Grid) -> Result<(f64, Field)> {
    let mut f = Field::from_vec(vec![1.0; grid.len()]);
    grid.zero_boundary(&mut f);
    let mut f = f.scaled(1.0 / grid.seminorm(&f));
    let mut lam = rayleigh(grid, &f);
    let mut stable = 0;
    for _ in 0..5_000 {
        let (next, _) = laplacian::cg_solve(grid, &f, CG_TOL, CG_MAX)?;
        f = next.scaled(1.0 / grid.seminorm(&next));
        let new = rayleigh(grid, &f);
        let change = (new - lam).abs();
        lam = new;
        if change <= 1e-13 * lam {
            stable += 1;
            if stable == 3 {
                return Ok((lam, f));
            }
        } else {
            stable = 0;
        }
    }
    Err(Error::NoConvergence(
        "inverse power iteration for the lowest Dirichlet eigenvalue".into(),
    ))
}

fn rayleigh(grid: &Grid, f: &Field) -> f64 {
    grid.inner_w(f, f) / grid.norm_lp(f, 2.0).powi(2)
}

/// Best constant of `‖f‖₂ ≤ S₂ ‖∇f‖₂` on the grid: `1/√λ_min`.
pub fn estimate_s2(grid: &Grid) -> Result<f64> {
    Ok(1.0 / ground_state(grid)?.0.sqrt())
}

/// `‖f‖_p / ‖∇f‖₂` for a nonzero Dirichlet field.
pub fn sobolev_ratio(grid: &Grid, f: &Field, p: f64) -> f64 {
    grid.norm_lp(f, p) / grid.seminorm(f)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpEstimate {
    pub value: f64,
    pub converged: bool,
    pub restarts_used: usize,
    /// Final ratio of each run: the eigenfield start first, then the random ones.
    pub runs: Vec<f64>,
}

/// Ascent for `sup ‖f‖_p / ‖∇f‖₂`: the iteration `f ← L⁻¹(|f|^{p−2}f)`,
/// renormalized, never decreases the ratio. Runs from the eigenfield and
/// from `restarts` random fields and keeps the best.
pub fn estimate_sp(grid: &Grid, p: f64, restarts: usize, seed: u64) -> Result<SpEstimate> {
    if !(p >= 2.0 && p.is_finite()) {
        return Err(Error::Threshold(format!(
            "embedding exponent {p} must be at least 2"
        )));
    }
    let n = grid.dim();
    if n >= 3 && p >= 2.0 * n as f64 / (n as f64 - 2.0) {
        return Err(Error::Threshold(format!(
            "exponent {p} is not subcritical in dimension {n}"
        )));
    }
    let solver = SpectralSolver::new(grid);
    let (_, eigen) = ground_state(grid)?;
    let mut starts = vec![eigen];
    for r in 0..restarts {
        starts.push(random_field(grid, seed.wrapping_add(r as u64), 1.0));
    }
    let mut runs = Vec::with_capacity(starts.len());
    let mut best = (0.0, false);
    for start in starts {
        let (value, ok) = ascend(grid, &solver, start, p);
        if value > best.0 {
            best = (value, ok);
        }
        runs.push(value);
    }
    Ok(SpEstimate {
        value: best.0,
        converged: best.1,
        restarts_used: restarts,
        runs,
    })
}

fn ascend(grid: &Grid, solver: &SpectralSolver, start: Field, p: f64) -> (f64, bool) {
    let mut f = start.scaled(1.0 / grid.seminorm(&start));
    let mut ratio = grid.norm_lp(&f, p);
    for _ in 0..20_000 {
        let mut g = f.clone();
        for x in g.iter_mut() {
            *x *= x.abs().powf(p - 2.0);
        }
        let d = solver.solve(&g);
        let next = d.scaled(1.0 / grid.seminorm(&d));
        let r = grid.norm_lp(&next, p);
        if r < ratio {
            // roundoff floor reached
            return (ratio, true);
        }
        f = next;
        let done = r - ratio <= 1e-14 * r;
        ratio = r;
        if done {
            return (ratio, true);
        }
    }
    (ratio, false)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SobolevConstants {
    #[serde(rename = "S2")]
    pub s2: f64,
    #[serde(rename = "S_ab")]
    pub s_ab: f64,
    pub restarts_used: usize,
    pub converged: bool,
}

pub fn sobolev_constants(
    grid: &Grid,
    ab_sum: f64,
    restarts: usize,
    seed: u64,
) -> Result<SobolevConstants> {
    let s2 = estimate_s2(grid)?;
    let sp = estimate_sp(grid, ab_sum, restarts, seed)?;
    Ok(SobolevConstants {
        s2,
        s_ab: sp.value,
        restarts_used: sp.restarts_used,
        converged: sp.converged,
    })
}

/// Scalars entering the constants, independent of `λ, μ, h`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThresholdInputs {
    pub rho0: f64,
    pub rho1: f64,
    #[serde(rename = "S2")]
    pub s2: f64,
    #[serde(rename = "S_ab")]
    pub s_ab: f64,
    pub q: f64,
    pub ab_sum: f64,
    /// `max{‖a‖, ‖c‖}` in `L^{(α+β)/(α+β−q)}`.
    pub weight_norm: f64,
    pub b_inf: f64,
}

impl ThresholdInputs {
    pub fn from_problem(
        ps: &ProblemSpec,
        grid: &Grid,
        sc: &SobolevConstants,
        rho0: f64,
        rho1: f64,
    ) -> ThresholdInputs {
        let ab = ps.ab_sum();
        let r = ab / (ab - ps.q);
        let w = &ps.weights;
        ThresholdInputs {
            rho0,
            rho1,
            s2: sc.s2,
            s_ab: sc.s_ab,
            q: ps.q,
            ab_sum: ab,
            weight_norm: grid.norm_lp(&w.a, r).max(grid.norm_lp(&w.c, r)),
            b_inf: crate::grid::norm_linf(&w.b),
        }
    }

    pub fn alpha0(&self) -> f64 {
        let (q, ab) = (self.q, self.ab_sum);
        (2.0 - q) * ab * self.weight_norm / (q * (ab - 2.0) * self.b_inf * self.s_ab.powf(ab - q))
    }

    pub fn c0(&self) -> f64 {
        let (q, ab) = (self.q, self.ab_sum);
        let a0 = self.alpha0();
        self.s_ab.powf(q) * self.weight_norm * a0.powf((q - 2.0) / (ab - q)) / q
            + self.b_inf * self.s_ab.powf(ab) * a0.powf((ab - 2.0) / (ab - q)) / ab
    }

    /// `t_{λ,μ} = ((λ+μ) α₀)^{1/(α+β−q)}`.
    pub fn t_lm(&self, lambda_mu: f64) -> f64 {
        (lambda_mu * self.alpha0()).powf(1.0 / (self.ab_sum - self.q))
    }

    /// The two terms of `f(t)`, concave part first.
    pub fn profile_terms(&self, lambda_mu: f64, t: f64) -> [f64; 2] {
        let (q, ab) = (self.q, self.ab_sum);
        [
            lambda_mu * self.s_ab.powf(q) * self.weight_norm * t.powf(q - 2.0) / q,
            self.b_inf * self.s_ab.powf(ab) * t.powf(ab - 2.0) / ab,
        ]
    }

    /// `f(t)`.
    pub fn profile(&self, lambda_mu: f64, t: f64) -> f64 {
        let [a, b] = self.profile_terms(lambda_mu, t);
        a + b
    }

    /// The two terms of `f′(t)`; they cancel at the minimizer.
    pub fn profile_derivative_terms(&self, lambda_mu: f64, t: f64) -> [f64; 2] {
        let [a, b] = self.profile_terms(lambda_mu, t);
        [a * (self.q - 2.0) / t, b * (self.ab_sum - 2.0) / t]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EpsPolicy {
    /// `ε₁ = ε₂ = √(ρ₀/(4S₂))`.
    Symmetric,
    /// Common `ε` maximizing `m_{λ,μ}` by golden-section search.
    Golden,
    Fixed(f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub eps1: f64,
    pub eps2: f64,
    #[serde(rename = "C0")]
    pub c0: f64,
    pub alpha0: f64,
    pub t_lm: f64,
    #[serde(rename = "Lambda0")]
    pub lambda0: f64,
    pub m_lm: f64,
    pub alpha_lm: f64,
    pub admissible_lm: bool,
    pub admissible_h: bool,
    pub lambda_plus_mu: f64,
    pub h_norm_sq: f64,
    #[serde(flatten)]
    pub inputs: ThresholdInputs,
}

impl ThresholdReport {
    pub fn admissible(&self) -> bool {
        self.admissible_lm && self.admissible_h
    }
}

fn choose_eps(inp: &ThresholdInputs, lambda_mu: f64, policy: EpsPolicy) -> Result<(f64, f64)> {
    let budget = inp.rho0 / inp.s2;
    match policy {
        EpsPolicy::Symmetric => {
            let e = (budget / 4.0).sqrt();
            Ok((e, e))
        }
        EpsPolicy::Fixed(e1, e2) => {
            if !(e1 > 0.0 && e2 > 0.0) {
                return Err(Error::Threshold(format!(
                    "eps1 = {e1}, eps2 = {e2} must be positive"
                )));
            }
            if e1 * e1 + e2 * e2 >= budget {
                return Err(Error::Threshold(format!(
                    "eps1^2 + eps2^2 = {} must stay below rho0/S2 = {budget}",
                    e1 * e1 + e2 * e2
                )));
            }
            Ok((e1, e2))
        }
        EpsPolicy::Golden => {
            // m ∝ (ρ₀/2 − S₂ε² − K) ε² with ε₁ = ε₂ = ε
            let k = inp.c0() * lambda_mu.powf((inp.ab_sum - 2.0) / (inp.ab_sum - inp.q));
            let objective = |e2: f64| (inp.rho0 / 2.0 - inp.s2 * e2 - k) * e2;
            let hi = budget / 2.0;
            let (mut a, mut b) = (hi * 1e-12, hi * (1.0 - 1e-12));
            let g = (5f64.sqrt() - 1.0) / 2.0;
            let mut x1 = b - g * (b - a);
            let mut x2 = a + g * (b - a);
            let (mut f1, mut f2) = (objective(x1), objective(x2));
            for _ in 0..200 {
                if f1 < f2 {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + g * (b - a);
                    f2 = objective(x2);
                } else {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - g * (b - a);
                    f1 = objective(x1);
                }
            }
            let e = (0.5 * (a + b)).sqrt();
            Ok((e, e))
        }
    }
}

/// All constants for given `λ+μ` and `‖h₁‖² + ‖h₂‖²`.
pub fn thresholds_from(
    inp: &ThresholdInputs,
    lambda_mu: f64,
    h_norm_sq: f64,
    policy: EpsPolicy,
) -> Result<ThresholdReport> {
    if !(inp.b_inf > 0.0) {
        return Err(Error::Threshold(
            "sup |b| = 0: the coupling weight must be nontrivial".into(),
        ));
    }
    if !(inp.rho0 > 0.0 && inp.s2 > 0.0 && inp.s_ab > 0.0) {
        return Err(Error::Threshold(format!(
            "rho0 = {}, S2 = {}, S_ab = {} must be positive",
            inp.rho0, inp.s2, inp.s_ab
        )));
    }
    let (eps1, eps2) = choose_eps(inp, lambda_mu, policy)?;
    let (q, ab) = (inp.q, inp.ab_sum);
    let alpha0 = inp.alpha0();
    let c0 = inp.c0();
    let base = inp.rho0 / 2.0 - inp.s2 / 2.0 * (eps1 * eps1 + eps2 * eps2);
    let lambda0 = (base / c0).powf((ab - q) / (ab - 2.0));
    if !(lambda0 > 0.0 && lambda0.is_finite()) {
        return Err(Error::Threshold(format!(
            "Lambda0 = {lambda0} is not positive (C0 = {c0}, alpha0 = {alpha0})"
        )));
    }
    let t = inp.t_lm(lambda_mu);
    let kappa = (inp.s2 / (2.0 * eps1 * eps1)).max(inp.s2 / (2.0 * eps2 * eps2));
    let m_lm = t * t * (base - c0 * lambda_mu.powf((ab - 2.0) / (ab - q))) / (2.0 * kappa);
    Ok(ThresholdReport {
        eps1,
        eps2,
        c0,
        alpha0,
        t_lm: t,
        lambda0,
        m_lm,
        alpha_lm: kappa * m_lm,
        admissible_lm: lambda_mu > 0.0 && lambda_mu < lambda0,
        admissible_h: h_norm_sq > 0.0 && h_norm_sq <= m_lm,
        lambda_plus_mu: lambda_mu,
        h_norm_sq,
        inputs: *inp,
    })
}

pub fn compute_thresholds(
    ps: &ProblemSpec,
    grid: &Grid,
    sc: &SobolevConstants,
    rho0: f64,
    rho1: f64,
    policy: EpsPolicy,
) -> Result<ThresholdReport> {
    let inp = ThresholdInputs::from_problem(ps, grid, sc, rho0, rho1);
    thresholds_from(
        &inp,
        ps.lambda + ps.mu,
        ps.weights.forcing_norm_sq(grid),
        policy,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SphereCheck {
    pub skipped: Option<String>,
    pub samples: usize,
    pub violations: usize,
    pub min_energy: f64,
    pub bound: f64,
}

/// Energy of random pairs on the sphere `‖z‖ = t_{λ,μ}` against `α_{λ,μ}`.
pub fn sphere_lower_bound_check(
    ps: &ProblemSpec,
    grid: &Grid,
    report: &ThresholdReport,
    n_samples: usize,
    seed: u64,
) -> Result<SphereCheck> {
    let bound = report.alpha_lm;
    let skip = |why: &str| {
        Ok(SphereCheck {
            skipped: Some(why.to_string()),
            samples: 0,
            violations: 0,
            min_energy: f64::NAN,
            bound,
        })
    };
    if !report.admissible_lm {
        return skip("lambda + mu is not below Lambda0");
    }
    if !report.admissible_h {
        return skip("|h1|^2 + |h2|^2 is outside (0, m_lm]");
    }
    let mut violations = 0;
    let mut min_energy = f64::INFINITY;
    for k in 0..n_samples as u64 {
        let z = FieldPair::new(
            random_field(grid, seed.wrapping_add(2 * k), 1.0),
            random_field(grid, seed.wrapping_add(2 * k + 1), 1.0),
        );
        let z = z.scaled(report.t_lm / grid.norm_w(&z));
        let e = energy(ps, grid, &z)?.total;
        min_energy = min_energy.min(e);
        if e < bound - 1e-10 * (1.0 + bound) {
            violations += 1;
        }
    }
    Ok(SphereCheck {
        skipped: None,
        samples: n_samples,
        violations,
        min_energy,
        bound,
    })
}
