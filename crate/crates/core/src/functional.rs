//! The discrete energy
//!
//! ```text
//! J(u,v) = Σ h^N [Φ₁(s_u) + Φ₂(s_v)] − (1/q) Σ h^N (λa|u|^q + μc|v|^q)
//!        − 1/(α+β) Σ h^N b|u|^α|v|^β − Σ h^N (h₁u + h₂v),
//! s_u = (u² + |∇u|²)/2,
//! ```
//!
//! its exact gradient with respect to interior nodal values (scaled by
//! `1/h^N`), and residual norms.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Field, FieldPair, Grid};
use crate::laplacian::SpectralSolver;
use crate::phi::PhiSpec;
use crate::weights::WeightSet;

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub lambda: f64,
    pub mu: f64,
    pub q: f64,
    pub alpha: f64,
    pub beta: f64,
    pub phi1: PhiSpec,
    pub phi2: PhiSpec,
    pub weights: WeightSet,
}

impl ProblemSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        lambda: f64,
        mu: f64,
        q: f64,
        alpha: f64,
        beta: f64,
        phi1: PhiSpec,
        phi2: PhiSpec,
        weights: WeightSet,
        grid: &Grid,
    ) -> Result<ProblemSpec> {
        let ps = ProblemSpec {
            lambda,
            mu,
            q,
            alpha,
            beta,
            phi1,
            phi2,
            weights,
        };
        ps.validate(grid)?;
        Ok(ps)
    }

    pub fn ab_sum(&self) -> f64 {
        self.alpha + self.beta
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidProblem(m));
        for (name, v) in [("lambda", self.lambda), ("mu", self.mu)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} = {v} must be positive"));
            }
        }
        if !(self.q > 1.0 && self.q < 2.0) {
            return bad(format!("q = {} must lie in (1, 2)", self.q));
        }
        if !(self.alpha > 1.0 && self.beta > 1.0) {
            return bad(format!(
                "alpha = {} and beta = {} must exceed 1",
                self.alpha, self.beta
            ));
        }
        let n = grid.dim();
        if n >= 3 {
            let crit = 2.0 * n as f64 / (n as f64 - 2.0);
            if self.ab_sum() >= crit {
                return bad(format!(
                    "alpha + beta = {} must be below {crit} in dimension {n}",
                    self.ab_sum()
                ));
            }
        }
        if self.weights.len() != grid.len() {
            return bad(format!(
                "weights sampled on {} nodes, grid has {}",
                self.weights.len(),
                grid.len()
            ));
        }
        self.phi1.validate()?;
        self.phi2.validate()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct EnergyBreakdown {
    pub phi_term: f64,
    pub concave_term: f64,
    pub coupling_term: f64,
    pub forcing_term: f64,
    pub total: f64,
}

/// `|x|^e`, 0 at 0.
fn abs_pow(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.abs().powf(e)
    }
}

/// `sign(x)|x|^e`, 0 at 0.
fn signed_pow(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(e)
    }
}

/// `|x+dx|^e − |x|^e` without cancellation when `dx` is small.
fn abs_pow_delta(x: f64, dx: f64, e: f64) -> f64 {
    let y = x + dx;
    if x != 0.0 && y != 0.0 && x.signum() == y.signum() {
        abs_pow(x, e) * (e * (dx / x).ln_1p()).exp_m1()
    } else {
        abs_pow(y, e) - abs_pow(x, e)
    }
}

fn check_len(grid: &Grid, z: &FieldPair) -> Result<()> {
    if z.u.len() != grid.len() || z.v.len() != grid.len() {
        return Err(Error::InvalidProblem(format!(
            "field lengths {} and {} do not match the grid ({})",
            z.u.len(),
            z.v.len(),
            grid.len()
        )));
    }
    Ok(())
}

fn half_square(f: &Field, g: &[f64], i: usize, dim: usize) -> f64 {
    let mut s = f[i] * f[i];
    for k in 0..dim {
        s += g[i * dim + k] * g[i * dim + k];
    }
    0.5 * s
}

pub fn energy(ps: &ProblemSpec, grid: &Grid, z: &FieldPair) -> Result<EnergyBreakdown> {
    check_len(grid, z)?;
    let dim = grid.dim();
    let gu = grid.gradient_field(&z.u);
    let gv = grid.gradient_field(&z.v);
    let w = &ps.weights;
    let (mut phi, mut conc, mut coup, mut forc) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..grid.len() {
        let (u, v) = (z.u[i], z.v[i]);
        let p = ps.phi1.primitive(half_square(&z.u, &gu, i, dim))
            + ps.phi2.primitive(half_square(&z.v, &gv, i, dim));
        let c = ps.lambda * w.a[i] * abs_pow(u, ps.q) + ps.mu * w.c[i] * abs_pow(v, ps.q);
        let b = w.b[i] * abs_pow(u, ps.alpha) * abs_pow(v, ps.beta);
        let f = w.h1[i] * u + w.h2[i] * v;
        if !(p + c + b + f).is_finite() {
            return Err(Error::NonFinite {
                quantity: "energy",
                coords: grid.coords(i),
            });
        }
        phi += p;
        conc += c;
        coup += b;
        forc += f;
    }
    let vol = grid.cell_volume();
    let out = EnergyBreakdown {
        phi_term: vol * phi,
        concave_term: vol * conc / ps.q,
        coupling_term: vol * coup / ps.ab_sum(),
        forcing_term: vol * forc,
        total: 0.0,
    };
    Ok(EnergyBreakdown {
        total: out.phi_term - out.concave_term - out.coupling_term - out.forcing_term,
        ..out
    })
}

/// `J(z + dz) − J(z)`, evaluated term by term so that small steps do not
/// lose their digits to cancellation.
pub fn energy_delta(ps: &ProblemSpec, grid: &Grid, z: &FieldPair, dz: &FieldPair) -> Result<f64> {
    check_len(grid, z)?;
    check_len(grid, dz)?;
    let dim = grid.dim();
    let gu = grid.gradient_field(&z.u);
    let gv = grid.gradient_field(&z.v);
    let dgu = grid.gradient_field(&dz.u);
    let dgv = grid.gradient_field(&dz.v);
    let w = &ps.weights;
    let ds = |f: f64, df: f64, g: &[f64], dg: &[f64], i: usize| {
        let mut s = df * (2.0 * f + df);
        for k in 0..dim {
            let j = i * dim + k;
            s += dg[j] * (2.0 * g[j] + dg[j]);
        }
        0.5 * s
    };
    let (mut phi, mut conc, mut coup, mut forc) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..grid.len() {
        let (u, v, du, dv) = (z.u[i], z.v[i], dz.u[i], dz.v[i]);
        let p = ps
            .phi1
            .primitive_delta(half_square(&z.u, &gu, i, dim), ds(u, du, &gu, &dgu, i))
            + ps.phi2
                .primitive_delta(half_square(&z.v, &gv, i, dim), ds(v, dv, &gv, &dgv, i));
        let c = ps.lambda * w.a[i] * abs_pow_delta(u, du, ps.q)
            + ps.mu * w.c[i] * abs_pow_delta(v, dv, ps.q);
        let (pa, pb) = (abs_pow(u, ps.alpha), abs_pow(v, ps.beta));
        let (da, db) = (
            abs_pow_delta(u, du, ps.alpha),
            abs_pow_delta(v, dv, ps.beta),
        );
        let b = w.b[i] * (da * (pb + db) + pa * db);
        let f = w.h1[i] * du + w.h2[i] * dv;
        if !(p + c + b + f).is_finite() {
            return Err(Error::NonFinite {
                quantity: "energy difference",
                coords: grid.coords(i),
            });
        }
        phi += p;
        conc += c;
        coup += b;
        forc += f;
    }
    Ok(grid.cell_volume() * (phi - conc / ps.q - coup / ps.ab_sum() - forc))
}

/// Exact partial derivatives of [`energy`] in the interior nodal values,
/// divided by `h^N`; boundary entries are 0.
pub fn energy_gradient(ps: &ProblemSpec, grid: &Grid, z: &FieldPair) -> Result<FieldPair> {
    check_len(grid, z)?;
    let u = component_gradient(ps, grid, &z.u, &z.v, true)?;
    let v = component_gradient(ps, grid, &z.v, &z.u, false)?;
    Ok(FieldPair::new(u, v))
}

fn component_gradient(
    ps: &ProblemSpec,
    grid: &Grid,
    f: &Field,
    other: &Field,
    first: bool,
) -> Result<Field> {
    let dim = grid.dim();
    let w = &ps.weights;
    let (phi, coef, weight, forcing, own, cross) = if first {
        (&ps.phi1, ps.lambda, &w.a, &w.h1, ps.alpha, ps.beta)
    } else {
        (&ps.phi2, ps.mu, &w.c, &w.h2, ps.beta, ps.alpha)
    };
    let g = grid.gradient_field(f);
    let diffusion: Vec<f64> = (0..grid.len())
        .map(|i| phi.phi(half_square(f, &g, i, dim)))
        .collect();
    let mut flux = g;
    for i in 0..grid.len() {
        for k in 0..dim {
            flux[i * dim + k] *= diffusion[i];
        }
    }
    let mut out = grid.gradient_adjoint(&flux);
    let couple = own / ps.ab_sum();
    for j in grid.interior() {
        out[j] += diffusion[j] * f[j]
            - coef * weight[j] * signed_pow(f[j], ps.q - 1.0)
            - couple * w.b[j] * signed_pow(f[j], own - 1.0) * abs_pow(other[j], cross)
            - forcing[j];
        if !out[j].is_finite() {
            return Err(Error::NonFinite {
                quantity: "gradient",
                coords: grid.coords(j),
            });
        }
    }
    Ok(out)
}

/// Discrete pairing `Σ (G_u w_u + G_v w_v) h^N`, the directional derivative
/// of the energy along `w` when `G` is its gradient.
pub fn pairing(grid: &Grid, g: &FieldPair, w: &FieldPair) -> f64 {
    g.dot(w) * grid.cell_volume()
}

/// `‖G‖₂ · h^{N/2}`.
pub fn residual_of(grid: &Grid, g: &FieldPair) -> f64 {
    (g.dot(g) * grid.cell_volume()).sqrt()
}

/// Dual-norm residual `(Σ G·L⁻¹G h^N)^{1/2}`.
pub fn dual_residual_of(grid: &Grid, solver: &SpectralSolver, g: &FieldPair) -> f64 {
    let d = FieldPair::new(solver.solve(&g.u), solver.solve(&g.v));
    (pairing(grid, g, &d)).max(0.0).sqrt()
}

pub fn residual(ps: &ProblemSpec, grid: &Grid, z: &FieldPair) -> Result<f64> {
    Ok(residual_of(grid, &energy_gradient(ps, grid, z)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Residuals {
    pub l2: f64,
    pub h_minus1: f64,
}

pub fn residuals(ps: &ProblemSpec, grid: &Grid, z: &FieldPair) -> Result<Residuals> {
    let g = energy_gradient(ps, grid, z)?;
    Ok(Residuals {
        l2: residual_of(grid, &g),
        h_minus1: dual_residual_of(grid, &SpectralSolver::new(grid), &g),
    })
}

/// The energy derivative along `(u, 0)` and along `(0, v)` at `z`, i.e.
/// `Σ [φ₁(s_u)(u² + |∇u|²) − λa|u|^q − h₁u] h^N` and its `v` analogue
/// (the coupling contribution vanishes on semi-trivial pairs). Both vanish
/// at a critical point of the form `(u, 0)` or `(0, v)` respectively.
pub fn component_identity(ps: &ProblemSpec, grid: &Grid, z: &FieldPair) -> Result<[f64; 2]> {
    check_len(grid, z)?;
    let dim = grid.dim();
    let w = &ps.weights;
    let one = |f: &Field, phi: &PhiSpec, coef: f64, weight: &Field, forcing: &Field| {
        let g = grid.gradient_field(f);
        let mut acc = 0.0;
        for i in 0..grid.len() {
            let s = half_square(f, &g, i, dim);
            acc +=
                phi.phi(s) * 2.0 * s - coef * weight[i] * abs_pow(f[i], ps.q) - forcing[i] * f[i];
        }
        acc * grid.cell_volume()
    };
    let out = [
        one(&z.u, &ps.phi1, ps.lambda, &w.a, &w.h1),
        one(&z.v, &ps.phi2, ps.mu, &w.c, &w.h2),
    ];
    if out.iter().all(|x| x.is_finite()) {
        Ok(out)
    } else {
        Err(Error::NonFinite {
            quantity: "component identity",
            coords: Vec::new(),
        })
    }
}

/// Central-difference check of [`energy_gradient`] at `n_probes` interior
/// coordinates chosen by `seed`. Returns the worst relative error
/// `|analytic − fd| / (1 + |analytic|)` and the node coordinates where it
/// occurred.
pub fn finite_difference_check(
    ps: &ProblemSpec,
    grid: &Grid,
    z: &FieldPair,
    analytic: &FieldPair,
    n_probes: usize,
    step: f64,
    seed: u64,
) -> Result<(f64, Vec<f64>)> {
    use rand::{Rng, SeedableRng};
    let interior: Vec<usize> = grid.interior().collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let vol = grid.cell_volume();
    let mut worst = (0.0, Vec::new());
    for _ in 0..n_probes {
        let node = interior[rng.gen_range(0..interior.len())];
        let second = rng.gen_bool(0.5);
        let mut dz = FieldPair::zeros(grid);
        if second {
            dz.v[node] = step;
        } else {
            dz.u[node] = step;
        }
        let plus = energy_delta(ps, grid, z, &dz)?;
        let minus = energy_delta(ps, grid, z, &dz.scaled(-1.0))?;
        let fd = (plus - minus) / (2.0 * step * vol);
        let a = if second {
            analytic.v[node]
        } else {
            analytic.u[node]
        };
        let err = (a - fd).abs() / (1.0 + a.abs());
        if err > worst.0 || worst.1.is_empty() {
            worst = (err, grid.coords(node));
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::random_field;
    use crate::laplacian;

    fn demo_like(grid: &Grid, f1: u32, f2: u32) -> ProblemSpec {
        let ws = WeightSet::from_strs(
            "sin(2*pi*x1)",
            "1+0.5*sin(2*pi*x1)",
            "cos(2*pi*x2)",
            "0.3",
            "0.2+x1",
            grid,
        )
        .unwrap();
        let phi = |f| match f {
            1 => PhiSpec::new(1, 2.0, 0.0, 0.0).unwrap(),
            2 => PhiSpec::new(2, 2.0, 2.0, 0.0).unwrap(),
            _ => PhiSpec::new(3, 1.0, 0.5, 0.0).unwrap(),
        };
        ProblemSpec::new(0.7, 0.4, 1.5, 1.75, 1.75, phi(f1), phi(f2), ws, grid).unwrap()
    }

    fn semilinear(grid: &Grid, h: &str) -> ProblemSpec {
        let ws = WeightSet::from_strs("0", "0", "0", h, h, grid).unwrap();
        let one = PhiSpec::constant(1.0).unwrap();
        ProblemSpec::new(1.0, 1.0, 1.5, 1.5, 1.5, one, one, ws, grid).unwrap()
    }

    fn random_pair(grid: &Grid, seed: u64, amp: f64) -> FieldPair {
        FieldPair::new(
            random_field(grid, 2 * seed, amp),
            random_field(grid, 2 * seed + 1, amp),
        )
    }

    #[test]
    fn validation() {
        let g = Grid::unit(3, 4).unwrap();
        let ws = WeightSet::from_strs("1", "1", "1", "1", "1", &g).unwrap();
        let phi = PhiSpec::new(1, 2.0, 0.0, 0.0).unwrap();
        let mk = |l, q, a, b| ProblemSpec::new(l, 1.0, q, a, b, phi, phi, ws.clone(), &g);
        assert!(mk(1.0, 1.5, 1.75, 1.75).is_ok());
        assert!(mk(0.0, 1.5, 1.75, 1.75).is_err());
        assert!(mk(1.0, 2.0, 1.75, 1.75).is_err());
        assert!(mk(1.0, 1.5, 1.0, 1.75).is_err());
        assert!(mk(1.0, 1.5, 3.0, 3.0).is_err());
        let g2 = Grid::unit(2, 4).unwrap();
        assert!(ProblemSpec::new(1.0, 1.0, 1.5, 3.0, 3.0, phi, phi, ws.clone(), &g2).is_err());
        let ws2 = WeightSet::from_strs("1", "1", "1", "1", "1", &g2).unwrap();
        assert!(ProblemSpec::new(1.0, 1.0, 1.5, 3.0, 3.0, phi, phi, ws2, &g2).is_ok());
    }

    #[test]
    fn zero_pair_has_zero_energy() {
        let g = Grid::unit(2, 9).unwrap();
        let ps = demo_like(&g, 1, 1);
        let e = energy(&ps, &g, &FieldPair::zeros(&g)).unwrap();
        assert_eq!(e.total, 0.0);
    }

    #[test]
    fn zero_forcing_gives_zero_gradient_at_origin() {
        let g = Grid::unit(2, 9).unwrap();
        let mut ps = demo_like(&g, 2, 3);
        ps.weights.scale_forcing(0.0, 0.0);
        let gr = energy_gradient(&ps, &g, &FieldPair::zeros(&g)).unwrap();
        assert!(gr.u.iter().chain(gr.v.iter()).all(|&x| x == 0.0));
        assert_eq!(residual(&ps, &g, &FieldPair::zeros(&g)).unwrap(), 0.0);
    }

    #[test]
    fn constant_profile_is_quadratic() {
        let g = Grid::new(&[0.0, 0.0], &[1.0, 2.0], &[7, 9]).unwrap();
        let rho = 1.7;
        let mut ps = semilinear(&g, "0");
        ps.phi1 = PhiSpec::constant(rho).unwrap();
        ps.phi2 = PhiSpec::constant(rho).unwrap();
        let z = random_pair(&g, 3, 1.0);
        let full =
            g.norm_w(&z).powi(2) + g.norm_lp(&z.u, 2.0).powi(2) + g.norm_lp(&z.v, 2.0).powi(2);
        let e = energy(&ps, &g, &z).unwrap();
        assert!((e.phi_term - 0.5 * rho * full).abs() <= 1e-12 * full);
    }

    #[test]
    fn breakdown_sums() {
        let g = Grid::unit(2, 9).unwrap();
        let ps = demo_like(&g, 1, 2);
        for seed in 0..20 {
            let e = energy(&ps, &g, &random_pair(&g, seed, 2.0)).unwrap();
            let sum = e.phi_term - e.concave_term - e.coupling_term - e.forcing_term;
            assert!((e.total - sum).abs() <= 1e-12 * sum.abs().max(1e-300));
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let g = Grid::unit(2, 9).unwrap();
        for (f1, f2) in [(1, 1), (2, 3), (3, 2)] {
            let ps = demo_like(&g, f1, f2);
            let z = random_pair(&g, 7, 1.0);
            let an = energy_gradient(&ps, &g, &z).unwrap();
            assert!(an.is_dirichlet(&g));
            let (err, _) = finite_difference_check(&ps, &g, &z, &an, 50, 1e-6, 1).unwrap();
            assert!(err <= 1e-5, "families ({f1},{f2}): {err:e}");
        }
    }

    #[test]
    fn directional_derivatives_converge() {
        let g = Grid::unit(2, 9).unwrap();
        let ps = demo_like(&g, 1, 1);
        let t = 1e-6;
        for seed in 0..100 {
            let z = random_pair(&g, seed, 1.0);
            let w = random_pair(&g, 1000 + seed, 0.1);
            let an = pairing(&g, &energy_gradient(&ps, &g, &z).unwrap(), &w);
            let e0 = energy(&ps, &g, &z).unwrap().total;
            let e1 = energy(&ps, &g, &z.plus(t, &w)).unwrap().total;
            let fd = (e1 - e0) / t;
            assert!(
                (fd - an).abs() <= 1e-5 * an.abs().max(1.0),
                "seed {seed}: {fd} vs {an}"
            );
        }
    }

    #[test]
    fn delta_matches_plain_difference() {
        let g = Grid::unit(2, 9).unwrap();
        let ps = demo_like(&g, 2, 3);
        for seed in 0..20 {
            let z = random_pair(&g, seed, 1.0);
            let mut dz = random_pair(&g, 500 + seed, 0.5);
            // exercise sign crossings and zeros
            dz.u[40] = -z.u[40];
            dz.v[41] = -2.0 * z.v[41];
            let plain = energy(&ps, &g, &z.plus(1.0, &dz)).unwrap().total
                - energy(&ps, &g, &z).unwrap().total;
            let acc = energy_delta(&ps, &g, &z, &dz).unwrap();
            assert!((plain - acc).abs() <= 1e-12 * (1.0 + plain.abs()));
            // tiny steps: the first-order term dominates
            let tiny = dz.scaled(1e-11);
            let lin = pairing(&g, &energy_gradient(&ps, &g, &z).unwrap(), &tiny);
            let d = energy_delta(&ps, &g, &z, &tiny).unwrap();
            assert!((d - lin).abs() <= 1e-6 * lin.abs());
        }
    }

    #[test]
    fn semilinear_gradient_is_the_stencil() {
        // 1-D, 5 interior nodes, φ ≡ 1: G = −u'' + u
        let g = Grid::unit(1, 7).unwrap();
        let ps = semilinear(&g, "0");
        let z = random_pair(&g, 1, 1.0);
        let gr = energy_gradient(&ps, &g, &z).unwrap();
        let h2 = 36.0;
        for j in 1..6 {
            let expect = (2.0 * z.u[j] - z.u[j - 1] - z.u[j + 1]) * h2 + z.u[j];
            assert!((gr.u[j] - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
        }
        assert_eq!(gr.u[0], 0.0);
        assert_eq!(gr.u[6], 0.0);
    }

    fn thomas(diag: f64, off: f64, rhs: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        let (mut c, mut d) = (vec![0.0; n], vec![0.0; n]);
        c[0] = off / diag;
        d[0] = rhs[0] / diag;
        for i in 1..n {
            let m = diag - off * c[i - 1];
            c[i] = off / m;
            d[i] = (rhs[i] - off * d[i - 1]) / m;
        }
        let mut x = vec![0.0; n];
        x[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = d[i] - c[i] * x[i + 1];
        }
        x
    }

    #[test]
    fn direct_linear_solve_is_critical() {
        let g = Grid::unit(1, 33).unwrap();
        let ps = semilinear(&g, "1+x1");
        let h = g.spacing()[0];
        let rhs: Vec<f64> = (1..32).map(|i| ps.weights.h1[i]).collect();
        let x = thomas(2.0 / (h * h) + 1.0, -1.0 / (h * h), &rhs);
        let mut u = Field::zeros(&g);
        u[1..32].copy_from_slice(&x);
        let z = FieldPair::new(u.clone(), u);
        assert!(residual(&ps, &g, &z).unwrap() <= 1e-10);
        let r = residuals(&ps, &g, &z).unwrap();
        assert!(r.h_minus1 <= r.l2);
    }

    #[test]
    fn dual_residual_uses_the_laplacian_inverse() {
        let g = Grid::unit(2, 9).unwrap();
        let ps = demo_like(&g, 1, 1);
        let z = random_pair(&g, 2, 1.0);
        let gr = energy_gradient(&ps, &g, &z).unwrap();
        let (du, _) = laplacian::cg_solve(&g, &gr.u, 1e-14, 1000).unwrap();
        let (dv, _) = laplacian::cg_solve(&g, &gr.v, 1e-14, 1000).unwrap();
        let expect = g.norm_w(&FieldPair::new(du, dv));
        let got = dual_residual_of(&g, &SpectralSolver::new(&g), &gr);
        assert!((got - expect).abs() <= 1e-10 * expect);
    }

    #[test]
    fn component_identity_is_a_directional_derivative() {
        let g = Grid::unit(2, 9).unwrap();
        let ps = demo_like(&g, 2, 1);
        let z = random_pair(&g, 4, 1.0);
        let semi = FieldPair::new(z.u.clone(), Field::zeros(&g));
        let gr = energy_gradient(&ps, &g, &semi).unwrap();
        let along = FieldPair::new(semi.u.clone(), Field::zeros(&g));
        let [ru, rv] = component_identity(&ps, &g, &semi).unwrap();
        let d = pairing(&g, &gr, &along);
        assert!((ru - d).abs() <= 1e-10 * (1.0 + d.abs()));
        assert_eq!(rv, 0.0);
    }

    #[test]
    fn non_finite_energy_reports_node() {
        let g = Grid::unit(1, 5).unwrap();
        let ps = semilinear(&g, "1");
        let mut z = FieldPair::zeros(&g);
        z.u[2] = f64::INFINITY;
        match energy(&ps, &g, &z) {
            Err(Error::NonFinite { coords, .. }) => assert!(!coords.is_empty()),
            other => panic!("{other:?}"),
        }
    }
}
