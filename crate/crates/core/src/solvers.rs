//! Critical points of the discrete energy: a negative-energy minimizer on
//! the ball `‖z‖ ≤ ρ` and a positive-energy mountain-pass point.
//!
//! Descent directions are Sobolev gradients `L⁻¹G`, the Riesz
//! representatives of the energy derivative in the `‖∇·‖₂` inner product.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functional::dual_residual_of;
use crate::functional::{
    component_identity, energy, energy_delta, energy_gradient, pairing, residual_of, ProblemSpec,
};
use crate::grid::{random_field, Field, FieldPair, Grid};
use crate::laplacian::{self, SpectralSolver};
use crate::weights::positive_cells;

mod minimax;

pub use minimax::mountain_pass;

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 80;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverOptions {
    pub max_iters: usize,
    pub step0: f64,
    pub residual_tol: f64,
    pub path_points: usize,
    pub backtracking: f64,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iters: 20_000,
            step0: 1.0,
            residual_tol: 1e-8,
            path_points: 41,
            backtracking: 0.5,
            seed: 0,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let ok = self.max_iters > 0
            && self.step0 > 0.0
            && self.step0.is_finite()
            && self.residual_tol > 0.0
            && self.path_points >= 3
            && self.backtracking > 0.0
            && self.backtracking < 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Solver(format!("invalid solver options {self:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveKind {
    BallMinimizer,
    MountainPass,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIters,
    Stall,
    BoundaryStall,
    GeometryViolation,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub nontrivial: bool,
    pub non_semi_trivial: bool,
    pub energy_sign: i8,
    pub inside_ball: bool,
    /// Energy derivative along `(u, 0)`; zero at a critical point.
    pub rr1_u: f64,
    /// Energy derivative along `(0, v)`.
    pub rr1_v: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveResult {
    #[serde(skip)]
    pub z: FieldPair,
    pub kind: SolveKind,
    pub energy: f64,
    pub residual: f64,
    pub residual_h_minus1: f64,
    pub norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub status: SolveStatus,
    pub classification: Classification,
    /// Working-point energies after each accepted step (path maxima for
    /// the mountain pass).
    #[serde(skip)]
    pub history: Vec<f64>,
}

pub fn classify(
    ps: &ProblemSpec,
    grid: &Grid,
    z: &FieldPair,
    energy: f64,
    radius: f64,
) -> Result<Classification> {
    let floor = 1e-8 * radius;
    let norm = grid.norm_w(z);
    let [rr1_u, rr1_v] = component_identity(ps, grid, z)?;
    Ok(Classification {
        nontrivial: norm > floor,
        non_semi_trivial: grid.norm_lp(&z.u, 2.0) > floor && grid.norm_lp(&z.v, 2.0) > floor,
        energy_sign: if energy > 0.0 {
            1
        } else if energy < 0.0 {
            -1
        } else {
            0
        },
        inside_ball: norm <= radius,
        rr1_u,
        rr1_v,
    })
}

pub(crate) fn finish(
    ps: &ProblemSpec,
    grid: &Grid,
    solver: &SpectralSolver,
    z: FieldPair,
    kind: SolveKind,
    iterations: usize,
    status: SolveStatus,
    history: Vec<f64>,
    radius: f64,
) -> Result<SolveResult> {
    assert!(
        z.is_dirichlet(grid),
        "solver iterate left the Dirichlet space"
    );
    let e = energy(ps, grid, &z)?.total;
    let g = energy_gradient(ps, grid, &z)?;
    Ok(SolveResult {
        kind,
        energy: e,
        residual: residual_of(grid, &g),
        residual_h_minus1: dual_residual_of(grid, solver, &g),
        norm: grid.norm_w(&z),
        iterations,
        converged: status == SolveStatus::Converged,
        status,
        classification: classify(ps, grid, &z, e, radius)?,
        history,
        z,
    })
}

/// `L⁻¹G` componentwise.
pub(crate) fn sobolev_gradient(solver: &SpectralSolver, g: &FieldPair) -> FieldPair {
    FieldPair::new(solver.solve(&g.u), solver.solve(&g.v))
}

fn nonzero_interior(grid: &Grid, f: &Field) -> bool {
    grid.interior().any(|i| f[i] != 0.0)
}

/// Two damped Jacobi sweeps `f ← f − ½ D⁻¹ L f` applied to `h` with its
/// boundary values removed. The sweep operator is symmetric positive
/// definite, so the result pairs positively with `h`.
fn smoothed(grid: &Grid, h: &Field) -> Field {
    let mut f = h.clone();
    grid.zero_boundary(&mut f);
    let diag: f64 = grid.spacing().iter().map(|h| 2.0 / (h * h)).sum();
    for _ in 0..2 {
        let lf = laplacian::apply(grid, &f);
        f.axpy(-0.5 / diag, &lf);
    }
    f
}

/// A point of negative energy strictly inside the ball of radius `radius`,
/// along the ray through the smoothed forcing terms.
pub fn seed_negative(ps: &ProblemSpec, grid: &Grid, radius: f64) -> Result<FieldPair> {
    let w = &ps.weights;
    if !nonzero_interior(grid, &w.h1) || !nonzero_interior(grid, &w.h2) {
        return Err(Error::Hypothesis {
            condition: "H",
            message: "h1 and h2 must both be nonzero at some interior node".into(),
        });
    }
    let dir = FieldPair::new(smoothed(grid, &w.h1), smoothed(grid, &w.h2));
    let t_max = 0.999 * radius / grid.norm_w(&dir);
    let e = |t: f64| energy(ps, grid, &dir.scaled(t)).map(|b| b.total);
    let n = 64;
    let mut best = (0.0, 0.0);
    for j in 1..=n {
        let t = t_max * j as f64 / n as f64;
        let v = e(t)?;
        if v < best.1 {
            best = (t, v);
        }
    }
    if best.1 < 0.0 {
        let step = t_max / n as f64;
        let (mut a, mut b) = ((best.0 - step).max(0.0), (best.0 + step).min(t_max));
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..60 {
            let x1 = b - g * (b - a);
            let x2 = a + g * (b - a);
            if e(x1)? < e(x2)? {
                b = x2;
            } else {
                a = x1;
            }
        }
        let t = 0.5 * (a + b);
        let v = e(t)?;
        if v < best.1 {
            best = (t, v);
        }
    } else {
        let mut t = t_max;
        for _ in 0..60 {
            t *= 0.5;
            let v = e(t)?;
            if v < 0.0 {
                best = (t, v);
                break;
            }
        }
    }
    if best.1 < 0.0 {
        Ok(dir.scaled(best.0))
    } else {
        Err(Error::Solver(
            "no negative energy found along the forcing direction inside the ball".into(),
        ))
    }
}

fn project(grid: &Grid, z: FieldPair, radius: f64) -> FieldPair {
    let n = grid.norm_w(&z);
    if n > radius {
        z.scaled(radius / n)
    } else {
        z
    }
}

/// Projected Sobolev-gradient descent with Armijo backtracking on the
/// closed ball of radius `radius`.
pub fn minimize_on_ball(
    ps: &ProblemSpec,
    grid: &Grid,
    radius: f64,
    z0: &FieldPair,
    opts: &SolverOptions,
) -> Result<SolveResult> {
    opts.validate()?;
    let solver = SpectralSolver::new(grid);
    let start = project(grid, z0.clone(), radius);
    let mut total_iters = 0;
    let mut attempt_start = start.clone();
    let mut last = None;
    for attempt in 0..4u64 {
        let (z, iters, status, history) = descend(
            ps,
            grid,
            &solver,
            radius,
            &attempt_start,
            opts,
            opts.max_iters - total_iters,
        )?;
        total_iters += iters;
        if status != SolveStatus::BoundaryStall || total_iters >= opts.max_iters {
            return finish(
                ps,
                grid,
                &solver,
                z,
                SolveKind::BallMinimizer,
                total_iters,
                status,
                history,
                radius,
            );
        }
        // the minimum over the ball lies inside it: restart from a perturbed interior point
        let mut kick = FieldPair::new(
            random_field(grid, opts.seed.wrapping_add(2 * attempt + 1), 1.0),
            random_field(grid, opts.seed.wrapping_add(2 * attempt + 2), 1.0),
        );
        kick = kick.scaled(0.05 * radius / grid.norm_w(&kick));
        attempt_start = start.scaled(0.5).plus(1.0, &kick);
        last = Some((z, history));
    }
    let (z, history) = last.expect("at least one attempt");
    finish(
        ps,
        grid,
        &solver,
        z,
        SolveKind::BallMinimizer,
        total_iters,
        SolveStatus::BoundaryStall,
        history,
        radius,
    )
}

type Descent = (FieldPair, usize, SolveStatus, Vec<f64>);

fn descend(
    ps: &ProblemSpec,
    grid: &Grid,
    solver: &SpectralSolver,
    radius: f64,
    z0: &FieldPair,
    opts: &SolverOptions,
    budget: usize,
) -> Result<Descent> {
    let mut z = z0.clone();
    let mut e = energy(ps, grid, &z)?.total;
    let mut history = vec![e];
    let mut g = energy_gradient(ps, grid, &z)?;
    let mut step = opts.step0;
    let mut on_sphere = 0;
    for it in 0..budget {
        if residual_of(grid, &g) <= opts.residual_tol {
            return Ok((z, it, SolveStatus::Converged, history));
        }
        let d = sobolev_gradient(solver, &g).scaled(-1.0);
        let mut accepted = None;
        for tries in 0..MAX_BACKTRACKS {
            let trial = project(grid, z.plus(step, &d), radius);
            let mut dz = trial.clone();
            dz.axpy(-1.0, &z);
            let de = energy_delta(ps, grid, &z, &dz)?;
            if de < 0.0 && de <= ARMIJO * pairing(grid, &g, &dz) {
                accepted = Some((trial, de, tries));
                break;
            }
            step *= opts.backtracking;
        }
        let outward = grid.inner_w_pair(&z, &d) > 0.0;
        let Some((trial, de, tries)) = accepted else {
            let pinned = outward && grid.norm_w(&z) >= radius * (1.0 - 1e-12);
            let status = if pinned {
                SolveStatus::BoundaryStall
            } else {
                SolveStatus::Stall
            };
            return Ok((z, it, status, history));
        };
        z = trial;
        e += de;
        history.push(e);
        g = energy_gradient(ps, grid, &z)?;
        if tries == 0 {
            step = (step / opts.backtracking).min(1e6 * opts.step0);
        }
        if outward && grid.norm_w(&z) >= radius * (1.0 - 1e-12) {
            on_sphere += 1;
            if on_sphere >= 200 {
                return Ok((z, it + 1, SolveStatus::BoundaryStall, history));
            }
        } else {
            on_sphere = 0;
        }
    }
    let status = if residual_of(grid, &g) <= opts.residual_tol {
        SolveStatus::Converged
    } else {
        SolveStatus::MaxIters
    };
    Ok((z, budget, status, history))
}

/// Largest box of cells on which `b > 0` at every corner, as per-axis
/// `(first cell, cell count)`. Boxes need at least two cells per axis so
/// that they contain an interior node; the box with the most interior
/// nodes wins.
pub fn positive_box(grid: &Grid, b: &Field) -> Option<Vec<(usize, usize)>> {
    let dim = grid.dim();
    let cells: Vec<usize> = grid.nodes().iter().map(|n| n - 1).collect();
    let flags = positive_cells(grid, b);
    // prefix sums on the cell lattice padded by one leading zero per axis
    let mut es = vec![1; dim];
    for k in 1..dim {
        es[k] = es[k - 1] * (cells[k - 1] + 1);
    }
    let size = es[dim - 1] * (cells[dim - 1] + 1);
    let mut pre = vec![0i64; size];
    for i in 0..grid.len() {
        if flags[i] {
            let m = grid.multi_index(i);
            pre[(0..dim).map(|k| (m[k] + 1) * es[k]).sum::<usize>()] = 1;
        }
    }
    for k in 0..dim {
        for i in 0..size {
            if !(i / es[k]).is_multiple_of(cells[k] + 1) {
                pre[i] += pre[i - es[k]];
            }
        }
    }
    let count = |lo: &[usize], hi: &[usize]| -> i64 {
        (0..1usize << dim)
            .map(|mask| {
                let idx: usize = (0..dim)
                    .map(|k| if mask >> k & 1 == 1 { lo[k] } else { hi[k] } * es[k])
                    .sum();
                if mask.count_ones() % 2 == 0 {
                    pre[idx]
                } else {
                    -pre[idx]
                }
            })
            .sum()
    };
    let last = dim - 1;
    let mut leading: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
    for &c in &cells[..last] {
        leading = leading
            .into_iter()
            .flat_map(|r| {
                (0..c).flat_map(move |a| {
                    let r = r.clone();
                    (a + 2..=c).map(move |e| {
                        let mut x = r.clone();
                        x.push((a, e - a));
                        x
                    })
                })
            })
            .collect();
    }
    let mut best: Option<(usize, Vec<(usize, usize)>)> = None;
    for r in leading {
        let mut lo: Vec<usize> = r.iter().map(|&(a, _)| a).collect();
        let mut hi: Vec<usize> = r.iter().map(|&(a, n)| a + n).collect();
        lo.push(0);
        hi.push(0);
        let slab: i64 = r.iter().map(|&(_, n)| n as i64).product();
        let area: usize = r.iter().map(|&(_, n)| n - 1).product();
        let mut run = 0;
        for c in 0..=cells[last] {
            let full = c < cells[last] && {
                lo[last] = c;
                hi[last] = c + 1;
                count(&lo, &hi) == slab
            };
            if full {
                continue;
            }
            let len = c - run;
            if len >= 2 {
                let score = area * (len - 1);
                if best.as_ref().is_none_or(|(s, _)| score > *s) {
                    let mut boxed = r.clone();
                    boxed.push((run, len));
                    best = Some((score, boxed));
                }
            }
            run = c + 1;
        }
    }
    best.map(|(_, b)| b)
}

/// Tensor `sin²` bump vanishing outside the box and on its faces.
pub fn box_bump(grid: &Grid, boxed: &[(usize, usize)]) -> Field {
    let mut f = Field::zeros(grid);
    for i in 0..grid.len() {
        let m = grid.multi_index(i);
        let mut v = 1.0;
        for (k, &(start, len)) in boxed.iter().enumerate() {
            if m[k] <= start || m[k] >= start + len {
                v = 0.0;
                break;
            }
            v *= (std::f64::consts::PI * (m[k] - start) as f64 / len as f64)
                .sin()
                .powi(2);
        }
        f[i] = v;
    }
    f
}

/// A point with `‖z‖ > radius` and negative energy, built from a bump on
/// the largest box where `b > 0`.
pub fn endpoint_beyond_sphere(ps: &ProblemSpec, grid: &Grid, radius: f64) -> Result<FieldPair> {
    let boxed = positive_box(grid, &ps.weights.b).ok_or_else(|| Error::Hypothesis {
        condition: "B",
        message: "no box of at least two cells per axis with b > 0 at every corner".into(),
    })?;
    let bump = box_bump(grid, &boxed);
    let dir = FieldPair::new(bump.clone(), bump);
    let mut t = radius / grid.norm_w(&dir);
    for _ in 0..60 {
        t *= 2.0;
        let z = dir.scaled(t);
        if grid.norm_w(&z) > radius && energy(ps, grid, &z)?.total < 0.0 {
            return Ok(z);
        }
    }
    Err(Error::Solver(
        "energy along the bump ray stayed nonnegative for 60 doublings".into(),
    ))
}

#[cfg(test)]
mod tests;
