//! Mountain-pass search. A discrete path from the origin to the endpoint
//! is deformed by descending its highest point; the highest point is then
//! polished into a critical point by min-mode following, which climbs
//! along the direction of most negative curvature and descends along the
//! rest.

use super::*;

const REPARAM_EVERY: usize = 10;
const LANCZOS_STEPS: usize = 16;

fn argmax_interior(en: &[f64]) -> usize {
    let mut k = 1;
    for j in 2..en.len() - 1 {
        if en[j] > en[k] {
            k = j;
        }
    }
    k
}

/// Re-space the path at equal `‖∇·‖₂` arclength, endpoints fixed.
fn reparametrize(grid: &Grid, path: &[FieldPair]) -> Vec<FieldPair> {
    let n = path.len();
    let mut arc = vec![0.0; n];
    for j in 1..n {
        let mut d = path[j].clone();
        d.axpy(-1.0, &path[j - 1]);
        arc[j] = arc[j - 1] + grid.norm_w(&d);
    }
    let total = arc[n - 1];
    let mut out = Vec::with_capacity(n);
    out.push(path[0].clone());
    let mut seg = 1;
    for j in 1..n - 1 {
        let target = total * j as f64 / (n - 1) as f64;
        while seg < n - 1 && arc[seg] < target {
            seg += 1;
        }
        let width = arc[seg] - arc[seg - 1];
        let theta = if width > 0.0 {
            (target - arc[seg - 1]) / width
        } else {
            0.0
        };
        out.push(path[seg - 1].scaled(1.0 - theta).plus(theta, &path[seg]));
    }
    out.push(path[n - 1].clone());
    out
}

fn path_length(grid: &Grid, path: &[FieldPair]) -> f64 {
    path.windows(2)
        .map(|w| {
            let mut d = w[1].clone();
            d.axpy(-1.0, &w[0]);
            grid.norm_w(&d)
        })
        .sum()
}

fn energies(ps: &ProblemSpec, grid: &Grid, path: &[FieldPair]) -> Result<Vec<f64>> {
    path.iter()
        .map(|z| energy(ps, grid, z).map(|e| e.total))
        .collect()
}

pub fn mountain_pass(
    ps: &ProblemSpec,
    grid: &Grid,
    radius: f64,
    endpoint: &FieldPair,
    opts: &SolverOptions,
) -> Result<SolveResult> {
    opts.validate()?;
    let solver = SpectralSolver::new(grid);
    let n = opts.path_points;
    let mut path: Vec<FieldPair> = (0..n)
        .map(|k| endpoint.scaled(k as f64 / (n - 1) as f64))
        .collect();
    let mut en = energies(ps, grid, &path)?;
    let mut history = Vec::new();
    let mut step = opts.step0;
    let mut best = f64::INFINITY;
    let mut stagnant = 0;
    let mut it = 0;
    let mut k = argmax_interior(&en);
    while it < opts.max_iters {
        k = argmax_interior(&en);
        history.push(en[k]);
        let g = energy_gradient(ps, grid, &path[k])?;
        let r = residual_of(grid, &g);
        if r <= opts.residual_tol {
            return done(
                ps,
                grid,
                &solver,
                path.swap_remove(k),
                it,
                SolveStatus::Converged,
                history,
                radius,
            );
        }
        if r < 0.5 * best {
            best = r;
            stagnant = 0;
        } else {
            stagnant += 1;
        }
        if stagnant > 50 {
            break;
        }
        // descend across the path, not along it
        let mut tangent = path[k + 1].clone();
        tangent.axpy(-1.0, &path[k - 1]);
        let tangent = tangent.scaled(1.0 / grid.norm_w(&tangent));
        let mut d = sobolev_gradient(&solver, &g).scaled(-1.0);
        let along = grid.inner_w_pair(&d, &tangent);
        d.axpy(-along, &tangent);
        let slope = pairing(grid, &g, &d);
        // keep neighbours close so the sampled path stays a resolved curve
        let cap = 0.5 * path_length(grid, &path) / (n - 1) as f64;
        let mut local = step.min(cap / grid.norm_w(&d));
        let mut accepted = None;
        for tries in 0..MAX_BACKTRACKS {
            let dz = d.scaled(local);
            let de = energy_delta(ps, grid, &path[k], &dz)?;
            if de < 0.0 && de <= ARMIJO * local * slope {
                accepted = Some((dz, de, tries));
                break;
            }
            local *= opts.backtracking;
            step = step.min(local);
        }
        let Some((dz, de, tries)) = accepted else {
            break;
        };
        path[k].axpy(1.0, &dz);
        en[k] += de;
        it += 1;
        if tries == 0 {
            step = (step / opts.backtracking).min(1e6 * opts.step0);
        }
        if it % REPARAM_EVERY == 0 {
            let moved = reparametrize(grid, &path);
            let moved_en = energies(ps, grid, &moved)?;
            let old_max = en[1..n - 1]
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max);
            let new_max = moved_en[1..n - 1]
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max);
            if new_max <= old_max {
                path = moved;
                en = moved_en;
            }
        }
    }
    let (lo, hi) = (path[k - 1].clone(), path[k + 1].clone());
    let z = path.swap_remove(k);
    let mut tangent = hi;
    tangent.axpy(-1.0, &lo);
    polish(ps, grid, &solver, z, tangent, it, history, radius, opts)
}

#[allow(clippy::too_many_arguments)]
fn done(
    ps: &ProblemSpec,
    grid: &Grid,
    solver: &SpectralSolver,
    z: FieldPair,
    iters: usize,
    status: SolveStatus,
    history: Vec<f64>,
    radius: f64,
) -> Result<SolveResult> {
    let mut out = finish(
        ps,
        grid,
        solver,
        z,
        SolveKind::MountainPass,
        iters,
        status,
        history,
        radius,
    )?;
    if out.energy <= 0.0 {
        out.status = SolveStatus::GeometryViolation;
        out.converged = false;
    }
    Ok(out)
}

/// `H v` by central differences of the gradient.
fn hessian_apply(
    ps: &ProblemSpec,
    grid: &Grid,
    z: &FieldPair,
    v: &FieldPair,
    eps: f64,
) -> Result<FieldPair> {
    let mut plus = energy_gradient(ps, grid, &z.plus(eps, v))?;
    let minus = energy_gradient(ps, grid, &z.plus(-eps, v))?;
    plus.axpy(-1.0, &minus);
    Ok(plus.scaled(0.5 / eps))
}

/// Lowest eigenpair of `L⁻¹H` (self-adjoint in the `‖∇·‖₂` inner product)
/// by Lanczos with full reorthogonalization, started from `start`.
fn min_mode(
    ps: &ProblemSpec,
    grid: &Grid,
    solver: &SpectralSolver,
    z: &FieldPair,
    start: &FieldPair,
) -> Result<(f64, FieldPair)> {
    let eps = 1e-6 * grid.norm_w(z).max(1e-3);
    let mut basis = vec![start.scaled(1.0 / grid.norm_w(start))];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    for j in 0..LANCZOS_STEPS {
        let hv = hessian_apply(ps, grid, z, &basis[j], eps)?;
        let mut w = sobolev_gradient(solver, &hv);
        alpha.push(grid.inner_w_pair(&w, &basis[j]));
        for _ in 0..2 {
            for q in &basis {
                let c = grid.inner_w_pair(&w, q);
                w.axpy(-c, q);
            }
        }
        let b = grid.norm_w(&w);
        if b <= 1e-10 * alpha[j].abs().max(1.0) || j + 1 == LANCZOS_STEPS {
            break;
        }
        beta.push(b);
        basis.push(w.scaled(1.0 / b));
    }
    let m = alpha.len();
    let mut t = vec![0.0; m * m];
    for i in 0..m {
        t[i * m + i] = alpha[i];
        if i + 1 < m {
            t[i * m + i + 1] = beta[i];
            t[(i + 1) * m + i] = beta[i];
        }
    }
    let (values, vectors) = symmetric_eigen(t, m);
    let low = (0..m)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .expect("nonempty");
    let mut mode = FieldPair::zeros(grid);
    for i in 0..m {
        mode.axpy(vectors[i * m + low], &basis[i]);
    }
    let norm = grid.norm_w(&mode);
    Ok((values[low], mode.scaled(1.0 / norm)))
}

/// Cyclic Jacobi rotations; returns eigenvalues and column eigenvectors.
fn symmetric_eigen(mut a: Vec<f64>, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j].powi(2))
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i * n + i]).collect(), v)
}

#[allow(clippy::too_many_arguments)]
fn polish(
    ps: &ProblemSpec,
    grid: &Grid,
    solver: &SpectralSolver,
    mut z: FieldPair,
    tangent: FieldPair,
    mut it: usize,
    history: Vec<f64>,
    radius: f64,
    opts: &SolverOptions,
) -> Result<SolveResult> {
    let mut mode = tangent;
    let mut g = energy_gradient(ps, grid, &z)?;
    let mut d = sobolev_gradient(solver, &g);
    let mut merit = grid.inner_w_pair(&d, &d);
    let mut step = 1.0;
    while it < opts.max_iters {
        if residual_of(grid, &g) <= opts.residual_tol {
            return done(
                ps,
                grid,
                solver,
                z,
                it,
                SolveStatus::Converged,
                history,
                radius,
            );
        }
        let (_, m) = min_mode(ps, grid, solver, &z, &mode)?;
        mode = m;
        // reflect the Sobolev gradient across the unstable direction
        let c = grid.inner_w_pair(&d, &mode);
        let mut p = d.scaled(-1.0);
        p.axpy(2.0 * c, &mode);
        let mut accepted = false;
        for _ in 0..MAX_BACKTRACKS {
            let trial = z.plus(step, &p);
            let tg = energy_gradient(ps, grid, &trial)?;
            let td = sobolev_gradient(solver, &tg);
            let tm = grid.inner_w_pair(&td, &td);
            if tm < (1.0 - ARMIJO * step) * merit {
                z = trial;
                g = tg;
                d = td;
                merit = tm;
                accepted = true;
                break;
            }
            step *= opts.backtracking;
        }
        if !accepted {
            return done(ps, grid, solver, z, it, SolveStatus::Stall, history, radius);
        }
        it += 1;
        step = (step / opts.backtracking).min(1.0);
    }
    let status = if residual_of(grid, &g) <= opts.residual_tol {
        SolveStatus::Converged
    } else {
        SolveStatus::MaxIters
    };
    done(ps, grid, solver, z, it, status, history, radius)
}
