//! The discrete Dirichlet Laplacian `L = Dᵀ D` induced by the
//! forward-difference quadratic form `Σ|∇f|² h^N`, and two ways to invert it.

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

/// `(L f)_j = Σ_k (2f_j − f_{j−e_k} − f_{j+e_k}) / h_k²` at interior nodes.
pub fn apply(grid: &Grid, f: &Field) -> Field {
    let mut out = Field::zeros(grid);
    let strides = grid.strides();
    let h = grid.spacing();
    for j in grid.interior() {
        let mut acc = 0.0;
        for k in 0..grid.dim() {
            let s = strides[k];
            acc += (2.0 * f[j] - f[j - s] - f[j + s]) / (h[k] * h[k]);
        }
        out[j] = acc;
    }
    out
}

/// Conjugate gradients for `L x = rhs`; stops when `‖r‖ ≤ tol·‖rhs‖`.
/// Returns the solution and the iteration count.
pub fn cg_solve(grid: &Grid, rhs: &Field, tol: f64, max_iters: usize) -> Result<(Field, usize)> {
    let mut b = rhs.clone();
    grid.zero_boundary(&mut b);
    let bnorm = b.dot(&b).sqrt();
    let mut x = Field::zeros(grid);
    if bnorm == 0.0 {
        return Ok((x, 0));
    }
    let mut r = b;
    let mut p = r.clone();
    let mut rr = r.dot(&r);
    for it in 1..=max_iters {
        let ap = apply(grid, &p);
        let alpha = rr / p.dot(&ap);
        x.axpy(alpha, &p);
        r.axpy(-alpha, &ap);
        let rr_new = r.dot(&r);
        if rr_new.sqrt() <= tol * bnorm {
            return Ok((x, it));
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for (pi, ri) in p.iter_mut().zip(r.iter()) {
            *pi = ri + beta * *pi;
        }
    }
    Err(Error::NoConvergence(format!(
        "conjugate gradients did not reach {tol:e} in {max_iters} iterations"
    )))
}

/// Direct solver diagonalizing `L` with the discrete sine basis on each axis.
#[derive(Clone, Debug)]
pub struct SpectralSolver {
    interior: Vec<usize>,
    // sine matrices, one per axis, row-major m×m
    basis: Vec<Vec<f64>>,
    eigen: Vec<f64>,
    node_of: Vec<usize>,
    len: usize,
}

impl SpectralSolver {
    pub fn new(grid: &Grid) -> SpectralSolver {
        let dim = grid.dim();
        let interior: Vec<usize> = grid.nodes().iter().map(|n| n - 2).collect();
        let mut basis = Vec::with_capacity(dim);
        let mut axis_eigen = Vec::with_capacity(dim);
        for k in 0..dim {
            let m = interior[k];
            let denom = (m + 1) as f64;
            let mut s = vec![0.0; m * m];
            for i in 0..m {
                for j in 0..m {
                    s[i * m + j] =
                        (std::f64::consts::PI * ((i + 1) * (j + 1)) as f64 / denom).sin();
                }
            }
            basis.push(s);
            let h = grid.spacing()[k];
            axis_eigen.push(
                (0..m)
                    .map(|i| {
                        let w = (std::f64::consts::PI * (i + 1) as f64 / (2.0 * denom)).sin();
                        4.0 * w * w / (h * h)
                    })
                    .collect::<Vec<_>>(),
            );
        }
        let count: usize = interior.iter().product();
        let mut eigen = Vec::with_capacity(count);
        let mut node_of = Vec::with_capacity(count);
        for c in 0..count {
            let mut rest = c;
            let mut lam = 0.0;
            let mut node = 0;
            for k in 0..dim {
                let ik = rest % interior[k];
                rest /= interior[k];
                lam += axis_eigen[k][ik];
                node += (ik + 1) * grid.strides()[k];
            }
            eigen.push(lam);
            node_of.push(node);
        }
        SpectralSolver {
            interior,
            basis,
            eigen,
            node_of,
            len: grid.len(),
        }
    }

    /// Smallest eigenvalue of `L`.
    pub fn lambda_min(&self) -> f64 {
        self.eigen[0]
    }

    fn transform(&self, data: &mut [f64]) {
        let mut stride = 1;
        let mut scratch = Vec::new();
        for (k, &m) in self.interior.iter().enumerate() {
            let s = &self.basis[k];
            let block = stride * m;
            scratch.resize(m, 0.0);
            for start in (0..data.len()).step_by(block) {
                for off in 0..stride {
                    let base = start + off;
                    for i in 0..m {
                        let row = &s[i * m..(i + 1) * m];
                        let mut acc = 0.0;
                        for j in 0..m {
                            acc += row[j] * data[base + j * stride];
                        }
                        scratch[i] = acc;
                    }
                    for i in 0..m {
                        data[base + i * stride] = scratch[i];
                    }
                }
            }
            stride = block;
        }
    }

    /// Exact (to roundoff) solution of `L x = rhs` on the interior.
    pub fn solve(&self, rhs: &Field) -> Field {
        let mut data: Vec<f64> = self.node_of.iter().map(|&i| rhs[i]).collect();
        self.transform(&mut data);
        let norm: f64 = self
            .interior
            .iter()
            .map(|&m| 2.0 / (m + 1) as f64)
            .product();
        for (d, lam) in data.iter_mut().zip(&self.eigen) {
            *d *= norm / lam;
        }
        self.transform(&mut data);
        let mut out = Field::from_vec(vec![0.0; self.len]);
        for (&i, d) in self.node_of.iter().zip(&data) {
            out[i] = *d;
        }
        out
    }
}
