//! Tensor grids on a box, nodal fields and forward-difference calculus.
//!
//! Node `i` has multi-index `(i₁, …, i_N)` with axis 0 varying fastest.
//! The gradient at a node is the forward difference along each axis; beyond
//! the upper face the field is extended by 0, matching the Dirichlet data.
//! Integrals are rectangle rules with weight `h₁⋯h_N`, one node per cell
//! (the lower corner). Dirichlet fields vanish on the upper faces, so for
//! them this equals the sum over all nodes.

use std::ops::{Deref, DerefMut};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    lower: Vec<f64>,
    upper: Vec<f64>,
    nodes: Vec<usize>,
    #[serde(skip)]
    spacing: Vec<f64>,
    #[serde(skip)]
    strides: Vec<usize>,
    #[serde(skip)]
    boundary: Vec<bool>,
    #[serde(skip)]
    quadrature: Vec<bool>,
}

impl Grid {
    pub fn new(lower: &[f64], upper: &[f64], nodes: &[usize]) -> Result<Grid> {
        let dim = nodes.len();
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3")));
        }
        if lower.len() != dim || upper.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "corner lengths {} and {} do not match dimension {dim}",
                lower.len(),
                upper.len()
            )));
        }
        let mut spacing = Vec::with_capacity(dim);
        for k in 0..dim {
            if nodes[k] < 3 {
                return Err(Error::InvalidGrid(format!(
                    "axis {} has {} nodes (need >= 3)",
                    k + 1,
                    nodes[k]
                )));
            }
            let h = (upper[k] - lower[k]) / (nodes[k] - 1) as f64;
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidGrid(format!(
                    "axis {} has nonpositive extent [{}, {}]",
                    k + 1,
                    lower[k],
                    upper[k]
                )));
            }
            spacing.push(h);
        }
        let mut strides = vec![1; dim];
        for k in 1..dim {
            strides[k] = strides[k - 1] * nodes[k - 1];
        }
        let len: usize = nodes.iter().product();
        let mut grid = Grid {
            lower: lower.to_vec(),
            upper: upper.to_vec(),
            nodes: nodes.to_vec(),
            spacing,
            strides,
            boundary: Vec::new(),
            quadrature: Vec::new(),
        };
        grid.boundary = (0..len)
            .map(|i| {
                let m = grid.multi_index(i);
                (0..dim).any(|k| m[k] == 0 || m[k] == grid.nodes[k] - 1)
            })
            .collect();
        grid.quadrature = (0..len)
            .map(|i| {
                let m = grid.multi_index(i);
                (0..dim).all(|k| m[k] < grid.nodes[k] - 1)
            })
            .collect();
        Ok(grid)
    }

    /// Unit box `[0,1]^N` with `n` nodes per axis.
    pub fn unit(dim: usize, n: usize) -> Result<Grid> {
        Grid::new(&vec![0.0; dim], &vec![1.0; dim], &vec![n; dim])
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn len(&self) -> usize {
        self.boundary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boundary.is_empty()
    }

    /// `h₁⋯h_N`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    pub fn measure(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(a, b)| b - a)
            .product()
    }

    pub fn interior_count(&self) -> usize {
        self.nodes.iter().map(|n| n - 2).product()
    }

    pub fn multi_index(&self, i: usize) -> [usize; 3] {
        let mut m = [0; 3];
        let mut rest = i;
        for k in 0..self.dim() {
            m[k] = rest % self.nodes[k];
            rest /= self.nodes[k];
        }
        m
    }

    pub fn index(&self, m: &[usize]) -> usize {
        m.iter().zip(&self.strides).map(|(a, s)| a * s).sum()
    }

    pub fn coords(&self, i: usize) -> Vec<f64> {
        let m = self.multi_index(i);
        (0..self.dim())
            .map(|k| self.lower[k] + m[k] as f64 * self.spacing[k])
            .collect()
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        self.boundary[i]
    }

    /// True when node `i` lies on the upper face of axis `k`.
    pub fn on_upper_face(&self, i: usize, k: usize) -> bool {
        (i / self.strides[k]) % self.nodes[k] == self.nodes[k] - 1
    }

    pub fn interior(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&i| !self.boundary[i])
    }

    pub fn zero_boundary(&self, f: &mut Field) {
        for (v, &b) in f.iter_mut().zip(&self.boundary) {
            if b {
                *v = 0.0;
            }
        }
    }

    pub fn is_dirichlet(&self, f: &Field) -> bool {
        f.len() == self.len() && f.iter().zip(&self.boundary).all(|(&v, &b)| !b || v == 0.0)
    }

    /// Forward-difference gradient, `dim` entries per node (node-major).
    pub fn gradient_field(&self, f: &Field) -> Vec<f64> {
        let dim = self.dim();
        let mut g = vec![0.0; self.len() * dim];
        for i in 0..self.len() {
            for k in 0..dim {
                let next = if self.on_upper_face(i, k) {
                    0.0
                } else {
                    f[i + self.strides[k]]
                };
                g[i * dim + k] = (next - f[i]) / self.spacing[k];
            }
        }
        g
    }

    /// Adjoint of the forward difference (a discrete −div) applied to a
    /// node-major vector field, evaluated at interior nodes.
    pub fn gradient_adjoint(&self, w: &[f64]) -> Field {
        let dim = self.dim();
        let mut out = Field::zeros(self);
        for j in self.interior() {
            let mut acc = 0.0;
            for k in 0..dim {
                acc += (w[(j - self.strides[k]) * dim + k] - w[j * dim + k]) / self.spacing[k];
            }
            out[j] = acc;
        }
        out
    }

    /// `∫|∇a·∇b|`-style pairing: Σ ∇a·∇b times the cell volume.
    pub fn inner_w(&self, a: &Field, b: &Field) -> f64 {
        let ga = self.gradient_field(a);
        let gb = self.gradient_field(b);
        ga.iter().zip(&gb).map(|(x, y)| x * y).sum::<f64>() * self.cell_volume()
    }

    /// `‖∇f‖₂`, the H¹₀ seminorm of a single field.
    pub fn seminorm(&self, f: &Field) -> f64 {
        self.inner_w(f, f).sqrt()
    }

    /// `‖z‖ = (∫|∇u|² + |∇v|²)^{1/2}`.
    pub fn norm_w(&self, z: &FieldPair) -> f64 {
        (self.inner_w(&z.u, &z.u) + self.inner_w(&z.v, &z.v)).sqrt()
    }

    /// W inner product of two pairs.
    pub fn inner_w_pair(&self, a: &FieldPair, b: &FieldPair) -> f64 {
        self.inner_w(&a.u, &b.u) + self.inner_w(&a.v, &b.v)
    }

    /// True for the nodes carried by the quadrature rule.
    pub fn in_quadrature(&self, i: usize) -> bool {
        self.quadrature[i]
    }

    /// Rectangle-rule `(Σ|f|^p h^N)^{1/p}`; `p = ∞` gives the max norm.
    pub fn norm_lp(&self, f: &[f64], p: f64) -> f64 {
        if p.is_infinite() {
            return norm_linf(f);
        }
        let vol = self.cell_volume();
        let nodes = f
            .iter()
            .zip(&self.quadrature)
            .filter(|(_, &q)| q)
            .map(|(x, _)| x.abs());
        if p == 2.0 {
            return (nodes.map(|x| x * x).sum::<f64>() * vol).sqrt();
        }
        (nodes.map(|x| x.powf(p)).sum::<f64>() * vol).powf(1.0 / p)
    }

    /// Discrete pairing `Σ f·g h^N`.
    pub fn pairing(&self, f: &[f64], g: &[f64]) -> f64 {
        f.iter()
            .zip(g)
            .zip(&self.quadrature)
            .filter(|(_, &q)| q)
            .map(|((a, b), _)| a * b)
            .sum::<f64>()
            * self.cell_volume()
    }
}

pub fn norm_linf(f: &[f64]) -> f64 {
    f.iter().fold(0.0, |m: f64, x| m.max(x.abs()))
}

/// Deterministic pseudo-random Dirichlet field with interior values in
/// `[-amplitude, amplitude]`.
pub fn random_field(grid: &Grid, seed: u64, amplitude: f64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = Field::zeros(grid);
    if amplitude > 0.0 {
        for i in 0..grid.len() {
            // draw for every node so the stream does not depend on the boundary layout
            let x: f64 = rng.gen_range(-1.0..=1.0);
            if !grid.is_boundary(i) {
                f[i] = amplitude * x;
            }
        }
    }
    f
}

/// One value per grid node.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Field(Vec<f64>);

impl Field {
    pub fn zeros(grid: &Grid) -> Field {
        Field(vec![0.0; grid.len()])
    }

    pub fn from_vec(values: Vec<f64>) -> Field {
        Field(values)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn scaled(&self, s: f64) -> Field {
        Field(self.0.iter().map(|x| s * x).collect())
    }

    /// `self += s·other`
    pub fn axpy(&mut self, s: f64, other: &Field) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += s * b;
        }
    }

    pub fn dot(&self, other: &Field) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }
}

impl Deref for Field {
    type Target = Vec<f64>;

    fn deref(&self) -> &Vec<f64> {
        &self.0
    }
}

impl DerefMut for Field {
    fn deref_mut(&mut self) -> &mut Vec<f64> {
        &mut self.0
    }
}

/// `z = (u, v)` on one grid.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FieldPair {
    pub u: Field,
    pub v: Field,
}

impl FieldPair {
    pub fn new(u: Field, v: Field) -> FieldPair {
        FieldPair { u, v }
    }

    pub fn zeros(grid: &Grid) -> FieldPair {
        FieldPair::new(Field::zeros(grid), Field::zeros(grid))
    }

    pub fn scaled(&self, s: f64) -> FieldPair {
        FieldPair::new(self.u.scaled(s), self.v.scaled(s))
    }

    pub fn axpy(&mut self, s: f64, other: &FieldPair) {
        self.u.axpy(s, &other.u);
        self.v.axpy(s, &other.v);
    }

    /// `self + s·other`
    pub fn plus(&self, s: f64, other: &FieldPair) -> FieldPair {
        let mut out = self.clone();
        out.axpy(s, other);
        out
    }

    pub fn dot(&self, other: &FieldPair) -> f64 {
        self.u.dot(&other.u) + self.v.dot(&other.v)
    }

    pub fn is_dirichlet(&self, grid: &Grid) -> bool {
        grid.is_dirichlet(&self.u) && grid.is_dirichlet(&self.v)
    }
}
