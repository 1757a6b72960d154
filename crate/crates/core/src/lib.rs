//! Variational toolkit for the coupled quasilinear Dirichlet system
//!
//! ```text
//! -div(φ₁((u²+|∇u|²)/2)∇u) + φ₁(·)u = λa|u|^{q-2}u + α/(α+β) b|u|^{α-2}u|v|^β + h₁
//! -div(φ₂((v²+|∇v|²)/2)∇v) + φ₂(·)v = μc|v|^{q-2}v + β/(α+β) b|u|^α|v|^{β-2}v + h₂
//! ```
//!
//! on a rectangular box with homogeneous Dirichlet data. The crate provides
//!
//! - [`phi`]: the catalogued diffusion profiles φ and their condition checker,
//! - [`expr`] and [`weights`]: closed-form weights `a, b, c, h₁, h₂`,
//! - [`grid`]: the tensor grid, forward-difference gradients and discrete norms,
//! - [`functional`]: the discrete energy, its exact gradient and residuals,
//! - [`thresholds`]: discrete Sobolev constants and the admissibility constants,
//! - [`solvers`]: the negative-energy ball minimizer and the mountain-pass point.

pub mod error;
pub mod expr;
pub mod functional;
pub mod grid;
pub mod laplacian;
pub mod phi;
pub mod solvers;
pub mod thresholds;
pub mod weights;

pub use error::{Error, Result};
pub use expr::Expr;
pub use functional::{EnergyBreakdown, ProblemSpec};
pub use grid::{Field, FieldPair, Grid};
pub use phi::{ConditionReport, PhiSpec};
pub use solvers::{SolveResult, SolverOptions};
pub use thresholds::{SobolevConstants, ThresholdReport};
pub use weights::WeightSet;
