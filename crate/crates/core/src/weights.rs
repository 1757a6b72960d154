//! Coefficient functions `a, b, c, h₁, h₂` sampled at grid nodes, and the
//! discrete checks of the standing hypotheses on them.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::grid::{norm_linf, Field, Grid};

/// Sample an expression at every node, boundary included.
pub fn sample(expr: &Expr, grid: &Grid) -> Result<Field> {
    let k = expr.max_var();
    if k > grid.dim() {
        return Err(Error::Eval(format!(
            "x{k} used on a {}-dimensional grid",
            grid.dim()
        )));
    }
    let mut out = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let x = grid.coords(i);
        match expr.eval(&x) {
            Ok(v) => out.push(v),
            Err(e) => {
                return Err(Error::EvalAtNode {
                    coords: x,
                    message: e.to_string(),
                })
            }
        }
    }
    Ok(Field::from_vec(out))
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightExprs {
    pub a: Expr,
    pub b: Expr,
    pub c: Expr,
    pub h1: Expr,
    pub h2: Expr,
}

impl WeightExprs {
    pub fn parse(a: &str, b: &str, c: &str, h1: &str, h2: &str) -> Result<WeightExprs> {
        Ok(WeightExprs {
            a: a.parse()?,
            b: b.parse()?,
            c: c.parse()?,
            h1: h1.parse()?,
            h2: h2.parse()?,
        })
    }
}

/// Expressions together with their nodal samples on one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSet {
    pub exprs: WeightExprs,
    pub a: Field,
    pub b: Field,
    pub c: Field,
    pub h1: Field,
    pub h2: Field,
}

impl WeightSet {
    pub fn sample(exprs: WeightExprs, grid: &Grid) -> Result<WeightSet> {
        Ok(WeightSet {
            a: sample(&exprs.a, grid)?,
            b: sample(&exprs.b, grid)?,
            c: sample(&exprs.c, grid)?,
            h1: sample(&exprs.h1, grid)?,
            h2: sample(&exprs.h2, grid)?,
            exprs,
        })
    }

    pub fn from_strs(
        a: &str,
        b: &str,
        c: &str,
        h1: &str,
        h2: &str,
        grid: &Grid,
    ) -> Result<WeightSet> {
        WeightSet::sample(WeightExprs::parse(a, b, c, h1, h2)?, grid)
    }

    /// Multiply both forcing terms, keeping expressions and samples in step.
    pub fn scale_forcing(&mut self, f1: f64, f2: f64) {
        self.exprs.h1 = self.exprs.h1.scaled(f1);
        self.exprs.h2 = self.exprs.h2.scaled(f2);
        self.h1 = self.h1.scaled(f1);
        self.h2 = self.h2.scaled(f2);
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// `‖h₁‖₂² + ‖h₂‖₂²` with the grid quadrature.
    pub fn forcing_norm_sq(&self, grid: &Grid) -> f64 {
        grid.norm_lp(&self.h1, 2.0).powi(2) + grid.norm_lp(&self.h2, 2.0).powi(2)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub b_positive_cell: bool,
    pub positive_cells: usize,
    pub total_cells: usize,
    pub h_nontrivial: bool,
    pub h1_l2: f64,
    pub h2_l2: f64,
    pub a_integrable: bool,
    pub integrability_exponent: f64,
    pub a_norm: f64,
    pub c_norm: f64,
    pub b_inf: f64,
    pub a_changes_sign: bool,
    pub b_changes_sign: bool,
    pub c_changes_sign: bool,
    pub note: String,
}

impl HypothesisReport {
    /// Name of the first failing hypothesis, if any.
    pub fn first_failure(&self) -> Option<&'static str> {
        if !self.b_positive_cell {
            Some("B")
        } else if !self.h_nontrivial {
            Some("H")
        } else {
            None
        }
    }
}

/// Per-cell flag: all `2^N` corners of the cell have `b > 0`. Cells are
/// indexed by their lower corner node.
pub fn positive_cells(grid: &Grid, b: &Field) -> Vec<bool> {
    let dim = grid.dim();
    let strides = grid.strides();
    (0..grid.len())
        .map(|i| {
            grid.in_quadrature(i)
                && (0..1usize << dim).all(|corner| {
                    let off: usize = (0..dim)
                        .filter(|k| corner >> k & 1 == 1)
                        .map(|k| strides[k])
                        .sum();
                    b[i + off] > 0.0
                })
        })
        .collect()
}

fn changes_sign(f: &Field) -> bool {
    f.iter().any(|&x| x > 0.0) && f.iter().any(|&x| x < 0.0)
}

pub fn check_hypotheses(ws: &WeightSet, grid: &Grid, q: f64, ab_sum: f64) -> HypothesisReport {
    let cells = positive_cells(grid, &ws.b);
    let positive = cells.iter().filter(|&&c| c).count();
    let total: usize = grid.nodes().iter().map(|n| n - 1).product();
    let r = ab_sum / (ab_sum - q);
    let h1_l2 = grid.norm_lp(&ws.h1, 2.0);
    let h2_l2 = grid.norm_lp(&ws.h2, 2.0);
    let a_norm = grid.norm_lp(&ws.a, r);
    let c_norm = grid.norm_lp(&ws.c, r);
    HypothesisReport {
        b_positive_cell: positive > 0,
        positive_cells: positive,
        total_cells: total,
        h_nontrivial: h1_l2 > 0.0 && h2_l2 > 0.0,
        h1_l2,
        h2_l2,
        a_integrable: true,
        integrability_exponent: r,
        a_norm,
        c_norm,
        b_inf: norm_linf(&ws.b),
        a_changes_sign: changes_sign(&ws.a),
        b_changes_sign: changes_sign(&ws.b),
        c_changes_sign: changes_sign(&ws.c),
        note: format!(
            "continuous weights on a bounded box lie in every L^p; discrete L^{r:.6} norms a = {a_norm:.6e}, c = {c_norm:.6e}"
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn weights(grid: &Grid, b: &str, h: &str) -> WeightSet {
        WeightSet::from_strs("sin(2*pi*x1)", b, "cos(2*pi*x2)", h, h, grid).unwrap()
    }

    #[test]
    fn sampling_examples() {
        let g = Grid::unit(1, 5).unwrap();
        assert_eq!(
            sample(&"x1".parse().unwrap(), &g).unwrap().to_vec(),
            vec![0.0, 0.25, 0.5, 0.75, 1.0]
        );
        assert!(sample(&"1".parse().unwrap(), &g)
            .unwrap()
            .iter()
            .all(|&x| x == 1.0));
        let zero = sample(&"0".parse().unwrap(), &g).unwrap();
        assert!(zero.iter().all(|&x| x == 0.0 && x.is_sign_positive()));

        let g = Grid::unit(1, 17).unwrap();
        let s = sample(&"sin(2*pi*x1)".parse().unwrap(), &g).unwrap();
        for i in 0..g.len() {
            let direct = (2.0 * std::f64::consts::PI * g.coords(i)[0]).sin();
            assert!(s[i].signum() == direct.signum());
        }
        assert!(s.iter().any(|&x| x > 0.0) && s.iter().any(|&x| x < 0.0));
    }

    #[test]
    fn sampling_errors_carry_coordinates() {
        let g = Grid::unit(2, 3).unwrap();
        match sample(&"1/(x1-0.5)".parse().unwrap(), &g) {
            Err(Error::EvalAtNode { coords, .. }) => assert_eq!(coords, vec![0.5, 0.0]),
            other => panic!("{other:?}"),
        }
        assert!(sample(&"x3".parse().unwrap(), &g).is_err());
    }

    #[test]
    fn hypothesis_examples() {
        let g = Grid::unit(2, 17).unwrap();
        let r = check_hypotheses(&weights(&g, "1", "1"), &g, 1.5, 3.5);
        assert!(r.b_positive_cell && r.h_nontrivial && r.a_integrable);
        assert_eq!(r.positive_cells, r.total_cells);
        assert!(r.a_changes_sign && r.c_changes_sign && !r.b_changes_sign);

        let r = check_hypotheses(&weights(&g, "1", "0"), &g, 1.5, 3.5);
        assert!(!r.h_nontrivial);
        assert_eq!(r.first_failure(), Some("H"));

        let r = check_hypotheses(&weights(&g, "-1", "1"), &g, 1.5, 3.5);
        assert_eq!(r.first_failure(), Some("B"));

        let ws = weights(&g, "sin(2*pi*x1)", "1");
        let r = check_hypotheses(&ws, &g, 1.5, 3.5);
        // brute-force enumeration of cells by coordinates
        let mut count = 0;
        for i in 0..16 {
            for j in 0..16 {
                let pos = |a: usize| (2.0 * std::f64::consts::PI * a as f64 / 16.0).sin() > 0.0;
                if pos(i) && pos(i + 1) {
                    let _ = j;
                    count += 1;
                }
            }
        }
        assert!(r.b_positive_cell && r.b_changes_sign);
        assert_eq!(r.positive_cells, count);
    }

    #[test]
    fn forcing_scaling_is_consistent() {
        let g = Grid::unit(2, 9).unwrap();
        let mut ws = weights(&g, "1", "1+x1");
        let before = ws.forcing_norm_sq(&g);
        ws.scale_forcing(0.5, 0.5);
        assert!((ws.forcing_norm_sq(&g) - 0.25 * before).abs() < 1e-14);
        assert_eq!(ws.h1, sample(&ws.exprs.h1, &g).unwrap());
    }
}
