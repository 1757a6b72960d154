use super::*;
use crate::grid::random_field;
use crate::phi::PhiSpec;
use crate::thresholds::{compute_thresholds, sobolev_constants, EpsPolicy, ThresholdReport};
use crate::weights::WeightSet;

fn demo(n: usize) -> (Grid, ProblemSpec, ThresholdReport) {
    let g = Grid::unit(2, n).unwrap();
    let ws = WeightSet::from_strs(
        "sin(2*pi*x1)",
        "1+0.5*sin(2*pi*x1)",
        "cos(2*pi*x2)",
        "1",
        "1",
        &g,
    )
    .unwrap();
    let phi = PhiSpec::new(1, 2.0, 0.0, 0.0).unwrap();
    let mut ps = ProblemSpec::new(1.0, 1.0, 1.5, 1.75, 1.75, phi, phi, ws, &g).unwrap();
    let sc = sobolev_constants(&g, 3.5, 8, 0).unwrap();
    let r = compute_thresholds(&ps, &g, &sc, 2.0, 3.0, EpsPolicy::Symmetric).unwrap();
    ps.lambda = 0.25 * r.lambda0;
    ps.mu = 0.25 * r.lambda0;
    let r = compute_thresholds(&ps, &g, &sc, 2.0, 3.0, EpsPolicy::Symmetric).unwrap();
    let target = 0.5 * (r.m_lm / 2.0).sqrt();
    let f1 = target / g.norm_lp(&ps.weights.h1, 2.0);
    let f2 = target / g.norm_lp(&ps.weights.h2, 2.0);
    ps.weights.scale_forcing(f1, f2);
    let r = compute_thresholds(&ps, &g, &sc, 2.0, 3.0, EpsPolicy::Symmetric).unwrap();
    assert!(r.admissible());
    (g, ps, r)
}

fn semilinear(g: &Grid, h: &str) -> ProblemSpec {
    let ws = WeightSet::from_strs("0", "0", "0", h, h, g).unwrap();
    let one = PhiSpec::constant(1.0).unwrap();
    ProblemSpec::new(1.0, 1.0, 1.5, 1.5, 1.5, one, one, ws, g).unwrap()
}

#[test]
fn options_validation() {
    assert!(SolverOptions::default().validate().is_ok());
    assert!(SolverOptions {
        path_points: 2,
        ..Default::default()
    }
    .validate()
    .is_err());
    assert!(SolverOptions {
        backtracking: 1.0,
        ..Default::default()
    }
    .validate()
    .is_err());
    assert!(SolverOptions {
        step0: 0.0,
        ..Default::default()
    }
    .validate()
    .is_err());
}

#[test]
fn seed_requires_forcing() {
    let g = Grid::unit(2, 9).unwrap();
    let mut ps = semilinear(&g, "1");
    ps.weights.scale_forcing(0.0, 1.0);
    match seed_negative(&ps, &g, 1.0) {
        Err(Error::Hypothesis { condition, .. }) => assert_eq!(condition, "H"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn smoothing_pairs_positively() {
    let g = Grid::unit(2, 12).unwrap();
    for seed in 0..50 {
        let h = random_field(&g, seed, 1.0);
        assert!(g.pairing(&h, &smoothed(&g, &h)) > 0.0);
    }
}

#[test]
fn demo_seed_and_ball_minimizer() {
    let (g, ps, r) = demo(17);
    let z0 = seed_negative(&ps, &g, r.t_lm).unwrap();
    let e0 = energy(&ps, &g, &z0).unwrap().total;
    assert!(e0 < 0.0);
    assert!(g.norm_w(&z0) < r.t_lm);
    let ball = minimize_on_ball(&ps, &g, r.t_lm, &z0, &SolverOptions::default()).unwrap();
    assert!(ball.converged, "{:?}", ball.status);
    assert!(ball.residual <= 1e-8);
    assert!(ball.energy <= e0 && ball.energy < 0.0);
    assert!(ball.norm <= r.t_lm);
    assert!(ball.history.windows(2).all(|w| w[1] <= w[0]));
    assert!(ball.history.last() < ball.history.first());
    assert!(ball.classification.nontrivial && ball.classification.inside_ball);
    assert_eq!(ball.classification.energy_sign, -1);

    // restarting at the critical point does nothing
    let again = minimize_on_ball(&ps, &g, r.t_lm, &ball.z, &SolverOptions::default()).unwrap();
    assert_eq!(again.iterations, 0);
    assert_eq!(again.z, ball.z);
}

#[test]
fn demo_mountain_pass() {
    let (g, ps, r) = demo(17);
    let end = endpoint_beyond_sphere(&ps, &g, r.t_lm).unwrap();
    assert!(g.norm_w(&end) > r.t_lm);
    assert!(energy(&ps, &g, &end).unwrap().total < 0.0);
    let opts = SolverOptions::default();
    let mp = mountain_pass(&ps, &g, r.t_lm, &end, &opts).unwrap();
    assert!(mp.converged, "{:?} {}", mp.status, mp.residual);
    assert!(mp.residual <= 1e-8);
    assert!(mp.energy >= r.alpha_lm - 1e-8);
    assert!(mp.history.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(mp.classification.energy_sign, 1);
    assert!(mp.classification.nontrivial && mp.classification.non_semi_trivial);

    let twice = mountain_pass(&ps, &g, r.t_lm, &end, &opts).unwrap();
    assert_eq!(twice.energy.to_bits(), mp.energy.to_bits());
    assert_eq!(twice.iterations, mp.iterations);
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
fn semilinear_minimizer_is_the_linear_solve() {
    let g = Grid::unit(1, 65).unwrap();
    let ps = semilinear(&g, "1+sin(3*x1)");
    let h = g.spacing()[0];
    let rhs: Vec<f64> = (1..64).map(|i| ps.weights.h1[i]).collect();
    let x = thomas(2.0 / (h * h) + 1.0, -1.0 / (h * h), &rhs);
    let mut exact = Field::zeros(&g);
    exact[1..64].copy_from_slice(&x);
    let radius = 100.0;
    let z0 = seed_negative(&ps, &g, radius).unwrap();
    let res = minimize_on_ball(&ps, &g, radius, &z0, &SolverOptions::default()).unwrap();
    assert!(res.converged);
    let mut diff = res.z.u.clone();
    diff.axpy(-1.0, &exact);
    assert!(g.norm_lp(&diff, 2.0) <= 1e-6);
}

#[test]
fn tiny_ball_ends_on_the_sphere() {
    // the unconstrained minimizer lies outside: descent must stop on the sphere
    let g = Grid::unit(1, 33).unwrap();
    let ps = semilinear(&g, "1");
    let z0 = seed_negative(&ps, &g, 0.01).unwrap();
    let res = minimize_on_ball(
        &ps,
        &g,
        0.01,
        &z0,
        &SolverOptions {
            max_iters: 2000,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(!res.converged);
    assert_eq!(res.status, SolveStatus::BoundaryStall);
    assert!(res.norm <= 0.01 * (1.0 + 1e-12));
}

#[test]
fn positive_box_examples() {
    let g = Grid::unit(2, 9).unwrap();
    let one = Field::from_vec(vec![1.0; g.len()]);
    assert_eq!(positive_box(&g, &one), Some(vec![(0, 8), (0, 8)]));
    assert_eq!(positive_box(&g, &one.scaled(-1.0)), None);
    // b > 0 only strictly inside 0 < x1 < 1/2
    let s = crate::weights::sample(&"sin(2*pi*x1) - 0.01".parse().unwrap(), &g).unwrap();
    assert_eq!(positive_box(&g, &s), Some(vec![(1, 2), (0, 8)]));
    // a single positive cell cannot host a bump
    let mut b = one.scaled(-1.0);
    for m in [[3, 3], [4, 3], [3, 4], [4, 4]] {
        let i = g.index(&m);
        b[i] = 1.0;
    }
    assert_eq!(positive_box(&g, &b), None);
}

#[test]
fn positive_box_matches_brute_force() {
    for (n, seed) in [(7, 1u64), (8, 2), (9, 3)] {
        let g = Grid::new(&[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0], &[n, n - 1, 5]).unwrap();
        let mut b = random_field(&g, seed, 1.0);
        for x in b.iter_mut() {
            *x += 0.7;
        }
        let cells = crate::weights::positive_cells(&g, &b);
        let c: Vec<usize> = g.nodes().iter().map(|n| n - 1).collect();
        let mut best = 0;
        for a0 in 0..c[0] {
            for e0 in a0 + 2..=c[0] {
                for a1 in 0..c[1] {
                    for e1 in a1 + 2..=c[1] {
                        for a2 in 0..c[2] {
                            for e2 in a2 + 2..=c[2] {
                                let mut all = true;
                                for i in a0..e0 {
                                    for j in a1..e1 {
                                        for k in a2..e2 {
                                            all &= cells[g.index(&[i, j, k])];
                                        }
                                    }
                                }
                                if all {
                                    best = best.max((e0 - a0 - 1) * (e1 - a1 - 1) * (e2 - a2 - 1));
                                }
                            }
                        }
                    }
                }
            }
        }
        let found = positive_box(&g, &b);
        let score = found
            .as_ref()
            .map_or(0, |bx| bx.iter().map(|(_, l)| l - 1).product());
        assert_eq!(score, best);
        if let Some(bx) = found {
            for i in bx[0].0..bx[0].0 + bx[0].1 {
                for j in bx[1].0..bx[1].0 + bx[1].1 {
                    for k in bx[2].0..bx[2].0 + bx[2].1 {
                        assert!(cells[g.index(&[i, j, k])]);
                    }
                }
            }
        }
    }
}

#[test]
fn endpoint_examples() {
    let (g, mut ps, r) = demo(17);
    ps.weights.b = Field::from_vec(vec![1.0; g.len()]);
    let end = endpoint_beyond_sphere(&ps, &g, r.t_lm).unwrap();
    let coupling: f64 = (0..g.len())
        .map(|i| end.u[i].abs().powf(1.75) * end.v[i].abs().powf(1.75))
        .sum();
    assert!(coupling > 0.0);
    assert!(g.norm_w(&end) > r.t_lm && energy(&ps, &g, &end).unwrap().total < 0.0);
    ps.weights.b = Field::from_vec(vec![-1.0; g.len()]);
    match endpoint_beyond_sphere(&ps, &g, r.t_lm) {
        Err(Error::Hypothesis { condition, .. }) => assert_eq!(condition, "B"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn classification_examples() {
    let g = Grid::unit(2, 9).unwrap();
    let ps = semilinear(&g, "1");
    let zero = FieldPair::zeros(&g);
    let c = classify(&ps, &g, &zero, 0.0, 1.0).unwrap();
    assert!(!c.nontrivial && !c.non_semi_trivial);
    assert_eq!(c.energy_sign, 0);
    let semi = FieldPair::new(random_field(&g, 1, 1.0), Field::zeros(&g));
    let c = classify(&ps, &g, &semi, 1.0, 1.0).unwrap();
    assert!(c.nontrivial && !c.non_semi_trivial);
    assert_eq!(c.rr1_v, 0.0);
}
