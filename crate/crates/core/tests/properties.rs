use ellvar_core::functional::{energy, energy_delta};
use ellvar_core::grid::random_field;
use ellvar_core::thresholds::{thresholds_from, EpsPolicy, ThresholdInputs};
use ellvar_core::{FieldPair, Grid, PhiSpec, ProblemSpec, WeightSet};
use proptest::prelude::*;

fn inputs() -> impl Strategy<Value = ThresholdInputs> {
    (
        1.05..1.95f64,
        2.1..5.9f64,
        0.2..5.0f64,
        1.0..3.0f64,
        0.05..1.0f64,
        0.05..2.0f64,
        0.01..5.0f64,
        0.01..5.0f64,
    )
        .prop_map(
            |(q, ab_sum, rho0, k, s2, s_ab, weight_norm, b_inf)| ThresholdInputs {
                rho0,
                rho1: k * rho0,
                s2,
                s_ab,
                q,
                ab_sum,
                weight_norm,
                b_inf,
            },
        )
}

fn demo_problem(grid: &Grid) -> ProblemSpec {
    let ws = WeightSet::from_strs(
        "sin(2*pi*x1)",
        "1+0.5*sin(2*pi*x1)",
        "cos(2*pi*x2)",
        "0.3",
        "x1",
        grid,
    )
    .unwrap();
    let phi = PhiSpec::new(1, 2.0, 0.0, 0.0).unwrap();
    ProblemSpec::new(2.0, 1.5, 1.5, 1.75, 1.75, phi, phi, ws, grid).unwrap()
}

fn pair(grid: &Grid, seed: u64, amp: f64) -> FieldPair {
    FieldPair::new(
        random_field(grid, seed, amp),
        random_field(grid, seed ^ 0x9e37, amp),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn constants_positive_and_t_scales(inp in inputs(), frac in 0.01..0.99f64) {
        let l0 = thresholds_from(&inp, 1.0, 1.0, EpsPolicy::Symmetric).unwrap().lambda0;
        let lm = frac * l0 / 2.0;
        let r = thresholds_from(&inp, lm, 1.0, EpsPolicy::Symmetric).unwrap();
        for v in [r.c0, r.alpha0, r.t_lm, r.lambda0, r.m_lm, r.alpha_lm] {
            prop_assert!(v > 0.0);
        }
        let doubled = thresholds_from(&inp, 2.0 * lm, 1.0, EpsPolicy::Symmetric).unwrap();
        let ratio = doubled.t_lm / r.t_lm;
        let expect = 2f64.powf(1.0 / (inp.ab_sum - inp.q));
        prop_assert!((ratio - expect).abs() <= 1e-12 * expect);
    }

    #[test]
    fn golden_policy_stays_in_budget(inp in inputs(), frac in 0.01..0.99f64) {
        let l0 = thresholds_from(&inp, 1.0, 1.0, EpsPolicy::Symmetric).unwrap().lambda0;
        if let Ok(r) = thresholds_from(&inp, frac * l0, 1.0, EpsPolicy::Golden) {
            prop_assert!(r.eps1 * r.eps1 + r.eps2 * r.eps2 < inp.rho0 / inp.s2);
        }
    }

    #[test]
    fn breakdown_sums_to_total(seed in any::<u64>(), exp in -3.0..1.5f64) {
        let g = Grid::unit(2, 9).unwrap();
        let ps = demo_problem(&g);
        let e = energy(&ps, &g, &pair(&g, seed, 10f64.powf(exp))).unwrap();
        let parts = e.phi_term - e.concave_term - e.coupling_term - e.forcing_term;
        let scale = e.phi_term.abs() + e.concave_term.abs() + e.coupling_term.abs() + e.forcing_term.abs();
        prop_assert!((e.total - parts).abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn energy_delta_agrees_with_difference(seed in any::<u64>(), exp in -2.0..0.5f64) {
        let g = Grid::unit(2, 9).unwrap();
        let ps = demo_problem(&g);
        let z = pair(&g, seed, 10f64.powf(exp));
        let dz = pair(&g, seed.wrapping_add(7), 0.1 * 10f64.powf(exp));
        let mut moved = z.clone();
        moved.axpy(1.0, &dz);
        let direct = energy(&ps, &g, &moved).unwrap().total - energy(&ps, &g, &z).unwrap().total;
        let delta = energy_delta(&ps, &g, &z, &dz).unwrap();
        let scale = energy(&ps, &g, &z).unwrap().phi_term.abs() + direct.abs();
        prop_assert!((direct - delta).abs() <= 1e-10 * scale);
    }

    #[test]
    fn pair_norm_axioms(seed in any::<u64>(), t in -5.0..5.0f64) {
        let g = Grid::unit(2, 9).unwrap();
        let (x, y) = (pair(&g, seed, 1.0), pair(&g, seed.wrapping_add(1), 2.0));
        let (nx, ny) = (g.norm_w(&x), g.norm_w(&y));
        let mut sum = x.clone();
        sum.axpy(1.0, &y);
        prop_assert!(g.norm_w(&sum) <= (nx + ny) * (1.0 + 1e-14));
        prop_assert!((g.norm_w(&x.scaled(t)) - t.abs() * nx).abs() <= 1e-13 * nx.max(1.0));
        prop_assert!(nx > 0.0);
    }
}
