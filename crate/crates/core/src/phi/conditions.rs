use serde::{Deserialize, Serialize};

use super::PhiSpec;
use crate::error::{Error, Result};

/// Relative margin for "strictly increasing" between consecutive samples.
const STRICT_MARGIN: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub condition: String,
    pub s: f64,
    pub violation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub family: u32,
    pub ab_sum: f64,
    pub rho0: f64,
    pub rho1: f64,
    pub phi_inf: f64,
    pub pass_phi1: bool,
    pub pass_phi1_prime: bool,
    pub pass_phi2: bool,
    pub pass_phi3: bool,
    pub pass_phi4: bool,
    /// Convexity of `σ ↦ Φ(σ²)` from slopes of the sampled curve.
    pub pass_phi2_convexity: bool,
    /// `t ↦ tφ(t²/2)` strictly increasing, sampled and by derivative sign.
    pub pass_phi2_monotone: bool,
    /// `Φ(s) ≥ φ(s)s` for the closed form with its additive constant kept.
    pub pass_phi4_unshifted: bool,
    pub witnesses: Vec<Witness>,
}

/// Worst violation seen for one condition (largest positive `violation`).
#[derive(Default)]
struct Worst(Option<(f64, f64)>);

impl Worst {
    fn record(&mut self, s: f64, violation: f64) {
        if violation > 0.0 && self.0.is_none_or(|(_, v)| violation > v) {
            self.0 = Some((s, violation));
        }
    }

    fn passed(&self) -> bool {
        self.0.is_none()
    }

    fn push_into(&self, condition: &str, out: &mut Vec<Witness>) {
        if let Some((s, violation)) = self.0 {
            out.push(Witness {
                condition: condition.to_string(),
                s,
                violation,
            });
        }
    }
}

/// Sample points: 0 followed by `n - 1` log-spaced points in [1e-8, s_max].
fn sample_points(s_max: f64, n: usize) -> Vec<f64> {
    let lo = (1e-8f64).min(s_max / 10.0).ln();
    let hi = s_max.ln();
    std::iter::once(0.0)
        .chain((0..n - 1).map(|i| (lo + (hi - lo) * i as f64 / (n - 2) as f64).exp()))
        .collect()
}

/// Certifies the conditions (φ1), (φ1)′, (φ2), (φ3), (φ4) for one profile.
///
/// `ab_sum` is α+β of the target system and only enters (φ1)′.
pub fn certify(
    spec: &PhiSpec,
    ab_sum: f64,
    s_max: f64,
    n_samples: usize,
) -> Result<ConditionReport> {
    spec.validate()?;
    if !(ab_sum > 2.0) {
        return Err(Error::InvalidProblem(format!(
            "α+β = {ab_sum} must exceed 2"
        )));
    }
    if !(s_max > 0.0 && s_max.is_finite()) {
        return Err(Error::InvalidProblem(format!(
            "s_max = {s_max} must be positive"
        )));
    }
    if n_samples < 100 {
        return Err(Error::InvalidProblem(format!(
            "n_samples = {n_samples} must be at least 100"
        )));
    }

    let samples = sample_points(s_max, n_samples);
    let values: Vec<f64> = samples.iter().map(|&s| spec.phi(s)).collect();

    // Range of φ: closed form, widened by anything the samples reveal.
    let (closed_lo, closed_hi) = spec.closed_form_range();
    let (mut s_min, mut v_min) = (samples[0], values[0]);
    let (mut s_sup, mut v_sup) = (samples[0], values[0]);
    for (&s, &v) in samples.iter().zip(&values) {
        if v < v_min {
            (s_min, v_min) = (s, v);
        }
        if v > v_sup {
            (s_sup, v_sup) = (s, v);
        }
    }
    if closed_lo < v_min {
        // infimum only approached in the tail
        s_min = s_max;
    }
    let rho0 = closed_lo.min(v_min);
    let rho1 = closed_hi.max(v_sup);

    let phi_inf = extrapolate_tail(spec, s_max);
    let mut witnesses = Vec::new();

    // (φ1)
    let mut phi1 = Worst::default();
    if !(rho0 > 0.0) {
        phi1.record(s_min, -rho0 + f64::MIN_POSITIVE);
    }
    for (&s, &v) in samples.iter().zip(&values) {
        let tol = 1e-12 * (1.0 + v.abs());
        phi1.record(s, rho0 - v - tol);
        phi1.record(s, v - rho1 - tol);
        if !v.is_finite() {
            phi1.record(s, f64::INFINITY);
        }
    }
    let pass_phi1 = phi1.passed();
    phi1.push_into("phi1", &mut witnesses);

    // (φ1)′
    let gap = 2.0 * rho1 / ab_sum - rho0;
    let mut phi1_prime = Worst::default();
    if !pass_phi1 {
        if let Some((s, v)) = phi1.0 {
            phi1_prime.record(s, v);
        }
    }
    if !(gap < 0.0) {
        phi1_prime.record(s_sup, gap.max(f64::MIN_POSITIVE));
    }
    let pass_phi1_prime = phi1_prime.passed();
    phi1_prime.push_into("phi1_prime", &mut witnesses);

    // (φ2), first route: σ ↦ Φ(σ²) has strictly increasing secant slopes.
    let mut convexity = Worst::default();
    let sigma: Vec<f64> = samples.iter().map(|s| s.sqrt()).collect();
    let big: Vec<f64> = samples.iter().map(|&s| spec.primitive(s)).collect();
    let slopes: Vec<f64> = (0..sigma.len() - 1)
        .map(|i| (big[i + 1] - big[i]) / (sigma[i + 1] - sigma[i]))
        .collect();
    for i in 0..slopes.len().saturating_sub(1) {
        let margin = STRICT_MARGIN * slopes[i].abs().max(slopes[i + 1].abs());
        convexity.record(samples[i + 1], slopes[i] + margin - slopes[i + 1]);
    }

    // (φ2), second route: ψ(t) = tφ(t²/2) strictly increasing.
    let mut monotone = Worst::default();
    let psi: Vec<f64> = samples
        .iter()
        .map(|&x| (2.0 * x).sqrt() * spec.phi(x))
        .collect();
    for i in 0..psi.len() - 1 {
        let margin = STRICT_MARGIN * psi[i].abs().max(psi[i + 1].abs());
        monotone.record(samples[i + 1], psi[i] + margin - psi[i + 1]);
    }
    for &x in &samples {
        // ψ′(t) = φ(x) + 2xφ′(x) with x = t²/2
        let d = spec.phi(x) + 2.0 * x * spec.phi_derivative(x);
        if !(d > 0.0) {
            monotone.record(x, -d + f64::MIN_POSITIVE);
        }
    }
    let pass_phi2_convexity = convexity.passed();
    let pass_phi2_monotone = monotone.passed();
    let pass_phi2 = pass_phi2_convexity && pass_phi2_monotone;
    if !pass_phi2 {
        let mut phi2 = Worst::default();
        for w in [&convexity, &monotone] {
            if let Some((s, v)) = w.0 {
                phi2.record(s, v);
            }
        }
        phi2.push_into("phi2", &mut witnesses);
    }
    convexity.push_into("phi2_convexity", &mut witnesses);
    monotone.push_into("phi2_monotone", &mut witnesses);

    // (φ3): the tail differences over doublings must contract and the
    // extrapolated limit must be positive.
    let mut phi3 = Worst::default();
    let tail: Vec<f64> = [s_max / 4.0, s_max / 2.0, s_max]
        .iter()
        .map(|&s| spec.phi(s))
        .collect();
    let (d0, d1) = (tail[1] - tail[0], tail[2] - tail[1]);
    if d0 != 0.0 && !(d1.abs() < d0.abs()) {
        phi3.record(s_max, (d1 / d0).abs());
    }
    if !(phi_inf > 0.0 && phi_inf.is_finite()) {
        phi3.record(s_max, (-phi_inf).max(f64::MIN_POSITIVE));
    }
    let pass_phi3 = phi3.passed();
    phi3.push_into("phi3", &mut witnesses);

    // (φ4): Φ(s) − φ(s)s ≥ 0, for the shifted primitive and the printed form.
    let mut phi4 = Worst::default();
    let mut phi4_unshifted = Worst::default();
    let offset = spec.unshifted_offset();
    for (i, &s) in samples.iter().enumerate() {
        let ps = values[i] * s;
        let tol = 1e-12 * (1.0 + big[i].abs() + ps.abs());
        phi4.record(s, ps - big[i] - tol);
        phi4_unshifted.record(s, ps - (big[i] + offset) - tol);
    }
    let pass_phi4 = phi4.passed();
    let pass_phi4_unshifted = phi4_unshifted.passed();
    phi4.push_into("phi4", &mut witnesses);
    phi4_unshifted.push_into("phi4_unshifted", &mut witnesses);

    Ok(ConditionReport {
        family: spec.family(),
        ab_sum,
        rho0,
        rho1,
        phi_inf,
        pass_phi1,
        pass_phi1_prime,
        pass_phi2,
        pass_phi3,
        pass_phi4,
        pass_phi2_convexity,
        pass_phi2_monotone,
        pass_phi4_unshifted,
        witnesses,
    })
}

/// Aitken Δ² extrapolation of φ along s_max/4, s_max/2, s_max.
fn extrapolate_tail(spec: &PhiSpec, s_max: f64) -> f64 {
    let f0 = spec.phi(s_max / 4.0);
    let f1 = spec.phi(s_max / 2.0);
    let f2 = spec.phi(s_max);
    let denom = (f2 - f1) - (f1 - f0);
    if denom.abs() <= 1e-14 * (f0.abs() + f1.abs() + f2.abs()) {
        return f2;
    }
    let est = f2 - (f2 - f1) * (f2 - f1) / denom;
    // Aitken is unreliable when the tail is not yet geometric; never move
    // further from the last sample than the last step itself.
    if (est - f2).abs() > 1e3 * (f2 - f1).abs().max(1e-300) {
        f2
    } else {
        est
    }
}
