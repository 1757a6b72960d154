//! Catalogued diffusion profiles φ and their primitives Φ(s) = ∫₀ˢ φ.
//!
//! Every profile is `Φ(s) = A·s + Σ cⱼ·Tⱼ(s)` where each term `Tⱼ` is either
//! `ln(1+s)` or the shifted power `((1+s)^{1-p} - 1)/(1-p)`. Both terms vanish
//! at `s = 0`, so `Φ(0) = 0` holds exactly for every family.
//!
//! Family ids follow the usual numbering of the catalogue (1..=14); id 0 is the
//! constant profile φ ≡ A used for semilinear sanity runs.

mod conditions;

pub use conditions::{certify, ConditionReport, Witness};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
enum Term {
    /// `ln(1+s)`
    Log,
    /// `((1+s)^{1-p} - 1)/(1-p)`
    Power(f64),
}

impl Term {
    fn value(self, s: f64) -> f64 {
        match self {
            Term::Log => s.ln_1p(),
            Term::Power(p) => ((1.0 - p) * s.ln_1p()).exp_m1() / (1.0 - p),
        }
    }

    fn derivative(self, s: f64) -> f64 {
        match self {
            Term::Log => 1.0 / (1.0 + s),
            Term::Power(p) => (-p * s.ln_1p()).exp(),
        }
    }

    fn second_derivative(self, s: f64) -> f64 {
        match self {
            Term::Log => -1.0 / ((1.0 + s) * (1.0 + s)),
            Term::Power(p) => -p * (-(p + 1.0) * s.ln_1p()).exp(),
        }
    }

    /// `T(s + ds) - T(s)` without cancellation.
    fn delta(self, s: f64, ds: f64) -> f64 {
        let rel = (ds / (1.0 + s)).ln_1p();
        match self {
            Term::Log => rel,
            Term::Power(p) => {
                let base = ((1.0 - p) * s.ln_1p()).exp();
                base * ((1.0 - p) * rel).exp_m1() / (1.0 - p)
            }
        }
    }

    /// Constant dropped by the shift, i.e. the value at 0 of the unshifted form.
    fn unshifted_offset(self) -> f64 {
        match self {
            Term::Log => 0.0,
            Term::Power(p) => 1.0 / (1.0 - p),
        }
    }

    fn limit_derivative(self) -> f64 {
        match self {
            Term::Log => 0.0,
            Term::Power(0.0) => 1.0,
            Term::Power(_) => 0.0,
        }
    }
}

/// A diffusion profile from the catalogue.
///
/// `a` is the linear coefficient `A`; `p` and `r` are the auxiliary exponents
/// (only meaningful for the families that use them, ignored otherwise).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiSpec {
    family: u32,
    a: f64,
    p: f64,
    r: f64,
}

impl PhiSpec {
    pub fn new(family: u32, a: f64, p: f64, r: f64) -> Result<Self> {
        let spec = PhiSpec { family, a, p, r };
        spec.validate()?;
        let spec = PhiSpec {
            p: if spec.uses_p() { p } else { 0.0 },
            r: if spec.uses_r() { r } else { 0.0 },
            ..spec
        };
        Ok(spec)
    }

    /// The constant profile φ ≡ `rho`.
    pub fn constant(rho: f64) -> Result<Self> {
        Self::new(0, rho, 0.0, 0.0)
    }

    pub fn family(&self) -> u32 {
        self.family
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn uses_p(&self) -> bool {
        matches!(self.family, 2 | 3 | 5 | 6 | 7 | 9 | 10 | 12 | 13 | 14)
    }

    pub fn uses_r(&self) -> bool {
        matches!(self.family, 7 | 14)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |message: String| Error::PhiDomain {
            family: self.family,
            message,
        };
        if self.family > 14 {
            return Err(Error::UnknownFamily(self.family));
        }
        if !self.a.is_finite() {
            return Err(fail(format!("A = {} is not finite", self.a)));
        }
        if self.uses_p() && !self.p.is_finite() {
            return Err(fail(format!("p = {} is not finite", self.p)));
        }
        if self.uses_r() && !self.r.is_finite() {
            return Err(fail(format!("r = {} is not finite", self.r)));
        }
        let p = self.p;
        match self.family {
            2 | 6 | 9 | 13 if p <= 1.0 => Err(fail(format!("requires p > 1, got {p}"))),
            3 | 5 | 10 | 12 if !(0.0..1.0).contains(&p) => {
                Err(fail(format!("requires 0 <= p < 1, got {p}")))
            }
            7 | 14 => {
                for (name, v) in [("p", p), ("r", self.r)] {
                    if v < 0.0 || v == 1.0 {
                        return Err(fail(format!(
                            "requires {name} >= 0 and {name} != 1, got {v}"
                        )));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn terms(&self) -> ([(f64, Term); 2], usize) {
        let none = (0.0, Term::Log);
        match self.family {
            0 => ([none, none], 0),
            1 | 8 => ([(1.0, Term::Log), none], 1),
            4 | 11 => ([(-1.0, Term::Log), none], 1),
            2 | 5 | 9 | 12 => ([(-1.0, Term::Power(self.p)), none], 1),
            3 | 6 | 10 | 13 => ([(1.0, Term::Power(self.p)), none], 1),
            7 | 14 => ([(1.0, Term::Power(self.p)), (-1.0, Term::Power(self.r))], 2),
            _ => unreachable!("family validated at construction"),
        }
    }

    fn fold(&self, init: f64, f: impl Fn(Term) -> f64) -> f64 {
        let (terms, n) = self.terms();
        terms[..n].iter().fold(init, |acc, &(c, t)| acc + c * f(t))
    }

    /// φ(s).
    pub fn phi(&self, s: f64) -> f64 {
        self.fold(self.a, |t| t.derivative(s))
    }

    /// φ′(s).
    pub fn phi_derivative(&self, s: f64) -> f64 {
        self.fold(0.0, |t| t.second_derivative(s))
    }

    /// Φ(s) = ∫₀ˢ φ.
    pub fn primitive(&self, s: f64) -> f64 {
        self.fold(self.a * s, |t| t.value(s))
    }

    /// Φ(s + ds) − Φ(s), accurate even when `ds` is tiny relative to `s`.
    pub fn primitive_delta(&self, s: f64, ds: f64) -> f64 {
        self.fold(self.a * ds, |t| t.delta(s, ds))
    }

    /// The closed form as usually printed, without the constant that makes Φ(0) = 0.
    pub fn primitive_unshifted(&self, s: f64) -> f64 {
        self.primitive(s) + self.unshifted_offset()
    }

    pub fn unshifted_offset(&self) -> f64 {
        self.fold(0.0, |t| t.unshifted_offset())
    }

    /// φ(∞) in closed form.
    pub fn phi_at_infinity(&self) -> f64 {
        self.fold(self.a, |t| t.limit_derivative())
    }

    /// Interior stationary points of φ on (0, ∞). Only the two-power families have one.
    pub fn stationary_points(&self) -> Vec<f64> {
        if !self.uses_r() {
            return Vec::new();
        }
        let (p, r) = (self.p, self.r);
        // d/dy (y^{-p} - y^{-r}) = 0  ⇔  y^{r-p} = r/p, y = 1 + s
        if p <= 0.0 || r <= 0.0 || p == r {
            return Vec::new();
        }
        let y = (r / p).powf(1.0 / (r - p));
        if y > 1.0 && y.is_finite() {
            vec![y - 1.0]
        } else {
            Vec::new()
        }
    }

    /// Closed-form (inf, sup) of φ over [0, ∞) from the endpoint values and
    /// interior stationary points.
    pub fn closed_form_range(&self) -> (f64, f64) {
        let mut lo = self.phi(0.0).min(self.phi_at_infinity());
        let mut hi = self.phi(0.0).max(self.phi_at_infinity());
        for s in self.stationary_points() {
            let v = self.phi(s);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }
}

/// φ(s) for a validated spec; `s` must be nonnegative.
pub fn phi_eval(spec: &PhiSpec, s: f64) -> Result<f64> {
    spec.validate()?;
    check_argument(spec, s)?;
    Ok(spec.phi(s))
}

/// Φ(s) for a validated spec; `s` must be nonnegative. `Φ(0) = 0` exactly.
pub fn primitive_eval(spec: &PhiSpec, s: f64) -> Result<f64> {
    spec.validate()?;
    check_argument(spec, s)?;
    Ok(spec.primitive(s))
}

fn check_argument(spec: &PhiSpec, s: f64) -> Result<()> {
    if s >= 0.0 {
        Ok(())
    } else {
        Err(Error::PhiDomain {
            family: spec.family,
            message: format!("argument s = {s} must be nonnegative"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec(family: u32, a: f64, p: f64, r: f64) -> PhiSpec {
        PhiSpec::new(family, a, p, r).unwrap()
    }

    fn representatives() -> Vec<PhiSpec> {
        vec![
            spec(0, 1.3, 0.0, 0.0),
            spec(1, 2.0, 0.0, 0.0),
            spec(2, 2.0, 2.0, 0.0),
            spec(3, 1.0, 0.5, 0.0),
            spec(4, 2.0, 0.0, 0.0),
            spec(5, 2.0, 0.5, 0.0),
            spec(6, 4.0, 2.0, 0.0),
            spec(7, 1.0, 0.25, 0.75),
            spec(8, 2.0, 0.0, 0.0),
            spec(9, 3.0, 2.0, 0.0),
            spec(10, 2.0, 0.25, 0.0),
            spec(11, 3.0, 0.0, 0.0),
            spec(12, 3.0, 0.5, 0.0),
            spec(13, 4.0, 2.0, 0.0),
            spec(14, 4.0, 0.25, 0.75),
            spec(14, 5.0, 2.0, 0.5),
            spec(7, 5.0, 1.5, 3.0),
        ]
    }

    #[test]
    fn family_one_at_origin() {
        assert_eq!(phi_eval(&spec(1, 2.0, 0.0, 0.0), 0.0).unwrap(), 3.0);
        assert_eq!(primitive_eval(&spec(1, 2.0, 0.0, 0.0), 0.0).unwrap(), 0.0);
        assert_relative_eq!(
            primitive_eval(&spec(1, 1.5, 0.0, 0.0), 1.0).unwrap(),
            2f64.ln() + 1.5,
            max_relative = 1e-15
        );
    }

    #[test]
    fn family_four_tail() {
        let f = spec(4, 2.0, 0.0, 0.0);
        assert_eq!(f.phi_at_infinity(), 2.0);
        assert_relative_eq!(f.phi(1e12), 2.0, max_relative = 1e-11);
    }

    #[test]
    fn family_two_derivative_matches_finite_difference() {
        let f = spec(2, 2.0, 2.0, 0.0);
        let h = 1e-5;
        let fd = (f.primitive(1.0 + h) - f.primitive(1.0 - h)) / (2.0 * h);
        // Φ(s) = As − (1/(1−p))(1+s)^{1−p} differentiates to A − (1+s)^{−p}.
        assert_relative_eq!(f.phi(1.0), 1.75, max_relative = 1e-15);
        assert_relative_eq!(fd, 1.75, max_relative = 1e-9);
    }

    #[test]
    fn family_three_primitive_matches_quadrature() {
        let f = spec(3, 1.0, 0.5, 0.0);
        assert_relative_eq!(f.primitive(3.0), 5.0, max_relative = 1e-14);
        // composite Simpson on [0, 3]
        let n = 2000;
        let h = 3.0 / n as f64;
        let mut acc = f.phi(0.0) + f.phi(3.0);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f.phi(i as f64 * h);
        }
        assert_relative_eq!(acc * h / 3.0, 5.0, max_relative = 1e-12);
    }

    #[test]
    fn primitive_vanishes_at_zero_for_every_family() {
        for f in representatives() {
            assert_eq!(f.primitive(0.0), 0.0, "family {}", f.family());
        }
    }

    #[test]
    fn phi_is_derivative_of_primitive_on_log_grid() {
        for f in representatives() {
            for k in 0..=80 {
                let s = 10f64.powf(-4.0 + 8.0 * k as f64 / 80.0);
                let h = 1e-4 * s.max(1e-2);
                let fd = (f.primitive(s + h) - f.primitive(s - h)) / (2.0 * h);
                let phi = f.phi(s);
                assert!(
                    (fd - phi).abs() <= 1e-6 * (1.0 + phi.abs()),
                    "family {} s={s}: fd {fd} vs {phi}",
                    f.family()
                );
            }
        }
    }

    #[test]
    fn derivative_of_phi_matches_finite_difference() {
        for f in representatives() {
            for &s in &[0.0, 0.3, 2.0, 50.0] {
                let h = 1e-6 * (1.0 + s);
                let fd = (f.phi(s + h) - f.phi((s - h).max(0.0))) / (s + h - (s - h).max(0.0));
                let d = f.phi_derivative(s);
                assert!(
                    (fd - d).abs() < 1e-5 * (1.0 + d.abs()),
                    "family {}",
                    f.family()
                );
            }
        }
    }

    #[test]
    fn primitive_delta_is_accurate() {
        for f in representatives() {
            for &(s, ds) in &[
                (0.0, 1e-3),
                (0.7, 1e-9),
                (3e3, -1e-7),
                (2.0, 5.0),
                (5.0, -5.0),
            ] {
                let direct = f.primitive(s + ds) - f.primitive(s);
                let delta = f.primitive_delta(s, ds);
                assert!(
                    (direct - delta).abs() <= 1e-12 * (1.0 + f.primitive(s).abs()),
                    "family {} s={s} ds={ds}",
                    f.family()
                );
            }
        }
    }

    #[test]
    fn unshifted_offsets() {
        assert_eq!(spec(1, 2.0, 0.0, 0.0).unshifted_offset(), 0.0);
        // As − (1/(1−p))(1+s)^{1−p} at s = 0 with p = 2
        assert_relative_eq!(spec(2, 2.0, 2.0, 0.0).unshifted_offset(), 1.0);
        assert_relative_eq!(spec(6, 4.0, 2.0, 0.0).unshifted_offset(), -1.0);
    }

    #[test]
    fn closed_form_range_of_two_power_family() {
        let f = spec(14, 1.0, 0.25, 0.75);
        let (lo, hi) = f.closed_form_range();
        assert_eq!(lo, 1.0);
        // w − w³ with w = (1+s)^{-1/4} peaks at w = 1/√3
        let w = 1.0 / 3f64.sqrt();
        assert_relative_eq!(hi, 1.0 + w - w * w * w, max_relative = 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            PhiSpec::new(15, 1.0, 0.0, 0.0),
            Err(Error::UnknownFamily(15))
        ));
        assert!(PhiSpec::new(2, 2.0, 1.0, 0.0).is_err());
        assert!(PhiSpec::new(3, 2.0, 1.0, 0.0).is_err());
        assert!(PhiSpec::new(7, 2.0, 0.5, 1.0).is_err());
        assert!(PhiSpec::new(1, f64::NAN, 0.0, 0.0).is_err());
        assert!(phi_eval(&spec(1, 2.0, 0.0, 0.0), -1.0).is_err());
    }

    #[test]
    fn unused_parameters_are_dropped() {
        let f = PhiSpec::new(1, 2.0, 7.0, 9.0).unwrap();
        assert_eq!((f.p(), f.r()), (0.0, 0.0));
    }
}
