//! Double-well reaction terms of the Allen-Cahn equation.
//!
//! Both potentials are odd with roots at `0` and `+-alpha`:
//!
//! - Ginzburg-Landau: `f(u) = (u - u^3) / eps^2`, `alpha = 1`;
//! - Flory-Huggins: `f(u) = (theta_c u - theta/2 ln((1+u)/(1-u))) / eps^2`,
//!   with `alpha` the positive root of `ln((1+a)/(1-a)) = 2 a theta_c / theta`.

use crate::error::{Error, Result};

/// Distance from +-1 at which logarithmic arguments are clamped in guard mode.
pub const DOMAIN_GUARD: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialKind {
    GinzburgLandau,
    FloryHuggins,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialSpec {
    kind: PotentialKind,
    epsilon: f64,
    theta: f64,
    theta_c: f64,
    alpha: f64,
}

impl PotentialSpec {
    pub fn ginzburg_landau(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidScheme(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(Self {
            kind: PotentialKind::GinzburgLandau,
            epsilon,
            theta: 0.0,
            theta_c: 0.0,
            alpha: 1.0,
        })
    }

    /// Solves for `alpha` on construction.
    pub fn flory_huggins(epsilon: f64, theta: f64, theta_c: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !(theta > 0.0) {
            return Err(Error::InvalidScheme(format!(
                "epsilon and theta must be positive, got {epsilon}, {theta}"
            )));
        }
        let alpha = solve_alpha_ratio(theta_c / theta)?;
        Ok(Self {
            kind: PotentialKind::FloryHuggins,
            epsilon,
            theta,
            theta_c,
            alpha,
        })
    }

    pub fn kind(&self) -> PotentialKind {
        self.kind
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn theta_c(&self) -> f64 {
        self.theta_c
    }

    /// Maximum-principle bound.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn scale(&self) -> f64 {
        1.0 / (self.epsilon * self.epsilon)
    }

    /// Strict evaluation; Flory-Huggins rejects `|u| >= 1`.
    pub fn eval_f(&self, u: f64) -> Result<f64> {
        match self.kind {
            PotentialKind::GinzburgLandau => Ok(self.scale() * (u - u * u * u)),
            PotentialKind::FloryHuggins => {
                if !(u.abs() < 1.0) {
                    return Err(Error::DomainViolation(u));
                }
                Ok(self.fh(u))
            }
        }
    }

    /// Guard-mode evaluation: clamps the logarithmic argument to
    /// `+-(1 - DOMAIN_GUARD)`. Returns the value and whether clamping occurred.
    pub fn eval_f_guarded(&self, u: f64) -> (f64, bool) {
        match self.kind {
            PotentialKind::GinzburgLandau => (self.scale() * (u - u * u * u), false),
            PotentialKind::FloryHuggins => {
                let (v, clamped) = guard(u);
                (self.fh(v), clamped)
            }
        }
    }

    /// `f'(u)`, guarded like [`Self::eval_f_guarded`].
    pub fn eval_df_guarded(&self, u: f64) -> f64 {
        match self.kind {
            PotentialKind::GinzburgLandau => self.scale() * (1.0 - 3.0 * u * u),
            PotentialKind::FloryHuggins => {
                let (v, _) = guard(u);
                self.scale() * (self.theta_c - self.theta / (1.0 - v * v))
            }
        }
    }

    fn fh(&self, u: f64) -> f64 {
        // ln((1+u)/(1-u)) = 2 atanh(u)
        self.scale() * (self.theta_c * u - self.theta * u.atanh())
    }
}

fn guard(u: f64) -> (f64, bool) {
    let b = 1.0 - DOMAIN_GUARD;
    if u.is_nan() {
        return (0.0, true);
    }
    if u.abs() >= b {
        (u.signum() * b, true)
    } else {
        (u, false)
    }
}

/// Componentwise strict evaluation.
pub fn eval_f_nodal(spec: &PotentialSpec, u: &[f64]) -> Result<Vec<f64>> {
    u.iter().map(|&x| spec.eval_f(x)).collect()
}

/// Componentwise guard-mode evaluation; the flag reports any clamping.
pub fn eval_f_nodal_guarded(spec: &PotentialSpec, u: &[f64]) -> (Vec<f64>, bool) {
    let mut any = false;
    let out = u
        .iter()
        .map(|&x| {
            let (v, c) = spec.eval_f_guarded(x);
            any |= c;
            v
        })
        .collect();
    (out, any)
}

/// Positive root of the Flory-Huggins potential.
pub fn solve_alpha(spec: &PotentialSpec) -> Result<f64> {
    match spec.kind {
        PotentialKind::GinzburgLandau => Ok(1.0),
        PotentialKind::FloryHuggins => solve_alpha_ratio(spec.theta_c / spec.theta),
    }
}

/// Root in (0, 1) of `ln((1+a)/(1-a)) = 2 ratio a`, `ratio = theta_c / theta`.
///
/// Newton from `1 - 1/ratio`, safeguarded by a sign bracket: any iterate that
/// leaves the bracket is replaced by its midpoint.
pub fn solve_alpha_ratio(ratio: f64) -> Result<f64> {
    if !(ratio > 1.0) || !ratio.is_finite() {
        return Err(Error::NoRoot(ratio));
    }
    let g = |a: f64| 2.0 * a.atanh() - 2.0 * ratio * a;
    let dg = |a: f64| 2.0 / (1.0 - a * a) - 2.0 * ratio;
    let (mut lo, mut hi): (f64, f64) = (1e-8, 1.0 - 1e-15);
    // g < 0 just above 0 whenever ratio > 1; g -> +inf at 1.
    if g(lo) >= 0.0 {
        return Ok(lo);
    }
    let mut a = 1.0 - 1.0 / ratio;
    for _ in 0..200 {
        let ga = g(a);
        if ga.abs() < 1e-14 {
            return Ok(a);
        }
        if ga < 0.0 {
            lo = lo.max(a);
        } else {
            hi = hi.min(a);
        }
        let mut next = a - ga / dg(a);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - a).abs() <= 2.0 * f64::EPSILON * a || hi - lo <= 2.0 * f64::EPSILON {
            return Ok(next);
        }
        a = next;
    }
    Ok(a)
}

/// Stabilization test `1/tau + kappa >= 1/(4(1 - alpha^2)) - 1`.
pub fn stabilization_holds(tau: f64, kappa: f64, alpha: f64) -> bool {
    1.0 / tau + kappa >= 1.0 / (4.0 * (1.0 - alpha * alpha)) - 1.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example2() -> PotentialSpec {
        PotentialSpec::flory_huggins(1.0, 0.25, 1.0).unwrap()
    }

    #[test]
    fn ginzburg_landau_value() {
        let gl = PotentialSpec::ginzburg_landau(1.0).unwrap();
        assert_eq!(gl.eval_f(0.5).unwrap(), 0.375);
        assert_eq!(gl.alpha(), 1.0);
        assert_eq!(gl.eval_f(1.0).unwrap(), 0.0);
    }

    #[test]
    fn flory_huggins_instance() {
        let fh = example2();
        assert_eq!(fh.eval_f(0.0).unwrap(), 0.0);
        // u - 1/8 ln((1+u)/(1-u))
        let u: f64 = 0.3;
        let direct = u - 0.125 * ((1.0 + u) / (1.0 - u)).ln();
        assert!((fh.eval_f(u).unwrap() - direct).abs() < 1e-15);
                let a = fh.alpha();
        assert!(fh.eval_f(a).unwrap().abs() < 1e-12);
        assert!(fh.eval_f(-a).unwrap().abs() < 1e-12);
        assert!((a - 0.99933).abs() < 5e-6);
    }

    #[test]
    fn domain_violation_and_guard() {
        let fh = example2();
        assert_eq!(fh.eval_f(1.0), Err(Error::DomainViolation(1.0)));
        assert!(fh.eval_f(-1.5).is_err());
        let (v, clamped) = fh.eval_f_guarded(1.5);
        assert!(clamped && v.is_finite() && v < 0.0);
        let (_, clamped) = fh.eval_f_guarded(0.5);
        assert!(!clamped);
        let (v, clamped) = fh.eval_f_guarded(f64::NAN);
        assert!(clamped && v == 0.0);
    }

    #[test]
    fn no_root_below_critical_ratio() {
        assert_eq!(solve_alpha_ratio(1.0), Err(Error::NoRoot(1.0)));
        assert!(PotentialSpec::flory_huggins(1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn nodal_evaluation() {
        let fh = example2();
        assert_eq!(eval_f_nodal(&fh, &[0.0; 4]).unwrap(), vec![0.0; 4]);
        let a = fh.alpha();
        for v in eval_f_nodal(&fh, &[a, -a, a]).unwrap() {
            assert!(v.abs() < 1e-12);
        }
        assert!(eval_f_nodal(&fh, &[0.0, 1.0]).is_err());
    }

    #[test]
    fn stabilization_criterion() {
        let a = example2().alpha();
        let rhs = 1.0 / (4.0 * (1.0 - a * a)) - 1.0;
        assert!(stabilization_holds(1.0 / (rhs + 1.0), 0.0, a));
        assert!(!stabilization_holds(1.0 / (rhs - 10.0), 0.0, a));
    }
}
