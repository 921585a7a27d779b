//! k-step exponential integrator with nodal cut-off.
//!
//! One step computes
//!
//! ```text
//! u_hat^n = exp(tau L) u^{n-1} + int_{t_{n-1}}^{t_n} exp((t_n - s) L) sum_j L_j(s) f^{n-j} ds
//! u^n     = clamp(u_hat^n)
//! ```
//!
//! where `f^{n-j}` is the forcing at `t_{n-j}` (linear mode) or `f(u^{n-j})`
//! (Allen-Cahn mode). The integral is evaluated exactly through phi-functions.

mod etd;
pub mod extrapolation;
mod starting;

use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exp_action::ExpEvaluator;
use crate::potentials::{eval_f_nodal_guarded, PotentialKind, PotentialSpec};

pub use etd::etd_rk2_step;
pub use extrapolation::{extrapolant, lagrange_extrapolation_coeffs, MAX_STEPS};
pub use starting::GaussLegendre;

/// Nodal projection applied after every step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cutoff {
    /// `min(max(u, -alpha), alpha)`.
    TwoSided(f64),
    /// `max(u, u_min)`.
    OneSided(f64),
    Disabled,
}

impl Cutoff {
    pub fn clamp(&self, x: f64) -> f64 {
        match *self {
            Cutoff::TwoSided(a) => x.max(-a).min(a),
            Cutoff::OneSided(m) => x.max(m),
            Cutoff::Disabled => x,
        }
    }

    /// Clamped vector and the cut-off magnitude `max_j |u_j - u_hat_j|`.
    pub fn apply(&self, u_hat: &[f64]) -> (Vec<f64>, f64) {
        let mut rho: f64 = 0.0;
        let u: Vec<f64> = u_hat
            .iter()
            .map(|&x| {
                let c = self.clamp(x);
                if c != x {
                    rho = rho.max((c - x).abs());
                }
                c
            })
            .collect();
        (u, rho)
    }

    pub fn admits(&self, x: f64) -> bool {
        match *self {
            Cutoff::TwoSided(a) => x.abs() <= a,
            Cutoff::OneSided(m) => x >= m,
            Cutoff::Disabled => true,
        }
    }

    pub fn is_enabled(&self) -> bool {
        !matches!(self, Cutoff::Disabled)
    }
}

/// Known nodal source `f(t)` of a linear problem, defined for all real `t`
/// (including `t < 0`, which the first steps of the extrapolation use).
#[derive(Clone)]
pub struct Forcing(Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>);

impl Forcing {
    pub fn new(f: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Self(Arc::new(f))
    }

    pub fn zero(n: usize) -> Self {
        Self::new(move |_| vec![0.0; n])
    }

    pub fn at(&self, t: f64) -> Vec<f64> {
        (self.0)(t)
    }
}

impl fmt::Debug for Forcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Forcing(..)")
    }
}

#[derive(Debug, Clone)]
pub enum Mode {
    Linear(Forcing),
    Semilinear(PotentialSpec),
}

impl Mode {
    /// Source at `(u, t)` in guard mode, and whether any argument was clamped.
    pub fn source(&self, u: &[f64], t: f64) -> (Vec<f64>, bool) {
        match self {
            Mode::Linear(f) => (f.at(t), false),
            Mode::Semilinear(p) => eval_f_nodal_guarded(p, u),
        }
    }

    pub fn source_derivative(&self, u: &[f64]) -> Vec<f64> {
        match self {
            Mode::Linear(_) => vec![0.0; u.len()],
            Mode::Semilinear(p) => u.iter().map(|&x| p.eval_df_guarded(x)).collect(),
        }
    }

    fn has_log_domain(&self) -> bool {
        matches!(self, Mode::Semilinear(p) if p.kind() == PotentialKind::FloryHuggins)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Baseline {
    None,
    /// Stabilized ETD-RK2 with shift `kappa`.
    EtdRk2(f64),
}

#[derive(Debug, Clone)]
pub struct SchemeConfig {
    pub k: usize,
    pub tau: f64,
    pub num_steps: usize,
    pub cutoff: Cutoff,
    pub mode: Mode,
    pub baseline: Baseline,
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_STEPS).contains(&self.k) {
            return Err(Error::InvalidStepCount(self.k));
        }
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::InvalidScheme(format!("time step must be positive, got {}", self.tau)));
        }
        if self.num_steps < self.k {
            return Err(Error::InvalidScheme(format!(
                "{} steps cannot start a {}-step scheme",
                self.num_steps, self.k
            )));
        }
        if let Cutoff::TwoSided(a) = self.cutoff {
            if !(a > 0.0) {
                return Err(Error::InvalidScheme(format!("cut-off bound must be positive, got {a}")));
            }
        }
        if let Baseline::EtdRk2(kappa) = self.baseline {
            if !(kappa >= 0.0) {
                return Err(Error::InvalidScheme(format!("kappa must be non-negative, got {kappa}")));
            }
        }
        Ok(())
    }

    pub fn final_time(&self) -> f64 {
        self.tau * self.num_steps as f64
    }
}

/// The last k levels (most recent first) and their sources.
#[derive(Debug, Clone)]
pub struct StepHistory {
    levels: VecDeque<Vec<f64>>,
    f_levels: VecDeque<Vec<f64>>,
    /// Index of the most recent level.
    step: usize,
    rho: Vec<f64>,
    violation: Option<usize>,
}

impl StepHistory {
    /// History from explicit levels and sources, most recent first.
    pub fn from_levels(levels: Vec<Vec<f64>>, f_levels: Vec<Vec<f64>>, step: usize) -> Self {
        Self {
            levels: levels.into(),
            f_levels: f_levels.into(),
            step,
            rho: Vec::new(),
            violation: None,
        }
    }

    pub fn latest(&self) -> &[f64] {
        &self.levels[0]
    }

    pub fn levels(&self) -> impl Iterator<Item = &[f64]> {
        self.levels.iter().map(Vec::as_slice)
    }

    pub fn f_levels(&self) -> impl Iterator<Item = &[f64]> {
        self.f_levels.iter().map(Vec::as_slice)
    }

    pub fn step(&self) -> usize {
        self.step
    }

    /// Cut-off magnitudes, one per completed level after the initial one.
    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    /// First step at which a stored value left (-1, 1) for a logarithmic potential.
    pub fn domain_violation(&self) -> Option<usize> {
        self.violation
    }

    fn push(&mut self, u: Vec<f64>, f: Vec<f64>, rho: f64, keep: usize) {
        self.levels.push_front(u);
        self.f_levels.push_front(f);
        self.levels.truncate(keep);
        self.f_levels.truncate(keep);
        self.step += 1;
        self.rho.push(rho);
    }
}

fn check_domain(mode: &Mode, u: &[f64]) -> bool {
    !mode.has_log_domain() || u.iter().all(|x| x.abs() < 1.0)
}

/// One exponential multistep step producing level `t_n = t_{n-1} + tau`.
/// Returns the provisional and the cut-off vectors; the history is advanced.
pub fn exp_multistep_step(
    ev: &ExpEvaluator,
    cfg: &SchemeConfig,
    hist: &mut StepHistory,
    t_n: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let k = cfg.k;
    if hist.f_levels.len() < k {
        return Err(Error::InvalidScheme(format!(
            "history holds {} levels, scheme needs {k}",
            hist.f_levels.len()
        )));
    }
    let coeffs = lagrange_extrapolation_coeffs(k)?;
    let f_refs: Vec<&[f64]> = hist.f_levels.iter().take(k).map(Vec::as_slice).collect();
    let c = extrapolant(&coeffs, &f_refs);
    let u_hat = {
        let scaled: Vec<Vec<f64>> = c
            .iter()
            .enumerate()
            .map(|(m, cm)| {
                let s = cfg.tau * crate::exp_action::phi::factorial(m);
                cm.iter().map(|x| s * x).collect()
            })
            .collect();
        let mut terms: Vec<(usize, &[f64])> = vec![(0, hist.latest())];
        terms.extend(scaled.iter().enumerate().map(|(m, v)| (m + 1, v.as_slice())));
        ev.phi_combination(cfg.tau, 0.0, &terms)?
    };
    let (u_new, rho) = cfg.cutoff.apply(&u_hat);
    if hist.violation.is_none() && !check_domain(&cfg.mode, &u_new) {
        hist.violation = Some(hist.step + 1);
    }
    let (f_new, _) = cfg.mode.source(&u_new, t_n);
    hist.push(u_new.clone(), f_new, rho, k);
    Ok((u_hat, u_new))
}

/// Initial history for the multistep scheme.
///
/// Linear mode needs no start-up: the forcing is evaluated at
/// `t = 0, -tau, ..., -(k-1) tau`. Allen-Cahn mode computes `u^1..u^{k-1}`
/// with the Gauss-Legendre method, clamping each level.
pub fn starting_values(ev: &ExpEvaluator, cfg: &SchemeConfig, u0: &[f64]) -> Result<StepHistory> {
    starting_values_observed(ev, cfg, u0, &mut |_| {})
}

fn starting_values_observed(
    ev: &ExpEvaluator,
    cfg: &SchemeConfig,
    u0: &[f64],
    observer: &mut dyn FnMut(StepEvent<'_>),
) -> Result<StepHistory> {
    cfg.validate()?;
    if u0.len() != ev.len() {
        return Err(Error::SizeMismatch {
            expected: ev.len(),
            got: u0.len(),
        });
    }
    match &cfg.mode {
        Mode::Linear(forcing) => {
            let f_levels = (0..cfg.k).map(|j| forcing.at(-(j as f64) * cfg.tau)).collect();
            Ok(StepHistory::from_levels(vec![u0.to_vec()], f_levels, 0))
        }
        Mode::Semilinear(_) => {
            let (f0, _) = cfg.mode.source(u0, 0.0);
            let mut hist = StepHistory::from_levels(vec![u0.to_vec()], vec![f0], 0);
            if cfg.k > 1 {
                let mut rk = GaussLegendre::new(ev.operator().generator_csr());
                for level in 1..cfg.k {
                    let t = (level - 1) as f64 * cfg.tau;
                    let u_hat = rk.step(&cfg.mode, hist.latest(), t, cfg.tau, level)?;
                    let (u, rho) = cfg.cutoff.apply(&u_hat);
                    if hist.violation.is_none() && !check_domain(&cfg.mode, &u) {
                        hist.violation = Some(level);
                    }
                    observer(StepEvent {
                        step: level,
                        time: level as f64 * cfg.tau,
                        u_hat: &u_hat,
                        u: &u,
                        rho,
                    });
                    let (f, _) = cfg.mode.source(&u, level as f64 * cfg.tau);
                    hist.levels.push_front(u);
                    hist.f_levels.push_front(f);
                    hist.step = level;
                    hist.rho.push(rho);
                }
            }
            Ok(hist)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Ok,
    /// First step index at which a value left the logarithm's domain.
    DomainViolation(usize),
    StartingFailure,
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunStatus::Ok => f.write_str("ok"),
            RunStatus::DomainViolation(n) => write!(f, "domain-violation@{n}"),
            RunStatus::StartingFailure => f.write_str("starting-failure"),
        }
    }
}

/// Accepted level, reported to run observers.
#[derive(Debug, Clone, Copy)]
pub struct StepEvent<'a> {
    pub step: usize,
    pub time: f64,
    pub u_hat: &'a [f64],
    pub u: &'a [f64],
    pub rho: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub final_field: Vec<f64>,
    pub rho: Vec<f64>,
    pub status: RunStatus,
    /// Stabilization criterion for the ETD-RK2 baseline with a bounded potential.
    pub stabilization_ok: Option<bool>,
}

impl RunOutcome {
    pub fn rho_max(&self) -> f64 {
        self.rho.iter().copied().fold(0.0, f64::max)
    }
}

/// Runs the configured scheme from `u0` to `num_steps * tau`.
pub fn run_scheme(ev: &ExpEvaluator, cfg: &SchemeConfig, u0: &[f64]) -> Result<RunOutcome> {
    run_scheme_observed(ev, cfg, u0, &mut |_| {})
}

/// As [`run_scheme`], calling `observer` on every accepted level.
pub fn run_scheme_observed(
    ev: &ExpEvaluator,
    cfg: &SchemeConfig,
    u0: &[f64],
    observer: &mut dyn FnMut(StepEvent<'_>),
) -> Result<RunOutcome> {
    cfg.validate()?;
    if let Baseline::EtdRk2(kappa) = cfg.baseline {
        return run_etd(ev, cfg, u0, kappa, observer);
    }
    let mut hist = match starting_values_observed(ev, cfg, u0, observer) {
        Ok(h) => h,
        Err(Error::StartingFailure { .. }) => {
            return Ok(RunOutcome {
                final_field: u0.to_vec(),
                rho: Vec::new(),
                status: RunStatus::StartingFailure,
                stabilization_ok: None,
            })
        }
        Err(e) => return Err(e),
    };
    let first = hist.step() + 1;
    for n in first..=cfg.num_steps {
        let t_n = n as f64 * cfg.tau;
        let (u_hat, u) = exp_multistep_step(ev, cfg, &mut hist, t_n)?;
        observer(StepEvent {
            step: n,
            time: t_n,
            u_hat: &u_hat,
            u: &u,
            rho: *hist.rho.last().unwrap(),
        });
    }
    let status = match hist.violation {
        Some(n) => RunStatus::DomainViolation(n),
        None => RunStatus::Ok,
    };
    Ok(RunOutcome {
        final_field: hist.levels.pop_front().unwrap(),
        rho: hist.rho,
        status,
        stabilization_ok: None,
    })
}

fn run_etd(
    ev: &ExpEvaluator,
    cfg: &SchemeConfig,
    u0: &[f64],
    kappa: f64,
    observer: &mut dyn FnMut(StepEvent<'_>),
) -> Result<RunOutcome> {
    let mut u = u0.to_vec();
    let mut rho = Vec::with_capacity(cfg.num_steps);
    let mut violation = None;
    for n in 1..=cfg.num_steps {
        let t = (n - 1) as f64 * cfg.tau;
        let u_hat = etd_rk2_step(ev, cfg, &u, t, kappa)?;
        let (next, r) = cfg.cutoff.apply(&u_hat);
        if violation.is_none() && !check_domain(&cfg.mode, &next) {
            violation = Some(n);
        }
        observer(StepEvent {
            step: n,
            time: n as f64 * cfg.tau,
            u_hat: &u_hat,
            u: &next,
            rho: r,
        });
        rho.push(r);
        u = next;
    }
    let stabilization_ok = match &cfg.mode {
        Mode::Semilinear(p) => Some(stabilization_criterion(p, cfg.tau, kappa)),
        Mode::Linear(_) => None,
    };
    Ok(RunOutcome {
        final_field: u,
        rho,
        status: violation.map_or(RunStatus::Ok, RunStatus::DomainViolation),
        stabilization_ok,
    })
}

/// Whether the stabilization shift dominates the reaction stiffness on
/// `[-alpha, alpha]`. Ginzburg-Landau: `kappa >= max |f'| = 2 / eps^2`;
/// Flory-Huggins: [`crate::potentials::stabilization_holds`].
pub fn stabilization_criterion(p: &PotentialSpec, tau: f64, kappa: f64) -> bool {
    match p.kind() {
        PotentialKind::GinzburgLandau => kappa >= 2.0 / (p.epsilon() * p.epsilon()),
        PotentialKind::FloryHuggins => crate::potentials::stabilization_holds(tau, kappa, p.alpha()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamp_is_idempotent_on_bounds() {
        let c = Cutoff::TwoSided(0.5);
        assert_eq!(c.clamp(0.5), 0.5);
        assert_eq!(c.clamp(-0.5), -0.5);
        assert_eq!(c.clamp(0.7), 0.5);
        assert_eq!(c.clamp(-3.0), -0.5);
        let (u, rho) = c.apply(&[0.1, 0.75, -0.5]);
        assert_eq!(u, vec![0.1, 0.5, -0.5]);
        assert_eq!(rho, 0.25);
        let (_, rho) = c.apply(&[0.1, -0.2]);
        assert_eq!(rho, 0.0);
        let (u, _) = Cutoff::OneSided(1.0).apply(&[0.0, 2.0]);
        assert_eq!(u, vec![1.0, 2.0]);
    }

    #[test]
    fn config_validation() {
        let base = SchemeConfig {
            k: 2,
            tau: 0.1,
            num_steps: 10,
            cutoff: Cutoff::TwoSided(1.0),
            mode: Mode::Linear(Forcing::zero(1)),
            baseline: Baseline::None,
        };
        assert!(base.validate().is_ok());
        assert!(SchemeConfig { k: 7, ..base.clone() }.validate().is_err());
        assert!(SchemeConfig { num_steps: 1, ..base.clone() }.validate().is_err());
        assert!(SchemeConfig { tau: 0.0, ..base.clone() }.validate().is_err());
        assert!(SchemeConfig {
            cutoff: Cutoff::TwoSided(0.0),
            ..base.clone()
        }
        .validate()
        .is_err());
    }
}
