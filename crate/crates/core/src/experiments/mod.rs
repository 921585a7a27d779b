//! Convergence sweeps, the cut-off comparison and the 2D interface run.

mod config;
mod output;

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

pub use config::{
    apply_config, apply_override, parse_config, preset, Axis, EpsScaling, ForcingChoice, InitialData, PotentialChoice,
    ProblemConfig, KNOWN_KEYS, PRESETS,
};
pub use output::{write_report_csv, write_rho_csv, write_snapshot_csv};

use crate::error::{Error, Result};
use crate::exp_action::{build_evaluator, default_backend, ExpEvaluator};
use crate::grid_fem::{assemble_operators, build_grid, discrete_norm, interpolate, l2_distance, l2_error_fn, Grid};
use crate::time_steppers::{run_scheme_observed, Baseline, Cutoff, Forcing, Mode, RunOutcome, RunStatus, SchemeConfig};

/// How the error of a sweep entry is measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reference {
    /// Closed-form solution of a manufactured problem.
    Exact,
    /// Numerical solution with the cut-off scheme at a finer resolution.
    Computed {
        k: usize,
        degree: usize,
        cells: usize,
        tau: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub axis: Axis,
    pub resolutions: Vec<usize>,
    pub reference: Reference,
}

impl ConvergenceStudy {
    /// Study described by the `axis`, `resolutions` and `ref_*` keys.
    pub fn from_config(cfg: &ProblemConfig) -> Result<Self> {
        let axis = cfg
            .axis
            .ok_or_else(|| Error::Config("no sweep axis configured (set `axis`)".into()))?;
        let finest = cfg.resolutions.iter().copied().max().unwrap_or(0);
        let reference = if cfg.exact_solution().is_some() {
            Reference::Exact
        } else {
            match axis {
                Axis::Temporal => Reference::Computed {
                    k: cfg.ref_k,
                    degree: cfg.ref_degree.unwrap_or(cfg.degree),
                    cells: cfg.ref_cells.unwrap_or(cfg.cells),
                    tau: cfg.ref_tau.unwrap_or(cfg.t_final / (5 * finest.max(1)) as f64),
                },
                Axis::Spatial => Reference::Computed {
                    k: cfg.ref_k,
                    degree: cfg.ref_degree.unwrap_or(4),
                    cells: cfg.ref_cells.unwrap_or(5 * finest / 2),
                    tau: cfg.ref_tau.unwrap_or(cfg.tau),
                },
                Axis::Joint => Reference::Computed {
                    k: cfg.ref_k,
                    degree: cfg.ref_degree.unwrap_or(4),
                    cells: cfg.ref_cells.unwrap_or(2 * finest),
                    tau: cfg.ref_tau.unwrap_or(cfg.t_final / (4 * finest.max(1)) as f64),
                },
            }
        };
        let study = Self {
            axis,
            resolutions: cfg.resolutions.clone(),
            reference,
        };
        study.validate(cfg)?;
        Ok(study)
    }

    pub fn validate(&self, cfg: &ProblemConfig) -> Result<()> {
        if self.resolutions.len() < 3 {
            return Err(Error::Config(format!(
                "a sweep needs at least 3 resolutions, got {}",
                self.resolutions.len()
            )));
        }
        if self.resolutions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("resolutions must be strictly increasing".into()));
        }
        let finest = *self.resolutions.last().unwrap();
        if let Reference::Computed { cells, tau, .. } = self.reference {
            let finer = match self.axis {
                Axis::Temporal => cfg.t_final / tau > finest as f64,
                Axis::Spatial => cells > finest,
                Axis::Joint => cells > finest && cfg.t_final / tau > finest as f64,
            };
            if !finer {
                return Err(Error::Config(
                    "the reference resolution must be finer than every sweep entry".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub experiment: String,
    pub scheme: String,
    /// File-name slot: `sweep` for sweeps, `M<cells>` for single runs.
    pub tag: String,
    pub resolutions: Vec<usize>,
    /// L2 errors of the finite element functions.
    pub errors: Vec<f64>,
    /// Lumped discrete norms of the nodal errors.
    pub nodal_errors: Vec<f64>,
    /// `log2(e_i / e_{i+1})`; NaN where either run did not finish cleanly.
    pub rates: Vec<f64>,
    pub statuses: Vec<RunStatus>,
    /// First non-Ok status of the sweep, Ok otherwise.
    pub status: RunStatus,
    /// Cut-off magnitudes of the finest run.
    pub rho_trace: Vec<f64>,
    /// Largest `|u_j|` over every stored level of every run.
    pub max_abs: f64,
    /// Active cut-off bound, if any.
    pub bound: Option<f64>,
    /// Stabilization criterion of the ETD-RK2 baseline, when it applies.
    pub stabilization_ok: Option<bool>,
}

impl RunReport {
    pub fn final_rate(&self) -> Option<f64> {
        self.rates.last().copied()
    }

    pub fn rho_max(&self) -> f64 {
        self.rho_trace.iter().copied().fold(0.0, f64::max)
    }

    pub fn summary(&self) -> String {
        let err = self.errors.last().copied().unwrap_or(f64::NAN);
        let rate = self.final_rate().map_or("-".to_string(), |r| format!("{r:.3}"));
        format!(
            "{} {} {}: error {:.3e} rate {} rho_max {:.3e} status {}",
            self.experiment,
            self.scheme,
            self.tag,
            err,
            rate,
            self.rho_max(),
            self.status
        )
    }
}

/// `r_i = log2(e_i / e_{i+1})`.
pub fn estimate_rate(errors: &[f64]) -> Result<Vec<f64>> {
    if errors.len() < 2 {
        return Err(Error::TooFewValues {
            need: 2,
            got: errors.len(),
        });
    }
    if let Some(&e) = errors.iter().find(|&&e| !(e > 0.0)) {
        return Err(Error::NonPositiveError(e));
    }
    Ok(errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect())
}

/// A grid with its exponential evaluator.
pub struct Discretization {
    pub grid: Grid,
    pub ev: ExpEvaluator,
}

pub fn discretize(cfg: &ProblemConfig, cells: usize, degree: usize) -> Result<Discretization> {
    let grid = build_grid(cfg.dim, cfg.domain, cells, degree, cfg.bc)?;
    let op = Arc::new(assemble_operators(&grid, cfg.diffusion()));
    let backend = cfg.backend.unwrap_or_else(|| default_backend(&op));
    let ev = build_evaluator(op, backend)?;
    Ok(Discretization { grid, ev })
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub field: Vec<f64>,
    pub outcome: RunOutcome,
    pub max_abs: f64,
    pub bound: Option<f64>,
}

/// Scheme configuration of `cfg` on `grid` with the given steps.
pub fn scheme_for(cfg: &ProblemConfig, grid: &Grid, k: usize, tau: f64, u0: &[f64]) -> Result<SchemeConfig> {
    let num_steps = cfg.steps_for(tau)?;
    let potential = cfg.potential_spec()?;
    let mode = match potential {
        Some(p) => Mode::Semilinear(p),
        None => Mode::Linear(forcing_for(cfg, grid)),
    };
    let cutoff = match (&mode, cfg.cutoff) {
        (_, false) => Cutoff::Disabled,
        (Mode::Semilinear(p), true) => Cutoff::TwoSided(p.alpha()),
        (Mode::Linear(_), true) => Cutoff::OneSided(u0.iter().copied().fold(f64::INFINITY, f64::min)),
    };
    let baseline = if cfg.etd_baseline {
        Baseline::EtdRk2(cfg.kappa)
    } else {
        Baseline::None
    };
    let sc = SchemeConfig {
        k,
        tau,
        num_steps,
        cutoff,
        mode,
        baseline,
    };
    sc.validate()?;
    Ok(sc)
}

fn forcing_for(cfg: &ProblemConfig, grid: &Grid) -> Forcing {
    match cfg.forcing {
        ForcingChoice::Zero => Forcing::zero(grid.num_nodes()),
        ForcingChoice::Manufactured => {
            // u = e^{-t} P(x) with -Lap P = dim pi^2 P.
            let p = interpolate(grid, |x| x.iter().map(|xi| (PI * xi).cos()).product());
            let c = cfg.dim as f64 * cfg.diffusion() * PI * PI - 1.0;
            Forcing::new(move |t| {
                let s = c * (-t).exp();
                p.iter().map(|v| s * v).collect()
            })
        }
    }
}

pub fn initial_field(cfg: &ProblemConfig, grid: &Grid) -> Result<Vec<f64>> {
    let alpha = cfg.alpha()?;
    Ok(interpolate(grid, |x| cfg.initial_value(x, alpha)))
}

/// Runs `cfg` with `k` and `tau` on a prepared discretization. `on_level`
/// sees every stored level after the initial one.
pub fn run_on(
    cfg: &ProblemConfig,
    disc: &Discretization,
    k: usize,
    tau: f64,
    on_level: &mut dyn FnMut(usize, &[f64]),
) -> Result<RunResult> {
    let u0 = initial_field(cfg, &disc.grid)?;
    let sc = scheme_for(cfg, &disc.grid, k, tau, &u0)?;
    let mut max_abs = u0.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let outcome = run_scheme_observed(&disc.ev, &sc, &u0, &mut |e| {
        max_abs = e.u.iter().fold(max_abs, |m, x| m.max(x.abs()));
        on_level(e.step, e.u);
    })?;
    let bound = match sc.cutoff {
        Cutoff::TwoSided(a) => Some(a),
        _ => None,
    };
    Ok(RunResult {
        field: outcome.final_field.clone(),
        outcome,
        max_abs,
        bound,
    })
}

/// One run at the configured `cells`, `degree`, `steps_k` and `tau`.
pub fn run_single(cfg: &ProblemConfig) -> Result<(Discretization, RunResult)> {
    cfg.validate()?;
    let disc = discretize(cfg, cfg.cells, cfg.degree)?;
    let res = run_on(cfg, &disc, cfg.steps_k, cfg.tau, &mut |_, _| {})?;
    Ok((disc, res))
}

pub fn experiment_name(cfg: &ProblemConfig) -> String {
    cfg.preset.clone().unwrap_or_else(|| "custom".into())
}

pub fn scheme_label(cfg: &ProblemConfig) -> String {
    if cfg.etd_baseline {
        format!("etdrk2-r{}", cfg.degree)
    } else if cfg.cutoff {
        format!("k{}-r{}", cfg.steps_k, cfg.degree)
    } else {
        format!("k{}-r{}-nocut", cfg.steps_k, cfg.degree)
    }
}

/// Errors of `field` on `grid` against `reference` on `ref_grid`: the L2
/// distance of the two finite element functions, and the lumped discrete
/// norm of the difference at the nodes of `grid` (reference evaluated there
/// through its element polynomials).
pub fn error_against(grid: &Grid, field: &[f64], ref_grid: &Grid, reference: &[f64]) -> Result<(f64, f64)> {
    let diff: Vec<f64> = grid
        .points()
        .zip(field)
        .map(|(x, u)| u - ref_grid.evaluate(reference, &x))
        .collect();
    Ok((l2_distance(grid, field, ref_grid, reference)?, discrete_norm(grid, &diff)?))
}

fn reference_run(cfg: &ProblemConfig, k: usize, degree: usize, cells: usize, tau: f64) -> Result<(Grid, Vec<f64>)> {
    // The reference always uses the cut-off multistep scheme.
    let ref_cfg = ProblemConfig {
        etd_baseline: false,
        cutoff: true,
        ..cfg.clone()
    };
    let disc = discretize(&ref_cfg, cells, degree)?;
    let res = run_on(&ref_cfg, &disc, k, tau, &mut |_, _| {})?;
    if res.outcome.status != RunStatus::Ok {
        return Err(Error::InvalidScheme(format!(
            "reference run finished with status {}",
            res.outcome.status
        )));
    }
    Ok((disc.grid, res.field))
}

fn worst_status(statuses: &[RunStatus]) -> RunStatus {
    statuses
        .iter()
        .copied()
        .find(|s| *s != RunStatus::Ok)
        .unwrap_or(RunStatus::Ok)
}

fn rates_of(errors: &[f64], statuses: &[RunStatus]) -> Vec<f64> {
    errors
        .windows(2)
        .zip(statuses.windows(2))
        .map(|(e, s)| {
            if s.iter().all(|s| *s == RunStatus::Ok) && e[0] > 0.0 && e[1] > 0.0 {
                (e[0] / e[1]).log2()
            } else {
                f64::NAN
            }
        })
        .collect()
}

/// Runs every resolution of `study` and measures its error at `T`.
pub fn run_convergence_study(study: &ConvergenceStudy, cfg: &ProblemConfig) -> Result<RunReport> {
    cfg.validate()?;
    study.validate(cfg)?;
    let t_final = cfg.t_final;

    let shared = match study.axis {
        Axis::Temporal => Some(discretize(cfg, cfg.cells, cfg.degree)?),
        _ => None,
    };
    let reference = match study.reference {
        Reference::Exact => None,
        Reference::Computed { k, degree, cells, tau } => {
            if let (Some(d), true) = (&shared, degree == cfg.degree && cells == cfg.cells) {
                // Same grid: reuse the evaluator.
                let ref_cfg = ProblemConfig {
                    etd_baseline: false,
                    cutoff: true,
                    ..cfg.clone()
                };
                let res = run_on(&ref_cfg, d, k, tau, &mut |_, _| {})?;
                if res.outcome.status != RunStatus::Ok {
                    return Err(Error::InvalidScheme(format!(
                        "reference run finished with status {}",
                        res.outcome.status
                    )));
                }
                Some((d.grid.clone(), res.field))
            } else {
                Some(reference_run(cfg, k, degree, cells, tau)?)
            }
        }
    };

    let runs: Vec<Result<((f64, f64), RunResult)>> = study
        .resolutions
        .par_iter()
        .map(|&res| {
            let (cells, tau) = match study.axis {
                Axis::Temporal => (cfg.cells, t_final / res as f64),
                Axis::Spatial => (res, cfg.tau),
                Axis::Joint => (res, t_final / res as f64),
            };
            let owned;
            let disc = match &shared {
                Some(d) => d,
                None => {
                    owned = discretize(cfg, cells, cfg.degree)?;
                    &owned
                }
            };
            let run = run_on(cfg, disc, cfg.steps_k, tau, &mut |_, _| {})?;
            let err = match &reference {
                Some((g, u)) => error_against(&disc.grid, &run.field, g, u)?,
                None => {
                    let exact = cfg.exact_solution().expect("exact reference");
                    let diff: Vec<f64> = disc
                        .grid
                        .points()
                        .zip(&run.field)
                        .map(|(x, u)| u - exact(&x, t_final))
                        .collect();
                    (
                        l2_error_fn(&disc.grid, &run.field, |x| exact(x, t_final))?,
                        discrete_norm(&disc.grid, &diff)?,
                    )
                }
            };
            Ok((err, run))
        })
        .collect();
    let runs: Vec<((f64, f64), RunResult)> = runs.into_iter().collect::<Result<_>>()?;

    let errors: Vec<f64> = runs.iter().map(|(e, _)| e.0).collect();
    let nodal_errors: Vec<f64> = runs.iter().map(|(e, _)| e.1).collect();
    let statuses: Vec<RunStatus> = runs.iter().map(|(_, r)| r.outcome.status).collect();
    let finest = &runs.last().unwrap().1;
    Ok(RunReport {
        experiment: experiment_name(cfg),
        scheme: scheme_label(cfg),
        tag: "sweep".into(),
        resolutions: study.resolutions.clone(),
        rates: rates_of(&errors, &statuses),
        errors,
        nodal_errors,
        status: worst_status(&statuses),
        statuses,
        rho_trace: finest.outcome.rho.clone(),
        max_abs: runs.iter().map(|(_, r)| r.max_abs).fold(0.0, f64::max),
        bound: finest.bound,
        stabilization_ok: finest.outcome.stabilization_ok,
    })
}

#[derive(Debug, Clone)]
pub struct CutoffComparison {
    pub enabled: RunReport,
    pub disabled: RunReport,
    /// Set when the run without cut-off stays inside the logarithm's domain.
    pub discrepancy: Option<String>,
}

/// Runs the configured problem with and without the cut-off and measures
/// both against a finer reference.
pub fn run_cutoff_comparison(cfg: &ProblemConfig) -> Result<CutoffComparison> {
    cfg.validate()?;
    let k = cfg.ref_k;
    let degree = cfg.ref_degree.unwrap_or(4);
    let cells = cfg.ref_cells.unwrap_or(2 * cfg.cells);
    let tau = cfg.ref_tau.unwrap_or(cfg.tau / 4.0);
    let (ref_grid, ref_field) = reference_run(cfg, k, degree, cells, tau)?;
    let disc = discretize(cfg, cfg.cells, cfg.degree)?;

    let leg = |cutoff: bool| -> Result<RunReport> {
        let c = ProblemConfig {
            cutoff,
            etd_baseline: false,
            ..cfg.clone()
        };
        let run = run_on(&c, &disc, c.steps_k, c.tau, &mut |_, _| {})?;
        let (err, nodal) = error_against(&disc.grid, &run.field, &ref_grid, &ref_field)?;
        let status = run.outcome.status;
        Ok(RunReport {
            experiment: experiment_name(cfg),
            scheme: scheme_label(&c),
            tag: format!("M{}", cfg.cells),
            resolutions: vec![cfg.cells],
            errors: vec![err],
            nodal_errors: vec![nodal],
            rates: Vec::new(),
            statuses: vec![status],
            status,
            rho_trace: run.outcome.rho.clone(),
            max_abs: run.max_abs,
            bound: run.bound,
            stabilization_ok: None,
        })
    };
    let enabled = leg(true)?;
    let disabled = leg(false)?;
    let discrepancy = match disabled.status {
        RunStatus::DomainViolation(_) => None,
        s => Some(format!(
            "run without cut-off finished with status {s} (max |u| = {:.6}) instead of leaving the domain",
            disabled.max_abs
        )),
    };
    Ok(CutoffComparison {
        enabled,
        disabled,
        discrepancy,
    })
}

/// Snapshots per run: `t = 0, T/4, T/2, 3T/4, T`.
pub const SNAPSHOTS: usize = 5;

#[derive(Debug, Clone)]
pub struct InterfaceReport {
    /// Error of the main run at `T` against the reference run.
    pub report: RunReport,
    pub grid: Grid,
    pub times: Vec<f64>,
    /// Main-run snapshots at `times`.
    pub snapshots: Vec<Vec<f64>>,
    pub radii: Vec<f64>,
    pub reference_radii: Vec<f64>,
    /// `max |U_ij - U_ji|` over all main-run snapshots.
    pub symmetry_defect: f64,
    pub reference_symmetry_defect: f64,
}

/// 2D run with snapshots, interface radii and a finer-step reference.
pub fn run_2d_interface(cfg: &ProblemConfig) -> Result<InterfaceReport> {
    cfg.validate()?;
    if cfg.dim != 2 {
        return Err(Error::Config("the interface experiment is two-dimensional".into()));
    }
    let disc = discretize(cfg, cfg.cells, cfg.degree)?;
    let ref_tau = cfg.ref_tau.unwrap_or(cfg.tau / 4.0);

    let snap_run = |c: &ProblemConfig, k: usize, tau: f64| -> Result<(RunResult, Vec<Vec<f64>>)> {
        let n = c.steps_for(tau)?;
        let marks: Vec<usize> = (0..SNAPSHOTS).map(|j| (j * n + (SNAPSHOTS - 1) / 2) / (SNAPSHOTS - 1)).collect();
        let mut snaps = vec![initial_field(c, &disc.grid)?];
        let res = run_on(c, &disc, k, tau, &mut |step, u| {
            if marks[1..].contains(&step) {
                snaps.push(u.to_vec());
            }
        })?;
        Ok((res, snaps))
    };

    let (main, snaps) = snap_run(cfg, cfg.steps_k, cfg.tau)?;
    let ref_cfg = ProblemConfig {
        cutoff: true,
        etd_baseline: false,
        ..cfg.clone()
    };
    let (reference, ref_snaps) = snap_run(&ref_cfg, cfg.ref_k, ref_tau)?;

    let (err, nodal) = error_against(&disc.grid, &main.field, &disc.grid, &reference.field)?;
    let times = (0..SNAPSHOTS)
        .map(|j| cfg.t_final * j as f64 / (SNAPSHOTS - 1) as f64)
        .collect();
    let radii = snaps.iter().map(|u| interface_radius(&disc.grid, u)).collect();
    let reference_radii = ref_snaps.iter().map(|u| interface_radius(&disc.grid, u)).collect();
    let defect = |s: &[Vec<f64>]| s.iter().map(|u| reflection_defect(&disc.grid, u)).fold(0.0, f64::max);
    let status = main.outcome.status;
    Ok(InterfaceReport {
        report: RunReport {
            experiment: experiment_name(cfg),
            scheme: scheme_label(cfg),
            tag: format!("M{}", cfg.cells),
            resolutions: vec![cfg.cells],
            errors: vec![err],
            nodal_errors: vec![nodal],
            rates: Vec::new(),
            statuses: vec![status],
            status,
            rho_trace: main.outcome.rho.clone(),
            max_abs: main.max_abs,
            bound: main.bound,
            stabilization_ok: main.outcome.stabilization_ok,
        },
        symmetry_defect: defect(&snaps),
        reference_symmetry_defect: defect(&ref_snaps),
        grid: disc.grid,
        times,
        snapshots: snaps,
        radii,
        reference_radii,
    })
}

/// Radius of the zero level set along the line `x2 = center`: half the
/// distance between the sign changes nearest to the center on either side,
/// each located by linear interpolation. NaN if either side has none.
pub fn interface_radius(grid: &Grid, u: &[f64]) -> f64 {
    let n = grid.nodes_per_axis();
    let xs = grid.axis_coords();
    let (lo, hi) = grid.domain();
    let c = 0.5 * (lo + hi);
    let nearest = |x: f64| {
        (0..n)
            .min_by(|&a, &b| (xs[a] - x).abs().total_cmp(&(xs[b] - x).abs()))
            .unwrap()
    };
    let jc = nearest(c);
    let line: Vec<f64> = (0..n).map(|i| u[i * n + jc]).collect();
    let ic = nearest(c);
    let crossing = |i: usize, j: usize| {
        let (a, b) = (line[i], line[j]);
        xs[i] + (xs[j] - xs[i]) * a / (a - b)
    };
    let right = (ic..n - 1)
        .find(|&i| line[i] * line[i + 1] <= 0.0 && line[i] != line[i + 1])
        .map(|i| crossing(i, i + 1));
    let left = (1..=ic)
        .rev()
        .find(|&i| line[i] * line[i - 1] <= 0.0 && line[i] != line[i - 1])
        .map(|i| crossing(i - 1, i));
    match (left, right) {
        (Some(l), Some(r)) => 0.5 * (r - l),
        _ => f64::NAN,
    }
}

/// `max |U_ij - U_ji|` for a 2D nodal field.
pub fn reflection_defect(grid: &Grid, u: &[f64]) -> f64 {
    let n = grid.nodes_per_axis();
    let mut d: f64 = 0.0;
    for i in 0..n {
        for j in 0..i {
            d = d.max((u[i * n + j] - u[j * n + i]).abs());
        }
    }
    d
}
