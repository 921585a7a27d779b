//! Flat key-value problem description, TOML parsing and named presets.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exp_action::Backend;
use crate::grid_fem::BoundaryCondition;
use crate::potentials::PotentialSpec;

/// Keys accepted in config files and `--set` overrides.
pub const KNOWN_KEYS: &[&str] = &[
    "preset",
    "dim",
    "domain_min",
    "domain_max",
    "cells",
    "degree",
    "bc",
    "potential",
    "epsilon",
    "theta",
    "theta_c",
    "eps_scaling",
    "steps_k",
    "tau",
    "T",
    "cutoff",
    "baseline",
    "kappa",
    "backend",
    "initial",
    "initial_value",
    "forcing",
    "axis",
    "resolutions",
    "ref_k",
    "ref_degree",
    "ref_cells",
    "ref_tau",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialChoice {
    /// Linear problem driven by [`ForcingChoice`].
    None,
    GinzburgLandau,
    FloryHuggins,
}

/// Where `epsilon` enters: `u_t - eps^2 Lap u = f(u)` or `u_t - Lap u = f(u) / eps^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpsScaling {
    Diffusion,
    Reaction,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialData {
    /// `alpha [chi(-1,-1/2) + chi(-1/2,1) cos(3 pi/2 (x + 1/2))]`.
    Example1,
    /// `alpha (2 chi(|x - c|^2 <= 1.2) - 1)` with `c` the domain center.
    Disk,
    /// `prod_i cos(pi x_i)`.
    Cosine,
    Constant(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForcingChoice {
    Zero,
    /// Source making `u = e^{-t} prod_i cos(pi x_i)` an exact solution.
    Manufactured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// `resolution = N`, `tau = T / N`, grid fixed.
    Temporal,
    /// `resolution = M` cells, `tau` fixed.
    Spatial,
    /// `resolution = M` cells with `tau = T / M`.
    Joint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConfig {
    pub preset: Option<String>,
    pub dim: usize,
    pub domain: (f64, f64),
    pub cells: usize,
    pub degree: usize,
    pub bc: BoundaryCondition,
    pub potential: PotentialChoice,
    pub epsilon: f64,
    pub theta: f64,
    pub theta_c: f64,
    pub eps_scaling: EpsScaling,
    pub steps_k: usize,
    pub tau: f64,
    pub t_final: f64,
    pub cutoff: bool,
    /// Run the stabilized ETD-RK2 baseline instead of the multistep scheme.
    pub etd_baseline: bool,
    pub kappa: f64,
    pub backend: Option<Backend>,
    pub initial: InitialData,
    pub forcing: ForcingChoice,
    pub axis: Option<Axis>,
    pub resolutions: Vec<usize>,
    pub ref_k: usize,
    pub ref_degree: Option<usize>,
    pub ref_cells: Option<usize>,
    pub ref_tau: Option<f64>,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        Self {
            preset: None,
            dim: 1,
            domain: (-1.0, 1.0),
            cells: 32,
            degree: 1,
            bc: BoundaryCondition::Neumann,
            potential: PotentialChoice::None,
            epsilon: 1.0,
            theta: 0.25,
            theta_c: 1.0,
            eps_scaling: EpsScaling::Diffusion,
            steps_k: 2,
            tau: 0.01,
            t_final: 1.0,
            cutoff: true,
            etd_baseline: false,
            kappa: 2.0,
            backend: None,
            initial: InitialData::Constant(0.0),
            forcing: ForcingChoice::Zero,
            axis: None,
            resolutions: Vec::new(),
            ref_k: 4,
            ref_degree: None,
            ref_cells: None,
            ref_tau: None,
        }
    }
}

impl ProblemConfig {
    /// Potential with the reaction scaling applied, or `None` for linear problems.
    pub fn potential_spec(&self) -> Result<Option<PotentialSpec>> {
        let eps = match self.eps_scaling {
            EpsScaling::Diffusion => 1.0,
            EpsScaling::Reaction => self.epsilon,
        };
        Ok(match self.potential {
            PotentialChoice::None => None,
            PotentialChoice::GinzburgLandau => Some(PotentialSpec::ginzburg_landau(eps)?),
            PotentialChoice::FloryHuggins => Some(PotentialSpec::flory_huggins(eps, self.theta, self.theta_c)?),
        })
    }

    pub fn diffusion(&self) -> f64 {
        match self.eps_scaling {
            EpsScaling::Diffusion => self.epsilon * self.epsilon,
            EpsScaling::Reaction => 1.0,
        }
    }

    /// Maximum-principle bound of the potential (1 for linear problems).
    pub fn alpha(&self) -> Result<f64> {
        Ok(self.potential_spec()?.map_or(1.0, |p| p.alpha()))
    }

    /// Number of steps for `tau`, which must divide `T` up to rounding.
    pub fn steps_for(&self, tau: f64) -> Result<usize> {
        let n = (self.t_final / tau).round();
        if n < 1.0 || ((n * tau - self.t_final).abs() > 1e-9 * self.t_final.max(1.0)) {
            return Err(Error::Config(format!("tau = {tau} does not divide T = {}", self.t_final)));
        }
        Ok(n as usize)
    }

    pub fn initial_value(&self, x: &[f64], alpha: f64) -> f64 {
        match self.initial {
            InitialData::Example1 => {
                let x = x[0];
                if x < -0.5 {
                    alpha
                } else {
                    alpha * (1.5 * PI * (x + 0.5)).cos()
                }
            }
            InitialData::Disk => {
                let c = 0.5 * (self.domain.0 + self.domain.1);
                let r2: f64 = x.iter().map(|xi| (xi - c) * (xi - c)).sum();
                if r2 <= 1.2 {
                    alpha
                } else {
                    -alpha
                }
            }
            InitialData::Cosine => x.iter().map(|xi| (PI * xi).cos()).product(),
            InitialData::Constant(c) => c,
        }
    }

    /// Closed-form solution, when the problem has one.
    pub fn exact_solution(&self) -> Option<impl Fn(&[f64], f64) -> f64> {
        (self.potential == PotentialChoice::None
            && self.forcing == ForcingChoice::Manufactured
            && self.initial == InitialData::Cosine)
            .then_some(|x: &[f64], t: f64| (-t).exp() * x.iter().map(|xi| (PI * xi).cos()).product::<f64>())
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.dim) {
            return Err(Error::InvalidDimension(self.dim));
        }
        if !(self.domain.0 < self.domain.1) {
            return Err(Error::InvalidDomain(self.domain.0, self.domain.1));
        }
        if !(self.t_final > 0.0) {
            return Err(Error::Config(format!("T must be positive, got {}", self.t_final)));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.initial == InitialData::Example1 && self.dim != 1 {
            return Err(Error::Config("initial = example1 is one-dimensional".into()));
        }
        if self.forcing == ForcingChoice::Manufactured && self.potential != PotentialChoice::None {
            return Err(Error::Config("forcing applies to linear problems (potential = none)".into()));
        }
        if !(self.kappa >= 0.0) {
            return Err(Error::Config(format!("kappa must be non-negative, got {}", self.kappa)));
        }
        self.potential_spec()?;
        Ok(())
    }

    /// Applies one `key = value` pair.
    pub fn set(&mut self, key: &str, value: &toml::Value) -> Result<()> {
        let bad = |what: &str| Error::Config(format!("key `{key}`: expected {what}, got `{value}`"));
        let float = || -> Result<f64> {
            match value {
                toml::Value::Float(f) => Ok(*f),
                toml::Value::Integer(i) => Ok(*i as f64),
                toml::Value::String(s) => parse_float(s).ok_or_else(|| bad("a number")),
                _ => Err(bad("a number")),
            }
        };
        let int = || -> Result<usize> {
            match value {
                toml::Value::Integer(i) if *i >= 0 => Ok(*i as usize),
                toml::Value::String(s) => s.trim().parse().map_err(|_| bad("a non-negative integer")),
                _ => Err(bad("a non-negative integer")),
            }
        };
        let string = || -> Result<String> {
            match value {
                toml::Value::String(s) => Ok(s.trim().to_ascii_lowercase()),
                _ => Err(bad("a string")),
            }
        };
        match key {
            "preset" => {
                let name = string()?;
                *self = preset(&name)?;
            }
            "dim" => self.dim = int()?,
            "domain_min" => self.domain.0 = float()?,
            "domain_max" => self.domain.1 = float()?,
            "cells" => self.cells = int()?,
            "degree" => self.degree = int()?,
            "bc" => {
                self.bc = match string()?.as_str() {
                    "neumann" => BoundaryCondition::Neumann,
                    "periodic" => BoundaryCondition::Periodic,
                    _ => return Err(bad("neumann | periodic")),
                }
            }
            "potential" => {
                self.potential = match string()?.as_str() {
                    "none" | "linear" => PotentialChoice::None,
                    "ginzburg-landau" | "gl" => PotentialChoice::GinzburgLandau,
                    "flory-huggins" | "fh" => PotentialChoice::FloryHuggins,
                    _ => return Err(bad("none | ginzburg-landau | flory-huggins")),
                }
            }
            "epsilon" => self.epsilon = float()?,
            "theta" => self.theta = float()?,
            "theta_c" => self.theta_c = float()?,
            "eps_scaling" => {
                self.eps_scaling = match string()?.as_str() {
                    "diffusion" => EpsScaling::Diffusion,
                    "reaction" => EpsScaling::Reaction,
                    _ => return Err(bad("diffusion | reaction")),
                }
            }
            "steps_k" => self.steps_k = int()?,
            "tau" => self.tau = float()?,
            "T" => self.t_final = float()?,
            "cutoff" => {
                self.cutoff = match value {
                    toml::Value::Boolean(b) => *b,
                    _ => match string()?.as_str() {
                        "enabled" | "on" | "true" => true,
                        "disabled" | "off" | "false" => false,
                        _ => return Err(bad("enabled | disabled")),
                    },
                }
            }
            "baseline" => {
                self.etd_baseline = match string()?.as_str() {
                    "none" => false,
                    "etd-rk2" | "etdrk2" => true,
                    _ => return Err(bad("none | etd-rk2")),
                }
            }
            "kappa" => self.kappa = float()?,
            "backend" => {
                let s = string()?;
                self.backend = if s == "auto" { None } else { Some(s.parse()?) };
            }
            "initial" => {
                let s = string()?;
                self.initial = match s.as_str() {
                    "example1" => InitialData::Example1,
                    "disk" => InitialData::Disk,
                    "cosine" => InitialData::Cosine,
                    "constant" => InitialData::Constant(match self.initial {
                        InitialData::Constant(c) => c,
                        _ => 0.0,
                    }),
                    _ => return Err(bad("example1 | disk | cosine | constant")),
                }
            }
            "initial_value" => self.initial = InitialData::Constant(float()?),
            "forcing" => {
                self.forcing = match string()?.as_str() {
                    "zero" => ForcingChoice::Zero,
                    "manufactured" => ForcingChoice::Manufactured,
                    _ => return Err(bad("zero | manufactured")),
                }
            }
            "axis" => {
                self.axis = match string()?.as_str() {
                    "temporal" => Some(Axis::Temporal),
                    "spatial" => Some(Axis::Spatial),
                    "joint" => Some(Axis::Joint),
                    "none" => None,
                    _ => return Err(bad("temporal | spatial | joint | none")),
                }
            }
            "resolutions" => {
                self.resolutions = match value {
                    toml::Value::Array(items) => items
                        .iter()
                        .map(|v| v.as_integer().filter(|&i| i > 0).map(|i| i as usize))
                        .collect::<Option<Vec<_>>>()
                        .ok_or_else(|| bad("an array of positive integers"))?,
                    toml::Value::String(s) => s
                        .split(',')
                        .map(|p| p.trim().parse::<usize>().ok().filter(|&i| i > 0))
                        .collect::<Option<Vec<_>>>()
                        .ok_or_else(|| bad("a comma-separated list of positive integers"))?,
                    _ => return Err(bad("an array of positive integers")),
                }
            }
            "ref_k" => self.ref_k = int()?,
            "ref_degree" => self.ref_degree = Some(int()?),
            "ref_cells" => self.ref_cells = Some(int()?),
            "ref_tau" => self.ref_tau = Some(float()?),
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }
}

/// Accepts plain numbers and fractions such as `1/400`.
fn parse_float(s: &str) -> Option<f64> {
    let s = s.trim();
    match s.split_once('/') {
        Some((a, b)) => Some(a.trim().parse::<f64>().ok()? / b.trim().parse::<f64>().ok()?),
        None => s.parse().ok(),
    }
}

impl fmt::Display for ProblemConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "dim={} domain=({}, {}) cells={} degree={} k={} tau={} T={} cutoff={}",
            self.dim,
            self.domain.0,
            self.domain.1,
            self.cells,
            self.degree,
            self.steps_k,
            self.tau,
            self.t_final,
            if self.cutoff { "enabled" } else { "disabled" }
        )
    }
}

/// Parses a config document: a flat TOML table whose keys are [`KNOWN_KEYS`].
pub fn parse_config(text: &str) -> Result<ProblemConfig> {
    let mut cfg = ProblemConfig::default();
    apply_config(&mut cfg, text)?;
    Ok(cfg)
}

/// Applies a config document on top of `cfg`. A `preset` key is applied
/// first so that the remaining keys override it.
pub fn apply_config(cfg: &mut ProblemConfig, text: &str) -> Result<()> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    if let Some(p) = table.get("preset") {
        cfg.set("preset", p)?;
    }
    for (key, value) in &table {
        if key != "preset" {
            cfg.set(key, value)?;
        }
    }
    Ok(())
}

/// Applies a `key=value` override; the value is read as a TOML value when it
/// parses as one and as a bare string otherwise.
pub fn apply_override(cfg: &mut ProblemConfig, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    cfg.set(key, &value)
}

pub const PRESETS: &[&str] = &[
    "example1-temporal-k2",
    "example1-temporal-k3",
    "example1-temporal-k4",
    "example1-etdrk2",
    "example1-spatial-r1",
    "example1-spatial-r2",
    "example1-spatial-r3",
    "example1-spatial-r4",
    "example2",
    "example3",
];

fn example1_base() -> ProblemConfig {
    ProblemConfig {
        dim: 1,
        domain: (-1.0, 1.0),
        bc: BoundaryCondition::Neumann,
        potential: PotentialChoice::GinzburgLandau,
        epsilon: 0.01,
        eps_scaling: EpsScaling::Diffusion,
        t_final: 1.0,
        cutoff: true,
        initial: InitialData::Example1,
        forcing: ForcingChoice::Zero,
        resolutions: vec![10, 20, 40, 80, 160],
        ref_k: 4,
        ..ProblemConfig::default()
    }
}

/// Named parameter sets of the reproduced experiments.
pub fn preset(name: &str) -> Result<ProblemConfig> {
    let name_owned = Some(name.to_string());
    let cfg = match name {
        "example1-temporal-k2" | "example1-temporal-k3" | "example1-temporal-k4" | "example1-etdrk2" => {
            let k = match name {
                "example1-temporal-k3" => 3,
                "example1-temporal-k4" => 4,
                _ => 2,
            };
            let etd = name == "example1-etdrk2";
            ProblemConfig {
                cells: 800,
                degree: 2,
                steps_k: k,
                tau: 1.0 / 160.0,
                cutoff: !etd,
                etd_baseline: etd,
                kappa: 2.0,
                axis: Some(Axis::Temporal),
                ref_tau: Some(1.0 / 800.0),
                ..example1_base()
            }
        }
        "example1-spatial-r1" | "example1-spatial-r2" | "example1-spatial-r3" | "example1-spatial-r4" => {
            let r = name.as_bytes()[name.len() - 1] - b'0';
            ProblemConfig {
                cells: 160,
                degree: r as usize,
                steps_k: 4,
                tau: 1.0 / 400.0,
                axis: Some(Axis::Spatial),
                ref_degree: Some(4),
                ref_cells: Some(400),
                ref_tau: Some(1.0 / 400.0),
                ..example1_base()
            }
        }
        "example2" => ProblemConfig {
            potential: PotentialChoice::FloryHuggins,
            theta: 0.25,
            theta_c: 1.0,
            cells: 200,
            degree: 2,
            steps_k: 2,
            tau: 0.01,
            axis: Some(Axis::Joint),
            resolutions: vec![20, 40, 80, 160, 320],
            ref_degree: Some(4),
            ref_cells: Some(400),
            ref_tau: Some(1.0 / 800.0),
            ..example1_base()
        },
        "example3" => ProblemConfig {
            dim: 2,
            domain: (0.0, 2.0 * PI),
            cells: 128,
            degree: 1,
            bc: BoundaryCondition::Periodic,
            potential: PotentialChoice::FloryHuggins,
            epsilon: 0.01,
            theta: 0.25,
            theta_c: 1.0,
            eps_scaling: EpsScaling::Reaction,
            // With |f'(±α)| ≈ 1.9e6 the extrapolation of k ≥ 2 is only stable
            // for τ ≲ 1e-6; exponential Euler with the cut-off is robust.
            steps_k: 1,
            tau: 2.5e-4,
            t_final: 0.01,
            cutoff: true,
            backend: Some(Backend::Tensor),
            initial: InitialData::Disk,
            ref_k: 2,
            ref_tau: Some(1e-6),
            ..ProblemConfig::default()
        },
        _ => return Err(Error::Config(format!("unknown preset `{name}`"))),
    };
    Ok(ProblemConfig {
        preset: name_owned,
        ..cfg
    })
}

impl FromStr for ProblemConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_config(s)
    }
}
