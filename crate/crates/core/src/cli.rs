//! `mpp` command-line front end.
//!
//! Exit status: 0 when every run finished cleanly, 2 when a run reported a
//! domain violation or a starting failure, 1 on usage and config errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::exp_action::Backend;
use crate::experiments::{
    apply_config, apply_override, experiment_name, preset, run_2d_interface, run_convergence_study,
    run_cutoff_comparison, run_single, scheme_label, write_report_csv, write_rho_csv, write_snapshot_csv,
    ConvergenceStudy, ProblemConfig, RunReport, PRESETS,
};
use crate::time_steppers::RunStatus;

#[derive(Debug, Parser)]
#[command(name = "mpp", version, about = "Maximum-principle-preserving exponential integrators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Temporal, spatial or joint convergence sweep.
    Converge(Common),
    /// Same problem with and without the cut-off.
    CompareCutoff {
        #[command(flatten)]
        common: Common,
        /// Which run(s) to perform.
        #[arg(long, value_enum, default_value_t = Leg::Both)]
        leg: Leg,
    },
    /// Two-dimensional interface run with snapshots.
    #[command(name = "run-2d")]
    Run2d(Common),
    /// One run at the configured resolution.
    SingleRun(Common),
    /// Print the preset names.
    ListPresets,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Leg {
    Enabled,
    Disabled,
    Both,
}

#[derive(Debug, Args)]
struct Common {
    /// Flat TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named preset, applied before the config file and overrides.
    #[arg(long)]
    preset: Option<String>,
    /// `key=value` override; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory for CSV artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overwrite existing output files.
    #[arg(long)]
    force: bool,
    #[arg(long, value_parser = parse_backend)]
    backend: Option<Backend>,
}

fn parse_backend(s: &str) -> std::result::Result<Backend, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl Common {
    fn load(&self) -> Result<ProblemConfig> {
        let mut cfg = match &self.preset {
            Some(name) => preset(name)?,
            None => ProblemConfig::default(),
        };
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            apply_config(&mut cfg, &text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        }
        for o in &self.overrides {
            apply_override(&mut cfg, o)?;
        }
        if let Some(b) = self.backend {
            cfg.backend = Some(b);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit status.
pub fn parse_and_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(statuses) => {
            if statuses.iter().all(|s| *s == RunStatus::Ok) {
                0
            } else {
                2
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(command: Command) -> Result<Vec<RunStatus>> {
    match command {
        Command::ListPresets => {
            for p in PRESETS {
                println!("{p}");
            }
            Ok(Vec::new())
        }
        Command::Converge(common) => {
            let cfg = common.load()?;
            let study = ConvergenceStudy::from_config(&cfg)?;
            let report = run_convergence_study(&study, &cfg)?;
            emit(&report, &common)?;
            if let Some(ok) = report.stabilization_ok {
                println!("stabilization criterion: {}", if ok { "holds" } else { "violated" });
            }
            write_metadata(&common, &cfg, "converge")?;
            Ok(vec![report.status])
        }
        Command::CompareCutoff { common, leg } => {
            let cfg = common.load()?;
            let cmp = run_cutoff_comparison(&cfg)?;
            let mut statuses = Vec::new();
            if leg != Leg::Disabled {
                emit(&cmp.enabled, &common)?;
                statuses.push(cmp.enabled.status);
            }
            if leg != Leg::Enabled {
                emit(&cmp.disabled, &common)?;
                statuses.push(cmp.disabled.status);
                if let Some(d) = &cmp.discrepancy {
                    println!("reproduction discrepancy: {d}");
                }
            }
            write_metadata(&common, &cfg, "compare-cutoff")?;
            Ok(statuses)
        }
        Command::Run2d(common) => {
            let cfg = common.load()?;
            let rep = run_2d_interface(&cfg)?;
            emit(&rep.report, &common)?;
            for (j, (t, u)) in rep.times.iter().zip(&rep.snapshots).enumerate() {
                let name = format!("{}_{}_M{}-t{j}.csv", rep.report.experiment, rep.report.scheme, cfg.cells);
                write_snapshot_csv(&rep.grid, u, &common.out, &name, common.force)?;
                println!("t = {t:.6e}: radius {:.6} (reference {:.6})", rep.radii[j], rep.reference_radii[j]);
            }
            println!(
                "reflection defect {:.3e} (reference {:.3e})",
                rep.symmetry_defect, rep.reference_symmetry_defect
            );
            write_metadata(&common, &cfg, "run-2d")?;
            Ok(vec![rep.report.status])
        }
        Command::SingleRun(common) => {
            let cfg = common.load()?;
            let (disc, res) = run_single(&cfg)?;
            let steps = cfg.steps_for(cfg.tau)?;
            let name = format!(
                "{}_{}_M{}-N{steps}.csv",
                experiment_name(&cfg),
                scheme_label(&cfg),
                cfg.cells
            );
            let path = write_snapshot_csv(&disc.grid, &res.field, &common.out, &name, common.force)?;
            let rho_max = res.outcome.rho_max();
            println!(
                "{} {} M{}-N{steps}: max|u| {:.6e} rho_max {:.3e} status {} -> {}",
                experiment_name(&cfg),
                scheme_label(&cfg),
                cfg.cells,
                res.max_abs,
                rho_max,
                res.outcome.status,
                path.display()
            );
            write_metadata(&common, &cfg, "single-run")?;
            Ok(vec![res.outcome.status])
        }
    }
}

fn emit(report: &RunReport, common: &Common) -> Result<()> {
    let path = write_report_csv(report, &common.out, common.force)?;
    write_rho_csv(report, &common.out, common.force)?;
    println!("{} -> {}", report.summary(), path.display());
    Ok(())
}

/// Timestamps live only here so that the CSV outputs stay reproducible.
fn write_metadata(common: &Common, cfg: &ProblemConfig, command: &str) -> Result<()> {
    let path: &Path = &common.out;
    fs::create_dir_all(path)?;
    let file = path.join(format!("{}_{command}_meta.txt", experiment_name(cfg)));
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let mut f = fs::File::create(file)?;
    writeln!(f, "command = {command}")?;
    writeln!(f, "version = {}", env!("CARGO_PKG_VERSION"))?;
    writeln!(f, "unix_time = {secs}")?;
    writeln!(f, "config = {cfg}")?;
    Ok(())
}
