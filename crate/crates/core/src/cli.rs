//! Command-line front end: strict TOML configs and the `run`, `convergence`
//! and `compare` commands.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime error. Failures
//! print a single `error[config]: ...` or `error[runtime]: ...` line to stderr.
//! `diagnostics.json` writes `null` for the density and pressure minima of
//! systems without them.

use std::ffi::OsString;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::driver::{
    convergence_study, error_norms, write_convergence_csv, write_snapshot_csv, Boundary, ErrorNorms, RunConfig,
    RunSummary, SchemeKind, SolutionField, Solver, Variant,
};
use crate::error::Error;
use crate::problems::{problem_by_name, Problem};
use crate::reconstruction::ReconstructionMode;

#[derive(Debug, Parser)]
#[command(name = "ader1d", version, about = "1D ADER schemes with adaptive-degree predictors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Worker threads for the per-cell phases.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    /// Output directory, overriding `[run] output`.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Suppress the stdout report.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one simulation and write snapshots plus diagnostics.json.
    Run { config: PathBuf },
    /// Run a mesh-refinement study and write convergence.csv.
    Convergence { config: PathBuf },
    /// Run the classic (tolerance) and adaptive predictors side by side.
    Compare { config: PathBuf },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub problem: ProblemSection,
    #[serde(default)]
    pub scheme: SchemeSection,
    pub run: RunSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    /// One of `rp1..rp4`, `advection_sine`, `burgers_sine`, `euler_contact_sine`.
    pub name: String,
    /// Optional consistency check against the named problem's system.
    pub system: Option<String>,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    /// Advection speed.
    #[serde(default = "default_speed")]
    pub speed: f64,
    pub domain: Option<[f64; 2]>,
    pub bc: Option<BcChoice>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BcChoice {
    Periodic,
    /// Far states taken from the initial condition at the domain ends.
    Dirichlet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum KindChoice {
    #[default]
    Dg,
    Fv,
    Pnpm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum VariantChoice {
    #[default]
    AdaptiveU,
    ClassicFixed,
    ClassicTolerance,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    #[serde(default)]
    pub kind: KindChoice,
    #[serde(default)]
    pub variant: VariantChoice,
    #[serde(rename = "M", default = "default_m")]
    pub m: usize,
    /// Data degree for `pnpm`; ignored otherwise.
    #[serde(rename = "N", default)]
    pub n: usize,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Positivity/finiteness checks on the adaptive predictor.
    #[serde(default)]
    pub criterion: bool,
    #[serde(default)]
    pub reconstruction: ReconstructionMode,
}

impl Default for SchemeSection {
    fn default() -> Self {
        Self {
            kind: KindChoice::Dg,
            variant: VariantChoice::AdaptiveU,
            m: default_m(),
            n: 0,
            cfl: default_cfl(),
            tolerance: default_tolerance(),
            criterion: false,
            reconstruction: ReconstructionMode::Cweno,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub t_final: f64,
    pub n_cells: Option<usize>,
    /// Mesh sizes for `convergence`.
    pub meshes: Option<Vec<usize>>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    /// Write a snapshot every this many steps; 0 disables.
    #[serde(default)]
    pub snapshot_every: usize,
    /// Forces serial execution so outputs are bit-reproducible.
    #[serde(default)]
    pub deterministic: bool,
    /// Component used for error norms.
    #[serde(default)]
    pub component: usize,
}

fn default_gamma() -> f64 {
    1.4
}
fn default_speed() -> f64 {
    1.0
}
fn default_m() -> usize {
    3
}
fn default_cfl() -> f64 {
    0.5
}
fn default_tolerance() -> f64 {
    1e-12
}
fn default_output() -> PathBuf {
    PathBuf::from("output")
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (tag, msg) = match self {
            CliError::Config(m) => ("config", m),
            CliError::Runtime(m) => ("runtime", m),
        };
        write!(f, "error[{tag}]: {}", msg.replace('\n', " "))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(m) => CliError::Config(m),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

/// Parses a config document. Unknown keys are rejected.
pub fn parse_config(text: &str) -> CliResult<ConfigFile> {
    toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| text[..s.start].matches('\n').count() + 1);
        match line {
            Some(l) => CliError::Config(format!("line {l}: {}", e.message().trim())),
            None => CliError::Config(e.message().trim().to_string()),
        }
    })
}

pub fn load_config(path: &Path) -> CliResult<ConfigFile> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

impl ConfigFile {
    pub fn problem(&self) -> CliResult<Problem> {
        let p = &self.problem;
        let mut problem = problem_by_name(&p.name, p.gamma, p.speed)?;
        if let Some(sys) = &p.system {
            if sys != problem.system.name() {
                return Err(CliError::Config(format!(
                    "problem `{}` is a {} problem, not {sys}",
                    p.name,
                    problem.system.name()
                )));
            }
        }
        if let Some([a, b]) = p.domain {
            if !(a < b) {
                return Err(CliError::Config(format!("empty domain [{a}, {b}]")));
            }
            problem.domain = (a, b);
        }
        let bc = match p.bc {
            Some(BcChoice::Periodic) => Some(Boundary::Periodic),
            Some(BcChoice::Dirichlet) => {
                let (a, b) = problem.domain;
                Some(Boundary::Dirichlet { left: (problem.initial)(a), right: (problem.initial)(b) })
            }
            None if p.domain.is_some() => {
                if let Boundary::Dirichlet { .. } = problem.bc {
                    let (a, b) = problem.domain;
                    Some(Boundary::Dirichlet { left: (problem.initial)(a), right: (problem.initial)(b) })
                } else {
                    None
                }
            }
            None => None,
        };
        if let Some(bc) = bc {
            problem.bc = bc;
        }
        if p.bc.is_some() || p.domain.is_some() {
            // The sampled solutions assume the built-in geometry.
            problem.exact = None;
        }
        Ok(problem)
    }

    pub fn run_config(&self, threads: usize) -> CliResult<RunConfig> {
        let s = &self.scheme;
        let scheme = match s.kind {
            KindChoice::Dg => SchemeKind::Dg,
            KindChoice::Fv => SchemeKind::Fv,
            KindChoice::Pnpm => SchemeKind::Pnpm { n: s.n },
        };
        let variant = match s.variant {
            VariantChoice::AdaptiveU => Variant::AdaptiveU,
            VariantChoice::ClassicFixed => Variant::ClassicFixed,
            VariantChoice::ClassicTolerance => Variant::ClassicTolerance(s.tolerance),
        };
        let mut cfg = RunConfig::new(scheme, variant, s.m, self.run.t_final);
        cfg.cfl = s.cfl;
        cfg.limiter = s.criterion;
        cfg.reconstruction = s.reconstruction;
        cfg.threads = if self.run.deterministic { 1 } else { threads.max(1) };
        cfg.validate()?;
        Ok(cfg)
    }

    fn n_cells(&self) -> CliResult<usize> {
        match self.run.n_cells {
            Some(n) if n > 0 => Ok(n),
            Some(_) => Err(CliError::Config("[run] n_cells must be positive".into())),
            None => Err(CliError::Config("[run] n_cells is required".into())),
        }
    }

    fn output_dir(&self, flag: Option<&Path>) -> PathBuf {
        flag.map(Path::to_path_buf).unwrap_or_else(|| self.run.output.clone())
    }
}

fn setup(problem: &Problem, cfg: RunConfig, n: usize) -> crate::Result<(Solver, SolutionField)> {
    let mesh = problem.mesh(n)?;
    let field = problem.initial_field(&mesh, cfg.data_degree())?;
    let solver = Solver::new(problem.system.clone(), mesh, cfg, problem.gamma)?;
    Ok((solver, field))
}

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

fn write_file(path: &Path, f: impl FnOnce(&mut dyn Write) -> crate::Result<()>) -> CliResult<()> {
    let file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w).map_err(|e| io_err(path, e))?;
    w.flush().map_err(|e| io_err(path, e))
}

fn write_snapshot(path: &Path, solver: &Solver, field: &SolutionField) -> CliResult<()> {
    write_file(path, |w| write_snapshot_csv(field, &solver.mesh, solver.sys.as_ref(), w))
}

#[derive(Debug, Serialize)]
struct Diagnostics<'a> {
    problem: &'a str,
    system: &'a str,
    scheme: KindChoice,
    variant: VariantChoice,
    degree: usize,
    data_degree: usize,
    n_cells: usize,
    t_final: f64,
    #[serde(flatten)]
    summary: &'a RunSummary,
}

/// Final-state error norms of `component`, when an exact solution exists.
fn final_errors(problem: &Problem, solver: &Solver, field: &SolutionField, component: usize) -> CliResult<Option<ErrorNorms>> {
    let Some(exact) = problem.exact.clone() else { return Ok(None) };
    if component >= solver.sys.n_vars() {
        return Err(CliError::Config(format!("[run] component {component} out of range")));
    }
    let t = field.time;
    let norms = error_norms(field, &solver.mesh, &|x| exact(x, t), component, solver.config.degree + 2)?;
    Ok(Some(norms))
}

pub fn cmd_run(config: &ConfigFile, threads: usize, output: Option<&Path>, quiet: bool) -> CliResult<RunSummary> {
    let problem = config.problem()?;
    let cfg = config.run_config(threads)?;
    let n = config.n_cells()?;
    let dir = config.output_dir(output);
    let (solver, mut field) = setup(&problem, cfg, n)?;
    create_dir(&dir)?;
    write_snapshot(&dir.join("initial.csv"), &solver, &field)?;

    let every = config.run.snapshot_every;
    let mut io_failure = None;
    let start = std::time::Instant::now();
    solver.run_with(&mut field, |f| {
        if every > 0 && f.step % every == 0 && io_failure.is_none() {
            let path = dir.join(format!("snapshot_{:06}.csv", f.step));
            io_failure = write_snapshot(&path, &solver, f).err();
        }
    })?;
    if let Some(e) = io_failure {
        return Err(e);
    }
    let summary = RunSummary::from_field(&field, solver.sys.as_ref(), start.elapsed().as_secs_f64());
    write_snapshot(&dir.join("final.csv"), &solver, &field)?;
    let diag = Diagnostics {
        problem: &problem.name,
        system: solver.sys.name(),
        scheme: config.scheme.kind,
        variant: config.scheme.variant,
        degree: solver.config.degree,
        data_degree: solver.config.data_degree(),
        n_cells: n,
        t_final: config.run.t_final,
        summary: &summary,
    };
    let json_path = dir.join("diagnostics.json");
    let json = serde_json::to_string_pretty(&diag).map_err(|e| CliError::Runtime(e.to_string()))?;
    fs::write(&json_path, json + "\n").map_err(|e| io_err(&json_path, e))?;
    if !quiet {
        let positivity = if summary.min_density.is_finite() {
            format!(", min rho {:.6e}, min p {:.6e}", summary.min_density, summary.min_pressure)
        } else {
            String::new()
        };
        println!(
            "{}: t = {:.6}, {} steps, {} limited cells{positivity}, {} work units, {:.3} s",
            problem.name, summary.final_time, summary.steps, summary.limited_cells_total, summary.work_units, summary.wall_time_s
        );
        if let Some(e) = final_errors(&problem, &solver, &field, config.run.component)? {
            println!("errors: l1 {:.6e}, l2 {:.6e}, linf {:.6e}", e.l1, e.l2, e.linf);
        }
        println!("wrote {}", dir.display());
    }
    Ok(summary)
}

pub fn cmd_convergence(
    config: &ConfigFile,
    threads: usize,
    output: Option<&Path>,
    quiet: bool,
) -> CliResult<Vec<crate::driver::ConvergenceRow>> {
    let problem = config.problem()?;
    let cfg = config.run_config(threads)?;
    let sizes = config.run.meshes.clone().unwrap_or_default();
    if sizes.len() < 3 {
        return Err(CliError::Config(format!("[run] meshes needs at least 3 sizes, got {}", sizes.len())));
    }
    if problem.riemann.is_some() {
        return Err(CliError::Config(format!(
            "`{}` is a Riemann problem; convergence studies need a smooth exact solution",
            problem.name
        )));
    }
    let Some(exact) = problem.exact.clone() else {
        return Err(CliError::Config(format!("`{}` has no exact solution for this setup", problem.name)));
    };
    if config.run.component >= problem.system.n_vars() {
        return Err(CliError::Config(format!("[run] component {} out of range", config.run.component)));
    }
    let rows = convergence_study(
        &|n| setup(&problem, cfg.clone(), n),
        &sizes,
        &|x, t| exact(x, t),
        config.run.component,
    )?;
    let dir = config.output_dir(output);
    create_dir(&dir)?;
    write_file(&dir.join("convergence.csv"), |w| write_convergence_csv(&rows, w))?;
    if !quiet {
        println!("{:>8} {:>12} {:>12} {:>12} {:>12} {:>7} {:>7} {:>7}", "cells", "h", "L1", "L2", "Linf", "o(L1)", "o(L2)", "o(Linf)");
        for r in &rows {
            let o = |f: fn(&ErrorNorms) -> f64| r.orders.as_ref().map(|o| format!("{:.2}", f(o))).unwrap_or_else(|| "-".into());
            println!(
                "{:>8} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>7} {:>7} {:>7}",
                r.n_cells,
                r.h,
                r.errors.l1,
                r.errors.l2,
                r.errors.linf,
                o(|e| e.l1),
                o(|e| e.l2),
                o(|e| e.linf)
            );
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub variant: &'static str,
    pub errors: Option<ErrorNorms>,
    pub work_units: u64,
    pub wall_time_s: f64,
    pub steps: usize,
}

pub fn cmd_compare(config: &ConfigFile, threads: usize, output: Option<&Path>, quiet: bool) -> CliResult<Vec<CompareRow>> {
    let problem = config.problem()?;
    let base = config.run_config(threads)?;
    let n = config.n_cells()?;
    let mut rows = Vec::new();
    for (label, variant, limiter) in [
        ("classic", Variant::ClassicTolerance(config.scheme.tolerance), false),
        ("adaptive_u", Variant::AdaptiveU, config.scheme.criterion),
    ] {
        let mut cfg = base.clone();
        cfg.variant = variant;
        cfg.limiter = limiter;
        cfg.validate()?;
        let (solver, mut field) = setup(&problem, cfg, n)?;
        let summary = solver.run(&mut field)?;
        rows.push(CompareRow {
            variant: label,
            errors: final_errors(&problem, &solver, &field, config.run.component)?,
            work_units: summary.work_units,
            wall_time_s: summary.wall_time_s,
            steps: summary.steps,
        });
    }
    let dir = config.output_dir(output);
    create_dir(&dir)?;
    let ratio = |f: fn(&CompareRow) -> Option<f64>| match (f(&rows[1]), f(&rows[0])) {
        (Some(a), Some(b)) => format!("{:.16e}", a / b),
        _ => String::new(),
    };
    let cell = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
    write_file(&dir.join("compare.csv"), |w| {
        writeln!(w, "variant,l1,l2,linf,work_units,wall_time_s,steps")?;
        for r in &rows {
            let e = r.errors.as_ref();
            writeln!(
                w,
                "{},{},{},{},{},{:.6e},{}",
                r.variant,
                cell(e.map(|e| e.l1)),
                cell(e.map(|e| e.l2)),
                cell(e.map(|e| e.linf)),
                r.work_units,
                r.wall_time_s,
                r.steps
            )?;
        }
        writeln!(
            w,
            "adaptive_u/classic,{},{},{},{},{},{}",
            ratio(|r| r.errors.map(|e| e.l1)),
            ratio(|r| r.errors.map(|e| e.l2)),
            ratio(|r| r.errors.map(|e| e.linf)),
            ratio(|r| Some(r.work_units as f64)),
            ratio(|r| Some(r.wall_time_s)),
            ratio(|r| Some(r.steps as f64)),
        )?;
        Ok(())
    })?;
    if !quiet {
        for r in &rows {
            let l2 = r.errors.map(|e| format!("{:.4e}", e.l2)).unwrap_or_else(|| "-".into());
            println!("{:>10}: L2 {l2}, {} work units, {:.3} s", r.variant, r.work_units, r.wall_time_s);
        }
        println!(
            "work ratio adaptive_u/classic = {:.3}, wall ratio = {:.3}",
            rows[1].work_units as f64 / rows[0].work_units as f64,
            rows[1].wall_time_s / rows[0].wall_time_s
        );
    }
    Ok(rows)
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let first = e.to_string().lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ").to_string();
            eprintln!("{}", CliError::Config(first));
            return 2;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    let out = cli.output.as_deref();
    match &cli.command {
        Command::Run { config } => cmd_run(&load_config(config)?, cli.threads, out, cli.quiet).map(|_| ()),
        Command::Convergence { config } => {
            cmd_convergence(&load_config(config)?, cli.threads, out, cli.quiet).map(|_| ())
        }
        Command::Compare { config } => cmd_compare(&load_config(config)?, cli.threads, out, cli.quiet).map(|_| ()),
    }
}
