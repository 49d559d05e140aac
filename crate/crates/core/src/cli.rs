//! The `mce` command line: argument parsing, configuration files and the
//! experiment drivers.
//!
//! Settings come from flags, then from the `--config` file (flat `key=value`
//! lines using the long flag names), then from per-experiment defaults.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::assembly::DEFAULT_GAMMA;
use crate::bench::coupling::{Scenario, FULL_GRID_NODES, NORMAL_MU, TANGENTIAL_MU};
use crate::bench::{
    case_brinkman, case_stokes, locking_csv, run_convergence_with_finest, solve_cooks,
    solve_cooks_on, solve_coupling_with, BenchError, ConvergenceRecord, CookElement, LockingRow,
    ManufacturedCase,
};
use crate::io::{read_text, write_text, write_vtk, IoError};
use crate::mesh::{read_mesh, subdivide_with, validate_mesh, BoundarySplit, MacroMesh};
use crate::space::{bubble_table_csv, ConstraintMode};

/// Exit status for invalid configurations and unwritable outputs.
pub const EXIT_CONFIG: i32 = 1;
/// Exit status for solver failures.
pub const EXIT_SOLVER: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "mce",
    version,
    about = "Divergence-conforming macro element experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment and write its tables and fields to the output directory.
    #[command(allow_negative_numbers = true)]
    Run(RunArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    /// Stokes convergence study.
    Stokes,
    /// Darcy (or Brinkman) convergence study.
    Darcy,
    /// Cook's membrane locking study.
    Cooks,
    /// Coupled Stokes-Brinkman flows.
    Brinkman,
    /// Statistics and subdivision data of a mesh.
    MeshInfo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BcMode {
    /// All boundary data built into the space.
    Strong,
    /// Normal data strong, tangential data by Nitsche's method.
    NitscheTangential,
    /// All boundary data by Nitsche's method.
    NitscheSlip,
}

impl BcMode {
    pub fn constraint_mode(self) -> ConstraintMode {
        match self {
            BcMode::Strong => ConstraintMode::FullDirichlet,
            BcMode::NitscheTangential => ConstraintMode::NormalOnly,
            BcMode::NitscheSlip => ConstraintMode::Unconstrained,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScenarioChoice {
    Normal,
    Tangential,
    Both,
}

#[derive(Debug, Default, Args)]
pub struct RunArgs {
    pub experiment: Option<Experiment>,
    /// Mesh levels n (comma separated); an n x n square mesh per level.
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<usize>>,
    /// Poisson ratios for the Cook's membrane study.
    #[arg(long, value_delimiter = ',')]
    pub nu: Option<Vec<f64>>,
    /// Viscosities (Darcy case or porous region of the coupled flows).
    #[arg(long, value_delimiter = ',')]
    pub mu: Option<Vec<f64>>,
    /// Permeability coefficient of the Darcy case.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Nitsche penalty parameter.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, value_enum)]
    pub bc: Option<BcMode>,
    /// Mesh file in the mce-mesh format (cooks and mesh-info).
    #[arg(long)]
    pub mesh_file: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Nodes per side of the grid (brinkman and mesh-info).
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, value_enum)]
    pub scenario: Option<ScenarioChoice>,
    /// Seed of the randomized consistency check of the manufactured data.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Flat `key=value` file with defaults for the flags above.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Bench(#[from] BenchError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Bench(BenchError::Solver(_)) => EXIT_SOLVER,
            _ => EXIT_CONFIG,
        }
    }
}

fn config_error(message: impl Into<String>) -> CliError {
    CliError::Config(message.into())
}

/// Fully resolved and validated settings of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub levels: Vec<usize>,
    pub nu: Vec<f64>,
    pub mu: Vec<f64>,
    pub sigma: f64,
    pub gamma: f64,
    pub bc: BcMode,
    pub mesh_file: Option<PathBuf>,
    pub out: PathBuf,
    pub threads: Option<usize>,
    pub grid: usize,
    pub scenario: ScenarioChoice,
    pub seed: u64,
}

const CONFIG_KEYS: [&str; 13] = [
    "experiment",
    "levels",
    "nu",
    "mu",
    "sigma",
    "gamma",
    "bc",
    "mesh-file",
    "out",
    "threads",
    "grid",
    "scenario",
    "seed",
];

/// Parses a flat `key=value` file; blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| config_error(format!("config line {}: expected key=value", i + 1)))?;
        let key = key.trim().replace('_', "-");
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(config_error(format!(
                "config line {}: unknown key `{key}`",
                i + 1
            )));
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(config_error(format!(
                "config line {}: duplicate key `{key}`",
                i + 1
            )));
        }
    }
    Ok(map)
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| config_error(format!("invalid value `{value}` for `{key}`")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, CliError> {
    value
        .split(',')
        .map(|v| parse_value(key, v.trim()))
        .collect()
}

fn parse_enum<T: ValueEnum>(key: &str, value: &str) -> Result<T, CliError> {
    T::from_str(value, false)
        .map_err(|_| config_error(format!("invalid value `{value}` for `{key}`")))
}

/// Overlays the config file entries under the flags already set in `args`.
fn merge_config(args: &mut RunArgs, map: &BTreeMap<String, String>) -> Result<(), CliError> {
    for (key, value) in map {
        let v = value.as_str();
        match key.as_str() {
            "experiment" => {
                args.experiment.get_or_insert(parse_enum(key, v)?);
            }
            "levels" => {
                args.levels.get_or_insert(parse_list(key, v)?);
            }
            "nu" => {
                args.nu.get_or_insert(parse_list(key, v)?);
            }
            "mu" => {
                args.mu.get_or_insert(parse_list(key, v)?);
            }
            "sigma" => {
                args.sigma.get_or_insert(parse_value(key, v)?);
            }
            "gamma" => {
                args.gamma.get_or_insert(parse_value(key, v)?);
            }
            "bc" => {
                args.bc.get_or_insert(parse_enum(key, v)?);
            }
            "mesh-file" => {
                args.mesh_file.get_or_insert(PathBuf::from(v));
            }
            "out" => {
                args.out.get_or_insert(PathBuf::from(v));
            }
            "threads" => {
                args.threads.get_or_insert(parse_value(key, v)?);
            }
            "grid" => {
                args.grid.get_or_insert(parse_value(key, v)?);
            }
            "scenario" => {
                args.scenario.get_or_insert(parse_enum(key, v)?);
            }
            "seed" => {
                args.seed.get_or_insert(parse_value(key, v)?);
            }
            _ => return Err(config_error(format!("unknown key `{key}`"))),
        }
    }
    Ok(())
}

fn reject(set: bool, flag: &str, experiment: Experiment) -> Result<(), CliError> {
    if set {
        let name = experiment
            .to_possible_value()
            .map(|v| v.get_name().to_string())
            .unwrap_or_default();
        return Err(config_error(format!("--{flag} does not apply to `{name}`")));
    }
    Ok(())
}

impl RunConfig {
    /// Applies the config file, the defaults and the validity checks.
    pub fn resolve(mut args: RunArgs) -> Result<Self, CliError> {
        if let Some(path) = args.config.clone() {
            merge_config(&mut args, &parse_config(&read_text(&path)?)?)?;
        }
        let experiment = args.experiment.ok_or_else(|| {
            config_error("no experiment given (stokes, darcy, cooks, brinkman or mesh-info)")
        })?;
        use Experiment::*;
        reject(args.nu.is_some() && experiment != Cooks, "nu", experiment)?;
        reject(
            args.mu.is_some() && !matches!(experiment, Darcy | Brinkman),
            "mu",
            experiment,
        )?;
        reject(
            args.sigma.is_some() && experiment != Darcy,
            "sigma",
            experiment,
        )?;
        reject(
            args.levels.is_some() && !matches!(experiment, Stokes | Darcy | Cooks),
            "levels",
            experiment,
        )?;
        reject(
            args.grid.is_some() && !matches!(experiment, Brinkman | MeshInfo),
            "grid",
            experiment,
        )?;
        reject(
            args.scenario.is_some() && experiment != Brinkman,
            "scenario",
            experiment,
        )?;
        reject(
            args.mesh_file.is_some() && !matches!(experiment, Cooks | MeshInfo),
            "mesh-file",
            experiment,
        )?;
        reject(
            args.bc.is_some() && matches!(experiment, Cooks | MeshInfo),
            "bc",
            experiment,
        )?;
        let cfg = RunConfig {
            experiment,
            levels: args.levels.unwrap_or_else(|| match experiment {
                Cooks => vec![16],
                _ => vec![4, 8, 16, 32],
            }),
            nu: args.nu.unwrap_or_else(|| vec![0.3, 0.4999, 0.49999]),
            mu: args.mu.unwrap_or_else(|| match experiment {
                Darcy => vec![0.0],
                _ => Vec::new(),
            }),
            sigma: args.sigma.unwrap_or(1.0),
            gamma: args.gamma.unwrap_or(DEFAULT_GAMMA),
            bc: args.bc.unwrap_or(match experiment {
                Darcy => BcMode::NitscheTangential,
                _ => BcMode::Strong,
            }),
            mesh_file: args.mesh_file,
            out: args.out.unwrap_or_else(|| PathBuf::from("out")),
            threads: args.threads,
            grid: args.grid.unwrap_or(match experiment {
                MeshInfo => 5,
                _ => FULL_GRID_NODES,
            }),
            scenario: args.scenario.unwrap_or(ScenarioChoice::Both),
            seed: args.seed.unwrap_or(0),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if matches!(self.experiment, Experiment::Stokes | Experiment::Darcy) {
            if self.levels.len() < 3 {
                return Err(config_error(format!(
                    "a convergence study needs at least 3 levels, got {}",
                    self.levels.len()
                )));
            }
            if self.levels.windows(2).any(|w| w[1] <= w[0]) {
                return Err(config_error("levels must be strictly increasing"));
            }
        }
        if self.levels.contains(&0) {
            return Err(config_error("levels must be positive"));
        }
        if let Some(nu) = self.nu.iter().find(|&&nu| !(nu > 0.0 && nu < 0.5)) {
            return Err(config_error(format!(
                "Poisson ratio must lie in (0, 0.5), got {nu}"
            )));
        }
        match self.experiment {
            Experiment::Darcy => {
                if let Some(mu) = self.mu.iter().find(|&&mu| !(mu >= 0.0 && mu.is_finite())) {
                    return Err(config_error(format!(
                        "viscosity must be non-negative, got {mu}"
                    )));
                }
                if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
                    return Err(config_error(format!(
                        "sigma must be non-negative, got {}",
                        self.sigma
                    )));
                }
                if self.mu.is_empty() {
                    return Err(config_error("--mu needs at least one value"));
                }
                if self.sigma == 0.0 && self.mu.contains(&0.0) {
                    return Err(config_error("mu and sigma cannot both vanish"));
                }
            }
            Experiment::Brinkman => {
                if let Some(mu) = self.mu.iter().find(|&&mu| !(mu > 0.0 && mu.is_finite())) {
                    return Err(config_error(format!(
                        "viscosity must be positive, got {mu}"
                    )));
                }
                if self.grid < 2 {
                    return Err(config_error("--grid needs at least 2 nodes per side"));
                }
            }
            Experiment::MeshInfo if self.grid < 2 => {
                return Err(config_error("--grid needs at least 2 nodes per side"));
            }
            _ => {}
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(config_error(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        if self.threads == Some(0) {
            return Err(config_error("--threads must be at least 1"));
        }
        Ok(())
    }
}

/// Parses `argv`, runs the command and returns the process exit status.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    let Command::Run(args) = cli.command;
    let result = RunConfig::resolve(args).and_then(|cfg| execute(&cfg));
    match result {
        Ok(summary) => {
            print!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, CliError::Config(_)) {
                eprintln!("\nUsage: mce run <EXPERIMENT> [OPTIONS]\nRun `mce run --help` for the options.");
            }
            e.exit_code()
        }
    }
}

/// Runs the configured experiment and returns a human-readable summary.
pub fn execute(cfg: &RunConfig) -> Result<String, CliError> {
    match cfg.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| config_error(format!("cannot start {threads} threads: {e}")))?
            .install(|| dispatch(cfg)),
        None => dispatch(cfg),
    }
}

fn dispatch(cfg: &RunConfig) -> Result<String, CliError> {
    match cfg.experiment {
        Experiment::Stokes => {
            let case = case_stokes()
                .with_mode(cfg.bc.constraint_mode())
                .with_gamma(cfg.gamma);
            convergence(cfg, &case, "stokes_convergence.csv", "stokes.vtk")
        }
        Experiment::Darcy => {
            let mut out = String::new();
            for &mu in &cfg.mu {
                let case = case_brinkman(mu, cfg.sigma)
                    .with_mode(cfg.bc.constraint_mode())
                    .with_gamma(cfg.gamma);
                let suffix = if cfg.mu.len() == 1 {
                    String::new()
                } else {
                    format!("_mu{mu:e}")
                };
                out += &convergence(
                    cfg,
                    &case,
                    &format!("darcy_convergence{suffix}.csv"),
                    &format!("darcy{suffix}.vtk"),
                )?;
            }
            Ok(out)
        }
        Experiment::Cooks => cooks(cfg),
        Experiment::Brinkman => brinkman(cfg),
        Experiment::MeshInfo => mesh_info(cfg),
    }
}

fn convergence(
    cfg: &RunConfig,
    case: &ManufacturedCase,
    table: &str,
    field: &str,
) -> Result<String, CliError> {
    let consistency = case.consistency_residual(100, cfg.seed);
    let (record, finest) = run_convergence_with_finest(case, &cfg.levels)?;
    write_text(&cfg.out.join(table), &record.to_csv())?;
    let title = format!("{} n={}", case.name, cfg.levels[cfg.levels.len() - 1]);
    write_vtk(
        &finest.space,
        &finest.solution,
        &cfg.out.join(field),
        &title,
    )?;
    Ok(convergence_summary(
        &record,
        consistency,
        &cfg.out.join(table),
    ))
}

fn convergence_summary(record: &ConvergenceRecord, consistency: f64, table: &Path) -> String {
    let s = &record.slopes;
    let opt = |v: Option<f64>| v.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into());
    let mut out = format!(
        "{}: data consistency residual {consistency:.1e}\n",
        record.case
    );
    for r in &record.rows {
        writeln!(
            out,
            "  n={:<4} h={:.4e}  L2(u)={:.4e}  H1(u)={:.4e}  L2(p)={}  div defect={:.1e}",
            r.n,
            r.h,
            r.errors.l2_velocity,
            r.errors.h1_velocity,
            r.errors
                .l2_pressure
                .map(|v| format!("{v:.4e}"))
                .unwrap_or_else(|| "-".into()),
            r.divergence_defect
        )
        .unwrap();
    }
    writeln!(
        out,
        "  fitted slopes: L2(u) {:.3}  H1(u) {:.3}  L2(p) {}  P0(p) {}  energy {:.3}",
        s.l2_velocity,
        s.h1_velocity,
        opt(s.l2_pressure),
        opt(s.projected_pressure),
        s.energy
    )
    .unwrap();
    writeln!(out, "  wrote {}", table.display()).unwrap();
    out
}

fn cooks(cfg: &RunConfig) -> Result<String, CliError> {
    let mesh = cfg.mesh_file.as_deref().map(load_mesh).transpose()?;
    let mut rows = Vec::new();
    for &nu in &cfg.nu {
        match &mesh {
            Some(mesh) => rows.push(LockingRow {
                nu,
                n: 0,
                compatible_tip: solve_cooks_on(mesh, nu, CookElement::Compatible)?.tip,
                affine_tip: solve_cooks_on(mesh, nu, CookElement::PlainAffine)?.tip,
            }),
            None => rows.extend(crate::bench::run_locking_study(&[nu], &cfg.levels)?),
        }
    }
    let table = cfg.out.join("cooks_tips.csv");
    write_text(&table, &locking_csv(&rows))?;
    let nu = cfg.nu[cfg.nu.len() - 1];
    let last = match &mesh {
        Some(mesh) => solve_cooks_on(mesh, nu, CookElement::Compatible)?,
        None => solve_cooks(
            nu,
            cfg.levels[cfg.levels.len() - 1],
            CookElement::Compatible,
        )?,
    };
    write_vtk(
        &last.space,
        &last.solution,
        &cfg.out.join("cooks.vtk"),
        &format!("cooks nu={nu}"),
    )?;
    let mut out = String::from("cooks: vertical tip displacement at (48, 60)\n");
    for r in &rows {
        writeln!(
            out,
            "  nu={:<8} n={:<4} compatible={:.6}  affine={:.6}",
            r.nu, r.n, r.compatible_tip, r.affine_tip
        )
        .unwrap();
    }
    writeln!(out, "  wrote {}", table.display()).unwrap();
    Ok(out)
}

fn brinkman(cfg: &RunConfig) -> Result<String, CliError> {
    let scenarios: &[Scenario] = match cfg.scenario {
        ScenarioChoice::Normal => &[Scenario::Normal],
        ScenarioChoice::Tangential => &[Scenario::Tangential],
        ScenarioChoice::Both => &[Scenario::Normal, Scenario::Tangential],
    };
    let mut summary =
        String::from("scenario,mu,divergence_defect,net_outflow,total_flux,oscillations\n");
    let mut out = String::new();
    for &scenario in scenarios {
        let mus: Vec<f64> = if cfg.mu.is_empty() {
            match scenario {
                Scenario::Normal => NORMAL_MU.to_vec(),
                Scenario::Tangential => TANGENTIAL_MU.to_vec(),
            }
        } else {
            cfg.mu.clone()
        };
        for mu in mus {
            let r =
                solve_coupling_with(scenario, mu, cfg.grid, cfg.bc.constraint_mode(), cfg.gamma)?;
            let name = format!("brinkman_{}_mu{mu:e}", scenario.name());
            write_vtk(
                &r.space,
                &r.solution,
                &cfg.out.join(format!("{name}.vtk")),
                &name,
            )?;
            write_text(
                &cfg.out.join(format!("{name}_profile.csv")),
                &r.profile_csv(),
            )?;
            let osc = r.interface_oscillations();
            writeln!(
                summary,
                "{},{mu:e},{:e},{:e},{:e},{osc}",
                scenario.name(),
                r.divergence_defect,
                r.net_outflow,
                r.total_flux
            )
            .unwrap();
            writeln!(
                out,
                "brinkman {:<10} mu={mu:<8e} div defect={:.1e}  net outflow={:.1e}  oscillations near x=1: {osc}",
                scenario.name(),
                r.divergence_defect,
                r.net_outflow
            )
            .unwrap();
        }
    }
    let table = cfg.out.join("brinkman_summary.csv");
    write_text(&table, &summary)?;
    writeln!(out, "  wrote {}", table.display()).unwrap();
    Ok(out)
}

fn load_mesh(path: &Path) -> Result<MacroMesh, CliError> {
    let text = read_text(path)?;
    read_mesh(text.as_bytes()).map_err(|e| config_error(format!("{}: {e}", path.display())))
}

fn mesh_info(cfg: &RunConfig) -> Result<String, CliError> {
    let mesh = match &cfg.mesh_file {
        Some(path) => load_mesh(path)?,
        None => MacroMesh::unit_square(cfg.grid - 1).map_err(BenchError::from)?,
    };
    let mut out = String::new();
    writeln!(out, "vertices   {}", mesh.num_vertices()).unwrap();
    writeln!(out, "triangles  {}", mesh.num_triangles()).unwrap();
    writeln!(out, "edges      {}", mesh.num_edges()).unwrap();
    writeln!(out, "boundary   {}", mesh.boundary_edges().count()).unwrap();
    writeln!(out, "area       {:e}", mesh.area()).unwrap();
    writeln!(out, "h          {:e}", mesh.mesh_size()).unwrap();
    writeln!(out, "min edge   {:e}", mesh.min_edge_length()).unwrap();
    writeln!(
        out,
        "1/sqrt(NNO) {:e}",
        1.0 / (mesh.num_vertices() as f64).sqrt()
    )
    .unwrap();
    for tag in mesh.tag_names() {
        let count = mesh
            .boundary_edges()
            .filter(|&e| mesh.edge_tag(e) == Some(tag.as_str()))
            .count();
        writeln!(out, "tag {tag}: {count} edges").unwrap();
    }
    for issue in validate_mesh(&mesh) {
        writeln!(out, "issue: {issue}").unwrap();
    }
    let subdiv =
        subdivide_with(&mesh, BoundarySplit::PerpendicularOrMidpoint).map_err(BenchError::from)?;
    let bubbles = bubble_table_csv(&subdiv).map_err(BenchError::from)?;
    write_text(&cfg.out.join("mesh_info.txt"), &out)?;
    write_text(&cfg.out.join("bubbles.csv"), &bubbles)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(argv: &[&str]) -> RunArgs {
        let mut full = vec!["mce", "run"];
        full.extend_from_slice(argv);
        match Cli::try_parse_from(full).unwrap().command {
            Command::Run(a) => a,
        }
    }

    #[test]
    fn defaults_per_experiment() {
        let c = RunConfig::resolve(args(&["stokes"])).unwrap();
        assert_eq!(c.levels, vec![4, 8, 16, 32]);
        assert_eq!(c.bc, BcMode::Strong);
        let d = RunConfig::resolve(args(&["darcy"])).unwrap();
        assert_eq!(d.mu, vec![0.0]);
        assert_eq!(d.bc, BcMode::NitscheTangential);
        let k = RunConfig::resolve(args(&["cooks"])).unwrap();
        assert_eq!(k.levels, vec![16]);
        assert_eq!(k.nu, vec![0.3, 0.4999, 0.49999]);
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "# study\nlevels = 2,4,8\ngamma=20\n").unwrap();
        let c = RunConfig::resolve(args(&[
            "stokes",
            "--gamma",
            "5",
            "--config",
            path.to_str().unwrap(),
        ]))
        .unwrap();
        assert_eq!(c.levels, vec![2, 4, 8]);
        assert_eq!(c.gamma, 5.0);
    }

    #[test]
    fn unknown_config_key_is_rejected() {
        assert!(matches!(
            parse_config("levels=1,2,3\ncolour=red\n"),
            Err(CliError::Config(_))
        ));
        assert!(matches!(parse_config("levels\n"), Err(CliError::Config(_))));
        assert!(matches!(
            parse_config("gamma=1\ngamma=2\n"),
            Err(CliError::Config(_))
        ));
        assert_eq!(
            parse_config("mesh_file = a.mesh").unwrap()["mesh-file"],
            "a.mesh"
        );
    }

    #[test]
    fn invalid_settings_are_config_errors() {
        for argv in [
            &["stokes", "--levels", "4,8"][..],
            &["stokes", "--levels", "8,4,16"],
            &["cooks", "--nu", "0.5"],
            &["stokes", "--nu", "0.3"],
            &["darcy", "--mu", "0", "--sigma", "0"],
            &["brinkman", "--mu", "0"],
            &["stokes", "--gamma", "-1"],
            &["stokes", "--threads", "0"],
            &["cooks", "--bc", "nitsche-slip"],
        ] {
            let e = RunConfig::resolve(args(argv)).unwrap_err();
            assert_eq!(e.exit_code(), EXIT_CONFIG, "{argv:?}");
        }
    }

    #[test]
    fn parse_failures_exit_with_one() {
        assert_eq!(
            main_with_args(["mce", "run", "stokes", "--bogus"]),
            EXIT_CONFIG
        );
        assert_eq!(
            main_with_args(["mce", "run", "stokes", "--bc", "weak"]),
            EXIT_CONFIG
        );
        assert_eq!(main_with_args(["mce", "--help"]), 0);
    }

    #[test]
    fn solver_errors_exit_with_two() {
        let e = CliError::Bench(BenchError::Solver(crate::solver::SolverError::Singular {
            block: "full",
        }));
        assert_eq!(e.exit_code(), EXIT_SOLVER);
    }
}
