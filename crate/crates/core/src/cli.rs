//! Command-line front end behind the `opfp` binary.
//!
//! Exit codes: 0 ok, 1 validation (including bad arguments and malformed
//! files), 2 I/O, 3 plant failure, 4 oracle failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::config::{RunConfig, ScenarioSource};
use crate::controller::{
    convergence_constants, solve_saddle_oracle, ConvergenceConstants, OracleMethod, OracleOptions,
};
use crate::feeder::{build_admittance, validate_feeder, FeederError, FeederFile, FeederModel};
use crate::powerflow::{solve_ac, VoltageProfile};
use crate::sim::{
    generate_scenario, run_closed_loop, summarize, summary_json, track, write_trajectory_csv,
    Network, Plant, Scenario, ScenarioKind, ScenarioSpec, SimConfig, SimError, Strategy,
};
use crate::IoError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_PLANT: i32 = 3;
pub const EXIT_ORACLE: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Plant(String),
    #[error("{0}")]
    Oracle(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Io(_) => EXIT_IO,
            CliError::Plant(_) => EXIT_PLANT,
            CliError::Oracle(_) => EXIT_ORACLE,
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Parse(_) => CliError::Validation(e.to_string()),
            IoError::Read { .. } | IoError::Write { .. } => CliError::Io(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Plant { .. } => CliError::Plant(e.to_string()),
            SimError::Oracle { .. } => CliError::Oracle(e.to_string()),
            SimError::Feeder(_) | SimError::Scenario(_) | SimError::Config(_) => {
                CliError::Validation(e.to_string())
            }
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "opfp",
    version,
    about = "Online optimal power flow pursuit on distribution feeders"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a feeder file and the invertibility of its admittance matrix.
    Validate { feeder: PathBuf },
    /// Solve the AC power flow once, with every DER at its available power.
    Powerflow(PowerflowArgs),
    /// Dump the linear power-flow model as JSON.
    Linearize {
        feeder: PathBuf,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-loop run: writes the trajectory CSV and a summary JSON.
    Run(RunArgs),
    /// Saddle point of the surrogate at one step.
    Oracle(OracleArgs),
    /// Closed-loop run plus the tracking-bound certificate.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Static,
    Ramp,
    CloudTransient,
    VmaxSteps,
}

impl From<KindArg> for ScenarioKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Static => ScenarioKind::Static,
            KindArg::Ramp => ScenarioKind::Ramp,
            KindArg::CloudTransient => ScenarioKind::CloudTransient,
            KindArg::VmaxSteps => ScenarioKind::VmaxSteps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Pursuit,
    Droop,
    None,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Pursuit => Strategy::Pursuit,
            StrategyArg::Droop => Strategy::Droop,
            StrategyArg::None => Strategy::None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlantArg {
    Ac,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Accelerated,
    PrimalDual,
}

/// Where the feeder and the scenario come from. Flags override the config.
#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// Run configuration (TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Feeder file (TOML).
    #[arg(long)]
    pub feeder: Option<PathBuf>,
    /// Scenario CSV file.
    #[arg(long, conflicts_with = "generate")]
    pub scenario: Option<PathBuf>,
    /// Generate a synthetic scenario of this kind.
    #[arg(long, value_enum)]
    pub generate: Option<KindArg>,
    /// Horizon of a generated scenario in seconds.
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Step interval of a generated scenario in seconds.
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub c_p: Option<f64>,
    #[arg(long)]
    pub c_q: Option<f64>,
    /// Actuation lag β in [0, 1).
    #[arg(long)]
    pub lag: Option<f64>,
    #[arg(long, value_enum)]
    pub plant: Option<PlantArg>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, value_enum)]
    pub strategy: Option<StrategyArg>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Oracle every this many steps.
    #[arg(long, conflicts_with = "full_density")]
    pub decimation: Option<usize>,
    /// Oracle at every step.
    #[arg(long)]
    pub full_density: bool,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Scenario step; 0 for a static scenario.
    #[arg(long, default_value_t = 0)]
    pub step: usize,
    #[arg(long, default_value_t = OracleOptions::default().tol)]
    pub tol: f64,
    #[arg(long, default_value_t = OracleOptions::default().max_iter)]
    pub max_iter: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Accelerated)]
    pub method: MethodArg,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PowerflowArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Scenario step for loads and available power; no load without a scenario.
    #[arg(long, default_value_t = 0)]
    pub step: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_VALIDATION
            } else {
                EXIT_OK
            };
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Validate { feeder } => cmd_validate(&feeder),
        Command::Powerflow(a) => cmd_powerflow(&a),
        Command::Linearize { feeder, out } => cmd_linearize(&feeder, out.as_deref()),
        Command::Run(a) => cmd_run(&a),
        Command::Oracle(a) => cmd_oracle(&a),
        Command::Report(a) => cmd_report(&a),
    }
}

fn read_feeder(path: &Path) -> Result<FeederModel, CliError> {
    Ok(FeederFile::read(path)?.into_model())
}

pub fn cmd_validate(path: &Path) -> Result<(), CliError> {
    let feeder = read_feeder(path)?;
    let diags = validate_feeder(&feeder);
    if !diags.is_empty() {
        for d in &diags {
            println!("{d}");
        }
        return Err(CliError::Validation(format!(
            "{} diagnostic(s)",
            diags.len()
        )));
    }
    match build_admittance(&feeder) {
        Ok(adm) => {
            println!(
                "ok: {} buses, {} lines, {} DERs, {} monitored, rcond {:e}",
                feeder.n_nodes,
                feeder.lines.len(),
                feeder.n_ders(),
                feeder.n_monitored(),
                adm.rcond
            );
            Ok(())
        }
        Err(e @ FeederError::Degenerate { .. }) => {
            println!("{e}");
            Err(CliError::Validation(e.to_string()))
        }
        Err(e) => Err(CliError::Validation(e.to_string())),
    }
}

/// Config from `--config` (or defaults), then flag overrides.
fn resolve_config(src: &SourceArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &src.config {
        Some(path) => RunConfig::read(path)?,
        None => {
            let feeder = src.feeder.clone().ok_or_else(|| {
                CliError::Validation("either --config or --feeder is required".into())
            })?;
            let scenario = match (&src.scenario, src.generate) {
                (Some(p), _) => ScenarioSource::File { path: p.clone() },
                (None, Some(k)) => ScenarioSource::Generate {
                    kind: k.into(),
                    spec: ScenarioSpec::default(),
                },
                (None, None) => ScenarioSource::Generate {
                    kind: ScenarioKind::Static,
                    spec: ScenarioSpec::default(),
                },
            };
            RunConfig::new(feeder, scenario)
        }
    };
    if src.config.is_some() {
        if let Some(f) = &src.feeder {
            cfg.feeder = f.clone();
        }
        if let Some(p) = &src.scenario {
            cfg.scenario = ScenarioSource::File { path: p.clone() };
        }
        if let Some(k) = src.generate {
            let spec = match &cfg.scenario {
                ScenarioSource::Generate { spec, .. } => *spec,
                ScenarioSource::File { .. } => ScenarioSpec::default(),
            };
            cfg.scenario = ScenarioSource::Generate {
                kind: k.into(),
                spec,
            };
        }
    }
    if let ScenarioSource::Generate { spec, .. } = &mut cfg.scenario {
        if let Some(h) = src.horizon {
            spec.horizon_s = h;
        }
        if let Some(t) = src.tau {
            spec.tau = t;
        }
    }
    if let Some(s) = src.seed {
        cfg.seed = s;
    }
    if let Some(a) = src.alpha {
        cfg.params.alpha = a;
    }
    if let Some(v) = src.nu {
        cfg.params.nu = v;
    }
    if let Some(v) = src.epsilon {
        cfg.params.epsilon = v;
    }
    if let Some(v) = src.c_p {
        cfg.cost.c_p = v;
    }
    if let Some(v) = src.c_q {
        cfg.cost.c_q = v;
    }
    if let Some(v) = src.lag {
        cfg.actuation_lag = v;
    }
    if let Some(p) = src.plant {
        cfg.plant = match p {
            PlantArg::Ac => Plant::Ac,
            PlantArg::Linear => Plant::Linear,
        };
    }
    cfg.check().map_err(CliError::Validation)?;
    Ok(cfg)
}

fn load_scenario(cfg: &RunConfig, feeder: &FeederModel) -> Result<Scenario, CliError> {
    let scenario = match &cfg.scenario {
        ScenarioSource::File { path } => {
            let file = fs::File::open(path)
                .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
            Scenario::read_csv(
                feeder,
                std::io::BufReader::new(file),
                ScenarioSpec::default().tau,
            )
            .map_err(|e| CliError::Validation(e.to_string()))?
        }
        ScenarioSource::Generate { kind, spec } => generate_scenario(*kind, feeder, cfg.seed, spec),
    };
    scenario
        .check(feeder)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(scenario)
}

struct Loaded {
    cfg: RunConfig,
    net: Network,
    scenario: Scenario,
    sim: SimConfig,
}

fn load(src: &SourceArgs) -> Result<Loaded, CliError> {
    let cfg = resolve_config(src)?;
    let feeder = read_feeder(&cfg.feeder)?;
    let scenario = load_scenario(&cfg, &feeder)?;
    let net = Network::new(feeder)?;
    let sim = cfg.sim_config();
    Ok(Loaded {
        cfg,
        net,
        scenario,
        sim,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)
                .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
        }
    }
    fs::write(path, bytes)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(p) => write_file(p, bytes),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Io(format!("cannot write to stdout: {e}"))),
    }
}

pub fn cmd_powerflow(a: &PowerflowArgs) -> Result<(), CliError> {
    let (net, scenario) = if a.source.config.is_none()
        && a.source.scenario.is_none()
        && a.source.generate.is_none()
    {
        let path = a.source.feeder.as_ref().ok_or_else(|| {
            CliError::Validation("either --config or --feeder is required".into())
        })?;
        (Network::new(read_feeder(path)?)?, None)
    } else {
        let l = load(&a.source)?;
        (l.net, Some(l.scenario))
    };
    let n = net.n_nodes();
    let inj = match &scenario {
        Some(s) => {
            if a.step >= s.n_steps() {
                return Err(CliError::Validation(format!(
                    "step {} outside the scenario (0..{})",
                    a.step,
                    s.n_steps()
                )));
            }
            let u: Vec<_> = s.p_av[a.step]
                .iter()
                .map(|&p| crate::controller::Setpoint::new(p, 0.0))
                .collect();
            net.injections(&u, &s.load_p[a.step], &s.load_q[a.step])
        }
        None => crate::powerflow::PowerInjection::zeros(n),
    };
    let v0 = net.feeder.slack_voltage;
    let sol = solve_ac(
        &net.admittance,
        &inj,
        v0,
        &VoltageProfile::flat(n, v0),
        a.tol,
        a.max_iter,
    )
    .map_err(|e| CliError::Plant(e.to_string()))?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(["bus", "v_re", "v_im", "magnitude", "angle_deg"])
        .map_err(io)?;
    for (i, v) in sol.voltages.v.iter().enumerate() {
        w.write_record([
            (i + 1).to_string(),
            format!("{:?}", v.re),
            format!("{:?}", v.im),
            format!("{:?}", v.norm()),
            format!("{:?}", v.arg().to_degrees()),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    emit(a.out.as_deref(), &bytes)?;
    eprintln!(
        "converged in {} iterations, residual {:e}",
        sol.iterations, sol.residual
    );
    Ok(())
}

#[derive(Serialize)]
struct LinearDump {
    n_nodes: usize,
    der_nodes: Vec<usize>,
    monitored_nodes: Vec<usize>,
    r: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
    a: Vec<f64>,
    vbar_re: Vec<f64>,
    vbar_im: Vec<f64>,
}

fn rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn cmd_linearize(path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let net = Network::new(read_feeder(path)?)?;
    let lm = &net.linear;
    let dump = LinearDump {
        n_nodes: net.n_nodes(),
        der_nodes: net.der_nodes.iter().map(|b| b.0).collect(),
        monitored_nodes: net.feeder.monitored_nodes.iter().map(|b| b.0).collect(),
        r: rows(&lm.r),
        b: rows(&lm.b),
        a: lm.a.iter().copied().collect(),
        vbar_re: lm.vbar.iter().map(|v| v.re).collect(),
        vbar_im: lm.vbar.iter().map(|v| v.im).collect(),
    };
    let mut s = serde_json::to_string_pretty(&dump).expect("dump is always serializable");
    s.push('\n');
    emit(out, s.as_bytes())
}

fn print_constants(c: &ConvergenceConstants) {
    println!(
        "constants: L = {:.6e}, G = {:.6e}, eta = {:.6e}, L_reg = {:.6e}, rho(alpha) = {:.9}, alpha_max = {:.6e}",
        c.l, c.g, c.eta, c.l_reg, c.rho_alpha, c.alpha_max
    );
    if c.contracts() {
        println!("alpha = {} satisfies 0 < alpha < 2 eta / L_reg^2", c.alpha);
    } else {
        println!("alpha = {} violates 0 < alpha < 2 eta / L_reg^2", c.alpha);
        eprintln!(
            "warning: alpha = {} exceeds alpha_max = {:e}; no theoretical contraction guarantee",
            c.alpha, c.alpha_max
        );
    }
}

fn constants_of(l: &Loaded) -> ConvergenceConstants {
    let costs = vec![l.sim.cost; l.net.der_nodes.len()];
    convergence_constants(&costs, &l.net.sens, &l.sim.params)
}

fn apply_run_overrides(l: &mut Loaded, a: &RunArgs) {
    if let Some(s) = a.strategy {
        l.cfg.strategy = s.into();
    }
    if let Some(d) = &a.output_dir {
        l.cfg.output_dir = d.clone();
    }
}

fn write_outputs(
    l: &Loaded,
    traj: &crate::sim::Trajectory,
    tracking: Option<crate::sim::TrackingReport>,
    summary_name: &str,
) -> Result<crate::sim::RunSummary, CliError> {
    let name = traj.strategy.name();
    let mut csv_bytes = Vec::new();
    write_trajectory_csv(traj, &l.net, &mut csv_bytes).map_err(|e| CliError::Io(e.to_string()))?;
    write_file(
        &l.cfg.output_dir.join(format!("trajectory_{name}.csv")),
        &csv_bytes,
    )?;
    let summary = summarize(traj, l.scenario.tau, constants_of(l), tracking);
    write_file(
        &l.cfg.output_dir.join(format!("{summary_name}_{name}.json")),
        summary_json(&summary).as_bytes(),
    )?;
    Ok(summary)
}

fn print_summary(s: &crate::sim::RunSummary) {
    println!(
        "{}: {} steps, seed {}, max |V| {:.6}, max violation {:.3e}, final violation {:.3e}, total cost {:.6e}",
        s.strategy, s.n_steps, s.seed, s.max_voltage, s.max_violation, s.final_max_violation, s.total_cost
    );
    for d in &s.diagnostics {
        println!("note: {d}");
    }
}

pub fn cmd_run(a: &RunArgs) -> Result<(), CliError> {
    let mut l = load(&a.source)?;
    apply_run_overrides(&mut l, a);
    print_constants(&constants_of(&l));
    let traj = run_closed_loop(&l.net, &l.scenario, l.cfg.strategy, &l.sim, l.cfg.seed)?;
    let summary = write_outputs(&l, &traj, None, "summary")?;
    print_summary(&summary);
    Ok(())
}

pub fn cmd_report(a: &ReportArgs) -> Result<(), CliError> {
    let mut l = load(&a.run.source)?;
    apply_run_overrides(&mut l, &a.run);
    let decimation = if a.full_density {
        1
    } else {
        a.decimation.unwrap_or(l.cfg.report_decimation)
    };
    if decimation == 0 {
        return Err(CliError::Validation("decimation must be at least 1".into()));
    }
    print_constants(&constants_of(&l));
    let traj = run_closed_loop(&l.net, &l.scenario, l.cfg.strategy, &l.sim, l.cfg.seed)?;
    let report = track(&l.net, &l.scenario, &l.sim, &traj, decimation)?;
    println!(
        "tracking: e = {:.6e}, sigma_z = {:.6e}, tail error = {:.6e} ({} oracle steps, decimation {})",
        report.e_measured, report.sigma_z_measured, report.tracking_error_tail, report.oracle_steps, report.decimation
    );
    match (report.bound_rhs, report.bound_satisfied) {
        (Some(rhs), Some(ok)) => println!(
            "bound: {rhs:.6e} ({})",
            if ok { "satisfied" } else { "violated" }
        ),
        _ => println!("bound: {}", report.note.as_deref().unwrap_or("unavailable")),
    }
    let summary = write_outputs(&l, &traj, Some(report), "report")?;
    print_summary(&summary);
    Ok(())
}

#[derive(Serialize)]
struct OracleDer {
    node: usize,
    p: f64,
    q: f64,
}

#[derive(Serialize)]
struct OracleDump {
    step: usize,
    residual: f64,
    iterations: usize,
    ders: Vec<OracleDer>,
    monitored_nodes: Vec<usize>,
    gamma: Vec<f64>,
    mu: Vec<f64>,
}

pub fn cmd_oracle(a: &OracleArgs) -> Result<(), CliError> {
    let l = load(&a.source)?;
    if a.step >= l.scenario.n_steps() {
        return Err(CliError::Validation(format!(
            "step {} outside the scenario (0..{})",
            a.step,
            l.scenario.n_steps()
        )));
    }
    let problem = l.net.problem(&l.scenario, a.step, &l.sim);
    let opts = OracleOptions {
        method: match a.method {
            MethodArg::Accelerated => OracleMethod::Accelerated,
            MethodArg::PrimalDual => OracleMethod::PrimalDual,
        },
        tol: a.tol,
        max_iter: a.max_iter,
    };
    let sp = solve_saddle_oracle(&problem, &opts).map_err(|e| CliError::Oracle(e.to_string()))?;
    let dump = OracleDump {
        step: a.step,
        residual: sp.residual,
        iterations: sp.iterations,
        ders: l
            .net
            .der_nodes
            .iter()
            .zip(&sp.state.u)
            .map(|(b, s)| OracleDer {
                node: b.0,
                p: s.p,
                q: s.q,
            })
            .collect(),
        monitored_nodes: l.net.feeder.monitored_nodes.iter().map(|b| b.0).collect(),
        gamma: sp.state.duals.gamma.iter().copied().collect(),
        mu: sp.state.duals.mu.iter().copied().collect(),
    };
    let mut s = serde_json::to_string_pretty(&dump).expect("dump is always serializable");
    s.push('\n');
    emit(a.out.as_deref(), s.as_bytes())?;
    eprintln!(
        "residual {:e} after {} iterations",
        sp.residual, sp.iterations
    );
    Ok(())
}
