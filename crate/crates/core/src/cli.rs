//! Command-line front end: experiment configuration, subcommands and file output.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimates::{run_suite, CheckConfig, Suite};
use crate::flow::{dyadic_step_params, run, FlowOptions, FlowTrace};
use crate::forcing::{mollify, w12_distance, ForcingField, GridField, GridLattice, MollifierParams, SobolevBudget};
use crate::geom::{vec2, Vec2};
use crate::network::{circle, grim_reaper, line, remesh, square, steiner_triod, CurveNetwork};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Where the initial network comes from: a generator expression such as
/// `circle(1,256)` or a network JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NetworkSource {
    File { file: PathBuf },
    Generator(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ForcingSource {
    File {
        file: PathBuf,
    },
    /// Node values in CSV on the given lattice.
    GridCsv {
        grid_csv: PathBuf,
        lattice: GridLattice,
    },
    Inline(ForcingField),
}

impl Default for ForcingSource {
    fn default() -> Self {
        ForcingSource::Inline(ForcingField::Zero)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputPaths {
    pub trace: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub plotdata: Option<PathBuf>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub network: Option<NetworkSource>,
    #[serde(default)]
    pub forcing: ForcingSource,
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub flow: FlowOptions,
    #[serde(default = "default_suite")]
    pub suite: Suite,
    #[serde(default)]
    pub checks: CheckConfig,
    #[serde(default)]
    pub outputs: OutputPaths,
    /// Runs are always deterministic; `false` is rejected.
    #[serde(default = "yes")]
    pub deterministic: bool,
}

fn default_suite() -> Suite {
    Suite::All
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            network: None,
            forcing: ForcingSource::default(),
            t_end: None,
            flow: FlowOptions::default(),
            suite: Suite::All,
            checks: CheckConfig::default(),
            outputs: OutputPaths::default(),
            deterministic: true,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = read(path)?;
        let cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        if !cfg.deterministic {
            return Err(Error::InvalidArgument("nondeterministic runs are not supported".into()));
        }
        cfg.flow.validate()?;
        Ok(cfg)
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        let mode = std::fs::metadata(path).map_or(0o644, |m| m.permissions().mode());
        tmp.as_file().set_permissions(std::fs::Permissions::from_mode(mode))?;
    }
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn positive(name: &str, args: &[f64]) -> Result<()> {
    if args.iter().all(|a| *a > 0.0 && a.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} parameters must be positive")))
    }
}

fn count(x: f64) -> Result<usize> {
    if x >= 1.0 && x.fract() == 0.0 {
        Ok(x as usize)
    } else {
        Err(Error::InvalidArgument(format!("{x} is not a positive vertex count")))
    }
}

/// Parses `circle(R,n[,cx,cy])`, `triod(L[,n])`, `square(a[,n])`,
/// `line(L[,n])` or `grim_reaper(delta,spacing)`.
pub fn parse_generator(spec: &str) -> Result<CurveNetwork> {
    let bad = || Error::Parse(format!("cannot parse generator '{spec}'"));
    let spec = spec.trim();
    let open = spec.find('(').ok_or_else(bad)?;
    let inner = spec[open + 1..].strip_suffix(')').ok_or_else(bad)?;
    let args: Vec<f64> = inner
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let name = spec[..open].trim();
    match (name, args.as_slice()) {
        ("circle", &[r, n]) => {
            positive(name, &[r, n])?;
            Ok(circle(r, count(n)?, Vec2::zeros()))
        }
        ("circle", &[r, n, cx, cy]) => {
            positive(name, &[r, n])?;
            Ok(circle(r, count(n)?, vec2(cx, cy)))
        }
        ("triod", &[l]) => {
            positive(name, &[l])?;
            Ok(steiner_triod(l, 16))
        }
        ("triod", &[l, n]) => {
            positive(name, &[l, n])?;
            Ok(steiner_triod(l, count(n)?))
        }
        ("square", &[a]) => {
            positive(name, &[a])?;
            remesh(&square(a, Vec2::zeros()), a / 16.0)
        }
        ("square", &[a, n]) => {
            positive(name, &[a, n])?;
            remesh(&square(a, Vec2::zeros()), a / count(n)? as f64)
        }
        ("line", &[l]) => {
            positive(name, &[l])?;
            Ok(line(l, 16))
        }
        ("line", &[l, n]) => {
            positive(name, &[l, n])?;
            Ok(line(l, count(n)?))
        }
        ("grim_reaper", &[d, s]) => grim_reaper(d, s),
        _ => Err(bad()),
    }
}

pub fn load_network(src: &NetworkSource) -> Result<CurveNetwork> {
    match src {
        NetworkSource::File { file } => CurveNetwork::from_json(&read(file)?),
        NetworkSource::Generator(g) => parse_generator(g),
    }
}

pub fn load_forcing(src: &ForcingSource) -> Result<ForcingField> {
    let u = match src {
        ForcingSource::File { file } => ForcingField::from_json(&read(file)?)?,
        ForcingSource::GridCsv { grid_csv, lattice } => {
            ForcingField::Grid(GridField::from_csv(&read(grid_csv)?, *lattice)?)
        }
        ForcingSource::Inline(u) => u.clone(),
    };
    u.check()?;
    Ok(u)
}

#[derive(Debug, Parser)]
#[command(name = "curveflow", version, about = "Front tracking for planar multiphase curve networks")]
pub struct Cli {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output path of the subcommand.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, short, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the flow and write a JSONL trace plus a summary.
    Simulate(SimulateArgs),
    /// Run a check suite on a trace and write a JSON report.
    Verify(VerifyArgs),
    /// Sample the mollified field on a grid and print its distance to the original.
    Mollify(MollifyArgs),
    /// Write CSV time series of a trace.
    Plotdata(PlotArgs),
    /// Print the dyadic step parameters.
    Params(ParamsArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Generator such as `circle(1,256)`; overrides the config.
    #[arg(long)]
    pub network: Option<String>,
    /// Network JSON file; overrides the config.
    #[arg(long, conflicts_with = "network")]
    pub network_file: Option<PathBuf>,
    /// Forcing field JSON file; overrides the config.
    #[arg(long)]
    pub forcing: Option<PathBuf>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub record_every: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub trace: PathBuf,
    /// Budget JSON; the trace's own budget when absent.
    #[arg(long)]
    pub budget: Option<PathBuf>,
    #[arg(long)]
    pub suite: Option<Suite>,
    #[arg(long)]
    pub c_mz: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
}

#[derive(Debug, Args)]
pub struct MollifyArgs {
    /// Forcing field JSON file; the config's forcing when absent.
    #[arg(long)]
    pub field: Option<PathBuf>,
    #[arg(long)]
    pub m: u32,
    /// Time horizon of the grid and of the distance.
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
    /// Grid nodes per axis.
    #[arg(long, default_value_t = 33)]
    pub grid_n: usize,
    #[arg(long, default_value_t = 5)]
    pub grid_nt: usize,
    /// Panels per axis of the distance quadrature.
    #[arg(long, default_value_t = 12)]
    pub resolution: usize,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub trace: PathBuf,
}

#[derive(Debug, Args)]
pub struct ParamsArgs {
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 1)]
    pub n: u32,
}

/// Outcome of a subcommand: exit code plus text for standard output.
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
}

fn config(cli: &Cli) -> Result<ExperimentConfig> {
    cli.config.as_deref().map_or_else(|| Ok(ExperimentConfig::default()), ExperimentConfig::load)
}

/// Runs a parsed command line.
pub fn execute(cli: &Cli) -> Result<Outcome> {
    let cfg = config(cli)?;
    match &cli.command {
        Command::Simulate(a) => simulate(cli, &cfg, a),
        Command::Verify(a) => verify(cli, &cfg, a),
        Command::Mollify(a) => cmd_mollify(cli, &cfg, a),
        Command::Plotdata(a) => plotdata(cli, &cfg, a),
        Command::Params(a) => params(cli, a),
    }
}

fn summary_json(trace: &FlowTrace) -> serde_json::Value {
    let first = &trace.snapshots[0];
    let last = trace.snapshots.last().expect("trace has a snapshot");
    serde_json::json!({
        "t_end": trace.t_end,
        "t_final": last.t,
        "steps": trace.steps.len(),
        "snapshots": trace.snapshots.len(),
        "mass_initial": first.ledger.mass,
        "mass_final": last.ledger.mass,
        "h_final": last.ledger.h,
        "u_final": last.ledger.u,
        "psi1_final": last.ledger.psi1(),
        "psi2_final": last.ledger.psi2(),
        "u_constant": trace.u_constant,
        "budget": trace.budget,
        "failure": trace.failure,
        "series": trace.summary(),
    })
}

fn simulate(cli: &Cli, cfg: &ExperimentConfig, a: &SimulateArgs) -> Result<Outcome> {
    let source = match (&a.network, &a.network_file) {
        (Some(g), _) => NetworkSource::Generator(g.clone()),
        (None, Some(f)) => NetworkSource::File { file: f.clone() },
        (None, None) => cfg.network.clone().ok_or_else(|| {
            Error::InvalidArgument("no initial network: pass --network or set it in the config".into())
        })?,
    };
    let net = load_network(&source)?;
    let forcing = match &a.forcing {
        Some(f) => ForcingSource::File { file: f.clone() },
        None => cfg.forcing.clone(),
    };
    let u = load_forcing(&forcing)?;
    let t_end = a
        .t_end
        .or(cfg.t_end)
        .ok_or_else(|| Error::InvalidArgument("no horizon: pass --t-end or set t_end in the config".into()))?;
    let mut opts = cfg.flow.clone();
    if let Some(k) = a.record_every {
        opts.record_every = k;
    }
    let trace = run(&net, &u, t_end, &opts)?;
    let path = cli.out.clone().or_else(|| cfg.outputs.trace.clone()).unwrap_or_else(|| "trace.jsonl".into());
    let summary_path = cfg.outputs.summary.clone().unwrap_or_else(|| path.with_extension("summary.json"));
    write_atomic(&path, trace.to_jsonl()?.as_bytes())?;
    write_atomic(&summary_path, serde_json::to_string_pretty(&summary_json(&trace))?.as_bytes())?;
    let (first, last) = (&trace.snapshots[0].ledger, &trace.snapshots.last().expect("snapshot").ledger);
    let mut out = String::new();
    writeln!(out, "trace: {}", path.display()).ok();
    writeln!(out, "steps: {}, t = {}", trace.steps.len(), trace.snapshots.last().expect("snapshot").t).ok();
    writeln!(out, "Phi: {} -> {}", first.mass, last.mass).ok();
    writeln!(out, "H: {} -> {}", first.h, last.h).ok();
    writeln!(out, "U: {} -> {}", first.u, last.u).ok();
    let code = if let Some(f) = &trace.failure {
        writeln!(out, "run stopped early: {f}").ok();
        EXIT_CHECK_FAILED
    } else {
        EXIT_PASS
    };
    Ok(Outcome { code, stdout: out })
}

fn verify(cli: &Cli, cfg: &ExperimentConfig, a: &VerifyArgs) -> Result<Outcome> {
    let trace = FlowTrace::from_jsonl(&read(&a.trace)?)?;
    let budget: SobolevBudget = match &a.budget {
        Some(p) => serde_json::from_str(&read(p)?).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?,
        None => trace.budget.clone(),
    };
    let mut checks = cfg.checks.clone();
    if let Some(c) = a.c_mz {
        checks.c_mz = c;
    }
    if let Some(k) = a.kappa {
        checks.kappa = k;
    }
    if !(checks.c_mz > 0.0 && checks.kappa >= 0.0) {
        return Err(Error::InvalidArgument("c_mz must be positive and kappa nonnegative".into()));
    }
    let suite = a.suite.unwrap_or(cfg.suite);
    let reports = run_suite(&trace, &budget, suite, &checks)?;
    let json = serde_json::to_string_pretty(&reports)?;
    let mut out = String::new();
    match cli.out.clone().or_else(|| cfg.outputs.report.clone()) {
        Some(p) => write_atomic(&p, json.as_bytes())?,
        None => writeln!(out, "{json}").expect("string write"),
    }
    let failed: Vec<_> = reports.iter().filter(|r| !r.pass).collect();
    for r in &failed {
        writeln!(out, "FAIL {} (lhs {:e}, rhs {:e}, margin {:e})", r.name, r.lhs, r.rhs, r.margin).ok();
    }
    writeln!(out, "{} checks, {} failed", reports.len(), failed.len()).ok();
    Ok(Outcome { code: if failed.is_empty() { EXIT_PASS } else { EXIT_CHECK_FAILED }, stdout: out })
}

fn cmd_mollify(cli: &Cli, cfg: &ExperimentConfig, a: &MollifyArgs) -> Result<Outcome> {
    let u = match &a.field {
        Some(f) => load_forcing(&ForcingSource::File { file: f.clone() })?,
        None => load_forcing(&cfg.forcing)?,
    };
    if !(a.t_end > 0.0) || a.grid_n < 2 || a.grid_nt == 0 || a.resolution == 0 {
        return Err(Error::InvalidArgument("t_end, grid sizes and resolution must be positive".into()));
    }
    let um = mollify(&u, &MollifierParams { m: a.m })?;
    let half = um.support_radius().max(u.support_radius());
    let half = if half > 0.0 { half } else { 1.0 };
    let lattice = GridLattice::square(half, a.grid_n, a.grid_nt, a.t_end);
    let grid = ForcingField::Grid(GridField::sample_from(&um, lattice)?);
    let dist = w12_distance(&u, &um, a.t_end, a.resolution)?;
    let path = cli.out.clone().unwrap_or_else(|| "mollified.json".into());
    write_atomic(&path, grid.to_json().as_bytes())?;
    let mut out = String::new();
    writeln!(out, "grid: {}", path.display()).ok();
    writeln!(out, "w12_distance: {dist:e}").ok();
    Ok(Outcome { code: EXIT_PASS, stdout: out })
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".into(), |v| format!("{v:e}"))
}

/// CSV with columns `t, mass, density_ratio, H, U, area_1 .. area_N`.
pub fn plot_csv(trace: Option<&FlowTrace>) -> String {
    let phases = trace.map_or(0, |t| t.snapshots[0].network.phase_count());
    let mut s = String::from("t,mass,density_ratio,H,U");
    for p in 1..=phases {
        write!(s, ",area_{p}").ok();
    }
    s.push('\n');
    for snap in trace.iter().flat_map(|t| &t.snapshots) {
        let l = &snap.ledger;
        write!(
            s,
            "{:e},{:e},{},{:e},{:e}",
            snap.t,
            l.mass,
            fmt_opt(l.density_ratio.as_ref().map(|d| d.value)),
            l.h,
            l.u
        )
        .ok();
        for p in 0..phases {
            write!(s, ",{}", fmt_opt(l.phase_areas.get(p).copied().flatten())).ok();
        }
        s.push('\n');
    }
    s
}

fn plotdata(cli: &Cli, cfg: &ExperimentConfig, a: &PlotArgs) -> Result<Outcome> {
    let text = read(&a.trace)?;
    let trace = if text.trim().is_empty() { None } else { Some(FlowTrace::from_jsonl(&text)?) };
    let csv = plot_csv(trace.as_ref());
    let mut out = String::new();
    match cli.out.clone().or_else(|| cfg.outputs.plotdata.clone()) {
        Some(p) => {
            write_atomic(&p, csv.as_bytes())?;
            writeln!(out, "plot data: {}", p.display()).ok();
        }
        None => out.push_str(&csv),
    }
    Ok(Outcome { code: EXIT_PASS, stdout: out })
}

fn params(cli: &Cli, a: &ParamsArgs) -> Result<Outcome> {
    let (c2, p, dt) = dyadic_step_params(a.eps, a.n)?;
    let json = serde_json::json!({ "eps": a.eps, "n": a.n, "c2": c2, "p": p, "dt": dt });
    let text = serde_json::to_string_pretty(&json)?;
    if let Some(path) = &cli.out {
        write_atomic(path, text.as_bytes())?;
    }
    Ok(Outcome { code: EXIT_PASS, stdout: format!("{text}\n") })
}

/// Parses `args`, runs the command and returns the exit code. Output goes
/// to stdout unless `--quiet`; errors go to stderr.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            e.print().ok();
            return code;
        }
    };
    match execute(&cli) {
        Ok(o) => {
            if !cli.quiet {
                print!("{}", o.stdout);
            }
            o.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
