//! Command-line front end. Every command is a thin wrapper over the library:
//! load inputs, call one operation, write artifacts plus a `manifest.json`
//! sidecar.
//!
//! Exit codes: 0 success, 1 input/schema error, 2 simulation error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::core_model::CoreRegistry;
use crate::engine::{simulate_with, write_trace_csv, SimOptions, SimResult, SystemConfig};
use crate::error::{ConfigError, Error, SimError};
use crate::explorer::{run_dse, write_plot_csv, DseQuery, DseReport, Preset};
use crate::metrics::{area_gain, pareto_front, TradePoint};
use crate::workload::WorkloadProfile;
use crate::{data, SCHEMA_VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SCHEMA: i32 = 1;
pub const EXIT_SIM: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "hetsim", version, about = "Heterogeneous multicore performance/energy explorer")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PresetArg {
    PaperSmp,
    PaperH2,
    PaperH3,
    Full,
}

impl PresetArg {
    fn preset(self) -> Preset {
        match self {
            PresetArg::PaperSmp => Preset::PaperSmp,
            PresetArg::PaperH2 => Preset::PaperH2,
            PresetArg::PaperH3 => Preset::PaperH3,
            PresetArg::Full => Preset::Full,
        }
    }

    fn name(self) -> &'static str {
        match self {
            PresetArg::PaperSmp => "paper-smp",
            PresetArg::PaperH2 => "paper-h2",
            PresetArg::PaperH3 => "paper-h3",
            PresetArg::Full => "full",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one workload profile on one system configuration.
    Simulate {
        /// Core-type definition file (default: bundled calibration).
        #[arg(long)]
        cores: Option<PathBuf>,
        /// Workload profile file.
        #[arg(long = "profiles", alias = "profile")]
        profile: PathBuf,
        /// System configuration file.
        #[arg(long)]
        system: PathBuf,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the chunk schedule as CSV to this path.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Sweep configurations for every profile and write reports and plot data.
    Explore {
        #[arg(long)]
        cores: Option<PathBuf>,
        /// Profile file or directory of profiles (default: bundled profiles).
        #[arg(long)]
        profiles: Option<PathBuf>,
        #[arg(long, value_enum, conflicts_with = "query")]
        preset: Option<PresetArg>,
        /// DSE query file (JSON).
        #[arg(long)]
        query: Option<PathBuf>,
        #[arg(long)]
        total_cores: Option<u32>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (0 = all CPUs). Does not change any output byte.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Restrict the report to one format (default: both).
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Pareto front of a point CSV (config,delay_s,energy_j[,workload]) or a JSON report.
    Pareto {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Regenerate per-workload plot CSVs from a JSON report.
    PlotData {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Schema-check and lint core, profile, system and query files.
    Validate {
        files: Vec<PathBuf>,
        /// Core file used to resolve core names (default: first core file given, else bundled).
        #[arg(long)]
        cores: Option<PathBuf>,
    },
}

#[derive(Debug)]
pub enum CliError {
    Schema(String),
    Sim(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => EXIT_SCHEMA,
            CliError::Sim(_) => EXIT_SIM,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Schema(m) | CliError::Sim(m) => m,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Schema(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Sim(e.to_string())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(c) => c.into(),
            Error::Sim(s) => s.into(),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Schema(format!("{}: {e}", path.display()))
}

/// Prefix a load error with the file path unless it already names it.
fn in_file(path: &Path, e: ConfigError) -> CliError {
    let msg = e.to_string();
    let p = path.display().to_string();
    if msg.contains(&p) {
        CliError::Schema(msg)
    } else {
        CliError::Schema(format!("{p}: {msg}"))
    }
}

/// Sidecar describing how an output set was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool: String,
    pub tool_version: String,
    pub command: String,
    pub inputs: Vec<String>,
    pub presets: Vec<String>,
    pub outputs: Vec<String>,
    pub determinism: String,
}

impl RunManifest {
    fn new(command: &str) -> Self {
        RunManifest {
            schema_version: SCHEMA_VERSION,
            tool: env!("CARGO_PKG_NAME").to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            inputs: Vec::new(),
            presets: Vec::new(),
            outputs: Vec::new(),
            determinism: "seedless: no randomness; outputs depend only on the inputs, not on --jobs".to_string(),
        }
    }

    fn input(&mut self, path: Option<&Path>, bundled: &str) {
        self.inputs.push(match path {
            Some(p) => p.display().to_string(),
            None => format!("<bundled:{bundled}>"),
        });
    }

    fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        write_file(path, text.as_bytes())
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

fn sidecar(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    path.with_file_name(name)
}

pub fn load_cores(path: Option<&Path>) -> Result<CoreRegistry, CliError> {
    match path {
        Some(p) => CoreRegistry::load(p).map_err(|e| in_file(p, e)),
        None => Ok(CoreRegistry::shipped()),
    }
}

/// A single profile file, or every `*.json` in a directory sorted by file name.
pub fn load_profiles(path: Option<&Path>, cores: &CoreRegistry) -> Result<Vec<WorkloadProfile>, CliError> {
    let Some(path) = path else {
        return Ok(data::shipped_profiles());
    };
    let files = if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|e| io_err(path, e))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        files.sort();
        files
    } else {
        vec![path.to_path_buf()]
    };
    if files.is_empty() {
        return Err(CliError::Schema(format!("{}: no profile files found", path.display())));
    }
    files
        .iter()
        .map(|f| WorkloadProfile::load(f, Some(cores)).map_err(|e| in_file(f, e)))
        .collect()
}

pub fn cmd_simulate(
    cores_path: Option<&Path>,
    profile_path: &Path,
    system_path: &Path,
    out: Option<&Path>,
    trace: Option<&Path>,
    format: Format,
    stdout: &mut dyn Write,
) -> Result<SimResult, CliError> {
    let cores = load_cores(cores_path)?;
    let profile = WorkloadProfile::load(profile_path, Some(&cores)).map_err(|e| in_file(profile_path, e))?;
    let system = SystemConfig::load(system_path, &cores).map_err(|e| in_file(system_path, e))?;
    let options = SimOptions {
        record_trace: trace.is_some(),
        ..SimOptions::default()
    };
    let result = simulate_with(&profile, &system, &cores, &options)?;

    let body = match format {
        Format::Json => {
            let mut printable = result.clone();
            printable.schedule_trace = None;
            printable.to_json() + "\n"
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["workload", "config", "delay_s", "energy_j", "edp_js"])
                .and_then(|_| {
                    w.write_record([
                        result.workload.clone(),
                        result.config.clone(),
                        result.delay_s.to_string(),
                        result.energy_j.to_string(),
                        result.edp_js.to_string(),
                    ])
                })
                .expect("in-memory csv");
            String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8")
        }
    };

    let mut manifest = RunManifest::new("simulate");
    manifest.input(cores_path, "cores.json");
    manifest.inputs.push(profile_path.display().to_string());
    manifest.inputs.push(system_path.display().to_string());
    if let (Some(path), Some(entries)) = (trace, result.schedule_trace.as_ref()) {
        let mut buf = Vec::new();
        write_trace_csv(entries, &mut buf).map_err(|e| io_err(path, e))?;
        write_file(path, &buf)?;
        manifest.outputs.push(path.display().to_string());
    }
    match out {
        Some(path) => {
            write_file(path, body.as_bytes())?;
            manifest.outputs.push(path.display().to_string());
            manifest.write(&sidecar(path))?;
        }
        None => stdout.write_all(body.as_bytes()).map_err(|e| CliError::Schema(e.to_string()))?,
    }
    Ok(result)
}

pub struct ExploreArgs<'a> {
    pub cores: Option<&'a Path>,
    pub profiles: Option<&'a Path>,
    pub preset: Option<PresetArg>,
    pub query: Option<&'a Path>,
    pub total_cores: Option<u32>,
    pub out: &'a Path,
    pub jobs: usize,
    pub format: Option<Format>,
}

fn plot_file_name(workload: &str) -> String {
    let safe: String = workload
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '_' })
        .collect();
    format!("plot_{safe}.csv")
}

fn write_plots(report: &DseReport, out: &Path, manifest: &mut RunManifest) -> Result<(), CliError> {
    for wr in &report.workloads {
        let path = out.join(plot_file_name(&wr.workload));
        let mut buf = Vec::new();
        write_plot_csv(&wr.plot_rows(), &mut buf).map_err(|e| io_err(&path, e))?;
        write_file(&path, &buf)?;
        manifest.outputs.push(plot_file_name(&wr.workload));
    }
    Ok(())
}

pub fn cmd_explore(args: &ExploreArgs<'_>) -> Result<DseReport, CliError> {
    let cores = load_cores(args.cores)?;
    let profiles = load_profiles(args.profiles, &cores)?;
    let mut manifest = RunManifest::new("explore");
    manifest.input(args.cores, "cores.json");
    manifest.input(args.profiles, "profiles");

    let total = args.total_cores.unwrap_or(crate::explorer::DEFAULT_TOTAL_CORES);
    let mut query = match (args.query, args.preset) {
        (Some(path), _) => {
            manifest.inputs.push(path.display().to_string());
            let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
            DseQuery::from_json(&text).map_err(|e| in_file(path, e))?
        }
        (None, preset) => {
            let preset = preset.unwrap_or(PresetArg::Full);
            manifest.presets.push(preset.name().to_string());
            DseQuery::preset(preset.preset(), &cores, total)
        }
    };
    if args.query.is_some() {
        if let Some(t) = args.total_cores {
            query.total_cores = t;
        }
    }

    let report = run_dse(&query, &cores, &profiles, args.jobs)?;

    fs::create_dir_all(args.out).map_err(|e| io_err(args.out, e))?;
    if args.format != Some(Format::Json) {
        let path = args.out.join("report.csv");
        let mut buf = Vec::new();
        report.write_csv(&mut buf).map_err(|e| io_err(&path, e))?;
        write_file(&path, &buf)?;
        manifest.outputs.push("report.csv".to_string());
    }
    if args.format != Some(Format::Csv) {
        let path = args.out.join("report.json");
        write_file(&path, (report.to_json() + "\n").as_bytes())?;
        manifest.outputs.push("report.json".to_string());
    }
    write_plots(&report, args.out, &mut manifest)?;
    manifest.write(&args.out.join("manifest.json"))?;
    Ok(report)
}

#[derive(Debug, Deserialize)]
struct PointCsvRow {
    #[serde(default)]
    workload: Option<String>,
    config: String,
    delay_s: f64,
    energy_j: f64,
}

fn read_points(input: &Path) -> Result<Vec<TradePoint>, CliError> {
    let text = fs::read_to_string(input).map_err(|e| io_err(input, e))?;
    if text.trim_start().starts_with('{') {
        let report = DseReport::from_json(&text).map_err(|e| in_file(input, e))?;
        return Ok(report.workloads.iter().flat_map(|w| w.trade_points()).collect());
    }
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut points = Vec::new();
    for row in rdr.deserialize::<PointCsvRow>() {
        let row = row.map_err(|e| io_err(input, e))?;
        points.push(TradePoint::new(
            row.config,
            row.workload.unwrap_or_default(),
            row.delay_s,
            row.energy_j,
            0.0,
        ));
    }
    if points.is_empty() {
        return Err(CliError::Schema(format!("{}: no points", input.display())));
    }
    Ok(points)
}

pub fn cmd_pareto(input: &Path, out: Option<&Path>, format: Format, stdout: &mut dyn Write) -> Result<Vec<TradePoint>, CliError> {
    let points = read_points(input)?;
    let mut workloads: Vec<String> = Vec::new();
    for p in &points {
        if !workloads.contains(&p.workload) {
            workloads.push(p.workload.clone());
        }
    }
    let mut front = Vec::new();
    for w in &workloads {
        let subset: Vec<TradePoint> = points.iter().filter(|p| &p.workload == w).cloned().collect();
        front.extend(pareto_front(&subset).0);
    }
    let body = match format {
        Format::Json => serde_json::to_string_pretty(&front).expect("points serialize") + "\n",
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["workload", "config", "delay_s", "energy_j", "edp_js"])
                .expect("in-memory csv");
            for p in &front {
                w.write_record([
                    p.workload.clone(),
                    p.config.clone(),
                    p.delay_s.to_string(),
                    p.energy_j.to_string(),
                    p.edp_js.to_string(),
                ])
                .expect("in-memory csv");
            }
            String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8")
        }
    };
    match out {
        Some(path) => {
            write_file(path, body.as_bytes())?;
            let mut manifest = RunManifest::new("pareto");
            manifest.inputs.push(input.display().to_string());
            manifest.outputs.push(path.display().to_string());
            manifest.write(&sidecar(path))?;
        }
        None => stdout.write_all(body.as_bytes()).map_err(|e| CliError::Schema(e.to_string()))?,
    }
    Ok(front)
}

pub fn cmd_plot_data(report_path: &Path, out: &Path) -> Result<(), CliError> {
    let text = fs::read_to_string(report_path).map_err(|e| io_err(report_path, e))?;
    let report = DseReport::from_json(&text).map_err(|e| in_file(report_path, e))?;
    let mut manifest = RunManifest::new("plot-data");
    manifest.inputs.push(report_path.display().to_string());
    write_plots(&report, out, &mut manifest)?;
    manifest.write(&out.join("manifest.json"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Note,
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub file: String,
    pub severity: Severity,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let level = match self.severity {
            Severity::Note => "note",
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{}: {level}: {}", self.file, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FileKind {
    Cores,
    Profile,
    System,
    Query,
}

fn sniff(text: &str) -> Option<FileKind> {
    let value: serde_json::Value = serde_json::from_str(text).ok()?;
    let obj = value.as_object()?;
    if obj.contains_key("cores") {
        Some(FileKind::Cores)
    } else if obj.contains_key("phases") {
        Some(FileKind::Profile)
    } else if obj.contains_key("slots") {
        Some(FileKind::System)
    } else if obj.contains_key("core_types") {
        Some(FileKind::Query)
    } else {
        None
    }
}

fn area_note(cores: &CoreRegistry) -> Option<String> {
    if !["A7", "A9", "A15"].iter().all(|n| cores.contains(n)) {
        return None;
    }
    let base = SystemConfig::parse("4A7+4A15", cores).ok()?;
    let gains: Vec<String> = ["7A7+1A15", "7A9+1A15", "1A7+6A9+1A15", "2A7+5A9+1A15", "6A7+1A9+1A15"]
        .iter()
        .map(|n| {
            let c = SystemConfig::parse(n, cores).ok()?;
            Some(format!("{n} {:.2}x", area_gain(&base, &c, cores).ok()?))
        })
        .collect::<Option<_>>()?;
    Some(format!(
        "area gains vs 4A7+4A15 with A9 = {} mm2: {}. The commonly quoted 1.33x for 7A9+1A15 needs A9 of about 1.08 mm2, \
         which no single A9 area reconciles with the other four gains",
        cores.get("A9")?.area_mm2,
        gains.join(", ")
    ))
}

/// Diagnostics for each file; the bool is true when no errors were found.
pub fn cmd_validate(files: &[PathBuf], cores_path: Option<&Path>) -> (Vec<Diagnostic>, bool) {
    let mut diags = Vec::new();
    let diag = |file: &Path, severity, message: String| Diagnostic {
        file: file.display().to_string(),
        severity,
        message,
    };

    let texts: Vec<(PathBuf, Result<String, String>)> = files
        .iter()
        .map(|f| (f.clone(), fs::read_to_string(f).map_err(|e| e.to_string())))
        .collect();

    let reference = match cores_path {
        Some(p) => match CoreRegistry::load(p) {
            Ok(r) => r,
            Err(e) => {
                diags.push(diag(p, Severity::Error, e.to_string()));
                return (diags, false);
            }
        },
        None => texts
            .iter()
            .filter_map(|(_, t)| t.as_ref().ok())
            .filter(|t| sniff(t) == Some(FileKind::Cores))
            .find_map(|t| CoreRegistry::from_json(t).ok())
            .unwrap_or_else(CoreRegistry::shipped),
    };

    for (path, text) in &texts {
        let text = match text {
            Ok(t) => t,
            Err(e) => {
                diags.push(diag(path, Severity::Error, e.clone()));
                continue;
            }
        };
        let before = diags.len();
        match sniff(text) {
            None => diags.push(diag(
                path,
                Severity::Error,
                "not a core, profile, system or query document".into(),
            )),
            Some(FileKind::Cores) => match CoreRegistry::from_json(text) {
                Err(e) => diags.push(diag(path, Severity::Error, e.to_string())),
                Ok(reg) => {
                    for w in reg.power_ordering_warnings() {
                        diags.push(diag(path, Severity::Warning, w));
                    }
                    if let Some(note) = area_note(&reg) {
                        diags.push(diag(path, Severity::Note, note));
                    }
                }
            },
            Some(FileKind::Profile) => {
                if let Err(e) = crate::workload::load_profile(text, Some(&reference)) {
                    diags.push(diag(path, Severity::Error, e.to_string()));
                }
            }
            Some(FileKind::System) => match SystemConfig::from_json(text, &reference) {
                Err(e) => diags.push(diag(path, Severity::Error, e.to_string())),
                Ok(cfg) if cfg.enabled_cores() == 0 => {
                    diags.push(diag(path, Severity::Warning, "no enabled cores".into()))
                }
                Ok(_) => {}
            },
            Some(FileKind::Query) => match DseQuery::from_json(text) {
                Err(e) => diags.push(diag(path, Severity::Error, e.to_string())),
                Ok(q) => {
                    if let Err(e) = crate::explorer::enumerate_configs(&q, &reference) {
                        diags.push(diag(path, Severity::Error, e.to_string()));
                    }
                }
            },
        }
        if diags.len() == before {
            diags.push(diag(path, Severity::Note, "ok".into()));
        }
    }
    let clean = diags.iter().all(|d| d.severity < Severity::Error);
    (diags, clean)
}

/// Run a parsed command line; returns the process exit code.
pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let outcome = match cli.command {
        Command::Simulate {
            cores,
            profile,
            system,
            out,
            trace,
            format,
        } => cmd_simulate(
            cores.as_deref(),
            &profile,
            &system,
            out.as_deref(),
            trace.as_deref(),
            format,
            stdout,
        )
        .map(|_| ()),
        Command::Explore {
            cores,
            profiles,
            preset,
            query,
            total_cores,
            out,
            jobs,
            format,
        } => cmd_explore(&ExploreArgs {
            cores: cores.as_deref(),
            profiles: profiles.as_deref(),
            preset,
            query: query.as_deref(),
            total_cores,
            out: &out,
            jobs,
            format,
        })
        .map(|report| {
            for w in &report.workloads {
                let _ = writeln!(
                    stdout,
                    "{}: best EDP {} ({:+.1}% vs {})",
                    w.workload, w.best_edp, w.best_vs_baseline.edp_pct, w.best_vs_baseline.reference
                );
            }
        }),
        Command::Pareto { input, out, format } => cmd_pareto(&input, out.as_deref(), format, stdout).map(|_| ()),
        Command::PlotData { report, out } => cmd_plot_data(&report, &out),
        Command::Validate { files, cores } => {
            let (diags, clean) = cmd_validate(&files, cores.as_deref());
            for d in &diags {
                let _ = writeln!(stdout, "{d}");
            }
            if clean {
                Ok(())
            } else {
                Err(CliError::Schema(format!(
                    "{} file(s) failed validation",
                    diags.iter().filter(|d| d.severity == Severity::Error).count()
                )))
            }
        }
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message());
            e.exit_code()
        }
    }
}
