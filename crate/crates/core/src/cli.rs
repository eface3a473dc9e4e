//! Command-line entry point.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::buoyancy::{NuRatioTable, Orientation, DEFAULT_CALIBRATION};
use crate::properties::SolidMaterialModel;
use crate::scenarios::{
    self as sc, build_lofa_case, build_pipe_case, build_ramp_case, parse_toml, ConfigError, CsvTable, FluidSource,
    LofaCaseId, LofaFile, PipeFile, RampFile, ScenarioError,
};
use crate::solver::{Network, SolverError};
use crate::verify;

#[derive(Debug, Parser)]
#[command(name = "subchan", version, about = "Transient subchannel thermal-hydraulics for gas-cooled channel networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML configuration; the bundled default when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Run everything twice and require byte-identical outputs.
    #[arg(long, global = true)]
    pub seed_check: bool,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Velocity ramps: quasi-steady against unsteady friction.
    RunRamp,
    /// Heated tube with and without property corrections.
    RunPipe,
    /// Steady full-power phase, then the sealed loss-of-flow transient.
    RunLofa {
        /// Run only this case; both share one steady phase otherwise.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        case: Option<u8>,
        /// Start the transient from a saved steady-state checkpoint.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Tabulate the mixed-convection Nusselt ratio against Bo*.
    GenTable {
        #[arg(long, value_enum, default_value_t = OrientationArg::Both)]
        orientation: OrientationArg,
        #[arg(long, default_value_t = DEFAULT_CALIBRATION)]
        calibration: f64,
    },
    /// Dump interpolated fluid and solid property curves.
    Props,
    /// Run the oracle and invariant checks.
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrientationArg {
    Aided,
    Opposed,
    Both,
}

impl Command {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::RunRamp => "ramp",
            Self::RunPipe => "pipe",
            Self::RunLofa { .. } => "lofa",
            Self::GenTable { .. } => "table",
            Self::Props => "props",
            Self::Verify => "verify",
        }
    }

    fn bundled_config(&self) -> &'static str {
        match self {
            Self::RunRamp => sc::BUNDLED_RAMP,
            Self::RunPipe => sc::BUNDLED_PIPE,
            Self::RunLofa { .. } => sc::BUNDLED_LOFA,
            _ => "",
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("determinism check failed: {0}")]
    Determinism(String),
    #[error("{failed} of {total} verification checks failed")]
    Verification { failed: usize, total: usize },
    #[error("{0}")]
    Usage(String),
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        Self::Scenario(e.into())
    }
}

impl CliError {
    /// Machine-readable category.
    pub fn category(&self) -> &'static str {
        match self {
            Self::Config(_) | Self::Scenario(ScenarioError::Config(_)) => "config",
            Self::Scenario(ScenarioError::Invalid(_)) => "validation",
            Self::Scenario(ScenarioError::Solver(SolverError::InvalidConfig(_))) => "validation",
            Self::Scenario(ScenarioError::Solver(SolverError::Checkpoint(_))) => "checkpoint",
            Self::Scenario(ScenarioError::Solver(_)) | Self::Scenario(ScenarioError::NotConverged { .. }) => "solver",
            Self::Scenario(ScenarioError::Output(_)) | Self::Io { .. } => "io",
            Self::Determinism(_) => "determinism",
            Self::Verification { .. } => "verification",
            Self::Usage(_) => "usage",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "usage" => 2,
            "config" | "validation" => 3,
            "io" => 4,
            "solver" | "checkpoint" => 5,
            "determinism" => 6,
            _ => 7,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::json!({
            "error": {
                "category": self.category(),
                "message": self.to_string(),
            }
        });
        let schema = match self {
            Self::Config(c) | Self::Scenario(ScenarioError::Config(c)) => Some(c),
            _ => None,
        };
        if let Some(ConfigError::Schema { key, line, .. }) = schema {
            v["error"]["key"] = serde_json::json!(key);
            v["error"]["line"] = serde_json::json!(line);
        }
        v
    }
}

/// Invariant audit numbers recorded with every run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditSummary {
    pub max_mass_residual: Option<f64>,
    pub max_mass_drift: Option<f64>,
    pub energy_residual: Option<f64>,
    pub property_clamps: u64,
    pub saturation_events: u64,
    pub max_wall_iterations: usize,
    pub failed_checks: Option<usize>,
}

impl AuditSummary {
    fn merge(&mut self, other: &AuditSummary) {
        let max = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(x), Some(y)) => Some(x.max(y)),
            (x, y) => x.or(y),
        };
        self.max_mass_residual = max(self.max_mass_residual, other.max_mass_residual);
        self.max_mass_drift = max(self.max_mass_drift, other.max_mass_drift);
        self.energy_residual = max(self.energy_residual, other.energy_residual);
        self.property_clamps += other.property_clamps;
        self.saturation_events += other.saturation_events;
        self.max_wall_iterations = self.max_wall_iterations.max(other.max_wall_iterations);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact: String,
    pub version: String,
    pub scenario: String,
    pub config_source: String,
    /// SHA-256 of the configuration text.
    pub config_hash: String,
    pub outputs: Vec<String>,
    pub audit: AuditSummary,
    pub determinism_check: Option<bool>,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub wall_seconds: f64,
}

/// In-memory outputs of one run, keyed by relative path.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Artifacts {
    pub files: BTreeMap<String, String>,
    pub audit: AuditSummary,
}

impl Artifacts {
    fn add(&mut self, name: impl Into<String>, table: &CsvTable) {
        self.files.insert(name.into(), table.to_csv_string());
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// Props config layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropsFile {
    pub fluid: FluidSource,
    pub curve: CurveRange,
    pub solids: Vec<SolidMaterialModel>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurveRange {
    pub t_min: f64,
    pub t_max: f64,
    pub step: f64,
}

impl Default for CurveRange {
    fn default() -> Self {
        Self { t_min: 500.0, t_max: 2000.0, step: 5.0 }
    }
}

impl Default for PropsFile {
    fn default() -> Self {
        Self {
            fluid: FluidSource::default(),
            curve: CurveRange::default(),
            solids: vec![SolidMaterialModel::graphite(), SolidMaterialModel::fuel_compact()],
        }
    }
}

/// Produces every output of `command` without touching the filesystem
/// (apart from reading a checkpoint).
pub fn produce(command: &Command, config_text: &str) -> Result<Artifacts, CliError> {
    let mut art = Artifacts::default();
    match command {
        Command::RunRamp => {
            let file: RampFile = parse_toml(config_text)?;
            let fluid = file.fluid.build()?;
            for spec in &file.ramp.cases {
                let case = build_ramp_case(spec, &file.ramp)?;
                let samples = sc::run_ramp(&case, &fluid)?;
                art.add(format!("ramp_{}.csv", spec.label()), &sc::ramp_table(&samples));
            }
            art.audit.property_clamps = fluid.clamp_count();
        }
        Command::RunPipe => {
            let file: PipeFile = parse_toml(config_text)?;
            let fluid = file.fluid.build()?;
            let case = build_pipe_case(&file.pipe)?;
            let tables = crate::buoyancy::NuRatioTables::standard(DEFAULT_CALIBRATION).map_err(SolverError::from)?;
            let run = sc::run_pipe(&case, &fluid, Some(&tables))?;
            art.add("pipe_corrections_off.csv", &sc::profile_table(&run.uncorrected));
            art.add("pipe_corrections_on.csv", &sc::profile_table(&run.corrected));
            art.add("pipe_summary.csv", &sc::summary_table(&run));
            art.audit.property_clamps = fluid.clamp_count();
            art.audit.max_wall_iterations = run.corrected.max_wall_iterations.max(run.uncorrected.max_wall_iterations);
        }
        Command::RunLofa { case, checkpoint } => {
            let file: LofaFile = parse_toml(config_text)?;
            let fluid = file.fluid.build()?;
            let cases: Vec<LofaCaseId> = match case {
                Some(n) => vec![LofaCaseId::from_number(*n).ok_or_else(|| CliError::Usage(format!("unknown case {n}")))?],
                None => vec![LofaCaseId::One, LofaCaseId::Two],
            };
            let built = cases.iter().map(|c| build_lofa_case(&file.lofa, *c)).collect::<Result<Vec<_>, _>>()?;
            let start = match checkpoint {
                Some(path) => read(path)?,
                None => {
                    let steady = sc::run_steady(&built[0], fluid.clone())?;
                    art.add("steady_log.csv", &sc::steady_log_table(&steady.log));
                    art.files.insert("steady_checkpoint.json".into(), steady.checkpoint.clone());
                    steady.checkpoint
                }
            };
            let mut summary = CsvTable::new([
                "case",
                "peak_fuel_temperature_end",
                "periphery_mass_flow_end",
                "hottest_interior_channel",
                "hottest_interior_mass_flow_end",
                "max_mass_residual",
                "max_mass_drift",
                "energy_residual",
                "steps",
            ]);
            for case in &built {
                let network = Network::from_checkpoint_json(&start, fluid.clone())?;
                let (record, _) = sc::run_transient(case, network)?;
                let dir = format!("case{}", case.case.number());
                for (i, p) in record.probes.iter().enumerate() {
                    art.add(format!("{dir}/probe_{}.csv", p.spec.name), &record.probe_table(i));
                }
                for snap in &record.snapshots {
                    art.add(format!("{dir}/line_{}_t{}.csv", snap.line, snap.time), &snap.to_table());
                }
                art.add(format!("{dir}/flows.csv"), &record.flow_table());
                let flows = record.final_mass_flows();
                let hottest = record.hottest_interior();
                let periphery = record.periphery.first().map_or(f64::NAN, |&c| flows[c]);
                summary.push(vec![
                    case.case.number().to_string(),
                    sc::format_float(record.peak_fuel_at_end()),
                    sc::format_float(periphery),
                    hottest.map(|c| c.to_string()).unwrap_or_default(),
                    sc::format_float(hottest.map_or(f64::NAN, |c| flows[c])),
                    sc::format_float(record.max_mass_residual),
                    sc::format_float(record.max_mass_drift),
                    sc::format_float(record.energy_residual),
                    record.steps.to_string(),
                ]);
                art.audit.merge(&AuditSummary {
                    max_mass_residual: Some(record.max_mass_residual),
                    max_mass_drift: Some(record.max_mass_drift),
                    energy_residual: Some(record.energy_residual),
                    property_clamps: record.clamp_count,
                    saturation_events: record.saturation_events,
                    max_wall_iterations: record.max_wall_iterations,
                    failed_checks: None,
                });
            }
            art.add("summary.csv", &summary);
        }
        Command::GenTable { orientation, calibration } => {
            let which: &[Orientation] = match orientation {
                OrientationArg::Aided => &[Orientation::Aided],
                OrientationArg::Opposed => &[Orientation::Opposed],
                OrientationArg::Both => &[Orientation::Aided, Orientation::Opposed],
            };
            for &o in which {
                let table = NuRatioTable::standard(o, *calibration).map_err(SolverError::from)?;
                art.files.insert(format!("nu_ratio_{}_C{:e}.csv", o.as_str(), calibration), table.to_csv_string());
            }
        }
        Command::Props => {
            let file: PropsFile = parse_toml(config_text)?;
            let fluid = file.fluid.build()?;
            let r = file.curve;
            if !(r.step > 0.0 && r.t_max >= r.t_min) {
                return Err(ScenarioError::Invalid("curve range must have t_max >= t_min and a positive step".into()).into());
            }
            let n = ((r.t_max - r.t_min) / r.step).round() as usize;
            let temps: Vec<f64> = (0..=n).map(|i| r.t_min + i as f64 * r.step).collect();
            let mut helium = CsvTable::new(["T", "rho", "mu", "lambda", "cp", "h", "Pr"]);
            for &t in &temps {
                let s = fluid.interpolate(t);
                helium.push_numbers(&[
                    t,
                    s.density,
                    s.dynamic_viscosity,
                    s.thermal_conductivity,
                    s.specific_heat,
                    s.specific_enthalpy,
                    s.prandtl(),
                ]);
            }
            art.add("helium.csv", &helium);
            let mut header = vec!["T".to_string()];
            for m in &file.solids {
                m.validate().map_err(SolverError::from)?;
                header.push(format!("k_{}", m.name));
                header.push(format!("cp_{}", m.name));
            }
            let mut solids = CsvTable::new(header);
            for &t in &temps {
                let mut row = vec![t];
                for m in &file.solids {
                    row.push(m.conductivity(t).map_err(SolverError::from)?);
                    row.push(m.specific_heat(t).map_err(SolverError::from)?);
                }
                solids.push_numbers(&row);
            }
            art.add("solids.csv", &solids);
            art.audit.property_clamps = fluid.clamp_count();
        }
        Command::Verify => {
            let checks = verify::run_checks();
            let failed = checks.iter().filter(|c| !c.passed).count();
            art.add("verify.csv", &verify::checks_table(&checks));
            art.audit.failed_checks = Some(failed);
        }
    }
    Ok(art)
}

/// Runs one command end to end and writes its outputs and manifest.
pub fn run(cli: &Cli) -> Result<RunManifest, CliError> {
    let started_unix = unix_now();
    let clock = Instant::now();
    let (config_text, config_source) = match &cli.config {
        Some(path) => {
            if matches!(cli.command, Command::GenTable { .. } | Command::Verify) {
                return Err(CliError::Usage(format!("{} takes no --config", cli.command.kind())));
            }
            (read(path)?, path.display().to_string())
        }
        None => (cli.command.bundled_config().to_string(), "bundled".to_string()),
    };
    let art = produce(&cli.command, &config_text)?;
    let determinism_check = if cli.seed_check {
        let again = produce(&cli.command, &config_text)?;
        if let Some(name) = art.files.keys().find(|k| art.files.get(*k) != again.files.get(*k)) {
            return Err(CliError::Determinism(format!("{name} differs between repeated runs")));
        }
        if art.files.len() != again.files.len() || art.audit != again.audit {
            return Err(CliError::Determinism("output set or audit differs between repeated runs".into()));
        }
        Some(true)
    } else {
        None
    };

    for (name, text) in &art.files {
        sc::write_text(&cli.out.join(name), text).map_err(ScenarioError::from)?;
    }
    let manifest = RunManifest {
        artifact: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        scenario: cli.command.kind().into(),
        config_source,
        config_hash: sha256_hex(config_text.as_bytes()),
        outputs: art.files.keys().cloned().collect(),
        audit: art.audit.clone(),
        determinism_check,
        started_unix,
        finished_unix: unix_now(),
        wall_seconds: clock.elapsed().as_secs_f64(),
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    sc::write_text(&cli.out.join("manifest.json"), &(json + "\n")).map_err(ScenarioError::from)?;
    if let Some(failed) = art.audit.failed_checks.filter(|f| *f > 0) {
        return Err(CliError::Verification { failed, total: verify::CHECK_COUNT });
    }
    Ok(manifest)
}

/// Parses arguments, runs, and reports errors as JSON on stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(m) => {
            println!("{}: {} outputs written to {}", m.scenario, m.outputs.len() + 1, cli.out.display());
            0
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}
