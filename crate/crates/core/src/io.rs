//! Scenario files, experiment drivers and their JSON/CSV artifacts.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baselines::{run_schemes, SchemeId};
use crate::error::Error;
use crate::model::{
    beamforming_gain, received_power, sample_region, to_db, AngularGrid, ArrayConfig, Beamformer, CoverageRegion,
    LinkBudget, RotationState,
};
use crate::optimizer::{AlgoSettings, IterCounts, SdrRecord, SolveReport, Termination};
use crate::oracle::{brute_force_maxmin, BruteForceResult, BruteForceSpec};

pub const ARTIFACT_VERSION: &str = concat!("hrbeam ", env!("CARGO_PKG_VERSION"));

/// Widths below this are labelled narrow in sweep metadata (30°).
pub const NARROW_BELOW_RAD: f64 = std::f64::consts::PI / 6.0;
/// Widths above this are labelled wide in sweep metadata (80°).
pub const WIDE_ABOVE_RAD: f64 = 80.0 * std::f64::consts::PI / 180.0;

/// Process exit codes of the command-line tool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    SolverFailure = 1,
    ConfigError = 2,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    /// Malformed JSON.
    #[error("parse error: {0}")]
    Parse(String),
    /// Well-formed JSON that does not match the schema.
    #[error("schema error: {0}")]
    Schema(String),
    /// Values that violate a model invariant.
    #[error("invalid scenario: {0}")]
    Invalid(Error),
}

impl From<serde_json::Error> for ScenarioError {
    fn from(e: serde_json::Error) -> Self {
        use serde_json::error::Category;
        match e.classify() {
            Category::Syntax | Category::Eof | Category::Io => ScenarioError::Parse(e.to_string()),
            Category::Data => ScenarioError::Schema(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AngleUnit {
    #[default]
    Rad,
    Deg,
}

impl AngleUnit {
    fn to_rad(self, x: f64) -> f64 {
        match self {
            AngleUnit::Rad => x,
            AngleUnit::Deg => x.to_radians(),
        }
    }
}

/// Coverage region as written in a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegionSpec {
    pub intervals: Vec<(f64, f64)>,
    pub units: AngleUnit,
}

impl Default for RegionSpec {
    fn default() -> Self {
        RegionSpec {
            intervals: vec![(-0.1, 0.1)],
            units: AngleUnit::Rad,
        }
    }
}

impl RegionSpec {
    /// The region in radians.
    pub fn coverage(&self) -> Result<CoverageRegion, Error> {
        let intervals = self
            .intervals
            .iter()
            .map(|&(a, b)| (self.units.to_rad(a), self.units.to_rad(b)))
            .collect();
        CoverageRegion::new(intervals)
    }
}

impl From<&CoverageRegion> for RegionSpec {
    fn from(r: &CoverageRegion) -> Self {
        RegionSpec {
            intervals: r.intervals.clone(),
            units: AngleUnit::Rad,
        }
    }
}

/// One experiment: array, region, sampling, solver settings and schemes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub array: ArrayConfig,
    pub region: RegionSpec,
    /// Number of region samples `Q`.
    pub total_q: usize,
    pub algo: AlgoSettings,
    pub schemes: Vec<SchemeId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub link: Option<LinkBudget>,
    /// Seed for randomized tests; the solvers are deterministic and ignore it.
    pub seed: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            array: ArrayConfig::default(),
            region: RegionSpec::default(),
            total_q: 1000,
            algo: AlgoSettings::default(),
            schemes: SchemeId::ALL.to_vec(),
            link: None,
            seed: 0,
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<(), Error> {
        self.array.validate()?;
        self.algo.validate()?;
        self.region.coverage()?;
        if self.total_q == 0 {
            return Err(Error::config("total_q", "must be at least 1"));
        }
        if self.schemes.is_empty() {
            return Err(Error::config("schemes", "at least one scheme is required"));
        }
        let mut seen = HashSet::new();
        for s in &self.schemes {
            if !seen.insert(*s) {
                return Err(Error::config("schemes", format!("{s} is listed twice")));
            }
        }
        if let Some(link) = &self.link {
            link.validate().map_err(|e| Error::config("link", e.to_string()))?;
        }
        self.grid()?;
        Ok(())
    }

    pub fn coverage(&self) -> Result<CoverageRegion, Error> {
        self.region.coverage()
    }

    pub fn grid(&self) -> Result<AngularGrid, Error> {
        sample_region(&self.coverage()?, self.total_q)
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let scenario: Scenario = serde_json::from_str(text)?;
    scenario.validate().map_err(ScenarioError::Invalid)?;
    Ok(scenario)
}

/// Reads and validates a scenario file; omitted fields take their defaults.
pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&text)
}

pub fn write_scenario(scenario: &Scenario, path: &Path) -> std::io::Result<()> {
    write_json(scenario, path)
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}

/// One scheme's result in a solve report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeResult {
    pub scheme: SchemeId,
    pub worst_gain: f64,
    pub worst_gain_db: f64,
    /// Worst-case received power in watts when the scenario has a link
    /// budget.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_power_w: Option<f64>,
    pub psi_star: f64,
    pub phi: Vec<f64>,
    pub w: Beamformer,
    pub trace: Vec<f64>,
    pub per_psi_curve: Vec<(f64, f64)>,
    pub iters: IterCounts,
    pub sdr_steps: Vec<SdrRecord>,
    pub termination: Termination,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeFailure {
    pub scheme: SchemeId,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveArtifact {
    pub artifact_version: String,
    pub scenario: Scenario,
    pub grid: AngularGrid,
    pub results: Vec<SchemeResult>,
    pub failures: Vec<SchemeFailure>,
    pub total_wall_ms: f64,
}

impl SolveArtifact {
    pub fn result(&self, scheme: SchemeId) -> Option<&SchemeResult> {
        self.results.iter().find(|r| r.scheme == scheme)
    }
}

fn scheme_result(
    scheme: SchemeId,
    report: SolveReport,
    grid: &AngularGrid,
    scenario: &Scenario,
) -> Result<SchemeResult, Error> {
    let inner = report.inner;
    let worst_power_w = match &scenario.link {
        Some(link) => {
            let state = RotationState {
                psi: inner.psi,
                phi: inner.phi.clone(),
            };
            let mut worst = f64::INFINITY;
            for &theta in &grid.samples {
                worst = worst.min(received_power(theta, &state, &inner.w, &scenario.array, link)?);
            }
            Some(worst)
        }
        None => None,
    };
    Ok(SchemeResult {
        scheme,
        worst_gain: inner.worst_gain,
        worst_gain_db: to_db(inner.worst_gain),
        worst_power_w,
        psi_star: report.psi_star,
        phi: inner.phi,
        w: inner.w,
        trace: inner.trace,
        per_psi_curve: report.per_psi_curve,
        iters: inner.iters,
        sdr_steps: inner.sdr_steps,
        termination: inner.termination,
        wall_time_ms: report.wall_time_ms,
    })
}

/// Runs the scenario's schemes on its grid. Scheme failures are recorded
/// in the artifact rather than aborting the run.
pub fn solve_scenario(scenario: &Scenario) -> Result<SolveArtifact, Error> {
    scenario.validate()?;
    let start = Instant::now();
    let region = scenario.coverage()?;
    let grid = scenario.grid()?;
    let cmp = run_schemes(&scenario.schemes, &region, &grid, &scenario.array, &scenario.algo);
    let mut failures: Vec<SchemeFailure> = cmp
        .failures
        .into_iter()
        .map(|(scheme, e)| SchemeFailure {
            scheme,
            message: e.to_string(),
        })
        .collect();
    let mut results = Vec::new();
    for (scheme, report) in cmp.reports {
        match scheme_result(scheme, report, &grid, scenario) {
            Ok(r) => results.push(r),
            Err(e) => failures.push(SchemeFailure {
                scheme,
                message: e.to_string(),
            }),
        }
    }
    failures.sort_by_key(|f| f.scheme);
    Ok(SolveArtifact {
        artifact_version: ARTIFACT_VERSION.to_string(),
        scenario: scenario.clone(),
        grid,
        results,
        failures,
        total_wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

fn report_io(what: &str, path: &Path, e: std::io::Error) -> ExitStatus {
    log::error!("cannot write {what} {}: {e}", path.display());
    ExitStatus::SolverFailure
}

fn status_of(e: &Error) -> ExitStatus {
    match e {
        Error::Config { .. } => ExitStatus::ConfigError,
        _ => ExitStatus::SolverFailure,
    }
}

/// Solves and writes the JSON report to `out`.
pub fn run_solve(scenario: &Scenario, out: &Path) -> ExitStatus {
    let artifact = match solve_scenario(scenario) {
        Ok(a) => a,
        Err(e) => {
            log::error!("{e}");
            return status_of(&e);
        }
    };
    if let Err(e) = write_json(&artifact, out) {
        return report_io("report", out, e);
    }
    if artifact.failures.is_empty() {
        ExitStatus::Success
    } else {
        ExitStatus::SolverFailure
    }
}

/// One row of the width-sweep CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub width_rad: f64,
    pub scheme: SchemeId,
    pub worst_gain_linear: f64,
    pub worst_gain_db: f64,
    pub psi_star_rad: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WidthRegime {
    Narrow,
    Intermediate,
    Wide,
}

impl WidthRegime {
    pub fn of(width_rad: f64) -> Self {
        if width_rad < NARROW_BELOW_RAD {
            WidthRegime::Narrow
        } else if width_rad > WIDE_ABOVE_RAD {
            WidthRegime::Wide
        } else {
            WidthRegime::Intermediate
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub width_rad: f64,
    pub regime: WidthRegime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub artifact_version: String,
    pub columns: Vec<String>,
    pub points: Vec<SweepPoint>,
    pub template: Scenario,
    pub failures: Vec<(f64, SchemeFailure)>,
}

pub const SWEEP_COLUMNS: [&str; 6] = [
    "width_rad",
    "scheme",
    "worst_gain_linear",
    "worst_gain_db",
    "psi_star_rad",
    "wall_ms",
];

pub const PATTERN_COLUMNS: [&str; 4] = ["theta_rad", "scheme", "gain_linear", "gain_db"];

/// Solves the template's schemes on `[−w/2, w/2]` for every width.
pub fn sweep(template: &Scenario, widths_rad: &[f64]) -> Result<(Vec<SweepRow>, SweepMetadata), Error> {
    template.array.validate()?;
    template.algo.validate()?;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &width in widths_rad {
        let scenario = Scenario {
            region: RegionSpec::from(&CoverageRegion::symmetric(width)?),
            ..template.clone()
        };
        let artifact = solve_scenario(&scenario)?;
        for r in &artifact.results {
            rows.push(SweepRow {
                width_rad: width,
                scheme: r.scheme,
                worst_gain_linear: r.worst_gain,
                worst_gain_db: r.worst_gain_db,
                psi_star_rad: r.psi_star,
                wall_ms: r.wall_time_ms,
            });
        }
        failures.extend(artifact.failures.into_iter().map(|f| (width, f)));
    }
    let meta = SweepMetadata {
        artifact_version: ARTIFACT_VERSION.to_string(),
        columns: SWEEP_COLUMNS.iter().map(|s| s.to_string()).collect(),
        points: widths_rad
            .iter()
            .map(|&w| SweepPoint {
                width_rad: w,
                regime: WidthRegime::of(w),
            })
            .collect(),
        template: template.clone(),
        failures,
    };
    Ok((rows, meta))
}

fn write_csv<T: Serialize>(rows: &[T], columns: &[&str], path: &Path) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(columns)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()
}

/// `out` with `suffix` appended to its file name.
pub fn sidecar_path(out: &Path, suffix: &str) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(suffix);
    out.with_file_name(name)
}

/// Writes the sweep CSV to `out` and its metadata to `<out>.meta.json`.
pub fn run_sweep(template: &Scenario, widths_rad: &[f64], out: &Path) -> ExitStatus {
    let (rows, meta) = match sweep(template, widths_rad) {
        Ok(x) => x,
        Err(e) => {
            log::error!("{e}");
            return status_of(&e);
        }
    };
    if let Err(e) = write_csv(&rows, &SWEEP_COLUMNS, out) {
        return report_io("sweep", out, e);
    }
    let meta_path = sidecar_path(out, ".meta.json");
    if let Err(e) = write_json(&meta, &meta_path) {
        return report_io("sweep metadata", &meta_path, e);
    }
    if meta.failures.is_empty() {
        ExitStatus::Success
    } else {
        ExitStatus::SolverFailure
    }
}

/// One row of the beam-pattern CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternRow {
    pub theta_rad: f64,
    pub scheme: SchemeId,
    pub gain_linear: f64,
    pub gain_db: f64,
}

/// Optimized configuration behind one pattern curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternConfig {
    pub scheme: SchemeId,
    pub psi_star: f64,
    pub phi: Vec<f64>,
    pub w: Beamformer,
    pub worst_gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternDump {
    pub rows: Vec<PatternRow>,
    pub configs: Vec<PatternConfig>,
}

/// `n` evenly spaced angles over `[lo, hi]`, endpoints exact.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| if k + 1 == n { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 })
            .collect(),
    }
}

/// Gain of every solved scheme at `n_samples` angles over
/// `[theta_min, theta_max]`, rows sorted by angle.
pub fn pattern(artifact: &SolveArtifact, theta_min: f64, theta_max: f64, n_samples: usize) -> Result<PatternDump, Error> {
    if !(theta_min.is_finite() && theta_max.is_finite() && theta_min <= theta_max) {
        return Err(Error::config("pattern.theta", "need finite theta_min <= theta_max"));
    }
    if n_samples == 0 {
        return Err(Error::config("pattern.n_samples", "must be at least 1"));
    }
    let cfg = &artifact.scenario.array;
    let mut rows = Vec::with_capacity(n_samples * artifact.results.len());
    for theta in linspace(theta_min, theta_max, n_samples) {
        for r in &artifact.results {
            let state = RotationState {
                psi: r.psi_star,
                phi: r.phi.clone(),
            };
            let g = beamforming_gain(theta, &state, &r.w, cfg);
            rows.push(PatternRow {
                theta_rad: theta,
                scheme: r.scheme,
                gain_linear: g,
                gain_db: to_db(g),
            });
        }
    }
    let configs = artifact
        .results
        .iter()
        .map(|r| PatternConfig {
            scheme: r.scheme,
            psi_star: r.psi_star,
            phi: r.phi.clone(),
            w: r.w.clone(),
            worst_gain: r.worst_gain,
        })
        .collect();
    Ok(PatternDump { rows, configs })
}

/// Solves, then writes the pattern CSV to `out` and the configurations to
/// `<out>.config.json`.
pub fn run_pattern(scenario: &Scenario, theta_min: f64, theta_max: f64, n_samples: usize, out: &Path) -> ExitStatus {
    let dump = solve_scenario(scenario).and_then(|a| {
        let failed = !a.failures.is_empty();
        pattern(&a, theta_min, theta_max, n_samples).map(|d| (d, failed))
    });
    let (dump, failed) = match dump {
        Ok(x) => x,
        Err(e) => {
            log::error!("{e}");
            return status_of(&e);
        }
    };
    if let Err(e) = write_csv(&dump.rows, &PATTERN_COLUMNS, out) {
        return report_io("pattern", out, e);
    }
    let cfg_path = sidecar_path(out, ".config.json");
    if let Err(e) = write_json(&dump.configs, &cfg_path) {
        return report_io("pattern configuration", &cfg_path, e);
    }
    if failed {
        ExitStatus::SolverFailure
    } else {
        ExitStatus::Success
    }
}

/// Exhaustive-search request as written in a file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleRequest {
    pub array: ArrayConfig,
    pub region: RegionSpec,
    pub total_q: usize,
    pub phase_grid_points: usize,
    pub phi_grid_points: usize,
    pub psi_grid_points: usize,
}

impl Default for OracleRequest {
    fn default() -> Self {
        OracleRequest {
            array: ArrayConfig {
                n_antennas: 2,
                ..ArrayConfig::default()
            },
            region: RegionSpec {
                intervals: vec![(-0.3, 0.3)],
                units: AngleUnit::Rad,
            },
            total_q: 7,
            phase_grid_points: 64,
            phi_grid_points: 64,
            psi_grid_points: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleArtifact {
    pub artifact_version: String,
    pub request: OracleRequest,
    pub grid: AngularGrid,
    pub result: BruteForceResult,
}

pub fn load_oracle_request(path: &Path) -> Result<OracleRequest, ScenarioError> {
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

pub fn oracle(request: &OracleRequest) -> Result<OracleArtifact, Error> {
    let grid = sample_region(&request.region.coverage()?, request.total_q)?;
    let spec = BruteForceSpec {
        phase_grid_points: request.phase_grid_points,
        phi_grid_points: request.phi_grid_points,
        psi_grid_points: request.psi_grid_points,
        grid: grid.clone(),
    };
    let result = brute_force_maxmin(&spec, &request.array)?;
    Ok(OracleArtifact {
        artifact_version: ARTIFACT_VERSION.to_string(),
        request: request.clone(),
        grid,
        result,
    })
}

/// Runs the exhaustive search and writes its JSON artifact to `out`.
pub fn run_oracle(request: &OracleRequest, out: &Path) -> ExitStatus {
    match oracle(request) {
        Ok(a) => match write_json(&a, out) {
            Ok(()) => ExitStatus::Success,
            Err(e) => report_io("oracle result", out, e),
        },
        Err(e) => {
            log::error!("{e}");
            status_of(&e)
        }
    }
}
