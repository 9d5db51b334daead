//! Batch verification runs: a JSON configuration selects a model, a testbed
//! and a list of suites; each suite writes one CSV row per check and the
//! run writes a JSON summary.
//!
//! CSV bodies depend only on the configuration and the seed. Wall-clock
//! data (timestamps, runtimes) appear in `summary.json` only.

mod plot;
mod suites;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::testbed::SyntheticSurface;
use crate::tolerance;
use crate::warping::WarpingFunction;

pub use plot::emit_plot_data;
pub use suites::run_suite;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "TOPONOGOV_OUT_DIR";

/// Output directory used when neither the configuration, the command line
/// nor the environment names one.
pub const DEFAULT_OUT_DIR: &str = "toponogov-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    GeodesicOracle,
    Toponogov,
    Gluing,
    Sturm,
    Splitting,
    Cylinder,
    Rigidity,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::GeodesicOracle,
        Suite::Toponogov,
        Suite::Gluing,
        Suite::Sturm,
        Suite::Splitting,
        Suite::Cylinder,
        Suite::Rigidity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::GeodesicOracle => "geodesic-oracle",
            Suite::Toponogov => "toponogov",
            Suite::Gluing => "gluing",
            Suite::Sturm => "sturm",
            Suite::Splitting => "splitting",
            Suite::Cylinder => "cylinder",
            Suite::Rigidity => "rigidity",
        }
    }

    /// Suites that draw random cases and so need a seed.
    pub fn randomized(self) -> bool {
        self != Suite::Splitting
    }

    /// File name of the per-check report.
    pub fn report_file(self) -> String {
        format!("{}.csv", self.as_str())
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL.into_iter().find(|x| x.as_str() == s).ok_or_else(|| {
            let names: Vec<&str> = Suite::ALL.iter().map(|x| x.as_str()).collect();
            Error::Config(format!("unknown suite `{s}`; expected one of {}", names.join(", ")))
        })
    }
}

/// Pass thresholds applied to the residual of each check. Every field
/// defaults to the crate-wide tolerance ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Distance against closed-form oracles.
    pub oracle: f64,
    /// Endpoint, foot-gap and other distance agreements.
    pub distance: f64,
    /// Clairaut and unit-speed residuals.
    pub conservation: f64,
    /// Comparison inequalities and right angles.
    pub inequality: f64,
    pub hinge: f64,
    pub equality_angle: f64,
    /// First zeros and index-form cancellations.
    pub sturm: f64,
    /// Relative index-form identity residual.
    pub index_identity: f64,
    pub pullback: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            oracle: 1e-7,
            distance: tolerance::DISTANCE,
            conservation: tolerance::CONSERVATION,
            inequality: tolerance::INEQUALITY,
            hinge: tolerance::HINGE,
            equality_angle: tolerance::EQUALITY_ANGLE,
            sturm: 1e-8,
            index_identity: 1e-6,
            pullback: 1e-10,
        }
    }
}

impl Tolerances {
    /// Threshold for a check by name; `None` keeps the verdict of the
    /// routine that produced it.
    pub fn for_check(&self, name: &str) -> Option<f64> {
        Some(match name {
            "distance" => self.oracle,
            "endpoint" | "footgap_constant" | "half_height" | "single_piece" => self.distance,
            "clairaut" | "speed" => self.conservation,
            "angle_p" | "angle_q" | "footgap" | "chain_lower" | "chain_arc" | "chain_upper" | "arc_vs_b" => {
                self.inequality
            }
            "first_zero" | "cancellation" => self.sturm,
            "pullback" => self.pullback,
            n if n.starts_with("perturbed_") && !n.ends_with("equality_case") => {
                return self.for_check(&n["perturbed_".len()..]);
            }
            n if n.starts_with("angle_p_") || n.starts_with("angle_q_") => self.inequality,
            n if n.starts_with("hinge_") => self.hinge,
            n if n.starts_with("equal_angle_") => self.equality_angle,
            _ => return None,
        })
    }

    fn validate(&self) -> Result<()> {
        let fields = [
            ("oracle", self.oracle),
            ("distance", self.distance),
            ("conservation", self.conservation),
            ("inequality", self.inequality),
            ("hinge", self.hinge),
            ("equality_angle", self.equality_angle),
            ("sturm", self.sturm),
            ("index_identity", self.index_identity),
            ("pullback", self.pullback),
        ];
        for (name, v) in fields {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("tolerances.{name}: must be a finite non-negative number, got {v}")));
            }
        }
        Ok(())
    }
}

/// Number of cases per suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Counts {
    pub oracle_pairs: usize,
    pub geodesics: usize,
    pub triangles: usize,
    pub gluing: usize,
    pub sturm_profiles: usize,
    pub rigidity: usize,
    pub cylinder_probes: usize,
}

impl Default for Counts {
    fn default() -> Self {
        Counts {
            oracle_pairs: 100,
            geodesics: 100,
            triangles: 200,
            gluing: 50,
            sturm_profiles: 100,
            rigidity: 50,
            cylinder_probes: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CylinderConfig {
    pub circumference: f64,
    pub height: f64,
}

impl Default for CylinderConfig {
    fn default() -> Self {
        CylinderConfig { circumference: 2.0 * std::f64::consts::PI, height: 2.0 }
    }
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Suite>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(Suite),
        Many(Vec<Suite>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(s) => vec![s],
        OneOrMany::Many(v) => v,
    })
}

/// A verification run, usually read from a JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Warping spec of the model surface.
    pub model: String,
    /// Warping spec of a half-plane testbed, or `cylinder:C:L`.
    pub testbed: String,
    #[serde(alias = "suite", deserialize_with = "one_or_many")]
    pub suites: Vec<Suite>,
    pub seed: Option<u64>,
    pub tolerances: Tolerances,
    pub counts: Counts,
    pub cylinder: CylinderConfig,
    /// Width of the sector assumed free of cut pairs; unbounded if absent.
    pub sector_width: Option<f64>,
    /// Enlargement of the measured foot gap in the perturbed rigidity run.
    pub footgap_perturbation: f64,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: "cosh".into(),
            testbed: "const:1".into(),
            suites: Vec::new(),
            seed: None,
            tolerances: Tolerances::default(),
            counts: Counts::default(),
            cylinder: CylinderConfig::default(),
            sector_width: None,
            footgap_perturbation: 1e-2,
            output_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn model_warping(&self) -> Result<WarpingFunction> {
        WarpingFunction::from_spec(&self.model).map_err(|e| Error::Config(format!("model: {e}")))
    }

    pub fn testbed_surface(&self) -> Result<SyntheticSurface> {
        SyntheticSurface::from_spec(&self.testbed).map_err(|e| Error::Config(format!("testbed: {e}")))
    }

    /// Check every field, reporting the first offending one by name.
    pub fn validate(&self) -> Result<()> {
        if self.suites.is_empty() {
            return Err(Error::Config("suites: at least one suite is required".into()));
        }
        self.model_warping()?;
        self.testbed_surface()?;
        if self.seed.is_none() {
            if let Some(s) = self.suites.iter().find(|s| s.randomized()) {
                return Err(Error::Config(format!("seed: required by the randomized suite `{s}`")));
            }
        }
        self.tolerances.validate()?;
        if let Some(t) = self.sector_width {
            if !(t > 0.0) {
                return Err(Error::Config(format!("sector_width: must be positive, got {t}")));
            }
        }
        if !(self.footgap_perturbation > 0.0 && self.footgap_perturbation.is_finite()) {
            return Err(Error::Config(format!(
                "footgap_perturbation: must be positive, got {}",
                self.footgap_perturbation
            )));
        }
        let c = &self.cylinder;
        if !(c.circumference > 0.0 && c.height > 0.0 && c.circumference.is_finite() && c.height.is_finite()) {
            return Err(Error::Config("cylinder: circumference and height must be positive".into()));
        }
        Ok(())
    }

    /// Output directory: the configured one, else `$TOPONOGOV_OUT_DIR`,
    /// else `toponogov-out`.
    pub fn resolved_output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }
}

/// One row of a suite report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub case: usize,
    pub check: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub pass: bool,
    /// Inputs of the case, or the error that stopped it.
    pub inputs: String,
}

/// One sample of a geodesic trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub path: String,
    pub s: f64,
    pub x: f64,
    pub y: f64,
    /// `|m(x)² y'| - ν`.
    pub nu_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub suite: Suite,
    pub cases: usize,
    pub passes: usize,
    /// Smallest residual over all rows; `None` without rows.
    pub worst_residual: Option<f64>,
    pub runtime_seconds: f64,
    /// Headline outcome where the suite has one (splitting verdict,
    /// `no-evidence` for empty runs).
    pub verdict: Option<String>,
    pub notes: Vec<String>,
}

impl SuiteSummary {
    pub fn passed(&self) -> bool {
        self.passes == self.cases
    }
}

/// Rows of one suite with its summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub summary: SuiteSummary,
    pub rows: Vec<Row>,
    pub traces: Option<Vec<TraceRow>>,
}

impl SuiteResult {
    fn new(suite: Suite, cases: usize, rows: Vec<Row>, traces: Option<Vec<TraceRow>>) -> Self {
        let mut ok = vec![true; cases];
        for r in &rows {
            if !r.pass {
                ok[r.case] = false;
            }
        }
        let worst = rows.iter().map(|r| r.residual).reduce(f64::min).filter(|v| !v.is_nan());
        SuiteResult {
            summary: SuiteSummary {
                suite,
                cases,
                passes: ok.iter().filter(|&&p| p).count(),
                worst_residual: worst.filter(|v| v.is_finite()),
                runtime_seconds: 0.0,
                verdict: None,
                notes: Vec::new(),
            },
            rows,
            traces,
        }
    }
}

/// What a run wrote and how it went.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutcome {
    pub seed: Option<u64>,
    pub model: String,
    pub testbed: String,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub passed: bool,
    pub suites: Vec<SuiteSummary>,
    pub files: Vec<PathBuf>,
}

fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

fn io_err(path: &Path, e: impl fmt::Display) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

pub(crate) fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| io_err(path, e))?;
    w.write_record(header).map_err(|e| io_err(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub(crate) const ROW_HEADER: [&str; 7] = ["case", "check", "lhs", "rhs", "residual", "pass", "inputs"];
pub(crate) const TRACE_HEADER: [&str; 5] = ["path", "s", "x", "y", "nu_residual"];

/// File name of the geodesic traces written by the oracle suite.
pub const TRACES_FILE: &str = "geodesic-oracle_traces.csv";

/// Run every requested suite and write `<suite>.csv`, the oracle traces and
/// `summary.json` into `out_dir`.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentOutcome> {
    config.validate()?;
    config.preflight()?;
    fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;
    let started_unix = unix_now();
    let mut suites: Vec<Suite> = Vec::new();
    for &s in &config.suites {
        if !suites.contains(&s) {
            suites.push(s);
        }
    }
    let mut summaries = Vec::new();
    let mut files = Vec::new();
    for suite in suites {
        let clock = Instant::now();
        let mut result = run_suite(config, suite)?;
        result.summary.runtime_seconds = clock.elapsed().as_secs_f64();
        let path = out_dir.join(suite.report_file());
        write_csv(&path, &ROW_HEADER, &result.rows)?;
        files.push(path);
        if let Some(traces) = &result.traces {
            let path = out_dir.join(TRACES_FILE);
            write_csv(&path, &TRACE_HEADER, traces)?;
            files.push(path);
        }
        summaries.push(result.summary);
    }
    let summary_path = out_dir.join("summary.json");
    files.push(summary_path.clone());
    let outcome = ExperimentOutcome {
        seed: config.seed,
        model: config.model.clone(),
        testbed: config.testbed.clone(),
        started_unix,
        finished_unix: unix_now(),
        passed: summaries.iter().all(SuiteSummary::passed),
        suites: summaries,
        files,
    };
    let json = serde_json::to_string_pretty(&outcome).map_err(|e| io_err(&summary_path, e))?;
    fs::write(&summary_path, json + "\n").map_err(|e| io_err(&summary_path, e))?;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parsing() {
        let c = ExperimentConfig::from_json(r#"{"suite": "splitting", "model": "const:1"}"#).unwrap();
        assert_eq!(c.suites, vec![Suite::Splitting]);
        c.validate().unwrap();
        let c = ExperimentConfig::from_json(r#"{"suites": ["toponogov", "gluing"], "seed": 7}"#).unwrap();
        assert_eq!(c.suites.len(), 2);
        c.validate().unwrap();
        assert!(ExperimentConfig::from_json(r#"{"suite": "nope"}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"suite": "sturm", "colour": 1}"#).is_err());
        let e = ExperimentConfig::from_json(r#"{"suite": "sturm"}"#).unwrap().validate().unwrap_err();
        assert!(e.to_string().contains("seed"), "{e}");
        let e = ExperimentConfig::from_json(r#"{"suite": "splitting", "model": "sinh"}"#).unwrap().validate().unwrap_err();
        assert!(e.to_string().contains("model"), "{e}");
        let e = ExperimentConfig::from_json(r#"{"suite": "splitting", "tolerances": {"hinge": -1}}"#)
            .unwrap()
            .validate()
            .unwrap_err();
        assert!(e.to_string().contains("tolerances.hinge"), "{e}");
    }

    #[test]
    fn tolerance_classes() {
        let t = Tolerances::default();
        assert_eq!(t.for_check("hinge_3"), Some(1e-6));
        assert_eq!(t.for_check("perturbed_angle_p"), Some(1e-6));
        assert_eq!(t.for_check("perturbed_equality_case"), None);
        assert_eq!(t.for_check("equal_angle_q"), Some(1e-5));
        assert_eq!(t.for_check("distance"), Some(1e-7));
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.as_str().parse::<Suite>().unwrap(), s);
        }
    }
}
