//! Versioned JSON scenario files and the batch run behind `dbl run`.
//!
//! ```json
//! {
//!   "version": 1,
//!   "assets": { "mu": [0.05, 0.07], "sigma": [[0.04, 0.01], [0.01, 0.09]], "r_f": 0.02 },
//!   "horizon_years": 1.0,
//!   "views": { "type": "single", "pick": [[1.0, -1.0]] },
//!   "experiment": { "alphas": [0.4], "gammas": [5.0], "plans": ["weekly"], "n_paths": 2000, "seed": 1 }
//! }
//! ```
//!
//! All rates are decimal per annum and all times in years. Unknown keys are
//! rejected everywhere.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::DblError;
use crate::market::MarketModel;
use crate::mc::output::{write_cer, write_frontier, write_paths, write_revisions_cer, write_turnover, RunMetadata};
use crate::mc::{run_comparison, run_revision_study, ComparisonReport, ComparisonSpec, PolicyKind, RebalancePlan, RevisionStudySpec, ViewStructure};

/// Schema version understood by this library.
pub const SCENARIO_VERSION: u32 = 1;

/// Bundled five-asset reference scenario.
pub const BUNDLED_SCENARIO: &str = include_str!("../scenarios/paper_section7.json");

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub version: u32,
    pub assets: AssetsConfig,
    pub horizon_years: f64,
    pub views: ViewsConfig,
    pub experiment: ExperimentConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub revision_study: Option<RevisionStudyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AssetsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub names: Option<Vec<String>>,
    pub mu: Vec<f64>,
    pub sigma: Vec<Vec<f64>>,
    pub r_f: f64,
}

/// View structure; `omega_base` defaults to `PΣPᵀ` (its diagonal for
/// multi-horizon views) and is scaled by each `α` of the experiment.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ViewsConfig {
    Single {
        pick: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        omega_base: Option<Vec<Vec<f64>>>,
    },
    Revisions {
        pick: Vec<Vec<f64>>,
        times: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        omega_base: Option<Vec<Vec<f64>>>,
    },
    ShortTerm {
        pick: Vec<Vec<f64>>,
        times: Vec<f64>,
        #[serde(default)]
        phi: Vec<Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        omega_base: Option<Vec<Vec<f64>>>,
    },
    MultiHorizon {
        pick: Vec<Vec<f64>>,
        horizons: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        omega_base: Option<Vec<Vec<f64>>>,
    },
}

fn default_policies() -> Vec<String> {
    vec!["DBL".into(), "RCBL".into()]
}
fn default_z0() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub alphas: Vec<f64>,
    pub gammas: Vec<f64>,
    /// `continuous`, `continuousN`, `daily`, `weekly`, `monthly` or `everyP`.
    pub plans: Vec<String>,
    pub n_paths: usize,
    pub seed: u64,
    #[serde(default = "default_policies")]
    pub policies: Vec<String>,
    #[serde(default = "default_z0")]
    pub z0: f64,
    /// Leading paths written to `paths.csv`; 0 disables the dump.
    #[serde(default)]
    pub dump_paths: usize,
}

/// Dynamic investors with differently revised views, written to `revisions_cer.csv`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RevisionStudyConfig {
    /// Defaults to the experiment's pick matrix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pick: Option<Vec<Vec<f64>>>,
    pub schedules: BTreeMap<String, Vec<f64>>,
    pub alphas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub plan: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_paths: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

/// Failure of a scenario run, split by the CLI exit code it maps to.
#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid scenario: {0}")]
    Parse(String),
    #[error("invalid scenario: {0}")]
    Validation(DblError),
    #[error("numerical failure [{kind}]: {0}", kind = .0.kind())]
    Numerical(DblError),
    #[error("cannot write output: {0}")]
    Write(String),
}

impl ScenarioError {
    /// True for errors caused by the scenario content rather than the computation.
    pub fn is_validation(&self) -> bool {
        matches!(self, ScenarioError::Parse(_) | ScenarioError::Validation(_) | ScenarioError::Read { .. })
    }
}

fn matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>, ScenarioError> {
    let r = rows.len();
    let c = rows.first().map(Vec::len).unwrap_or(0);
    if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(ScenarioError::Parse(format!("{what} must be a non-empty rectangular matrix")));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

fn parse_plan(s: &str) -> Result<RebalancePlan, ScenarioError> {
    s.parse().map_err(ScenarioError::Validation)
}

fn parse_policy(s: &str) -> Result<PolicyKind, ScenarioError> {
    match s.to_ascii_uppercase().as_str() {
        "DBL" => Ok(PolicyKind::Dbl),
        "RCBL" => Ok(PolicyKind::Rcbl),
        _ => Err(ScenarioError::Parse(format!("unknown policy '{s}', expected DBL or RCBL"))),
    }
}

/// Sets `path` (dot-separated keys, numeric segments index arrays) to `value`,
/// parsed as JSON when possible and as a string otherwise.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<(), ScenarioError> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| ScenarioError::Parse(format!("override '{assignment}' is not of the form key=value")))?;
    let value: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut cur = doc;
    let keys: Vec<&str> = path.split('.').collect();
    for (i, key) in keys.iter().enumerate() {
        let last = i + 1 == keys.len();
        cur = match cur {
            Value::Object(map) => {
                if last {
                    map.insert(key.to_string(), value);
                    return Ok(());
                }
                map.entry(key.to_string()).or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(items) => {
                let idx: usize = key.parse().map_err(|_| ScenarioError::Parse(format!("'{key}' in '{path}' must index an array")))?;
                let len = items.len();
                let slot = items.get_mut(idx).ok_or_else(|| ScenarioError::Parse(format!("index {idx} out of range ({len}) in '{path}'")))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => return Err(ScenarioError::Parse(format!("'{path}' descends into a scalar"))),
        };
    }
    Ok(())
}

impl ScenarioConfig {
    pub fn from_json(text: &str, overrides: &[String]) -> Result<Self, ScenarioError> {
        let mut doc: Value = serde_json::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let cfg: Self = serde_json::from_value(doc).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        if cfg.version != SCENARIO_VERSION {
            return Err(ScenarioError::Parse(format!("unsupported scenario version {} (expected {SCENARIO_VERSION})", cfg.version)));
        }
        cfg.build()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path, overrides: &[String]) -> Result<Self, ScenarioError> {
        let text = fs::read_to_string(path).map_err(|source| ScenarioError::Read { path: path.to_path_buf(), source })?;
        Self::from_json(&text, overrides)
    }

    pub fn bundled() -> Self {
        Self::from_json(BUNDLED_SCENARIO, &[]).expect("bundled scenario is valid")
    }

    pub fn market(&self) -> Result<MarketModel, ScenarioError> {
        let a = &self.assets;
        if let Some(names) = &a.names {
            if names.len() != a.mu.len() {
                return Err(ScenarioError::Parse(format!("{} asset names for {} assets", names.len(), a.mu.len())));
            }
        }
        MarketModel::new(DVector::from_vec(a.mu.clone()), matrix(&a.sigma, "assets.sigma")?, a.r_f, self.horizon_years)
            .map_err(ScenarioError::Validation)
    }

    pub fn structure(&self, market: &MarketModel) -> Result<ViewStructure, ScenarioError> {
        let with_base = |s: ViewStructure, base: &Option<Vec<Vec<f64>>>| -> Result<ViewStructure, ScenarioError> {
            let Some(b) = base else { return Ok(s) };
            let b = matrix(b, "views.omega_base")?;
            Ok(match s {
                ViewStructure::Single { pick, .. } => ViewStructure::Single { pick, omega_base: b },
                ViewStructure::Revisions { pick, times, .. } => ViewStructure::Revisions { pick, times, omega_base: b },
                ViewStructure::ShortTerm { pick, times, phi, .. } => ViewStructure::ShortTerm { pick, times, phi, omega_base: b },
                ViewStructure::MultiHorizon { picks, horizons, .. } => ViewStructure::MultiHorizon { picks, horizons, omega_base: b },
            })
        };
        let (ViewsConfig::Single { pick, .. } | ViewsConfig::Revisions { pick, .. } | ViewsConfig::ShortTerm { pick, .. } | ViewsConfig::MultiHorizon { pick, .. }) =
            &self.views;
        let cols = matrix(pick, "views.pick")?.ncols();
        if cols != market.n_assets() {
            return Err(ScenarioError::Validation(DblError::ShapeMismatch {
                module: "scenario_cli",
                detail: format!("views.pick has {cols} columns for {} assets", market.n_assets()),
            }));
        }
        let s = match &self.views {
            ViewsConfig::Single { pick, omega_base } => with_base(ViewStructure::single(market, matrix(pick, "views.pick")?), omega_base)?,
            ViewsConfig::Revisions { pick, times, omega_base } => {
                with_base(ViewStructure::revisions(market, matrix(pick, "views.pick")?, times.clone()), omega_base)?
            }
            ViewsConfig::ShortTerm { pick, times, phi, omega_base } => {
                let phi = phi.iter().map(|m| matrix(m, "views.phi")).collect::<Result<Vec<_>, _>>()?;
                with_base(ViewStructure::short_term(market, matrix(pick, "views.pick")?, times.clone(), phi), omega_base)?
            }
            ViewsConfig::MultiHorizon { pick, horizons, omega_base } => {
                with_base(ViewStructure::multi_horizon(market, matrix(pick, "views.pick")?, horizons.clone()), omega_base)?
            }
        };
        s.validate(market).map_err(ScenarioError::Validation)?;
        Ok(s)
    }

    /// Validates the whole scenario and assembles the library inputs.
    pub fn build(&self) -> Result<(ComparisonSpec, Option<RevisionStudySpec>), ScenarioError> {
        let market = self.market()?;
        let structure = self.structure(&market)?;
        let e = &self.experiment;
        let plans = e.plans.iter().map(|p| parse_plan(p)).collect::<Result<Vec<_>, _>>()?;
        let policies = e.policies.iter().map(|p| parse_policy(p)).collect::<Result<Vec<_>, _>>()?;
        check_lists(&e.alphas, &e.gammas, "experiment")?;
        if e.n_paths < 2 {
            return Err(ScenarioError::Parse(format!("experiment.n_paths must be at least 2, got {}", e.n_paths)));
        }
        if plans.is_empty() || policies.is_empty() {
            return Err(ScenarioError::Parse("experiment.plans and experiment.policies must be non-empty".into()));
        }
        if !(e.z0 > 0.0) || !e.z0.is_finite() {
            return Err(ScenarioError::Parse(format!("experiment.z0 must be positive, got {}", e.z0)));
        }
        let comparison = ComparisonSpec {
            market: market.clone(),
            structure,
            alphas: e.alphas.clone(),
            gammas: e.gammas.clone(),
            plans,
            policies,
            n_paths: e.n_paths,
            seed: e.seed,
            z0: e.z0,
            keep_paths: e.dump_paths.min(e.n_paths),
            digest: true,
        };
        let study = match &self.revision_study {
            None => None,
            Some(r) => {
                check_lists(&r.alphas, &r.gammas, "revision_study")?;
                let pick = match (&r.pick, &self.views) {
                    (Some(p), _) => matrix(p, "revision_study.pick")?,
                    (None, ViewsConfig::Single { pick, .. } | ViewsConfig::Revisions { pick, .. } | ViewsConfig::ShortTerm { pick, .. } | ViewsConfig::MultiHorizon { pick, .. }) => {
                        matrix(pick, "views.pick")?
                    }
                };
                if r.schedules.is_empty() {
                    return Err(ScenarioError::Parse("revision_study.schedules must be non-empty".into()));
                }
                for (name, times) in &r.schedules {
                    ViewStructure::revisions(&market, pick.clone(), times.clone())
                        .validate(&market)
                        .map_err(ScenarioError::Validation)?;
                    crate::market::RevisionSchedule::proportional(&market, pick.clone(), times.clone(), 1.0).map_err(|e| {
                        ScenarioError::Parse(format!("revision_study.schedules.{name}: {e}"))
                    })?;
                }
                Some(RevisionStudySpec {
                    market,
                    pick,
                    schedules: r.schedules.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
                    alphas: r.alphas.clone(),
                    gammas: r.gammas.clone(),
                    plan: parse_plan(&r.plan)?,
                    n_paths: r.n_paths.unwrap_or(e.n_paths),
                    seed: r.seed.unwrap_or(e.seed),
                    z0: e.z0,
                })
            }
        };
        Ok((comparison, study))
    }
}

fn check_lists(alphas: &[f64], gammas: &[f64], block: &str) -> Result<(), ScenarioError> {
    if alphas.is_empty() || gammas.is_empty() {
        return Err(ScenarioError::Parse(format!("{block}.alphas and {block}.gammas must be non-empty")));
    }
    if let Some(a) = alphas.iter().find(|a| !(**a > 0.0) || !a.is_finite()) {
        return Err(ScenarioError::Parse(format!("{block}.alphas must be positive, got {a}")));
    }
    for g in gammas {
        crate::policy::check_gamma(*g).map_err(ScenarioError::Validation)?;
    }
    Ok(())
}

/// Everything a run produced.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub out_dir: PathBuf,
    pub comparison: ComparisonReport,
    pub revisions: Option<ComparisonReport>,
    pub files: Vec<PathBuf>,
}

impl RunArtifacts {
    /// Fails on the first investor with a bankrupt path.
    pub fn check_solvency(&self) -> Result<(), ScenarioError> {
        self.comparison.check_solvency().map_err(ScenarioError::Numerical)?;
        if let Some(r) = &self.revisions {
            r.check_solvency().map_err(ScenarioError::Numerical)?;
        }
        Ok(())
    }
}

fn write_file<F>(dir: &Path, name: &str, files: &mut Vec<PathBuf>, f: F) -> Result<(), ScenarioError>
where
    F: FnOnce(fs::File) -> Result<(), String>,
{
    let path = dir.join(name);
    let file = fs::File::create(&path).map_err(|e| ScenarioError::Write(format!("{}: {e}", path.display())))?;
    f(file).map_err(|e| ScenarioError::Write(format!("{}: {e}", path.display())))?;
    files.push(path);
    Ok(())
}

/// Runs the scenario and writes its tables, metadata and summary to `out_dir`.
pub fn run_scenario(cfg: &ScenarioConfig, out_dir: &Path) -> Result<RunArtifacts, ScenarioError> {
    let (spec, study) = cfg.build()?;
    let comparison = run_comparison(&spec).map_err(classify)?;
    let revisions = study.as_ref().map(run_revision_study).transpose().map_err(classify)?;
    fs::create_dir_all(out_dir).map_err(|e| ScenarioError::Write(format!("{}: {e}", out_dir.display())))?;
    let mut files = Vec::new();
    let csv_err = |e: csv::Error| e.to_string();
    write_file(out_dir, "frontier.csv", &mut files, |f| write_frontier(&comparison, f).map_err(csv_err))?;
    write_file(out_dir, "cer.csv", &mut files, |f| write_cer(&comparison, f).map_err(csv_err))?;
    write_file(out_dir, "turnover.csv", &mut files, |f| write_turnover(&comparison, f).map_err(csv_err))?;
    if let Some(r) = &revisions {
        write_file(out_dir, "revisions_cer.csv", &mut files, |f| write_revisions_cer(r, f).map_err(csv_err))?;
    }
    if !comparison.kept_paths.is_empty() {
        write_file(out_dir, "paths.csv", &mut files, |f| write_paths(&comparison, f).map_err(csv_err))?;
    }
    let mut meta = RunMetadata::from_report(&comparison, cfg.version, spec.alphas.clone(), spec.gammas.clone());
    meta.revision_seed = study.as_ref().map(|s| s.seed);
    write_file(out_dir, "metadata.json", &mut files, |f| serde_json::to_writer_pretty(f, &meta).map_err(|e| e.to_string()))?;
    let summary = summary_text(cfg, &comparison, revisions.as_ref());
    write_file(out_dir, "summary.txt", &mut files, |f| {
        use std::io::Write;
        let mut f = f;
        f.write_all(summary.as_bytes()).map_err(|e| e.to_string())
    })?;
    Ok(RunArtifacts { out_dir: out_dir.to_path_buf(), comparison, revisions, files })
}

fn classify(e: DblError) -> ScenarioError {
    if e.is_validation() {
        ScenarioError::Validation(e)
    } else {
        ScenarioError::Numerical(e)
    }
}

fn fmt_est(e: Option<crate::mc::Estimate>) -> String {
    e.map(|c| format!("{:>9.5} ± {:.5}", c.value, c.se)).unwrap_or_else(|| format!("{:>19}", "bankrupt"))
}

/// Human-readable table of a run.
pub fn summary_text(cfg: &ScenarioConfig, comparison: &ComparisonReport, revisions: Option<&ComparisonReport>) -> String {
    let mut s = String::new();
    s.push_str(&format!("dbl {} scenario v{}\n", crate::VERSION, cfg.version));
    s.push_str(&format!(
        "paths {}  seed {}  z0 {}  grid nodes {}\n",
        comparison.n_paths,
        comparison.seed,
        comparison.z0,
        comparison.grid.len()
    ));
    if let Some(d) = &comparison.path_digest {
        s.push_str(&format!("price-path sha256 {d}\n"));
    }
    s.push_str(&format!(
        "\n{:<6} {:>6} {:>6} {:<12} {:>9} {:>9} {:>19} {:>19} {:>8}\n",
        "policy", "alpha", "gamma", "plan", "mean", "std", "cer ± se", "turnover ± se", "bankrupt"
    ));
    for r in &comparison.rows {
        let m = &r.summary;
        s.push_str(&format!(
            "{:<6} {:>6} {:>6} {:<12} {:>9.5} {:>9.5} {} {:>9.4} ± {:.4} {:>8}\n",
            r.policy.as_str(),
            r.alpha,
            r.gamma,
            r.plan,
            m.mean,
            m.std,
            fmt_est(m.cer),
            m.turnover.value,
            m.turnover.se,
            m.bankrupt
        ));
    }
    if let Some(rev) = revisions {
        s.push_str(&format!("\nrevision study ({} paths, seed {})\n", rev.n_paths, rev.seed));
        s.push_str(&format!("{:<12} {:>6} {:>6} {:<10} {:>19}\n", "schedule", "alpha", "gamma", "plan", "cer ± se"));
        for r in &rev.rows {
            s.push_str(&format!("{:<12} {:>6} {:>6} {:<10} {}\n", r.structure, r.alpha, r.gamma, r.plan, fmt_est(r.summary.cer)));
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> String {
        r#"{
          "version": 1,
          "assets": { "mu": [0.05, 0.07], "sigma": [[0.04, 0.01], [0.01, 0.09]], "r_f": 0.02 },
          "horizon_years": 1.0,
          "views": { "type": "single", "pick": [[1.0, -1.0]] },
          "experiment": { "alphas": [0.5], "gammas": [3.0], "plans": ["monthly"], "n_paths": 40, "seed": 7 }
        }"#
        .to_string()
    }

    #[test]
    fn bundled_scenario_parses() {
        let cfg = ScenarioConfig::bundled();
        assert_eq!(cfg.assets.mu.len(), 5);
        assert!(cfg.revision_study.is_some());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = small().replace("\"seed\": 7", "\"seed\": 7, \"sed\": 1");
        assert!(matches!(ScenarioConfig::from_json(&text, &[]), Err(ScenarioError::Parse(_))));
        let text = small().replace("\"pick\"", "\"extra\": 1, \"pick\"");
        assert!(matches!(ScenarioConfig::from_json(&text, &[]), Err(ScenarioError::Parse(_))));
        let err = ScenarioConfig::from_json(&small(), &["experiment.bogus=1".into()]).unwrap_err();
        assert!(err.is_validation());
    }

    #[test]
    fn overrides_edit_nested_values() {
        let cfg = ScenarioConfig::from_json(&small(), &["experiment.seed=42".into(), "assets.sigma.0.0=0.05".into()]).unwrap();
        assert_eq!(cfg.experiment.seed, 42);
        assert_eq!(cfg.assets.sigma[0][0], 0.05);
        let cfg = ScenarioConfig::from_json(&small(), &["experiment.plans=[\"weekly\",\"daily\"]".into()]).unwrap();
        assert_eq!(cfg.experiment.plans, vec!["weekly", "daily"]);
        assert!(ScenarioConfig::from_json(&small(), &["experiment.seed".into()]).is_err());
    }

    #[test]
    fn validation_errors() {
        let e = ScenarioConfig::from_json(&small(), &["experiment.gammas=[0.5]".into()]).unwrap_err();
        assert!(matches!(e, ScenarioError::Validation(DblError::GammaOutOfRange { .. })));
        assert!(e.to_string().contains("gamma > 1"));
        let e = ScenarioConfig::from_json(&small(), &["assets.sigma=[[0.04,0.5],[0.5,0.09]]".into()]).unwrap_err();
        assert!(matches!(e, ScenarioError::Validation(DblError::NotPositiveDefinite { module: "market_views", .. })), "{e}");
        assert!(ScenarioConfig::from_json(&small(), &["version=2".into()]).is_err());
        assert!(ScenarioConfig::from_json(&small(), &["experiment.plans=[\"hourly\"]".into()]).unwrap_err().is_validation());
        assert!(ScenarioConfig::from_json(&small(), &["views.pick=[[1.0,0.0,0.0]]".into()]).unwrap_err().is_validation());
    }

    #[test]
    fn run_writes_tables() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ScenarioConfig::from_json(&small(), &["experiment.dump_paths=2".into()]).unwrap();
        let art = run_scenario(&cfg, dir.path()).unwrap();
        for f in ["frontier.csv", "cer.csv", "turnover.csv", "paths.csv", "metadata.json", "summary.txt"] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
        assert!(!dir.path().join("revisions_cer.csv").exists());
        art.check_solvency().unwrap();
        let meta: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("metadata.json")).unwrap()).unwrap();
        assert_eq!(meta["seed"], 7);
        assert_eq!(meta["library_version"], crate::VERSION);
    }

    #[test]
    fn every_view_type_runs() {
        let types = [
            r#"{ "type": "revisions", "pick": [[1.0, -1.0]], "times": [0.0, 0.5] }"#,
            r#"{ "type": "short_term", "pick": [[1.0, -1.0]], "times": [0.0, 0.5, 1.0], "phi": [[[0.3]]] }"#,
            r#"{ "type": "multi_horizon", "pick": [[1.0, 0.0], [0.0, 1.0]], "horizons": [0.5, 1.0] }"#,
        ];
        for t in types {
            let text = small().replace(r#"{ "type": "single", "pick": [[1.0, -1.0]] }"#, t);
            let cfg = ScenarioConfig::from_json(&text, &[]).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let art = run_scenario(&cfg, dir.path()).unwrap();
            assert_eq!(art.comparison.rows.len(), 2, "{t}");
        }
    }
}
