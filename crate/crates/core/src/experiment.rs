//! End-to-end benchmark: per dataset load → split → select smoothing by
//! cross-validation → train model and bootstrap ensemble → score train and
//! test instances → train γ on train records → evaluate test curves → write
//! data files.
//!
//! Every random step draws from a seed derived from the dataset name and the
//! master seed, so datasets can run in any order or in parallel and still
//! produce identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::Deserialize;

use crate::arc::{
    arc, correctness, ideal_order, robustness_column, uncertainty_column, AccuracyRejectionCurve,
    ReliabilityRecord, RobustnessMetric, UncertaintyMetric,
};
use crate::dataset::{load_dataset, split_dataset, DatasetManifest, DiscreteDataset};
use crate::error::{Error, Result};
use crate::nbc::{
    bootstrap_ensemble, select_smoothing, train, ModelEnsemble, NaiveBayesModel,
    DEFAULT_ENSEMBLE_SIZE, DEFAULT_FOLDS, DEFAULT_SMOOTHING_GRID,
};
use crate::ranking::{
    hybrid_order, order_by_robustness, order_by_uncertainty, train_gamma, HybridWeight,
    DEFAULT_GAMMA_STEP,
};
use crate::rng::{derive_seed, fnv1a64};
use crate::robustness::{robustness_scores, DEFAULT_EPS_TOL};
use crate::uncertainty::uncertainty_scores;

/// Floor applied before taking logarithms for the point cloud.
pub const LOG_FLOOR: f64 = 1e-15;

const SPLIT_STREAM: u64 = 0;
const CV_STREAM: u64 = 1;
const ENSEMBLE_STREAM: u64 = 2;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    manifests: Vec<PathBuf>,
    smoothing_grid: Option<Vec<f64>>,
    cv_folds: Option<usize>,
    ensemble_size: Option<usize>,
    gamma_grid_step: Option<f64>,
    eps_tol: Option<f64>,
    master_seed: Option<u64>,
    output_dir: Option<PathBuf>,
    uncertainty_metrics: Option<Vec<String>>,
    robustness_metrics: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub manifests: Vec<DatasetManifest>,
    pub smoothing_grid: Vec<f64>,
    pub cv_folds: usize,
    pub ensemble_size: usize,
    pub gamma_grid_step: f64,
    pub eps_tol: f64,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    pub uncertainty_metrics: Vec<UncertaintyMetric>,
    pub robustness_metrics: Vec<RobustnessMetric>,
}

impl ExperimentConfig {
    /// Default settings around the given manifests.
    pub fn with_manifests(manifests: Vec<DatasetManifest>) -> Self {
        Self {
            manifests,
            smoothing_grid: DEFAULT_SMOOTHING_GRID.to_vec(),
            cv_folds: DEFAULT_FOLDS,
            ensemble_size: DEFAULT_ENSEMBLE_SIZE,
            gamma_grid_step: DEFAULT_GAMMA_STEP,
            eps_tol: DEFAULT_EPS_TOL,
            master_seed: 0,
            output_dir: PathBuf::from("results"),
            uncertainty_metrics: UncertaintyMetric::ALL.to_vec(),
            robustness_metrics: RobustnessMetric::ALL.to_vec(),
        }
    }

    /// Reads a TOML config; manifest and output paths are relative to it.
    pub fn from_file(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::FileNotFound(path.to_path_buf()));
        }
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let config_err = |message: String| Error::Config {
            path: path.to_path_buf(),
            message,
        };
        let raw: ConfigFile = toml::from_str(&text).map_err(|e| config_err(e.to_string()))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));

        let manifests = raw
            .manifests
            .iter()
            .map(|m| DatasetManifest::from_file(&base.join(m)))
            .collect::<Result<Vec<_>>>()?;
        let mut config = Self::with_manifests(manifests);
        if let Some(grid) = raw.smoothing_grid {
            config.smoothing_grid = grid;
        }
        if let Some(v) = raw.cv_folds {
            config.cv_folds = v;
        }
        if let Some(v) = raw.ensemble_size {
            config.ensemble_size = v;
        }
        if let Some(v) = raw.gamma_grid_step {
            config.gamma_grid_step = v;
        }
        if let Some(v) = raw.eps_tol {
            config.eps_tol = v;
        }
        if let Some(v) = raw.master_seed {
            config.master_seed = v;
        }
        config.output_dir = base.join(raw.output_dir.unwrap_or_else(|| PathBuf::from("results")));
        if let Some(ids) = raw.uncertainty_metrics {
            config.uncertainty_metrics = ids
                .iter()
                .map(|s| s.parse())
                .collect::<Result<_>>()
                .map_err(|e| config_err(e.to_string()))?;
        }
        if let Some(ids) = raw.robustness_metrics {
            config.robustness_metrics = ids
                .iter()
                .map(|s| s.parse())
                .collect::<Result<_>>()
                .map_err(|e| config_err(e.to_string()))?;
        }
        config.validate().map_err(config_err)?;
        Ok(config)
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.smoothing_grid.is_empty() || self.smoothing_grid.iter().any(|a| !(*a > 0.0)) {
            return Err("smoothing_grid must be a non-empty list of positive values".into());
        }
        if self.cv_folds < 2 {
            return Err("cv_folds must be at least 2".into());
        }
        if self.ensemble_size < 2 {
            return Err("ensemble_size must be at least 2".into());
        }
        if !(self.gamma_grid_step > 0.0 && self.gamma_grid_step <= 1.0) {
            return Err("gamma_grid_step must lie in (0, 1]".into());
        }
        if !(self.eps_tol > 0.0) {
            return Err("eps_tol must be positive".into());
        }
        let mut names: Vec<&str> = self.manifests.iter().map(|m| m.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err("dataset names must be unique".into());
        }
        for name in names {
            if !name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
            {
                return Err(format!("dataset name `{name}` may only use [A-Za-z0-9_-]"));
            }
        }
        Ok(())
    }

    /// Keeps only the named datasets, in config order.
    pub fn retain_datasets(&mut self, names: &[String]) -> Result<()> {
        for n in names {
            if !self.manifests.iter().any(|m| &m.name == n) {
                return Err(Error::InvalidArgument(format!(
                    "no dataset named `{n}` in config"
                )));
            }
        }
        self.manifests.retain(|m| names.contains(&m.name));
        Ok(())
    }

    /// Seed for everything random about one dataset.
    pub fn dataset_seed(&self, name: &str) -> u64 {
        fnv1a64(name.as_bytes()) ^ self.master_seed
    }
}

/// Scores every instance of `data` with the single model and the ensemble.
pub fn compute_records(
    model: &NaiveBayesModel,
    ensemble: &ModelEnsemble,
    data: &DiscreteDataset,
    eps_tol: f64,
) -> Result<Vec<ReliabilityRecord>> {
    data.instances
        .par_iter()
        .enumerate()
        .map(|(index, inst)| {
            let post = model.posterior(&inst.features)?;
            let members = ensemble.posteriors(&inst.features)?;
            let u = uncertainty_scores(&post, &members)?;
            let e = robustness_scores(model, &inst.features, eps_tol)?;
            Ok(ReliabilityRecord::new(
                index,
                post.predicted,
                inst.class,
                u,
                e,
            ))
        })
        .collect()
}

/// AU-ARCs of the three orders on one set of records.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuArcs {
    pub uncertainty: f64,
    pub robustness: f64,
    pub hybrid: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArcCurves {
    pub ideal: AccuracyRejectionCurve,
    pub robustness: AccuracyRejectionCurve,
    pub uncertainty: AccuracyRejectionCurve,
    pub hybrid: AccuracyRejectionCurve,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairResult {
    pub uncertainty_metric: UncertaintyMetric,
    pub robustness_metric: RobustnessMetric,
    pub weight: HybridWeight,
    pub train: AuArcs,
    pub test: AuArcs,
    pub test_curves: ArcCurves,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetResult {
    pub name: String,
    pub smoothing: f64,
    pub train_size: usize,
    pub test_size: usize,
    pub test_accuracy: f64,
    pub train_records: Vec<ReliabilityRecord>,
    pub test_records: Vec<ReliabilityRecord>,
    pub pairs: Vec<PairResult>,
}

impl DatasetResult {
    pub fn pair(&self, u: UncertaintyMetric, e: RobustnessMetric) -> Option<&PairResult> {
        self.pairs
            .iter()
            .find(|p| p.uncertainty_metric == u && p.robustness_metric == e)
    }
}

/// Curves for the uncertainty, robustness, hybrid (at `gamma`) and ideal
/// orders on `records`.
pub fn evaluate_curves(
    records: &[ReliabilityRecord],
    u_metric: UncertaintyMetric,
    e_metric: RobustnessMetric,
    gamma: f64,
) -> Result<ArcCurves> {
    let u = uncertainty_column(records, u_metric);
    let e = robustness_column(records, e_metric);
    let correct = correctness(records);
    let rank_u = order_by_uncertainty(&u)?;
    let rank_e = order_by_robustness(&e)?;
    let hybrid = hybrid_order(&rank_u, &rank_e, &u, gamma)?;
    Ok(ArcCurves {
        ideal: arc(&ideal_order(&correct), &correct)?,
        robustness: arc(&rank_e, &correct)?,
        uncertainty: arc(&rank_u, &correct)?,
        hybrid: arc(&hybrid, &correct)?,
    })
}

fn auarcs(curves: &ArcCurves) -> AuArcs {
    AuArcs {
        uncertainty: curves.uncertainty.auarc,
        robustness: curves.robustness.auarc,
        hybrid: curves.hybrid.auarc,
    }
}

/// Runs the full pipeline for one dataset without writing anything.
pub fn run_dataset(manifest: &DatasetManifest, config: &ExperimentConfig) -> Result<DatasetResult> {
    let seed = config.dataset_seed(&manifest.name);
    let mut manifest = manifest.clone();
    manifest
        .split_seed
        .get_or_insert_with(|| derive_seed(seed, SPLIT_STREAM));

    let data = load_dataset(&manifest)?;
    let split = split_dataset(&data, &manifest)?;
    let alpha = select_smoothing(
        &split.train,
        &config.smoothing_grid,
        config.cv_folds,
        derive_seed(seed, CV_STREAM),
    )?;
    let model = train(&split.train, alpha)?;
    let ensemble = bootstrap_ensemble(
        &split.train,
        alpha,
        config.ensemble_size,
        derive_seed(seed, ENSEMBLE_STREAM),
    )?;
    let train_records = compute_records(&model, &ensemble, &split.train, config.eps_tol)?;
    let test_records = compute_records(&model, &ensemble, &split.test, config.eps_tol)?;
    let test_accuracy =
        test_records.iter().filter(|r| r.correct).count() as f64 / test_records.len() as f64;
    info!(
        "{}: {} train / {} test, smoothing {alpha}, test accuracy {test_accuracy:.4}",
        manifest.name,
        split.train.len(),
        split.test.len()
    );

    let mut pairs = Vec::new();
    for &u in &config.uncertainty_metrics {
        for &e in &config.robustness_metrics {
            let weight = train_gamma(&train_records, u, e, config.gamma_grid_step)?;
            let train_curves = evaluate_curves(&train_records, u, e, weight.gamma)?;
            let test_curves = evaluate_curves(&test_records, u, e, weight.gamma)?;
            pairs.push(PairResult {
                uncertainty_metric: u,
                robustness_metric: e,
                weight,
                train: auarcs(&train_curves),
                test: auarcs(&test_curves),
                test_curves,
            });
        }
    }

    Ok(DatasetResult {
        name: manifest.name.clone(),
        smoothing: alpha,
        train_size: split.train.len(),
        test_size: split.test.len(),
        test_accuracy,
        train_records,
        test_records,
        pairs,
    })
}

/// Whitespace-separated ARC table, one row per rejection count.
pub fn format_arc_file(curves: &ArcCurves) -> Result<String> {
    let n = curves.ideal.len();
    for c in [&curves.robustness, &curves.uncertainty, &curves.hybrid] {
        if c.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: c.len(),
            });
        }
    }
    let mut out = String::from("rej_rate ideal robustness uncertainty hybrid\n");
    for k in 0..n {
        let _ = writeln!(
            out,
            "{:.6} {:.6} {:.6} {:.6} {:.6}",
            k as f64 / n as f64,
            curves.ideal.accuracies[k],
            curves.robustness.accuracies[k],
            curves.uncertainty.accuracies[k],
            curves.hybrid.accuracies[k],
        );
    }
    Ok(out)
}

/// `x = ln ε`, `y = -ln u` (both floored at 1e-15) and the correctness flag.
pub fn format_point_cloud(
    records: &[ReliabilityRecord],
    u_metric: UncertaintyMetric,
    e_metric: RobustnessMetric,
) -> String {
    let mut out = String::from("x y correct\n");
    for r in records {
        let x = r.robustness_score(e_metric).max(LOG_FLOOR).ln();
        let y = -r.uncertainty_score(u_metric).max(LOG_FLOOR).ln();
        let _ = writeln!(out, "{x:.6} {y:.6} {}", u8::from(r.correct));
    }
    out
}

/// Test-set AU-ARC and trained γ for one robustness metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryCell {
    pub robustness: f64,
    pub hybrid: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub dataset: String,
    pub uncertainty: f64,
    pub global: Option<SummaryCell>,
    pub local: Option<SummaryCell>,
}

pub const SUMMARY_HEADER: &str = "dataset,unc,glob,hybridA,mixingA,local,hybridB,mixingB";

pub fn format_summary(rows: &[SummaryRow]) -> String {
    let cell = |c: &Option<SummaryCell>| match c {
        Some(c) => format!("{:.4},{:.4},{:.2}", c.robustness, c.hybrid, c.gamma),
        None => "NA,NA,NA".to_string(),
    };
    let mut out = format!("{SUMMARY_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:.4},{},{}",
            r.dataset,
            r.uncertainty,
            cell(&r.global),
            cell(&r.local)
        );
    }
    out
}

pub fn summary_rows(results: &[DatasetResult], u_metric: UncertaintyMetric) -> Vec<SummaryRow> {
    results
        .iter()
        .filter_map(|res| {
            let cell = |e| {
                res.pair(u_metric, e).map(|p| SummaryCell {
                    robustness: p.test.robustness,
                    hybrid: p.test.hybrid,
                    gamma: p.weight.gamma,
                })
            };
            let any = res
                .pairs
                .iter()
                .find(|p| p.uncertainty_metric == u_metric)?;
            Some(SummaryRow {
                dataset: res.name.clone(),
                uncertainty: any.test.uncertainty,
                global: cell(RobustnessMetric::Global),
                local: cell(RobustnessMetric::Local),
            })
        })
        .collect()
}

pub fn arc_file_name(dataset: &str, e: RobustnessMetric, u: UncertaintyMetric) -> String {
    format!("{dataset}_{e}_{u}.dat")
}

pub fn cloud_file_name(dataset: &str, e: RobustnessMetric, u: UncertaintyMetric) -> String {
    format!("{dataset}_{e}_{u}_cloud.dat")
}

pub fn summary_file_name(u: UncertaintyMetric) -> String {
    format!("summary_{u}.csv")
}

#[derive(Debug)]
pub struct DatasetFailure {
    pub name: String,
    pub error: Error,
}

#[derive(Debug)]
pub struct ExperimentReport {
    pub results: Vec<DatasetResult>,
    pub failures: Vec<DatasetFailure>,
    pub written: Vec<PathBuf>,
}

impl ExperimentReport {
    pub fn succeeded(&self) -> bool {
        self.failures.is_empty()
    }
}

fn write_file(path: PathBuf, body: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    fs::write(&path, body).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    written.push(path);
    Ok(())
}

/// Writes ARC and point-cloud files for every dataset and metric pair, plus
/// one summary per uncertainty metric.
pub fn write_outputs(config: &ExperimentConfig, results: &[DatasetResult]) -> Result<Vec<PathBuf>> {
    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.clone(),
        source,
    })?;
    let mut written = Vec::new();
    for res in results {
        for p in &res.pairs {
            let (u, e) = (p.uncertainty_metric, p.robustness_metric);
            write_file(
                dir.join(arc_file_name(&res.name, e, u)),
                &format_arc_file(&p.test_curves)?,
                &mut written,
            )?;
            write_file(
                dir.join(cloud_file_name(&res.name, e, u)),
                &format_point_cloud(&res.test_records, u, e),
                &mut written,
            )?;
        }
    }
    for &u in &config.uncertainty_metrics {
        write_file(
            dir.join(summary_file_name(u)),
            &format_summary(&summary_rows(results, u)),
            &mut written,
        )?;
    }
    Ok(written)
}

/// Runs every dataset (in parallel), reports failures per dataset, and
/// writes outputs for the ones that succeeded.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate().map_err(Error::InvalidArgument)?;
    let outcomes: Vec<Result<DatasetResult>> = config
        .manifests
        .par_iter()
        .map(|m| run_dataset(m, config))
        .collect();
    let mut results = Vec::new();
    let mut failures = Vec::new();
    for (m, outcome) in config.manifests.iter().zip(outcomes) {
        match outcome {
            Ok(r) => results.push(r),
            Err(error) => {
                warn!("{}: skipped: {error}", m.name);
                failures.push(DatasetFailure {
                    name: m.name.clone(),
                    error,
                });
            }
        }
    }
    let written = write_outputs(config, &results)?;
    Ok(ExperimentReport {
        results,
        failures,
        written,
    })
}
