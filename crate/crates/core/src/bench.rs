//! Gram-error sweeps, the end-to-end classification pipeline and report
//! writers.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::compositional::{parse_oracle, BaseFeatureOracle, CompositionalMap, RademacherLinear};
use crate::data::{
    fit_apply_scaling, mean_pairwise_distance, split, unit_ball_points, Dataset, LabelMap, Norm,
    DISTANCE_SAMPLE,
};
use crate::error::{Error, Result};
use crate::features::{FeatureMapSpec, MapDocument, MapMode, RandomMaclaurinMap};
use crate::kernel::{needs_auto_sigma, parse_kernel_spec, MaclaurinKernel};
use crate::learner::{train, Hyperparams, LinearModel, ModelDocument, MODEL_FORMAT_VERSION};
use crate::rng::{derive_seed, seeded_rng, str_key};

/// How the approximate Gram matrix is produced.
pub enum Approximation<'a> {
    /// Exact kernel values; the error is zero by construction.
    Exact,
    Maclaurin(&'a RandomMaclaurinMap),
    Compositional(&'a CompositionalMap),
}

/// Exact kernel matrix, row-major.
pub fn exact_gram<F>(kernel: F, points: &[Vec<f64>]) -> Result<Vec<f64>>
where
    F: Fn(&[f64], &[f64]) -> Result<f64> + Sync,
{
    let rows: Vec<Vec<f64>> = points
        .par_iter()
        .map(|x| {
            points
                .iter()
                .map(|y| kernel(x, y))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(rows.concat())
}

/// Matrix of inner products between feature vectors, row-major.
pub fn feature_gram(features: &[Vec<f64>]) -> Vec<f64> {
    let rows: Vec<Vec<f64>> = features
        .par_iter()
        .map(|a| {
            features
                .iter()
                .map(|b| a.iter().zip(b).map(|(u, v)| u * v).sum())
                .collect()
        })
        .collect();
    rows.concat()
}

/// Mean of `|approx - exact|` over ordered pairs, optionally skipping the
/// diagonal.
pub fn gram_mae(exact: &[f64], approx: &[f64], n: usize, include_diagonal: bool) -> Result<f64> {
    if exact.len() != n * n || approx.len() != n * n {
        return Err(Error::invalid("Gram matrices must be n x n"));
    }
    let count = if include_diagonal { n * n } else { n * n - n };
    if count == 0 {
        return Err(Error::Degenerate("no pairs to compare".into()));
    }
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            if include_diagonal || i != j {
                total += (approx[i * n + j] - exact[i * n + j]).abs();
            }
        }
    }
    Ok(total / count as f64)
}

/// Gram MAE of an approximation against `kernel` on `points`.
pub fn gram_error<F>(
    kernel: F,
    approx: Approximation<'_>,
    points: &[Vec<f64>],
    include_diagonal: bool,
) -> Result<f64>
where
    F: Fn(&[f64], &[f64]) -> Result<f64> + Sync,
{
    let exact = exact_gram(&kernel, points)?;
    let approx = match approx {
        Approximation::Exact => exact_gram(&kernel, points)?,
        Approximation::Maclaurin(map) => feature_gram(&map.apply_batch(points)?),
        Approximation::Compositional(map) => feature_gram(&map.apply_batch(points)?),
    };
    gram_mae(&exact, &approx, points.len(), include_diagonal)
}

/// One sweep cell: Gram error of one map at one `D` in one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramErrorReport {
    pub kernel: String,
    pub d: usize,
    #[serde(rename = "D")]
    pub num_features: usize,
    pub mode: String,
    pub effective_features: usize,
    pub trial: usize,
    pub mae: f64,
    pub seconds: Option<f64>,
}

/// Trial statistics of one `(mode, D)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramSummary {
    pub kernel: String,
    pub d: usize,
    #[serde(rename = "D")]
    pub num_features: usize,
    pub mode: String,
    pub effective_features: usize,
    pub trials: usize,
    pub mean_mae: f64,
    pub std_mae: f64,
}

/// Feature map family evaluated by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    Map(MapMode),
    Compositional,
}

impl fmt::Display for SweepMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepMode::Map(m) => m.fmt(f),
            SweepMode::Compositional => f.write_str("compositional"),
        }
    }
}

impl FromStr for SweepMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "compositional" | "comp" => Ok(SweepMode::Compositional),
            other => Ok(SweepMode::Map(other.parse()?)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub kernel: MaclaurinKernel,
    pub d: usize,
    pub feature_counts: Vec<usize>,
    pub modes: Vec<SweepMode>,
    pub trials: usize,
    pub seed: u64,
    pub points: usize,
    pub ball: Norm,
    pub p: f64,
    /// Base oracle for compositional cells; the linear oracle when `None`.
    pub oracle: Option<Arc<dyn BaseFeatureOracle>>,
    pub include_diagonal: bool,
    pub record_timings: bool,
}

impl SweepConfig {
    pub fn new(kernel: MaclaurinKernel, d: usize, feature_counts: Vec<usize>) -> Self {
        SweepConfig {
            kernel,
            d,
            feature_counts,
            modes: vec![SweepMode::Map(MapMode::Plain)],
            trials: 5,
            seed: 0,
            points: 100,
            ball: Norm::L2,
            p: 2.0,
            oracle: None,
            include_diagonal: true,
            record_timings: false,
        }
    }
}

/// Seed of one sweep cell.
pub fn cell_seed(seed: u64, mode: &str, num_features: usize, trial: usize) -> u64 {
    derive_seed(seed, &[str_key(mode), num_features as u64, trial as u64])
}

/// The shared point set of a sweep.
pub fn sweep_points(config: &SweepConfig) -> Vec<Vec<f64>> {
    unit_ball_points(
        config.points,
        config.d,
        config.ball,
        derive_seed(config.seed, &[str_key("points")]),
    )
}

/// Every `(mode, D, trial)` cell on one shared point set, sorted by mode
/// name, then `D`, then trial.
pub fn sweep(config: &SweepConfig) -> Result<Vec<GramErrorReport>> {
    if config.feature_counts.is_empty() {
        return Err(Error::invalid("the D list is empty"));
    }
    if config.modes.is_empty() {
        return Err(Error::invalid("the mode list is empty"));
    }
    if config.trials == 0 {
        return Err(Error::invalid("trials must be >= 1"));
    }
    let points = sweep_points(config);
    let oracle: Arc<dyn BaseFeatureOracle> = match &config.oracle {
        Some(o) => o.clone(),
        None => Arc::new(RademacherLinear::new(config.d)?),
    };
    let dot_exact = exact_gram(|x, y| config.kernel.kernel_value(x, y), &points)?;
    let comp_exact = if config.modes.contains(&SweepMode::Compositional) {
        let k = &config.kernel;
        let o = &oracle;
        Some(exact_gram(|x, y| k.eval_f(o.kernel(x, y)?), &points)?)
    } else {
        None
    };

    let mut cells = Vec::new();
    for mode in &config.modes {
        for &nf in &config.feature_counts {
            for trial in 0..config.trials {
                cells.push((*mode, nf, trial));
            }
        }
    }
    let mut rows = cells
        .into_par_iter()
        .map(|(mode, nf, trial)| {
            let name = mode.to_string();
            let seed = cell_seed(config.seed, &name, nf, trial);
            let start = Instant::now();
            let (approx, exact, effective) = match mode {
                SweepMode::Map(m) => {
                    let spec = FeatureMapSpec::new(config.d, nf)
                        .with_seed(seed)
                        .with_mode(m)
                        .with_p(config.p);
                    let map = RandomMaclaurinMap::build(&config.kernel, &spec)?;
                    (
                        feature_gram(&map.apply_batch(&points)?),
                        &dot_exact,
                        map.output_dim(),
                    )
                }
                SweepMode::Compositional => {
                    let spec = FeatureMapSpec::new(config.d, nf)
                        .with_seed(seed)
                        .with_p(config.p);
                    let map = CompositionalMap::build(&config.kernel, oracle.clone(), &spec, 1.0)?;
                    let exact = comp_exact
                        .as_ref()
                        .expect("computed for compositional modes");
                    (feature_gram(&map.apply_batch(&points)?), exact, nf)
                }
            };
            let mae = gram_mae(exact, &approx, points.len(), config.include_diagonal)?;
            Ok(GramErrorReport {
                kernel: config.kernel.to_string(),
                d: config.d,
                num_features: nf,
                mode: name,
                effective_features: effective,
                trial,
                mae,
                seconds: config.record_timings.then(|| start.elapsed().as_secs_f64()),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| {
        (a.mode.as_str(), a.num_features, a.trial).cmp(&(b.mode.as_str(), b.num_features, b.trial))
    });
    Ok(rows)
}

/// Mean and sample standard deviation of the MAE per `(kernel, mode, D)`,
/// in the order the cells first appear.
pub fn summarize(rows: &[GramErrorReport]) -> Vec<GramSummary> {
    let mut out: Vec<(GramSummary, Vec<f64>)> = Vec::new();
    for r in rows {
        let pos = out.iter().position(|(s, _)| {
            s.kernel == r.kernel && s.mode == r.mode && s.num_features == r.num_features
        });
        let pos = pos.unwrap_or_else(|| {
            out.push((
                GramSummary {
                    kernel: r.kernel.clone(),
                    d: r.d,
                    num_features: r.num_features,
                    mode: r.mode.clone(),
                    effective_features: r.effective_features,
                    trials: 0,
                    mean_mae: 0.0,
                    std_mae: 0.0,
                },
                Vec::new(),
            ));
            out.len() - 1
        });
        out[pos].1.push(r.mae);
    }
    out.into_iter()
        .map(|(mut s, v)| {
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let var = if v.len() > 1 {
                v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            s.trials = v.len();
            s.mean_mae = mean;
            s.std_mae = var.sqrt();
            s
        })
        .collect()
}

/// Features fed to the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchMode {
    Map(MapMode),
    /// Raw inputs with a constant column, `[1, x]`.
    Raw,
}

impl fmt::Display for BenchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BenchMode::Map(m) => m.fmt(f),
            BenchMode::Raw => f.write_str("raw"),
        }
    }
}

impl FromStr for BenchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "raw" | "linear" => Ok(BenchMode::Raw),
            other => Ok(BenchMode::Map(other.parse()?)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    /// Kernel spec string; `exp` without a width uses the mean pairwise
    /// training distance.
    pub kernel: String,
    /// Base oracle spec for a compositional map.
    pub base: Option<String>,
    pub num_features: usize,
    pub mode: BenchMode,
    pub p: f64,
    pub seed: u64,
    pub train_fraction: f64,
    pub norm: Norm,
    pub lambda: f64,
    pub epochs: usize,
    pub fit_intercept: bool,
    pub record_timings: bool,
    pub baseline_train_seconds: Option<f64>,
    pub baseline_test_seconds: Option<f64>,
}

impl BenchConfig {
    pub fn new(kernel: impl Into<String>, num_features: usize, mode: BenchMode) -> Self {
        let hp = Hyperparams::default();
        BenchConfig {
            kernel: kernel.into(),
            base: None,
            num_features,
            mode,
            p: 2.0,
            seed: 0,
            train_fraction: 0.6,
            norm: Norm::L2,
            lambda: hp.lambda,
            epochs: hp.epochs,
            fit_intercept: hp.fit_intercept,
            record_timings: false,
            baseline_train_seconds: None,
            baseline_test_seconds: None,
        }
    }
}

/// Outcome of one classification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub dataset: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub d: usize,
    #[serde(rename = "D")]
    pub num_features: usize,
    pub mode: String,
    pub kernel: String,
    pub n_train: usize,
    pub n_test: usize,
    pub scale: f64,
    pub accuracy: f64,
    pub train_accuracy: f64,
    pub transform_seconds: Option<f64>,
    pub train_seconds: Option<f64>,
    pub test_seconds: Option<f64>,
    pub train_speedup: Option<f64>,
    pub test_speedup: Option<f64>,
}

/// Report plus the trained model.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub report: BenchReport,
    pub model: ModelDocument,
}

enum Transform {
    Raw,
    Maclaurin(RandomMaclaurinMap),
    Compositional(CompositionalMap),
}

impl Transform {
    fn apply(&self, data: &Dataset) -> Result<Vec<Vec<f64>>> {
        match self {
            Transform::Raw => Ok(data
                .dense_rows()
                .into_iter()
                .map(|r| std::iter::once(1.0).chain(r).collect())
                .collect()),
            Transform::Maclaurin(map) => map.apply_batch(data.rows()),
            Transform::Compositional(map) => map.apply_batch(&data.dense_rows()),
        }
    }

    fn document(&self) -> Result<Option<MapDocument>> {
        match self {
            Transform::Raw => Ok(None),
            Transform::Maclaurin(map) => Ok(Some(map.to_document())),
            Transform::Compositional(map) => Ok(Some(map.to_document()?)),
        }
    }
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, start.elapsed().as_secs_f64()))
}

/// split → binarize → scale → build map → transform → train → test, each
/// error tagged with its stage.
pub fn run_pipeline(dataset: &Dataset, name: &str, config: &BenchConfig) -> Result<PipelineOutput> {
    let seed = config.seed;
    let (train_raw, test_raw) = split(dataset, config.train_fraction, derive_seed(seed, &[1]))
        .map_err(|e| e.in_stage("split"))?;
    let labels = LabelMap::fit(dataset.labels(), derive_seed(seed, &[2]))
        .map_err(|e| e.in_stage("binarize"))?;
    let (train_bin, test_bin) = (|| Ok((labels.apply(&train_raw)?, labels.apply(&test_raw)?)))()
        .map_err(|e: Error| e.in_stage("binarize"))?;
    let (train_set, test_set, scale) =
        fit_apply_scaling(&train_bin, &test_bin, config.norm).map_err(|e| e.in_stage("scale"))?;

    let transform = build_transform(dataset.dim(), &train_set, &test_set, config)
        .map_err(|e| e.in_stage("build map"))?;
    let ((z_train, z_test), transform_seconds) =
        timed(|| Ok((transform.apply(&train_set)?, transform.apply(&test_set)?)))
            .map_err(|e| e.in_stage("transform"))?;

    let hp = Hyperparams {
        lambda: config.lambda,
        epochs: config.epochs,
        seed: derive_seed(seed, &[4]),
        fit_intercept: config.fit_intercept,
    };
    let (model, train_seconds) =
        timed(|| train(&z_train, train_set.labels(), &hp)).map_err(|e| e.in_stage("train"))?;
    let ((accuracy, train_accuracy), test_seconds) = timed(|| {
        Ok((
            model.accuracy(&z_test, test_set.labels())?,
            model.accuracy(&z_train, train_set.labels())?,
        ))
    })
    .map_err(|e| e.in_stage("test"))?;

    let keep = |t: f64| config.record_timings.then_some(t);
    let speedup = |base: Option<f64>, t: f64| match (config.record_timings, base) {
        (true, Some(b)) if t > 0.0 => Some(b / t),
        _ => None,
    };
    let report = BenchReport {
        dataset: name.to_string(),
        n: dataset.len(),
        d: dataset.dim(),
        num_features: config.num_features,
        mode: config.mode.to_string(),
        kernel: transform_kernel_name(&transform, config),
        n_train: train_set.len(),
        n_test: test_set.len(),
        scale,
        accuracy,
        train_accuracy,
        transform_seconds: keep(transform_seconds),
        train_seconds: keep(train_seconds),
        test_seconds: keep(test_seconds),
        train_speedup: speedup(config.baseline_train_seconds, train_seconds),
        test_speedup: speedup(config.baseline_test_seconds, test_seconds),
    };
    let LinearModel {
        weights,
        bias,
        hyperparams,
    } = model;
    let model = ModelDocument {
        format_version: MODEL_FORMAT_VERSION,
        weights,
        bias,
        hyperparams,
        map: transform.document()?,
        scale,
        norm: config.norm,
        negative_labels: labels.negative().to_vec(),
        positive_labels: labels.positive().to_vec(),
    };
    Ok(PipelineOutput { report, model })
}

fn transform_kernel_name(transform: &Transform, config: &BenchConfig) -> String {
    match transform {
        Transform::Raw => "linear".into(),
        Transform::Maclaurin(map) => map.kernel().to_string(),
        Transform::Compositional(map) => match map.oracle().spec() {
            Some(base) => format!("{} {base}", map.outer()),
            None => config.kernel.clone(),
        },
    }
}

/// Resolves the kernel (filling in an automatic exponential width from the
/// training split) and checks the scaled data against its domain.
pub fn resolve_kernel(spec: &str, train: &Dataset, seed: u64) -> Result<MaclaurinKernel> {
    let sigma = if needs_auto_sigma(spec) {
        Some(mean_pairwise_distance(
            train.rows(),
            DISTANCE_SAMPLE,
            derive_seed(seed, &[5]),
        )?)
    } else {
        None
    };
    parse_kernel_spec(spec, sigma)
}

fn build_transform(
    dim: usize,
    train: &Dataset,
    test: &Dataset,
    config: &BenchConfig,
) -> Result<Transform> {
    let mode = match config.mode {
        BenchMode::Raw => return Ok(Transform::Raw),
        BenchMode::Map(m) => m,
    };
    let kernel = resolve_kernel(&config.kernel, train, config.seed)?;
    let spec = FeatureMapSpec::new(dim, config.num_features)
        .with_seed(derive_seed(config.seed, &[3]))
        .with_mode(mode)
        .with_p(config.p);
    if let Some(base) = &config.base {
        let oracle = parse_oracle(base, dim)?;
        let radius = train.max_norm(config.norm).max(test.max_norm(config.norm));
        return Ok(Transform::Compositional(CompositionalMap::build(
            &kernel,
            oracle,
            &spec,
            radius.max(f64::MIN_POSITIVE),
        )?));
    }
    let radius = kernel.radius();
    if radius.is_finite() {
        // |<x, y>| <= |x|_2 |y|_2 <= |x|_1 |y|_1; rescaled data whose largest
        // norm rounds to just below 1 still counts as on the boundary
        let r = train.max_norm(config.norm).max(test.max_norm(config.norm));
        if r * r >= radius * (1.0 - 1e-9) {
            return Err(Error::Domain {
                value: r * r,
                radius,
            });
        }
    }
    Ok(Transform::Maclaurin(RandomMaclaurinMap::build(
        &kernel, &spec,
    )?))
}

pub fn bench_classify(dataset: &Dataset, name: &str, config: &BenchConfig) -> Result<BenchReport> {
    Ok(run_pipeline(dataset, name, config)?.report)
}

/// Labels `sign(Σ_{i<d/2} x_i² - Σ_{i>=d/2} x_i²)` on standard Gaussian
/// inputs: separable by a quadratic form, not by any hyperplane.
pub fn synthetic_quadratic(n: usize, d: usize, seed: u64) -> Result<Dataset> {
    if d < 2 {
        return Err(Error::invalid("synthetic data needs d >= 2"));
    }
    let mut rng = seeded_rng(seed);
    let half = d / 2;
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let x: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let g: f64 = x[..half].iter().map(|v| v * v).sum::<f64>()
            - x[half..].iter().map(|v| v * v).sum::<f64>();
        labels.push(if g >= 0.0 { 1.0 } else { -1.0 });
        rows.push(x);
    }
    Dataset::from_dense(labels, &rows).map(|ds| ds.with_dim(d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    /// `.json` selects JSON, anything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => ReportFormat::Json,
            _ => ReportFormat::Csv,
        }
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(Error::invalid(format!("unknown report format `{s}`"))),
        }
    }
}

/// Row types with a fixed CSV header.
pub trait Report: Serialize + DeserializeOwned {
    const HEADER: &'static [&'static str];
}

impl Report for GramErrorReport {
    const HEADER: &'static [&'static str] = &[
        "kernel",
        "d",
        "D",
        "mode",
        "effective_features",
        "trial",
        "mae",
        "seconds",
    ];
}

impl Report for GramSummary {
    const HEADER: &'static [&'static str] = &[
        "kernel",
        "d",
        "D",
        "mode",
        "effective_features",
        "trials",
        "mean_mae",
        "std_mae",
    ];
}

impl Report for BenchReport {
    const HEADER: &'static [&'static str] = &[
        "dataset",
        "N",
        "d",
        "D",
        "mode",
        "kernel",
        "n_train",
        "n_test",
        "scale",
        "accuracy",
        "train_accuracy",
        "transform_seconds",
        "train_seconds",
        "test_seconds",
        "train_speedup",
        "test_speedup",
    ];
}

pub fn write_reports<T: Report, W: Write>(
    reports: &[T],
    format: ReportFormat,
    out: W,
) -> Result<()> {
    match format {
        ReportFormat::Csv => {
            let mut w = csv::WriterBuilder::new()
                .has_headers(false)
                .from_writer(out);
            w.write_record(T::HEADER)?;
            for r in reports {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        ReportFormat::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, reports)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

pub fn write_report_file<T: Report>(
    reports: &[T],
    path: &Path,
    format: ReportFormat,
) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut buf = std::io::BufWriter::new(file);
    write_reports(reports, format, &mut buf)?;
    buf.flush()?;
    Ok(())
}

pub fn read_reports_json<T: Report>(text: &str) -> Result<Vec<T>> {
    Ok(serde_json::from_str(text)?)
}

pub fn read_reports_csv<T: Report, R: std::io::Read>(input: R) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| Ok(row?)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly2() -> MaclaurinKernel {
        MaclaurinKernel::polynomial(2, 1.0).unwrap()
    }

    #[test]
    fn exact_stub_has_zero_error() {
        let pts = unit_ball_points(20, 4, Norm::L2, 1);
        let k = poly2();
        let mae = gram_error(
            |x, y| k.kernel_value(x, y),
            Approximation::Exact,
            &pts,
            true,
        )
        .unwrap();
        assert_eq!(mae, 0.0);
    }

    #[test]
    fn single_point_error() {
        let pts = vec![vec![0.3, -0.2, 0.1]];
        let k = poly2();
        let map = RandomMaclaurinMap::build(&k, &FeatureMapSpec::new(3, 50).with_seed(2)).unwrap();
        let z = map.apply(&pts[0]).unwrap();
        let zz: f64 = z.iter().map(|v| v * v).sum();
        let expect = (zz - k.kernel_value(&pts[0], &pts[0]).unwrap()).abs();
        let mae = gram_error(
            |x, y| k.kernel_value(x, y),
            Approximation::Maclaurin(&map),
            &pts,
            true,
        )
        .unwrap();
        assert_eq!(mae, expect);
    }

    #[test]
    fn domain_errors_propagate() {
        let pts = vec![vec![1.0, 0.0]];
        let k = MaclaurinKernel::vovk_infinite();
        assert!(matches!(
            gram_error(
                |x, y| k.kernel_value(x, y),
                Approximation::Exact,
                &pts,
                true
            ),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn sweep_shape_and_order() {
        let mut cfg = SweepConfig::new(poly2(), 4, vec![10, 50, 200, 1000, 5000]);
        cfg.points = 10;
        cfg.modes = vec![SweepMode::Map(MapMode::Plain), SweepMode::Map(MapMode::H01)];
        let rows = sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 50);
        assert_eq!(rows.iter().filter(|r| r.mode == "h01").count(), 25);
        assert!(rows
            .iter()
            .filter(|r| r.mode == "h01")
            .all(|r| r.effective_features == r.num_features + 5));
        let keys: Vec<_> = rows
            .iter()
            .map(|r| (r.mode.clone(), r.num_features, r.trial))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert!(rows.iter().all(|r| r.seconds.is_none()));
        let summary = summarize(&rows);
        assert_eq!(summary.len(), 10);
        assert!(summary.iter().all(|s| s.trials == 5));
        assert_eq!(sweep(&cfg).unwrap(), rows);
    }

    #[test]
    fn csv_output() {
        let mut buf = Vec::new();
        write_reports::<GramErrorReport, _>(&[], ReportFormat::Csv, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "kernel,d,D,mode,effective_features,trial,mae,seconds\n"
        );
        let row = GramErrorReport {
            kernel: "poly:q=10,r=1".into(),
            d: 10,
            num_features: 50,
            mode: "plain".into(),
            effective_features: 50,
            trial: 0,
            mae: 0.25,
            seconds: None,
        };
        let mut buf = Vec::new();
        write_reports(std::slice::from_ref(&row), ReportFormat::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(
            text.lines().nth(1).unwrap(),
            "\"poly:q=10,r=1\",10,50,plain,50,0,0.25,"
        );
        let back: Vec<GramErrorReport> = read_reports_csv(&buf[..]).unwrap();
        assert_eq!(back, vec![row.clone()]);
        let mut json = Vec::new();
        write_reports(std::slice::from_ref(&row), ReportFormat::Json, &mut json).unwrap();
        let back: Vec<GramErrorReport> =
            read_reports_json(std::str::from_utf8(&json).unwrap()).unwrap();
        assert_eq!(back, vec![row]);
    }

    #[test]
    fn h01_without_random_features_equals_raw_training() {
        let data = synthetic_quadratic(300, 4, 3).unwrap();
        let mut raw = BenchConfig::new("raw", 0, BenchMode::Raw);
        raw.epochs = 3;
        let mut h01 = BenchConfig::new("coeffs:[1,1]", 0, BenchMode::Map(MapMode::H01));
        h01.epochs = 3;
        let a = run_pipeline(&data, "syn", &raw).unwrap();
        let b = run_pipeline(&data, "syn", &h01).unwrap();
        assert_eq!(a.model.weights, b.model.weights);
        assert_eq!(a.report.accuracy, b.report.accuracy);
    }

    #[test]
    fn stage_labels() {
        let data = synthetic_quadratic(50, 4, 3).unwrap();
        let cfg = BenchConfig::new("vovk-inf", 10, BenchMode::Map(MapMode::Plain));
        let err = bench_classify(&data, "syn", &cfg).unwrap_err();
        assert!(err.to_string().starts_with("build map:"));
        assert_eq!(err.exit_code(), 3);
        let one = Dataset::from_dense(vec![1.0; 5], &vec![vec![1.0, 2.0]; 5]).unwrap();
        let err = bench_classify(&one, "one", &cfg).unwrap_err();
        assert!(err.to_string().starts_with("binarize:"));
    }
}
