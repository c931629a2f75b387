//! Sliding-window evaluation: fit every model on each window's train slice,
//! forecast its test slice one step ahead from observed inputs, score, and
//! average over windows.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use chrono::NaiveDateTime;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::dataio::{self, DatasetSchema, MultivariateSeries, SplitSpec, WindowRange};
use crate::embedding::{EmbeddingConfig, EmbeddingKind, EmbeddingModel};
use crate::error::{Error, Result};
use crate::fuzzy::PartitionConfig;
use crate::metrics::{skill_score, MetricReport};
use crate::model::{GammaFts, ModelConfig};
use crate::scalar::Scalar;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "GAMMA_FTS_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Persistence,
    PcaWmvfts,
    AeWmvfts,
    SomWmvfts,
}

impl ModelKind {
    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Persistence => "Persistence",
            ModelKind::PcaWmvfts => "PCA-WMVFTS",
            ModelKind::AeWmvfts => "AE-WMVFTS",
            ModelKind::SomWmvfts => "SOM-WMVFTS",
        }
    }

    pub fn embedding(self) -> Option<EmbeddingKind> {
        match self {
            ModelKind::Persistence => None,
            ModelKind::PcaWmvfts => Some(EmbeddingKind::Pca),
            ModelKind::AeWmvfts => Some(EmbeddingKind::Ae),
            ModelKind::SomWmvfts => Some(EmbeddingKind::Som),
        }
    }

    pub fn from_embedding(kind: EmbeddingKind) -> Self {
        match kind {
            EmbeddingKind::Pca => ModelKind::PcaWmvfts,
            EmbeddingKind::Ae => ModelKind::AeWmvfts,
            EmbeddingKind::Som => ModelKind::SomWmvfts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    pub path: Option<PathBuf>,
    /// Built-in layout: `aec`, `hpc`, `shwi` or `cleaned`.
    pub schema: String,
    /// Overrides the schema's target column.
    pub target: Option<String>,
    /// Resampling resolution such as `30m`; `None` keeps the native rate.
    pub resolution: Option<String>,
    pub drop_missing: bool,
    /// Dataset label used to look up published reference values.
    pub name: Option<String>,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            path: None,
            schema: "cleaned".into(),
            target: None,
            resolution: None,
            drop_missing: true,
            name: None,
        }
    }
}

impl DatasetConfig {
    pub fn schema(&self) -> Result<DatasetSchema> {
        let mut schema = DatasetSchema::builtin(&self.schema)?;
        if let Some(t) = &self.target {
            schema.target = Some(t.clone());
        }
        Ok(schema)
    }

    pub fn label(&self) -> &str {
        self.name.as_deref().unwrap_or(&self.schema)
    }
}

/// Loads, cleans and optionally resamples a dataset.
pub fn load_dataset<F: Scalar>(config: &DatasetConfig) -> Result<(MultivariateSeries<F>, usize)> {
    let path = config
        .path
        .as_ref()
        .ok_or_else(|| Error::Config("dataset.path is not set".into()))?;
    let series = dataio::load_csv(path, &config.schema()?)?;
    let (series, removed) = if config.drop_missing {
        dataio::drop_missing(&series)
    } else {
        (series, 0)
    };
    let series = match &config.resolution {
        Some(r) => dataio::resample(&series, dataio::parse_resolution(r)?)?,
        None => series,
    };
    Ok((series, removed))
}

/// A complete experiment description. In JSON, keys may be nested objects or
/// flat dotted paths such as `"partition.kappa": 50`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetConfig,
    pub embedding: EmbeddingConfig,
    pub partition: PartitionConfig,
    pub split: SplitSpec,
    /// Models to evaluate; the fuzzy models use `embedding` with their own
    /// projection kind.
    pub models: Vec<ModelKind>,
    /// Fit each embedding once on the whole series instead of per window.
    /// This leaks test information into the projection.
    pub global_fit: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetConfig::default(),
            embedding: EmbeddingConfig::default(),
            partition: PartitionConfig::default(),
            split: SplitSpec::default(),
            models: vec![ModelKind::PcaWmvfts, ModelKind::Persistence],
            global_fit: false,
        }
    }
}

fn set_path(root: &mut Map<String, Value>, path: &str, value: Value) -> Result<()> {
    let mut parts = path.split('.').peekable();
    let mut node = root;
    while let Some(part) = parts.next() {
        if part.is_empty() {
            return Err(Error::Config(format!("malformed key `{path}`")));
        }
        if parts.peek().is_none() {
            node.insert(part.to_string(), value);
            return Ok(());
        }
        let child = node.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()));
        node = child
            .as_object_mut()
            .ok_or_else(|| Error::Config(format!("key `{path}` descends into a non-object")))?;
    }
    Ok(())
}

/// Expands dotted keys into nested objects, recursively.
pub fn unflatten(value: Value) -> Result<Value> {
    match value {
        Value::Object(map) => {
            let mut out = Map::new();
            for (k, v) in map {
                set_path(&mut out, &k, unflatten(v)?)?;
            }
            Ok(Value::Object(out))
        }
        other => Ok(other),
    }
}

impl ExperimentConfig {
    pub fn from_value(value: Value) -> Result<Self> {
        let value = unflatten(value)?;
        serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_value(value)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    /// Applies `key=value` overrides. Values are parsed as JSON when
    /// possible and taken as strings otherwise.
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<Self> {
        if overrides.is_empty() {
            return Ok(self.clone());
        }
        let mut root = match serde_json::to_value(self)? {
            Value::Object(m) => m,
            _ => unreachable!("config serializes to an object"),
        };
        for o in overrides {
            let o = o.as_ref();
            let (key, raw) = o
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override `{o}` is not key=value")))?;
            let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
            set_path(&mut root, key.trim(), value)?;
        }
        Self::from_value(Value::Object(root))
    }

    pub fn validate(&self) -> Result<()> {
        if self.embedding.k == 0 {
            return Err(Error::Config("embedding.k must be at least 1".into()));
        }
        if self.partition.kappa < 2 {
            return Err(Error::Config("partition.kappa must be at least 2".into()));
        }
        self.split.validate().map_err(|e| Error::Config(e.to_string()))?;
        let mut seen = Vec::new();
        for m in &self.models {
            if seen.contains(m) {
                return Err(Error::Config(format!("model `{}` listed twice", m.label())));
            }
            seen.push(*m);
            if m.embedding().is_some_and(EmbeddingKind::needs_seed) && self.embedding.seed.is_none() {
                return Err(Error::Config(format!("{} requires embedding.seed", m.label())));
            }
        }
        Ok(())
    }

    /// Model configuration for one fuzzy model.
    pub fn model_config(&self, kind: EmbeddingKind) -> ModelConfig {
        ModelConfig {
            embedding: EmbeddingConfig {
                kind,
                ..self.embedding.clone()
            },
            partition: self.partition,
        }
    }
}

/// Naive forecast `y(t) = y(t - 1)` for `t = 1 .. T - 1`.
pub fn persistence_forecast<F: Scalar>(series: &MultivariateSeries<F>) -> Result<Vec<F>> {
    if series.len() < 2 {
        return Err(Error::Argument(format!(
            "persistence needs at least 2 rows, got {}",
            series.len()
        )));
    }
    let mut y = series.target_values();
    y.pop();
    Ok(y)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowResult {
    pub index: usize,
    pub train_rows: usize,
    pub test_rows: usize,
    pub test_start: Option<NaiveDateTime>,
    pub metrics: Option<MetricReport>,
    /// Why the window was excluded from the aggregate.
    pub skipped: Option<String>,
    pub fallback_count: usize,
    pub rule_count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub model: ModelKind,
    pub name: String,
    pub windows: Vec<WindowResult>,
    /// Mean of the per-window metrics over scored windows.
    pub aggregate: Option<MetricReport>,
    pub skipped_windows: usize,
    pub fallback_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillEntry {
    pub model: String,
    pub reference: String,
    /// `1 - rmse(model) / rmse(reference)` on aggregate RMSE.
    pub rmse_skill: Option<f64>,
}

/// A published result kept alongside measured numbers for comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceTarget {
    pub dataset: String,
    pub model: String,
    pub k: Option<usize>,
    pub kappa: Option<usize>,
    pub rmse: f64,
    pub mae: Option<f64>,
    pub mape: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestReport {
    pub config: ExperimentConfig,
    pub dataset_rows: usize,
    pub window_count: usize,
    pub models: Vec<ModelReport>,
    pub skill: Vec<SkillEntry>,
    pub reference_targets: Vec<ReferenceTarget>,
}

impl BacktestReport {
    pub fn model(&self, kind: ModelKind) -> Option<&ModelReport> {
        self.models.iter().find(|m| m.model == kind)
    }

    pub fn skipped_windows(&self) -> usize {
        self.models.iter().map(|m| m.skipped_windows).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub model: String,
    pub window: usize,
    pub timestamp: NaiveDateTime,
    pub actual: f64,
    pub predicted: f64,
    pub fallback: bool,
}

/// Wall-clock measurements, kept apart from the report so that reports
/// stay byte-identical across runs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_seconds: f64,
    /// Sum over windows of fit plus forecast time, per model.
    pub model_seconds: BTreeMap<String, f64>,
}

#[derive(Debug, Clone)]
pub struct BacktestOutput {
    pub report: BacktestReport,
    pub predictions: Vec<PredictionRow>,
    pub timings: Timings,
}

/// Published values for the three datasets at `K = 2`, `kappa = 50`, and the
/// `K x kappa` grid on the appliances data.
pub fn reference_targets(dataset: &str) -> Vec<ReferenceTarget> {
    let row = |model: &str, k: Option<usize>, kappa: Option<usize>, rmse: f64, mae: f64, mape: f64| ReferenceTarget {
        dataset: dataset.to_string(),
        model: model.to_string(),
        k,
        kappa,
        rmse,
        mae: Some(mae),
        mape: Some(mape),
    };
    let fts = |m: &str, rmse, mae, mape| row(m, Some(2), Some(50), rmse, mae, mape);
    match dataset {
        "aec" => {
            let mut v = vec![
                row("Persistence", None, None, 64.749, 29.107, 24.828),
                fts("PCA-WMVFTS", 5.456, 2.05, 1.758),
                fts("AE-WMVFTS", 5.516, 2.493, 2.405),
                fts("SOM-WMVFTS", 18.292, 7.498, 4.503),
            ];
            // PCA-WMVFTS grid: (K, kappa, RMSE, MAE, MAPE)
            let grid = [
                (2, 10, 28.957, 20.513, 29.81),
                (2, 20, 17.095, 8.683, 11.233),
                (2, 30, 9.859, 4.326, 5.212),
                (2, 40, 8.585, 2.897, 3.163),
                (2, 50, 5.457, 2.05, 1.758),
                (3, 10, 16.988, 9.556, 14.354),
                (3, 20, 4.117, 2.158, 2.166),
                (3, 30, 2.06, 1.316, 0.671),
                (3, 40, 0.996, 1.072, 0.286),
                (3, 50, 0.348, 0.962, 0.107),
            ];
            v.extend(grid.iter().map(|&(k, kappa, r, a, p)| row("PCA-WMVFTS", Some(k), Some(kappa), r, a, p)));
            v
        }
        "hpc" => vec![
            row("Persistence", None, None, 0.898, 0.514, 63.793),
            fts("PCA-WMVFTS", 0.366, 0.204, 37.303),
            fts("AE-WMVFTS", 0.304, 0.206, 46.722),
            fts("SOM-WMVFTS", 0.415, 0.256, 48.397),
        ],
        "shwi" => vec![
            row("Persistence", None, None, 0.846, 0.468, 251.68),
            fts("PCA-WMVFTS", 0.169, 0.062, 17.823),
            fts("AE-WMVFTS", 0.221, 0.106, 32.536),
            fts("SOM-WMVFTS", 0.389, 0.211, 92.529),
        ],
        _ => Vec::new(),
    }
}

struct ModelWindow {
    result: WindowResult,
    predictions: Vec<PredictionRow>,
    seconds: f64,
}

fn skipped(range: &WindowRange, test_start: Option<NaiveDateTime>, reason: String) -> WindowResult {
    WindowResult {
        index: range.index,
        train_rows: range.train.len(),
        test_rows: range.test.len(),
        test_start,
        metrics: None,
        skipped: Some(reason),
        fallback_count: 0,
        rule_count: None,
    }
}

/// Whether an error marks a window as unusable rather than failing the run.
fn is_degenerate(e: &Error) -> bool {
    matches!(e, Error::DegenerateUod { .. } | Error::UndefinedMetric(_))
}

fn run_model_window<F: Scalar>(
    config: &ExperimentConfig,
    model: ModelKind,
    global: Option<&EmbeddingModel<F>>,
    range: &WindowRange,
    train: &MultivariateSeries<F>,
    test: &MultivariateSeries<F>,
) -> Result<ModelWindow> {
    let start = Instant::now();
    let test_start = test.timestamps().first().copied();
    let skip = |reason: String| ModelWindow {
        result: skipped(range, test_start, reason),
        predictions: Vec::new(),
        seconds: 0.0,
    };
    if test.len() < 2 {
        return Ok(skip(format!("test slice has {} row(s); at least 2 are needed", test.len())));
    }
    let target = train.target_values();
    if target.iter().all(|&v| v == target[0]) {
        return Ok(skip("constant target in training slice".into()));
    }

    let (predicted, fallback, rule_count): (Vec<F>, Vec<bool>, Option<usize>) = match model.embedding() {
        None => {
            let p = persistence_forecast(test)?;
            let n = p.len();
            (p, vec![false; n], None)
        }
        Some(kind) => {
            let mc = config.model_config(kind);
            let fitted = match global {
                Some(e) => GammaFts::fit_with_embedding(train, e.clone(), &mc.partition),
                None => GammaFts::fit(train, &mc),
            };
            let fitted = match fitted {
                Ok(m) => m,
                Err(e) if is_degenerate(&e) => return Ok(skip(e.to_string())),
                Err(e) => return Err(e),
            };
            let f = fitted.forecast_series(test)?;
            (
                f.iter().map(|x| x.value).collect(),
                f.iter().map(|x| x.fallback_used).collect(),
                Some(fitted.rule_count()),
            )
        }
    };

    let actual = &test.target_values()[1..];
    let metrics = MetricReport::compute(actual, &predicted)?;
    let predictions = test.timestamps()[1..]
        .iter()
        .zip(actual.iter().zip(&predicted).zip(&fallback))
        .map(|(&timestamp, ((&a, &p), &fb))| PredictionRow {
            model: model.label().to_string(),
            window: range.index,
            timestamp,
            actual: a.as_f64(),
            predicted: p.as_f64(),
            fallback: fb,
        })
        .collect();
    Ok(ModelWindow {
        result: WindowResult {
            index: range.index,
            train_rows: train.len(),
            test_rows: test.len(),
            test_start,
            metrics: Some(metrics),
            skipped: None,
            fallback_count: fallback.iter().filter(|&&b| b).count(),
            rule_count,
        },
        predictions,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Fits one fuzzy model on the train rows of `range`. Nothing outside
/// `range.train` is read.
pub fn fit_window<F: Scalar>(
    config: &ExperimentConfig,
    kind: EmbeddingKind,
    series: &MultivariateSeries<F>,
    range: &WindowRange,
) -> Result<GammaFts<F>> {
    GammaFts::fit(&series.slice(range.train.clone()), &config.model_config(kind))
}

/// Evaluates the listed models on one window.
pub fn run_window<F: Scalar>(
    config: &ExperimentConfig,
    range: &WindowRange,
    train: &MultivariateSeries<F>,
    test: &MultivariateSeries<F>,
) -> Result<Vec<WindowResult>> {
    config
        .models
        .iter()
        .map(|&m| run_model_window(config, m, None, range, train, test).map(|w| w.result))
        .collect()
}

fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let threads = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok());
    match threads.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

/// Runs the configured models over every window of an in-memory series.
pub fn run_on_series<F: Scalar>(config: &ExperimentConfig, series: &MultivariateSeries<F>) -> Result<BacktestOutput> {
    config.validate()?;
    let start = Instant::now();
    let ranges = config.split.ranges(series.len())?;

    let mut globals: BTreeMap<ModelKind, EmbeddingModel<F>> = BTreeMap::new();
    if config.global_fit {
        for &m in &config.models {
            if let Some(kind) = m.embedding() {
                globals.insert(m, EmbeddingModel::fit(series, &config.model_config(kind).embedding)?);
            }
        }
    }

    let jobs: Vec<(usize, ModelKind)> = (0..ranges.len())
        .flat_map(|w| config.models.iter().map(move |&m| (w, m)))
        .collect();
    let outcomes: Vec<ModelWindow> = with_pool(|| {
        jobs.par_iter()
            .map(|&(w, m)| {
                let r = &ranges[w];
                let train = series.slice(r.train.clone());
                let test = series.slice(r.test.clone());
                run_model_window(config, m, globals.get(&m), r, &train, &test)
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut timings = Timings::default();
    let mut predictions = Vec::new();
    let mut per_model: Vec<Vec<WindowResult>> = vec![Vec::new(); config.models.len()];
    for (outcome, &(_, m)) in outcomes.into_iter().zip(&jobs) {
        let slot = config.models.iter().position(|&x| x == m).expect("job model is configured");
        *timings.model_seconds.entry(m.label().to_string()).or_insert(0.0) += outcome.seconds;
        predictions.extend(outcome.predictions);
        per_model[slot].push(outcome.result);
    }
    // group plot rows by model, then window
    let order = |label: &str| config.models.iter().position(|m| m.label() == label);
    predictions.sort_by(|a, b| order(&a.model).cmp(&order(&b.model)).then(a.window.cmp(&b.window)));

    let models: Vec<ModelReport> = config
        .models
        .iter()
        .zip(per_model)
        .map(|(&m, windows)| {
            let scored: Vec<MetricReport> = windows.iter().filter_map(|w| w.metrics.clone()).collect();
            ModelReport {
                model: m,
                name: m.label().to_string(),
                aggregate: MetricReport::mean(&scored),
                skipped_windows: windows.iter().filter(|w| w.skipped.is_some()).count(),
                fallback_count: windows.iter().map(|w| w.fallback_count).sum(),
                windows,
            }
        })
        .collect();

    let mut skill = Vec::new();
    for m in &models {
        for r in &models {
            let rmse_skill = match (&m.aggregate, &r.aggregate) {
                (Some(a), Some(b)) => skill_score(a.rmse, b.rmse).ok(),
                _ => None,
            };
            skill.push(SkillEntry {
                model: m.name.clone(),
                reference: r.name.clone(),
                rmse_skill,
            });
        }
    }

    timings.total_seconds = start.elapsed().as_secs_f64();
    Ok(BacktestOutput {
        report: BacktestReport {
            config: config.clone(),
            dataset_rows: series.len(),
            window_count: ranges.len(),
            models,
            skill,
            reference_targets: reference_targets(config.dataset.label()),
        },
        predictions,
        timings,
    })
}

/// Loads the configured dataset and runs the backtest in `f64`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<BacktestOutput> {
    config.validate()?;
    let (series, _) = load_dataset::<f64>(&config.dataset)?;
    run_on_series(config, &series)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub k: usize,
    pub kappa: usize,
    pub model: String,
    pub aggregate: Option<MetricReport>,
    pub skipped_windows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub config: ExperimentConfig,
    pub ks: Vec<usize>,
    pub kappas: Vec<usize>,
    pub cells: Vec<SweepCell>,
    pub reference_targets: Vec<ReferenceTarget>,
}

impl SweepReport {
    pub fn cell(&self, model: ModelKind, k: usize, kappa: usize) -> Option<&SweepCell> {
        self.cells
            .iter()
            .find(|c| c.model == model.label() && c.k == k && c.kappa == kappa)
    }
}

/// Evaluates the fuzzy models over the `K x kappa` grid, K-major.
pub fn sweep_on_series<F: Scalar>(
    config: &ExperimentConfig,
    series: &MultivariateSeries<F>,
    ks: &[usize],
    kappas: &[usize],
) -> Result<SweepReport> {
    let mut cells = Vec::new();
    for &k in ks {
        for &kappa in kappas {
            let mut c = config.clone();
            c.embedding.k = k;
            c.partition.kappa = kappa;
            c.models.retain(|m| m.embedding().is_some());
            let out = run_on_series(&c, series)?;
            cells.extend(out.report.models.into_iter().map(|m| SweepCell {
                k,
                kappa,
                model: m.name,
                aggregate: m.aggregate,
                skipped_windows: m.skipped_windows,
            }));
        }
    }
    Ok(SweepReport {
        config: config.clone(),
        ks: ks.to_vec(),
        kappas: kappas.to_vec(),
        cells,
        reference_targets: reference_targets(config.dataset.label()),
    })
}

pub fn sweep(config: &ExperimentConfig, ks: &[usize], kappas: &[usize]) -> Result<SweepReport> {
    config.validate()?;
    let (series, _) = load_dataset::<f64>(&config.dataset)?;
    sweep_on_series(config, &series, ks, kappas)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.3}")).unwrap_or_else(|| "-".into())
}

/// Aggregate table, one row per model.
pub fn format_table(report: &BacktestReport) -> String {
    let mut out = format!(
        "{:<14} {:>10} {:>10} {:>10} {:>10} {:>8}\n",
        "Model", "RMSE", "MAE", "MAPE", "SMAPE", "Skipped"
    );
    for m in &report.models {
        let a = m.aggregate.as_ref();
        let _ = writeln!(
            out,
            "{:<14} {:>10} {:>10} {:>10} {:>10} {:>8}",
            m.name,
            fmt_opt(a.map(|x| x.rmse)),
            fmt_opt(a.map(|x| x.mae)),
            fmt_opt(a.and_then(|x| x.mape)),
            fmt_opt(a.map(|x| x.smape)),
            m.skipped_windows
        );
    }
    out
}

/// Grid table with one row per `(model, K, kappa)`.
pub fn format_sweep_table(report: &SweepReport) -> String {
    let mut out = format!(
        "{:<14} {:>4} {:>4} {:>10} {:>10} {:>10} {:>10}\n",
        "Model", "DIM", "FS", "RMSE", "MAE", "MAPE", "SMAPE"
    );
    for c in &report.cells {
        let a = c.aggregate.as_ref();
        let _ = writeln!(
            out,
            "{:<14} {:>4} {:>4} {:>10} {:>10} {:>10} {:>10}",
            c.model,
            c.k,
            c.kappa,
            fmt_opt(a.map(|x| x.rmse)),
            fmt_opt(a.map(|x| x.mae)),
            fmt_opt(a.and_then(|x| x.mape)),
            fmt_opt(a.map(|x| x.smape)),
        );
    }
    out
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(f))
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes `report.json`, `windows.csv`, `plot_<model>.csv` and
/// `timings.json` into `dir`.
pub fn write_outputs(dir: impl AsRef<Path>, output: &BacktestOutput) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_file(&dir.join("report.json"), serde_json::to_string_pretty(&output.report)?.as_bytes())?;
    write_file(&dir.join("timings.json"), serde_json::to_string_pretty(&output.timings)?.as_bytes())?;

    let mut w = csv_writer(&dir.join("windows.csv"))?;
    w.write_record([
        "model", "window", "train_rows", "test_rows", "n", "rmse", "mae", "mape", "smape", "mape_skipped", "fallback_count",
        "rule_count", "skipped",
    ])?;
    for m in &output.report.models {
        for win in &m.windows {
            let met = win.metrics.as_ref();
            w.write_record([
                m.name.clone(),
                win.index.to_string(),
                win.train_rows.to_string(),
                win.test_rows.to_string(),
                met.map(|x| x.n.to_string()).unwrap_or_default(),
                opt_cell(met.map(|x| x.rmse)),
                opt_cell(met.map(|x| x.mae)),
                opt_cell(met.and_then(|x| x.mape)),
                opt_cell(met.map(|x| x.smape)),
                met.map(|x| x.mape_skipped.to_string()).unwrap_or_default(),
                win.fallback_count.to_string(),
                win.rule_count.map(|x| x.to_string()).unwrap_or_default(),
                win.skipped.clone().unwrap_or_default(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(dir.join("windows.csv"), e))?;

    for m in &output.report.models {
        let path = dir.join(format!("plot_{}.csv", m.name.to_lowercase()));
        let mut w = csv_writer(&path)?;
        w.write_record(["window", "timestamp", "actual", "predicted", "fallback"])?;
        for p in output.predictions.iter().filter(|p| p.model == m.name) {
            w.write_record([
                p.window.to_string(),
                p.timestamp.format(dataio::ISO_FORMAT).to_string(),
                p.actual.to_string(),
                p.predicted.to_string(),
                p.fallback.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

/// Writes `sweep.json` and a flat `sweep.csv` into `dir`.
pub fn write_sweep_outputs(dir: impl AsRef<Path>, report: &SweepReport) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_file(&dir.join("sweep.json"), serde_json::to_string_pretty(report)?.as_bytes())?;
    let path = dir.join("sweep.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["model", "k", "kappa", "rmse", "mae", "mape", "smape", "skipped_windows"])?;
    for c in &report.cells {
        let a = c.aggregate.as_ref();
        w.write_record([
            c.model.clone(),
            c.k.to_string(),
            c.kappa.to_string(),
            opt_cell(a.map(|x| x.rmse)),
            opt_cell(a.map(|x| x.mae)),
            opt_cell(a.and_then(|x| x.mape)),
            opt_cell(a.map(|x| x.smape)),
            c.skipped_windows.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))
}
