//! Benchmarks on UCR train/test splits and stability sweeps on synthetic
//! data.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use fif_core::rng::derive_seed;
use fif_core::{auc, DictionarySpec, FunctionalDataset, HeightLimit, InnerProduct, MultiCurve};
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::config::{parse_dictionary, parse_height_limit, DictSize, Method, RunConfig};
use crate::error::{Error, Result};
use crate::io::load_ucr;
use crate::model::Fitted;

/// Class mapping and anomaly counts of one UCR dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UcrPreset {
    pub name: &'static str,
    /// Discretization points.
    pub p: usize,
    pub normal: &'static [i64],
    pub anomaly: &'static [i64],
    /// Anomalies kept in each split, counted from the top of the file.
    pub train_anomalies: usize,
    pub test_anomalies: usize,
    /// Published AUC for [`TableMethod::ALL`], in that order.
    pub reference_auc: [f64; 4],
}

const fn preset(
    name: &'static str,
    p: usize,
    train_anomalies: usize,
    test_anomalies: usize,
    normal: &'static [i64],
    anomaly: &'static [i64],
    reference_auc: [f64; 4],
) -> UcrPreset {
    UcrPreset {
        name,
        p,
        normal,
        anomaly,
        train_anomalies,
        test_anomalies,
        reference_auc,
    }
}

pub const UCR_PRESETS: [UcrPreset; 13] = [
    preset("Chinatown", 24, 4, 95, &[2], &[1], [0.93, 0.82, 0.74, 0.77]),
    preset("Coffee", 286, 5, 6, &[1], &[0], [0.76, 0.87, 0.73, 0.77]),
    preset("ECGFiveDays", 136, 2, 53, &[1], &[2], [0.78, 0.75, 0.81, 0.56]),
    preset("ECG200", 96, 31, 36, &[1], &[-1], [0.86, 0.88, 0.88, 0.87]),
    preset("HandOutlines", 2709, 362, 133, &[1], &[0], [0.73, 0.76, 0.73, 0.72]),
    preset("SonyAIBORobotSurface1", 70, 6, 343, &[2], &[1], [0.89, 0.80, 0.85, 0.83]),
    preset("SonyAIBORobotSurface2", 65, 4, 365, &[2], &[1], [0.77, 0.75, 0.79, 0.92]),
    preset("StarLightCurves", 1024, 100, 3482, &[3], &[1, 2], [0.82, 0.81, 0.76, 0.86]),
    preset("TwoLeadECG", 82, 2, 570, &[1], &[2], [0.71, 0.61, 0.61, 0.56]),
    preset("Yoga", 426, 10, 1393, &[2], &[1], [0.62, 0.54, 0.60, 0.58]),
    preset("EOGHorizontalSignal", 1250, 10, 30, &[5], &[6], [0.72, 0.76, 0.81, 0.74]),
    preset("CinCECGTorso", 1639, 4, 345, &[3], &[4], [0.70, 0.92, 0.86, 0.43]),
    preset("ECG5000", 140, 31, 283, &[1], &[3, 4, 5], [0.93, 0.98, 0.98, 0.95]),
];

/// Looks a preset up by name, ignoring case. Short names used in the
/// literature (`CinECGTorso`, `SonyRobotAI1`, ...) are accepted.
pub fn find_preset(name: &str) -> Option<&'static UcrPreset> {
    let alias = match name.to_ascii_lowercase().as_str() {
        "cinecgtorso" => "cincecgtorso",
        "sonyrobotai1" => "sonyaiborobotsurface1",
        "sonyrobotai2" => "sonyaiborobotsurface2",
        "eoghorizontal" => "eoghorizontalsignal",
        other => return UCR_PRESETS.iter().find(|p| p.name.eq_ignore_ascii_case(other)),
    };
    UCR_PRESETS.iter().find(|p| p.name.eq_ignore_ascii_case(alias))
}

impl UcrPreset {
    /// `DIR/NAME/NAME_TRAIN.tsv` and `DIR/NAME/NAME_TEST.tsv`.
    pub fn paths(&self, dir: &Path) -> (PathBuf, PathBuf) {
        let base = dir.join(self.name);
        (
            base.join(format!("{}_TRAIN.tsv", self.name)),
            base.join(format!("{}_TEST.tsv", self.name)),
        )
    }
}

/// The four FIF columns of the published benchmark table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableMethod {
    /// Dyadic indicators, L2.
    DiL2,
    /// Cosines, Sobolev product (`alpha = 0.5`).
    CosSob,
    /// Cosines, `alpha = 1`.
    CosL2,
    /// Self-data, L2.
    SelfL2,
}

impl TableMethod {
    pub const ALL: [TableMethod; 4] = [Self::DiL2, Self::CosSob, Self::CosL2, Self::SelfL2];

    pub fn name(self) -> &'static str {
        match self {
            Self::DiL2 => "di_l2",
            Self::CosSob => "cos_sob",
            Self::CosL2 => "cos_l2",
            Self::SelfL2 => "self_l2",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown benchmark method {s:?}")))
    }

    /// `base` with this method's dictionary and inner product.
    pub fn apply(self, base: &RunConfig) -> RunConfig {
        let (dictionary, ip) = match self {
            Self::DiL2 => (DictionarySpec::Dyadic { levels: None }, InnerProduct::L2),
            Self::CosSob => (DictionarySpec::cosine(None), InnerProduct::Combined { alpha: 0.5 }),
            Self::CosL2 => (DictionarySpec::cosine(None), InnerProduct::Combined { alpha: 1.0 }),
            Self::SelfL2 => (DictionarySpec::SelfData, InnerProduct::L2),
        };
        RunConfig {
            method: Method::Fif,
            dictionary,
            inner_product: ip.into(),
            ..base.clone()
        }
    }
}

/// One dataset, one method, several seeds.
#[derive(Debug, Clone)]
pub struct BenchmarkTask {
    pub dataset: String,
    pub method: String,
    pub train_path: PathBuf,
    pub test_path: PathBuf,
    pub normal_labels: Vec<i64>,
    pub anomaly_labels: Vec<i64>,
    pub train_anomalies: Option<usize>,
    pub test_anomalies: Option<usize>,
    pub config: RunConfig,
    pub seeds: Vec<u64>,
}

impl BenchmarkTask {
    pub fn from_preset(dir: &Path, preset: &UcrPreset, method: &str, config: RunConfig, seeds: Vec<u64>) -> Self {
        let (train_path, test_path) = preset.paths(dir);
        Self {
            dataset: preset.name.into(),
            method: method.into(),
            train_path,
            test_path,
            normal_labels: preset.normal.to_vec(),
            anomaly_labels: preset.anomaly.to_vec(),
            train_anomalies: Some(preset.train_anomalies),
            test_anomalies: Some(preset.test_anomalies),
            config,
            seeds,
        }
    }

    /// Train split without labels and labelled test split.
    pub fn load(&self) -> Result<(FunctionalDataset, FunctionalDataset)> {
        let binary = |path: &Path, cap| -> Result<FunctionalDataset> {
            load_ucr(path)?
                .to_binary(&self.normal_labels, &self.anomaly_labels, cap)
                .map_err(|e| Error::format(path, e.to_string()))
        };
        let train = binary(&self.train_path, self.train_anomalies)?.without_labels();
        let test = binary(&self.test_path, self.test_anomalies)?;
        Ok((train, test))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub dataset: String,
    pub method: String,
    pub seed: u64,
    pub auc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub dataset: String,
    pub method: String,
    pub seeds: usize,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single seed.
    pub sd: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchmarkReport {
    pub rows: Vec<BenchmarkRow>,
}

impl BenchmarkReport {
    pub fn extend(&mut self, other: BenchmarkReport) {
        self.rows.extend(other.rows);
    }

    /// One row per (dataset, method) pair, in order of first appearance.
    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut keys: Vec<(&str, &str)> = Vec::new();
        for r in &self.rows {
            let key = (r.dataset.as_str(), r.method.as_str());
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
        keys.into_iter()
            .map(|(dataset, method)| {
                let aucs: Vec<f64> = self
                    .rows
                    .iter()
                    .filter(|r| r.dataset == dataset && r.method == method)
                    .map(|r| r.auc)
                    .collect();
                let (mean, sd) = mean_sd(&aucs);
                SummaryRow {
                    dataset: dataset.into(),
                    method: method.into(),
                    seeds: aucs.len(),
                    mean,
                    sd,
                }
            })
            .collect()
    }

    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let res = (|| {
            w.write_record(["dataset", "method", "seed", "auc"])?;
            for r in &self.rows {
                w.write_record([&r.dataset, &r.method, &r.seed.to_string(), &sig6(r.auc)])?;
            }
            w.flush()?;
            Ok::<_, csv::Error>(())
        })();
        res.map_err(|e| Error::Internal(format!("cannot write report: {e}")))
    }

    pub fn write_summary_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let res = (|| {
            w.write_record(["dataset", "method", "seeds", "mean_auc", "sd_auc"])?;
            for r in self.summary() {
                w.write_record([&r.dataset, &r.method, &r.seeds.to_string(), &sig6(r.mean), &sig6(r.sd)])?;
            }
            w.flush()?;
            Ok::<_, csv::Error>(())
        })();
        res.map_err(|e| Error::Internal(format!("cannot write summary: {e}")))
    }

    /// Aligned plain-text summary table.
    pub fn summary_table(&self) -> String {
        let header = ["dataset", "method", "seeds", "mean_auc", "sd_auc"].map(String::from);
        let rows: Vec<[String; 5]> = self
            .summary()
            .into_iter()
            .map(|r| [r.dataset, r.method, r.seeds.to_string(), sig6(r.mean), sig6(r.sd)])
            .collect();
        let mut widths = header.clone().map(|h| h.len());
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let mut out = String::new();
        for row in std::iter::once(&header).chain(&rows) {
            let line: Vec<String> = row
                .iter()
                .zip(widths)
                .enumerate()
                .map(|(i, (cell, w))| if i < 2 { format!("{cell:<w$}") } else { format!("{cell:>w$}") })
                .collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
        }
        out
    }
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Fits on the unlabelled train split and reports the test AUC per seed.
pub fn run_benchmark(pool: &ThreadPool, task: &BenchmarkTask) -> Result<BenchmarkReport> {
    let (train, test) = task.load()?;
    benchmark_on(pool, task, &train, &test)
}

/// [`run_benchmark`] on already loaded splits.
pub fn benchmark_on(
    pool: &ThreadPool,
    task: &BenchmarkTask,
    train: &FunctionalDataset,
    test: &FunctionalDataset,
) -> Result<BenchmarkReport> {
    let labels = test
        .labels()
        .ok_or_else(|| Error::Config("test split carries no labels".into()))?;
    let mut rows = Vec::with_capacity(task.seeds.len());
    for &seed in &task.seeds {
        let model = Fitted::fit(pool, &task.config, seed, train)?;
        let scores = model.score_report(pool, test)?.scores();
        rows.push(BenchmarkRow {
            dataset: task.dataset.clone(),
            method: task.method.clone(),
            seed,
            auc: auc(&scores, labels)?,
        });
    }
    Ok(BenchmarkReport { rows })
}

/// Hyperparameter varied by a stability sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    NTrees,
    Psi,
    HeightLimit,
    DictSize,
    Dictionary,
}

impl SweepAxis {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "n_trees" | "N" => Self::NTrees,
            "psi" => Self::Psi,
            "height_limit" => Self::HeightLimit,
            "dict_size" => Self::DictSize,
            "dictionary" => Self::Dictionary,
            _ => {
                return Err(Error::Config(format!(
                    "unknown sweep axis {s:?} (expected n_trees, psi, height_limit, dict_size or dictionary)"
                )))
            }
        })
    }

    /// `base` with this axis set to `value`.
    pub fn apply(self, base: &RunConfig, value: &str) -> Result<RunConfig> {
        let mut config = base.clone();
        let bad = || Error::Config(format!("bad {self:?} value {value:?}"));
        match self {
            Self::NTrees => config.n_trees = value.parse().map_err(|_| bad())?,
            Self::Psi => config.psi = Some(value.parse().map_err(|_| bad())?),
            Self::HeightLimit => config.height_limit = parse_height_limit(value)?,
            Self::DictSize => {
                config.dict_size = DictSize::parse(value)?;
                let size = match config.dict_size {
                    DictSize::Fixed(k) => Some(k),
                    DictSize::Infinite => None,
                };
                if !config.dictionary.is_continuous() {
                    return Err(Error::Config("dict_size applies to continuous dictionaries only".into()));
                }
                config.dictionary.set_size(size);
            }
            Self::Dictionary => config.dictionary = parse_dictionary(value)?,
        }
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis_value: String,
    pub repeat: usize,
    pub probe_id: usize,
    pub score: f64,
}

/// Fits `repeats` forests per axis value and scores `probes` with each.
///
/// Repeat `r` uses seed `derive_seed(seed, r)` for every axis value. Rows
/// are ordered by axis value (as given), repeat, then probe.
#[allow(clippy::too_many_arguments)]
pub fn run_stability_sweep(
    pool: &ThreadPool,
    data: &FunctionalDataset,
    probes: &[MultiCurve],
    axis: SweepAxis,
    values: &[String],
    repeats: usize,
    base: &RunConfig,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    let configs: Vec<RunConfig> = values
        .iter()
        .map(|v| axis.apply(base, v))
        .collect::<Result<_>>()?;
    let probe_set = FunctionalDataset::new(data.grid().clone(), probes.to_vec())
        .map_err(|e| Error::Config(format!("probes: {e}")))?;
    let tasks: Vec<(usize, usize)> = (0..values.len())
        .flat_map(|v| (0..repeats).map(move |r| (v, r)))
        .collect();
    let scores = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(v, r)| {
                let model = Fitted::fit(pool, &configs[v], derive_seed(seed, r as u64), data)?;
                Ok(model.score_report(pool, &probe_set)?.scores())
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut rows = Vec::with_capacity(tasks.len() * probes.len());
    for (&(v, r), s) in tasks.iter().zip(scores) {
        for (probe_id, score) in s.into_iter().enumerate() {
            rows.push(SweepRow {
                axis_value: values[v].clone(),
                repeat: r,
                probe_id,
                score,
            });
        }
    }
    Ok(rows)
}

pub fn write_sweep_csv(rows: &[SweepRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let res = (|| {
        w.write_record(["axis_value", "repeat", "probe_id", "score"])?;
        for r in rows {
            w.write_record([&r.axis_value, &r.repeat.to_string(), &r.probe_id.to_string(), &sig6(r.score)])?;
        }
        w.flush()?;
        Ok::<_, csv::Error>(())
    })();
    res.map_err(|e| Error::Internal(format!("cannot write sweep: {e}")))
}

/// Median and sample variance of the scores of one probe at one axis value.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepStat {
    pub axis_value: String,
    pub probe_id: usize,
    pub median: f64,
    pub variance: f64,
}

pub fn sweep_stats(rows: &[SweepRow]) -> Vec<SweepStat> {
    let mut keys: Vec<(&str, usize)> = Vec::new();
    for r in rows {
        let key = (r.axis_value.as_str(), r.probe_id);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(value, probe)| {
            let mut xs: Vec<f64> = rows
                .iter()
                .filter(|r| r.axis_value == value && r.probe_id == probe)
                .map(|r| r.score)
                .collect();
            xs.sort_by(f64::total_cmp);
            let m = xs.len();
            let median = if m % 2 == 1 {
                xs[m / 2]
            } else {
                (xs[m / 2 - 1] + xs[m / 2]) / 2.0
            };
            let (_, sd) = mean_sd(&xs);
            SweepStat {
                axis_value: value.into(),
                probe_id: probe,
                median,
                variance: sd * sd,
            }
        })
        .collect()
}

/// The stability-study configuration: Gaussian wavelets (1000 atoms), L2,
/// `psi = 64`, 100 trees, height limit `ceil(log2 psi)`.
pub fn stability_config() -> RunConfig {
    RunConfig {
        psi: Some(64),
        height_limit: HeightLimit::Auto,
        dictionary: DictionarySpec::gaussian_wavelet(None),
        dict_size: DictSize::Fixed(1000),
        inner_product: InnerProduct::L2.into(),
        ..RunConfig::default()
    }
}

/// Formats `x` with 6 significant digits, dropping trailing zeros.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        // rounding can carry into a new digit (9.999995 -> 10.00000)
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        let digits = s.chars().filter(char::is_ascii_digit).collect::<String>();
        if digits.trim_start_matches('0').len() > 6 {
            return sig6(s.parse().unwrap_or(x));
        }
        s
    } else {
        let s = format!("{x:.5e}");
        let (mantissa, e) = s.split_once('e').unwrap_or((&s, "0"));
        let mantissa = if mantissa.contains('.') {
            mantissa.trim_end_matches('0').trim_end_matches('.')
        } else {
            mantissa
        };
        format!("{mantissa}e{e}")
    }
}
