//! Command-line interface.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use fif_core::synth;
use fif_core::{FunctionalDataset, ImportanceMode, MultiCurve};

use crate::config::{
    parse_dictionary, parse_height_limit, parse_inner_product, parse_labels, DictSize, Method, RunConfig,
};
use crate::error::{Error, Result};
use crate::eval::{self, find_preset, BenchmarkReport, BenchmarkTask, SweepAxis, TableMethod};
use crate::io::{load_dataset, save_dataset, write_dataset};
use crate::model::{load_model, save_model, Fitted};
use crate::parallel;

#[derive(Debug, Parser)]
#[command(name = "fif", version, about = "Functional Isolation Forest anomaly detection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a forest and write it as a JSON model file.
    Fit(FitArgs),
    /// Score curves with a fitted model (CSV: id,score,depth,rank).
    Score(ScoreArgs),
    /// Train/test AUC benchmark on UCR datasets.
    Bench(BenchArgs),
    /// Score probe curves across a hyperparameter grid (CSV: axis_value,repeat,probe_id,score).
    Sweep(SweepArgs),
    /// Write a synthetic dataset.
    Synth(SynthArgs),
    /// Per-atom direction importance of a fitted model.
    Importance(ImportanceArgs),
    /// Depth of each curve under several models (CSV: id,D_1,...,D_q).
    Depthmap(DepthmapArgs),
}

/// Settings shared by every command that fits forests. Flags override the
/// JSON config.
#[derive(Debug, Clone, Default, Args)]
pub struct ForestArgs {
    /// JSON run configuration; every key is optional.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Seed for all randomness (required here or in the config).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads [default: available cores].
    #[arg(long, value_name = "K")]
    pub threads: Option<usize>,
    /// fif, if_axis or if_extended.
    #[arg(long)]
    pub method: Option<String>,
    /// Number of trees [default: 100].
    #[arg(long, value_name = "N")]
    pub n_trees: Option<usize>,
    /// Subsample size per tree [default: min(256, n)].
    #[arg(long)]
    pub psi: Option<usize>,
    /// auto (ceil(log2 psi)), unlimited, or a depth.
    #[arg(long, value_name = "L")]
    pub height_limit: Option<String>,
    /// Nodes this small become leaves [default: 1].
    #[arg(long, value_name = "M")]
    pub min_leaf_size: Option<usize>,
    /// Dictionary family, e.g. cosine, gaussian_wavelet, dyadic:5, self.
    #[arg(long, value_name = "NAME")]
    pub dict: Option<String>,
    /// Atoms drawn for continuous dictionaries, or "infinite" [default: 1000].
    #[arg(long, value_name = "K")]
    pub dict_size: Option<String>,
    /// l2, deriv or combined:<alpha>.
    #[arg(long, value_name = "IP")]
    pub ip: Option<String>,
}

impl ForestArgs {
    /// The JSON config (or defaults) with flags applied.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.seed {
            c.seed = Some(v);
        }
        if let Some(v) = self.threads {
            c.threads = Some(v);
        }
        if let Some(v) = &self.method {
            c.method = Method::parse(v)?;
        }
        if let Some(v) = self.n_trees {
            c.n_trees = v;
        }
        if let Some(v) = self.psi {
            c.psi = Some(v);
        }
        if let Some(v) = &self.height_limit {
            c.height_limit = parse_height_limit(v)?;
        }
        if let Some(v) = self.min_leaf_size {
            c.min_leaf_size = v;
        }
        if let Some(v) = &self.dict {
            c.dictionary = parse_dictionary(v)?;
        }
        if let Some(v) = &self.dict_size {
            c.dict_size = DictSize::parse(v)?;
        }
        if let Some(v) = &self.ip {
            c.inner_product = parse_inner_product(v)?.into();
        }
        Ok(c)
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Training curves (UCR TSV/CSV or the internal format).
    #[arg(long, value_name = "FILE", required_unless_present = "print_config")]
    pub data: Option<PathBuf>,
    /// Model file to write.
    #[arg(long, value_name = "FILE", required_unless_present = "print_config")]
    pub out: Option<PathBuf>,
    /// Print the resolved configuration as JSON and exit.
    #[arg(long)]
    pub print_config: bool,
    #[command(flatten)]
    pub forest: ForestArgs,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub data: PathBuf,
    /// Output CSV [default: stdout].
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Worker threads [default: available cores].
    #[arg(long, value_name = "K")]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// UCR archive root holding NAME/NAME_TRAIN.tsv and NAME/NAME_TEST.tsv.
    #[arg(long, value_name = "DIR")]
    pub ucr_dir: Option<PathBuf>,
    /// Comma-separated preset names, or "all".
    #[arg(long, value_delimiter = ',', value_name = "NAMES")]
    pub datasets: Vec<String>,
    /// Comma-separated methods: di_l2, cos_sob, cos_l2, self_l2, or "config"
    /// for the method described by the config and flags [default: config].
    #[arg(long, value_delimiter = ',', value_name = "METHODS")]
    pub methods: Vec<String>,
    /// Explicit training file (instead of --ucr-dir/--datasets).
    #[arg(long, value_name = "FILE", requires = "test")]
    pub train: Option<PathBuf>,
    #[arg(long, value_name = "FILE", requires = "train")]
    pub test: Option<PathBuf>,
    /// Normal class labels for --train/--test, e.g. 1 or 3,4.
    #[arg(long, value_name = "LABELS")]
    pub normal: Option<String>,
    /// Anomaly class labels for --train/--test.
    #[arg(long, value_name = "LABELS")]
    pub anomaly: Option<String>,
    /// Number of seeds, counted up from --seed [default: 10].
    #[arg(long, value_name = "COUNT")]
    pub seeds: Option<usize>,
    /// Per-seed report CSV (dataset,method,seed,auc) [default: stdout].
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Summary CSV (dataset,method,seeds,mean_auc,sd_auc).
    #[arg(long, value_name = "FILE")]
    pub summary: Option<PathBuf>,
    #[command(flatten)]
    pub forest: ForestArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepDataset {
    /// 500 Brownian paths with probes x0 = 0, x1 = 2t, x2 = 2 sqrt(t), x3 = 4 sqrt(t).
    Brownian,
    /// 200 smooth sinusoids with matching probes.
    Smooth,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Hyperparameter to vary: n_trees, psi, height_limit, dict_size or dictionary.
    #[arg(long)]
    pub axis: String,
    /// Comma-separated axis values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<String>,
    /// Fits per axis value.
    #[arg(long, default_value_t = 100)]
    pub repeats: usize,
    /// Training curves.
    #[arg(long, value_name = "FILE", conflicts_with = "synthetic", requires = "probes")]
    pub data: Option<PathBuf>,
    /// Curves to score, on the training grid.
    #[arg(long, value_name = "FILE")]
    pub probes: Option<PathBuf>,
    /// Built-in dataset with its probes (fitted with the stability-study defaults: psi 64, L2).
    #[arg(long, value_enum, required_unless_present = "data")]
    pub synthetic: Option<SweepDataset>,
    /// Output CSV [default: stdout].
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub forest: ForestArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Generator {
    /// 100 smooth curves plus 5 labeled anomalies.
    Cuevas105,
    /// Standard Brownian paths (--n, --p).
    Brownian,
    /// 90 smooth curves plus 10 noisy ones.
    Noisy,
    /// 30 curves plus one with a shifted rising front.
    Isolated,
    /// Smooth sinusoids with random amplitude (--n, --p).
    Smooth,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(value_enum)]
    pub generator: Generator,
    #[arg(long)]
    pub seed: u64,
    /// Curves, for brownian and smooth.
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    /// Grid points, for brownian and smooth.
    #[arg(long, default_value_t = synth::DEFAULT_POINTS)]
    pub p: usize,
    /// Output file in the internal format [default: stdout].
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum ImportanceArg {
    Naive,
    #[default]
    Adaptive,
}

#[derive(Debug, Args)]
pub struct ImportanceArgs {
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    #[arg(long, value_enum, default_value_t = ImportanceArg::Adaptive)]
    pub mode: ImportanceArg,
    /// Output CSV (rank,atom,importance,support_lo,support_hi,params) [default: stdout].
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DepthmapArgs {
    /// Comma-separated model files, one per depth coordinate.
    #[arg(long, value_delimiter = ',', required = true, value_name = "FILES")]
    pub models: Vec<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub data: PathBuf,
    /// Output CSV [default: stdout].
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long, value_name = "K")]
    pub threads: Option<usize>,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Score(a) => cmd_score(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Importance(a) => cmd_importance(a),
        Command::Depthmap(a) => cmd_depthmap(a),
    }
}

/// Writes to `path`, or to stdout when `None`.
fn with_output(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(path) => {
            let wrap = |source| Error::Write {
                path: path.into(),
                source,
            };
            let mut w = BufWriter::new(File::create(path).map_err(wrap)?);
            f(&mut w)?;
            w.flush().map_err(wrap)
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            f(&mut w)?;
            w.flush().map_err(|source| Error::Write {
                path: "<stdout>".into(),
                source,
            })
        }
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Internal(format!("cannot write CSV: {e}"))
}

pub fn cmd_fit(args: FitArgs) -> Result<()> {
    let config = args.forest.resolve()?;
    if args.print_config {
        let json = serde_json::to_string_pretty(&config).map_err(|e| Error::Internal(e.to_string()))?;
        println!("{json}");
        return Ok(());
    }
    let seed = config.require_seed()?;
    let (data_path, out) = match (&args.data, &args.out) {
        (Some(d), Some(o)) => (d, o),
        _ => return Err(Error::Config("--data and --out are required".into())),
    };
    let data = load_dataset(data_path)?.without_labels();
    let pool = parallel::pool(config.threads)?;
    let model = Fitted::fit(&pool, &config, seed, &data)?;
    save_model(out, &model)
}

pub fn cmd_score(args: ScoreArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let data = load_dataset(&args.data)?;
    let pool = parallel::pool(args.threads)?;
    let report = model.score_report(&pool, &data)?;
    with_output(args.out.as_deref(), |out| {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["id", "score", "depth", "rank"]).map_err(csv_error)?;
        for (id, e) in report.entries().iter().enumerate() {
            w.write_record([id.to_string(), e.score.to_string(), e.depth.to_string(), e.rank.to_string()])
                .map_err(csv_error)?;
        }
        w.flush().map_err(|e| Error::Internal(e.to_string()))
    })
}

pub fn cmd_bench(args: BenchArgs) -> Result<()> {
    let base = args.forest.resolve()?;
    let first_seed = base.require_seed()?;
    let count = args.seeds.unwrap_or(base.seeds);
    if count == 0 {
        return Err(Error::Config("--seeds must be at least 1".into()));
    }
    let seeds: Vec<u64> = (0..count as u64).map(|i| first_seed + i).collect();
    let methods = if args.methods.is_empty() {
        vec!["config".to_string()]
    } else {
        args.methods.clone()
    };
    let method_configs: Vec<(String, RunConfig)> = methods
        .iter()
        .map(|m| {
            Ok(match m.as_str() {
                "config" => (base.method_label(), base.clone()),
                other => (other.to_string(), TableMethod::parse(other)?.apply(&base)),
            })
        })
        .collect::<Result<_>>()?;

    let mut tasks = Vec::new();
    if let (Some(train), Some(test)) = (&args.train, &args.test) {
        let normal = match (&args.normal, &base.normal_labels) {
            (Some(s), _) => parse_labels(s)?,
            (None, Some(v)) => v.clone(),
            _ => return Err(Error::Config("--normal is required with --train/--test".into())),
        };
        let anomaly = match (&args.anomaly, &base.anomaly_labels) {
            (Some(s), _) => parse_labels(s)?,
            (None, Some(v)) => v.clone(),
            _ => return Err(Error::Config("--anomaly is required with --train/--test".into())),
        };
        let name = train
            .file_stem()
            .map(|s| s.to_string_lossy().trim_end_matches("_TRAIN").to_string())
            .unwrap_or_else(|| "custom".into());
        for (method, config) in &method_configs {
            tasks.push(BenchmarkTask {
                dataset: name.clone(),
                method: method.clone(),
                train_path: train.clone(),
                test_path: test.clone(),
                normal_labels: normal.clone(),
                anomaly_labels: anomaly.clone(),
                train_anomalies: base.train_anomalies,
                test_anomalies: base.test_anomalies,
                config: config.clone(),
                seeds: seeds.clone(),
            });
        }
    } else {
        let dir = args
            .ucr_dir
            .as_ref()
            .ok_or_else(|| Error::Config("either --ucr-dir or --train/--test is required".into()))?;
        let names: Vec<&str> = if args.datasets.is_empty() || args.datasets.iter().any(|d| d == "all") {
            eval::UCR_PRESETS.iter().map(|p| p.name).collect()
        } else {
            args.datasets.iter().map(String::as_str).collect()
        };
        for name in names {
            let preset = find_preset(name).ok_or_else(|| Error::Config(format!("unknown dataset {name:?}")))?;
            for (method, config) in &method_configs {
                tasks.push(BenchmarkTask::from_preset(dir, preset, method, config.clone(), seeds.clone()));
            }
        }
    }

    let pool = parallel::pool(base.threads)?;
    let mut report = BenchmarkReport::default();
    for task in &tasks {
        report.extend(eval::run_benchmark(&pool, task)?);
    }
    with_output(args.out.as_deref(), |out| report.write_csv(out))?;
    if let Some(path) = &args.summary {
        with_output(Some(path), |out| report.write_summary_csv(out))?;
    }
    eprint!("{}", report.summary_table());
    Ok(())
}

pub fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let mut base = args.forest.resolve()?;
    let seed = base.require_seed()?;
    let axis = SweepAxis::parse(&args.axis)?;
    let (data, probes): (FunctionalDataset, Vec<MultiCurve>) = match (&args.data, args.synthetic) {
        (Some(path), _) => {
            let probe_path = args
                .probes
                .as_ref()
                .ok_or_else(|| Error::Config("--probes is required with --data".into()))?;
            let data = load_dataset(path)?.without_labels();
            let probes = load_dataset(probe_path)?;
            if probes.grid() != data.grid() {
                return Err(Error::format(probe_path, "probe grid differs from the training grid"));
            }
            (data, probes.curves().to_vec())
        }
        (None, Some(kind)) => {
            let data_seed = fif_core::rng::derive_seed(seed, u64::MAX);
            let data = match kind {
                SweepDataset::Brownian => synth::gen_brownian_dataset(500, synth::DEFAULT_POINTS, data_seed)?,
                SweepDataset::Smooth => synth::gen_smooth_family(200, synth::DEFAULT_POINTS, data_seed)?,
            };
            let probes = match kind {
                SweepDataset::Brownian => synth::brownian_probes(data.grid()),
                SweepDataset::Smooth => synth::smooth_probes(data.grid()),
            };
            base = apply_stability_defaults(&args.forest, base);
            (data, probes)
        }
        (None, None) => return Err(Error::Config("--data or --synthetic is required".into())),
    };
    let pool = parallel::pool(base.threads)?;
    let rows = eval::run_stability_sweep(&pool, &data, &probes, axis, &args.values, args.repeats, &base, seed)?;
    with_output(args.out.as_deref(), |out| eval::write_sweep_csv(&rows, out))
}

/// Stability-study settings for anything neither the config file nor a flag
/// set.
fn apply_stability_defaults(flags: &ForestArgs, resolved: RunConfig) -> RunConfig {
    if flags.config.is_some() {
        return resolved;
    }
    let study = eval::stability_config();
    RunConfig {
        psi: flags.psi.map(Some).unwrap_or(study.psi),
        dictionary: if flags.dict.is_some() {
            resolved.dictionary.clone()
        } else {
            study.dictionary
        },
        inner_product: if flags.ip.is_some() {
            resolved.inner_product.clone()
        } else {
            study.inner_product
        },
        ..resolved
    }
}

pub fn cmd_synth(args: SynthArgs) -> Result<()> {
    let data = match args.generator {
        Generator::Cuevas105 => synth::gen_cuevas105(args.seed),
        Generator::Brownian => synth::gen_brownian_dataset(args.n, args.p, args.seed)?,
        Generator::Noisy => synth::gen_noisy_contamination(args.seed)?,
        Generator::Isolated => synth::gen_isolated_anomaly(args.seed)?,
        Generator::Smooth => synth::gen_smooth_family(args.n, args.p, args.seed)?,
    };
    match &args.out {
        Some(path) => save_dataset(path, &data),
        None => with_output(None, |out| {
            write_dataset(out, &data).map_err(|source| Error::Write {
                path: "<stdout>".into(),
                source,
            })
        }),
    }
}

pub fn cmd_importance(args: ImportanceArgs) -> Result<()> {
    let Fitted::Fif(forest) = load_model(&args.model)? else {
        return Err(Error::Config("importance needs a fif model".into()));
    };
    let mode = match args.mode {
        ImportanceArg::Naive => ImportanceMode::Naive,
        ImportanceArg::Adaptive => ImportanceMode::Adaptive,
    };
    let importance = forest.direction_importance(mode)?;
    let params: Vec<Vec<fif_core::AtomParams>> = match forest.dictionary() {
        Some(atoms) => atoms.iter().map(|a| a.params().to_vec()).collect(),
        None => (0..importance.len())
            .map(|index| vec![fif_core::AtomParams::SelfData { index }])
            .collect(),
    };
    let mut order: Vec<usize> = (0..importance.len()).collect();
    order.sort_by(|&a, &b| importance[b].total_cmp(&importance[a]).then(a.cmp(&b)));
    with_output(args.out.as_deref(), |out| {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["rank", "atom", "importance", "support_lo", "support_hi", "params"])
            .map_err(csv_error)?;
        for (rank, &i) in order.iter().enumerate() {
            let support = params[i].iter().find_map(|p| p.support());
            let (lo, hi) = support.map_or((String::new(), String::new()), |(lo, hi)| (lo.to_string(), hi.to_string()));
            let json = serde_json::to_string(&params[i]).map_err(|e| Error::Internal(e.to_string()))?;
            w.write_record([(rank + 1).to_string(), i.to_string(), importance[i].to_string(), lo, hi, json])
                .map_err(csv_error)?;
        }
        w.flush().map_err(|e| Error::Internal(e.to_string()))
    })
}

pub fn cmd_depthmap(args: DepthmapArgs) -> Result<()> {
    let data = load_dataset(&args.data)?;
    let pool = parallel::pool(args.threads)?;
    let mut columns = Vec::with_capacity(args.models.len());
    for path in &args.models {
        let model = load_model(path)?;
        let depths: Vec<f64> = model.score_report(&pool, &data)?.entries().iter().map(|e| e.depth).collect();
        columns.push(depths);
    }
    with_output(args.out.as_deref(), |out| {
        let mut w = csv::Writer::from_writer(out);
        let header: Vec<String> = std::iter::once("id".to_string())
            .chain((1..=columns.len()).map(|q| format!("D_{q}")))
            .collect();
        w.write_record(&header).map_err(csv_error)?;
        for i in 0..data.n() {
            let row: Vec<String> = std::iter::once(i.to_string())
                .chain(columns.iter().map(|c| c[i].to_string()))
                .collect();
            w.write_record(&row).map_err(csv_error)?;
        }
        w.flush().map_err(|e| Error::Internal(e.to_string()))
    })
}
