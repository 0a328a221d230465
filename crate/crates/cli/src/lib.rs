//! Train, sweep and compare regularized classifiers from the command line.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ctreg::dataio::{
    export_features, load_csv, split, standardize, write_csv, CsvOptions, Dataset, LabelColumn, SplitSpec,
    SyntheticSpec,
};
use ctreg::dnn::{
    alternating_minimize, load_checkpoint, mlp_forward, mlp_predict, save_checkpoint, train_sgd, AltMinConfig,
    MlpParams, SgdTrainConfig,
};
use ctreg::linalg::Matrix;
use ctreg::mlr::{self, accuracy, MlrObjective, WeightMatrix};
use ctreg::optim::{GdConfig, WolfeParams};
use ctreg::{RegularizerKind, RegularizerSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// The seven-point grid `10⁻⁶, …, 1`.
pub const DEFAULT_GRID: [f64; 7] = [1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0];

pub const SELECTION_NOTE: &str =
    "oracle selection: best lambda chosen by test accuracy (ties to the smaller lambda); this peeks at test data";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] ctreg::Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Mlr,
    Mlp,
}

/// Synthetic data used when no training CSV is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_per_class: usize,
    pub test_per_class: usize,
    pub classes: usize,
    pub features: usize,
    pub rank: usize,
    pub noise: f64,
    pub mean_scale: f64,
    pub mixing_scale: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_per_class: 100,
            test_per_class: 200,
            classes: 4,
            features: 400,
            rank: 5,
            noise: 0.1,
            mean_scale: ctreg::dataio::MEAN_SCALE,
            mixing_scale: ctreg::dataio::MIXING_SCALE,
        }
    }
}

impl SynthConfig {
    pub fn spec(&self, seed: u64) -> SyntheticSpec {
        SyntheticSpec {
            mean_scale: self.mean_scale,
            mixing_scale: self.mixing_scale,
            ..SyntheticSpec::new(self.n_per_class, self.classes, self.features, self.rank, self.noise, seed)
        }
    }
}

/// Flat JSON configuration. Command-line flags override file values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: Model,
    pub reg: RegularizerKind,
    pub lambda: f64,
    /// Penalty weight of the splitting; only meaningful for `mlp`.
    pub mu: Option<f64>,
    pub train_csv: Option<PathBuf>,
    pub test_csv: Option<PathBuf>,
    pub label_col: LabelColumn,
    pub has_header: bool,
    /// Fraction used for training when only `train_csv` is given.
    pub train_fraction: f64,
    pub standardize: bool,
    pub synth: SynthConfig,
    pub seed: u64,
    pub out: PathBuf,
    pub workers: usize,
    pub lambda_grid: Vec<f64>,
    pub kinds: Vec<RegularizerKind>,
    pub max_iters: usize,
    pub step_tol: f64,
    pub grad_tol: f64,
    pub hidden: Vec<usize>,
    pub outer_iters: usize,
    pub epochs_per_step: usize,
    pub lr: f64,
    pub batch_size: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let gd = GdConfig::default();
        let alt = AltMinConfig::default();
        Self {
            model: Model::Mlr,
            reg: RegularizerKind::None,
            lambda: 0.0,
            mu: None,
            train_csv: None,
            test_csv: None,
            label_col: LabelColumn::Name("label".into()),
            has_header: true,
            train_fraction: 0.7,
            standardize: false,
            synth: SynthConfig::default(),
            seed: 0,
            out: PathBuf::from("out"),
            workers: 1,
            lambda_grid: DEFAULT_GRID.to_vec(),
            kinds: RegularizerKind::ALL.to_vec(),
            max_iters: gd.max_iters,
            step_tol: gd.step_tol,
            grad_tol: gd.grad_tol,
            hidden: alt.hidden,
            outer_iters: alt.outer_iters,
            epochs_per_step: alt.epochs_per_step,
            lr: alt.lr,
            batch_size: alt.batch_size,
        }
    }
}

impl RunConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        if self.model == Model::Mlr && self.mu.is_some() {
            return Err(CliError::Config("mu applies only to the mlp model".into()));
        }
        if self.model == Model::Mlp && self.reg == RegularizerKind::Coupled {
            match self.mu {
                None => return Err(CliError::Config("the coupled regularizer on mlp needs --mu".into())),
                Some(mu) if !(mu > 0.0 && mu.is_finite()) => {
                    return Err(CliError::Config(format!("mu must be positive, got {mu}")))
                }
                _ => {}
            }
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(CliError::Config(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if self.lambda_grid.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
            return Err(CliError::Config("lambda grid entries must be >= 0".into()));
        }
        if self.workers == 0 {
            return Err(CliError::Config("workers must be >= 1".into()));
        }
        if self.test_csv.is_some() && self.train_csv.is_none() {
            return Err(CliError::Config("--test-csv needs --train-csv".into()));
        }
        Ok(())
    }

    fn gd(&self) -> GdConfig {
        GdConfig {
            step_tol: self.step_tol,
            grad_tol: self.grad_tol,
            max_iters: self.max_iters,
            w0: None,
        }
    }

    fn alt(&self, lambda: f64, mu: f64) -> AltMinConfig {
        AltMinConfig {
            lambda,
            mu,
            hidden: self.hidden.clone(),
            outer_iters: self.outer_iters,
            epochs_per_step: self.epochs_per_step,
            lr: self.lr,
            batch_size: self.batch_size,
            seed: self.seed,
            ..AltMinConfig::default()
        }
    }

    fn sgd(&self, reg: RegularizerSpec) -> SgdTrainConfig {
        SgdTrainConfig {
            reg,
            ..SgdTrainConfig::matching(&self.alt(0.0, 1.0))
        }
    }
}

#[derive(Debug, Clone)]
pub struct Data {
    pub train: Dataset,
    pub test: Dataset,
}

/// Loads the CSV pair (or splits a single CSV), or generates synthetic data.
pub fn load_data(cfg: &RunConfig) -> Result<Data> {
    let (train, test) = match (&cfg.train_csv, &cfg.test_csv) {
        (Some(tr), Some(te)) => {
            let train = load_csv(tr, &CsvOptions::new(cfg.label_col.clone(), cfg.has_header))?;
            let opts = CsvOptions {
                class_names: train.class_names.clone(),
                ..CsvOptions::new(cfg.label_col.clone(), cfg.has_header)
            };
            let test = load_csv(te, &opts)?;
            if test.features() != train.features() {
                return Err(CliError::Config(format!(
                    "train has {} features, test has {}",
                    train.features(),
                    test.features()
                )));
            }
            (train, test)
        }
        (Some(tr), None) => {
            let all = load_csv(tr, &CsvOptions::new(cfg.label_col.clone(), cfg.has_header))?;
            split(
                &all,
                &SplitSpec::Fraction {
                    train_fraction: cfg.train_fraction,
                    seed: cfg.seed,
                },
            )?
        }
        _ => cfg.synth.spec(cfg.seed).generate_split(cfg.synth.test_per_class)?,
    };
    if train.classes() < 2 {
        return Err(CliError::Config("training data has fewer than 2 classes".into()));
    }
    if cfg.standardize {
        let (train_s, t) = standardize(&train)?;
        let test_s = t.apply_dataset(&test)?;
        return Ok(Data {
            train: train_s,
            test: test_s,
        });
    }
    Ok(Data { train, test })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "model")]
pub enum TrainedModel {
    Mlr { weights: WeightMatrix },
    Mlp { params: MlpParams },
}

impl TrainedModel {
    /// Logits, `n × c`.
    pub fn features(&self, x: &Matrix) -> Result<Matrix> {
        Ok(match self {
            TrainedModel::Mlr { weights } => x.matmul_t(weights.as_matrix())?,
            TrainedModel::Mlp { params } => mlp_forward(params, x)?,
        })
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        Ok(match self {
            TrainedModel::Mlr { weights } => mlr::predict(weights, x)?,
            TrainedModel::Mlp { params } => mlp_predict(params, x)?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub model: TrainedModel,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub objective_trajectory: Vec<f64>,
    pub stop_reason: String,
    pub iterations: usize,
}

/// Fits one model with regularizer `kind` at weight `lambda`.
pub fn fit_one(cfg: &RunConfig, data: &Data, kind: RegularizerKind, lambda: f64) -> Result<FitOutcome> {
    let spec = RegularizerSpec::new(kind, lambda)?;
    let (tr, te) = (&data.train, &data.test);
    let (model, trajectory, stop, iterations) = match cfg.model {
        Model::Mlr => {
            let obj = MlrObjective::new(&tr.x, &tr.y, spec)?;
            let (w, rep) = mlr::fit(&obj, &cfg.gd(), &WolfeParams::default())?;
            let stop = serde_json::to_value(rep.stop_reason)?.as_str().unwrap_or_default().to_string();
            (TrainedModel::Mlr { weights: w }, rep.objective_trajectory, stop, rep.iterations)
        }
        Model::Mlp if kind == RegularizerKind::Coupled && spec.effective_lambda() > 0.0 => {
            let mu = cfg.mu.ok_or_else(|| CliError::Config("the coupled regularizer on mlp needs --mu".into()))?;
            let (params, state, rep) = alternating_minimize(&tr.x, &tr.y, &cfg.alt(lambda, mu))?;
            let stop = if rep.converged { "outer-tol" } else { "outer-budget" }.to_string();
            (TrainedModel::Mlp { params }, state.objective_history, stop, rep.records.len())
        }
        Model::Mlp => {
            let spec = if kind == RegularizerKind::Coupled { RegularizerSpec::none() } else { spec };
            let sgd = cfg.sgd(spec);
            let (params, rep) = train_sgd(&tr.x, &tr.y, &sgd)?;
            (TrainedModel::Mlp { params }, rep.epoch_losses, "epochs".to_string(), sgd.epochs)
        }
    };
    let train_accuracy = accuracy(&model.predict(&tr.x)?, &tr.labels());
    let test_accuracy = if te.is_empty() {
        0.0
    } else {
        accuracy(&model.predict(&te.x)?, &te.labels())
    };
    Ok(FitOutcome {
        model,
        train_accuracy,
        test_accuracy,
        objective_trajectory: trajectory,
        stop_reason: stop,
        iterations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub kind: RegularizerKind,
    pub lambda: f64,
    pub train_accuracy: Option<f64>,
    pub test_accuracy: Option<f64>,
    pub iterations: Option<usize>,
    pub stop_reason: Option<String>,
    pub error: Option<String>,
    pub best: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub kind: RegularizerKind,
    pub train_accuracy: Option<f64>,
    pub test_accuracy: Option<f64>,
    pub best_lambda: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub config: RunConfig,
    pub n_train: usize,
    pub n_test: usize,
    pub train_accuracy: Option<f64>,
    pub test_accuracy: Option<f64>,
    pub objective_trajectory: Vec<f64>,
    pub stop_reason: Option<String>,
    pub iterations: Option<usize>,
    pub sweep: Vec<SweepRow>,
    pub compare: Vec<CompareRow>,
    pub best_lambda: Option<f64>,
    pub selection: Option<String>,
    pub wall_clock_secs: f64,
}

impl RunReport {
    fn new(command: &str, cfg: &RunConfig, data: &Data) -> Self {
        Self {
            command: command.to_string(),
            config: cfg.clone(),
            n_train: data.train.len(),
            n_test: data.test.len(),
            train_accuracy: None,
            test_accuracy: None,
            objective_trajectory: Vec::new(),
            stop_reason: None,
            iterations: None,
            sweep: Vec::new(),
            compare: Vec::new(),
            best_lambda: None,
            selection: None,
            wall_clock_secs: 0.0,
        }
    }

    pub fn write_json(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let path = dir.join("report.json");
        fs::write(&path, serde_json::to_string_pretty(self)?).map_err(io_err(&path))?;
        Ok(path)
    }
}

fn save_model(dir: &Path, model: &TrainedModel, cfg: &RunConfig) -> Result<()> {
    match model {
        TrainedModel::Mlr { weights } => {
            let path = dir.join("model.json");
            fs::write(&path, serde_json::to_string(weights)?).map_err(io_err(&path))?;
        }
        TrainedModel::Mlp { params } => {
            let hyper = serde_json::json!({
                "reg": cfg.reg,
                "lambda": cfg.lambda,
                "mu": cfg.mu,
                "lr": cfg.lr,
                "batch_size": cfg.batch_size,
                "outer_iters": cfg.outer_iters,
                "epochs_per_step": cfg.epochs_per_step,
            });
            save_checkpoint(&dir.join("checkpoint"), params, cfg.seed, hyper)?;
        }
    }
    Ok(())
}

/// Loads the model written by [`cmd_train`] into `dir`.
pub fn load_model(dir: &Path) -> Result<TrainedModel> {
    let json = dir.join("model.json");
    if json.exists() {
        let text = fs::read_to_string(&json).map_err(io_err(&json))?;
        return Ok(TrainedModel::Mlr {
            weights: serde_json::from_str(&text)?,
        });
    }
    let (params, _) = load_checkpoint(&dir.join("checkpoint"))?;
    Ok(TrainedModel::Mlp { params })
}

/// Fits one model and writes `report.json`, `features.csv` (training-set
/// logits) and the model itself to `cfg.out`.
pub fn cmd_train(cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    let start = Instant::now();
    let data = load_data(cfg)?;
    let fit = fit_one(cfg, &data, cfg.reg, cfg.lambda)?;
    fs::create_dir_all(&cfg.out).map_err(io_err(&cfg.out))?;
    export_features(&fit.model.features(&data.train.x)?, &data.train.labels(), &cfg.out.join("features.csv"))?;
    save_model(&cfg.out, &fit.model, cfg)?;
    let mut report = RunReport::new("train", cfg, &data);
    report.train_accuracy = Some(fit.train_accuracy);
    report.test_accuracy = Some(fit.test_accuracy);
    report.objective_trajectory = fit.objective_trajectory;
    report.stop_reason = Some(fit.stop_reason);
    report.iterations = Some(fit.iterations);
    report.wall_clock_secs = start.elapsed().as_secs_f64();
    report.write_json(&cfg.out)?;
    Ok(report)
}

/// Best row by test accuracy, ties to the smaller λ.
pub fn select_best(rows: &[SweepRow]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, r) in rows.iter().enumerate() {
        let Some(acc) = r.test_accuracy else { continue };
        best = match best {
            None => Some(i),
            Some(b) => {
                let (ba, bl) = (rows[b].test_accuracy.unwrap(), rows[b].lambda);
                if acc > ba || (acc == ba && r.lambda < bl) {
                    Some(i)
                } else {
                    Some(b)
                }
            }
        };
    }
    best
}

fn sweep_rows(cfg: &RunConfig, data: &Data, kind: RegularizerKind, pool: &rayon::ThreadPool) -> Vec<SweepRow> {
    let grid: Vec<f64> = if kind == RegularizerKind::None {
        vec![0.0]
    } else {
        cfg.lambda_grid.clone()
    };
    let mut rows: Vec<SweepRow> = pool.install(|| {
        grid.par_iter()
            .map(|&lambda| match fit_one(cfg, data, kind, lambda) {
                Ok(f) => SweepRow {
                    kind,
                    lambda,
                    train_accuracy: Some(f.train_accuracy),
                    test_accuracy: Some(f.test_accuracy),
                    iterations: Some(f.iterations),
                    stop_reason: Some(f.stop_reason),
                    error: None,
                    best: false,
                },
                Err(e) => {
                    log::warn!("{kind} at lambda {lambda}: {e}");
                    SweepRow {
                        kind,
                        lambda,
                        train_accuracy: None,
                        test_accuracy: None,
                        iterations: None,
                        stop_reason: None,
                        error: Some(e.to_string()),
                        best: false,
                    }
                }
            })
            .collect()
    });
    if let Some(b) = select_best(&rows) {
        rows[b].best = true;
    }
    rows
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {workers} workers: {e}")))
}

fn write_sweep_table(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut out = String::from("kind,lambda,train_accuracy,test_accuracy,iterations,stop_reason,best,error\n");
    let opt = |v: Option<f64>| v.map(|a| format!("{a:.6}")).unwrap_or_default();
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:e},{},{},{},{},{},{}",
            r.kind,
            r.lambda,
            opt(r.train_accuracy),
            opt(r.test_accuracy),
            r.iterations.map(|i| i.to_string()).unwrap_or_default(),
            r.stop_reason.clone().unwrap_or_default(),
            r.best,
            r.error.as_deref().unwrap_or("").replace(',', ";")
        );
    }
    fs::write(path, out).map_err(io_err(path))
}

/// One fit per grid point of `cfg.reg`; writes `sweep_table.csv` and
/// `report.json`.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    if cfg.lambda_grid.is_empty() {
        return Err(CliError::Config("lambda grid is empty".into()));
    }
    let start = Instant::now();
    let data = load_data(cfg)?;
    let rows = sweep_rows(cfg, &data, cfg.reg, &pool(cfg.workers)?);
    let mut report = RunReport::new("sweep", cfg, &data);
    if let Some(best) = rows.iter().find(|r| r.best) {
        report.best_lambda = Some(best.lambda);
        report.train_accuracy = best.train_accuracy;
        report.test_accuracy = best.test_accuracy;
    }
    report.selection = Some(SELECTION_NOTE.to_string());
    report.sweep = rows;
    fs::create_dir_all(&cfg.out).map_err(io_err(&cfg.out))?;
    write_sweep_table(&cfg.out.join("sweep_table.csv"), &report.sweep)?;
    report.wall_clock_secs = start.elapsed().as_secs_f64();
    report.write_json(&cfg.out)?;
    Ok(report)
}

/// Formats compare rows like a results table: `Model | Training | Testing | λ`.
pub fn format_compare_table(model: Model, rows: &[CompareRow]) -> String {
    let prefix = match model {
        Model::Mlr => "MLR",
        Model::Mlp => "MLP",
    };
    let pct = |v: Option<f64>| v.map(|a| format!("{:.2}%", 100.0 * a)).unwrap_or_else(|| "failed".into());
    let mut out = format!("{:<16} | {:>9} | {:>9} | {:>8}\n", "Model", "Training", "Testing", "lambda");
    out.push_str(&format!("{}\n", "-".repeat(51)));
    for r in rows {
        let name = match r.kind {
            RegularizerKind::None => prefix.to_string(),
            RegularizerKind::Coupled => format!("{prefix}-coupled"),
            k => format!("{prefix}-{k}"),
        };
        let lambda = match (r.kind, r.best_lambda) {
            (RegularizerKind::None, _) | (_, None) => "-".to_string(),
            (_, Some(l)) => format!("{l:.0e}"),
        };
        out.push_str(&format!(
            "{:<16} | {:>9} | {:>9} | {:>8}\n",
            name,
            pct(r.train_accuracy),
            pct(r.test_accuracy),
            lambda
        ));
    }
    out
}

/// Sweeps every kind in `cfg.kinds` on the same data and seed; writes the
/// table to `compare_table.txt` next to `sweep_table.csv` and `report.json`.
pub fn cmd_compare(cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    if cfg.kinds.len() < 2 {
        return Err(CliError::Config("compare needs at least 2 regularizer kinds".into()));
    }
    if cfg.model == Model::Mlp && cfg.kinds.contains(&RegularizerKind::Coupled) && cfg.mu.is_none() {
        return Err(CliError::Config("the coupled regularizer on mlp needs --mu".into()));
    }
    let start = Instant::now();
    let data = load_data(cfg)?;
    let pool = pool(cfg.workers)?;
    let mut report = RunReport::new("compare", cfg, &data);
    for &kind in &cfg.kinds {
        let rows = sweep_rows(cfg, &data, kind, &pool);
        let best = rows.iter().find(|r| r.best);
        report.compare.push(CompareRow {
            kind,
            train_accuracy: best.and_then(|r| r.train_accuracy),
            test_accuracy: best.and_then(|r| r.test_accuracy),
            best_lambda: best.map(|r| r.lambda),
        });
        report.sweep.extend(rows);
    }
    report.selection = Some(SELECTION_NOTE.to_string());
    fs::create_dir_all(&cfg.out).map_err(io_err(&cfg.out))?;
    write_sweep_table(&cfg.out.join("sweep_table.csv"), &report.sweep)?;
    let table = format_compare_table(cfg.model, &report.compare);
    let path = cfg.out.join("compare_table.txt");
    fs::write(&path, &table).map_err(io_err(&path))?;
    report.wall_clock_secs = start.elapsed().as_secs_f64();
    report.write_json(&cfg.out)?;
    Ok(report)
}

/// Writes `train.csv` and `test.csv` drawn from `cfg.synth` into `cfg.out`.
pub fn cmd_gen_synth(cfg: &RunConfig) -> Result<(PathBuf, PathBuf)> {
    let (train, test) = cfg.synth.spec(cfg.seed).generate_split(cfg.synth.test_per_class)?;
    fs::create_dir_all(&cfg.out).map_err(io_err(&cfg.out))?;
    let (p_tr, p_te) = (cfg.out.join("train.csv"), cfg.out.join("test.csv"));
    write_csv(&train, &p_tr)?;
    write_csv(&test, &p_te)?;
    Ok((p_tr, p_te))
}

/// Writes `features.csv` for the training data of `cfg` using the model
/// saved by a previous `train` run in `model_dir`.
pub fn cmd_export_features(cfg: &RunConfig, model_dir: &Path) -> Result<PathBuf> {
    let model = load_model(model_dir)?;
    let data = load_data(cfg)?;
    fs::create_dir_all(&cfg.out).map_err(io_err(&cfg.out))?;
    let path = cfg.out.join("features.csv");
    export_features(&model.features(&data.train.x)?, &data.train.labels(), &path)?;
    Ok(path)
}
