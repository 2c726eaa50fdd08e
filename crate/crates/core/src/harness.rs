//! Experiment orchestration: model construction, scoring, random
//! hyperparameter search, repeated train/test runs and the linear
//! separability diagnostic.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::alphabet::{SymbolId, SymbolTable};
use crate::classifiers::fit_linear_ridge;
use crate::error::{Error, Result};
use crate::esn::Esn;
use crate::matrix::Matrix;
use crate::reservoir::Reservoir;
use crate::rmm::{AddressFn, OutputFn, RMMachine};
use crate::rsm::{Annotation, FitParams, OutMode, RSMachine};
use crate::tasks::{make_task, TaskConfig, TaskDataset, TaskName, TestItem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "rand-ESN")]
    RandEsn,
    #[serde(rename = "crj-ESN")]
    CrjEsn,
    #[serde(rename = "ldn-ESN")]
    LdnEsn,
    #[serde(rename = "rand-RSM")]
    RandRsm,
    #[serde(rename = "crj-RSM")]
    CrjRsm,
    #[serde(rename = "ldn-RSM")]
    LdnRsm,
    #[serde(rename = "rmm-probe")]
    RmmProbe,
}

/// Reservoir construction scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Rand,
    Crj,
    Ldn,
}

impl ModelKind {
    pub const ALL: [ModelKind; 7] = [
        ModelKind::RandEsn,
        ModelKind::CrjEsn,
        ModelKind::LdnEsn,
        ModelKind::RandRsm,
        ModelKind::CrjRsm,
        ModelKind::LdnRsm,
        ModelKind::RmmProbe,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ModelKind::RandEsn => "rand-ESN",
            ModelKind::CrjEsn => "crj-ESN",
            ModelKind::LdnEsn => "ldn-ESN",
            ModelKind::RandRsm => "rand-RSM",
            ModelKind::CrjRsm => "crj-RSM",
            ModelKind::LdnRsm => "ldn-RSM",
            ModelKind::RmmProbe => "rmm-probe",
        }
    }

    pub fn family(self) -> Family {
        match self {
            ModelKind::RandEsn | ModelKind::RandRsm | ModelKind::RmmProbe => Family::Rand,
            ModelKind::CrjEsn | ModelKind::CrjRsm => Family::Crj,
            ModelKind::LdnEsn | ModelKind::LdnRsm => Family::Ldn,
        }
    }

    pub fn is_rsm(self) -> bool {
        matches!(self, ModelKind::RandRsm | ModelKind::CrjRsm | ModelKind::LdnRsm)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('_', "-");
        ModelKind::ALL
            .into_iter()
            .find(|k| k.label().to_ascii_lowercase() == key)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown model {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ReservoirParams {
    Rand {
        spectral_radius: f64,
        input_scale: f64,
    },
    Crj {
        cycle_weight: f64,
        jump_weight: f64,
        jump_length: usize,
        input_weight: f64,
    },
    Ldn {
        theta: f64,
    },
}

impl ReservoirParams {
    pub fn family(&self) -> Family {
        match self {
            ReservoirParams::Rand { .. } => Family::Rand,
            ReservoirParams::Crj { .. } => Family::Crj,
            ReservoirParams::Ldn { .. } => Family::Ldn,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub reservoir: ReservoirParams,
    pub classifier_regularization: f64,
    pub ridge_regularization: f64,
}

impl Hyperparameters {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("hyperparameters serialize")
    }
}

/// Settings found by running the random search offline with the CLI; a
/// search budget of zero uses these instead of searching.
pub fn tuned_defaults(model: ModelKind, task: TaskName) -> Hyperparameters {
    let reservoir = match model.family() {
        Family::Rand => ReservoirParams::Rand {
            spectral_radius: 0.9,
            input_scale: 1.0,
        },
        Family::Crj => ReservoirParams::Crj {
            cycle_weight: 0.9,
            jump_weight: 0.4,
            jump_length: 3,
            input_weight: 1.0,
        },
        Family::Ldn => ReservoirParams::Ldn {
            theta: match task {
                TaskName::Copy => 42.0,
                TaskName::RepeatCopy => 25.0,
                _ => 4.0,
            },
        },
    };
    if model.is_rsm() && task == TaskName::Copy {
        return Hyperparameters {
            reservoir,
            classifier_regularization: 4e-6,
            ridge_regularization: 1e-5,
        };
    }
    Hyperparameters {
        reservoir,
        classifier_regularization: 1e-3,
        ridge_regularization: 1e-3,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub task: TaskName,
    pub model: ModelKind,
    pub neurons: usize,
    pub repeats: usize,
    pub search_budget: usize,
    pub validation_sets: usize,
    pub seed: u64,
    #[serde(default)]
    pub tasks: TaskConfig,
    /// Skips the search and uses these settings.
    #[serde(default)]
    pub hyperparameters: Option<Hyperparameters>,
}

/// 512 neurons for stack machines on the copy tasks, 256 otherwise.
pub fn default_neurons(task: TaskName, model: ModelKind) -> usize {
    if model.is_rsm() && task.is_copy() {
        512
    } else {
        256
    }
}

impl ExperimentConfig {
    pub fn new(task: TaskName, model: ModelKind) -> Self {
        Self {
            task,
            model,
            neurons: default_neurons(task, model),
            repeats: 10,
            search_budget: 20,
            validation_sets: 3,
            seed: 0,
            tasks: TaskConfig::default(),
            hyperparameters: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.neurons == 0 {
            return Err(Error::InvalidConfig("neurons must be positive".into()));
        }
        if self.repeats == 0 {
            return Err(Error::InvalidConfig("repeats must be at least 1".into()));
        }
        if self.search_budget > 0 && self.validation_sets == 0 {
            return Err(Error::InvalidConfig("a search needs at least one validation set".into()));
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let cfg: Self = serde_json::from_reader(std::io::BufReader::new(std::fs::File::open(path)?))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Reservoir size actually built: LDN reservoirs need a multiple of the
/// input dimension.
pub fn effective_neurons(family: Family, neurons: usize, channels: usize) -> usize {
    match family {
        Family::Ldn => channels * (neurons / channels).max(1),
        _ => neurons,
    }
}

pub fn build_reservoir(p: &ReservoirParams, neurons: usize, channels: usize, seed: u64) -> Result<Reservoir> {
    let m = effective_neurons(p.family(), neurons, channels);
    match *p {
        ReservoirParams::Rand {
            spectral_radius,
            input_scale,
        } => Reservoir::random(m, channels, spectral_radius, input_scale, seed),
        ReservoirParams::Crj {
            cycle_weight,
            jump_weight,
            jump_length,
            input_weight,
        } => Reservoir::crj(m, channels, cycle_weight, jump_weight, jump_length, input_weight),
        ReservoirParams::Ldn { theta } => Reservoir::ldn(m, channels, theta),
    }
}

/// Any trained model the harness can evaluate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum Model {
    Rsm(RSMachine),
    Esn(Esn),
    Rmm(RMMachine),
}

impl Model {
    /// `T+1` output rows per input sequence.
    pub fn predict(&self, xs: &[Vec<Vec<f64>>]) -> Result<Vec<Vec<Vec<f64>>>> {
        match self {
            Model::Rsm(m) => Ok(m.run_batch(xs)?.into_iter().map(|o| o.outputs).collect()),
            Model::Esn(m) => m.run_batch(xs),
            Model::Rmm(m) => crate::par::map(xs, |x| {
                let mut padded = x.clone();
                padded.push(vec![0.0; m.reservoir.n()]);
                m.run(&padded)
            })
            .into_iter()
            .collect(),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        serde_json::to_writer(std::io::BufWriter::new(std::fs::File::create(path)?), self)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_reader(std::io::BufReader::new(std::fs::File::open(path)?))?)
    }
}

pub fn train_model(
    model: ModelKind,
    task: TaskName,
    hp: &Hyperparameters,
    neurons: usize,
    train: &[Annotation],
    reservoir_seed: u64,
) -> Result<Model> {
    if hp.reservoir.family() != model.family() {
        return Err(Error::InvalidConfig(format!(
            "{model} cannot use {:?} reservoir settings",
            hp.reservoir.family()
        )));
    }
    let r = build_reservoir(&hp.reservoir, neurons, task.channels(), reservoir_seed)?;
    if model.is_rsm() {
        let mode = if task.is_copy() { OutMode::Ridge } else { OutMode::Classifier };
        let params = FitParams {
            classifier_regularization: hp.classifier_regularization,
            ridge_regularization: hp.ridge_regularization,
            ..FitParams::default()
        };
        return Ok(Model::Rsm(RSMachine::fit(r, train, mode, &params)?));
    }
    let pairs: Vec<(&[Vec<f64>], &[Vec<f64>])> = train.iter().map(|a| (&a.x[..], &a.y[..])).collect();
    let esn = Esn::fit(r, &pairs, hp.ridge_regularization)?;
    if model == ModelKind::RmmProbe {
        let (r, readout) = esn.into_parts();
        return Ok(Model::Rmm(RMMachine::new(
            r,
            1,
            AddressFn::Constant { address: 0 },
            OutputFn::Linear { readout },
        )));
    }
    Ok(Model::Esn(esn))
}

/// Mean of `|ŷ - y|` over all steps and output dimensions.
pub fn mae(predicted: &[Vec<f64>], desired: &[Vec<f64>]) -> Result<f64> {
    if predicted.len() != desired.len() || predicted.iter().zip(desired).any(|(p, d)| p.len() != d.len()) {
        return Err(Error::ShapeMismatch(format!(
            "{} predicted rows against {} desired rows",
            predicted.len(),
            desired.len()
        )));
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for (p, d) in predicted.iter().zip(desired) {
        for (a, b) in p.iter().zip(d) {
            sum += (a - b).abs();
            count += 1;
        }
    }
    Ok(if count == 0 { 0.0 } else { sum / count as f64 })
}

/// Mean over sequences of the per-sequence error.
pub fn dataset_mae(predicted: &[Vec<Vec<f64>>], items: &[TestItem]) -> Result<f64> {
    if predicted.len() != items.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} predictions for {} sequences",
            predicted.len(),
            items.len()
        )));
    }
    if items.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for (p, item) in predicted.iter().zip(items) {
        total += mae(p, &item.y)?;
    }
    Ok(total / items.len() as f64)
}

pub fn evaluate(model: &Model, items: &[TestItem]) -> Result<f64> {
    let xs: Vec<Vec<Vec<f64>>> = items.iter().map(|i| i.x.clone()).collect();
    dataset_mae(&model.predict(&xs)?, items)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent seed for `(stream, index)` under a base seed.
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    splitmix(splitmix(splitmix(base) ^ stream) ^ index)
}

const VALIDATION: u64 = 1;
const SEARCH_RESERVOIR: u64 = 2;
const REPEAT_DATA: u64 = 3;
const REPEAT_RESERVOIR: u64 = 4;
const SEARCH_DRAWS: u64 = 5;

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.random_range(lo.log10()..=hi.log10()))
}

/// One random configuration from the search space of the model's family.
pub fn sample_hyperparameters(family: Family, neurons: usize, rng: &mut ChaCha8Rng) -> Hyperparameters {
    let reservoir = match family {
        Family::Rand => ReservoirParams::Rand {
            spectral_radius: rng.random_range(0.5..=0.99),
            input_scale: rng.random_range(0.1..=2.0),
        },
        Family::Crj => ReservoirParams::Crj {
            cycle_weight: rng.random_range(0.1..=0.95),
            jump_weight: rng.random_range(0.1..=0.95),
            jump_length: rng.random_range(2..=(neurons / 2).max(2)),
            input_weight: rng.random_range(0.1..=2.0),
        },
        Family::Ldn => ReservoirParams::Ldn {
            theta: log_uniform(rng, 2.0, 200.0),
        },
    };
    Hyperparameters {
        reservoir,
        classifier_regularization: log_uniform(rng, 1e-6, 1e2),
        ridge_regularization: log_uniform(rng, 1e-6, 1e2),
    }
}

/// The search ranges, recorded alongside every experiment.
pub fn search_space(family: Family, neurons: usize) -> serde_json::Value {
    let reservoir = match family {
        Family::Rand => serde_json::json!({"spectral_radius": [0.5, 0.99], "input_scale": [0.1, 2.0]}),
        Family::Crj => serde_json::json!({
            "cycle_weight": [0.1, 0.95],
            "jump_weight": [0.1, 0.95],
            "jump_length": [2, (neurons / 2).max(2)],
            "input_weight": [0.1, 2.0],
        }),
        Family::Ldn => serde_json::json!({"theta": {"log_uniform": [2.0, 200.0]}}),
    };
    serde_json::json!({
        "reservoir": reservoir,
        "classifier_regularization": {"log_uniform": [1e-6, 1e2]},
        "ridge_regularization": {"log_uniform": [1e-6, 1e2]},
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub hyperparameters: Hyperparameters,
    /// Infinite when training or evaluation failed.
    pub validation_mae: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best: Hyperparameters,
    pub trials: Vec<Trial>,
}

/// Mean test error over `validation_sets` fresh datasets.
pub fn validation_mae(cfg: &ExperimentConfig, hp: &Hyperparameters, reservoir_seed: u64) -> Result<f64> {
    let mut total = 0.0;
    for v in 0..cfg.validation_sets {
        let data = make_task(cfg.task, derive_seed(cfg.seed, VALIDATION, v as u64), &cfg.tasks)?;
        let model = train_model(cfg.model, cfg.task, hp, cfg.neurons, &data.train, reservoir_seed)?;
        total += evaluate(&model, &data.test)?;
    }
    Ok(total / cfg.validation_sets as f64)
}

/// Random search; the first-drawn configuration wins ties.
pub fn hyperparameter_search(cfg: &ExperimentConfig) -> Result<SearchResult> {
    cfg.validate()?;
    if let Some(hp) = &cfg.hyperparameters {
        return Ok(SearchResult {
            best: hp.clone(),
            trials: Vec::new(),
        });
    }
    if cfg.search_budget == 0 {
        return Ok(SearchResult {
            best: tuned_defaults(cfg.model, cfg.task),
            trials: Vec::new(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, SEARCH_DRAWS, 0));
    let m = effective_neurons(cfg.model.family(), cfg.neurons, cfg.task.channels());
    let mut trials = Vec::with_capacity(cfg.search_budget);
    for k in 0..cfg.search_budget {
        let hp = sample_hyperparameters(cfg.model.family(), m, &mut rng);
        let score = validation_mae(cfg, &hp, derive_seed(cfg.seed, SEARCH_RESERVOIR, k as u64))
            .ok()
            .filter(|v| v.is_finite())
            .unwrap_or(f64::INFINITY);
        trials.push(Trial {
            hyperparameters: hp,
            validation_mae: score,
        });
    }
    let mut best = 0;
    for (k, t) in trials.iter().enumerate() {
        if t.validation_mae < trials[best].validation_mae {
            best = k;
        }
    }
    Ok(SearchResult {
        best: trials[best].hyperparameters.clone(),
        trials,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub model: String,
    pub task: String,
    pub repeat: usize,
    pub mae: f64,
    pub train_seconds: f64,
    /// JSON object.
    pub hyperparameters: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<ResultRow>,
    pub search: SearchResult,
    /// Wall-clock seconds spent evaluating, per repeat.
    pub eval_seconds: Vec<f64>,
}

impl ExperimentReport {
    pub fn mean_mae(&self) -> f64 {
        self.rows.iter().map(|r| r.mae).sum::<f64>() / self.rows.len().max(1) as f64
    }

    pub fn max_mae(&self) -> f64 {
        self.rows.iter().map(|r| r.mae).fold(0.0, f64::max)
    }

    pub fn max_train_seconds(&self) -> f64 {
        self.rows.iter().map(|r| r.train_seconds).fold(0.0, f64::max)
    }
}

/// Search once, then train and test `repeats` times on fresh data.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run_experiment_with(cfg, |_, _, _| Ok(()))
}

/// As [`run_experiment`], handing every fitted model and its dataset to
/// `inspect` before moving on to the next repeat.
pub fn run_experiment_with<F>(cfg: &ExperimentConfig, mut inspect: F) -> Result<ExperimentReport>
where
    F: FnMut(usize, &Model, &TaskDataset) -> Result<()>,
{
    let search = hyperparameter_search(cfg)?;
    let hp = &search.best;
    let mut rows = Vec::with_capacity(cfg.repeats);
    let mut eval_seconds = Vec::with_capacity(cfg.repeats);
    for r in 0..cfg.repeats {
        let data = make_task(cfg.task, derive_seed(cfg.seed, REPEAT_DATA, r as u64), &cfg.tasks)?;
        let clock = Instant::now();
        let model = train_model(
            cfg.model,
            cfg.task,
            hp,
            cfg.neurons,
            &data.train,
            derive_seed(cfg.seed, REPEAT_RESERVOIR, r as u64),
        )?;
        let train_seconds = clock.elapsed().as_secs_f64();
        let clock = Instant::now();
        let mae = evaluate(&model, &data.test)?;
        eval_seconds.push(clock.elapsed().as_secs_f64());
        inspect(r, &model, &data)?;
        rows.push(ResultRow {
            model: cfg.model.label().into(),
            task: cfg.task.as_str().into(),
            repeat: r,
            mae,
            train_seconds,
            hyperparameters: hp.to_json(),
        });
    }
    Ok(ExperimentReport {
        rows,
        search,
        eval_seconds,
    })
}

/// Configuration, chosen settings, search ranges and trials of a run.
pub fn experiment_manifest(cfg: &ExperimentConfig, report: &ExperimentReport) -> serde_json::Value {
    let m = effective_neurons(cfg.model.family(), cfg.neurons, cfg.task.channels());
    serde_json::json!({
        "config": cfg,
        "effective_neurons": m,
        "search_space": search_space(cfg.model.family(), m),
        "selected": report.search.best,
        "trials": report.search.trials,
    })
}

pub fn write_csv<W: Write>(rows: &[ResultRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_csv(rows: &[ResultRow], path: impl AsRef<Path>) -> Result<()> {
    write_csv(rows, std::fs::File::create(path)?)
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// Words sampled when full enumeration would exceed this many.
pub const SEPARABILITY_ENUMERATION_LIMIT: usize = 200_000;
pub const SEPARABILITY_SAMPLES: usize = 5000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolAccuracy {
    pub symbol: String,
    pub words: usize,
    pub accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectedState {
    pub word: String,
    pub last: String,
    pub pc1: f64,
    pub pc2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityReport {
    pub words: usize,
    pub enumerated: bool,
    pub accuracy: f64,
    pub per_symbol: Vec<SymbolAccuracy>,
    pub projection: Vec<ProjectedState>,
}

fn all_words(k: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|w| {
                (0..k).map(move |s| {
                    let mut v = w.clone();
                    v.push(s);
                    v
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

/// How well a linear map of the final reservoir state recovers the last
/// symbol, over all nonempty words up to `max_len` (sampled when there are
/// too many), with a two-component principal projection of the states.
pub fn separability_report(r: &Reservoir, max_len: usize, table: &SymbolTable, seed: u64) -> Result<SeparabilityReport> {
    let k = table.len();
    if k == 0 || max_len == 0 {
        return Err(Error::InvalidConfig("separability needs symbols and a positive length".into()));
    }
    if table.n() != r.n() {
        return Err(Error::DimensionMismatch {
            expected: r.n(),
            actual: table.n(),
        });
    }
    let total: f64 = (1..=max_len).map(|l| (k as f64).powi(l as i32)).sum();
    let enumerated = total <= SEPARABILITY_ENUMERATION_LIMIT as f64;
    let words = if enumerated {
        all_words(k, max_len)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..SEPARABILITY_SAMPLES)
            .map(|_| {
                let l = rng.random_range(1..=max_len);
                (0..l).map(|_| rng.random_range(0..k)).collect()
            })
            .collect()
    };
    let codes: Vec<&[f64]> = (0..k).map(|s| table.code(SymbolId(s))).collect();
    let states = crate::par::map(&words, |w| {
        let xs: Vec<&[f64]> = w.iter().map(|s| codes[*s]).collect();
        r.encode_sequence(&xs).map(|h| h.0)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let h = Matrix::from_rows(&states, r.m())?;
    let labels: Vec<usize> = words.iter().map(|w| *w.last().expect("nonempty")).collect();
    let targets = Matrix::from_fn(words.len(), k, |i, c| if labels[i] == c { 1.0 } else { -1.0 });
    let readout = fit_linear_ridge(&h, &targets, 1e-8)?;
    let scores = readout.predict_batch(&h);
    let mut hits = vec![0usize; k];
    let mut counts = vec![0usize; k];
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        if crate::classifiers::argmax(scores.row(i)) == l {
            hits[l] += 1;
        }
    }
    let per_symbol = (0..k)
        .map(|s| SymbolAccuracy {
            symbol: table.name(SymbolId(s)).to_string(),
            words: counts[s],
            accuracy: if counts[s] == 0 { 1.0 } else { hits[s] as f64 / counts[s] as f64 },
        })
        .collect();
    let projection = principal_projection(&h)?
        .into_iter()
        .zip(&words)
        .map(|((pc1, pc2), w)| ProjectedState {
            word: table.render(&w.iter().map(|s| SymbolId(*s)).collect::<Vec<_>>()),
            last: table.name(SymbolId(*w.last().expect("nonempty"))).to_string(),
            pc1,
            pc2,
        })
        .collect();
    Ok(SeparabilityReport {
        words: words.len(),
        enumerated,
        accuracy: hits.iter().sum::<usize>() as f64 / words.len() as f64,
        per_symbol,
        projection,
    })
}

/// Coordinates of the centred rows along the two leading principal axes.
pub fn principal_projection(x: &Matrix) -> Result<Vec<(f64, f64)>> {
    let (n, d) = (x.rows(), x.cols());
    if n == 0 {
        return Ok(Vec::new());
    }
    let mean: Vec<f64> = (0..d).map(|j| x.iter_rows().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let centred = Matrix::from_fn(n, d, |i, j| x[(i, j)] - mean[j]);
    let mut cov = centred.transpose().matmul(&centred);
    cov.scale(1.0 / n as f64);
    let (_, vecs) = cov.symmetric_eigen()?;
    let axis = |c: Option<usize>| -> Vec<f64> { c.map_or(vec![0.0; d], |c| (0..d).map(|i| vecs[(i, c)]).collect()) };
    let a1 = axis(d.checked_sub(1));
    let a2 = axis(d.checked_sub(2));
    Ok(centred
        .iter_rows()
        .map(|r| (crate::matrix::dot(r, &a1), crate::matrix::dot(r, &a2)))
        .collect())
}

pub fn write_projection_csv<W: Write>(report: &SeparabilityReport, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for p in &report.projection {
        out.serialize(p)?;
    }
    out.flush()?;
    Ok(())
}
