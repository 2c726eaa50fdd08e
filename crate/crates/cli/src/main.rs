use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use rsm_core::alphabet::SymbolTable;
use rsm_core::harness::{
    build_reservoir, default_neurons, evaluate, experiment_manifest, hyperparameter_search, run_experiment,
    save_csv, separability_report, train_model, tuned_defaults, write_projection_csv, ExperimentConfig,
    Hyperparameters, Model, ModelKind, ReservoirParams, ResultRow,
};
use rsm_core::reservoir::Reservoir;
use rsm_core::tasks::{load_test_items, make_task, TaskConfig, TaskDataset, TaskName};

#[derive(Parser)]
#[command(name = "rsm", version, about = "Reservoir stack machine experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a task dataset and write train.jsonl, test.jsonl and manifest.json.
    Generate {
        #[arg(long)]
        task: TaskName,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// JSON task settings (counts, length windows).
        #[arg(long)]
        tasks: Option<PathBuf>,
    },
    /// Fit one model and write it to DIR/machine.json.
    Train {
        #[arg(long)]
        task: TaskName,
        #[arg(long)]
        model: ModelKind,
        /// JSON training settings; every field is optional.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a trained machine on a test file.
    Eval {
        #[arg(long)]
        machine: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Search once, then train and test on fresh data for every repeat.
    Experiment {
        #[arg(long)]
        task: TaskName,
        #[arg(long)]
        model: ModelKind,
        #[arg(long, default_value_t = 10)]
        repeats: usize,
        /// Random configurations to try; 0 uses the tuned defaults.
        #[arg(long, default_value_t = 20)]
        budget: usize,
        #[arg(long, default_value_t = 3)]
        validation_sets: usize,
        #[arg(long)]
        neurons: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Full JSON experiment config; overrides the other flags.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Where to write the manifest with search ranges and trials.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Random hyperparameter search only; prints or writes the trials.
    Search {
        #[arg(long)]
        task: TaskName,
        #[arg(long)]
        model: ModelKind,
        #[arg(long, default_value_t = 20)]
        budget: usize,
        #[arg(long, default_value_t = 3)]
        validation_sets: usize,
        #[arg(long)]
        neurons: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Last-symbol linear accuracy of a reservoir over all short words.
    Separability {
        #[arg(long)]
        reservoir: PathBuf,
        #[arg(long, default_value_t = 10)]
        maxlen: usize,
        /// Symbol names, one-hot coded in order; defaults to s0, s1, ...
        #[arg(long, value_delimiter = ',')]
        symbols: Option<Vec<String>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Principal projection of the states, one row per word.
        #[arg(long)]
        projection: Option<PathBuf>,
    },
    /// Build a reservoir from JSON parameters, e.g. {"kind":"crj","cycle_weight":0.5,...}.
    BuildReservoir {
        #[arg(long)]
        params: String,
        #[arg(long)]
        neurons: usize,
        #[arg(long)]
        inputs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct TrainConfig {
    neurons: Option<usize>,
    seed: u64,
    hyperparameters: Option<Hyperparameters>,
    tasks: TaskConfig,
    /// Directory written by `generate`; sampled from `seed` when absent.
    data: Option<PathBuf>,
}

/// What `train` writes: the model plus what is needed to label results.
#[derive(Serialize, Deserialize)]
struct Trained {
    task: TaskName,
    model_kind: ModelKind,
    neurons: usize,
    hyperparameters: Hyperparameters,
    train_seconds: f64,
    model: Model,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), value)?;
    Ok(())
}

fn generate(task: TaskName, seed: u64, out: &Path, tasks: Option<PathBuf>) -> Result<()> {
    let cfg: TaskConfig = tasks.map(|p| read_json(&p)).transpose()?.unwrap_or_default();
    let data = make_task(task, seed, &cfg)?;
    data.save(out)?;
    eprintln!("{task}: {} training and {} test sequences in {}", data.train.len(), data.test.len(), out.display());
    Ok(())
}

fn train(task: TaskName, model: ModelKind, config: Option<PathBuf>, out: &Path) -> Result<()> {
    let cfg: TrainConfig = config.map(|p| read_json(&p)).transpose()?.unwrap_or_default();
    let data = match &cfg.data {
        Some(dir) => TaskDataset::load(dir)?,
        None => make_task(task, cfg.seed, &cfg.tasks)?,
    };
    if data.name != task {
        bail!("dataset holds {} but --task is {task}", data.name);
    }
    let neurons = cfg.neurons.unwrap_or_else(|| default_neurons(task, model));
    let hp = cfg.hyperparameters.unwrap_or_else(|| tuned_defaults(model, task));
    fs::create_dir_all(out)?;
    let clock = Instant::now();
    let fitted = train_model(model, task, &hp, neurons, &data.train, cfg.seed)?;
    let train_seconds = clock.elapsed().as_secs_f64();
    write_json(
        &out.join("machine.json"),
        &Trained {
            task,
            model_kind: model,
            neurons,
            hyperparameters: hp,
            train_seconds,
            model: fitted,
        },
    )?;
    if cfg.data.is_none() {
        data.save(out)?;
    }
    eprintln!("trained {model} on {task} in {train_seconds:.2}s");
    Ok(())
}

fn eval(machine: &Path, data: &Path, out: &Path) -> Result<()> {
    let trained: Trained = read_json(machine)?;
    let items = load_test_items(data)?;
    let mae = evaluate(&trained.model, &items)?;
    let row = ResultRow {
        model: trained.model_kind.label().into(),
        task: trained.task.as_str().into(),
        repeat: 0,
        mae,
        train_seconds: trained.train_seconds,
        hyperparameters: trained.hyperparameters.to_json(),
    };
    save_csv(&[row], out)?;
    println!("{} {} mae {mae:.6}", trained.model_kind, trained.task);
    Ok(())
}

fn summarize(rows: &[ResultRow]) {
    let n = rows.len().max(1) as f64;
    let mean = rows.iter().map(|r| r.mae).sum::<f64>() / n;
    let sd = (rows.iter().map(|r| (r.mae - mean).powi(2)).sum::<f64>() / n).sqrt();
    let secs = rows.iter().map(|r| r.train_seconds).sum::<f64>() / n;
    if let Some(r) = rows.first() {
        println!("{} {}: mae {mean:.4} ± {sd:.4}, train {secs:.2}s", r.model, r.task);
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Generate { task, seed, out, tasks } => generate(task, seed, &out, tasks),
        Command::Train {
            task,
            model,
            config,
            out,
        } => train(task, model, config, &out),
        Command::Eval { machine, data, out } => eval(&machine, &data, &out),
        Command::Experiment {
            task,
            model,
            repeats,
            budget,
            validation_sets,
            neurons,
            seed,
            config,
            out,
            manifest,
        } => {
            let cfg = match config {
                Some(p) => ExperimentConfig::load(&p)?,
                None => ExperimentConfig {
                    repeats,
                    search_budget: budget,
                    validation_sets,
                    seed,
                    neurons: neurons.unwrap_or_else(|| default_neurons(task, model)),
                    ..ExperimentConfig::new(task, model)
                },
            };
            cfg.validate()?;
            let report = run_experiment(&cfg)?;
            save_csv(&report.rows, &out)?;
            if let Some(p) = manifest {
                write_json(&p, &experiment_manifest(&cfg, &report))?;
            }
            summarize(&report.rows);
            Ok(())
        }
        Command::Search {
            task,
            model,
            budget,
            validation_sets,
            neurons,
            seed,
            out,
        } => {
            let cfg = ExperimentConfig {
                repeats: 1,
                search_budget: budget,
                validation_sets,
                seed,
                neurons: neurons.unwrap_or_else(|| default_neurons(task, model)),
                ..ExperimentConfig::new(task, model)
            };
            let result = hyperparameter_search(&cfg)?;
            for t in &result.trials {
                println!("{:.6} {}", t.validation_mae, t.hyperparameters.to_json());
            }
            println!("best {}", result.best.to_json());
            if let Some(p) = out {
                write_json(&p, &result)?;
            }
            Ok(())
        }
        Command::Separability {
            reservoir,
            maxlen,
            symbols,
            seed,
            out,
            projection,
        } => {
            let r: Reservoir = read_json(&reservoir)?;
            let names = symbols.unwrap_or_else(|| (0..r.n()).map(|i| format!("s{i}")).collect());
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            let table = SymbolTable::one_hot(&refs, &[])?;
            let report = separability_report(&r, maxlen, &table, seed)?;
            let mut w = csv::Writer::from_path(&out)?;
            for s in &report.per_symbol {
                w.serialize(s)?;
            }
            w.flush()?;
            if let Some(p) = projection {
                write_projection_csv(&report, fs::File::create(p)?)?;
            }
            println!(
                "{} words ({}), accuracy {:.4}",
                report.words,
                if report.enumerated { "all" } else { "sampled" },
                report.accuracy
            );
            Ok(())
        }
        Command::BuildReservoir {
            params,
            neurons,
            inputs,
            seed,
            out,
        } => {
            let p: ReservoirParams = serde_json::from_str(&params).context("parsing --params")?;
            let r = build_reservoir(&p, neurons, inputs, seed)?;
            write_json(&out, &r)?;
            println!("{} neurons, {} inputs", r.m(), r.n());
            Ok(())
        }
    }
}
