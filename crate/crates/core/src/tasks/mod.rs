//! Benchmark datasets: the seven language tasks, copy and repeat copy.

pub mod copy;
pub mod language;
pub mod pcfg;

use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lr1::LanguageName;
use crate::rsm::Annotation;

/// Bit channels of the copy tasks.
pub const BITS: usize = 8;
/// Input channel carrying -1 on data steps and +1 on end tokens.
pub const END_CHANNEL: usize = 8;
pub const PLACEHOLDER_CHANNEL: usize = 9;
pub const COPY_CHANNELS: usize = 10;

/// Inclusive length window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub min: usize,
    pub max: usize,
}

impl Window {
    pub const fn new(min: usize, max: usize) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, len: usize) -> bool {
        (self.min..=self.max).contains(&len)
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> usize {
        rng.random_range(self.min..=self.max)
    }
}

/// An input sequence with its `T+1` desired output rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestItem {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
}

impl TestItem {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskName {
    Dyck1,
    Dyck2,
    Dyck3,
    Anbn,
    Palindrome,
    Json,
    Latch,
    Copy,
    RepeatCopy,
}

impl TaskName {
    pub const ALL: [TaskName; 9] = [
        TaskName::Dyck1,
        TaskName::Dyck2,
        TaskName::Dyck3,
        TaskName::Anbn,
        TaskName::Palindrome,
        TaskName::Json,
        TaskName::Latch,
        TaskName::Copy,
        TaskName::RepeatCopy,
    ];

    pub fn language(self) -> Option<LanguageName> {
        Some(match self {
            TaskName::Dyck1 => LanguageName::Dyck1,
            TaskName::Dyck2 => LanguageName::Dyck2,
            TaskName::Dyck3 => LanguageName::Dyck3,
            TaskName::Anbn => LanguageName::Anbn,
            TaskName::Palindrome => LanguageName::Palindrome,
            TaskName::Json => LanguageName::Json,
            TaskName::Latch => LanguageName::Latch,
            TaskName::Copy | TaskName::RepeatCopy => return None,
        })
    }

    pub fn is_copy(self) -> bool {
        self.language().is_none()
    }

    /// Input dimension.
    pub fn channels(self) -> usize {
        match self.language() {
            Some(l) => l.automaton().table().n(),
            None => COPY_CHANNELS,
        }
    }

    /// Output dimension.
    pub fn outputs(self) -> usize {
        if self.is_copy() {
            BITS
        } else {
            1
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TaskName::Dyck1 => "dyck1",
            TaskName::Dyck2 => "dyck2",
            TaskName::Dyck3 => "dyck3",
            TaskName::Anbn => "anbn",
            TaskName::Palindrome => "palindrome",
            TaskName::Json => "json",
            TaskName::Latch => "latch",
            TaskName::Copy => "copy",
            TaskName::RepeatCopy => "repeat-copy",
        }
    }
}

impl fmt::Display for TaskName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('_', "-");
        let key = if key == "repeatcopy" { "repeat-copy".to_string() } else { key };
        TaskName::ALL
            .into_iter()
            .find(|t| t.as_str() == key)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown task {s:?}")))
    }
}

/// Generation parameters; the defaults are the benchmark setup.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TaskConfig {
    pub train_count: usize,
    pub test_count: usize,
    pub train_window: Window,
    pub test_window: Window,
    /// Probability that a latch word ends whenever its parity allows it.
    pub latch_stop: f64,
    pub copy_length: Window,
    pub repeat_copy_length: Window,
    pub train_repeats: Window,
    pub test_repeats: Window,
}

impl Default for TaskConfig {
    fn default() -> Self {
        Self {
            train_count: 100,
            test_count: 100,
            train_window: Window::new(10, 50),
            test_window: Window::new(50, 120),
            latch_stop: 0.05,
            copy_length: Window::new(1, 20),
            repeat_copy_length: Window::new(1, 10),
            train_repeats: Window::new(1, 10),
            test_repeats: Window::new(1, 20),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskManifest {
    pub task: TaskName,
    pub seed: u64,
    pub train_count: usize,
    pub test_count: usize,
    pub config: TaskConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaskDataset {
    pub name: TaskName,
    pub seed: u64,
    pub train: Vec<Annotation>,
    pub test: Vec<TestItem>,
    pub config: TaskConfig,
}

pub fn make_language_task(name: LanguageName, seed: u64, cfg: &TaskConfig) -> Result<TaskDataset> {
    let a = name.automaton();
    let sampler = language::Sampler::for_language(name, cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (train, _) = language::make_split(&a, &sampler, &mut rng, cfg.train_window, cfg.train_count)?;
    let test = language::sample_words(&a, &sampler, &mut rng, cfg.test_window, cfg.test_count)?
        .iter()
        .map(|w| {
            Ok(TestItem {
                x: a.table().encode_word(w),
                y: language::prefix_targets(&a, w)?,
            })
        })
        .collect::<Result<_>>()?;
    let task = TaskName::ALL
        .into_iter()
        .find(|t| t.language() == Some(name))
        .expect("every language is a task");
    Ok(TaskDataset {
        name: task,
        seed,
        train,
        test,
        config: cfg.clone(),
    })
}

pub fn make_copy_task(seed: u64, cfg: &TaskConfig) -> Result<TaskDataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |count: usize| -> Vec<copy::CopyInstance> {
        (0..count)
            .map(|_| {
                let l = cfg.copy_length.draw(&mut rng);
                copy::CopyInstance::random(&mut rng, l, 1)
            })
            .collect()
    };
    let train = draw(cfg.train_count);
    let test = draw(cfg.test_count);
    Ok(TaskDataset {
        name: TaskName::Copy,
        seed,
        train: train.iter().map(copy::CopyInstance::annotation).collect(),
        test: test.iter().map(copy::CopyInstance::test_item).collect(),
        config: cfg.clone(),
    })
}

/// Test sets always contain an instance with more repeats than the training
/// maximum whenever the test window allows it.
pub fn make_repeat_copy_task(seed: u64, cfg: &TaskConfig) -> Result<TaskDataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |count: usize, repeats: Window, rng: &mut ChaCha8Rng| -> Vec<copy::CopyInstance> {
        (0..count)
            .map(|_| {
                let l = cfg.repeat_copy_length.draw(rng);
                let r = repeats.draw(rng);
                copy::CopyInstance::random(rng, l, r)
            })
            .collect()
    };
    let train = draw(cfg.train_count, cfg.train_repeats, &mut rng);
    let mut test = draw(cfg.test_count, cfg.test_repeats, &mut rng);
    let beyond = Window::new(cfg.train_repeats.max + 1, cfg.test_repeats.max);
    if beyond.min <= beyond.max && !test.is_empty() && test.iter().all(|i| i.repeats <= cfg.train_repeats.max) {
        test[0].repeats = beyond.draw(&mut rng);
    }
    Ok(TaskDataset {
        name: TaskName::RepeatCopy,
        seed,
        train: train.iter().map(copy::CopyInstance::annotation).collect(),
        test: test.iter().map(copy::CopyInstance::test_item).collect(),
        config: cfg.clone(),
    })
}

pub fn make_task(name: TaskName, seed: u64, cfg: &TaskConfig) -> Result<TaskDataset> {
    match name {
        TaskName::Copy => make_copy_task(seed, cfg),
        TaskName::RepeatCopy => make_repeat_copy_task(seed, cfg),
        _ => make_language_task(name.language().expect("language task"), seed, cfg),
    }
}

impl TaskDataset {
    pub fn manifest(&self) -> TaskManifest {
        TaskManifest {
            task: self.name,
            seed: self.seed,
            train_count: self.train.len(),
            test_count: self.test.len(),
            config: self.config.clone(),
        }
    }

    /// Writes `train.jsonl`, `test.jsonl` and `manifest.json` into `dir`.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        Annotation::save_jsonl(&self.train, dir.join("train.jsonl"))?;
        let mut w = BufWriter::new(fs::File::create(dir.join("test.jsonl"))?);
        for item in &self.test {
            serde_json::to_writer(&mut w, item)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
        let m = fs::File::create(dir.join("manifest.json"))?;
        serde_json::to_writer_pretty(m, &self.manifest())?;
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let m: TaskManifest = serde_json::from_reader(BufReader::new(fs::File::open(dir.join("manifest.json"))?))?;
        let train = Annotation::load_jsonl(dir.join("train.jsonl"))?;
        let test = load_test_items(dir.join("test.jsonl"))?;
        Ok(Self {
            name: m.task,
            seed: m.seed,
            train,
            test,
            config: m.config,
        })
    }
}

/// Reads test items, one JSON object per line. Annotation lines are accepted
/// too and reduced to their inputs and outputs.
pub fn load_test_items(path: impl AsRef<Path>) -> Result<Vec<TestItem>> {
    let r = BufReader::new(fs::File::open(path)?);
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v: serde_json::Value = serde_json::from_str(&line)?;
        let item = if v.get("Y").is_some() {
            let a: Annotation = serde_json::from_value(v)?;
            TestItem { x: a.x, y: a.y }
        } else {
            serde_json::from_value(v)?
        };
        out.push(item);
    }
    Ok(out)
}
