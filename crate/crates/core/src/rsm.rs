//! The reservoir stack machine: stack dynamics, teacher-forced collection of
//! classifier training data, fitting and batched evaluation.

use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use std::path::Path;

use crate::classifiers::{fit_linear_ridge, KernelBank, LinearReadout};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::par;
use crate::reservoir::Reservoir;

/// Default guard on the pop/push loop of one time step.
pub const DEFAULT_MAX_INNER_ITERATIONS: usize = 64;

/// Desired pop, push, shift and output behaviour for one input sequence.
///
/// Row `t` of `J` and `A` lists the actions of step `t` in order and ends
/// with the `(0, 0)` sentinel; a zero push code means "no push".
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub x: Vec<Vec<f64>>,
    #[serde(rename = "J")]
    pub pops: Vec<Vec<usize>>,
    #[serde(rename = "A")]
    pub pushes: Vec<Vec<Vec<f64>>>,
    pub rho: Vec<u8>,
    #[serde(rename = "Y")]
    pub y: Vec<Vec<f64>>,
}

fn is_zero(v: &[f64]) -> bool {
    v.iter().all(|x| *x == 0.0)
}

impl Annotation {
    /// Number of input steps `T`.
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn input_dim(&self) -> Option<usize> {
        self.x.first().map(Vec::len)
    }

    pub fn output_dim(&self) -> usize {
        self.y.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        let steps = self.x.len() + 1;
        let bad = |what: &str| Err(Error::MalformedAnnotation(what.to_string()));
        if self.pops.len() != steps || self.pushes.len() != steps {
            return bad("J and A need T+1 rows");
        }
        if self.rho.len() != steps || self.y.len() != steps {
            return bad("rho and Y need T+1 entries");
        }
        if let Some(n) = self.input_dim() {
            if self.x.iter().any(|v| v.len() != n) {
                return bad("inputs have unequal dimension");
            }
        }
        let l = self.output_dim();
        if self.y.iter().any(|v| v.len() != l) {
            return bad("outputs have unequal dimension");
        }
        for (t, (j, a)) in self.pops.iter().zip(&self.pushes).enumerate() {
            if j.len() != a.len() || j.is_empty() {
                return bad(&format!("step {t}: J and A rows differ or are empty"));
            }
            let last = j.len() - 1;
            for k in 0..=last {
                let sentinel = j[k] == 0 && is_zero(&a[k]);
                if sentinel != (k == last) {
                    return bad(&format!("step {t}: rows must end with exactly one (0, 0) sentinel"));
                }
            }
        }
        Ok(())
    }

    pub fn write_jsonl<W: Write>(items: &[Annotation], mut w: W) -> Result<()> {
        for a in items {
            serde_json::to_writer(&mut w, a)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Vec<Annotation>> {
        let mut out = Vec::new();
        for line in r.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let a: Annotation = serde_json::from_str(&line)?;
            a.validate()?;
            out.push(a);
        }
        Ok(out)
    }

    pub fn load_jsonl(path: impl AsRef<Path>) -> Result<Vec<Annotation>> {
        Self::read_jsonl(std::io::BufReader::new(std::fs::File::open(path)?))
    }

    pub fn save_jsonl(items: &[Annotation], path: impl AsRef<Path>) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        Self::write_jsonl(items, &mut w)?;
        w.flush()?;
        Ok(())
    }
}

/// Stack of codes with one cached reservoir state per cell: `states[k]` is
/// the reservoir fold over `symbols[..=k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct StackWithStates {
    symbols: Vec<Vec<f64>>,
    states: Vec<Vec<f64>>,
    zero: Vec<f64>,
}

impl StackWithStates {
    pub fn new(m: usize) -> Self {
        Self {
            symbols: Vec::new(),
            states: Vec::new(),
            zero: vec![0.0; m],
        }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Vec<f64>] {
        &self.symbols
    }

    /// Stack representation `g`; zero for the empty stack.
    pub fn top_state(&self) -> &[f64] {
        self.states.last().unwrap_or(&self.zero)
    }

    pub fn push(&mut self, r: &Reservoir, code: &[f64]) {
        let g = r.step_vec(self.top_state(), code);
        self.symbols.push(code.to_vec());
        self.states.push(g);
    }

    pub fn pop(&mut self, j: usize) -> Result<()> {
        if j > self.len() {
            return Err(Error::PopUnderflow {
                step: 0,
                pops: j,
                height: self.len(),
            });
        }
        self.truncate(self.len() - j);
        Ok(())
    }

    /// Pops up to `j` cells; returns true when the request had to be clamped.
    pub fn pop_clamped(&mut self, j: usize) -> bool {
        let clamped = j > self.len();
        self.truncate(self.len().saturating_sub(j));
        clamped
    }

    fn truncate(&mut self, k: usize) {
        self.symbols.truncate(k);
        self.states.truncate(k);
    }

    /// Recomputes `g` by folding the reservoir over the whole stack.
    pub fn refold(&self, r: &Reservoir) -> Vec<f64> {
        let mut g = self.zero.clone();
        for s in &self.symbols {
            g = r.step_vec(&g, s);
        }
        g
    }
}

/// Classifier inputs and targets gathered by teacher forcing.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainingData {
    /// `(h, g)` before every pop/push decision, sentinel rows included.
    pub control: Vec<Vec<f64>>,
    pub pop: Vec<usize>,
    pub push: Vec<Vec<f64>>,
    /// `(h, g)` once per step, after the pop/push loop.
    pub states: Vec<Vec<f64>>,
    pub shift: Vec<usize>,
    pub y: Vec<Vec<f64>>,
}

impl TrainingData {
    pub fn extend(&mut self, other: TrainingData) {
        self.control.extend(other.control);
        self.pop.extend(other.pop);
        self.push.extend(other.push);
        self.states.extend(other.states);
        self.shift.extend(other.shift);
        self.y.extend(other.y);
    }

    pub fn control_matrix(&self) -> Result<Matrix> {
        let d = self.control.first().map_or(0, Vec::len);
        Matrix::from_rows(&self.control, d)
    }

    pub fn state_matrix(&self) -> Result<Matrix> {
        let d = self.states.first().map_or(0, Vec::len);
        Matrix::from_rows(&self.states, d)
    }
}

fn concat(h: &[f64], g: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(h.len() + g.len());
    v.extend_from_slice(h);
    v.extend_from_slice(g);
    v
}

/// Teacher-forces the annotation's actions, recording classifier inputs.
pub fn collect_training(r: &Reservoir, ann: &Annotation) -> Result<TrainingData> {
    collect_training_with_stacks(r, ann).map(|(d, _)| d)
}

/// As [`collect_training`], also returning the stack after every step.
pub fn collect_training_with_stacks(
    r: &Reservoir,
    ann: &Annotation,
) -> Result<(TrainingData, Vec<Vec<Vec<f64>>>)> {
    ann.validate()?;
    if let Some(n) = ann.input_dim() {
        if n != r.n() {
            return Err(Error::DimensionMismatch {
                expected: r.n(),
                actual: n,
            });
        }
    }
    let zero_x = vec![0.0; r.n()];
    let mut data = TrainingData::default();
    let mut stacks = Vec::with_capacity(ann.len() + 1);
    let mut stack = StackWithStates::new(r.m());
    let mut h = vec![0.0; r.m()];
    for t in 0..=ann.len() {
        let x = ann.x.get(t).unwrap_or(&zero_x);
        h = r.step_vec(&h, x);
        for (&j, a) in ann.pops[t].iter().zip(&ann.pushes[t]) {
            data.control.push(concat(&h, stack.top_state()));
            data.pop.push(j);
            data.push.push(a.clone());
            if j > stack.len() {
                return Err(Error::PopUnderflow {
                    step: t,
                    pops: j,
                    height: stack.len(),
                });
            }
            stack.pop(j)?;
            if !is_zero(a) {
                if a.len() != r.n() {
                    return Err(Error::DimensionMismatch {
                        expected: r.n(),
                        actual: a.len(),
                    });
                }
                stack.push(r, a);
            }
        }
        data.states.push(concat(&h, stack.top_state()));
        data.shift.push(ann.rho[t] as usize);
        data.y.push(ann.y[t].clone());
        if ann.rho[t] > 0 {
            stack.push(r, x);
        }
        stacks.push(stack.symbols().to_vec());
    }
    Ok((data, stacks))
}

/// Gathers training data over a corpus, in corpus order.
pub fn collect_corpus(r: &Reservoir, corpus: &[Annotation]) -> Result<TrainingData> {
    let parts = par::map(corpus, |a| collect_training(r, a));
    let mut data = TrainingData::default();
    for p in parts {
        data.extend(p?);
    }
    Ok(data)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutMode {
    Classifier,
    Ridge,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitParams {
    /// Ridge penalty of the kernel classifiers.
    pub classifier_regularization: f64,
    /// Ridge penalty of a linear output map.
    pub ridge_regularization: f64,
    pub max_inner_iterations: usize,
}

impl Default for FitParams {
    fn default() -> Self {
        Self {
            classifier_regularization: 1e-3,
            ridge_regularization: 1e-3,
            max_inner_iterations: DEFAULT_MAX_INNER_ITERATIONS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
enum OutputMap {
    /// The output head of the readout bank picks one of these vectors.
    Classifier { values: Vec<Vec<f64>> },
    Ridge { readout: LinearReadout },
}

/// Trained reservoir stack machine.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RSMachine {
    reservoir: Reservoir,
    /// Heads: pop count, push class.
    control: KernelBank,
    /// Heads: shift, then the output class when outputs are classified.
    readout: KernelBank,
    /// Push class `k > 0` pushes `push_codes[k - 1]`.
    push_codes: Vec<Vec<f64>>,
    output: OutputMap,
    max_inner_iterations: usize,
}

/// Sorted distinct vectors; sorting makes class indices independent of
/// corpus order.
fn distinct(vs: impl Iterator<Item = Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vs.collect();
    out.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    out.dedup();
    out
}

fn class_of(codes: &[Vec<f64>], v: &[f64]) -> usize {
    codes.iter().position(|c| c.as_slice() == v).expect("code registered")
}

/// Fraction of teacher-forced decisions a machine reproduces.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fidelity {
    pub control_points: usize,
    pub control_agree: usize,
    pub shift_points: usize,
    pub shift_agree: usize,
}

impl Fidelity {
    pub fn rate(&self) -> f64 {
        let n = self.control_points + self.shift_points;
        if n == 0 {
            1.0
        } else {
            (self.control_agree + self.shift_agree) as f64 / n as f64
        }
    }
}

/// Result of one evaluation.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct RunOutcome {
    /// `y_1, ..., y_{T+1}`.
    pub outputs: Vec<Vec<f64>>,
    /// Some pop request exceeded the stack height and was clamped.
    pub underflow: bool,
    /// Some pop/push loop hit the iteration guard and was cut short.
    pub runaway: bool,
    pub trace: Option<Vec<RunStep>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunStep {
    /// `(pops, push code)` per loop iteration, the final `(0, zero)` included.
    pub actions: Vec<(usize, Vec<f64>)>,
    pub shift: bool,
    /// Stack after the shift.
    pub stack: Vec<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub trace: bool,
    /// Re-fold the stack after every change and assert it equals the cache.
    pub verify_cache: bool,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Phase {
    Control,
    Readout,
    Done,
}

struct Cursor<'a> {
    x: &'a [Vec<f64>],
    t: usize,
    h: Vec<f64>,
    stack: StackWithStates,
    inner: usize,
    phase: Phase,
    pending: Vec<usize>,
    actions: Vec<(usize, Vec<f64>)>,
    outcome: RunOutcome,
}

impl RSMachine {
    /// Fits all four functions on the concatenated teacher-forced data.
    pub fn fit(
        reservoir: Reservoir,
        corpus: &[Annotation],
        out_mode: OutMode,
        params: &FitParams,
    ) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::EmptyData);
        }
        let data = collect_corpus(&reservoir, corpus)?;
        Self::fit_data(reservoir, &data, out_mode, params)
    }

    pub fn fit_data(
        reservoir: Reservoir,
        data: &TrainingData,
        out_mode: OutMode,
        params: &FitParams,
    ) -> Result<Self> {
        let push_codes = distinct(data.push.iter().filter(|a| !is_zero(a)).cloned());
        let push: Vec<usize> = data
            .push
            .iter()
            .map(|a| if is_zero(a) { 0 } else { 1 + class_of(&push_codes, a) })
            .collect();
        let control = KernelBank::fit(
            &data.control_matrix()?,
            &[&data.pop, &push],
            params.classifier_regularization,
        )?;
        let states = data.state_matrix()?;
        let (readout, output) = match out_mode {
            OutMode::Classifier => {
                let values = distinct(data.y.iter().cloned());
                let labels: Vec<usize> = data.y.iter().map(|y| class_of(&values, y)).collect();
                let bank = KernelBank::fit(
                    &states,
                    &[&data.shift, &labels],
                    params.classifier_regularization,
                )?;
                (bank, OutputMap::Classifier { values })
            }
            OutMode::Ridge => {
                let bank = KernelBank::fit(&states, &[&data.shift], params.classifier_regularization)?;
                let l = data.y.first().map_or(0, Vec::len);
                let y = Matrix::from_rows(&data.y, l)?;
                let readout = fit_linear_ridge(&states, &y, params.ridge_regularization)?;
                (bank, OutputMap::Ridge { readout })
            }
        };
        Ok(Self {
            reservoir,
            control,
            readout,
            push_codes,
            output,
            max_inner_iterations: params.max_inner_iterations,
        })
    }

    pub fn reservoir(&self) -> &Reservoir {
        &self.reservoir
    }

    pub fn push_codes(&self) -> &[Vec<f64>] {
        &self.push_codes
    }

    pub fn pop_classes(&self) -> &[usize] {
        self.control.classes(0)
    }

    /// Largest pop count the machine can emit.
    pub fn max_pop(&self) -> usize {
        self.pop_classes().iter().copied().max().unwrap_or(0)
    }

    pub fn out_mode(&self) -> OutMode {
        match self.output {
            OutputMap::Classifier { .. } => OutMode::Classifier,
            OutputMap::Ridge { .. } => OutMode::Ridge,
        }
    }

    pub fn max_inner_iterations(&self) -> usize {
        self.max_inner_iterations
    }

    pub fn set_max_inner_iterations(&mut self, k: usize) {
        self.max_inner_iterations = k;
    }

    pub fn control_support(&self) -> usize {
        self.control.support_size()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let w = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer(w, self)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let r = std::io::BufReader::new(std::fs::File::open(path)?);
        Ok(serde_json::from_reader(r)?)
    }

    /// Runs the machine; a runaway pop/push loop is an error, clamped pops
    /// are tolerated.
    pub fn run(&self, x: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let out = self.run_with(x, RunOptions::default())?;
        if out.runaway {
            return Err(Error::RunawayLoop {
                step: 0,
                limit: self.max_inner_iterations,
            });
        }
        Ok(out.outputs)
    }

    pub fn run_with(&self, x: &[Vec<f64>], opts: RunOptions) -> Result<RunOutcome> {
        let seqs = [x.to_vec()];
        Ok(self.run_batch_with(&seqs, opts)?.swap_remove(0))
    }

    /// Evaluates many sequences in lockstep so that every classifier query
    /// of a round is answered by one batched kernel evaluation.
    pub fn run_batch(&self, xs: &[Vec<Vec<f64>>]) -> Result<Vec<RunOutcome>> {
        self.run_batch_with(xs, RunOptions::default())
    }

    pub fn run_batch_with(&self, xs: &[Vec<Vec<f64>>], opts: RunOptions) -> Result<Vec<RunOutcome>> {
        let r = &self.reservoir;
        for x in xs {
            if let Some(v) = x.iter().find(|v| v.len() != r.n()) {
                return Err(Error::DimensionMismatch {
                    expected: r.n(),
                    actual: v.len(),
                });
            }
        }
        let zero_x = vec![0.0; r.n()];
        let mut cursors: Vec<Cursor> = xs
            .iter()
            .map(|x| Cursor {
                x,
                t: 0,
                h: r.step_vec(&vec![0.0; r.m()], x.first().unwrap_or(&zero_x)),
                stack: StackWithStates::new(r.m()),
                inner: 0,
                phase: Phase::Control,
                pending: Vec::new(),
                actions: Vec::new(),
                outcome: RunOutcome {
                    trace: opts.trace.then(Vec::new),
                    ..RunOutcome::default()
                },
            })
            .collect();
        loop {
            let active = self.answer(&mut cursors, Phase::Control, &self.control)?;
            par::for_each_mut(&mut cursors, |c| {
                if c.phase == Phase::Control && !c.pending.is_empty() {
                    self.apply_control(c, opts);
                }
            });
            let active = active + self.answer(&mut cursors, Phase::Readout, &self.readout)?;
            par::for_each_mut(&mut cursors, |c| {
                if c.phase == Phase::Readout && !c.pending.is_empty() {
                    self.apply_readout(c, &zero_x);
                }
            });
            if active == 0 {
                break;
            }
        }
        Ok(cursors.into_iter().map(|c| c.outcome).collect())
    }

    /// Queries `bank` for every cursor in `phase`, storing the answers.
    fn answer(&self, cursors: &mut [Cursor], phase: Phase, bank: &KernelBank) -> Result<usize> {
        let idx: Vec<usize> = (0..cursors.len()).filter(|&i| cursors[i].phase == phase).collect();
        if idx.is_empty() {
            return Ok(0);
        }
        let rows = par::map(&idx, |&i| concat(&cursors[i].h, cursors[i].stack.top_state()));
        let q = Matrix::from_rows(&rows, 2 * self.reservoir.m())?;
        let answers = bank.predict_batch(&q)?;
        for (k, &i) in idx.iter().enumerate() {
            cursors[i].pending = answers.iter().map(|head| head[k]).collect();
        }
        Ok(idx.len())
    }

    fn apply_control(&self, c: &mut Cursor, opts: RunOptions) {
        let (j, a) = (c.pending[0], c.pending[1]);
        c.pending.clear();
        if j > 0 && c.stack.pop_clamped(j) {
            c.outcome.underflow = true;
        }
        if a > 0 {
            c.stack.push(&self.reservoir, &self.push_codes[a - 1]);
        }
        if opts.verify_cache {
            assert_eq!(c.stack.top_state(), c.stack.refold(&self.reservoir).as_slice());
        }
        if c.outcome.trace.is_some() {
            let code = if a > 0 {
                self.push_codes[a - 1].clone()
            } else {
                vec![0.0; self.reservoir.n()]
            };
            c.actions.push((j, code));
        }
        c.inner += 1;
        if j == 0 && a == 0 {
            c.phase = Phase::Readout;
        } else if c.inner >= self.max_inner_iterations {
            c.outcome.runaway = true;
            c.phase = Phase::Readout;
        }
    }

    fn apply_readout(&self, c: &mut Cursor, zero_x: &[f64]) {
        let shift = c.pending[0] > 0;
        let g = c.stack.top_state();
        let y = match &self.output {
            OutputMap::Classifier { values } => values[c.pending[1]].clone(),
            OutputMap::Ridge { readout } => readout.predict(&concat(&c.h, g)),
        };
        c.pending.clear();
        c.outcome.outputs.push(y);
        let x = c.x.get(c.t).map_or(zero_x, Vec::as_slice);
        if shift {
            c.stack.push(&self.reservoir, x);
        }
        if let Some(trace) = c.outcome.trace.as_mut() {
            trace.push(RunStep {
                actions: std::mem::take(&mut c.actions),
                shift,
                stack: c.stack.symbols().to_vec(),
            });
        }
        c.t += 1;
        if c.t > c.x.len() {
            c.phase = Phase::Done;
            return;
        }
        let next = c.x.get(c.t).map_or(zero_x, Vec::as_slice);
        c.h = self.reservoir.step_vec(&c.h, next);
        c.inner = 0;
        c.phase = Phase::Control;
    }

    /// Agreement of the fitted classifiers with teacher-forced decisions.
    pub fn training_fidelity(&self, data: &TrainingData) -> Result<Fidelity> {
        let control = self.control.predict_batch(&data.control_matrix()?)?;
        let control_agree = (0..data.pop.len())
            .filter(|&i| {
                let a = control[1][i];
                let code_ok = if a == 0 {
                    is_zero(&data.push[i])
                } else {
                    self.push_codes[a - 1] == data.push[i]
                };
                control[0][i] == data.pop[i] && code_ok
            })
            .count();
        let shift = self.readout.predict_batch(&data.state_matrix()?)?;
        let shift_agree = shift[0].iter().zip(&data.shift).filter(|(a, b)| a == b).count();
        Ok(Fidelity {
            control_points: data.pop.len(),
            control_agree,
            shift_points: data.shift.len(),
            shift_agree,
        })
    }
}
