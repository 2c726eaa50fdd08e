//! Reservoir memory machines and the suffix-convergence probe that shows why
//! they cannot recognise palindromes.

use serde::{Deserialize, Serialize};

use crate::classifiers::{KernelClassifier, LinearReadout};
use crate::error::{Error, Result};
use crate::lr1;
use crate::matrix::norm;
use crate::reservoir::Reservoir;

/// Memory address chosen after each state update; 0 means no access.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AddressFn {
    Constant { address: usize },
    /// `addresses[t]` at step `t + 1`, zero afterwards.
    Schedule { addresses: Vec<usize> },
    /// Class labels of the classifier are the addresses.
    Kernel { classifier: KernelClassifier },
}

impl AddressFn {
    fn address(&self, t: usize, h: &[f64]) -> Result<usize> {
        Ok(match self {
            AddressFn::Constant { address } => *address,
            AddressFn::Schedule { addresses } => addresses.get(t).copied().unwrap_or(0),
            AddressFn::Kernel { classifier } => classifier.predict(h)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OutputFn {
    Linear { readout: LinearReadout },
    /// Emits `values[class]`.
    Kernel {
        classifier: KernelClassifier,
        values: Vec<Vec<f64>>,
    },
}

impl OutputFn {
    fn output(&self, h: &[f64]) -> Result<Vec<f64>> {
        match self {
            OutputFn::Linear { readout } => Ok(readout.predict(h)),
            OutputFn::Kernel { classifier, values } => {
                let c = classifier.predict(h)?;
                values
                    .get(c)
                    .cloned()
                    .ok_or_else(|| Error::InvalidConfig(format!("no output value for class {c}")))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RMMachine {
    pub reservoir: Reservoir,
    pub memory_rows: usize,
    pub address: AddressFn,
    pub output: OutputFn,
}

/// States and outputs of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RmmRun {
    pub states: Vec<Vec<f64>>,
    pub addresses: Vec<usize>,
    pub outputs: Vec<Vec<f64>>,
}

impl RMMachine {
    pub fn new(reservoir: Reservoir, memory_rows: usize, address: AddressFn, output: OutputFn) -> Self {
        Self {
            reservoir,
            memory_rows,
            address,
            output,
        }
    }

    /// Memory starts zeroed and unwritten on every call.
    pub fn run_traced(&self, x: &[Vec<f64>]) -> Result<RmmRun> {
        let r = &self.reservoir;
        let mut memory: Vec<Option<Vec<f64>>> = vec![None; self.memory_rows];
        let mut h = vec![0.0; r.m()];
        let mut run = RmmRun {
            states: Vec::with_capacity(x.len()),
            addresses: Vec::with_capacity(x.len()),
            outputs: Vec::with_capacity(x.len()),
        };
        for (t, xt) in x.iter().enumerate() {
            if xt.len() != r.n() {
                return Err(Error::DimensionMismatch {
                    expected: r.n(),
                    actual: xt.len(),
                });
            }
            h = r.step_vec(&h, xt);
            let a = self.address.address(t, &h)?;
            if a > self.memory_rows {
                return Err(Error::InvalidConfig(format!(
                    "address {a} exceeds {} memory rows",
                    self.memory_rows
                )));
            }
            if a > 0 {
                match &memory[a - 1] {
                    Some(stored) => h.clone_from(stored),
                    None => memory[a - 1] = Some(h.clone()),
                }
            }
            run.outputs.push(self.output.output(&h)?);
            run.states.push(h.clone());
            run.addresses.push(a);
        }
        Ok(run)
    }

    /// Outputs `y_1..y_T`.
    pub fn run(&self, x: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        self.run_traced(x).map(|r| r.outputs)
    }
}

pub fn run_rmm(mach: &RMMachine, x: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    mach.run(x)
}

/// `a^t $ a^t` and `b a^t $ a^t` over the palindrome alphabet.
pub fn probe_words(t: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let a = lr1::palindrome();
    let table = a.table();
    let code = |s: &str| table.encode(s).expect("palindrome symbol").to_vec();
    let mut w: Vec<Vec<f64>> = vec![code("a"); t];
    w.push(code("$"));
    w.extend(std::iter::repeat_n(code("a"), t));
    let mut v = vec![code("b")];
    v.extend(w.iter().cloned());
    (w, v)
}

/// Distance between the final states of `a^t $ a^t` and `b a^t $ a^t`.
pub fn suffix_convergence_probe(r: &Reservoir, t: usize) -> Result<f64> {
    let (w, v) = probe_words(t);
    let h = r.encode_sequence(&w)?;
    let h2 = r.encode_sequence(&v)?;
    let d: Vec<f64> = h.0.iter().zip(&h2.0).map(|(a, b)| a - b).collect();
    Ok(norm(&d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;

    fn readout(m: usize) -> OutputFn {
        let w = Matrix::from_fn(2, m, |i, j| ((i + 1) * (j + 2)) as f64 * 0.1);
        OutputFn::Linear {
            readout: LinearReadout::new(w, vec![0.5, -0.5], 1e-3).unwrap(),
        }
    }

    fn inputs() -> Vec<Vec<f64>> {
        (0..5).map(|t| vec![(t as f64).sin(), (t as f64).cos()]).collect()
    }

    #[test]
    fn address_zero_is_an_esn() {
        let r = Reservoir::random(12, 2, 0.9, 1.0, 3).unwrap();
        let mach = RMMachine::new(r.clone(), 2, AddressFn::Constant { address: 0 }, readout(12));
        let run = mach.run_traced(&inputs()).unwrap();
        assert_eq!(run.states, r.trajectory(&inputs()).unwrap());
    }

    #[test]
    fn recall_restores_the_written_state() {
        let r = Reservoir::random(12, 2, 0.9, 1.0, 3).unwrap();
        let mach = RMMachine::new(
            r.clone(),
            1,
            AddressFn::Schedule {
                addresses: vec![0, 1, 0, 0, 1],
            },
            readout(12),
        );
        let run = mach.run_traced(&inputs()).unwrap();
        let plain = r.trajectory(&inputs()).unwrap();
        assert_eq!(run.states[1], plain[1]);
        assert_eq!(run.states[4], run.states[1]);
        assert_eq!(run.states[2], r.step_vec(&plain[1], &inputs()[2]));
    }

    #[test]
    fn write_then_immediate_recall() {
        let r = Reservoir::random(6, 2, 0.5, 1.0, 9).unwrap();
        let mach = RMMachine::new(r, 1, AddressFn::Schedule { addresses: vec![1, 1] }, readout(6));
        let run = mach.run_traced(&inputs()[..2]).unwrap();
        assert_eq!(run.states[0], run.states[1]);
    }

    #[test]
    fn address_out_of_range() {
        let r = Reservoir::random(6, 2, 0.5, 1.0, 9).unwrap();
        let mach = RMMachine::new(r, 1, AddressFn::Constant { address: 2 }, readout(6));
        assert!(mach.run(&inputs()).is_err());
    }

    #[test]
    fn probe_shrinks_with_horizon() {
        let r = Reservoir::random(64, 4, 0.9, 1.0, 0).unwrap();
        let d: Vec<f64> = [10, 25, 50].iter().map(|t| suffix_convergence_probe(&r, *t).unwrap()).collect();
        assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
        let (w, _) = probe_words(5);
        assert_eq!(r.encode_sequence(&w).unwrap(), r.encode_sequence(&w).unwrap());
    }
}
