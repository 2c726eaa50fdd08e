//! Copy and repeat copy: eight random bits per step, an end-of-sequence
//! channel and a placeholder channel.
//!
//! Annotations always shift. At an end token the stack is filled with the
//! placeholder up to height [`FILL_HEIGHT`]; from the second end token on,
//! the previous output phase, the previous end token and the placeholders are
//! popped first. Each target bit then sits at a constant depth below the top
//! of the stack throughout the output phase.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{TestItem, BITS, END_CHANNEL, PLACEHOLDER_CHANNEL};
use crate::rsm::Annotation;

/// Stack height reached by placeholder filling.
pub const FILL_HEIGHT: usize = 20;

/// One copy or repeat-copy instance.
#[derive(Clone, Debug, PartialEq)]
pub struct CopyInstance {
    pub bits: Vec<[bool; BITS]>,
    pub repeats: usize,
}

fn channels() -> usize {
    super::COPY_CHANNELS
}

pub fn placeholder() -> Vec<f64> {
    let mut v = vec![0.0; channels()];
    v[PLACEHOLDER_CHANNEL] = 1.0;
    v
}

impl CopyInstance {
    pub fn random(rng: &mut ChaCha8Rng, len: usize, repeats: usize) -> Self {
        let bits = (0..len)
            .map(|_| std::array::from_fn(|_| rng.random::<bool>()))
            .collect();
        Self { bits, repeats }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Inputs: data steps with the end channel at -1, then per repeat an end
    /// token followed by as many zero steps as there are data steps.
    pub fn inputs(&self) -> Vec<Vec<f64>> {
        let n = channels();
        let mut x = Vec::new();
        for b in &self.bits {
            let mut v = vec![0.0; n];
            for (k, bit) in b.iter().enumerate() {
                v[k] = *bit as u8 as f64;
            }
            v[END_CHANNEL] = -1.0;
            x.push(v);
        }
        for _ in 0..self.repeats {
            let mut eos = vec![0.0; n];
            eos[END_CHANNEL] = 1.0;
            x.push(eos);
            x.extend(std::iter::repeat_n(vec![0.0; n], self.len()));
        }
        x
    }

    /// `T+1` target rows: zero until an end token, then the bits in order.
    pub fn targets(&self) -> Vec<Vec<f64>> {
        let l = self.len();
        let mut y = vec![vec![0.0; BITS]; l];
        for _ in 0..self.repeats {
            y.push(vec![0.0; BITS]);
            for b in &self.bits {
                y.push(b.iter().map(|v| *v as u8 as f64).collect());
            }
        }
        y.push(vec![0.0; BITS]);
        y
    }

    pub fn annotation(&self) -> Annotation {
        let l = self.len();
        let x = self.inputs();
        let steps = x.len() + 1;
        let zero = vec![0.0; channels()];
        let s = placeholder();
        let mut pops = vec![vec![0]; steps];
        let mut pushes = vec![vec![zero.clone()]; steps];
        let fill = FILL_HEIGHT.saturating_sub(l);
        for r in 0..self.repeats {
            let t = l + r * (l + 1);
            let mut j = Vec::new();
            let mut a = Vec::new();
            if r > 0 {
                // previous zeros, previous end token and the placeholders
                j.push(l + 1 + fill);
                a.push(if fill > 0 { s.clone() } else { zero.clone() });
                for _ in 1..fill {
                    j.push(0);
                    a.push(s.clone());
                }
            } else {
                for _ in 0..fill {
                    j.push(0);
                    a.push(s.clone());
                }
            }
            j.push(0);
            a.push(zero.clone());
            pops[t] = j;
            pushes[t] = a;
        }
        Annotation {
            x,
            pops,
            pushes,
            rho: vec![1; steps],
            y: self.targets(),
        }
    }

    pub fn test_item(&self) -> TestItem {
        TestItem {
            x: self.inputs(),
            y: self.targets(),
        }
    }
}
