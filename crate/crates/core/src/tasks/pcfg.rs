//! Probabilistic context-free grammars and windowed rejection sampling.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rejected draws tolerated before a window is declared infeasible.
pub const MAX_REJECTIONS: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Item {
    T(String),
    N(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Production {
    pub rhs: Vec<Item>,
    pub probability: f64,
}

/// Nonterminal `i` expands by `productions[i]`; derivation starts at 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pcfg {
    names: Vec<String>,
    productions: Vec<Vec<Production>>,
}

impl Pcfg {
    /// `rules[i] = (name, [(rhs, probability)])`; in a right-hand side a
    /// token naming a nonterminal refers to it, anything else is terminal.
    pub fn new(rules: &[(&str, Vec<(&[&str], f64)>)]) -> Result<Self> {
        let names: Vec<String> = rules.iter().map(|(n, _)| n.to_string()).collect();
        let mut productions = Vec::with_capacity(rules.len());
        for (name, prods) in rules {
            let total: f64 = prods.iter().map(|p| p.1).sum();
            if prods.is_empty() || (total - 1.0).abs() > 1e-9 || prods.iter().any(|p| p.1 < 0.0) {
                return Err(Error::InvalidGrammar(format!(
                    "productions of {name} must have nonnegative probabilities summing to 1"
                )));
            }
            productions.push(
                prods
                    .iter()
                    .map(|(rhs, p)| Production {
                        rhs: rhs
                            .iter()
                            .map(|tok| match names.iter().position(|n| n == tok) {
                                Some(i) => Item::N(i),
                                None => Item::T(tok.to_string()),
                            })
                            .collect(),
                        probability: *p,
                    })
                    .collect(),
            );
        }
        Ok(Self { names, productions })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Expected number of nonterminals produced by one expansion of each
    /// nonterminal, as a matrix; subcritical iff its spectral radius is < 1.
    pub fn offspring_matrix(&self) -> crate::matrix::Matrix {
        let k = self.names.len();
        crate::matrix::Matrix::from_fn(k, k, |i, j| {
            self.productions[i]
                .iter()
                .map(|p| p.probability * p.rhs.iter().filter(|x| **x == Item::N(j)).count() as f64)
                .sum()
        })
    }

    /// One derivation, abandoned (returning `None`) once it exceeds `cap`
    /// terminals.
    pub fn derive<R: Rng>(&self, rng: &mut R, cap: usize) -> Option<Vec<String>> {
        let mut out = Vec::new();
        let mut todo = vec![Item::N(0)];
        while let Some(item) = todo.pop() {
            match item {
                Item::T(t) => {
                    out.push(t);
                    if out.len() > cap {
                        return None;
                    }
                }
                Item::N(i) => {
                    let prods = &self.productions[i];
                    let mut u: f64 = rng.random();
                    let mut chosen = prods.len() - 1;
                    for (k, p) in prods.iter().enumerate() {
                        if u < p.probability {
                            chosen = k;
                            break;
                        }
                        u -= p.probability;
                    }
                    todo.extend(prods[chosen].rhs.iter().rev().cloned());
                    if todo.len() > 4 * cap + 64 {
                        return None;
                    }
                }
            }
        }
        Some(out)
    }

    /// Rejection-samples `count` words with length in `[min_len, max_len]`.
    pub fn sample<R: Rng>(
        &self,
        rng: &mut R,
        min_len: usize,
        max_len: usize,
        count: usize,
    ) -> Result<Vec<Vec<String>>> {
        let mut out = Vec::with_capacity(count);
        let mut rejected = 0;
        while out.len() < count {
            match self.derive(rng, max_len) {
                Some(w) if w.len() >= min_len => out.push(w),
                _ => {
                    rejected += 1;
                    if rejected >= MAX_REJECTIONS {
                        return Err(Error::SamplingExhausted {
                            draws: rejected,
                            min_len,
                            max_len,
                        });
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Dyck-k: each bracket pair with probability `0.4/k`, the empty word with 0.6.
pub fn dyck(k: usize) -> Pcfg {
    const PAIRS: [[&str; 4]; 3] = [["(", "S", ")", "S"], ["[", "S", "]", "S"], ["{", "S", "}", "S"]];
    let mut prods: Vec<(&[&str], f64)> = PAIRS[..k].iter().map(|p| (&p[..], 0.4 / k as f64)).collect();
    prods.push((&[], 0.6));
    Pcfg::new(&[("S", prods)]).expect("dyck grammar is valid")
}

/// Simplified JSON; a value is a container with probability 0.3.
pub fn json() -> Pcfg {
    Pcfg::new(&[
        ("C", vec![
            (&["{", "}"][..], 0.1),
            (&["[", "]"][..], 0.1),
            (&["{", "O", "}"][..], 0.4),
            (&["[", "A", "]"][..], 0.4),
        ]),
        ("V", vec![(&["n"][..], 0.35), (&["s"][..], 0.35), (&["C"][..], 0.3)]),
        ("O", vec![(&["k", ":", "V"][..], 0.4), (&["k", ":", "V", ",", "O"][..], 0.6)]),
        ("A", vec![(&["V"][..], 0.4), (&["V", ",", "A"][..], 0.6)]),
    ])
    .expect("json grammar is valid")
}

/// Words with an odd number of ones; each step ends the word with
/// probability `stop` when the parity allows it.
pub fn latch(stop: f64) -> Pcfg {
    let go = (1.0 - stop) / 2.0;
    Pcfg::new(&[
        ("Odd", vec![(&["0", "Odd"][..], 0.5), (&["1", "Even"][..], 0.5)]),
        ("Even", vec![(&["0", "Even"][..], go), (&["1", "Odd"][..], go), (&[][..], stop)]),
    ])
    .expect("latch grammar is valid")
}
