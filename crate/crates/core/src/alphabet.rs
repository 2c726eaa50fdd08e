//! Symbol identity and vector codes for terminals and nonterminals.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::matrix::sq_dist;

/// Default decode tolerance; codes in this crate are exact.
pub const DEFAULT_DECODE_TOL: f64 = 1e-6;

/// Index into a [`SymbolTable`]: terminals come first, then nonterminals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SymbolId(pub usize);

impl fmt::Display for SymbolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A word over registered symbols.
pub type Word = Vec<SymbolId>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Symbol {
    pub name: String,
    pub code: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTable", into = "RawTable")]
pub struct SymbolTable {
    terminals: Vec<Symbol>,
    nonterminals: Vec<Symbol>,
    n: usize,
    index: HashMap<String, SymbolId>,
}

#[derive(Serialize, Deserialize)]
struct RawTable {
    terminals: Vec<Symbol>,
    nonterminals: Vec<Symbol>,
    n: usize,
}

impl TryFrom<RawTable> for SymbolTable {
    type Error = Error;
    fn try_from(raw: RawTable) -> Result<Self> {
        SymbolTable::new(raw.terminals, raw.nonterminals, raw.n)
    }
}

impl From<SymbolTable> for RawTable {
    fn from(t: SymbolTable) -> Self {
        RawTable {
            terminals: t.terminals,
            nonterminals: t.nonterminals,
            n: t.n,
        }
    }
}

impl SymbolTable {
    /// Validates the table: names unique, codes of length `n`, codes pairwise
    /// distinct and no nonterminal coded by the zero vector.
    pub fn new(terminals: Vec<Symbol>, nonterminals: Vec<Symbol>, n: usize) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, s) in terminals.iter().chain(&nonterminals).enumerate() {
            if s.name.is_empty() || s.name.chars().any(char::is_whitespace) {
                return Err(Error::InvalidTable(format!("bad symbol name {:?}", s.name)));
            }
            if s.code.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: s.code.len(),
                });
            }
            if index.insert(s.name.clone(), SymbolId(i)).is_some() {
                return Err(Error::DuplicateSymbol(s.name.clone()));
            }
        }
        if let Some(s) = nonterminals.iter().find(|s| s.code.iter().all(|&v| v == 0.0)) {
            return Err(Error::InvalidTable(format!(
                "nonterminal `{}` has the reserved zero code",
                s.name
            )));
        }
        let all: Vec<&Symbol> = terminals.iter().chain(&nonterminals).collect();
        for (i, a) in all.iter().enumerate() {
            for b in &all[i + 1..] {
                if a.code == b.code {
                    return Err(Error::InvalidTable(format!(
                        "`{}` and `{}` share a code",
                        a.name, b.name
                    )));
                }
            }
        }
        Ok(Self {
            terminals,
            nonterminals,
            n,
            index,
        })
    }

    /// One-hot codes in registration order: terminals first, then nonterminals.
    pub fn one_hot(terminals: &[&str], nonterminals: &[&str]) -> Result<Self> {
        let n = terminals.len() + nonterminals.len();
        let mk = |offset: usize, names: &[&str]| {
            names
                .iter()
                .enumerate()
                .map(|(i, name)| {
                    let mut code = vec![0.0; n];
                    code[offset + i] = 1.0;
                    Symbol {
                        name: (*name).to_string(),
                        code,
                    }
                })
                .collect::<Vec<_>>()
        };
        Self::new(mk(0, terminals), mk(terminals.len(), nonterminals), n)
    }

    /// Table for the copy tasks: ten channels (eight bits, end-of-sequence,
    /// placeholder). Terminal inputs are free vectors, so none are registered;
    /// the placeholder `S` is the unit vector on the last channel.
    pub fn copy_task() -> Self {
        let mut code = vec![0.0; crate::tasks::COPY_CHANNELS];
        code[crate::tasks::PLACEHOLDER_CHANNEL] = 1.0;
        Self::new(
            Vec::new(),
            vec![Symbol {
                name: "S".into(),
                code,
            }],
            crate::tasks::COPY_CHANNELS,
        )
        .expect("copy table is valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.terminals.len() + self.nonterminals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn terminals(&self) -> &[Symbol] {
        &self.terminals
    }

    pub fn nonterminals(&self) -> &[Symbol] {
        &self.nonterminals
    }

    pub fn terminal_ids(&self) -> impl Iterator<Item = SymbolId> + '_ {
        (0..self.terminals.len()).map(SymbolId)
    }

    pub fn nonterminal_ids(&self) -> impl Iterator<Item = SymbolId> + '_ {
        (self.terminals.len()..self.len()).map(SymbolId)
    }

    pub fn is_terminal(&self, id: SymbolId) -> bool {
        id.0 < self.terminals.len()
    }

    pub fn is_nonterminal(&self, id: SymbolId) -> bool {
        id.0 >= self.terminals.len() && id.0 < self.len()
    }

    fn symbol(&self, id: SymbolId) -> &Symbol {
        let nt = self.terminals.len();
        if id.0 < nt {
            &self.terminals[id.0]
        } else {
            &self.nonterminals[id.0 - nt]
        }
    }

    pub fn name(&self, id: SymbolId) -> &str {
        &self.symbol(id).name
    }

    pub fn code(&self, id: SymbolId) -> &[f64] {
        &self.symbol(id).code
    }

    pub fn id(&self, name: &str) -> Result<SymbolId> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))
    }

    pub fn encode(&self, name: &str) -> Result<&[f64]> {
        Ok(self.code(self.id(name)?))
    }

    pub fn encode_word(&self, word: &[SymbolId]) -> Vec<Vec<f64>> {
        word.iter().map(|&s| self.code(s).to_vec()).collect()
    }

    /// Smallest Euclidean distance between two registered codes.
    pub fn min_code_distance(&self) -> f64 {
        let all: Vec<&Symbol> = self.terminals.iter().chain(&self.nonterminals).collect();
        let mut best = f64::INFINITY;
        for (i, a) in all.iter().enumerate() {
            for b in &all[i + 1..] {
                best = best.min(sq_dist(&a.code, &b.code).sqrt());
            }
        }
        best
    }

    /// Returns the symbol whose code lies within `tol` of `v`, if any.
    pub fn decode(&self, v: &[f64], tol: f64) -> Result<Option<&str>> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: v.len(),
            });
        }
        let min_distance = self.min_code_distance();
        if tol > 0.5 * min_distance {
            return Err(Error::AmbiguousDecode { tol, min_distance });
        }
        let mut hits = self
            .terminals
            .iter()
            .chain(&self.nonterminals)
            .filter(|s| sq_dist(&s.code, v).sqrt() <= tol);
        let first = hits.next();
        if hits.next().is_some() {
            return Err(Error::AmbiguousDecode { tol, min_distance });
        }
        Ok(first.map(|s| s.name.as_str()))
    }

    /// Splits `text` into registered symbols by longest match, skipping whitespace.
    pub fn tokenize(&self, text: &str) -> Result<Word> {
        let mut names: Vec<&str> = self.index.keys().map(String::as_str).collect();
        names.sort_by_key(|n| std::cmp::Reverse(n.len()));
        let mut out = Vec::new();
        let mut rest = text.trim_start();
        while !rest.is_empty() {
            let name = names
                .iter()
                .find(|n| rest.starts_with(**n))
                .ok_or_else(|| Error::UnknownSymbol(rest.chars().take(8).collect()))?;
            out.push(self.index[*name]);
            rest = rest[name.len()..].trim_start();
        }
        Ok(out)
    }

    pub fn render(&self, word: &[SymbolId]) -> String {
        word.iter().map(|&s| self.name(s)).collect()
    }
}
