//! LR(1) automata: ordered shift-reduce rules, the parsing loop and trace
//! recording.

mod automata;

pub use automata::{anbn, dyck, json, latch, palindrome, LanguageName};

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::alphabet::{SymbolId, SymbolTable, Word};
use crate::error::{Error, Result};

/// A stack cell: a registered symbol or the internal end marker `#`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StackSymbol {
    Sym(SymbolId),
    End,
}

/// `(suffix, lookahead, pops, push)`; a `None` lookahead is ε.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub suffix: Word,
    pub lookahead: Option<SymbolId>,
    pub pops: usize,
    pub push: SymbolId,
}

impl Rule {
    fn matches(&self, stack: &[StackSymbol], y: Option<SymbolId>) -> bool {
        if let Some(x) = self.lookahead {
            if y != Some(x) {
                return false;
            }
        }
        let k = self.suffix.len();
        k <= stack.len()
            && stack[stack.len() - k..]
                .iter()
                .zip(&self.suffix)
                .all(|(s, r)| *s == StackSymbol::Sym(*r))
    }
}

#[derive(Clone, Debug)]
pub struct Automaton {
    table: SymbolTable,
    rules: Vec<Rule>,
    accepting: Vec<SymbolId>,
}

#[derive(Serialize, Deserialize)]
struct GrammarFile {
    terminals: Vec<String>,
    nonterminals: Vec<String>,
    rules: Vec<(String, String, usize, String)>,
    accepting: Vec<String>,
}

impl Automaton {
    pub fn new(table: SymbolTable, rules: Vec<Rule>, accepting: Vec<SymbolId>) -> Result<Self> {
        for (i, r) in rules.iter().enumerate() {
            if r.suffix.iter().any(|s| s.0 >= table.len()) {
                return Err(Error::InvalidGrammar(format!("rule {i} uses an unregistered symbol")));
            }
            if let Some(x) = r.lookahead {
                if !table.is_terminal(x) {
                    return Err(Error::InvalidGrammar(format!("rule {i} lookahead is not a terminal")));
                }
            }
            if !table.is_nonterminal(r.push) {
                return Err(Error::InvalidGrammar(format!("rule {i} pushes a non-nonterminal")));
            }
        }
        if let Some(a) = accepting.iter().find(|a| !table.is_nonterminal(**a)) {
            return Err(Error::InvalidGrammar(format!("accepting symbol {a} is not a nonterminal")));
        }
        Ok(Self {
            table,
            rules,
            accepting,
        })
    }

    /// Builds from textual rules `(suffix, lookahead, pops, push)` where the
    /// suffix is tokenised against the table and an empty lookahead is ε.
    pub fn from_text(
        terminals: &[&str],
        nonterminals: &[&str],
        rules: &[(&str, &str, usize, &str)],
        accepting: &[&str],
    ) -> Result<Self> {
        let table = SymbolTable::one_hot(terminals, nonterminals)?;
        let rules = rules
            .iter()
            .map(|(s, x, j, a)| {
                Ok(Rule {
                    suffix: table.tokenize(s)?,
                    lookahead: if x.is_empty() { None } else { Some(table.id(x)?) },
                    pops: *j,
                    push: table.id(a)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let accepting = accepting.iter().map(|a| table.id(a)).collect::<Result<Vec<_>>>()?;
        Self::new(table, rules, accepting)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let g: GrammarFile = serde_json::from_str(text)?;
        let t: Vec<&str> = g.terminals.iter().map(String::as_str).collect();
        let n: Vec<&str> = g.nonterminals.iter().map(String::as_str).collect();
        let r: Vec<(&str, &str, usize, &str)> = g
            .rules
            .iter()
            .map(|(s, x, j, a)| (s.as_str(), x.as_str(), *j, a.as_str()))
            .collect();
        let a: Vec<&str> = g.accepting.iter().map(String::as_str).collect();
        Self::from_text(&t, &n, &r, &a)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        let names = |ids: &mut dyn Iterator<Item = SymbolId>| -> Vec<String> {
            ids.map(|i| self.table.name(i).to_string()).collect()
        };
        let g = GrammarFile {
            terminals: names(&mut self.table.terminal_ids()),
            nonterminals: names(&mut self.table.nonterminal_ids()),
            rules: self
                .rules
                .iter()
                .map(|r| {
                    (
                        r.suffix.iter().map(|s| self.table.name(*s)).collect::<Vec<_>>().join(" "),
                        r.lookahead.map_or(String::new(), |x| self.table.name(x).to_string()),
                        r.pops,
                        self.table.name(r.push).to_string(),
                    )
                })
                .collect(),
            accepting: names(&mut self.accepting.iter().copied()),
        };
        Ok(serde_json::to_string_pretty(&g)?)
    }

    pub fn table(&self) -> &SymbolTable {
        &self.table
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn accepting(&self) -> &[SymbolId] {
        &self.accepting
    }

    pub fn terminal_ids(&self) -> Vec<SymbolId> {
        self.table.terminal_ids().collect()
    }

    pub fn tokenize(&self, text: &str) -> Result<Word> {
        self.table.tokenize(text)
    }

    /// True iff the stack is exactly one accepting nonterminal.
    pub fn is_accepting_stack(&self, stack: &[StackSymbol]) -> bool {
        matches!(stack, [StackSymbol::Sym(a)] if self.accepting.contains(a))
    }

    fn check_word(&self, word: &[SymbolId]) -> Result<()> {
        match word.iter().find(|s| !self.table.is_terminal(**s)) {
            Some(s) => Err(Error::UnknownSymbol(format!("{s} is not a terminal"))),
            None => Ok(()),
        }
    }

    /// Runs the parsing loop and accepts iff the final stack is `A#`, `A`
    /// accepting.
    pub fn parse(&self, word: &[SymbolId]) -> Result<bool> {
        self.check_word(word)?;
        let mut stack = Vec::with_capacity(word.len() + 1);
        for y in word.iter().map(|s| Some(*s)).chain(std::iter::once(None)) {
            self.reduce(&mut stack, y, |_, _| {})?;
            stack.push(y.map_or(StackSymbol::End, StackSymbol::Sym));
        }
        Ok(self.final_accepts(&stack))
    }

    pub fn parse_text(&self, text: &str) -> Result<bool> {
        self.parse(&self.tokenize(text)?)
    }

    /// Same decision as [`Automaton::parse`], recording every applied rule.
    pub fn parse_with_trace(&self, word: &[SymbolId]) -> Result<ParseTrace> {
        self.check_word(word)?;
        let mut stack = Vec::with_capacity(word.len() + 1);
        let mut steps = Vec::with_capacity(word.len() + 1);
        for y in word.iter().map(|s| Some(*s)).chain(std::iter::once(None)) {
            let mut actions = Vec::new();
            self.reduce(&mut stack, y, |j, a| actions.push((j, Some(a))))?;
            actions.push((0, None));
            let output = self.is_accepting_stack(&stack);
            stack.push(y.map_or(StackSymbol::End, StackSymbol::Sym));
            steps.push(TraceStep {
                actions,
                shift: true,
                output,
                stack: stack.clone(),
            });
        }
        Ok(ParseTrace {
            accept: self.final_accepts(&stack),
            steps,
        })
    }

    /// First rule whose suffix ends the stack and whose lookahead admits `y`.
    pub fn match_rule(&self, stack: &[StackSymbol], y: Option<SymbolId>) -> Option<&Rule> {
        self.rules.iter().find(|r| r.matches(stack, y))
    }

    fn reduce(
        &self,
        stack: &mut Vec<StackSymbol>,
        y: Option<SymbolId>,
        mut record: impl FnMut(usize, SymbolId),
    ) -> Result<()> {
        while let Some(idx) = self.rules.iter().position(|r| r.matches(stack, y)) {
            let r = &self.rules[idx];
            if r.pops > stack.len() {
                return Err(Error::MalformedRule {
                    rule: idx,
                    pops: r.pops,
                    height: stack.len(),
                });
            }
            stack.truncate(stack.len() - r.pops);
            stack.push(StackSymbol::Sym(r.push));
            record(r.pops, r.push);
        }
        Ok(())
    }

    fn final_accepts(&self, stack: &[StackSymbol]) -> bool {
        matches!(stack, [StackSymbol::Sym(a), StackSymbol::End] if self.accepting.contains(a))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    /// Applied `(pops, push)` pairs, closed by the `(0, None)` sentinel.
    pub actions: Vec<(usize, Option<SymbolId>)>,
    pub shift: bool,
    /// Stack equals one accepting nonterminal at output time.
    pub output: bool,
    /// Stack after the shift.
    pub stack: Vec<StackSymbol>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParseTrace {
    pub steps: Vec<TraceStep>,
    pub accept: bool,
}

impl ParseTrace {
    /// Re-applies the recorded actions to an empty stack, returning the
    /// snapshot after every step. `word` supplies the shifted symbols.
    pub fn replay(&self, word: &[SymbolId]) -> Result<Vec<Vec<StackSymbol>>> {
        let mut stack = Vec::new();
        let mut out = Vec::with_capacity(self.steps.len());
        for (t, step) in self.steps.iter().enumerate() {
            for &(j, a) in &step.actions {
                if j > stack.len() {
                    return Err(Error::PopUnderflow {
                        step: t,
                        pops: j,
                        height: stack.len(),
                    });
                }
                stack.truncate(stack.len() - j);
                if let Some(a) = a {
                    stack.push(StackSymbol::Sym(a));
                }
            }
            if step.shift {
                stack.push(word.get(t).map_or(StackSymbol::End, |s| StackSymbol::Sym(*s)));
            }
            out.push(stack.clone());
        }
        Ok(out)
    }
}
