//! Reservoir stack machines: echo state networks with a stack controlled by
//! trained pop, push, shift and output functions, together with the LR(1)
//! machinery that produces their training annotations.

pub mod alphabet;
pub mod classifiers;
pub mod error;
pub mod esn;
pub mod harness;
pub mod lr1;
pub mod matrix;
pub mod par;
pub mod reservoir;
pub mod rmm;
pub mod rsm;
pub mod tasks;

pub use alphabet::{Symbol, SymbolId, SymbolTable, Word};
pub use error::{Error, Result};
pub use lr1::{Automaton, LanguageName, ParseTrace, Rule, StackSymbol};
pub use matrix::Matrix;
pub use esn::Esn;
pub use reservoir::{Activation, Reservoir, ReservoirKind, ReservoirMeta, ReservoirState};
pub use rsm::{Annotation, FitParams, OutMode, RSMachine};
pub use rmm::RMMachine;
pub use tasks::{TaskConfig, TaskDataset, TaskName, TestItem};
