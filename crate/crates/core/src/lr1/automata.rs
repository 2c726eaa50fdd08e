use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use super::Automaton;
use crate::error::Error;

const BRACKETS: [(&str, &str); 3] = [("(", ")"), ("[", "]"), ("{", "}")];

/// The seven symbolic tasks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LanguageName {
    Dyck1,
    Dyck2,
    Dyck3,
    Anbn,
    Palindrome,
    Json,
    Latch,
}

impl LanguageName {
    pub const ALL: [LanguageName; 7] = [
        LanguageName::Dyck1,
        LanguageName::Dyck2,
        LanguageName::Dyck3,
        LanguageName::Anbn,
        LanguageName::Palindrome,
        LanguageName::Json,
        LanguageName::Latch,
    ];

    pub fn automaton(self) -> Automaton {
        match self {
            LanguageName::Dyck1 => dyck(1),
            LanguageName::Dyck2 => dyck(2),
            LanguageName::Dyck3 => dyck(3),
            LanguageName::Anbn => anbn(),
            LanguageName::Palindrome => palindrome(),
            LanguageName::Json => json(),
            LanguageName::Latch => latch(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LanguageName::Dyck1 => "dyck1",
            LanguageName::Dyck2 => "dyck2",
            LanguageName::Dyck3 => "dyck3",
            LanguageName::Anbn => "anbn",
            LanguageName::Palindrome => "palindrome",
            LanguageName::Json => "json",
            LanguageName::Latch => "latch",
        }
    }
}

impl fmt::Display for LanguageName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LanguageName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        LanguageName::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown language `{s}`")))
    }
}

/// Balanced brackets over the first `k` of `()`, `[]`, `{}`.
pub fn dyck(k: usize) -> Automaton {
    assert!((1..=3).contains(&k), "dyck supports 1 to 3 bracket kinds");
    let pairs = &BRACKETS[..k];
    let terminals: Vec<&str> = pairs.iter().flat_map(|(o, c)| [*o, *c]).collect();
    let wrapped: Vec<String> = pairs.iter().map(|(o, c)| format!("{o}S{c}")).collect();
    let mut rules: Vec<(&str, &str, usize, &str)> = vec![("SS", "", 2, "S")];
    rules.extend(wrapped.iter().map(|w| (w.as_str(), "", 3, "S")));
    rules.extend(pairs.iter().map(|(o, c)| (*o, *c, 0, "S")));
    Automaton::from_text(&terminals, &["S"], &rules, &["S"]).expect("dyck automaton is valid")
}

pub fn anbn() -> Automaton {
    Automaton::from_text(
        &["a", "b"],
        &["S"],
        &[("aSb", "", 3, "S"), ("a", "b", 0, "S")],
        &["S"],
    )
    .expect("anbn automaton is valid")
}

/// Palindromes over `{a, b}` with `$` in the centre.
pub fn palindrome() -> Automaton {
    Automaton::from_text(
        &["a", "b", "$"],
        &["S"],
        &[("aSa", "", 3, "S"), ("bSb", "", 3, "S"), ("$", "", 1, "S")],
        &["S"],
    )
    .expect("palindrome automaton is valid")
}

/// Simplified JSON: `n` numbers, `s` strings, `k` keys.
pub fn json() -> Automaton {
    Automaton::from_text(
        &["{", "}", "[", "]", ",", ":", "n", "s", "k"],
        &["V", "O", "A"],
        &[
            ("{}", "", 2, "V"),
            ("[]", "", 2, "V"),
            ("{O}", "", 3, "V"),
            ("[A]", "", 3, "V"),
            ("n", "", 1, "V"),
            ("s", "", 1, "V"),
            ("k:V,O", "", 5, "O"),
            ("k:V", "}", 3, "O"),
            ("V,A", "", 3, "A"),
            ("V", "]", 1, "A"),
        ],
        &["V"],
    )
    .expect("json automaton is valid")
}

/// Odd number of ones. `S` marks odd parity, `A` even; the final rule
/// handles words that start with a one.
pub fn latch() -> Automaton {
    Automaton::from_text(
        &["0", "1"],
        &["S", "A"],
        &[
            ("S0", "", 2, "S"),
            ("S1", "", 2, "A"),
            ("A0", "", 2, "A"),
            ("A1", "", 2, "S"),
            ("0", "", 1, "A"),
            ("1", "", 1, "S"),
        ],
        &["S"],
    )
    .expect("latch automaton is valid")
}
