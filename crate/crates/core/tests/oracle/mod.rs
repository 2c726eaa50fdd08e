//! Brute-force membership for the benchmark languages, written directly from
//! their context-free grammars with an Earley recognizer. Shares no code
//! with the LR(1) engine.

#![allow(dead_code)]

use std::collections::HashSet;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use rsm_core::lr1::LanguageName;

pub struct Grammar {
    start: String,
    rules: Vec<(String, Vec<String>)>,
    nullable: HashSet<String>,
}

impl Grammar {
    pub fn new(start: &str, rules: &[(&str, &[&str])]) -> Self {
        let rules: Vec<(String, Vec<String>)> = rules
            .iter()
            .map(|(l, r)| (l.to_string(), r.iter().map(|s| s.to_string()).collect()))
            .collect();
        let mut nullable = HashSet::new();
        loop {
            let before = nullable.len();
            for (l, r) in &rules {
                if r.iter().all(|s| nullable.contains(s)) {
                    nullable.insert(l.clone());
                }
            }
            if nullable.len() == before {
                break;
            }
        }
        Self {
            start: start.to_string(),
            rules,
            nullable,
        }
    }

    fn is_nonterminal(&self, s: &str) -> bool {
        self.rules.iter().any(|(l, _)| l == s)
    }

    pub fn accepts<S: AsRef<str>>(&self, word: &[S]) -> bool {
        let n = word.len();
        let mut sets: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); n + 1];
        let mut seen: Vec<HashSet<(usize, usize, usize)>> = vec![HashSet::new(); n + 1];
        let add = |sets: &mut Vec<Vec<_>>, seen: &mut Vec<HashSet<_>>, i: usize, it: (usize, usize, usize)| {
            if seen[i].insert(it) {
                sets[i].push(it);
            }
        };
        for (r, (l, _)) in self.rules.iter().enumerate() {
            if *l == self.start {
                add(&mut sets, &mut seen, 0, (r, 0, 0));
            }
        }
        for i in 0..=n {
            let mut k = 0;
            while k < sets[i].len() {
                let (r, d, o) = sets[i][k];
                k += 1;
                let (lhs, rhs) = &self.rules[r];
                if d == rhs.len() {
                    let parents: Vec<(usize, usize, usize)> = sets[o]
                        .iter()
                        .copied()
                        .filter(|(r2, d2, _)| self.rules[*r2].1.get(*d2) == Some(lhs))
                        .collect();
                    for (r2, d2, o2) in parents {
                        add(&mut sets, &mut seen, i, (r2, d2 + 1, o2));
                    }
                    continue;
                }
                let sym = &rhs[d];
                if self.is_nonterminal(sym) {
                    for (r2, (l2, _)) in self.rules.iter().enumerate() {
                        if l2 == sym {
                            add(&mut sets, &mut seen, i, (r2, 0, i));
                        }
                    }
                    if self.nullable.contains(sym) {
                        add(&mut sets, &mut seen, i, (r, d + 1, o));
                    }
                } else if i < n && word[i].as_ref() == sym {
                    add(&mut sets, &mut seen, i + 1, (r, d + 1, o));
                }
            }
        }
        sets[n]
            .iter()
            .any(|&(r, d, o)| o == 0 && self.rules[r].0 == self.start && d == self.rules[r].1.len())
    }

    /// Random derivation, retried until it fits in `max_len` symbols.
    pub fn sample(&self, rng: &mut ChaCha8Rng, max_len: usize) -> Vec<String> {
        loop {
            let mut out = Vec::new();
            if self.expand(&self.start, rng, &mut out, max_len, 0) {
                return out;
            }
        }
    }

    fn expand(&self, sym: &str, rng: &mut ChaCha8Rng, out: &mut Vec<String>, max_len: usize, depth: usize) -> bool {
        if !self.is_nonterminal(sym) {
            out.push(sym.to_string());
            return out.len() <= max_len;
        }
        if depth > 4 * max_len {
            return false;
        }
        let options: Vec<&Vec<String>> = self.rules.iter().filter(|(l, _)| l == sym).map(|(_, r)| r).collect();
        let rhs = *options.choose(rng).expect("nonterminal has rules");
        rhs.iter().all(|s| self.expand(s, rng, out, max_len, depth + 1))
    }
}

const BRACKETS: [(&str, &str); 3] = [("(", ")"), ("[", "]"), ("{", "}")];

/// Nonempty balanced words over the first `k` bracket pairs.
pub fn dyck(k: usize) -> Grammar {
    let mut rules: Vec<(&str, Vec<&str>)> = vec![("S", vec!["P"]), ("S", vec!["P", "S"]), ("D", vec![]), ("D", vec!["S"])];
    for (o, c) in &BRACKETS[..k] {
        rules.push(("P", vec![o, "D", c]));
    }
    let refs: Vec<(&str, &[&str])> = rules.iter().map(|(l, r)| (*l, r.as_slice())).collect();
    Grammar::new("S", &refs)
}

pub fn grammar(name: LanguageName) -> Grammar {
    match name {
        LanguageName::Dyck1 => dyck(1),
        LanguageName::Dyck2 => dyck(2),
        LanguageName::Dyck3 => dyck(3),
        LanguageName::Anbn => Grammar::new("S", &[("S", &["a", "S", "b"]), ("S", &["a", "b"])]),
        LanguageName::Palindrome => Grammar::new(
            "S",
            &[("S", &["a", "S", "a"]), ("S", &["b", "S", "b"]), ("S", &["$"])],
        ),
        LanguageName::Json => Grammar::new(
            "V",
            &[
                ("V", &["{", "}"]),
                ("V", &["[", "]"]),
                ("V", &["{", "O", "}"]),
                ("V", &["[", "A", "]"]),
                ("V", &["n"]),
                ("V", &["s"]),
                ("O", &["k", ":", "V"]),
                ("O", &["k", ":", "V", ",", "O"]),
                ("A", &["V"]),
                ("A", &["V", ",", "A"]),
            ],
        ),
        // odd number of ones
        LanguageName::Latch => Grammar::new(
            "O",
            &[
                ("O", &["0", "O"]),
                ("O", &["1", "E"]),
                ("E", &[]),
                ("E", &["0", "E"]),
                ("E", &["1", "O"]),
            ],
        ),
    }
}

/// Every word of length `0..=max_len`.
pub fn all_words(alphabet: &[String], max_len: usize) -> Vec<Vec<String>> {
    let mut out = vec![Vec::new()];
    let mut layer: Vec<Vec<String>> = vec![Vec::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|w| {
                alphabet.iter().map(move |s| {
                    let mut v = w.clone();
                    v.push(s.clone());
                    v
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

/// Uniform random words, grammar derivations and one-symbol edits of
/// derivations, in equal shares.
pub fn sampled_words(g: &Grammar, alphabet: &[String], max_len: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<String>> {
    (0..count)
        .map(|i| match i % 3 {
            0 => {
                let l = rng.random_range(0..=max_len);
                (0..l).map(|_| alphabet.choose(rng).expect("alphabet").clone()).collect()
            }
            1 => g.sample(rng, max_len),
            _ => {
                let mut w = g.sample(rng, max_len);
                let pos = rng.random_range(0..w.len().max(1));
                let sym = alphabet.choose(rng).expect("alphabet").clone();
                match rng.random_range(0..3) {
                    0 if !w.is_empty() => w[pos] = sym,
                    1 if !w.is_empty() => {
                        w.remove(pos);
                    }
                    _ if w.len() < max_len => w.insert(pos, sym),
                    _ => {}
                }
                w
            }
        })
        .collect()
}

pub struct Agreement {
    pub words: usize,
    pub exhaustive_len: usize,
    pub disagreements: Vec<String>,
}

/// Compares the LR(1) parser with the grammar on every word up to
/// `max_len` for alphabets of at most three symbols. Larger alphabets are
/// enumerated while that stays under `samples` words and topped up with
/// `samples` sampled words.
pub fn parser_agreement(name: LanguageName, max_len: usize, samples: usize, seed: u64) -> Agreement {
    use rand::SeedableRng;
    let a = name.automaton();
    let table = a.table();
    let alphabet: Vec<String> = table.terminals().iter().map(|s| s.name.clone()).collect();
    let g = grammar(name);
    let k = alphabet.len();
    let exhaustive_len = if k <= 3 {
        max_len
    } else {
        (0..=max_len).take_while(|l| (k as f64).powi(*l as i32 + 1) / (k as f64 - 1.0) <= samples as f64).last().unwrap_or(0)
    };
    let mut words = all_words(&alphabet, exhaustive_len);
    if exhaustive_len < max_len {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        words.extend(sampled_words(&g, &alphabet, max_len, samples, &mut rng));
    }
    let disagreements = rsm_core::par::map(&words, |w| {
        let ids: Vec<_> = w.iter().map(|s| table.id(s).expect("terminal")).collect();
        let lr = a.parse(&ids).expect("parse");
        (lr != g.accepts(w)).then(|| w.join(" "))
    })
    .into_iter()
    .flatten()
    .collect();
    Agreement {
        words: words.len(),
        exhaustive_len,
        disagreements,
    }
}
