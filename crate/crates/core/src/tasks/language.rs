//! Language recognition tasks: sampling, corrupted negatives, per-prefix
//! targets and parser-derived annotations.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{pcfg, TaskConfig, TestItem, Window};
use crate::alphabet::{SymbolId, Word};
use crate::error::{Error, Result};
use crate::lr1::{Automaton, LanguageName};
use crate::rsm::Annotation;

/// Positive-word samplers per language.
pub enum Sampler {
    Pcfg(pcfg::Pcfg),
    /// `a^n b^n` with `n` uniform over the window.
    Anbn,
    /// `w $ reverse(w)` with `|w|` uniform over the window and letters uniform.
    Palindrome,
}

impl Sampler {
    pub fn for_language(name: LanguageName, cfg: &TaskConfig) -> Self {
        match name {
            LanguageName::Dyck1 => Sampler::Pcfg(pcfg::dyck(1)),
            LanguageName::Dyck2 => Sampler::Pcfg(pcfg::dyck(2)),
            LanguageName::Dyck3 => Sampler::Pcfg(pcfg::dyck(3)),
            LanguageName::Json => Sampler::Pcfg(pcfg::json()),
            LanguageName::Latch => Sampler::Pcfg(pcfg::latch(cfg.latch_stop)),
            LanguageName::Anbn => Sampler::Anbn,
            LanguageName::Palindrome => Sampler::Palindrome,
        }
    }

    /// `count` positive words with length in the window, as symbol names.
    pub fn sample(&self, rng: &mut ChaCha8Rng, w: Window, count: usize) -> Result<Vec<Vec<String>>> {
        let exhausted = || Error::SamplingExhausted {
            draws: 0,
            min_len: w.min,
            max_len: w.max,
        };
        match self {
            Sampler::Pcfg(g) => g.sample(rng, w.min, w.max, count),
            Sampler::Anbn => {
                let lo = w.min.div_ceil(2).max(1);
                let hi = w.max / 2;
                if lo > hi {
                    return Err(exhausted());
                }
                Ok((0..count)
                    .map(|_| {
                        let n = rng.random_range(lo..=hi);
                        let mut v = vec!["a".to_string(); n];
                        v.extend(std::iter::repeat_n("b".to_string(), n));
                        v
                    })
                    .collect())
            }
            Sampler::Palindrome => {
                let lo = w.min.saturating_sub(1).div_ceil(2);
                let hi = w.max.saturating_sub(1) / 2;
                if w.max == 0 || lo > hi {
                    return Err(exhausted());
                }
                Ok((0..count)
                    .map(|_| {
                        let n = rng.random_range(lo..=hi);
                        let half: Vec<String> = (0..n)
                            .map(|_| if rng.random::<bool>() { "a" } else { "b" }.to_string())
                            .collect();
                        let mut v = half.clone();
                        v.push("$".into());
                        v.extend(half.into_iter().rev());
                        v
                    })
                    .collect())
            }
        }
    }
}

/// Substitutes, deletes or inserts one symbol until the word leaves the
/// language while staying inside the window.
pub fn corrupt(a: &Automaton, word: &[SymbolId], w: Window, rng: &mut ChaCha8Rng) -> Result<Option<Word>> {
    let terminals = a.terminal_ids();
    for _ in 0..1000 {
        let mut v = word.to_vec();
        match rng.random_range(0..3) {
            0 if !v.is_empty() => {
                let i = rng.random_range(0..v.len());
                v[i] = *terminals.choose(rng).expect("terminals exist");
            }
            1 if !v.is_empty() => {
                v.remove(rng.random_range(0..v.len()));
            }
            _ => {
                let i = rng.random_range(0..=v.len());
                v.insert(i, *terminals.choose(rng).expect("terminals exist"));
            }
        }
        if w.contains(v.len()) && !a.parse(&v)? {
            return Ok(Some(v));
        }
    }
    Ok(None)
}

/// `y_t = 1` iff `x_1..x_t` is in the language, for `t = 1..T`; the final
/// entry `y_{T+1}` repeats the decision on the whole word.
pub fn prefix_targets(a: &Automaton, word: &[SymbolId]) -> Result<Vec<Vec<f64>>> {
    let mut y = Vec::with_capacity(word.len() + 1);
    for t in 1..=word.len() {
        y.push(vec![a.parse(&word[..t])? as u8 as f64]);
    }
    y.push(vec![a.parse(word)? as u8 as f64]);
    Ok(y)
}

/// Annotation from the parser trace: recorded reductions, constant shift,
/// prefix-membership outputs.
pub fn annotate(a: &Automaton, word: &[SymbolId]) -> Result<Annotation> {
    let t = a.table();
    let trace = a.parse_with_trace(word)?;
    let zero = vec![0.0; t.n()];
    Ok(Annotation {
        x: t.encode_word(word),
        pops: trace.steps.iter().map(|s| s.actions.iter().map(|p| p.0).collect()).collect(),
        pushes: trace
            .steps
            .iter()
            .map(|s| {
                s.actions
                    .iter()
                    .map(|p| p.1.map_or_else(|| zero.clone(), |id| t.code(id).to_vec()))
                    .collect()
            })
            .collect(),
        rho: trace.steps.iter().map(|s| s.shift as u8).collect(),
        y: prefix_targets(a, word)?,
    })
}

/// Half positives from the sampler, half corruptions of further positives,
/// shuffled.
pub fn sample_words(
    a: &Automaton,
    sampler: &Sampler,
    rng: &mut ChaCha8Rng,
    w: Window,
    count: usize,
) -> Result<Vec<Word>> {
    let to_ids = |names: Vec<String>| -> Result<Word> {
        names.iter().map(|n| a.table().id(n)).collect()
    };
    let n_pos = count.div_ceil(2);
    let mut words: Vec<Word> = sampler
        .sample(rng, w, n_pos)?
        .into_iter()
        .map(to_ids)
        .collect::<Result<_>>()?;
    let mut negatives = 0;
    let mut attempts = 0;
    while negatives < count - n_pos {
        attempts += 1;
        if attempts > 10_000 {
            return Err(Error::SamplingExhausted {
                draws: attempts,
                min_len: w.min,
                max_len: w.max,
            });
        }
        let base = to_ids(sampler.sample(rng, w, 1)?.swap_remove(0))?;
        if let Some(neg) = corrupt(a, &base, w, rng)? {
            words.push(neg);
            negatives += 1;
        }
    }
    words.shuffle(rng);
    Ok(words)
}

pub fn make_split(
    a: &Automaton,
    sampler: &Sampler,
    rng: &mut ChaCha8Rng,
    w: Window,
    count: usize,
) -> Result<(Vec<Annotation>, Vec<TestItem>)> {
    let words = sample_words(a, sampler, rng, w, count)?;
    let mut anns = Vec::with_capacity(words.len());
    let mut items = Vec::with_capacity(words.len());
    for word in words {
        let ann = annotate(a, &word)?;
        items.push(TestItem {
            x: ann.x.clone(),
            y: ann.y.clone(),
        });
        anns.push(ann);
    }
    Ok((anns, items))
}
