use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A generator or its formal inverse, encoded as `2 * generator + inverse`.
///
/// The derived order (a, a⁻¹, b, b⁻¹, ...) is the order used for shortlex
/// canonical words.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct Symbol(pub u16);

impl Symbol {
    pub fn new(generator: usize, inverse: bool) -> Self {
        Symbol((generator as u16) * 2 + inverse as u16)
    }

    pub fn generator(self) -> usize {
        (self.0 / 2) as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 % 2 == 1
    }

    pub fn inverse(self) -> Symbol {
        Symbol(self.0 ^ 1)
    }
}

pub type Word = Vec<Symbol>;

/// Generator labels (formal inverses are implicit) plus, for each peripheral
/// subgroup, the marked generators S∩P.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratingSet {
    pub names: Vec<String>,
    pub peripheral_marks: Vec<Vec<usize>>,
}

impl GeneratingSet {
    pub fn new(names: Vec<String>, peripheral_marks: Vec<Vec<usize>>) -> Result<Self> {
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() || n.contains(char::is_whitespace) || n.contains('^') || n.contains('⁻') {
                return Err(Error::Config(format!("invalid generator name `{n}`")));
            }
            if names[..i].contains(n) {
                return Err(Error::Config(format!("duplicate generator name `{n}`")));
            }
        }
        for marks in &peripheral_marks {
            if marks.is_empty() {
                return Err(Error::Config("peripheral subgroup with no marked generators".into()));
            }
            if let Some(&bad) = marks.iter().find(|&&g| g >= names.len()) {
                return Err(Error::Config(format!("peripheral mark {bad} out of range")));
            }
        }
        Ok(GeneratingSet { names, peripheral_marks })
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    /// All symbols in canonical order.
    pub fn symbols(&self) -> Vec<Symbol> {
        (0..self.names.len())
            .flat_map(|g| [Symbol::new(g, false), Symbol::new(g, true)])
            .collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Parses whitespace-separated tokens `x`, `x⁻¹`, or `x^n` for a nonzero
    /// integer `n` (so `x^-1`, `x^64`).
    pub fn parse_tokens(&self, text: &str) -> Result<Word> {
        let mut out = Vec::new();
        for (pos, tok) in text.split_whitespace().enumerate() {
            let bad = || Error::UnknownSymbol { position: pos, symbol: tok.to_string() };
            let (name, exp) = if let Some(n) = tok.strip_suffix("⁻¹") {
                (n, -1i64)
            } else if let Some((n, e)) = tok.split_once('^') {
                (n, e.parse::<i64>().map_err(|_| bad())?)
            } else {
                (tok, 1)
            };
            let g = self.index_of(name).ok_or_else(bad)?;
            if exp == 0 {
                return Err(bad());
            }
            let sym = Symbol::new(g, exp < 0);
            out.extend(std::iter::repeat_n(sym, exp.unsigned_abs() as usize));
        }
        Ok(out)
    }

    /// Checks that every symbol refers to a declared generator.
    pub fn validate(&self, word: &[Symbol]) -> Result<()> {
        match word.iter().position(|s| s.generator() >= self.names.len()) {
            Some(pos) => Err(Error::UnknownSymbol { position: pos, symbol: format!("#{}", word[pos].0) }),
            None => Ok(()),
        }
    }

    pub fn format(&self, word: &[Symbol]) -> String {
        let parts: Vec<String> = word
            .iter()
            .map(|s| {
                let n = &self.names[s.generator()];
                if s.is_inverse() {
                    format!("{n}^-1")
                } else {
                    n.clone()
                }
            })
            .collect();
        parts.join(" ")
    }
}

/// Cancels adjacent inverse pairs until none remain (one stack pass).
pub fn free_reduce(word: &[Symbol]) -> Word {
    let mut out: Word = Vec::with_capacity(word.len());
    for &s in word {
        if out.last() == Some(&s.inverse()) {
            out.pop();
        } else {
            out.push(s);
        }
    }
    out
}

/// [`free_reduce`] on a textual word, rejecting unknown symbols with their position.
pub fn free_reduce_text(gens: &GeneratingSet, text: &str) -> Result<String> {
    let w = gens.parse_tokens(text)?;
    Ok(gens.format(&free_reduce(&w)))
}

pub fn invert(word: &[Symbol]) -> Word {
    word.iter().rev().map(|s| s.inverse()).collect()
}

pub struct DisplayWord<'a>(pub &'a GeneratingSet, pub &'a [Symbol]);

impl fmt::Display for DisplayWord<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.1.is_empty() {
            write!(f, "e")
        } else {
            write!(f, "{}", self.0.format(self.1))
        }
    }
}
