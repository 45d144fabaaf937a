use std::collections::{BTreeMap, HashMap};

use super::{DomainEvalFn, FnKind};
use crate::corpus::Corpus;
use crate::error::{Error, Result};

const DIGITS: &str = r"\d+";
const LETTERS: &str = "[a-zA-Z]+";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Class {
    Digit,
    Letter,
    Space,
    Other,
}

fn class_of(c: char) -> Class {
    if c.is_ascii_digit() {
        Class::Digit
    } else if c.is_ascii_alphabetic() {
        Class::Letter
    } else if c.is_whitespace() {
        Class::Space
    } else {
        Class::Other
    }
}

/// Generalizes a value into its token-class pattern: maximal digit runs
/// become `\d+`, maximal ASCII letter runs `[a-zA-Z]+`, whitespace runs a
/// single space. Other characters stay literal (`\` and `[` are escaped).
pub fn generalize(value: &str) -> String {
    let mut out = String::with_capacity(value.len() + 8);
    let mut prev: Option<Class> = None;
    for c in value.chars() {
        let class = class_of(c);
        match class {
            Class::Digit | Class::Letter | Class::Space if prev == Some(class) => {}
            Class::Digit => out.push_str(DIGITS),
            Class::Letter => out.push_str(LETTERS),
            Class::Space => out.push(' '),
            Class::Other => {
                if c == '\\' || c == '[' {
                    out.push('\\');
                }
                out.push(c);
            }
        }
        prev = Some(class);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternFnParams {
    pub pattern: String,
}

impl PatternFnParams {
    /// Accepts only canonical patterns, i.e. strings `generalize` can emit.
    pub fn new(pattern: impl Into<String>) -> Result<Self> {
        let pattern = pattern.into();
        if !is_canonical(&pattern) {
            return Err(Error::InvalidPattern(pattern));
        }
        Ok(PatternFnParams { pattern })
    }

    pub fn matches(&self, raw: &str) -> bool {
        generalize(raw) == self.pattern
    }

    pub fn into_fn(self) -> DomainEvalFn {
        DomainEvalFn::new(format!("pat:{}", self.pattern), FnKind::Pattern(self))
    }
}

fn is_canonical(pattern: &str) -> bool {
    // Re-tokenize and check that no two runs of the same class are adjacent.
    let mut rest = pattern;
    let mut prev: Option<Class> = None;
    while !rest.is_empty() {
        let (class, len) = if rest.starts_with(DIGITS) {
            (Class::Digit, DIGITS.len())
        } else if rest.starts_with(LETTERS) {
            (Class::Letter, LETTERS.len())
        } else if rest.starts_with("\\\\") || rest.starts_with("\\[") {
            (Class::Other, 2)
        } else {
            let c = rest.chars().next().unwrap();
            match c {
                '\\' | '[' => return false,
                ' ' => (Class::Space, 1),
                c if class_of(c) == Class::Other => (Class::Other, c.len_utf8()),
                _ => return false,
            }
        };
        if class != Class::Other && prev == Some(class) {
            return false;
        }
        prev = Some(class);
        rest = &rest[len..];
    }
    true
}

/// For every pattern, the number of columns in which at least half of the
/// values generalize to it.
pub fn infer_pattern_counts(corpus: &Corpus) -> BTreeMap<String, usize> {
    let mut coverage: BTreeMap<String, usize> = BTreeMap::new();
    for column in corpus {
        let mut counts: HashMap<String, usize> = HashMap::new();
        for v in &column.values {
            *counts.entry(generalize(v)).or_default() += 1;
        }
        let n = column.values.len();
        for (pattern, count) in counts {
            if 2 * count >= n {
                *coverage.entry(pattern).or_default() += 1;
            }
        }
    }
    coverage
}

/// The `top_k` patterns by column coverage, ties broken by pattern string.
pub fn infer_patterns(corpus: &Corpus, top_k: usize) -> Vec<DomainEvalFn> {
    let mut ranked: Vec<(String, usize)> = infer_pattern_counts(corpus).into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked
        .into_iter()
        .take(top_k)
        .map(|(pattern, _)| PatternFnParams { pattern }.into_fn())
        .collect()
}
