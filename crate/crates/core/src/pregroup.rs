//! Pregroup types with iterated adjoints, the cancellation relation and the
//! lexicon.
//!
//! A simple type is a base name with a signed adjoint degree: `n^l` has
//! degree -1, `n^r` degree +1, `n^ll` degree -2 and so on. A pregroup type is
//! a juxtaposition of simple types; the empty juxtaposition is the unit `1`.
//!
//! The only reduction is cancellation of an adjacent pair `(x, z) (x, z+1)`,
//! which covers both `x^l x <= 1` and `x x^r <= 1`.

use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Name of an atomic type such as `n` or `s`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BaseType(String);

impl BaseType {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if is_valid_base(&name) {
            Ok(BaseType(name))
        } else {
            Err(Error::InvalidBase(name))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The default sentence type `s`.
    pub fn sentence() -> Self {
        BaseType("s".to_string())
    }
}

fn is_valid_base(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit())
}

impl fmt::Display for BaseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for BaseType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BaseType::new(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A base type together with its adjoint degree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimpleType {
    pub base: BaseType,
    pub degree: i32,
}

impl SimpleType {
    pub fn new(base: BaseType, degree: i32) -> Self {
        SimpleType { base, degree }
    }

    pub fn plain(base: BaseType) -> Self {
        SimpleType { base, degree: 0 }
    }

    pub fn left(&self) -> Self {
        adjoint(self, Side::Left)
    }

    pub fn right(&self) -> Self {
        adjoint(self, Side::Right)
    }
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.base)?;
        let letter = match self.degree.signum() {
            0 => return Ok(()),
            -1 => 'l',
            _ => 'r',
        };
        f.write_str("^")?;
        for _ in 0..self.degree.unsigned_abs() {
            write!(f, "{letter}")?;
        }
        Ok(())
    }
}

impl FromStr for SimpleType {
    type Err = Error;

    fn from_str(token: &str) -> Result<Self> {
        let malformed = |reason: &str| Error::MalformedType {
            token: token.to_string(),
            reason: reason.to_string(),
        };
        let (base, suffix) = match token.split_once('^') {
            Some((base, suffix)) => (base, Some(suffix)),
            None => (token, None),
        };
        if base.is_empty() {
            return Err(malformed("empty base"));
        }
        if !is_valid_base(base) {
            return Err(malformed("base must be lowercase alphanumeric"));
        }
        let degree = match suffix {
            None => 0,
            Some("") => return Err(malformed("empty adjoint suffix")),
            Some(suffix) => {
                let sign = match suffix.as_bytes()[0] {
                    b'l' => -1,
                    b'r' => 1,
                    _ => return Err(malformed("adjoint suffix must be l... or r...")),
                };
                let first = suffix.as_bytes()[0];
                if suffix.bytes().any(|b| b != first) {
                    return Err(malformed("mixed adjoint suffix"));
                }
                let count = i32::try_from(suffix.len())
                    .ok()
                    .filter(|&c| c < i32::MAX)
                    .ok_or_else(|| malformed("adjoint degree too large"))?;
                sign * count
            }
        };
        Ok(SimpleType {
            base: BaseType(base.to_string()),
            degree,
        })
    }
}

/// Left adjoint lowers the degree by one, right adjoint raises it.
pub fn adjoint(t: &SimpleType, side: Side) -> SimpleType {
    let degree = match side {
        Side::Left => t.degree - 1,
        Side::Right => t.degree + 1,
    };
    SimpleType {
        base: t.base.clone(),
        degree,
    }
}

/// Whether the adjacent pair `a b` reduces to the unit.
pub fn cancels(a: &SimpleType, b: &SimpleType) -> bool {
    a.base == b.base && i64::from(b.degree) == i64::from(a.degree) + 1
}

/// A string of simple types. The empty string is the unit type.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct PregroupType {
    simples: Vec<SimpleType>,
}

impl PregroupType {
    pub fn new(simples: Vec<SimpleType>) -> Self {
        PregroupType { simples }
    }

    pub fn unit() -> Self {
        PregroupType::default()
    }

    pub fn simples(&self) -> &[SimpleType] {
        &self.simples
    }

    pub fn len(&self) -> usize {
        self.simples.len()
    }

    pub fn is_unit(&self) -> bool {
        self.simples.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_unit()
    }

    pub fn concat(&self, other: &PregroupType) -> PregroupType {
        let mut simples = self.simples.clone();
        simples.extend_from_slice(&other.simples);
        PregroupType { simples }
    }

    /// Notation used in text output, where the unit is written `1`.
    pub fn display_or_unit(&self) -> String {
        if self.is_unit() {
            "1".to_string()
        } else {
            self.to_string()
        }
    }
}

impl From<Vec<SimpleType>> for PregroupType {
    fn from(simples: Vec<SimpleType>) -> Self {
        PregroupType { simples }
    }
}

impl FromIterator<SimpleType> for PregroupType {
    fn from_iter<I: IntoIterator<Item = SimpleType>>(iter: I) -> Self {
        PregroupType {
            simples: iter.into_iter().collect(),
        }
    }
}

/// Renders the canonical notation; the unit renders as the empty string so
/// that rendering always re-parses to the same sequence.
impl fmt::Display for PregroupType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, t) in self.simples.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl FromStr for PregroupType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_type(s)
    }
}

impl Serialize for PregroupType {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Parses whitespace-separated notation such as `n^r s n^l`.
pub fn parse_type(text: &str) -> Result<PregroupType> {
    text.split_whitespace()
        .map(SimpleType::from_str)
        .collect::<Result<Vec<_>>>()
        .map(PregroupType::new)
}

/// Words with one or more pregroup types, kept in insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    entries: IndexMap<String, Vec<PregroupType>>,
    sentence_base: BaseType,
}

impl Default for Lexicon {
    fn default() -> Self {
        Lexicon {
            entries: IndexMap::new(),
            sentence_base: BaseType::sentence(),
        }
    }
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a type for `word` after any it already has.
    pub fn add(&mut self, word: impl Into<String>, ty: PregroupType) {
        self.entries.entry(word.into()).or_default().push(ty);
    }

    pub fn with(mut self, word: &str, notation: &str) -> Result<Self> {
        self.add(word, parse_type(notation)?);
        Ok(self)
    }

    pub fn types_of(&self, word: &str) -> Option<&[PregroupType]> {
        self.entries.get(word).map(Vec::as_slice)
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sentence_base(&self) -> &BaseType {
        &self.sentence_base
    }

    pub fn set_sentence_base(&mut self, base: BaseType) {
        self.sentence_base = base;
    }

    /// Parses the lexicon file format: one `word<TAB>type` entry per line,
    /// `#` comments, and an optional `!s <base>` line setting the sentence
    /// type.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_named(text, "<lexicon>")
    }

    pub fn parse_named(text: &str, source_name: &str) -> Result<Self> {
        let mut lex = Lexicon::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            if let Some(rest) = line.trim_start().strip_prefix("!s") {
                let base = rest.trim();
                if rest.chars().next().is_some_and(|c| !c.is_whitespace()) || base.is_empty() {
                    return Err(Error::syntax(source_name, line_no, "expected `!s <base>`"));
                }
                lex.sentence_base = BaseType::new(base)
                    .map_err(|e| Error::syntax(source_name, line_no, e.to_string()))?;
                continue;
            }
            let Some((word, notation)) = line.split_once('\t') else {
                return Err(Error::syntax(
                    source_name,
                    line_no,
                    "expected `word<TAB>type`",
                ));
            };
            let word = word.trim();
            if word.is_empty() || word.contains(char::is_whitespace) {
                return Err(Error::syntax(source_name, line_no, "invalid word"));
            }
            let ty = parse_type(notation)
                .map_err(|e| Error::syntax(source_name, line_no, e.to_string()))?;
            lex.add(word, ty);
        }
        Ok(lex)
    }
}

pub const DEFAULT_AMBIGUITY_CAP: usize = 1024;

/// One choice of lexicon entry per word.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    /// Entry index chosen for each word.
    pub choices: Vec<usize>,
    /// Per-word types in sentence order.
    pub word_types: Vec<PregroupType>,
    /// The concatenated type string.
    pub types: PregroupType,
    /// Start offset of each word within `types`.
    pub offsets: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignments {
    pub candidates: Vec<Candidate>,
    /// Number of combinations before the cap, saturating.
    pub total: u128,
    pub truncated: bool,
}

/// Enumerates the Cartesian product of per-word types, last word varying
/// fastest, stopping after `cap` candidates.
pub fn assign_types<S: AsRef<str>>(words: &[S], lex: &Lexicon, cap: usize) -> Result<Assignments> {
    let per_word = words
        .iter()
        .map(|w| {
            lex.types_of(w.as_ref())
                .ok_or_else(|| Error::UnknownWord(w.as_ref().to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    let total = per_word
        .iter()
        .fold(1u128, |acc, t| acc.saturating_mul(t.len() as u128));

    let mut candidates = Vec::new();
    let mut choices = vec![0usize; per_word.len()];
    while candidates.len() < cap {
        let word_types: Vec<PregroupType> = choices
            .iter()
            .zip(&per_word)
            .map(|(&c, types)| types[c].clone())
            .collect();
        let mut offsets = Vec::with_capacity(word_types.len());
        let mut simples = Vec::new();
        for t in &word_types {
            offsets.push(simples.len());
            simples.extend_from_slice(t.simples());
        }
        candidates.push(Candidate {
            choices: choices.clone(),
            word_types,
            types: PregroupType::new(simples),
            offsets,
        });

        // odometer step
        let mut pos = per_word.len();
        loop {
            if pos == 0 {
                return Ok(Assignments {
                    truncated: (candidates.len() as u128) < total,
                    candidates,
                    total,
                });
            }
            pos -= 1;
            choices[pos] += 1;
            if choices[pos] < per_word[pos].len() {
                break;
            }
            choices[pos] = 0;
        }
    }
    Ok(Assignments {
        truncated: (candidates.len() as u128) < total,
        candidates,
        total,
    })
}
