//! Per-sentence JSON records.

use serde::Serialize;

use crate::grading::BestAssignment;

/// Rounds to `digits` significant decimal digits so that printed values do
/// not depend on accumulated rounding noise.
pub fn round_significant(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let s = format!("{:.*e}", digits.saturating_sub(1), x);
    let v: f64 = s.parse().unwrap_or(x);
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

pub const SIGNIFICANT_DIGITS: usize = 12;

/// `{words, chosen_types, links, residual, harmony, grammatical, ratio}`;
/// field order is the serialization order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SentenceRecord {
    pub words: Vec<String>,
    pub chosen_types: Vec<String>,
    pub links: Vec<[usize; 2]>,
    pub residual: String,
    pub harmony: f64,
    pub grammatical: bool,
    pub ratio: f64,
}

impl SentenceRecord {
    pub fn new<S: AsRef<str>>(words: &[S], best: &BestAssignment) -> Self {
        SentenceRecord {
            words: words.iter().map(|w| w.as_ref().to_string()).collect(),
            chosen_types: best
                .candidate
                .word_types
                .iter()
                .map(ToString::to_string)
                .collect(),
            links: best.reduction.links().iter().map(|l| [l.i, l.j]).collect(),
            residual: best.reduction.residual().to_string(),
            harmony: round_significant(best.score.harmony, SIGNIFICANT_DIGITS),
            grammatical: best.score.sentence_reached,
            ratio: round_significant(best.score.reduced_symbols_ratio, SIGNIFICANT_DIGITS),
        }
    }
}
