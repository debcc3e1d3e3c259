//! Graded grammaticality: one point per cancellation, one for arriving at
//! the sentence type.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pregroup::{assign_types, BaseType, Candidate, Lexicon};
use crate::reducer::{is_grammatical, max_reduction, Reduction};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradingWeights {
    per_reduction: f64,
    sentence_bonus: f64,
}

impl Default for GradingWeights {
    fn default() -> Self {
        GradingWeights {
            per_reduction: 1.0,
            sentence_bonus: 1.0,
        }
    }
}

impl GradingWeights {
    pub fn new(per_reduction: f64, sentence_bonus: f64) -> Result<Self> {
        for (name, w) in [
            ("per_reduction", per_reduction),
            ("sentence_bonus", sentence_bonus),
        ] {
            if !w.is_finite() {
                return Err(Error::InvalidWeight(format!("{name} = {w}")));
            }
        }
        Ok(GradingWeights {
            per_reduction,
            sentence_bonus,
        })
    }

    pub fn per_reduction(&self) -> f64 {
        self.per_reduction
    }

    pub fn sentence_bonus(&self) -> f64 {
        self.sentence_bonus
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradedScore {
    pub links: usize,
    /// Fraction of simples consumed by links; 1 for the unit.
    pub reduced_symbols_ratio: f64,
    pub sentence_reached: bool,
    pub harmony: f64,
}

pub fn grade(r: &Reduction, w: &GradingWeights, sentence_base: &BaseType) -> GradedScore {
    let links = r.link_count();
    let n = r.types().len();
    let reduced_symbols_ratio = if n == 0 {
        1.0
    } else {
        (2 * links) as f64 / n as f64
    };
    let sentence_reached = is_grammatical(r, sentence_base);
    let bonus = if sentence_reached {
        w.sentence_bonus
    } else {
        0.0
    };
    GradedScore {
        links,
        reduced_symbols_ratio,
        sentence_reached,
        harmony: w.per_reduction * links as f64 + bonus,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestAssignment {
    pub candidate: Candidate,
    pub reduction: Reduction,
    pub score: GradedScore,
    /// Candidates actually graded.
    pub considered: usize,
    /// True when the ambiguity cap cut enumeration short.
    pub truncated: bool,
}

/// Grades every type assignment (up to `cap`) and keeps the first one with
/// the highest harmony.
pub fn grade_best_assignment<S: AsRef<str>>(
    words: &[S],
    lex: &Lexicon,
    w: &GradingWeights,
    cap: usize,
) -> Result<BestAssignment> {
    let assignments = assign_types(words, lex, cap)?;
    let considered = assignments.candidates.len();
    let base = lex.sentence_base();
    let mut best: Option<(Candidate, Reduction, GradedScore)> = None;
    for candidate in assignments.candidates {
        let reduction = max_reduction(&candidate.types);
        let score = grade(&reduction, w, base);
        if best
            .as_ref()
            .is_none_or(|(_, _, b)| score.harmony > b.harmony)
        {
            best = Some((candidate, reduction, score));
        }
    }
    let (candidate, reduction, score) = best.expect("at least one candidate");
    Ok(BestAssignment {
        candidate,
        reduction,
        score,
        considered,
        truncated: assignments.truncated,
    })
}
