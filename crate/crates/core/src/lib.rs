//! Pregroup grammar reduction with graded grammaticality, tensor-product
//! structure representations scored by harmonic grammars, and
//! compositional semantics by tensor contraction.
//!
//! ```
//! use pregroup_harmony::{grade_best_assignment, GradingWeights, Lexicon};
//!
//! let lex = Lexicon::parse("Priscilla\tn\neats\tn^r s n^l\nbananas\tn\n").unwrap();
//! let best = grade_best_assignment(
//!     &["Priscilla", "eats", "bananas"],
//!     &lex,
//!     &GradingWeights::default(),
//!     1024,
//! )
//! .unwrap();
//! assert_eq!(best.reduction.to_string(), "n n^r s n^l n ≤ s");
//! assert_eq!(best.score.harmony, 3.0);
//! ```

pub mod dot;
pub mod error;
pub mod grading;
pub mod harmonic;
pub mod ics;
pub mod oracle;
pub mod pregroup;
pub mod reducer;
pub mod report;
pub mod semantics;

pub use error::{Error, Result};
pub use grading::{grade, grade_best_assignment, BestAssignment, GradedScore, GradingWeights};
pub use harmonic::{
    grammar_matrix, harmony, harmony_dense, instantiate_rule_at_all_anchors, parse_grammar,
    rule_matrix, Anchoring, GrammarMatrix, HarmonicRule, RuleKind, RuleTemplate,
};
pub use ics::{
    bind, parse_tree, tree_to_structure, FillerSpace, RoleSpace, StructureSpace, StructureVector,
    Tree, TreePath,
};
pub use pregroup::{
    adjoint, assign_types, cancels, parse_type, BaseType, Candidate, Lexicon, PregroupType, Side,
    SimpleType, DEFAULT_AMBIGUITY_CAP,
};
pub use reducer::{brute_force_reduction, is_grammatical, max_reduction, Link, Reduction};
pub use semantics::{
    compose, compose_in_order, compose_partial, Tensor, TensorLexicon, TypeSpaceMap, WordTensor,
};
