//! Harmonic grammars as symmetric quadratic forms over structure vectors.
//!
//! A root rule `A` at anchor `ρ` is the projector `u uᵀ` with
//! `u = bind(A, ρ)`. A production `A → B C` at `ρ` pairs the parent with
//! each child: `¼(u vᵀ + v uᵀ) + ¼(u wᵀ + w uᵀ)` where `v = bind(B, ρ0)` and
//! `w = bind(C, ρ1)`. On 0/1 structures this scores 1 for a complete
//! match, ½ for the parent with one correct child and 0 without the parent.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::ics::{StructureSpace, StructureVector, TreePath};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleKind {
    Production {
        parent: String,
        left: String,
        right: String,
    },
    Root {
        symbol: String,
    },
}

impl RuleKind {
    pub fn production(parent: &str, left: &str, right: &str) -> Self {
        RuleKind::Production {
            parent: parent.to_string(),
            left: left.to_string(),
            right: right.to_string(),
        }
    }

    pub fn root(symbol: &str) -> Self {
        RuleKind::Root {
            symbol: symbol.to_string(),
        }
    }

    pub fn symbols(&self) -> Vec<&str> {
        match self {
            RuleKind::Production {
                parent,
                left,
                right,
            } => vec![parent, left, right],
            RuleKind::Root { symbol } => vec![symbol],
        }
    }
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleKind::Production {
                parent,
                left,
                right,
            } => write!(f, "{parent} -> {left} {right}"),
            RuleKind::Root { symbol } => write!(f, "root {symbol}"),
        }
    }
}

/// Anchor-free rule with its weight, as read from a grammar file.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleTemplate {
    pub kind: RuleKind,
    pub weight: f64,
}

impl RuleTemplate {
    pub fn new(kind: RuleKind, weight: f64) -> Self {
        RuleTemplate { kind, weight }
    }

    pub fn at(&self, anchor: TreePath) -> HarmonicRule {
        HarmonicRule {
            kind: self.kind.clone(),
            anchor,
            weight: self.weight,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicRule {
    pub kind: RuleKind,
    pub anchor: TreePath,
    pub weight: f64,
}

impl HarmonicRule {
    pub fn production(
        parent: &str,
        left: &str,
        right: &str,
        anchor: TreePath,
        weight: f64,
    ) -> Self {
        HarmonicRule {
            kind: RuleKind::production(parent, left, right),
            anchor,
            weight,
        }
    }

    pub fn root(symbol: &str, weight: f64) -> Self {
        HarmonicRule {
            kind: RuleKind::root(symbol),
            anchor: TreePath::root(),
            weight,
        }
    }
}

impl fmt::Display for HarmonicRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} @ {} (w={})", self.kind, self.anchor, self.weight)
    }
}

/// Anchors for productions: every path strictly shorter than `depth_max`,
/// so both children stay in range. Root rules get the single root anchor.
pub fn instantiate_rule_at_all_anchors(
    template: &RuleTemplate,
    space: &StructureSpace,
) -> Vec<HarmonicRule> {
    match template.kind {
        RuleKind::Root { .. } => vec![template.at(TreePath::root())],
        RuleKind::Production { .. } => space
            .roles
            .paths_shorter_than(space.roles.depth_max())
            .into_iter()
            .map(|p| template.at(p))
            .collect(),
    }
}

/// How grammar-file templates are anchored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Anchoring {
    #[default]
    RootOnly,
    AllAnchors,
}

/// Anchored rules for a list of templates, together with the template index
/// each rule came from.
pub fn instantiate(
    templates: &[RuleTemplate],
    anchoring: Anchoring,
    space: &StructureSpace,
) -> (Vec<HarmonicRule>, Vec<usize>) {
    let mut rules = Vec::new();
    let mut origin = Vec::new();
    for (k, t) in templates.iter().enumerate() {
        let anchored = match anchoring {
            Anchoring::RootOnly => vec![t.at(TreePath::root())],
            Anchoring::AllAnchors => instantiate_rule_at_all_anchors(t, space),
        };
        origin.extend(std::iter::repeat_n(k, anchored.len()));
        rules.extend(anchored);
    }
    (rules, origin)
}

type Entries = BTreeMap<(usize, usize), f64>;

/// `W = Σ w_i W_i`, stored sparsely with both triangles present.
#[derive(Debug, Clone)]
pub struct GrammarMatrix {
    space: Arc<StructureSpace>,
    rules: Vec<HarmonicRule>,
    rule_entries: Vec<Entries>,
    entries: Entries,
}

fn add_sym(entries: &mut Entries, a: usize, b: usize, v: f64) {
    *entries.entry((a, b)).or_insert(0.0) += v;
    if a != b {
        *entries.entry((b, a)).or_insert(0.0) += v;
    }
}

fn unweighted_entries(rule: &HarmonicRule, space: &StructureSpace) -> Result<Entries> {
    let index = |symbol: &str, path: &TreePath| -> Result<usize> {
        let f = space.fillers.index_of(symbol)?;
        space.roles.check(path)?;
        Ok(space.dense_index(f, path))
    };
    let mut entries = Entries::new();
    match &rule.kind {
        RuleKind::Root { symbol } => {
            if rule.anchor.depth() != 0 {
                return Err(Error::ShapeMismatch(format!(
                    "root rule anchored at {}",
                    rule.anchor
                )));
            }
            let u = index(symbol, &rule.anchor)?;
            add_sym(&mut entries, u, u, 1.0);
        }
        RuleKind::Production {
            parent,
            left,
            right,
        } => {
            let u = index(parent, &rule.anchor)?;
            let v = index(left, &rule.anchor.child(0))?;
            let w = index(right, &rule.anchor.child(1))?;
            add_sym(&mut entries, u, v, 0.25);
            add_sym(&mut entries, u, w, 0.25);
        }
    }
    Ok(entries)
}

fn quadratic(entries: &Entries, s: &[(usize, f64)]) -> f64 {
    let mut h = 0.0;
    for &(a, ca) in s {
        for &(b, cb) in s {
            if let Some(&v) = entries.get(&(a, b)) {
                h += ca * v * cb;
            }
        }
    }
    h
}

/// The unweighted matrix `W_i` of a single rule.
pub fn rule_matrix(rule: &HarmonicRule, space: &Arc<StructureSpace>) -> Result<GrammarMatrix> {
    let entries = unweighted_entries(rule, space)?;
    let unit = HarmonicRule {
        weight: 1.0,
        ..rule.clone()
    };
    Ok(GrammarMatrix {
        space: Arc::clone(space),
        rules: vec![unit],
        rule_entries: vec![entries.clone()],
        entries,
    })
}

pub fn grammar_matrix(
    rules: &[HarmonicRule],
    space: &Arc<StructureSpace>,
) -> Result<GrammarMatrix> {
    let mut entries = Entries::new();
    let mut rule_entries = Vec::with_capacity(rules.len());
    for rule in rules {
        if !rule.weight.is_finite() {
            return Err(Error::InvalidWeight(rule.to_string()));
        }
        let e = unweighted_entries(rule, space)?;
        for (&(a, b), &v) in &e {
            *entries.entry((a, b)).or_insert(0.0) += rule.weight * v;
        }
        rule_entries.push(e);
    }
    Ok(GrammarMatrix {
        space: Arc::clone(space),
        rules: rules.to_vec(),
        rule_entries,
        entries,
    })
}

impl GrammarMatrix {
    pub fn space(&self) -> &Arc<StructureSpace> {
        &self.space
    }

    pub fn rules(&self) -> &[HarmonicRule] {
        &self.rules
    }

    /// Entry `W[a, b]` in the dense layout of the structure space.
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.entries.get(&(a, b)).copied().unwrap_or(0.0)
    }

    /// Stored nonzero entries (both triangles).
    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    pub fn is_symmetric(&self) -> bool {
        self.entries
            .iter()
            .all(|(&(a, b), &v)| self.entries.get(&(b, a)) == Some(&v))
    }

    /// Materializes the full `dim × dim` matrix. Size grows as
    /// `(|F| · Σ_d arity^d)²`, so keep depth small.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.space.dim();
        let mut m = DMatrix::zeros(n, n);
        for (&(a, b), &v) in &self.entries {
            m[(a, b)] = v;
        }
        m
    }

    /// `w_i · sᵀ W_i s` for every rule, in rule order.
    pub fn contributions(&self, s: &StructureVector) -> Result<Vec<f64>> {
        StructureSpace::ensure_same(&self.space, s.space())?;
        let idx = s.indexed();
        Ok(self
            .rules
            .iter()
            .zip(&self.rule_entries)
            .map(|(r, e)| r.weight * quadratic(e, &idx))
            .collect())
    }
}

/// `sᵀ W s`, summed over pairs of bindings.
pub fn harmony(s: &StructureVector, g: &GrammarMatrix) -> Result<f64> {
    StructureSpace::ensure_same(s.space(), g.space())?;
    Ok(quadratic(&g.entries, &s.indexed()))
}

/// Same quadratic form through dense matrix-vector arithmetic.
pub fn harmony_dense(s: &StructureVector, g: &GrammarMatrix) -> Result<f64> {
    StructureSpace::ensure_same(s.space(), g.space())?;
    let v = s.dense();
    let w = g.to_dense();
    Ok(v.dot(&(w * &v)))
}

/// Parses grammar files made of `rule <w> <A> -> <B> <C>` and
/// `root <w> <A>` lines; `#` starts a comment.
pub fn parse_grammar(text: &str) -> Result<Vec<RuleTemplate>> {
    parse_grammar_named(text, "<grammar>")
}

pub fn parse_grammar_named(text: &str, source_name: &str) -> Result<Vec<RuleTemplate>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or_default();
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let err = |m: &str| Error::syntax(source_name, line_no, m);
        let weight = |field: &str| -> Result<f64> {
            field
                .parse::<f64>()
                .ok()
                .filter(|w| w.is_finite())
                .ok_or_else(|| err(&format!("invalid weight `{field}`")))
        };
        let valid_symbol = |s: &str| !s.contains(['[', ']']) && s != "->";
        let kind = match fields.as_slice() {
            ["rule", w, a, "->", b, c] if [a, b, c].iter().all(|s| valid_symbol(s)) => {
                RuleTemplate::new(RuleKind::production(a, b, c), weight(w)?)
            }
            ["root", w, a] if valid_symbol(a) => RuleTemplate::new(RuleKind::root(a), weight(w)?),
            ["rule", ..] => return Err(err("expected `rule <w> <A> -> <B> <C>`")),
            ["root", ..] => return Err(err("expected `root <w> <A>`")),
            _ => return Err(err("expected `rule` or `root`")),
        };
        out.push(kind);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ics::{parse_tree, tree_to_structure, FillerSpace, RoleSpace};

    fn space(depth: usize) -> Arc<StructureSpace> {
        StructureSpace::new(
            FillerSpace::new(["S", "N", "V"]).unwrap(),
            RoleSpace::new(2, depth).unwrap(),
        )
    }

    fn structure(sp: &Arc<StructureSpace>, tree: &str) -> StructureVector {
        tree_to_structure(&parse_tree(tree).unwrap(), sp, false).unwrap()
    }

    fn single(rule: HarmonicRule, sp: &Arc<StructureSpace>, s: &StructureVector) -> f64 {
        harmony(s, &rule_matrix(&rule, sp).unwrap()).unwrap()
    }

    fn intransitive(sp: &Arc<StructureSpace>) -> GrammarMatrix {
        grammar_matrix(
            &[
                HarmonicRule::production("S", "N", "V", TreePath::root(), 1.0),
                HarmonicRule::root("S", 1.0),
            ],
            sp,
        )
        .unwrap()
    }

    #[test]
    fn root_rule_scores_one() {
        let sp = space(2);
        assert_eq!(
            single(HarmonicRule::root("S", 1.0), &sp, &structure(&sp, "[S]")),
            1.0
        );
    }

    #[test]
    fn production_rule_values() {
        let sp = space(2);
        let rule = || HarmonicRule::production("S", "N", "V", TreePath::root(), 1.0);
        assert_eq!(single(rule(), &sp, &structure(&sp, "[S [N] [V]]")), 1.0);
        assert_eq!(single(rule(), &sp, &structure(&sp, "[S [V] [N]]")), 0.0);
        assert_eq!(single(rule(), &sp, &structure(&sp, "[S [N]]")), 0.5);
        assert_eq!(single(rule(), &sp, &structure(&sp, "[V [N] [V]]")), 0.0);
    }

    #[test]
    fn production_matches_hand_built_dense_matrix() {
        let sp = space(1);
        let g = rule_matrix(
            &HarmonicRule::production("S", "N", "V", TreePath::root(), 1.0),
            &sp,
        )
        .unwrap();
        let u = StructureVector::dense(&crate::ics::bind("S", &TreePath::root(), &sp).unwrap());
        let v = StructureVector::dense(&crate::ics::bind("N", &[0].into(), &sp).unwrap());
        let w = StructureVector::dense(&crate::ics::bind("V", &[1].into(), &sp).unwrap());
        let expected =
            (&u * v.transpose() + &v * u.transpose() + &u * w.transpose() + &w * u.transpose())
                * 0.25;
        assert_eq!(g.to_dense(), expected);
    }

    #[test]
    fn intransitive_harmony_values() {
        let sp = space(2);
        let g = intransitive(&sp);
        let good = structure(&sp, "[S [N John] [V runs]]");
        let bad = structure(&sp, "[S [V runs] [N John]]");
        assert_eq!(harmony(&good, &g).unwrap(), 2.0);
        assert_eq!(harmony(&bad, &g).unwrap(), 1.0);
        assert_eq!(harmony_dense(&good, &g).unwrap(), 2.0);
        assert_eq!(harmony_dense(&bad, &g).unwrap(), 1.0);
        assert_eq!(harmony(&StructureVector::empty(&sp), &g).unwrap(), 0.0);
        assert_eq!(g.contributions(&good).unwrap(), vec![1.0, 1.0]);
        assert_eq!(g.contributions(&bad).unwrap(), vec![0.0, 1.0]);
        assert!(g.is_symmetric());
    }

    #[test]
    fn doubling_weights_doubles_harmony() {
        let sp = space(2);
        let g = grammar_matrix(
            &[
                HarmonicRule::production("S", "N", "V", TreePath::root(), 2.0),
                HarmonicRule::root("S", 2.0),
            ],
            &sp,
        )
        .unwrap();
        assert_eq!(harmony(&structure(&sp, "[S [N] [V]]"), &g).unwrap(), 4.0);
    }

    #[test]
    fn empty_grammar_is_zero() {
        let sp = space(2);
        let g = grammar_matrix(&[], &sp).unwrap();
        assert_eq!(g.entries().count(), 0);
        assert_eq!(harmony(&structure(&sp, "[S [N] [V]]"), &g).unwrap(), 0.0);
    }

    #[test]
    fn all_anchor_instantiation() {
        let sp = space(2);
        let prod = RuleTemplate::new(RuleKind::production("S", "N", "V"), 1.0);
        let anchors: Vec<_> = instantiate_rule_at_all_anchors(&prod, &sp)
            .into_iter()
            .map(|r| r.anchor)
            .collect();
        assert_eq!(anchors, vec![TreePath::root(), [0].into(), [1].into()]);
        let root = RuleTemplate::new(RuleKind::root("S"), 1.0);
        assert_eq!(instantiate_rule_at_all_anchors(&root, &sp).len(), 1);
    }

    #[test]
    fn embedded_production_counted_twice() {
        let sp = space(2);
        let mut s = StructureVector::empty(&sp);
        for (f, p) in [
            ("S", vec![]),
            ("N", vec![0]),
            ("V", vec![1]),
            ("S", vec![1]),
            ("N", vec![1, 0]),
            ("V", vec![1, 1]),
        ] {
            s.add_binding(f, &TreePath(p), 1.0).unwrap();
        }
        let templates = [
            RuleTemplate::new(RuleKind::production("S", "N", "V"), 1.0),
            RuleTemplate::new(RuleKind::root("S"), 1.0),
        ];
        let (rules, origin) = instantiate(&templates, Anchoring::AllAnchors, &sp);
        assert_eq!(origin, vec![0, 0, 0, 1]);
        let g = grammar_matrix(&rules, &sp).unwrap();
        assert_eq!(harmony(&s, &g).unwrap(), 3.0);
        assert_eq!(harmony_dense(&s, &g).unwrap(), 3.0);
    }

    #[test]
    fn rule_errors() {
        let sp = space(1);
        let deep = HarmonicRule::production("S", "N", "V", [0].into(), 1.0);
        assert!(matches!(
            rule_matrix(&deep, &sp),
            Err(Error::DepthExceeded { .. })
        ));
        let unknown = HarmonicRule::root("X", 1.0);
        assert_eq!(
            rule_matrix(&unknown, &sp).unwrap_err(),
            Error::UnknownFiller("X".into())
        );
        let other = StructureSpace::new(FillerSpace::new(["S"]).unwrap(), RoleSpace::default());
        let g = intransitive(&sp);
        assert_eq!(
            harmony(&StructureVector::empty(&other), &g).unwrap_err(),
            Error::SpaceMismatch
        );
    }

    #[test]
    fn grammar_file() {
        let text = "# intransitive\nrule 1 S -> N V\nroot 1.5 S  # bonus\n\n";
        let rules = parse_grammar(text).unwrap();
        assert_eq!(
            rules,
            vec![
                RuleTemplate::new(RuleKind::production("S", "N", "V"), 1.0),
                RuleTemplate::new(RuleKind::root("S"), 1.5),
            ]
        );
        for bad in [
            "rule 1 S N V",
            "root x S",
            "rule inf S -> N V",
            "start 1 S",
            "root 1 [S]",
        ] {
            assert!(
                matches!(parse_grammar(bad), Err(Error::Syntax { line: 1, .. })),
                "{bad}"
            );
        }
    }
}
