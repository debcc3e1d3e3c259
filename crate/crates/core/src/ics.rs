//! Tensor-product structure representations.
//!
//! A symbol at a tree position is the binding `filler ⊗ role`. Fillers are
//! one-hot over a fixed symbol list; the role of a path `[c1, …, cd]` is the
//! tensor power `r_c1 ⊗ … ⊗ r_cd` of one-hot child roles, so every
//! (filler, path) binding is a distinct orthonormal basis vector of
//! `⊕_d F ⊗ R^{⊗d}`. Structures are kept sparse and only materialized on
//! request.
//!
//! Dense layout: blocks by depth, and within the depth-`d` block the index of
//! `(f, path)` is `f · arity^d + role_index(path)`, where `role_index` reads
//! the path as base-`arity` digits (most significant first).

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{Error, Result};

pub const DEFAULT_ARITY: usize = 2;
pub const DEFAULT_DEPTH_MAX: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FillerSpace {
    symbols: Vec<String>,
    index: HashMap<String, usize>,
}

impl FillerSpace {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Result<Self> {
        let mut space = FillerSpace {
            symbols: Vec::new(),
            index: HashMap::new(),
        };
        for s in symbols {
            let s = s.into();
            if space.index.contains_key(&s) {
                return Err(Error::DuplicateFiller(s));
            }
            space.index.insert(s.clone(), space.symbols.len());
            space.symbols.push(s);
        }
        Ok(space)
    }

    /// Like [`FillerSpace::new`] but silently skips repeated symbols.
    pub fn from_symbols_dedup<S: AsRef<str>>(symbols: impl IntoIterator<Item = S>) -> Self {
        let mut seen = Vec::new();
        for s in symbols {
            let s = s.as_ref();
            if !seen.iter().any(|t: &String| t == s) {
                seen.push(s.to_string());
            }
        }
        FillerSpace::new(seen).expect("deduplicated")
    }

    pub fn dim(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn index_of(&self, symbol: &str) -> Result<usize> {
        self.index
            .get(symbol)
            .copied()
            .ok_or_else(|| Error::UnknownFiller(symbol.to_string()))
    }

    pub fn basis(&self, symbol: &str) -> Result<DVector<f64>> {
        let k = self.index_of(symbol)?;
        Ok(DVector::from_fn(
            self.dim(),
            |r, _| if r == k { 1.0 } else { 0.0 },
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoleSpace {
    arity: usize,
    depth_max: usize,
}

impl Default for RoleSpace {
    fn default() -> Self {
        RoleSpace {
            arity: DEFAULT_ARITY,
            depth_max: DEFAULT_DEPTH_MAX,
        }
    }
}

impl RoleSpace {
    pub fn new(arity: usize, depth_max: usize) -> Result<Self> {
        if arity == 0 {
            return Err(Error::ShapeMismatch("arity must be at least 1".into()));
        }
        let fits = u32::try_from(depth_max + 1)
            .ok()
            .and_then(|d| arity.checked_pow(d))
            .and_then(|p| p.checked_mul(depth_max + 1))
            .is_some();
        if !fits {
            return Err(Error::ShapeMismatch(format!(
                "role space of arity {arity} and depth {depth_max} is too large"
            )));
        }
        Ok(RoleSpace { arity, depth_max })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn depth_max(&self) -> usize {
        self.depth_max
    }

    /// Dimension of `R^{⊗depth}`.
    pub fn dim_at(&self, depth: usize) -> usize {
        self.arity.pow(depth as u32)
    }

    pub fn check(&self, path: &TreePath) -> Result<()> {
        if path.depth() > self.depth_max {
            return Err(Error::DepthExceeded {
                depth: path.depth(),
                depth_max: self.depth_max,
            });
        }
        if let Some(&index) = path.0.iter().find(|&&c| c >= self.arity) {
            return Err(Error::ArityExceeded {
                index,
                arity: self.arity,
            });
        }
        Ok(())
    }

    /// Position of the path's role vector within `R^{⊗depth}`.
    pub fn role_index(&self, path: &TreePath) -> usize {
        path.0.iter().fold(0, |acc, &c| acc * self.arity + c)
    }

    /// Dense role vector of a path: the Kronecker product of its child roles.
    pub fn role_vector(&self, path: &TreePath) -> DVector<f64> {
        let mut v = DVector::from_element(1, 1.0);
        for &c in &path.0 {
            let r = DVector::from_fn(self.arity, |k, _| if k == c { 1.0 } else { 0.0 });
            v = v.kronecker(&r);
        }
        v
    }

    /// Every path of length `< max_len`, shortest first then lexicographic.
    pub fn paths_shorter_than(&self, max_len: usize) -> Vec<TreePath> {
        let mut out = vec![TreePath::root()];
        let mut frontier = vec![TreePath::root()];
        for _ in 1..max_len {
            let mut next = Vec::new();
            for p in &frontier {
                for c in 0..self.arity {
                    next.push(p.child(c));
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        if max_len == 0 {
            out.clear();
        }
        out
    }
}

/// Child indices from the root; the empty path is the root itself.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TreePath(pub Vec<usize>);

impl TreePath {
    pub fn root() -> Self {
        TreePath(Vec::new())
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn child(&self, c: usize) -> Self {
        let mut p = self.0.clone();
        p.push(c);
        TreePath(p)
    }
}

impl From<Vec<usize>> for TreePath {
    fn from(v: Vec<usize>) -> Self {
        TreePath(v)
    }
}

impl<const N: usize> From<[usize; N]> for TreePath {
    fn from(v: [usize; N]) -> Self {
        TreePath(v.to_vec())
    }
}

impl fmt::Display for TreePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (k, c) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("]")
    }
}

/// Filler and role spaces shared by structures and grammars.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureSpace {
    pub fillers: FillerSpace,
    pub roles: RoleSpace,
}

impl StructureSpace {
    pub fn new(fillers: FillerSpace, roles: RoleSpace) -> Arc<Self> {
        Arc::new(StructureSpace { fillers, roles })
    }

    pub fn block_dim(&self, depth: usize) -> usize {
        self.fillers.dim() * self.roles.dim_at(depth)
    }

    pub fn block_offset(&self, depth: usize) -> usize {
        (0..depth).map(|d| self.block_dim(d)).sum()
    }

    /// Dimension of the whole direct sum up to `depth_max`.
    pub fn dim(&self) -> usize {
        self.block_offset(self.roles.depth_max + 1)
    }

    /// Index of `(filler, path)` inside the depth block.
    pub fn block_index(&self, filler: usize, path: &TreePath) -> usize {
        filler * self.roles.dim_at(path.depth()) + self.roles.role_index(path)
    }

    pub fn dense_index(&self, filler: usize, path: &TreePath) -> usize {
        self.block_offset(path.depth()) + self.block_index(filler, path)
    }

    fn same(a: &Arc<Self>, b: &Arc<Self>) -> bool {
        Arc::ptr_eq(a, b) || a == b
    }

    pub(crate) fn ensure_same(a: &Arc<Self>, b: &Arc<Self>) -> Result<()> {
        if Self::same(a, b) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }
}

/// Sparse sum of filler/role bindings.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureVector {
    space: Arc<StructureSpace>,
    bindings: BTreeMap<(usize, TreePath), f64>,
}

impl StructureVector {
    pub fn empty(space: &Arc<StructureSpace>) -> Self {
        StructureVector {
            space: Arc::clone(space),
            bindings: BTreeMap::new(),
        }
    }

    pub fn space(&self) -> &Arc<StructureSpace> {
        &self.space
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    /// `(filler index, path, coefficient)` in filler-then-path order.
    pub fn bindings(&self) -> impl Iterator<Item = (usize, &TreePath, f64)> {
        self.bindings.iter().map(|((f, p), &c)| (*f, p, c))
    }

    pub fn coefficient(&self, filler: &str, path: &TreePath) -> Result<f64> {
        let f = self.space.fillers.index_of(filler)?;
        Ok(self
            .bindings
            .get(&(f, path.clone()))
            .copied()
            .unwrap_or(0.0))
    }

    /// Adds `c · (filler ⊗ role(path))` in place.
    pub fn add_binding(&mut self, filler: &str, path: &TreePath, c: f64) -> Result<()> {
        let f = self.space.fillers.index_of(filler)?;
        self.space.roles.check(path)?;
        self.accumulate(f, path.clone(), c);
        Ok(())
    }

    fn accumulate(&mut self, f: usize, path: TreePath, c: f64) {
        let key = (f, path);
        let v = self.bindings.get(&key).copied().unwrap_or(0.0) + c;
        if v == 0.0 {
            self.bindings.remove(&key);
        } else {
            self.bindings.insert(key, v);
        }
    }

    pub fn sum(&self, other: &StructureVector) -> Result<StructureVector> {
        StructureSpace::ensure_same(&self.space, &other.space)?;
        let mut out = self.clone();
        for ((f, p), &c) in &other.bindings {
            out.accumulate(*f, p.clone(), c);
        }
        Ok(out)
    }

    pub fn scale(&self, c: f64) -> StructureVector {
        let bindings = if c == 0.0 {
            BTreeMap::new()
        } else {
            self.bindings
                .iter()
                .map(|(k, &v)| (k.clone(), v * c))
                .filter(|(_, v)| *v != 0.0)
                .collect()
        };
        StructureVector {
            space: Arc::clone(&self.space),
            bindings,
        }
    }

    /// Filler-space vector bound to `path`. Paths never used give zero.
    pub fn unbind(&self, path: &TreePath) -> DVector<f64> {
        let mut v = DVector::zeros(self.space.fillers.dim());
        for ((f, p), &c) in &self.bindings {
            if p == path {
                v[*f] = c;
            }
        }
        v
    }

    /// Unbinding by explicit contraction of the dense depth block against the
    /// dense role vector; agrees with [`StructureVector::unbind`] exactly.
    pub fn unbind_dense(&self, path: &TreePath) -> Result<DVector<f64>> {
        self.space.roles.check(path)?;
        let depth = path.depth();
        let block = self.dense_block(depth);
        let role = self.space.roles.role_vector(path);
        let roles = role.len();
        Ok(DVector::from_fn(self.space.fillers.dim(), |f, _| {
            (0..roles).map(|r| block[f * roles + r] * role[r]).sum()
        }))
    }

    /// Dense depth-`depth` block, dimension `|F| · arity^depth`.
    pub fn dense_block(&self, depth: usize) -> DVector<f64> {
        let mut v = DVector::zeros(self.space.block_dim(depth));
        for ((f, p), &c) in &self.bindings {
            if p.depth() == depth {
                v[self.space.block_index(*f, p)] = c;
            }
        }
        v
    }

    /// Full dense vector over every depth up to `depth_max`.
    pub fn dense(&self) -> DVector<f64> {
        let mut v = DVector::zeros(self.space.dim());
        for ((f, p), &c) in &self.bindings {
            v[self.space.dense_index(*f, p)] = c;
        }
        v
    }

    pub fn dot(&self, other: &StructureVector) -> Result<f64> {
        StructureSpace::ensure_same(&self.space, &other.space)?;
        Ok(self
            .bindings
            .iter()
            .filter_map(|(k, &a)| other.bindings.get(k).map(|&b| a * b))
            .sum())
    }

    pub fn norm_squared(&self) -> f64 {
        self.bindings.values().map(|c| c * c).sum()
    }

    /// Dense indices with coefficients, used by quadratic forms.
    pub(crate) fn indexed(&self) -> Vec<(usize, f64)> {
        self.bindings
            .iter()
            .map(|((f, p), &c)| (self.space.dense_index(*f, p), c))
            .collect()
    }
}

/// Single binding of `filler` at `path` with coefficient 1.
pub fn bind(filler: &str, path: &TreePath, space: &Arc<StructureSpace>) -> Result<StructureVector> {
    let mut s = StructureVector::empty(space);
    s.add_binding(filler, path, 1.0)?;
    Ok(s)
}

/// Labeled tree. `Word` leaves are terminal tokens such as `John` in
/// `[N John]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tree {
    Node { label: String, children: Vec<Tree> },
    Word(String),
}

impl Tree {
    pub fn node(label: &str, children: Vec<Tree>) -> Self {
        Tree::Node {
            label: label.to_string(),
            children,
        }
    }

    pub fn leaf(label: &str) -> Self {
        Tree::node(label, Vec::new())
    }

    pub fn label(&self) -> &str {
        match self {
            Tree::Node { label, .. } => label,
            Tree::Word(w) => w,
        }
    }

    /// Number of edges on the longest root-to-node path.
    pub fn depth(&self, include_words: bool) -> usize {
        match self {
            Tree::Word(_) => 0,
            Tree::Node { children, .. } => children
                .iter()
                .filter(|c| include_words || matches!(c, Tree::Node { .. }))
                .map(|c| 1 + c.depth(include_words))
                .max()
                .unwrap_or(0),
        }
    }

    /// Labels that become fillers, in pre-order.
    pub fn filler_labels(&self, include_words: bool) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_labels(include_words, &mut out);
        out
    }

    fn collect_labels<'a>(&'a self, include_words: bool, out: &mut Vec<&'a str>) {
        match self {
            Tree::Word(w) => {
                if include_words {
                    out.push(w);
                }
            }
            Tree::Node { label, children } => {
                out.push(label);
                for c in children {
                    c.collect_labels(include_words, out);
                }
            }
        }
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tree::Word(w) => f.write_str(w),
            Tree::Node { label, children } => {
                write!(f, "[{label}")?;
                for c in children {
                    write!(f, " {c}")?;
                }
                f.write_str("]")
            }
        }
    }
}

/// Parses a bracketed tree literal such as `[S [N John] [V runs]]`.
pub fn parse_tree(text: &str) -> Result<Tree> {
    let tokens = tokenize_tree(text);
    let mut pos = 0;
    let tree = parse_node(&tokens, &mut pos)?;
    if pos != tokens.len() {
        return Err(tree_error(format!(
            "unexpected `{}` after tree",
            tokens[pos]
        )));
    }
    Ok(tree)
}

fn tree_error(message: String) -> Error {
    Error::syntax("<tree>", 1, message)
}

fn tokenize_tree(text: &str) -> Vec<&str> {
    let mut tokens = Vec::new();
    let mut start = None;
    for (k, ch) in text.char_indices() {
        let delimiter = ch == '[' || ch == ']';
        if delimiter || ch.is_whitespace() {
            if let Some(s) = start.take() {
                tokens.push(&text[s..k]);
            }
            if delimiter {
                tokens.push(&text[k..k + 1]);
            }
        } else if start.is_none() {
            start = Some(k);
        }
    }
    if let Some(s) = start {
        tokens.push(&text[s..]);
    }
    tokens
}

fn parse_node(tokens: &[&str], pos: &mut usize) -> Result<Tree> {
    if tokens.get(*pos) != Some(&"[") {
        return Err(tree_error("expected `[`".into()));
    }
    *pos += 1;
    let label = match tokens.get(*pos) {
        Some(&t) if t != "[" && t != "]" => t,
        _ => return Err(tree_error("expected a label after `[`".into())),
    };
    *pos += 1;
    let mut children = Vec::new();
    loop {
        match tokens.get(*pos) {
            None => return Err(tree_error("unclosed `[`".into())),
            Some(&"]") => {
                *pos += 1;
                return Ok(Tree::node(label, children));
            }
            Some(&"[") => children.push(parse_node(tokens, pos)?),
            Some(&word) => {
                children.push(Tree::Word(word.to_string()));
                *pos += 1;
            }
        }
    }
}

/// One binding per labeled node at its path. Word leaves occupy child
/// positions but only become fillers when `include_words` is set.
pub fn tree_to_structure(
    tree: &Tree,
    space: &Arc<StructureSpace>,
    include_words: bool,
) -> Result<StructureVector> {
    let mut s = StructureVector::empty(space);
    add_tree(tree, TreePath::root(), include_words, &mut s)?;
    Ok(s)
}

fn add_tree(
    tree: &Tree,
    path: TreePath,
    include_words: bool,
    out: &mut StructureVector,
) -> Result<()> {
    match tree {
        Tree::Word(w) => {
            if include_words {
                out.add_binding(w, &path, 1.0)?;
            }
        }
        Tree::Node { label, children } => {
            out.add_binding(label, &path, 1.0)?;
            for (k, c) in children.iter().enumerate() {
                if matches!(c, Tree::Word(_)) && !include_words {
                    continue;
                }
                let child = path.child(k);
                out.space().roles.check(&child)?;
                add_tree(c, child, include_words, out)?;
            }
        }
    }
    Ok(())
}
