//! Compositional meaning: word tensors typed by pregroup types, contracted
//! along the links of a reduction.
//!
//! Each simple type contributes one tensor axis whose size is the dimension
//! of its base space (adjoints share the base dimension). A link `(i, j)`
//! contracts axis `i` against axis `j` with the plain inner product.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pregroup::{parse_type, BaseType, Lexicon, PregroupType};
use crate::reducer::{Link, Reduction};

/// Dimension of each base space.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypeSpaceMap {
    dims: BTreeMap<BaseType, usize>,
}

impl TypeSpaceMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, base: &str, dim: usize) -> Result<Self> {
        self.insert(BaseType::new(base)?, dim)?;
        Ok(self)
    }

    /// Records `dim` for `base`, failing if it conflicts with an earlier
    /// value.
    pub fn insert(&mut self, base: BaseType, dim: usize) -> Result<()> {
        if dim == 0 {
            return Err(Error::DimMismatch {
                base: base.to_string(),
                expected: 1,
                found: 0,
            });
        }
        match self.dims.get(&base) {
            Some(&expected) if expected != dim => Err(Error::DimMismatch {
                base: base.to_string(),
                expected,
                found: dim,
            }),
            _ => {
                self.dims.insert(base, dim);
                Ok(())
            }
        }
    }

    pub fn dim(&self, base: &BaseType) -> Option<usize> {
        self.dims.get(base).copied()
    }

    pub fn shape_of(&self, ty: &PregroupType) -> Result<Vec<usize>> {
        ty.simples()
            .iter()
            .map(|t| {
                self.dim(&t.base).ok_or_else(|| {
                    Error::ShapeMismatch(format!("no dimension for base `{}`", t.base))
                })
            })
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BaseType, usize)> {
        self.dims.iter().map(|(b, &d)| (b, d))
    }
}

/// Dense row-major array.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let expected = shape.iter().try_fold(1usize, |a, &d| a.checked_mul(d));
        if expected != Some(data.len()) {
            return Err(Error::ShapeMismatch(match expected {
                Some(n) => format!("shape {shape:?} needs {n} values, got {}", data.len()),
                None => format!("shape {shape:?} is too large"),
            }));
        }
        Ok(Tensor { shape, data })
    }

    pub fn scalar(v: f64) -> Self {
        Tensor {
            shape: Vec::new(),
            data: vec![v],
        }
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Tensor {
            shape,
            data: vec![0.0; n],
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn strides(&self) -> Vec<usize> {
        strides(&self.shape)
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        let offset: usize = index.iter().zip(self.strides()).map(|(i, s)| i * s).sum();
        self.data[offset]
    }

    pub fn scale(&self, c: f64) -> Tensor {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    /// Reorders axes so that output axis `k` is input axis `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> Tensor {
        debug_assert_eq!(perm.len(), self.rank());
        if perm.iter().enumerate().all(|(k, &p)| k == p) {
            return self.clone();
        }
        let in_strides = self.strides();
        let shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let moved: Vec<usize> = perm.iter().map(|&p| in_strides[p]).collect();
        let mut data = Vec::with_capacity(self.data.len());
        for_each_index(&shape, |idx| {
            let off: usize = idx.iter().zip(&moved).map(|(i, s)| i * s).sum();
            data.push(self.data[off]);
        });
        Tensor { shape, data }
    }

    pub fn outer(&self, other: &Tensor) -> Tensor {
        let mut shape = self.shape.clone();
        shape.extend_from_slice(&other.shape);
        let mut data = Vec::with_capacity(self.data.len() * other.data.len());
        for &a in &self.data {
            data.extend(other.data.iter().map(|&b| a * b));
        }
        Tensor { shape, data }
    }

    /// Sums the diagonal of axes `a` and `b`, removing both.
    pub fn trace(&self, a: usize, b: usize) -> Result<Tensor> {
        if a == b || self.shape[a] != self.shape[b] {
            return Err(Error::ShapeMismatch(format!(
                "cannot trace axes {a} and {b} of shape {:?}",
                self.shape
            )));
        }
        let st = self.strides();
        let keep: Vec<usize> = (0..self.rank()).filter(|&k| k != a && k != b).collect();
        let shape: Vec<usize> = keep.iter().map(|&k| self.shape[k]).collect();
        let keep_strides: Vec<usize> = keep.iter().map(|&k| st[k]).collect();
        let diag = st[a] + st[b];
        let mut data = Vec::with_capacity(shape.iter().product());
        for_each_index(&shape, |idx| {
            let base: usize = idx.iter().zip(&keep_strides).map(|(i, s)| i * s).sum();
            data.push((0..self.shape[a]).map(|k| self.data[base + k * diag]).sum());
        });
        Ok(Tensor { shape, data })
    }

    /// Contracts `pairs` of (own axis, other axis). Result axes are this
    /// tensor's free axes followed by the other's.
    pub fn contract(&self, other: &Tensor, pairs: &[(usize, usize)]) -> Result<Tensor> {
        for &(a, b) in pairs {
            if self.shape[a] != other.shape[b] {
                return Err(Error::ShapeMismatch(format!(
                    "axis {a} of {:?} against axis {b} of {:?}",
                    self.shape, other.shape
                )));
            }
        }
        let free_a: Vec<usize> = (0..self.rank())
            .filter(|k| !pairs.iter().any(|p| p.0 == *k))
            .collect();
        let free_b: Vec<usize> = (0..other.rank())
            .filter(|k| !pairs.iter().any(|p| p.1 == *k))
            .collect();
        let perm_a: Vec<usize> = free_a
            .iter()
            .copied()
            .chain(pairs.iter().map(|p| p.0))
            .collect();
        let perm_b: Vec<usize> = pairs
            .iter()
            .map(|p| p.1)
            .chain(free_b.iter().copied())
            .collect();
        let a = self.permute(&perm_a);
        let b = other.permute(&perm_b);
        let m: usize = free_a.iter().map(|&k| self.shape[k]).product();
        let n: usize = free_b.iter().map(|&k| other.shape[k]).product();
        let kk: usize = pairs.iter().map(|p| self.shape[p.0]).product();
        let mut data = vec![0.0; m * n];
        for row in 0..m {
            let out = &mut data[row * n..(row + 1) * n];
            for k in 0..kk {
                let x = a.data[row * kk + k];
                if x == 0.0 {
                    continue;
                }
                let brow = &b.data[k * n..(k + 1) * n];
                for (o, &y) in out.iter_mut().zip(brow) {
                    *o += x * y;
                }
            }
        }
        let shape = free_a
            .iter()
            .map(|&k| self.shape[k])
            .chain(free_b.iter().map(|&k| other.shape[k]))
            .collect();
        Ok(Tensor { shape, data })
    }
}

pub(crate) fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * shape[k + 1];
    }
    s
}

/// Visits every multi-index of `shape` in row-major order.
pub(crate) fn for_each_index(shape: &[usize], mut f: impl FnMut(&[usize])) {
    if shape.contains(&0) {
        return;
    }
    let mut idx = vec![0usize; shape.len()];
    loop {
        f(&idx);
        let mut k = shape.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < shape[k] {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// A tensor with one axis per simple type of its pregroup type.
#[derive(Debug, Clone, PartialEq)]
pub struct WordTensor {
    pub word: String,
    pub ty: PregroupType,
    pub tensor: Tensor,
}

impl WordTensor {
    pub fn new(word: impl Into<String>, ty: PregroupType, tensor: Tensor) -> Result<Self> {
        if tensor.rank() != ty.len() {
            return Err(Error::ShapeMismatch(format!(
                "type `{ty}` has {} axes but tensor has rank {}",
                ty.len(),
                tensor.rank()
            )));
        }
        Ok(WordTensor {
            word: word.into(),
            ty,
            tensor,
        })
    }

    /// Checks axis sizes against the base-space dimensions.
    pub fn check_dims(&self, dims: &TypeSpaceMap) -> Result<()> {
        for (t, &found) in self.ty.simples().iter().zip(self.tensor.shape()) {
            match dims.dim(&t.base) {
                Some(expected) if expected == found => {}
                Some(expected) => {
                    return Err(Error::DimMismatch {
                        base: t.base.to_string(),
                        expected,
                        found,
                    })
                }
                None => {
                    return Err(Error::ShapeMismatch(format!(
                        "no dimension for base `{}`",
                        t.base
                    )))
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for WordTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} : {} {:?}", self.word, self.ty, self.tensor.shape())
    }
}

/// Partially contracted piece of the sentence tensor; `axes[k]` is the
/// position in the type string that tensor axis `k` belongs to.
struct Piece {
    axes: Vec<usize>,
    tensor: Tensor,
}

fn check_inputs(words: &[WordTensor], r: &Reduction, dims: Option<&TypeSpaceMap>) -> Result<()> {
    let joined = words
        .iter()
        .fold(PregroupType::unit(), |acc, w| acc.concat(&w.ty));
    if &joined != r.types() {
        return Err(Error::ShapeMismatch(format!(
            "word types `{joined}` do not match reduction types `{}`",
            r.types()
        )));
    }
    if let Some(dims) = dims {
        for w in words {
            w.check_dims(dims)?;
        }
    }
    let t = r.types().simples();
    let mut axis_dims = Vec::with_capacity(t.len());
    for w in words {
        axis_dims.extend_from_slice(w.tensor.shape());
    }
    let mut seen_dims: BTreeMap<&BaseType, usize> = BTreeMap::new();
    for (simple, &d) in t.iter().zip(&axis_dims) {
        let e = *seen_dims.entry(&simple.base).or_insert(d);
        if e != d {
            return Err(Error::DimMismatch {
                base: simple.base.to_string(),
                expected: e,
                found: d,
            });
        }
    }
    Ok(())
}

/// Innermost links first: deeper nesting first, then left to right.
pub fn innermost_first(links: &[Link]) -> Vec<Link> {
    let depth = |l: &Link| links.iter().filter(|o| o.i < l.i && l.j < o.j).count();
    let mut order = links.to_vec();
    order.sort_by_key(|l| (std::cmp::Reverse(depth(l)), l.i));
    order
}

fn sentence_label(words: &[WordTensor]) -> String {
    words
        .iter()
        .map(|w| w.word.as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Meaning of the residual type of `r`, contracting innermost links first.
pub fn compose(words: &[WordTensor], r: &Reduction) -> Result<WordTensor> {
    compose_partial(words, r)
}

/// Composition under any reduction; the result has one axis per residual
/// simple, in original order, and is returned uninterpreted.
pub fn compose_partial(words: &[WordTensor], r: &Reduction) -> Result<WordTensor> {
    compose_in_order(words, r, &innermost_first(r.links()))
}

/// Like [`compose_partial`] with caller-chosen contraction order. `order`
/// must be a permutation of the reduction's links.
pub fn compose_in_order(words: &[WordTensor], r: &Reduction, order: &[Link]) -> Result<WordTensor> {
    check_inputs(words, r, None)?;
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != r.links() {
        return Err(Error::ShapeMismatch(
            "contraction order is not a permutation of the reduction's links".into(),
        ));
    }

    let mut pieces: Vec<Option<Piece>> = Vec::with_capacity(words.len());
    let mut owner = vec![0usize; r.types().len()];
    let mut offset = 0;
    for (k, w) in words.iter().enumerate() {
        let axes: Vec<usize> = (offset..offset + w.ty.len()).collect();
        for &a in &axes {
            owner[a] = k;
        }
        offset += w.ty.len();
        pieces.push(Some(Piece {
            axes,
            tensor: w.tensor.clone(),
        }));
    }

    let mut done = vec![false; order.len()];
    for step in 0..order.len() {
        if done[step] {
            continue;
        }
        let link = order[step];
        let (pa, pb) = (owner[link.i], owner[link.j]);
        if pa == pb {
            let piece = pieces[pa].as_mut().expect("live piece");
            let a = piece.axes.iter().position(|&x| x == link.i).expect("axis");
            let b = piece.axes.iter().position(|&x| x == link.j).expect("axis");
            piece.tensor = piece.tensor.trace(a, b)?;
            piece.axes.retain(|&x| x != link.i && x != link.j);
            done[step] = true;
            continue;
        }
        // contract every pending link between these two pieces at once
        let left = pieces[pa].take().expect("live piece");
        let right = pieces[pb].take().expect("live piece");
        let mut pairs = Vec::new();
        let mut consumed = Vec::new();
        for (later, l) in order.iter().enumerate().skip(step) {
            if done[later] {
                continue;
            }
            let (oi, oj) = (owner[l.i], owner[l.j]);
            let (ax_l, ax_r) = if oi == pa && oj == pb {
                (l.i, l.j)
            } else if oi == pb && oj == pa {
                (l.j, l.i)
            } else {
                continue;
            };
            let a = left.axes.iter().position(|&x| x == ax_l).expect("axis");
            let b = right.axes.iter().position(|&x| x == ax_r).expect("axis");
            pairs.push((a, b));
            consumed.extend([l.i, l.j]);
            done[later] = true;
        }
        let tensor = left.tensor.contract(&right.tensor, &pairs)?;
        let axes: Vec<usize> = left
            .axes
            .iter()
            .chain(&right.axes)
            .copied()
            .filter(|x| !consumed.contains(x))
            .collect();
        for &a in left.axes.iter().chain(&right.axes) {
            owner[a] = pa;
        }
        pieces[pa] = Some(Piece { axes, tensor });
    }

    let mut result = Piece {
        axes: Vec::new(),
        tensor: Tensor::scalar(1.0),
    };
    for piece in pieces.into_iter().flatten() {
        result.tensor = result.tensor.outer(&piece.tensor);
        result.axes.extend(piece.axes);
    }
    let mut perm: Vec<usize> = (0..result.axes.len()).collect();
    perm.sort_by_key(|&k| result.axes[k]);
    let tensor = result.tensor.permute(&perm);
    WordTensor::new(sentence_label(words), r.residual().clone(), tensor)
}

/// Word tensors loaded from a tensor file, with the base dimensions they
/// imply.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TensorLexicon {
    dims: TypeSpaceMap,
    tensors: Vec<WordTensor>,
}

impl TensorLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, w: WordTensor) -> Result<()> {
        for (t, &d) in w.ty.simples().iter().zip(w.tensor.shape()) {
            self.dims.insert(t.base.clone(), d)?;
        }
        self.tensors.push(w);
        Ok(())
    }

    pub fn dims(&self) -> &TypeSpaceMap {
        &self.dims
    }

    pub fn tensors(&self) -> &[WordTensor] {
        &self.tensors
    }

    pub fn get(&self, word: &str, ty: &PregroupType) -> Option<&WordTensor> {
        self.tensors.iter().find(|w| w.word == word && &w.ty == ty)
    }

    /// Lexicon with one entry per tensor, in file order.
    pub fn to_lexicon(&self) -> Lexicon {
        let mut lex = Lexicon::new();
        for w in &self.tensors {
            lex.add(w.word.clone(), w.ty.clone());
        }
        lex
    }

    /// Parses the tensor file format: a header
    /// `word <name> : <type> dims <d1 d2 …>` followed by row-major values.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_named(text, "<tensors>")
    }

    pub fn parse_named(text: &str, source_name: &str) -> Result<Self> {
        struct Pending {
            line: usize,
            word: String,
            ty: PregroupType,
            shape: Vec<usize>,
            values: Vec<f64>,
        }
        let mut out = TensorLexicon::new();
        let mut current: Option<Pending> = None;
        let finish = |p: Pending, out: &mut TensorLexicon| -> Result<()> {
            let err = |m: String| Error::syntax(source_name, p.line, m);
            let tensor = Tensor::new(p.shape, p.values).map_err(|e| err(e.to_string()))?;
            let w = WordTensor::new(p.word, p.ty, tensor).map_err(|e| err(e.to_string()))?;
            out.add(w).map_err(|e| err(e.to_string()))
        };
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or_default();
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            let err = |m: &str| Error::syntax(source_name, line_no, m);
            if fields[0] == "word" {
                if let Some(p) = current.take() {
                    finish(p, &mut out)?;
                }
                let (Some(&name), Some(&":")) = (fields.get(1), fields.get(2)) else {
                    return Err(err("expected `word <name> : <type> dims <d…>`"));
                };
                let dims_at = fields
                    .iter()
                    .position(|&f| f == "dims")
                    .filter(|&k| k >= 3)
                    .ok_or_else(|| err("missing `dims`"))?;
                let ty =
                    parse_type(&fields[3..dims_at].join(" ")).map_err(|e| err(&e.to_string()))?;
                let shape = fields[dims_at + 1..]
                    .iter()
                    .map(|d| d.parse::<usize>().ok().filter(|&d| d > 0))
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| err("dimensions must be positive integers"))?;
                if shape.len() != ty.len() {
                    return Err(err(&format!(
                        "type `{ty}` has {} axes but {} dims were given",
                        ty.len(),
                        shape.len()
                    )));
                }
                current = Some(Pending {
                    line: line_no,
                    word: name.to_string(),
                    ty,
                    shape,
                    values: Vec::new(),
                });
            } else {
                let Some(p) = current.as_mut() else {
                    return Err(err("values before any `word` header"));
                };
                for f in fields {
                    let v = f
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| err(&format!("invalid value `{f}`")))?;
                    p.values.push(v);
                }
            }
        }
        if let Some(p) = current.take() {
            finish(p, &mut out)?;
        }
        Ok(out)
    }
}
