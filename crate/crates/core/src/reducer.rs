//! Maximum partial reduction of a type string.
//!
//! A reduction is a planar set of cancellation links: each link joins a
//! position `i` to a later position `j` such that `t[i] t[j]` cancels and
//! every position strictly between them is consumed by links nested inside.
//! Among all such sets we pick one of maximum size, breaking ties by the
//! lexicographically smallest list of links ordered by `(i, j)`.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pregroup::{cancels, BaseType, PregroupType, SimpleType};

/// A cancellation between positions `i < j` of the type string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Link {
    pub i: usize,
    pub j: usize,
}

impl Link {
    pub fn new(i: usize, j: usize) -> Self {
        Link { i, j }
    }

    pub fn span(&self) -> usize {
        self.j - self.i
    }
}

impl From<(usize, usize)> for Link {
    fn from((i, j): (usize, usize)) -> Self {
        Link { i, j }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    types: PregroupType,
    links: Vec<Link>,
    residual: PregroupType,
    residual_positions: Vec<usize>,
}

impl Reduction {
    /// Builds a reduction from an explicit link set, checking cancellation,
    /// nesting and planarity.
    pub fn from_links(types: PregroupType, links: impl IntoIterator<Item = Link>) -> Result<Self> {
        let mut links: Vec<Link> = links.into_iter().collect();
        links.sort_unstable();
        validate_links(types.simples(), &links)?;
        Ok(Self::assemble(types, links))
    }

    fn assemble(types: PregroupType, links: Vec<Link>) -> Self {
        let mut matched = vec![false; types.len()];
        for l in &links {
            matched[l.i] = true;
            matched[l.j] = true;
        }
        let residual_positions: Vec<usize> = (0..types.len()).filter(|&p| !matched[p]).collect();
        let residual = residual_positions
            .iter()
            .map(|&p| types.simples()[p].clone())
            .collect();
        Reduction {
            types,
            links,
            residual,
            residual_positions,
        }
    }

    pub fn types(&self) -> &PregroupType {
        &self.types
    }

    /// Links sorted by `(i, j)`.
    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn residual(&self) -> &PregroupType {
        &self.residual
    }

    /// Original positions of the residual simples.
    pub fn residual_positions(&self) -> &[usize] {
        &self.residual_positions
    }

    pub fn is_grammatical(&self, sentence_base: &BaseType) -> bool {
        is_grammatical(self, sentence_base)
    }
}

/// Inline notation, e.g. `n n^r s n^l n ≤ s`.
impl fmt::Display for Reduction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ≤ {}",
            self.types.display_or_unit(),
            self.residual.display_or_unit()
        )
    }
}

/// Checks that `links` (sorted) is a valid planar reduction of `types`.
pub fn validate_links(types: &[SimpleType], links: &[Link]) -> Result<()> {
    let n = types.len();
    let invalid = |l: &Link, reason: &str| Error::InvalidLink {
        i: l.i,
        j: l.j,
        reason: reason.to_string(),
    };
    let mut partner: Vec<Option<usize>> = vec![None; n];
    for l in links {
        if l.i >= l.j {
            return Err(invalid(l, "endpoints out of order"));
        }
        if l.j >= n {
            return Err(invalid(l, "position out of range"));
        }
        if partner[l.i].is_some() || partner[l.j].is_some() {
            return Err(invalid(l, "position used twice"));
        }
        if !cancels(&types[l.i], &types[l.j]) {
            return Err(invalid(l, "types do not cancel"));
        }
        partner[l.i] = Some(l.j);
        partner[l.j] = Some(l.i);
    }
    for l in links {
        for q in &partner[l.i + 1..l.j] {
            match *q {
                Some(q) if l.i < q && q < l.j => {}
                Some(_) => return Err(invalid(l, "crosses another link")),
                None => return Err(invalid(l, "interior not fully reduced")),
            }
        }
    }
    Ok(())
}

/// Interval DP tables over half-open spans `[i, j)`.
struct Tables<'a> {
    t: &'a [SimpleType],
    stride: usize,
    full: Vec<bool>,
    best: Vec<u32>,
}

impl<'a> Tables<'a> {
    fn build(t: &'a [SimpleType]) -> Self {
        let n = t.len();
        let stride = n + 1;
        let mut tables = Tables {
            t,
            stride,
            full: vec![false; stride * stride],
            best: vec![0; stride * stride],
        };
        for i in 0..=n {
            tables.full[i * stride + i] = true;
        }
        for len in 1..=n {
            for i in 0..=n - len {
                let j = i + len;
                let mut full = false;
                let mut best = tables.best(i + 1, j);
                for k in i + 1..j {
                    if !tables.opens(i, k) {
                        continue;
                    }
                    full |= tables.full(k + 1, j);
                    best = best.max((k - i + 1) as u32 / 2 + tables.best(k + 1, j));
                }
                tables.full[i * stride + j] = full;
                tables.best[i * stride + j] = best;
            }
        }
        tables
    }

    fn full(&self, i: usize, j: usize) -> bool {
        self.full[i * self.stride + j]
    }

    fn best(&self, i: usize, j: usize) -> u32 {
        self.best[i * self.stride + j]
    }

    /// `i` may link to `k` when the pair cancels and the interior reduces
    /// completely.
    fn opens(&self, i: usize, k: usize) -> bool {
        cancels(&self.t[i], &self.t[k]) && self.full(i + 1, k)
    }

    fn trace_best(&self, mut i: usize, j: usize, out: &mut Vec<Link>) {
        while i < j {
            let target = self.best(i, j);
            let pick = (i + 1..j).find(|&k| {
                self.opens(i, k) && (k - i + 1) as u32 / 2 + self.best(k + 1, j) == target
            });
            match pick {
                Some(k) => {
                    out.push(Link::new(i, k));
                    self.trace_full(i + 1, k, out);
                    i = k + 1;
                }
                None => i += 1,
            }
        }
    }

    fn trace_full(&self, mut i: usize, j: usize, out: &mut Vec<Link>) {
        while i < j {
            let k = (i + 1..j)
                .find(|&k| self.opens(i, k) && self.full(k + 1, j))
                .expect("span marked fully reducible");
            out.push(Link::new(i, k));
            self.trace_full(i + 1, k, out);
            i = k + 1;
        }
    }
}

/// Largest planar reduction of `types`, in O(n³) time and O(n²) space.
pub fn max_reduction(types: &PregroupType) -> Reduction {
    let tables = Tables::build(types.simples());
    let mut links = Vec::with_capacity(tables.best(0, types.len()) as usize);
    tables.trace_best(0, types.len(), &mut links);
    links.sort_unstable();
    Reduction::assemble(types.clone(), links)
}

pub const BRUTE_FORCE_LIMIT: usize = 16;

/// Exhaustive reference for [`max_reduction`]: enumerates every valid link
/// set and keeps the largest, lexicographically smallest one.
pub fn brute_force_reduction(types: &PregroupType) -> Result<Reduction> {
    let n = types.len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::InputTooLong {
            len: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let t = types.simples();
    let mut best: Option<Vec<Link>> = None;
    for mut set in enumerate(t, 0, n, false) {
        set.sort_unstable();
        let better = match &best {
            None => true,
            Some(b) => set.len() > b.len() || (set.len() == b.len() && set < *b),
        };
        if better {
            best = Some(set);
        }
    }
    Ok(Reduction::assemble(types.clone(), best.unwrap_or_default()))
}

/// All valid link sets over `[i, j)`; with `full` only those consuming every
/// position.
fn enumerate(t: &[SimpleType], i: usize, j: usize, full: bool) -> Vec<Vec<Link>> {
    if i == j {
        return vec![Vec::new()];
    }
    let mut sets = if full {
        Vec::new()
    } else {
        enumerate(t, i + 1, j, false)
    };
    for k in i + 1..j {
        if !cancels(&t[i], &t[k]) {
            continue;
        }
        let inner = enumerate(t, i + 1, k, true);
        if inner.is_empty() {
            continue;
        }
        let rest = enumerate(t, k + 1, j, full);
        for a in &inner {
            for b in &rest {
                let mut set = Vec::with_capacity(1 + a.len() + b.len());
                set.push(Link::new(i, k));
                set.extend_from_slice(a);
                set.extend_from_slice(b);
                sets.push(set);
            }
        }
    }
    sets
}

/// Grammatical exactly when the residual is the single plain sentence type.
pub fn is_grammatical(r: &Reduction, sentence_base: &BaseType) -> bool {
    matches!(r.residual().simples(), [only] if only.degree == 0 && &only.base == sentence_base)
}
