//! Reference computations that share no code with the fast paths they are
//! used to check.

use crate::error::{Error, Result};
use crate::reducer::Reduction;
use crate::semantics::{for_each_index, strides, Tensor, WordTensor};

/// Largest full product (in entries) [`brute_force_compose`] will build.
pub const MATERIALIZE_LIMIT: usize = 1 << 22;

/// Materializes the full tensor product of all words, then sums over every
/// linked index pair. Exponential in the number of axes.
pub fn brute_force_compose(words: &[WordTensor], r: &Reduction) -> Result<Tensor> {
    let mut shape = Vec::new();
    let mut full = vec![1.0];
    for w in words {
        shape.extend_from_slice(w.tensor.shape());
        if full.len().saturating_mul(w.tensor.data().len()) > MATERIALIZE_LIMIT {
            return Err(Error::ShapeMismatch(
                "full product too large to materialize".into(),
            ));
        }
        full = full
            .iter()
            .flat_map(|&a| w.tensor.data().iter().map(move |&b| a * b))
            .collect();
    }
    if shape.len() != r.types().len() {
        return Err(Error::ShapeMismatch(
            "word axes do not match reduction".into(),
        ));
    }
    let st = strides(&shape);
    let res_pos = r.residual_positions();
    let res_shape: Vec<usize> = res_pos.iter().map(|&p| shape[p]).collect();
    let link_shape: Vec<usize> = r.links().iter().map(|l| shape[l.i]).collect();
    for l in r.links() {
        if shape[l.i] != shape[l.j] {
            return Err(Error::ShapeMismatch(format!(
                "axes {} and {} differ",
                l.i, l.j
            )));
        }
    }
    let mut out = Vec::new();
    for_each_index(&res_shape, |ridx| {
        let base: usize = ridx.iter().zip(res_pos).map(|(&i, &p)| i * st[p]).sum();
        let mut total = 0.0;
        for_each_index(&link_shape, |lidx| {
            let off: usize = lidx
                .iter()
                .zip(r.links())
                .map(|(&k, l)| k * (st[l.i] + st[l.j]))
                .sum();
            total += full[base + off];
        });
        out.push(total);
    });
    Tensor::new(res_shape, out)
}
