//! Randomized equivalence checks between fast paths and brute-force
//! references. Seeded by `PH_SEED`.

use std::io::Write;
use std::time::Instant;

use anyhow::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pregroup_harmony::harmonic::{instantiate, Anchoring};
use pregroup_harmony::oracle::brute_force_compose;
use pregroup_harmony::reducer::validate_links;
use pregroup_harmony::{
    brute_force_reduction, compose, compose_in_order, grammar_matrix, harmony, harmony_dense,
    max_reduction, BaseType, FillerSpace, PregroupType, RoleSpace, RuleKind, RuleTemplate,
    SimpleType, StructureSpace, StructureVector, Tensor, TreePath, WordTensor,
};

fn random_types(rng: &mut impl Rng, max_len: usize) -> PregroupType {
    let n = rng.random_range(0..=max_len);
    (0..n)
        .map(|_| {
            let base = if rng.random::<bool>() { "n" } else { "s" };
            SimpleType::new(BaseType::new(base).unwrap(), rng.random_range(-2..=2))
        })
        .collect()
}

fn check_reducer(rng: &mut impl Rng, cases: usize) -> Result<usize> {
    let mut failures = 0;
    for _ in 0..cases {
        let t = random_types(rng, 12);
        let dp = max_reduction(&t);
        let bf = brute_force_reduction(&t)?;
        if dp != bf || validate_links(t.simples(), dp.links()).is_err() {
            failures += 1;
        }
    }
    Ok(failures)
}

fn check_structures(rng: &mut impl Rng, cases: usize) -> Result<usize> {
    let fillers = ["S", "N", "V"];
    let space = StructureSpace::new(FillerSpace::new(fillers)?, RoleSpace::new(2, 4)?);
    let templates = [
        RuleTemplate::new(RuleKind::production("S", "N", "V"), 1.0),
        RuleTemplate::new(RuleKind::production("V", "V", "N"), 0.5),
        RuleTemplate::new(RuleKind::root("S"), 2.0),
    ];
    let (rules, _) = instantiate(&templates, Anchoring::AllAnchors, &space);
    let matrix = grammar_matrix(&rules, &space)?;
    let mut failures = 0;
    for _ in 0..cases {
        let mut s = StructureVector::empty(&space);
        for _ in 0..rng.random_range(0..=10) {
            let depth = rng.random_range(0..=4);
            let path = TreePath((0..depth).map(|_| rng.random_range(0..2)).collect());
            let f = fillers[rng.random_range(0..3)];
            if s.coefficient(f, &path)? == 0.0 {
                s.add_binding(f, &path, 1.0)?;
            }
        }
        let mut ok = true;
        for (f, p, c) in s.bindings() {
            ok &= s.unbind(p)[f] == c && s.unbind_dense(p)?[f] == c;
        }
        let n2 = s.norm_squared();
        ok &= (s.dense().norm_squared() - n2).abs() <= 1e-12 * n2.max(1.0);

        let coeff = |f: &str, p: &TreePath| s.coefficient(f, p).unwrap_or(0.0);
        let mut expected = 0.0;
        for r in &rules {
            let term = match &r.kind {
                RuleKind::Root { symbol } => coeff(symbol, &r.anchor),
                RuleKind::Production {
                    parent,
                    left,
                    right,
                } => {
                    let parent = coeff(parent, &r.anchor);
                    let l = coeff(left, &r.anchor.child(0));
                    let rr = coeff(right, &r.anchor.child(1));
                    parent * (0.5 * l + 0.5 * rr)
                }
            };
            expected += r.weight * term;
        }
        let sparse = harmony(&s, &matrix)?;
        let dense = harmony_dense(&s, &matrix)?;
        let tol = 1e-12 * expected.abs().max(1.0);
        ok &= (sparse - expected).abs() <= tol && (dense - expected).abs() <= tol;
        if !ok {
            failures += 1;
        }
    }
    Ok(failures)
}

fn random_sentence(rng: &mut impl Rng) -> Result<Vec<WordTensor>> {
    let types = random_types(rng, 12);
    let dn = rng.random_range(1..=3);
    let ds = rng.random_range(1..=3);
    let simples = types.simples();
    let mut words = Vec::new();
    let mut start = 0;
    while start < simples.len() {
        let len = rng.random_range(1..=4.min(simples.len() - start));
        let ty = PregroupType::new(simples[start..start + len].to_vec());
        let shape: Vec<usize> = ty
            .simples()
            .iter()
            .map(|t| if t.base.as_str() == "n" { dn } else { ds })
            .collect();
        let size = shape.iter().product();
        let data = (0..size).map(|_| rng.random_range(-1.0..1.0)).collect();
        words.push(WordTensor::new(
            format!("w{}", words.len()),
            ty,
            Tensor::new(shape, data)?,
        )?);
        start += len;
    }
    Ok(words)
}

fn close(a: &Tensor, b: &Tensor) -> bool {
    let scale = b
        .data()
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1e-300);
    a.shape() == b.shape()
        && a.data()
            .iter()
            .zip(b.data())
            .all(|(x, y)| (x - y).abs() <= 1e-10 * scale.max(y.abs()))
}

fn check_composition(rng: &mut impl Rng, cases: usize) -> Result<usize> {
    let mut failures = 0;
    for _ in 0..cases {
        let words = random_sentence(rng)?;
        let ty = words
            .iter()
            .fold(PregroupType::unit(), |a, w| a.concat(&w.ty));
        let r = max_reduction(&ty);
        let fast = compose(&words, &r)?;
        let reference = brute_force_compose(&words, &r)?;
        let reversed: Vec<_> = r.links().iter().rev().copied().collect();
        let other = compose_in_order(&words, &r, &reversed)?;
        if !close(&fast.tensor, &reference) || !close(&other.tensor, &fast.tensor) {
            failures += 1;
        }
    }
    Ok(failures)
}

type Check = fn(&mut ChaCha8Rng, usize) -> Result<usize>;

/// Runs every check, printing one line each. Returns whether all passed.
pub fn run(cases: usize, seed: u64, out: &mut impl Write) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    writeln!(out, "seed {seed}")?;
    let checks: [(&str, usize, Check); 3] = [
        ("reduction matches brute force", cases, |r, n| {
            check_reducer(r, n)
        }),
        (
            "structure unbinding and harmony",
            cases.div_ceil(5),
            |r, n| check_structures(r, n),
        ),
        (
            "composition matches full contraction",
            cases.div_ceil(10),
            |r, n| check_composition(r, n),
        ),
    ];
    let mut all = true;
    for (name, n, check) in checks {
        let started = Instant::now();
        let failures = check(&mut rng, n)?;
        all &= failures == 0;
        writeln!(
            out,
            "{} {name}: {}/{} in {:.2?}",
            if failures == 0 { "PASS" } else { "FAIL" },
            n - failures,
            n,
            started.elapsed()
        )?;
    }
    Ok(all)
}
