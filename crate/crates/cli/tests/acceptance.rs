//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p pregroup-harmony-cli --test acceptance`.

use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pregroup_harmony::harmonic::{instantiate, Anchoring};
use pregroup_harmony::oracle::brute_force_compose;
use pregroup_harmony::reducer::validate_links;
use pregroup_harmony::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .display()
        .to_string()
}

fn lex(entries: &[(&str, &str)]) -> Lexicon {
    entries
        .iter()
        .fold(Lexicon::new(), |l, (w, t)| l.with(w, t).unwrap())
}

fn link_pairs(r: &Reduction) -> Vec<(usize, usize)> {
    r.links().iter().map(|l| (l.i, l.j)).collect()
}

/// Applies links one at a time as adjacent cancellations, returning each
/// intermediate string.
fn cancellation_chain(t: &PregroupType, order: &[Link]) -> Result<Vec<String>, String> {
    let mut live: Vec<usize> = (0..t.len()).collect();
    let mut chain = Vec::new();
    for l in order {
        let a = live
            .iter()
            .position(|&p| p == l.i)
            .ok_or("missing left end")?;
        ensure(
            live.get(a + 1) == Some(&l.j),
            format!("({},{}) not adjacent", l.i, l.j),
        )?;
        ensure(
            cancels(&t.simples()[l.i], &t.simples()[l.j]),
            "pair does not cancel",
        )?;
        live.drain(a..a + 2);
        let s: Vec<String> = live.iter().map(|&p| t.simples()[p].to_string()).collect();
        chain.push(s.join(" "));
    }
    Ok(chain)
}

fn criterion_1() -> Outcome {
    let lexicon = lex(&[("Priscilla", "n"), ("eats", "n^r s n^l"), ("bananas", "n")]);
    let started = Instant::now();
    let best = grade_best_assignment(
        &["Priscilla", "eats", "bananas"],
        &lexicon,
        &GradingWeights::default(),
        DEFAULT_AMBIGUITY_CAP,
    )
    .map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    let r = &best.reduction;
    ensure(
        r.types().to_string() == "n n^r s n^l n",
        "wrong type string",
    )?;
    ensure(
        link_pairs(r) == [(0, 1), (3, 4)],
        format!("links {:?}", link_pairs(r)),
    )?;
    ensure(r.residual().to_string() == "s", "residual is not s")?;
    let chain = cancellation_chain(r.types(), r.links())?;
    ensure(chain == ["s n^l n", "s"], format!("chain {chain:?}"))?;
    ensure(
        best.score.harmony == 3.0,
        format!("harmony {}", best.score.harmony),
    )?;
    ensure(best.score.sentence_reached, "not grammatical")?;
    ensure(
        elapsed < Duration::from_millis(1),
        format!("took {elapsed:?}"),
    )?;
    Ok(format!("links=2 residual=s harmony=3 in {elapsed:?}"))
}

fn criterion_2() -> Outcome {
    let lexicon = lex(&[
        ("John", "n"),
        ("is", "n^r s n^l"),
        ("who", "n^r n n^ll s^l"),
        ("Mary", "n"),
        ("loves", "n^r s n^l"),
    ]);
    let started = Instant::now();
    let best = grade_best_assignment(
        &["John", "is", "who", "Mary", "loves"],
        &lexicon,
        &GradingWeights::default(),
        DEFAULT_AMBIGUITY_CAP,
    )
    .map_err(|e| e.to_string())?;
    let oracle = brute_force_reduction(best.reduction.types()).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    let r = &best.reduction;
    ensure(r.link_count() == 4, format!("{} links", r.link_count()))?;
    ensure(
        oracle.link_count() == r.link_count(),
        "oracle disagrees on link count",
    )?;
    ensure(
        link_pairs(r) == [(0, 1), (6, 11), (7, 10), (8, 9)],
        format!("links {:?}", link_pairs(r)),
    )?;
    ensure(
        r.residual().to_string() == "s n^l n^r n",
        format!("residual {}", r.residual()),
    )?;
    ensure(!best.score.sentence_reached, "reported grammatical")?;
    ensure(
        best.score.harmony == 4.0,
        format!("harmony {}", best.score.harmony),
    )?;
    ensure(
        elapsed < Duration::from_millis(10),
        format!("took {elapsed:?}"),
    )?;
    Ok(format!(
        "links=4 residual=`s n^l n^r n` harmony=4 in {elapsed:?}"
    ))
}

fn criterion_3() -> Outcome {
    let space = StructureSpace::new(
        FillerSpace::new(["S", "N", "V"]).unwrap(),
        RoleSpace::default(),
    );
    let g = grammar_matrix(
        &[
            HarmonicRule::production("S", "N", "V", TreePath::root(), 1.0),
            HarmonicRule::root("S", 1.0),
        ],
        &space,
    )
    .map_err(|e| e.to_string())?;
    let mut report = Vec::new();
    for (tree, expected) in [
        ("[S [N John] [V runs]]", 2.0),
        ("[S [V runs] [N John]]", 1.0),
    ] {
        let s = tree_to_structure(&parse_tree(tree).unwrap(), &space, false)
            .map_err(|e| e.to_string())?;
        let sparse = harmony(&s, &g).map_err(|e| e.to_string())?;
        let dense = harmony_dense(&s, &g).map_err(|e| e.to_string())?;
        ensure(sparse == expected, format!("{tree}: sparse H = {sparse}"))?;
        ensure(
            (sparse - dense).abs() <= 1e-12,
            format!("{tree}: dense H = {dense}"),
        )?;
        report.push(format!("H{tree}={sparse}"));
    }
    for (tree, expected) in [
        ("[S [N John] [V runs]]", 2.0),
        ("[S [V runs] [N John]]", 1.0),
    ] {
        let out = Command::new(env!("CARGO_BIN_EXE_ph"))
            .args(["harmony", "--grammar", &data("intransitive.hg"), tree])
            .output()
            .map_err(|e| e.to_string())?;
        let v: serde_json::Value =
            serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
        ensure(
            v["harmony"] == expected,
            format!("cli {tree}: {}", v["harmony"]),
        )?;
    }
    Ok(report.join(" "))
}

fn random_types(rng: &mut impl Rng, max_len: usize) -> PregroupType {
    (0..rng.random_range(0..=max_len))
        .map(|_| {
            let base = BaseType::new(if rng.random() { "n" } else { "s" }).unwrap();
            SimpleType::new(base, rng.random_range(-2..=2))
        })
        .collect()
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cases = 2000;
    let started = Instant::now();
    for k in 0..cases {
        let t = random_types(&mut rng, 12);
        let dp = max_reduction(&t);
        let bf = brute_force_reduction(&t).map_err(|e| e.to_string())?;
        ensure(
            dp.link_count() == bf.link_count(),
            format!(
                "case {k} `{t}`: dp {} vs oracle {}",
                dp.link_count(),
                bf.link_count()
            ),
        )?;
        validate_links(t.simples(), dp.links()).map_err(|e| format!("case {k} `{t}`: {e}"))?;
        let mut matched = vec![false; t.len()];
        for l in dp.links() {
            matched[l.i] = true;
            matched[l.j] = true;
        }
        let rest: PregroupType = (0..t.len())
            .filter(|&p| !matched[p])
            .map(|p| t.simples()[p].clone())
            .collect();
        ensure(
            &rest == dp.residual(),
            format!("case {k}: residual mismatch"),
        )?;
        for a in dp.links() {
            for b in dp.links() {
                ensure(
                    !(a.i < b.i && b.i < a.j && a.j < b.j),
                    format!("case {k}: crossing"),
                )?;
            }
        }
    }
    let elapsed = started.elapsed();
    ensure(
        elapsed < Duration::from_secs(30),
        format!("took {elapsed:?}"),
    )?;
    Ok(format!("{cases}/{cases} strings agree in {elapsed:?}"))
}

fn criterion_5() -> Outcome {
    let fillers = ["S", "N", "V"];
    let space = StructureSpace::new(
        FillerSpace::new(fillers).unwrap(),
        RoleSpace::new(2, 4).unwrap(),
    );
    let templates = [
        RuleTemplate::new(RuleKind::production("S", "N", "V"), 1.0),
        RuleTemplate::new(RuleKind::production("V", "V", "N"), 0.75),
        RuleTemplate::new(RuleKind::production("N", "N", "N"), -0.5),
        RuleTemplate::new(RuleKind::root("S"), 1.0),
    ];
    let (rules, _) = instantiate(&templates, Anchoring::AllAnchors, &space);
    let g = grammar_matrix(&rules, &space).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cases = 500;
    for k in 0..cases {
        let mut keys: Vec<(usize, TreePath)> = Vec::new();
        for _ in 0..rng.random_range(0..=10) {
            let depth = rng.random_range(0..=4);
            let key = (
                rng.random_range(0..3),
                TreePath((0..depth).map(|_| rng.random_range(0..2)).collect()),
            );
            if !keys.contains(&key) {
                keys.push(key);
            }
        }

        // arbitrary coefficients: unbinding and norm
        let mut weighted = StructureVector::empty(&space);
        let coeffs: Vec<f64> = keys.iter().map(|_| rng.random_range(0.1..5.0)).collect();
        for ((f, p), c) in keys.iter().zip(&coeffs) {
            weighted
                .add_binding(fillers[*f], p, *c)
                .map_err(|e| e.to_string())?;
        }
        for ((f, p), c) in keys.iter().zip(&coeffs) {
            ensure(
                weighted.unbind(p)[*f] == *c,
                format!("case {k}: unbind at {p}"),
            )?;
            let dense = weighted.unbind_dense(p).map_err(|e| e.to_string())?;
            ensure(dense[*f] == *c, format!("case {k}: dense unbind at {p}"))?;
        }
        let n2: f64 = coeffs.iter().map(|c| c * c).sum();
        let dn2 = weighted.dense().norm_squared();
        ensure(
            (dn2 - n2).abs() <= 1e-12 * n2.max(1.0),
            format!("case {k}: norm {dn2} vs {n2}"),
        )?;

        // 0/1 coefficients: harmony counts rule matches
        let mut s = StructureVector::empty(&space);
        for (f, p) in &keys {
            s.add_binding(fillers[*f], p, 1.0)
                .map_err(|e| e.to_string())?;
        }
        let has = |f: &str, p: &TreePath| {
            let fi = fillers.iter().position(|x| *x == f).unwrap();
            keys.contains(&(fi, p.clone()))
        };
        let mut expected = 0.0;
        for r in &rules {
            let count = match &r.kind {
                RuleKind::Root { symbol } => f64::from(u8::from(has(symbol, &r.anchor))),
                RuleKind::Production {
                    parent,
                    left,
                    right,
                } => {
                    if !has(parent, &r.anchor) {
                        0.0
                    } else {
                        match (
                            has(left, &r.anchor.child(0)),
                            has(right, &r.anchor.child(1)),
                        ) {
                            (true, true) => 1.0,
                            (true, false) | (false, true) => 0.5,
                            (false, false) => 0.0,
                        }
                    }
                }
            };
            expected += r.weight * count;
        }
        let sparse = harmony(&s, &g).map_err(|e| e.to_string())?;
        let dense = harmony_dense(&s, &g).map_err(|e| e.to_string())?;
        let tol = 1e-12 * expected.abs().max(1.0);
        ensure(
            (sparse - expected).abs() <= tol,
            format!("case {k}: H {sparse} vs {expected}"),
        )?;
        ensure(
            (dense - expected).abs() <= tol,
            format!("case {k}: dense H {dense} vs {expected}"),
        )?;
    }
    Ok(format!("{cases}/{cases} structures exact"))
}

fn relative_error(a: &Tensor, b: &Tensor) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    let scale = b.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = a
        .data()
        .iter()
        .zip(b.data())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let cases = 200;
    let mut worst: f64 = 0.0;
    let mut total_links = 0;
    for k in 0..cases {
        let types = random_types(&mut rng, 12);
        let dn = rng.random_range(1..=3);
        let ds = rng.random_range(1..=3);
        let mut words = Vec::new();
        let mut start = 0;
        while start < types.len() {
            let len = rng.random_range(1..=(types.len() - start).min(4));
            let ty = PregroupType::new(types.simples()[start..start + len].to_vec());
            let shape: Vec<usize> = ty
                .simples()
                .iter()
                .map(|t| if t.base.as_str() == "n" { dn } else { ds })
                .collect();
            let data = (0..shape.iter().product())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            words.push(
                WordTensor::new(
                    format!("w{k}_{start}"),
                    ty,
                    Tensor::new(shape, data).unwrap(),
                )
                .unwrap(),
            );
            start += len;
        }
        let r = max_reduction(&types);
        total_links += r.link_count();
        let fast = compose(&words, &r).map_err(|e| e.to_string())?;
        let reference = brute_force_compose(&words, &r).map_err(|e| e.to_string())?;
        let err = relative_error(&fast.tensor, &reference);
        worst = worst.max(err);
        ensure(err <= 1e-10, format!("case {k}: relative error {err:e}"))?;
        for _ in 0..3 {
            let mut order = r.links().to_vec();
            order.shuffle(&mut rng);
            let other = compose_in_order(&words, &r, &order).map_err(|e| e.to_string())?;
            let err = relative_error(&other.tensor, &fast.tensor);
            worst = worst.max(err);
            ensure(
                err <= 1e-10,
                format!("case {k}: order changed result by {err:e}"),
            )?;
        }
    }
    Ok(format!(
        "{cases}/{cases} sentences ({total_links} links), worst relative error {worst:.1e}"
    ))
}

fn criterion_7() -> Outcome {
    let words = [
        "John",
        "is",
        "who",
        "Mary",
        "loves",
        "Priscilla",
        "eats",
        "bananas",
        "red",
        "runs",
        "quickly",
        "bank",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let batch: Vec<String> = (0..100)
        .map(|_| {
            (0..rng.random_range(1..=7))
                .map(|_| *words.choose(&mut rng).unwrap())
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect();
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance_batch.txt");
    std::fs::write(&path, batch.join("\n") + "\n").map_err(|e| e.to_string())?;
    let run = |jobs: &str| {
        Command::new(env!("CARGO_BIN_EXE_ph"))
            .args([
                "score",
                "--lexicon",
                &data("lexicon.tsv"),
                "--jobs",
                jobs,
                "--input",
                path.to_str().unwrap(),
            ])
            .output()
            .map_err(|e| e.to_string())
    };
    let first = run("1")?;
    let second = run("1")?;
    let parallel = run("4")?;
    ensure(
        first.status.success(),
        String::from_utf8_lossy(&first.stderr).to_string(),
    )?;
    let lines = first.stdout.iter().filter(|&&b| b == b'\n').count();
    ensure(lines == 100, format!("{lines} records"))?;
    ensure(first.stdout == second.stdout, "repeated runs differ")?;
    ensure(first.stdout == parallel.stdout, "--jobs 4 output differs")?;
    Ok(format!(
        "100 records, {} bytes, identical across runs and --jobs 4",
        first.stdout.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("transitive sentence reduces to s, harmony 3", criterion_1),
        (
            "relative clause: 4 links, residual s n^l n^r n, harmony 4",
            criterion_2,
        ),
        ("structure harmony H=2 and H=1, sparse = dense", criterion_3),
        ("max_reduction agrees with brute force", criterion_4),
        ("unbinding, norms and harmony counts exact", criterion_5),
        ("composition agrees with full contraction", criterion_6),
        ("score output is deterministic", criterion_7),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS criterion {}: {name} ({detail})", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {why}", k + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
