use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use pregroup_harmony::dot::reduction_to_dot_with_words;
use pregroup_harmony::harmonic::{instantiate, parse_grammar_named};
use pregroup_harmony::report::{round_significant, SentenceRecord, SIGNIFICANT_DIGITS};
use pregroup_harmony::{
    compose, grade_best_assignment, grammar_matrix, harmony, parse_tree, tree_to_structure,
    Anchoring, BaseType, BestAssignment, Error, FillerSpace, GradingWeights, Lexicon, RoleSpace,
    StructureSpace, TensorLexicon, DEFAULT_AMBIGUITY_CAP,
};

mod selftest;

#[derive(Parser, Debug)]
#[command(
    name = "ph",
    version,
    about = "Pregroup reduction, graded grammaticality and harmony"
)]
struct Cli {
    #[command(flatten)]
    config: Config,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Config {
    /// Lexicon file (`word<TAB>type` lines)
    #[arg(long, global = true)]
    lexicon: Option<PathBuf>,

    /// Harmonic grammar file (`rule`/`root` lines)
    #[arg(long, global = true)]
    grammar: Option<PathBuf>,

    /// Word tensor file
    #[arg(long, global = true)]
    tensors: Option<PathBuf>,

    /// Points per cancellation
    #[arg(long = "w-eps", global = true, default_value_t = 1.0)]
    w_eps: f64,

    /// Points for reaching the sentence type
    #[arg(long = "w-s", global = true, default_value_t = 1.0)]
    w_s: f64,

    /// Sentence base type, overriding the lexicon's
    #[arg(long, global = true)]
    base: Option<String>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Maximum number of type assignments tried per sentence
    #[arg(long, global = true, default_value_t = DEFAULT_AMBIGUITY_CAP)]
    cap: usize,

    /// Worker threads for batch commands
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Text,
    Dot,
}

#[derive(Args, Debug)]
struct Sentences {
    /// Sentences (words separated by whitespace)
    sentences: Vec<String>,

    /// Read one sentence per line from a file (`-` for stdin)
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Anchors {
    Root,
    All,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Maximal reduction of each sentence
    Reduce(Sentences),
    /// Graded grammaticality of each sentence
    Score(Sentences),
    /// Harmony of a bracketed tree under a grammar file
    Harmony {
        tree: String,
        /// Instantiate production rules at the root only or at every position
        #[arg(long, value_enum, default_value_t = Anchors::Root)]
        anchors: Anchors,
        /// Bind leaf words as fillers too
        #[arg(long)]
        words_as_fillers: bool,
        #[arg(long, default_value_t = 8)]
        depth_max: usize,
        #[arg(long, default_value_t = 2)]
        arity: usize,
    },
    /// Compose word tensors along the sentence's reduction
    Compose { sentence: String },
    /// Cross-check fast paths against brute-force oracles
    Selftest {
        #[arg(long, default_value_t = 1000)]
        cases: usize,
        #[arg(long, env = "PH_SEED", default_value_t = 0x5eed)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(cli, &mut out) {
        Ok(code) => code,
        Err(err) => {
            let _ = out.flush();
            eprintln!("error: {err:#}");
            let data = err
                .chain()
                .filter_map(|e| e.downcast_ref::<Error>())
                .any(Error::is_data_error);
            ExitCode::from(if data { 2 } else { 1 })
        }
    }
}

fn run(cli: Cli, out: &mut impl Write) -> Result<ExitCode> {
    let cfg = &cli.config;
    if cfg.cap == 0 {
        bail!("--cap must be at least 1");
    }
    if cfg.jobs == 0 {
        bail!("--jobs must be at least 1");
    }
    match &cli.command {
        Command::Reduce(s) => {
            let lex = load_lexicon(cfg)?;
            let lines = batch(cfg, &read_sentences(s)?, |words| {
                let best = best_assignment(cfg, &lex, words)?;
                render_reduction(cfg.format, words, &best)
            })?;
            write_all(out, &lines)?;
        }
        Command::Score(s) => {
            let lex = load_lexicon(cfg)?;
            let lines = batch(cfg, &read_sentences(s)?, |words| {
                let best = best_assignment(cfg, &lex, words)?;
                render_score(cfg.format, words, &best)
            })?;
            write_all(out, &lines)?;
        }
        Command::Harmony {
            tree,
            anchors,
            words_as_fillers,
            depth_max,
            arity,
        } => {
            let text = cmd_harmony(cfg, tree, *anchors, *words_as_fillers, *depth_max, *arity)?;
            out.write_all(text.as_bytes())?;
        }
        Command::Compose { sentence } => {
            let text = cmd_compose(cfg, sentence)?;
            out.write_all(text.as_bytes())?;
        }
        Command::Selftest { cases, seed } => {
            let ok = selftest::run(*cases, *seed, out)?;
            return Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            });
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_lexicon(cfg: &Config) -> Result<Lexicon> {
    let path = cfg.lexicon.as_ref().context("--lexicon is required")?;
    let mut lex = Lexicon::parse_named(&read_file(path)?, &path.display().to_string())?;
    if let Some(base) = &cfg.base {
        lex.set_sentence_base(BaseType::new(base.as_str())?);
    }
    Ok(lex)
}

fn weights(cfg: &Config) -> Result<GradingWeights> {
    Ok(GradingWeights::new(cfg.w_eps, cfg.w_s)?)
}

fn read_sentences(s: &Sentences) -> Result<Vec<String>> {
    let mut sentences = s.sentences.clone();
    if let Some(path) = &s.input {
        let text = if path.as_os_str() == "-" {
            let mut buf = String::new();
            io::stdin().read_to_string(&mut buf)?;
            buf
        } else {
            read_file(path)?
        };
        sentences.extend(text.lines().map(str::to_string));
    }
    Ok(sentences)
}

fn split_words(sentence: &str) -> Vec<&str> {
    sentence.split_whitespace().collect()
}

fn best_assignment(cfg: &Config, lex: &Lexicon, words: &[&str]) -> Result<BestAssignment> {
    let best = grade_best_assignment(words, lex, &weights(cfg)?, cfg.cap)?;
    if best.truncated {
        eprintln!(
            "warning: ambiguity cap {} reached for `{}`; only the first {} assignments were graded",
            cfg.cap,
            words.join(" "),
            best.considered
        );
    }
    Ok(best)
}

/// Runs `f` on every sentence, in parallel when `--jobs` > 1, keeping input
/// order. Stops at the first failing sentence.
fn batch<F>(cfg: &Config, sentences: &[String], f: F) -> Result<Vec<String>>
where
    F: Fn(&[&str]) -> Result<String> + Sync,
{
    let each = |s: &String| f(&split_words(s));
    let results: Vec<Result<String>> = if cfg.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .context("starting worker pool")?;
        pool.install(|| sentences.par_iter().map(each).collect())
    } else {
        sentences.iter().map(each).collect()
    };
    results.into_iter().collect()
}

fn write_all(out: &mut impl Write, chunks: &[String]) -> Result<()> {
    for c in chunks {
        out.write_all(c.as_bytes())?;
    }
    Ok(())
}

fn json_line<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string(value)?;
    s.push('\n');
    Ok(s)
}

fn round(x: f64) -> f64 {
    round_significant(x, SIGNIFICANT_DIGITS)
}

#[derive(Serialize)]
struct ReductionRecord {
    words: Vec<String>,
    chosen_types: Vec<String>,
    types: String,
    links: Vec<[usize; 2]>,
    residual: String,
    grammatical: bool,
}

fn render_reduction(format: Format, words: &[&str], best: &BestAssignment) -> Result<String> {
    let r = &best.reduction;
    match format {
        Format::Json => json_line(&ReductionRecord {
            words: words.iter().map(|w| w.to_string()).collect(),
            chosen_types: best
                .candidate
                .word_types
                .iter()
                .map(ToString::to_string)
                .collect(),
            types: r.types().to_string(),
            links: r.links().iter().map(|l| [l.i, l.j]).collect(),
            residual: r.residual().to_string(),
            grammatical: best.score.sentence_reached,
        }),
        Format::Text => {
            let links: Vec<String> = r
                .links()
                .iter()
                .map(|l| format!("({},{})", l.i, l.j))
                .collect();
            Ok(format!(
                "{}\n  {}\n  links: {}\n",
                words.join(" "),
                r,
                if links.is_empty() {
                    "none".to_string()
                } else {
                    links.join(" ")
                }
            ))
        }
        Format::Dot => Ok(reduction_to_dot_with_words(
            r,
            words,
            &best.candidate.offsets,
        )),
    }
}

fn render_score(format: Format, words: &[&str], best: &BestAssignment) -> Result<String> {
    let record = SentenceRecord::new(words, best);
    match format {
        Format::Json => json_line(&record),
        Format::Text => Ok(format!(
            "{}\t{}\t{}\t{}\n",
            record.harmony,
            if record.grammatical {
                "grammatical"
            } else {
                "ungrammatical"
            },
            record.ratio,
            words.join(" ")
        )),
        Format::Dot => bail!("--format dot is only supported by `reduce`"),
    }
}

#[derive(Serialize)]
struct RuleContribution {
    rule: String,
    weight: f64,
    contribution: f64,
}

#[derive(Serialize)]
struct HarmonyRecord {
    tree: String,
    harmony: f64,
    rules: Vec<RuleContribution>,
}

fn cmd_harmony(
    cfg: &Config,
    tree_text: &str,
    anchors: Anchors,
    words_as_fillers: bool,
    depth_max: usize,
    arity: usize,
) -> Result<String> {
    let path = cfg.grammar.as_ref().context("--grammar is required")?;
    let templates = parse_grammar_named(&read_file(path)?, &path.display().to_string())?;
    let tree = parse_tree(tree_text)?;

    let symbols = templates
        .iter()
        .flat_map(|t| t.kind.symbols())
        .chain(tree.filler_labels(words_as_fillers));
    let space = StructureSpace::new(
        FillerSpace::from_symbols_dedup(symbols),
        RoleSpace::new(arity, depth_max)?,
    );
    let structure = tree_to_structure(&tree, &space, words_as_fillers)?;
    let anchoring = match anchors {
        Anchors::Root => Anchoring::RootOnly,
        Anchors::All => Anchoring::AllAnchors,
    };
    let (rules, origin) = instantiate(&templates, anchoring, &space);
    let matrix = grammar_matrix(&rules, &space)?;
    let h = harmony(&structure, &matrix)?;
    let mut per_template = vec![0.0; templates.len()];
    for (c, &k) in matrix.contributions(&structure)?.iter().zip(&origin) {
        per_template[k] += c;
    }
    let record = HarmonyRecord {
        tree: tree.to_string(),
        harmony: round(h),
        rules: templates
            .iter()
            .zip(&per_template)
            .map(|(t, &c)| RuleContribution {
                rule: t.kind.to_string(),
                weight: round(t.weight),
                contribution: round(c),
            })
            .collect(),
    };
    match cfg.format {
        Format::Json => json_line(&record),
        Format::Text => {
            let mut s = format!("H({}) = {}\n", record.tree, record.harmony);
            for r in &record.rules {
                s.push_str(&format!(
                    "  {} (w={}): {}\n",
                    r.rule, r.weight, r.contribution
                ));
            }
            Ok(s)
        }
        Format::Dot => bail!("--format dot is only supported by `reduce`"),
    }
}

#[derive(Serialize)]
struct ComposeRecord {
    words: Vec<String>,
    chosen_types: Vec<String>,
    residual: String,
    shape: Vec<usize>,
    values: Vec<f64>,
}

fn cmd_compose(cfg: &Config, sentence: &str) -> Result<String> {
    let path = cfg.tensors.as_ref().context("--tensors is required")?;
    let tensors = TensorLexicon::parse_named(&read_file(path)?, &path.display().to_string())?;
    let mut lex = match &cfg.lexicon {
        Some(_) => load_lexicon(cfg)?,
        None => tensors.to_lexicon(),
    };
    if let Some(base) = &cfg.base {
        lex.set_sentence_base(BaseType::new(base.as_str())?);
    }
    let words = split_words(sentence);
    let best = best_assignment(cfg, &lex, &words)?;
    let word_tensors = words
        .iter()
        .zip(&best.candidate.word_types)
        .map(|(w, ty)| {
            tensors
                .get(w, ty)
                .cloned()
                .ok_or_else(|| Error::MissingTensor {
                    word: w.to_string(),
                    ty: ty.to_string(),
                })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let meaning = compose(&word_tensors, &best.reduction)?;
    let record = ComposeRecord {
        words: words.iter().map(|w| w.to_string()).collect(),
        chosen_types: best
            .candidate
            .word_types
            .iter()
            .map(ToString::to_string)
            .collect(),
        residual: meaning.ty.to_string(),
        shape: meaning.tensor.shape().to_vec(),
        values: meaning.tensor.data().iter().map(|&v| round(v)).collect(),
    };
    match cfg.format {
        Format::Json => json_line(&record),
        Format::Text => Ok(format!(
            "{} : {} {:?}\n{:?}\n",
            words.join(" "),
            meaning.ty.display_or_unit(),
            record.shape,
            record.values
        )),
        Format::Dot => bail!("--format dot is only supported by `reduce`"),
    }
}
