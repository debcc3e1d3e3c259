//! Graphviz rendering of reductions: one node per simple type, an arc per
//! link, and unreduced types drawn in red.

use std::fmt::Write;

use crate::reducer::Reduction;

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

pub fn reduction_to_dot(r: &Reduction) -> String {
    render(r, None)
}

/// As [`reduction_to_dot`], grouping simple types into one cluster per word.
/// `offsets[k]` is where word `k` starts in the type string.
pub fn reduction_to_dot_with_words(r: &Reduction, words: &[&str], offsets: &[usize]) -> String {
    render(r, Some((words, offsets)))
}

fn render(r: &Reduction, words: Option<(&[&str], &[usize])>) -> String {
    let simples = r.types().simples();
    let residual = r.residual_positions();
    let mut out = String::new();
    out.push_str("graph reduction {\n");
    out.push_str("  rankdir=LR;\n");
    out.push_str("  node [shape=plaintext];\n");
    let node = |out: &mut String, p: usize, indent: &str| {
        let label = escape(&simples[p].to_string());
        if residual.contains(&p) {
            let _ = writeln!(
                out,
                "{indent}t{p} [label=\"{label}\", color=red, fontcolor=red];"
            );
        } else {
            let _ = writeln!(out, "{indent}t{p} [label=\"{label}\"];");
        }
    };
    match words {
        Some((words, offsets)) => {
            for (k, word) in words.iter().enumerate() {
                let start = offsets.get(k).copied().unwrap_or(simples.len());
                let end = offsets.get(k + 1).copied().unwrap_or(simples.len());
                let _ = writeln!(out, "  subgraph cluster_w{k} {{");
                let _ = writeln!(out, "    label=\"{}\";", escape(word));
                out.push_str("    pencolor=transparent;\n");
                for p in start..end {
                    node(&mut out, p, "    ");
                }
                out.push_str("  }\n");
            }
        }
        None => {
            for p in 0..simples.len() {
                node(&mut out, p, "  ");
            }
        }
    }
    if simples.len() > 1 {
        let chain: Vec<String> = (0..simples.len()).map(|p| format!("t{p}")).collect();
        let _ = writeln!(out, "  {} [style=invis];", chain.join(" -- "));
    }
    for l in r.links() {
        let _ = writeln!(out, "  t{} -- t{} [constraint=false];", l.i, l.j);
    }
    for &p in residual {
        let _ = writeln!(out, "  out{p} [shape=point, style=invis];");
        let _ = writeln!(out, "  t{p} -- out{p} [color=red];");
    }
    out.push_str("}\n");
    out
}
