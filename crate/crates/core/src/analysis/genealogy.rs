use std::fmt::Write as _;

use crate::relational::{PropertyPath, RelViz, StyleRow};

/// A group of specs whose style rows are equal once ignored paths are
/// dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct GenealogyNode {
    pub members: Vec<usize>,
    pub labels: Vec<String>,
}

/// Subset DAG: an edge `(a, b)` means node `a`'s style rows are a strict
/// subset of node `b`'s. Only covering edges are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct GenealogyGraph {
    pub nodes: Vec<GenealogyNode>,
    pub edges: Vec<(usize, usize)>,
}

impl GenealogyGraph {
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph genealogy {\n");
        for (i, node) in self.nodes.iter().enumerate() {
            let label = node.labels.join("\\n");
            let _ = writeln!(out, "  n{i} [label=\"{}\"];", escape(&label));
        }
        for (a, b) in &self.edges {
            let _ = writeln!(out, "  n{a} -> n{b};");
        }
        out.push_str("}\n");
        out
    }

    /// Node containing corpus item `index`.
    pub fn node_of(&self, index: usize) -> Option<usize> {
        self.nodes.iter().position(|n| n.members.contains(&index))
    }
}

fn escape(s: &str) -> String {
    s.replace('"', "\\\"")
}

fn kept<'a>(
    rel: &'a RelViz,
    ignore: &'a [PropertyPath],
) -> impl Iterator<Item = &'a StyleRow> + 'a {
    rel.style
        .rows()
        .iter()
        .filter(move |r| !ignore.iter().any(|p| r.path.starts_with(p)))
}

/// Whether every kept style row of `a` appears, with the same value, in `b`.
pub fn is_style_subset(a: &RelViz, b: &RelViz, ignore: &[PropertyPath]) -> bool {
    kept(a, ignore).all(|r| b.style.get(&r.path) == Some(&r.value))
}

/// Ancestor graph of a corpus. Data tables play no part.
pub fn genealogy(corpus: &[RelViz], labels: &[String], ignore: &[PropertyPath]) -> GenealogyGraph {
    let sub = |i: usize, j: usize| is_style_subset(&corpus[i], &corpus[j], ignore);
    let mut nodes: Vec<GenealogyNode> = Vec::new();
    for i in 0..corpus.len() {
        match nodes.iter_mut().find(|n| {
            let r = n.members[0];
            sub(i, r) && sub(r, i)
        }) {
            Some(node) => {
                node.members.push(i);
                node.labels.push(labels[i].clone());
            }
            None => nodes.push(GenealogyNode {
                members: vec![i],
                labels: vec![labels[i].clone()],
            }),
        }
    }
    let reps: Vec<usize> = nodes.iter().map(|n| n.members[0]).collect();
    let k = reps.len();
    // distinct nodes are never equal, so subset here is strict
    let below: Vec<Vec<bool>> = (0..k)
        .map(|a| (0..k).map(|b| a != b && sub(reps[a], reps[b])).collect())
        .collect();
    let mut edges = Vec::new();
    for a in 0..k {
        for b in 0..k {
            if below[a][b] && !(0..k).any(|c| below[a][c] && below[c][b]) {
                edges.push((a, b));
            }
        }
    }
    GenealogyGraph { nodes, edges }
}
