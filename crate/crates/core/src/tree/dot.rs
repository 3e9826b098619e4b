//! Graphviz export with one fill colour per stage.

use std::fmt::Write;

use super::StagedTree;

const PALETTE: [&str; 12] = [
    "#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4", "#42d4f4", "#f032e6", "#bfef45", "#fabed4",
    "#469990", "#dcbeff", "#9a6324",
];

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn to_dot(t: &StagedTree) -> String {
    let mut out = String::from("digraph staged_tree {\n  rankdir=LR;\n  node [shape=circle, style=filled, label=\"\"];\n");
    let mut colour = 0;
    let fills: Vec<&str> = t
        .stages()
        .iter()
        .map(|s| {
            if s.is_padding() {
                "#d3d3d3"
            } else {
                let c = PALETTE[colour % PALETTE.len()];
                colour += 1;
                c
            }
        })
        .collect();
    for v in 0..t.vertex_count() {
        match t.stage_of(v) {
            Some(c) => writeln!(
                out,
                "  {} [fillcolor={}, tooltip={}];",
                quote(t.name(v)),
                quote(fills[c]),
                quote(&t.stage(c).id)
            ),
            None => writeln!(
                out,
                "  {} [shape=box, fillcolor=\"#ffffff\", label={}];",
                quote(t.name(v)),
                quote(&format!("p{}", t.leaf_index(v).unwrap() + 1))
            ),
        }
        .unwrap();
    }
    for v in t.internal_vertices() {
        let s = t.stage(t.stage_of(v).unwrap());
        for (i, &c) in t.children(v).iter().enumerate() {
            writeln!(out, "  {} -> {} [label={}];", quote(t.name(v)), quote(t.name(c)), quote(&s.labels[i])).unwrap();
        }
    }
    out.push_str("}\n");
    out
}
