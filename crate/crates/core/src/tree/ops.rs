//! Homogenisation, colour multiplicities, swap and resize.

use std::collections::{BTreeMap, HashSet};

use super::{Node, Stage, StagedTree, TreeError};

/// Pads every short root-to-leaf path with out-degree-one `z` vertices placed
/// directly above the leaf, so that all leaves sit at depth `d`.
pub fn homogenize(t: &StagedTree) -> StagedTree {
    if t.is_uniform() {
        return t.clone();
    }
    let mut stages = t.stages().to_vec();
    let pad = match t.padding_stage() {
        Some(p) => p,
        None => {
            stages.push(Stage::padding());
            stages.len() - 1
        }
    };
    let d = t.depth();
    fn go(n: &Node, depth: usize, d: usize, pad: usize) -> Node {
        if n.is_leaf() {
            let mut cur = n.clone();
            for _ in depth..d {
                cur = Node::internal(pad, vec![cur]);
            }
            return cur;
        }
        Node {
            name: n.name.clone(),
            stage: n.stage,
            children: n.children.iter().map(|c| go(c, depth + 1, d, pad)).collect(),
        }
    }
    let root = go(&t.to_node(), 0, d, pad);
    StagedTree::build(stages, root).expect("padding preserves validity")
}

/// Least number of stage-`c` vertices on a `v`-to-leaf path, counting `v`.
pub fn multiplicity(t: &StagedTree, c: usize, v: usize) -> usize {
    if t.is_leaf(v) {
        return 0;
    }
    let own = usize::from(t.stage_of(v) == Some(c));
    own + t.children(v).iter().map(|&w| multiplicity(t, c, w)).min().unwrap_or(0)
}

/// Child-index path from the root to `v`.
pub(crate) fn path_to(t: &StagedTree, v: usize) -> Vec<usize> {
    let mut path = Vec::new();
    let mut cur = v;
    while let Some(p) = t.parent(cur) {
        path.push(t.child_index(cur));
        cur = p;
    }
    path.reverse();
    path
}

/// Replaces `T(v)` by an equivalent subtree whose root has stage `c`.
///
/// Every `v`-to-leaf path must pass a vertex of stage `c`. The prefix of `T(v)`
/// above the first such vertices is copied once per label of `c`, and copy `j`
/// receives the `j`-th child subtree of each of those vertices.
pub fn swap(t: &StagedTree, v: usize, c: usize) -> Result<StagedTree, TreeError> {
    let name = t.name(v).to_string();
    let cid = &t.stage(c).id;
    if t.is_leaf(v) {
        return Err(TreeError::SwapNotApplicable(format!("`{name}` is a leaf")));
    }
    if t.stage_of(v) == Some(c) {
        return Err(TreeError::SwapNotApplicable(format!("`{name}` already has stage `{cid}`")));
    }
    if multiplicity(t, c, v) == 0 {
        // report a path that avoids the stage
        let mut cur = v;
        let mut path = vec![name.clone()];
        while !t.is_leaf(cur) {
            cur = *t.children(cur).iter().find(|&&w| multiplicity(t, c, w) == 0).unwrap();
            path.push(t.name(cur).to_string());
            if t.stage_of(cur) == Some(c) {
                break;
            }
        }
        return Err(TreeError::SwapNotApplicable(format!(
            "path {} avoids stage `{cid}`",
            path.join(" -> ")
        )));
    }
    fn copy(n: &Node, c: usize, j: usize) -> Node {
        if n.stage == Some(c) {
            return n.children[j].clone();
        }
        Node { name: None, stage: n.stage, children: n.children.iter().map(|m| copy(m, c, j)).collect() }
    }
    let sub = t.node(v);
    let k = t.stage(c).arity();
    let new_sub = Node {
        name: Some(name),
        stage: Some(c),
        children: (0..k).map(|j| copy(&sub, c, j)).collect(),
    };
    let mut root = t.to_node();
    *root.at_mut(&path_to(t, v)) = new_sub;
    t.rebuild(root)
}

/// Result of a resize.
#[derive(Clone, Debug)]
pub struct Resized {
    pub tree: StagedTree,
    /// Set when the extra conditions for an equivalent model fail: two
    /// children share a stage, or a child stage also occurs elsewhere.
    pub naive: bool,
    /// New label to the (parent label, child label) product it stands for.
    pub substitution: BTreeMap<String, (String, String)>,
}

/// Merges two levels below every vertex of `u`'s stage.
pub fn resize(t: &StagedTree, u: usize) -> Result<Resized, TreeError> {
    let Some(c) = t.stage_of(u) else {
        return Err(TreeError::ResizeNotApplicable(format!("`{}` is a leaf", t.name(u))));
    };
    let members = t.vertices_of_stage(c);
    let uc: Vec<Option<usize>> = t.children(u).iter().map(|&w| t.stage_of(w)).collect();
    if uc.iter().all(Option::is_none) {
        return Err(TreeError::ResizeNotApplicable(format!(
            "all children of `{}` are leaves; nothing to merge",
            t.name(u)
        )));
    }
    if uc.contains(&Some(c)) {
        return Err(TreeError::ResizeNotApplicable(format!(
            "a child of `{}` lies in its own stage `{}`",
            t.name(u),
            t.stage(c).id
        )));
    }
    for &v in &members {
        for (i, &w) in t.children(v).iter().enumerate() {
            if t.stage_of(w) != uc[i] {
                return Err(TreeError::ResizeNotApplicable(format!(
                    "children `{}` and `{}` are not in the same stage",
                    t.name(t.children(u)[i]),
                    t.name(w)
                )));
            }
        }
    }
    // naive: repeated child stages, or child stages used outside this level
    let child_stages: Vec<usize> = uc.iter().flatten().copied().collect();
    let distinct: HashSet<usize> = child_stages.iter().copied().collect();
    let mut naive = distinct.len() < child_stages.len();
    for &s in &distinct {
        for w in t.vertices_of_stage(s) {
            let under = t.parent(w).is_some_and(|p| t.stage_of(p) == Some(c));
            if !under {
                naive = true;
            }
        }
    }

    let taken: HashSet<&str> = t.stages().iter().flat_map(|s| s.labels.iter().map(String::as_str)).collect();
    let old = t.stage(c);
    let mut labels = Vec::new();
    let mut substitution = BTreeMap::new();
    for (i, s) in uc.iter().enumerate() {
        match s {
            None => labels.push(old.labels[i].clone()),
            Some(s) => {
                for l in &t.stage(*s).labels {
                    let mut name = format!("{}_{}", old.labels[i], l);
                    while taken.contains(name.as_str()) || substitution.contains_key(&name) {
                        name.push('_');
                    }
                    substitution.insert(name.clone(), (old.labels[i].clone(), l.clone()));
                    labels.push(name);
                }
            }
        }
    }
    let mut stages = t.stages().to_vec();
    stages[c] = Stage { id: old.id.clone(), labels };

    fn go(n: &Node, c: usize) -> Node {
        if n.stage == Some(c) {
            let mut kids = Vec::new();
            for ch in &n.children {
                if ch.is_leaf() {
                    kids.push(ch.clone());
                } else {
                    kids.extend(ch.children.iter().map(|g| go(g, c)));
                }
            }
            return Node { name: n.name.clone(), stage: n.stage, children: kids };
        }
        Node { name: n.name.clone(), stage: n.stage, children: n.children.iter().map(|m| go(m, c)).collect() }
    }
    let tree = StagedTree::build(stages, go(&t.to_node(), c))?;
    Ok(Resized { tree, naive, substitution })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::parse_tree;

    const TWO_LEVEL: &str = "stage a : x y ;\nstage b : s t ;\nvertex r stage a children u w ;\nvertex u stage b children l1 l2 ;\nvertex w stage b children l3 l4 ;\nvertex l1 leaf ;\nvertex l2 leaf ;\nvertex l3 leaf ;\nvertex l4 leaf ;\nroot r ;";

    fn sorted_atoms(t: &StagedTree) -> Vec<String> {
        let mut v: Vec<String> =
            t.atom_images().iter().map(|m| crate::algebra::format_monomial(m, t.params().vars())).collect();
        v.sort();
        v
    }

    #[test]
    fn homogenize_pads_short_paths() {
        let t = parse_tree("stage c : t1 t2 ;\nvertex r stage c children a l3 ;\nvertex a stage c children l1 l2 ;\nvertex l1 leaf ;\nvertex l2 leaf ;\nvertex l3 leaf ;\nroot r ;").unwrap();
        let h = homogenize(&t);
        assert!(h.is_uniform());
        assert_eq!(h.vertex_count(), t.vertex_count() + 1);
        assert_eq!(sorted_atoms(&h), sorted_atoms(&t));
        assert_eq!(homogenize(&h), h);
    }

    #[test]
    fn swap_two_level() {
        let t = parse_tree(TWO_LEVEL).unwrap();
        let b = t.stage_index("b").unwrap();
        assert_eq!(multiplicity(&t, b, 0), 1);
        let s = swap(&t, 0, b).unwrap();
        assert_eq!(s.stage_of(0), Some(b));
        assert_eq!(sorted_atoms(&s), sorted_atoms(&t));
        assert!(swap(&s, 0, b).is_err());
    }

    #[test]
    fn resize_two_level() {
        let t = parse_tree(TWO_LEVEL).unwrap();
        let r = resize(&t, 0).unwrap();
        assert!(r.naive, "both children share stage b");
        assert_eq!(r.tree.depth(), 1);
        assert_eq!(r.tree.stage(0).labels, ["x_s", "x_t", "y_s", "y_t"]);
        assert_eq!(r.substitution["y_t"], ("y".to_string(), "t".to_string()));
        assert!(resize(&r.tree, 0).is_err());
    }
}
