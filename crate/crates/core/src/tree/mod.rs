//! Staged trees: data model, parameter ring, images of the atomic
//! probabilities and the constructive swap/resize operations.

mod dot;
mod dsl;
mod error;
mod forms;
pub(crate) mod ops;
mod params;

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::algebra::{Monomial, VarSet};
use crate::{Poly, Q};

pub use dot::to_dot;
pub use dsl::{parse_tree, serialize_tree};
pub use error::TreeError;
pub use forms::LinearForm;
pub use ops::{homogenize, multiplicity, resize, swap, Resized};
pub use params::ParamRing;

/// Name of the homogenising parameter.
pub const Z: &str = "z";
/// Stage id used for inserted out-degree-one vertices.
pub const PADDING_STAGE: &str = "_z";

/// A stage: an identifier and an ordered list of edge labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Stage {
    pub id: String,
    pub labels: Vec<String>,
}

impl Stage {
    pub fn new(id: impl Into<String>, labels: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Stage { id: id.into(), labels: labels.into_iter().map(Into::into).collect() }
    }

    pub fn arity(&self) -> usize {
        self.labels.len()
    }

    /// The stage of inserted z-vertices.
    pub fn is_padding(&self) -> bool {
        self.labels.len() == 1 && self.labels[0] == Z
    }

    pub fn padding() -> Self {
        Stage::new(PADDING_STAGE, [Z])
    }
}

/// A recursive description of a tree, used to build and transform trees.
/// `stage` indexes into a stage list kept alongside; `None` marks a leaf.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Node {
    pub name: Option<String>,
    pub stage: Option<usize>,
    pub children: Vec<Node>,
}

impl Node {
    pub fn leaf() -> Self {
        Node { name: None, stage: None, children: Vec::new() }
    }

    pub fn internal(stage: usize, children: Vec<Node>) -> Self {
        Node { name: None, stage: Some(stage), children }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn is_leaf(&self) -> bool {
        self.stage.is_none()
    }

    pub fn leaf_count(&self) -> usize {
        if self.is_leaf() {
            1
        } else {
            self.children.iter().map(Node::leaf_count).sum()
        }
    }

    pub fn depth(&self) -> usize {
        self.children.iter().map(|c| c.depth() + 1).max().unwrap_or(0)
    }

    /// Drops all vertex names.
    pub fn anonymous(&self) -> Node {
        Node {
            name: None,
            stage: self.stage,
            children: self.children.iter().map(Node::anonymous).collect(),
        }
    }

    pub fn at(&self, path: &[usize]) -> &Node {
        path.iter().fold(self, |n, &i| &n.children[i])
    }

    pub fn at_mut(&mut self, path: &[usize]) -> &mut Node {
        path.iter().fold(self, |n, &i| &mut n.children[i])
    }
}

/// A validated staged tree.
///
/// Stages are sorted by id and unused stages are dropped. Vertices are indexed
/// in depth-first order with children visited in label order, so the root is
/// vertex 0 and leaves are numbered top to bottom.
#[derive(Clone, Debug)]
pub struct StagedTree {
    stages: Vec<Stage>,
    names: Vec<String>,
    stage_of: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
    child_index: Vec<usize>,
    depth: Vec<usize>,
    leaves: Vec<usize>,
    leaf_range: Vec<(usize, usize)>,
    max_depth: usize,
    params: ParamRing,
    atoms: Vec<Monomial>,
}

impl PartialEq for StagedTree {
    fn eq(&self, other: &Self) -> bool {
        self.stages == other.stages
            && self.names == other.names
            && self.stage_of == other.stage_of
            && self.children == other.children
    }
}
impl Eq for StagedTree {}

impl StagedTree {
    /// Validates and normalizes a tree given in recursive form.
    pub fn build(stages: Vec<Stage>, root: Node) -> Result<StagedTree, TreeError> {
        if root.is_leaf() {
            return Err(TreeError::RootIsLeaf);
        }
        // stage sanity
        let mut ids = HashSet::new();
        let mut owner: HashMap<&str, &str> = HashMap::new();
        for s in &stages {
            if !ids.insert(s.id.as_str()) {
                return Err(TreeError::DuplicateStage(s.id.clone()));
            }
            if s.labels.is_empty() {
                return Err(TreeError::EmptyStage(s.id.clone()));
            }
            for l in &s.labels {
                if l == Z && !s.is_padding() {
                    return Err(TreeError::ReservedLabel { stage: s.id.clone(), label: l.clone() });
                }
                if let Some(prev) = owner.insert(l.as_str(), s.id.as_str()) {
                    return Err(TreeError::DuplicateLabel {
                        label: l.clone(),
                        first: prev.to_string(),
                        second: s.id.clone(),
                    });
                }
            }
        }
        if stages.iter().filter(|s| s.is_padding()).count() > 1 {
            return Err(TreeError::DuplicateLabel {
                label: Z.into(),
                first: PADDING_STAGE.into(),
                second: PADDING_STAGE.into(),
            });
        }
        // arity check and stage usage
        let mut used = vec![false; stages.len()];
        fn walk(n: &Node, stages: &[Stage], used: &mut [bool]) -> Result<(), TreeError> {
            if let Some(s) = n.stage {
                let st = stages.get(s).ok_or_else(|| TreeError::UndefinedStage(format!("#{s}")))?;
                used[s] = true;
                if st.arity() != n.children.len() {
                    return Err(TreeError::Arity {
                        vertex: n.name.clone().unwrap_or_else(|| "?".into()),
                        stage: st.id.clone(),
                        expected: st.arity(),
                        found: n.children.len(),
                    });
                }
                for c in &n.children {
                    walk(c, stages, used)?;
                }
            } else if !n.children.is_empty() {
                return Err(TreeError::Arity {
                    vertex: n.name.clone().unwrap_or_else(|| "?".into()),
                    stage: "leaf".into(),
                    expected: 0,
                    found: n.children.len(),
                });
            }
            Ok(())
        }
        walk(&root, &stages, &mut used)?;
        let mut order: Vec<usize> = (0..stages.len()).filter(|&s| used[s]).collect();
        order.sort_by(|&a, &b| stages[a].id.cmp(&stages[b].id));
        let mut remap = vec![usize::MAX; stages.len()];
        for (new, &old) in order.iter().enumerate() {
            remap[old] = new;
        }
        let new_stages: Vec<Stage> = order.iter().map(|&s| stages[s].clone()).collect();

        // flatten depth-first
        let mut t = StagedTree {
            params: ParamRing::new(&new_stages),
            stages: new_stages,
            names: Vec::new(),
            stage_of: Vec::new(),
            children: Vec::new(),
            parent: Vec::new(),
            child_index: Vec::new(),
            depth: Vec::new(),
            leaves: Vec::new(),
            leaf_range: Vec::new(),
            max_depth: 0,
            atoms: Vec::new(),
        };
        let mut given: Vec<Option<String>> = Vec::new();
        fn flatten(
            n: &Node,
            parent: Option<usize>,
            ci: usize,
            depth: usize,
            t: &mut StagedTree,
            remap: &[usize],
            given: &mut Vec<Option<String>>,
        ) -> usize {
            let id = t.stage_of.len();
            t.stage_of.push(n.stage.map(|s| remap[s]));
            t.children.push(Vec::new());
            t.parent.push(parent);
            t.child_index.push(ci);
            t.depth.push(depth);
            t.leaf_range.push((t.leaves.len(), t.leaves.len()));
            given.push(n.name.clone());
            if n.is_leaf() {
                t.leaves.push(id);
                t.max_depth = t.max_depth.max(depth);
            }
            for (i, c) in n.children.iter().enumerate() {
                let cid = flatten(c, Some(id), i, depth + 1, t, remap, given);
                t.children[id].push(cid);
            }
            t.leaf_range[id].1 = t.leaves.len();
            id
        }
        flatten(&root, None, 0, 0, &mut t, &remap, &mut given);

        // names: keep given ones when unique, generate the rest
        let mut taken: HashSet<String> = HashSet::new();
        let mut names = vec![String::new(); given.len()];
        for (v, g) in given.iter().enumerate() {
            if let Some(g) = g {
                if taken.insert(g.clone()) {
                    names[v] = g.clone();
                }
            }
        }
        for v in 0..given.len() {
            if names[v].is_empty() {
                let mut cand = format!("v{v}");
                while taken.contains(&cand) {
                    cand.push('_');
                }
                taken.insert(cand.clone());
                names[v] = cand;
            }
        }
        t.names = names;
        t.atoms = (0..t.leaves.len()).map(|r| t.compute_atom(r)).collect();
        Ok(t)
    }

    fn compute_atom(&self, r: usize) -> Monomial {
        let v = self.leaves[r];
        let mut m = self.path_monomial(v);
        let z = self.params.z();
        let pad = (self.max_depth - self.depth[v]) as u16;
        m.set(z, m.get(z) + pad);
        m
    }

    /// Product of the labels on the root-to-`v` path, without padding.
    pub fn path_monomial(&self, v: usize) -> Monomial {
        let mut m = Monomial::one(self.params.nvars());
        let mut cur = v;
        while let Some(p) = self.parent[cur] {
            let s = self.stage_of[p].expect("parent is internal");
            let var = self.params.label_var(s, self.child_index[cur]);
            m.set(var, m.get(var) + 1);
            cur = p;
        }
        m
    }

    /// Recursive form of the subtree rooted at `v`, keeping names.
    pub fn node(&self, v: usize) -> Node {
        Node {
            name: Some(self.names[v].clone()),
            stage: self.stage_of[v],
            children: self.children[v].iter().map(|&c| self.node(c)).collect(),
        }
    }

    pub fn to_node(&self) -> Node {
        self.node(0)
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn stage(&self, c: usize) -> &Stage {
        &self.stages[c]
    }

    pub fn stage_index(&self, id: &str) -> Option<usize> {
        self.stages.iter().position(|s| s.id == id)
    }

    pub fn padding_stage(&self) -> Option<usize> {
        self.stages.iter().position(Stage::is_padding)
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn vertex(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn stage_of(&self, v: usize) -> Option<usize> {
        self.stage_of[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    /// Position of `v` among its parent's children.
    pub fn child_index(&self, v: usize) -> usize {
        self.child_index[v]
    }

    pub fn depth_of(&self, v: usize) -> usize {
        self.depth[v]
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.stage_of[v].is_none()
    }

    /// Number of leaves, `n`.
    pub fn n_leaves(&self) -> usize {
        self.leaves.len()
    }

    /// Maximal root-to-leaf edge count, `d`.
    pub fn depth(&self) -> usize {
        self.max_depth
    }

    /// Vertex of the leaf with 0-based index `r`.
    pub fn leaf(&self, r: usize) -> usize {
        self.leaves[r]
    }

    pub fn leaf_index(&self, v: usize) -> Option<usize> {
        if self.is_leaf(v) {
            Some(self.leaf_range[v].0)
        } else {
            None
        }
    }

    /// 0-based leaf indices below `v`, as a half-open range.
    pub fn leaves_below(&self, v: usize) -> std::ops::Range<usize> {
        self.leaf_range[v].0..self.leaf_range[v].1
    }

    pub fn internal_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertex_count()).filter(|&v| !self.is_leaf(v))
    }

    /// Vertices of stage `c` in depth-first order.
    pub fn vertices_of_stage(&self, c: usize) -> Vec<usize> {
        (0..self.vertex_count()).filter(|&v| self.stage_of[v] == Some(c)).collect()
    }

    pub fn params(&self) -> &ParamRing {
        &self.params
    }

    /// Variables p1..pn.
    pub fn p_vars(&self) -> VarSet {
        VarSet::numbered("p", self.n_leaves())
    }

    /// Image of `p_{r+1}`: the path labels times `z^(d - d(r))`.
    pub fn atom_image(&self, r: usize) -> &Monomial {
        &self.atoms[r]
    }

    pub fn atom_images(&self) -> &[Monomial] {
        &self.atoms
    }

    /// Whether every leaf sits at depth `d`.
    pub fn is_uniform(&self) -> bool {
        self.leaves.iter().all(|&v| self.depth[v] == self.max_depth)
    }

    /// `p_[v]`: the sum of the atomic probabilities below `v`.
    pub fn p_bracket(&self, v: usize) -> LinearForm {
        let mut f = LinearForm::zero(self.n_leaves());
        for r in self.leaves_below(v) {
            f.set(r, Q::from_integer(1));
        }
        f
    }

    /// Monomial image of `p_[v]` modulo the sum-to-z relations.
    pub fn bracket_image(&self, v: usize) -> Monomial {
        let mut m = self.path_monomial(v);
        let z = self.params.z();
        m.set(z, m.get(z) + (self.max_depth - self.depth[v]) as u16);
        m
    }

    /// `t(v)`: sum over `v`-to-leaf paths of the label products.
    pub fn subtree_polynomial(&self, v: usize) -> Poly {
        let nv = self.params.nvars();
        match self.stage_of[v] {
            None => Poly::one(nv),
            Some(s) => {
                let mut acc = Poly::zero(nv);
                for (i, &c) in self.children[v].iter().enumerate() {
                    let lab = Poly::var(nv, self.params.label_var(s, i));
                    acc = acc + &lab * &self.subtree_polynomial(c);
                }
                acc
            }
        }
    }

    /// All `t(v)` computed bottom-up in one pass.
    pub fn subtree_polynomials(&self) -> Vec<Poly> {
        let nv = self.params.nvars();
        let mut out = vec![Poly::zero(nv); self.vertex_count()];
        for v in (0..self.vertex_count()).rev() {
            out[v] = match self.stage_of[v] {
                None => Poly::one(nv),
                Some(s) => {
                    let mut acc = Poly::zero(nv);
                    for (i, &c) in self.children[v].iter().enumerate() {
                        let lab = Poly::var(nv, self.params.label_var(s, i));
                        acc = acc + &lab * &out[c];
                    }
                    acc
                }
            };
        }
        out
    }

    /// Image of a polynomial in the p-variables under the homogeneous map.
    pub fn phi(&self, f: &Poly) -> Poly {
        let images: Vec<Poly> = self.atoms.iter().map(|m| Poly::monomial(m.clone())).collect();
        f.substitute(&images)
    }

    /// Image of a linear form, as a polynomial in the parameter ring.
    pub fn phi_form(&self, f: &LinearForm) -> Poly {
        Poly::from_terms(
            self.params.nvars(),
            f.iter().map(|(r, c)| (self.atoms[r].clone(), c.clone())),
        )
    }

    /// Same-stage vertex pairs `u < v`, grouped by stage.
    pub fn stage_pairs(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for c in 0..self.stages.len() {
            let vs = self.vertices_of_stage(c);
            for a in 0..vs.len() {
                for b in (a + 1)..vs.len() {
                    out.push((c, vs[a], vs[b]));
                }
            }
        }
        out
    }

    /// Vertex names for each stage, used in reports.
    pub fn stage_members(&self) -> BTreeMap<String, Vec<String>> {
        (0..self.stages.len())
            .map(|c| {
                (
                    self.stages[c].id.clone(),
                    self.vertices_of_stage(c).iter().map(|&v| self.names[v].clone()).collect(),
                )
            })
            .collect()
    }

    /// Whether no root-to-leaf path visits a stage twice.
    pub fn is_squarefree(&self) -> bool {
        self.atoms.iter().all(|m| {
            let mut seen = vec![0u16; self.stages.len()];
            for c in 0..self.stages.len() {
                if self.stages[c].is_padding() {
                    continue;
                }
                for j in 0..self.stages[c].arity() {
                    seen[c] += m.get(self.params.label_var(c, j));
                }
            }
            seen.iter().all(|&k| k <= 1)
        })
    }

    /// Rebuilds the tree from a transformed recursive form over the same stages.
    pub fn rebuild(&self, root: Node) -> Result<StagedTree, TreeError> {
        StagedTree::build(self.stages.clone(), root)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn coin_flip() -> StagedTree {
        let root = Node::internal(0, vec![Node::internal(0, vec![Node::leaf(), Node::leaf()]), Node::leaf()]);
        StagedTree::build(vec![Stage::new("c", ["t1", "t2"])], root).unwrap()
    }

    #[test]
    fn coin_flip_images() {
        let t = coin_flip();
        assert_eq!(t.n_leaves(), 3);
        assert_eq!(t.depth(), 2);
        let v = t.params().vars();
        let shown: Vec<String> =
            t.atom_images().iter().map(|m| crate::algebra::format_monomial(m, v)).collect();
        assert_eq!(shown, ["t1^2", "t1*t2", "t2*z"]);
        let root = t.subtree_polynomial(0);
        assert_eq!(crate::algebra::format_polynomial(&root, v), "t1^2 + t1*t2 + t2");
        assert_eq!(t.p_bracket(0).support(), vec![0, 1, 2]);
    }

    #[test]
    fn build_rejects_bad_arity() {
        let root = Node::internal(0, vec![Node::leaf()]);
        let e = StagedTree::build(vec![Stage::new("c", ["a", "b"])], root).unwrap_err();
        assert!(matches!(e, TreeError::Arity { expected: 2, found: 1, .. }));
        let e = StagedTree::build(vec![Stage::new("c", ["a"])], Node::leaf()).unwrap_err();
        assert!(matches!(e, TreeError::RootIsLeaf));
    }

    #[test]
    fn stages_sorted_and_unused_dropped() {
        let stages = vec![Stage::new("b", ["x", "y"]), Stage::new("unused", ["u"]), Stage::new("a", ["s"])];
        let root = Node::internal(0, vec![Node::internal(2, vec![Node::leaf()]), Node::leaf()]);
        let t = StagedTree::build(stages, root).unwrap();
        let ids: Vec<&str> = t.stages().iter().map(|s| s.id.as_str()).collect();
        assert_eq!(ids, ["a", "b"]);
        assert_eq!(t.stage_of(0), Some(1));
    }
}
