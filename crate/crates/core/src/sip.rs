//! The subtree-inclusion property, stratified trees, the change of variables
//! for SIP trees and the hybrid certificate for a balanced prefix above an
//! SIP suffix.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_traits::{One, Zero};
use serde::Serialize;

use crate::algebra::{solve, Monomial};
use crate::balance::{balance_violation, quadratic_gb, BalanceError, Violation};
use crate::kernel::{KernelError, Oracle};
use crate::minors::{ideal_of_minors, stage_matrix, verify_certificate, ToricCertificate};
use crate::tree::{LinearForm, Node, Stage, StagedTree};
use crate::{Poly, Q};

/// A candidate index `i` of a stage together with the vertex `v` and child
/// `j` such that `T(v_i)` does not embed into `T(v_j)`. Indices are 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SipAttempt {
    pub index: usize,
    pub vertex: String,
    pub child: usize,
}

/// A stage without a valid inclusion index, with one failed attempt per
/// candidate index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SipFailure {
    pub stage: String,
    pub attempts: Vec<SipAttempt>,
}

impl SipFailure {
    /// The first failing `(vertex, child)` pair, for short messages.
    pub fn witness(&self) -> (&str, usize) {
        let a = &self.attempts[0];
        (a.vertex.as_str(), a.child)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SipError {
    #[error("stage `{}` has no subtree-inclusion index (vertex `{}`, child {})", .0.stage, .0.witness().0, .0.witness().1 + 1)]
    NotSip(SipFailure),
    #[error("the prefix above the cut is not balanced: stage {} at ({}, {})", .0.stage, .0.u, .0.v)]
    PrefixNotBalanced(Violation),
    #[error("stage `{stage}` occurs at `{above}` above the cut and at `{below}` below it")]
    SharedStage { stage: String, above: String, below: String },
    #[error("invalid cut: {0}")]
    InvalidCut(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

impl From<BalanceError> for SipError {
    fn from(e: BalanceError) -> Self {
        match e {
            BalanceError::NotBalanced(v) => SipError::PrefixNotBalanced(v),
            BalanceError::Budget(b) => SipError::Kernel(KernelError::Budget(b)),
            other => SipError::InvalidCut(other.to_string()),
        }
    }
}

impl SipError {
    /// Whether the error reports a failed hypothesis rather than a budget or
    /// input problem.
    pub fn is_hypothesis(&self) -> bool {
        matches!(self, SipError::NotSip(_) | SipError::PrefixNotBalanced(_) | SipError::SharedStage { .. })
    }
}

/// Whether `T(a)` sits inside `T(b)` with the same root: every internal
/// vertex of `T(a)` maps to an internal vertex of the same stage, and the
/// `m`-th child to the `m`-th child.
pub fn embeds(t: &StagedTree, a: usize, b: usize) -> bool {
    match t.stage_of(a) {
        None => true,
        Some(s) => {
            t.stage_of(b) == Some(s) && t.children(a).iter().zip(t.children(b)).all(|(&x, &y)| embeds(t, x, y))
        }
    }
}

fn first_failure(t: &StagedTree, c: usize, i: usize) -> Option<(usize, usize)> {
    for v in t.vertices_of_stage(c) {
        let kids = t.children(v);
        for (j, &w) in kids.iter().enumerate() {
            if !embeds(t, kids[i], w) {
                return Some((v, j));
            }
        }
    }
    None
}

/// All valid inclusion indices of stage `c`, 0-based and increasing.
pub fn valid_indices(t: &StagedTree, c: usize) -> Vec<usize> {
    (0..t.stage(c).arity()).filter(|&i| first_failure(t, c, i).is_none()).collect()
}

/// Least inclusion index of stage `c`.
pub fn stage_index(t: &StagedTree, c: usize) -> Result<usize, SipFailure> {
    let mut attempts = Vec::new();
    for i in 0..t.stage(c).arity() {
        match first_failure(t, c, i) {
            None => return Ok(i),
            Some((v, j)) => attempts.push(SipAttempt { index: i, vertex: t.name(v).to_string(), child: j }),
        }
    }
    Err(SipFailure { stage: t.stage(c).id.clone(), attempts })
}

/// The least inclusion index of every stage, indexed like `t.stages()`, or
/// the first stage that has none.
pub fn detect_sip(t: &StagedTree) -> Result<Vec<usize>, SipFailure> {
    (0..t.stages().len()).map(|c| stage_index(t, c)).collect()
}

/// Stage id to inclusion index, for reports.
pub fn index_map(t: &StagedTree, idx: &[usize], stages: impl IntoIterator<Item = usize>) -> BTreeMap<String, usize> {
    stages.into_iter().map(|c| (t.stage(c).id.clone(), idx[c])).collect()
}

/// Redraws `t` so that the child at each stage's inclusion index comes first.
/// Labels of the stage are moved the same way; the remaining order is kept.
pub fn reorder(t: &StagedTree, idx: &[usize]) -> StagedTree {
    let perm = |c: usize, k: usize| -> Vec<usize> {
        let mut p = vec![idx[c]];
        p.extend((0..k).filter(|&j| j != idx[c]));
        p
    };
    let stages: Vec<Stage> = t
        .stages()
        .iter()
        .enumerate()
        .map(|(c, s)| Stage { id: s.id.clone(), labels: perm(c, s.arity()).iter().map(|&j| s.labels[j].clone()).collect() })
        .collect();
    fn go(t: &StagedTree, v: usize, perm: &dyn Fn(usize, usize) -> Vec<usize>) -> Node {
        let children = match t.stage_of(v) {
            None => Vec::new(),
            Some(c) => perm(c, t.children(v).len()).iter().map(|&j| go(t, t.children(v)[j], perm)).collect(),
        };
        Node { name: Some(t.name(v).to_string()), stage: t.stage_of(v), children }
    }
    StagedTree::build(stages, go(t, t.root(), &perm)).expect("a permutation keeps the tree valid")
}

/// A stratified tree and the label substitution back to the original tree.
#[derive(Clone, Debug)]
pub struct Stratified {
    pub tree: StagedTree,
    /// Stratified label to original label.
    pub substitution: BTreeMap<String, String>,
    /// Stratified stage index to original stage index.
    pub origin: Vec<usize>,
}

/// Splits every stage by depth, with fresh stage ids and labels
/// `<name>_<depth>`. Vertex names, child order and the padding stage are kept.
pub fn stratify(t: &StagedTree) -> Stratified {
    let taken: HashSet<String> = t
        .stages()
        .iter()
        .flat_map(|s| s.labels.iter().cloned().chain(std::iter::once(s.id.clone())))
        .collect();
    let fresh = |base: String, used: &mut HashSet<String>| -> String {
        let mut name = base;
        while taken.contains(&name) || used.contains(&name) {
            name.push('_');
        }
        used.insert(name.clone());
        name
    };
    let mut used = HashSet::new();
    let mut key: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut stages = Vec::new();
    let mut origin_ids = Vec::new();
    let mut substitution = BTreeMap::new();
    for v in t.internal_vertices() {
        let c = t.stage_of(v).expect("internal");
        let depth = if t.stage(c).is_padding() { 0 } else { t.depth_of(v) };
        if key.contains_key(&(c, depth)) {
            continue;
        }
        let old = t.stage(c);
        let stage = if old.is_padding() {
            old.clone()
        } else {
            let id = fresh(format!("{}_{depth}", old.id), &mut used);
            let labels: Vec<String> = old
                .labels
                .iter()
                .map(|l| {
                    let n = fresh(format!("{l}_{depth}"), &mut used);
                    substitution.insert(n.clone(), l.clone());
                    n
                })
                .collect();
            Stage { id, labels }
        };
        key.insert((c, depth), stages.len());
        origin_ids.push(old.id.clone());
        stages.push(stage);
    }
    fn go(t: &StagedTree, v: usize, key: &BTreeMap<(usize, usize), usize>) -> Node {
        let stage = t.stage_of(v).map(|c| {
            let depth = if t.stage(c).is_padding() { 0 } else { t.depth_of(v) };
            key[&(c, depth)]
        });
        Node {
            name: Some(t.name(v).to_string()),
            stage,
            children: t.children(v).iter().map(|&w| go(t, w, key)).collect(),
        }
    }
    let tree = StagedTree::build(stages.clone(), go(t, t.root(), &key)).expect("stratification keeps the tree valid");
    // build sorts stages by id, so recover origins by id
    let by_id: HashMap<&str, &str> = stages.iter().zip(&origin_ids).map(|(s, o)| (s.id.as_str(), o.as_str())).collect();
    let origin = tree.stages().iter().map(|s| t.stage_index(by_id[s.id.as_str()]).expect("origin stage exists")).collect();
    Stratified { tree, substitution, origin }
}

/// The vertex `u` of the path-copying argument: `w` is the ancestor of `v` at
/// `depth`, whose path to `v` must leave through the inclusion index of its
/// stage; the steps from there to `v` are repeated from the `j`-th child of `w`.
pub fn transport(t: &StagedTree, idx: &[usize], v: usize, depth: usize, j: usize) -> Option<usize> {
    let path = crate::tree::ops::path_to(t, v);
    if depth >= path.len() {
        return None;
    }
    let mut w = t.root();
    for &i in &path[..depth] {
        w = t.children(w)[i];
    }
    let c = t.stage_of(w)?;
    if path[depth] != idx[c] || j >= t.children(w).len() {
        return None;
    }
    let mut u = t.children(w)[j];
    for &i in &path[depth + 1..] {
        u = *t.children(u).get(i)?;
    }
    Some(u)
}

/// The monomial of leaf `r` with every label on an inclusion-index edge
/// replaced by `z`, in the parameter ring of `t`. Only edges leaving vertices
/// accepted by `active` are replaced.
pub fn first_edge_monomial(t: &StagedTree, idx: &[usize], r: usize, active: &dyn Fn(usize) -> bool) -> Monomial {
    let mut m = t.atom_image(r).clone();
    let z = t.params().z();
    let mut cur = t.leaf(r);
    while let Some(p) = t.parent(cur) {
        let c = t.stage_of(p).expect("parent is internal");
        if active(p) && t.child_index(cur) == idx[c] {
            let var = t.params().label_var(c, idx[c]);
            if var != z {
                m.set(var, m.get(var) - 1);
                m.set(z, m.get(z) + 1);
            }
        }
        cur = p;
    }
    m
}

/// Preimages of the first-edge monomials under the stratified
/// parametrisation, found by an exact linear solve in degree `d`.
pub fn preimages_by_solve(t: &StagedTree, idx: &[usize]) -> Option<Vec<LinearForm>> {
    let st = stratify(t);
    let ts = &st.tree;
    let sidx: Vec<usize> = st.origin.iter().map(|&c| idx[c]).collect();
    let params = ts.params();
    let atoms: Vec<Poly> = ts.atom_images().iter().map(|m| params.canonical(&Poly::monomial(m.clone()))).collect();
    let mut keys: BTreeMap<Monomial, usize> = BTreeMap::new();
    for a in &atoms {
        for (m, _) in a.terms() {
            let k = keys.len();
            keys.entry(m.clone()).or_insert(k);
        }
    }
    let n = t.n_leaves();
    let mut forms = Vec::with_capacity(n);
    for r in 0..n {
        let target = params.canonical(&Poly::monomial(first_edge_monomial(ts, &sidx, r, &|_| true)));
        let mut rows = keys.clone();
        for (m, _) in target.terms() {
            let k = rows.len();
            rows.entry(m.clone()).or_insert(k);
        }
        let mut a = vec![vec![Q::zero(); n]; rows.len()];
        for (s, p) in atoms.iter().enumerate() {
            for (m, c) in p.terms() {
                a[rows[m]][s] = c.clone();
            }
        }
        let mut b = vec![Q::zero(); rows.len()];
        for (m, c) in target.terms() {
            b[rows[m]] = c.clone();
        }
        forms.push(LinearForm::from_coefficients(solve(&a, &b)?));
    }
    Some(forms)
}

/// Preimages by the column operations of the construction: every
/// inclusion-index edge below an active vertex is replaced by all edges of its
/// stage, copying the rest of the path, and the brackets of the copies are
/// summed.
pub fn preimages_by_transport(t: &StagedTree, idx: &[usize], active: &dyn Fn(usize) -> bool) -> Option<Vec<LinearForm>> {
    fn go(t: &StagedTree, idx: &[usize], active: &dyn Fn(usize) -> bool, w: usize, path: &[usize], out: &mut Vec<usize>) -> Option<()> {
        let Some((&i, rest)) = path.split_first() else {
            out.push(w);
            return Some(());
        };
        let c = t.stage_of(w)?;
        if active(w) && i == idx[c] {
            for &u in t.children(w) {
                go(t, idx, active, u, rest, out)?;
            }
        } else {
            go(t, idx, active, *t.children(w).get(i)?, rest, out)?;
        }
        Some(())
    }
    let n = t.n_leaves();
    let mut forms = Vec::with_capacity(n);
    for r in 0..n {
        let path = crate::tree::ops::path_to(t, t.leaf(r));
        let mut ends = Vec::new();
        go(t, idx, active, t.root(), &path, &mut ends)?;
        let mut f = LinearForm::zero(n);
        for u in ends {
            for s in t.leaves_below(u) {
                f.set(s, f.get(s).add_ref(&Q::one()));
            }
        }
        forms.push(f);
    }
    Some(forms)
}

/// A certificate from the SIP construction, with the cut it was built on.
#[derive(Clone, Debug, Serialize)]
pub struct SipCertificate {
    /// Inclusion index (0-based) of every stage below the cut.
    pub sip_indices: BTreeMap<String, usize>,
    /// Frontier vertices of the balanced prefix; just the root for an SIP tree.
    pub frontier: Vec<String>,
    #[serde(flatten)]
    pub certificate: ToricCertificate,
}

/// The change of variables for an SIP tree, checked by the sandwich theorem
/// with the ideal of minors.
pub fn sip_change_of_variables(t: &StagedTree, oracle: &Oracle) -> Result<SipCertificate, SipError> {
    let idx = detect_sip(t).map_err(SipError::NotSip)?;
    let forms = preimages_by_solve(t, &idx).expect("first-edge monomials lie in the image for SIP trees");
    let certificate = verify_certificate(t, &forms, &ideal_of_minors(t), oracle)?;
    Ok(SipCertificate {
        sip_indices: index_map(t, &idx, 0..t.stages().len()),
        frontier: vec![t.name(t.root()).to_string()],
        certificate,
    })
}

/// Vertices at depth `depth` together with shallower leaves, in depth-first
/// order.
pub fn depth_cut(t: &StagedTree, depth: usize) -> Vec<usize> {
    (0..t.vertex_count()).filter(|&v| t.depth_of(v) == depth || (t.is_leaf(v) && t.depth_of(v) < depth)).collect()
}

/// The subtree above `frontier`, whose leaves are the frontier vertices.
pub fn prefix_tree(t: &StagedTree, frontier: &[usize]) -> Result<StagedTree, SipError> {
    let cut: HashSet<usize> = frontier.iter().copied().collect();
    fn go(t: &StagedTree, v: usize, cut: &HashSet<usize>) -> Node {
        if cut.contains(&v) {
            return Node::leaf().named(t.name(v));
        }
        Node {
            name: Some(t.name(v).to_string()),
            stage: t.stage_of(v),
            children: t.children(v).iter().map(|&w| go(t, w, cut)).collect(),
        }
    }
    StagedTree::build(t.stages().to_vec(), go(t, t.root(), &cut)).map_err(|e| SipError::InvalidCut(e.to_string()))
}

fn check_cut(t: &StagedTree, frontier: &[usize]) -> Result<Vec<usize>, SipError> {
    let mut f = frontier.to_vec();
    f.sort_by_key(|&v| t.leaves_below(v).start);
    let mut next = 0;
    for &v in &f {
        if v >= t.vertex_count() {
            return Err(SipError::InvalidCut(format!("no vertex {v}")));
        }
        let r = t.leaves_below(v);
        if r.start != next {
            return Err(SipError::InvalidCut(format!(
                "`{}` overlaps another frontier vertex or leaves a gap before it",
                t.name(v)
            )));
        }
        next = r.end;
    }
    if next != t.n_leaves() {
        return Err(SipError::InvalidCut("the frontier does not cover every leaf".into()));
    }
    Ok(f)
}

/// Checks the hypotheses of the hybrid construction for the prefix above
/// `frontier` and, when they hold, verifies the resulting change of variables.
pub fn hybrid_certificate(t: &StagedTree, frontier: &[usize], oracle: &Oracle) -> Result<SipCertificate, SipError> {
    let frontier = check_cut(t, frontier)?;
    let n = t.n_leaves();
    let mut below = vec![false; t.vertex_count()];
    let mut stack = frontier.clone();
    while let Some(v) = stack.pop() {
        below[v] = true;
        stack.extend_from_slice(t.children(v));
    }
    let upper: Vec<usize> = t.internal_vertices().filter(|&v| !below[v]).collect();
    let lower: Vec<usize> = t.internal_vertices().filter(|&v| below[v]).collect();
    let upper_stages: HashMap<usize, usize> = upper.iter().map(|&v| (t.stage_of(v).expect("internal"), v)).collect();
    let mut lower_stages = Vec::new();
    for &v in &lower {
        let c = t.stage_of(v).expect("internal");
        if let Some(&u) = upper_stages.get(&c) {
            return Err(SipError::SharedStage {
                stage: t.stage(c).id.clone(),
                above: t.name(u).to_string(),
                below: t.name(v).to_string(),
            });
        }
        if !lower_stages.contains(&c) {
            lower_stages.push(c);
        }
    }
    lower_stages.sort_unstable();

    let mut generators = Vec::new();
    if !upper.is_empty() {
        let s = prefix_tree(t, &frontier)?;
        if let Some(w) = balance_violation(&s) {
            return Err(SipError::PrefixNotBalanced(w));
        }
        let brackets: Vec<Poly> = frontier.iter().map(|&v| t.p_bracket(v).to_poly()).collect();
        for g in quadratic_gb(&s)?.generators() {
            generators.push(g.substitute(&brackets));
        }
    }
    let mut idx = vec![0; t.stages().len()];
    for &c in &lower_stages {
        idx[c] = stage_index(t, c).map_err(SipError::NotSip)?;
        generators.extend(stage_matrix(t, c).minors());
    }
    let forms = preimages_by_transport(t, &idx, &|v| below[v]).expect("inclusion holds below the cut");
    debug_assert_eq!(forms.len(), n);
    let certificate = verify_certificate(t, &forms, &generators, oracle)?;
    Ok(SipCertificate {
        sip_indices: index_map(t, &idx, lower_stages),
        frontier: frontier.iter().map(|&v| t.name(v).to_string()).collect(),
        certificate,
    })
}

/// One tried depth cut and its outcome.
#[derive(Clone, Debug, Serialize)]
pub struct CutAttempt {
    pub depth: usize,
    pub outcome: String,
}

/// Result of trying every depth cut from the root down.
#[derive(Clone, Debug, Serialize)]
pub struct HybridSearch {
    pub attempts: Vec<CutAttempt>,
    pub certificate: Option<SipCertificate>,
}

/// Tries the cuts at depth `0..=d` in order and stops at the first verified
/// certificate. Budget errors end the search.
pub fn hybrid_search(t: &StagedTree, oracle: &Oracle) -> Result<HybridSearch, SipError> {
    let mut attempts = Vec::new();
    for depth in 0..=t.depth() {
        let cut = depth_cut(t, depth);
        match hybrid_certificate(t, &cut, oracle) {
            Ok(c) if c.certificate.verified => {
                attempts.push(CutAttempt { depth, outcome: "verified".into() });
                return Ok(HybridSearch { attempts, certificate: Some(c) });
            }
            Ok(c) => {
                let f = c.certificate.failure.as_ref().map_or("unverified".into(), |f| format!("clause {} failed", f.roman()));
                attempts.push(CutAttempt { depth, outcome: f });
            }
            Err(e) if e.is_hypothesis() => attempts.push(CutAttempt { depth, outcome: e.to_string() }),
            Err(e) => return Err(e),
        }
    }
    Ok(HybridSearch { attempts, certificate: None })
}
