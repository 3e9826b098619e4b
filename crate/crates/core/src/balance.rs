//! Balancedness, the colour-structure normal form, degree-one relations and
//! the quadratic Gröbner bases of balanced trees.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::Serialize;

use crate::algebra::{
    is_groebner_basis, BudgetExceeded, GroebnerBasis, Monomial, MonomialOrder, VarSet,
};
use crate::kernel::{canonical_atoms, minimal_generator_degrees, KernelBudget, KernelError, Oracle};
use crate::tree::{homogenize, multiplicity, swap, StagedTree, TreeError};
use crate::{Poly, Q};

/// A failing instance of `t(u_i) t(v_j) = t(u_j) t(v_i)`, with 0-based `i < j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub stage: String,
    pub u: String,
    pub v: String,
    pub i: usize,
    pub j: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum BalanceError {
    #[error("tree is not balanced: {}", describe(.0))]
    NotBalanced(Violation),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
    #[error("colour structure could not be reached at `{0}`")]
    Stuck(String),
}

fn describe(w: &Violation) -> String {
    format!("stage {} at ({}, {}) with i={}, j={}", w.stage, w.u, w.v, w.i + 1, w.j + 1)
}

/// Checks the balance identity for every pair of same-stage vertices,
/// including a vertex with itself, as an exact polynomial identity.
pub fn balance_violation(t: &StagedTree) -> Option<Violation> {
    let tp = t.subtree_polynomials();
    for c in 0..t.stages().len() {
        let vs = t.vertices_of_stage(c);
        for (a, &u) in vs.iter().enumerate() {
            for &v in &vs[a + 1..] {
                let (uc, vc) = (t.children(u), t.children(v));
                for i in 0..uc.len() {
                    for j in (i + 1)..uc.len() {
                        if &tp[uc[i]] * &tp[vc[j]] != &tp[uc[j]] * &tp[vc[i]] {
                            return Some(Violation {
                                stage: t.stage(c).id.clone(),
                                u: t.name(u).to_string(),
                                v: t.name(v).to_string(),
                                i,
                                j,
                            });
                        }
                    }
                }
            }
        }
    }
    None
}

pub fn is_balanced(t: &StagedTree) -> bool {
    balance_violation(t).is_none()
}

fn require_balanced(t: &StagedTree) -> Result<(), BalanceError> {
    match balance_violation(t) {
        Some(w) => Err(BalanceError::NotBalanced(w)),
        None => Ok(()),
    }
}

/// Vertex reached from the root along a child-index path.
pub(crate) fn vertex_at(t: &StagedTree, path: &[usize]) -> usize {
    path.iter().fold(t.root(), |v, &i| t.children(v)[i])
}

/// What the children of an already visited stage were given.
#[derive(Clone, Debug)]
enum Seen {
    PerChild(Vec<usize>),
    Same,
}

/// Rewrites a balanced tree by swaps so that any two same-stage vertices
/// either have pairwise same-stage children or both have monochromatic
/// children. The tree is homogenised first.
pub fn colour_normal_form(t: &StagedTree) -> Result<StagedTree, BalanceError> {
    require_balanced(t)?;
    let mut cur = homogenize(t);
    let d = cur.depth();
    let mut seen: HashMap<usize, Seen> = HashMap::new();
    for level in 0..d.saturating_sub(1) {
        let paths: Vec<Vec<usize>> = (0..cur.vertex_count())
            .filter(|&v| cur.depth_of(v) == level)
            .map(|v| crate::tree::ops::path_to(&cur, v))
            .collect();
        for path in paths {
            let v = vertex_at(&cur, &path);
            let Some(colour) = cur.stage_of(v) else { continue };
            let k = cur.children(v).len();
            if k < 2 {
                continue;
            }
            let targets: Vec<usize> = match seen.get(&colour) {
                Some(Seen::PerChild(cs)) => cs.clone(),
                Some(Seen::Same) => vec![same_colour(&cur, v)?; k],
                None => match distinguishing_colours(&cur, v) {
                    Some(cs) => {
                        seen.insert(colour, Seen::PerChild(cs.clone()));
                        cs
                    }
                    None => {
                        seen.insert(colour, Seen::Same);
                        vec![same_colour(&cur, v)?; k]
                    }
                },
            };
            for (i, &c) in targets.iter().enumerate() {
                let vi = cur.children(vertex_at(&cur, &path))[i];
                if cur.stage_of(vi) == Some(c) {
                    continue;
                }
                if multiplicity(&cur, c, vi) == 0 {
                    return Err(BalanceError::Stuck(cur.name(vi).to_string()));
                }
                cur = swap(&cur, vi, c)?;
            }
        }
    }
    Ok(cur)
}

/// For each child `v_i` a colour `c` with `mult_c(v_i) > mult_c(v_j)` for
/// some `j`, preferring the child's own stage; `None` if some child has none.
fn distinguishing_colours(t: &StagedTree, v: usize) -> Option<Vec<usize>> {
    let kids = t.children(v);
    let ns = t.stages().len();
    let mult: Vec<Vec<usize>> = kids.iter().map(|&w| (0..ns).map(|c| multiplicity(t, c, w)).collect()).collect();
    let mut out = Vec::new();
    for (i, &w) in kids.iter().enumerate() {
        let ok = |c: usize| (0..kids.len()).any(|j| mult[i][c] > mult[j][c]);
        let own = t.stage_of(w).filter(|&c| ok(c));
        out.push(own.or_else(|| (0..ns).find(|&c| ok(c)))?);
    }
    Some(out)
}

/// A colour present on every path below every child of `v`, preferring the
/// stage of the first child.
fn same_colour(t: &StagedTree, v: usize) -> Result<usize, BalanceError> {
    let kids = t.children(v);
    let all = |c: usize| kids.iter().all(|&w| multiplicity(t, c, w) > 0);
    kids.iter()
        .filter_map(|&w| t.stage_of(w))
        .chain(0..t.stages().len())
        .find(|&c| all(c))
        .ok_or_else(|| BalanceError::Stuck(t.name(v).to_string()))
}

/// Checks the colour structure on every same-stage pair with more than one
/// child; returns the first pair violating both conditions.
pub fn audit_colour_structure(t: &StagedTree) -> Result<(), (String, String)> {
    let mono = |v: usize| {
        let k = t.children(v);
        k.iter().all(|&w| t.stage_of(w) == t.stage_of(k[0]))
    };
    for (_, u, v) in t.stage_pairs() {
        if t.children(u).len() < 2 {
            continue;
        }
        let aligned = t.children(u).iter().zip(t.children(v)).all(|(&a, &b)| t.stage_of(a) == t.stage_of(b));
        if !aligned && !(mono(u) && mono(v)) {
            return Err((t.name(u).to_string(), t.name(v).to_string()));
        }
    }
    Ok(())
}

/// Leaf pairs `(r, s)`, 0-based with `r < s`, whose images agree modulo the
/// sum-to-z relations.
pub fn degree_one_pairs(t: &StagedTree) -> Vec<(usize, usize)> {
    let atoms = canonical_atoms(t);
    let mut out = Vec::new();
    for r in 0..atoms.len() {
        for s in (r + 1)..atoms.len() {
            if atoms[r] == atoms[s] {
                out.push((r, s));
            }
        }
    }
    out
}

fn normalize(p: Poly) -> Poly {
    p.sign_normalized(&MonomialOrder::DegRevLex)
}

fn push_unique(out: &mut Vec<Poly>, seen: &mut HashSet<Poly>, p: Poly) {
    if !p.is_zero() && seen.insert(p.clone()) {
        out.push(p);
    }
}

/// The binomials of degree one and two of a balanced tree.
#[derive(Clone, Debug)]
pub struct QuadraticBasis {
    pub linear: Vec<Poly>,
    pub quadratic: Vec<Poly>,
    /// Whether every S-pair reduces to zero under DegRevLex.
    pub is_groebner: bool,
    pub nvars: usize,
}

impl QuadraticBasis {
    pub fn generators(&self) -> Vec<Poly> {
        self.linear.iter().chain(&self.quadratic).cloned().collect()
    }

    pub fn basis(&self) -> GroebnerBasis<Q> {
        GroebnerBasis {
            order: MonomialOrder::DegRevLex,
            generators: self.generators(),
            reduced: false,
            nvars: self.nvars,
        }
    }
}

/// Expands `(m_u θ_i t(u_i))(m_v θ_j t(v_j)) = (m_u θ_j t(u_j))(m_v θ_i t(v_i))`
/// over all same-stage pairs and `i < j`. A left product `p_r1 p_r2` is paired
/// with the right products of equal image whose `u`-side factor carries the
/// same term below its child as `p_r1`, or with all of them when none does.
/// Binomials with a common variable are multiples of a linear element and
/// are left out.
pub fn quadratic_gb(t: &StagedTree) -> Result<QuadraticBasis, BalanceError> {
    require_balanced(t)?;
    let n = t.n_leaves();
    let atoms = t.atom_images();
    let mut seen = HashSet::new();
    let mut linear = Vec::new();
    for (r, s) in degree_one_pairs(t) {
        push_unique(&mut linear, &mut seen, normalize(Poly::var(n, r) - Poly::var(n, s)));
    }
    let term = |w: usize, r: usize| t.path_monomial(w).quotient_of(&atoms[r]).expect("path prefix divides");
    let mut quadratic = Vec::new();
    let pvar = |r: usize| Poly::var(n, r);
    for (_, u, v) in t.stage_pairs() {
        let (uc, vc) = (t.children(u), t.children(v));
        for i in 0..uc.len() {
            for j in (i + 1)..uc.len() {
                let mut right: BTreeMap<Monomial, Vec<(usize, usize)>> = BTreeMap::new();
                for s1 in t.leaves_below(uc[j]) {
                    for s2 in t.leaves_below(vc[i]) {
                        right.entry(atoms[s1].mul(&atoms[s2])).or_default().push((s1, s2));
                    }
                }
                for r1 in t.leaves_below(uc[i]) {
                    for r2 in t.leaves_below(vc[j]) {
                        let Some(cands) = right.get(&atoms[r1].mul(&atoms[r2])) else { continue };
                        let own = term(uc[i], r1);
                        let aligned: Vec<&(usize, usize)> =
                            cands.iter().filter(|(s1, _)| term(uc[j], *s1) == own).collect();
                        let chosen = if aligned.is_empty() { cands.iter().collect() } else { aligned };
                        for &(s1, s2) in chosen {
                            if r1 == s1 || r1 == s2 || r2 == s1 || r2 == s2 {
                                continue;
                            }
                            let b = &pvar(r1) * &pvar(r2) - &pvar(s1) * &pvar(s2);
                            push_unique(&mut quadratic, &mut seen, normalize(b));
                        }
                    }
                }
            }
        }
    }
    let all: Vec<Poly> = linear.iter().chain(&quadratic).cloned().collect();
    let is_groebner = is_groebner_basis(&all, &MonomialOrder::DegRevLex);
    Ok(QuadraticBasis { linear, quadratic, is_groebner, nvars: n })
}

/// Quadratic basis in the variables left after dropping every `p_r` whose
/// image equals that of some later `p_s`.
#[derive(Clone, Debug)]
pub struct ReducedQuadratic {
    /// 0-based indices of the kept p-variables.
    pub kept: Vec<usize>,
    pub vars: VarSet,
    pub basis: GroebnerBasis<Q>,
    pub is_groebner: bool,
}

/// The quadratic elements of [`quadratic_gb`] rewritten in the kept variables.
pub fn quadratic_gb_reduced(t: &StagedTree) -> Result<ReducedQuadratic, BalanceError> {
    let full = quadratic_gb(t)?;
    let n = t.n_leaves();
    // representative: the largest index with the same image
    let mut rep: Vec<usize> = (0..n).collect();
    for (r, s) in degree_one_pairs(t) {
        rep[r] = rep[r].max(s);
    }
    let kept: Vec<usize> = (0..n).filter(|&r| rep[r] == r).collect();
    let m = kept.len();
    let mut pos = vec![0; n];
    for (k, &r) in kept.iter().enumerate() {
        pos[r] = k;
    }
    let images: Vec<Poly> = (0..n).map(|r| Poly::var(m, pos[rep[r]])).collect();
    let mut seen = HashSet::new();
    let mut generators = Vec::new();
    for q in &full.quadratic {
        let img = normalize(q.substitute(&images));
        if img.terms().all(|(a, _)| img.terms().all(|(b, _)| a == b || a.coprime(b))) {
            push_unique(&mut generators, &mut seen, img);
        }
    }
    let is_groebner = is_groebner_basis(&generators, &MonomialOrder::DegRevLex);
    let basis = GroebnerBasis { order: MonomialOrder::DegRevLex, generators, reduced: false, nvars: m };
    let names: Vec<String> = kept.iter().map(|r| format!("p{}", r + 1)).collect();
    let vars = VarSet::new(names).expect("distinct names");
    Ok(ReducedQuadratic { kept, vars, basis, is_groebner })
}

/// Outcome of the degree-two sufficient condition for Koszulness.
#[derive(Clone, Debug, Serialize)]
pub struct KoszulCheck {
    /// True when the kernel has a Gröbner basis of degree at most two.
    pub sufficient: bool,
    /// Minimal generator degrees, attached when the check is inconclusive.
    pub generator_degrees: Option<BTreeMap<u32, usize>>,
}

/// Tests the sufficient condition on the reduced DegRevLex kernel basis.
pub fn koszul_sufficient(t: &StagedTree, oracle: &Oracle) -> Result<KoszulCheck, KernelError> {
    let Some(gb) = oracle.kernel(t)? else {
        return Ok(KoszulCheck { sufficient: false, generator_degrees: None });
    };
    if gb.generators.is_empty() || gb.max_degree() <= 2 {
        return Ok(KoszulCheck { sufficient: true, generator_degrees: None });
    }
    let degrees = minimal_generator_degrees(&gb, &oracle.budget.gb)?;
    Ok(KoszulCheck { sufficient: false, generator_degrees: degrees })
}

/// Budget-only variant of [`koszul_sufficient`].
pub fn koszul_with_budget(t: &StagedTree, budget: &KernelBudget) -> Result<KoszulCheck, KernelError> {
    koszul_sufficient(t, &Oracle::new(budget.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::format_polynomial;
    use crate::tree::parse_tree;

    const COIN: &str = "stage c : t1 t2 ;\nvertex r stage c children a l3 ;\nvertex a stage c children l1 l2 ;\nvertex l1 leaf ;\nvertex l2 leaf ;\nvertex l3 leaf ;\nroot r ;";

    #[test]
    fn coin_flip_is_not_balanced() {
        let t = parse_tree(COIN).unwrap();
        let w = balance_violation(&t).unwrap();
        assert_eq!((w.u.as_str(), w.v.as_str(), w.i, w.j), ("r", "a", 0, 1));
        assert!(degree_one_pairs(&t).is_empty());
        assert!(matches!(quadratic_gb(&t), Err(BalanceError::NotBalanced(_))));
        assert!(colour_normal_form(&t).is_err());
    }

    #[test]
    fn singleton_stages() {
        let t = parse_tree("stage a : x y ;\nstage b : s t ;\nvertex r stage a children u l3 ;\nvertex u stage b children l1 l2 ;\nvertex l1 leaf ;\nvertex l2 leaf ;\nvertex l3 leaf ;\nroot r ;").unwrap();
        assert!(is_balanced(&t));
        let q = quadratic_gb(&t).unwrap();
        assert!(q.generators().is_empty() && q.is_groebner);
        let h = colour_normal_form(&t).unwrap();
        assert_eq!(h, homogenize(&t));
    }

    #[test]
    fn binary_veronese() {
        let t = parse_tree("stage c : a b ;\nvertex r stage c children u w ;\nvertex u stage c children l1 l2 ;\nvertex w stage c children l3 l4 ;\nvertex l1 leaf ;\nvertex l2 leaf ;\nvertex l3 leaf ;\nvertex l4 leaf ;\nroot r ;").unwrap();
        assert_eq!(degree_one_pairs(&t), [(1, 2)]);
        let q = quadratic_gb(&t).unwrap();
        assert!(q.is_groebner);
        let v = t.p_vars();
        let lin: Vec<String> = q.linear.iter().map(|p| format_polynomial(p, &v)).collect();
        assert_eq!(lin, ["p2 - p3"]);
        assert!(colour_normal_form(&t).unwrap() == t);
        let r = quadratic_gb_reduced(&t).unwrap();
        assert_eq!(r.kept, [0, 2, 3]);
        let shown: Vec<String> = r.basis.generators.iter().map(|p| format_polynomial(p, &r.vars)).collect();
        assert_eq!(shown, ["p3^2 - p1*p4"]);
    }
}
