//! One-stage trees: Veronese coordinates, full-Veronese detection, the binary
//! certificate, linear relations and bounded enumeration of all one-stage
//! trees of a given depth.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use serde::Serialize;

use crate::algebra::{null_space, rank, rref, solve, Monomial};
use crate::kernel::{canonical_atoms, KernelError, Oracle};
use crate::minors::{monomial_map_check, p_in_q};
use crate::tree::{LinearForm, Node, Stage, StagedTree};
use crate::Q;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OneStageError {
    #[error("the tree has {0} stages; a one-stage tree is required")]
    NotOneStage(usize),
    #[error("the tree has {0} labels per vertex; a binary tree is required")]
    NotBinary(usize),
    #[error("parameters differ: (k, d) = {0:?} against {1:?}")]
    Mismatch((usize, usize), (usize, usize)),
    #[error("enumeration of (k, d) = ({k}, {d}) would produce {count} trees, above the limit {limit}")]
    TooMany { k: usize, d: usize, count: u128, limit: u128 },
}

/// Shape flags of a tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OneStageClass {
    pub is_one_stage: bool,
    /// Exactly one internal vertex at every depth `0..d`.
    pub is_caterpillar: bool,
    /// Every leaf at depth `d`.
    pub is_maximal: bool,
    /// Labels of the (first) stage.
    pub k: usize,
    pub d: usize,
}

pub fn classify_onestage(t: &StagedTree) -> OneStageClass {
    let d = t.depth();
    let mut per_depth = vec![0usize; d];
    for v in t.internal_vertices() {
        per_depth[t.depth_of(v)] += 1;
    }
    OneStageClass {
        is_one_stage: t.stages().len() == 1,
        is_caterpillar: per_depth.iter().all(|&c| c == 1),
        is_maximal: t.is_uniform(),
        k: t.stage(0).arity(),
        d,
    }
}

fn one_stage(t: &StagedTree) -> Result<OneStageClass, OneStageError> {
    let c = classify_onestage(t);
    if c.is_one_stage {
        Ok(c)
    } else {
        Err(OneStageError::NotOneStage(t.stages().len()))
    }
}

/// Balancedness of a one-stage tree read off its shape.
pub fn balanced_onestage(t: &StagedTree) -> Result<bool, OneStageError> {
    Ok(one_stage(t)?.is_maximal)
}

/// Whether some root-to-leaf path has an internal vertex at every depth
/// `0..d`, so that cutting branches leaves a caterpillar of depth `d`.
pub fn contains_caterpillar(t: &StagedTree) -> bool {
    let d = t.depth();
    (0..t.n_leaves()).any(|r| t.depth_of(t.leaf(r)) == d)
}

/// Degree-`d` monomials in `k` variables as exponent vectors, with the
/// exponent of the first variable decreasing first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VeroneseBasis {
    pub k: usize,
    pub d: usize,
    pub monomials: Vec<Vec<u16>>,
    #[serde(skip)]
    index: HashMap<Vec<u16>, usize>,
}

impl VeroneseBasis {
    pub fn new(k: usize, d: usize) -> Self {
        fn go(k: usize, left: u16, cur: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
            if cur.len() + 1 == k {
                cur.push(left);
                out.push(cur.clone());
                cur.pop();
                return;
            }
            for e in (0..=left).rev() {
                cur.push(e);
                go(k, left - e, cur, out);
                cur.pop();
            }
        }
        let mut monomials = Vec::new();
        go(k, d as u16, &mut Vec::new(), &mut monomials);
        let index = monomials.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        VeroneseBasis { k, d, monomials, index }
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn position(&self, exps: &[u16]) -> Option<usize> {
        self.index.get(exps).copied()
    }

    /// Coordinates of `theta^e z^m` after `z := theta_1 + ... + theta_k`.
    pub fn expand(&self, e: &[u16], m: u16) -> Vec<u64> {
        let mut out = vec![0u64; self.len()];
        let mut part = vec![0u16; self.k];
        // walks the splits of z^m, carrying the product of binomials
        fn go(b: &VeroneseBasis, e: &[u16], i: usize, left: u16, coef: u64, part: &mut [u16], out: &mut [u64]) {
            if i + 1 == b.k {
                part[i] = left;
                let key: Vec<u16> = e.iter().zip(part.iter()).map(|(a, b)| a + b).collect();
                out[b.index[&key]] += coef;
                return;
            }
            for a in 0..=left {
                part[i] = a;
                go(b, e, i + 1, left - a, coef * binomial(left as u64, a as u64), part, out);
            }
        }
        go(self, e, 0, m, 1, &mut part, &mut out);
        out
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Label exponents and `z` exponent of every atom of a one-stage tree.
fn atom_exponents(t: &StagedTree) -> Vec<(Vec<u16>, u16)> {
    let p = t.params();
    let k = t.stage(0).arity();
    t.atom_images()
        .iter()
        .map(|m| ((0..k).map(|j| m.get(p.label_var(0, j))).collect(), m.get(p.z())))
        .collect()
}

/// Coordinates of every atom image in the degree-`d` Veronese basis.
#[derive(Clone, Debug, Serialize)]
pub struct DegreeSpan {
    pub basis: VeroneseBasis,
    /// One row per leaf.
    pub rows: Vec<Vec<u64>>,
}

impl DegreeSpan {
    fn matrix(&self) -> Vec<Vec<Q>> {
        // columns are leaves
        (0..self.basis.len())
            .map(|i| self.rows.iter().map(|r| Q::from_integer(r[i] as i64)).collect())
            .collect()
    }

    pub fn rank(&self) -> usize {
        rank(&self.matrix())
    }
}

pub fn degree_d_span(t: &StagedTree) -> Result<DegreeSpan, OneStageError> {
    let c = one_stage(t)?;
    let basis = VeroneseBasis::new(c.k, c.d);
    let rows = atom_exponents(t).iter().map(|(e, m)| basis.expand(e, *m)).collect();
    Ok(DegreeSpan { basis, rows })
}

/// Whether the atom images span every degree-`d` monomial.
pub fn is_full_veronese(t: &StagedTree) -> Result<bool, OneStageError> {
    let s = degree_d_span(t)?;
    Ok(s.rank() == s.basis.len())
}

/// Why a Veronese certificate failed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum VeroneseFailure {
    /// The span misses some degree-`d` monomial.
    NotFull { rank: usize, expected: usize },
    /// The forms are not `n` independent forms.
    Dependent { rank: usize, expected: usize },
    /// A form does not map to a single degree-`d` monomial.
    NotMonomial { form: usize },
}

/// Forms `q_i` mapping to monomials of the Veronese basis. Since a one-stage
/// parameter ring modulo the sum-to-z relation is the polynomial ring in the
/// labels, such forms make the kernel the kernel of a monomial map.
#[derive(Clone, Debug, Serialize)]
pub struct VeroneseCertificate {
    pub k: usize,
    pub d: usize,
    pub span_rank: usize,
    pub forms: Vec<LinearForm>,
    /// Label exponents of the image of each form.
    pub images: Vec<Vec<u16>>,
    pub verified: bool,
    pub failure: Option<VeroneseFailure>,
    /// Whether the kernel of the monomial map agrees with the oracle.
    pub oracle_agrees: Option<bool>,
}

/// Checks that `forms` are `n` independent forms, each mapping to one
/// monomial of the Veronese basis, and returns those monomials.
pub fn check_veronese_forms(t: &StagedTree, forms: &[LinearForm]) -> Result<Result<Vec<Vec<u16>>, VeroneseFailure>, OneStageError> {
    let span = degree_d_span(t)?;
    let n = t.n_leaves();
    let mat: Vec<Vec<Q>> = forms.iter().map(|f| f.coefficients().to_vec()).collect();
    let r = if forms.iter().all(|f| f.len() == n) { rank(&mat) } else { 0 };
    if forms.len() != n || r != n {
        return Ok(Err(VeroneseFailure::Dependent { rank: r, expected: n }));
    }
    let mut images = Vec::with_capacity(n);
    for (i, f) in forms.iter().enumerate() {
        let mut img = vec![Q::zero(); span.basis.len()];
        for (s, c) in f.iter() {
            for (j, &x) in span.rows[s].iter().enumerate() {
                if x != 0 {
                    img[j] = img[j].add_ref(&c.mul_ref(&Q::from_integer(x as i64)));
                }
            }
        }
        let support: Vec<usize> = (0..img.len()).filter(|&j| !img[j].is_zero()).collect();
        if support.len() != 1 || !img[support[0]].is_one() {
            return Ok(Err(VeroneseFailure::NotMonomial { form: i }));
        }
        images.push(span.basis.monomials[support[0]].clone());
    }
    Ok(Ok(images))
}

/// Preimages of the Veronese basis, completed to `n` forms by adding null
/// space vectors to the sparsest preimage.
pub fn veronese_certificate(t: &StagedTree) -> Result<VeroneseCertificate, OneStageError> {
    let c = one_stage(t)?;
    let span = degree_d_span(t)?;
    let n = t.n_leaves();
    let nb = span.basis.len();
    let a = span.matrix();
    let r = rank(&a);
    let mut cert = VeroneseCertificate {
        k: c.k,
        d: c.d,
        span_rank: r,
        forms: Vec::new(),
        images: Vec::new(),
        verified: false,
        failure: None,
        oracle_agrees: None,
    };
    if r != nb {
        cert.failure = Some(VeroneseFailure::NotFull { rank: r, expected: nb });
        return Ok(cert);
    }
    // one reduction of [A | I] gives every preimage at once
    let mut aug: Vec<Vec<Q>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut row = row.clone();
            row.extend((0..nb).map(|j| if i == j { Q::one() } else { Q::zero() }));
            row
        })
        .collect();
    let pivots = rref(&mut aug);
    let mut pre: Vec<LinearForm> = Vec::with_capacity(nb);
    for j in 0..nb {
        let mut x = vec![Q::zero(); n];
        for (row, &p) in pivots.iter().enumerate() {
            x[p] = aug[row][n + j].clone();
        }
        pre.push(LinearForm::from_coefficients(x));
    }
    let mut forms = pre.clone();
    let mut images: Vec<usize> = (0..nb).collect();
    for y in null_space(&a, n) {
        let y = LinearForm::from_coefficients(y);
        let (j, f) = (0..nb)
            .map(|j| (j, pre[j].add(&y)))
            .min_by_key(|(_, f)| f.support().len())
            .expect("nonempty basis");
        forms.push(f);
        images.push(j);
    }
    cert.forms = forms;
    match check_veronese_forms(t, &cert.forms)? {
        Ok(imgs) => {
            debug_assert!(imgs.iter().zip(&images).all(|(m, &j)| *m == span.basis.monomials[j]));
            cert.images = imgs;
            cert.verified = true;
        }
        Err(f) => cert.failure = Some(f),
    }
    Ok(cert)
}

/// The binary case: every tree in `T_{2,d}` has the full Veronese span.
pub fn binary_onestage_certificate(t: &StagedTree) -> Result<VeroneseCertificate, OneStageError> {
    let c = one_stage(t)?;
    if c.k != 2 {
        return Err(OneStageError::NotBinary(c.k));
    }
    veronese_certificate(t)
}

/// Compares the kernel of the monomial map of a verified certificate with the
/// oracle kernel.
pub fn veronese_cross_check(t: &StagedTree, cert: &mut VeroneseCertificate, oracle: &Oracle) -> Result<(), KernelError> {
    if !cert.verified {
        return Ok(());
    }
    let p = t.params();
    let images: Vec<(Q, Monomial)> = cert
        .images
        .iter()
        .map(|e| {
            let mut m = Monomial::one(p.nvars());
            for (j, &x) in e.iter().enumerate() {
                m.set(p.label_var(0, j), x);
            }
            (Q::one(), m)
        })
        .collect();
    let sub = p_in_q(&cert.forms).expect("verified forms are independent");
    cert.oracle_agrees = monomial_map_check(t, &images, &sub, oracle)?.1;
    Ok(())
}

/// Coefficients expressing the monomial with exponents `exps` through the atom
/// images, when it lies in their span.
pub fn in_degree_span(t: &StagedTree, exps: &[u16]) -> Result<Option<LinearForm>, OneStageError> {
    let span = degree_d_span(t)?;
    let Some(pos) = span.basis.position(exps) else {
        return Ok(None);
    };
    let target: Vec<Q> = (0..span.basis.len()).map(|i| if i == pos { Q::one() } else { Q::zero() }).collect();
    Ok(solve(&span.matrix(), &target).map(LinearForm::from_coefficients))
}

/// Whether the two trees have the same degree-`d` span, after renaming label
/// `j` of `b` to label `perm[j]` when a permutation is given.
pub fn algebra_equality(a: &StagedTree, b: &StagedTree, perm: Option<&[usize]>) -> Result<bool, OneStageError> {
    let (ca, cb) = (one_stage(a)?, one_stage(b)?);
    if (ca.k, ca.d) != (cb.k, cb.d) {
        return Err(OneStageError::Mismatch((ca.k, ca.d), (cb.k, cb.d)));
    }
    let sa = degree_d_span(a)?;
    let basis = &sa.basis;
    let rows_b: Vec<Vec<u64>> = atom_exponents(b)
        .iter()
        .map(|(e, m)| {
            let e: Vec<u16> = match perm {
                None => e.clone(),
                Some(p) => {
                    let mut out = vec![0; e.len()];
                    for (j, &x) in e.iter().enumerate() {
                        out[p[j]] = x;
                    }
                    out
                }
            };
            basis.expand(&e, *m)
        })
        .collect();
    let sb = DegreeSpan { basis: basis.clone(), rows: rows_b };
    let both = DegreeSpan { basis: basis.clone(), rows: sa.rows.iter().chain(&sb.rows).cloned().collect() };
    let (ra, rb, rab) = (sa.rank(), sb.rank(), both.rank());
    Ok(ra == rab && rb == rab)
}

/// A basis of the linear forms in the kernel: the null space of the canonical
/// coordinates of the atom images.
pub fn linear_relations(t: &StagedTree) -> Vec<LinearForm> {
    let atoms = canonical_atoms(t);
    let mut rows: BTreeMap<Monomial, usize> = BTreeMap::new();
    for a in &atoms {
        for (m, _) in a.terms() {
            let k = rows.len();
            rows.entry(m.clone()).or_insert(k);
        }
    }
    let n = atoms.len();
    let mut mat = vec![vec![Q::zero(); n]; rows.len()];
    for (r, a) in atoms.iter().enumerate() {
        for (m, c) in a.terms() {
            mat[rows[m]][r] = c.clone();
        }
    }
    null_space(&mat, n).into_iter().map(LinearForm::from_coefficients).collect()
}

/// Shape of a one-stage tree in preorder: `true` for an internal vertex,
/// `false` for a leaf.
pub type Shape = Vec<bool>;

/// Number of one-stage trees with `k` labels and depth exactly `d`.
pub fn count_onestage(k: usize, d: usize) -> u128 {
    let mut upto = vec![1u128];
    for i in 1..=d {
        upto.push(1 + upto[i - 1].pow(k as u32));
    }
    if d == 0 {
        1
    } else {
        upto[d] - upto[d - 1]
    }
}

/// Largest enumeration accepted by [`enumerate_shapes`].
pub const ENUMERATION_LIMIT: u128 = 1_000_000;

/// All shapes of depth exactly `d` with `k` labels, in increasing preorder
/// with leaf before internal. Under `modulo_permutation` only the
/// lexicographically smallest member of each orbit of label permutations is
/// kept.
pub fn enumerate_shapes(k: usize, d: usize, modulo_permutation: bool) -> Result<Vec<Shape>, OneStageError> {
    let count = count_onestage(k, d);
    if count > ENUMERATION_LIMIT || d == 0 || k == 0 {
        return Err(OneStageError::TooMany { k, d, count, limit: ENUMERATION_LIMIT });
    }
    // by_depth[i]: shapes of depth exactly i
    let mut by_depth: Vec<Vec<Shape>> = vec![vec![vec![false]]];
    for depth in 1..=d {
        let mut out = Vec::new();
        let lower: Vec<&Shape> = by_depth.iter().flatten().collect();
        let depths: Vec<usize> = by_depth.iter().enumerate().flat_map(|(i, v)| std::iter::repeat(i).take(v.len())).collect();
        let mut tuple = vec![0usize; k];
        loop {
            let deepest = tuple.iter().map(|&i| depths[i]).max().unwrap_or(0);
            if deepest + 1 == depth {
                let mut s = vec![true];
                for &i in &tuple {
                    s.extend_from_slice(lower[i]);
                }
                out.push(s);
            }
            // odometer over k-tuples, last position fastest
            let mut pos = k;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                tuple[pos] += 1;
                if tuple[pos] < lower.len() {
                    break;
                }
                tuple[pos] = 0;
                if pos == 0 {
                    pos = usize::MAX;
                    break;
                }
            }
            if pos == usize::MAX {
                break;
            }
        }
        by_depth.push(out);
    }
    let mut all = by_depth.pop().expect("depth d computed");
    all.sort();
    if modulo_permutation {
        let perms = permutations(k);
        all.retain(|s| perms.iter().all(|p| permute_shape(s, k, p) >= *s));
    }
    Ok(all)
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// Applies a label permutation at every vertex: child `j` moves to `p[j]`.
pub fn permute_shape(s: &[bool], k: usize, p: &[usize]) -> Shape {
    fn parse(s: &[bool], i: &mut usize, k: usize) -> Node {
        let internal = s[*i];
        *i += 1;
        if internal {
            Node::internal(0, (0..k).map(|_| parse(s, i, k)).collect())
        } else {
            Node::leaf()
        }
    }
    fn emit(n: &Node, p: &[usize], out: &mut Shape) {
        out.push(!n.is_leaf());
        if n.is_leaf() {
            return;
        }
        let mut slots: Vec<Option<&Node>> = vec![None; p.len()];
        for (j, c) in n.children.iter().enumerate() {
            slots[p[j]] = Some(c);
        }
        for c in slots.into_iter().flatten() {
            emit(c, p, out);
        }
    }
    let node = parse(s, &mut 0, k);
    let mut out = Vec::with_capacity(s.len());
    emit(&node, p, &mut out);
    out
}

/// Labels `th1..thk` in a single stage `s`.
pub fn shape_to_tree(s: &[bool], k: usize) -> StagedTree {
    fn parse(s: &[bool], i: &mut usize, k: usize) -> Node {
        let internal = s[*i];
        *i += 1;
        if internal {
            Node::internal(0, (0..k).map(|_| parse(s, i, k)).collect())
        } else {
            Node::leaf()
        }
    }
    let stage = Stage::new("s", (1..=k).map(|j| format!("th{j}")));
    StagedTree::build(vec![stage], parse(s, &mut 0, k)).expect("enumerated shapes are valid")
}

/// Preorder shape of a one-stage tree.
pub fn tree_shape(t: &StagedTree) -> Shape {
    (0..t.vertex_count()).map(|v| !t.is_leaf(v)).collect()
}

/// All one-stage trees of depth exactly `d`, built from [`enumerate_shapes`].
pub fn enumerate_onestage(k: usize, d: usize, modulo_permutation: bool) -> Result<Vec<StagedTree>, OneStageError> {
    Ok(enumerate_shapes(k, d, modulo_permutation)?.iter().map(|s| shape_to_tree(s, k)).collect())
}
