//! Model invariants, stage matrices and their minors, and certificates of
//! toric structure after a linear change of variables.

use std::collections::HashSet;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    buchberger, eliminate, inverse, monomials_of_degree, rank, GbLimits, Monomial, MonomialOrder, VarSet,
};
use crate::kernel::{KernelError, Oracle};
use crate::tree::{LinearForm, StagedTree};
use crate::{Poly, Q};

/// Entry `(i, u)` is `p_[u_i]`; columns follow the depth-first post-order of
/// the vertices, so deeper vertices of a branch come first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageMatrix {
    pub stage: usize,
    pub vertices: Vec<usize>,
    /// Row-major entries.
    pub entries: Vec<Vec<LinearForm>>,
}

impl StageMatrix {
    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.entries.first().map_or(0, Vec::len)
    }

    /// All nonzero 2x2 minors, sign-normalised and deduplicated.
    pub fn minors(&self) -> Vec<Poly> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        let e: Vec<Vec<Poly>> = self.entries.iter().map(|r| r.iter().map(LinearForm::to_poly).collect()).collect();
        for i in 0..self.rows() {
            for j in (i + 1)..self.rows() {
                for k in 0..self.cols() {
                    for l in (k + 1)..self.cols() {
                        let m = &e[i][k] * &e[j][l] - &e[i][l] * &e[j][k];
                        push_normalized(&mut out, &mut seen, m);
                    }
                }
            }
        }
        out
    }

    /// The distinct nonzero entries, in row-major order of first appearance.
    pub fn distinct_entries(&self) -> Vec<LinearForm> {
        let mut seen = HashSet::new();
        self.entries.iter().flatten().filter(|f| !f.is_zero() && seen.insert((*f).clone())).cloned().collect()
    }
}

fn push_normalized(out: &mut Vec<Poly>, seen: &mut HashSet<Poly>, p: Poly) {
    let p = p.sign_normalized(&MonomialOrder::DegRevLex);
    if !p.is_zero() && seen.insert(p.clone()) {
        out.push(p);
    }
}

fn post_order(t: &StagedTree, v: usize, out: &mut Vec<usize>) {
    for &w in t.children(v) {
        post_order(t, w, out);
    }
    out.push(v);
}

pub fn stage_matrix(t: &StagedTree, c: usize) -> StageMatrix {
    let mut order = Vec::new();
    post_order(t, t.root(), &mut order);
    let vertices: Vec<usize> = order.into_iter().filter(|&v| t.stage_of(v) == Some(c)).collect();
    let k = t.stage(c).arity();
    let entries = (0..k).map(|i| vertices.iter().map(|&u| t.p_bracket(t.children(u)[i])).collect()).collect();
    StageMatrix { stage: c, vertices, entries }
}

pub fn stage_matrices(t: &StagedTree) -> Vec<StageMatrix> {
    (0..t.stages().len()).map(|c| stage_matrix(t, c)).collect()
}

/// Generators `p_[u_i] p_[v] - p_[u] p_[v_i]` of the ideal of model invariants.
pub fn model_invariants(t: &StagedTree) -> Vec<Poly> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (_, u, v) in t.stage_pairs() {
        let (pu, pv) = (t.p_bracket(u).to_poly(), t.p_bracket(v).to_poly());
        for (&ui, &vi) in t.children(u).iter().zip(t.children(v)) {
            let g = &t.p_bracket(ui).to_poly() * &pv - &pu * &t.p_bracket(vi).to_poly();
            push_normalized(&mut out, &mut seen, g);
        }
    }
    out
}

/// All 2x2 minors of all stage matrices.
pub fn ideal_of_minors(t: &StagedTree) -> Vec<Poly> {
    minors_of_all(&stage_matrices(t))
}

fn minors_of_all(ms: &[StageMatrix]) -> Vec<Poly> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for m in ms {
        for g in m.minors() {
            push_normalized(&mut out, &mut seen, g);
        }
    }
    out
}

/// Replaces line `target` by `sum_i coeffs[i] * line_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineOp {
    Row { target: usize, coeffs: Vec<Q> },
    Column { target: usize, coeffs: Vec<Q> },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MinorsError {
    #[error("operation on line {target} is not invertible: its own coefficient is zero")]
    Singular { target: usize },
    #[error("operation has {found} coefficients, expected {expected}")]
    Shape { expected: usize, found: usize },
    #[error("polynomial is not homogeneous")]
    NotHomogeneous,
}

pub fn row_col_transform(m: &StageMatrix, ops: &[LineOp]) -> Result<StageMatrix, MinorsError> {
    let mut out = m.clone();
    for op in ops {
        let (target, coeffs, len) = match op {
            LineOp::Row { target, coeffs } => (*target, coeffs, out.rows()),
            LineOp::Column { target, coeffs } => (*target, coeffs, out.cols()),
        };
        if coeffs.len() != len || target >= len {
            return Err(MinorsError::Shape { expected: len, found: coeffs.len() });
        }
        if coeffs[target].is_zero() {
            return Err(MinorsError::Singular { target });
        }
        let n = m.entries[0][0].len();
        let combine = |line: &dyn Fn(usize) -> LinearForm| {
            let mut acc = LinearForm::zero(n);
            for (i, c) in coeffs.iter().enumerate() {
                if !c.is_zero() {
                    acc = acc.add(&line(i).scale(c));
                }
            }
            acc
        };
        match op {
            LineOp::Row { .. } => {
                let new: Vec<LinearForm> =
                    (0..out.cols()).map(|col| combine(&|i| out.entries[i][col].clone())).collect();
                out.entries[target] = new;
            }
            LineOp::Column { .. } => {
                let new: Vec<LinearForm> =
                    (0..out.rows()).map(|row| combine(&|i| out.entries[row][i].clone())).collect();
                for (row, f) in new.into_iter().enumerate() {
                    out.entries[row][target] = f;
                }
            }
        }
    }
    Ok(out)
}

/// A scalar multiple of a monomial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Representative {
    pub coefficient: Q,
    pub monomial: Monomial,
}

/// Finds `c * m` with `f - c * m` in the sum-to-z ideal by comparing
/// canonical forms against every monomial of the right degree.
pub fn monomial_representative(t: &StagedTree, f: &Poly) -> Result<Option<Representative>, MinorsError> {
    if !f.is_homogeneous() {
        return Err(MinorsError::NotHomogeneous);
    }
    let params = t.params();
    let target = params.canonical(f);
    let Some(deg) = f.total_degree() else { return Ok(None) };
    if target.is_zero() {
        return Ok(None);
    }
    // cheap filter: evaluate canonical images at two integer points where
    // every label, eliminated or not, takes a positive value
    let nv = params.nvars();
    let points: Vec<Vec<Q>> = (0..2)
        .map(|s| {
            (0..nv)
                .map(|i| if i == params.z() { 10_000 } else { ((i * 7 + s * 13) % 23 + 2) as i64 })
                .map(Q::from_integer)
                .collect()
        })
        .collect();
    let var_values: Vec<Vec<Q>> = points
        .iter()
        .map(|pt| (0..nv).map(|i| eval(&params.canonical(&Poly::var(nv, i)), pt)).collect())
        .collect();
    let tvals: Vec<Q> = points.iter().map(|pt| eval(&target, pt)).collect();
    for m in monomials_of_degree(nv, deg) {
        let mvals: Vec<Q> = var_values.iter().map(|vv| eval_monomial(&m, vv)).collect();
        let c = tvals[0].div_ref(&mvals[0]);
        if c.mul_ref(&mvals[1]) != tvals[1] {
            continue;
        }
        if params.canonical(&Poly::term(m.clone(), c.clone())) == target {
            return Ok(Some(Representative { coefficient: c, monomial: m }));
        }
    }
    Ok(None)
}

fn eval_monomial(m: &Monomial, values: &[Q]) -> Q {
    let mut acc = Q::one();
    for (i, &e) in m.exponents().iter().enumerate() {
        for _ in 0..e {
            acc = acc.mul_ref(&values[i]);
        }
    }
    acc
}

fn eval(p: &Poly, point: &[Q]) -> Q {
    p.terms().fold(Q::zero(), |acc, (m, c)| acc.add_ref(&c.mul_ref(&eval_monomial(m, point))))
}

/// The hypothesis of the sandwich theorem that failed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "clause", rename_all = "snake_case")]
pub enum Failure {
    /// Wrong number of forms or dependent forms.
    Independence { rank: usize, expected: usize },
    /// Some image is not a monomial modulo the sum-to-z relations.
    MonomialImage { form: usize },
    /// The generators do not form a binomial ideal in the new variables.
    NotBinomial { witness: String },
    /// A model invariant lies outside the supplied ideal.
    InvariantsNotContained { witness: String },
    /// A generator does not vanish under the parametrisation.
    NotInKernel { witness: String },
}

impl Failure {
    pub fn roman(&self) -> &'static str {
        match self {
            Failure::Independence { .. } => "i",
            Failure::MonomialImage { .. } => "ii",
            _ => "iii",
        }
    }
}

/// A witness that the kernel is toric in the variables `q_i = forms[i]`.
#[derive(Clone, Debug, Serialize)]
pub struct ToricCertificate {
    pub forms: Vec<LinearForm>,
    pub images: Vec<Option<Representative>>,
    /// Generators of the intermediate ideal, in the p-variables.
    #[serde(skip)]
    pub generators: Vec<Poly>,
    /// A binomial basis of the intermediate ideal in the q-variables.
    #[serde(skip)]
    pub binomials: Vec<Poly>,
    pub verified: bool,
    pub failure: Option<Failure>,
    /// Reduced basis of the kernel of `q_i -> m_i`, in the q-variables.
    #[serde(skip)]
    pub toric_kernel: Option<Vec<Poly>>,
    /// Whether that kernel, moved back to the p-variables, equals the oracle kernel.
    pub oracle_agrees: Option<bool>,
}

impl ToricCertificate {
    pub fn q_vars(&self) -> VarSet {
        VarSet::numbered("q", self.forms.len())
    }

    fn failed(forms: Vec<LinearForm>, images: Vec<Option<Representative>>, generators: Vec<Poly>, f: Failure) -> Self {
        ToricCertificate {
            forms,
            images,
            generators,
            binomials: Vec::new(),
            verified: false,
            failure: Some(f),
            toric_kernel: None,
            oracle_agrees: None,
        }
    }
}

fn is_binomial(p: &Poly) -> bool {
    p.len() <= 2
}

/// Matrix with the coefficient vectors of `forms` as rows.
fn form_matrix(forms: &[LinearForm]) -> Vec<Vec<Q>> {
    forms.iter().map(|f| f.coefficients().to_vec()).collect()
}

/// Substitution `p_r -> sum_i A^-1[r][i] q_i` for forms `q = A p`.
pub(crate) fn p_in_q(forms: &[LinearForm]) -> Option<Vec<Poly>> {
    let n = forms.len();
    let inv = inverse(&form_matrix(forms))?;
    Some(
        (0..n)
            .map(|r| Poly::from_terms(n, (0..n).filter(|&i| !inv[r][i].is_zero()).map(|i| (Monomial::var(n, i), inv[r][i].clone()))))
            .collect(),
    )
}

/// Checks the three hypotheses of the sandwich theorem for `J = <generators>`
/// and, independently, compares the kernel of the resulting monomial map with
/// the oracle.
pub fn verify_certificate(
    t: &StagedTree,
    forms: &[LinearForm],
    generators: &[Poly],
    oracle: &Oracle,
) -> Result<ToricCertificate, KernelError> {
    let n = t.n_leaves();
    let forms = forms.to_vec();
    let gens = generators.to_vec();
    let r = if forms.iter().all(|f| f.len() == n) { rank(&form_matrix(&forms)) } else { 0 };
    if forms.len() != n || r != n {
        return Ok(ToricCertificate::failed(forms, Vec::new(), gens, Failure::Independence { rank: r, expected: n }));
    }
    let mut images = Vec::new();
    for f in &forms {
        images.push(monomial_representative(t, &t.phi_form(f)).expect("images are homogeneous"));
    }
    if let Some(i) = images.iter().position(Option::is_none) {
        return Ok(ToricCertificate::failed(forms, images, gens, Failure::MonomialImage { form: i }));
    }
    let pv = t.p_vars();
    let params = t.params();
    if let Some(g) = gens.iter().find(|g| !params.canonical(&t.phi(g)).is_zero()) {
        let w = crate::algebra::format_polynomial(g, &pv);
        return Ok(ToricCertificate::failed(forms, images, gens, Failure::NotInKernel { witness: w }));
    }
    let limits = &oracle.budget.gb;
    let j_basis = buchberger(&gens, n, &MonomialOrder::DegRevLex, limits)?;
    if let Some(g) = model_invariants(t).into_iter().find(|g| !j_basis.contains(g)) {
        let w = crate::algebra::format_polynomial(&g, &pv);
        return Ok(ToricCertificate::failed(forms, images, gens, Failure::InvariantsNotContained { witness: w }));
    }
    let sub = p_in_q(&forms).expect("rank checked");
    let moved: Vec<Poly> = gens.iter().map(|g| g.substitute(&sub)).collect();
    let binomials = if moved.iter().all(is_binomial) {
        moved
    } else {
        let gb = buchberger(&moved, n, &MonomialOrder::DegRevLex, limits)?;
        if let Some(g) = gb.generators.iter().find(|g| !is_binomial(g)) {
            let w = crate::algebra::format_polynomial(g, &VarSet::numbered("q", n));
            return Ok(ToricCertificate::failed(forms, images, gens, Failure::NotBinomial { witness: w }));
        }
        gb.generators
    };
    let mut cert = ToricCertificate {
        forms,
        images,
        generators: gens,
        binomials,
        verified: true,
        failure: None,
        toric_kernel: None,
        oracle_agrees: None,
    };
    cross_check(t, &mut cert, &sub, oracle)?;
    Ok(cert)
}

/// Kernel of `q_i -> c_i m_i` by elimination, compared with the oracle.
fn cross_check(t: &StagedTree, cert: &mut ToricCertificate, sub: &[Poly], oracle: &Oracle) -> Result<(), KernelError> {
    let images: Vec<(Q, Monomial)> = cert
        .images
        .iter()
        .map(|rep| {
            let rep = rep.as_ref().expect("verified");
            (rep.coefficient.clone(), rep.monomial.clone())
        })
        .collect();
    let (toric, agrees) = monomial_map_check(t, &images, sub, oracle)?;
    cert.toric_kernel = toric;
    cert.oracle_agrees = agrees;
    Ok(())
}

/// Kernel of the monomial map `q_i -> c_i m_i` into the free parameter ring,
/// and whether it equals the oracle kernel after `p -> sub`. Either part is
/// `None` when it is out of budget or the oracle is off.
pub(crate) fn monomial_map_check(
    t: &StagedTree,
    images: &[(Q, Monomial)],
    sub: &[Poly],
    oracle: &Oracle,
) -> Result<(Option<Vec<Poly>>, Option<bool>), KernelError> {
    let n = images.len();
    let np = t.params().nvars();
    let total = np + n;
    let shift: Vec<usize> = (0..np).collect();
    let gens: Vec<Poly> = images
        .iter()
        .enumerate()
        .map(|(i, (c, m))| Poly::var(total, np + i) - Poly::term(m.remap(&shift, total), c.clone()))
        .collect();
    let mut lim = oracle.budget.gb.clone();
    lim.weights = Some((0..total).map(|i| if i < np { 1 } else { t.depth().max(1) as u32 }).collect());
    let toric = match eliminate(&gens, total, &(0..np).collect::<Vec<_>>(), &lim) {
        Ok(g) => g,
        Err(_) => return Ok((None, None)),
    };
    let back: Vec<usize> = (0..total).map(|i| i.saturating_sub(np)).collect();
    let toric: Vec<Poly> = toric.iter().map(|g| g.remap(&back, n)).collect();
    let kernel = match oracle.kernel(t) {
        Ok(Some(k)) => k,
        Ok(None) => return Ok((Some(toric), None)),
        Err(e) if e.is_budget() || matches!(e, KernelError::NotCached) => return Ok((Some(toric), None)),
        Err(e) => return Err(e),
    };
    let moved: Vec<Poly> = kernel.generators.iter().map(|g| g.substitute(sub)).collect();
    let agrees = crate::algebra::ideal_equal(&moved, &toric, n, &oracle.budget.gb)?;
    Ok((Some(toric), Some(agrees)))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {msg}")]
pub struct FormsError {
    pub line: usize,
    pub msg: String,
}

/// Reads one linear form per line, either as `n` coefficients separated by
/// spaces or as a linear polynomial in `p1..pn`. `#` starts a comment.
pub fn parse_forms(text: &str, n: usize) -> Result<Vec<LinearForm>, FormsError> {
    let vars = VarSet::numbered("p", n);
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| FormsError { line: i + 1, msg };
        let form = if line.contains('p') {
            let poly = crate::algebra::parse_polynomial(line, &vars).map_err(|e| err(e.to_string()))?;
            LinearForm::from_poly(&poly).ok_or_else(|| err("not a linear form".into()))?
        } else {
            let cs: Vec<Q> = line
                .split_whitespace()
                .map(|w| w.parse::<Q>().map_err(|e| err(format!("`{w}`: {e}"))))
                .collect::<Result<_, _>>()?;
            if cs.len() != n {
                return Err(err(format!("expected {n} coefficients, found {}", cs.len())));
            }
            LinearForm::from_coefficients(cs)
        };
        out.push(form);
    }
    Ok(out)
}

/// Result of a successful randomized search.
#[derive(Clone, Debug, Serialize)]
pub struct SearchHit {
    pub seed: u64,
    pub trial: usize,
    /// Accepted operations as (stage index, operation), in order.
    pub ops: Vec<(usize, LineOp)>,
    pub certificate: ToricCertificate,
}

/// Steps in one random walk.
pub const WALK_LENGTH: usize = 12;

fn random_op(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> LineOp {
    let row = cols < 2 || (rows > 1 && rng.gen_bool(0.5));
    let len = if row { rows } else { cols };
    let target = rng.gen_range(0..len);
    let coeffs: Vec<Q> = (0..len)
        .map(|i| {
            let mut c = rng.gen_range(-2i64..=2);
            while i == target && c == 0 {
                c = rng.gen_range(-2i64..=2);
            }
            Q::from_integer(c)
        })
        .collect();
    if row {
        LineOp::Row { target, coeffs }
    } else {
        LineOp::Column { target, coeffs }
    }
}

/// A form scaled so that its first nonzero coefficient is 1.
fn projective_key(f: &LinearForm) -> LinearForm {
    match f.coefficients().iter().find(|c| !c.is_zero()) {
        Some(c) => f.scale(&c.recip()),
        None => f.clone(),
    }
}

/// Distinct entries of all matrices up to nonzero scalars.
fn collect_forms(ms: &[StageMatrix]) -> Vec<LinearForm> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for m in ms {
        for f in m.distinct_entries() {
            let key = projective_key(&f);
            if seen.insert(key.clone()) {
                out.push(key);
            }
        }
    }
    out
}

/// Seeded search over row and column operations on the stage matrices.
///
/// Trial 0 tests the standard basis, with the quadratic basis as the ideal
/// when the tree is balanced and the minors otherwise. Every later
/// trial is a random walk from the original matrices; a proposed operation is
/// kept only when every entry of the changed line still maps to a monomial.
/// After each kept step the distinct entries, up to scalars, are tested as
/// new variables. Returns the lowest successful trial.
pub fn random_search(t: &StagedTree, seed: u64, trials: usize, oracle: &Oracle) -> Result<Option<SearchHit>, KernelError> {
    let n = t.n_leaves();
    let base = stage_matrices(t);
    let movable: Vec<usize> = (0..base.len()).filter(|&c| base[c].rows() > 1 || base[c].cols() > 1).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let quiet = Oracle { mode: crate::kernel::OracleMode::Off, ..oracle.clone() };
    let mut monomial: std::collections::HashMap<LinearForm, bool> = std::collections::HashMap::new();
    let mut is_monomial = |f: &LinearForm| -> bool {
        let key = projective_key(f);
        *monomial.entry(key.clone()).or_insert_with(|| {
            key.is_zero() || monomial_representative(t, &t.phi_form(&key)).ok().flatten().is_some()
        })
    };
    let mut tried: HashSet<Vec<LinearForm>> = HashSet::new();
    let mut attempt = |forms: Vec<LinearForm>, gens: Vec<Poly>| -> Result<Option<ToricCertificate>, KernelError> {
        if forms.len() != n || !tried.insert(forms.clone()) || rank(&form_matrix(&forms)) != n {
            return Ok(None);
        }
        let cert = verify_certificate(t, &forms, &gens, &quiet)?;
        Ok(if cert.verified { Some(verify_certificate(t, &forms, &gens, oracle)?) } else { None })
    };
    for trial in 0..trials {
        if trial == 0 {
            // the minors alone miss the linear relations of a balanced tree
            let gens = match crate::balance::quadratic_gb(t) {
                Ok(q) => q.generators(),
                Err(_) => minors_of_all(&base),
            };
            let forms = (0..n).map(|r| LinearForm::unit(n, r)).collect();
            if let Some(certificate) = attempt(forms, gens)? {
                return Ok(Some(SearchHit { seed, trial, ops: Vec::new(), certificate }));
            }
            continue;
        }
        if movable.is_empty() {
            break;
        }
        let mut ms = base.clone();
        let mut ops = Vec::new();
        for _ in 0..WALK_LENGTH {
            let c = movable[rng.gen_range(0..movable.len())];
            let op = random_op(&mut rng, ms[c].rows(), ms[c].cols());
            let next = row_col_transform(&ms[c], std::slice::from_ref(&op)).expect("generated operations are invertible");
            let changed: Vec<&LinearForm> = match &op {
                LineOp::Row { target, .. } => next.entries[*target].iter().collect(),
                LineOp::Column { target, .. } => next.entries.iter().map(|r| &r[*target]).collect(),
            };
            if !changed.into_iter().all(&mut is_monomial) {
                continue;
            }
            ms[c] = next;
            ops.push((c, op));
            if let Some(certificate) = attempt(collect_forms(&ms), minors_of_all(&ms))? {
                return Ok(Some(SearchHit { seed, trial, ops, certificate }));
            }
        }
    }
    Ok(None)
}

/// Limits used when only the sandwich route is wanted.
pub fn sandwich_only(limits: GbLimits) -> Oracle {
    Oracle {
        mode: crate::kernel::OracleMode::Off,
        cache: None,
        budget: crate::kernel::KernelBudget { gb: limits, ..Default::default() },
        memo: Default::default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{format_monomial, format_polynomial};
    use crate::kernel::KernelBudget;
    use crate::tree::parse_tree;

    const COIN: &str = "stage c : t1 t2 ;\nvertex r stage c children a l3 ;\nvertex a stage c children l1 l2 ;\nvertex l1 leaf ;\nvertex l2 leaf ;\nvertex l3 leaf ;\nroot r ;";

    fn sums(n: usize, parts: &[&[usize]]) -> Vec<LinearForm> {
        parts.iter().map(|p| LinearForm::sum_of(n, p.iter().map(|r| r - 1))).collect()
    }

    #[test]
    fn coin_flip_invariants_and_minors() {
        let t = parse_tree(COIN).unwrap();
        let v = t.p_vars();
        let inv: Vec<String> = model_invariants(&t).iter().map(|p| format_polynomial(p, &v)).collect();
        assert_eq!(inv, ["p1*p2 + p2^2 - p1*p3"]);
        assert_eq!(ideal_of_minors(&t).len(), 1);
    }

    #[test]
    fn coin_flip_certificate() {
        let t = parse_tree(COIN).unwrap();
        let forms = sums(3, &[&[1], &[1, 2], &[1, 2, 3]]);
        let oracle = Oracle::new(KernelBudget::default());
        let c = verify_certificate(&t, &forms, &model_invariants(&t), &oracle).unwrap();
        assert!(c.verified, "{:?}", c.failure);
        let pv = t.params().vars();
        let imgs: Vec<String> = c.images.iter().map(|r| format_monomial(&r.as_ref().unwrap().monomial, pv)).collect();
        assert_eq!(imgs, ["t1^2", "t1*z", "z^2"]);
        let q = c.q_vars();
        let k: Vec<String> = c.toric_kernel.as_ref().unwrap().iter().map(|p| format_polynomial(p, &q)).collect();
        assert_eq!(k, ["q2^2 - q1*q3"]);
        assert_eq!(c.oracle_agrees, Some(true));
    }

    #[test]
    fn standard_basis_fails_on_coin_flip() {
        let t = parse_tree(COIN).unwrap();
        let forms: Vec<LinearForm> = (0..3).map(|r| LinearForm::unit(3, r)).collect();
        let c = verify_certificate(&t, &forms, &ideal_of_minors(&t), &sandwich_only(GbLimits::default())).unwrap();
        assert!(!c.verified);
        assert_eq!(c.failure.unwrap().roman(), "iii");
    }

    #[test]
    fn singular_operation_rejected() {
        let t = parse_tree(COIN).unwrap();
        let m = stage_matrix(&t, 0);
        let op = LineOp::Row { target: 0, coeffs: vec![Q::from_integer(0), Q::from_integer(1)] };
        assert_eq!(row_col_transform(&m, &[op]), Err(MinorsError::Singular { target: 0 }));
    }

    #[test]
    fn representative_of_a_sum() {
        let t = parse_tree(COIN).unwrap();
        let f = t.phi_form(&LinearForm::sum_of(3, [0, 1]));
        let r = monomial_representative(&t, &f).unwrap().unwrap();
        assert_eq!(format_monomial(&r.monomial, t.params().vars()), "t1*z");
        let g = t.phi_form(&LinearForm::sum_of(3, [1, 2]));
        assert!(monomial_representative(&t, &g).unwrap().is_none());
    }
}
