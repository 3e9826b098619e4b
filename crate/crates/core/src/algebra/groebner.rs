//! Buchberger's algorithm with the Gebauer–Möller pair criteria.

use std::cmp::Ordering;

use super::field::Field;
use super::monomial::{Monomial, MonomialOrder};
use super::polynomial::Polynomial;

/// A Gröbner basis together with the order it was computed for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroebnerBasis<F> {
    pub order: MonomialOrder,
    pub generators: Vec<Polynomial<F>>,
    pub reduced: bool,
    pub nvars: usize,
}

/// Resource limits for a Buchberger run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GbLimits {
    /// Upper bound on the total number of terms held by the basis.
    pub max_terms: usize,
    /// Upper bound on the number of basis elements, when set.
    pub max_basis: Option<usize>,
    /// Upper bound on the degree of S-pair LCMs, when set.
    pub max_degree: Option<u32>,
    /// Optional variable weights used only for pair selection.
    pub weights: Option<Vec<u32>>,
    /// Silently skip pairs above this degree. Only meaningful for homogeneous
    /// input, where the result is then a truncated basis.
    pub truncate: Option<u32>,
}

impl Default for GbLimits {
    fn default() -> Self {
        GbLimits { max_terms: 20_000, max_basis: None, max_degree: None, weights: None, truncate: None }
    }
}

impl GbLimits {
    pub fn with_terms(max_terms: usize) -> Self {
        GbLimits { max_terms, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("Groebner basis budget exceeded: {what} ({terms} terms in {elements} elements, pair degree {degree})")]
pub struct BudgetExceeded {
    pub what: &'static str,
    pub terms: usize,
    pub elements: usize,
    pub degree: u32,
}

type Terms<F> = Vec<(Monomial, F)>;

fn to_sorted<F: Field>(p: &Polynomial<F>, order: &MonomialOrder) -> Terms<F> {
    p.sorted_terms(order)
}

fn from_sorted<F: Field>(t: Terms<F>, nvars: usize) -> Polynomial<F> {
    Polynomial::from_terms(nvars, t)
}

/// `a - c * m * b` for sorted term lists.
fn sub_scaled<F: Field>(a: &[(Monomial, F)], c: &F, m: &Monomial, b: &[(Monomial, F)], order: &MonomialOrder) -> Terms<F> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let mut shifted: Option<(Monomial, F)> = b.first().map(|(bm, bc)| (bm.mul(m), bc.mul_r(c)));
    while i < a.len() || shifted.is_some() {
        let take = match (&a.get(i), &shifted) {
            (Some(x), Some(y)) => order.compare(&x.0, &y.0),
            (Some(_), None) => Ordering::Greater,
            (None, Some(_)) => Ordering::Less,
            (None, None) => break,
        };
        match take {
            Ordering::Greater => {
                out.push(a[i].clone());
                i += 1;
            }
            Ordering::Less => {
                let (ym, yc) = shifted.take().unwrap();
                out.push((ym, -yc));
                j += 1;
                shifted = b.get(j).map(|(bm, bc)| (bm.mul(m), bc.mul_r(c)));
            }
            Ordering::Equal => {
                let (ym, yc) = shifted.take().unwrap();
                let s = a[i].1.sub_r(&yc);
                if !s.is_zero() {
                    out.push((ym, s));
                }
                i += 1;
                j += 1;
                shifted = b.get(j).map(|(bm, bc)| (bm.mul(m), bc.mul_r(c)));
            }
        }
    }
    out
}

struct Elem<F> {
    terms: Terms<F>,
    mask: u64,
    active: bool,
}

impl<F: Field> Elem<F> {
    fn new(terms: Terms<F>) -> Self {
        let mask = terms[0].0.support_mask();
        Elem { terms, mask, active: true }
    }
    fn lm(&self) -> &Monomial {
        &self.terms[0].0
    }
}

fn find_divisor<'a, F: Field>(
    basis: impl Iterator<Item = &'a Elem<F>>,
    m: &Monomial,
) -> Option<&'a Elem<F>> {
    let mask = m.support_mask();
    basis.into_iter().find(|e| e.mask & !mask == 0 && e.lm().divides(m))
}

/// Fully reduces `p` by the given basis elements (each with nonzero leading
/// coefficient).
fn reduce_full<'a, F: Field>(
    mut p: Terms<F>,
    basis: &'a [Elem<F>],
    skip: Option<usize>,
    order: &MonomialOrder,
) -> Terms<F> {
    let mut rem: Terms<F> = Vec::new();
    let mut start = 0;
    while start < p.len() {
        let (m, c) = (&p[start].0, &p[start].1);
        let cand = basis
            .iter()
            .enumerate()
            .filter(|(k, e)| e.active && Some(*k) != skip)
            .map(|(_, e)| e);
        match find_divisor(cand, m) {
            Some(g) => {
                let q = g.lm().quotient_of(m).expect("divides");
                let f = c.div_r(&g.terms[0].1);
                p = sub_scaled(&p[start..], &f, &q, &g.terms, order);
                start = 0;
            }
            None => {
                rem.push(p[start].clone());
                start += 1;
            }
        }
    }
    rem
}

fn make_monic<F: Field>(mut t: Terms<F>) -> Terms<F> {
    let lc = t[0].1.clone();
    if !lc.is_one() {
        let inv = lc.inv();
        for (_, c) in t.iter_mut() {
            *c = c.mul_r(&inv);
        }
    }
    t
}

#[derive(Clone, Debug)]
struct Pair {
    i: usize,
    j: usize,
    lcm: Monomial,
    wdeg: u32,
}

struct State<'o, F> {
    order: &'o MonomialOrder,
    weights: Vec<u32>,
    elems: Vec<Elem<F>>,
    pairs: Vec<Pair>,
}

impl<F: Field> State<'_, F> {
    /// Gebauer–Möller update after appending a new element at index `h`.
    fn update(&mut self, h: usize) {
        let lm_h = self.elems[h].lm().clone();
        let mut cands: Vec<(usize, Monomial)> = (0..h)
            .filter(|&g| self.elems[g].active)
            .map(|g| (g, lm_h.lcm(self.elems[g].lm())))
            .collect();
        let mut kept: Vec<(usize, Monomial)> = Vec::new();
        while !cands.is_empty() {
            let (g1, l1) = cands.remove(0);
            let coprime = lm_h.coprime(self.elems[g1].lm());
            let dominated = cands.iter().any(|(_, l2)| l2.divides(&l1))
                || kept.iter().any(|(_, l2)| l2.divides(&l1));
            if coprime || !dominated {
                kept.push((g1, l1));
            }
        }
        let fresh: Vec<Pair> = kept
            .into_iter()
            .filter(|(g, _)| !lm_h.coprime(self.elems[*g].lm()))
            .map(|(g, l)| Pair { i: g, j: h, wdeg: l.weighted_degree(&self.weights), lcm: l })
            .collect();
        let elems = &self.elems;
        self.pairs.retain(|p| {
            !(lm_h.divides(&p.lcm)
                && elems[p.i].lm().lcm(&lm_h) != p.lcm
                && lm_h.lcm(elems[p.j].lm()) != p.lcm)
        });
        self.pairs.extend(fresh);
        for g in 0..h {
            if self.elems[g].active && lm_h.divides(self.elems[g].lm()) {
                self.elems[g].active = false;
            }
        }
    }

    fn select(&mut self) -> Option<Pair> {
        if self.pairs.is_empty() {
            return None;
        }
        let order = self.order;
        let mut best = 0;
        for k in 1..self.pairs.len() {
            let (a, b) = (&self.pairs[k], &self.pairs[best]);
            let c = a
                .wdeg
                .cmp(&b.wdeg)
                .then_with(|| order.compare(&a.lcm, &b.lcm))
                .then_with(|| (a.j, a.i).cmp(&(b.j, b.i)));
            if c == Ordering::Less {
                best = k;
            }
        }
        Some(self.pairs.swap_remove(best))
    }

    fn held_terms(&self) -> usize {
        self.elems.iter().filter(|e| e.active).map(|e| e.terms.len()).sum()
    }

    fn active_count(&self) -> usize {
        self.elems.iter().filter(|e| e.active).count()
    }

    fn exceeded(&self, what: &'static str, degree: u32) -> BudgetExceeded {
        BudgetExceeded { what, terms: self.held_terms(), elements: self.active_count(), degree }
    }

    fn insert(&mut self, t: Terms<F>) {
        self.elems.push(Elem::new(make_monic(t)));
        let h = self.elems.len() - 1;
        self.update(h);
    }
}

fn s_poly<F: Field>(a: &Elem<F>, b: &Elem<F>, lcm: &Monomial, order: &MonomialOrder) -> Terms<F> {
    let qa = a.lm().quotient_of(lcm).expect("lcm");
    let qb = b.lm().quotient_of(lcm).expect("lcm");
    let left: Terms<F> = a.terms[1..].iter().map(|(m, c)| (m.mul(&qa), c.clone())).collect();
    sub_scaled(&left, &F::one(), &qb, &b.terms[1..], order)
}

/// Reduced Gröbner basis of the ideal generated by `gens`.
pub fn buchberger<F: Field>(
    gens: &[Polynomial<F>],
    nvars: usize,
    order: &MonomialOrder,
    limits: &GbLimits,
) -> Result<GroebnerBasis<F>, BudgetExceeded> {
    for g in gens {
        assert_eq!(g.nvars(), nvars, "variable set mismatch");
    }
    let weights = limits.weights.clone().unwrap_or_else(|| vec![1; nvars]);
    let mut st = State { order, weights, elems: Vec::new(), pairs: Vec::new() };

    let mut input: Vec<Terms<F>> =
        gens.iter().filter(|g| !g.is_zero()).map(|g| to_sorted(g, order)).collect();
    input.sort_by(|a, b| order.compare(&a[0].0, &b[0].0));
    for t in input {
        let r = reduce_full(t, &st.elems, None, order);
        if !r.is_empty() {
            st.insert(r);
        }
    }

    while let Some(pair) = st.select() {
        let degree = pair.lcm.degree();
        if limits.truncate.is_some_and(|t| degree > t) {
            continue;
        }
        if limits.max_degree.is_some_and(|d| degree > d) {
            return Err(st.exceeded("degree limit", degree));
        }
        let s = s_poly(&st.elems[pair.i], &st.elems[pair.j], &pair.lcm, order);
        let r = reduce_full(s, &st.elems, None, order);
        if !r.is_empty() {
            st.insert(r);
            if st.held_terms() > limits.max_terms {
                return Err(st.exceeded("term limit", degree));
            }
            if limits.max_basis.is_some_and(|b| st.active_count() > b) {
                return Err(st.exceeded("basis size limit", degree));
            }
        }
    }

    // The active set is minimal; interreduce tails.
    let active: Vec<usize> = (0..st.elems.len()).filter(|&k| st.elems[k].active).collect();
    let mut out: Vec<Terms<F>> = Vec::with_capacity(active.len());
    for &k in &active {
        let t = st.elems[k].terms.clone();
        let head = t[0].clone();
        let tail = reduce_full(t[1..].to_vec(), &st.elems, Some(k), order);
        let mut full = vec![head];
        full.extend(tail);
        out.push(make_monic(full));
    }
    out.sort_by(|a, b| order.compare(&b[0].0, &a[0].0));
    Ok(GroebnerBasis {
        order: order.clone(),
        generators: out.into_iter().map(|t| from_sorted(t, nvars)).collect(),
        reduced: true,
        nvars,
    })
}

/// Remainder of multivariate division of `f` by `gens` (in list order).
pub fn normal_form<F: Field>(f: &Polynomial<F>, gens: &[Polynomial<F>], order: &MonomialOrder) -> Polynomial<F> {
    let basis: Vec<Elem<F>> =
        gens.iter().filter(|g| !g.is_zero()).map(|g| Elem::new(to_sorted(g, order))).collect();
    let r = reduce_full(to_sorted(f, order), &basis, None, order);
    from_sorted(r, f.nvars())
}

/// True when every S-pair of `gens` reduces to zero.
pub fn is_groebner_basis<F: Field>(gens: &[Polynomial<F>], order: &MonomialOrder) -> bool {
    let basis: Vec<Elem<F>> = gens
        .iter()
        .filter(|g| !g.is_zero())
        .map(|g| Elem::new(make_monic(to_sorted(g, order))))
        .collect();
    for i in 0..basis.len() {
        for j in (i + 1)..basis.len() {
            if basis[i].lm().coprime(basis[j].lm()) {
                continue;
            }
            let l = basis[i].lm().lcm(basis[j].lm());
            let s = s_poly(&basis[i], &basis[j], &l, order);
            if !reduce_full(s, &basis, None, order).is_empty() {
                return false;
            }
        }
    }
    true
}

impl<F: Field> GroebnerBasis<F> {
    pub fn normal_form(&self, f: &Polynomial<F>) -> Polynomial<F> {
        normal_form(f, &self.generators, &self.order)
    }

    pub fn contains(&self, f: &Polynomial<F>) -> bool {
        self.normal_form(f).is_zero()
    }

    pub fn is_zero_ideal(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn max_degree(&self) -> u32 {
        self.generators.iter().filter_map(|g| g.total_degree()).max().unwrap_or(0)
    }

    /// Checks the defining properties of a reduced basis.
    pub fn check_reduced(&self) -> bool {
        let order = &self.order;
        let lms: Vec<(Monomial, F)> =
            self.generators.iter().filter_map(|g| g.leading_term(order)).collect();
        if lms.len() != self.generators.len() || lms.iter().any(|(_, c)| !c.is_one()) {
            return false;
        }
        for (k, g) in self.generators.iter().enumerate() {
            for (m, _) in g.terms() {
                for (l, (lm, _)) in lms.iter().enumerate() {
                    if l != k && lm.divides(m) {
                        return false;
                    }
                    if l == k && lm.divides(m) && lm != m {
                        return false;
                    }
                }
            }
        }
        is_groebner_basis(&self.generators, order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::polynomial::{parse_polynomial, VarSet};
    use crate::algebra::Rational;

    #[test]
    fn linear_elimination_in_lex() {
        let v = VarSet::new(["x", "y", "z"]).unwrap();
        let g = vec![parse_polynomial("x - y", &v).unwrap(), parse_polynomial("y - z", &v).unwrap()];
        let gb = buchberger::<Rational>(&g, 3, &MonomialOrder::Lex, &GbLimits::default()).unwrap();
        let want = vec![parse_polynomial("x - z", &v).unwrap(), parse_polynomial("y - z", &v).unwrap()];
        assert_eq!(gb.generators, want);
    }

    #[test]
    fn twisted_cubic() {
        let v = VarSet::new(["a", "b", "c", "d"]).unwrap();
        let g: Vec<_> = ["a*c - b^2", "b*d - c^2", "a*d - b*c"]
            .iter()
            .map(|s| parse_polynomial(s, &v).unwrap())
            .collect();
        let gb = buchberger(&g, 4, &MonomialOrder::DegRevLex, &GbLimits::default()).unwrap();
        assert_eq!(gb.generators.len(), 3);
        assert!(gb.check_reduced());
    }

    #[test]
    fn budget_is_reported() {
        let v = VarSet::new(["x", "y", "z", "w"]).unwrap();
        let g: Vec<_> = ["x^3 - y*z*w", "y^3 - x*z^2", "z^3 - x^2*w + y"]
            .iter()
            .map(|s| parse_polynomial(s, &v).unwrap())
            .collect();
        let r = buchberger(&g, 4, &MonomialOrder::Lex, &GbLimits::with_terms(10));
        assert!(r.is_err());
    }
}
