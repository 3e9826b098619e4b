//! Ideal-level operations built on Buchberger's algorithm.

use std::collections::BTreeMap;

use super::field::Field;
use super::groebner::{buchberger, BudgetExceeded, GbLimits, GroebnerBasis};
use super::monomial::{Monomial, MonomialOrder};
use super::polynomial::Polynomial;

fn permute<F: Field>(p: &Polynomial<F>, map: &[usize]) -> Polynomial<F> {
    p.remap(map, p.nvars())
}

/// Generators of `<gens>` intersected with the subring in the variables not
/// listed in `drop`. The result lives in the original ring and is the reduced
/// DegRevLex basis of the elimination ideal.
pub fn eliminate<F: Field>(
    gens: &[Polynomial<F>],
    nvars: usize,
    drop: &[usize],
    limits: &GbLimits,
) -> Result<Vec<Polynomial<F>>, BudgetExceeded> {
    let mut dropped = vec![false; nvars];
    for &d in drop {
        dropped[d] = true;
    }
    // new position of each variable: dropped ones first, relative order kept
    let mut to_new = vec![0; nvars];
    let mut next = 0;
    for pass in [true, false] {
        for v in 0..nvars {
            if dropped[v] == pass {
                to_new[v] = next;
                next += 1;
            }
        }
    }
    let mut to_old = vec![0; nvars];
    for (v, &n) in to_new.iter().enumerate() {
        to_old[n] = v;
    }
    let prefix = dropped.iter().filter(|&&d| d).count();
    let mut lim = limits.clone();
    if let Some(w) = &limits.weights {
        lim.weights = Some((0..nvars).map(|n| w[to_old[n]]).collect());
    }
    let moved: Vec<_> = gens.iter().map(|g| permute(g, &to_new)).collect();
    let gb = buchberger(&moved, nvars, &MonomialOrder::Block { prefix }, &lim)?;
    Ok(gb
        .generators
        .iter()
        .filter(|g| g.terms().all(|(m, _)| m.exponents()[..prefix].iter().all(|&e| e == 0)))
        .map(|g| permute(g, &to_old))
        .collect())
}

/// Reduced DegRevLex basis of an ideal.
pub fn degrevlex_basis<F: Field>(
    gens: &[Polynomial<F>],
    nvars: usize,
    limits: &GbLimits,
) -> Result<GroebnerBasis<F>, BudgetExceeded> {
    buchberger(gens, nvars, &MonomialOrder::DegRevLex, limits)
}

/// Equality of two ideals, by comparing reduced bases.
pub fn ideal_equal<F: Field>(
    a: &[Polynomial<F>],
    b: &[Polynomial<F>],
    nvars: usize,
    limits: &GbLimits,
) -> Result<bool, BudgetExceeded> {
    let ga = degrevlex_basis(a, nvars, limits)?;
    let gb = degrevlex_basis(b, nvars, limits)?;
    Ok(ga.generators == gb.generators)
}

/// Whether every polynomial in `fs` lies in the ideal with basis `gb`.
pub fn ideal_contains<F: Field>(gb: &GroebnerBasis<F>, fs: &[Polynomial<F>]) -> bool {
    fs.iter().all(|f| gb.contains(f))
}

/// Outcome of a binomiality test.
#[derive(Clone, Debug)]
pub struct BinomialTest<F> {
    pub binomial: bool,
    /// The first reduced generator with more than two terms.
    pub witness: Option<Polynomial<F>>,
    pub basis: GroebnerBasis<F>,
}

/// Tests whether an ideal is generated by binomials, through its reduced basis.
pub fn is_binomial_basis<F: Field>(
    gens: &[Polynomial<F>],
    nvars: usize,
    order: &MonomialOrder,
    limits: &GbLimits,
) -> Result<BinomialTest<F>, BudgetExceeded> {
    let basis = buchberger(gens, nvars, order, limits)?;
    let witness = basis.generators.iter().find(|g| g.len() > 2).cloned();
    Ok(BinomialTest { binomial: witness.is_none(), witness, basis })
}

/// All monomials of total degree `d` in `n` variables, in ascending lex order
/// of exponent vectors.
pub fn monomials_of_degree(n: usize, d: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut cur = vec![0u16; n];
    fn rec(i: usize, left: u32, cur: &mut Vec<u16>, out: &mut Vec<Monomial>) {
        let n = cur.len();
        if n == 0 {
            if left == 0 {
                out.push(Monomial::from_exponents(cur));
            }
            return;
        }
        if i == n - 1 {
            cur[i] = left as u16;
            out.push(Monomial::from_exponents(cur));
            cur[i] = 0;
            return;
        }
        for e in 0..=left {
            cur[i] = e as u16;
            rec(i + 1, left - e, cur, out);
        }
        cur[i] = 0;
    }
    rec(0, d, &mut cur, &mut out);
    out
}

fn count_in_initial(lms: &[Monomial], n: usize, d: u32) -> usize {
    monomials_of_degree(n, d).iter().filter(|m| lms.iter().any(|l| l.divides(m))).count()
}

/// Degrees of a minimal homogeneous generating set, with multiplicities.
///
/// Returns `None` when some generator is not homogeneous.
pub fn minimal_generator_degrees<F: Field>(
    basis: &GroebnerBasis<F>,
    limits: &GbLimits,
) -> Result<Option<BTreeMap<u32, usize>>, BudgetExceeded> {
    if basis.generators.iter().any(|g| !g.is_homogeneous()) {
        return Ok(None);
    }
    let n = basis.nvars;
    let order = &basis.order;
    let mut by_degree: BTreeMap<u32, Vec<&Polynomial<F>>> = BTreeMap::new();
    for g in &basis.generators {
        by_degree.entry(g.total_degree().unwrap_or(0)).or_default().push(g);
    }
    let all_lms: Vec<(u32, Monomial)> = basis
        .generators
        .iter()
        .map(|g| (g.total_degree().unwrap_or(0), g.leading_term(order).unwrap().0))
        .collect();
    let mut out = BTreeMap::new();
    let mut lower: Vec<Polynomial<F>> = Vec::new();
    for (&d, gs) in &by_degree {
        let full_lms: Vec<Monomial> =
            all_lms.iter().filter(|(e, _)| *e <= d).map(|(_, m)| m.clone()).collect();
        let full = count_in_initial(&full_lms, n, d);
        let generated = if lower.is_empty() {
            0
        } else {
            let mut lim = limits.clone();
            lim.truncate = Some(d);
            let t = buchberger(&lower, n, order, &lim)?;
            let lms: Vec<Monomial> = t
                .generators
                .iter()
                .filter(|g| g.total_degree().unwrap_or(0) <= d)
                .map(|g| g.leading_term(order).unwrap().0)
                .collect();
            count_in_initial(&lms, n, d)
        };
        if full > generated {
            out.insert(d, full - generated);
        }
        lower.extend(gs.iter().map(|g| (*g).clone()));
    }
    Ok(Some(out))
}
