//! Property checks shared by the proptest suite and the acceptance harness.

use std::collections::BTreeMap;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestCaseError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stagedtoric::algebra::{
    buchberger, null_space, rank, GbLimits, Monomial, MonomialOrder, Polynomial, Rational,
};
use stagedtoric::kernel::{graded_kernel_piece, kernel_ideal, KernelBudget};
use stagedtoric::tree::{homogenize, multiplicity, resize, swap, Node, Stage, StagedTree};
use stagedtoric::{Poly, Q};

pub const CASES: u32 = 256;
pub const SEED: u64 = 0x5eed_0001;

pub fn config() -> Config {
    Config { cases: CASES, rng_seed: RngSeed::Fixed(SEED), failure_persistence: None, ..Config::default() }
}

pub const NVARS: usize = 3;

/// Sparse polynomials in three variables with small integer coefficients.
pub fn poly(max_terms: usize, max_exp: u16) -> impl Strategy<Value = Poly> {
    prop::collection::vec((prop::collection::vec(0..=max_exp, NVARS), -4i64..=4), 0..=max_terms).prop_map(
        |terms| {
            Poly::from_terms(
                NVARS,
                terms.into_iter().map(|(e, c)| (Monomial::from_exponents(&e), Q::from_integer(c))),
            )
        },
    )
}

pub fn order() -> impl Strategy<Value = MonomialOrder> {
    prop_oneof![Just(MonomialOrder::DegRevLex), Just(MonomialOrder::Lex)]
}

pub fn ring_axioms(a: &Poly, b: &Poly, c: &Poly) -> Result<(), TestCaseError> {
    let zero = Poly::zero(NVARS);
    let one = Poly::one(NVARS);
    prop_assert_eq!(a.clone() + b.clone(), b.clone() + a.clone());
    prop_assert_eq!(a * b, b * a);
    prop_assert_eq!((a.clone() + b.clone()) + c.clone(), a.clone() + (b.clone() + c.clone()));
    prop_assert_eq!(&(a * b) * c, a * &(b * c));
    prop_assert_eq!(a * &(b.clone() + c.clone()), (a * b) + (a * c));
    prop_assert_eq!(a.clone() + zero.clone(), a.clone());
    prop_assert_eq!(a * &one, a.clone());
    prop_assert!((a.clone() - a.clone()).is_zero());
    prop_assert_eq!(-(-a.clone()), a.clone());
    prop_assert!((a * &zero).is_zero());
    if !a.is_zero() && !b.is_zero() {
        prop_assert_eq!((a * b).total_degree(), Some(a.total_degree().unwrap() + b.total_degree().unwrap()));
    }
    Ok(())
}

pub fn buchberger_reduced(gens: &[Poly], order: &MonomialOrder) -> Result<(), TestCaseError> {
    let limits = GbLimits { max_degree: Some(12), ..GbLimits::with_terms(2_000) };
    let Ok(gb) = buchberger(gens, NVARS, order, &limits) else {
        return Ok(());
    };
    prop_assert!(gb.check_reduced());
    for g in gens {
        prop_assert!(gb.contains(g));
    }
    let again = buchberger(&gb.generators, NVARS, order, &limits).expect("a basis recomputes within budget");
    prop_assert_eq!(&again.generators, &gb.generators);
    // shuffled and scaled input gives the same reduced basis
    let mut rev: Vec<Poly> = gens.iter().rev().map(|g| g.scale(&Q::from_integer(-3))).collect();
    rev.extend(gb.generators.iter().take(1).map(|g| &Polynomial::var(NVARS, 0) * g));
    let other = buchberger(&rev, NVARS, order, &GbLimits::with_terms(50_000)).expect("same ideal within budget");
    prop_assert_eq!(&other.generators, &gb.generators);
    Ok(())
}

/// Random staged trees of depth at most three with up to ten leaves.
pub fn staged_tree() -> impl Strategy<Value = StagedTree> {
    any::<u64>().prop_map(random_tree)
}

pub fn random_tree(seed: u64) -> StagedTree {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let stages = rng.gen_range(1..=3usize);
        let arity: Vec<usize> = (0..stages).map(|_| if rng.gen_bool(0.75) { 2 } else { 3 }).collect();
        let depth = rng.gen_range(2..=3usize);
        fn grow(rng: &mut ChaCha8Rng, arity: &[usize], level: usize, depth: usize) -> Node {
            if level == depth || (level > 0 && rng.gen_bool(0.35)) {
                return Node::leaf();
            }
            let c = rng.gen_range(0..arity.len());
            Node::internal(c, (0..arity[c]).map(|_| grow(rng, arity, level + 1, depth)).collect())
        }
        let root = grow(&mut rng, &arity, 0, depth);
        if !(3..=10).contains(&root.leaf_count()) {
            continue;
        }
        // keep only the stages that occur, renumbered by first use
        let mut remap = BTreeMap::new();
        fn renumber(n: &mut Node, remap: &mut BTreeMap<usize, usize>) {
            if let Some(s) = n.stage {
                let k = remap.len();
                n.stage = Some(*remap.entry(s).or_insert(k));
            }
            for c in &mut n.children {
                renumber(c, remap);
            }
        }
        let mut root = root;
        renumber(&mut root, &mut remap);
        let mut used: Vec<(usize, usize)> = remap.iter().map(|(&old, &new)| (new, old)).collect();
        used.sort();
        let stages = used
            .iter()
            .map(|&(new, old)| Stage::new(format!("c{new}"), (1..=arity[old]).map(|j| format!("s{new}t{j}"))))
            .collect();
        return StagedTree::build(stages, root).expect("generated trees are valid");
    }
}

/// Label names along each root-to-leaf path, sorted, with padding skipped.
fn atom_words(t: &StagedTree) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = (0..t.n_leaves())
        .map(|r| {
            let mut word = Vec::new();
            let mut v = t.leaf(r);
            while let Some(p) = t.parent(v) {
                let s = t.stage(t.stage_of(p).expect("parents are internal"));
                if !s.is_padding() {
                    word.push(s.labels[t.child_index(v)].clone());
                }
                v = p;
            }
            word.sort();
            word
        })
        .collect();
    out.sort();
    out
}

pub fn swap_preserves_atoms(t: &StagedTree, pick: usize) -> Result<(), TestCaseError> {
    let candidates: Vec<(usize, usize)> = t
        .internal_vertices()
        .flat_map(|v| (0..t.stages().len()).map(move |c| (v, c)))
        .filter(|&(v, c)| t.stage_of(v) != Some(c) && multiplicity(t, c, v) > 0)
        .collect();
    if candidates.is_empty() {
        return Ok(());
    }
    let (v, c) = candidates[pick % candidates.len()];
    let s = swap(t, v, c).expect("swap applies when every path meets the stage");
    prop_assert_eq!(s.stage_of(v), Some(c));
    prop_assert_eq!(atom_words(&s), atom_words(t));
    Ok(())
}

pub fn resize_preserves_atoms(t: &StagedTree, pick: usize) -> Result<(), TestCaseError> {
    let ok: Vec<_> = t.internal_vertices().filter_map(|u| resize(t, u).ok()).collect();
    if ok.is_empty() {
        return Ok(());
    }
    let r = &ok[pick % ok.len()];
    let expanded: Vec<Vec<String>> = {
        let mut words: Vec<Vec<String>> = atom_words(&r.tree)
            .into_iter()
            .map(|w| {
                let mut out = Vec::new();
                for l in w {
                    match r.substitution.get(&l) {
                        Some((a, b)) => out.extend([a.clone(), b.clone()]),
                        None => out.push(l),
                    }
                }
                out.sort();
                out
            })
            .collect();
        words.sort();
        words
    };
    prop_assert_eq!(expanded, atom_words(t));
    prop_assert!(r.tree.vertex_count() < t.vertex_count());
    Ok(())
}

pub fn homogenize_idempotent(t: &StagedTree) -> Result<(), TestCaseError> {
    let h = homogenize(t);
    prop_assert!(h.is_uniform());
    prop_assert_eq!(h.depth(), t.depth());
    prop_assert_eq!(h.n_leaves(), t.n_leaves());
    prop_assert_eq!(&homogenize(&h), &h);
    prop_assert_eq!(atom_words(&h), atom_words(t));
    Ok(())
}

fn coordinates(ps: &[Poly], monos: &BTreeMap<Monomial, usize>) -> Vec<Vec<Rational>> {
    ps.iter()
        .map(|p| {
            let mut row = vec![Q::from_integer(0); monos.len()];
            for (m, c) in p.terms() {
                row[monos[m]] = c.clone();
            }
            row
        })
        .collect()
}

/// The degree-2 piece from linear algebra spans the same space as the degree-2
/// part of the eliminated kernel.
pub fn graded_piece_matches_elimination(t: &StagedTree) -> Result<(), TestCaseError> {
    let budget = KernelBudget::default();
    let Ok(kernel) = kernel_ideal(t, &budget) else {
        return Ok(());
    };
    let piece = graded_kernel_piece(t, 2, &budget).expect("small trees fit the graded budget");
    let n = t.n_leaves();
    for g in &piece {
        prop_assert!(g.is_homogeneous() && g.total_degree() == Some(2));
        prop_assert!(kernel.contains(g));
    }
    // degree-2 part of the ideal: x_i * linear generators plus quadratic generators
    let mut spanning: Vec<Poly> = Vec::new();
    for g in &kernel.generators {
        match g.total_degree() {
            Some(1) => spanning.extend((0..n).map(|i| &Polynomial::var(n, i) * g)),
            Some(2) => spanning.push(g.clone()),
            _ => {}
        }
    }
    let monos: BTreeMap<Monomial, usize> = stagedtoric::algebra::monomials_of_degree(n, 2)
        .into_iter()
        .enumerate()
        .map(|(i, m)| (m, i))
        .collect();
    let a = coordinates(&piece, &monos);
    let b = coordinates(&spanning, &monos);
    let r = rank(&a);
    prop_assert_eq!(r, piece.len());
    prop_assert_eq!(rank(&b), r);
    let mut both = a.clone();
    both.extend(b);
    prop_assert_eq!(rank(&both), r);
    prop_assert!(null_space(&a, monos.len()).len() + r == monos.len());
    Ok(())
}
