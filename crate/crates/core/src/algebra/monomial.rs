//! Exponent vectors and monomial orders.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

/// An exponent vector over a fixed variable set.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Monomial(SmallVec<[u16; 16]>);

impl Serialize for Monomial {
    /// Serialized as the plain exponent vector.
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter())
    }
}

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(SmallVec::from_elem(0, nvars))
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut m = Self::one(nvars);
        m.0[i] = 1;
        m
    }

    pub fn from_exponents(exps: &[u16]) -> Self {
        Monomial(SmallVec::from_slice(exps))
    }

    pub fn exponents(&self) -> &[u16] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn weighted_degree(&self, weights: &[u32]) -> u32 {
        self.0.iter().zip(weights).map(|(&e, &w)| e as u32 * w).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn get(&self, i: usize) -> u16 {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, e: u16) {
        self.0[i] = e;
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.0.len(), other.0.len());
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `other / self` when `self` divides `other`.
    pub fn quotient_of(&self, other: &Monomial) -> Option<Monomial> {
        if self.divides(other) {
            Some(Monomial(other.0.iter().zip(&self.0).map(|(a, b)| a - b).collect()))
        } else {
            None
        }
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| *a.max(b)).collect())
    }

    pub fn coprime(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| *a == 0 || *b == 0)
    }

    pub fn pow(&self, k: u16) -> Monomial {
        Monomial(self.0.iter().map(|e| e * k).collect())
    }

    /// Bit `i` is set when variable `i` (taken mod 64) occurs.
    pub fn support_mask(&self) -> u64 {
        let mut mask = 0u64;
        for (i, &e) in self.0.iter().enumerate() {
            if e > 0 {
                mask |= 1 << (i % 64);
            }
        }
        mask
    }

    /// Re-indexes the exponents: variable `i` of `self` becomes `map[i]` in a ring
    /// with `nvars` variables.
    pub fn remap(&self, map: &[usize], nvars: usize) -> Monomial {
        let mut out = Monomial::one(nvars);
        for (i, &e) in self.0.iter().enumerate() {
            if e > 0 {
                out.0[map[i]] += e;
            }
        }
        out
    }
}

/// A monomial order on a fixed variable set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MonomialOrder {
    /// Degree reverse lexicographic with x_1 > x_2 > ... > x_n.
    DegRevLex,
    /// Lexicographic with x_1 > x_2 > ... > x_n.
    Lex,
    /// Elimination order: the first `prefix` variables form a block that
    /// dominates; DegRevLex inside each block.
    Block { prefix: usize },
}

fn degrevlex(a: &[u16], b: &[u16]) -> Ordering {
    let da: u32 = a.iter().map(|&e| e as u32).sum();
    let db: u32 = b.iter().map(|&e| e as u32).sum();
    if da != db {
        return da.cmp(&db);
    }
    for i in (0..a.len()).rev() {
        if a[i] != b[i] {
            // a smaller exponent at the last differing variable wins
            return b[i].cmp(&a[i]);
        }
    }
    Ordering::Equal
}

impl MonomialOrder {
    pub fn compare(&self, a: &Monomial, b: &Monomial) -> Ordering {
        let (x, y) = (a.exponents(), b.exponents());
        match self {
            MonomialOrder::DegRevLex => degrevlex(x, y),
            MonomialOrder::Lex => x.cmp(y),
            MonomialOrder::Block { prefix } => {
                let k = (*prefix).min(x.len());
                degrevlex(&x[..k], &y[..k]).then_with(|| degrevlex(&x[k..], &y[k..]))
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            MonomialOrder::DegRevLex => "degrevlex".into(),
            MonomialOrder::Lex => "lex".into(),
            MonomialOrder::Block { prefix } => format!("block({prefix})"),
        }
    }
}

/// Compares two monomials under DegRevLex.
pub fn degrevlex_compare(a: &Monomial, b: &Monomial) -> Ordering {
    MonomialOrder::DegRevLex.compare(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(e: &[u16]) -> Monomial {
        Monomial::from_exponents(e)
    }

    #[test]
    fn degrevlex_examples() {
        // p1^2 p3 against p1 p2 p3
        assert_eq!(degrevlex_compare(&m(&[2, 0, 1]), &m(&[1, 1, 1])), Ordering::Greater);
        assert_eq!(degrevlex_compare(&m(&[1, 0]), &m(&[1, 0])), Ordering::Equal);
        // p2^2 beats p1 by degree
        assert_eq!(degrevlex_compare(&m(&[0, 2]), &m(&[1, 0])), Ordering::Greater);
        // same degree: x1 x3 < x2^2 in degrevlex
        assert_eq!(degrevlex_compare(&m(&[1, 0, 1]), &m(&[0, 2, 0])), Ordering::Less);
    }

    #[test]
    fn block_order_eliminates_prefix() {
        let ord = MonomialOrder::Block { prefix: 1 };
        assert_eq!(ord.compare(&m(&[1, 0, 0]), &m(&[0, 5, 5])), Ordering::Greater);
        assert_eq!(ord.compare(&m(&[0, 1, 0]), &m(&[0, 0, 1])), Ordering::Greater);
    }
}
