//! Rational linear forms in the atomic probabilities.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::algebra::{Monomial, VarSet};
use crate::{Poly, Q};

/// A linear form `sum_r c_r p_r`, stored densely.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearForm(Vec<Q>);

impl LinearForm {
    pub fn zero(n: usize) -> Self {
        LinearForm(vec![Q::from_integer(0); n])
    }

    pub fn unit(n: usize, r: usize) -> Self {
        let mut f = Self::zero(n);
        f.0[r] = Q::from_integer(1);
        f
    }

    pub fn from_coefficients(c: Vec<Q>) -> Self {
        LinearForm(c)
    }

    /// Sum of the given variables.
    pub fn sum_of(n: usize, rs: impl IntoIterator<Item = usize>) -> Self {
        let mut f = Self::zero(n);
        for r in rs {
            f.0[r] = f.0[r].add_ref(&Q::from_integer(1));
        }
        f
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coefficients(&self) -> &[Q] {
        &self.0
    }

    pub fn get(&self, r: usize) -> &Q {
        &self.0[r]
    }

    pub fn set(&mut self, r: usize, c: Q) {
        self.0[r] = c;
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(num_traits::Zero::is_zero)
    }

    /// Nonzero coefficients with their 0-based variable index.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &Q)> {
        self.0.iter().enumerate().filter(|(_, c)| !num_traits::Zero::is_zero(*c))
    }

    pub fn support(&self) -> Vec<usize> {
        self.iter().map(|(r, _)| r).collect()
    }

    pub fn add(&self, other: &LinearForm) -> LinearForm {
        LinearForm(self.0.iter().zip(&other.0).map(|(a, b)| a.add_ref(b)).collect())
    }

    pub fn sub(&self, other: &LinearForm) -> LinearForm {
        LinearForm(self.0.iter().zip(&other.0).map(|(a, b)| a.sub_ref(b)).collect())
    }

    pub fn scale(&self, c: &Q) -> LinearForm {
        LinearForm(self.0.iter().map(|a| a.mul_ref(c)).collect())
    }

    /// The form as a polynomial in `p1..pn`.
    pub fn to_poly(&self) -> Poly {
        let n = self.len();
        Poly::from_terms(n, self.iter().map(|(r, c)| (Monomial::var(n, r), c.clone())))
    }

    /// Reads a homogeneous linear polynomial back as a form.
    pub fn from_poly(p: &Poly) -> Option<LinearForm> {
        let mut f = Self::zero(p.nvars());
        for (m, c) in p.terms() {
            if m.degree() != 1 {
                return None;
            }
            let r = m.exponents().iter().position(|&e| e == 1)?;
            f.0[r] = c.clone();
        }
        Some(f)
    }

    /// Canonical text, e.g. `p1 + p2 - p3`.
    pub fn format(&self, vars: &VarSet) -> String {
        crate::algebra::format_polynomial(&self.to_poly(), vars)
    }
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.format(&VarSet::numbered("p", self.len())))
    }
}

impl Serialize for LinearForm {
    /// Serialized as a map from 1-based variable name to coefficient.
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(None)?;
        for (r, c) in self.iter() {
            m.serialize_entry(&format!("p{}", r + 1), &c.to_string())?;
        }
        m.end()
    }
}
