//! Dense and sparse exact linear algebra.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use super::field::Field;

/// Row-reduces `m` in place to reduced row echelon form and returns the pivot
/// columns.
pub fn rref<F: Field>(m: &mut [Vec<F>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = m[r][c].inv();
        if !inv.is_one() {
            for x in m[r].iter_mut() {
                *x = x.mul_r(&inv);
            }
        }
        let prow = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c].clone();
            if f.is_zero() {
                continue;
            }
            for k in c..cols {
                if !prow[k].is_zero() {
                    row[k] = row[k].sub_r(&f.mul_r(&prow[k]));
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank<F: Field>(m: &[Vec<F>]) -> usize {
    let mut a = m.to_vec();
    rref(&mut a).len()
}

/// Basis of `{x : m x = 0}` for a matrix with `cols` columns.
pub fn null_space<F: Field>(m: &[Vec<F>], cols: usize) -> Vec<Vec<F>> {
    let mut a = m.to_vec();
    let pivots = rref(&mut a);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![F::zero(); cols];
            v[f] = F::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -a[r][f].clone();
            }
            v
        })
        .collect()
}

/// Some `x` with `a x = b`, if one exists.
pub fn solve<F: Field>(a: &[Vec<F>], b: &[F]) -> Option<Vec<F>> {
    let cols = a.first().map_or(0, |r| r.len());
    let mut aug: Vec<Vec<F>> = a
        .iter()
        .zip(b)
        .map(|(row, x)| {
            let mut r = row.clone();
            r.push(x.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.last() == Some(&cols) {
        return None;
    }
    let mut x = vec![F::zero(); cols];
    for (r, &p) in pivots.iter().enumerate() {
        x[p] = aug[r][cols].clone();
    }
    Some(x)
}

/// Coefficients expressing `v` in terms of `vectors`, if `v` lies in their span.
pub fn in_span<F: Field>(vectors: &[Vec<F>], v: &[F]) -> Option<Vec<F>> {
    let n = v.len();
    let a: Vec<Vec<F>> = (0..n).map(|i| vectors.iter().map(|w| w[i].clone()).collect()).collect();
    if vectors.is_empty() {
        return if v.iter().all(|x| x.is_zero()) { Some(Vec::new()) } else { None };
    }
    solve(&a, v)
}

/// Inverse of a square matrix.
pub fn inverse<F: Field>(m: &[Vec<F>]) -> Option<Vec<Vec<F>>> {
    let n = m.len();
    let mut aug: Vec<Vec<F>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { F::one() } else { F::zero() }));
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Determinant by Gaussian elimination.
pub fn determinant<F: Field>(m: &[Vec<F>]) -> F {
    let n = m.len();
    let mut a = m.to_vec();
    let mut det = F::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else { return F::zero() };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det = det.mul_r(&a[c][c]);
        let inv = a[c][c].inv();
        for i in (c + 1)..n {
            let f = a[i][c].mul_r(&inv);
            if f.is_zero() {
                continue;
            }
            for k in c..n {
                a[i][k] = a[i][k].sub_r(&f.mul_r(&a[c][k]));
            }
        }
    }
    det
}

/// An incrementally built echelon basis of sparse vectors whose coordinates
/// are indexed by an ordered key type.
///
/// Each stored row is monic at its largest key, and no stored row has a nonzero
/// entry at another row's pivot key.
#[derive(Clone, Debug)]
pub struct SparseEchelon<K: Ord + Clone + Hash, F> {
    rows: HashMap<K, BTreeMap<K, F>>,
}

impl<K: Ord + Clone + Hash, F: Field> Default for SparseEchelon<K, F> {
    fn default() -> Self {
        SparseEchelon { rows: HashMap::new() }
    }
}

impl<K: Ord + Clone + Hash, F: Field> SparseEchelon<K, F> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` against the stored rows.
    pub fn reduce(&self, v: BTreeMap<K, F>) -> BTreeMap<K, F> {
        let mut cur = v;
        let mut out = BTreeMap::new();
        while let Some((k, c)) = cur.pop_last() {
            match self.rows.get(&k) {
                Some(row) => {
                    for (k2, c2) in row.iter().rev().skip(1) {
                        let e = cur.entry(k2.clone()).or_insert_with(F::zero);
                        *e = e.sub_r(&c.mul_r(c2));
                        if e.is_zero() {
                            cur.remove(k2);
                        }
                    }
                }
                None => {
                    out.insert(k, c);
                }
            }
        }
        out
    }

    pub fn contains(&self, v: BTreeMap<K, F>) -> bool {
        self.reduce(v).is_empty()
    }

    /// Adds `v`; returns false when it was already in the span.
    pub fn insert(&mut self, v: BTreeMap<K, F>) -> bool {
        let r = self.reduce(v);
        let Some((lead, lc)) = r.last_key_value() else { return false };
        let lead = lead.clone();
        let inv = lc.inv();
        let r: BTreeMap<K, F> = r.into_iter().map(|(k, c)| (k, c.mul_r(&inv))).collect();
        // keep the basis fully reduced at pivot keys
        for row in self.rows.values_mut() {
            if let Some(c) = row.get(&lead).cloned() {
                for (k2, c2) in &r {
                    let e = row.entry(k2.clone()).or_insert_with(F::zero);
                    *e = e.sub_r(&c.mul_r(c2));
                    if e.is_zero() {
                        row.remove(k2);
                    }
                }
            }
        }
        self.rows.insert(lead, r);
        true
    }
}
