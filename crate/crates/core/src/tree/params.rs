//! The parameter ring of a staged tree and canonical reduction modulo the
//! sum-to-z relations.

use crate::algebra::VarSet;
use crate::Poly;

use super::{Stage, Z};

/// Variables for all edge labels (stages in order, labels in order) followed
/// by the homogenising variable `z`.
#[derive(Clone, Debug)]
pub struct ParamRing {
    vars: VarSet,
    stage_vars: Vec<Vec<usize>>,
    z: usize,
    canon: Vec<Poly>,
    eliminated: Vec<bool>,
}

impl ParamRing {
    pub fn new(stages: &[Stage]) -> Self {
        let mut names = Vec::new();
        let mut stage_vars = Vec::new();
        let nlabels: usize = stages.iter().filter(|s| !s.is_padding()).map(Stage::arity).sum();
        let z = nlabels;
        for s in stages {
            if s.is_padding() {
                stage_vars.push(vec![z]);
                continue;
            }
            let mut vs = Vec::new();
            for l in &s.labels {
                vs.push(names.len());
                names.push(l.clone());
            }
            stage_vars.push(vs);
        }
        names.push(Z.to_string());
        let vars = VarSet::new(names).expect("labels validated as distinct");
        let n = vars.len();
        let mut canon: Vec<Poly> = (0..n).map(|i| Poly::var(n, i)).collect();
        let mut eliminated = vec![false; n];
        for (s, vs) in stages.iter().zip(&stage_vars) {
            if s.is_padding() {
                continue;
            }
            let mut img = Poly::var(n, z);
            for &v in &vs[1..] {
                img = img - Poly::var(n, v);
            }
            canon[vs[0]] = img;
            eliminated[vs[0]] = true;
        }
        ParamRing { vars, stage_vars, z, canon, eliminated }
    }

    pub fn vars(&self) -> &VarSet {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn z(&self) -> usize {
        self.z
    }

    /// Variable of label `j` of stage `c`.
    pub fn label_var(&self, c: usize, j: usize) -> usize {
        self.stage_vars[c][j]
    }

    pub fn stage_vars(&self, c: usize) -> &[usize] {
        &self.stage_vars[c]
    }

    /// Whether canonical reduction rewrites this variable.
    pub fn is_eliminated(&self, var: usize) -> bool {
        self.eliminated[var]
    }

    /// Variables left after canonical reduction.
    pub fn surviving(&self) -> Vec<usize> {
        (0..self.nvars()).filter(|&v| !self.eliminated[v]).collect()
    }

    /// Rewrites the first label of every stage as `z` minus the other labels.
    /// Two polynomials agree modulo the sum-to-z relations exactly when their
    /// canonical forms are equal.
    pub fn canonical(&self, f: &Poly) -> Poly {
        f.substitute(&self.canon)
    }

    /// Generators `sum_j theta_{c,j} - z` of the sum-to-z ideal.
    pub fn relations(&self) -> Vec<Poly> {
        let n = self.nvars();
        self.stage_vars
            .iter()
            .filter(|vs| vs[0] != self.z)
            .map(|vs| {
                let mut p = -Poly::var(n, self.z);
                for &v in vs {
                    p = p + Poly::var(n, v);
                }
                p
            })
            .collect()
    }
}
