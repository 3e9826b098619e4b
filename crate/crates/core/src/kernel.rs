//! The elimination oracle for the prime ideal of a staged tree, graded pieces
//! by linear algebra, and an on-disk cache.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use sha2::{Digest, Sha256};

use crate::algebra::{
    self, eliminate, monomials_of_degree, null_space, parse_polynomial, BudgetExceeded, GbLimits, GroebnerBasis,
    Monomial, MonomialOrder, VarSet,
};
use crate::tree::{serialize_tree, StagedTree};
use crate::{Poly, Q};

/// Size limits for the oracle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelBudget {
    pub max_leaves: usize,
    /// Edge labels, not counting `z`.
    pub max_labels: usize,
    pub gb: GbLimits,
    /// Largest number of p-monomials in one graded piece.
    pub max_graded_monomials: usize,
}

impl Default for KernelBudget {
    fn default() -> Self {
        KernelBudget { max_leaves: 16, max_labels: 10, gb: GbLimits::default(), max_graded_monomials: 50_000 }
    }
}

impl KernelBudget {
    /// Limits for desk-scale trees beyond the default profile.
    pub fn large() -> Self {
        KernelBudget {
            max_leaves: 40,
            max_labels: 24,
            gb: GbLimits::with_terms(400_000),
            max_graded_monomials: 400_000,
        }
    }

    /// A named profile: `default` or `large`.
    pub fn profile(name: &str) -> Option<Self> {
        match name {
            "default" => Some(Self::default()),
            "large" => Some(Self::large()),
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        format!(
            "max_leaves={} max_labels={} max_terms={}",
            self.max_leaves, self.max_labels, self.gb.max_terms
        )
    }
}

#[derive(Debug, thiserror::Error)]
pub enum KernelError {
    #[error("tree exceeds oracle budget: {what} = {value} > {limit}")]
    TooLarge { what: &'static str, value: usize, limit: usize },
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
    #[error("cache error: {0}")]
    Cache(#[from] io::Error),
    #[error("malformed cache entry {path}: {msg}")]
    BadCache { path: PathBuf, msg: String },
    #[error("no cached kernel for this tree")]
    NotCached,
}

impl KernelError {
    pub fn is_budget(&self) -> bool {
        matches!(self, KernelError::TooLarge { .. } | KernelError::Budget(_))
    }
}

fn label_count(t: &StagedTree) -> usize {
    t.stages().iter().filter(|s| !s.is_padding()).map(|s| s.arity()).sum()
}

/// Images of the atoms after canonical reduction, in the parameter ring.
pub fn canonical_atoms(t: &StagedTree) -> Vec<Poly> {
    let p = t.params();
    t.atom_images().iter().map(|m| p.canonical(&Poly::monomial(m.clone()))).collect()
}

/// Reduced DegRevLex basis of the kernel of the homogeneous parametrisation,
/// as polynomials in `p1..pn`.
///
/// The first label of every stage is eliminated linearly up front through the
/// sum-to-z relations; the remaining labels and `z` form the eliminated block
/// of a block order whose second block is the p-variables.
pub fn kernel_ideal(t: &StagedTree, budget: &KernelBudget) -> Result<GroebnerBasis<Q>, KernelError> {
    let n = t.n_leaves();
    if n > budget.max_leaves {
        return Err(KernelError::TooLarge { what: "leaves", value: n, limit: budget.max_leaves });
    }
    let labels = label_count(t);
    if labels > budget.max_labels {
        return Err(KernelError::TooLarge { what: "labels", value: labels, limit: budget.max_labels });
    }
    let params = t.params();
    let surviving = params.surviving();
    let m = surviving.len();
    let total = m + n;
    let mut to_new = vec![usize::MAX; params.nvars()];
    for (k, &v) in surviving.iter().enumerate() {
        to_new[v] = k;
    }
    let gens: Vec<Poly> = canonical_atoms(t)
        .iter()
        .enumerate()
        .map(|(r, img)| {
            let moved = Poly::from_terms(total, img.terms().map(|(mono, c)| (move_monomial(mono, &to_new, total), c.clone())));
            Poly::var(total, m + r) - moved
        })
        .collect();
    let d = t.depth().max(1) as u32;
    let mut lim = budget.gb.clone();
    lim.weights = Some((0..total).map(|i| if i < m { 1 } else { d }).collect());
    let drop: Vec<usize> = (0..m).collect();
    let elim = eliminate(&gens, total, &drop, &lim)?;
    let back: Vec<usize> = (0..total).map(|i| i.saturating_sub(m)).collect();
    let generators: Vec<Poly> = elim.iter().map(|g| g.remap(&back, n)).collect();
    Ok(GroebnerBasis { order: MonomialOrder::DegRevLex, generators, reduced: true, nvars: n })
}

fn move_monomial(m: &Monomial, to_new: &[usize], total: usize) -> Monomial {
    let mut out = Monomial::one(total);
    for (i, &e) in m.exponents().iter().enumerate() {
        if e > 0 {
            out.set(to_new[i], e);
        }
    }
    out
}

/// A basis of the degree-`deg` part of the kernel, by linear algebra on the
/// canonical forms of all degree-`deg` p-monomials.
pub fn graded_kernel_piece(t: &StagedTree, deg: u32, budget: &KernelBudget) -> Result<Vec<Poly>, KernelError> {
    let n = t.n_leaves();
    let monos = monomials_of_degree(n, deg);
    if monos.len() > budget.max_graded_monomials {
        return Err(KernelError::TooLarge {
            what: "graded monomials",
            value: monos.len(),
            limit: budget.max_graded_monomials,
        });
    }
    let atoms = canonical_atoms(t);
    let mut memo: HashMap<Monomial, Poly> = HashMap::new();
    fn image(m: &Monomial, atoms: &[Poly], memo: &mut HashMap<Monomial, Poly>) -> Poly {
        if let Some(p) = memo.get(m) {
            return p.clone();
        }
        let r = m.exponents().iter().position(|&e| e > 0).expect("positive degree");
        let mut rest = m.clone();
        rest.set(r, m.get(r) - 1);
        let out = if rest.is_one() { atoms[r].clone() } else { &image(&rest, atoms, memo) * &atoms[r] };
        memo.insert(m.clone(), out.clone());
        out
    }
    let images: Vec<Poly> = monos.iter().map(|m| image(m, &atoms, &mut memo)).collect();
    let mut rows: BTreeMap<Monomial, usize> = BTreeMap::new();
    for img in &images {
        for (pm, _) in img.terms() {
            let k = rows.len();
            rows.entry(pm.clone()).or_insert(k);
        }
    }
    let mut mat = vec![vec![Q::from_integer(0); monos.len()]; rows.len()];
    for (col, img) in images.iter().enumerate() {
        for (pm, c) in img.terms() {
            mat[rows[pm]][col] = c.clone();
        }
    }
    let ns = null_space(&mat, monos.len());
    Ok(ns
        .into_iter()
        .map(|v| {
            Poly::from_terms(n, monos.iter().zip(v).filter(|(_, c)| !num_traits::Zero::is_zero(c)).map(|(m, c)| (m.clone(), c)))
        })
        .collect())
}

/// Equality of two ideals in `nvars` variables.
pub fn ideal_equal(a: &[Poly], b: &[Poly], nvars: usize, limits: &GbLimits) -> Result<bool, BudgetExceeded> {
    algebra::ideal_equal(a, b, nvars, limits)
}

/// Degrees of a minimal generating set of a homogeneous ideal.
pub fn minimal_generator_degrees(
    basis: &GroebnerBasis<Q>,
    limits: &GbLimits,
) -> Result<Option<BTreeMap<u32, usize>>, BudgetExceeded> {
    algebra::minimal_generator_degrees(basis, limits)
}

/// Content hash of the canonical serialization.
pub fn tree_hash(t: &StagedTree) -> String {
    hex::encode(Sha256::digest(serialize_tree(t).as_bytes()))
}

/// Directory of cached kernel bases, one file per tree hash.
#[derive(Clone, Debug)]
pub struct KernelCache {
    dir: PathBuf,
}

const CACHE_MAGIC: &str = "# stagedtoric kernel v1";

impl KernelCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        KernelCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, t: &StagedTree) -> PathBuf {
        self.dir.join(format!("{}.gb", tree_hash(t)))
    }

    pub fn load(&self, t: &StagedTree) -> Result<Option<GroebnerBasis<Q>>, KernelError> {
        let path = self.path(t);
        let text = match fs::read_to_string(&path) {
            Ok(s) => s,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let bad = |msg: &str| KernelError::BadCache { path: path.clone(), msg: msg.to_string() };
        let mut lines = text.lines();
        if lines.next() != Some(CACHE_MAGIC) {
            return Err(bad("missing header"));
        }
        let vars = t.p_vars();
        let mut generators = Vec::new();
        for line in lines {
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            generators.push(parse_polynomial(line, &vars).map_err(|e| bad(&e.to_string()))?);
        }
        Ok(Some(GroebnerBasis { order: MonomialOrder::DegRevLex, generators, reduced: true, nvars: vars.len() }))
    }

    pub fn store(&self, t: &StagedTree, gb: &GroebnerBasis<Q>, budget: &KernelBudget) -> Result<(), KernelError> {
        fs::create_dir_all(&self.dir)?;
        let vars = t.p_vars();
        let mut out = format!(
            "{CACHE_MAGIC}\n# order: {}\n# budget: {}\n# vars: {}\n",
            gb.order.name(),
            budget.describe(),
            vars.names().join(" ")
        );
        for g in &gb.generators {
            out.push_str(&algebra::format_polynomial(g, &vars));
            out.push('\n');
        }
        let tmp = self.path(t).with_extension("tmp");
        fs::write(&tmp, out)?;
        fs::rename(tmp, self.path(t))?;
        Ok(())
    }
}

/// How the oracle may be consulted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMode {
    #[default]
    On,
    Off,
    CacheOnly,
}

/// Kernel computation through an optional cache.
#[derive(Clone, Debug, Default)]
pub struct Oracle {
    pub mode: OracleMode,
    pub cache: Option<KernelCache>,
    pub budget: KernelBudget,
    /// Kernels already computed in this process, shared between clones.
    pub memo: Arc<Mutex<HashMap<String, GroebnerBasis<Q>>>>,
}

impl Oracle {
    pub fn new(budget: KernelBudget) -> Self {
        Oracle { mode: OracleMode::On, cache: None, budget, memo: Arc::default() }
    }

    /// The kernel basis, or `None` when the oracle is switched off.
    pub fn kernel(&self, t: &StagedTree) -> Result<Option<GroebnerBasis<Q>>, KernelError> {
        if self.mode == OracleMode::Off {
            return Ok(None);
        }
        let key = tree_hash(t);
        if let Some(gb) = self.memo.lock().expect("memo lock").get(&key) {
            return Ok(Some(gb.clone()));
        }
        let cached = match &self.cache {
            Some(c) => c.load(t)?,
            None => None,
        };
        let gb = match cached {
            Some(gb) => gb,
            None if self.mode == OracleMode::CacheOnly => return Err(KernelError::NotCached),
            None => {
                let gb = kernel_ideal(t, &self.budget)?;
                if let Some(c) = &self.cache {
                    c.store(t, &gb, &self.budget)?;
                }
                gb
            }
        };
        self.memo.lock().expect("memo lock").insert(key, gb.clone());
        Ok(Some(gb))
    }
}

/// Names of the p-variables of a tree.
pub fn p_vars(t: &StagedTree) -> VarSet {
    t.p_vars()
}
