//! Command-line driver: validation, the certification pipeline and corpus
//! summaries, with JSON, text and DOT output.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::algebra::{format_monomial, format_polynomial, Monomial};
use crate::balance::{balance_violation, quadratic_gb};
use crate::kernel::{ideal_equal, KernelBudget, KernelCache, KernelError, Oracle, OracleMode};
use crate::minors::{ideal_of_minors, parse_forms, random_search, verify_certificate, ToricCertificate};
use crate::onestage::{classify_onestage, veronese_certificate, veronese_cross_check, VeroneseCertificate};
use crate::sip::{hybrid_search, sip_change_of_variables, SipCertificate, SipError};
use crate::tree::{parse_tree, to_dot, LinearForm, StagedTree, TreeError};

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;
/// Environment variable naming the kernel cache directory.
pub const CACHE_ENV: &str = "STAGEDTORIC_CACHE_DIR";
/// Random walks tried by the last stage of the pipeline.
pub const DEFAULT_TRIALS: usize = 200;

pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const INVALID: i32 = 2;
    pub const BUDGET: i32 = 3;
    pub const DISAGREEMENT: i32 = 4;
}

#[derive(Parser, Debug)]
#[command(name = "stagedtoric", version, about = "Toric structure of staged tree models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse a tree file and check its structure.
    Validate {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Run the certification pipeline on one tree.
    Analyze {
        path: PathBuf,
        #[command(flatten)]
        opts: AnalyzeOpts,
    },
    /// Analyze every `.tree` file of a directory.
    Corpus {
        dir: PathBuf,
        #[command(flatten)]
        opts: AnalyzeOpts,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
    Dot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OracleArg {
    On,
    Off,
    CacheOnly,
}

#[derive(Args, Clone, Debug)]
pub struct AnalyzeOpts {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Seed of the randomized search.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `default`, `large`, or explicit limits such as `leaves=20,labels=12,terms=50000`.
    #[arg(long, default_value = "default")]
    pub budget: String,
    /// Linear forms to try first, one per line as coefficient lists.
    #[arg(long)]
    pub forms: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OracleArg::On)]
    pub oracle: OracleArg,
    /// Random walks tried by the randomized search.
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    pub trials: usize,
    /// Record wall-clock time per pipeline step; reports are then no longer reproducible byte for byte.
    #[arg(long)]
    pub timings: bool,
}

/// Reads a named profile or a comma-separated list of `key=value` limits
/// applied on top of the default profile.
pub fn parse_budget(s: &str) -> Result<KernelBudget, String> {
    if let Some(b) = KernelBudget::profile(s) {
        return Ok(b);
    }
    let mut b = KernelBudget::default();
    for part in s.split(',') {
        let (k, v) = part.split_once('=').ok_or_else(|| format!("unknown budget profile `{s}`"))?;
        let v: usize = v.trim().parse().map_err(|_| format!("budget value `{v}` is not a number"))?;
        match k.trim() {
            "leaves" => b.max_leaves = v,
            "labels" => b.max_labels = v,
            "terms" => b.gb.max_terms = v,
            "graded" => b.max_graded_monomials = v,
            other => return Err(format!("unknown budget key `{other}`")),
        }
    }
    Ok(b)
}

/// Settings shared by every analysis of one invocation.
#[derive(Clone, Debug)]
pub struct Config {
    pub oracle: Oracle,
    pub budget_name: String,
    pub seed: u64,
    pub trials: usize,
    pub timings: bool,
}

impl Config {
    pub fn new(budget: KernelBudget) -> Self {
        Config {
            oracle: Oracle::new(budget),
            budget_name: "default".into(),
            seed: 0,
            trials: DEFAULT_TRIALS,
            timings: false,
        }
    }

    fn from_opts(opts: &AnalyzeOpts) -> Result<Self, String> {
        let budget = parse_budget(&opts.budget)?;
        let mut oracle = Oracle::new(budget);
        oracle.mode = match opts.oracle {
            OracleArg::On => OracleMode::On,
            OracleArg::Off => OracleMode::Off,
            OracleArg::CacheOnly => OracleMode::CacheOnly,
        };
        oracle.cache = std::env::var_os(CACHE_ENV).map(KernelCache::new);
        Ok(Config { oracle, budget_name: opts.budget.clone(), seed: opts.seed, trials: opts.trials, timings: opts.timings })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TreeSummary {
    #[serde(rename = "n")]
    pub leaves: usize,
    #[serde(rename = "d")]
    pub depth: usize,
    pub stages: usize,
    pub labels: usize,
    pub one_stage: bool,
}

impl TreeSummary {
    pub fn of(t: &StagedTree) -> Self {
        TreeSummary {
            leaves: t.n_leaves(),
            depth: t.depth(),
            stages: t.stages().iter().filter(|s| !s.is_padding()).count(),
            labels: t.stages().iter().filter(|s| !s.is_padding()).map(|s| s.arity()).sum(),
            one_stage: t.stages().len() == 1,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidateReport {
    pub schema_version: u32,
    pub file: String,
    pub valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tree: Option<TreeSummary>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    SuppliedForms,
    Balanced,
    Sip,
    Hybrid,
    OneStageCertified,
    RandomizedCertified,
    Unknown,
}

impl Classification {
    pub fn name(self) -> &'static str {
        match self {
            Classification::SuppliedForms => "supplied-forms",
            Classification::Balanced => "balanced",
            Classification::Sip => "sip",
            Classification::Hybrid => "hybrid",
            Classification::OneStageCertified => "one-stage-certified",
            Classification::RandomizedCertified => "randomized-certified",
            Classification::Unknown => "unknown",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Certified,
    Failed,
    NotApplicable,
    BudgetExceeded,
}

#[derive(Clone, Debug, Serialize)]
pub struct Step {
    pub step: &'static str,
    pub outcome: Outcome,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub millis: Option<u64>,
}

/// A found certificate in printable form.
#[derive(Clone, Debug, Serialize)]
pub struct CertificateReport {
    pub method: &'static str,
    /// New variables `q_i` as forms in `p1..pn`.
    pub forms: Vec<String>,
    /// Image of each form in the parameter ring.
    pub images: Vec<String>,
    /// Binomial generators in `q1..qn`, when the sandwich route was used.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub binomials: Vec<String>,
    pub oracle_agrees: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct OracleReport {
    pub mode: OracleMode,
    pub computed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generators: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_degree: Option<u32>,
    /// Whether the reduced basis in the p-variables consists of binomials.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub binomial_in_p: Option<bool>,
    /// Whether the ideal of 2x2 stage-matrix minors equals the kernel.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minors_equal_kernel: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalyzeReport {
    pub schema_version: u32,
    pub file: String,
    pub budget: String,
    pub seed: u64,
    pub tree: TreeSummary,
    pub classification: Classification,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadratic_basis: Option<Vec<String>>,
    pub oracle: OracleReport,
    pub pipeline: Vec<Step>,
}

impl AnalyzeReport {
    pub fn disagrees(&self) -> bool {
        self.certificate.as_ref().is_some_and(|c| c.oracle_agrees == Some(false))
    }

    pub fn exit_code(&self) -> i32 {
        if self.disagrees() {
            exit::DISAGREEMENT
        } else if self.classification == Classification::Unknown
            && self.pipeline.iter().any(|s| s.outcome == Outcome::BudgetExceeded)
        {
            exit::BUDGET
        } else {
            exit::OK
        }
    }
}

fn toric_report(t: &StagedTree, method: &'static str, c: &ToricCertificate, detail: Option<serde_json::Value>) -> CertificateReport {
    let pv = t.p_vars();
    let qv = c.q_vars();
    let params = t.params().vars();
    CertificateReport {
        method,
        forms: c.forms.iter().map(|f| f.format(&pv)).collect(),
        images: c
            .images
            .iter()
            .map(|r| match r {
                Some(r) if r.coefficient == crate::Q::from_integer(1) => format_monomial(&r.monomial, params),
                Some(r) => format!("{}*{}", r.coefficient, format_monomial(&r.monomial, params)),
                None => "?".into(),
            })
            .collect(),
        binomials: c.binomials.iter().map(|b| format_polynomial(b, &qv)).collect(),
        oracle_agrees: c.oracle_agrees,
        detail,
    }
}

fn sip_report(t: &StagedTree, method: &'static str, c: &SipCertificate) -> CertificateReport {
    let detail = serde_json::json!({ "sip_indices": c.sip_indices, "frontier": c.frontier });
    toric_report(t, method, &c.certificate, Some(detail))
}

fn veronese_report(t: &StagedTree, c: &VeroneseCertificate) -> CertificateReport {
    let p = t.params();
    CertificateReport {
        method: "veronese",
        forms: c.forms.iter().map(|f| f.format(&t.p_vars())).collect(),
        images: c
            .images
            .iter()
            .map(|e| {
                let mut m = Monomial::one(p.nvars());
                for (j, &x) in e.iter().enumerate() {
                    m.set(p.label_var(0, j), x);
                }
                format_monomial(&m, p.vars())
            })
            .collect(),
        binomials: Vec::new(),
        oracle_agrees: c.oracle_agrees,
        detail: Some(serde_json::json!({ "k": c.k, "d": c.d, "span_rank": c.span_rank })),
    }
}

fn kernel_outcome(e: &KernelError) -> Outcome {
    if e.is_budget() {
        Outcome::BudgetExceeded
    } else {
        Outcome::Failed
    }
}

fn failure_text(c: &ToricCertificate) -> String {
    match &c.failure {
        Some(f) => format!("hypothesis ({}) fails: {}", f.roman(), serde_json::to_string(f).unwrap_or_default()),
        None => "verified".into(),
    }
}

type StepResult = (Outcome, String, Option<CertificateReport>);

/// Runs the pipeline: supplied forms, balanced, SIP, hybrid, one-stage and
/// randomized search, stopping at the first certificate.
pub fn analyze(t: &StagedTree, file: &str, forms: Option<&[LinearForm]>, cfg: &Config) -> AnalyzeReport {
    let oracle = &cfg.oracle;
    let mut pipeline = Vec::new();
    let mut found: Option<(Classification, CertificateReport)> = None;
    let mut quadratic_basis = None;

    let mut run = |name: &'static str, class: Classification, f: &mut dyn FnMut() -> StepResult| {
        if found.is_some() {
            return;
        }
        let start = Instant::now();
        let (outcome, detail, cert) = f();
        let millis = cfg.timings.then(|| start.elapsed().as_millis() as u64);
        pipeline.push(Step { step: name, outcome, detail, millis });
        if let Some(c) = cert {
            found = Some((class, c));
        }
    };

    if let Some(forms) = forms {
        run("supplied-forms", Classification::SuppliedForms, &mut || {
            match verify_certificate(t, forms, &ideal_of_minors(t), oracle) {
                Ok(c) if c.verified => (Outcome::Certified, "verified with the ideal of minors".into(), Some(toric_report(t, "supplied-forms", &c, None))),
                Ok(c) => (Outcome::Failed, failure_text(&c), None),
                Err(e) => (kernel_outcome(&e), e.to_string(), None),
            }
        });
    }

    run("balanced", Classification::Balanced, &mut || {
        if let Some(v) = balance_violation(t) {
            return (Outcome::NotApplicable, format!("stage {} at ({}, {}), children {} and {}", v.stage, v.u, v.v, v.i + 1, v.j + 1), None);
        }
        let qb = match quadratic_gb(t) {
            Ok(q) => q,
            Err(e) => return (Outcome::Failed, e.to_string(), None),
        };
        let gens = qb.generators();
        quadratic_basis = Some(gens.iter().map(|g| format_polynomial(g, &t.p_vars())).collect::<Vec<_>>());
        let unit: Vec<LinearForm> = (0..t.n_leaves()).map(|r| LinearForm::unit(t.n_leaves(), r)).collect();
        match verify_certificate(t, &unit, &gens, oracle) {
            Ok(c) if c.verified => (Outcome::Certified, format!("{} quadratic basis elements", gens.len()), Some(toric_report(t, "balanced", &c, None))),
            Ok(c) => (Outcome::Failed, failure_text(&c), None),
            Err(e) => (kernel_outcome(&e), e.to_string(), None),
        }
    });

    run("sip", Classification::Sip, &mut || match sip_change_of_variables(t, oracle) {
        Ok(c) if c.certificate.verified => (Outcome::Certified, "verified".into(), Some(sip_report(t, "sip", &c))),
        Ok(c) => (Outcome::Failed, failure_text(&c.certificate), None),
        Err(e) if e.is_hypothesis() => (Outcome::NotApplicable, e.to_string(), None),
        Err(SipError::Kernel(e)) => (kernel_outcome(&e), e.to_string(), None),
        Err(e) => (Outcome::Failed, e.to_string(), None),
    });

    run("hybrid", Classification::Hybrid, &mut || match hybrid_search(t, oracle) {
        Ok(h) => {
            let tried = h.attempts.iter().map(|a| format!("depth {}: {}", a.depth, a.outcome)).collect::<Vec<_>>().join("; ");
            match h.certificate {
                Some(c) => (Outcome::Certified, tried, Some(sip_report(t, "hybrid", &c))),
                None => (Outcome::NotApplicable, tried, None),
            }
        }
        Err(SipError::Kernel(e)) => (kernel_outcome(&e), e.to_string(), None),
        Err(e) => (Outcome::Failed, e.to_string(), None),
    });

    run("one-stage", Classification::OneStageCertified, &mut || {
        if !classify_onestage(t).is_one_stage {
            return (Outcome::NotApplicable, format!("{} stages", TreeSummary::of(t).stages), None);
        }
        let mut c = match veronese_certificate(t) {
            Ok(c) => c,
            Err(e) => return (Outcome::Failed, e.to_string(), None),
        };
        if !c.verified {
            return (Outcome::Failed, serde_json::to_string(&c.failure).unwrap_or_default(), None);
        }
        if let Err(e) = veronese_cross_check(t, &mut c, oracle) {
            return (kernel_outcome(&e), e.to_string(), None);
        }
        (Outcome::Certified, format!("span rank {}", c.span_rank), Some(veronese_report(t, &c)))
    });

    run("randomized", Classification::RandomizedCertified, &mut || match random_search(t, cfg.seed, cfg.trials, oracle) {
        Ok(Some(hit)) => {
            let detail = serde_json::json!({ "seed": hit.seed, "trial": hit.trial, "operations": hit.ops.len() });
            (Outcome::Certified, format!("trial {}", hit.trial), Some(toric_report(t, "randomized", &hit.certificate, Some(detail))))
        }
        Ok(None) => (Outcome::Failed, format!("no certificate in {} trials from seed {}", cfg.trials, cfg.seed), None),
        Err(e) => (kernel_outcome(&e), e.to_string(), None),
    });

    let (classification, certificate) = match found {
        Some((c, r)) => (c, Some(r)),
        None => (Classification::Unknown, None),
    };
    AnalyzeReport {
        schema_version: SCHEMA_VERSION,
        file: file.to_string(),
        budget: cfg.budget_name.clone(),
        seed: cfg.seed,
        tree: TreeSummary::of(t),
        classification,
        certificate,
        quadratic_basis,
        oracle: oracle_report(t, oracle),
        pipeline,
    }
}

fn oracle_report(t: &StagedTree, oracle: &Oracle) -> OracleReport {
    let mut r = OracleReport { mode: oracle.mode, ..Default::default() };
    let kernel = match oracle.kernel(t) {
        Ok(Some(k)) => k,
        Ok(None) => return r,
        Err(e) => {
            r.error = Some(e.to_string());
            return r;
        }
    };
    r.computed = true;
    r.generators = Some(kernel.generators.len());
    r.max_degree = Some(kernel.max_degree());
    r.binomial_in_p = Some(kernel.generators.iter().all(|g| g.len() <= 2));
    match ideal_equal(&ideal_of_minors(t), &kernel.generators, t.n_leaves(), &oracle.budget.gb) {
        Ok(eq) => r.minors_equal_kernel = Some(eq),
        Err(e) => r.error = Some(e.to_string()),
    }
    r
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize") + "\n"
}

pub fn render_validate(r: &ValidateReport, format: Format, t: Option<&StagedTree>) -> String {
    match format {
        Format::Json => json(r),
        Format::Dot => t.map(to_dot).unwrap_or_default(),
        Format::Text => {
            let mut s = format!("file: {}\nvalid: {}\n", r.file, r.valid);
            if let Some(e) = &r.error {
                let _ = writeln!(s, "error: {e}");
            }
            if let Some(ts) = &r.tree {
                let _ = writeln!(s, "leaves: {}\ndepth: {}\nstages: {}\nlabels: {}", ts.leaves, ts.depth, ts.stages, ts.labels);
            }
            s
        }
    }
}

pub fn render_analyze(r: &AnalyzeReport, format: Format, t: &StagedTree) -> String {
    match format {
        Format::Json => json(r),
        Format::Dot => format!("// classification: {}\n{}", r.classification.name(), to_dot(t)),
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "file: {}", r.file);
            let _ = writeln!(s, "leaves: {}  depth: {}  stages: {}", r.tree.leaves, r.tree.depth, r.tree.stages);
            let _ = writeln!(s, "classification: {}", r.classification.name());
            for st in &r.pipeline {
                let time = st.millis.map(|m| format!(" [{m} ms]")).unwrap_or_default();
                let _ = writeln!(s, "  {:<14} {:<15} {}{}", st.step, serde_json::to_value(st.outcome).unwrap().as_str().unwrap_or(""), st.detail, time);
            }
            if let Some(c) = &r.certificate {
                let _ = writeln!(s, "certificate ({}):", c.method);
                for (i, (f, m)) in c.forms.iter().zip(&c.images).enumerate() {
                    let _ = writeln!(s, "  q{} = {}  ->  {}", i + 1, f, m);
                }
                let _ = writeln!(s, "oracle agrees: {}", opt(c.oracle_agrees));
            }
            if let Some(q) = &r.quadratic_basis {
                let _ = writeln!(s, "quadratic basis:");
                for g in q {
                    let _ = writeln!(s, "  {g}");
                }
            }
            let _ = writeln!(s, "kernel generators: {}  minors equal kernel: {}", r.oracle.generators.map_or("-".into(), |g| g.to_string()), opt(r.oracle.minors_equal_kernel));
            s
        }
    }
}

fn opt(b: Option<bool>) -> &'static str {
    match b {
        Some(true) => "yes",
        Some(false) => "no",
        None => "-",
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CorpusRow {
    pub file: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<Classification>,
    pub certified: bool,
    pub oracle_agrees: Option<bool>,
    pub minors_equal_kernel: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorpusReport {
    pub schema_version: u32,
    pub rows: Vec<CorpusRow>,
    pub disagreements: usize,
}

fn corpus_row(path: &Path, cfg: &Config) -> CorpusRow {
    let file = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    let mut row = CorpusRow { file: file.clone(), classification: None, certified: false, oracle_agrees: None, minors_equal_kernel: None, error: None };
    let t = match std::fs::read_to_string(path).map_err(|e| e.to_string()).and_then(|s| parse_tree(&s).map_err(|e| e.to_string())) {
        Ok(t) => t,
        Err(e) => {
            row.error = Some(e);
            return row;
        }
    };
    let forms_path = path.with_extension("forms");
    let forms = match std::fs::read_to_string(&forms_path) {
        Ok(s) => match parse_forms(&s, t.n_leaves()) {
            Ok(f) => Some(f),
            Err(e) => {
                row.error = Some(format!("{}: {e}", forms_path.display()));
                return row;
            }
        },
        Err(_) => None,
    };
    let r = analyze(&t, &file, forms.as_deref(), cfg);
    row.classification = Some(r.classification);
    row.certified = r.certificate.is_some();
    row.oracle_agrees = r.certificate.as_ref().and_then(|c| c.oracle_agrees);
    row.minors_equal_kernel = r.oracle.minors_equal_kernel;
    row
}

/// Analyzes every `.tree` file of `dir` in parallel; rows are sorted by file
/// name. A sibling `.forms` file is used as supplied forms.
pub fn corpus(dir: &Path, cfg: &Config) -> std::io::Result<CorpusReport> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "tree") && p.is_file())
        .collect();
    paths.sort();
    let slots: Vec<Mutex<Option<CorpusRow>>> = paths.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(paths.len().max(1));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= paths.len() {
                    break;
                }
                *slots[i].lock().expect("row lock") = Some(corpus_row(&paths[i], cfg));
            });
        }
    });
    let rows: Vec<CorpusRow> = slots.into_iter().map(|m| m.into_inner().expect("row lock").expect("every row filled")).collect();
    let disagreements = rows.iter().filter(|r| r.oracle_agrees == Some(false)).count();
    Ok(CorpusReport { schema_version: SCHEMA_VERSION, rows, disagreements })
}

pub fn render_corpus(r: &CorpusReport, format: Format) -> String {
    if format != Format::Text {
        return json(r);
    }
    let header = ["file", "classification", "certified", "oracle", "minors=kernel", "error"];
    let cells: Vec<[String; 6]> = r
        .rows
        .iter()
        .map(|row| {
            [
                row.file.clone(),
                row.classification.map_or("-".into(), |c| c.name().into()),
                if row.certified { "yes".into() } else { "no".into() },
                opt(row.oracle_agrees).into(),
                opt(row.minors_equal_kernel).into(),
                row.error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    let mut width = header.map(str::len);
    for c in &cells {
        for (w, x) in width.iter_mut().zip(c) {
            *w = (*w).max(x.len());
        }
    }
    let line = |c: &[&str]| {
        let mut s = String::new();
        for (i, x) in c.iter().enumerate() {
            let _ = write!(s, "{:<w$}  ", x, w = width[i]);
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = line(&header);
    for c in &cells {
        out += &line(&c.iter().map(String::as_str).collect::<Vec<_>>());
    }
    let _ = writeln!(out, "{} trees, {} oracle disagreements", r.rows.len(), r.disagreements);
    out
}

/// Output of one invocation: text for stdout, text for stderr and the exit code.
#[derive(Debug, Default)]
pub struct Invocation {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

fn load_tree(path: &Path) -> Result<StagedTree, (i32, String)> {
    let src = std::fs::read_to_string(path).map_err(|e| (exit::USAGE, format!("{}: {e}", path.display())))?;
    parse_tree(&src).map_err(|e| {
        let code = if matches!(e, TreeError::Syntax { .. }) { exit::USAGE } else { exit::INVALID };
        (code, format!("{}: {e}", path.display()))
    })
}

/// Runs the command line `args` (program name first) without touching the
/// process streams.
pub fn run<I, T>(args: I) -> Invocation
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.exit_code() == 0 { exit::OK } else { exit::USAGE };
            return Invocation { stdout: if code == 0 { e.to_string() } else { String::new() }, stderr: if code == 0 { String::new() } else { e.to_string() }, code };
        }
    };
    match cli.command {
        Command::Validate { path, format } => {
            let file = path.display().to_string();
            match load_tree(&path) {
                Ok(t) => {
                    let r = ValidateReport { schema_version: SCHEMA_VERSION, file, valid: true, error: None, tree: Some(TreeSummary::of(&t)) };
                    Invocation { stdout: render_validate(&r, format, Some(&t)), stderr: String::new(), code: exit::OK }
                }
                Err((code, msg)) => {
                    let r = ValidateReport { schema_version: SCHEMA_VERSION, file, valid: false, error: Some(msg.clone()), tree: None };
                    Invocation { stdout: render_validate(&r, format, None), stderr: msg + "\n", code }
                }
            }
        }
        Command::Analyze { path, opts } => {
            let cfg = match Config::from_opts(&opts) {
                Ok(c) => c,
                Err(e) => return Invocation { stderr: e + "\n", code: exit::USAGE, ..Default::default() },
            };
            let t = match load_tree(&path) {
                Ok(t) => t,
                Err((code, msg)) => return Invocation { stderr: msg + "\n", code, ..Default::default() },
            };
            let forms = match &opts.forms {
                None => None,
                Some(p) => {
                    let parsed = std::fs::read_to_string(p)
                        .map_err(|e| e.to_string())
                        .and_then(|s| parse_forms(&s, t.n_leaves()).map_err(|e| e.to_string()));
                    match parsed {
                        Ok(f) => Some(f),
                        Err(e) => return Invocation { stderr: format!("{}: {e}\n", p.display()), code: exit::USAGE, ..Default::default() },
                    }
                }
            };
            let r = analyze(&t, &path.display().to_string(), forms.as_deref(), &cfg);
            Invocation { stdout: render_analyze(&r, opts.format, &t), stderr: String::new(), code: r.exit_code() }
        }
        Command::Corpus { dir, opts } => {
            let cfg = match Config::from_opts(&opts) {
                Ok(c) => c,
                Err(e) => return Invocation { stderr: e + "\n", code: exit::USAGE, ..Default::default() },
            };
            match corpus(&dir, &cfg) {
                Ok(r) => {
                    let code = if r.disagreements > 0 { exit::DISAGREEMENT } else { exit::OK };
                    Invocation { stdout: render_corpus(&r, opts.format), stderr: String::new(), code }
                }
                Err(e) => Invocation { stderr: format!("{}: {e}\n", dir.display()), code: exit::USAGE, ..Default::default() },
            }
        }
    }
}
