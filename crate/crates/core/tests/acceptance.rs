//! Acceptance suite: one pass/fail line per criterion.

#[path = "support/properties.rs"]
mod properties;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::TestRunner;
use stagedtoric::algebra::{format_polynomial, is_binomial_basis, parse_polynomial, GbLimits, MonomialOrder, VarSet};
use stagedtoric::balance::{is_balanced, quadratic_gb, quadratic_gb_reduced};
use stagedtoric::cli::{analyze, Classification, Config};
use stagedtoric::kernel::{ideal_equal, kernel_ideal, minimal_generator_degrees, KernelBudget, Oracle};
use stagedtoric::minors::{ideal_of_minors, parse_forms, verify_certificate};
use stagedtoric::onestage::{
    algebra_equality, binary_onestage_certificate, classify_onestage, enumerate_onestage, enumerate_shapes,
    is_full_veronese, linear_relations, shape_to_tree,
};
use stagedtoric::sip::{depth_cut, detect_sip, hybrid_certificate, hybrid_search, sip_change_of_variables};
use stagedtoric::tree::{parse_tree, LinearForm, StagedTree};
use stagedtoric::Poly;

type Outcome = Result<String, String>;

fn fixture_text(path: &str) -> String {
    std::fs::read_to_string(format!("{}/../../fixtures/{path}", env!("CARGO_MANIFEST_DIR"))).expect("fixture exists")
}

fn tree(name: &str) -> StagedTree {
    parse_tree(&fixture_text(&format!("{name}.tree"))).expect("fixture parses")
}

fn table(i: usize) -> StagedTree {
    tree(&format!("t33/t{i}"))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let e = start.elapsed();
    ensure(e < limit, || format!("took {:.1} s, limit {} s", e.as_secs_f64(), limit.as_secs()))
}

fn normalized_set(ps: &[Poly], vars: &VarSet) -> BTreeSet<String> {
    ps.iter().map(|p| format_polynomial(&p.sign_normalized(&MonomialOrder::DegRevLex), vars)).collect()
}

fn parsed_set(texts: &[&str], vars: &VarSet) -> BTreeSet<String> {
    let ps: Vec<Poly> = texts.iter().map(|s| parse_polynomial(s, vars).expect("valid polynomial")).collect();
    normalized_set(&ps, vars)
}

fn default_oracle() -> Oracle {
    Oracle::new(KernelBudget::default())
}

fn coin_flip() -> Outcome {
    let start = Instant::now();
    let t = tree("coinflip");
    let pv = t.p_vars();
    let k = kernel_ideal(&t, &KernelBudget::default()).map_err(|e| e.to_string())?;
    let got = normalized_set(&k.generators, &pv);
    ensure(got == parsed_set(&["p1*p3 - p1*p2 - p2^2"], &pv), || format!("kernel {got:?}"))?;
    let forms: Vec<LinearForm> = (1..=3).map(|i| LinearForm::sum_of(3, 0..i)).collect();
    let c = verify_certificate(&t, &forms, &ideal_of_minors(&t), &default_oracle()).map_err(|e| e.to_string())?;
    ensure(c.verified, || format!("{:?}", c.failure))?;
    let qv = c.q_vars();
    let b = normalized_set(&c.binomials, &qv);
    ensure(b == parsed_set(&["q1*q3 - q2^2"], &qv), || format!("binomials {b:?}"))?;
    ensure(c.oracle_agrees == Some(true), || "oracle disagrees".into())?;
    within(start, Duration::from_secs(1))?;
    Ok("kernel p1*p3 - p1*p2 - p2^2, certificate q1*q3 - q2^2".into())
}

fn fig3a_bases() -> Outcome {
    let start = Instant::now();
    let t = tree("fig3a");
    let pv = t.p_vars();
    let q = quadratic_gb(&t).map_err(|e| e.to_string())?;
    let want = parsed_set(
        &[
            "p2-p5", "p4-p7", "p2*p3-p1*p4", "p2*p5-p1*p6", "p2*p7-p1*p8", "p4*p5-p3*p6", "p4*p7-p3*p8",
            "p6*p7-p5*p8", "p2^2-p1*p6", "p2*p3-p1*p7", "p2*p4-p1*p8", "p1*p4-p3*p5", "p2*p4-p3*p6", "p4^2-p3*p8",
            "p5^2-p1*p6", "p3*p6-p5*p7", "p4*p6-p5*p8", "p5*p7-p1*p8", "p6*p7-p2*p8", "p7^2-p3*p8", "p3*p5-p1*p7",
            "p3*p6-p1*p8", "p4*p5-p2*p7", "p4*p6-p2*p8",
        ],
        &pv,
    );
    ensure(want.len() == 24 && q.linear.len() == 2 && q.quadratic.len() == 22, || "sizes".into())?;
    let got = normalized_set(&q.generators(), &pv);
    ensure(got == want, || format!("quadratic basis differs: {:?}", got.symmetric_difference(&want).collect::<Vec<_>>()))?;

    let r = quadratic_gb_reduced(&t).map_err(|e| e.to_string())?;
    let want_r = parsed_set(
        &["p6*p7-p5*p8", "p5^2-p1*p6", "p3*p6-p5*p7", "p5*p7-p1*p8", "p7^2-p3*p8", "p3*p5-p1*p7", "p3*p6-p1*p8"],
        &r.vars,
    );
    let got_r = normalized_set(&r.basis.generators, &r.vars);
    ensure(got_r == want_r, || format!("reduced basis {got_r:?}"))?;

    let n = t.n_leaves();
    let k = kernel_ideal(&t, &KernelBudget::default()).map_err(|e| e.to_string())?;
    let limits = GbLimits::default();
    ensure(ideal_equal(&q.generators(), &k.generators, n, &limits).map_err(|e| e.to_string())?, || {
        "quadratic basis does not generate the kernel".into()
    })?;
    // the reduced basis lives on the kept variables; the linear elements identify the rest
    let mut lifted: Vec<Poly> = r.basis.generators.iter().map(|g| g.remap(&r.kept, n)).collect();
    lifted.extend(q.linear.iter().cloned());
    ensure(ideal_equal(&lifted, &k.generators, n, &limits).map_err(|e| e.to_string())?, || {
        "reduced basis with the linear elements does not generate the kernel".into()
    })?;
    within(start, Duration::from_secs(10))?;
    Ok("24-element and 7-element sets match; both generate the kernel".into())
}

fn corpus_trees() -> Vec<(String, StagedTree)> {
    let mut out = Vec::new();
    for name in ["coinflip", "fig3a", "fig4", "fig5", "fig6", "fig7", "fig8a", "fig8b", "fig10", "fig11"] {
        out.push((name.to_string(), tree(name)));
    }
    for i in 1..=20 {
        out.push((format!("T{i}"), table(i)));
    }
    out
}

fn balanced_iff_binomial() -> Outcome {
    let mut trees = corpus_trees();
    for (k, d) in [(2, 2), (2, 3), (3, 2)] {
        for (i, t) in enumerate_onestage(k, d, false).map_err(|e| e.to_string())?.into_iter().enumerate() {
            trees.push((format!("T({k},{d})#{i}"), t));
        }
    }
    let budget = KernelBudget::large();
    let mut balanced = 0;
    for (name, t) in &trees {
        let k = kernel_ideal(t, &budget).map_err(|e| format!("{name}: {e}"))?;
        let b = is_binomial_basis(&k.generators, t.n_leaves(), &MonomialOrder::DegRevLex, &budget.gb)
            .map_err(|e| format!("{name}: {e}"))?;
        ensure(is_balanced(t) == b.binomial, || format!("{name}: balanced {} binomial {}", is_balanced(t), b.binomial))?;
        balanced += usize::from(b.binomial);
    }
    Ok(format!("{} trees, {balanced} balanced, zero exceptions", trees.len()))
}

fn fig6_certificate() -> Outcome {
    let start = Instant::now();
    let t = tree("fig6");
    let forms = parse_forms(&fixture_text("fig6.forms"), t.n_leaves()).map_err(|e| e.to_string())?;
    let c = verify_certificate(&t, &forms, &ideal_of_minors(&t), &default_oracle()).map_err(|e| e.to_string())?;
    ensure(c.verified, || format!("{:?}", c.failure))?;
    let pv = t.params().vars();
    let images: BTreeSet<String> = c
        .images
        .iter()
        .flatten()
        .map(|r| stagedtoric::algebra::format_monomial(&r.monomial, pv))
        .collect();
    for m in ["tau1*th1^2", "th1^2*z", "th1^3", "z^3"] {
        ensure(images.contains(m), || format!("image {m} missing"))?;
    }
    ensure(c.oracle_agrees == Some(true), || "oracle disagrees".into())?;
    within(start, Duration::from_secs(30))?;
    Ok("verified; images include tau1*th1^2, th1^2*z, th1^3, z^3".into())
}

fn fig5_hybrid() -> Outcome {
    let start = Instant::now();
    let t = tree("fig5");
    let oracle = Oracle::new(KernelBudget::large());
    let h = hybrid_certificate(&t, &depth_cut(&t, 3), &oracle).map_err(|e| e.to_string())?;
    ensure(h.certificate.verified, || format!("{:?}", h.certificate.failure))?;
    let pv = t.p_vars();
    let forms: BTreeSet<String> = h.certificate.forms.iter().map(|f| f.format(&pv)).collect();
    let want: BTreeSet<String> =
        ["p1 + p2", "p2", "p3", "p4 + p5", "p5", "p6", "p7 + p8", "p8", "p9", "p10 + p11", "p11", "p12"]
            .iter()
            .map(|s| s.to_string())
            .collect();
    ensure(forms == want, || format!("forms {forms:?}"))?;
    let k = kernel_ideal(&t, &KernelBudget::large()).map_err(|e| e.to_string())?;
    let degrees = minimal_generator_degrees(&k, &KernelBudget::large().gb)
        .map_err(|e| e.to_string())?
        .ok_or("kernel is not homogeneous")?;
    let ds: BTreeSet<u32> = degrees.keys().copied().collect();
    ensure(ds == BTreeSet::from([2, 4]), || format!("degrees {degrees:?}"))?;
    within(start, Duration::from_secs(60))?;
    Ok(format!("forms match; minimal generator degrees {degrees:?}"))
}

fn sip_fixtures() -> Outcome {
    let mut trees: Vec<(String, StagedTree)> =
        ["coinflip", "fig7"].iter().map(|n| (n.to_string(), tree(n))).collect();
    ensure(detect_sip(&tree("fig6")).is_err(), || "fig6 unexpectedly SIP".into())?;
    for (k, d) in [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2)] {
        for (i, t) in enumerate_onestage(k, d, false).map_err(|e| e.to_string())?.into_iter().enumerate() {
            if detect_sip(&t).is_ok() {
                trees.push((format!("T({k},{d})#{i}"), t));
            }
        }
    }
    for i in 1..=20 {
        let t = table(i);
        if detect_sip(&t).is_ok() {
            trees.push((format!("T{i}"), t));
        }
    }
    let oracle = default_oracle();
    for (name, t) in &trees {
        let c = sip_change_of_variables(t, &oracle).map_err(|e| format!("{name}: {e}"))?;
        ensure(c.certificate.verified, || format!("{name}: {:?}", c.certificate.failure))?;
        ensure(c.certificate.oracle_agrees == Some(true), || format!("{name}: oracle {:?}", c.certificate.oracle_agrees))?;
        let n = t.n_leaves();
        ensure(c.certificate.forms.contains(&LinearForm::sum_of(n, 0..n)), || format!("{name}: sum of all p missing"))?;
    }
    Ok(format!("{} SIP trees verified against the kernel", trees.len()))
}

fn binary_one_stage() -> Outcome {
    let start = Instant::now();
    let mut total = 0usize;
    for d in 1..=5 {
        let shapes = enumerate_shapes(2, d, false).map_err(|e| e.to_string())?;
        let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
        let chunk = shapes.len().div_ceil(workers);
        let failure: Option<String> = std::thread::scope(|s| {
            let handles: Vec<_> = shapes
                .chunks(chunk.max(1))
                .map(|part| {
                    s.spawn(move || {
                        for shape in part {
                            let t = shape_to_tree(shape, 2);
                            match binary_onestage_certificate(&t) {
                                Ok(c) if c.verified && c.span_rank == d + 1 => {}
                                Ok(c) => return Some(format!("d={d}: verified {} rank {}", c.verified, c.span_rank)),
                                Err(e) => return Some(format!("d={d}: {e}")),
                            }
                        }
                        None
                    })
                })
                .collect();
            handles.into_iter().find_map(|h| h.join().expect("worker finished"))
        });
        if let Some(f) = failure {
            return Err(f);
        }
        total += shapes.len();
    }
    within(start, Duration::from_secs(300))?;
    Ok(format!("{total} trees, span rank d+1 throughout, {:.0} s", start.elapsed().as_secs_f64()))
}

fn table_checks() -> Outcome {
    for i in [13, 14] {
        ensure(is_full_veronese(&table(i)).map_err(|e| e.to_string())?, || format!("T{i} not full"))?;
    }
    for (a, b) in [(4, 5), (8, 16), (10, 18), (11, 17), (18, 19)] {
        ensure(algebra_equality(&table(a), &table(b), None).map_err(|e| e.to_string())?, || format!("T{a} != T{b}"))?;
    }
    let oracle = default_oracle();
    let mut sip = 0;
    for i in 1..=20 {
        let t = table(i);
        if detect_sip(&t).is_err() {
            continue;
        }
        sip += 1;
        let c = sip_change_of_variables(&t, &oracle).map_err(|e| format!("T{i}: {e}"))?;
        ensure(c.certificate.verified, || format!("T{i}: {:?}", c.certificate.failure))?;
    }
    ensure(sip == 14, || format!("{sip} SIP trees in the table"))?;
    Ok("T13, T14 full; five algebra equalities; 14 SIP certificates".into())
}

fn relations_and_caterpillars() -> Outcome {
    let mut count = 0;
    for k in 2..=3 {
        for d in 1..=3 {
            for t in enumerate_onestage(k, d, false).map_err(|e| e.to_string())? {
                let cat = classify_onestage(&t).is_caterpillar;
                ensure(linear_relations(&t).is_empty() == cat, || format!("k={k} d={d}: caterpillar {cat}"))?;
                count += 1;
            }
        }
    }
    Ok(format!("{count} trees, zero exceptions"))
}

fn network_fixtures() -> Outcome {
    let oracle = default_oracle();
    for name in ["fig8a", "fig8b"] {
        let s = hybrid_search(&tree(name), &oracle).map_err(|e| format!("{name}: {e}"))?;
        let c = s.certificate.ok_or_else(|| format!("{name}: no cut qualifies"))?;
        ensure(c.certificate.verified, || format!("{name}: {:?}", c.certificate.failure))?;
    }
    let cfg = Config::new(KernelBudget::default());
    let budget = KernelBudget::default();
    for name in ["fig10", "fig11"] {
        let t = tree(name);
        let r = analyze(&t, name, None, &cfg);
        ensure(r.classification == Classification::Unknown, || format!("{name}: {:?}", r.classification))?;
        ensure(r.exit_code() == 0, || format!("{name}: exit {}", r.exit_code()))?;
        ensure(r.oracle.minors_equal_kernel == Some(true), || format!("{name}: {:?}", r.oracle))?;
        let k = kernel_ideal(&t, &budget).map_err(|e| e.to_string())?;
        let eq = ideal_equal(&ideal_of_minors(&t), &k.generators, t.n_leaves(), &budget.gb).map_err(|e| e.to_string())?;
        ensure(eq, || format!("{name}: J differs from the kernel"))?;
    }
    Ok("hybrid cuts for both networks; fig10 and fig11 unknown with J equal to the kernel".into())
}

fn property_suites() -> Outcome {
    fn check<S: Strategy>(name: &str, s: S, f: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
        let mut runner = TestRunner::new(properties::config());
        runner.run(&s, f).map_err(|e| format!("{name}: {e}"))
    }
    use properties::*;
    check("ring axioms", (poly(5, 3), poly(5, 3), poly(4, 2)), |(a, b, c)| ring_axioms(&a, &b, &c))?;
    check("buchberger", (prop::collection::vec(poly(3, 2), 1..=3), order()), |(g, o)| buchberger_reduced(&g, &o))?;
    check("swap", (staged_tree(), any::<usize>()), |(t, k)| swap_preserves_atoms(&t, k))?;
    check("resize", (staged_tree(), any::<usize>()), |(t, k)| resize_preserves_atoms(&t, k))?;
    check("homogenize", staged_tree(), |t| homogenize_idempotent(&t))?;
    check("graded piece", staged_tree(), |t| graded_piece_matches_elimination(&t))?;
    Ok(format!("six suites, {CASES} cases each, seed {SEED:#x}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("coin flip kernel and certificate", coin_flip),
        ("fig3a quadratic and reduced bases", fig3a_bases),
        ("balanced iff binomial kernel", balanced_iff_binomial),
        ("fig6 supplied-forms certificate", fig6_certificate),
        ("fig5 hybrid certificate and generator degrees", fig5_hybrid),
        ("SIP change of variables", sip_fixtures),
        ("binary one-stage trees up to depth 5", binary_one_stage),
        ("three-label depth-three table", table_checks),
        ("linear relations and caterpillars", relations_and_caterpillars),
        ("network and open fixtures", network_fixtures),
        ("property suites", property_suites),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("AC{:<2} PASS  {name}: {detail} [{secs:.1} s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("AC{:<2} FAIL  {name}: {why} [{secs:.1} s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
