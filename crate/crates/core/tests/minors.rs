use stagedtoric::algebra::{format_monomial, format_polynomial, GbLimits};
use stagedtoric::kernel::{KernelBudget, Oracle};
use stagedtoric::minors::{
    ideal_of_minors, model_invariants, parse_forms, row_col_transform, stage_matrix, verify_certificate, LineOp,
};
use stagedtoric::tree::{parse_tree, StagedTree};
use stagedtoric::Q;

fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn tree(name: &str) -> StagedTree {
    parse_tree(&fixture(&format!("{name}.tree"))).unwrap()
}

fn shown(t: &StagedTree, m: &stagedtoric::minors::StageMatrix) -> Vec<Vec<String>> {
    let v = t.p_vars();
    m.entries.iter().map(|r| r.iter().map(|f| f.format(&v)).collect()).collect()
}

fn q(xs: &[i64]) -> Vec<Q> {
    xs.iter().map(|&x| Q::from_integer(x)).collect()
}

#[test]
fn fig6_stage_matrices() {
    let t = tree("fig6");
    let green = stage_matrix(&t, t.stage_index("green").unwrap());
    assert_eq!(shown(&t, &green), [["p1", "p10"], ["p2", "p11"]]);
    let magenta = stage_matrix(&t, t.stage_index("magenta").unwrap());
    let m = shown(&t, &magenta);
    assert_eq!(m[0], ["p3", "p6", "p1 + p2", "p1 + p2 + p3 + p4 + p5 + p6 + p7 + p8"]);
    assert_eq!(m[1], ["p4", "p7", "p3 + p4 + p5", "p9"]);
    assert_eq!(m[2], ["p5", "p8", "p6 + p7 + p8", "p10 + p11"]);

    let g2 = row_col_transform(&green, &[LineOp::Row { target: 1, coeffs: q(&[1, 1]) }]).unwrap();
    assert_eq!(shown(&t, &g2), [["p1", "p10"], ["p1 + p2", "p10 + p11"]]);
    let m2 = row_col_transform(
        &magenta,
        &[LineOp::Row { target: 1, coeffs: q(&[1, 1, 1]) }, LineOp::Column { target: 0, coeffs: q(&[-1, -1, 1, 0]) }],
    )
    .unwrap();
    let m2 = shown(&t, &m2);
    assert_eq!(m2[0][0], "p1 + p2 - p3 - p6");
    assert_eq!(m2[1][0], "p1 + p2");
    assert_eq!(m2[2][0], "-p5 + p6 + p7");
    assert_eq!(m2[1][3], "p1 + p2 + p3 + p4 + p5 + p6 + p7 + p8 + p9 + p10 + p11");
}

#[test]
fn fig6_certificate() {
    let t = tree("fig6");
    let forms = parse_forms(&fixture("fig6.forms"), t.n_leaves()).unwrap();
    let oracle = Oracle::new(KernelBudget::default());
    let c = verify_certificate(&t, &forms, &ideal_of_minors(&t), &oracle).unwrap();
    assert!(c.verified, "{:?}", c.failure);
    let pv = t.params().vars();
    let imgs: Vec<String> = c.images.iter().map(|r| format_monomial(&r.as_ref().unwrap().monomial, pv)).collect();
    assert_eq!(imgs[0], "tau1*th1^2");
    assert_eq!(imgs[1], "th1^2*z");
    assert_eq!(imgs[2], "th1^3");
    assert_eq!(imgs[10], "z^3");
    assert_eq!(c.oracle_agrees, Some(true));
}

#[test]
fn fig6_sandwich() {
    let t = tree("fig6");
    let j = stagedtoric::algebra::degrevlex_basis(&ideal_of_minors(&t), t.n_leaves(), &GbLimits::default()).unwrap();
    let v = t.p_vars();
    for g in model_invariants(&t) {
        assert!(j.contains(&g), "{}", format_polynomial(&g, &v));
    }
}

#[test]
fn fig6_random_search_is_seeded() {
    let t = tree("fig6");
    let oracle = Oracle::new(KernelBudget::default());
    let hit = stagedtoric::minors::random_search(&t, 2, 2000, &oracle).unwrap().expect("seed 2 succeeds");
    assert_eq!(hit.trial, 1300);
    assert!(hit.certificate.verified);
    assert_eq!(hit.certificate.oracle_agrees, Some(true));
    let again = stagedtoric::minors::random_search(&t, 2, 2000, &oracle).unwrap().unwrap();
    assert_eq!(again.ops, hit.ops);
    assert!(stagedtoric::minors::random_search(&t, 2, 1, &oracle).unwrap().is_none());
}

#[test]
fn balanced_tree_certified_by_identity() {
    let t = tree("fig3a");
    let oracle = Oracle::new(KernelBudget::default());
    let hit = stagedtoric::minors::random_search(&t, 0, 1, &oracle).unwrap().expect("trial 0");
    assert_eq!(hit.trial, 0);
    assert_eq!(hit.certificate.oracle_agrees, Some(true));
}

