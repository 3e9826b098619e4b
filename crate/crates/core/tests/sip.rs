use stagedtoric::algebra::Monomial;
use stagedtoric::kernel::{graded_kernel_piece, KernelBudget, Oracle};
use stagedtoric::sip::{
    depth_cut, detect_sip, hybrid_certificate, hybrid_search, preimages_by_solve, preimages_by_transport,
    sip_change_of_variables, stratify, transport, valid_indices, SipError,
};
use stagedtoric::tree::{parse_tree, LinearForm, StagedTree};

fn tree(name: &str) -> StagedTree {
    let path = format!("{}/../../fixtures/{name}.tree", env!("CARGO_MANIFEST_DIR"));
    parse_tree(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn oracle() -> Oracle {
    Oracle::new(KernelBudget::default())
}

#[test]
fn fig7_inclusion_indices() {
    let t = tree("fig7");
    let idx = |s: &str| valid_indices(&t, t.stage_index(s).unwrap());
    assert_eq!(idx("yellow"), [0, 1]);
    assert_eq!(idx("blue"), [0]);
    assert_eq!(idx("green"), [1]);
    assert!(detect_sip(&tree("coinflip")).is_ok());
}

#[test]
fn fig6_is_not_sip() {
    let t = tree("fig6");
    let e = detect_sip(&t).unwrap_err();
    assert_eq!(e.stage, "magenta");
    assert_eq!(e.attempts.len(), 3);
    assert!(matches!(sip_change_of_variables(&t, &oracle()), Err(SipError::NotSip(_))));
}

#[test]
fn fig7_change_of_variables() {
    let t = tree("fig7");
    let c = sip_change_of_variables(&t, &oracle()).unwrap();
    assert!(c.certificate.verified, "{:?}", c.certificate.failure);
    assert_eq!(c.certificate.oracle_agrees, Some(true));
    let n = t.n_leaves();
    assert!(c.certificate.forms.contains(&LinearForm::sum_of(n, 0..n)));
    let idx = detect_sip(&t).unwrap();
    assert_eq!(preimages_by_transport(&t, &idx, &|_| true).unwrap(), c.certificate.forms);
    assert_eq!(c.sip_indices["green"], 1);
}

#[test]
fn stratified_fixtures_have_no_linear_relations() {
    for name in ["coinflip", "fig3a", "fig6", "fig7"] {
        let s = stratify(&tree(name));
        assert!(s.tree.is_squarefree(), "{name}");
        assert!(graded_kernel_piece(&s.tree, 1, &KernelBudget::default()).unwrap().is_empty(), "{name}");
    }
}

/// The copied vertex differs from `v` only in the label leaving the ancestor.
#[test]
fn path_copies_swap_one_label() {
    for name in ["coinflip", "fig7"] {
        let t = tree(name);
        let idx = detect_sip(&t).unwrap();
        let s = stratify(&t);
        let ts = &s.tree;
        let sidx: Vec<usize> = s.origin.iter().map(|&c| idx[c]).collect();
        let mut checked = 0;
        for v in 0..ts.vertex_count() {
            for depth in 0..ts.depth_of(v) {
                let mut w = v;
                while ts.depth_of(w) > depth {
                    w = ts.parent(w).unwrap();
                }
                let c = ts.stage_of(w).unwrap();
                for j in 0..ts.stage(c).arity() {
                    let Some(u) = transport(ts, &sidx, v, depth, j) else { continue };
                    let (first, other) = (ts.params().label_var(c, sidx[c]), ts.params().label_var(c, j));
                    let mut expect: Monomial = ts.bracket_image(v);
                    expect.set(first, expect.get(first) - 1);
                    expect.set(other, expect.get(other) + 1);
                    assert_eq!(ts.bracket_image(u), expect, "{name}: v={} depth={depth} j={j}", ts.name(v));
                    if !ts.is_leaf(v) {
                        assert_eq!(ts.stage_of(u), ts.stage_of(v));
                    }
                    checked += 1;
                }
            }
        }
        assert!(checked > 0);
    }
}

#[test]
fn solve_and_transport_agree_on_reordered_trees() {
    for name in ["coinflip", "fig7"] {
        let t = tree(name);
        let idx = detect_sip(&t).unwrap();
        assert_eq!(preimages_by_solve(&t, &idx), preimages_by_transport(&t, &idx, &|_| true), "{name}");
    }
}

#[test]
fn remark_cases_of_the_hybrid_construction() {
    // the root alone as prefix on an SIP tree
    let t = tree("fig7");
    let h = hybrid_certificate(&t, &[t.root()], &oracle()).unwrap();
    assert!(h.certificate.verified);
    // the whole tree as prefix on a balanced tree
    let b = tree("fig3a");
    let all: Vec<usize> = (0..b.n_leaves()).map(|r| b.leaf(r)).collect();
    let h = hybrid_certificate(&b, &all, &oracle()).unwrap();
    assert!(h.certificate.verified);
    assert_eq!(h.certificate.oracle_agrees, Some(true));
    assert_eq!(depth_cut(&b, b.depth()), all);
}

#[test]
fn coin_flip_search_stops_at_the_root() {
    let s = hybrid_search(&tree("coinflip"), &oracle()).unwrap();
    assert_eq!(s.attempts.len(), 1);
    assert!(s.certificate.is_some());
}

#[test]
fn fig5_hybrid_at_depth_three() {
    let t = tree("fig5");
    let oracle = Oracle::new(KernelBudget::large());
    let h = hybrid_certificate(&t, &depth_cut(&t, 3), &oracle).unwrap();
    assert!(h.certificate.verified, "{:?}", h.certificate.failure);
    assert_eq!(h.certificate.oracle_agrees, Some(true));
    let pv = t.p_vars();
    let mut forms: Vec<String> = h.certificate.forms.iter().map(|f| f.format(&pv)).collect();
    forms.sort();
    let mut expected = [
        "p1 + p2", "p2", "p3", "p4 + p5", "p5", "p6", "p7 + p8", "p8", "p9", "p10 + p11", "p11", "p12",
    ];
    expected.sort();
    assert_eq!(forms, expected);
    assert_eq!(h.frontier, ["v1", "v2", "v3", "v4", "v5", "v6", "v7", "v8"]);
    let s = hybrid_search(&t, &oracle).unwrap();
    // the shallower cut below `a` and `b` already qualifies
    assert_eq!(s.attempts.last().unwrap().depth, 2);
    assert!(s.certificate.unwrap().certificate.verified);
}
