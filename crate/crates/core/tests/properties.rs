#[path = "support/properties.rs"]
mod properties;

use properties::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(config())]

    #[test]
    fn polynomial_ring_axioms(a in poly(5, 3), b in poly(5, 3), c in poly(4, 2)) {
        ring_axioms(&a, &b, &c)?;
    }

    #[test]
    fn buchberger_gives_reduced_idempotent_bases(gens in prop::collection::vec(poly(3, 2), 1..=3), order in order()) {
        buchberger_reduced(&gens, &order)?;
    }

    #[test]
    fn swap_keeps_the_atom_multiset(t in staged_tree(), pick in any::<usize>()) {
        swap_preserves_atoms(&t, pick)?;
    }

    #[test]
    fn resize_keeps_the_atom_multiset(t in staged_tree(), pick in any::<usize>()) {
        resize_preserves_atoms(&t, pick)?;
    }

    #[test]
    fn homogenize_is_idempotent(t in staged_tree()) {
        homogenize_idempotent(&t)?;
    }

    #[test]
    fn graded_piece_agrees_with_elimination(t in staged_tree()) {
        graded_piece_matches_elimination(&t)?;
    }
}
