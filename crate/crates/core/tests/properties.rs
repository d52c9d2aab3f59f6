mod common;

use common::*;
use fmkernel::algebra::{rat, Poly};
use fmkernel::grading::InvariantGrading;
use proptest::prelude::*;

proptest! {
    #[test]
    fn products_commute_up_to_koszul_sign(p in poly(), q in poly(), pa: bool, qa: bool) {
        koszul_commutativity(&playground(), p, q, pa, qa)?;
    }

    #[test]
    fn differential_is_a_derivation(p in poly(), q in poly(), pa: bool) {
        leibniz(&playground(), p, q, pa)?;
    }

    #[test]
    fn differential_squares_to_zero(p in poly()) {
        square_zero(&playground(), p)?;
    }

    #[test]
    fn canonical_form_is_idempotent(t in prop::collection::vec((mono(), -3i64..4), 0..8)) {
        canonical_form(&playground(), t)?;
    }

    #[test]
    fn exact_rank_matches_naive_elimination(rows in matrix()) {
        rank_agreement(rows)?;
    }

    #[test]
    fn product_is_associative(p in poly(), q in poly(), r in poly()) {
        let a = playground();
        prop_assert_eq!(a.mul(&a.mul(&p, &q), &r), a.mul(&p, &a.mul(&q, &r)));
    }

    /// The invariant grading is additive and constant on every term of a
    /// differential, so the pieces it cuts out are subcomplexes.
    #[test]
    fn invariant_keys_are_preserved_by_d(m in mono()) {
        let a = playground();
        let g = InvariantGrading::of(&a);
        let k = g.key(&m);
        let d = a.d(&Poly::monomial(m, rat(1)));
        for (t, _) in d.iter() {
            prop_assert_eq!(g.key(t), k.clone());
        }
    }
}
