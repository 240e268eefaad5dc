use nalgebra::DMatrix;
use proptest::prelude::*;

use relanosov_core::group::builtin::builtin_by_name;
use relanosov_core::group::{free_reduce, invert, Symbol};
use relanosov_core::linalg::{interpolate_inner_products, mu_gap, CartanStack, InnerProduct};

fn arb_word() -> impl Strategy<Value = Vec<Symbol>> {
    prop::collection::vec((0u16..4).prop_map(Symbol), 1..24)
}

fn arb_gram() -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-2.0f64..2.0, 9).prop_map(|v| {
        let a = DMatrix::from_vec(3, 3, v);
        &a * a.transpose() + DMatrix::identity(3, 3) * 0.1
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gap_of_inverse_is_the_complementary_gap(w in arb_word()) {
        let (_, rep) = builtin_by_name("pingpong-sym3").unwrap();
        let w = free_reduce(&w);
        let g = CartanStack::from_exact(&rep.image_word(&w), &rep.basis_scale).unwrap();
        let h = CartanStack::from_exact(&rep.image_word(&invert(&w)), &rep.basis_scale).unwrap();
        let d = rep.dim;
        for k in 1..d {
            let a = g.mu_gap(k).unwrap();
            let b = h.mu_gap(d - k).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "k={k}: {a} vs {b}");
        }
    }

    #[test]
    fn symmetric_square_keeps_the_first_gap(w in arb_word()) {
        let (_, base) = builtin_by_name("pingpong").unwrap();
        let (_, sq) = builtin_by_name("pingpong-sym2").unwrap();
        let a = CartanStack::from_exact(&base.image_word(&w), &base.basis_scale).unwrap().mu_gap(1).unwrap();
        let b = CartanStack::from_exact(&sq.image_word(&w), &sq.basis_scale).unwrap().mu_gap(1).unwrap();
        prop_assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn short_words_agree_with_direct_svd(w in prop::collection::vec((0u16..4).prop_map(Symbol), 1..5)) {
        let (_, rep) = builtin_by_name("pingpong-sym2").unwrap();
        let m = rep.image_word(&w);
        let stacked = CartanStack::from_exact(&m, &rep.basis_scale).unwrap().mu_gap(1).unwrap();
        let direct = mu_gap(&rep.float_image(&m), 1).unwrap();
        prop_assert!((stacked - direct).abs() <= 1e-8, "{stacked} vs {direct}");
    }

    #[test]
    fn interpolation_is_symmetric_in_time(a in arb_gram(), b in arb_gram(), t in 0.0f64..1.0) {
        let qa = InnerProduct::new(a).unwrap();
        let qb = InnerProduct::new(b).unwrap();
        let f = interpolate_inner_products(&qa, &qb, t).unwrap();
        let g = interpolate_inner_products(&qb, &qa, 1.0 - t).unwrap();
        let diff = (&f.gram - &g.gram).amax();
        prop_assert!(diff <= 1e-10 * f.gram.amax().max(1.0), "diff {diff}");
    }
}
