use std::sync::Arc;

use mflab_core::experiments::{catalog_entry, Family};
use mflab_core::hmf::stable_hom_dim;
use mflab_core::{Context, Field, MatrixFactorization, SeriesRing, TruncSeries};
use proptest::prelude::*;

const TRUNC: usize = 6;

fn ring(field: Field) -> Arc<SeriesRing> {
    SeriesRing::new(field, vec!["x".into(), "y".into()], TRUNC).unwrap()
}

fn build(r: &Arc<SeriesRing>, terms: &[(u32, u32, i64)]) -> TruncSeries {
    let k = TruncSeries::zero(r).field().clone();
    TruncSeries::from_terms(r, terms.iter().map(|&(a, b, c)| (vec![a, b], k.from_i64(c))))
}

fn maximal(r: &Arc<SeriesRing>, terms: &[(u32, u32, i64)]) -> TruncSeries {
    let a = build(r, terms);
    &a - &a.truncate_below(1)
}

fn terms() -> impl Strategy<Value = Vec<(u32, u32, i64)>> {
    prop::collection::vec((0u32..5, 0u32..5, -20i64..20), 0..8)
}

fn field() -> impl Strategy<Value = Field> {
    prop_oneof![
        Just(Field::fp(7).unwrap()),
        Just(Field::fp(101).unwrap()),
        Just(Field::Q)
    ]
}

proptest! {
    #[test]
    fn series_ring_axioms(k in field(), a in terms(), b in terms(), c in terms()) {
        let r = ring(k);
        let (a, b, c) = (build(&r, &a), build(&r, &b), build(&r, &c));
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&(&a + &b) - &b, a.clone());
        prop_assert!((&a + &-&a).is_zero());
        prop_assert_eq!(&a * &TruncSeries::one(&r), a);
    }

    #[test]
    fn inverse_of_unit(k in field(), a in terms(), c0 in 1i64..7) {
        let r = ring(k);
        let unit = &maximal(&r, &a) + &TruncSeries::from_i64(&r, c0);
        let inv = unit.invert().unwrap();
        prop_assert_eq!(&unit * &inv, TruncSeries::one(&r));
    }

    #[test]
    fn non_units_do_not_invert(k in field(), a in terms()) {
        let r = ring(k);
        prop_assert!(maximal(&r, &a).invert().is_err());
    }

    #[test]
    fn order_is_additive(k in field(), a in terms(), b in terms()) {
        let r = ring(k);
        let (a, b) = (build(&r, &a), build(&r, &b));
        if let (Some(oa), Some(ob)) = (a.order(), b.order()) {
            if oa + ob <= TRUNC {
                prop_assert_eq!((&a * &b).order(), Some(oa + ob));
            } else {
                prop_assert!((&a * &b).is_zero());
            }
        }
    }

    #[test]
    fn parse_inverts_print(k in field(), a in terms()) {
        let r = ring(k);
        let a = build(&r, &a);
        prop_assert_eq!(TruncSeries::parse(&a.to_string(), &r).unwrap(), a);
    }
}

fn catalog_mfs() -> Vec<MatrixFactorization> {
    let k = Field::fp(7).unwrap();
    let mut out = Vec::new();
    out.extend(catalog_entry(Family::AnOneVariable, 4, &k, 10).unwrap().mfs);
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reduce_preserves_factorization(i in 0usize..4, j in 0usize..4) {
        let mfs = catalog_mfs();
        let (a, b) = (&mfs[i], &mfs[j]);
        let padded = a.direct_sum(b).unwrap().direct_sum(&MatrixFactorization::trivial(a.ring())).unwrap();
        prop_assert!(padded.validate().is_ok());
        let red = padded.reduce().unwrap();
        prop_assert!(red.validate().is_ok());
        prop_assert!(red.is_reduced());
        prop_assert_eq!(red.size(), a.size() + b.size());
        prop_assert_eq!(red.reduce().unwrap().size(), red.size());
    }

    #[test]
    fn shift_is_an_involution(i in 0usize..4) {
        let ctx = Context::new(10, 42);
        let a = &catalog_mfs()[i];
        prop_assert!(a.shift().shift().is_isomorphic(a, &ctx).unwrap());
    }

    #[test]
    fn stable_hom_is_additive(i in 0usize..4, j in 0usize..4, l in 0usize..4) {
        let ctx = Context::new(10, 42);
        let mfs = catalog_mfs();
        let (a, b, c) = (&mfs[i], &mfs[j], &mfs[l]);
        let sum = a.direct_sum(b).unwrap();
        let lhs = stable_hom_dim(&sum, c, &ctx).unwrap().value;
        let rhs = stable_hom_dim(a, c, &ctx).unwrap().value + stable_hom_dim(b, c, &ctx).unwrap().value;
        prop_assert_eq!(lhs, rhs);
        let lhs = stable_hom_dim(c, &sum, &ctx).unwrap().value;
        let rhs = stable_hom_dim(c, a, &ctx).unwrap().value + stable_hom_dim(c, b, &ctx).unwrap().value;
        prop_assert_eq!(lhs, rhs);
    }
}
