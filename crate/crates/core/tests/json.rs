mod common;

use common::{rng, small_fields};
use fdiv_core::dmod::dmod_from_tower;
use fdiv_core::gen;
use fdiv_core::json;
use fdiv_core::spectral::random_page;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn matrices_and_operators_roundtrip(seed in any::<u64>(), fi in 0usize..7) {
        let f = &small_fields()[fi];
        let mut rng = rng(seed);
        let t = gen::random_transition(&mut rng, 3, -3, 3, 3, f);
        prop_assert_eq!(json::decode_laurent_matrix(&json::encode_laurent_matrix(&t, f), f, "t").unwrap(), t);
        let u = gen::random_unimodular(&mut rng, 2, 3, 2, f);
        prop_assert_eq!(json::decode_poly_matrix(&json::encode_poly_matrix(&u, f), f, "u").unwrap(), u);
        let m = gen::random_mat(&mut rng, 3, 2, f);
        prop_assert_eq!(json::decode_mat(&json::encode_mat(&m, f), f, Some((3, 2)), "m").unwrap(), m);
        let f2 = json::decode_field(&json::encode_field(f)).unwrap();
        prop_assert_eq!(f2.spec(), f.spec());
    }

    #[test]
    fn towers_and_pages_roundtrip(seed in any::<u64>(), fi in 0usize..7) {
        let f = &small_fields()[fi];
        let mut rng = rng(seed);
        let t = gen::random_twisted_tower(&mut rng, 4, f);
        let back = json::decode_twisted_tower(&json::encode_twisted_tower(&t, f), f, "tower").unwrap();
        prop_assert_eq!(back, t);
        let p1 = gen::random_periodic_p1_tower(&mut rng, 2, 2, f);
        prop_assert_eq!(json::decode_p1_tower(&json::encode_p1_tower(&p1, f), f).unwrap(), p1);
        let page = random_page(&mut rng, 5, 4);
        prop_assert_eq!(json::decode_page(&json::encode_page(&page)).unwrap(), page);
    }

    #[test]
    fn modules_roundtrip_through_text(seed in any::<u64>(), p in prop::sample::select(vec![2u64, 3])) {
        let f = common::gf(p);
        let mut rng = rng(seed);
        let tower: Vec<_> = (0..2).map(|_| gen::random_unimodular(&mut rng, 2, 2, 1, &f)).collect();
        let m = dmod_from_tower(&tower, &f).unwrap();
        let text = serde_json::to_string(&json::envelope(seed, json::encode_module(&m))).unwrap();
        let v = json::parse(&text).unwrap();
        prop_assert_eq!(&v["schema"], json::SCHEMA);
        prop_assert_eq!(json::decode_module(&v, &f).unwrap(), m);
    }
}
