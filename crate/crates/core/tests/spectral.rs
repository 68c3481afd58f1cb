mod common;

use common::rng;
use fdiv_core::spectral::{bound_edge, bound_upper, random_page, simulate};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn bounds_hold_for_every_degree(seed in any::<u64>(), sim_seed in any::<u64>()) {
        let page = random_page(&mut rng(seed), 5, 4);
        let sim = simulate(&page, sim_seed);
        for (n, &h) in sim.abutment.iter().enumerate() {
            prop_assert!(h <= bound_upper(&page, n));
            prop_assert!(bound_edge(&page, n, h).passed);
        }
    }

    #[test]
    fn euler_characteristic_is_conserved(seed in any::<u64>(), sim_seed in any::<u64>()) {
        let page = random_page(&mut rng(seed), 5, 4);
        let sim = simulate(&page, sim_seed);
        let chi: i64 = sim.abutment.iter().enumerate().map(|(n, &h)| if n % 2 == 0 { h as i64 } else { -(h as i64) }).sum();
        prop_assert_eq!(chi, page.euler_characteristic());
        for pg in &sim.pages {
            let c: i64 = pg.iter().map(|(&(s, t), &d)| if (s + t) % 2 == 0 { d as i64 } else { -(d as i64) }).sum();
            prop_assert_eq!(c, chi);
        }
    }

    #[test]
    fn pages_only_shrink(seed in any::<u64>(), sim_seed in any::<u64>()) {
        let page = random_page(&mut rng(seed), 5, 4);
        let sim = simulate(&page, sim_seed);
        for w in sim.pages.windows(2) {
            for (k, &d) in &w[1] {
                prop_assert!(d <= w[0].get(k).copied().unwrap_or(0));
            }
        }
    }

    #[test]
    fn simulation_is_seeded(seed in any::<u64>(), sim_seed in any::<u64>()) {
        let page = random_page(&mut rng(seed), 5, 4);
        prop_assert_eq!(simulate(&page, sim_seed), simulate(&page, sim_seed));
    }
}
