mod common;

use groupnav::social_force::SfmParams;
use proptest::prelude::*;

#[test]
fn head_on_pair_passes_without_contact() {
    let (min_d, arrived) = common::head_on_pair();
    assert!(min_d > 0.6, "closest approach {min_d:.3} m");
    assert!(arrived);
}

#[test]
fn group_stays_cohesive_over_transit() {
    let (max_pair, travelled) = common::group_transit();
    assert!(travelled > 7.0, "group only travelled {travelled:.2} m");
    assert!(max_pair < 3.0, "members spread to {max_pair:.2} m");
}

#[test]
fn members_do_not_overlap_in_transit() {
    let start = [(-4.0, -0.5), (-4.3, 0.0), (-4.0, 0.5)];
    let agents = start.iter().map(|&(x, y)| common::walker(x, y, x + 8.0, y, 0)).collect();
    for s in common::simulate(agents, 200) {
        for i in 0..3 {
            for j in i + 1..3 {
                assert!(s[i].position.distance(s[j].position) > 0.3);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn speed_cap_holds(seed in any::<u64>()) {
        let cap = SfmParams::default().max_speed_factor;
        prop_assert!(common::worst_speed_ratio(seed) <= cap + 1e-12);
    }
}
