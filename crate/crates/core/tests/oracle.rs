mod common;

use common::{check_instance, random_instance, rng};

#[test]
fn rule_model_matches_brute_force_enumeration() {
    let mut r = rng(20_240_601);
    let mut compared = 0;
    let mut points = 0;
    for i in 0..300 {
        let inst = random_instance(&mut r);
        match check_instance(&inst) {
            Ok(0) => {}
            Ok(n) => {
                compared += 1;
                points += n;
            }
            Err(e) => panic!("instance {i} (T={}, K={}, kappa={}): {e}", inst.series.len(), inst.k, inst.kappa),
        }
    }
    assert!(compared >= 200, "only {compared} usable instances");
    assert!(points > 5_000);
}
