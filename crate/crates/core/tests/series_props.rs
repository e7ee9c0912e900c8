mod common;

use common::*;
use limsup::funcs::{Exp, ExtendedLogPower};
use limsup::laws::{critical_dimension, hausdorff_verdict, Case, Hausdorff};
use limsup::systems::{ResonantSystem, SystemKind};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn condensation_and_partial_sums(seed in any::<u64>(), base in 0usize..CONDENSATION_BASES.len()) {
        let term = series_term(&mut ChaCha8Rng::seed_from_u64(seed));
        let res = condensation_agrees(&term, CONDENSATION_BASES[base]);
        prop_assert!(res.is_ok(), "{}", res.unwrap_err());
        if let Some(res) = partial_sums_agree(&term) {
            prop_assert!(res.is_ok(), "{}", res.unwrap_err());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn windows_partition_the_weights(k in 2u32..12, n in 1u32..6) {
        for kind in [SystemKind::Rationals, SystemKind::Circle, SystemKind::Lines21] {
            let sys = ResonantSystem::new(kind, k as f64);
            let (_, hi) = sys.window_bounds(n).unwrap();
            let (lo, _) = sys.window_bounds(n + 1).unwrap();
            prop_assert_eq!(hi, lo);
        }
    }
}

/// Below the critical exponent the `x^s`-measure is infinite, above it zero.
#[test]
fn hausdorff_verdicts_switch_at_the_dimension() {
    for (kind, k, taus) in [
        (SystemKind::Rationals, 6.0, vec![Exp::new(5, 2), Exp::from_integer(3), Exp::from_integer(4)]),
        (SystemKind::Circle, 2.0, vec![Exp::from_integer(3), Exp::from_integer(5)]),
        (SystemKind::Algebraic(2), 10.0, vec![Exp::from_integer(6)]),
    ] {
        let sys = ResonantSystem::new(kind, k);
        for tau in taus {
            let case = Case::new(sys.clone(), ExtendedLogPower::power(1.0, -tau), None);
            let d = critical_dimension(&case).unwrap().d;
            for i in 1..100 {
                let s = Exp::new(i, 100);
                if s == d {
                    continue;
                }
                let h = hausdorff_verdict(&case, &ExtendedLogPower::dim_power(1.0, s)).verdict;
                let want = if s < d { Hausdorff::Infinite } else { Hausdorff::Zero };
                assert_eq!(h, want, "{kind} tau {tau} s {s}");
            }
        }
    }
}
