//! Profile, monogamy and block-entropy invariants over random parameters.

use lrchain::entanglement::{
    check_monogamy, entanglement_profile, entanglement_profile_with, ProfileOptions,
};
use lrchain::entropy::{block_entropy, default_lengths};
use lrchain::{correlator_table, ModelParams, QuadratureConfig};
use proptest::prelude::*;

fn params(mu: f64, delta: f64, alpha: f64, beta: f64) -> ModelParams {
    ModelParams::unit_hopping(mu, delta, alpha, beta).unwrap()
}

fn draw() -> impl Strategy<Value = ModelParams> {
    (-12.0..12.0f64, 0.2..2.0f64, any::<bool>(), 0.05..4.0f64, 0.05..4.0f64)
        .prop_map(|(mu, d, neg, a, b)| params(mu, if neg { -d } else { d }, a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tangle_is_squared_concurrence_and_bounds_hold(p in draw()) {
        let prof = entanglement_profile(&p, 200, &QuadratureConfig::default()).unwrap();
        for (c, t) in prof.c_d.iter().zip(&prof.tau_d) {
            prop_assert!((0.0..=1.0).contains(c));
            prop_assert_eq!(*t, c * c);
        }
        for w in prof.c_partial.windows(2).chain(prof.tau_partial.windows(2)) {
            prop_assert!(w[1] >= w[0]);
        }
        let m = check_monogamy(&prof);
        prop_assert!(m.holds, "{:?}", m.violations);
    }

    #[test]
    fn doubling_dmax_keeps_converged_total(p in draw()) {
        let q = QuadratureConfig::default();
        let short = entanglement_profile_with(&p, &ProfileOptions::exhaustive(150), &q).unwrap();
        prop_assume!(short.converged);
        let long = entanglement_profile_with(&p, &ProfileOptions::exhaustive(300), &q).unwrap();
        prop_assert!((short.c_inf - long.c_inf).abs() < 1e-10);
    }
}

#[test]
fn critical_entropy_is_non_decreasing() {
    let p = params(-5.0, 1.3, 0.5108256237659907, 0.511);
    let tbl = correlator_table(&p, 256, &QuadratureConfig::default()).unwrap();
    let s: Vec<f64> = default_lengths(256)
        .iter()
        .map(|&l| block_entropy(l, &tbl).unwrap())
        .collect();
    for w in s.windows(2) {
        assert!(w[1] >= w[0] - 1e-12, "{s:?}");
    }
}
