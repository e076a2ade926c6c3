//! Cross-module property tests: every optimized path must agree exactly with
//! the naive oracle, and the pipeline invariants must survive random inputs.

use proptest::prelude::*;

use rothlab::correlation::{
    autocorrelation, balanced_profile, energy, trilinear, v_profile, window_sums, ScaledFn,
};
use rothlab::increment::{density_increment, rescale, IncrementConfig, IntProgression, Mode};
use rothlab::modring::choose_modulus;
use rothlab::oracle;
use rothlab::sets::{greedy_free, is_3ap_free, random_subset, DenseSet};

fn arb_set() -> impl Strategy<Value = DenseSet> {
    (8u64..=60, 5u32..=95, any::<u64>())
        .prop_map(|(n, pct, seed)| random_subset(n, pct as f64 / 100.0, seed).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn autocorrelation_matches_naive(set in arb_set()) {
        let ctx = choose_modulus(set.n()).unwrap();
        let profile = balanced_profile(&set, ctx).unwrap();
        let corr = autocorrelation(&profile).unwrap();
        for t in 0..ctx.m() {
            prop_assert_eq!(corr.rvals()[t as usize] as i128, oracle::r_naive(&profile, t));
        }
    }

    #[test]
    fn windows_match_naive_and_identity(set in arb_set(), d_raw in any::<u64>(), ell in 1u64..=8) {
        let ctx = choose_modulus(set.n()).unwrap();
        let profile = balanced_profile(&set, ctx).unwrap();
        let corr = autocorrelation(&profile).unwrap();
        let d = d_raw % ctx.m();
        let w = window_sums(&profile, d, ell).unwrap();
        prop_assert_eq!(w.vvalue(), oracle::v_naive(&profile, d, ell));
        let vp = v_profile(&corr, ell).unwrap();
        prop_assert_eq!(vp[d as usize], w.vvalue());
    }

    #[test]
    fn trilinear_matches_naive_and_integer_count(set in arb_set()) {
        let ctx = choose_modulus(set.n()).unwrap();
        let ind = ScaledFn::indicator(&set, ctx.m()).unwrap();
        let fast = trilinear(&ind, &ind, &ind).unwrap();
        prop_assert_eq!(&fast, &oracle::trilinear_naive(&ind, &ind, &ind));
        // m > 2N keeps modular progressions genuine, so the modular count
        // equals the integer count.
        let integer_count = oracle::count_3aps_integer(&set);
        prop_assert_eq!(fast, rothlab::Rat::from_integer(integer_count.into()));
    }

    #[test]
    fn free_sets_have_trivial_count_only(n in 8u64..=120) {
        let set = greedy_free(n).unwrap();
        let ctx = choose_modulus(n).unwrap();
        let ind = ScaledFn::indicator(&set, ctx.m()).unwrap();
        let lambda = trilinear(&ind, &ind, &ind).unwrap();
        prop_assert_eq!(lambda, rothlab::Rat::from_integer(set.size().into()));
    }

    #[test]
    fn energy_is_nonnegative_and_bounded_below(set in arb_set()) {
        let ctx = choose_modulus(set.n()).unwrap();
        let profile = balanced_profile(&set, ctx).unwrap();
        let corr = autocorrelation(&profile).unwrap();
        let e = energy(&corr).unwrap();
        prop_assert!(e.value() >= (corr.r0() as i128).pow(2));
    }

    #[test]
    fn rescale_preserves_freeness(n in 20u64..=120, seed in any::<u64>()) {
        // Free sets come from the greedy generator; progressions are random.
        use rand::{Rng, SeedableRng};
        let set = greedy_free(n).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let a = rng.gen_range(0..n);
        let s = rng.gen_range(1..=(n / 2).max(1)) as i64;
        let max_len = 1 + (n - 1 - a) / s as u64;
        let len = rng.gen_range(1..=max_len);
        let p = IntProgression { a, s, len };
        let rescaled = rescale(&set, &p).unwrap();
        prop_assert!(is_3ap_free(&rescaled).free);
    }

    #[test]
    fn increment_never_beats_the_exhaustive_oracle(set in arb_set()) {
        prop_assume!(set.size() > 0 && set.size() < set.n());
        let ctx = choose_modulus(set.n()).unwrap();
        let cfg = IncrementConfig { min_len: 4, ..IncrementConfig::default() };
        if let Ok(result) = density_increment(&set, ctx, &cfg) {
            let (_, best) = oracle::best_progression_exhaustive(&set, 4).unwrap();
            prop_assert!(result.new_density <= best,
                "increment {} beat oracle {}", result.new_density, best);
        }
    }

    #[test]
    fn certified_mode_is_never_denser_than_greedy(set in arb_set()) {
        prop_assume!(set.size() > 0 && set.size() < set.n());
        let ctx = choose_modulus(set.n()).unwrap();
        let base = IncrementConfig { min_len: 2, ..IncrementConfig::default() };
        let certified = density_increment(
            &set,
            ctx,
            &IncrementConfig { mode: Mode::Certified, ..base.clone() },
        );
        if let Ok(c) = certified {
            let g = density_increment(&set, ctx, &base).unwrap();
            prop_assert!(g.new_density >= c.new_density);
        }
    }
}

#[test]
fn dense_random_set_increment_stays_below_oracle_optimum() {
    // The increment is unconditional: it works on sets with progressions too.
    let set = random_subset(500, 0.5, 11).unwrap();
    assert!(!is_3ap_free(&set).free);
    let ctx = choose_modulus(500).unwrap();
    let cfg = IncrementConfig { min_len: 8, ..IncrementConfig::default() };
    let result = density_increment(&set, ctx, &cfg).unwrap();
    assert_eq!(result.new_density, set.density() + &result.eta);
    let (_, best) = oracle::best_progression_exhaustive(&set, 8).unwrap();
    assert!(result.new_density <= best);
}

#[test]
fn rescale_preserves_freeness_on_pipeline_outputs() {
    // 200 (set, progression) pairs where the progression comes from the
    // increment pipeline itself.
    let mut checked = 0;
    let mut seed = 0u64;
    while checked < 200 {
        seed += 1;
        let n = 30 + (seed * 7) % 170;
        let set = random_subset(n, 0.2, seed).unwrap();
        if !is_3ap_free(&set).free || set.size() == 0 {
            continue;
        }
        let ctx = choose_modulus(n).unwrap();
        let cfg = IncrementConfig { min_len: 2, ..IncrementConfig::default() };
        if let Ok(result) = density_increment(&set, ctx, &cfg) {
            let rescaled = rescale(&set, &result.progression).unwrap();
            assert!(is_3ap_free(&rescaled).free, "seed={seed}");
            assert_eq!(
                rescaled.density(),
                result.new_density,
                "rescaled density must equal the reported increment (seed={seed})"
            );
            checked += 1;
        }
    }
}
