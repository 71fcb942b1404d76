//! Data-free property suites: distributional behaviour of the scores, the
//! bookkeeping identities of baselines/excess, and optimality of the
//! monotone and taut-string fits against exhaustive oracles.

use emt_core::baselines::{historical_baseline, quantile_baseline};
use emt_core::ingest::{AgeGroup, WeeklyObservations, WeeklyPanel};
use emt_core::rng;
use emt_core::scores::{
    delta_confidence_interval, excess_series, population_dependence_demo, z_score_poisson_exact,
};
use emt_core::tautstring::{
    bounded_isotonic, fit_taut_string, SigmaMode, TautConfig,
};
use emt_core::testsupport::{min_extremes_in_tube, pinned_monotone_ls};
use proptest::prelude::*;

// ---------------------------------------------------------------- scaling

/// At a fixed relative excess, the Z-score grows like the square root of
/// the population while the P-score stays put.
#[test]
fn z_scales_with_sqrt_population_p_does_not() {
    let delta = 0.10;
    let populations = [1_000_000u64, 4_000_000];
    let report =
        population_dependence_demo(delta, &populations, 0.00019, 10_000, 20_260_401).unwrap();
    let [small, large] = &report.rows[..] else {
        panic!("expected two rows");
    };
    let z_ratio = large.mean_z / small.mean_z;
    assert!(
        (z_ratio - 2.0).abs() <= 0.2,
        "Z ratio {z_ratio} not within 10% of sqrt(4) = 2"
    );
    let p_ratio = large.mean_p / small.mean_p;
    assert!(
        (p_ratio - 1.0).abs() <= 0.05,
        "P ratio {p_ratio} drifted from 1"
    );
}

// ---------------------------------------------------------------- CI coverage

/// The quadratic-root interval for the relative excess covers the true
/// value at very nearly its nominal 95% level.
#[test]
fn delta_interval_coverage_is_nominal() {
    let lambda = 350.0;
    let delta = 0.06;
    let sims = 20_000usize;
    let mut covered = 0usize;
    for r in 0..sims {
        let x = rng::poisson(lambda * (1.0 + delta), 0xC0FF_EE01, r as u64);
        let z = (x as f64 - lambda) / lambda.sqrt();
        let (lo, hi) = delta_confidence_interval(z, lambda, 1.0, 0.95).unwrap();
        if lo <= delta && delta <= hi {
            covered += 1;
        }
    }
    let rate = covered as f64 / sims as f64;
    assert!(
        (0.935..=0.965).contains(&rate),
        "coverage {rate} outside [0.935, 0.965]"
    );
}

// ---------------------------------------------------------------- exact z

/// The exact Poisson Z is strictly increasing in the count and hugs the
/// normal approximation in the centre of a λ = 350 distribution.
///
/// The tail P(X ≥ x) of the discrete distribution corresponds to
/// P(N ≥ x − ½) of its normal approximation, so the comparison uses the
/// continuity-corrected z; measured gaps stay under 0.029 for |z| ≤ 2.
/// Without the correction the worst gap at the edge of that band is 0.0551
/// (x = 313), so the uncorrected form gets a looser 0.06 bound.
#[test]
fn exact_z_monotone_and_near_normal_in_centre() {
    let lambda = 350.0f64;
    let sd = lambda.sqrt();
    let lo = (lambda - 3.5 * sd) as u64;
    let hi = (lambda + 3.5 * sd) as u64;
    let mut prev = f64::NEG_INFINITY;
    for x in lo..=hi {
        let exact = z_score_poisson_exact(x, lambda).unwrap();
        assert!(
            exact.z > prev,
            "z not strictly increasing at x = {x}: {} after {prev}",
            exact.z
        );
        prev = exact.z;
        let corrected = (x as f64 - 0.5 - lambda) / sd;
        if corrected.abs() <= 2.0 {
            assert!(
                (exact.z - corrected).abs() < 0.05,
                "x = {x}: exact {} vs corrected normal {corrected}",
                exact.z
            );
        }
        let naive = (x as f64 - lambda) / sd;
        if naive.abs() <= 2.0 {
            assert!(
                (exact.z - naive).abs() < 0.06,
                "x = {x}: exact {} vs naive normal {naive}",
                exact.z
            );
        }
    }
}

// ---------------------------------------------------------------- identities

fn panel(rows: Vec<Vec<u64>>) -> WeeklyPanel {
    WeeklyPanel {
        country: "xx".into(),
        age_group: AgeGroup::All,
        years: (2015..2015 + rows.len() as i32).collect(),
        rows,
        population: 10_000_000,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Excess plus baseline reconstructs the observed counts bitwise, for
    /// both baseline flavours.
    #[test]
    fn excess_plus_baseline_is_deaths(
        history in proptest::collection::vec(
            proptest::collection::vec(0u64..200_000, 52), 3),
        target in proptest::collection::vec(0u64..200_000, 52),
    ) {
        let p = panel(history);
        let obs = WeeklyObservations {
            country: "xx".into(),
            age_group: AgeGroup::All,
            year: 2019,
            first_week: 1,
            counts: target.clone(),
            population: 10_000_000,
        };
        let years: Vec<i32> = p.years.clone();
        for baseline in [
            historical_baseline(&p, &years).unwrap(),
            quantile_baseline(&p, &years, 0.10).unwrap(),
        ] {
            let ex = excess_series(&obs, &baseline).unwrap();
            for i in 0..52 {
                let back = ex.values[i] + ex.baseline_values[i];
                prop_assert_eq!(
                    back.to_bits(),
                    (target[i] as f64).to_bits(),
                    "week {}: {} + {} != {}",
                    i + 1, ex.values[i], ex.baseline_values[i], target[i]
                );
            }
        }
    }

    /// Monotone least squares between pinned endpoint levels: the
    /// production clamp-after-pool route equals the exhaustive
    /// partition-enumeration oracle.
    #[test]
    fn pinned_monotone_fit_matches_enumeration(
        y in proptest::collection::vec(-10.0f64..10.0, 1..=12),
        a in -8.0f64..6.0,
        span in 0.0f64..8.0,
    ) {
        let b = a + span;
        let ours = bounded_isotonic(&y, true, a, b);
        let oracle = pinned_monotone_ls(&y, a, b);
        for (i, (u, v)) in ours.iter().zip(&oracle).enumerate() {
            prop_assert!((u - v).abs() < 1e-8, "index {i}: {u} vs {v}");
        }
        // Descending route by sign flip.
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        let ours_down = bounded_isotonic(&neg, false, -b, -a);
        let oracle_down: Vec<f64> =
            pinned_monotone_ls(&y, a, b).into_iter().map(|v| -v).collect();
        for (i, (u, v)) in ours_down.iter().zip(&oracle_down).enumerate() {
            prop_assert!((u - v).abs() < 1e-8, "descending index {i}: {u} vs {v}");
        }
    }

    /// Taut-string modality is minimal: sandwiched between exhaustive
    /// quantized searches over a slightly padded and a slightly shrunken
    /// tube (level snapping moves cumulative sums by at most n·grid/2, so
    /// the padded search must do at least as well as any continuous
    /// candidate, while the shrunken search can never beat one).
    #[test]
    fn taut_string_modality_is_minimal(
        levels in proptest::collection::vec(0i64..=8, 6..=10),
    ) {
        let grid = 0.25;
        let y: Vec<f64> = levels.iter().map(|&v| v as f64).collect();
        let n = y.len();
        let cfg = TautConfig {
            sigma_mode: SigmaMode::Fixed(1.0),
            max_squeeze_rounds: 0,
            ..TautConfig::default()
        };
        let fit = fit_taut_string(&y, &cfg).unwrap();
        let taut = fit.extremes.len();

        let shrunk = min_extremes_in_tube(&y, &fit.tube_radii, grid)
            .expect("interpolation is always grid-feasible");
        prop_assert!(
            taut <= shrunk,
            "taut string used {taut} extremes, shrunken grid search found {shrunk}"
        );

        let pad = n as f64 * grid / 2.0;
        let padded: Vec<f64> = fit.tube_radii.iter().map(|r| r + pad).collect();
        let generous = min_extremes_in_tube(&y, &padded, grid).unwrap();
        prop_assert!(
            generous <= taut,
            "padded grid search needed {generous} extremes, more than the taut {taut}"
        );
    }
}
