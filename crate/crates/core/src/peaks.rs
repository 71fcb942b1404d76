//! Epidemic descriptors extracted from a piecewise-constant fit.
//!
//! An epidemic is a local-maximum plateau of the fit flanked by
//! local-minimum plateaus on both sides. Its *start* is the right endpoint
//! of the preceding minimum plateau (the last day at the valley level before
//! deaths begin to climb) and its *end* is the left endpoint of the
//! following minimum plateau. The peak day is the midpoint of the maximum
//! plateau. Because start and end sit on the valley plateaus, their fitted
//! levels are the valley levels themselves.

use chrono::NaiveDate;

use crate::tautstring::{ExtremeKind, PiecewiseConstantFit};

/// One segmented peak of the fitted mortality curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Epidemic {
    /// Right endpoint of the preceding local-minimum plateau.
    pub start_index: usize,
    /// Midpoint of the maximum plateau.
    pub peak_index: usize,
    /// Left endpoint of the following local-minimum plateau.
    pub end_index: usize,
    pub start_level: f64,
    pub peak_level: f64,
    pub end_level: f64,
    /// `end_index - start_index`, in periods.
    pub duration: usize,
    /// Sum of the raw counts over `start_index..=end_index`.
    pub total_deaths: u64,
}

/// The representative index of each extreme plateau, in fit order:
/// `floor((left + right) / 2)`.
pub fn extreme_midpoints(fit: &PiecewiseConstantFit) -> Vec<(ExtremeKind, usize)> {
    fit.extremes
        .iter()
        .map(|e| (e.kind, (e.left + e.right) / 2))
        .collect()
}

/// One [`Epidemic`] per maximum plateau that has a minimum plateau on both
/// sides. A fit with no such configuration (constant data, or a single
/// boundary peak) yields an empty list.
pub fn segment_epidemics(fit: &PiecewiseConstantFit, counts: &[u64]) -> Vec<Epidemic> {
    assert_eq!(
        counts.len(),
        fit.levels.len(),
        "counts and fit must cover the same indices"
    );
    let ex = &fit.extremes;
    let mut out = Vec::new();
    for w in ex.windows(3) {
        let (lo, mid, hi) = (w[0], w[1], w[2]);
        if mid.kind != ExtremeKind::Max {
            continue;
        }
        debug_assert!(lo.kind == ExtremeKind::Min && hi.kind == ExtremeKind::Min);
        let start = lo.right;
        let end = hi.left;
        let peak = (mid.left + mid.right) / 2;
        let total: u64 = counts[start..=end].iter().sum();
        out.push(Epidemic {
            start_index: start,
            peak_index: peak,
            end_index: end,
            start_level: fit.levels[start],
            peak_level: fit.levels[peak],
            end_level: fit.levels[end],
            duration: end - start,
            total_deaths: total,
        });
    }
    out
}

/// CSV table of epidemics with indices converted to dates, `anchor` being
/// the date of index 0.
pub fn epidemic_report(epidemics: &[Epidemic], anchor: NaiveDate) -> String {
    let mut out = String::from(
        "start_date,peak_date,end_date,start_level,peak_level,end_level,duration_days,total_deaths\n",
    );
    for e in epidemics {
        let date = |i: usize| anchor + chrono::Days::new(i as u64);
        out.push_str(&format!(
            "{},{},{},{:.2},{:.2},{:.2},{},{}\n",
            date(e.start_index),
            date(e.peak_index),
            date(e.end_index),
            e.start_level,
            e.peak_level,
            e.end_level,
            e.duration,
            e.total_deaths
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::CounterStream;
    use crate::tautstring::{fit_taut_string, ExtremeInterval, TautConfig};

    // Step plateaus with no noise: sigma estimates to 0, the tube collapses,
    // and the fit interpolates the data exactly — which pins down the
    // expected plateau edges so the index bookkeeping can be checked exactly.
    fn steps(plateaus: &[(usize, f64)]) -> (Vec<f64>, Vec<u64>) {
        let mut y = Vec::new();
        for &(len, level) in plateaus {
            for _ in 0..len {
                y.push(level);
            }
        }
        let counts: Vec<u64> = y.iter().map(|v| *v as u64).collect();
        (y, counts)
    }

    #[test]
    fn midpoints_follow_floor_rule() {
        let (y, _) = steps(&[(50, 400.0), (50, 100.0), (100, 900.0), (50, 150.0), (50, 500.0)]);
        let fit = fit_taut_string(&y, &TautConfig::default()).unwrap();
        let mids = extreme_midpoints(&fit);
        assert_eq!(mids.len(), fit.extremes.len());
        for ((kind, m), e) in mids.iter().zip(&fit.extremes) {
            assert_eq!(*kind, e.kind);
            assert_eq!(*m, (e.left + e.right) / 2);
        }
        // Floor rule on a hand-built interval pair.
        let mut fit2 = fit;
        fit2.extremes = vec![
            ExtremeInterval { kind: ExtremeKind::Min, left: 390, right: 396 },
            ExtremeInterval { kind: ExtremeKind::Max, left: 7, right: 7 },
        ];
        let mids2 = extreme_midpoints(&fit2);
        assert_eq!(mids2[0].1, 393);
        assert_eq!(mids2[1].1, 7);
    }

    #[test]
    fn step_construction_is_recovered_exactly() {
        let (y, counts) =
            steps(&[(50, 400.0), (50, 100.0), (100, 900.0), (50, 150.0), (50, 500.0)]);
        let fit = fit_taut_string(&y, &TautConfig::default()).unwrap();
        let eps = segment_epidemics(&fit, &counts);
        assert_eq!(eps.len(), 1, "extremes: {:?}", fit.extremes);
        let e = eps[0];
        assert_eq!(e.start_index, 99);
        assert_eq!(e.peak_index, 149);
        assert_eq!(e.end_index, 200);
        assert_eq!(e.duration, 101);
        assert_eq!(e.start_level, 100.0);
        assert_eq!(e.peak_level, 900.0);
        assert_eq!(e.end_level, 150.0);
        assert!(e.peak_level >= e.start_level.max(e.end_level));
        let brute: u64 = counts[99..=200].iter().sum();
        assert_eq!(e.total_deaths, brute);
        assert_eq!(brute, 100 + 900 * 100 + 150);
    }

    #[test]
    fn noisy_ramped_epidemics_are_segmented() {
        // Two epidemics with gentle ramps over an iid-noise floor — the
        // regime the squeeze loop is designed for (tube stays well above the
        // noise scale, so no interpolation artifacts).
        let n = 600;
        // Elevated head and tail give the boundary peaks interior flanking
        // minima, the way a mortality series entering mid-winter does.
        let shape = |i: usize| -> f64 {
            let ramp = |x: f64| x.clamp(0.0, 1.0);
            let head = ramp((60.0 - i as f64) / 40.0);
            let up1 = ramp((i as f64 - 80.0) / 60.0);
            let down1 = ramp((260.0 - i as f64) / 60.0);
            let up2 = ramp((i as f64 - 330.0) / 60.0);
            let down2 = ramp((540.0 - i as f64) / 60.0);
            let tail = ramp((i as f64 - 560.0) / 30.0);
            250.0 + 150.0 * head + 300.0 * up1.min(down1) + 250.0 * up2.min(down2) + 100.0 * tail
        };
        let y: Vec<f64> = (0..n)
            .map(|i| shape(i) + 15.0 * CounterStream::new(99, i as u64).next_normal())
            .collect();
        let counts: Vec<u64> = y.iter().map(|v| v.round().max(0.0) as u64).collect();
        let fit = fit_taut_string(&y, &TautConfig::default()).unwrap();
        assert!(fit.converged);
        let eps = segment_epidemics(&fit, &counts);
        assert_eq!(eps.len(), 2, "extremes: {:?}", fit.extremes);
        // Peak plateaus sit on [140, 200] and [390, 480].
        assert!((140..=200).contains(&eps[0].peak_index), "peak {}", eps[0].peak_index);
        assert!((390..=480).contains(&eps[1].peak_index), "peak {}", eps[1].peak_index);
        assert!(eps[0].end_index <= eps[1].start_index);
        for e in &eps {
            assert!(e.start_index < e.peak_index && e.peak_index < e.end_index);
            assert_eq!(e.duration, e.end_index - e.start_index);
            let brute: u64 = counts[e.start_index..=e.end_index].iter().sum();
            assert_eq!(e.total_deaths, brute);
            assert!(e.peak_level >= e.start_level.max(e.end_level));
        }
        assert!((eps[0].peak_level - 550.0).abs() < 40.0);
        assert!((eps[1].peak_level - 500.0).abs() < 40.0);
    }

    #[test]
    fn flattening_a_peak_removes_exactly_that_epidemic() {
        let two = &[
            (40, 300.0),
            (40, 100.0),
            (60, 800.0),
            (40, 120.0),
            (60, 600.0),
            (40, 110.0),
            (40, 350.0),
        ];
        let (y2, c2) = steps(two);
        let fit2 = fit_taut_string(&y2, &TautConfig::default()).unwrap();
        let eps2 = segment_epidemics(&fit2, &c2);
        assert_eq!(eps2.len(), 2);
        assert!(eps2[0].end_index <= eps2[1].start_index, "epidemics must be disjoint");

        // Same shape with the second peak levelled into its valleys.
        let one = &[
            (40, 300.0),
            (40, 100.0),
            (60, 800.0),
            (40, 120.0),
            (60, 115.0),
            (40, 110.0),
            (40, 350.0),
        ];
        let (y1, c1) = steps(one);
        let fit1 = fit_taut_string(&y1, &TautConfig::default()).unwrap();
        let eps1 = segment_epidemics(&fit1, &c1);
        assert_eq!(eps1.len(), 1);
        assert_eq!(eps1[0].peak_index, eps2[0].peak_index);
    }

    #[test]
    fn constant_series_has_no_epidemics() {
        let (y, counts) = steps(&[(64, 200.0)]);
        let fit = fit_taut_string(&y, &TautConfig::default()).unwrap();
        assert!(segment_epidemics(&fit, &counts).is_empty());
    }

    #[test]
    fn report_converts_indices_to_dates() {
        let anchor = NaiveDate::from_ymd_opt(2009, 1, 1).unwrap();
        let eps = vec![Epidemic {
            start_index: 0,
            peak_index: 393,
            end_index: 454,
            start_level: 262.0,
            peak_level: 320.0,
            end_level: 274.0,
            duration: 454,
            total_deaths: 69_619,
        }];
        let csv = epidemic_report(&eps, anchor);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "start_date,peak_date,end_date,start_level,peak_level,end_level,duration_days,total_deaths"
        );
        let row = lines.next().unwrap();
        assert!(row.starts_with("2009-01-01,2010-01-29,2010-03-31,"));
        assert!(row.ends_with(",454,69619"));
        assert!(lines.next().is_none());

        assert_eq!(epidemic_report(&[], anchor).lines().count(), 1);
    }
}
