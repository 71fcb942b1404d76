//! Daily fixture synthesis: a piecewise plateau/ramp level curve modulated
//! by a day-of-week pattern, an annual cycle and MA(1) intensity noise,
//! then Poisson counts with two exact repairs (the 10% order statistic and
//! the first-epidemic window total).

use chrono::{Datelike, NaiveDate};
use emt_core::rng::{self, CounterStream};

use crate::targets::DailySpec;

pub struct DailySeriesOut {
    pub code: &'static str,
    pub population: u64,
    pub start: NaiveDate,
    pub counts: Vec<u64>,
}

/// Linear interpolation from (x0, y0) to (x1, y1) through the bend points
/// that fall strictly inside the span. Endpoint days are written too.
fn fill_span(
    level: &mut [f64],
    (x0, y0): (usize, f64),
    (x1, y1): (usize, f64),
    bends: &[(usize, f64)],
    used: &mut [bool],
) {
    let mut pts = vec![(x0, y0)];
    let (lo, hi) = if y0 <= y1 { (y0, y1) } else { (y1, y0) };
    for (i, &(bx, by)) in bends.iter().enumerate() {
        if bx > x0 && bx < x1 {
            assert!(
                by >= lo && by <= hi,
                "bend ({bx}, {by}) leaves the span range [{lo}, {hi}]"
            );
            assert!(!used[i], "bend {bx} claimed twice");
            used[i] = true;
            pts.push((bx, by));
        }
    }
    pts.sort_unstable_by_key(|&(x, _)| x);
    pts.push((x1, y1));
    for w in pts.windows(2) {
        let ((a, ya), (b, yb)) = (w[0], w[1]);
        assert!(b > a, "bend days must be distinct within a span");
        for t in a..=b {
            let x = (t - a) as f64 / (b - a) as f64;
            level[t] = ya + (yb - ya) * x;
        }
    }
}

/// Piecewise-linear level curve: constant plateaus joined by ramps that pass
/// through the spec's bend points. Bends shape onsets and declines (steps,
/// sags, knees) without moving any plateau.
fn level_curve(spec: &DailySpec) -> Vec<f64> {
    let n = spec.n;
    let mut level = vec![0.0f64; n];
    let p = spec.plateaus;
    let mut used = vec![false; spec.bends.len()];
    let edge = |i: usize| -> (usize, usize, f64) {
        let (mid, half, lvl) = p[i];
        (mid - half, mid + half, lvl)
    };

    let (first_l, _, first_lvl) = edge(0);
    if first_l > 0 {
        fill_span(
            &mut level,
            (0, spec.head_level),
            (first_l, first_lvl),
            spec.bends,
            &mut used,
        );
    }
    for i in 0..p.len() {
        let (l, r, lvl) = edge(i);
        assert!(r < n, "plateau {i} runs past the series end");
        for lv in level.iter_mut().take(r + 1).skip(l) {
            *lv = lvl;
        }
        if i + 1 < p.len() {
            let (nl, _, nlvl) = edge(i + 1);
            assert!(nl > r, "plateaus {i} and {} overlap", i + 1);
            fill_span(&mut level, (r, lvl), (nl, nlvl), spec.bends, &mut used);
        }
    }
    let (_, last_r, last_lvl) = edge(p.len() - 1);
    fill_span(
        &mut level,
        (last_r, last_lvl),
        (n - 1, spec.tail_level),
        spec.bends,
        &mut used,
    );
    assert!(
        used.iter().all(|&u| u),
        "a bend fell outside every ramp span"
    );
    for &(s, len, lvl) in spec.spikes {
        assert!(s + len <= n, "spike runs past the series end");
        for lv in level.iter_mut().skip(s).take(len) {
            *lv = lvl;
        }
    }
    level
}

fn intensities(spec: &DailySpec, level: &[f64]) -> Vec<f64> {
    let start = ymd(spec.start_ymd);
    let dow0 = start.weekday().num_days_from_monday() as usize;
    let [a1, b1, a2, b2] = spec.weekly;
    let tau = std::f64::consts::TAU;
    let mut eps_prev = 0.0;
    (0..spec.n)
        .map(|t| {
            let d = ((dow0 + t) % 7) as f64;
            let wk = a1 * (tau * d / 7.0).cos()
                + b1 * (tau * d / 7.0).sin()
                + a2 * (tau * 2.0 * d / 7.0).cos()
                + b2 * (tau * 2.0 * d / 7.0).sin();
            let ann = spec.annual_amp * (tau * (t as f64 - spec.annual_peak_day) / 365.25).cos();
            let eps = CounterStream::new(spec.seed ^ 0x4D41, t as u64).next_normal();
            let ma = spec.ma_sigma * (eps + spec.ma_theta * eps_prev);
            eps_prev = eps;
            (level[t] * (1.0 + wk + ann) + ma).max(1.0)
        })
        .collect()
}

/// Force the k-th smallest count to equal `val` by nudging the values
/// closest to the boundary onto it.
fn pin_quantile(counts: &mut [u64], k: usize, val: u64) {
    let mut below: Vec<usize> = (0..counts.len()).filter(|&i| counts[i] < val).collect();
    below.sort_by_key(|&i| (std::cmp::Reverse(counts[i]), i));
    let mut at = counts.iter().filter(|&&c| c == val).count();
    // too many strictly below: raise the largest of them onto the value
    while below.len() > k - 1 {
        let i = below.remove(0);
        counts[i] = val;
        at += 1;
    }
    // not enough mass at or below: pull the smallest of the larger ones down
    if below.len() + at < k {
        let mut above: Vec<usize> = (0..counts.len()).filter(|&i| counts[i] > val).collect();
        above.sort_by_key(|&i| (counts[i], i));
        for i in above {
            if below.len() + at >= k {
                break;
            }
            counts[i] = val;
            at += 1;
        }
    }
    let mut sorted: Vec<u64> = counts.to_vec();
    sorted.sort_unstable();
    assert_eq!(sorted[k - 1], val, "daily quantile pin failed");
}

/// Walk the window adding or removing single deaths on busy days until the
/// total matches. Only days comfortably above the quantile boundary are
/// touched, so this cannot disturb `pin_quantile`.
fn pin_window_total(counts: &mut [u64], lo: usize, hi: usize, total: u64) {
    let guard = 261;
    let cur: i64 = counts[lo..=hi].iter().map(|&v| v as i64).sum();
    let mut delta = total as i64 - cur;
    while delta != 0 {
        let before = delta;
        for t in lo..=hi {
            if delta == 0 {
                break;
            }
            if delta > 0 && counts[t] >= guard - 1 {
                counts[t] += 1;
                delta -= 1;
            } else if delta < 0 && counts[t] >= guard {
                counts[t] -= 1;
                delta += 1;
            }
        }
        assert_ne!(before, delta, "window-total repair stalled");
    }
}

fn ymd((y, m, d): (i32, u32, u32)) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

pub fn build_daily(spec: &DailySpec) -> DailySeriesOut {
    let level = level_curve(spec);
    let lambda = intensities(spec, &level);
    let mut counts: Vec<u64> = lambda
        .iter()
        .enumerate()
        .map(|(t, &l)| rng::poisson(l, spec.seed, t as u64))
        .collect();
    if let Some((k, val)) = spec.quantile_pin {
        pin_quantile(&mut counts, k, val);
    }
    if let Some((lo, hi, total)) = spec.window_total {
        pin_window_total(&mut counts, lo, hi, total);
        debug_assert_eq!(counts[lo..=hi].iter().sum::<u64>(), total);
    }
    DailySeriesOut {
        code: spec.code,
        population: spec.population,
        start: ymd(spec.start_ymd),
        counts,
    }
}

pub fn daily_csv(s: &DailySeriesOut) -> String {
    let mut out = String::from("date,deaths,population,country,age_group\n");
    let mut date = s.start;
    for &v in &s.counts {
        out.push_str(&format!("{},{},{},{},0+\n", date, v, s.population, s.code));
        date += chrono::Duration::days(1);
    }
    out
}
