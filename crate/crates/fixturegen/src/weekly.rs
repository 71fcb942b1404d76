//! Weekly fixture synthesis.
//!
//! Each (country, age) series is built per year from a seasonal profile,
//! then repaired to hit the exact integer pins in `targets`: the window
//! totals over weeks 1–10 and 11–23 of every history year, the 6th-smallest
//! count of every history year (the 10% quantile is an order statistic, so
//! it can be pinned by construction), and the 2020 window totals plus the
//! four week pins that fix the shifted-window sums.

use chrono::NaiveDate;
use emt_core::ingest::{iso_week_start, iso_weeks_in_year};
use emt_core::rng::CounterStream;

use crate::targets::{AgeSpecW, CountrySpec};

pub struct WeeklySeriesOut {
    pub code: &'static str,
    pub age: &'static str,
    pub population: u64,
    pub start: NaiveDate,
    /// History years in order, then 2020 weeks 1..=26.
    pub counts: Vec<u64>,
}

/// Winter weights over weeks 1..=10 (mean exactly 1).
const WIN1_SHAPE: [f64; 10] = [1.06, 1.05, 1.03, 1.02, 1.00, 0.99, 0.98, 0.97, 0.96, 0.94];
/// Spring weights over weeks 11..=23 (mean exactly 1).
const WIN2_SHAPE: [f64; 13] = [
    1.14, 1.10, 1.07, 1.04, 1.02, 1.00, 0.98, 0.96, 0.95, 0.94, 0.94, 0.93, 0.93,
];

fn noise(seed: u64, age_idx: usize, year: i32, week: usize) -> f64 {
    let index = (age_idx as u64) << 32 | (year as u64 - 2000) << 16 | week as u64;
    CounterStream::new(seed, index).next_normal()
}

/// Smooth seasonal level for one week of a history year, anchored on the
/// window means and the trough level.
fn profile_level(w: usize, weeks: usize, h1: f64, h2: f64, trough: f64) -> f64 {
    match w {
        1..=10 => h1 * WIN1_SHAPE[w - 1],
        11..=23 => h2 * WIN2_SHAPE[w - 11],
        24 => trough * 1.060,
        25 => trough * 1.045,
        26 => trough * 1.035,
        27 => trough * 1.030,
        28..=34 => trough * 1.020,
        35..=47 => {
            let t = (w - 35) as f64 / 12.0;
            trough * (1.03 + t * 0.27)
        }
        _ => {
            // weeks 48..=52/53: climb towards next winter
            let t = (w - 48) as f64 / (weeks - 48) as f64;
            trough * 1.32 + t * (1.12 * h1 - 1.32 * trough)
        }
    }
}

/// Move a window's total to `target` by spreading the difference evenly
/// while keeping every week at or above `floor` (the quantile shelf).
fn repair_window(row: &mut [u64], w_lo: usize, w_hi: usize, target: u64, floor: u64) {
    let win = &mut row[w_lo - 1..w_hi];
    for v in win.iter_mut() {
        *v = (*v).max(floor);
    }
    let len = win.len() as i64;
    let cur: i64 = win.iter().map(|&v| v as i64).sum();
    let mut delta = target as i64 - cur;
    if delta >= 0 {
        let base = delta.div_euclid(len);
        let rem = delta.rem_euclid(len);
        for (i, v) in win.iter_mut().enumerate() {
            *v += (base + if (i as i64) < rem { 1 } else { 0 }) as u64;
        }
        return;
    }
    let headroom: i64 = win.iter().map(|&v| (v - floor) as i64).sum();
    assert!(
        headroom >= -delta,
        "window {w_lo}..{w_hi} cannot reach {target} above floor {floor}"
    );
    while delta < 0 {
        // shave the tallest weeks first; deterministic and floor-safe
        let i = (0..win.len()).max_by_key(|&i| (win[i], usize::MAX - i)).unwrap();
        let cut = ((win[i] - floor) as i64).min(-delta).min(1 + (win[i] - floor) as i64 / 8);
        win[i] -= cut as u64;
        delta += cut;
    }
}

/// Make the 6th-smallest count of the year exactly `q`: five pool weeks go
/// strictly below, one sits at `q`, and everything else is clamped to at
/// least `q + 3`. The pool (weeks 28–34) is outside every repaired window.
fn pin_quantile(row: &mut [u64], q: u64) {
    assert!(q > 8, "quantile target too small to pin");
    let pool: [u64; 7] = [q - 7, q - 5, q - 4, q - 2, q - 1, q, q + 2];
    for (i, v) in pool.iter().enumerate() {
        row[27 + i] = *v;
    }
    for (i, v) in row.iter_mut().enumerate() {
        let week = i + 1;
        if (28..=34).contains(&week) {
            continue;
        }
        if week <= 23 {
            assert!(
                *v >= q + 3,
                "analysis-window week {week} fell below the quantile shelf ({} < {})",
                *v,
                q + 3
            );
        } else if *v < q + 3 {
            *v = q + 3 + (week as u64 % 4);
        }
    }
}

/// Deterministic nearest-integer for pinning 2020 weeks.
fn round_i(x: f64) -> i64 {
    x.round() as i64
}

fn build_2020(a: &AgeSpecW, h: &[f64]) -> Vec<u64> {
    let sum_h = |lo: usize, hi: usize| -> f64 { h[lo - 1..hi].iter().sum() };
    let mut d = vec![0i64; 26];

    // Week pins. For the all-ages series the pins make the shifted-window
    // sums land on their published values exactly (up to rounding of single
    // weeks); for the age splits they just shape a plausible epidemic.
    let base = a.s2_2020 as f64 - sum_h(11, 23);
    let (d10, d11, d23, d24);
    match &a.shift {
        Some(p) => {
            d10 = round_i(h[9] + p.e10);
            let e10 = d10 as f64 - h[9];
            let e23 = base + e10 - p.t_minus as f64;
            d23 = round_i(h[22] + e23);
            d11 = round_i(h[10] + p.e11);
            let e11 = d11 as f64 - h[10];
            let e24 = p.t_plus as f64 - base + e11;
            d24 = round_i(h[23] + e24);
        }
        None => {
            let e11 = -0.02 * h[10];
            let e23 = (a.e23_frac * base).max(-0.02 * h[22]);
            d10 = round_i(h[9] + 1.1 * (a.s1_2020 as f64 - sum_h(1, 10)) / 10.0);
            d11 = round_i(h[10] + e11);
            d23 = round_i(h[22] + e23);
            d24 = round_i(h[23] + 0.90 * e23);
        }
    }

    // Winter deficit weeks: rounded seasonal deficit, then an exact repair
    // of the week 1..=10 total with week 10 held fixed.
    let deficit = (a.s1_2020 as f64 - sum_h(1, 10)) / 10.0;
    for w in 1..=9 {
        d[w - 1] = round_i(h[w - 1] + deficit * WIN1_SHAPE[w - 1]);
    }
    d[9] = d10;

    // Epidemic weeks: linear trend between the pinned endpoints plus a
    // Gaussian bump scaled so the 11..=23 total lands exactly.
    let e11 = d11 as f64 - h[10];
    let e23 = d23 as f64 - h[22];
    let bump = |w: usize| -> f64 {
        let z = (w as f64 - a.epi_peak) / a.epi_width;
        (-0.5 * z * z).exp()
    };
    let lin =
        |w: usize| -> f64 { e11 + (e23 - e11) * ((w as f64 - 11.0) / 12.0).powf(a.epi_ramp_pow) };
    let target_mid: i64 = a.s2_2020 as i64 - d11 - d23;
    let sum_lin_h: f64 = (12..=22).map(|w| h[w - 1] + lin(w)).sum();
    let sum_bump: f64 = (12..=22).map(bump).sum();
    let s = (target_mid as f64 - sum_lin_h) / sum_bump;
    d[10] = d11;
    for w in 12..=22 {
        d[w - 1] = round_i(h[w - 1] + lin(w) + s * bump(w));
    }
    d[22] = d23;

    // Exact window repairs over the free weeks.
    let fix = |d: &mut [i64], lo: usize, hi: usize, target: i64| {
        let len = (hi - lo + 1) as i64;
        let cur: i64 = d[lo - 1..hi].iter().sum();
        let delta = target - cur;
        let base = delta.div_euclid(len);
        let rem = delta.rem_euclid(len);
        for i in 0..len {
            d[lo - 1 + i as usize] += base + if i < rem { 1 } else { 0 };
        }
    };
    fix(&mut d, 1, 9, a.s1_2020 as i64 - d10);
    fix(&mut d, 12, 22, target_mid);

    // Tail weeks after the shifted windows: a declining epidemic tail.
    d[23] = d24;
    let e24 = d24 as f64 - h[23];
    d[24] = round_i(h[24] + 0.7 * e24);
    d[25] = round_i(h[25] + 0.45 * e24);

    assert_eq!(d[0..10].iter().sum::<i64>(), a.s1_2020 as i64);
    assert_eq!(d[10..23].iter().sum::<i64>(), a.s2_2020 as i64);
    d.into_iter()
        .map(|v| {
            assert!(v > 0, "2020 count must be positive, got {v}");
            v as u64
        })
        .collect()
}

fn build_age(c: &CountrySpec, age_idx: usize) -> WeeklySeriesOut {
    let a = &c.ages[age_idx];
    let years: Vec<i32> = (c.first_year..=c.last_year).collect();
    let ny = years.len();
    assert_eq!(a.quantile_by_year.len(), ny);
    assert_eq!(a.h_win1_by_year.len(), ny);
    assert_eq!(a.h_win2_by_year.len(), ny);

    let mut rows: Vec<Vec<u64>> = Vec::with_capacity(ny);
    for (yi, &y) in years.iter().enumerate() {
        let weeks = iso_weeks_in_year(y) as usize;
        let (qy, q) = a.quantile_by_year[yi];
        assert_eq!(qy, y, "quantile table out of order for {}", c.code);
        let h1 = a.h_win1_by_year[yi] as f64 / 10.0;
        let h2 = a.h_win2_by_year[yi] as f64 / 13.0;
        let trough = q as f64 * 1.025;
        let mut row = vec![0u64; weeks];
        for w in 1..=weeks {
            let lvl = profile_level(w, weeks, h1, h2, trough);
            let e = 1.0 + 0.008 * noise(c.seed, age_idx, y, w);
            row[w - 1] = (lvl * e).round().max(1.0) as u64;
        }
        if c.code == "ew" {
            // Bank-holiday registration dips: texture only; the repair's
            // floor keeps them clear of the quantile shelf.
            row[21] = ((row[21] as f64) * 0.968).round() as u64;
            let xmas = weeks - 1;
            row[xmas] = ((row[xmas] as f64) * 0.955).round() as u64;
        }
        repair_window(&mut row, 1, 10, a.h_win1_by_year[yi], q + 4);
        repair_window(&mut row, 11, 23, a.h_win2_by_year[yi], q + 4);
        pin_quantile(&mut row, q);
        debug_assert_eq!(
            row[0..10].iter().sum::<u64>(),
            a.h_win1_by_year[yi],
            "window 1-10 broken after quantile pin"
        );
        debug_assert_eq!(row[10..23].iter().sum::<u64>(), a.h_win2_by_year[yi]);
        let mut sorted = row.clone();
        sorted.sort_unstable();
        assert_eq!(sorted[5], q, "6th smallest must equal the quantile pin");
        rows.push(row);
    }

    let h: Vec<f64> = (0..26)
        .map(|i| rows.iter().map(|r| r[i] as f64).sum::<f64>() / ny as f64)
        .collect();
    let d2020 = build_2020(a, &h);

    let mut counts = Vec::new();
    for r in &rows {
        counts.extend_from_slice(r);
    }
    counts.extend_from_slice(&d2020);

    WeeklySeriesOut {
        code: c.code,
        age: a.age,
        population: a.population,
        start: iso_week_start(c.first_year, 1).unwrap(),
        counts,
    }
}

pub fn build_country(c: &CountrySpec) -> Vec<WeeklySeriesOut> {
    (0..3).map(|i| build_age(c, i)).collect()
}

/// Render stacked CSV rows for one country file, all three age groups.
pub fn country_csv(series: &[WeeklySeriesOut]) -> String {
    let mut out = String::from("date,deaths,population,country,age_group\n");
    for s in series {
        let mut date = s.start;
        for &v in &s.counts {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                date, v, s.population, s.code, s.age
            ));
            date += chrono::Duration::days(7);
        }
    }
    out
}
