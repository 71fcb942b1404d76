//! Calibration report: run the analysis pipeline over freshly written
//! fixtures and print every measured quantity against its target band.
//! The generator parameters are tuned until `check` is all green, then the
//! seeds are frozen.

use std::fs;
use std::path::Path;

use emt_core::baselines::{historical_baseline, per_year_quantiles, quantile_baseline};
use emt_core::diagnostics::{
    gaussian_stepwise_select, harmonic_candidates, lag_candidates, overdispersion_ratio,
    CovariateId,
};
use emt_core::ingest::{parse_mortality_csv, slice_years, to_weekly_panel, weekly_observations,
    AgeGroup, ColumnMapping, MortalitySeries};
use emt_core::peaks::{extreme_midpoints, segment_epidemics};
use emt_core::scores::{cumulative_excess, cumulative_excess_per_million, excess_series,
    shifted_cumulative_excess};
use emt_core::tautstring::{fit_taut_string, TautConfig};
use emt_core::tvsmooth::{tv_smooth, TvConfig};

use crate::targets::{self, CountrySpec, BE_EXTREME_MIDPOINTS, TABLE1, TABLE2};

pub struct Report {
    pub failed: usize,
    pub total: usize,
}

impl Report {
    fn new() -> Self {
        Report { failed: 0, total: 0 }
    }

    fn line(&mut self, ok: bool, name: &str, detail: String) {
        self.total += 1;
        if !ok {
            self.failed += 1;
        }
        println!("{} {name}: {detail}", if ok { "  ok " } else { " FAIL" });
    }

    fn band(&mut self, name: &str, measured: f64, lo: f64, hi: f64) {
        let ok = measured >= lo && measured <= hi;
        self.line(ok, name, format!("{measured:.3} (band {lo:.3}..{hi:.3})"));
    }

    fn exact(&mut self, name: &str, measured: i64, target: i64) {
        self.line(
            measured == target,
            name,
            format!("{measured} (target {target})"),
        );
    }
}

fn load(dir: &Path, file: &str, country: &str, age: &str) -> MortalitySeries {
    let text = fs::read_to_string(dir.join(file))
        .unwrap_or_else(|e| panic!("cannot read {file}: {e}"));
    let mapping = ColumnMapping {
        filter_country: Some(country.to_string()),
        filter_age_group: Some(AgeGroup::parse(age).unwrap()),
        ..ColumnMapping::default()
    };
    parse_mortality_csv(text.as_bytes(), &mapping)
        .unwrap_or_else(|e| panic!("parse {file} [{country} {age}]: {e}"))
}

fn check_weekly(dir: &Path, c: &CountrySpec, r: &mut Report) {
    let table_years: Vec<i32> = (2016..=2019).collect();
    let hist_years: Vec<i32> = (c.first_year..=c.last_year).collect();
    for a in &c.ages {
        let name = format!("{} {}", c.code, a.age);
        let series = load(dir, &format!("weekly_{}.csv", c.code), c.code, a.age);
        let hist = slice_years(&series, c.first_year, c.last_year).unwrap();
        let panel = to_weekly_panel(&hist).unwrap();
        let per_m = 1.0e6 / a.population as f64;

        let t1 = TABLE1
            .iter()
            .find(|(co, ag, _)| *co == c.code && *ag == a.age)
            .unwrap();
        let quants = per_year_quantiles(&panel, &table_years, 0.10).unwrap();
        let worst = quants
            .iter()
            .zip(t1.2.iter())
            .map(|(&(_, q), &cell)| (q as f64 * per_m - cell).abs())
            .fold(0.0f64, f64::max);
        r.line(
            worst <= 1.0,
            &format!("{name} table-1 rates"),
            format!("max |Δ| {worst:.3} per million (tolerance 1)"),
        );

        let qb = quantile_baseline(&panel, &table_years, 0.10).unwrap();
        if c.code == "de" && a.age == "0+" {
            let med = qb.values[0] * per_m;
            r.line(
                med == 192.0,
                "de 0+ quantile baseline",
                format!("{med} per million (must be exactly 192)"),
            );
        }
        let hb = historical_baseline(&panel, &hist_years).unwrap();
        let obs = weekly_observations(&series, 2020).unwrap();
        let exq = excess_series(&obs, &qb).unwrap();
        let exh = excess_series(&obs, &hb).unwrap();

        let t2 = TABLE2
            .iter()
            .find(|(co, ag, _)| *co == c.code && *ag == a.age)
            .unwrap();
        let cells = [
            cumulative_excess_per_million(&exq, 1, 10).unwrap(),
            cumulative_excess_per_million(&exq, 11, 23).unwrap(),
            cumulative_excess_per_million(&exh, 1, 10).unwrap(),
            cumulative_excess_per_million(&exh, 11, 23).unwrap(),
        ];
        let worst = cells
            .iter()
            .zip(t2.2.iter())
            .map(|(m, t)| (m - t).abs())
            .fold(0.0f64, f64::max);
        r.line(
            worst <= 2.0,
            &format!("{name} table-2 cells"),
            format!(
                "measured [{:.1}, {:.1}, {:.1}, {:.1}] max |Δ| {worst:.2}",
                cells[0], cells[1], cells[2], cells[3]
            ),
        );

        if let Some(p) = &a.shift {
            let base = cumulative_excess(&exh, 11, 23).unwrap();
            let tm = shifted_cumulative_excess(&exh, 11, 23, -1).unwrap();
            let tp = shifted_cumulative_excess(&exh, 11, 23, 1).unwrap();
            r.band(
                &format!("{name} shift -1"),
                tm,
                p.t_minus as f64 * 0.99,
                p.t_minus as f64 * 1.01,
            );
            r.band(
                &format!("{name} shift +1"),
                tp,
                p.t_plus as f64 * 0.99,
                p.t_plus as f64 * 1.01,
            );
            if c.code == "de" {
                r.band("de 0+ base excess 11:23", base, 7602.0 * 0.99, 7602.0 * 1.01);
                let excl = historical_baseline(&panel, &[2016, 2017, 2019]).unwrap();
                let exx = excess_series(&obs, &excl).unwrap();
                let v = cumulative_excess(&exx, 11, 23).unwrap();
                r.band("de 0+ excl-2018 excess", v, 11639.0 * 0.99, 11639.0 * 1.01);
            }
        }
    }
}

fn period_of(id: &CovariateId, n: usize) -> Option<f64> {
    match id {
        CovariateId::Sin(j) | CovariateId::Cos(j) => Some(2.0 * n as f64 / *j as f64),
        CovariateId::Lag(_) => None,
    }
}

fn check_be_daily(dir: &Path, r: &mut Report) {
    let series = load(dir, "daily_be.csv", "be", "0+");
    let data = series.counts_f64();
    let fit = fit_taut_string(&data, &TautConfig::default()).unwrap();
    r.line(
        fit.converged,
        "be taut converged",
        format!("rounds {}, violations {}", fit.squeeze_rounds, fit.violations_remaining),
    );

    let mids = extreme_midpoints(&fit);
    r.exact("be extreme count", mids.len() as i64, 37);
    if mids.len() == BE_EXTREME_MIDPOINTS.len() {
        let deltas: Vec<i64> = mids
            .iter()
            .zip(BE_EXTREME_MIDPOINTS.iter())
            .map(|(&(_, m), &t)| m as i64 - t as i64)
            .collect();
        let worst = deltas.iter().map(|d| d.abs()).max().unwrap();
        r.line(
            worst <= 5,
            "be extreme midpoints",
            format!("max |Δ| {worst} days (tolerance 5)"),
        );
        if worst > 2 {
            let off: Vec<String> = deltas
                .iter()
                .enumerate()
                .filter(|(_, d)| d.abs() > 2)
                .map(|(i, d)| format!("#{i}@{}:{d:+}", BE_EXTREME_MIDPOINTS[i]))
                .collect();
            println!("      midpoint deltas > 2: {}", off.join(" "));
        }
    } else {
        let measured: Vec<usize> = mids.iter().map(|&(_, m)| m).collect();
        println!("      measured midpoints: {measured:?}");
    }

    let mut knots = fit.knots.iter().peekable();
    let mut pieces = Vec::new();
    while let Some(&k) = knots.next() {
        if let Some(&&nk) = knots.peek() {
            if nk >= 150 && k <= 560 {
                pieces.push(format!("[{k},{nk}]@{:.1}", fit.levels[k]));
            }
        }
    }
    println!("      pieces 150..560: {}", pieces.join(" "));
    for (lo, hi) in [(190usize, 230usize), (370, 410), (430, 470)] {
        let rmin = fit.tube_radii[lo..=hi].iter().cloned().fold(f64::INFINITY, f64::min);
        let rmax = fit.tube_radii[lo..=hi].iter().cloned().fold(0.0f64, f64::max);
        println!("      radii {lo}..{hi}: {rmin:.0}..{rmax:.0}");
    }

    let epis = segment_epidemics(&fit, &series.counts);
    if epis.is_empty() {
        r.line(false, "be epidemic 1", "no epidemics segmented".into());
    } else {
        let e = &epis[0];
        r.band("be epi1 start", e.start_index as f64, 210.0, 220.0);
        r.band("be epi1 peak", e.peak_index as f64, 388.0, 398.0);
        r.band("be epi1 end", e.end_index as f64, 449.0, 459.0);
        r.band(
            "be epi1 total",
            e.total_deaths as f64,
            69_619.0 * 0.99,
            69_619.0 * 1.01,
        );
        r.band("be epi1 start level", e.start_level, 262.0 * 0.95, 262.0 * 1.05);
        r.band("be epi1 peak level", e.peak_level, 320.0 * 0.95, 320.0 * 1.05);
        r.band("be epi1 end level", e.end_level, 274.0 * 0.95, 274.0 * 1.05);
    }

    let disp = overdispersion_ratio(&series.counts, &fit, 100, 0x5EED_0001).unwrap();
    r.band("be overdispersion %", disp.overdispersion_pct, 15.0, 25.0);

    let n = data.len();
    let harm = gaussian_stepwise_select(&fit.residuals, harmonic_candidates(n), 0.01).unwrap();
    let best7 = harm
        .selected
        .iter()
        .filter(|s| period_of(&s.id, n).is_some_and(|p| (6.5..=7.6).contains(&p)))
        .map(|s| s.p_value)
        .fold(f64::INFINITY, f64::min);
    r.line(
        best7 < 1e-30,
        "be 7-day harmonic",
        format!("best P {best7:.2e} (need < 1e-30)"),
    );
    let best365 = harm
        .selected
        .iter()
        .filter(|s| period_of(&s.id, n).is_some_and(|p| (300.0..=440.0).contains(&p)))
        .map(|s| s.p_value)
        .fold(f64::INFINITY, f64::min);
    r.line(
        best365 < 1e-3,
        "be 365-day harmonic",
        format!("best P {best365:.2e} (need < 1e-3)"),
    );
    let n_sel = harm.selected.len();
    println!(
        "      harmonics selected: {:?}",
        harm.selected
            .iter()
            .map(|s| (format!("{}", s.id), s.p_value))
            .collect::<Vec<_>>()
    );
    r.line(
        (1..=12).contains(&n_sel),
        "be harmonic count",
        format!("{n_sel} selected"),
    );

    let max_lag = 500;
    let lags = lag_candidates(&fit.residuals, max_lag).unwrap();
    let lag_sel = gaussian_stepwise_select(&fit.residuals[max_lag..], lags, 0.01).unwrap();
    let lag1 = lag_sel
        .selected
        .iter()
        .find(|s| matches!(s.id, CovariateId::Lag(1)))
        .map_or(f64::INFINITY, |s| s.p_value);
    r.line(
        lag1 < 1e-10,
        "be lag-1",
        format!("P {lag1:.2e} (need < 1e-10)"),
    );

    let mut sorted = series.counts.clone();
    sorted.sort_unstable();
    r.exact("be daily 10% quantile", sorted[401] as i64, 252);
}

fn sd(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt()
}

fn check_de_daily(dir: &Path, r: &mut Report, with_tv: bool) {
    let series = load(dir, "daily_de.csv", "de", "0+");
    let data = series.counts_f64();
    let fit = fit_taut_string(&data, &TautConfig::default()).unwrap();
    r.line(fit.converged, "de taut converged", format!("rounds {}", fit.squeeze_rounds));
    println!("      de extremes: {}", fit.extremes.len());

    let disp = overdispersion_ratio(&series.counts, &fit, 100, 0x5EED_0002).unwrap();
    r.band("de overdispersion %", disp.overdispersion_pct, 55.0, 75.0);

    if with_tv {
        for (order, target) in [(1usize, 106.0f64), (2, 106.5)] {
            let sm = tv_smooth(&data, &fit, order, &TvConfig::default()).unwrap();
            let resid: Vec<f64> = data.iter().zip(&sm.values).map(|(d, v)| d - v).collect();
            r.band(
                &format!("de tv order-{order} resid sd"),
                sd(&resid),
                target * 0.90,
                target * 1.10,
            );
        }
    }
}

fn check_ew_daily(dir: &Path, r: &mut Report) {
    let series = load(dir, "daily_ew.csv", "ew", "0+");
    let data = series.counts_f64();
    let fit = fit_taut_string(&data, &TautConfig::default()).unwrap();
    r.line(fit.converged, "ew taut converged", format!("rounds {}", fit.squeeze_rounds));

    let disp = overdispersion_ratio(&series.counts, &fit, 100, 0x5EED_0003).unwrap();
    r.band("ew overdispersion %", disp.overdispersion_pct, 20.0, 30.0);

    let mut sorted = series.counts.clone();
    sorted.sort_unstable();
    r.exact("ew daily 10% quantile", sorted[146] as i64, 1_289);
}

pub fn run(dir: &Path, with_tv: bool) -> Report {
    let mut r = Report::new();
    for c in [&targets::EW, &targets::DE, &targets::BE] {
        check_weekly(dir, c, &mut r);
    }
    check_be_daily(dir, &mut r);
    check_de_daily(dir, &mut r, with_tv);
    check_ew_daily(dir, &mut r);
    println!(
        "== {} checks, {} failed{}",
        r.total,
        r.failed,
        if with_tv { " (tv included)" } else { "" }
    );
    r
}
