//! Expected-deaths baselines from historical weekly panels.
//!
//! Two baseline families are supported:
//!
//! * **Historical mean** — the per-week average over a set of reference
//!   years. Week 53 is averaged only over years that have an ISO week 53.
//! * **Year quantile** — one level per reference year (an order statistic of
//!   that year's weekly counts), combined across years by the median. This
//!   gives a constant baseline representing a "normal" week, robust to how
//!   many epidemic weeks each reference year contains.
//!
//! Baseline levels are quantized to multiples of 2^-20. Weekly counts stay
//! below 2^33 in any real dataset, so `deaths - level` is then exact in
//! `f64` (no bits are discarded), which is what makes the reconstruction
//! identity `excess + baseline == deaths` hold bitwise downstream.

use crate::ingest::WeeklyPanel;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("quantile q must satisfy 0 <= q < 1, got {0}")]
    BadQuantile(f64),
    #[error("year {0} is not present in the panel")]
    YearNotInPanel(i32),
    #[error("year {0} is not part of the baseline specification")]
    UnknownYear(i32),
    #[error("all reference years were excluded")]
    AllYearsExcluded,
    #[error("no reference years given")]
    NoYears,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum BaselineMethod {
    HistoricalMean,
    Quantile,
}

impl BaselineMethod {
    pub fn label(&self) -> &'static str {
        match self {
            BaselineMethod::HistoricalMean => "hist",
            BaselineMethod::Quantile => "quantile",
        }
    }
}

/// A baseline specification: which method, which reference years, and (for
/// the quantile method) which quantile.
#[derive(Clone, Debug)]
pub struct BaselineSpec {
    pub method: BaselineMethod,
    pub years: Vec<i32>,
    pub q: Option<f64>,
}

/// A realized baseline: one expected level per ISO week.
#[derive(Clone, Debug)]
pub struct Baseline {
    pub method: BaselineMethod,
    /// Expected count for ISO week `i + 1`; length 52 or 53.
    pub values: Vec<f64>,
    pub years_used: Vec<i32>,
    pub q: Option<f64>,
    pub excluded_years: Vec<i32>,
}

impl Baseline {
    /// Level for a 1-based ISO week number, if covered.
    pub fn level(&self, week: u32) -> Option<f64> {
        if week == 0 {
            return None;
        }
        self.values.get(week as usize - 1).copied()
    }
}

/// Round to the nearest multiple of 2^-20 (see module docs).
fn dyadic(x: f64) -> f64 {
    let scale = (1u64 << 20) as f64;
    (x * scale).round() / scale
}

fn check_years(panel: &WeeklyPanel, years: &[i32]) -> Result<(), BaselineError> {
    if years.is_empty() {
        return Err(BaselineError::NoYears);
    }
    for &y in years {
        if panel.row(y).is_none() {
            return Err(BaselineError::YearNotInPanel(y));
        }
    }
    Ok(())
}

/// Per-week mean of the reference years' counts.
pub fn historical_baseline(panel: &WeeklyPanel, years: &[i32]) -> Result<Baseline, BaselineError> {
    check_years(panel, years)?;
    let weeks = years
        .iter()
        .map(|&y| panel.row(y).unwrap().len())
        .max()
        .unwrap();
    let mut values = Vec::with_capacity(weeks);
    for w in 0..weeks {
        let mut sum = 0u64;
        let mut n = 0u64;
        for &y in years {
            if let Some(&c) = panel.row(y).unwrap().get(w) {
                sum += c;
                n += 1;
            }
        }
        values.push(dyadic(sum as f64 / n as f64));
    }
    Ok(Baseline {
        method: BaselineMethod::HistoricalMean,
        values,
        years_used: years.to_vec(),
        q: None,
        excluded_years: Vec::new(),
    })
}

/// 1-based order-statistic index for quantile `q` of `m` values: ⌈q·m⌉,
/// clamped to at least 1 so that `q = 0` selects the minimum.
fn order_index(q: f64, m: usize) -> usize {
    // The small slack keeps q*m from ceiling up on float fuzz when q*m is
    // mathematically an integer (e.g. 0.1 * 50).
    let raw = (q * m as f64 - 1e-9).ceil() as isize;
    raw.clamp(1, m as isize) as usize
}

/// The `q`-quantile (as an order statistic) of each reference year's weekly
/// counts. Returned in panel year order.
pub fn per_year_quantiles(
    panel: &WeeklyPanel,
    years: &[i32],
    q: f64,
) -> Result<Vec<(i32, u64)>, BaselineError> {
    if !(0.0..1.0).contains(&q) {
        return Err(BaselineError::BadQuantile(q));
    }
    check_years(panel, years)?;
    let mut out = Vec::with_capacity(years.len());
    for &y in years {
        let mut row = panel.row(y).unwrap().to_vec();
        row.sort_unstable();
        out.push((y, row[order_index(q, row.len()) - 1]));
    }
    Ok(out)
}

/// Constant baseline: the median of the per-year `q`-quantiles.
pub fn quantile_baseline(
    panel: &WeeklyPanel,
    years: &[i32],
    q: f64,
) -> Result<Baseline, BaselineError> {
    let quants = per_year_quantiles(panel, years, q)?;
    let mut levels: Vec<u64> = quants.iter().map(|&(_, v)| v).collect();
    levels.sort_unstable();
    let level = median_of_sorted(&levels);
    let weeks = years
        .iter()
        .map(|&y| panel.row(y).unwrap().len())
        .max()
        .unwrap();
    Ok(Baseline {
        method: BaselineMethod::Quantile,
        values: vec![dyadic(level); weeks],
        years_used: years.to_vec(),
        q: Some(q),
        excluded_years: Vec::new(),
    })
}

fn median_of_sorted(v: &[u64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] as f64 + v[n / 2] as f64) / 2.0
    }
}

/// Build the baseline a specification describes.
pub fn build_baseline(panel: &WeeklyPanel, spec: &BaselineSpec) -> Result<Baseline, BaselineError> {
    match spec.method {
        BaselineMethod::HistoricalMean => historical_baseline(panel, &spec.years),
        BaselineMethod::Quantile => {
            quantile_baseline(panel, &spec.years, spec.q.ok_or(BaselineError::BadQuantile(f64::NAN))?)
        }
    }
}

/// Drop reference years from a specification and rebuild the baseline.
///
/// Every dropped year must be part of the original specification, and at
/// least one year must remain.
pub fn exclude_years(
    panel: &WeeklyPanel,
    spec: &BaselineSpec,
    drop: &[i32],
) -> Result<Baseline, BaselineError> {
    for &d in drop {
        if !spec.years.contains(&d) {
            return Err(BaselineError::UnknownYear(d));
        }
    }
    let remaining: Vec<i32> = spec
        .years
        .iter()
        .copied()
        .filter(|y| !drop.contains(y))
        .collect();
    if remaining.is_empty() {
        return Err(BaselineError::AllYearsExcluded);
    }
    let reduced = BaselineSpec {
        method: spec.method,
        years: remaining,
        q: spec.q,
    };
    let mut baseline = build_baseline(panel, &reduced)?;
    baseline.excluded_years = drop.to_vec();
    Ok(baseline)
}

/// Per-calendar-year `q`-quantiles of a daily series' counts — the daily
/// analogue of [`per_year_quantiles`], used to set daily expected levels.
pub fn per_year_daily_quantiles(
    series: &crate::ingest::MortalitySeries,
    q: f64,
) -> Result<Vec<(i32, u64)>, BaselineError> {
    use chrono::Datelike;
    if !(0.0..1.0).contains(&q) {
        return Err(BaselineError::BadQuantile(q));
    }
    let mut by_year: std::collections::BTreeMap<i32, Vec<u64>> = std::collections::BTreeMap::new();
    for (i, &c) in series.counts.iter().enumerate() {
        by_year.entry(series.date(i).year()).or_default().push(c);
    }
    let mut out = Vec::new();
    for (year, mut vals) in by_year {
        vals.sort_unstable();
        out.push((year, vals[order_index(q, vals.len()) - 1]));
    }
    Ok(out)
}

/// Median of per-year daily quantiles, as a single daily level.
pub fn daily_quantile_level(
    series: &crate::ingest::MortalitySeries,
    q: f64,
) -> Result<f64, BaselineError> {
    let quants = per_year_daily_quantiles(series, q)?;
    let mut levels: Vec<u64> = quants.iter().map(|&(_, v)| v).collect();
    levels.sort_unstable();
    Ok(median_of_sorted(&levels))
}

/// CSV rows for a baseline (`week,level,method,q,years,excluded`).
pub fn baseline_to_csv(baseline: &Baseline) -> String {
    let years = baseline
        .years_used
        .iter()
        .map(|y| y.to_string())
        .collect::<Vec<_>>()
        .join(";");
    let excluded = baseline
        .excluded_years
        .iter()
        .map(|y| y.to_string())
        .collect::<Vec<_>>()
        .join(";");
    let q = baseline.q.map(|q| q.to_string()).unwrap_or_default();
    let mut out = String::from("week,level,method,q,years,excluded\n");
    for (i, v) in baseline.values.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            i + 1,
            v,
            baseline.method.label(),
            q,
            years,
            excluded
        ));
    }
    out
}
