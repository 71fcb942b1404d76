//! Parsing and shaping of mortality count series.
//!
//! Input files are CSV with one row per period holding an integer death
//! count. Deaths are counts, not measurements: real-valued death columns are
//! rejected rather than rounded. A file may stack several series (one per
//! country / age-group combination); the column mapping can filter to one.
//!
//! Weekly data are aligned to ISO-8601 weeks throughout: a weekly row's date
//! is the Monday that starts the ISO week, and a year contributes 52 or 53
//! weeks according to the ISO calendar.

use chrono::{Datelike, NaiveDate, Weekday};
use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("input contains no data rows (after filtering)")]
    EmptyInput,
    #[error("need at least two rows to establish the cadence")]
    TooShort,
    #[error("missing required column `{0}`")]
    MissingColumn(String),
    #[error("row {row}: cannot parse `{value}` as an ISO-8601 date")]
    BadDate { row: usize, value: String },
    #[error("row {row}: deaths value `{value}` is not a non-negative integer count")]
    BadCount { row: usize, value: String },
    #[error("row {row}: cannot parse population `{value}`")]
    BadPopulation { row: usize, value: String },
    #[error("row {row}: unknown age group `{value}` (expected 0+, 65+ or 64-)")]
    BadAgeGroup { row: usize, value: String },
    #[error("row {row}: date {found} is not after the previous row's date")]
    NonMonotoneDates { row: usize, found: NaiveDate },
    #[error("row {row}: expected {expected}, found {found} (gap or cadence change)")]
    GapInDates {
        row: usize,
        expected: NaiveDate,
        found: NaiveDate,
    },
    #[error("row {row}: {column} changes mid-series (file holds several series; filter to one)")]
    MixedMetadata { row: usize, column: String },
    #[error("population must be positive")]
    BadSeriesPopulation,
    #[error("dates advance by {0} days; only daily (1) and weekly (7) cadences are supported")]
    UnsupportedCadence(i64),
    #[error("weekly dates must fall on Mondays (ISO week starts); row {row} is a {weekday}")]
    NotWeekStart { row: usize, weekday: Weekday },
    #[error("operation requires a daily series")]
    NotDaily,
    #[error("operation requires a weekly series")]
    NotWeekly,
    #[error("series does not cover whole ISO years (year {year} is partial)")]
    PartialYear { year: i32 },
    #[error("series does not contain ISO year {0}")]
    YearNotPresent(i32),
    #[error("fewer than 7 days remain after trimming to whole ISO weeks")]
    NothingLeftAfterTrim,
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// Age band of a series. Bands follow the common reporting split at 65.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum AgeGroup {
    /// All ages ("0+").
    All,
    /// 65 and older ("65+").
    Over65,
    /// 64 and younger ("64-").
    Under65,
}

impl AgeGroup {
    pub fn parse(s: &str) -> Option<AgeGroup> {
        match s.trim() {
            "0+" | "all" | "total" => Some(AgeGroup::All),
            "65+" => Some(AgeGroup::Over65),
            "64-" => Some(AgeGroup::Under65),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            AgeGroup::All => "0+",
            AgeGroup::Over65 => "65+",
            AgeGroup::Under65 => "64-",
        }
    }
}

impl fmt::Display for AgeGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cadence {
    Daily,
    Weekly,
}

impl Cadence {
    pub fn step_days(&self) -> i64 {
        match self {
            Cadence::Daily => 1,
            Cadence::Weekly => 7,
        }
    }
}

/// A contiguous series of death counts for one country and age group.
///
/// Invariants, enforced at construction: counts are non-empty, population is
/// positive, and dates advance by exactly one cadence step per entry (so
/// `start_date` plus the index determines every date). Weekly series start
/// on a Monday.
#[derive(Clone, Debug)]
pub struct MortalitySeries {
    pub country: String,
    pub age_group: AgeGroup,
    pub cadence: Cadence,
    pub start_date: NaiveDate,
    pub counts: Vec<u64>,
    pub population: u64,
}

impl MortalitySeries {
    pub fn new(
        country: String,
        age_group: AgeGroup,
        cadence: Cadence,
        start_date: NaiveDate,
        counts: Vec<u64>,
        population: u64,
    ) -> Result<Self, IngestError> {
        if counts.is_empty() {
            return Err(IngestError::EmptyInput);
        }
        if population == 0 {
            return Err(IngestError::BadSeriesPopulation);
        }
        if cadence == Cadence::Weekly && start_date.weekday() != Weekday::Mon {
            return Err(IngestError::NotWeekStart {
                row: 1,
                weekday: start_date.weekday(),
            });
        }
        Ok(MortalitySeries {
            country,
            age_group,
            cadence,
            start_date,
            counts,
            population,
        })
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Date of entry `i`.
    pub fn date(&self, i: usize) -> NaiveDate {
        self.start_date + chrono::Duration::days(self.cadence.step_days() * i as i64)
    }

    pub fn end_date(&self) -> NaiveDate {
        self.date(self.counts.len() - 1)
    }

    /// Counts as `f64`, for the fitting modules.
    pub fn counts_f64(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64).collect()
    }
}

/// Death rate per million population, parallel to a [`MortalitySeries`].
#[derive(Clone, Debug)]
pub struct RateSeries {
    pub country: String,
    pub age_group: AgeGroup,
    pub cadence: Cadence,
    pub start_date: NaiveDate,
    pub values: Vec<f64>,
    pub population: u64,
}

/// How many days were dropped from each edge when aligning to ISO weeks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrimReport {
    pub leading_days: usize,
    pub trailing_days: usize,
}

/// Weekly counts of one ISO year, as extracted from a weekly series.
#[derive(Clone, Debug)]
pub struct WeeklyObservations {
    pub country: String,
    pub age_group: AgeGroup,
    pub year: i32,
    /// ISO week number of `counts[0]` (1-based).
    pub first_week: u32,
    pub counts: Vec<u64>,
    pub population: u64,
}

impl WeeklyObservations {
    /// ISO week numbers parallel to `counts`.
    pub fn weeks(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.counts.len()).map(move |i| self.first_week + i as u32)
    }
}

/// Per-year weekly count rows covering whole ISO years.
///
/// Invariant: `rows[i].len()` is the number of ISO weeks (52 or 53) of
/// `years[i]`, and years are strictly increasing.
#[derive(Clone, Debug)]
pub struct WeeklyPanel {
    pub country: String,
    pub age_group: AgeGroup,
    pub years: Vec<i32>,
    pub rows: Vec<Vec<u64>>,
    pub population: u64,
}

impl WeeklyPanel {
    pub fn row(&self, year: i32) -> Option<&[u64]> {
        let i = self.years.iter().position(|&y| y == year)?;
        Some(&self.rows[i])
    }

    /// Longest row length (53 if any covered year has 53 ISO weeks).
    pub fn max_weeks(&self) -> usize {
        self.rows.iter().map(|r| r.len()).max().unwrap_or(0)
    }
}

/// Column names used to read a mortality CSV, plus optional fallbacks and
/// filters for files that stack several series.
#[derive(Clone, Debug)]
pub struct ColumnMapping {
    pub date: String,
    pub deaths: String,
    pub population: String,
    pub country: String,
    pub age_group: String,
    /// Used when the file has no population column.
    pub fallback_population: Option<u64>,
    /// Used when the file has no country column.
    pub fallback_country: Option<String>,
    /// Used when the file has no age-group column.
    pub fallback_age_group: Option<AgeGroup>,
    /// Keep only rows with this country (case-insensitive).
    pub filter_country: Option<String>,
    /// Keep only rows with this age group.
    pub filter_age_group: Option<AgeGroup>,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        ColumnMapping {
            date: "date".into(),
            deaths: "deaths".into(),
            population: "population".into(),
            country: "country".into(),
            age_group: "age_group".into(),
            fallback_population: None,
            fallback_country: None,
            fallback_age_group: None,
            filter_country: None,
            filter_age_group: None,
        }
    }
}

/// Parse one mortality series out of a CSV stream.
///
/// The header row is required. Dates must be ISO-8601 (`YYYY-MM-DD`),
/// strictly increasing, and evenly spaced by one day or by seven days; the
/// spacing determines the cadence. Death counts must be plain non-negative
/// integers. Metadata columns (population, country, age group) must be
/// constant over the rows that survive filtering.
pub fn parse_mortality_csv<R: Read>(
    source: R,
    mapping: &ColumnMapping,
) -> Result<MortalitySeries, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(source);

    let headers = reader.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let date_col = col(&mapping.date).ok_or_else(|| IngestError::MissingColumn(mapping.date.clone()))?;
    let deaths_col =
        col(&mapping.deaths).ok_or_else(|| IngestError::MissingColumn(mapping.deaths.clone()))?;
    let pop_col = col(&mapping.population);
    let country_col = col(&mapping.country);
    let age_col = col(&mapping.age_group);

    if pop_col.is_none() && mapping.fallback_population.is_none() {
        return Err(IngestError::MissingColumn(mapping.population.clone()));
    }

    let mut dates: Vec<NaiveDate> = Vec::new();
    let mut counts: Vec<u64> = Vec::new();
    let mut population: Option<u64> = mapping.fallback_population;
    let mut country: Option<String> = mapping.fallback_country.clone();
    let mut age_group: Option<AgeGroup> = mapping.fallback_age_group;

    for (idx, record) in reader.records().enumerate() {
        let row = idx + 2; // 1-based, after the header
        let record = record?;

        if let (Some(c), Some(want)) = (country_col, &mapping.filter_country) {
            if !record[c].eq_ignore_ascii_case(want) {
                continue;
            }
        }
        if let (Some(c), Some(want)) = (age_col, &mapping.filter_age_group) {
            let got = AgeGroup::parse(&record[c]).ok_or_else(|| IngestError::BadAgeGroup {
                row,
                value: record[c].to_string(),
            })?;
            if got != *want {
                continue;
            }
        }

        let date_txt = &record[date_col];
        let date = NaiveDate::parse_from_str(date_txt, "%Y-%m-%d").map_err(|_| {
            IngestError::BadDate {
                row,
                value: date_txt.to_string(),
            }
        })?;

        let deaths_txt = &record[deaths_col];
        let deaths: u64 = deaths_txt.parse().map_err(|_| IngestError::BadCount {
            row,
            value: deaths_txt.to_string(),
        })?;

        if let Some(c) = pop_col {
            let txt = &record[c];
            let p: u64 = txt.parse().map_err(|_| IngestError::BadPopulation {
                row,
                value: txt.to_string(),
            })?;
            match population {
                None => population = Some(p),
                Some(prev) if prev != p => {
                    return Err(IngestError::MixedMetadata {
                        row,
                        column: mapping.population.clone(),
                    })
                }
                _ => {}
            }
        }
        if let Some(c) = country_col {
            let txt = record[c].to_string();
            match &country {
                None => country = Some(txt),
                Some(prev) if *prev != txt => {
                    return Err(IngestError::MixedMetadata {
                        row,
                        column: mapping.country.clone(),
                    })
                }
                _ => {}
            }
        }
        if let Some(c) = age_col {
            let got = AgeGroup::parse(&record[c]).ok_or_else(|| IngestError::BadAgeGroup {
                row,
                value: record[c].to_string(),
            })?;
            match age_group {
                None => age_group = Some(got),
                Some(prev) if prev != got => {
                    return Err(IngestError::MixedMetadata {
                        row,
                        column: mapping.age_group.clone(),
                    })
                }
                _ => {}
            }
        }

        if let Some(&last) = dates.last() {
            if date <= last {
                return Err(IngestError::NonMonotoneDates { row, found: date });
            }
        }
        dates.push(date);
        counts.push(deaths);
    }

    if dates.is_empty() {
        return Err(IngestError::EmptyInput);
    }
    if dates.len() == 1 {
        return Err(IngestError::TooShort);
    }

    let step = (dates[1] - dates[0]).num_days();
    let cadence = match step {
        1 => Cadence::Daily,
        7 => Cadence::Weekly,
        other => return Err(IngestError::UnsupportedCadence(other)),
    };
    for (i, pair) in dates.windows(2).enumerate() {
        let expected = pair[0] + chrono::Duration::days(step);
        if pair[1] != expected {
            return Err(IngestError::GapInDates {
                row: i + 3, // second row of the offending pair
                expected,
                found: pair[1],
            });
        }
    }
    if cadence == Cadence::Weekly {
        if let Some((i, d)) = dates
            .iter()
            .enumerate()
            .find(|(_, d)| d.weekday() != Weekday::Mon)
        {
            return Err(IngestError::NotWeekStart {
                row: i + 2,
                weekday: d.weekday(),
            });
        }
    }

    let population = population.ok_or(IngestError::BadSeriesPopulation)?;
    MortalitySeries::new(
        country.unwrap_or_else(|| "unknown".into()),
        age_group.unwrap_or(AgeGroup::All),
        cadence,
        dates[0],
        counts,
        population,
    )
}

/// Serialize a series in the canonical input schema
/// (`date,deaths,population,country,age_group`), suitable to be parsed back.
pub fn write_mortality_csv(series: &MortalitySeries) -> String {
    let mut out = String::from("date,deaths,population,country,age_group\n");
    for (i, &c) in series.counts.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            series.date(i),
            c,
            series.population,
            series.country,
            series.age_group
        ));
    }
    out
}

/// Deaths per million population.
pub fn to_rate_per_million(series: &MortalitySeries) -> RateSeries {
    let scale = 1.0e6 / series.population as f64;
    RateSeries {
        country: series.country.clone(),
        age_group: series.age_group,
        cadence: series.cadence,
        start_date: series.start_date,
        values: series.counts.iter().map(|&c| c as f64 * scale).collect(),
        population: series.population,
    }
}

/// Sum a daily series into ISO weeks, trimming partial weeks at both edges.
///
/// The result starts on the first Monday in the input and covers every
/// complete Monday-to-Sunday block; the report says how many edge days were
/// dropped.
pub fn aggregate_daily_to_weekly(
    series: &MortalitySeries,
) -> Result<(MortalitySeries, TrimReport), IngestError> {
    if series.cadence != Cadence::Daily {
        return Err(IngestError::NotDaily);
    }
    let lead = (0..7)
        .find(|&k| (series.start_date + chrono::Duration::days(k)).weekday() == Weekday::Mon)
        .unwrap() as usize;
    if series.len() < lead + 7 {
        return Err(IngestError::NothingLeftAfterTrim);
    }
    let usable = series.len() - lead;
    let weeks = usable / 7;
    let trail = usable - weeks * 7;
    if weeks == 0 {
        return Err(IngestError::NothingLeftAfterTrim);
    }

    let mut weekly = Vec::with_capacity(weeks);
    for w in 0..weeks {
        let start = lead + w * 7;
        weekly.push(series.counts[start..start + 7].iter().sum());
    }
    let out = MortalitySeries::new(
        series.country.clone(),
        series.age_group,
        Cadence::Weekly,
        series.start_date + chrono::Duration::days(lead as i64),
        weekly,
        series.population,
    )?;
    Ok((
        out,
        TrimReport {
            leading_days: lead,
            trailing_days: trail,
        },
    ))
}

/// Number of ISO weeks (52 or 53) in an ISO year.
pub fn iso_weeks_in_year(year: i32) -> u32 {
    if NaiveDate::from_isoywd_opt(year, 53, Weekday::Mon).is_some() {
        53
    } else {
        52
    }
}

/// Monday starting a given ISO week.
pub fn iso_week_start(year: i32, week: u32) -> Option<NaiveDate> {
    NaiveDate::from_isoywd_opt(year, week, Weekday::Mon)
}

/// Reshape a weekly series covering whole ISO years into per-year rows.
///
/// Every covered ISO year must be complete (week 1 through week 52/53);
/// otherwise the offending year is reported via [`IngestError::PartialYear`].
pub fn to_weekly_panel(series: &MortalitySeries) -> Result<WeeklyPanel, IngestError> {
    if series.cadence != Cadence::Weekly {
        return Err(IngestError::NotWeekly);
    }
    let mut by_year: BTreeMap<i32, Vec<(u32, u64)>> = BTreeMap::new();
    for (i, &c) in series.counts.iter().enumerate() {
        let iso = series.date(i).iso_week();
        by_year.entry(iso.year()).or_default().push((iso.week(), c));
    }
    let mut years = Vec::new();
    let mut rows = Vec::new();
    for (year, entries) in by_year {
        let expect = iso_weeks_in_year(year);
        if entries.len() as u32 != expect
            || entries.first().map(|e| e.0) != Some(1)
            || entries.last().map(|e| e.0) != Some(expect)
        {
            return Err(IngestError::PartialYear { year });
        }
        years.push(year);
        rows.push(entries.into_iter().map(|(_, c)| c).collect());
    }
    if years.is_empty() {
        return Err(IngestError::EmptyInput);
    }
    Ok(WeeklyPanel {
        country: series.country.clone(),
        age_group: series.age_group,
        years,
        rows,
        population: series.population,
    })
}

/// Restrict a weekly series to the whole ISO years in `[first, last]`.
pub fn slice_years(
    series: &MortalitySeries,
    first: i32,
    last: i32,
) -> Result<MortalitySeries, IngestError> {
    if series.cadence != Cadence::Weekly {
        return Err(IngestError::NotWeekly);
    }
    let mut keep: Vec<u64> = Vec::new();
    let mut start: Option<NaiveDate> = None;
    for (i, &c) in series.counts.iter().enumerate() {
        let y = series.date(i).iso_week().year();
        if y >= first && y <= last {
            if start.is_none() {
                start = Some(series.date(i));
            }
            keep.push(c);
        }
    }
    let start = start.ok_or(IngestError::YearNotPresent(first))?;
    MortalitySeries::new(
        series.country.clone(),
        series.age_group,
        Cadence::Weekly,
        start,
        keep,
        series.population,
    )
}

/// Extract the weekly counts of one ISO year (possibly partial, e.g. the
/// first half of an analysis year).
pub fn weekly_observations(
    series: &MortalitySeries,
    year: i32,
) -> Result<WeeklyObservations, IngestError> {
    if series.cadence != Cadence::Weekly {
        return Err(IngestError::NotWeekly);
    }
    let mut first_week = None;
    let mut counts = Vec::new();
    for (i, &c) in series.counts.iter().enumerate() {
        let iso = series.date(i).iso_week();
        if iso.year() == year {
            if first_week.is_none() {
                first_week = Some(iso.week());
            }
            counts.push(c);
        }
    }
    let first_week = first_week.ok_or(IngestError::YearNotPresent(year))?;
    Ok(WeeklyObservations {
        country: series.country.clone(),
        age_group: series.age_group,
        year,
        first_week,
        counts,
        population: series.population,
    })
}

/// ISO weeks in which a country's registration counts dip for reasons that
/// are calendar artefacts rather than mortality: public-holiday weeks with
/// reduced death registration. England & Wales late-May, late-August and
/// Christmas bank-holiday weeks are the known cases in the bundled data.
pub fn holiday_weeks(country: &str) -> &'static [u32] {
    match country.to_ascii_lowercase().as_str() {
        "ew" => &[22, 35, 52],
        _ => &[],
    }
}

/// Flags parallel to a weekly series: `true` where the entry falls in a
/// holiday-affected ISO week for the series' country.
pub fn holiday_flags(series: &MortalitySeries) -> Result<Vec<bool>, IngestError> {
    if series.cadence != Cadence::Weekly {
        return Err(IngestError::NotWeekly);
    }
    let table = holiday_weeks(&series.country);
    Ok((0..series.len())
        .map(|i| table.contains(&series.date(i).iso_week().week()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_csv() -> &'static str {
        "date,deaths,population,country,age_group\n\
         2020-01-06,10,1000000,be,0+\n\
         2020-01-13,12,1000000,be,0+\n\
         2020-01-20,9,1000000,be,0+\n"
    }

    #[test]
    fn parses_weekly_csv() {
        let s = parse_mortality_csv(small_csv().as_bytes(), &ColumnMapping::default()).unwrap();
        assert_eq!(s.cadence, Cadence::Weekly);
        assert_eq!(s.counts, vec![10, 12, 9]);
        assert_eq!(s.country, "be");
        assert_eq!(s.age_group, AgeGroup::All);
        assert_eq!(s.start_date, NaiveDate::from_ymd_opt(2020, 1, 6).unwrap());
    }

    #[test]
    fn round_trips_through_canonical_writer() {
        let s = parse_mortality_csv(small_csv().as_bytes(), &ColumnMapping::default()).unwrap();
        let text = write_mortality_csv(&s);
        let again = parse_mortality_csv(text.as_bytes(), &ColumnMapping::default()).unwrap();
        assert_eq!(s.counts, again.counts);
        assert_eq!(s.start_date, again.start_date);
        assert_eq!(s.population, again.population);
    }

    #[test]
    fn rejects_fractional_counts() {
        let text = "date,deaths,population\n2020-01-01,10.0,1000\n2020-01-02,11,1000\n";
        match parse_mortality_csv(text.as_bytes(), &ColumnMapping::default()) {
            Err(IngestError::BadCount { row: 2, .. }) => {}
            other => panic!("expected BadCount, got {other:?}"),
        }
    }

    #[test]
    fn rejects_negative_counts() {
        let text = "date,deaths,population\n2020-01-01,-3,1000\n2020-01-02,11,1000\n";
        assert!(matches!(
            parse_mortality_csv(text.as_bytes(), &ColumnMapping::default()),
            Err(IngestError::BadCount { row: 2, .. })
        ));
    }

    #[test]
    fn rejects_gaps_and_disorder() {
        let gap = "date,deaths,population\n2020-01-01,1,10\n2020-01-02,1,10\n2020-01-04,1,10\n";
        assert!(matches!(
            parse_mortality_csv(gap.as_bytes(), &ColumnMapping::default()),
            Err(IngestError::GapInDates { .. })
        ));
        let back = "date,deaths,population\n2020-01-02,1,10\n2020-01-01,1,10\n";
        assert!(matches!(
            parse_mortality_csv(back.as_bytes(), &ColumnMapping::default()),
            Err(IngestError::NonMonotoneDates { .. })
        ));
    }

    #[test]
    fn missing_columns_are_named() {
        let text = "day,deaths,population\n2020-01-01,1,10\n";
        match parse_mortality_csv(text.as_bytes(), &ColumnMapping::default()) {
            Err(IngestError::MissingColumn(c)) => assert_eq!(c, "date"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_input_is_detected() {
        let text = "date,deaths,population\n";
        assert!(matches!(
            parse_mortality_csv(text.as_bytes(), &ColumnMapping::default()),
            Err(IngestError::EmptyInput)
        ));
    }

    #[test]
    fn filters_stacked_series() {
        let text = "date,deaths,population,country,age_group\n\
                    2020-01-06,10,1000,be,0+\n\
                    2020-01-06,90,2000,de,0+\n\
                    2020-01-13,12,1000,be,0+\n\
                    2020-01-13,95,2000,de,0+\n";
        let mapping = ColumnMapping {
            filter_country: Some("de".into()),
            ..ColumnMapping::default()
        };
        let s = parse_mortality_csv(text.as_bytes(), &mapping).unwrap();
        assert_eq!(s.counts, vec![90, 95]);
        assert_eq!(s.population, 2000);
    }

    #[test]
    fn rate_per_million_scales_by_population() {
        let s = MortalitySeries::new(
            "be".into(),
            AgeGroup::All,
            Cadence::Weekly,
            NaiveDate::from_ymd_opt(2020, 1, 6).unwrap(),
            vec![1817, 2300],
            11_500_000,
        )
        .unwrap();
        let r = to_rate_per_million(&s);
        assert!((r.values[0] - 158.0).abs() < 1e-12);
        assert!((r.values[1] - 200.0).abs() < 1e-12);
    }

    #[test]
    fn aggregates_days_to_iso_weeks_with_trim() {
        // 2009-01-01 is a Thursday; first Monday is 2009-01-05.
        let start = NaiveDate::from_ymd_opt(2009, 1, 1).unwrap();
        let counts: Vec<u64> = (0..25).map(|i| i as u64).collect();
        let s = MortalitySeries::new("be".into(), AgeGroup::All, Cadence::Daily, start, counts, 100)
            .unwrap();
        let (w, trim) = aggregate_daily_to_weekly(&s).unwrap();
        assert_eq!(trim, TrimReport { leading_days: 4, trailing_days: 0 });
        assert_eq!(w.len(), 3);
        // Week 1 sums indices 4..11.
        assert_eq!(w.counts[0], (4..11).sum::<u64>());
        assert_eq!(w.start_date, NaiveDate::from_ymd_opt(2009, 1, 5).unwrap());
        assert_eq!(w.start_date.weekday(), Weekday::Mon);
    }

    #[test]
    fn trailing_partial_week_is_trimmed() {
        let start = NaiveDate::from_ymd_opt(2009, 1, 5).unwrap(); // Monday
        let s = MortalitySeries::new(
            "be".into(),
            AgeGroup::All,
            Cadence::Daily,
            start,
            vec![1; 16],
            100,
        )
        .unwrap();
        let (w, trim) = aggregate_daily_to_weekly(&s).unwrap();
        assert_eq!(w.len(), 2);
        assert_eq!(trim, TrimReport { leading_days: 0, trailing_days: 2 });
    }

    #[test]
    fn iso_week_counts_match_calendar() {
        assert_eq!(iso_weeks_in_year(2009), 53);
        assert_eq!(iso_weeks_in_year(2015), 53);
        assert_eq!(iso_weeks_in_year(2020), 53);
        for y in [2016, 2017, 2018, 2019] {
            assert_eq!(iso_weeks_in_year(y), 52, "year {y}");
        }
    }

    fn weekly_series_for_years(first: i32, last: i32) -> MortalitySeries {
        let start = iso_week_start(first, 1).unwrap();
        let mut counts = Vec::new();
        for y in first..=last {
            for w in 1..=iso_weeks_in_year(y) {
                counts.push((y as u64) * 100 + w as u64);
            }
        }
        MortalitySeries::new("de".into(), AgeGroup::All, Cadence::Weekly, start, counts, 100)
            .unwrap()
    }

    #[test]
    fn panel_rows_follow_iso_year_lengths() {
        let s = weekly_series_for_years(2015, 2019);
        let p = to_weekly_panel(&s).unwrap();
        assert_eq!(p.years, vec![2015, 2016, 2017, 2018, 2019]);
        assert_eq!(p.rows[0].len(), 53);
        assert!(p.rows[1..].iter().all(|r| r.len() == 52));
        assert_eq!(p.row(2017).unwrap()[0], 201701);
    }

    #[test]
    fn partial_years_are_rejected_by_panel() {
        let s = weekly_series_for_years(2016, 2017);
        let mut counts = s.counts.clone();
        counts.truncate(counts.len() - 1);
        let partial = MortalitySeries::new(
            s.country.clone(),
            s.age_group,
            Cadence::Weekly,
            s.start_date,
            counts,
            s.population,
        )
        .unwrap();
        assert!(matches!(
            to_weekly_panel(&partial),
            Err(IngestError::PartialYear { year: 2017 })
        ));
    }

    #[test]
    fn slice_and_observations_extract_iso_years() {
        let s = weekly_series_for_years(2015, 2019);
        let sliced = slice_years(&s, 2016, 2017).unwrap();
        assert_eq!(sliced.len(), 104);
        let obs = weekly_observations(&s, 2016).unwrap();
        assert_eq!(obs.first_week, 1);
        assert_eq!(obs.counts.len(), 52);
        assert_eq!(obs.counts[51], 201652);
    }

    #[test]
    fn holiday_table_is_country_specific() {
        assert_eq!(holiday_weeks("ew"), &[22, 35, 52]);
        assert_eq!(holiday_weeks("EW"), &[22, 35, 52]);
        assert!(holiday_weeks("de").is_empty());
        assert!(holiday_weeks("be").is_empty());
    }

    #[test]
    fn holiday_flags_mark_weeks() {
        let s = weekly_series_for_years(2016, 2016);
        let mut ew = s.clone();
        ew.country = "ew".into();
        let flags = holiday_flags(&ew).unwrap();
        assert_eq!(flags.iter().filter(|&&b| b).count(), 3);
        assert!(flags[21] && flags[34] && flags[51]);
        assert!(!holiday_flags(&s).unwrap().iter().any(|&b| b));
    }

    #[test]
    fn weekly_series_must_start_monday() {
        let tue = NaiveDate::from_ymd_opt(2020, 1, 7).unwrap();
        assert!(matches!(
            MortalitySeries::new("be".into(), AgeGroup::All, Cadence::Weekly, tue, vec![1], 10),
            Err(IngestError::NotWeekStart { .. })
        ));
    }
}
