//! Excess-death measures and their sampling behaviour.
//!
//! Given observed weekly deaths and a baseline of expected deaths, this
//! module computes excess deaths, cumulative excess over week windows,
//! P-scores (relative excess), and Z-scores (standardized excess under a
//! Poisson model), including an exact-tail Z-score built from the Poisson
//! distribution function rather than the normal approximation.
//!
//! The Z/P dichotomy matters: with deaths `X ~ Poisson(λ(1+δ))` and
//! `λ = r·n` proportional to population `n`, the Z-score `(X−λ)/√λ` grows
//! like `δ·√(r·n)` — it measures evidence against δ = 0, and scales with
//! population — while the P-score `(X−λ)/λ` estimates δ itself and does not.
//! [`population_dependence_demo`] makes that concrete, and
//! [`delta_confidence_interval`] converts a Z-score back into an interval
//! for δ, which is comparable across countries.

use crate::baselines::{Baseline, BaselineMethod};
use crate::ingest::{AgeGroup, WeeklyObservations};
use crate::normal;
use crate::rng;
use statrs::function::gamma;
use thiserror::Error;

/// Weekly all-cause death risk per person, a representative European
/// magnitude used by the population-dependence demonstration: about 19
/// deaths per 100 000 people per week.
pub const TYPICAL_WEEKLY_RISK: f64 = 0.00019;

/// |Z| is capped here when a tail probability under- or overflows.
pub const Z_CLAMP: f64 = 38.0;

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("baseline does not cover ISO week {week}")]
    WeekNotCovered { week: u32 },
    #[error("baseline level for ISO week {week} is not positive; P-score undefined")]
    ZeroBaseline { week: u32 },
    #[error("week range {first}..={last} is empty or outside the observed weeks")]
    RangeOutOfBounds { first: i64, last: i64 },
    #[error("lambda must be positive, got {0}")]
    NonPositiveLambda(f64),
    #[error("overdispersion factor must be positive, got {0}")]
    BadOverdispersion(f64),
    #[error("confidence level must lie strictly between 0 and 1, got {0}")]
    BadLevel(f64),
    #[error("no confidence interval: the quadratic for delta has no admissible root (delta > -1)")]
    DegenerateInterval,
    #[error("relative excess delta must exceed -1, got {0}")]
    BadDelta(f64),
    #[error("need at least one population and one replicate")]
    EmptyDemo,
}

/// Provenance stamp carried from the baseline into derived series.
#[derive(Clone, Debug)]
pub struct BaselineStamp {
    pub method: BaselineMethod,
    pub q: Option<f64>,
    pub years_used: Vec<i32>,
    pub excluded_years: Vec<i32>,
}

impl From<&Baseline> for BaselineStamp {
    fn from(b: &Baseline) -> Self {
        BaselineStamp {
            method: b.method,
            q: b.q,
            years_used: b.years_used.clone(),
            excluded_years: b.excluded_years.clone(),
        }
    }
}

/// Observed deaths minus baseline, week by week.
#[derive(Clone, Debug)]
pub struct ExcessSeries {
    pub country: String,
    pub age_group: AgeGroup,
    pub year: i32,
    /// 1-based ISO week numbers, consecutive.
    pub weeks: Vec<u32>,
    pub deaths: Vec<u64>,
    pub baseline_values: Vec<f64>,
    /// `deaths[i] - baseline_values[i]`; exact in f64 (see baselines docs).
    pub values: Vec<f64>,
    pub population: u64,
    pub baseline: BaselineStamp,
}

impl ExcessSeries {
    fn index_of(&self, week: u32) -> Option<usize> {
        let first = *self.weeks.first()?;
        if week < first {
            return None;
        }
        let i = (week - first) as usize;
        (i < self.weeks.len()).then_some(i)
    }
}

/// Excess deaths of one analysis year against a baseline.
pub fn excess_series(
    obs: &WeeklyObservations,
    baseline: &Baseline,
) -> Result<ExcessSeries, ScoreError> {
    let mut weeks = Vec::with_capacity(obs.counts.len());
    let mut base = Vec::with_capacity(obs.counts.len());
    let mut values = Vec::with_capacity(obs.counts.len());
    for (w, &d) in obs.weeks().zip(obs.counts.iter()) {
        let level = baseline
            .level(w)
            .ok_or(ScoreError::WeekNotCovered { week: w })?;
        weeks.push(w);
        base.push(level);
        values.push(d as f64 - level);
    }
    Ok(ExcessSeries {
        country: obs.country.clone(),
        age_group: obs.age_group,
        year: obs.year,
        weeks,
        deaths: obs.counts.clone(),
        baseline_values: base,
        values,
        population: obs.population,
        baseline: baseline.into(),
    })
}

/// Total excess deaths over the inclusive ISO week window `first..=last`.
pub fn cumulative_excess(
    excess: &ExcessSeries,
    first_week: u32,
    last_week: u32,
) -> Result<f64, ScoreError> {
    if first_week > last_week {
        return Err(ScoreError::RangeOutOfBounds {
            first: first_week as i64,
            last: last_week as i64,
        });
    }
    let (Some(a), Some(b)) = (excess.index_of(first_week), excess.index_of(last_week)) else {
        return Err(ScoreError::RangeOutOfBounds {
            first: first_week as i64,
            last: last_week as i64,
        });
    };
    Ok(excess.values[a..=b].iter().sum())
}

/// [`cumulative_excess`] expressed per million population.
pub fn cumulative_excess_per_million(
    excess: &ExcessSeries,
    first_week: u32,
    last_week: u32,
) -> Result<f64, ScoreError> {
    Ok(cumulative_excess(excess, first_week, last_week)? * 1.0e6 / excess.population as f64)
}

/// Cumulative excess over a window shifted by `shift` weeks — both the
/// deaths and the baseline move to the shifted window, probing how sensitive
/// a headline number is to where the window is drawn.
pub fn shifted_cumulative_excess(
    excess: &ExcessSeries,
    first_week: u32,
    last_week: u32,
    shift: i32,
) -> Result<f64, ScoreError> {
    let a = first_week as i64 + shift as i64;
    let b = last_week as i64 + shift as i64;
    if a < 1 || b < a {
        return Err(ScoreError::RangeOutOfBounds { first: a, last: b });
    }
    cumulative_excess(excess, a as u32, b as u32)
}

/// Relative excess `(deaths − baseline) / baseline` per week, as fractions
/// (0.25 = 25%). Requires strictly positive baseline levels.
pub fn p_score_series(excess: &ExcessSeries) -> Result<Vec<f64>, ScoreError> {
    excess
        .weeks
        .iter()
        .zip(excess.values.iter().zip(excess.baseline_values.iter()))
        .map(|(&w, (&e, &b))| {
            if b <= 0.0 {
                Err(ScoreError::ZeroBaseline { week: w })
            } else {
                Ok(e / b)
            }
        })
        .collect()
}

/// A Gaussian sampling model for a mean: `n` observations with the given
/// per-observation mean and standard deviation.
#[derive(Clone, Copy, Debug)]
pub struct GaussianModel {
    pub mu: f64,
    pub sigma: f64,
    pub n: u64,
}

/// Z-score of a sample mean under a Gaussian model: `√n (x̄ − μ) / σ`.
pub fn z_score_gaussian(sample_mean: f64, model: &GaussianModel) -> Result<f64, ScoreError> {
    if model.sigma <= 0.0 {
        return Err(ScoreError::BadOverdispersion(model.sigma));
    }
    Ok((model.n as f64).sqrt() * (sample_mean - model.mu) / model.sigma)
}

/// Normal-approximation Z-score of a Poisson count: `(x − λ) / √λ`.
pub fn z_score_poisson(x: u64, lambda: f64) -> Result<f64, ScoreError> {
    if lambda <= 0.0 {
        return Err(ScoreError::NonPositiveLambda(lambda));
    }
    Ok((x as f64 - lambda) / lambda.sqrt())
}

/// An exact-tail Z-score: the standard normal quantile whose upper tail
/// matches the exact Poisson upper tail.
#[derive(Clone, Copy, Debug)]
pub struct ExactZ {
    pub z: f64,
    /// True when the tail probability under- or overflowed and `z` was
    /// capped at ±[`Z_CLAMP`].
    pub clamped: bool,
    /// P(X ≥ x) under Poisson(λ).
    pub p_upper: f64,
}

/// Exact Poisson Z-score: `z` such that `P(Z ≥ z) = P(X ≥ x)` for standard
/// normal Z and `X ~ Poisson(λ)`.
///
/// The upper tail is `P(X ≥ x) = P(x, λ)` (regularized lower incomplete
/// gamma) for `x ≥ 1`; `x = 0` has upper tail 1 and maps to the clamped
/// sentinel `-38`. Whichever of the two tails is smaller is fed through the
/// normal quantile, so the result stays accurate at extreme counts.
pub fn z_score_poisson_exact(x: u64, lambda: f64) -> Result<ExactZ, ScoreError> {
    if lambda <= 0.0 {
        return Err(ScoreError::NonPositiveLambda(lambda));
    }
    if x == 0 {
        return Ok(ExactZ {
            z: -Z_CLAMP,
            clamped: true,
            p_upper: 1.0,
        });
    }
    let xf = x as f64;
    let p_upper = gamma::gamma_lr(xf, lambda); // P(X >= x)
    let p_lower = gamma::gamma_ur(xf, lambda); // P(X <= x-1)
    let z = if p_upper <= 0.5 {
        -normal::inverse_cdf(p_upper)
    } else {
        normal::inverse_cdf(p_lower)
    };
    if !z.is_finite() || z.abs() > Z_CLAMP {
        Ok(ExactZ {
            z: Z_CLAMP.copysign(z),
            clamped: true,
            p_upper,
        })
    } else {
        Ok(ExactZ {
            z,
            clamped: false,
            p_upper,
        })
    }
}

/// Confidence interval for the relative excess δ of a Poisson rate.
///
/// With `X ~ Poisson(λ(1+δ))` and observed Z-score `z_sc = (x−λ)/√λ`, an
/// approximate level-`level` interval for δ collects all δ with
/// `|δ − m| ≤ a·√(1+δ)`, where `m = z_sc/√λ` and `a = z*·σ_od/√λ`
/// (`z*` the two-sided normal quantile, `σ_od` an overdispersion factor,
/// 1 for pure Poisson noise). Squaring gives a quadratic in δ with roots
///
/// `m + a²/2 ± (a/2)·√(a² + 4m + 4)`,
///
/// intersected with the admissible range δ > −1. No real root in that range
/// yields [`ScoreError::DegenerateInterval`].
pub fn delta_confidence_interval(
    z_sc: f64,
    lambda: f64,
    sigma_od: f64,
    level: f64,
) -> Result<(f64, f64), ScoreError> {
    if lambda <= 0.0 {
        return Err(ScoreError::NonPositiveLambda(lambda));
    }
    if sigma_od <= 0.0 {
        return Err(ScoreError::BadOverdispersion(sigma_od));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(ScoreError::BadLevel(level));
    }
    let m = z_sc / lambda.sqrt();
    let zstar = normal::inverse_cdf((1.0 + level) / 2.0);
    let a = zstar * sigma_od / lambda.sqrt();
    let disc = a * a + 4.0 * m + 4.0;
    if disc < 0.0 {
        return Err(ScoreError::DegenerateInterval);
    }
    let mid = m + a * a / 2.0;
    let half = 0.5 * a * disc.sqrt();
    let (lo, hi) = (mid - half, mid + half);
    if hi <= -1.0 {
        return Err(ScoreError::DegenerateInterval);
    }
    Ok((lo.max(-1.0), hi))
}

/// One population's row in the Z-vs-P demonstration.
#[derive(Clone, Debug)]
pub struct DemoRow {
    pub population: u64,
    pub lambda: f64,
    pub mean_z: f64,
    pub mean_p: f64,
    /// Fraction of replicates whose δ confidence interval covered the true δ.
    pub ci_coverage: f64,
}

#[derive(Clone, Debug)]
pub struct DemoReport {
    pub delta: f64,
    pub weekly_risk: f64,
    pub replicates: usize,
    pub rows: Vec<DemoRow>,
}

/// Simulate weekly deaths `X ~ Poisson(r·n·(1+δ))` for several population
/// sizes `n` and report the average Z-score, average P-score, and δ-interval
/// coverage. The Z column grows like `√n`; the P column stays at δ.
pub fn population_dependence_demo(
    delta: f64,
    populations: &[u64],
    weekly_risk: f64,
    replicates: usize,
    seed: u64,
) -> Result<DemoReport, ScoreError> {
    if delta <= -1.0 {
        return Err(ScoreError::BadDelta(delta));
    }
    if weekly_risk <= 0.0 {
        return Err(ScoreError::NonPositiveLambda(weekly_risk));
    }
    if populations.is_empty() || replicates == 0 {
        return Err(ScoreError::EmptyDemo);
    }
    let mut rows = Vec::with_capacity(populations.len());
    for (pi, &n) in populations.iter().enumerate() {
        let lambda = weekly_risk * n as f64;
        if lambda <= 0.0 {
            return Err(ScoreError::NonPositiveLambda(lambda));
        }
        let mut sum_z = 0.0;
        let mut sum_p = 0.0;
        let mut covered = 0usize;
        for r in 0..replicates {
            let index = (pi * replicates + r) as u64;
            let x = rng::poisson(lambda * (1.0 + delta), seed, index);
            let z = (x as f64 - lambda) / lambda.sqrt();
            sum_z += z;
            sum_p += (x as f64 - lambda) / lambda;
            if let Ok((lo, hi)) = delta_confidence_interval(z, lambda, 1.0, 0.95) {
                if lo <= delta && delta <= hi {
                    covered += 1;
                }
            }
        }
        rows.push(DemoRow {
            population: n,
            lambda,
            mean_z: sum_z / replicates as f64,
            mean_p: sum_p / replicates as f64,
            ci_coverage: covered as f64 / replicates as f64,
        });
    }
    Ok(DemoReport {
        delta,
        weekly_risk,
        replicates,
        rows,
    })
}
