//! Residual diagnostics: overdispersion against a Poisson oracle, and
//! periodic / lag structure found by stepwise Gaussian covariate selection.
//!
//! The overdispersion check asks: if deaths were Poisson with the fitted
//! curve as intensity, how much residual spread would we see? The ratio of
//! observed to simulated residual spread, minus one, is the overdispersion
//! percentage. Simulations are keyed by `(seed, replicate, index)` through
//! the counter RNG, so reports are reproducible under any execution order.
//!
//! The selection scan regresses residuals on a candidate dictionary —
//! harmonics for periodicities, lagged copies of the residuals for serial
//! dependence — picking one candidate per step by smallest Bonferroni-scaled
//! Beta tail probability until nothing clears the cutoff.

use std::fmt;

use thiserror::Error;

use crate::rng;
use crate::tautstring::PiecewiseConstantFit;

#[derive(Debug, Error)]
pub enum DiagError {
    #[error("fitted level at index {0} is negative; cannot drive a Poisson simulation")]
    NegativeLevel(usize),
    #[error("fit is degenerate: simulated residuals have zero spread")]
    DegenerateFit,
    #[error("need n_sims >= 1, got {0}")]
    NoSimulations(usize),
    #[error("max_lag {max_lag} too large for series of length {n} (must be < n/2)")]
    LagTooLarge { max_lag: usize, n: usize },
    #[error("candidate set is empty")]
    EmptyCandidates,
    #[error("candidate set is degenerate (zero or collinear candidate at step {0})")]
    DegenerateDesign(usize),
    #[error("series too short: {n} observations for {k} selected covariates")]
    TooShort { n: usize, k: usize },
}

/// Observed-vs-Poisson residual spread.
#[derive(Clone, Copy, Debug)]
pub struct DispersionReport {
    pub sd_residuals: f64,
    /// Mean over replicates of the residual SD of a Poisson series drawn
    /// from the fitted levels.
    pub sd_poisson: f64,
    /// `100 * (sd_residuals / sd_poisson - 1)`.
    pub overdispersion_pct: f64,
    pub n_sims: usize,
    pub seed: u64,
}

/// One Poisson series with the fitted curve as intensity, keyed by
/// `(seed, index)`.
pub fn simulate_poisson_from_fit(
    fit: &PiecewiseConstantFit,
    seed: u64,
) -> Result<Vec<u64>, DiagError> {
    simulate_replicate(&fit.levels, seed, 0)
}

fn simulate_replicate(levels: &[f64], seed: u64, replicate: u64) -> Result<Vec<u64>, DiagError> {
    let n = levels.len() as u64;
    levels
        .iter()
        .enumerate()
        .map(|(i, &level)| {
            if level < 0.0 {
                return Err(DiagError::NegativeLevel(i));
            }
            Ok(rng::poisson(level, seed, replicate * n + i as u64))
        })
        .collect()
}

fn sd(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Compare the residual SD of the observed counts against the mean residual
/// SD of `n_sims` Poisson replicates driven by the fitted levels.
pub fn overdispersion_ratio(
    counts: &[u64],
    fit: &PiecewiseConstantFit,
    n_sims: usize,
    seed: u64,
) -> Result<DispersionReport, DiagError> {
    assert_eq!(counts.len(), fit.levels.len(), "counts and fit must align");
    if n_sims == 0 {
        return Err(DiagError::NoSimulations(0));
    }
    let resid: Vec<f64> = counts
        .iter()
        .zip(&fit.levels)
        .map(|(&c, &f)| c as f64 - f)
        .collect();
    let sd_residuals = sd(&resid);

    let mut acc = 0.0;
    for s in 0..n_sims {
        let sim = simulate_replicate(&fit.levels, seed, s as u64)?;
        let sim_resid: Vec<f64> = sim
            .iter()
            .zip(&fit.levels)
            .map(|(&c, &f)| c as f64 - f)
            .collect();
        acc += sd(&sim_resid);
    }
    let sd_poisson = acc / n_sims as f64;
    if !(sd_poisson > 0.0) {
        return Err(DiagError::DegenerateFit);
    }
    Ok(DispersionReport {
        sd_residuals,
        sd_poisson,
        overdispersion_pct: 100.0 * (sd_residuals / sd_poisson - 1.0),
        n_sims,
        seed,
    })
}

pub fn dispersion_csv(r: &DispersionReport) -> String {
    format!(
        "sd_resid,sd_poisson,overdispersion_pct,n_sims,seed\n{:.4},{:.4},{:.2},{},{}\n",
        r.sd_residuals, r.sd_poisson, r.overdispersion_pct, r.n_sims, r.seed
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CovariateId {
    /// `sin(pi * j * t / n)`, t = 1..n.
    Sin(usize),
    /// `cos(pi * j * t / n)`, t = 1..n.
    Cos(usize),
    /// The residual series shifted by `lag`.
    Lag(usize),
}

impl fmt::Display for CovariateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CovariateId::Sin(j) => write!(f, "sin{j}"),
            CovariateId::Cos(j) => write!(f, "cos{j}"),
            CovariateId::Lag(l) => write!(f, "lag{l}"),
        }
    }
}

/// A centered, unit-norm candidate regressor.
#[derive(Clone, Debug)]
pub struct Covariate {
    pub id: CovariateId,
    /// Period in samples for harmonics (`2n/j`), the lag itself for lags.
    pub period_or_lag: f64,
    pub values: Vec<f64>,
}

fn center_normalize(mut values: Vec<f64>) -> Option<Vec<f64>> {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    for v in values.iter_mut() {
        *v -= mean;
    }
    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm <= 1e-12 {
        return None;
    }
    for v in values.iter_mut() {
        *v /= norm;
    }
    Some(values)
}

/// The harmonic dictionary `sin(pi j t / n), cos(pi j t / n)` for
/// `j = 1..n/2` and `t = 1..n`, centered and unit-normalized. The `j`-th
/// pair oscillates with period `2n/j` samples.
pub fn harmonic_candidates(n: usize) -> Vec<Covariate> {
    assert!(n >= 4, "need at least 4 observations");
    let mut out = Vec::with_capacity(n);
    for j in 1..=n / 2 {
        let w = std::f64::consts::PI * j as f64 / n as f64;
        let period = 2.0 * n as f64 / j as f64;
        let sin: Vec<f64> = (1..=n).map(|t| (w * t as f64).sin()).collect();
        let cos: Vec<f64> = (1..=n).map(|t| (w * t as f64).cos()).collect();
        if let Some(values) = center_normalize(sin) {
            out.push(Covariate { id: CovariateId::Sin(j), period_or_lag: period, values });
        }
        if let Some(values) = center_normalize(cos) {
            out.push(Covariate { id: CovariateId::Cos(j), period_or_lag: period, values });
        }
    }
    out
}

/// Lagged copies of the residual series, aligned on the common support
/// `t = max_lag..n`: candidate `lag ℓ` holds `residuals[t - ℓ]`. Regress the
/// tail `residuals[max_lag..]` on these.
pub fn lag_candidates(residuals: &[f64], max_lag: usize) -> Result<Vec<Covariate>, DiagError> {
    let n = residuals.len();
    if max_lag == 0 || max_lag >= n / 2 {
        return Err(DiagError::LagTooLarge { max_lag, n });
    }
    let mut out = Vec::with_capacity(max_lag);
    for lag in 1..=max_lag {
        let values: Vec<f64> = (max_lag..n).map(|t| residuals[t - lag]).collect();
        if let Some(values) = center_normalize(values) {
            out.push(Covariate {
                id: CovariateId::Lag(lag),
                period_or_lag: lag as f64,
                values,
            });
        }
    }
    Ok(out)
}

/// One selected covariate: the step's winning candidate, its Bonferroni-
/// scaled tail probability, and its coefficient against the then-current
/// residual (candidates are orthogonalized, so coefficients are in the
/// sequential basis).
#[derive(Clone, Debug)]
pub struct Selection {
    pub id: CovariateId,
    pub period_or_lag: f64,
    pub p_value: f64,
    pub coefficient: f64,
}

#[derive(Clone, Debug)]
pub struct SelectionResult {
    pub selected: Vec<Selection>,
    pub cutoff: f64,
    pub steps: usize,
}

/// Probability that a Beta(1/2, m/2) variable exceeds `r2` — the null law of
/// a squared correlation between an arbitrary unit vector and Gaussian noise
/// in dimension with `m` residual degrees of freedom.
fn beta_tail(r2: f64, m: f64) -> f64 {
    let x = (1.0 - r2).clamp(0.0, 1.0);
    // P(B >= r2) = I_{1-r2}(m/2, 1/2); evaluating at the swapped arguments
    // keeps precision when r2 is close to 1 and keeps the tiny tail exact.
    statrs::function::beta::beta_reg(m / 2.0, 0.5, x)
}

/// Greedy stepwise regression of `response` on `candidates`.
///
/// Each step scores every remaining candidate by its squared correlation
/// `r²` with the current residual and converts it to a P-value
/// `min(1, q · P(B ≥ r²))` with `q` the number of remaining candidates and
/// `B ~ Beta(1/2, (n−k−1)/2)` after `k` selections. The smallest P-value
/// wins if it clears `cutoff`; the residual and the remaining candidates are
/// then orthogonalized against the winner and the scan repeats.
pub fn gaussian_stepwise_select(
    response: &[f64],
    candidates: Vec<Covariate>,
    cutoff: f64,
) -> Result<SelectionResult, DiagError> {
    let n = response.len();
    if candidates.is_empty() {
        return Err(DiagError::EmptyCandidates);
    }
    for c in &candidates {
        assert_eq!(c.values.len(), n, "candidate {} length mismatch", c.id);
    }
    let mut resid = center_normalize(response.to_vec())
        .map(|_| {
            // Center only — the residual keeps its scale; normalization is
            // just the degeneracy check.
            let mean = response.iter().sum::<f64>() / n as f64;
            response.iter().map(|v| v - mean).collect::<Vec<f64>>()
        })
        .ok_or(DiagError::DegenerateDesign(0))?;

    let mut pool = candidates;
    let mut selected = Vec::new();
    loop {
        let k = selected.len();
        if n <= k + 3 {
            if selected.is_empty() {
                return Err(DiagError::TooShort { n, k });
            }
            break;
        }
        let rnorm2: f64 = resid.iter().map(|v| v * v).sum();
        if rnorm2 <= 1e-24 {
            break; // response fully explained
        }
        let q = pool.len() as f64;
        let m = (n - k - 1) as f64;
        let mut best: Option<(usize, f64, f64)> = None; // (index, p, inner)
        for (ci, c) in pool.iter().enumerate() {
            let inner: f64 = c.values.iter().zip(&resid).map(|(a, b)| a * b).sum();
            let r2 = inner * inner / rnorm2;
            let p = (q * beta_tail(r2, m)).min(1.0);
            if best.map_or(true, |(_, bp, _)| p < bp) {
                best = Some((ci, p, inner));
            }
        }
        let Some((ci, p, inner)) = best else { break };
        if p > cutoff || pool.is_empty() {
            break;
        }
        let winner = pool.swap_remove(ci);
        for (r, c) in resid.iter_mut().zip(&winner.values) {
            *r -= inner * c;
        }
        debug_assert!(
            winner.values.iter().zip(&resid).map(|(a, b)| a * b).sum::<f64>().abs() < 1e-10,
            "residual must be orthogonal to the selected candidate"
        );
        selected.push(Selection {
            id: winner.id,
            period_or_lag: winner.period_or_lag,
            p_value: p,
            coefficient: inner,
        });
        // Orthogonalize the remaining pool against the winner; collinear
        // candidates collapse to zero and leave the pool.
        let mut kept = Vec::with_capacity(pool.len());
        for mut c in pool {
            let proj: f64 = c.values.iter().zip(&winner.values).map(|(a, b)| a * b).sum();
            for (v, w) in c.values.iter_mut().zip(&winner.values) {
                *v -= proj * w;
            }
            let norm = c.values.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 1e-10 {
                for v in c.values.iter_mut() {
                    *v /= norm;
                }
                kept.push(c);
            }
        }
        pool = kept;
        if pool.is_empty() {
            break;
        }
    }
    let steps = selected.len();
    Ok(SelectionResult { selected, cutoff, steps })
}

pub fn selection_csv(r: &SelectionResult) -> String {
    let mut out = String::from("step,covariate,period_or_lag,p_value,coefficient\n");
    for (i, s) in r.selected.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{:.4},{:e},{:.6}\n",
            i + 1,
            s.id,
            s.period_or_lag,
            s.p_value,
            s.coefficient
        ));
    }
    out
}
