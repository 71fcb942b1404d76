//! Statistics for all-cause mortality monitoring.
//!
//! The crate is organised as a pipeline:
//!
//! * [`ingest`] — parse and validate mortality count series (daily or weekly),
//!   convert to rates, aggregate days to ISO weeks, build per-year panels.
//! * [`baselines`] — expected-deaths baselines from historical panels, either
//!   per-week historical means or year-quantile baselines.
//! * [`scores`] — excess deaths, cumulative excess, P-scores, Gaussian and
//!   Poisson Z-scores (approximate and exact), and confidence intervals for
//!   the relative excess of a Poisson rate.
//! * [`tautstring`] — piecewise-constant fits of daily series with a minimal
//!   number of local extremes, via a taut string through a tube around the
//!   cumulative sum, with data-driven local squeezing and an isotone
//!   refinement step.
//! * [`peaks`] — epidemic segmentation built on top of the taut-string fit's
//!   local extremes.
//! * [`diagnostics`] — parametric-bootstrap overdispersion measurement and
//!   stepwise Gaussian covariate selection for residual structure (weekly
//!   periodicities, annual cycles, autocorrelation).
//! * [`tvsmooth`] — total-variation-minimal smooth fits under the same tube
//!   constraints as the taut string, via linear programming.
//!
//! Count data are integers throughout; rates and fits are `f64`.

pub mod baselines;
pub mod diagnostics;
pub mod ingest;
pub mod normal;
pub mod peaks;
pub mod rng;
pub mod scores;
pub mod tautstring;
pub mod tvsmooth;

#[doc(hidden)]
pub mod testsupport;
