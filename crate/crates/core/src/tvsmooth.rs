//! Differentiable-looking fits: minimize the total variation of the first
//! or second discrete derivative subject to the accepted taut-string fit's
//! tube and monotonicity structure, as a linear program.
//!
//! The smoothing inherits its license to deviate from the data from the
//! taut-string fit: the cumulative residuals of the smooth fit must stay
//! inside the *same squeezed tube* the string was fitted in, and the fit
//! must rise and fall exactly where the string does (signs flip at extreme
//! midpoints). Order 1 yields piecewise-linear output, order 2 piecewise
//! quadratic.
//!
//! The tube is the cumulative embodiment of the multiresolution constraints:
//! it is what the squeeze loop tightened until every dyadic window passed.
//! Imposing the per-window inequalities directly would cap every single
//! residual at `σ√(τ log n)` (the length-1 windows), which forbids the large
//! pointwise deviations a smooth curve must make through sharp peaks; the
//! tube permits them while still confining every window's running sum. The
//! feasibility report carries the maximum dyadic window statistic anyway, so
//! the relationship stays observable.

use thiserror::Error;

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};

use crate::tautstring::{dyadic_intervals, ExtremeKind, PiecewiseConstantFit};

/// Seed of the fixed cost perturbation that breaks objective ties; part of
/// the output contract (changing it changes which optimal vertex is
/// returned, though never the objective beyond 1e-7 relative).
const TIE_BREAK_SEED: u64 = 0x7513_ad42;

#[derive(Debug, Error)]
pub enum TvError {
    #[error("order must be 1 or 2, got {0}")]
    BadOrder(usize),
    #[error("series of length {n} too short for order {order}")]
    TooShort { n: usize, order: usize },
    #[error("taut-string fit was not accepted ({0} multiresolution violations remain)")]
    FitNotAccepted(usize),
    #[error("LP reported infeasible — tube/monotonicity mismatch: {0}")]
    Infeasible(String),
    #[error("solver stopped early: {0}")]
    SolverLimit(String),
}

#[derive(Clone, Copy, Debug)]
pub struct TvConfig {
    /// Post-solve absolute feasibility allowance, in data units scaled by
    /// the problem's cumulative magnitude.
    pub feas_tol: f64,
    /// Relative optimality gap requested from the solver.
    pub opt_tol: f64,
    pub max_iter: u32,
}

impl Default for TvConfig {
    fn default() -> Self {
        TvConfig { feas_tol: 1e-8, opt_tol: 1e-8, max_iter: 200 }
    }
}

/// Post-solve audit, recomputed from the returned values — never copied
/// from solver internals.
#[derive(Clone, Copy, Debug)]
pub struct FeasibilityReport {
    /// max over cumulative-sum points of `|cum residual| - radius`;
    /// negative when strictly inside the tube.
    pub max_tube_excess: f64,
    /// Largest step against the required monotone direction.
    pub max_mono_violation: f64,
    /// max over dyadic windows of `|Σ residuals| / √len` — informational;
    /// compare with `threshold`.
    pub max_window_stat: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug)]
pub struct SolverMeta {
    pub solver: String,
    pub iterations: u32,
    pub solve_time: f64,
    pub opt_tol: f64,
}

#[derive(Clone, Debug)]
pub struct SmoothFit {
    pub values: Vec<f64>,
    pub order: usize,
    /// Achieved `Σ |Δ^(order+1) f|`, recomputed from `values`.
    pub objective: f64,
    pub feasibility: FeasibilityReport,
    pub meta: SolverMeta,
}

/// `order`-fold forward differencing.
pub fn discrete_derivative(values: &[f64], order: usize) -> Result<Vec<f64>, TvError> {
    if values.len() <= order {
        return Err(TvError::TooShort { n: values.len(), order });
    }
    let mut out = values.to_vec();
    for _ in 0..order {
        out = out.windows(2).map(|w| w[1] - w[0]).collect();
    }
    Ok(out)
}

/// Required direction of `f[k+1] - f[k]` for every adjacent pair:
/// +1 non-decreasing, -1 non-increasing. Directions flip at extreme
/// midpoints; a fit with no extremes is monotone end to end.
fn monotone_directions(fit: &PiecewiseConstantFit) -> Vec<i8> {
    let n = fit.levels.len();
    let mut dirs = vec![0i8; n - 1];
    if fit.extremes.is_empty() {
        let d = if fit.levels[n - 1] >= fit.levels[0] { 1 } else { -1 };
        dirs.fill(d);
        return dirs;
    }
    let mut start = 0usize;
    for e in &fit.extremes {
        let mid = (e.left + e.right) / 2;
        let d = if e.kind == ExtremeKind::Max { 1 } else { -1 };
        for k in start..mid {
            dirs[k] = d;
        }
        start = mid;
    }
    let last = fit.extremes.last().unwrap();
    let d_after = if last.kind == ExtremeKind::Max { -1 } else { 1 };
    for k in start..n - 1 {
        dirs[k] = d_after;
    }
    dirs
}

/// Sparse rows in (row, col, value) triplets, converted to CSC.
fn triplets_to_csc(m: usize, n: usize, mut trips: Vec<(usize, usize, f64)>) -> CscMatrix<f64> {
    trips.sort_unstable_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)));
    let mut colptr = vec![0usize; n + 1];
    let mut rowval = Vec::with_capacity(trips.len());
    let mut nzval = Vec::with_capacity(trips.len());
    for &(r, c, v) in &trips {
        colptr[c + 1] += 1;
        rowval.push(r);
        nzval.push(v);
    }
    for c in 0..n {
        colptr[c + 1] += colptr[c];
    }
    CscMatrix::new(m, n, colptr, rowval, nzval)
}

fn binomial_signed(order_plus_one: usize) -> Vec<f64> {
    // Coefficients of the forward difference Δ^p f_j = Σ_i coef[i]·f[j+i].
    let p = order_plus_one;
    (0..=p)
        .map(|i| {
            let mut b = 1.0;
            for k in 0..i {
                b = b * (p - k) as f64 / (k + 1) as f64;
            }
            if (p - i) % 2 == 1 {
                -b
            } else {
                b
            }
        })
        .collect()
}

/// Minimize `Σ |Δ^(order+1) f|` over curves `f` whose cumulative residuals
/// stay inside the accepted fit's tube and that are monotone on each of the
/// fit's monotone stretches.
pub fn tv_smooth(
    data: &[f64],
    fit: &PiecewiseConstantFit,
    order: usize,
    config: &TvConfig,
) -> Result<SmoothFit, TvError> {
    let n = data.len();
    assert_eq!(n, fit.levels.len(), "data and fit must align");
    if !(order == 1 || order == 2) {
        return Err(TvError::BadOrder(order));
    }
    if n < order + 3 {
        return Err(TvError::TooShort { n, order });
    }
    if fit.violations_remaining > 0 {
        return Err(TvError::FitNotAccepted(fit.violations_remaining));
    }

    // Variables: f[0..n), c[0..n) (cumulative residuals at points 1..=n),
    // t[0..nt) (slacks for the absolute differences).
    let nt = n - order - 1;
    let nvar = 2 * n + nt;
    let fv = |i: usize| i;
    let cv = |i: usize| n + i;
    let tv = |i: usize| 2 * n + i;

    let mut trips: Vec<(usize, usize, f64)> = Vec::new();
    let mut b: Vec<f64> = Vec::new();
    let mut row = 0usize;

    // Equalities: the chain defining c as the running residual sum, and the
    // pinned right endpoint.
    trips.push((row, fv(0), 1.0));
    trips.push((row, cv(0), 1.0));
    b.push(data[0]);
    row += 1;
    for k in 1..n {
        trips.push((row, fv(k), 1.0));
        trips.push((row, cv(k), 1.0));
        trips.push((row, cv(k - 1), -1.0));
        b.push(data[k]);
        row += 1;
    }
    trips.push((row, cv(n - 1), 1.0));
    b.push(0.0);
    row += 1;
    let n_eq = row;

    // Tube: |c[k]| <= radius at cum point k+1.
    for k in 0..n - 1 {
        let r = fit.tube_radii[k + 1];
        trips.push((row, cv(k), 1.0));
        b.push(r);
        row += 1;
        trips.push((row, cv(k), -1.0));
        b.push(r);
        row += 1;
    }

    // Monotonicity: dir·(f[k+1] - f[k]) >= 0  ⇔  -dir·f[k+1] + dir·f[k] <= 0.
    let dirs = monotone_directions(fit);
    for (k, &d) in dirs.iter().enumerate() {
        let d = d as f64;
        trips.push((row, fv(k + 1), -d));
        trips.push((row, fv(k), d));
        b.push(0.0);
        row += 1;
    }

    // Slacks: ±Δ^(order+1) f_j - t_j <= 0.
    let coef = binomial_signed(order + 1);
    for j in 0..nt {
        for (i, &ci) in coef.iter().enumerate() {
            trips.push((row, fv(j + i), ci));
        }
        trips.push((row, tv(j), -1.0));
        b.push(0.0);
        row += 1;
        for (i, &ci) in coef.iter().enumerate() {
            trips.push((row, fv(j + i), -ci));
        }
        trips.push((row, tv(j), -1.0));
        b.push(0.0);
        row += 1;
    }
    let n_ineq = row - n_eq;

    let a = triplets_to_csc(row, nvar, trips);
    let p = CscMatrix::<f64>::zeros((nvar, nvar));
    let mut q = vec![0.0; nvar];
    for j in 0..nt {
        // The LP is heavily degenerate: a kink can be smeared across
        // neighbours at identical cost, and an interior-point solver then
        // returns the smeared centre of the optimal face. A fixed, tiny,
        // aperiodic perturbation of the slack costs makes the optimum
        // unique, which lands the solver on a vertex — an actually
        // piecewise-linear/quadratic curve — at an objective cost below
        // 1e-7 relative.
        let eps = crate::rng::CounterStream::new(TIE_BREAK_SEED, j as u64).next_uniform();
        q[tv(j)] = 1.0 + 1e-7 * eps;
    }
    let cones = [SupportedConeT::ZeroConeT(n_eq), SupportedConeT::NonnegativeConeT(n_ineq)];
    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .max_iter(config.max_iter)
        .tol_gap_rel(config.opt_tol)
        .tol_feas(config.feas_tol.min(1e-8))
        .build()
        .expect("static settings");
    let mut solver = DefaultSolver::new(&p, &q, &a, &b, &cones, settings)
        .map_err(|e| TvError::SolverLimit(format!("setup: {e:?}")))?;
    solver.solve();
    let status = solver.solution.status;
    match status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => {}
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
            return Err(TvError::Infeasible(format!("{status:?}")));
        }
        other => return Err(TvError::SolverLimit(format!("{other:?}"))),
    }
    let values: Vec<f64> = solver.solution.x[..n].to_vec();

    // Audit the answer from scratch: tube, monotonicity, window statistics
    // and the objective are all recomputed from the returned values.
    let mut cum = 0.0;
    let mut max_tube_excess = f64::NEG_INFINITY;
    for k in 0..n {
        cum += data[k] - values[k];
        max_tube_excess = max_tube_excess.max(cum.abs() - fit.tube_radii[k + 1]);
    }
    let mut max_mono_violation: f64 = 0.0;
    for (k, &d) in dirs.iter().enumerate() {
        let step = (values[k + 1] - values[k]) * d as f64;
        max_mono_violation = max_mono_violation.max(-step);
    }
    let residuals: Vec<f64> = data.iter().zip(&values).map(|(y, f)| y - f).collect();
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + residuals[i];
    }
    let mut max_window_stat: f64 = 0.0;
    for (s, len) in dyadic_intervals(n) {
        let stat = (prefix[s + len] - prefix[s]).abs() / (len as f64).sqrt();
        max_window_stat = max_window_stat.max(stat);
    }
    let objective = discrete_derivative(&values, order + 1)?
        .iter()
        .map(|d| d.abs())
        .sum();

    Ok(SmoothFit {
        values,
        order,
        objective,
        feasibility: FeasibilityReport {
            max_tube_excess,
            max_mono_violation,
            max_window_stat,
            threshold: fit.threshold,
        },
        meta: SolverMeta {
            solver: "clarabel interior-point".into(),
            iterations: solver.solution.iterations,
            solve_time: solver.solution.solve_time,
            opt_tol: config.opt_tol,
        },
    })
}

/// `index,count,smooth_value,residual` table.
pub fn smooth_csv(data: &[f64], fit: &SmoothFit) -> String {
    let mut out = String::from("index,count,smooth_value,residual\n");
    for (i, (y, f)) in data.iter().zip(&fit.values).enumerate() {
        out.push_str(&format!("{},{},{:.4},{:.4}\n", i, y, f, y - f));
    }
    out
}

/// Key=value block describing the solve.
pub fn solver_meta_text(fit: &SmoothFit) -> String {
    format!(
        "solver={}\niterations={}\nsolve_time_s={:.3}\nopt_tol={:e}\norder={}\nobjective={:.6}\nmax_tube_excess={:.3e}\nmax_mono_violation={:.3e}\nmax_window_stat={:.4}\nthreshold={:.4}\n",
        fit.meta.solver,
        fit.meta.iterations,
        fit.meta.solve_time,
        fit.meta.opt_tol,
        fit.order,
        fit.objective,
        fit.feasibility.max_tube_excess,
        fit.feasibility.max_mono_violation,
        fit.feasibility.max_window_stat,
        fit.feasibility.threshold,
    )
}
