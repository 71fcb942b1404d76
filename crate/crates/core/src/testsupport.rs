//! Independent oracles used only by tests.
//!
//! Everything here is deliberately written from first principles and kept
//! separate from the production code paths it checks: a dense two-phase
//! simplex (vs the interior-point LP), a naive pooler plus Dykstra
//! projection (vs the stack PAVA / clamp identity), and an exhaustive
//! quantized dynamic program for the minimal-modality property (vs the taut
//! string). Slow and simple on purpose.

/// A small LP in "modeller" form: `n_free` unrestricted variables followed
/// by `n_nonneg` non-negative ones; minimize `c·x` subject to equality and
/// `<=` rows over the full variable vector.
pub struct DenseLp {
    pub n_free: usize,
    pub n_nonneg: usize,
    pub c: Vec<f64>,
    pub eq: Vec<(Vec<f64>, f64)>,
    pub le: Vec<(Vec<f64>, f64)>,
}

/// Two-phase dense simplex with Bland's rule. Returns `(objective, x)` in
/// the modeller's variable order, or `None` if infeasible. Unbounded
/// problems panic — the callers here never produce one.
pub fn solve_dense_lp(lp: &DenseLp) -> Option<(f64, Vec<f64>)> {
    let nv = lp.n_free + lp.n_nonneg;
    assert_eq!(lp.c.len(), nv);
    // Standard form: free x_i -> u_i - v_i; each `<=` row gains a slack.
    let ns = 2 * lp.n_free + lp.n_nonneg + lp.le.len();
    let expand = |row: &[f64]| -> Vec<f64> {
        let mut out = Vec::with_capacity(ns);
        for i in 0..lp.n_free {
            out.push(row[i]);
        }
        for i in 0..lp.n_free {
            out.push(-row[i]);
        }
        for i in 0..lp.n_nonneg {
            out.push(row[lp.n_free + i]);
        }
        for _ in 0..lp.le.len() {
            out.push(0.0);
        }
        out
    };
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    for (a, b) in &lp.eq {
        assert_eq!(a.len(), nv);
        rows.push(expand(a));
        rhs.push(*b);
    }
    for (li, (a, b)) in lp.le.iter().enumerate() {
        assert_eq!(a.len(), nv);
        let mut r = expand(a);
        r[2 * lp.n_free + lp.n_nonneg + li] = 1.0;
        rows.push(r);
        rhs.push(*b);
    }
    let cost = {
        let mut full = expand(&lp.c);
        for s in full.iter_mut().skip(2 * lp.n_free + lp.n_nonneg) {
            *s = 0.0;
        }
        full
    };
    let x = simplex_two_phase(rows, rhs, cost)?;
    // Fold back to modeller variables.
    let mut out = Vec::with_capacity(nv);
    for i in 0..lp.n_free {
        out.push(x[i] - x[lp.n_free + i]);
    }
    for i in 0..lp.n_nonneg {
        out.push(x[2 * lp.n_free + i]);
    }
    let obj = lp.c.iter().zip(&out).map(|(a, b)| a * b).sum();
    Some((obj, out))
}

/// `min c·x : Ax = b, x >= 0` by the textbook two-phase tableau method.
fn simplex_two_phase(
    mut a: Vec<Vec<f64>>,
    mut b: Vec<f64>,
    c: Vec<f64>,
) -> Option<Vec<f64>> {
    let m = a.len();
    let n = c.len();
    for i in 0..m {
        if b[i] < 0.0 {
            b[i] = -b[i];
            for v in a[i].iter_mut() {
                *v = -*v;
            }
        }
    }
    // Phase 1 tableau with one artificial per row.
    let total = n + m;
    let mut t = vec![vec![0.0; total + 1]; m];
    let mut basis: Vec<usize> = Vec::with_capacity(m);
    for i in 0..m {
        t[i][..n].copy_from_slice(&a[i]);
        t[i][n + i] = 1.0;
        t[i][total] = b[i];
        basis.push(n + i);
    }
    let phase1: Vec<f64> = (0..total).map(|j| if j >= n { 1.0 } else { 0.0 }).collect();
    let obj1 = run_simplex(&mut t, &mut basis, &phase1, total, total);
    if obj1 > 1e-7 {
        return None;
    }
    // Drive any artificial still in the basis out, or drop its row.
    for i in 0..m {
        if basis[i] >= n {
            let pivot_col = (0..n).find(|&j| t[i][j].abs() > 1e-9);
            if let Some(j) = pivot_col {
                pivot(&mut t, &mut basis, i, j, total);
            }
            // A redundant row keeps its artificial at value 0 — harmless.
        }
    }
    // Artificial columns stay in the tableau but may not re-enter.
    let obj2_cost: Vec<f64> = (0..total).map(|j| if j < n { c[j] } else { 0.0 }).collect();
    let _ = run_simplex(&mut t, &mut basis, &obj2_cost, total, n);
    let mut x = vec![0.0; n];
    for (i, &bi) in basis.iter().enumerate() {
        if bi < n {
            x[bi] = t[i][total];
        }
    }
    Some(x)
}

fn run_simplex(
    t: &mut [Vec<f64>],
    basis: &mut [usize],
    cost: &[f64],
    total: usize,
    enterable: usize,
) -> f64 {
    let m = t.len();
    loop {
        // Reduced costs from scratch each iteration: slow, but immune to
        // accumulated tableau drift.
        let mut reduced = cost.to_vec();
        let mut obj = 0.0;
        for i in 0..m {
            let cb = cost[basis[i]];
            if cb != 0.0 {
                obj += cb * t[i][total];
                for j in 0..total {
                    reduced[j] -= cb * t[i][j];
                }
            }
        }
        // Bland: smallest-index entering variable.
        let Some(enter) = (0..enterable).find(|&j| reduced[j] < -1e-9) else {
            return obj;
        };
        // Ratio test; Bland tie-break on the smallest basis index.
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            if t[i][enter] > 1e-11 {
                let ratio = t[i][total] / t[i][enter];
                let better = ratio < best - 1e-12
                    || ((ratio - best).abs() <= 1e-12
                        && leave.map_or(true, |l| basis[i] < basis[l]));
                if better {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        let leave = leave.expect("LP unbounded — not expected from these models");
        pivot(t, basis, leave, enter, total);
    }
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], row: usize, col: usize, total: usize) {
    let p = t[row][col];
    for v in t[row].iter_mut() {
        *v /= p;
    }
    for i in 0..t.len() {
        if i != row && t[i][col].abs() > 0.0 {
            let factor = t[i][col];
            for j in 0..=total {
                t[i][j] -= factor * t[row][j];
            }
        }
    }
    basis[row] = col;
}

/// Optimal `Σ |Δ^(order+1) f|` for the smoothing problem, assembled in a
/// deliberately different form from the production LP: the tube appears as
/// explicit partial-sum rows over `f` (no cumulative chain variables), and
/// the difference coefficients are hard-coded rather than computed.
pub fn tv_objective_oracle(
    y: &[f64],
    radii: &[f64],
    dirs: &[i8],
    order: usize,
) -> Option<f64> {
    let n = y.len();
    assert_eq!(radii.len(), n + 1);
    assert_eq!(dirs.len(), n - 1);
    let coef: &[f64] = match order {
        1 => &[1.0, -2.0, 1.0],
        2 => &[-1.0, 3.0, -3.0, 1.0],
        _ => panic!("order must be 1 or 2"),
    };
    let nt = n - order - 1;
    let nv = n + nt;
    let mut eq = Vec::new();
    let mut le = Vec::new();
    // Pinned endpoint: sum of f equals sum of y.
    let mut row = vec![0.0; nv];
    for v in row.iter_mut().take(n) {
        *v = 1.0;
    }
    eq.push((row, y.iter().sum()));
    // Tube via partial sums: |P_k - Σ_{i<k} f_i| <= r_k.
    let mut prefix = 0.0;
    for k in 1..n {
        prefix += y[k - 1];
        let mut up = vec![0.0; nv];
        let mut dn = vec![0.0; nv];
        for i in 0..k {
            up[i] = -1.0;
            dn[i] = 1.0;
        }
        le.push((up, radii[k] - prefix));
        le.push((dn, radii[k] + prefix));
    }
    for (k, &d) in dirs.iter().enumerate() {
        let mut row = vec![0.0; nv];
        row[k + 1] = -(d as f64);
        row[k] = d as f64;
        le.push((row, 0.0));
    }
    for j in 0..nt {
        let mut up = vec![0.0; nv];
        let mut dn = vec![0.0; nv];
        for (i, &ci) in coef.iter().enumerate() {
            up[j + i] = ci;
            dn[j + i] = -ci;
        }
        up[n + j] = -1.0;
        dn[n + j] = -1.0;
        le.push((up, 0.0));
        le.push((dn, 0.0));
    }
    let mut c = vec![0.0; nv];
    for v in c.iter_mut().skip(n) {
        *v = 1.0;
    }
    let lp = DenseLp { n_free: n, n_nonneg: nt, c, eq, le };
    solve_dense_lp(&lp).map(|(obj, _)| obj)
}

/// Pool-adjacent-violators written as the naive "find a violation, average
/// it away, repeat" loop.
pub fn pava_naive(y: &[f64]) -> Vec<f64> {
    let mut x = y.to_vec();
    loop {
        let Some(mut i) = x.windows(2).position(|w| w[0] > w[1] + 1e-15) else {
            return x;
        };
        let mut j = i + 1;
        loop {
            let avg = x[i..=j].iter().sum::<f64>() / (j - i + 1) as f64;
            if j + 1 < x.len() && avg > x[j + 1] + 1e-15 {
                j += 1;
            } else if i > 0 && x[i - 1] > avg + 1e-15 {
                i -= 1;
            } else {
                for v in x[i..=j].iter_mut() {
                    *v = avg;
                }
                break;
            }
        }
    }
}

/// Least-squares projection onto {non-decreasing} ∩ {lo <= x <= hi} by
/// Dykstra's alternating projections.
pub fn dykstra_bounded_monotone(y: &[f64], lo: f64, hi: f64, sweeps: usize) -> Vec<f64> {
    assert!(lo <= hi);
    let n = y.len();
    let mut x = y.to_vec();
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    for _ in 0..sweeps {
        let w: Vec<f64> = pava_naive(&x.iter().zip(&p).map(|(a, b)| a + b).collect::<Vec<_>>());
        for i in 0..n {
            p[i] = x[i] + p[i] - w[i];
        }
        let mut moved = 0.0f64;
        for i in 0..n {
            let target = (w[i] + q[i]).clamp(lo, hi);
            q[i] = w[i] + q[i] - target;
            moved = moved.max((x[i] - target).abs());
            x[i] = target;
        }
        if moved < 1e-14 {
            break;
        }
    }
    x
}

/// Least-squares non-decreasing fit to `y` with virtual endpoints pinned at
/// `a` (before the first point) and `b` (after the last), by exhaustive
/// enumeration of consecutive-block partitions: every candidate optimum is
/// constant on some partition, blocks holding a pinned endpoint take its
/// value, free blocks take their mean, and a partition is admissible when
/// its block values are non-decreasing. Exponential — n must stay small.
pub fn pinned_monotone_ls(y: &[f64], a: f64, b: f64) -> Vec<f64> {
    assert!(a <= b + 1e-12, "pinned endpoints must be ordered");
    let n = y.len();
    let m = n + 2;
    assert!(m <= 20, "enumeration oracle is exponential");
    let mut best = f64::INFINITY;
    let mut best_fit = vec![0.0; n];
    // Bit i of `mask` set = a block boundary between point i and i+1.
    for mask in 0u32..(1u32 << (m - 1)) {
        let mut values: Vec<(usize, usize, f64)> = Vec::new();
        let mut start = 0usize;
        let mut ok = true;
        for end in 0..m {
            if end + 1 == m || mask & (1 << end) != 0 {
                let has_a = start == 0;
                let has_b = end == m - 1;
                let v = if has_a && has_b {
                    if (a - b).abs() > 1e-12 {
                        ok = false;
                        break;
                    }
                    a
                } else if has_a {
                    a
                } else if has_b {
                    b
                } else {
                    y[start - 1..end].iter().sum::<f64>() / (end - start + 1) as f64
                };
                values.push((start, end, v));
                start = end + 1;
            }
        }
        if !ok || values.windows(2).any(|w| w[0].2 > w[1].2 + 1e-12) {
            continue;
        }
        let mut sse = 0.0;
        let mut fit = vec![0.0; n];
        for &(s, e, v) in &values {
            for i in s..=e {
                if i >= 1 && i <= n {
                    sse += (v - y[i - 1]) * (v - y[i - 1]);
                    fit[i - 1] = v;
                }
            }
        }
        if sse < best - 1e-15 {
            best = sse;
            best_fit = fit;
        }
    }
    assert!(best.is_finite(), "no admissible partition found");
    best_fit
}

/// Minimal number of strict local extremes over all piecewise sequences on
/// a `grid`-quantized level set whose cumulative residuals against `y` stay
/// inside `radii` (length n+1, `radii[0]` ignored, endpoint bound applied).
/// Exhaustive dynamic program — keep `n` small. `y` must sit on the grid.
/// Returns `None` if no grid sequence fits the tube.
pub fn min_extremes_in_tube(y: &[f64], radii: &[f64], grid: f64) -> Option<usize> {
    let n = y.len();
    assert_eq!(radii.len(), n + 1);
    let to_units = |v: f64| -> i64 {
        let u = v / grid;
        let r = u.round();
        assert!((u - r).abs() < 1e-9, "value {v} not on grid {grid}");
        r as i64
    };
    let yu: Vec<i64> = y.iter().map(|&v| to_units(v)).collect();
    let ru: Vec<i64> = radii.iter().map(|&r| (r / grid + 1e-9).floor() as i64).collect();
    let rmax = *ru.iter().max().unwrap();
    let lmin = *yu.iter().min().unwrap() - rmax - 1;
    let lmax = *yu.iter().max().unwrap() + rmax + 1;
    let nl = (lmax - lmin + 1) as usize;
    // dir: 0 none yet, 1 rising, 2 falling.
    // Key: (cum residual units, level index, dir) -> min extremes so far.
    use std::collections::HashMap;
    let mut states: HashMap<(i64, usize, u8), usize> = HashMap::new();
    let mut cum_y = 0i64;
    for (li, _) in (lmin..=lmax).enumerate() {
        let level = lmin + li as i64;
        let cum = yu[0] - level;
        if cum.abs() <= ru[1] {
            states.insert((cum, li, 0), 0);
        }
    }
    cum_y += yu[0];
    for i in 1..n {
        cum_y += yu[i];
        let mut next: HashMap<(i64, usize, u8), usize> = HashMap::new();
        for (&(cum, li, dir), &ext) in &states {
            let prev_level = lmin + li as i64;
            for lj in 0..nl {
                let level = lmin + lj as i64;
                let ncum = cum + yu[i] - level;
                if ncum.abs() > ru[i + 1] {
                    continue;
                }
                let (ndir, next_ext) = if level > prev_level {
                    (1u8, if dir == 2 { ext + 1 } else { ext })
                } else if level < prev_level {
                    (2u8, if dir == 1 { ext + 1 } else { ext })
                } else {
                    (dir, ext)
                };
                let key = (ncum, lj, ndir);
                match next.get(&key) {
                    Some(&e) if e <= next_ext => {}
                    _ => {
                        next.insert(key, next_ext);
                    }
                }
            }
        }
        states = next;
        if states.is_empty() {
            return None;
        }
    }
    let _ = cum_y;
    states.values().copied().min()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_solves_textbook_problems() {
        // max x + y over the unit simplex == min -(x+y) = -1.
        let lp = DenseLp {
            n_free: 0,
            n_nonneg: 2,
            c: vec![-1.0, -1.0],
            eq: vec![],
            le: vec![(vec![1.0, 1.0], 1.0)],
        };
        let (obj, x) = solve_dense_lp(&lp).unwrap();
        assert!((obj + 1.0).abs() < 1e-9);
        assert!((x[0] + x[1] - 1.0).abs() < 1e-9);

        // Free variable: min |x - 3| == 0 with t >= ±(x-3).
        let lp = DenseLp {
            n_free: 1,
            n_nonneg: 1,
            c: vec![0.0, 1.0],
            eq: vec![],
            le: vec![(vec![1.0, -1.0], 3.0), (vec![-1.0, -1.0], -3.0)],
        };
        let (obj, x) = solve_dense_lp(&lp).unwrap();
        assert!(obj.abs() < 1e-9, "obj {obj}");
        assert!((x[0] - 3.0).abs() < 1e-9);

        // Infeasible: x <= -1 with x >= 0.
        let lp = DenseLp {
            n_free: 0,
            n_nonneg: 1,
            c: vec![1.0],
            eq: vec![],
            le: vec![(vec![1.0], -1.0)],
        };
        assert!(solve_dense_lp(&lp).is_none());

        // Degenerate equality pair that needs phase 1: x + y = 2, x - y = 0.
        let lp = DenseLp {
            n_free: 0,
            n_nonneg: 2,
            c: vec![1.0, 2.0],
            eq: vec![(vec![1.0, 1.0], 2.0), (vec![1.0, -1.0], 0.0)],
            le: vec![],
        };
        let (obj, x) = solve_dense_lp(&lp).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-9 && (x[1] - 1.0).abs() < 1e-9);
        assert!((obj - 3.0).abs() < 1e-9);
    }

    #[test]
    fn naive_pava_matches_hand_results() {
        assert_eq!(pava_naive(&[3.0, 1.0, 2.0]), vec![2.0, 2.0, 2.0]);
        assert_eq!(pava_naive(&[1.0, 3.0, 2.0]), vec![1.0, 2.5, 2.5]);
        assert_eq!(pava_naive(&[1.0, 2.0, 3.0]), vec![1.0, 2.0, 3.0]);
        let flat = pava_naive(&[5.0, 4.0, 3.0, 2.0]);
        assert!(flat.iter().all(|&v| (v - 3.5).abs() < 1e-12));
    }

    #[test]
    fn dykstra_reaches_known_projections() {
        // Monotone cone only active: (2,0) -> (1,1).
        let x = dykstra_bounded_monotone(&[2.0, 0.0], 0.0, 2.0, 2000);
        assert!((x[0] - 1.0).abs() < 1e-9 && (x[1] - 1.0).abs() < 1e-9);
        // Box only active.
        let x = dykstra_bounded_monotone(&[-1.0, 0.5, 9.0], 0.0, 2.0, 2000);
        assert!((x[0] - 0.0).abs() < 1e-9);
        assert!((x[1] - 0.5).abs() < 1e-9);
        assert!((x[2] - 2.0).abs() < 1e-9);
        // Both active: decreasing data pooled then clamped from above.
        let x = dykstra_bounded_monotone(&[5.0, 1.0], 0.0, 2.0, 2000);
        assert!((x[0] - 2.0).abs() < 1e-8 && (x[1] - 2.0).abs() < 1e-8, "{x:?}");
    }

    #[test]
    fn pinned_enumeration_known_cases() {
        // Interior far above both pins: pooled to b at the top.
        let fit = pinned_monotone_ls(&[9.0, 9.0], 0.0, 2.0);
        assert!(fit.iter().all(|&v| (v - 2.0).abs() < 1e-12), "{fit:?}");
        // Comfortably interior data: pins inactive, plain isotonic answer.
        let fit = pinned_monotone_ls(&[3.0, 1.0, 2.0], 0.0, 10.0);
        assert!((fit[0] - 2.0).abs() < 1e-12);
        assert!((fit[1] - 2.0).abs() < 1e-12);
        assert!((fit[2] - 2.0).abs() < 1e-12);
        // Equal pins collapse everything onto the shared level.
        let fit = pinned_monotone_ls(&[0.0, 5.0], 3.0, 3.0);
        assert!(fit.iter().all(|&v| (v - 3.0).abs() < 1e-12), "{fit:?}");
    }

    #[test]
    fn modality_dp_agrees_with_obvious_cases() {
        // Generous tube around constant data: 0 extremes.
        let y = vec![1.0; 6];
        let mut radii = vec![4.0; 7];
        radii[0] = 0.0;
        radii[6] = 0.0;
        assert_eq!(min_extremes_in_tube(&y, &radii, 0.25), Some(0));

        // A forced spike: tube too tight to flatten the middle.
        let y = vec![0.0, 0.0, 8.0, 8.0, 0.0, 0.0];
        let mut radii = vec![1.0; 7];
        radii[0] = 0.0;
        radii[6] = 0.0;
        assert_eq!(min_extremes_in_tube(&y, &radii, 0.25), Some(1));

        // Zero radius everywhere: must interpolate, extremes of the data.
        let y = vec![0.0, 1.0, 0.0, 1.0, 0.0];
        let radii = vec![0.0; 6];
        assert_eq!(min_extremes_in_tube(&y, &radii, 0.25), Some(3));

        // Pinned endpoint forces the sum to balance exactly; the rising
        // pair needs no extreme.
        let y = vec![0.0, 3.0];
        let mut radii = vec![0.25; 3];
        radii[2] = 0.0;
        assert_eq!(min_extremes_in_tube(&y, &radii, 0.25), Some(0));
    }
}
