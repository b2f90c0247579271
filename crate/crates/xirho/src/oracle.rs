//! Brute-force verification of the constrained maximization of
//! Spearman's rho at a fixed Chatterjee budget.
//!
//! The continuum problem maximizes 12 iint (1-t) h_v(t) dt dv - 3 over
//! conditional families h with values in [0,1], row means v, and
//! 6 iint h^2 - 2 <= c. The oracle discretizes on midpoints and solves
//! the KKT system directly: each row subproblem is water-filling with a
//! clamped linear solution, the row multiplier gamma_v is calibrated by
//! bisection to the mean constraint, and an outer bisection on the
//! quadratic multiplier mu activates the budget. No structure from the
//! closed-form optimizer is assumed; the clamped ramp has to emerge on
//! its own. A projected-gradient ascent over the same feasible set
//! provides an independent cross-check.

use crate::error::OracleError;
use crate::numerics::pairwise_sum;
use serde::Serialize;

/// Inner bisection target for the row-mean calibration.
const GAMMA_TOL: f64 = 1e-12;
/// Outer bisection target for the active quadratic constraint.
const MU_TOL: f64 = 1e-11;
/// Sweep cap and movement tolerance of the alternating projections.
const PROJ_SWEEPS: usize = 10_000;
const PROJ_TOL: f64 = 1e-10;

/// Discretized instance: n_t midpoint cells in t, n_v rows in v, and a
/// xi budget c.
#[derive(Debug, Clone, Copy)]
pub struct DiscreteProblem {
    pub n_t: usize,
    pub n_v: usize,
    pub c: f64,
}

impl DiscreteProblem {
    pub fn new(n_t: usize, n_v: usize, c: f64) -> Self {
        assert!(n_t >= 2 && n_v >= 2);
        assert!(c > 0.0 && c < 1.0, "xi budget must lie in (0,1)");
        DiscreteProblem { n_t, n_v, c }
    }

    fn t_mid(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.n_t as f64
    }

    fn v_level(&self, j: usize) -> f64 {
        (j as f64 + 0.5) / self.n_v as f64
    }

    /// Discrete objective 12 mean((1-t) h) - 3.
    pub fn objective(&self, h: &[Vec<f64>]) -> f64 {
        let rows: Vec<f64> = h
            .iter()
            .map(|row| {
                let terms: Vec<f64> = row
                    .iter()
                    .enumerate()
                    .map(|(i, &x)| (1.0 - self.t_mid(i)) * x)
                    .collect();
                pairwise_sum(&terms)
            })
            .collect();
        12.0 * pairwise_sum(&rows) / (self.n_t * self.n_v) as f64 - 3.0
    }

    /// Discrete Chatterjee functional 6 mean(h^2) - 2.
    pub fn xi_value(&self, h: &[Vec<f64>]) -> f64 {
        let rows: Vec<f64> = h
            .iter()
            .map(|row| {
                let terms: Vec<f64> = row.iter().map(|&x| x * x).collect();
                pairwise_sum(&terms)
            })
            .collect();
        6.0 * pairwise_sum(&rows) / (self.n_t * self.n_v) as f64 - 2.0
    }
}

/// Solution with multipliers and the optimal matrix.
#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub h: Vec<Vec<f64>>,
    pub v_levels: Vec<f64>,
    pub objective: f64,
    pub mu: f64,
    pub row_multipliers: Vec<f64>,
    pub c: f64,
    pub n_t: usize,
    pub n_v: usize,
}

/// Row maximizer of sum 2(1-t_i) h_i - mu sum h_i^2 - gamma sum h_i over
/// the box: the water-filling clamp h_i = clamp((1 - gamma/2 - t_i)/mu, 0, 1).
pub fn solve_row(mu: f64, gamma: f64, n_t: usize) -> Vec<f64> {
    assert!(mu > 0.0);
    (0..n_t)
        .map(|i| {
            let t = (i as f64 + 0.5) / n_t as f64;
            ((1.0 - gamma / 2.0 - t) / mu).clamp(0.0, 1.0)
        })
        .collect()
}

fn row_mean(mu: f64, gamma: f64, n_t: usize) -> f64 {
    solve_row(mu, gamma, n_t).iter().sum::<f64>() / n_t as f64
}

/// Finds gamma with mean(solve_row(mu, gamma)) = v; the mean is
/// continuous and nonincreasing in gamma, so bisection applies.
pub fn calibrate_gamma(mu: f64, v: f64, n_t: usize) -> Result<f64, OracleError> {
    assert!(mu > 0.0);
    assert!((0.0..=1.0).contains(&v));
    // mean = 1 at gamma <= -2 mu t_min, mean = 0 at gamma >= 2 (1 - t_min).
    let mut lo = -2.0 * (mu + 1.0);
    let mut hi = 2.0;
    if row_mean(mu, lo, n_t) < v - GAMMA_TOL || row_mean(mu, hi, n_t) > v + GAMMA_TOL {
        return Err(OracleError::BracketFailed { v });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let m = row_mean(mu, mid, n_t);
        if (m - v).abs() <= GAMMA_TOL {
            return Ok(mid);
        }
        if m > v {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn assemble(problem: &DiscreteProblem, mu: f64) -> Result<(Vec<Vec<f64>>, Vec<f64>), OracleError> {
    let mut h = Vec::with_capacity(problem.n_v);
    let mut gammas = Vec::with_capacity(problem.n_v);
    for j in 0..problem.n_v {
        let v = problem.v_level(j);
        let gamma = calibrate_gamma(mu, v, problem.n_t)?;
        h.push(solve_row(mu, gamma, problem.n_t));
        gammas.push(gamma);
    }
    Ok((h, gammas))
}

/// Solves the discrete problem: outer bisection on mu > 0 drives the
/// quadratic constraint active (xi functional equal to c), with each
/// candidate matrix assembled row by row from the water-filling form.
/// The monotone-in-v constraint is not imposed; the caller can verify it
/// holds at the optimum.
pub fn solve(problem: &DiscreteProblem) -> Result<OracleSolution, OracleError> {
    // xi(mu) decreases from the steep-ramp limit to the near-constant
    // limit as mu grows.
    let mut mu_lo = 1e-4;
    let mut mu_hi = 1e4;
    let xi_at = |mu: f64| -> Result<f64, OracleError> {
        Ok(problem.xi_value(&assemble(problem, mu)?.0))
    };
    let hi_budget = xi_at(mu_lo)?;
    let lo_budget = xi_at(mu_hi)?;
    if problem.c > hi_budget || problem.c < lo_budget {
        return Err(OracleError::InfeasibleBudget {
            c: problem.c,
            lo: lo_budget,
            hi: hi_budget,
        });
    }
    for _ in 0..200 {
        let mid = (mu_lo * mu_hi).sqrt();
        let xi = xi_at(mid)?;
        if (xi - problem.c).abs() <= MU_TOL || mu_hi - mu_lo <= MU_TOL * mu_lo {
            break;
        }
        if xi > problem.c {
            mu_lo = mid;
        } else {
            mu_hi = mid;
        }
    }
    let mu = (mu_lo * mu_hi).sqrt();
    let (h, row_multipliers) = assemble(problem, mu)?;
    let objective = problem.objective(&h);
    Ok(OracleSolution {
        v_levels: (0..problem.n_v).map(|j| problem.v_level(j)).collect(),
        objective,
        mu,
        row_multipliers,
        c: problem.c,
        n_t: problem.n_t,
        n_v: problem.n_v,
        h,
    })
}

/// Per-row ramp fit extracted from a solution row for diagnostics.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RowDiagnostic {
    pub v: f64,
    /// Last t still at the 1-plateau (NaN-free sentinel -1 if none).
    pub plateau_end: f64,
    /// First t at which the row has fallen to 0 (sentinel 2 if none).
    pub root: f64,
    /// Least-squares slope over the strictly interior ramp cells.
    pub slope: f64,
}

/// Fits plateau end, root, and ramp slope of each optimal row.
pub fn diagnostics(solution: &OracleSolution) -> Vec<RowDiagnostic> {
    let n_t = solution.n_t;
    let t_mid = |i: usize| (i as f64 + 0.5) / n_t as f64;
    solution
        .h
        .iter()
        .zip(&solution.v_levels)
        .map(|(row, &v)| {
            let plateau_end = row
                .iter()
                .rposition(|&x| x >= 1.0 - 1e-9)
                .map(t_mid)
                .unwrap_or(-1.0);
            let root = row
                .iter()
                .position(|&x| x <= 1e-9)
                .map(t_mid)
                .unwrap_or(2.0);
            let interior: Vec<(f64, f64)> = row
                .iter()
                .enumerate()
                .filter(|(_, &x)| x > 1e-9 && x < 1.0 - 1e-9)
                .map(|(i, &x)| (t_mid(i), x))
                .collect();
            let slope = if interior.len() >= 2 {
                let n = interior.len() as f64;
                let sx: f64 = interior.iter().map(|p| p.0).sum();
                let sy: f64 = interior.iter().map(|p| p.1).sum();
                let sxx: f64 = interior.iter().map(|p| p.0 * p.0).sum();
                let sxy: f64 = interior.iter().map(|p| p.0 * p.1).sum();
                (n * sxy - sx * sy) / (n * sxx - sx * sx)
            } else {
                f64::NAN
            };
            RowDiagnostic {
                v,
                plateau_end,
                root,
                slope,
            }
        })
        .collect()
}

/// Diagnostics CSV: per-row fitted ramp parameters.
pub fn diagnostics_csv(solution: &OracleSolution) -> String {
    let mut out = String::from("v,plateau_end,root,slope\n");
    for d in diagnostics(solution) {
        out.push_str(&format!("{},{},{},{}\n", d.v, d.plateau_end, d.root, d.slope));
    }
    out
}

/// Pool-adjacent-violators: least-squares nondecreasing fit, used to
/// project columns onto the monotone-in-v cone.
fn pava_nondecreasing(xs: &mut [f64]) {
    let n = xs.len();
    // (mean, count) blocks.
    let mut means = Vec::with_capacity(n);
    let mut counts: Vec<usize> = Vec::with_capacity(n);
    for &x in xs.iter() {
        means.push(x);
        counts.push(1);
        while means.len() >= 2 && means[means.len() - 2] > means[means.len() - 1] {
            let (m2, c2) = (means.pop().unwrap(), counts.pop().unwrap());
            let k = means.len() - 1;
            let c1 = counts[k];
            means[k] = (means[k] * c1 as f64 + m2 * c2 as f64) / (c1 + c2) as f64;
            counts[k] = c1 + c2;
        }
    }
    let mut i = 0;
    for (m, c) in means.into_iter().zip(counts) {
        for _ in 0..c {
            xs[i] = m;
            i += 1;
        }
    }
}

/// Dykstra projection onto the intersection of the four constraint
/// sets: box, row-mean hyperplanes, monotone-in-v cone, and the xi
/// ball. The correction terms make the limit the metric projection,
/// which plain cyclic projections would not give for the non-affine
/// sets.
fn project_feasible(problem: &DiscreteProblem, h: &mut [Vec<f64>]) -> Result<(), OracleError> {
    let n_t = problem.n_t;
    let n_v = problem.n_v;
    let mut corrections = vec![vec![vec![0.0_f64; n_t]; n_v]; 4];
    let mut col = vec![0.0; n_v];
    let mut snapshot = h.to_vec();
    for _ in 0..PROJ_SWEEPS {
        for (set, corr) in corrections.iter_mut().enumerate() {
            // x + p_m, remembered to update the correction afterwards.
            for j in 0..n_v {
                for i in 0..n_t {
                    h[j][i] += corr[j][i];
                    corr[j][i] = h[j][i];
                }
            }
            match set {
                0 => {
                    for row in h.iter_mut() {
                        for x in row.iter_mut() {
                            *x = x.clamp(0.0, 1.0);
                        }
                    }
                }
                1 => {
                    for (j, row) in h.iter_mut().enumerate() {
                        let shift =
                            problem.v_level(j) - row.iter().sum::<f64>() / n_t as f64;
                        for x in row.iter_mut() {
                            *x += shift;
                        }
                    }
                }
                2 => {
                    for i in 0..n_t {
                        for j in 0..n_v {
                            col[j] = h[j][i];
                        }
                        pava_nondecreasing(&mut col);
                        for j in 0..n_v {
                            h[j][i] = col[j];
                        }
                    }
                }
                _ => {
                    let limit = (problem.c + 2.0) / 6.0;
                    let ms = h
                        .iter()
                        .map(|row| row.iter().map(|x| x * x).sum::<f64>())
                        .sum::<f64>()
                        / (n_t * n_v) as f64;
                    if ms > limit {
                        let scale = (limit / ms).sqrt();
                        for row in h.iter_mut() {
                            for x in row.iter_mut() {
                                *x *= scale;
                            }
                        }
                    }
                }
            }
            // p_m = (x + p_m) - P_m(x + p_m).
            for j in 0..n_v {
                for i in 0..n_t {
                    corr[j][i] -= h[j][i];
                }
            }
        }
        // Convergence: the iterate satisfies every constraint within tol.
        let mut infeas: f64 = 0.0;
        for (j, row) in h.iter().enumerate() {
            let mut mean = 0.0;
            for (i, &x) in row.iter().enumerate() {
                infeas = infeas.max((x.clamp(0.0, 1.0) - x).abs());
                if j > 0 {
                    infeas = infeas.max((h[j - 1][i] - x).max(0.0));
                }
                mean += x;
            }
            infeas = infeas.max((mean / n_t as f64 - problem.v_level(j)).abs());
        }
        let ms = h
            .iter()
            .map(|row| row.iter().map(|x| x * x).sum::<f64>())
            .sum::<f64>()
            / (n_t * n_v) as f64;
        infeas = infeas.max(ms - (problem.c + 2.0) / 6.0);
        let mut cycle_move: f64 = 0.0;
        for j in 0..n_v {
            for i in 0..n_t {
                cycle_move = cycle_move.max((h[j][i] - snapshot[j][i]).abs());
                snapshot[j][i] = h[j][i];
            }
        }
        // Either the iterate is feasible to tolerance, or Dykstra has
        // stopped moving and the residual infeasibility is round-off
        // level for the caller's purposes.
        if infeas <= PROJ_TOL || (cycle_move <= PROJ_TOL && infeas <= 1e-6) {
            return Ok(());
        }
    }
    Err(OracleError::ProjectionNotConverged {
        sweeps: PROJ_SWEEPS,
    })
}

/// Projected gradient ascent on the linear objective from the feasible
/// start h[j][i] = v_j. Independent of the water-filling solver; the
/// best feasible objective seen is returned.
pub fn cross_check_projected_gradient(
    problem: &DiscreteProblem,
    iters: usize,
) -> Result<f64, OracleError> {
    let n_t = problem.n_t;
    let mut h: Vec<Vec<f64>> = (0..problem.n_v)
        .map(|j| vec![problem.v_level(j); n_t])
        .collect();
    project_feasible(problem, &mut h)?;
    let mut best = problem.objective(&h);
    // The objective is linear, so the step only trades projection cost
    // against progress; halve it whenever Dykstra fails to settle
    // (tight budgets leave little room around the xi ball).
    let mut step = 0.5;
    for _ in 0..iters {
        let before = h.clone();
        for row in h.iter_mut() {
            for (i, x) in row.iter_mut().enumerate() {
                *x += step * (1.0 - (i as f64 + 0.5) / n_t as f64);
            }
        }
        match project_feasible(problem, &mut h) {
            Ok(()) => {}
            Err(e) => {
                h = before;
                step *= 0.5;
                if step < 1e-4 {
                    return Err(e);
                }
                continue;
            }
        }
        let obj = problem.objective(&h);
        if obj > best {
            best = obj;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::m_of_x;

    #[test]
    fn row_solution_examples() {
        // Large gamma clamps to zero.
        assert!(solve_row(1.0, 10.0, 8).iter().all(|&x| x == 0.0));
        // Small gamma saturates the head of the row.
        let row = solve_row(1.0, -4.0, 8);
        assert_eq!(row[0], 1.0);
        // mu = 1, gamma = 1 at n_t = 4: clamp(0.5 - t).
        let row = solve_row(1.0, 1.0, 4);
        let want = [0.375, 0.125, 0.0, 0.0];
        for (got, want) in row.iter().zip(want) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn row_solution_matches_grid_search() {
        // Exhaustive 0.01-step search over a 3-cell row must agree with
        // the clamp formula at the same multipliers.
        let (mu, gamma, n_t) = (0.8, 0.6, 3);
        let t = |i: usize| (i as f64 + 0.5) / n_t as f64;
        let score = |h: &[f64]| -> f64 {
            h.iter()
                .enumerate()
                .map(|(i, &x)| 2.0 * (1.0 - t(i)) * x - mu * x * x - gamma * x)
                .sum()
        };
        let mut best = vec![0.0; n_t];
        let mut best_score = f64::NEG_INFINITY;
        for a in 0..=100 {
            for b in 0..=100 {
                for c in 0..=100 {
                    let h = [a as f64 / 100.0, b as f64 / 100.0, c as f64 / 100.0];
                    let s = score(&h);
                    if s > best_score {
                        best_score = s;
                        best = h.to_vec();
                    }
                }
            }
        }
        let analytic = solve_row(mu, gamma, n_t);
        for (g, a) in best.iter().zip(&analytic) {
            assert!((g - a).abs() <= 0.01, "{g} vs {a}");
        }
    }

    #[test]
    fn gamma_calibration() {
        for &(mu, v) in &[(1.0, 0.5), (0.5, 0.2), (2.0, 0.9), (1.0, 0.0), (1.0, 1.0)] {
            let gamma = calibrate_gamma(mu, v, 400).unwrap();
            assert!(
                (row_mean(mu, gamma, 400) - v).abs() <= 1e-11,
                "mu={mu}, v={v}"
            );
        }
        // mu = 1, v = 0.5: the calibrated ramp matches the boundary
        // family's intercept s_v = 1 for b = 1 (slope -1/mu = -1).
        let gamma = calibrate_gamma(1.0, 0.5, 400).unwrap();
        let row = solve_row(1.0, gamma, 400);
        for (i, &x) in row.iter().enumerate() {
            let t = (i as f64 + 0.5) / 400.0;
            assert!((x - (1.0 - t).clamp(0.0, 1.0)).abs() < 1e-3, "t={t}");
        }
    }

    #[test]
    fn solve_recovers_envelope_at_branch_point() {
        let problem = DiscreteProblem::new(200, 200, 0.3);
        let sol = solve(&problem).unwrap();
        assert!(
            (sol.objective - 0.7).abs() < 5e-3,
            "objective {}",
            sol.objective
        );
        assert!((problem.xi_value(&sol.h) - 0.3).abs() < 1e-9);
        assert!(sol.mu > 0.0);
        // Rows nonincreasing in t and nondecreasing in v, although
        // neither was imposed.
        for row in &sol.h {
            for w in row.windows(2) {
                assert!(w[1] <= w[0] + 1e-12);
            }
        }
        for j in 1..sol.n_v {
            for i in 0..sol.n_t {
                assert!(sol.h[j][i] >= sol.h[j - 1][i] - 1e-9);
            }
        }
    }

    #[test]
    fn solve_identifies_slope_multiplier() {
        // mu is the inverse boundary slope: at c = 0.575, b = 2.
        let problem = DiscreteProblem::new(400, 100, 0.575);
        let sol = solve(&problem).unwrap();
        assert!((sol.mu - 0.5).abs() < 1e-2, "mu={}", sol.mu);
        let diag = diagnostics(&sol);
        let mid = &diag[50];
        assert!(
            (mid.slope + 2.0).abs() < 0.02 * 2.0,
            "slope {}",
            mid.slope
        );
        assert!(
            (sol.objective - m_of_x(0.575).unwrap()).abs() < 5e-3,
            "objective {}",
            sol.objective
        );
    }

    #[test]
    fn near_perfect_budget() {
        let problem = DiscreteProblem::new(400, 100, 0.99);
        let sol = solve(&problem).unwrap();
        assert!(
            (sol.objective - m_of_x(0.99).unwrap()).abs() < 1e-2,
            "objective {}",
            sol.objective
        );
    }

    #[test]
    fn infeasible_budget_detected() {
        // The midpoint discretization cannot reach xi = 1 - eps for
        // tiny eps at a coarse grid.
        let problem = DiscreteProblem {
            n_t: 10,
            n_v: 10,
            c: 0.999999,
        };
        assert!(matches!(
            solve(&problem),
            Err(OracleError::InfeasibleBudget { .. })
        ));
    }

    #[test]
    fn pava_pools_violators() {
        let mut xs = [3.0, 1.0, 2.0, 5.0, 4.0];
        pava_nondecreasing(&mut xs);
        assert_eq!(xs, [2.0, 2.0, 2.0, 4.5, 4.5]);
        let mut ok = [1.0, 2.0, 3.0];
        pava_nondecreasing(&mut ok);
        assert_eq!(ok, [1.0, 2.0, 3.0]);
    }

    #[test]
    fn projected_gradient_agrees_with_kkt() {
        let problem = DiscreteProblem::new(50, 50, 0.3);
        let sol = solve(&problem).unwrap();
        let pgd = cross_check_projected_gradient(&problem, 200).unwrap();
        assert!(pgd <= sol.objective + 1e-6, "pgd {pgd} > {}", sol.objective);
        assert!(
            (pgd - sol.objective).abs() <= 1e-3,
            "pgd {pgd} vs kkt {}",
            sol.objective
        );
    }

    #[test]
    fn projected_gradient_tiny_budget() {
        let problem = DiscreteProblem::new(40, 40, 0.005);
        let pgd = cross_check_projected_gradient(&problem, 100).unwrap();
        assert!(pgd.abs() < 0.15, "objective {pgd}");
    }
}
