//! Schur order machinery on discretized conditional-distribution
//! families: grids of h_v(t), decreasing rearrangement, the rearranged
//! copulas C-up and C-down, a tri-state Schur comparison, and an
//! SI/SD/PLOD classifier.
//!
//! Grid rows hold cell averages of h_v over a uniform t-partition, taken
//! from CDF differences. Cell averages make every row mean equal its
//! level v_j exactly (up to round-off), which the discrete measures and
//! the rearrangement identities below rely on.

use crate::copula::Copula;
use crate::error::GridError;
use std::fmt::Write as _;

/// Deviation of a row mean from its level that is treated as a model or
/// grid construction bug.
const ROW_MEAN_LIMIT: f64 = 1e-8;

/// Discretized family of conditional distributions: row j samples
/// h_{v_j} as cell averages over n_t uniform cells; v_j are the n_v
/// cell midpoints of [0,1].
#[derive(Debug, Clone, PartialEq)]
pub struct GridH {
    pub n_t: usize,
    pub n_v: usize,
    pub v_levels: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

/// Rearrangement direction: Up sorts each row nonincreasing (the SI
/// copula C-up), Down nondecreasing (the SD copula C-down).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
}

/// Tri-state outcome of a Schur comparison; the order is partial, so
/// Incomparable is a real answer, distinct from False.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ternary {
    True,
    False,
    Incomparable,
}

/// Dependence flags established on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DependenceFlags {
    pub si: bool,
    pub sd: bool,
    pub plod: bool,
}

impl GridH {
    /// Midpoint t of cell i.
    pub fn t_mid(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.n_t as f64
    }

    /// Discrete Chatterjee functional 6 mean(h^2) - 2; exactly invariant
    /// under row rearrangement.
    pub fn xi_disc(&self) -> f64 {
        let total: f64 = self
            .values
            .iter()
            .flat_map(|row| row.iter().map(|h| h * h))
            .sum();
        6.0 * total / (self.n_t * self.n_v) as f64 - 2.0
    }

    /// Discrete Spearman functional 12 mean((1 - t) h) - 3.
    pub fn rho_disc(&self) -> f64 {
        let mut total = 0.0;
        for row in &self.values {
            for (i, h) in row.iter().enumerate() {
                total += (1.0 - self.t_mid(i)) * h;
            }
        }
        12.0 * total / (self.n_t * self.n_v) as f64 - 3.0
    }

    /// CDF value C(k/n_t, v_j) assembled from row prefix sums, the
    /// discretization of C(u, v) = int_0^u h_v(t) dt.
    pub fn cdf_at(&self, j: usize, k: usize) -> f64 {
        self.values[j][..k].iter().sum::<f64>() / self.n_t as f64
    }

    /// CSV form: header row of v levels, then one row per level.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = self.v_levels.iter().map(|v| format!("{v}")).collect();
        let _ = writeln!(out, "{}", header.join(","));
        for row in &self.values {
            let cells: Vec<String> = row.iter().map(|h| format!("{h}")).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

/// Builds the grid from a model: h[j][i] = n_t (C(t_{i+1}, v_j) -
/// C(t_i, v_j)), the exact cell average of h_{v_j}.
pub fn grid_from_model(
    model: &dyn Copula,
    n_t: usize,
    n_v: usize,
) -> Result<GridH, GridError> {
    assert!(n_t >= 2 && n_v >= 2);
    let v_levels: Vec<f64> = (0..n_v).map(|j| (j as f64 + 0.5) / n_v as f64).collect();
    let mut values = Vec::with_capacity(n_v);
    for (j, &v) in v_levels.iter().enumerate() {
        let mut row = Vec::with_capacity(n_t);
        let mut prev = 0.0;
        for i in 0..n_t {
            let t_next = (i + 1) as f64 / n_t as f64;
            let c = model.cdf(t_next, v);
            row.push(((c - prev) * n_t as f64).clamp(0.0, 1.0));
            prev = c;
        }
        let dev = (row.iter().sum::<f64>() / n_t as f64 - v).abs();
        if dev > ROW_MEAN_LIMIT {
            return Err(GridError::GridInconsistent {
                row: j,
                dev,
                limit: ROW_MEAN_LIMIT,
            });
        }
        values.push(row);
    }
    Ok(GridH {
        n_t,
        n_v,
        v_levels,
        values,
    })
}

/// Sorts a row nonincreasing; the multiset of values is preserved.
pub fn decreasing_rearrangement(row: &[f64]) -> Vec<f64> {
    let mut out = row.to_vec();
    out.sort_by(|a, b| b.partial_cmp(a).unwrap());
    out
}

/// Row-wise rearranged grid: Up gives the SI representative, Down the
/// SD one. Row means are untouched.
pub fn rearranged_copula(g: &GridH, direction: Direction) -> GridH {
    let values = g
        .values
        .iter()
        .map(|row| {
            let mut sorted = decreasing_rearrangement(row);
            if direction == Direction::Down {
                sorted.reverse();
            }
            sorted
        })
        .collect();
    GridH {
        n_t: g.n_t,
        n_v: g.n_v,
        v_levels: g.v_levels.clone(),
        values,
    }
}

/// Default prefix-sum tolerance for [schur_leq].
pub fn schur_default_tol(n_t: usize) -> f64 {
    1e-8 * n_t as f64
}

/// Schur comparison g1 <= g2: for every level, every prefix sum of the
/// decreasing rearrangement of g1's row is at most g2's, with equal
/// row totals. Returns False when the reverse holds, Incomparable when
/// neither does.
pub fn schur_leq(g1: &GridH, g2: &GridH, tol: f64) -> Result<Ternary, GridError> {
    if g1.n_t != g2.n_t || g1.n_v != g2.n_v {
        return Err(GridError::DimensionMismatch(g1.n_t, g1.n_v, g2.n_t, g2.n_v));
    }
    let mut forward = true;
    let mut backward = true;
    for j in 0..g1.n_v {
        let r1 = decreasing_rearrangement(&g1.values[j]);
        let r2 = decreasing_rearrangement(&g2.values[j]);
        let mut p1 = 0.0;
        let mut p2 = 0.0;
        for i in 0..g1.n_t {
            p1 += r1[i];
            p2 += r2[i];
            if p1 > p2 + tol {
                forward = false;
            }
            if p2 > p1 + tol {
                backward = false;
            }
        }
        if (p1 - p2).abs() > tol {
            forward = false;
            backward = false;
        }
        if !forward && !backward {
            return Ok(Ternary::Incomparable);
        }
    }
    if forward {
        Ok(Ternary::True)
    } else if backward {
        Ok(Ternary::False)
    } else {
        Ok(Ternary::Incomparable)
    }
}

/// SI/SD from row monotonicity in t, PLOD from the assembled CDF
/// dominating the product copula on the grid.
pub fn classify_dependence(g: &GridH, tol: f64) -> DependenceFlags {
    let mut si = true;
    let mut sd = true;
    for row in &g.values {
        for w in row.windows(2) {
            if w[1] > w[0] + tol {
                si = false;
            }
            if w[0] > w[1] + tol {
                sd = false;
            }
        }
    }
    let mut plod = true;
    'outer: for j in 0..g.n_v {
        let v = g.v_levels[j];
        let mut prefix = 0.0;
        for i in 0..g.n_t {
            prefix += g.values[j][i];
            let u = (i + 1) as f64 / g.n_t as f64;
            if prefix / (g.n_t as f64) < u * v - tol {
                plod = false;
                break 'outer;
            }
        }
    }
    DependenceFlags { si, sd, plod }
}

/// Exact value of (mean, F_v) for a step function given by interior
/// breakpoints and per-piece values: F_v(h) = int (2(1-t)h - h^2) dt.
/// `bounds` has len(values)+1 entries from 0 to 1.
pub fn step_functional(bounds: &[f64], values: &[f64]) -> (f64, f64) {
    assert_eq!(bounds.len(), values.len() + 1);
    let mut mean = 0.0;
    let mut f = 0.0;
    for (k, &h) in values.iter().enumerate() {
        let (a, b) = (bounds[k], bounds[k + 1]);
        mean += h * (b - a);
        f += 2.0 * h * (b - a) - h * (b * b - a * a) - h * h * (b - a);
    }
    (mean, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::{parse_spec, PlodShuffle, Product, UpperFrechet};
    use crate::numerics::RngStream;

    #[test]
    fn product_grid_rows_constant() {
        let g = grid_from_model(&Product, 50, 10).unwrap();
        for (j, row) in g.values.iter().enumerate() {
            for &h in row {
                assert!((h - g.v_levels[j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn comonotone_grid_rows_are_indicators() {
        let g = grid_from_model(&UpperFrechet, 100, 10).unwrap();
        for (j, row) in g.values.iter().enumerate() {
            let v = g.v_levels[j];
            let mut fractional = 0;
            for (i, &h) in row.iter().enumerate() {
                let t_hi = (i + 1) as f64 / 100.0;
                if t_hi <= v {
                    assert!((h - 1.0).abs() < 1e-12, "cell {i} of row {j}: {h}");
                } else if h > 1e-12 && h < 1.0 - 1e-12 {
                    fractional += 1;
                }
            }
            assert!(fractional <= 1, "row {j} has {fractional} boundary cells");
            assert!((row.iter().sum::<f64>() / 100.0 - v).abs() < 1e-14);
        }
    }

    #[test]
    fn cb_grid_matches_clamped_ramp() {
        let c = parse_spec("cb:b=1").unwrap().build().unwrap();
        let g = grid_from_model(c.as_ref(), 200, 20).unwrap();
        let cb = crate::copula::BoundaryCopula::new(1.0);
        for (j, row) in g.values.iter().enumerate() {
            let v = g.v_levels[j];
            let s = cb.s_v(v);
            let mut off = 0;
            for (i, &h) in row.iter().enumerate() {
                let want = (s - g.t_mid(i)).clamp(0.0, 1.0);
                // Cell averages differ from midpoint values only in the
                // two cells containing the clamp kinks.
                if (h - want).abs() > 1e-12 {
                    off += 1;
                    assert!((h - want).abs() <= 0.5 / 200.0);
                }
            }
            assert!(off <= 2, "row {j}: {off} kink cells");
        }
    }

    #[test]
    fn rearrangement_basics() {
        assert_eq!(
            decreasing_rearrangement(&[0.2, 0.9, 0.5]),
            vec![0.9, 0.5, 0.2]
        );
        assert_eq!(decreasing_rearrangement(&[0.4, 0.4]), vec![0.4, 0.4]);
        let row = [0.3, 0.1, 0.9, 0.7];
        let sum_before: f64 = row.iter().sum();
        let sum_after: f64 = decreasing_rearrangement(&row).iter().sum();
        assert_eq!(sum_before, sum_after);
    }

    #[test]
    fn plod_up_equals_comonotone_grid() {
        // n_t chosen so every shuffle breakpoint and every v level sits
        // on a cell boundary; rows are then exact 0/1 vectors and the
        // rearrangement reproduces M's grid cell for cell.
        let g = grid_from_model(&PlodShuffle, 400, 200).unwrap();
        let up = rearranged_copula(&g, Direction::Up);
        let m = grid_from_model(&UpperFrechet, 400, 200).unwrap();
        for j in 0..200 {
            for i in 0..400 {
                assert!(
                    (up.values[j][i] - m.values[j][i]).abs() < 1e-8,
                    "cell ({j},{i})"
                );
            }
        }
    }

    #[test]
    fn si_grid_is_fixed_by_up() {
        let c = parse_spec("cb:b=2").unwrap().build().unwrap();
        let g = grid_from_model(c.as_ref(), 100, 50).unwrap();
        let up = rearranged_copula(&g, Direction::Up);
        for j in 0..g.n_v {
            for i in 0..g.n_t {
                assert!((g.values[j][i] - up.values[j][i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn down_is_reflected_up() {
        // C-down(u, v) = v - C-up(1-u, v), checked through the assembled
        // CDFs; holds exactly because reversal mirrors prefix sums.
        let c = parse_spec("plod").unwrap().build().unwrap();
        let g = grid_from_model(c.as_ref(), 80, 40).unwrap();
        let up = rearranged_copula(&g, Direction::Up);
        let down = rearranged_copula(&g, Direction::Down);
        for j in 0..g.n_v {
            let v = g.v_levels[j];
            for k in 0..=g.n_t {
                let lhs = down.cdf_at(j, k);
                let rhs = v - up.cdf_at(j, g.n_t - k);
                assert!((lhs - rhs).abs() < 1e-10, "j={j}, k={k}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn discrete_measures_under_rearrangement() {
        for spec in ["cb:b=1.3", "plod", "gauss:r=0.5", "clayton:theta=2"] {
            let c = parse_spec(spec).unwrap().build().unwrap();
            let g = grid_from_model(c.as_ref(), 200, 100).unwrap();
            let up = rearranged_copula(&g, Direction::Up);
            let down = rearranged_copula(&g, Direction::Down);
            assert!((g.xi_disc() - up.xi_disc()).abs() < 1e-12, "{spec}");
            assert!((g.xi_disc() - down.xi_disc()).abs() < 1e-12, "{spec}");
            assert!(down.rho_disc() <= g.rho_disc() + 1e-12, "{spec}");
            assert!(g.rho_disc() <= up.rho_disc() + 1e-12, "{spec}");
            assert!(
                (down.rho_disc() + up.rho_disc()).abs() < 1e-10,
                "{spec}: {} vs {}",
                down.rho_disc(),
                up.rho_disc()
            );
        }
    }

    #[test]
    fn schur_extremes() {
        let n = 100;
        let pi = grid_from_model(&Product, n, 20).unwrap();
        let m = grid_from_model(&UpperFrechet, n, 20).unwrap();
        let tol = schur_default_tol(n);
        for spec in ["cb:b=1", "plod", "frank:theta=-3"] {
            let g =
                grid_from_model(parse_spec(spec).unwrap().build().unwrap().as_ref(), n, 20)
                    .unwrap();
            assert_eq!(schur_leq(&pi, &g, tol).unwrap(), Ternary::True, "{spec}");
            assert_eq!(schur_leq(&g, &m, tol).unwrap(), Ternary::True, "{spec}");
        }
    }

    #[test]
    fn schur_orders_boundary_family() {
        let n = 400;
        let a = grid_from_model(
            parse_spec("cb:b=0.5").unwrap().build().unwrap().as_ref(),
            n,
            40,
        )
        .unwrap();
        let b = grid_from_model(
            parse_spec("cb:b=2").unwrap().build().unwrap().as_ref(),
            n,
            40,
        )
        .unwrap();
        let tol = schur_default_tol(n);
        assert_eq!(schur_leq(&a, &b, tol).unwrap(), Ternary::True);
        assert_eq!(schur_leq(&b, &a, tol).unwrap(), Ternary::False);
        // Consistent with the xi ordering 0.1 < 0.575.
        assert!(a.xi_disc() < b.xi_disc());
    }

    #[test]
    fn schur_shuffle_equivalence() {
        // Shuffling permutes each row's cells, so grids at any fold
        // fraction are Schur-equivalent.
        let n = 400;
        let tol = schur_default_tol(n);
        let grids: Vec<GridH> = [0.0, 0.3, 0.7, 1.0]
            .iter()
            .map(|p| {
                let c = parse_spec(&format!("shuffle:b=1.5,p={p}"))
                    .unwrap()
                    .build()
                    .unwrap();
                grid_from_model(c.as_ref(), n, 40).unwrap()
            })
            .collect();
        for a in &grids {
            for b in &grids {
                assert_eq!(schur_leq(a, b, tol).unwrap(), Ternary::True);
                assert_eq!(schur_leq(b, a, tol).unwrap(), Ternary::True);
            }
        }
    }

    #[test]
    fn schur_dimension_mismatch() {
        let a = grid_from_model(&Product, 50, 10).unwrap();
        let b = grid_from_model(&Product, 60, 10).unwrap();
        assert!(matches!(
            schur_leq(&a, &b, 1e-6),
            Err(GridError::DimensionMismatch(..))
        ));
    }

    #[test]
    fn dependence_classification() {
        let tol = 1e-9;
        let cb = grid_from_model(
            parse_spec("cb:b=1").unwrap().build().unwrap().as_ref(),
            200,
            50,
        )
        .unwrap();
        let f = classify_dependence(&cb, tol);
        assert!(f.si && !f.sd && f.plod);

        let plod = grid_from_model(&PlodShuffle, 400, 100).unwrap();
        let f = classify_dependence(&plod, tol);
        assert!(f.plod && !f.si && !f.sd);

        let w = grid_from_model(
            parse_spec("w").unwrap().build().unwrap().as_ref(),
            200,
            50,
        )
        .unwrap();
        let f = classify_dependence(&w, tol);
        assert!(f.sd && !f.si && !f.plod);
    }

    #[test]
    fn extreme_point_inequality_random_steps() {
        let mut rng = RngStream::new(2024, 3);
        for _ in 0..1000 {
            let pieces = 2 + (rng.next_u64() % 6) as usize;
            let mut bounds: Vec<f64> = (0..pieces - 1).map(|_| rng.next_f64()).collect();
            bounds.push(0.0);
            bounds.push(1.0);
            bounds.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut values: Vec<f64> = (0..pieces).map(|_| rng.next_f64()).collect();
            values.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let (v, f) = step_functional(&bounds, &values);
            assert!(f >= v * (1.0 - v) - 1e-9, "F={f} < {}", v * (1.0 - v));
        }
        // Equality cases: constant row and the indicator.
        let (v, f) = step_functional(&[0.0, 1.0], &[0.37]);
        assert!((f - v * (1.0 - v)).abs() < 1e-9);
        let (v, f) = step_functional(&[0.0, 0.37, 1.0], &[1.0, 0.0]);
        assert!((v - 0.37).abs() < 1e-15);
        assert!((f - v * (1.0 - v)).abs() < 1e-9);
    }

    #[test]
    fn csv_round_shape() {
        let g = grid_from_model(&Product, 4, 2).unwrap();
        let csv = g.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "0.25,0.75");
        assert_eq!(lines[1].split(',').count(), 4);
    }
}
