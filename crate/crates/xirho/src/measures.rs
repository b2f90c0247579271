//! Chatterjee's xi and Spearman's rho: closed forms for the boundary
//! family, kink-aware tensor quadrature for arbitrary copulas, Monte
//! Carlo sampling, and the rank-based estimators xi_n and rho_n.

use crate::copula::{Copula, CopulaSpec, Family};
use crate::error::MeasureError;
use crate::numerics::{gauss_legendre, integrate_panels, panel_boundaries, ranks, RngStream};
use serde::{Deserialize, Serialize};

/// Base uniform panels per axis; model kinks are merged in on top.
const BASE_PANELS: usize = 4;
/// Round-off slack allowed when clamping xi/rho back into range.
const ROUNDOFF: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    ClosedForm,
    Quadrature,
    MonteCarlo,
    RankEstimator,
}

/// A computed (xi, rho) pair with its provenance and error estimate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureResult {
    pub xi: f64,
    pub rho: f64,
    pub method: Method,
    pub err: f64,
}

/// Spearman's rho of the boundary copula C_b (closed form).
pub fn rho_closed_cb(b: f64) -> f64 {
    assert!(b != 0.0);
    let a = b.abs();
    let mag = if a <= 1.0 {
        a - 3.0 * a * a / 10.0
    } else {
        1.0 - 1.0 / (2.0 * a * a) + 1.0 / (5.0 * a * a * a)
    };
    b.signum() * mag
}

/// Chatterjee's xi of the boundary copula C_b (closed form).
pub fn xi_closed_cb(b: f64) -> f64 {
    assert!(b != 0.0);
    let a = b.abs();
    if a <= 1.0 {
        a * a * (5.0 - 2.0 * a) / 10.0
    } else {
        1.0 - 1.0 / a + 3.0 / (10.0 * a * a)
    }
}

/// Closed-form MeasureResult for C_b.
pub fn closed_cb(b: f64) -> MeasureResult {
    MeasureResult {
        xi: xi_closed_cb(b),
        rho: rho_closed_cb(b),
        method: Method::ClosedForm,
        err: 0.0,
    }
}

fn clamp_range(value: f64, lo: f64, hi: f64) -> Result<f64, MeasureError> {
    if value < lo - ROUNDOFF || value > hi + ROUNDOFF {
        return Err(MeasureError::OutOfRange { value });
    }
    Ok(value.clamp(lo, hi))
}

/// One tensor pass: outer integral over v with the model's v-direction
/// splits, inner integral over t with the per-v splits.
fn tensor_pass<F>(model: &dyn Copula, n_nodes: usize, inner: &F) -> f64
where
    F: Fn(&dyn Copula, f64, f64) -> f64,
{
    let rule = gauss_legendre(n_nodes);
    let outer_bounds = panel_boundaries(BASE_PANELS, &model.v_kinks());
    integrate_panels(&rule, &outer_bounds, |v| {
        let inner_bounds = panel_boundaries(BASE_PANELS, &model.t_kinks(v));
        integrate_panels(&rule, &inner_bounds, |t| inner(model, t, v))
    })
}

fn quad_pair<F>(
    model: &dyn Copula,
    n_nodes: usize,
    inner: F,
) -> (f64, f64)
where
    F: Fn(&dyn Copula, f64, f64) -> f64,
{
    let coarse = tensor_pass(model, n_nodes, &inner);
    let fine = tensor_pass(model, 2 * n_nodes, &inner);
    (fine, (fine - coarse).abs())
}

/// Spearman's rho by quadrature: 12 iint C - 3, with the error estimate
/// taken from comparing n against 2n nodes per axis.
pub fn rho_quadrature(
    model: &dyn Copula,
    n_nodes: usize,
    tol: f64,
) -> Result<(f64, f64), MeasureError> {
    assert!(n_nodes >= 16, "need at least 16 nodes per axis");
    let (integral, raw_err) = quad_pair(model, n_nodes, |m, u, v| m.cdf(u, v));
    let err = 12.0 * raw_err;
    if err > tol {
        return Err(MeasureError::QuadratureNotConverged { err, tol });
    }
    Ok((clamp_range(12.0 * integral - 3.0, -1.0, 1.0)?, err))
}

/// Chatterjee's xi by quadrature: 6 iint (d1)^2 - 2.
pub fn xi_quadrature(
    model: &dyn Copula,
    n_nodes: usize,
    tol: f64,
) -> Result<(f64, f64), MeasureError> {
    assert!(n_nodes >= 16, "need at least 16 nodes per axis");
    let (integral, raw_err) = quad_pair(model, n_nodes, |m, t, v| {
        let h = m.d1(t, v);
        h * h
    });
    let err = 6.0 * raw_err;
    if err > tol {
        return Err(MeasureError::QuadratureNotConverged { err, tol });
    }
    Ok((clamp_range(6.0 * integral - 2.0, 0.0, 1.0)?, err))
}

/// Both measures by quadrature, bundled for serialization.
pub fn quadrature_measures(
    model: &dyn Copula,
    n_nodes: usize,
    tol: f64,
) -> Result<MeasureResult, MeasureError> {
    let (xi, xi_err) = xi_quadrature(model, n_nodes, tol)?;
    let (rho, rho_err) = rho_quadrature(model, n_nodes, tol)?;
    Ok(MeasureResult {
        xi,
        rho,
        method: Method::Quadrature,
        err: xi_err.max(rho_err),
    })
}

/// A finite bivariate sample.
#[derive(Debug, Clone)]
pub struct Sample {
    pub pairs: Vec<(f64, f64)>,
}

impl Sample {
    pub fn n(&self) -> usize {
        self.pairs.len()
    }
}

/// Draws n pairs by the conditional distribution method: U uniform, then
/// V solving d1(U, v) = W for an independent uniform W. Deterministic
/// given (seed, stream 0).
pub fn sample(model: &dyn Copula, n: usize, seed: u64) -> Result<Sample, MeasureError> {
    let mut rng = RngStream::new(seed, 0);
    let mut pairs = Vec::with_capacity(n);
    for _ in 0..n {
        let u = rng.next_f64();
        let w = rng.next_f64();
        let v = model.conditional_quantile(u, w)?;
        pairs.push((u, v));
    }
    Ok(Sample { pairs })
}

/// Chatterjee's rank estimator: sort by x, take ranks of y, then
/// 1 - 3 sum |r_{i+1} - r_i| / (n^2 - 1). Ties in x are broken by a
/// fixed-seed jitter so the result is deterministic.
pub fn xi_n(sample: &Sample) -> Result<f64, MeasureError> {
    let n = sample.n();
    if n < 2 {
        return Err(MeasureError::TooFewPoints { need: 2, got: n });
    }
    let mut jitter = RngStream::new(0x7869_6a69_7474_6572, 1);
    let keyed: Vec<(f64, f64, f64)> = sample
        .pairs
        .iter()
        .map(|&(x, y)| (x, jitter.next_f64(), y))
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        (keyed[i].0, keyed[i].1)
            .partial_cmp(&(keyed[j].0, keyed[j].1))
            .unwrap()
    });
    let ys: Vec<f64> = sample.pairs.iter().map(|&(_, y)| y).collect();
    let r = ranks(&ys);
    let total: f64 = order
        .windows(2)
        .map(|w| (r[w[1]] - r[w[0]]).abs())
        .sum();
    Ok(1.0 - 3.0 * total / ((n * n - 1) as f64))
}

/// Spearman's rank estimator: Pearson correlation of the average-rank
/// vectors.
pub fn rho_n(sample: &Sample) -> Result<f64, MeasureError> {
    let n = sample.n();
    if n < 2 {
        return Err(MeasureError::TooFewPoints { need: 2, got: n });
    }
    let xs: Vec<f64> = sample.pairs.iter().map(|&(x, _)| x).collect();
    let ys: Vec<f64> = sample.pairs.iter().map(|&(_, y)| y).collect();
    let rx = ranks(&xs);
    let ry = ranks(&ys);
    let mean = (n + 1) as f64 / 2.0;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        let dx = rx[i] - mean;
        let dy = ry[i] - mean;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(MeasureError::ZeroVariance);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Estimator pair bundled for serialization.
pub fn estimate(sample: &Sample) -> Result<MeasureResult, MeasureError> {
    Ok(MeasureResult {
        xi: xi_n(sample)?,
        rho: rho_n(sample)?,
        method: Method::RankEstimator,
        err: 0.0,
    })
}

/// One row of the gap-maximization table.
#[derive(Debug, Clone, Serialize)]
pub struct Table1Row {
    pub family: String,
    pub param: f64,
    pub rho: f64,
    pub xi: f64,
    pub gap: f64,
}

/// Grid search plus golden-section refinement of the gap rho - xi over a
/// one-parameter family. `measure` maps a parameter to (xi, rho).
pub fn gap_search<F>(
    lo: f64,
    hi: f64,
    steps: usize,
    param_tol: f64,
    mut measure: F,
) -> Result<(f64, f64, f64), MeasureError>
where
    F: FnMut(f64) -> Result<(f64, f64), MeasureError>,
{
    assert!(steps >= 2 && hi > lo && param_tol > 0.0);
    let mut best_param = lo;
    let mut best_gap = f64::NEG_INFINITY;
    for i in 0..=steps {
        let p = lo + (hi - lo) * i as f64 / steps as f64;
        let (xi, rho) = measure(p)?;
        if rho - xi > best_gap {
            best_gap = rho - xi;
            best_param = p;
        }
    }
    // Golden-section refinement around the grid winner.
    let step = (hi - lo) / steps as f64;
    let mut a = (best_param - step).max(lo);
    let mut b = (best_param + step).min(hi);
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let gap_at = |p: f64, measure: &mut F| -> Result<f64, MeasureError> {
        let (xi, rho) = measure(p)?;
        Ok(rho - xi)
    };
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = gap_at(x1, &mut measure)?;
    let mut f2 = gap_at(x2, &mut measure)?;
    while b - a > param_tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = gap_at(x2, &mut measure)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = gap_at(x1, &mut measure)?;
        }
    }
    let p = 0.5 * (a + b);
    let (xi, rho) = measure(p)?;
    Ok((p, xi, rho))
}

/// Gap-maximizing parameter for one family: grid search over [lo, hi]
/// followed by golden-section refinement to parameter tolerance 1e-3.
/// The boundary family short-circuits to its closed forms.
pub fn table1_search(
    family: Family,
    lo: f64,
    hi: f64,
    steps: usize,
    n_nodes: usize,
) -> Result<Table1Row, MeasureError> {
    let param_name = match family {
        Family::Cb => "b",
        Family::Gaussian => "r",
        Family::Clayton | Family::Frank | Family::Gumbel | Family::Joe => "theta",
        _ => return Err(MeasureError::OutOfRange { value: f64::NAN }),
    };
    let mut measure = |p: f64| -> Result<(f64, f64), MeasureError> {
        if family == Family::Cb {
            return Ok((xi_closed_cb(p), rho_closed_cb(p)));
        }
        let spec =
            CopulaSpec::new(family, &[(param_name, p)]).map_err(|_| MeasureError::OutOfRange { value: p })?;
        let model = spec.build()?;
        let res = quadrature_measures(model.as_ref(), n_nodes, 1e-5)?;
        Ok((res.xi, res.rho))
    };
    let (param, xi, rho) = gap_search(lo, hi, steps, 1e-3, &mut measure)?;
    Ok(Table1Row {
        family: family.token().to_string(),
        param,
        rho,
        xi,
        gap: rho - xi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::{
        parse_spec, BoundaryCopula, Mixture, PlodShuffle, Product, Shuffled, UpperFrechet,
    };

    #[test]
    fn closed_forms_at_reference_points() {
        assert!((rho_closed_cb(1.0) - 0.7).abs() < 1e-15);
        assert!((rho_closed_cb(-1.0) + 0.7).abs() < 1e-15);
        assert!((rho_closed_cb(2.0) - 0.9).abs() < 1e-15);
        assert!((xi_closed_cb(1.0) - 0.3).abs() < 1e-15);
        assert!((xi_closed_cb(0.5) - 0.1).abs() < 1e-15);
        assert!((xi_closed_cb(2.0) - 0.575).abs() < 1e-15);
        // Sign symmetry.
        for &b in &[0.2, 0.7, 1.0, 3.1, 17.0] {
            assert_eq!(xi_closed_cb(-b), xi_closed_cb(b));
            assert_eq!(rho_closed_cb(-b), -rho_closed_cb(b));
        }
    }

    #[test]
    fn quadrature_on_independence() {
        let (rho, _) = rho_quadrature(&Product, 64, 1e-6).unwrap();
        let (xi, _) = xi_quadrature(&Product, 64, 1e-6).unwrap();
        assert!(rho.abs() < 1e-12);
        assert!(xi.abs() < 1e-10);
    }

    #[test]
    fn quadrature_on_frechet_bounds() {
        let (rho_m, _) = rho_quadrature(&UpperFrechet, 64, 1e-6).unwrap();
        let (xi_m, _) = xi_quadrature(&UpperFrechet, 64, 1e-6).unwrap();
        assert!((rho_m - 1.0).abs() < 1e-10, "rho(M)={rho_m}");
        assert!((xi_m - 1.0).abs() < 1e-10, "xi(M)={xi_m}");
        let w = parse_spec("w").unwrap().build().unwrap();
        let (rho_w, _) = rho_quadrature(w.as_ref(), 64, 1e-6).unwrap();
        assert!((rho_w + 1.0).abs() < 1e-10);
    }

    #[test]
    fn quadrature_matches_closed_form_on_cb() {
        for &b in &[0.25, 0.5, 1.0, 2.0, 5.0, -1.0, -2.0] {
            let c = BoundaryCopula::new(b);
            let (rho, _) = rho_quadrature(&c, 64, 1e-6).unwrap();
            let (xi, _) = xi_quadrature(&c, 64, 1e-6).unwrap();
            assert!(
                (rho - rho_closed_cb(b)).abs() < 1e-6,
                "rho b={b}: {rho} vs {}",
                rho_closed_cb(b)
            );
            assert!(
                (xi - xi_closed_cb(b)).abs() < 1e-6,
                "xi b={b}: {xi} vs {}",
                xi_closed_cb(b)
            );
        }
    }

    #[test]
    fn plod_example_measures() {
        let (xi, _) = xi_quadrature(&PlodShuffle, 64, 1e-6).unwrap();
        let (rho, _) = rho_quadrature(&PlodShuffle, 64, 1e-6).unwrap();
        assert!((xi - 1.0).abs() < 1e-8, "xi={xi}");
        assert!((rho - 13.0 / 16.0).abs() < 1e-8, "rho={rho}");
    }

    #[test]
    fn shuffled_m_rho() {
        // Folding M at p = 1/2: rho drops from 1 to 3/4.
        let c = Shuffled::new(UpperFrechet, 0.5);
        let (rho, _) = rho_quadrature(&c, 64, 1e-6).unwrap();
        assert!((rho - 0.75).abs() < 1e-8, "rho={rho}");
    }

    #[test]
    fn gaussian_table_point() {
        let c = parse_spec("gauss:r=0.707").unwrap().build().unwrap();
        let (rho, _) = rho_quadrature(c.as_ref(), 64, 1e-3).unwrap();
        let (xi, _) = xi_quadrature(c.as_ref(), 64, 1e-3).unwrap();
        assert!((rho - 0.690).abs() < 1e-3, "rho={rho}");
        assert!((xi - 0.310).abs() < 1e-3, "xi={xi}");
    }

    #[test]
    fn mixture_convexity() {
        // xi is convex, rho linear, in the copula argument.
        let pairs: [(&str, &str); 3] = [
            ("cb:b=1", "pi"),
            ("clayton:theta=1.5", "cb:b=-0.7"),
            ("frank:theta=3", "gauss:r=0.4"),
        ];
        for (s1, s2) in pairs {
            let c1 = parse_spec(s1).unwrap().build().unwrap();
            let c2 = parse_spec(s2).unwrap().build().unwrap();
            let (xi1, _) = xi_quadrature(c1.as_ref(), 32, 1e-3).unwrap();
            let (xi2, _) = xi_quadrature(c2.as_ref(), 32, 1e-3).unwrap();
            let (rho1, _) = rho_quadrature(c1.as_ref(), 32, 1e-3).unwrap();
            let (rho2, _) = rho_quadrature(c2.as_ref(), 32, 1e-3).unwrap();
            for &lam in &[0.25, 0.5, 0.75] {
                let mix = Mixture::new(
                    lam,
                    parse_spec(s1).unwrap().build().unwrap(),
                    parse_spec(s2).unwrap().build().unwrap(),
                );
                let (xi_mix, _) = xi_quadrature(&mix, 32, 1e-3).unwrap();
                let (rho_mix, _) = rho_quadrature(&mix, 32, 1e-3).unwrap();
                assert!(xi_mix <= lam * xi1 + (1.0 - lam) * xi2 + 1e-6);
                assert!((rho_mix - (lam * rho1 + (1.0 - lam) * rho2)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn xi_n_small_samples() {
        let inc = Sample {
            pairs: (0..5).map(|i| (i as f64, i as f64)).collect(),
        };
        assert!((xi_n(&inc).unwrap() - 0.5).abs() < 1e-15);
        let dec = Sample {
            pairs: (0..5).map(|i| (i as f64, -(i as f64))).collect(),
        };
        assert!((xi_n(&dec).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rho_n_monotone_data() {
        let inc = Sample {
            pairs: (0..10).map(|i| (i as f64, 2.0 * i as f64)).collect(),
        };
        assert!((rho_n(&inc).unwrap() - 1.0).abs() < 1e-15);
        let dec = Sample {
            pairs: (0..10).map(|i| (i as f64, -(i as f64))).collect(),
        };
        assert!((rho_n(&dec).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn estimator_errors() {
        let tiny = Sample {
            pairs: vec![(0.0, 1.0)],
        };
        assert!(matches!(
            xi_n(&tiny),
            Err(MeasureError::TooFewPoints { .. })
        ));
        let flat = Sample {
            pairs: vec![(1.0, 5.0), (2.0, 5.0), (3.0, 5.0)],
        };
        assert!(matches!(rho_n(&flat), Err(MeasureError::ZeroVariance)));
    }

    #[test]
    fn sampling_independence_and_comonotone() {
        let pi = sample(&Product, 10_000, 7).unwrap();
        assert!(rho_n(&pi).unwrap().abs() < 0.03);
        let m = sample(&UpperFrechet, 1_000, 7).unwrap();
        for &(x, y) in &m.pairs {
            assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn sampling_cb_hits_population_values() {
        let c = BoundaryCopula::new(1.0);
        let s = sample(&c, 20_000, 42).unwrap();
        assert!((xi_n(&s).unwrap() - 0.3).abs() < 0.03);
        assert!((rho_n(&s).unwrap() - 0.7).abs() < 0.02);
    }

    #[test]
    fn gap_search_on_closed_form_cb() {
        let (b, xi, rho) =
            gap_search(0.05, 20.0, 100, 1e-6, |b| {
                Ok((xi_closed_cb(b), rho_closed_cb(b)))
            })
            .unwrap();
        assert!((b - 1.0).abs() < 1e-3, "b={b}");
        assert!((rho - xi - 0.4).abs() < 1e-6, "gap={}", rho - xi);
    }

    #[test]
    fn measure_result_json_shape() {
        let r = closed_cb(1.0);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"xi\":0.3"));
        assert!(json.contains("\"rho\":0.7"));
        assert!(json.contains("\"method\":\"ClosedForm\""));
        assert!(json.contains("\"err\":0.0"));
    }
}
