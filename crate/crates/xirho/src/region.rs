//! The exact attainable (xi, rho)-region: the boundary parameter b_x,
//! the envelope M_x, membership classification, and construction of a
//! copula attaining any admissible pair by shuffling the boundary
//! family.

use crate::copula::{BoundaryCopula, Copula, Shuffled};
use crate::error::{MeasureError, RegionError};
use crate::measures;
use crate::numerics::{gauss_legendre, integrate_panels, panel_boundaries};
use serde::Serialize;

/// Grid/branch point of the boundary family: b = 1, xi = 3/10.
const BRANCH_X: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    Interior,
    Boundary,
    Outside,
}

/// A (xi, rho) pair with its position relative to the region.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RegionPoint {
    pub xi: f64,
    pub rho: f64,
    pub classification: Classification,
}

/// Parameters (b, p) of a shuffled boundary copula hitting a target
/// point, with the achieved values for verification.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AttainmentRecipe {
    pub b: f64,
    pub p: f64,
    pub xi: f64,
    pub rho: f64,
}

/// Slope parameter b of the boundary copula with xi(C_b) = x.
pub fn b_of_x(x: f64) -> Result<f64, RegionError> {
    if !(0.0..1.0).contains(&x) || x == 0.0 || !x.is_finite() {
        return Err(RegionError::DomainError(x));
    }
    if x <= BRANCH_X {
        let s = (6.0 * x).sqrt();
        Ok(s / (2.0 * ((-3.0 * s / 5.0).acos() / 3.0).cos()))
    } else {
        Ok((5.0 + (5.0 * (6.0 * x - 1.0)).sqrt()) / (10.0 * (1.0 - x)))
    }
}

/// Upper envelope M_x of |rho| at fixed xi = x.
pub fn m_of_x(x: f64) -> Result<f64, RegionError> {
    if !(0.0..=1.0).contains(&x) || !x.is_finite() {
        return Err(RegionError::DomainError(x));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let b = b_of_x(x)?;
    if x <= BRANCH_X {
        Ok(b - 3.0 * b * b / 10.0)
    } else {
        Ok(1.0 - 1.0 / (2.0 * b * b) + 1.0 / (5.0 * b * b * b))
    }
}

/// Classifies an arbitrary pair against the region with tolerance tol.
pub fn classify(xi: f64, rho: f64, tol: f64) -> RegionPoint {
    let classification = if !(0.0..=1.0).contains(&xi) || !xi.is_finite() || !rho.is_finite() {
        Classification::Outside
    } else {
        // m_of_x is total on [0,1].
        let m = m_of_x(xi).expect("xi validated above");
        if (rho.abs() - m).abs() <= tol {
            Classification::Boundary
        } else if rho.abs() > m {
            Classification::Outside
        } else {
            Classification::Interior
        }
    };
    RegionPoint {
        xi,
        rho,
        classification,
    }
}

/// Single-pass rho quadrature used inside the bisection on p (error
/// control comes from the outer tolerance, not a per-call estimate).
fn rho_pass(model: &dyn Copula, n_nodes: usize) -> f64 {
    let rule = gauss_legendre(n_nodes);
    let outer = panel_boundaries(4, &model.v_kinks());
    let integral = integrate_panels(&rule, &outer, |v| {
        let inner = panel_boundaries(4, &model.t_kinks(v));
        integrate_panels(&rule, &inner, |u| model.cdf(u, v))
    });
    12.0 * integral - 3.0
}

/// Finds the shuffled boundary copula C_{b, p} attaining (xi, rho).
///
/// b is fixed by the xi target (shuffling preserves xi); p comes from
/// bisection on the continuous, nonincreasing map p -> rho(C_{b,p}).
/// Targets within tol of the envelope return p = 0 or p = 1 exactly.
pub fn attain(xi: f64, rho: f64, tol: f64) -> Result<AttainmentRecipe, RegionError> {
    let point = classify(xi, rho, tol);
    if point.classification == Classification::Outside {
        return Err(RegionError::NotInRegion { xi, rho });
    }
    let b = b_of_x(xi)?;
    let m = m_of_x(xi)?;
    let p = if rho >= m - tol {
        0.0
    } else if rho <= -m + tol {
        1.0
    } else {
        let rho_at = |p: f64| rho_pass(&Shuffled::new(BoundaryCopula::new(b), p), 64);
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        if rho_at(lo) < rho - tol || rho_at(hi) > rho + tol {
            return Err(RegionError::BisectionFailed);
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let r = rho_at(mid);
            if (r - rho).abs() <= tol * 0.25 {
                lo = mid;
                hi = mid;
                break;
            }
            if r > rho {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let model = Shuffled::new(BoundaryCopula::new(b), p);
    let achieved = measures::quadrature_measures(&model, 64, 1e-4)
        .map_err(|_: MeasureError| RegionError::BisectionFailed)?;
    Ok(AttainmentRecipe {
        b,
        p,
        xi: achieved.xi,
        rho: achieved.rho,
    })
}

/// One row of the boundary table; b is absent at the degenerate
/// endpoints x = 0 and x = 1.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryRow {
    pub x: f64,
    pub m: f64,
    pub b: Option<f64>,
}

/// k equally spaced boundary samples on [0, 1].
pub fn boundary_table(k: usize) -> Vec<BoundaryRow> {
    assert!(k >= 2);
    (0..k)
        .map(|i| {
            let x = i as f64 / (k - 1) as f64;
            BoundaryRow {
                x,
                m: m_of_x(x).expect("x in [0,1]"),
                b: b_of_x(x).ok(),
            }
        })
        .collect()
}

/// Formats with 12 significant digits for the CSV export.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (11 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// CSV form of [boundary_table]: header `x,M_x,b_x`, blank b at the
/// endpoints.
pub fn boundary_table_csv(k: usize) -> String {
    let mut out = String::from("x,M_x,b_x\n");
    for row in boundary_table(k) {
        let b = row.b.map(sig12).unwrap_or_default();
        out.push_str(&format!("{},{},{}\n", sig12(row.x), sig12(row.m), b));
    }
    out
}
