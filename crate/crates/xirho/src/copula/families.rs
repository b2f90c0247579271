//! Elementary and Archimedean copula families.

use super::Copula;
use crate::error::MeasureError;

/// Independence copula Pi(u, v) = uv.
#[derive(Debug, Clone, Copy)]
pub struct Product;

impl Copula for Product {
    fn cdf(&self, u: f64, v: f64) -> f64 {
        u * v
    }

    fn d1(&self, _t: f64, v: f64) -> f64 {
        v.clamp(0.0, 1.0)
    }

    fn conditional_quantile(&self, _t: f64, w: f64) -> Result<f64, MeasureError> {
        Ok(w)
    }
}

/// Upper Frechet bound M(u, v) = min(u, v): comonotonicity.
#[derive(Debug, Clone, Copy)]
pub struct UpperFrechet;

impl Copula for UpperFrechet {
    fn cdf(&self, u: f64, v: f64) -> f64 {
        u.min(v)
    }

    fn d1(&self, t: f64, v: f64) -> f64 {
        if t <= v {
            1.0
        } else {
            0.0
        }
    }

    fn t_kinks(&self, v: f64) -> Vec<f64> {
        vec![v]
    }

    fn conditional_quantile(&self, t: f64, _w: f64) -> Result<f64, MeasureError> {
        // V = U almost surely.
        Ok(t)
    }
}

/// Lower Frechet bound W(u, v) = max(u + v - 1, 0): countermonotonicity.
#[derive(Debug, Clone, Copy)]
pub struct LowerFrechet;

impl Copula for LowerFrechet {
    fn cdf(&self, u: f64, v: f64) -> f64 {
        (u + v - 1.0).max(0.0)
    }

    fn d1(&self, t: f64, v: f64) -> f64 {
        if t >= 1.0 - v {
            1.0
        } else {
            0.0
        }
    }

    fn t_kinks(&self, v: f64) -> Vec<f64> {
        vec![1.0 - v]
    }

    fn conditional_quantile(&self, t: f64, _w: f64) -> Result<f64, MeasureError> {
        // V = 1 - U almost surely.
        Ok(1.0 - t)
    }
}

/// Clayton copula, theta > 0.
#[derive(Debug, Clone, Copy)]
pub struct Clayton {
    theta: f64,
}

impl Clayton {
    pub fn new(theta: f64) -> Self {
        assert!(theta > 0.0);
        Clayton { theta }
    }
}

impl Copula for Clayton {
    fn cdf(&self, u: f64, v: f64) -> f64 {
        if u <= 0.0 || v <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return v.min(1.0);
        }
        if v >= 1.0 {
            return u;
        }
        // (u^-t + v^-t - 1)^(-1/t), factored through u for stability
        // near u = 0.
        let t = self.theta;
        u * (1.0 + (v.powf(-t) - 1.0) * u.powf(t)).powf(-1.0 / t)
    }

    fn d1(&self, u: f64, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        if v >= 1.0 {
            return 1.0;
        }
        let t = self.theta;
        let u = u.clamp(0.0, 1.0);
        (1.0 + (v.powf(-t) - 1.0) * u.powf(t))
            .powf(-(1.0 + 1.0 / t))
            .clamp(0.0, 1.0)
    }
}

/// Frank copula, theta != 0.
#[derive(Debug, Clone, Copy)]
pub struct Frank {
    theta: f64,
}

impl Frank {
    pub fn new(theta: f64) -> Self {
        assert!(theta != 0.0);
        Frank { theta }
    }
}

impl Copula for Frank {
    fn cdf(&self, u: f64, v: f64) -> f64 {
        if u <= 0.0 || v <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return v.min(1.0);
        }
        if v >= 1.0 {
            return u;
        }
        let t = self.theta;
        let num = (-t * u).exp_m1() * (-t * v).exp_m1();
        -(num / (-t).exp_m1()).ln_1p() / t
    }

    fn d1(&self, u: f64, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        if v >= 1.0 {
            return 1.0;
        }
        let t = self.theta;
        let u = u.clamp(0.0, 1.0);
        let eu = (-t * u).exp_m1();
        let ev = (-t * v).exp_m1();
        ((eu + 1.0) * ev / ((-t).exp_m1() + eu * ev)).clamp(0.0, 1.0)
    }
}

/// Gumbel-Hougaard copula, theta >= 1.
#[derive(Debug, Clone, Copy)]
pub struct Gumbel {
    theta: f64,
}

impl Gumbel {
    pub fn new(theta: f64) -> Self {
        assert!(theta >= 1.0);
        Gumbel { theta }
    }
}

impl Copula for Gumbel {
    fn cdf(&self, u: f64, v: f64) -> f64 {
        if u <= 0.0 || v <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return v.min(1.0);
        }
        if v >= 1.0 {
            return u;
        }
        let t = self.theta;
        let x = (-u.ln()).powf(t);
        let y = (-v.ln()).powf(t);
        (-(x + y).powf(1.0 / t)).exp()
    }

    fn d1(&self, u: f64, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        if v >= 1.0 {
            return 1.0;
        }
        if u <= 0.0 {
            return 1.0;
        }
        if u >= 1.0 {
            return 0.0;
        }
        let t = self.theta;
        let x = (-u.ln()).powf(t);
        let y = (-v.ln()).powf(t);
        let c = (-(x + y).powf(1.0 / t)).exp();
        // dC/du = C (x+y)^(1/t - 1) (-ln u)^(t-1) / u
        (c * (x + y).powf(1.0 / t - 1.0) * (-u.ln()).powf(t - 1.0) / u).clamp(0.0, 1.0)
    }
}

/// Joe copula, theta >= 1.
#[derive(Debug, Clone, Copy)]
pub struct Joe {
    theta: f64,
}

impl Joe {
    pub fn new(theta: f64) -> Self {
        assert!(theta >= 1.0);
        Joe { theta }
    }
}

impl Copula for Joe {
    fn cdf(&self, u: f64, v: f64) -> f64 {
        if u <= 0.0 || v <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return v.min(1.0);
        }
        if v >= 1.0 {
            return u;
        }
        let t = self.theta;
        let x = (1.0 - u).powf(t);
        let y = (1.0 - v).powf(t);
        1.0 - (x + y - x * y).powf(1.0 / t)
    }

    fn d1(&self, u: f64, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        if v >= 1.0 {
            return 1.0;
        }
        let t = self.theta;
        let u = u.clamp(0.0, 1.0);
        let x = (1.0 - u).powf(t);
        let y = (1.0 - v).powf(t);
        let a = x + y - x * y;
        (a.powf(1.0 / t - 1.0) * (1.0 - u).powf(t - 1.0) * (1.0 - y)).clamp(0.0, 1.0)
    }
}

// Segments of the straight shuffle of M used as the PLOD counterexample:
// V = f(U) with f(t) = t + SHIFT on each interval [LO, HI].
const PLOD_SEGMENTS: [(f64, f64, f64); 4] = [
    (0.0, 0.25, 0.0),
    (0.25, 0.5, 0.25),
    (0.5, 0.75, -0.25),
    (0.75, 1.0, 0.0),
];

/// Deterministic shuffle of M with xi = 1 but Spearman's rho = 13/16:
/// positively lower orthant dependent yet far from comonotone in rho.
#[derive(Debug, Clone, Copy)]
pub struct PlodShuffle;

impl PlodShuffle {
    /// The rearrangement V = f(U).
    pub fn f(t: f64) -> f64 {
        for &(lo, hi, shift) in &PLOD_SEGMENTS {
            if t >= lo && t <= hi {
                // Interval ends tie; the left-closed convention below in
                // cdf/d1 is measure-equivalent.
                return t + shift;
            }
        }
        t
    }
}

impl Copula for PlodShuffle {
    fn cdf(&self, u: f64, v: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let v = v.clamp(0.0, 1.0);
        // Mass on each segment lives on {(t, t + shift)}; accumulate the
        // length of {t <= u : f(t) <= v} segment by segment.
        let mut total = 0.0;
        for &(lo, hi, shift) in &PLOD_SEGMENTS {
            let upper = u.min(hi).min(v - shift);
            total += (upper - lo).max(0.0);
        }
        total
    }

    fn d1(&self, t: f64, v: f64) -> f64 {
        if Self::f(t.clamp(0.0, 1.0)) <= v {
            1.0
        } else {
            0.0
        }
    }

    fn t_kinks(&self, v: f64) -> Vec<f64> {
        vec![0.25, 0.5, 0.75, v, v - 0.25, v + 0.25]
    }

    fn v_kinks(&self) -> Vec<f64> {
        vec![0.25, 0.5, 0.75]
    }

    fn conditional_quantile(&self, t: f64, _w: f64) -> Result<f64, MeasureError> {
        Ok(Self::f(t))
    }
}

/// Convex combination lambda C1 + (1 - lambda) C2; used to exercise
/// convexity properties of the measures.
pub struct Mixture {
    pub lambda: f64,
    pub first: Box<dyn Copula>,
    pub second: Box<dyn Copula>,
}

impl Mixture {
    pub fn new(lambda: f64, first: Box<dyn Copula>, second: Box<dyn Copula>) -> Self {
        assert!((0.0..=1.0).contains(&lambda));
        Mixture {
            lambda,
            first,
            second,
        }
    }
}

impl Copula for Mixture {
    fn cdf(&self, u: f64, v: f64) -> f64 {
        self.lambda * self.first.cdf(u, v) + (1.0 - self.lambda) * self.second.cdf(u, v)
    }

    fn d1(&self, t: f64, v: f64) -> f64 {
        self.lambda * self.first.d1(t, v) + (1.0 - self.lambda) * self.second.d1(t, v)
    }

    fn t_kinks(&self, v: f64) -> Vec<f64> {
        let mut k = self.first.t_kinks(v);
        k.extend(self.second.t_kinks(v));
        k
    }

    fn v_kinks(&self) -> Vec<f64> {
        let mut k = self.first.v_kinks();
        k.extend(self.second.v_kinks());
        k
    }
}
