//! The boundary family of copulas indexed by a slope parameter b != 0.
//!
//! For b > 0 the conditional distribution at level v is the clipped ramp
//! h_v(t) = clamp(b (s_v - t), 0, 1), where the intercept s_v is chosen
//! so that the row integrates to v. Members with b > 0 maximize Spearman's
//! rho among copulas with a fixed value of Chatterjee's xi; b < 0 gives
//! the reflected member C(u, v) = v - C_+(1 - u, v) which minimizes rho.

use super::Copula;
use crate::error::MeasureError;

#[derive(Debug, Clone)]
pub struct BoundaryCopula {
    b: f64,
}

impl BoundaryCopula {
    pub fn new(b: f64) -> Self {
        assert!(b != 0.0 && b.is_finite(), "slope b must be finite, nonzero");
        BoundaryCopula { b }
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Ramp intercept s_v for the positive-slope member with |b|.
    pub fn s_v(&self, v: f64) -> f64 {
        let b = self.b.abs();
        if (b >= 1.0 && v <= 1.0 / (2.0 * b)) || (b <= 1.0 && v <= b / 2.0) {
            // Ramp hits 0 inside [0,1]: triangular row of area v.
            (2.0 * v / b).sqrt()
        } else if b >= 1.0 && v <= 1.0 - 1.0 / (2.0 * b) {
            // Full ramp from 1 to 0 inside the interval.
            v + 1.0 / (2.0 * b)
        } else if b < 1.0 && v <= 1.0 - b / 2.0 {
            // Shallow ramp covering all of [0,1] without saturating.
            v / b + 0.5
        } else {
            // Ramp saturates at 1 near t = 0.
            1.0 + 1.0 / b - (2.0 * (1.0 - v) / b).sqrt()
        }
    }

    /// Plateau end a_v = s_v - 1/|b| (may be negative).
    pub fn a_v(&self, v: f64) -> f64 {
        self.s_v(v) - 1.0 / self.b.abs()
    }

    fn cdf_pos(&self, u: f64, v: f64) -> f64 {
        let b = self.b.abs();
        let s = self.s_v(v);
        let a = s - 1.0 / b;
        // Integrate clamp(b(s - t), 0, 1) over [0, u]: unit plateau on
        // [0, t1], linear ramp on [t1, t2], zero after.
        let t1 = a.clamp(0.0, 1.0);
        let t2 = s.clamp(0.0, 1.0);
        let plateau = u.min(t1);
        let m = u.clamp(t1, t2);
        plateau + b * (s * (m - t1) - 0.5 * (m * m - t1 * t1))
    }

    fn d1_pos(&self, t: f64, v: f64) -> f64 {
        (self.b.abs() * (self.s_v(v) - t)).clamp(0.0, 1.0)
    }
}

impl Copula for BoundaryCopula {
    fn cdf(&self, u: f64, v: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let v = v.clamp(0.0, 1.0);
        if self.b > 0.0 {
            self.cdf_pos(u, v)
        } else {
            v - self.cdf_pos(1.0 - u, v)
        }
    }

    fn d1(&self, t: f64, v: f64) -> f64 {
        let v = v.clamp(0.0, 1.0);
        if self.b > 0.0 {
            self.d1_pos(t, v)
        } else {
            self.d1_pos(1.0 - t, v)
        }
    }

    fn t_kinks(&self, v: f64) -> Vec<f64> {
        let a = self.a_v(v);
        let s = self.s_v(v);
        if self.b > 0.0 {
            vec![a, s]
        } else {
            vec![1.0 - s, 1.0 - a]
        }
    }

    fn v_kinks(&self) -> Vec<f64> {
        let b = self.b.abs();
        if b >= 1.0 {
            vec![1.0 / (2.0 * b), 1.0 - 1.0 / (2.0 * b)]
        } else {
            vec![b / 2.0, 1.0 - b / 2.0]
        }
    }

    fn conditional_quantile(&self, t: f64, w: f64) -> Result<f64, MeasureError> {
        // d1(t, .) is continuous and increasing where it is not flat, so
        // the generic bisection is reliable; keep it.
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.d1(t, mid) < w {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}
