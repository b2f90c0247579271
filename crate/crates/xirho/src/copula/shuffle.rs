//! The one-parameter shuffling transform.
//!
//! T_p reverses the first coordinate on the top slice [1 - p, 1]: U is
//! replaced by 2 - p - U whenever U > 1 - p. The transform leaves the
//! conditional rows (and hence Chatterjee's xi) untouched up to a
//! rearrangement, while Spearman's rho decreases continuously in p from
//! rho(C) at p = 0 to rho of the fully reflected copula at p = 1.

use super::Copula;
use crate::error::MeasureError;

pub struct Shuffled<C: Copula> {
    base: C,
    p: f64,
}

impl<C: Copula> Shuffled<C> {
    pub fn new(base: C, p: f64) -> Self {
        assert!((0.0..=1.0).contains(&p), "fold fraction p must lie in [0,1]");
        Shuffled { base, p }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn base(&self) -> &C {
        &self.base
    }

    /// Preimage of t under the fold.
    fn source(&self, t: f64) -> f64 {
        if t <= 1.0 - self.p {
            t
        } else {
            2.0 - self.p - t
        }
    }
}

impl<C: Copula> Copula for Shuffled<C> {
    fn cdf(&self, u: f64, v: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let q = 1.0 - self.p;
        if u <= q {
            self.base.cdf(u, v)
        } else {
            // {shuffled U <= u} = [0, q] union [2 - p - u, 1].
            self.base.cdf(q, v) + v.clamp(0.0, 1.0) - self.base.cdf(2.0 - self.p - u, v)
        }
    }

    fn d1(&self, t: f64, v: f64) -> f64 {
        self.base.d1(self.source(t), v)
    }

    fn t_kinks(&self, v: f64) -> Vec<f64> {
        let q = 1.0 - self.p;
        let mut out = vec![q];
        for k in self.base.t_kinks(v) {
            out.push(k);
            out.push(2.0 - self.p - k);
        }
        out
    }

    fn v_kinks(&self) -> Vec<f64> {
        self.base.v_kinks()
    }

    fn conditional_quantile(&self, t: f64, w: f64) -> Result<f64, MeasureError> {
        self.base.conditional_quantile(self.source(t), w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::{BoundaryCopula, Product, UpperFrechet};

    #[test]
    fn degenerate_folds() {
        let base = BoundaryCopula::new(1.3);
        let none = Shuffled::new(BoundaryCopula::new(1.3), 0.0);
        let full = Shuffled::new(BoundaryCopula::new(1.3), 1.0);
        for i in 0..=10 {
            for j in 0..=10 {
                let (u, v) = (i as f64 / 10.0, j as f64 / 10.0);
                assert!((none.cdf(u, v) - base.cdf(u, v)).abs() < 1e-15);
                // Full fold is the reflection u -> 1 - u.
                let reflected = v - base.cdf(1.0 - u, v);
                assert!((full.cdf(u, v) - reflected).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn shuffle_preserves_copula_properties() {
        let c = Shuffled::new(BoundaryCopula::new(2.0), 0.4);
        for i in 0..=20 {
            let x = i as f64 / 20.0;
            assert!((c.cdf(x, 1.0) - x).abs() < 1e-13, "u margin at {x}");
            assert!((c.cdf(1.0, x) - x).abs() < 1e-13, "v margin at {x}");
            assert!(c.cdf(x, 0.0).abs() < 1e-15);
            assert!(c.cdf(0.0, x).abs() < 1e-15);
        }
        // 2-increasing on a grid.
        let n = 40;
        for i in 0..n {
            for j in 0..n {
                let (u0, u1) = (i as f64 / n as f64, (i + 1) as f64 / n as f64);
                let (v0, v1) = (j as f64 / n as f64, (j + 1) as f64 / n as f64);
                let mass = c.cdf(u1, v1) - c.cdf(u0, v1) - c.cdf(u1, v0) + c.cdf(u0, v0);
                assert!(mass >= -1e-13, "negative mass {mass} at cell ({i},{j})");
            }
        }
    }

    #[test]
    fn shuffled_m_half() {
        // Folding M at p = 1/2 pairs t with 3/2 - t on the top half.
        let c = Shuffled::new(UpperFrechet, 0.5);
        assert_eq!(c.conditional_quantile(0.25, 0.0).unwrap(), 0.25);
        assert_eq!(c.conditional_quantile(0.75, 0.0).unwrap(), 0.75);
        assert_eq!(c.conditional_quantile(0.9, 0.0).unwrap(), 0.6);
    }

    #[test]
    fn product_is_a_fixed_point() {
        let c = Shuffled::new(Product, 0.37);
        for i in 0..=10 {
            for j in 0..=10 {
                let (u, v) = (i as f64 / 10.0, j as f64 / 10.0);
                assert!((c.cdf(u, v) - u * v).abs() < 1e-15);
            }
        }
    }
}
