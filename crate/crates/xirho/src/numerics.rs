//! Shared numerical kernels: Gauss-Legendre rules, composite panel
//! quadrature, bracketed root finding, a deterministic splittable RNG,
//! and rank computation.

use crate::error::NumericsError;

/// Nodes and weights of an n-point Gauss-Legendre rule on (-1, 1).
#[derive(Debug, Clone)]
pub struct QuadRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadRule {
    /// Integrates `f` over `[a, b]` with the mapped rule.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .collect();
        half * pairwise_sum(&terms)
    }
}

/// Gauss-Legendre nodes and weights by Newton iteration on the Legendre
/// polynomial, exact for polynomials of degree <= 2n-1.
pub fn gauss_legendre(n: usize) -> QuadRule {
    assert!((2..=512).contains(&n), "node count must be in 2..=512");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess for the i-th positive root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and P_n'(x).
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    QuadRule { nodes, weights }
}

/// Builds sorted panel boundaries on [0, 1]: `base_panels` uniform panels
/// merged with any interior split points, deduplicated within 1e-14.
pub fn panel_boundaries(base_panels: usize, splits: &[f64]) -> Vec<f64> {
    let mut bounds: Vec<f64> = (0..=base_panels)
        .map(|i| i as f64 / base_panels as f64)
        .collect();
    for &s in splits {
        if s > 1e-14 && s < 1.0 - 1e-14 {
            bounds.push(s);
        }
    }
    bounds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    bounds.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    bounds
}

/// Composite quadrature of `f` over [0, 1] on the given panel boundaries.
/// Panel contributions are combined by pairwise summation.
pub fn integrate_panels<F: FnMut(f64) -> f64>(rule: &QuadRule, bounds: &[f64], mut f: F) -> f64 {
    let parts: Vec<f64> = bounds
        .windows(2)
        .map(|w| rule.integrate(w[0], w[1], &mut f))
        .collect();
    pairwise_sum(&parts)
}

/// Pairwise (cascade) summation: deterministic and low error.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

/// Bisection on a bracketed continuous function. Returns `x` with bracket
/// width <= tol or |f(x)| <= tol.
pub fn find_root<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64, NumericsError> {
    let mut a = lo;
    let mut b = hi;
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa * fb > 0.0 {
        return Err(NumericsError::NoBracket { lo, hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if fm.abs() <= tol || b - a <= tol {
            return Ok(mid);
        }
        if fa * fm <= 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    Ok(0.5 * (a + b))
}

/// Deterministic splittable stream: SplitMix64 seeded from (seed, stream_id).
/// Same (seed, stream_id) yields an identical sequence on every run and
/// thread schedule.
#[derive(Debug, Clone)]
pub struct RngStream {
    state: u64,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        // Mix the stream id through one round so streams are decorrelated.
        let mut s = seed;
        let a = splitmix64(&mut s);
        let mut t = stream_id.wrapping_mul(0xD605_BBB5_8C8A_BC96).wrapping_add(a);
        let b = splitmix64(&mut t);
        RngStream { state: b }
    }

    pub fn next_u64(&mut self) -> u64 {
        splitmix64(&mut self.state)
    }

    /// Uniform draw in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Derives an independent child stream; the parent advances by one draw.
    pub fn split(&mut self) -> RngStream {
        let s = self.next_u64();
        RngStream::new(s, 0x5u64)
    }
}

/// 1-based average ranks; ties receive the mean of their rank range.
pub fn ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
    let mut out = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}
