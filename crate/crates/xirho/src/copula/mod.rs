//! Copula abstraction and the implemented parametric families.
//!
//! A copula is exposed through its distribution function `cdf`, the
//! conditional distribution `d1(t, v) = P(V <= v | U = t)` (the partial
//! derivative of the cdf in its first argument), and conditional-quantile
//! inversion for sampling. Models are immutable after construction and
//! safe to share across threads.

mod boundary;
mod families;
mod normal;
mod shuffle;

pub use boundary::BoundaryCopula;
pub use families::{
    Clayton, Frank, Gumbel, Joe, LowerFrechet, Mixture, PlodShuffle, Product, UpperFrechet,
};
pub use normal::{bvn_cdf, norm_cdf, norm_quantile, GaussianCopula};
pub use shuffle::Shuffled;

use crate::error::{MeasureError, ParseError};
use std::collections::BTreeMap;
use std::fmt;

/// Step used by the finite-difference fallback for `d1`.
const FD_STEP: f64 = 1e-5;

/// Evaluable bivariate copula.
pub trait Copula: Send + Sync {
    /// Distribution function C(u, v) on the unit square.
    fn cdf(&self, u: f64, v: f64) -> f64;

    /// Conditional distribution h_v(t) = dC/du at (t, v), in [0, 1].
    ///
    /// Default: central finite difference of the cdf, one-sided within
    /// `FD_STEP` of the boundary, clamped to [0, 1].
    fn d1(&self, t: f64, v: f64) -> f64 {
        let h = FD_STEP;
        let slope = if t < h {
            (self.cdf(t + h, v) - self.cdf(t, v)) / h
        } else if t > 1.0 - h {
            (self.cdf(t, v) - self.cdf(t - h, v)) / h
        } else {
            (self.cdf(t + h, v) - self.cdf(t - h, v)) / (2.0 * h)
        };
        slope.clamp(0.0, 1.0)
    }

    /// Interior break points of `u -> cdf(u, v)` (equivalently of
    /// `t -> d1(t, v)`) used for kink-aware quadrature panels.
    fn t_kinks(&self, _v: f64) -> Vec<f64> {
        Vec::new()
    }

    /// Interior break points in the `v` direction.
    fn v_kinks(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Solves `d1(t, v) = w` for `v`: the conditional quantile used by the
    /// conditional-distribution sampling method.
    ///
    /// Default: bisection on `v`, valid because `d1(t, .)` is nondecreasing
    /// from 0 to 1 for any copula.
    fn conditional_quantile(&self, t: f64, w: f64) -> Result<f64, MeasureError> {
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        if self.d1(t, lo) > w + 1e-9 || self.d1(t, hi) < w - 1e-9 {
            return Err(MeasureError::InversionFailed { t, w });
        }
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

/// Copula family tags of the specification grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Family {
    Pi,
    M,
    W,
    Cb,
    Shuffle,
    PlodExample,
    Clayton,
    Frank,
    Gaussian,
    Gumbel,
    Joe,
}

impl Family {
    pub fn token(self) -> &'static str {
        match self {
            Family::Pi => "pi",
            Family::M => "m",
            Family::W => "w",
            Family::Cb => "cb",
            Family::Shuffle => "shuffle",
            Family::PlodExample => "plod",
            Family::Clayton => "clayton",
            Family::Frank => "frank",
            Family::Gaussian => "gauss",
            Family::Gumbel => "gumbel",
            Family::Joe => "joe",
        }
    }
}

/// Parsed, validated copula description: family tag plus named parameters.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CopulaSpec {
    pub family: Family,
    pub params: BTreeMap<String, f64>,
}

impl CopulaSpec {
    pub fn new(family: Family, params: &[(&str, f64)]) -> Result<Self, ParseError> {
        let spec = CopulaSpec {
            family,
            params: params
                .iter()
                .map(|(k, x)| (k.to_string(), *x))
                .collect(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn param(&self, name: &str) -> Result<f64, ParseError> {
        self.params
            .get(name)
            .copied()
            .ok_or_else(|| ParseError::MissingParam {
                family: self.family.token().to_string(),
                param: name.to_string(),
            })
    }

    fn require(&self, name: &str, ok: impl Fn(f64) -> bool, constraint: &str) -> Result<(), ParseError> {
        let value = self.param(name)?;
        if !value.is_finite() || !ok(value) {
            return Err(ParseError::ParamOutOfRange {
                family: self.family.token().to_string(),
                param: name.to_string(),
                value,
                constraint: constraint.to_string(),
            });
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), ParseError> {
        match self.family {
            Family::Pi | Family::M | Family::W | Family::PlodExample => Ok(()),
            Family::Cb => self.require("b", |b| b != 0.0, "b != 0"),
            Family::Shuffle => {
                self.require("b", |b| b != 0.0, "b != 0")?;
                self.require("p", |p| (0.0..=1.0).contains(&p), "p in [0,1]")
            }
            Family::Clayton => self.require("theta", |t| t > 0.0, "theta > 0"),
            Family::Frank => self.require("theta", |t| t != 0.0, "theta != 0"),
            Family::Gaussian => self.require("r", |r| r.abs() < 1.0, "r in (-1,1)"),
            Family::Gumbel => self.require("theta", |t| t >= 1.0, "theta >= 1"),
            Family::Joe => self.require("theta", |t| t >= 1.0, "theta >= 1"),
        }
    }

    /// Instantiates the evaluable model, probing a few interior points to
    /// reject parameters that overflow in double precision.
    pub fn build(&self) -> Result<Box<dyn Copula>, MeasureError> {
        let model: Box<dyn Copula> = match self.family {
            Family::Pi => Box::new(Product),
            Family::M => Box::new(UpperFrechet),
            Family::W => Box::new(LowerFrechet),
            Family::Cb => Box::new(BoundaryCopula::new(self.params["b"])),
            Family::Shuffle => Box::new(Shuffled::new(
                BoundaryCopula::new(self.params["b"]),
                self.params["p"],
            )),
            Family::PlodExample => Box::new(PlodShuffle),
            Family::Clayton => Box::new(Clayton::new(self.params["theta"])),
            Family::Frank => Box::new(Frank::new(self.params["theta"])),
            Family::Gaussian => Box::new(GaussianCopula::new(self.params["r"])),
            Family::Gumbel => Box::new(Gumbel::new(self.params["theta"])),
            Family::Joe => Box::new(Joe::new(self.params["theta"])),
        };
        for &(u, v) in &[(0.2, 0.7), (0.5, 0.5), (0.9, 0.1), (0.01, 0.99)] {
            if !model.cdf(u, v).is_finite() || !model.d1(u, v).is_finite() {
                return Err(MeasureError::NumericOverflow);
            }
        }
        Ok(model)
    }
}

impl fmt::Display for CopulaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.family.token())?;
        let mut sep = ':';
        for (k, x) in &self.params {
            write!(f, "{sep}{k}={x}")?;
            sep = ',';
        }
        Ok(())
    }
}

/// Parses the grammar `family[:key=value{,key=value}]`, e.g. `cb:b=1`,
/// `gauss:r=0.707`, `shuffle:b=1,p=0.5`, `pi`.
pub fn parse_spec(text: &str) -> Result<CopulaSpec, ParseError> {
    let text = text.trim();
    let (head, tail) = match text.split_once(':') {
        Some((h, t)) => (h, Some(t)),
        None => (text, None),
    };
    let family = match head.to_ascii_lowercase().as_str() {
        "pi" => Family::Pi,
        "m" => Family::M,
        "w" => Family::W,
        "cb" => Family::Cb,
        "shuffle" => Family::Shuffle,
        "plod" => Family::PlodExample,
        "clayton" => Family::Clayton,
        "frank" => Family::Frank,
        "gauss" | "gaussian" => Family::Gaussian,
        "gumbel" => Family::Gumbel,
        "joe" => Family::Joe,
        other => return Err(ParseError::UnknownFamily(other.to_string())),
    };
    let mut params = BTreeMap::new();
    if let Some(tail) = tail {
        for token in tail.split(',') {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| ParseError::MalformedParam(token.to_string()))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| ParseError::MalformedParam(token.to_string()))?;
            params.insert(key.trim().to_string(), value);
        }
    }
    let spec = CopulaSpec { family, params };
    spec.validate()?;
    Ok(spec)
}
