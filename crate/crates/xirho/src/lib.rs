//! Chatterjee's xi and Spearman's rho for bivariate copulas.
//!
//! The crate computes both rank correlations for a catalogue of copula
//! families, realizes the exact attainable (xi, rho)-region together with
//! its boundary copulas, and ships a discrete optimization oracle that
//! re-derives the boundary from first principles.

pub mod copula;
pub mod error;
pub mod measures;
pub mod numerics;
pub mod oracle;
pub mod rearrange;
pub mod region;
