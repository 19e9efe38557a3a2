//! Numerical verification of sharp Hardy inequalities on mean convex domains.
//!
//! The crate is organised bottom-up:
//!
//! * [`symfun`]: elementary symmetric functions, the Newton chain and the
//!   curvature-sum lower bound.
//! * [`domains`]: analytic and implicit domains with exact boundary geometry.
//! * [`grid`] and [`distfield`]: grid discretisation, eikonal distance,
//!   nearest-point map, singular set and the ridge function.
//! * [`deltacalc`]: `-Δδ` by the curvature formula and by finite differences,
//!   plus the distributional and growth checks built on it.
//! * [`hardyopt`]: Rayleigh quotients, eigenvalue estimates of the Hardy and
//!   Brezis–Marcus constants, remainder tables and inequality checks.
//! * [`export`]: PGM heatmaps and raw binary field dumps.

pub mod deltacalc;
pub mod distfield;
pub mod domains;
pub mod error;
pub mod export;
pub mod grid;
pub mod hardyopt;
pub mod numeric;
pub mod symfun;

pub use error::{Error, Result};
