//! Numerical laboratory for circle-warped product metrics with harmonic
//! curvature.
//!
//! A metric `dt² + h^{4/n}(t) g₀` on S¹(T) × N, with (N, g₀) an Einstein
//! fiber of dimension n−1 and scalar curvature R > 0, has harmonic
//! curvature exactly when the warping function h solves a one-dimensional
//! Newtonian ODE with conserved energy ([`potential`]). This crate
//! computes everything that is quantitative about those solutions:
//!
//! * turning points, the minimal-period map T(c), its energy derivative,
//!   and grid certificates for its monotonicity ([`period`]);
//! * symplectically integrated orbits, inversion of the period map,
//!   censuses of the distinct metrics a given circle length supports, and
//!   bifurcation thresholds ([`orbit`], [`census`]);
//! * sampled warping profiles with their full derivative chain
//!   ([`profile`]);
//! * Ricci-derivative diagnostics: the Codazzi residual that detects
//!   harmonic curvature, parallelism tests, conformal lengths, and the
//!   associated family of nontrivial Codazzi tensors ([`ricci`]);
//! * the companion conformally-flat family (constant-scalar-curvature
//!   cylinders) with its own period map and census ([`yamabe`]).

pub mod census;
pub mod error;
pub mod orbit;
pub mod period;
pub mod potential;
pub mod profile;
pub mod quad;
pub mod ricci;
pub mod rootfind;
pub mod yamabe;

pub use error::{Error, Result};
