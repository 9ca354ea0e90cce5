//! Initial orbit determination from Doppler radar short arcs with
//! differential-algebra uncertainty quantification.
//!
//! The solver takes a radar passage (azimuth, elevation and bistatic range
//! rate per epoch), turns it into topocentric right ascension / declination
//! with confidence intervals, finds the slant ranges at the first and last
//! epochs with a Gauss seed refined by DA-Lambert map inversion, and finally
//! expands the solution in Taylor series of the six measurement deviations.
//! The result is an orbit set: a manifold of polynomial maps from the
//! measurement box to reduced orbital elements, with per-element bounds.
//!
//! Module map:
//!
//! - [`da`]: truncated power series algebra
//! - [`ads`]: automatic domain splitting
//! - [`astro`]: time, frames, sites, two-body propagation, elements
//! - [`iod`]: Gauss and Lambert solvers
//! - [`measproc`]: measurement processing (Monte Carlo and regression)
//! - [`pipeline`]: range determination and orbit-set expansion
//! - [`sim`]: synthetic passes and campaigns

pub mod ads;
mod clock;
pub mod astro;
pub mod da;
pub mod iod;
pub mod measproc;
pub mod pipeline;
pub mod scalar;
pub mod sim;

pub use scalar::{Scalar, Vec3};
