//! Angles-only Gauss seed and a scalar-generic Lambert solver.

mod gauss;
mod lambert;

pub use gauss::{gauss_solve, GaussSolution, LEO_BAND};
pub use lambert::{lambert_solve, LambertSolution, TransferDirection};

use thiserror::Error;

use crate::astro::{los_to_radec, slant_range_rate, Epoch, RadarGeometry};
use crate::{Scalar, Vec3};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum IodError {
    #[error("singular Gauss geometry (D0 = {0:e})")]
    SingularGeometry(f64),
    #[error("no admissible Gauss root (real positive roots: {0:?})")]
    NoAdmissibleRoot(Vec<f64>),
    #[error("negative slant range at epoch {0}")]
    NegativeRange(usize),
    #[error("epochs must be strictly increasing")]
    EpochOrder,
    #[error("transfer angle too close to 0 or 180 degrees")]
    TransferAngleSingular,
    #[error("Lambert iteration did not converge")]
    LambertNoConvergence,
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

/// Predicted topocentric right ascension, declination (radians, from the
/// receiver) and bistatic range rate for an inertial state at `t`.
pub fn state_to_observables<S: Scalar>(
    r: &Vec3<S>,
    v: &Vec3<S>,
    geom: &RadarGeometry,
    t: Epoch,
) -> (S, S, S) {
    let rx = geom.receiver_state(t);
    let (ra, dec) = los_to_radec(&r.sub_f(&rx.r));
    let (_, dd) = slant_range_rate(r, v, geom, t);
    (ra, dec, dd)
}
