//! Time, Earth model, radar sites, line-of-sight frames, two-body motion and
//! orbital elements.
//!
//! Angles are degrees at public interfaces that take or return plain numbers
//! describing measurements or elements, radians inside the generic kernels.
//! Functions over [`Scalar`](crate::Scalar) accept DA values so that Taylor
//! expansions flow through the same code as real computations.

mod earth;
mod elements;
mod kepler;
mod los;
mod time;

pub use earth::{EarthModel, RadarGeometry, Site};
pub use elements::{
    cart_to_classical, cart_to_reduced, classical_to_cart, reduced_elements, ClassicalElements,
    ReducedElements,
};
pub use kepler::{kepler_propagate, stumpff, stumpff_taylor};
pub use los::{
    azel_to_los, azel_to_radec, los_to_azel, los_to_radec, los_to_taos_angles, radec_to_azel,
    radec_to_los, taos_angles_to_los, taos_frame, TaosFrame,
};
pub use time::Epoch;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Earth gravitational parameter, km³/s².
pub const MU_EARTH: f64 = 398_600.441_8;
/// WGS84 equatorial radius, km.
pub const R_EARTH: f64 = 6378.137;
/// WGS84 flattening.
pub const WGS84_FLATTENING: f64 = 1.0 / 298.257_223_563;
/// Mean sidereal rotation rate, rad/s.
pub const OMEGA_EARTH: f64 = 7.292_115_0e-5;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum AstroError {
    #[error("line-of-sight vectors are parallel")]
    ParallelLos,
    #[error("universal Kepler iteration did not converge")]
    KeplerNoConvergence,
    #[error("invalid orbital state: {0}")]
    InvalidState(&'static str),
    #[error("object coincides with a radar site")]
    SiteCoincidence,
    #[error("invalid epoch: {0}")]
    InvalidEpoch(String),
    #[error("invalid site: {0}")]
    InvalidSite(&'static str),
}

/// Inertial Cartesian state, km and km/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub r: [f64; 3],
    pub v: [f64; 3],
}

impl StateVector {
    pub fn new(r: [f64; 3], v: [f64; 3]) -> StateVector {
        StateVector { r, v }
    }

    pub fn specific_energy(&self, mu: f64) -> f64 {
        use crate::scalar::v3;
        0.5 * v3::dot(&self.v, &self.v) - mu / v3::norm(&self.r)
    }

    pub fn angular_momentum(&self) -> [f64; 3] {
        crate::scalar::v3::cross(&self.r, &self.v)
    }

    pub fn is_finite(&self) -> bool {
        self.r.iter().chain(&self.v).all(|c| c.is_finite())
    }
}

/// Wraps an angle in degrees to `[0, 360)`.
pub fn wrap_deg(x: f64) -> f64 {
    let w = x.rem_euclid(360.0);
    if w >= 360.0 {
        0.0
    } else {
        w
    }
}

/// Shortest signed difference `a − b` between two angles in degrees.
pub fn angle_diff_deg(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    if d > 180.0 {
        d - 360.0
    } else {
        d
    }
}

/// Bistatic slant range `d = |r − r_rx| + |r − r_tx|` and its rate.
pub fn slant_range_rate<S: crate::Scalar>(
    r: &crate::Vec3<S>,
    v: &crate::Vec3<S>,
    geom: &RadarGeometry,
    t: Epoch,
) -> (S, S) {
    let rx = geom.site_state(&geom.receiver, t);
    let tx = geom.site_state(&geom.transmitter, t);
    let leg = |site: &StateVector| {
        let rel = r.sub_f(&site.r);
        let rel_v = v.sub_f(&site.v);
        let d = rel.norm();
        let dd = rel.dot(&rel_v) / d.clone();
        (d, dd)
    };
    let (d1, dd1) = leg(&rx);
    let (d2, dd2) = leg(&tx);
    (d1 + d2, dd1 + dd2)
}

/// Real-valued wrapper of [`slant_range_rate`] that rejects site coincidence.
pub fn slant_range_rate_real(
    x: &StateVector,
    geom: &RadarGeometry,
    t: Epoch,
) -> Result<(f64, f64), AstroError> {
    use crate::scalar::v3;
    for site in [&geom.receiver, &geom.transmitter] {
        let s = geom.site_state(site, t);
        if v3::norm(&v3::sub(&x.r, &s.r)) < 1e-9 {
            return Err(AstroError::SiteCoincidence);
        }
    }
    let r = crate::Vec3(x.r);
    let v = crate::Vec3(x.v);
    Ok(slant_range_rate(&r, &v, geom, t))
}
