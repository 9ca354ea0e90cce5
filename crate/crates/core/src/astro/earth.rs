use serde::{Deserialize, Serialize};

use super::{AstroError, Epoch, StateVector, MU_EARTH, OMEGA_EARTH, R_EARTH, WGS84_FLATTENING};

/// Geodetic site position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Site {
    pub lat_deg: f64,
    pub lon_deg: f64,
    pub alt_km: f64,
}

impl Site {
    pub fn new(lat_deg: f64, lon_deg: f64, alt_km: f64) -> Result<Site, AstroError> {
        let s = Site {
            lat_deg,
            lon_deg,
            alt_km,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), AstroError> {
        if !(self.lat_deg.abs() <= 90.0) {
            return Err(AstroError::InvalidSite("latitude outside [-90, 90]"));
        }
        if !self.lon_deg.is_finite() || !self.alt_km.is_finite() {
            return Err(AstroError::InvalidSite("non-finite coordinate"));
        }
        Ok(())
    }
}

/// Earth shape, gravity and a uniform rotation about the polar axis.
///
/// The sidereal angle is `theta_ref_rad + rotation_rate * t` with `t` in
/// seconds past the epoch reference. Setting `flattening` to zero gives a
/// spherical Earth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EarthModel {
    pub mu: f64,
    pub equatorial_radius: f64,
    pub flattening: f64,
    pub rotation_rate: f64,
    pub theta_ref_rad: f64,
}

impl Default for EarthModel {
    fn default() -> EarthModel {
        EarthModel {
            mu: MU_EARTH,
            equatorial_radius: R_EARTH,
            flattening: WGS84_FLATTENING,
            rotation_rate: OMEGA_EARTH,
            theta_ref_rad: 0.0,
        }
    }
}

impl EarthModel {
    pub fn spherical() -> EarthModel {
        EarthModel {
            flattening: 0.0,
            ..EarthModel::default()
        }
    }

    pub fn sidereal_angle(&self, t: Epoch) -> f64 {
        self.theta_ref_rad + self.rotation_rate * t.seconds
    }

    /// Earth-fixed position of a site.
    pub fn site_ecef(&self, s: &Site) -> [f64; 3] {
        let (slat, clat) = s.lat_deg.to_radians().sin_cos();
        let (slon, clon) = s.lon_deg.to_radians().sin_cos();
        let e2 = self.flattening * (2.0 - self.flattening);
        let n = self.equatorial_radius / (1.0 - e2 * slat * slat).sqrt();
        [
            (n + s.alt_km) * clat * clon,
            (n + s.alt_km) * clat * slon,
            (n * (1.0 - e2) + s.alt_km) * slat,
        ]
    }

    /// Inertial position and velocity of a site.
    pub fn site_state(&self, s: &Site, t: Epoch) -> StateVector {
        let p = self.site_ecef(s);
        let (st, ct) = self.sidereal_angle(t).sin_cos();
        let r = [ct * p[0] - st * p[1], st * p[0] + ct * p[1], p[2]];
        let w = self.rotation_rate;
        StateVector::new(r, [-w * r[1], w * r[0], 0.0])
    }

    /// Inertial unit vectors (east, north, up) of the local geodetic frame.
    pub fn enu_basis(&self, s: &Site, t: Epoch) -> [[f64; 3]; 3] {
        let (slat, clat) = s.lat_deg.to_radians().sin_cos();
        let lam = s.lon_deg.to_radians() + self.sidereal_angle(t);
        let (slam, clam) = lam.sin_cos();
        [
            [-slam, clam, 0.0],
            [-slat * clam, -slat * slam, clat],
            [clat * clam, clat * slam, slat],
        ]
    }
}

/// Receiver and transmitter of a bistatic radar plus the Earth model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadarGeometry {
    pub receiver: Site,
    pub transmitter: Site,
    #[serde(default)]
    pub earth: EarthModel,
}

impl RadarGeometry {
    pub fn new(receiver: Site, transmitter: Site, earth: EarthModel) -> Result<Self, AstroError> {
        receiver.validate()?;
        transmitter.validate()?;
        if !(earth.rotation_rate > 0.0) || !(earth.mu > 0.0) || !(earth.equatorial_radius > 0.0) {
            return Err(AstroError::InvalidSite("Earth model parameters must be positive"));
        }
        Ok(RadarGeometry {
            receiver,
            transmitter,
            earth,
        })
    }

    pub fn monostatic(site: Site, earth: EarthModel) -> RadarGeometry {
        RadarGeometry {
            receiver: site,
            transmitter: site,
            earth,
        }
    }

    /// Bistatic pair in eastern France resembling the GRAVES layout.
    /// Coordinates are illustrative, not surveyed values.
    pub fn graves_like() -> RadarGeometry {
        RadarGeometry {
            receiver: Site {
                lat_deg: 44.07,
                lon_deg: 5.55,
                alt_km: 0.9,
            },
            transmitter: Site {
                lat_deg: 47.348,
                lon_deg: 5.515,
                alt_km: 0.2,
            },
            earth: EarthModel::default(),
        }
    }

    pub fn validate(&self) -> Result<(), AstroError> {
        RadarGeometry::new(self.receiver, self.transmitter, self.earth).map(|_| ())
    }

    pub fn site_state(&self, s: &Site, t: Epoch) -> StateVector {
        self.earth.site_state(s, t)
    }

    pub fn receiver_state(&self, t: Epoch) -> StateVector {
        self.earth.site_state(&self.receiver, t)
    }

    pub fn transmitter_state(&self, t: Epoch) -> StateVector {
        self.earth.site_state(&self.transmitter, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::v3;

    #[test]
    fn equatorial_site_at_reference() {
        let e = EarthModel::default();
        let s = Site::new(0.0, 0.0, 0.0).unwrap();
        let x = e.site_state(&s, Epoch::new(0.0));
        assert!((x.r[0] - R_EARTH).abs() < 1e-12);
        assert!(x.r[1].abs() < 1e-12 && x.r[2].abs() < 1e-12);
        assert!((v3::norm(&x.v) - OMEGA_EARTH * R_EARTH).abs() < 1e-15);
    }

    #[test]
    fn pole_site_is_still() {
        let e = EarthModel::default();
        let x = e.site_state(&Site::new(90.0, 33.0, 0.0).unwrap(), Epoch::new(1234.0));
        assert!(v3::norm(&x.v) < 1e-12);
        assert!((x.r[2] - R_EARTH * (1.0 - WGS84_FLATTENING)).abs() < 1e-9);
    }

    #[test]
    fn rotation_preserves_norm() {
        let e = EarthModel::default();
        let s = Site::new(44.0, 5.5, 0.9).unwrap();
        let n0 = v3::norm(&e.site_state(&s, Epoch::new(0.0)).r);
        for k in 0..100 {
            let n = v3::norm(&e.site_state(&s, Epoch::new(k as f64 * 977.0)).r);
            assert!((n - n0).abs() < 1e-9);
        }
    }

    #[test]
    fn enu_is_orthonormal_and_up_is_normal() {
        let e = EarthModel::spherical();
        let s = Site::new(30.0, 40.0, 0.0).unwrap();
        let t = Epoch::new(321.0);
        let [east, north, up] = e.enu_basis(&s, t);
        assert!(v3::dot(&east, &north).abs() < 1e-15);
        assert!((v3::norm(&v3::cross(&east, &north)) - 1.0).abs() < 1e-15);
        assert!(v3::norm(&v3::sub(&v3::cross(&east, &north), &up)) < 1e-15);
        let r = v3::unit(&e.site_state(&s, t).r);
        assert!(v3::norm(&v3::sub(&r, &up)) < 1e-14);
    }

    #[test]
    fn invalid_sites() {
        assert!(Site::new(91.0, 0.0, 0.0).is_err());
        let g = RadarGeometry::graves_like();
        let bad = EarthModel {
            rotation_rate: 0.0,
            ..g.earth
        };
        assert!(RadarGeometry::new(g.receiver, g.transmitter, bad).is_err());
    }
}
