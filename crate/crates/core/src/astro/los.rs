//! Line-of-sight conversions.
//!
//! Generic functions work in radians. Azimuth is measured clockwise from
//! North, elevation up from the local horizontal; the horizontal frame is the
//! geodetic east-north-up triad of the site. Right ascension and declination
//! are the inertial direction angles of the line of sight from the site.

use serde::{Deserialize, Serialize};

use super::{wrap_deg, AstroError, EarthModel, Epoch, Site};
use crate::scalar::v3;
use crate::{Scalar, Vec3};

/// Unit line of sight from azimuth/elevation in a given ENU triad.
pub fn azel_to_los<S: Scalar>(az: &S, el: &S, enu: &[[f64; 3]; 3]) -> Vec3<S> {
    let ce = el.cos();
    let e = ce.clone() * az.sin();
    let n = ce * az.cos();
    let u = el.sin();
    Vec3(std::array::from_fn(|i| {
        e.clone() * enu[0][i] + n.clone() * enu[1][i] + u.clone() * enu[2][i]
    }))
}

/// Azimuth and elevation of a line of sight; the vector need not be unit.
pub fn los_to_azel<S: Scalar>(los: &Vec3<S>, enu: &[[f64; 3]; 3]) -> (S, S) {
    let e = los.dot_f(&enu[0]);
    let n = los.dot_f(&enu[1]);
    let u = los.dot_f(&enu[2]);
    let h = (e.clone() * e.clone() + n.clone() * n.clone()).sqrt();
    (e.atan2(&n), u.atan2(&h))
}

pub fn radec_to_los<S: Scalar>(ra: &S, dec: &S) -> Vec3<S> {
    let cd = dec.cos();
    Vec3::new(cd.clone() * ra.cos(), cd * ra.sin(), dec.sin())
}

/// Right ascension in `(−π, π]` and declination; the vector need not be unit.
pub fn los_to_radec<S: Scalar>(los: &Vec3<S>) -> (S, S) {
    let [x, y, z] = &los.0;
    let h = (x.clone() * x.clone() + y.clone() * y.clone()).sqrt();
    (y.atan2(x), z.atan2(&h))
}

/// Degrees in, degrees out; right ascension in `[0, 360)`.
pub fn azel_to_radec(az_deg: f64, el_deg: f64, site: &Site, earth: &EarthModel, t: Epoch) -> (f64, f64) {
    let enu = earth.enu_basis(site, t);
    let los = azel_to_los(&az_deg.to_radians(), &el_deg.to_radians(), &enu);
    let (ra, dec) = los_to_radec(&los);
    (wrap_deg(ra.to_degrees()), dec.to_degrees())
}

/// Degrees in, degrees out; azimuth in `[0, 360)`.
pub fn radec_to_azel(ra_deg: f64, dec_deg: f64, site: &Site, earth: &EarthModel, t: Epoch) -> (f64, f64) {
    let enu = earth.enu_basis(site, t);
    let los = radec_to_los(&ra_deg.to_radians(), &dec_deg.to_radians());
    let (az, el) = los_to_azel(&los, &enu);
    (wrap_deg(az.to_degrees()), el.to_degrees())
}

/// Orthonormal triad spanned by the first and last lines of sight of a pass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaosFrame {
    pub x: [f64; 3],
    pub y: [f64; 3],
    pub z: [f64; 3],
}

/// `x̂ = los_first`, `ẑ = unit(los_first × los_last)`, `ŷ = ẑ × x̂`.
pub fn taos_frame(los_first: &[f64; 3], los_last: &[f64; 3]) -> Result<TaosFrame, AstroError> {
    let x = v3::unit(los_first);
    let c = v3::cross(&x, &v3::unit(los_last));
    // |c| = sin of the separation angle
    if !(v3::norm(&c) > 1e-6) {
        return Err(AstroError::ParallelLos);
    }
    let z = v3::unit(&c);
    let y = v3::cross(&z, &x);
    Ok(TaosFrame { x, y, z })
}

/// In-plane angle λ from x̂ toward ŷ and out-of-plane angle γ toward ẑ.
pub fn los_to_taos_angles<S: Scalar>(los: &Vec3<S>, f: &TaosFrame) -> (S, S) {
    let a = los.dot_f(&f.x);
    let b = los.dot_f(&f.y);
    let c = los.dot_f(&f.z);
    let h = (a.clone() * a.clone() + b.clone() * b.clone()).sqrt();
    (b.atan2(&a), c.atan2(&h))
}

pub fn taos_angles_to_los<S: Scalar>(lambda: &S, gamma: &S, f: &TaosFrame) -> Vec3<S> {
    let cg = gamma.cos();
    let a = cg.clone() * lambda.cos();
    let b = cg * lambda.sin();
    let c = gamma.sin();
    Vec3(std::array::from_fn(|i| {
        a.clone() * f.x[i] + b.clone() * f.y[i] + c.clone() * f.z[i]
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::da::TaylorPoly;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zenith_declination_is_latitude_on_sphere() {
        let earth = EarthModel::spherical();
        let site = Site::new(37.5, 12.0, 0.0).unwrap();
        let (_, dec) = azel_to_radec(123.0, 90.0, &site, &earth, Epoch::new(77.0));
        assert!((dec - 37.5).abs() < 1e-12);
    }

    #[test]
    fn azel_radec_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let earth = EarthModel::default();
        for _ in 0..1000 {
            let site = Site::new(rng.random_range(-80.0..80.0), rng.random_range(-180.0..180.0), 0.5).unwrap();
            let t = Epoch::new(rng.random_range(-1e5..1e5));
            let az = rng.random_range(0.0..360.0);
            let el = rng.random_range(-85.0..85.0);
            let (ra, dec) = azel_to_radec(az, el, &site, &earth, t);
            let (az2, el2) = radec_to_azel(ra, dec, &site, &earth, t);
            assert!(super::super::angle_diff_deg(az2, az).abs() < 1e-10);
            assert!((el2 - el).abs() < 1e-10);
        }
    }

    // direction cosine matrices built from elementary rotations
    fn rot_z(a: f64) -> [[f64; 3]; 3] {
        let (s, c) = a.sin_cos();
        [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
    }
    fn rot_y(a: f64) -> [[f64; 3]; 3] {
        let (s, c) = a.sin_cos();
        [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]
    }
    fn matmul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
        std::array::from_fn(|i| std::array::from_fn(|j| (0..3).map(|k| a[i][k] * b[k][j]).sum()))
    }
    fn apply(a: &[[f64; 3]; 3], v: &[f64; 3]) -> [f64; 3] {
        std::array::from_fn(|i| (0..3).map(|k| a[i][k] * v[k]).sum())
    }

    #[test]
    fn matches_rotation_matrix_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let earth = EarthModel::spherical();
        for _ in 0..1000 {
            let lat = rng.random_range(-89.0f64..89.0);
            let lon = rng.random_range(-180.0f64..180.0);
            let t = Epoch::new(rng.random_range(0.0..86400.0));
            let az = rng.random_range(0.0f64..360.0);
            let el = rng.random_range(-89.0f64..89.0);
            let site = Site::new(lat, lon, 0.0).unwrap();
            // local (south, east, up) vector, then rotate to inertial
            let (sa, ca) = az.to_radians().sin_cos();
            let (se, ce) = el.to_radians().sin_cos();
            let sez = [-ce * ca, ce * sa, se];
            let theta = lon.to_radians() + earth.sidereal_angle(t);
            let m = matmul(&rot_z(theta), &rot_y(std::f64::consts::FRAC_PI_2 - lat.to_radians()));
            let los = apply(&m, &sez);
            let ra = los[1].atan2(los[0]).to_degrees();
            let dec = los[2].asin().to_degrees();
            let (ra2, dec2) = azel_to_radec(az, el, &site, &earth, t);
            assert!(super::super::angle_diff_deg(ra2, ra).abs() < 1e-9);
            assert!((dec2 - dec).abs() < 1e-9);
        }
    }

    #[test]
    fn taos_examples() {
        let f = taos_frame(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(f.z, [0.0, 0.0, 1.0]);
        let (l, g) = los_to_taos_angles(&Vec3([1.0, 0.0, 0.0]), &f);
        assert_eq!((l, g), (0.0, 0.0));
        let (_, g) = los_to_taos_angles(&Vec3([0.0, 0.0, 1.0]), &f);
        assert!((g - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert_eq!(
            taos_frame(&[1.0, 0.0, 0.0], &[1.0, 1e-9, 0.0]),
            Err(AstroError::ParallelLos)
        );
    }

    #[test]
    fn taos_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rand_unit = |rng: &mut ChaCha8Rng| {
            v3::unit(&[rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
        };
        for _ in 0..1000 {
            let a = rand_unit(&mut rng);
            let b = rand_unit(&mut rng);
            let f = taos_frame(&a, &b).unwrap();
            for (p, q) in [(f.x, f.y), (f.y, f.z), (f.x, f.z)] {
                assert!(v3::dot(&p, &q).abs() < 1e-14);
            }
            for p in [f.x, f.y, f.z] {
                assert!((v3::norm(&p) - 1.0).abs() < 1e-14);
            }
            let (l, g) = los_to_taos_angles(&Vec3(b), &f);
            assert!((l - v3::dot(&a, &b).clamp(-1.0, 1.0).acos()).abs() < 1e-7);
            assert!(g.abs() < 1e-14);
            let c = rand_unit(&mut rng);
            let (l, g) = los_to_taos_angles(&Vec3(c), &f);
            let back = taos_angles_to_los(&l, &g, &f);
            assert!(v3::norm(&v3::sub(&back.0, &c)) < 1e-12);
        }
    }

    #[test]
    fn generic_da_matches_real_and_finite_differences() {
        let earth = EarthModel::default();
        let site = Site::new(44.0, 5.5, 0.9).unwrap();
        let enu = earth.enu_basis(&site, Epoch::new(10.0));
        let (az0, el0) = (0.7, 0.4);
        let az = TaylorPoly::variable(az0, 0, 1.0, 2, 3).unwrap();
        let el = TaylorPoly::variable(el0, 1, 1.0, 2, 3).unwrap();
        let los = azel_to_los(&az, &el, &enu);
        let (ra, dec) = los_to_radec(&los);
        let real = |a: f64, e: f64| los_to_radec(&azel_to_los(&a, &e, &enu));
        let (ra0, dec0) = real(az0, el0);
        assert!((ra.constant_part() - ra0).abs() < 1e-12);
        assert!((dec.constant_part() - dec0).abs() < 1e-12);
        let h = 1e-6;
        let (rp, dp) = real(az0 + h, el0);
        let (rm, dm) = real(az0 - h, el0);
        let d_ra = (rp - rm) / (2.0 * h);
        let d_dec = (dp - dm) / (2.0 * h);
        assert!((ra.coeff(&[1, 0]) - d_ra).abs() < 1e-6 * d_ra.abs().max(1.0));
        assert!((dec.coeff(&[1, 0]) - d_dec).abs() < 1e-6 * d_dec.abs().max(1.0));
    }
}
