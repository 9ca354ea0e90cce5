//! Classical (non-iterated) Gauss method.

use nalgebra::SMatrix;
use serde::{Deserialize, Serialize};

use super::IodError;
use crate::astro::Epoch;
use crate::da::RealInterval;
use crate::scalar::v3;

/// Default admissible geocentric radius band for the middle epoch, km.
pub const LEO_BAND: RealInterval = RealInterval {
    lo: 6528.0,
    hi: 8378.0,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussSolution {
    pub rho1: f64,
    pub rho_m: f64,
    pub rho_n: f64,
    /// Middle geocentric radius of the selected root.
    pub r_m: f64,
    /// Every real positive root of the eighth-degree polynomial.
    pub roots: Vec<f64>,
}

// x^8 + a x^6 + b x^3 + c
fn octic(a: f64, b: f64, c: f64, x: f64) -> (f64, f64) {
    let x2 = x * x;
    let x3 = x2 * x;
    let x5 = x3 * x2;
    let x6 = x3 * x3;
    (x6 * x2 + a * x6 + b * x3 + c, 8.0 * x5 * x2 + 6.0 * a * x5 + 3.0 * b * x2)
}

fn positive_real_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    // work in units of the Earth radius so the companion matrix is balanced
    let s = 6378.137f64;
    let (an, bn, cn) = (a / s.powi(2), b / s.powi(5), c / s.powi(8));
    let mut m = SMatrix::<f64, 8, 8>::zeros();
    for i in 0..7 {
        m[(i, i + 1)] = 1.0;
    }
    // coefficients of x^0..x^7 (monic): c, 0, 0, b, 0, 0, a, 0
    m[(7, 0)] = -cn;
    m[(7, 3)] = -bn;
    m[(7, 6)] = -an;
    let mut roots: Vec<f64> = m
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.re > 0.0 && z.im.abs() <= 1e-6 * z.norm().max(1.0))
        .map(|z| {
            let mut x = z.re * s;
            for _ in 0..20 {
                let (f, df) = octic(a, b, c, x);
                if df == 0.0 {
                    break;
                }
                let step = f / df;
                x -= step;
                if step.abs() < 1e-12 * x.abs() {
                    break;
                }
            }
            x
        })
        .filter(|x| x.is_finite() && *x > 0.0)
        .collect();
    roots.sort_by(|p, q| p.partial_cmp(q).unwrap());
    roots.dedup_by(|p, q| (*p - *q).abs() < 1e-6 * q.abs());
    roots
}

/// Slant ranges at three epochs from three lines of sight.
///
/// `sites` are the observer inertial positions at the three epochs. When
/// several roots fall in the band, the one closest to its midpoint is taken.
pub fn gauss_solve(
    t: [Epoch; 3],
    los: [[f64; 3]; 3],
    sites: [[f64; 3]; 3],
    mu: f64,
    band: RealInterval,
) -> Result<GaussSolution, IodError> {
    if !(t[0].seconds < t[1].seconds && t[1].seconds < t[2].seconds) {
        return Err(IodError::EpochOrder);
    }
    let [l1, l2, l3] = los.map(|l| v3::unit(&l));
    let [r1, r2, r3] = sites;
    let tau1 = t[0] - t[1];
    let tau3 = t[2] - t[1];
    let tau = t[2] - t[0];
    let p1 = v3::cross(&l2, &l3);
    let p2 = v3::cross(&l1, &l3);
    let p3 = v3::cross(&l1, &l2);
    let d0 = v3::dot(&l1, &p1);
    if !(d0.abs() > 1e-15) {
        return Err(IodError::SingularGeometry(d0));
    }
    let d = |r: &[f64; 3], p: &[f64; 3]| v3::dot(r, p);
    let (d11, d12, d13) = (d(&r1, &p1), d(&r1, &p2), d(&r1, &p3));
    let (d21, d22, d23) = (d(&r2, &p1), d(&r2, &p2), d(&r2, &p3));
    let (d31, d32, d33) = (d(&r3, &p1), d(&r3, &p2), d(&r3, &p3));

    let aa = (-d12 * tau3 / tau + d22 + d32 * tau1 / tau) / d0;
    let bb = (d12 * (tau3 * tau3 - tau * tau) * tau3 / tau
        + d32 * (tau * tau - tau1 * tau1) * tau1 / tau)
        / (6.0 * d0);
    let e = v3::dot(&r2, &l2);
    let r2sq = v3::dot(&r2, &r2);
    let a = -(aa * aa + 2.0 * aa * e + r2sq);
    let b = -2.0 * mu * bb * (aa + e);
    let c = -mu * mu * bb * bb;
    if ![a, b, c].iter().all(|x| x.is_finite()) {
        return Err(IodError::NonFinite("Gauss polynomial"));
    }
    let roots = positive_real_roots(a, b, c);
    let mid = band.mid();
    let r = roots
        .iter()
        .copied()
        .filter(|x| band.contains(*x))
        .min_by(|p, q| (p - mid).abs().partial_cmp(&(q - mid).abs()).unwrap())
        .ok_or_else(|| IodError::NoAdmissibleRoot(roots.clone()))?;

    let r3c = r.powi(3);
    let rho1 = ((6.0 * (d31 * tau1 / tau3 + d21 * tau / tau3) * r3c
        + mu * d31 * (tau * tau - tau1 * tau1) * tau1 / tau3)
        / (6.0 * r3c + mu * (tau * tau - tau3 * tau3))
        - d11)
        / d0;
    let rho_m = aa + mu * bb / r3c;
    let rho_n = ((6.0 * (d13 * tau3 / tau1 - d23 * tau / tau1) * r3c
        + mu * d13 * (tau * tau - tau3 * tau3) * tau3 / tau1)
        / (6.0 * r3c + mu * (tau * tau - tau1 * tau1))
        - d33)
        / d0;
    for (k, rho) in [rho1, rho_m, rho_n].iter().enumerate() {
        if !rho.is_finite() {
            return Err(IodError::NonFinite("Gauss ranges"));
        }
        if *rho <= 0.0 {
            return Err(IodError::NegativeRange(k));
        }
    }
    Ok(GaussSolution {
        rho1,
        rho_m,
        rho_n,
        r_m: r,
        roots,
    })
}
