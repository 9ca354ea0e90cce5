//! Zero-revolution Lambert solver in universal variables.
//!
//! The real problem is solved by safeguarded Newton on `z`. For DA inputs
//! the converged real `z` is then refined by simplified Newton sweeps on the
//! full polynomials with the real derivative held fixed; each sweep fixes
//! at least one more order, so `k + 2` sweeps reach the truncation order.

use super::IodError;
use crate::astro::stumpff;
use crate::da::TaylorPoly;
use crate::scalar::v3;
use crate::{Scalar, Vec3};

/// Sense of the transfer relative to a reference normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransferDirection {
    /// Angular momentum with positive z component.
    Prograde,
    Retrograde,
    /// Angular momentum with positive projection on the given vector.
    Along([f64; 3]),
}

impl TransferDirection {
    fn normal(&self) -> [f64; 3] {
        match self {
            TransferDirection::Prograde => [0.0, 0.0, 1.0],
            TransferDirection::Retrograde => [0.0, 0.0, -1.0],
            TransferDirection::Along(n) => *n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambertSolution<S> {
    pub v1: Vec3<S>,
    pub v2: Vec3<S>,
}

const FOUR_PI2: f64 = 4.0 * std::f64::consts::PI * std::f64::consts::PI;

struct Geometry<S> {
    r1: S,
    r2: S,
    a: S,
}

// y(z) and the time-of-flight residual F(z) = √μ·t(z) − √μ·Δt
fn residual<S: Scalar>(z: &S, g: &Geometry<S>, dt: f64, mu: f64) -> (S, S) {
    let (c2, c3) = stumpff(z);
    let sc2 = c2.sqrt();
    let y = g.r1.clone() + g.r2.clone() + g.a.clone() * (z.clone() * c3.clone() - 1.0) / sc2;
    let ratio = y.clone() / c2;
    let f = ratio.clone() * ratio.sqrt() * c3 + g.a.clone() * y.sqrt() - mu.sqrt() * dt;
    (y, f)
}

fn real_residual(z: f64, g: &Geometry<f64>, dt: f64, mu: f64) -> (f64, f64) {
    residual(&z, g, dt, mu)
}

fn real_derivative(z: f64, g: &Geometry<f64>, dt: f64, mu: f64) -> f64 {
    let Ok(zp) = TaylorPoly::variable(z, 0, 1.0, 1, 1) else {
        return f64::NAN;
    };
    let gp = Geometry {
        r1: zp.constant_like(g.r1),
        r2: zp.constant_like(g.r2),
        a: zp.constant_like(g.a),
    };
    let (_, f) = residual(&zp, &gp, dt, mu);
    f.coeff(&[1])
}

// F with the region y <= 0 (where the root cannot lie) mapped below zero
fn signed_residual(z: f64, g: &Geometry<f64>, dt: f64, mu: f64) -> f64 {
    let (y, f) = real_residual(z, g, dt, mu);
    if y <= 0.0 || f.is_nan() {
        -1.0
    } else {
        f
    }
}

fn solve_real_z(g: &Geometry<f64>, dt: f64, mu: f64) -> Result<f64, IodError> {
    let mut hi = FOUR_PI2 * (1.0 - 1e-9);
    if !(signed_residual(hi, g, dt, mu) > 0.0) {
        // would need more than one revolution
        return Err(IodError::LambertNoConvergence);
    }
    let mut lo = 0.0;
    let mut step = 4.0;
    while signed_residual(lo, g, dt, mu) > 0.0 {
        hi = lo;
        lo -= step;
        step *= 2.0;
        if lo < -1e4 {
            return Err(IodError::LambertNoConvergence);
        }
    }
    // Newton inside the bracket, bisection when a step leaves it
    let mut z = 0.5 * (lo + hi);
    for _ in 0..200 {
        let f = signed_residual(z, g, dt, mu);
        if f > 0.0 {
            hi = z;
        } else {
            lo = z;
        }
        let (y, _) = real_residual(z, g, dt, mu);
        let mut next = 0.5 * (lo + hi);
        if y > 0.0 {
            let d = real_derivative(z, g, dt, mu);
            if d.is_finite() && d != 0.0 {
                let cand = z - f / d;
                if cand > lo && cand < hi {
                    next = cand;
                }
            }
        }
        let done = (next - z).abs() <= 1e-14 * z.abs().max(1.0) || (hi - lo) <= 1e-15 * z.abs().max(1.0);
        z = next;
        if done {
            return Ok(z);
        }
    }
    Err(IodError::LambertNoConvergence)
}

/// Velocities at both ends of the transfer from `r1` to `r2` in `dt` seconds.
///
/// DA inputs yield DA velocities whose constant parts solve the real problem
/// and whose higher terms expand the solution map.
pub fn lambert_solve<S: Scalar>(
    r1: &Vec3<S>,
    r2: &Vec3<S>,
    dt: f64,
    mu: f64,
    direction: TransferDirection,
) -> Result<LambertSolution<S>, IodError> {
    if !(dt > 0.0) || !(mu > 0.0) {
        return Err(IodError::NonFinite("Lambert time of flight or mu"));
    }
    let r1v = r1.value();
    let r2v = r2.value();
    let cross_v = v3::cross(&r1v, &r2v);
    let short = v3::dot(&cross_v, &direction.normal()) >= 0.0;
    let sign = if short { 1.0 } else { -1.0 };

    let r1n = r1.norm();
    let r2n = r2.norm();
    let rr = r1n.clone() * r2n.clone();
    let cos_t = r1.dot(r2) / rr.clone();
    let sin_t = r1.cross(r2).norm() / rr.clone() * sign;
    if !(sin_t.value().abs() > 1e-8) {
        return Err(IodError::TransferAngleSingular);
    }
    let a = sin_t * (rr / (-cos_t + 1.0)).sqrt();
    let geo = Geometry {
        r1: r1n.clone(),
        r2: r2n.clone(),
        a,
    };
    let geo_real = Geometry {
        r1: geo.r1.value(),
        r2: geo.r2.value(),
        a: geo.a.value(),
    };
    if ![geo_real.r1, geo_real.r2, geo_real.a].iter().all(|x| x.is_finite()) {
        return Err(IodError::NonFinite("Lambert geometry"));
    }
    let z0 = solve_real_z(&geo_real, dt, mu)?;
    let mut z = geo.a.lift(z0);
    if geo.a.order() > 0 {
        let d0 = real_derivative(z0, &geo_real, dt, mu);
        for _ in 0..geo.a.order() + 2 {
            let (_, f) = residual(&z, &geo, dt, mu);
            z = z - f / d0;
        }
    }
    let (y, _) = residual(&z, &geo, dt, mu);
    if !(y.value() > 0.0) {
        return Err(IodError::LambertNoConvergence);
    }
    let f = -(y.clone() / geo.r1.clone()) + 1.0;
    let g = geo.a.clone() * (y.clone() / mu).sqrt();
    let gdot = -(y / geo.r2.clone()) + 1.0;
    let ginv = g.recip();
    let v1 = (r2.clone() - r1.scale(&f)).scale(&ginv);
    let v2 = (r2.scale(&gdot) - r1.clone()).scale(&ginv);
    if !v1.value().iter().chain(v2.value().iter()).all(|c| c.is_finite()) {
        return Err(IodError::NonFinite("Lambert velocities"));
    }
    Ok(LambertSolution { v1, v2 })
}
