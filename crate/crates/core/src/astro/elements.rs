use serde::{Deserialize, Serialize};

use super::{wrap_deg, AstroError, StateVector};
use crate::scalar::v3;
use crate::{Scalar, Vec3};

/// Reduced elements `(a km, e, i deg, Ω deg, u deg)`, with `u` the argument
/// of latitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedElements {
    pub a: f64,
    pub e: f64,
    pub i: f64,
    pub raan: f64,
    pub u: f64,
}

impl ReducedElements {
    pub const NAMES: [&'static str; 5] = ["a", "e", "i", "raan", "u"];

    pub fn to_array(&self) -> [f64; 5] {
        [self.a, self.e, self.i, self.raan, self.u]
    }

    pub fn from_array(x: [f64; 5]) -> ReducedElements {
        ReducedElements {
            a: x[0],
            e: x[1],
            i: x[2],
            raan: x[3],
            u: x[4],
        }
    }

    /// Component-wise absolute error; angles use the shortest difference.
    pub fn abs_error(&self, truth: &ReducedElements) -> [f64; 5] {
        [
            (self.a - truth.a).abs(),
            (self.e - truth.e).abs(),
            (self.i - truth.i).abs(),
            super::angle_diff_deg(self.raan, truth.raan).abs(),
            super::angle_diff_deg(self.u, truth.u).abs(),
        ]
    }
}

/// Classical osculating elements, angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalElements {
    pub a: f64,
    pub e: f64,
    pub i: f64,
    pub raan: f64,
    pub argp: f64,
    pub nu: f64,
}

impl ClassicalElements {
    pub fn reduced(&self) -> ReducedElements {
        ReducedElements {
            a: self.a,
            e: self.e,
            i: self.i,
            raan: self.raan,
            u: wrap_deg(self.argp + self.nu),
        }
    }

    pub fn period(&self, mu: f64) -> f64 {
        2.0 * std::f64::consts::PI * (self.a.powi(3) / mu).sqrt()
    }
}

// shifts the constant part into [0, 360) without touching the series
fn wrap_scalar<S: Scalar>(x: S) -> S {
    let c = x.value();
    x + (wrap_deg(c) - c)
}

/// Reduced elements over any scalar, angles in degrees.
///
/// For an exactly equatorial orbit (zero node vector at the expansion
/// point) Ω is set to zero and `u` becomes the true longitude.
pub fn reduced_elements<S: Scalar>(r: &Vec3<S>, v: &Vec3<S>, mu: f64) -> Result<[S; 5], AstroError> {
    let h = r.cross(v);
    let hv = h.value();
    if !(v3::norm(&hv) > 0.0) {
        return Err(AstroError::InvalidState("rectilinear orbit"));
    }
    let rn = r.norm();
    let v2 = v.dot(v);
    let a = (rn.recip() * 2.0 - v2.clone() / mu).recip();
    if !a.value().is_finite() {
        return Err(AstroError::InvalidState("parabolic orbit"));
    }
    let rv = r.dot(v);
    let coef_r = (v2 - rn.recip() * mu) / mu;
    let coef_v = rv / mu;
    let ev = r.scale(&coef_r) - v.scale(&coef_v);
    let e = ev.dot(&ev).sqrt();
    let [hx, hy, hz] = h.0.clone();
    let hxy = (hx.clone() * hx.clone() + hy.clone() * hy.clone()).sqrt();
    let i = hxy.atan2(&hz).clone() * 57.295_779_513_082_32;
    let node_zero = hv[0] == 0.0 && hv[1] == 0.0;
    let (raan, u) = if node_zero {
        let sign = if hv[2] >= 0.0 { 1.0 } else { -1.0 };
        (r[0].lift(0.0), (r[1].clone() * sign).atan2(&r[0]))
    } else {
        let n = Vec3::new(-hy.clone(), hx.clone(), hx.lift(0.0));
        let raan = hx.atan2(&-hy);
        let hn = h.norm();
        let s = h.dot(&n.cross(r)) / hn;
        let c = n.dot(r);
        (raan, s.atan2(&c))
    };
    let deg = 57.295_779_513_082_32;
    Ok([a, e, i, wrap_scalar(raan * deg), wrap_scalar(u * deg)])
}

pub fn cart_to_reduced(x: &StateVector, mu: f64) -> Result<ReducedElements, AstroError> {
    let [a, e, i, raan, u] = reduced_elements(&Vec3(x.r), &Vec3(x.v), mu)?;
    Ok(ReducedElements { a, e, i, raan, u })
}

pub fn cart_to_classical(x: &StateVector, mu: f64) -> Result<ClassicalElements, AstroError> {
    let red = cart_to_reduced(x, mu)?;
    let h = v3::norm(&x.angular_momentum());
    let p = h * h / mu;
    let r = v3::norm(&x.r);
    let nu = if red.e < 1e-12 {
        red.u
    } else {
        wrap_deg(((p / mu).sqrt() * v3::dot(&x.r, &x.v)).atan2(p - r).to_degrees())
    };
    Ok(ClassicalElements {
        a: red.a,
        e: red.e,
        i: red.i,
        raan: red.raan,
        argp: wrap_deg(red.u - nu),
        nu,
    })
}

pub fn classical_to_cart(el: &ClassicalElements, mu: f64) -> Result<StateVector, AstroError> {
    if !(el.e >= 0.0) || el.e >= 1.0 || !(el.a > 0.0) {
        return Err(AstroError::InvalidState("only elliptic orbits are supported"));
    }
    let p = el.a * (1.0 - el.e * el.e);
    let (sn, cn) = el.nu.to_radians().sin_cos();
    let r = p / (1.0 + el.e * cn);
    let rp = [r * cn, r * sn, 0.0];
    let k = (mu / p).sqrt();
    let vp = [-k * sn, k * (el.e + cn), 0.0];
    let (so, co) = el.raan.to_radians().sin_cos();
    let (si, ci) = el.i.to_radians().sin_cos();
    let (sw, cw) = el.argp.to_radians().sin_cos();
    let m = [
        [co * cw - so * sw * ci, -co * sw - so * cw * ci, so * si],
        [so * cw + co * sw * ci, -so * sw + co * cw * ci, -co * si],
        [sw * si, cw * si, ci],
    ];
    let rot = |x: [f64; 3]| -> [f64; 3] { std::array::from_fn(|i| (0..3).map(|j| m[i][j] * x[j]).sum()) };
    Ok(StateVector::new(rot(rp), rot(vp)))
}
