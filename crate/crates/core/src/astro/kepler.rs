//! Stumpff functions and universal-variable two-body propagation.

use super::{AstroError, StateVector};
use crate::da::{Intrinsic, TaylorPoly};
use crate::scalar::v3;
use crate::Scalar;

// below this |ψ| the closed forms lose digits to cancellation
const SERIES_LIMIT: f64 = 0.1;

fn series_real(psi: f64) -> (f64, f64) {
    let (mut c2, mut c3) = (0.0, 0.0);
    let mut term2 = 0.5;
    let mut term3 = 1.0 / 6.0;
    for j in 0..20 {
        c2 += term2;
        c3 += term3;
        let n = 2.0 * j as f64;
        term2 *= -psi / ((n + 3.0) * (n + 4.0));
        term3 *= -psi / ((n + 4.0) * (n + 5.0));
    }
    (c2, c3)
}

/// `c2(ψ) = (1 − cos √ψ)/ψ` and `c3(ψ) = (√ψ − sin √ψ)/√ψ³`.
fn stumpff_real(psi: f64) -> (f64, f64) {
    if psi.abs() < SERIES_LIMIT {
        series_real(psi)
    } else if psi > 0.0 {
        let s = psi.sqrt();
        ((1.0 - s.cos()) / psi, (s - s.sin()) / (s * psi))
    } else {
        let s = (-psi).sqrt();
        ((s.cosh() - 1.0) / -psi, (s.sinh() - s) / (s * -psi))
    }
}

/// Taylor coefficients of `c2` and `c3` about `psi` up to `order`; NaN
/// throughout for a non-finite `psi` so callers see a non-finite result.
pub fn stumpff_taylor(psi: f64, order: usize) -> (Vec<f64>, Vec<f64>) {
    if !psi.is_finite() {
        return (vec![f64::NAN; order + 1], vec![f64::NAN; order + 1]);
    }
    if order == 0 {
        let (c2, c3) = stumpff_real(psi);
        return (vec![c2], vec![c3]);
    }
    let p = TaylorPoly::variable(psi, 0, 1.0, 1, order).unwrap();
    let (c2, c3) = if psi.abs() < SERIES_LIMIT {
        let mut c2 = p.constant_like(0.0);
        let mut c3 = p.constant_like(0.0);
        let mut term2 = p.constant_like(0.5);
        let mut term3 = p.constant_like(1.0 / 6.0);
        let neg = -&p;
        for j in 0..20 {
            c2 += &term2;
            c3 += &term3;
            let n = 2.0 * j as f64;
            term2 = &(&term2 * &neg) * (1.0 / ((n + 3.0) * (n + 4.0)));
            term3 = &(&term3 * &neg) * (1.0 / ((n + 4.0) * (n + 5.0)));
        }
        (c2, c3)
    } else if psi > 0.0 {
        let s = p.intrinsic(Intrinsic::Sqrt).unwrap();
        let one_minus_cos = 1.0 - s.intrinsic(Intrinsic::Cos).unwrap();
        let c2 = &one_minus_cos * &p.recip().unwrap();
        let s_minus_sin = &s - &s.intrinsic(Intrinsic::Sin).unwrap();
        let c3 = &s_minus_sin * &(&s * &p).recip().unwrap();
        (c2, c3)
    } else {
        let q = -&p;
        let s = q.intrinsic(Intrinsic::Sqrt).unwrap();
        let ep = s.intrinsic(Intrinsic::Exp).unwrap();
        let em = (-&s).intrinsic(Intrinsic::Exp).unwrap();
        let cosh = &(&ep + &em) * 0.5;
        let sinh = &(&ep - &em) * 0.5;
        let c2 = &(cosh - 1.0) * &q.recip().unwrap();
        let c3 = &(&sinh - &s) * &(&s * &q).recip().unwrap();
        (c2, c3)
    };
    (c2.coeffs().to_vec(), c3.coeffs().to_vec())
}

/// Stumpff functions over any scalar.
pub fn stumpff<S: Scalar>(psi: &S) -> (S, S) {
    let (c2, c3) = stumpff_taylor(psi.value(), psi.order());
    (psi.compose_series(&c2), psi.compose_series(&c3))
}

/// Universal-variable two-body propagation by `dt` seconds.
pub fn kepler_propagate(x0: &StateVector, dt: f64, mu: f64) -> Result<StateVector, AstroError> {
    if !(mu > 0.0) || !x0.is_finite() || !dt.is_finite() {
        return Err(AstroError::InvalidState("non-finite input or mu <= 0"));
    }
    let r0 = v3::norm(&x0.r);
    if !(r0 > 0.0) {
        return Err(AstroError::InvalidState("zero position"));
    }
    if dt == 0.0 {
        return Ok(*x0);
    }
    let v0sq = v3::dot(&x0.v, &x0.v);
    let rv = v3::dot(&x0.r, &x0.v);
    let smu = mu.sqrt();
    let alpha = 2.0 / r0 - v0sq / mu;

    let f_of = |chi: f64| {
        let z = alpha * chi * chi;
        let (c2, c3) = stumpff_real(z);
        let r = chi * chi * c2 + rv / smu * chi * (1.0 - z * c3) + r0 * (1.0 - z * c2);
        let t = chi.powi(3) * c3 + rv / smu * chi * chi * c2 + r0 * chi * (1.0 - z * c3);
        (t - smu * dt, r)
    };

    let mut chi = if alpha > 1e-12 {
        smu * dt * alpha
    } else {
        smu * dt / r0
    };
    let mut converged = false;
    for _ in 0..50 {
        let (f, r) = f_of(chi);
        // dF/dχ equals the radius
        let step = f / r;
        chi -= step;
        if step.abs() <= 1e-13 * chi.abs().max(1e-6) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(AstroError::KeplerNoConvergence);
    }
    let z = alpha * chi * chi;
    let (c2, c3) = stumpff_real(z);
    let f = 1.0 - chi * chi / r0 * c2;
    let g = dt - chi.powi(3) / smu * c3;
    let r = v3::add(&v3::scale(&x0.r, f), &v3::scale(&x0.v, g));
    let rn = v3::norm(&r);
    let fdot = smu / (rn * r0) * (z * chi * c3 - chi);
    let gdot = 1.0 - chi * chi / rn * c2;
    let v = v3::add(&v3::scale(&x0.r, fdot), &v3::scale(&x0.v, gdot));
    let out = StateVector::new(r, v);
    if !out.is_finite() {
        return Err(AstroError::KeplerNoConvergence);
    }
    Ok(out)
}
