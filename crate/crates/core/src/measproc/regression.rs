use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StudentT};
use statrs::distribution::{ChiSquared, ContinuousCDF, StudentsT};

use super::raw::mc_raw_processing;
use super::{
    check_iota, epoch_rng, summarize_directions, MeasError, PolarObs, PolarTrack, RawTrack,
};
use crate::astro::{azel_to_los, los_to_taos_angles, taos_angles_to_los, taos_frame};
use crate::Vec3;

/// Ordinary least-squares polynomial fit in powers of `t − t0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit {
    pub order: usize,
    pub t0: f64,
    /// Polynomial coefficients, lowest power first.
    pub coeffs: Vec<f64>,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Residual variance estimate `cᵀc / (N − p)`.
    pub sigma2: f64,
    /// Coefficient covariance `σ̂² (AᵀA)⁻¹`.
    pub cov_coeffs: DMatrix<f64>,
    /// Covariance of the fitted values `A C Aᵀ`.
    pub cov_fitted: DMatrix<f64>,
    /// Degrees of freedom spent before the fit, e.g. by a data-dependent
    /// trend removed from the values.
    pub spent: usize,
}

impl RegressionFit {
    pub fn dof(&self) -> usize {
        self.fitted.len() - self.order - 1 - self.spent
    }

    /// Charges `k` further degrees of freedom: `σ̂²` and both covariances
    /// are rescaled to the smaller divisor. At least one must remain.
    pub fn spend(mut self, k: usize) -> Result<RegressionFit, MeasError> {
        let before = self.dof();
        if before <= k {
            return Err(MeasError::TooFewEpochs {
                needed: self.fitted.len() + k + 1 - before,
                got: self.fitted.len(),
            });
        }
        let f = before as f64 / (before - k) as f64;
        self.sigma2 *= f;
        self.cov_coeffs *= f;
        self.cov_fitted *= f;
        self.spent += k;
        Ok(self)
    }

    /// Fitted polynomial evaluated at time `t`.
    pub fn eval(&self, t: f64) -> f64 {
        let dt = t - self.t0;
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * dt + c)
    }
}

/// `q` with `P(|T| ≤ q) = iota` for Student's t with `dof` degrees of freedom.
pub fn student_t_two_sided_quantile(iota: f64, dof: usize) -> f64 {
    StudentsT::new(0.0, 1.0, dof as f64)
        .unwrap()
        .inverse_cdf(0.5 * (1.0 + iota))
}

/// Fits `values(times)` with a polynomial of degree `order` about `t0`.
///
/// Solved through a QR factorization of the design matrix; times should be
/// seconds relative to a nearby reference to keep the columns balanced.
pub fn fit_regression(
    values: &[f64],
    times: &[f64],
    t0: f64,
    order: usize,
) -> Result<RegressionFit, MeasError> {
    let n = values.len();
    let p = order + 1;
    if times.len() != n {
        return Err(MeasError::Format(format!(
            "{} values but {} times",
            n,
            times.len()
        )));
    }
    if n <= p {
        return Err(MeasError::TooFewEpochs { needed: p + 1, got: n });
    }
    if !values.iter().chain(times).all(|v| v.is_finite()) || !t0.is_finite() {
        return Err(MeasError::NonFinite("regression input"));
    }
    // columns scaled by the time span so R is well conditioned
    let span = times
        .iter()
        .map(|t| (t - t0).abs())
        .fold(0.0, f64::max)
        .max(1e-12);
    let a = DMatrix::from_fn(n, p, |i, j| ((times[i] - t0) / span).powi(j as i32));
    let y = DVector::from_column_slice(values);
    let qr = a.clone().qr();
    let r = qr.r();
    let rmax = r.diagonal().amax();
    if r.diagonal().iter().any(|d| !(d.abs() > 1e-12 * rmax)) {
        return Err(MeasError::RankDeficient);
    }
    let qty = qr.q().transpose() * &y;
    let zs = r
        .solve_upper_triangular(&qty)
        .ok_or(MeasError::RankDeficient)?;
    let fitted = &a * &zs;
    let resid = &y - &fitted;
    let sigma2 = resid.dot(&resid) / (n - p) as f64;
    let rinv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or(MeasError::RankDeficient)?;
    let ninv_s = &rinv * rinv.transpose();
    let cov_fitted = &a * &ninv_s * a.transpose() * sigma2;
    // undo the column scaling for the reported coefficients
    let scale: Vec<f64> = (0..p).map(|j| span.powi(-(j as i32))).collect();
    let coeffs: Vec<f64> = (0..p).map(|j| zs[j] * scale[j]).collect();
    let cov_coeffs = DMatrix::from_fn(p, p, |i, j| ninv_s[(i, j)] * sigma2 * scale[i] * scale[j]);
    Ok(RegressionFit {
        order,
        t0,
        coeffs,
        fitted: fitted.iter().copied().collect(),
        residuals: resid.iter().copied().collect(),
        sigma2,
        cov_coeffs,
        cov_fitted,
        spent: 0,
    })
}

/// Half-widths `q · sqrt(C_ii)` of the fitted values at confidence `iota`.
pub fn regression_ci(fit: &RegressionFit, iota: f64) -> Result<Vec<f64>, MeasError> {
    check_iota(iota)?;
    let q = student_t_two_sided_quantile(iota, fit.dof());
    Ok((0..fit.fitted.len())
        .map(|i| q * fit.cov_fitted[(i, i)].max(0.0).sqrt())
        .collect())
}

/// Fits every degree in `min_order..=max_order` that leaves at least three
/// residual degrees of freedom and keeps the one with the smallest Mallows
/// `Cp = RSS/σ² − N + 2p`, using the known measurement variance `var_meas`.
/// The flag reports whether the kept fit's residuals are consistent with
/// `var_meas` under a chi-square test at level `iota`.
pub fn fit_adaptive(
    values: &[f64],
    times: &[f64],
    t0: f64,
    min_order: usize,
    max_order: usize,
    var_meas: f64,
    iota: f64,
) -> Result<(RegressionFit, bool), MeasError> {
    check_iota(iota)?;
    let n = values.len();
    let top = max_order.max(min_order).min(n.saturating_sub(4)).max(min_order);
    let cp = |f: &RegressionFit| {
        f.sigma2 * f.dof() as f64 / var_meas - n as f64 + 2.0 * (f.order + 1) as f64
    };
    let mut best = fit_regression(values, times, t0, min_order)?;
    for order in min_order + 1..=top {
        let f = fit_regression(values, times, t0, order)?;
        if cp(&f) < cp(&best) {
            best = f;
        }
    }
    let ok = chi2_consistent(&best, var_meas, iota);
    Ok((best, ok))
}

fn wrap_pi(x: f64) -> f64 {
    use std::f64::consts::PI;
    x - 2.0 * PI * (x / (2.0 * PI)).round()
}

/// Predicted inertial line of sight (unit vectors) and range rate at every
/// epoch of a track, used to detrend the regression.
#[derive(Clone, Debug, PartialEq)]
pub struct Reference {
    pub los: Vec<[f64; 3]>,
    pub rr_kms: Vec<f64>,
}

fn chi2_consistent(fit: &RegressionFit, var_meas: f64, iota: f64) -> bool {
    let dof = fit.dof() as f64;
    let crit = ChiSquared::new(dof).unwrap().inverse_cdf(iota);
    fit.sigma2 * dof / var_meas <= crit
}

/// Regression route: angles are fitted in the frame spanned by the first
/// and last lines of sight, range rate is fitted directly, and the fitted
/// angles are mapped back to right ascension and declination by Monte Carlo.
///
/// An observable whose polynomial fit stays inconsistent with its declared
/// noise up to `max_order` is not smoothed: the angles (jointly) or the
/// range rate then come from [`mc_raw_processing`] instead, since a biased
/// fit is worse than the raw value at the arc ends the solver uses.
///
/// With a `reference`, the polynomials fit the measurements minus the
/// reference prediction and the prediction is added back afterwards, so a
/// low degree suffices even where the observables themselves curve hard.
pub fn regress_track(
    track: &RawTrack,
    iota: f64,
    order: usize,
    max_order: usize,
    n_mc: usize,
    seed: u64,
    reference: Option<&Reference>,
) -> Result<PolarTrack, MeasError> {
    check_iota(iota)?;
    if n_mc < 100 {
        return Err(MeasError::TooFewSamples(n_mc));
    }
    track.validate()?;
    let n = track.obs.len();
    if n <= order + 1 {
        return Err(MeasError::TooFewEpochs {
            needed: order + 2,
            got: n,
        });
    }
    let earth = &track.geometry.earth;
    let site = &track.geometry.receiver;
    let los: Vec<[f64; 3]> = track
        .obs
        .iter()
        .map(|o| {
            let enu = earth.enu_basis(site, o.epoch);
            azel_to_los(&o.az_deg.to_radians(), &o.el_deg.to_radians(), &enu).0
        })
        .collect();
    let frame = taos_frame(&los[0], &los[n - 1])?;
    let mut lam = Vec::with_capacity(n);
    let mut gam = Vec::with_capacity(n);
    for l in &los {
        let (a, b) = los_to_taos_angles(&Vec3(*l), &frame);
        lam.push(a);
        gam.push(b);
    }
    // keep λ continuous across the ±π cut
    for i in 1..n {
        let d = lam[i] - lam[i - 1];
        lam[i] -= (2.0 * std::f64::consts::PI) * (d / (2.0 * std::f64::consts::PI)).round();
    }
    let mut rr: Vec<f64> = track.obs.iter().map(|o| o.rr_kms).collect();
    let mut trend = vec![(0.0, 0.0, 0.0); n];
    if let Some(r) = reference {
        if r.los.len() != n || r.rr_kms.len() != n {
            return Err(MeasError::ReferenceLength { expected: n, got: r.los.len().min(r.rr_kms.len()) });
        }
        for i in 0..n {
            let (a, b) = los_to_taos_angles(&Vec3(r.los[i]), &frame);
            let a = lam[i] + wrap_pi(a - lam[i]);
            trend[i] = (a, b, r.rr_kms[i]);
            lam[i] -= a;
            gam[i] -= b;
            rr[i] -= r.rr_kms[i];
        }
    }
    let t_ref = track.obs[0].epoch;
    let times: Vec<f64> = track.obs.iter().map(|o| o.epoch - t_ref).collect();
    let t0 = 0.5 * (times[0] + times[n - 1]);
    // mean per-axis angular variance on the sky and range-rate variance
    let var_ang = track
        .obs
        .iter()
        .map(|o| {
            let c = o.el_deg.to_radians().cos();
            0.5 * ((o.sigma_az_deg * c).powi(2) + o.sigma_el_deg.powi(2))
        })
        .sum::<f64>()
        / n as f64
        * 1f64.to_radians().powi(2);
    let var_rr = track.obs.iter().map(|o| o.sigma_rr_kms.powi(2)).sum::<f64>() / n as f64;
    // about a reference the residual may be as simple as an offset
    let lo = if reference.is_some() { 0 } else { order };
    let hi = max_order.max(order);
    // a reference through the raw end values has absorbed two of them
    let spent = if reference.is_some() { 2 } else { 0 };
    let fit = |v: &[f64], var: f64| -> Result<(RegressionFit, bool), MeasError> {
        let f = fit_adaptive(v, &times, t0, lo, hi, var, iota)?.0.spend(spent)?;
        let ok = chi2_consistent(&f, var, iota);
        Ok((f, ok))
    };
    let (fit_l, ok_l) = fit(&lam, var_ang)?;
    let (fit_g, ok_g) = fit(&gam, var_ang)?;
    let (fit_r, ok_r) = fit(&rr, var_rr)?;
    let ci_r = regression_ci(&fit_r, iota)?;
    let smooth_angles = ok_l && ok_g;
    let raw = if smooth_angles && ok_r {
        None
    } else {
        Some(mc_raw_processing(track, iota, n_mc, seed)?)
    };

    let t_l = StudentT::new(fit_l.dof() as f64).unwrap();
    let t_g = StudentT::new(fit_g.dof() as f64).unwrap();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (rr_i, ci_rr_i) = match (&raw, ok_r) {
            (Some(r), false) => (r.obs[i].rr_kms, r.obs[i].ci_rr_kms),
            _ => (trend[i].2 + fit_r.fitted[i], ci_r[i]),
        };
        if let (Some(r), false) = (&raw, smooth_angles) {
            out.push(PolarObs {
                rr_kms: rr_i,
                ci_rr_kms: ci_rr_i,
                ..r.obs[i]
            });
            continue;
        }
        let sl = fit_l.cov_fitted[(i, i)].max(0.0).sqrt();
        let sg = fit_g.cov_fitted[(i, i)].max(0.0).sqrt();
        let mut rng = epoch_rng(seed, i);
        let samples: Vec<[f64; 3]> = (0..n_mc)
            .map(|_| {
                let a = trend[i].0 + fit_l.fitted[i] + sl * t_l.sample(&mut rng);
                let b = trend[i].1 + fit_g.fitted[i] + sg * t_g.sample(&mut rng);
                taos_angles_to_los(&a, &b, &frame).0
            })
            .collect();
        let centre = taos_angles_to_los(&(trend[i].0 + fit_l.fitted[i]), &(trend[i].1 + fit_g.fitted[i]), &frame).0;
        let (ra, dec, ci_ra, ci_dec) = summarize_directions(&centre, &samples, iota);
        out.push(PolarObs {
            epoch: track.obs[i].epoch,
            ra_deg: ra,
            dec_deg: dec,
            rr_kms: rr_i,
            ci_ra_deg: ci_ra,
            ci_dec_deg: ci_dec,
            ci_rr_kms: ci_rr_i,
        });
    }
    let polar = PolarTrack {
        geometry: track.geometry,
        iota,
        obs: out,
    };
    polar.validate()?;
    Ok(polar)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_polynomial_is_reproduced() {
        let t: Vec<f64> = (0..12).map(|i| i as f64 * 3.0).collect();
        let y: Vec<f64> = t.iter().map(|x| 1.0 - 0.5 * (x - 16.5) + 0.01 * (x - 16.5).powi(2)).collect();
        let f = fit_regression(&y, &t, 16.5, 2).unwrap();
        assert!((f.coeffs[0] - 1.0).abs() < 1e-12);
        assert!((f.coeffs[1] + 0.5).abs() < 1e-12);
        assert!((f.coeffs[2] - 0.01).abs() < 1e-12);
        assert!(f.sigma2 < 1e-25);
        assert!(regression_ci(&f, 0.95).unwrap().iter().all(|c| *c < 1e-10));
        assert!((f.eval(t[0]) - y[0]).abs() < 1e-10);
    }

    #[test]
    fn too_few_points_rejected() {
        assert_eq!(
            fit_regression(&[1.0, 2.0, 3.0], &[0.0, 1.0, 2.0], 1.0, 2),
            Err(MeasError::TooFewEpochs { needed: 4, got: 3 })
        );
    }

    #[test]
    fn repeated_times_are_rank_deficient() {
        assert_eq!(
            fit_regression(&[1.0, 2.0, 3.0, 4.0], &[1.0, 1.0, 1.0, 1.0], 1.0, 1),
            Err(MeasError::RankDeficient)
        );
    }

    #[test]
    fn adaptive_order_stops_at_consistent_fit() {
        let t: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let y: Vec<f64> = t.iter().map(|x| 1e-4 * x.powi(3)).collect();
        let (f, ok) = fit_adaptive(&y, &t, 14.5, 1, 6, 1e-6, 0.997).unwrap();
        assert_eq!((f.order, ok), (3, true));
        let (g, ok) = fit_adaptive(&y, &t, 14.5, 1, 1, 1e-6, 0.997).unwrap();
        assert_eq!((g.order, ok), (1, false));
        let (h, ok) = fit_adaptive(&y, &t, 14.5, 1, 6, 1e3, 0.997).unwrap();
        assert_eq!((h.order, ok), (1, true));
    }

    #[test]
    fn t_quantile_limits() {
        assert!((student_t_two_sided_quantile(0.95, 1) - 12.7062047).abs() < 1e-6);
        assert!((student_t_two_sided_quantile(0.95, 10) - 2.2281389).abs() < 1e-6);
    }
}
