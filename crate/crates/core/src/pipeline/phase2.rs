use serde::{Deserialize, Serialize};

use super::{Phase2Config, PipelineError};
use crate::astro::{
    angle_diff_deg, kepler_propagate, los_to_radec, radec_to_los, slant_range_rate,
    slant_range_rate_real, Epoch, RadarGeometry, StateVector, MU_EARTH,
};
use crate::da::{TaylorMap, TaylorPoly};
use crate::iod::{gauss_solve, lambert_solve, TransferDirection};
use crate::measproc::PolarTrack;
use crate::scalar::v3;
use crate::Vec3;

/// One of the 65 angle samples used to seed Gauss' method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerSample {
    /// 1 is the nominal centre; 2..=65 the sign combinations.
    pub index: usize,
    /// `(α₁, δ₁, α_m, δ_m, α_N, δ_N)`, degrees.
    pub angles_deg: [f64; 6],
}

/// Converged (or attempted) ranges at the first and last epochs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangePair {
    pub corner: usize,
    pub rho1: f64,
    pub rho_n: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CornerOutcome {
    pub corner: usize,
    /// `None` when converged, otherwise the failure message.
    pub error: Option<String>,
    pub pair: Option<RangePair>,
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Phase2Diagnostics {
    pub outcomes: Vec<CornerOutcome>,
    pub selected_corner: usize,
    pub early_stop: bool,
}

/// The nominal sample followed by all 64 sign combinations of the six angle
/// half-widths. Sample `1 + b` with `b = b₅…b₀` in binary takes `−ΔCI` on
/// angle `q` when bit `5 − q` is 0 and `+ΔCI` when it is 1, so the first
/// angle varies slowest.
pub fn enumerate_corners(track: &PolarTrack) -> Vec<CornerSample> {
    let n = track.obs.len();
    let idx = [0, track.middle_index(), n - 1];
    let mut nominal = [0.0; 6];
    let mut ci = [0.0; 6];
    for (k, &i) in idx.iter().enumerate() {
        let o = &track.obs[i];
        nominal[2 * k] = o.ra_deg;
        nominal[2 * k + 1] = o.dec_deg;
        ci[2 * k] = o.ci_ra_deg;
        ci[2 * k + 1] = o.ci_dec_deg;
    }
    let mut out = Vec::with_capacity(65);
    out.push(CornerSample {
        index: 1,
        angles_deg: nominal,
    });
    for b in 0..64usize {
        let mut a = nominal;
        for q in 0..6 {
            let plus = (b >> (5 - q)) & 1 == 1;
            a[q] += if plus { ci[q] } else { -ci[q] };
        }
        out.push(CornerSample {
            index: b + 2,
            angles_deg: a,
        });
    }
    out
}

fn los_deg(ra: f64, dec: f64) -> [f64; 3] {
    radec_to_los(&ra.to_radians(), &dec.to_radians()).0
}

/// Range loop at fixed lines of sight: finds `(ρ₁, ρ_N)` such that the
/// Lambert arc between the two points reproduces the range rates `rr`.
///
/// Each iteration expands the range rates in the two range deviations,
/// inverts the origin-preserving part and evaluates it at minus the current
/// mismatch.
#[allow(clippy::too_many_arguments)]
pub fn refine_ranges(
    geom: &RadarGeometry,
    t: [Epoch; 2],
    los: [[f64; 3]; 2],
    rr: [f64; 2],
    seed: (f64, f64),
    cfg: &Phase2Config,
    corner: usize,
) -> Result<RangePair, PipelineError> {
    let sites = [geom.receiver_state(t[0]).r, geom.receiver_state(t[1]).r];
    let dt = t[1] - t[0];
    let (mut rho1, mut rho_n) = seed;
    for it in 1..=cfg.max_iterations {
        if !(rho1 > 0.0 && rho_n > 0.0 && rho1.is_finite() && rho_n.is_finite()) {
            return Err(PipelineError::BadRange { corner });
        }
        let p1 = TaylorPoly::variable(rho1, 0, 1.0, 2, cfg.order)?;
        let pn = TaylorPoly::variable(rho_n, 1, 1.0, 2, cfg.order)?;
        let r1 = Vec3(los[0].map(|c| &p1 * c)).add_f(&sites[0]);
        let rn = Vec3(los[1].map(|c| &pn * c)).add_f(&sites[1]);
        let normal = v3::cross(&r1.value(), &rn.value());
        let sol = lambert_solve(&r1, &rn, dt, MU_EARTH, TransferDirection::Along(normal))
            .map_err(|source| PipelineError::Lambert { corner, source })?;
        let (_, d1) = slant_range_rate(&r1, &sol.v1, geom, t[0]);
        let (_, dn) = slant_range_rate(&rn, &sol.v2, geom, t[1]);
        let dev = [d1 - rr[0], dn - rr[1]];
        let c0 = [dev[0].constant_part(), dev[1].constant_part()];
        if !(c0[0].is_finite() && c0[1].is_finite()) {
            return Err(PipelineError::BadRange { corner });
        }
        let map = TaylorMap::new(vec![dev[0].nonconstant_part(), dev[1].nonconstant_part()])?;
        let inv = map
            .invert()
            .map_err(|source| PipelineError::Inversion { corner, source })?;
        let step = inv.eval(&[-c0[0], -c0[1]])?;
        rho1 += step[0];
        rho_n += step[1];
        if step[0].hypot(step[1]) < cfg.tol_km {
            if !(rho1 > 0.0 && rho_n > 0.0) {
                return Err(PipelineError::BadRange { corner });
            }
            return Ok(RangePair {
                corner,
                rho1,
                rho_n,
                iterations: it,
                converged: true,
            });
        }
    }
    Err(PipelineError::NoConvergence { corner })
}

/// Gauss seed from the corner's angles, then the range loop with the
/// nominal angles at the first and last epochs.
pub fn phase2_refine(
    corner: &CornerSample,
    track: &PolarTrack,
    cfg: &Phase2Config,
) -> Result<RangePair, PipelineError> {
    let geom = &track.geometry;
    let n = track.obs.len();
    let m = track.middle_index();
    let t = [track.obs[0].epoch, track.obs[m].epoch, track.obs[n - 1].epoch];
    let a = corner.angles_deg;
    let los = [los_deg(a[0], a[1]), los_deg(a[2], a[3]), los_deg(a[4], a[5])];
    let sites = t.map(|ti| geom.receiver_state(ti).r);
    let g = gauss_solve(t, los, sites, MU_EARTH, cfg.band).map_err(|source| PipelineError::Gauss {
        corner: corner.index,
        source,
    })?;
    let (first, last) = (&track.obs[0], &track.obs[n - 1]);
    refine_ranges(
        geom,
        [first.epoch, last.epoch],
        [los_deg(first.ra_deg, first.dec_deg), los_deg(last.ra_deg, last.dec_deg)],
        [first.rr_kms, last.rr_kms],
        (g.rho1, g.rho_n),
        cfg,
        corner.index,
    )
}

/// State at the first epoch implied by a range pair and the nominal angles.
pub fn state_from_pair(track: &PolarTrack, rho1: f64, rho_n: f64) -> Result<StateVector, PipelineError> {
    let geom = &track.geometry;
    let n = track.obs.len();
    let (first, last) = (&track.obs[0], &track.obs[n - 1]);
    let r1 = v3::add(&geom.receiver_state(first.epoch).r, &v3::scale(&los_deg(first.ra_deg, first.dec_deg), rho1));
    let rn = v3::add(&geom.receiver_state(last.epoch).r, &v3::scale(&los_deg(last.ra_deg, last.dec_deg), rho_n));
    let sol = lambert_solve(
        &Vec3(r1),
        &Vec3(rn),
        last.epoch - first.epoch,
        MU_EARTH,
        TransferDirection::Along(v3::cross(&r1, &rn)),
    )
    .map_err(|source| PipelineError::Lambert { corner: 0, source })?;
    Ok(StateVector::new(r1, sol.v1.0))
}

/// Right ascension, declination (degrees) and range rate predicted at each
/// epoch from the state `x1` at `epochs[0]`.
pub fn predict_observables(
    x1: &StateVector,
    geom: &RadarGeometry,
    epochs: &[Epoch],
) -> Result<Vec<(f64, f64, f64)>, PipelineError> {
    let t1 = epochs[0];
    epochs
        .iter()
        .map(|&t| {
            let x = kepler_propagate(x1, t - t1, MU_EARTH)?;
            let rel = v3::sub(&x.r, &geom.receiver_state(t).r);
            let (ra, dec) = los_to_radec(&Vec3(v3::unit(&rel)));
            let (_, rr) = slant_range_rate_real(&x, geom, t)?;
            Ok((ra.to_degrees(), dec.to_degrees(), rr))
        })
        .collect()
}

/// Confidence-normalized squared residual over all epochs; angle
/// differences in radians, range rates in km/s.
pub fn residual(track: &PolarTrack, x1: &StateVector) -> Result<f64, PipelineError> {
    let epochs: Vec<Epoch> = track.obs.iter().map(|o| o.epoch).collect();
    let pred = predict_observables(x1, &track.geometry, &epochs)?;
    let mut r = 0.0;
    for (o, (ra, dec, rr)) in track.obs.iter().zip(pred) {
        let da = angle_diff_deg(o.ra_deg, ra).to_radians() / o.ci_ra_deg.to_radians();
        let dd = (o.dec_deg - dec).to_radians() / o.ci_dec_deg.to_radians();
        let dr = (o.rr_kms - rr) / o.ci_rr_kms;
        r += da * da + dd * dd + dr * dr;
    }
    Ok(r)
}

/// Corner scan with early stop and residual-based selection.
pub fn phase2_select(
    track: &PolarTrack,
    cfg: &Phase2Config,
) -> Result<(RangePair, Phase2Diagnostics), PipelineError> {
    track.validate()?;
    let corners = enumerate_corners(track);
    let count = if cfg.corner_scan { corners.len() } else { 1 };
    let mut diag = Phase2Diagnostics::default();
    let mut best: Option<(f64, RangePair)> = None;
    let mut converged: Vec<RangePair> = Vec::new();
    for c in &corners[..count] {
        let attempt = phase2_refine(c, track, cfg).and_then(|p| {
            let x1 = state_from_pair(track, p.rho1, p.rho_n)?;
            Ok((p, residual(track, &x1)?))
        });
        match attempt {
            Ok((p, r)) => {
                diag.outcomes.push(CornerOutcome {
                    corner: c.index,
                    error: None,
                    pair: Some(p),
                    residual: Some(r),
                });
                if best.as_ref().is_none_or(|(rb, _)| r < *rb) {
                    best = Some((r, p));
                }
                let agrees = converged
                    .iter()
                    .any(|q| (q.rho1 - p.rho1).hypot(q.rho_n - p.rho_n) < cfg.agree_km);
                converged.push(p);
                if agrees {
                    diag.early_stop = true;
                    break;
                }
            }
            Err(e) => diag.outcomes.push(CornerOutcome {
                corner: c.index,
                error: Some(e.to_string()),
                pair: None,
                residual: None,
            }),
        }
    }
    let (_, pair) = best.ok_or(PipelineError::NoConvergedCorner)?;
    diag.selected_corner = pair.corner;
    Ok((pair, diag))
}
