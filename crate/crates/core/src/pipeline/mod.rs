//! Range determination and orbit-set expansion.
//!
//! Phase 2 seeds the ranges at the first and last epochs with Gauss' method
//! on a scan of 65 angle samples and refines each seed by iterated DA
//! Lambert solutions and map inversion on the range rates. Phase 3 expands
//! the selected solution in Taylor series of the six measurement deviations
//! `(α₁, δ₁, ḋ₁, α_N, δ_N, ḋ_N)`, normalized by their confidence half-widths,
//! and splits the domain automatically until the element tolerances hold.

mod phase2;
mod phase3;

pub use phase2::{
    enumerate_corners, phase2_refine, phase2_select, predict_observables, refine_ranges,
    residual, state_from_pair, CornerOutcome, CornerSample, Phase2Diagnostics, RangePair,
};
pub use phase3::{
    evaluate_orbit_set, orbit_set_bounds, phase3_expand, pointwise_solve, ElementBounds,
    OrbitSet, ORBIT_SET_SCHEMA,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ads::{AdsConfig, AdsError};
use crate::astro::AstroError;
use crate::da::{DaError, RealInterval};
use crate::iod::{IodError, LEO_BAND};
use crate::measproc::{
    mc_raw_processing, process_track, process_track_about, MeasConfig, MeasError, PolarTrack, ProcessingMode,
    RawTrack, Reference,
};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum PipelineError {
    #[error("corner {corner}: Gauss seed failed: {source}")]
    Gauss { corner: usize, source: IodError },
    #[error("corner {corner}: Lambert failed: {source}")]
    Lambert { corner: usize, source: IodError },
    #[error("corner {corner}: range-rate map not invertible: {source}")]
    Inversion { corner: usize, source: DaError },
    #[error("corner {corner}: range iteration did not converge")]
    NoConvergence { corner: usize },
    #[error("corner {corner}: non-positive or non-finite range")]
    BadRange { corner: usize },
    #[error("no corner sample produced a converged range pair")]
    NoConvergedCorner,
    #[error("phase 3 failed on the root domain: {0}")]
    Phase3(String),
    #[error(transparent)]
    Meas(#[from] MeasError),
    #[error(transparent)]
    Ads(#[from] AdsError),
    #[error(transparent)]
    Astro(#[from] AstroError),
    #[error(transparent)]
    Da(#[from] DaError),
    #[error("format error: {0}")]
    Format(String),
}

/// Phase-2 settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase2Config {
    /// DA order of the two-variable range loop.
    pub order: usize,
    /// Stop when the range update norm falls below this, km.
    pub tol_km: f64,
    pub max_iterations: usize,
    /// Two converged pairs closer than this end the scan early, km.
    pub agree_km: f64,
    /// Admissible middle-epoch geocentric radius for Gauss roots, km.
    pub band: RealInterval,
    /// Scan the 64 corners after the centre; centre only when false.
    pub corner_scan: bool,
}

impl Default for Phase2Config {
    fn default() -> Phase2Config {
        Phase2Config {
            order: 4,
            tol_km: 1e-6,
            max_iterations: 25,
            agree_km: 1.0,
            band: LEO_BAND,
            corner_scan: true,
        }
    }
}

/// Phase 1 as the pipeline runs it. With `detrend` set, the regression
/// route fits about the observables predicted by a preliminary phase-2
/// orbit from the raw route; if that preliminary solve fails, it falls back
/// to plain regression.
pub fn preprocess_track(track: &RawTrack, cfg: &PipelineConfig) -> Result<PolarTrack, PipelineError> {
    if cfg.meas.mode != ProcessingMode::Regress || !cfg.meas.detrend {
        return Ok(process_track(track, &cfg.meas)?);
    }
    let reference = mc_raw_processing(track, cfg.meas.iota, cfg.meas.n_mc, cfg.meas.seed)
        .ok()
        .and_then(|raw| reference_from(&raw, cfg));
    Ok(process_track_about(track, &cfg.meas, reference.as_ref())?)
}

fn reference_from(raw: &PolarTrack, cfg: &PipelineConfig) -> Option<Reference> {
    let (pair, _) = phase2_select(raw, &cfg.phase2).ok()?;
    let x1 = state_from_pair(raw, pair.rho1, pair.rho_n).ok()?;
    let epochs: Vec<_> = raw.obs.iter().map(|o| o.epoch).collect();
    let pred = predict_observables(&x1, &raw.geometry, &epochs).ok()?;
    let los = pred
        .iter()
        .map(|&(ra, dec, _)| {
            let (ra, dec) = (ra.to_radians(), dec.to_radians());
            [dec.cos() * ra.cos(), dec.cos() * ra.sin(), dec.sin()]
        })
        .collect();
    let rr_kms = pred.iter().map(|p| p.2).collect();
    Some(Reference { los, rr_kms })
}

/// Full solver settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub meas: MeasConfig,
    pub phase2: Phase2Config,
    pub ads: AdsConfig,
}

impl Default for PipelineConfig {
    fn default() -> PipelineConfig {
        PipelineConfig {
            meas: MeasConfig::default(),
            phase2: Phase2Config::default(),
            ads: AdsConfig::orbit_set_default(),
        }
    }
}

/// Phases 1 to 3 on a raw track.
pub fn solve_track(track: &RawTrack, cfg: &PipelineConfig) -> Result<OrbitSet, PipelineError> {
    let t0 = crate::clock::Instant::now();
    let polar = preprocess_track(track, cfg)?;
    let t1 = crate::clock::Instant::now();
    let (pair, diag) = phase2_select(&polar, &cfg.phase2)?;
    let t2 = crate::clock::Instant::now();
    let mut os = phase3_expand(&pair, &polar, &cfg.phase2, &cfg.ads)?;
    os.diagnostics = diag;
    os.timing_s = [
        (t1 - t0).as_secs_f64(),
        (t2 - t1).as_secs_f64(),
        t2.elapsed().as_secs_f64(),
    ];
    Ok(os)
}
