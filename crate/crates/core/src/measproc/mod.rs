//! Measurement processing: raw radar tracks to per-epoch right ascension,
//! declination and range rate with confidence-interval half-widths.
//!
//! Two routes are available. [`mc_raw_processing`] maps each epoch's angle
//! noise through the az/el to ra/dec conversion by Monte Carlo.
//! [`regress_track`] fits low-order polynomials in the frame spanned by the
//! first and last lines of sight and maps the fitted values back.
//!
//! Random numbers come from ChaCha8 seeded with the caller's seed, one
//! stream per epoch, so results do not depend on evaluation order.

mod io;
mod raw;
mod regression;

pub use io::{
    polar_from_json_str, polar_to_json_string, read_track_csv, read_track_json,
    track_from_json_str, track_to_json_string, write_polar_json, write_track_csv,
    write_track_json, POLAR_SCHEMA, TRACK_SCHEMA,
};
pub use raw::{mc_raw_processing, normal_two_sided_quantile};
pub use regression::{
    fit_adaptive, fit_regression, regress_track, regression_ci, Reference, student_t_two_sided_quantile, RegressionFit,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::astro::{AstroError, Epoch, RadarGeometry};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MeasError {
    #[error("confidence level must lie in (0, 1), got {0}")]
    InvalidConfidence(f64),
    #[error("need at least {needed} epochs, got {got}")]
    TooFewEpochs { needed: usize, got: usize },
    #[error("standard deviations must be positive (epoch {0})")]
    NonPositiveSigma(usize),
    #[error("epochs must be strictly increasing (index {0})")]
    EpochOrder(usize),
    #[error("Monte Carlo sample count must be at least 100, got {0}")]
    TooFewSamples(usize),
    #[error("regression design matrix is rank deficient")]
    RankDeficient,
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("confidence interval collapsed to zero at epoch {0}")]
    DegenerateCi(usize),
    #[error(transparent)]
    Astro(#[from] AstroError),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("unsupported schema {0:?}")]
    Schema(String),
    #[error("reference has {got} epochs, track has {expected}")]
    ReferenceLength { expected: usize, got: usize },
}

/// One raw radar measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawObs {
    pub epoch: Epoch,
    pub az_deg: f64,
    pub el_deg: f64,
    pub rr_kms: f64,
    pub sigma_az_deg: f64,
    pub sigma_el_deg: f64,
    pub sigma_rr_kms: f64,
}

/// A radar passage: measurements plus the geometry that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawTrack {
    pub geometry: RadarGeometry,
    pub obs: Vec<RawObs>,
}

impl RawTrack {
    pub fn validate(&self) -> Result<(), MeasError> {
        if self.obs.len() < 3 {
            return Err(MeasError::TooFewEpochs {
                needed: 3,
                got: self.obs.len(),
            });
        }
        for (i, o) in self.obs.iter().enumerate() {
            let vals = [o.epoch.seconds, o.az_deg, o.el_deg, o.rr_kms];
            if !vals.iter().all(|v| v.is_finite()) {
                return Err(MeasError::NonFinite("raw measurement"));
            }
            if !(o.sigma_az_deg > 0.0 && o.sigma_el_deg > 0.0 && o.sigma_rr_kms > 0.0) {
                return Err(MeasError::NonPositiveSigma(i));
            }
            if i > 0 && !(o.epoch.seconds > self.obs[i - 1].epoch.seconds) {
                return Err(MeasError::EpochOrder(i));
            }
        }
        self.geometry.validate()?;
        Ok(())
    }

    pub fn epochs(&self) -> Vec<Epoch> {
        self.obs.iter().map(|o| o.epoch).collect()
    }

    pub fn duration(&self) -> f64 {
        self.obs.last().unwrap().epoch - self.obs[0].epoch
    }
}

/// Processed measurement at one epoch; half-widths share the value's units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarObs {
    pub epoch: Epoch,
    pub ra_deg: f64,
    pub dec_deg: f64,
    pub rr_kms: f64,
    pub ci_ra_deg: f64,
    pub ci_dec_deg: f64,
    pub ci_rr_kms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarTrack {
    pub geometry: RadarGeometry,
    pub iota: f64,
    pub obs: Vec<PolarObs>,
}

impl PolarTrack {
    pub fn validate(&self) -> Result<(), MeasError> {
        if self.obs.len() < 3 {
            return Err(MeasError::TooFewEpochs {
                needed: 3,
                got: self.obs.len(),
            });
        }
        for (i, o) in self.obs.iter().enumerate() {
            let all = [o.ra_deg, o.dec_deg, o.rr_kms, o.ci_ra_deg, o.ci_dec_deg, o.ci_rr_kms];
            if !all.iter().all(|v| v.is_finite()) {
                return Err(MeasError::NonFinite("processed measurement"));
            }
            if !(o.ci_ra_deg > 0.0 && o.ci_dec_deg > 0.0 && o.ci_rr_kms > 0.0) {
                return Err(MeasError::DegenerateCi(i));
            }
        }
        Ok(())
    }

    /// Index of the middle epoch, `⌈N/2⌉` counted from one.
    pub fn middle_index(&self) -> usize {
        self.obs.len().div_ceil(2) - 1
    }

    /// Copy with every half-width multiplied by `factor`.
    pub fn scaled_ci(&self, factor: f64) -> PolarTrack {
        let mut out = self.clone();
        for o in &mut out.obs {
            o.ci_ra_deg *= factor;
            o.ci_dec_deg *= factor;
            o.ci_rr_kms *= factor;
        }
        out
    }
}

/// Which phase-1 route to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcessingMode {
    Raw,
    Regress,
}

/// Phase-1 settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasConfig {
    pub mode: ProcessingMode,
    pub iota: f64,
    pub n_mc: usize,
    /// Lowest polynomial degree tried by the regression route.
    pub regression_order: usize,
    /// Highest degree the regression route may raise to; equal to
    /// `regression_order` for a fixed degree.
    pub max_regression_order: usize,
    /// Regress about a preliminary orbit fitted to the raw route's output
    /// (applied by the pipeline, see `pipeline::preprocess_track`).
    #[serde(default = "yes")]
    pub detrend: bool,
    pub seed: u64,
}

fn yes() -> bool {
    true
}

impl Default for MeasConfig {
    fn default() -> MeasConfig {
        MeasConfig {
            mode: ProcessingMode::Regress,
            iota: 0.997,
            n_mc: 1000,
            regression_order: 2,
            max_regression_order: 6,
            detrend: true,
            seed: 1,
        }
    }
}

/// Runs the configured route without a regression reference.
pub fn process_track(track: &RawTrack, cfg: &MeasConfig) -> Result<PolarTrack, MeasError> {
    process_track_about(track, cfg, None)
}

/// Runs the configured route; the regression route detrends by `reference`
/// when one is given.
pub fn process_track_about(
    track: &RawTrack,
    cfg: &MeasConfig,
    reference: Option<&Reference>,
) -> Result<PolarTrack, MeasError> {
    match cfg.mode {
        ProcessingMode::Raw => mc_raw_processing(track, cfg.iota, cfg.n_mc, cfg.seed),
        ProcessingMode::Regress => {
            regress_track(
                track,
                cfg.iota,
                cfg.regression_order,
                cfg.max_regression_order,
                cfg.n_mc,
                cfg.seed,
                reference,
            )
        }
    }
}

pub(crate) fn check_iota(iota: f64) -> Result<(), MeasError> {
    if iota > 0.0 && iota < 1.0 {
        Ok(())
    } else {
        Err(MeasError::InvalidConfidence(iota))
    }
}

/// Per-epoch RNG: one ChaCha8 stream per epoch index.
pub(crate) fn epoch_rng(seed: u64, index: usize) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Angles of the unit direction `centre` and the `iota` quantile of each
/// sampled direction's angular distance to it (degrees).
pub(crate) fn summarize_directions(centre: &[f64; 3], samples: &[[f64; 3]], iota: f64) -> (f64, f64, f64, f64) {
    use crate::astro::{angle_diff_deg, wrap_deg};
    let ra_hat = wrap_deg(centre[1].atan2(centre[0]).to_degrees());
    let dec_hat = centre[2].atan2(centre[0].hypot(centre[1])).to_degrees();
    let mut d_ra = Vec::with_capacity(samples.len());
    let mut d_dec = Vec::with_capacity(samples.len());
    for s in samples {
        let ra = s[1].atan2(s[0]).to_degrees();
        let dec = s[2].atan2(s[0].hypot(s[1])).to_degrees();
        d_ra.push(angle_diff_deg(ra, ra_hat).abs());
        d_dec.push((dec - dec_hat).abs());
    }
    (ra_hat, dec_hat, empirical_quantile(&mut d_ra, iota), empirical_quantile(&mut d_dec, iota))
}

/// Smallest sample value `x` with at least a fraction `p` of samples `≤ x`.
pub(crate) fn empirical_quantile(v: &mut [f64], p: f64) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    let idx = ((p * n as f64).ceil() as usize).clamp(1, n) - 1;
    v[idx]
}
