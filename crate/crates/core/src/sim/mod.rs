//! Synthetic bistatic Doppler passes from two-body orbits, and campaigns
//! that run the full solver over many of them.

mod campaign;

pub use campaign::{
    arc_bin, campaign_pipeline, pass_seed, period_range, plan_campaign, run_campaign, sample_population,
    success_comparison, BinStats, CampaignConfig, CampaignResult, PassResult, Population,
    SuccessComparison, ARC_BINS,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::astro::{
    cart_to_reduced, classical_to_cart, kepler_propagate, los_to_azel, slant_range_rate_real,
    AstroError, ClassicalElements, Epoch, RadarGeometry, ReducedElements, StateVector, MU_EARTH,
};
use crate::measproc::{RawObs, RawTrack};
use crate::scalar::v3;
use crate::Vec3;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SimError {
    #[error("no pass of the requested length above the mask within the search window")]
    NoVisibility,
    #[error("invalid pass specification: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Astro(#[from] AstroError),
}

/// Measurement noise standard deviations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseLevel {
    pub label: String,
    pub sigma_az_deg: f64,
    pub sigma_el_deg: f64,
    pub sigma_rr_kms: f64,
}

impl NoiseLevel {
    /// Rung `k` (1..=10) of the ladder running from (10 mdeg, 10 mdeg,
    /// 0.1 m/s) to (100 mdeg, 100 mdeg, 1 m/s).
    pub fn ladder(k: u32) -> Result<NoiseLevel, SimError> {
        if !(1..=10).contains(&k) {
            return Err(SimError::InvalidSpec(format!("noise rung k{k} outside k1..k10")));
        }
        let k = k as f64;
        Ok(NoiseLevel {
            label: format!("k{}", k as u32),
            sigma_az_deg: 0.01 * k,
            sigma_el_deg: 0.01 * k,
            sigma_rr_kms: 1e-4 * k,
        })
    }

    /// Parses labels `k1` .. `k10`.
    pub fn from_label(s: &str) -> Result<NoiseLevel, SimError> {
        let k: u32 = s
            .trim()
            .strip_prefix('k')
            .and_then(|x| x.parse().ok())
            .ok_or_else(|| SimError::InvalidSpec(format!("bad noise label {s:?}")))?;
        NoiseLevel::ladder(k)
    }

    fn validate(&self) -> Result<(), SimError> {
        if self.sigma_az_deg > 0.0 && self.sigma_el_deg > 0.0 && self.sigma_rr_kms > 0.0 {
            Ok(())
        } else {
            Err(SimError::InvalidSpec("noise sigmas must be positive".into()))
        }
    }
}

/// One pass to simulate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassSpec {
    /// Osculating elements at `epoch`.
    pub elements: ClassicalElements,
    pub epoch: Epoch,
    pub geometry: RadarGeometry,
    /// Sampling interval, s.
    pub ts: f64,
    /// Minimum elevation at both sites, deg.
    pub mask_deg: f64,
    /// Declared measurement noise; also injected unless `noiseless`.
    pub noise: NoiseLevel,
    #[serde(default)]
    pub noiseless: bool,
    /// Observed arc as a fraction of the period; the whole first pass when absent.
    #[serde(default)]
    pub arc_fraction: Option<f64>,
    #[serde(default = "default_window")]
    pub search_window_s: f64,
    /// Transmitter illumination sector; any direction above the mask when absent.
    #[serde(default)]
    pub sector: Option<Sector>,
    pub seed: u64,
}

/// Azimuth/elevation fan illuminated by the transmitter, degrees. Azimuths
/// run clockwise from `az_min` to `az_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sector {
    pub az_min: f64,
    pub az_max: f64,
    pub el_min: f64,
    pub el_max: f64,
}

impl Sector {
    /// A southern fan at low to moderate elevation, loosely modelled on a
    /// continuous-wave surveillance transmitter.
    pub fn southern_fan() -> Sector {
        Sector {
            az_min: 90.0,
            az_max: 270.0,
            el_min: 15.0,
            el_max: 40.0,
        }
    }

    pub fn contains(&self, az_deg: f64, el_deg: f64) -> bool {
        let span = crate::astro::wrap_deg(self.az_max - self.az_min);
        let off = crate::astro::wrap_deg(az_deg - self.az_min);
        off <= span && el_deg >= self.el_min && el_deg <= self.el_max
    }
}

fn default_window() -> f64 {
    86_400.0
}

impl PassSpec {
    pub fn new(elements: ClassicalElements, noise: NoiseLevel, seed: u64) -> PassSpec {
        PassSpec {
            elements,
            epoch: Epoch::new(0.0),
            geometry: RadarGeometry::graves_like(),
            ts: 5.0,
            mask_deg: 10.0,
            noise,
            noiseless: false,
            arc_fraction: None,
            search_window_s: default_window(),
            sector: None,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.ts > 0.0) {
            return Err(SimError::InvalidSpec("sampling time must be positive".into()));
        }
        if !(self.search_window_s > 0.0) {
            return Err(SimError::InvalidSpec("search window must be positive".into()));
        }
        if let Some(f) = self.arc_fraction {
            if !(f > 0.0 && f < 1.0) {
                return Err(SimError::InvalidSpec(format!("arc fraction {f} outside (0, 1)")));
            }
        }
        self.noise.validate()?;
        self.geometry.validate()?;
        Ok(())
    }
}

/// Ground truth of a simulated pass, at the first observation epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassTruth {
    pub epoch: Epoch,
    pub state: StateVector,
    pub elements: ReducedElements,
    pub period_s: f64,
    pub arc_fraction: f64,
    pub n_obs: usize,
    /// Noiseless receiver slant ranges at the first and last epochs, km.
    pub rho_first: f64,
    pub rho_last: f64,
}

struct Observation {
    az: f64,
    el: f64,
    az_tx: f64,
    el_tx: f64,
    rr: f64,
    range: f64,
}

/// Noiseless observables of `x` at `t`; angles in degrees.
fn observe(x: &StateVector, geom: &RadarGeometry, t: Epoch) -> Result<Observation, SimError> {
    let earth = &geom.earth;
    let rx = geom.receiver_state(t).r;
    let tx = geom.transmitter_state(t).r;
    let rel = v3::sub(&x.r, &rx);
    let (az, el) = los_to_azel(&Vec3(v3::unit(&rel)), &earth.enu_basis(&geom.receiver, t));
    let (az_tx, el_tx) = los_to_azel(
        &Vec3(v3::unit(&v3::sub(&x.r, &tx))),
        &earth.enu_basis(&geom.transmitter, t),
    );
    let (_, rr) = slant_range_rate_real(x, geom, t)?;
    Ok(Observation {
        az: crate::astro::wrap_deg(az.to_degrees()),
        el: el.to_degrees(),
        az_tx: crate::astro::wrap_deg(az_tx.to_degrees()),
        el_tx: el_tx.to_degrees(),
        rr,
        range: v3::norm(&rel),
    })
}

/// Simulates one pass and returns the track with its truth record.
pub fn generate_pass(spec: &PassSpec) -> Result<(RawTrack, PassTruth), SimError> {
    spec.validate()?;
    let x0 = classical_to_cart(&spec.elements, MU_EARTH)?;
    let period = spec.elements.period(MU_EARTH);
    let geom = &spec.geometry;
    let state_at = |t: Epoch| kepler_propagate(&x0, t - spec.epoch, MU_EARTH);
    let visible = |t: Epoch| -> Result<bool, SimError> {
        let o = observe(&state_at(t)?, geom, t)?;
        let lit = spec.sector.is_none_or(|s| s.contains(o.az_tx, o.el_tx));
        Ok(o.el >= spec.mask_deg && o.el_tx >= spec.mask_deg && lit)
    };
    let edge = |mut a: Epoch, mut b: Epoch, a_vis: bool| -> Result<Epoch, SimError> {
        for _ in 0..40 {
            let m = a + 0.5 * (b - a);
            if visible(m)? == a_vis {
                a = m;
            } else {
                b = m;
            }
        }
        Ok(if a_vis { a } else { b })
    };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let step = 10.0;
    let end = spec.epoch + spec.search_window_s;
    let mut t = spec.epoch;
    let mut prev = visible(t)?;
    let mut start = if prev { Some(t) } else { None };
    let mut window = None;
    while t.seconds < end.seconds {
        let tn = t + step;
        let vis = visible(tn)?;
        if vis && !prev {
            start = Some(edge(t, tn, false)?);
        } else if !vis && prev {
            let s = start.take().unwrap_or(spec.epoch);
            let e = edge(t, tn, true)?;
            let need = spec.arc_fraction.map_or(2.0 * spec.ts, |f| f * period);
            if e - s >= need {
                window = Some((s, e));
                break;
            }
        }
        prev = vis;
        t = tn;
    }
    let (ws, we) = window.ok_or(SimError::NoVisibility)?;
    let (t1, dur) = match spec.arc_fraction {
        Some(f) => {
            let d = f * period;
            let slack = (we - ws) - d;
            (ws + rng.random_range(0.0..=slack.max(0.0)), d)
        }
        None => (ws, we - ws),
    };
    let n = (dur / spec.ts + 1e-9).floor() as usize + 1;
    if n < 3 {
        return Err(SimError::InvalidSpec(format!(
            "arc of {dur:.1} s gives only {n} samples at {} s",
            spec.ts
        )));
    }
    let noise = &spec.noise;
    let na = Normal::new(0.0, noise.sigma_az_deg).unwrap();
    let ne = Normal::new(0.0, noise.sigma_el_deg).unwrap();
    let nr = Normal::new(0.0, noise.sigma_rr_kms).unwrap();
    let mut obs = Vec::with_capacity(n);
    let mut rho = Vec::with_capacity(n);
    for i in 0..n {
        let ti = t1 + spec.ts * i as f64;
        let Observation { az, el, rr, range, .. } = observe(&state_at(ti)?, geom, ti)?;
        let (da, de, dr) = if spec.noiseless {
            (0.0, 0.0, 0.0)
        } else {
            (na.sample(&mut rng), ne.sample(&mut rng), nr.sample(&mut rng))
        };
        obs.push(RawObs {
            epoch: ti,
            az_deg: crate::astro::wrap_deg(az + da),
            el_deg: el + de,
            rr_kms: rr + dr,
            sigma_az_deg: noise.sigma_az_deg,
            sigma_el_deg: noise.sigma_el_deg,
            sigma_rr_kms: noise.sigma_rr_kms,
        });
        rho.push(range);
    }
    let x1 = state_at(t1)?;
    let truth = PassTruth {
        epoch: t1,
        state: x1,
        elements: cart_to_reduced(&x1, MU_EARTH)?,
        period_s: period,
        arc_fraction: (obs[n - 1].epoch - t1) / period,
        n_obs: n,
        rho_first: rho[0],
        rho_last: rho[n - 1],
    };
    Ok((
        RawTrack {
            geometry: *geom,
            obs,
        },
        truth,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn leo() -> ClassicalElements {
        ClassicalElements {
            a: 7000.0,
            e: 0.001,
            i: 75.0,
            raan: 30.0,
            argp: 10.0,
            nu: 20.0,
        }
    }

    #[test]
    fn ladder_values() {
        let k3 = NoiseLevel::ladder(3).unwrap();
        assert!((k3.sigma_az_deg - 0.03).abs() < 1e-15);
        assert!((k3.sigma_rr_kms - 3e-4).abs() < 1e-15);
        assert_eq!(NoiseLevel::from_label("k10").unwrap().label, "k10");
        assert!(NoiseLevel::ladder(11).is_err());
        assert!(NoiseLevel::from_label("x2").is_err());
    }

    #[test]
    fn pass_respects_mask_and_arc() {
        let mut s = PassSpec::new(leo(), NoiseLevel::ladder(1).unwrap(), 3);
        s.arc_fraction = Some(0.02);
        let (track, truth) = generate_pass(&s).unwrap();
        assert!((truth.arc_fraction - 0.02).abs() < s.ts / truth.period_s);
        assert_eq!(track.obs.len(), truth.n_obs);
        track.validate().unwrap();
        assert!(track.obs.iter().all(|o| o.el_deg > s.mask_deg - 0.1));
    }

    #[test]
    fn zenith_mask_has_no_visibility() {
        let mut s = PassSpec::new(leo(), NoiseLevel::ladder(1).unwrap(), 3);
        s.mask_deg = 90.0;
        assert_eq!(generate_pass(&s).unwrap_err(), SimError::NoVisibility);
    }

    #[test]
    fn noiseless_pass_is_geometric() {
        let mut s = PassSpec::new(leo(), NoiseLevel::ladder(5).unwrap(), 3);
        s.noiseless = true;
        s.arc_fraction = Some(0.01);
        let (track, truth) = generate_pass(&s).unwrap();
        let g = observe(&truth.state, &s.geometry, truth.epoch).unwrap();
        let o = track.obs[0];
        assert_eq!((o.az_deg, o.el_deg, o.rr_kms), (g.az, g.el, g.rr));
        assert_eq!(g.range, truth.rho_first);
    }
}
