use rand_distr::{Distribution, Normal};
use statrs::distribution::{ContinuousCDF, Normal as NormalDist};

use super::{
    check_iota, epoch_rng, summarize_directions, MeasError, PolarObs, PolarTrack, RawTrack,
};
use crate::astro::azel_to_los;

/// `z` with `P(|Z| ≤ z) = iota` for a standard normal `Z`.
pub fn normal_two_sided_quantile(iota: f64) -> f64 {
    NormalDist::standard().inverse_cdf(0.5 * (1.0 + iota))
}

/// Monte Carlo mapping of azimuth/elevation noise to right ascension and
/// declination; range rate is passed through with a normal-quantile CI.
pub fn mc_raw_processing(
    track: &RawTrack,
    iota: f64,
    n_mc: usize,
    seed: u64,
) -> Result<PolarTrack, MeasError> {
    check_iota(iota)?;
    if n_mc < 100 {
        return Err(MeasError::TooFewSamples(n_mc));
    }
    track.validate()?;
    let k = normal_two_sided_quantile(iota);
    let earth = &track.geometry.earth;
    let site = &track.geometry.receiver;
    let mut out = Vec::with_capacity(track.obs.len());
    for (i, o) in track.obs.iter().enumerate() {
        let enu = earth.enu_basis(site, o.epoch);
        let mut rng = epoch_rng(seed, i);
        let na = Normal::new(o.az_deg, o.sigma_az_deg).unwrap();
        let ne = Normal::new(o.el_deg, o.sigma_el_deg).unwrap();
        let samples: Vec<[f64; 3]> = (0..n_mc)
            .map(|_| {
                let a: f64 = na.sample(&mut rng);
                let e: f64 = ne.sample(&mut rng);
                azel_to_los(&a.to_radians(), &e.to_radians(), &enu).0
            })
            .collect();
        let centre = azel_to_los(&o.az_deg.to_radians(), &o.el_deg.to_radians(), &enu).0;
        let (ra, dec, ci_ra, ci_dec) = summarize_directions(&centre, &samples, iota);
        out.push(PolarObs {
            epoch: o.epoch,
            ra_deg: ra,
            dec_deg: dec,
            rr_kms: o.rr_kms,
            ci_ra_deg: ci_ra,
            ci_dec_deg: ci_dec,
            ci_rr_kms: k * o.sigma_rr_kms,
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
