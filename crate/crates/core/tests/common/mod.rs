//! Oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use daiod::astro::{azel_to_los, Epoch, RadarGeometry};
use daiod::measproc::{RawObs, RawTrack};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Student-t density with the normalization built from the recursion
/// Γ((ν+1)/2)/Γ(ν/2) for integer ν.
pub fn t_pdf(x: f64, nu: usize) -> f64 {
    let pi = std::f64::consts::PI;
    let mut r = if nu % 2 == 1 { 1.0 / pi.sqrt() } else { pi.sqrt() / 2.0 };
    let mut k = if nu % 2 == 1 { 1 } else { 2 };
    while k < nu {
        r *= (k as f64 + 1.0) / k as f64;
        k += 2;
    }
    let n = nu as f64;
    r / (n * pi).sqrt() * (1.0 + x * x / n).powf(-(n + 1.0) / 2.0)
}

/// P(|T| ≤ q) by composite Simpson quadrature.
pub fn t_central_mass(q: f64, nu: usize) -> f64 {
    let m = 20_000;
    let h = q / m as f64;
    let mut s = t_pdf(0.0, nu) + t_pdf(q, nu);
    for j in 1..m {
        s += t_pdf(j as f64 * h, nu) * if j % 2 == 1 { 4.0 } else { 2.0 };
    }
    2.0 * s * h / 3.0
}

pub fn t_quantile_oracle(iota: f64, nu: usize) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    while t_central_mass(hi, nu) < iota {
        hi *= 2.0;
    }
    for _ in 0..60 {
        let m = 0.5 * (lo + hi);
        if t_central_mass(m, nu) < iota {
            lo = m;
        } else {
            hi = m;
        }
    }
    0.5 * (lo + hi)
}

pub fn noisy_quadratic(n: usize, sigma: f64, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let noise = Normal::new(0.0, sigma).unwrap();
    let t: Vec<f64> = (0..n).map(|i| 5.0 * i as f64).collect();
    let truth: Vec<f64> = t.iter().map(|x| 0.3 + 2e-3 * x - 4e-6 * x * x).collect();
    let y = truth.iter().map(|v| v + noise.sample(rng)).collect();
    (t, truth, y)
}

pub fn coverage_bound(iota: f64, n: usize) -> f64 {
    iota - 3.0 * (iota * (1.0 - iota) / n as f64).sqrt()
}

pub fn single_site_track(az: f64, el: f64, sigma: f64, rng: &mut ChaCha8Rng) -> RawTrack {
    let n = Normal::new(0.0, sigma).unwrap();
    let obs = (0..3)
        .map(|i| RawObs {
            epoch: Epoch::new(10.0 * i as f64),
            az_deg: az + n.sample(rng),
            el_deg: el + n.sample(rng),
            rr_kms: 1.0 + 1e-4 * n.sample(rng) / sigma,
            sigma_az_deg: sigma,
            sigma_el_deg: sigma,
            sigma_rr_kms: 1e-4,
        })
        .collect();
    RawTrack {
        geometry: RadarGeometry::graves_like(),
        obs,
    }
}

pub fn true_radec(track: &RawTrack, az: f64, el: f64) -> (f64, f64) {
    let g = &track.geometry;
    let enu = g.earth.enu_basis(&g.receiver, track.obs[0].epoch);
    let l = azel_to_los(&az.to_radians(), &el.to_radians(), &enu).0;
    (l[1].atan2(l[0]).to_degrees(), l[2].asin().to_degrees())
}

