use daiod::astro::{angle_diff_deg, azel_to_los, los_to_taos_angles, taos_frame, ClassicalElements};
use daiod::measproc::*;
use daiod::sim::{generate_pass, NoiseLevel, PassSpec};
use daiod::Vec3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

mod common;
use common::*;

#[test]
fn t_quantile_matches_quadrature_inversion() {
    for nu in [1, 2, 3, 5, 10, 30] {
        for iota in [0.9, 0.95, 0.997] {
            let q = student_t_two_sided_quantile(iota, nu);
            let o = t_quantile_oracle(iota, nu);
            assert!((q - o).abs() <= 1e-6, "nu {nu} iota {iota}: {q} vs {o}");
        }
    }
    assert!((student_t_two_sided_quantile(0.95, 10) - 2.2281).abs() < 1e-4);
}

#[test]
fn quantiles_reach_normal_limit() {
    assert!((normal_two_sided_quantile(0.95) - 1.959964).abs() < 1e-6);
    // first-order expansion: q_ν ≈ z + (z³ + z) / (4ν)
    let z = 1.959964;
    for nu in [1_000, 100_000] {
        let expect = z + (z * z * z + z) / (4.0 * nu as f64);
        let q = student_t_two_sided_quantile(0.95, nu);
        assert!((q - expect).abs() < 1e-5, "nu {nu}: {q} vs {expect}");
    }
}

#[test]
fn constant_fit_is_mean_and_variance() {
    let y = [2.0, 4.0, 4.0, 5.0, 7.0];
    let t = [0.0, 1.0, 2.0, 3.0, 4.0];
    let f = fit_regression(&y, &t, 2.0, 0).unwrap();
    assert!((f.coeffs[0] - 4.4).abs() < 1e-12);
    let var = y.iter().map(|v| (v - 4.4f64).powi(2)).sum::<f64>() / 4.0;
    assert!((f.sigma2 - var).abs() < 1e-12);
}

#[test]
fn zero_residual_variance_gives_zero_widths() {
    let t: Vec<f64> = (0..8).map(|i| i as f64).collect();
    let y: Vec<f64> = t.iter().map(|x| 3.0 - 2.0 * x).collect();
    let f = fit_regression(&y, &t, 3.5, 1).unwrap();
    assert!(f.residuals.iter().all(|r| r.abs() < 1e-12));
    assert!(f.sigma2 < 1e-25);
    assert!(regression_ci(&f, 0.997).unwrap().iter().all(|c| *c < 1e-10));
}

#[test]
fn residuals_are_orthogonal_to_design() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for order in 0..5 {
        let (t, _, y) = noisy_quadratic(40, 1e-3, &mut rng);
        let t0 = 97.5;
        let f = fit_regression(&y, &t, t0, order).unwrap();
        let span = 97.5;
        for j in 0..=order {
            let col: Vec<f64> = t.iter().map(|x| ((x - t0) / span).powi(j as i32)).collect();
            let dot: f64 = col.iter().zip(&f.residuals).map(|(a, r)| a * r).sum();
            let scale: f64 = col.iter().zip(&y).map(|(a, v)| (a * v).abs()).sum();
            assert!(dot.abs() <= 1e-9 * scale, "order {order} column {j}: {dot}");
        }
    }
}

/// Normal equations solved by Gaussian elimination with partial pivoting.
fn normal_equations(y: &[f64], t: &[f64], t0: f64, order: usize) -> Vec<f64> {
    let p = order + 1;
    let mut m = vec![vec![0.0; p + 1]; p];
    for (yi, ti) in y.iter().zip(t) {
        let row: Vec<f64> = (0..p).map(|j| (ti - t0).powi(j as i32)).collect();
        for a in 0..p {
            for b in 0..p {
                m[a][b] += row[a] * row[b];
            }
            m[a][p] += row[a] * yi;
        }
    }
    for c in 0..p {
        let piv = (c..p).max_by(|&a, &b| m[a][c].abs().partial_cmp(&m[b][c].abs()).unwrap()).unwrap();
        m.swap(c, piv);
        for r in c + 1..p {
            let f = m[r][c] / m[c][c];
            for k in c..=p {
                m[r][k] -= f * m[c][k];
            }
        }
    }
    let mut x = vec![0.0; p];
    for c in (0..p).rev() {
        let s: f64 = (c + 1..p).map(|k| m[c][k] * x[k]).sum();
        x[c] = (m[c][p] - s) / m[c][c];
    }
    x
}

#[test]
fn qr_matches_normal_equations() {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..50 {
        let n = rng.random_range(6..30);
        let order = rng.random_range(0..3);
        let t: Vec<f64> = (0..n).map(|i| i as f64 * 0.1 + rng.random_range(0.0..0.05)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let t0 = t[n / 2];
        let f = fit_regression(&y, &t, t0, order).unwrap();
        let o = normal_equations(&y, &t, t0, order);
        for (a, b) in f.coeffs.iter().zip(&o) {
            assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0), "{a} vs {b}");
        }
    }
}

#[test]
fn regression_ci_covers_truth() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let reps = 1000;
    for iota in [0.95, 0.997] {
        let mut hit = 0;
        for _ in 0..reps {
            let (t, truth, y) = noisy_quadratic(20, 1e-3, &mut rng);
            let f = fit_regression(&y, &t, 47.5, 2).unwrap();
            let ci = regression_ci(&f, iota).unwrap();
            let m = 9;
            if (f.fitted[m] - truth[m]).abs() <= ci[m] {
                hit += 1;
            }
        }
        let rate = hit as f64 / reps as f64;
        assert!(rate >= coverage_bound(iota, reps), "iota {iota}: {rate}");
    }
}

#[test]
fn raw_ci_covers_truth_per_angle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let reps = 1000;
    let iota = 0.997;
    let (az, el) = (150.0, 35.0);
    let (mut hr, mut hd, mut hrr) = (0, 0, 0);
    for k in 0..reps {
        let track = single_site_track(az, el, 0.05, &mut rng);
        let (ra, dec) = true_radec(&track, az, el);
        let p = mc_raw_processing(&track, iota, 1000, k as u64).unwrap();
        let o = &p.obs[0];
        hr += (angle_diff_deg(o.ra_deg, ra).abs() <= o.ci_ra_deg) as usize;
        hd += ((o.dec_deg - dec).abs() <= o.ci_dec_deg) as usize;
        hrr += ((o.rr_kms - 1.0).abs() <= o.ci_rr_kms) as usize;
    }
    let bound = coverage_bound(iota, reps);
    for (name, h) in [("ra", hr), ("dec", hd), ("rr", hrr)] {
        let rate = h as f64 / reps as f64;
        assert!(rate >= bound, "{name}: {rate} < {bound}");
    }
}

#[test]
fn standard_errors_shrink_as_inverse_root_n() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let ns = [20usize, 40, 80];
    let mut logs = Vec::new();
    for &n in &ns {
        let mut acc = 0.0;
        let reps = 200;
        for _ in 0..reps {
            let noise = Normal::new(0.0, 1e-3).unwrap();
            // fixed 100 s arc sampled more densely
            let t: Vec<f64> = (0..n).map(|i| 100.0 * i as f64 / (n - 1) as f64).collect();
            let y: Vec<f64> = t.iter().map(|x| 1e-3 * x + noise.sample(&mut rng)).collect();
            let f = fit_regression(&y, &t, 50.0, 2).unwrap();
            acc += (0..n).map(|i| f.cov_fitted[(i, i)].sqrt()).sum::<f64>() / n as f64;
        }
        logs.push(((n as f64).ln(), (acc / reps as f64).ln()));
    }
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / 3.0;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / 3.0;
    let slope = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / logs.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((slope + 0.5).abs() < 0.05, "slope {slope}");
}

fn leo() -> ClassicalElements {
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
fn noiseless_angles_fit_well_below_noise() {
    let mut s = PassSpec::new(leo(), NoiseLevel::ladder(1).unwrap(), 3);
    s.arc_fraction = Some(0.01);
    s.noiseless = true;
    let (track, _) = generate_pass(&s).unwrap();
    let g = &track.geometry;
    let los: Vec<[f64; 3]> = track
        .obs
        .iter()
        .map(|o| {
            let enu = g.earth.enu_basis(&g.receiver, o.epoch);
            azel_to_los(&o.az_deg.to_radians(), &o.el_deg.to_radians(), &enu).0
        })
        .collect();
    let n = los.len();
    let frame = taos_frame(&los[0], &los[n - 1]).unwrap();
    let (lam, gam): (Vec<f64>, Vec<f64>) = los.iter().map(|l| los_to_taos_angles(&Vec3(*l), &frame)).unzip();
    let t: Vec<f64> = track.obs.iter().map(|o| o.epoch - track.obs[0].epoch).collect();
    let t0 = 0.5 * t[n - 1];
    // a fixed quadratic stays within 1e-3 of the angle swept by the LOS
    let sweep = los[0].iter().zip(&los[n - 1]).map(|(a, b)| a * b).sum::<f64>().clamp(-1.0, 1.0).acos();
    for v in [&lam, &gam] {
        let f = fit_regression(v, &t, t0, 2).unwrap();
        let worst = f.residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        assert!(worst <= 1e-3 * sweep, "{worst} vs sweep {sweep}");
    }
    // k1 angular sigma in radians
    let sigma = 0.01f64.to_radians();
    for v in [&lam, &gam] {
        let (f, ok) = fit_adaptive(v, &t, t0, 2, 6, sigma * sigma, 0.997).unwrap();
        assert!(ok);
        let worst = f.residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        assert!(worst <= 0.2 * sigma, "order {}: {worst} vs sigma {sigma}", f.order);
    }
}

#[test]
fn regression_narrows_intervals() {
    let mut s = PassSpec::new(leo(), NoiseLevel::ladder(5).unwrap(), 9);
    s.arc_fraction = Some(0.03);
    let (track, _) = generate_pass(&s).unwrap();
    assert!(track.obs.len() >= 20);
    let raw = process_track(&track, &MeasConfig { mode: ProcessingMode::Raw, ..MeasConfig::default() }).unwrap();
    let reg = process_track(&track, &MeasConfig::default()).unwrap();
    let mean = |p: &PolarTrack, f: fn(&PolarObs) -> f64| p.obs.iter().map(f).sum::<f64>() / p.obs.len() as f64;
    assert!(mean(&reg, |o| o.ci_ra_deg) < mean(&raw, |o| o.ci_ra_deg));
    assert!(mean(&reg, |o| o.ci_dec_deg) < mean(&raw, |o| o.ci_dec_deg));
    assert!(mean(&reg, |o| o.ci_rr_kms) < mean(&raw, |o| o.ci_rr_kms));
}

#[test]
fn processing_is_deterministic() {
    let mut s = PassSpec::new(leo(), NoiseLevel::ladder(3).unwrap(), 4);
    s.arc_fraction = Some(0.02);
    let (track, _) = generate_pass(&s).unwrap();
    for mode in [ProcessingMode::Raw, ProcessingMode::Regress] {
        let cfg = MeasConfig { mode, ..MeasConfig::default() };
        assert_eq!(process_track(&track, &cfg).unwrap(), process_track(&track, &cfg).unwrap());
    }
}

#[test]
fn bad_confidence_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let track = single_site_track(100.0, 30.0, 0.01, &mut rng);
    for iota in [0.0, 1.0, -0.5, f64::NAN] {
        let cfg = MeasConfig { iota, ..MeasConfig::default() };
        assert!(matches!(process_track(&track, &cfg), Err(MeasError::InvalidConfidence(_))));
    }
}
