use daiod::astro::{ClassicalElements, MU_EARTH};
use daiod::measproc::{process_track, MeasConfig, PolarTrack, RawTrack};
use daiod::pipeline::*;
use daiod::sim::{generate_pass, NoiseLevel, PassSpec, PassTruth};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: [f64; 5] = [0.01, 0.01, 1e-5, 1e-5, 1e-5];

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

/// Declared sigmas tiny enough that the measurement box is a point for
/// the solver's purposes.
fn whisper() -> NoiseLevel {
    NoiseLevel {
        label: "noiseless".into(),
        sigma_az_deg: 1e-7,
        sigma_el_deg: 1e-7,
        sigma_rr_kms: 1e-9,
    }
}

fn pass(noise: NoiseLevel, frac: f64, noiseless: bool, seed: u64) -> (RawTrack, PassTruth) {
    let mut s = PassSpec::new(leo(), noise, seed);
    s.arc_fraction = Some(frac);
    s.noiseless = noiseless;
    generate_pass(&s).unwrap()
}

fn capped() -> PipelineConfig {
    let mut c = PipelineConfig::default();
    c.ads.max_entries = Some(64);
    c
}

fn los(ra: f64, dec: f64) -> [f64; 3] {
    let (ra, dec) = (ra.to_radians(), dec.to_radians());
    [dec.cos() * ra.cos(), dec.cos() * ra.sin(), dec.sin()]
}

#[test]
fn noiseless_pass_recovers_ranges_and_elements() {
    let (track, truth) = pass(whisper(), 0.02, true, 3);
    let mut cfg = PipelineConfig::default();
    cfg.meas.mode = daiod::measproc::ProcessingMode::Raw;
    let os = solve_track(&track, &cfg).unwrap();
    assert!((os.ranges.rho1 - truth.rho_first).abs() <= 1e-3 * truth.rho_first);
    assert!((os.ranges.rho_n - truth.rho_last).abs() <= 1e-3 * truth.rho_last);
    let centre = evaluate_orbit_set(&os, &[0.0; 6]).unwrap();
    let err = centre.abs_error(&truth.elements);
    for q in 0..5 {
        assert!(err[q] <= TOL[q], "element {q}: {:e}", err[q]);
    }
    let d = &os.diagnostics;
    let r = d.outcomes.iter().find(|o| o.corner == d.selected_corner).unwrap().residual.unwrap();
    assert!(r < 1e-6, "R = {r:e}");
}

fn polar_noiseless() -> (PolarTrack, PassTruth) {
    let (track, truth) = pass(whisper(), 0.02, true, 3);
    let cfg = MeasConfig {
        mode: daiod::measproc::ProcessingMode::Raw,
        ..MeasConfig::default()
    };
    (process_track(&track, &cfg).unwrap(), truth)
}

fn refine_from(track: &PolarTrack, seed: (f64, f64)) -> RangePair {
    let n = track.obs.len();
    let (f, l) = (&track.obs[0], &track.obs[n - 1]);
    refine_ranges(
        &track.geometry,
        [f.epoch, l.epoch],
        [los(f.ra_deg, f.dec_deg), los(l.ra_deg, l.dec_deg)],
        [f.rr_kms, l.rr_kms],
        seed,
        &Phase2Config::default(),
        1,
    )
    .unwrap()
}

#[test]
fn true_ranges_are_a_fixed_point() {
    let (track, truth) = polar_noiseless();
    let p = refine_from(&track, (truth.rho_first, truth.rho_last));
    assert!(p.converged);
    assert!(p.iterations <= 2, "{} iterations", p.iterations);
    assert!((p.rho1 - truth.rho_first).abs() < 1e-4);
    assert!((p.rho_n - truth.rho_last).abs() < 1e-4);
}

#[test]
fn perturbed_seed_returns_to_truth() {
    let (track, truth) = polar_noiseless();
    for f in [0.95, 1.05] {
        let p = refine_from(&track, (f * truth.rho_first, f * truth.rho_last));
        assert!(p.converged);
        assert!((p.rho1 - truth.rho_first).abs() < 1e-3, "{} vs {}", p.rho1, truth.rho_first);
        assert!((p.rho_n - truth.rho_last).abs() < 1e-3);
    }
}

fn noisy_set() -> (PolarTrack, OrbitSet, PassTruth) {
    let (track, truth) = pass(NoiseLevel::ladder(1).unwrap(), 0.03, false, 7);
    let cfg = capped();
    let polar = preprocess_track(&track, &cfg).unwrap();
    let os = solve_track(&track, &cfg).unwrap();
    (polar, os, truth)
}

#[test]
fn manifold_matches_pointwise_resolve() {
    let (polar, os, _) = noisy_set();
    let p2 = Phase2Config::default();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut good = 0;
    let total = 100;
    for _ in 0..total {
        let d: [f64; 6] = std::array::from_fn(|_| rng.random_range(-1.0..=1.0));
        let m = evaluate_orbit_set(&os, &d).unwrap();
        let p = pointwise_solve(&os.ranges, &polar, &p2, &d).unwrap();
        let e = m.abs_error(&p);
        if (0..5).all(|q| e[q] <= 10.0 * TOL[q]) {
            good += 1;
        }
    }
    assert!(good as f64 >= 0.95 * total as f64, "{good}/{total}");
}

#[test]
fn bounds_enclose_sampled_evaluations() {
    let (_, os, truth) = noisy_set();
    let b = orbit_set_bounds(&os);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10_000 {
        let d: [f64; 6] = std::array::from_fn(|_| rng.random_range(-1.0..=1.0));
        let el = evaluate_orbit_set(&os, &d).unwrap();
        assert!(b.contains(&el), "{el:?} outside {b:?}");
    }
    assert!(b.contains(&truth.elements));
    assert_eq!(b, os.bounds);
}

#[test]
fn manifold_partitions_the_box() {
    let (_, os, _) = noisy_set();
    assert_eq!(os.manifold.total_volume(), 64.0);
    assert!(os.n_s() >= 1);
}

#[test]
fn orbit_set_json_round_trip() {
    let (_, os, _) = noisy_set();
    let back = OrbitSet::from_json(&os.to_json().unwrap()).unwrap();
    assert_eq!(back.to_json().unwrap(), os.to_json().unwrap());
    let d = [0.3, -0.2, 0.9, -1.0, 0.0, 0.5];
    assert_eq!(evaluate_orbit_set(&back, &d).unwrap(), evaluate_orbit_set(&os, &d).unwrap());
    let mut v: serde_json::Value = serde_json::from_str(&os.to_json().unwrap()).unwrap();
    v["schema"] = "daiod.orbitset/0".into();
    assert!(OrbitSet::from_json(&v.to_string()).is_err());
}

#[test]
fn solving_is_deterministic() {
    let (track, _) = pass(NoiseLevel::ladder(3).unwrap(), 0.02, false, 5);
    let cfg = capped();
    let mut a = solve_track(&track, &cfg).unwrap();
    let mut b = solve_track(&track, &cfg).unwrap();
    a.timing_s = [0.0; 3];
    b.timing_s = [0.0; 3];
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
}

#[test]
fn argmin_survives_uniform_ci_scaling() {
    let (track, _) = pass(NoiseLevel::ladder(5).unwrap(), 0.01, false, 9);
    let polar = process_track(&track, &MeasConfig::default()).unwrap();
    let (_, diag) = phase2_select(&polar, &Phase2Config { agree_km: 0.0, ..Phase2Config::default() }).unwrap();
    let pairs: Vec<&RangePair> = diag.outcomes.iter().filter_map(|o| o.pair.as_ref()).collect();
    assert!(pairs.len() > 1);
    let argmin = |t: &PolarTrack| {
        pairs
            .iter()
            .map(|p| {
                let x = state_from_pair(t, p.rho1, p.rho_n).unwrap();
                (residual(t, &x).unwrap(), p.corner)
            })
            .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
            .unwrap()
            .1
    };
    let base = argmin(&polar);
    assert_eq!(base, diag.selected_corner);
    for f in [0.1, 3.0, 40.0] {
        assert_eq!(argmin(&polar.scaled_ci(f)), base);
    }
}

#[test]
fn long_low_noise_arc_needs_a_single_set() {
    let (track, _) = pass(NoiseLevel::ladder(1).unwrap(), 0.05, false, 3);
    let os = solve_track(&track, &capped()).unwrap();
    assert_eq!(os.n_s(), 1);
}

#[test]
fn centre_only_scan_uses_one_sample() {
    let (track, _) = pass(NoiseLevel::ladder(1).unwrap(), 0.03, false, 7);
    let polar = process_track(&track, &MeasConfig::default()).unwrap();
    let cfg = Phase2Config {
        corner_scan: false,
        ..Phase2Config::default()
    };
    let (pair, diag) = phase2_select(&polar, &cfg).unwrap();
    assert_eq!(diag.outcomes.len(), 1);
    assert_eq!(pair.corner, 1);
    let _ = MU_EARTH;
}
