use daiod::astro::{classical_to_cart, kepler_propagate, ClassicalElements, StateVector, MU_EARTH};
use daiod::da::TaylorPoly;
use daiod::iod::{lambert_solve, TransferDirection};
use daiod::scalar::v3;
use daiod::Vec3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random LEO state and a time of flight giving a transfer angle in [5°, 170°].
fn random_case(rng: &mut ChaCha8Rng) -> (StateVector, StateVector, f64) {
    loop {
        let el = ClassicalElements {
            a: rng.random_range(6700.0..8000.0),
            e: rng.random_range(0.0..0.05),
            i: rng.random_range(0.0..180.0),
            raan: rng.random_range(0.0..360.0),
            argp: rng.random_range(0.0..360.0),
            nu: rng.random_range(0.0..360.0),
        };
        let x0 = classical_to_cart(&el, MU_EARTH).unwrap();
        let period = el.period(MU_EARTH);
        let dt = rng.random_range(0.015..0.47) * period;
        let x1 = kepler_propagate(&x0, dt, MU_EARTH).unwrap();
        let ang = v3::dot(&v3::unit(&x0.r), &v3::unit(&x1.r)).clamp(-1.0, 1.0).acos().to_degrees();
        if (5.0..=170.0).contains(&ang) {
            return (x0, x1, dt);
        }
    }
}

fn rel(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    v3::norm(&v3::sub(a, b)) / v3::norm(b)
}

#[test]
fn lambert_recovers_kepler_velocities() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (x0, x1, dt) = random_case(&mut rng);
        let dir = TransferDirection::Along(x0.angular_momentum());
        let sol = lambert_solve(&Vec3(x0.r), &Vec3(x1.r), dt, MU_EARTH, dir).unwrap();
        worst = worst.max(rel(&sol.v1.0, &x0.v)).max(rel(&sol.v2.0, &x1.v));
        // and the solution propagates back onto the endpoint
        let y = kepler_propagate(&StateVector::new(x0.r, sol.v1.0), dt, MU_EARTH).unwrap();
        assert!(v3::norm(&v3::sub(&y.r, &x1.r)) < 1e-8 * 1e3);
    }
    assert!(worst <= 1e-9, "worst relative velocity error {worst:e}");
}

#[test]
fn da_lambert_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..50 {
        let (x0, x1, dt) = random_case(&mut rng);
        let dir = TransferDirection::Along(x0.angular_momentum());
        // radial scaling of both endpoints: r1*(1 + eps dx0), r2*(1 + eps dx1)
        let eps = 1e-3;
        let k = 3;
        let s1 = TaylorPoly::variable(1.0, 0, eps, 2, k).unwrap();
        let s2 = TaylorPoly::variable(1.0, 1, eps, 2, k).unwrap();
        let r1 = Vec3(x0.r.map(|c| &s1 * c));
        let r2 = Vec3(x1.r.map(|c| &s2 * c));
        let da = lambert_solve(&r1, &r2, dt, MU_EARTH, dir).unwrap();
        let real = lambert_solve(&Vec3(x0.r), &Vec3(x1.r), dt, MU_EARTH, dir).unwrap();
        for i in 0..3 {
            let c = da.v1[i].constant_part();
            assert!((c - real.v1[i]).abs() <= 1e-13 * v3::norm(&real.v1.0));
        }
        for var in 0..2 {
            let h = 1e-6;
            let solve_at = |d: f64| {
                let (a, b) = if var == 0 { (1.0 + eps * d, 1.0) } else { (1.0, 1.0 + eps * d) };
                lambert_solve(&Vec3(v3::scale(&x0.r, a)), &Vec3(v3::scale(&x1.r, b)), dt, MU_EARTH, dir).unwrap()
            };
            let p = solve_at(h);
            let m = solve_at(-h);
            let mut exps = [0u8; 2];
            exps[var] = 1;
            let scale = v3::norm(&real.v1.0);
            for i in 0..3 {
                let fd = (p.v1[i] - m.v1[i]) / (2.0 * h);
                let got = da.v1[i].coeff(&exps);
                assert!(
                    (got - fd).abs() <= 1e-5 * fd.abs().max(1e-3 * scale),
                    "component {i} var {var}: {got} vs {fd}"
                );
            }
        }
    }
}

#[test]
fn da_lambert_higher_orders_track_the_real_solver() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (x0, x1, dt) = random_case(&mut rng);
    let dir = TransferDirection::Along(x0.angular_momentum());
    // position deviations of up to 5 km on each endpoint coordinate
    let k = 5;
    let r1 = Vec3(std::array::from_fn(|i| TaylorPoly::variable(x0.r[i], i, 5.0, 6, k).unwrap()));
    let r2 = Vec3(std::array::from_fn(|i| TaylorPoly::variable(x1.r[i], 3 + i, 5.0, 6, k).unwrap()));
    let da = lambert_solve(&r1, &r2, dt, MU_EARTH, dir).unwrap();
    for _ in 0..20 {
        let d: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
        let p1 = std::array::from_fn(|i| x0.r[i] + 5.0 * d[i]);
        let p2 = std::array::from_fn(|i| x1.r[i] + 5.0 * d[3 + i]);
        let real = lambert_solve(&Vec3(p1), &Vec3(p2), dt, MU_EARTH, dir).unwrap();
        for i in 0..3 {
            let got = da.v1[i].eval(&d).unwrap();
            assert!((got - real.v1[i]).abs() < 1e-8, "{got} vs {}", real.v1[i]);
        }
    }
}
