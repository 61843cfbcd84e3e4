use std::f64::consts::{PI, TAU};
use std::time::Instant;

use loewner::diagnostics::{
    check_hypotheses, driver_sqrt_norm, estimate_h, fit_growth, h_integrand, hypothesis, DiagnosticsConfig,
    GrowthConfig, GrowthKind, HGrid, Verdict,
};
use loewner::driving::{standard_catalogue, Driver, DrivingTerm, SelfMap};
use loewner::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn sector_h_is_twice_alpha() {
    for alpha in [0.25, 0.5, 0.75] {
        let start = Instant::now();
        let term = DrivingTerm::sector_with_alpha(alpha).unwrap();
        let h = estimate_h(&term, 0.0, HGrid::default()).unwrap();
        println!("alpha={alpha} H={} converged={} in {:?}", h.value, h.converged, start.elapsed());
        assert!((h.value - 2.0 * alpha).abs() / (2.0 * alpha) <= 0.02);
        assert!(h.converged);
    }
}

#[test]
fn strip_h_matches_reduced_expression() {
    let (a, b) = (0.5, 2.0);
    let delta = PI * (b + a) / (b - a);
    // independent sup over x = 2 r sin(psi) / (1 - r^2) on a 512 x 512 grid
    let mut oracle = 0.0f64;
    for i in 0..512 {
        let r = (1.0 - 1e-6) * (i as f64 + 0.5) / 512.0;
        for j in 0..512 {
            let psi = TAU * j as f64 / 512.0;
            let x = 2.0 * r * psi.sin() / (1.0 - r * r);
            oracle = oracle.max(2.0 / ((1.0 + x * x).sqrt() * (x.atan() + delta)));
        }
    }
    let term = DrivingTerm::strip(a, b).unwrap();
    let h = estimate_h(&term, 0.0, HGrid::default()).unwrap();
    println!("strip H={} oracle={oracle}", h.value);
    assert!((h.value - oracle).abs() <= 2e-3 * oracle);
}

#[test]
fn half_plane_est1_exponent_is_one_half() {
    let start = Instant::now();
    let term = DrivingTerm::half_plane(0.3).unwrap();
    let fit = fit_growth(&term, GrowthKind::Est1, 0.0, GrowthConfig::default()).unwrap();
    println!("{fit:?} in {:?}", start.elapsed());
    assert!((fit.alpha - 0.5).abs() <= 0.05);
}

#[test]
fn sector_est2_exponent_is_alpha() {
    let term = DrivingTerm::sector(1.0).unwrap();
    let fit = fit_growth(&term, GrowthKind::Est2, 0.0, GrowthConfig::default()).unwrap();
    println!("{fit:?}");
    assert!((fit.alpha - 0.5).abs() <= 0.05);
    assert!(fit.satisfied);
    // lower bound (1-r)^α / (1+r)^α on sampled points
    for i in 0..200 {
        let r = 0.9 + 0.0999 * i as f64 / 199.0;
        for j in 0..64 {
            let z = Complex64::from_polar(r, TAU * j as f64 / 64.0);
            let re = term.evaluate(z, 0.0).unwrap().re;
            assert!(re >= ((1.0 - r) / (1.0 + r)).powf(0.5) * (1.0 - 1e-12));
        }
    }
}

fn quick_cfg() -> DiagnosticsConfig {
    DiagnosticsConfig { h_grid: HGrid { n_r: 128, n_theta: 128, polish: 8, refine: false }, ..Default::default() }
}

#[test]
fn hypothesis_examples() {
    let hp = check_hypotheses(&DrivingTerm::half_plane(0.3).unwrap(), &quick_cfg()).unwrap();
    match &hp[hypothesis::REAL_PART_LOWER_BOUND] {
        Verdict::HoldsOnGrid { extrema } => assert!(extrema["min_re_p"] >= 0.3),
        v => panic!("{v:?}"),
    }
    assert!(hp[hypothesis::INVERSE_CONTINUITY].holds(), "{:?}", hp[hypothesis::INVERSE_CONTINUITY]);
    assert!(!hp[hypothesis::BOUNDED_ARGUMENT].holds());

    let sector = check_hypotheses(&DrivingTerm::sector(1.0).unwrap(), &quick_cfg()).unwrap();
    match &sector[hypothesis::BOUNDED_ARGUMENT] {
        Verdict::HoldsOnGrid { extrema } => assert!((extrema["max_arg_ratio"] - 1.0).abs() < 1e-3),
        v => panic!("{v:?}"),
    }
    assert!(sector[hypothesis::HOLDER_BOUNDARY].holds());
    assert!(!sector[hypothesis::REAL_PART_LOWER_BOUND].holds());

    let kernel = DrivingTerm::point_kernel(Driver::Constant { angle: 0.0 }).unwrap();
    let pk = check_hypotheses(&kernel, &quick_cfg()).unwrap();
    match &pk[hypothesis::REAL_PART_STRIP] {
        Verdict::FailsAt { z: Some(z), .. } => assert!((z - 1.0).norm() < 1e-3, "{z}"),
        v => panic!("{v:?}"),
    }
    assert!(pk[hypothesis::DRIVER_QUASISLIT].holds());
    // Re p grows without bound along the real axis
    let re: Vec<f64> = [0.9, 0.99, 0.999, 0.9999]
        .iter()
        .map(|r| kernel.evaluate(Complex64::new(*r, 0.0), 0.0).unwrap().re)
        .collect();
    assert!(re.windows(2).all(|w| w[1] > 5.0 * w[0]));

    let strip = check_hypotheses(&DrivingTerm::strip(0.5, 2.0).unwrap(), &quick_cfg()).unwrap();
    assert!(strip[hypothesis::REAL_PART_STRIP].holds(), "{:?}", strip[hypothesis::REAL_PART_STRIP]);
    assert!(matches!(strip[hypothesis::DRIVER_QUASISLIT], Verdict::NotApplicable { .. }));
}

#[test]
fn inverse_continuity_verdict_tracks_growth_fits() {
    let cfg = quick_cfg();
    for term in standard_catalogue() {
        let report = loewner::diagnostics::diagnose(&term, &cfg).unwrap();
        let alpha = report.est1.alpha.max(report.est2.alpha);
        let both = report.est1.satisfied && report.est2.satisfied && alpha < 1.0 - cfg.alpha_slack;
        assert_eq!(report.hypotheses[hypothesis::INVERSE_CONTINUITY].holds(), both, "{term}");
        println!("{term}: est1 {:?} est2 {:?}", report.est1, report.est2);
    }
}

#[test]
fn derivative_ratio_respects_h_link() {
    for term in standard_catalogue() {
        let h = estimate_h(&term, 0.0, HGrid { n_r: 128, n_theta: 128, polish: 8, refine: false }).unwrap();
        let slack = 1e-3;
        for i in 0..100 {
            let r = 0.9 + (0.0999 - 1e-6) * i as f64 / 99.0;
            for j in 0..128 {
                let z = Complex64::from_polar(r, TAU * j as f64 / 128.0);
                let (p, dp) = term.evaluate_with_derivative(z, 0.0).unwrap();
                let lhs = (z * dp).re / (r * p.re);
                let rhs = (h.value + slack) * (2.0 / (1.0 + r)) / (2.0 * (1.0 - r));
                assert!(lhs <= rhs, "{term} at {z}: {lhs} > {rhs}");
            }
        }
    }
}

#[test]
fn schwarz_monotonicity_sample() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let grid = HGrid::default();
    let start = Instant::now();
    for term in standard_catalogue() {
        let base = estimate_h(&term, 0.0, grid).unwrap().value;
        for _ in 0..3 {
            let map = SelfMap::Rotation { angle: rng.random_range(0.0..TAU) };
            let composed = DrivingTerm::composed(term.clone(), map).unwrap();
            let h = estimate_h(&composed, 0.0, grid).unwrap().value;
            assert!(h <= base + 1e-3, "{term}: {h} > {base}");
        }
    }
    println!("elapsed {:?}", start.elapsed());
}

#[test]
fn sqrt_time_driver_norm_is_one() {
    let samples: Vec<(f64, f64)> = (0..=4000).map(|i| {
        let t = i as f64 / 4000.0;
        (t, t.sqrt())
    }).collect();
    for window in [0.01, 0.1, 1.5] {
        let n = driver_sqrt_norm(&samples, window);
        assert!((n.value - 1.0).abs() <= 0.05, "{window}: {}", n.value);
    }
}

#[test]
fn h_integrand_is_finite_on_catalogue() {
    for term in standard_catalogue() {
        for j in 0..64 {
            let z = Complex64::from_polar(1.0 - 1e-6, TAU * j as f64 / 64.0);
            assert!(h_integrand(&term, z, 0.0).unwrap().is_finite());
        }
    }
}
