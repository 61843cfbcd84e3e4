use std::f64::consts::{PI, TAU};
use std::time::Instant;

use loewner::boundary::*;
use loewner::driving::{standard_catalogue, Driver, DrivingTerm};
use loewner::flow::{FlowDirection, FlowField, Tolerances};
use loewner::geometry::first_self_intersection;
use loewner::Complex64;

fn forward(term: DrivingTerm, horizon: f64) -> FlowField {
    FlowField::new(term, FlowDirection::Forward, horizon).unwrap()
}

fn constant() -> DrivingTerm {
    DrivingTerm::constant(Complex64::new(1.0, 0.0)).unwrap()
}

fn sector() -> DrivingTerm {
    DrivingTerm::sector(1.0).unwrap()
}

#[test]
fn constant_trace_is_scaled_circle() {
    let field = forward(constant(), 1.0);
    for r in [0.9, 0.999] {
        let c = trace_boundary(&field, 1.0, r, 64).unwrap();
        for p in &c.points {
            assert!((p.norm() - r * (-1.0f64).exp()).abs() < 1e-9);
        }
    }
}

#[test]
fn trace_resolutions_agree_at_shared_angles() {
    let field = forward(DrivingTerm::half_plane(0.3).unwrap(), 1.0);
    let a = trace_boundary(&field, 1.0, 0.999, 16).unwrap();
    let b = trace_boundary(&field, 1.0, 0.999, 32).unwrap();
    for i in 0..16 {
        assert!((a.points[i] - b.points[2 * i]).norm() < 1e-12);
    }
}

#[test]
fn trace_rejects_bad_arguments() {
    let field = forward(constant(), 1.0);
    assert!(trace_boundary(&field, 1.0, 0.5, 64).is_err());
    assert!(trace_boundary(&field, 1.0, 0.999, 8).is_err());
}

#[test]
fn sector_two_radius_consistency() {
    let field = forward(sector(), 1.0);
    let h = estimate_holder(&field, 1.0, HolderConfig::default()).unwrap();
    let a = trace_boundary(&field, 1.0, 0.999, 256).unwrap();
    let b = trace_boundary(&field, 1.0, 0.9995, 256).unwrap();
    let bound = h.constant * 0.0005f64.powf(0.5);
    let worst = a.points.iter().zip(&b.points).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
    println!("worst {worst} bound {bound} holder {h:?}");
    assert!(worst <= bound);
}

#[test]
fn holder_examples() {
    let start = Instant::now();
    let c = estimate_holder(&forward(constant(), 1.0), 1.0, HolderConfig::default()).unwrap();
    assert!((c.exponent - 1.0).abs() < 1e-9, "{c:?}");
    let s = estimate_holder(&forward(sector(), 1.0), 1.0, HolderConfig::default()).unwrap();
    println!("sector {s:?} in {:?}", start.elapsed());
    assert!(s.exponent >= 0.4);

    let hp = forward(DrivingTerm::half_plane(0.3).unwrap(), 0.2);
    let a = estimate_holder(&hp, 0.2, HolderConfig::default()).unwrap();
    let tol = Tolerances { rel: 5e-11, abs: 5e-11, ..Tolerances::default() };
    let hp2 = FlowField::with_tolerances(DrivingTerm::half_plane(0.3).unwrap(), FlowDirection::Forward, 0.2, tol).unwrap();
    let b = estimate_holder(&hp2, 0.2, HolderConfig::default()).unwrap();
    println!("half plane {a:?} vs {b:?}");
    assert!((a.exponent - b.exponent).abs() <= 0.1);
}

#[test]
fn three_point_examples() {
    let c = trace_boundary(&forward(constant(), 1.0), 1.0, DEFAULT_TRACE_RADIUS, 256).unwrap();
    let tp = three_point_ratio(&c).unwrap();
    assert!((tp.ratio - 1.0).abs() < 1e-8, "{}", tp.ratio);

    let field = forward(sector(), 1.0);
    let start = Instant::now();
    let t0 = small_time_window(&field, 1.0, DISTORTION_WINDOW).unwrap();
    let curve = trace_boundary(&field, t0, DEFAULT_TRACE_RADIUS, 1024).unwrap();
    let tp = three_point_ratio(&curve).unwrap();
    println!("t0={t0} ratio={tp:?} in {:?}", start.elapsed());
    assert!(tp.ratio <= 5.0 / 3.0 + 0.05);
}

#[test]
fn rectifiability_examples() {
    let r = rectifiability(&forward(constant(), 1.0), 1.0, 0.999).unwrap();
    assert!((r.length - TAU * 0.999 * (-1.0f64).exp()).abs() <= 1e-3 * r.length);
    assert!(r.converged);
    let pk = DrivingTerm::point_kernel(Driver::Constant { angle: 0.0 }).unwrap();
    let r = rectifiability(&forward(pk, 0.3), 0.3, DEFAULT_TRACE_RADIUS).unwrap();
    println!("{r:?}");
    assert!(r.lengths.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-12));
    assert!(r.converged);
}

#[test]
fn jordan_examples() {
    for term in [DrivingTerm::strip(0.5, 2.0).unwrap(), sector()] {
        for t in [0.5, 1.0, 2.0] {
            let c = trace_boundary(&forward(term.clone(), t), t, DEFAULT_TRACE_RADIUS, 512).unwrap();
            assert!(jordan_check(&c), "{term} t={t}");
        }
    }
    let eight: Vec<Complex64> = (0..64).map(|i| {
        let s = TAU * i as f64 / 64.0;
        Complex64::new(s.sin(), s.sin() * s.cos())
    }).collect();
    let fig = BoundaryCurve::new(0.0, 0.99, 0.0, eight).unwrap();
    assert!(!jordan_check(&fig));
    assert!(first_self_intersection(&fig.points).is_some());
}

#[test]
fn inverse_modulus_examples() {
    let field = forward(constant(), 1.0);
    let c = trace_boundary(&field, 1.0, DEFAULT_TRACE_RADIUS, 1024).unwrap();
    let deltas = default_deltas(&c, 12);
    let m = inverse_modulus(&c, &deltas);
    assert!(m.is_monotone());
    let spacing = TAU / 1024.0;
    for (d, v) in m.deltas.iter().zip(&m.moduli) {
        let exact = d * 1f64.exp();
        assert!(*v <= exact * (1.0 + 1e-9) && *v >= exact - 2.0 * spacing, "{d}: {v} vs {exact}");
    }
    let (k, residual) = m.fit_with_exponent(1.0).unwrap();
    assert!((k - 1f64.exp()).abs() < 0.2 && residual < 0.1, "{k} {residual}");

    let hp = forward(DrivingTerm::half_plane(0.3).unwrap(), 1.0);
    let c = trace_boundary(&hp, 1.0, DEFAULT_TRACE_RADIUS, 1024).unwrap();
    let m = inverse_modulus(&c, &default_deltas(&c, 16));
    assert!(m.is_monotone());
    let small: Vec<f64> = (0..8).map(|i| 10f64.powf(-3.5 + 0.35 * i as f64)).collect();
    let ms = inverse_modulus(&c, &small);
    // the fjord keeps the modulus large until δ is well below the seed spacing
    assert!(ms.moduli[0] < 0.5 * ms.moduli[7], "{ms:?}");
    let (constant, residual) = m.fit_with_exponent(0.5).unwrap();
    assert!(constant > 0.0 && residual.is_finite());
}

#[test]
fn split_examples() {
    let field = forward(constant(), 1.0);
    let one = split_composition(&field, 1.0, 1).unwrap();
    assert_eq!(one.max_deviation, 0.0);
    let four = split_composition(&field, 1.0, 4).unwrap();
    assert!(four.max_deviation <= four.tolerance, "{}", four.max_deviation);
    let probe = Complex64::new(0.3, 0.4);
    let piece = map_point(&four.pieces[2], 0.25, probe).unwrap();
    assert!((piece.w - probe * (-0.25f64).exp()).norm() < 1e-10);
}

#[test]
fn split_across_catalogue() {
    let start = Instant::now();
    for term in standard_catalogue() {
        let field = forward(term.clone(), 1.0);
        for n in [2, 4, 8] {
            let s = split_composition(&field, 1.0, n).unwrap_or_else(|e| panic!("{term} n={n}: {e}"));
            println!("{term} n={n} dev={:e} distortion={:?}", s.max_deviation, s.piece_distortion.iter().cloned().fold(0.0, f64::max));
        }
    }
    println!("elapsed {:?}", start.elapsed());
}

#[test]
fn sector_window_pieces() {
    let field = forward(sector(), 1.0);
    let start = Instant::now();
    let qc = quasiconformal_window(&field, 1.0).unwrap();
    println!("{qc:?} in {:?}", start.elapsed());
    assert!(qc.all_passed());
    assert!(qc.three_point.ratio <= 5.0 / 3.0 + 0.05);
    let _ = PI;
}
