mod common;

use proptest::prelude::*;
use quasiline_core::convexcalc::{qi, PlConvex};
use quasiline_core::measures::*;

fn identity_profile() -> PlConvex {
    PlConvex::from_points(vec![(qi(0), qi(0)), (qi(1), qi(1))]).unwrap()
}

fn square_profile() -> PlConvex {
    let grid: Vec<f64> = (0..=40).map(|i| i as f64 / 4.0).collect();
    PlConvex::from_samples(|s| s * s, &grid, quasiline_core::convexcalc::Extension::Linear(qi(20))).unwrap()
}

fn unit_density(a: f64, b: f64) -> SignedMeasure {
    SignedMeasure::from_density(PlDensity::new(a, b, vec![1.0, 1.0]).unwrap())
}

#[test]
fn total_variation_examples() {
    let s = SignedMeasure::from_atoms(vec![(1.0, 2.0), (3.0, -1.0)]).unwrap();
    assert_eq!(s.total_variation(), 3.0);
    assert_eq!(SignedMeasure::zero().total_variation(), 0.0);
    assert!((unit_density(0.0, 1.0).total_variation() - 1.0).abs() < 1e-15);
}

#[test]
fn total_variation_of_sign_changing_density() {
    // density 1 - 2t on [0, 1]: |.| integrates to 1/2
    let d = SignedMeasure::from_density(PlDensity::new(0.0, 1.0, vec![1.0, -1.0]).unwrap());
    assert!((d.total_variation() - 0.5).abs() < 1e-15);
    // trapezoid oracle on a fine refinement
    let fine = PlDensity::from_fn(|t| 1.0 - 2.0 * t, 0.0, 1.0, 1000).unwrap();
    let tr: f64 = fine.segments().map(|(a, b, va, vb)| abs_linear_integral(a, b, va, vb)).sum();
    assert!((tr - 0.5).abs() < 1e-12);
}

#[test]
fn moment_examples() {
    assert_eq!(SignedMeasure::from_atoms(vec![(4.0, 1.0)]).unwrap().moment(3).unwrap(), 64.0);
    assert_eq!(SignedMeasure::from_atoms(vec![(1.0, 1.0), (4.0, 1.0)]).unwrap().moment(1).unwrap(), 5.0);
    assert!((unit_density(0.0, 1.0).moment(2).unwrap() - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn exp_moment_examples() {
    let a = SignedMeasure::from_atoms(vec![(-4.0, 2.0)]).unwrap();
    assert!((a.exp_moment(1.0).unwrap().value() - 2.0 * 1f64.exp().powi(2)).abs() < 1e-12);
    let b = SignedMeasure::from_atoms(vec![(-4.0, 2.0), (-1.0, -0.5), (3.0, 7.0)]).unwrap();
    assert!((b.exp_moment(0.0).unwrap().value() - 2.5).abs() < 1e-15);
    let e = 1f64.exp();
    let m = unit_density(-1.0, 0.0).exp_moment(2.0).unwrap().value();
    assert!((m - (e * e + 1.0) / 2.0).abs() < 1e-10, "{m}");
}

#[test]
fn exp_moment_in_log_space() {
    let a = SignedMeasure::from_atoms(vec![(-490_000.0, 1.0)]).unwrap();
    let m = a.exp_moment(1.0).unwrap();
    assert!((m.log_value - 700.0).abs() < 1e-9);
    let big = SignedMeasure::from_atoms(vec![(-1e6, 1.0)]).unwrap().exp_moment(1.0).unwrap();
    assert_eq!(big.log_value, 1000.0);
    let tiny = SignedMeasure::from_atoms(vec![(-1.0, 1e-300)]).unwrap().exp_moment(0.0).unwrap();
    assert!(!tiny.underflow);
}

#[test]
fn tail_decay_examples() {
    let s = SignedMeasure::from_atoms(vec![(-4.0, 1.0)]).unwrap();
    let cert = DecayCertificate::new(identity_profile(), 1f64.exp().powi(2)).unwrap();
    let rep = tail_decay_check(&s, &cert, &[-4.0], 1e-12);
    assert!(rep.all_pass());
    assert!(rep.rows[0].margin.abs() < 1e-12);

    let pos = SignedMeasure::from_atoms(vec![(1.0, 5.0)]).unwrap();
    assert!(tail_decay_check(&pos, &cert, &[-1.0, -4.0, -16.0], 0.0).all_pass());

    let bad = SignedMeasure::from_atoms(vec![(-9.0, 10.0)]).unwrap();
    let cert = DecayCertificate::new(square_profile(), 1.0).unwrap();
    let rep = tail_decay_check(&bad, &cert, &[-9.0], 0.0);
    assert!(!rep.rows[0].pass);
}

#[test]
fn text_round_trip() {
    let s = SignedMeasure::new(
        vec![(-4.0, 0.125), (2.5, -1.0)],
        vec![PlDensity::new(-1.0, 1.0, vec![0.1, -0.2, 0.3, 1.0 / 3.0]).unwrap()],
    )
    .unwrap();
    assert_eq!(SignedMeasure::parse(&s.to_text()).unwrap(), s);
    let err = SignedMeasure::parse("atom 1 2\ndensity 0 1 2 1 1\n").unwrap_err();
    assert!(matches!(err, quasiline_core::Error::Parse { line: 2, .. }));
}

#[test]
fn rejects_duplicates_and_overlaps() {
    assert!(SignedMeasure::from_atoms(vec![(1.0, 1.0), (1.0, 2.0)]).is_err());
    let d1 = PlDensity::new(0.0, 2.0, vec![1.0, 1.0]).unwrap();
    let d2 = PlDensity::new(1.0, 3.0, vec![1.0, 1.0]).unwrap();
    assert!(SignedMeasure::new(vec![], vec![d1, d2]).is_err());
}

proptest! {
    #[test]
    fn exp_moment_at_zero_is_negative_variation(s in common::arb_atoms(12)) {
        let neg: f64 = s.atoms().iter().filter(|a| a.0 <= 0.0).map(|a| a.1.abs()).sum();
        let m = s.exp_moment(0.0).unwrap().value();
        prop_assert!((m - neg).abs() <= 1e-14 * neg.max(1.0));
    }

    #[test]
    fn exp_moment_nondecreasing(s in common::arb_atoms(12), x in 0.0f64..10.0, dx in 0.0f64..5.0) {
        let a = s.exp_moment(x).unwrap().log_value;
        let b = s.exp_moment(x + dx).unwrap().log_value;
        prop_assert!(b >= a || (a == f64::NEG_INFINITY && b == a));
    }

    #[test]
    fn moment_is_linear(s in common::arb_atoms(8), t in common::arb_atoms(8), k in 0u32..6) {
        prop_assume!(s.atoms().iter().all(|a| t.atoms().iter().all(|b| a.0 != b.0)));
        let sum = s.add(&t).unwrap();
        let lhs = sum.moment(k).unwrap();
        let rhs = s.moment(k).unwrap() + t.moment(k).unwrap();
        let scale = 5f64.powi(k as i32) * (s.total_variation() + t.total_variation());
        prop_assert!((lhs - rhs).abs() <= 1e-13 * scale);
    }

    #[test]
    fn synthesized_certificate_passes(s in common::arb_atoms(12)) {
        let p = square_profile();
        let grid: Vec<f64> = (1..=20).map(|i| -(i as f64) * 0.25).collect();
        let c = synthesize_constant(&s, &p, &grid);
        let cert = DecayCertificate::new(p, c).unwrap();
        prop_assert!(tail_decay_check(&s, &cert, &grid, 1e-12).all_pass());
    }
}
