mod common;

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use quasiline_core::cosxform::*;
use quasiline_core::measures::{PlDensity, SignedMeasure};
use quasiline_core::Execution;

fn atoms(v: &[(f64, f64)]) -> SignedMeasure {
    SignedMeasure::from_atoms(v.to_vec()).unwrap()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn cosine_transform_examples() {
    let v = cosine_transform(&atoms(&[(4.0, 1.0)]), PI).unwrap();
    assert!((v.value - 1.0).abs() < 1e-15);
    let v = cosine_transform(&atoms(&[(-4.0, 1.0)]), 1.0).unwrap();
    assert!((v.value - 2f64.cosh()).abs() < 1e-14);
    let d = SignedMeasure::from_density(PlDensity::new(0.0, 1.0, vec![1.0, 1.0]).unwrap());
    let v = cosine_transform(&d, PI).unwrap();
    assert!((v.value + 4.0 / (PI * PI)).abs() < 1e-9, "{}", v.value);
    assert!(v.bound < 1e-9);
}

#[test]
fn cosine_transform_cosh_branch_in_log_space() {
    let v = cosine_transform(&atoms(&[(-1e4, 1e-200)]), 5.0).unwrap();
    let exact = (500.0 - 2f64.ln() - 200.0 * 10f64.ln()).exp();
    assert!((v.value / exact - 1.0).abs() < 1e-12);
    assert!(matches!(cosine_transform(&atoms(&[(-1e6, 1.0)]), 10.0), Err(quasiline_core::Error::Overflow(_))));
}

#[test]
fn stieltjes_examples() {
    let z = stieltjes_transform(&atoms(&[(0.0, 1.0)]), c(0.0, 1.0)).unwrap().value;
    assert!((z - c(0.0, 0.5)).norm() < 1e-16);
    let z = stieltjes_transform(&atoms(&[(0.0, 1.0)]), c(0.0, 0.0)).unwrap().value;
    assert!((z - c(0.0, 1.0)).norm() < 1e-16);
    let z = stieltjes_transform(&atoms(&[(1.0, 1.0), (-1.0, 1.0)]), c(0.0, 0.0)).unwrap().value;
    let oracle = c(1.0, 0.0) / c(1.0, -1.0) + c(1.0, 0.0) / c(-1.0, -1.0);
    assert!((z - oracle).norm() < 1e-15 && (z - c(0.0, 1.0)).norm() < 1e-15);
    assert!(stieltjes_transform(&atoms(&[(0.0, 1.0)]), c(0.0, -0.1)).is_err());
}

#[test]
fn stieltjes_density_matches_quadrature() {
    let d = SignedMeasure::from_density(PlDensity::new(-2.0, 3.0, vec![1.0, -0.5, 2.0, 0.0, 1.5, -1.0]).unwrap());
    let z = c(-0.7, 0.3);
    let w = c(z.re, z.im + 1.0);
    let n = 200_000;
    let h = 5.0 / n as f64;
    let mut s = c(0.0, 0.0);
    for i in 0..=n {
        let t = -2.0 + i as f64 * h;
        let wt = if i == 0 || i == n { 0.5 } else { 1.0 };
        s += d.densities()[0].value_at(t) / (c(t, 0.0) - w) * wt * h;
    }
    let v = stieltjes_transform(&d, z).unwrap().value;
    assert!((v - s).norm() < 1e-8, "{v} vs {s}");
}

#[test]
fn phi_map_examples() {
    let m = atoms(&[(1.0, 1.0)]);
    let map = phi_map(&m);
    assert!((map.f(0.7).unwrap() - c(0.7f64.cos(), 0.7f64.sin())).norm() < 1e-15);
    assert!((map.phi(0.7).unwrap() - 0.7f64.cos()).abs() < 1e-15);
    let m = atoms(&[(-1.0, 1.0)]);
    let map = phi_map(&m);
    assert!((map.f(0.7).unwrap() - c(0.7f64.cos(), -0.7f64.sin())).norm() < 1e-15);
    assert!((map.phi(0.7).unwrap() - 0.7f64.cosh()).abs() < 1e-15);
    let m = atoms(&[(1.0, 1.0), (4.0, 1.0)]);
    let map = phi_map(&m);
    assert!(map.f(PI).unwrap().norm() < 1e-14);
    assert!(map.phi(PI).unwrap().abs() < 1e-14);
}

#[test]
fn derivative_moment_examples() {
    let r = derivative_moment_check(&atoms(&[(1.0, 1.0)]), 4, 1e-6).unwrap();
    assert!(r.all_pass());
    let two = atoms(&[(1.0, 1.0), (4.0, 1.0)]);
    let r = derivative_moment_check(&two, 8, 1e-4).unwrap();
    assert!(r.all_pass(), "{}", r.max_discrepancy());
    // phi'' (0) = -m_1 = -5
    let h = 1e-3;
    let map = phi_map(&two);
    let d2 = (map.phi(h).unwrap() - 2.0 * map.phi(0.0).unwrap() + map.phi(-h).unwrap()) / (h * h);
    assert!((d2 + 5.0).abs() < 1e-4);
    assert!(derivative_moment_check(&two, 13, 1e-4).is_err());
}

#[test]
fn kernel_identity_examples() {
    let k = kernel_identity_check(-4.0, 1.0, None).unwrap();
    assert!((k.rhs - c(5.0, 1.0) / 26.0).norm() < 1e-15);
    assert!(k.residual < 1e-10 && k.row.pass);
    let k = kernel_identity_check(-1.0, 0.0, None).unwrap();
    assert!((k.rhs - c(1.0, 0.0) / c(1.0, -1.0)).norm() < 1e-15);
    assert!(k.residual < 1e-10);
    let k = kernel_identity_check(-9.0, 4.0, None).unwrap();
    assert!((k.rhs - c(1.0, 0.0) / c(13.0, -1.0)).norm() < 1e-15);
    assert!(k.residual < 1e-10);
    assert!(kernel_identity_check(1.0, 4.0, None).is_err());
    assert!(kernel_identity_check(-1.0, -4.0, None).is_err());
}

#[test]
fn kernel_residual_shrinks_with_u() {
    for (x, l) in [(-4.0, 1.0), (-9.0, 4.0), (-4.0, 0.0)] {
        let a = kernel_identity_check(x, l, Some(4.0)).unwrap().residual;
        let b = kernel_identity_check(x, l, Some(8.0)).unwrap().residual;
        let cc = kernel_identity_check(x, l, Some(16.0)).unwrap().residual;
        assert!(b < a && cc < b, "x {x} lambda {l}: {a} {b} {cc}");
    }
}

#[test]
fn grids_are_identical_across_execution_modes() {
    let d = SignedMeasure::new(
        vec![(-3.0, 0.5), (2.0, -1.0)],
        vec![PlDensity::from_fn(|t| (-(t * t)).exp() * t.sin(), -6.0, 6.0, 4000).unwrap()],
    )
    .unwrap();
    let xs: Vec<f64> = (0..40).map(|i| i as f64 * 0.1).collect();
    let a = cosine_grid(&d, &xs, Execution::Sequential).unwrap();
    let b = cosine_grid(&d, &xs, Execution::Parallel).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_csv().lines().next(), Some("x,value_re,value_im,trunc_bound"));
    let zs: Vec<f64> = (0..40).map(|i| (i as f64 - 39.0) * 0.5).collect();
    assert_eq!(stieltjes_grid(&d, &zs, Execution::Sequential).unwrap(), stieltjes_grid(&d, &zs, Execution::Parallel).unwrap());
}

proptest! {
    #[test]
    fn cosine_at_zero_is_mass(s in common::arb_atoms(12)) {
        let m0 = s.moment(0).unwrap();
        prop_assert_eq!(cosine_transform(&s, 0.0).unwrap().value, m0);
    }

    #[test]
    fn cosine_is_even(s in common::arb_atoms(12), x in 0.0f64..3.0) {
        let a = cosine_transform(&s, x).unwrap();
        let b = cosine_transform(&s, -x).unwrap();
        prop_assert!((a.value - b.value).abs() <= a.bound + b.bound);
    }

    #[test]
    fn cosine_is_linear(s in common::arb_atoms(8), t in common::arb_atoms(8), al in -2.0f64..2.0, be in -2.0f64..2.0, x in 0.0f64..3.0) {
        prop_assume!(s.atoms().iter().all(|a| t.atoms().iter().all(|b| a.0 != b.0)));
        let comb = s.scale(al).add(&t.scale(be)).unwrap();
        let lhs = cosine_transform(&comb, x).unwrap();
        let rhs = al * cosine_transform(&s, x).unwrap().value + be * cosine_transform(&t, x).unwrap().value;
        let scale = comb.total_variation().max(1.0) * (x * 5f64.sqrt()).cosh();
        prop_assert!((lhs.value - rhs).abs() <= 1e-13 * scale);
    }

    #[test]
    fn stieltjes_bounded_by_variation(s in common::arb_atoms(12), re in -20.0f64..20.0, im in 0.0f64..5.0) {
        let v = stieltjes_transform(&s, c(re, im)).unwrap();
        prop_assert!(v.value.norm() <= s.total_variation() * (1.0 + 1e-14));
    }

    #[test]
    fn derivative_identities_hold(s in common::arb_atoms(6)) {
        let r = derivative_moment_check(&s, 8, 1e-4).unwrap();
        prop_assert!(r.all_pass(), "max discrepancy {}", r.max_discrepancy());
    }
}
