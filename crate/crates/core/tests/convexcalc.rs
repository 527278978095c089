mod common;

use proptest::prelude::*;
use quasiline_core::convexcalc::*;
use quasiline_core::Error;

fn pts(v: &[(i64, i64)]) -> Vec<(Q, Q)> {
    v.iter().map(|&(s, y)| (qi(s), qi(y))).collect()
}

fn half_square(h: f64, smax: f64) -> PlConvex {
    let n = (smax / h).round() as usize;
    let grid: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
    let last = grid[n];
    PlConvex::from_samples(|s| s * s / 2.0, &grid, Extension::Linear(qf(last))).unwrap()
}

fn brute_conjugate(p: &PlConvex, x: f64, smax: f64) -> f64 {
    let n = 200_000;
    (0..=n).map(|i| smax * i as f64 / n as f64).map(|s| x * s - p.value(s)).fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn normalize_subtracts_constant() {
    let p = PlConvex::from_points(pts(&[(0, 5), (1, 5), (2, 8)])).unwrap();
    let n = p.normalize().unwrap();
    assert_eq!(n.breakpoints(), pts(&[(0, 0), (1, 0), (2, 3)]).as_slice());
}

#[test]
fn normalize_keeps_identity() {
    let p = PlConvex::from_points(pts(&[(0, 0), (1, 1), (2, 2)])).unwrap();
    assert_eq!(p.normalize().unwrap(), p);
}

#[test]
fn normalize_rejects_decreasing_start() {
    let p = PlConvex::from_points(pts(&[(0, 2), (1, 0), (3, 4)])).unwrap();
    assert!(p.check_convex().is_ok());
    assert!(p.normalize().is_err());
}

#[test]
fn conjugate_of_half_square() {
    let p = half_square(0.01, 10.0);
    let ps = p.conjugate().unwrap();
    // sup over a PL interpolant of s^2/2 is within h^2/8 of 1/2.
    assert!((ps.value(1.0) - 0.5).abs() <= 0.01f64.powi(2) / 8.0 + 1e-15);
}

#[test]
fn conjugate_of_linear_is_indicator() {
    let p = PlConvex::from_points(pts(&[(0, 0), (1, 1)])).unwrap();
    let ps = p.conjugate().unwrap();
    assert_eq!(ps.value(0.0), 0.0);
    assert_eq!(ps.value(0.5), 0.0);
    assert_eq!(ps.value(1.0), 0.0);
    assert_eq!(ps.value(1.5), f64::INFINITY);
}

#[test]
fn conjugate_matches_brute_force() {
    let p = PlConvex::from_points(pts(&[(0, 0), (1, 0), (2, 3)])).unwrap();
    let ps = p.conjugate().unwrap();
    assert_eq!(ps.value_exact(&qi(2)), Some(qi(2)));
    for x in [0.0, 0.5, 1.0, 2.0, 2.5, 3.0] {
        assert!((ps.value(x) - brute_conjugate(&p, x, 50.0)).abs() < 1e-9, "x = {x}");
    }
    assert_eq!(ps.value(3.0 + 1e-9), f64::INFINITY);
}

#[test]
fn conjugate_rejects_unnormalized() {
    let p = PlConvex::from_points(pts(&[(0, 1), (1, 2)])).unwrap();
    assert!(matches!(p.conjugate(), Err(Error::NotNormalized(_))));
}

#[test]
fn tailed_conjugate_matches_stationary_point() {
    // p(s) = s^2 beyond s = 2, PL head through (0,0), (1,1), (2,4).
    let tail = TailClass::power_log(1.0, qi(2), qi(0), qi(2)).unwrap();
    let p = PlConvex::new(pts(&[(0, 0), (1, 1), (2, 4)]), Extension::Tail(tail)).unwrap();
    let ps = p.conjugate().unwrap();
    for x in [1.0, 3.0, 4.0, 6.0, 10.0, 20.0] {
        let brute = brute_conjugate(&p, x, 40.0);
        assert!((ps.value(x) - brute).abs() < 1e-6 * brute.abs().max(1.0), "x = {x}: {} vs {brute}", ps.value(x));
    }
}

#[test]
fn convex_minorant_examples() {
    let grid: Vec<(Q, Q)> = (0..6).map(|i| (qi(i), qi(i * i))).collect();
    assert_eq!(convex_minorant(&grid).unwrap().breakpoints(), grid.as_slice());

    let m = convex_minorant(&pts(&[(0, 0), (1, 5), (2, 1), (3, 6)])).unwrap();
    assert_eq!(m.breakpoints(), pts(&[(0, 0), (2, 1), (3, 6)]).as_slice());

    let two = pts(&[(0, 0), (4, 1)]);
    assert_eq!(convex_minorant(&two).unwrap().breakpoints(), two.as_slice());

    assert!(convex_minorant(&pts(&[(0, 0)])).is_err());
}

#[test]
fn convex_minorant_merges_collinear() {
    let m = convex_minorant(&pts(&[(0, 0), (1, 1), (2, 2), (3, 5)])).unwrap();
    assert_eq!(m.breakpoints(), pts(&[(0, 0), (2, 2), (3, 5)]).as_slice());
}

fn tailed(a: i64, b: i64) -> PlConvex {
    let t = TailClass::power_log(1.0, qi(a), qi(b), qi(3)).unwrap();
    let v = 3f64.powi(a as i32) * 3f64.ln().powi(b as i32);
    PlConvex::new(vec![(qi(0), qi(0)), (qi(3), qf(v))], Extension::Tail(t)).unwrap()
}

#[test]
fn vul_verdict_examples() {
    assert_eq!(vul_integral_verdict(&tailed(2, 0)).unwrap().kind, VerdictKind::Diverges);
    assert_eq!(vul_integral_verdict(&tailed(2, -2)).unwrap().kind, VerdictKind::Converges);
    assert_eq!(vul_integral_verdict(&tailed(3, 0)).unwrap().kind, VerdictKind::Diverges);
    assert_eq!(vul_integral_verdict(&tailed(2, -1)).unwrap().kind, VerdictKind::Diverges);
    let untailed = PlConvex::from_points(pts(&[(0, 0), (1, 1)])).unwrap();
    assert!(matches!(vul_integral_verdict(&untailed), Err(Error::MissingTail(_))));
}

/// `int_S^{2S} s^{a-3} (log s)^b ds` by substitution `s = e^u`.
fn increment(a: f64, b: f64, big_s: f64) -> f64 {
    let (u0, u1) = (big_s.ln(), (2.0 * big_s).ln());
    let n = 2000;
    let h = (u1 - u0) / n as f64;
    let f = |u: f64| ((a - 2.0) * u).exp() * u.powf(b);
    let mut s = f(u0) + f(u1);
    for i in 1..n {
        s += f(u0 + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn vul_verdict_agrees_with_numeric_trend() {
    let floor = 0.05;
    for (a, b) in [(3, 0), (2, 0), (2, 1), (2, -2), (2, -3), (1, 0), (1, 2)] {
        let numeric = [1e2, 1e4, 1e6].iter().all(|&s| increment(a as f64, b as f64, s) > floor);
        let p = tailed(a, b);
        let v = vul_integral_verdict(&p).unwrap().kind;
        assert_eq!(v == VerdictKind::Diverges, numeric, "a = {a}, b = {b}");
    }
}

#[test]
fn young_fenchel_examples() {
    let p = half_square(0.01, 10.0);
    let ps = p.conjugate().unwrap();
    let (g, flag) = young_fenchel_gap(&p, &ps, 1.0, 1.0);
    assert!(!flag && g.abs() < 1e-4);
    let (g, _) = young_fenchel_gap(&p, &ps, 1.0, 3.0);
    assert!((g - 2.0).abs() < 1e-4);
    let lin = PlConvex::from_points(pts(&[(0, 0), (1, 1)])).unwrap();
    let (g, flag) = young_fenchel_gap(&lin, &lin.conjugate().unwrap(), 1.0, 2.0);
    assert!(flag && g == f64::INFINITY);
}

#[test]
fn text_round_trip() {
    let tail = TailClass::power_log(1.5, qr(9, 4), qi(-2), qi(32)).unwrap();
    let p = PlConvex::new(vec![(qi(0), qi(0)), (qr(19, 4), qi(0)), (qi(32), qr(1024, 3))], Extension::Tail(tail)).unwrap();
    assert_eq!(PlConvex::parse(&p.to_text()).unwrap(), p);
    let q = PlConvex::parse("bp 0 0\nbp 1/2 0.25\n# comment\nbp 2 3\n").unwrap();
    assert_eq!(q.breakpoints()[1], (qr(1, 2), qr(1, 4)));
    let e = PlConvex::parse("bp 0 0\nbp x 1\n").unwrap_err();
    assert!(matches!(e, Error::Parse { line: 2, .. }));
}

#[test]
fn involution_on_random_instances() {
    for p in common::random_pls(200, 32, 7) {
        let pss = p.conjugate().unwrap().conjugate().unwrap();
        assert_eq!(pss, p.canonical());
    }
}

proptest! {
    #[test]
    fn conjugate_involution(p in common::arb_pl(32)) {
        let pss = p.conjugate().unwrap().conjugate().unwrap();
        prop_assert_eq!(pss, p.canonical());
    }

    #[test]
    fn young_fenchel_nonnegative(p in common::arb_pl(16), s in 0.0f64..20.0, x in 0.0f64..20.0) {
        let ps = p.conjugate().unwrap();
        let (g, _) = young_fenchel_gap(&p, &ps, s, x);
        prop_assert!(g >= -1e-12, "gap {}", g);
    }

    #[test]
    fn young_fenchel_tight_at_subgradient(p in common::arb_pl(16), i in 0usize..16) {
        let ps = p.conjugate().unwrap();
        let bps = p.breakpoints();
        let slopes = p.slopes();
        let i = i % slopes.len();
        let (s, x) = (&bps[i + 1].0, &slopes[i]);
        let exact = p.value_exact(s).unwrap() + ps.value_exact(x).unwrap() - x * s;
        prop_assert_eq!(exact, qi(0));
    }

    #[test]
    fn monotone_conjugacy(p in common::arb_pl(12), c in 0i64..12) {
        // r = p + c s / 4 >= p
        let bps: Vec<(Q, Q)> = p.breakpoints().iter().map(|(s, v)| (s.clone(), v + qr(c, 4) * s)).collect();
        let ext = match p.extension() {
            Extension::Linear(m) => Extension::Linear(m + qr(c, 4)),
            e => e.clone(),
        };
        let r = PlConvex::new(bps, ext).unwrap();
        let (ps, rs) = (p.conjugate().unwrap(), r.conjugate().unwrap());
        for k in 0..40 {
            let x = k as f64 * 0.37;
            let (a, b) = (ps.value(x), rs.value(x));
            prop_assert!(a == f64::INFINITY || a >= b - 1e-12 * a.abs().max(1.0), "x {}: {} < {}", x, a, b);
        }
    }

    #[test]
    fn minorant_is_maximal_convex_lower_bound(ys in prop::collection::vec(-50i64..50, 2..24)) {
        let samples: Vec<(Q, Q)> = ys.iter().enumerate().map(|(i, &y)| (qi(i as i64), qi(y))).collect();
        let m = convex_minorant(&samples).unwrap();
        prop_assert!(m.check_convex().is_ok());
        for (s, y) in &samples {
            prop_assert!(m.value_exact(s).unwrap() <= *y);
        }
        // every hull vertex touches a sample, so raising it breaks the bound
        for v in m.breakpoints() {
            prop_assert!(samples.contains(v));
        }
    }
}
