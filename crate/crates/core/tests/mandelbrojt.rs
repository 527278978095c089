use std::f64::consts::{E, PI};
use std::sync::OnceLock;

use num_complex::Complex64;
use proptest::prelude::*;
use quasiline_core::convexcalc::*;
use quasiline_core::cosxform::cosine_transform;
use quasiline_core::mandelbrojt::*;
use quasiline_core::par::Execution;
use quasiline_core::Error;

fn ann_grid() -> Vec<f64> {
    (0..=8).map(|i| i as f64 * 0.5).collect()
}

fn run() -> &'static CounterexampleRun {
    static CELL: OnceLock<CounterexampleRun> = OnceLock::new();
    CELL.get_or_init(|| {
        let p = counterexample_profile().unwrap();
        counterexample(&p, &CounterexampleOptions::default(), &ann_grid(), &[0.0, 1.0, 2.0, 4.0]).unwrap()
    })
}

fn tailed(a: i64, b: i64) -> PlConvex {
    let t = TailClass::power_log(1.0, qi(a), qi(b), qi(32)).unwrap();
    let v = 32f64.powi(a as i32) * 32f64.ln().powi(b as i32);
    PlConvex::new(vec![(qi(0), qi(0)), (qi(32), qf(v))], Extension::Tail(t)).unwrap()
}

#[test]
fn build_examples() {
    // p = 0 up to s = 64, then a negligible linear tail
    let tail = TailClass::power_log(1e-12, qi(1), qi(0), qi(64)).unwrap();
    let zero = PlConvex::new(vec![(qi(0), qi(0)), (qi(64), qi(0))], Extension::Tail(tail)).unwrap();
    let phi = build_sinc_product(&zero, 1024.0).unwrap();
    assert!(bound_check(&phi, &zero, &certification_grid(1024.0), 1e-9).all_pass());
    let one = SincProduct::new(vec![(1.0, 1)], 0.0).unwrap();
    for x in [E, 5.0, 50.0, 1e3] {
        assert!(phi_real(&one, x).abs() <= 1.0 / x);
    }

    let p = tailed(2, -2);
    let phi = build_sinc_product(&p, 65536.0).unwrap();
    assert!(phi.exponent_type() <= BUDGET + 1e-15);
    assert!(bound_check(&phi, &p, &certification_grid(65536.0), 1e-9).all_pass());

    assert!(matches!(build_sinc_product(&tailed(2, 0), 65536.0), Err(Error::Precondition(_))));
}

#[test]
fn eval_phi_examples() {
    let one = SincProduct::new(vec![(1.0, 1)], 0.0).unwrap();
    assert!(eval_phi(&one, Complex64::new(PI, 0.0)).norm() < 1e-15);
    let many = SincProduct::new(vec![(0.25, 1), (0.125, 3)], 0.0).unwrap();
    assert_eq!(eval_phi(&many, Complex64::new(0.0, 0.0)), Complex64::new(1.0, 0.0));
    let v = eval_phi(&one, Complex64::new(0.0, 1.0));
    assert!((v - Complex64::new(1f64.sinh(), 0.0)).norm() < 1e-14);
}

#[test]
fn bound_check_examples() {
    let p = tailed(2, -2);
    let one = SincProduct::new(vec![(1.0, 1)], 0.0).unwrap();
    let tail = TailClass::power_log(1.0, qi(2), qi(0), qi(2)).unwrap();
    let square = PlConvex::new(vec![(qi(0), qi(0)), (qi(1), qi(1)), (qi(2), qi(4))], Extension::Tail(tail)).unwrap();
    let rep = bound_check(&one, &square, &certification_grid(1024.0), 1e-9);
    assert!(rep.failures() > 0);
    let last = rep.rows.iter().filter(|r| r.x > 100.0).all(|r| !r.pass);
    assert!(last);

    let flat = SincProduct::new(vec![(1.0, 1)], 0.0).unwrap();
    let rep = bound_check(&flat, &p, &[Complex64::new(0.0, 0.0)], 0.0);
    assert!(rep.all_pass() && rep.rows[0].margin == 0.0);
}

#[test]
fn pipeline_certifies_bound() {
    let r = run();
    assert!(r.bound.all_pass(), "min margin {}", r.bound.min_margin());
    assert!(r.measure.product.exponent_type() <= 1.0);
    assert!(r.all_pass());
}

#[test]
fn pipeline_measure_is_nontrivial() {
    let cm = &run().measure;
    assert!(cm.sigma.total_variation() > 1e-2);
    let m0 = cm.sigma.moment(0).unwrap();
    assert!(m0.abs() <= cm.truncation_bound(0.0).unwrap() + 1e-12, "m0 = {m0}");

    let im = sigma_from_phi(&cm.product, Part::Im, cm.lambda, cm.sigma.densities()[0].values.len() - 1, Execution::Parallel).unwrap();
    let a = &cm.sigma.densities()[0].values;
    let b = &im.sigma.densities()[0].values;
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!((dot / (na * nb)).abs() < 0.999);
}

#[test]
fn annihilation_passes() {
    let r = run();
    assert!(r.annihilation.all_pass());
    assert_eq!(r.annihilation.rows.len(), 9);
    let row0 = &r.annihilation.rows[0];
    let m0 = r.measure.sigma.moment(0).unwrap();
    assert!((row0.lhs - m0.abs()).abs() <= 1e-15 * r.measure.sigma.total_variation());
    let v = cosine_transform(&r.measure.sigma, 4.0).unwrap();
    assert!(v.value.abs() <= r.annihilation.rows[8].rhs);
}

#[test]
fn halving_lambda_raises_bound_and_residual() {
    let r = run();
    let phi = &r.measure.product;
    let l1 = choose_lambda(phi, 4.0, 1e-4, 10.0, 65536.0).unwrap();
    let mut resid = Vec::new();
    let mut bound = Vec::new();
    for l in [l1, l1 / 2.0] {
        let cm = sigma_from_phi(phi, Part::Re, l, (2.0 * l / 0.05).round() as usize, Execution::Parallel).unwrap();
        let rep = annihilation_check(&cm, &[4.0], Execution::Parallel).unwrap();
        assert!(rep.all_pass());
        resid.push(rep.rows[0].lhs);
        bound.push(cm.truncation_bound(4.0).unwrap());
    }
    let (rr, br) = (resid[1] / resid[0], bound[1] / bound[0]);
    println!("L = {l1}: residual ratio {rr:e}, bound ratio {br:e}");
    assert!(br > 1.0 && rr > 1.0);
}

#[test]
fn growth_passes_and_2p_fails() {
    let r = run();
    assert!(r.growth.all_pass());
    let row0 = &r.growth.rows[0];
    assert!(row0.margin.abs() < 1e-12);
    let neg = r.measure.sigma.exp_moment(0.0).unwrap().value();
    assert!((row0.lhs - neg).abs() <= 1e-12 * neg);
    assert!((r.growth_constant - neg).abs() <= 1e-12 * neg);

    let p = counterexample_profile().unwrap();
    let bps: Vec<(Q, Q)> = p.breakpoints().iter().map(|(s, v)| (s.clone(), v * qi(2))).collect();
    let p2 = PlConvex::new(bps, Extension::Tail(TailClass::power_log(2.0, qi(2), qi(-2), qi(32)).unwrap())).unwrap();
    let (_, rep) = growth_check(&r.measure.sigma, &p2, &[0.0, 1.0, 2.0, 4.0], 1e-9).unwrap();
    assert!(rep.failures() >= 1);
}

#[test]
fn phi_is_bounded_on_shifted_line() {
    let phi = &run().measure.product;
    for i in -400..=400 {
        let x = i as f64 * 0.37;
        assert!(eval_phi(phi, Complex64::new(x, 1.0)).norm() <= E);
    }
}

#[test]
fn phi_one_parts_match_density() {
    let cm = &run().measure;
    let d = &cm.sigma.densities()[0];
    let h = (d.end - d.start) / (d.values.len() - 1) as f64;
    for i in (0..d.values.len()).step_by(997) {
        let t = d.start + i as f64 * h;
        let f = phi_real(&cm.product, t);
        assert_eq!(d.values[i], t.cos() * f);
        let z = Complex64::new(0.0, t).exp() * eval_phi(&cm.product, Complex64::new(t, 0.0));
        assert!((z.re - d.values[i]).abs() <= 1e-12 * f.abs().max(1e-300) + 1e-300);
        assert!((z.im - t.sin() * f).abs() <= 1e-12 * f.abs().max(1e-300) + 1e-300);
    }
}

#[test]
fn sinc_product_text_round_trip() {
    let phi = &run().measure.product;
    assert_eq!(&SincProduct::parse(&phi.to_text()).unwrap(), phi);
    let p = SincProduct::parse("factor 0.5 1\nfactor 0.25 2\n").unwrap();
    assert_eq!(p.exponent_type(), 1.0);
    assert!(SincProduct::parse("factor 1 1\nfactor 0.5 1\n").is_err());
    assert!(matches!(SincProduct::parse("factor 1 x\n"), Err(Error::Parse { line: 1, .. })));
}

#[test]
fn sequential_equals_parallel() {
    let r = run();
    let cm = &r.measure;
    let n = 4000;
    let a = sigma_from_phi(&cm.product, Part::Re, cm.lambda, n, Execution::Sequential).unwrap();
    let b = sigma_from_phi(&cm.product, Part::Re, cm.lambda, n, Execution::Parallel).unwrap();
    assert_eq!(a, b);
    let ra = annihilation_check(&a, &[0.0, 2.0], Execution::Sequential).unwrap();
    let rb = annihilation_check(&a, &[0.0, 2.0], Execution::Parallel).unwrap();
    assert_eq!(ra, rb);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalization_bounds_phi(js in prop::collection::vec((0i32..10, 1u32..4), 1..6), x in -200.0f64..200.0, y in -3.0f64..3.0) {
        let total: f64 = js.iter().map(|&(j, n)| 2f64.powi(-j) * n as f64).sum();
        prop_assume!(total <= 1.0);
        let phi = SincProduct::new(js.iter().map(|&(j, n)| (2f64.powi(-j), n)).collect(), 0.0).unwrap();
        prop_assert!(phi.exponent_type() <= 1.0);
        let v = eval_phi(&phi, Complex64::new(x, y));
        prop_assert!(v.norm() <= y.abs().exp() * (1.0 + 1e-12));
        // even and real on the real axis
        let a = eval_phi(&phi, Complex64::new(x, 0.0));
        let b = eval_phi(&phi, Complex64::new(-x, 0.0));
        prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1e-300));
        prop_assert!(a.im.abs() <= 1e-12 * a.norm().max(1e-300));
        prop_assert!((a.re - phi_real(&phi, x)).abs() <= 1e-12 * a.norm().max(1e-300));
    }
}
