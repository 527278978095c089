//! Adaptive Gauss-Kronrod quadrature and Gauss-Legendre rules.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Values the quadrature can integrate.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn norm(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn norm(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn norm(self) -> f64 {
        Complex64::norm(self)
    }
}

/// Quadrature settings.
#[derive(Debug, Clone, Copy)]
pub struct Quad {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for Quad {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 0.0, max_intervals: 1_000_000 }
    }
}

/// Integral value with an error estimate and the integral of the modulus.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub abs_integral: f64,
    pub intervals: usize,
}

/// One 15-point Kronrod panel: (value, error estimate, integral of |f|).
pub fn gk15<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    let mut rabs = fc.norm() * WGK[7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        let s = f1 + f2;
        rk = rk + s * WGK[j];
        rabs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            rg = rg + s * WG[j / 2];
        }
    }
    let value = rk * h;
    let resabs = rabs * h.abs();
    let mut err = ((rk - rg) * h).norm();
    let floor = 50.0 * f64::EPSILON * resabs;
    if err < floor {
        err = floor;
    }
    (value, err, resabs)
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
    abs: f64,
    id: usize,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err).then_with(|| other.id.cmp(&self.id))
    }
}

impl Quad {
    pub fn with_abs_tol(abs_tol: f64) -> Self {
        Self { abs_tol, ..Self::default() }
    }

    /// Integrates `f` over `[a, b]` by bisecting the worst panel until the
    /// summed error estimate meets the tolerance.
    pub fn integrate<T: QuadValue, F: Fn(f64) -> T>(&self, f: F, a: f64, b: f64) -> Result<QuadResult<T>> {
        if a == b {
            return Ok(QuadResult { value: T::zero(), error: 0.0, abs_integral: 0.0, intervals: 0 });
        }
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::Quadrature(format!("non-finite interval [{a}, {b}]")));
        }
        let mut heap = BinaryHeap::new();
        let (v, e, r) = gk15(&f, a, b);
        let mut next_id = 1;
        let mut total_err = e;
        let mut total = v;
        let mut total_abs = r;
        heap.push(Panel { a, b, value: v, err: e, abs: r, id: 0 });
        loop {
            // floored at the summed roundoff of the panels
            let tol = self.abs_tol.max(self.rel_tol * total.norm()).max(64.0 * f64::EPSILON * total_abs);
            if total_err <= tol {
                break;
            }
            if heap.len() >= self.max_intervals {
                return Err(Error::Quadrature(format!(
                    "subinterval cap {} reached on [{a}, {b}] with error {total_err:e}",
                    self.max_intervals
                )));
            }
            let worst = heap.pop().expect("nonempty heap");
            let m = 0.5 * (worst.a + worst.b);
            if m <= worst.a || m >= worst.b {
                heap.push(worst);
                return Err(Error::Quadrature(format!(
                    "interval underflow on [{a}, {b}] with error {total_err:e}"
                )));
            }
            let (v1, e1, r1) = gk15(&f, worst.a, m);
            let (v2, e2, r2) = gk15(&f, m, worst.b);
            total_err += e1 + e2 - worst.err;
            total = total + v1 + v2 - worst.value;
            total_abs += r1 + r2 - worst.abs;
            heap.push(Panel { a: worst.a, b: m, value: v1, err: e1, abs: r1, id: next_id });
            heap.push(Panel { a: m, b: worst.b, value: v2, err: e2, abs: r2, id: next_id + 1 });
            next_id += 2;
        }
        let mut panels = heap.into_vec();
        panels.sort_by(|p, q| p.a.total_cmp(&q.a));
        let mut value = T::zero();
        let mut err = 0.0;
        let mut abs = 0.0;
        // Pairwise-free left-to-right pass; counts are small.
        let mut comp = T::zero();
        for p in &panels {
            let y = p.value - comp;
            let t = value + y;
            comp = (t - value) - y;
            value = t;
            err += p.err;
            abs += p.abs;
        }
        Ok(QuadResult { value, error: err, abs_integral: abs, intervals: panels.len() })
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_pair(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_pair(n, z);
        dp = if d != 0.0 { d } else { dp };
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_pair(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// A Gauss-Legendre rule mapped to `[a, b]`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<T: QuadValue, F: Fn(f64) -> T>(&self, f: F, a: f64, b: f64) -> T {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut acc = T::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(c + h * x) * (w * h);
        }
        acc
    }

    pub fn points(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (c + h * x, w * h))
    }
}
