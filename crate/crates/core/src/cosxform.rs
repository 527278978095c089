//! Cosine transform with its cosh branch, the shifted Stieltjes transform,
//! the map `f -> phi_f`, and the kernel identity.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measures::{Segment, SignedMeasure};
use crate::numeric::fd::central_stencil;
use crate::numeric::quad::{gk15, Quad};
use crate::numeric::sum::{CNeumaier, Neumaier};
use crate::numeric::{clog1p, log_cosh, sqrt_upper};
use crate::par::{self, Execution};
use crate::report::{fmt_num, EstimateReport, EstimateRow, Scale};

const I: Complex64 = Complex64::new(0.0, 1.0);
const CHUNK: usize = 2048;

/// A value with an error bound and the integral of the modulus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Valued<T> {
    pub value: T,
    pub bound: f64,
    pub abs_integral: f64,
}

/// `cos(x sqrt(lambda))`, read as `cosh(x sqrt(-lambda))` for `lambda < 0`.
pub fn kernel(x: f64, lambda: f64) -> f64 {
    if lambda >= 0.0 {
        (x * lambda.sqrt()).cos()
    } else {
        (x * (-lambda).sqrt()).cosh()
    }
}

fn segment_cos(x: f64, seg: Segment, quad: &Quad) -> Result<(f64, f64, f64)> {
    let (a, b, va, vb) = seg;
    let mut parts = vec![];
    if a < 0.0 && b > 0.0 {
        let v0 = va + (vb - va) * (-a / (b - a));
        parts.push((a, 0.0, va, v0));
        parts.push((0.0, b, v0, vb));
    } else {
        parts.push(seg);
    }
    let mut val = 0.0;
    let mut err = 0.0;
    let mut abs = 0.0;
    for (a, b, va, vb) in parts {
        let f = |t: f64| (va + (vb - va) * ((t - a) / (b - a))) * kernel(x, t);
        let (v, e, r) = gk15(&f, a, b);
        let tol = quad.abs_tol.max(1e-13 * r);
        if e <= tol {
            val += v;
            err += e;
            abs += r;
        } else {
            let q = Quad { abs_tol: tol, ..*quad };
            let r = q.integrate(f, a, b)?;
            val += r.value;
            err += r.error;
            abs += r.abs_integral;
        }
    }
    Ok((val, err, abs))
}

/// `(c sigma)(x) = int cos(x sqrt(lambda)) d sigma(lambda)`.
pub fn cosine_transform(sigma: &SignedMeasure, x: f64) -> Result<Valued<f64>> {
    cosine_transform_with(sigma, x, Execution::Sequential)
}

pub fn cosine_transform_with(sigma: &SignedMeasure, x: f64, exec: Execution) -> Result<Valued<f64>> {
    let mut sum = Neumaier::new();
    let mut abs = Neumaier::new();
    for &(l, m) in sigma.atoms() {
        if m == 0.0 {
            continue;
        }
        if l >= 0.0 {
            let v = m * (x * l.sqrt()).cos();
            sum.add(v);
            abs.add(v.abs());
        } else if x * (-l).sqrt() < 700.0 && (m * (x * (-l).sqrt()).cosh()).is_finite() {
            let v = m * (x * (-l).sqrt()).cosh();
            sum.add(v);
            abs.add(v.abs());
        } else {
            let lg = m.abs().ln() + log_cosh(x * (-l).sqrt());
            if lg > 709.0 {
                return Err(Error::Overflow(format!(
                    "cosh branch of atom at lambda = {l} (mass {m}) exceeds f64 range at x = {x}"
                )));
            }
            let v = m.signum() * lg.exp();
            sum.add(v);
            abs.add(v.abs());
        }
    }
    let segs = sigma.segments();
    let quad = Quad::default();
    let chunks = par::map_chunks(exec, segs.len(), CHUNK, |r| -> Result<(Neumaier, f64, f64)> {
        let mut s = Neumaier::new();
        let mut e = 0.0;
        let mut ab = 0.0;
        for seg in &segs[r] {
            let (v, er, a) = segment_cos(x, *seg, &quad)?;
            s.add(v);
            e += er;
            ab += a;
        }
        Ok((s, e, ab))
    });
    let mut err = 0.0;
    for c in chunks {
        let (s, e, a) = c?;
        sum.add(s.value());
        err += e;
        abs.add(a);
    }
    let value = sum.value();
    if !value.is_finite() {
        return Err(Error::Overflow(format!("cosine transform not representable at x = {x}")));
    }
    let abs = abs.value();
    Ok(Valued { value, bound: err + 16.0 * f64::EPSILON * abs, abs_integral: abs })
}

/// Transform values on a grid with per-point bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformGrid {
    pub xs: Vec<f64>,
    pub values: Vec<Complex64>,
    pub truncation_error: Vec<f64>,
}

impl TransformGrid {
    /// CSV with header `x,value_re,value_im,trunc_bound`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,value_re,value_im,trunc_bound\n");
        for ((x, v), e) in self.xs.iter().zip(&self.values).zip(&self.truncation_error) {
            let _ = writeln!(s, "{},{},{},{}", fmt_num(*x), fmt_num(v.re), fmt_num(v.im), fmt_num(*e));
        }
        s
    }
}

fn check_grid(xs: &[f64]) -> Result<()> {
    if xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Invalid("grid abscissae must increase strictly".into()));
    }
    Ok(())
}

/// Cosine transform on a grid; points are independent and assembled in order.
pub fn cosine_grid(sigma: &SignedMeasure, xs: &[f64], exec: Execution) -> Result<TransformGrid> {
    check_grid(xs)?;
    let vals = par::map(exec, xs, |&x| cosine_transform(sigma, x));
    let mut values = Vec::with_capacity(xs.len());
    let mut errs = Vec::with_capacity(xs.len());
    for v in vals {
        let v = v?;
        values.push(Complex64::new(v.value, 0.0));
        errs.push(v.bound);
    }
    Ok(TransformGrid { xs: xs.to_vec(), values, truncation_error: errs })
}

/// Stieltjes transform on a grid of real `x` (the `+i` shift is built in).
pub fn stieltjes_grid(sigma: &SignedMeasure, xs: &[f64], exec: Execution) -> Result<TransformGrid> {
    check_grid(xs)?;
    let vals = par::map(exec, xs, |&x| stieltjes_transform(sigma, Complex64::new(x, 0.0)));
    let mut values = Vec::with_capacity(xs.len());
    let mut errs = Vec::with_capacity(xs.len());
    for v in vals {
        let v = v?;
        values.push(v.value);
        errs.push(v.bound);
    }
    Ok(TransformGrid { xs: xs.to_vec(), values, truncation_error: errs })
}

/// `int_a^b rho(lambda) / (lambda - w) d lambda` for linear `rho`, `Im w >= 1`.
pub fn segment_stieltjes(seg: Segment, w: Complex64) -> Complex64 {
    let (a, b, va, vb) = seg;
    let h = b - a;
    let beta = (vb - va) / h;
    let rho_w = va + beta * (w - a);
    clog1p(Complex64::new(h, 0.0) / (a - w)) * rho_w + beta * h
}

/// Stieltjes transform restricted to the given atoms and pieces.
pub fn stieltjes_parts(atoms: &[(f64, f64)], segs: &[Segment], z: Complex64) -> Valued<Complex64> {
    let w = z + I;
    let mut s = CNeumaier::new();
    let mut abs = 0.0;
    for &(l, m) in atoms {
        let t = m / (l - w);
        s.add(t);
        abs += t.norm();
    }
    for &seg in segs {
        let t = segment_stieltjes(seg, w);
        s.add(t);
        abs += t.norm();
    }
    Valued { value: s.value(), bound: 16.0 * f64::EPSILON * abs, abs_integral: abs }
}

/// `F(z) = int d sigma(lambda) / (lambda - (z + i))` for `Im z >= 0`.
pub fn stieltjes_transform(sigma: &SignedMeasure, z: Complex64) -> Result<Valued<Complex64>> {
    if z.im < 0.0 {
        return Err(Error::Precondition(format!("stieltjes transform needs Im z >= 0, got {}", z.im)));
    }
    Ok(stieltjes_parts(sigma.atoms(), &sigma.segments(), z))
}

/// Evaluators for `f(x) = int e^{i x lambda} d sigma` and `phi_f = c sigma`.
#[derive(Debug, Clone, Copy)]
pub struct PhiMap<'a> {
    pub sigma: &'a SignedMeasure,
}

pub fn phi_map(sigma: &SignedMeasure) -> PhiMap<'_> {
    PhiMap { sigma }
}

impl PhiMap<'_> {
    pub fn f(&self, x: f64) -> Result<Complex64> {
        let mut s = CNeumaier::new();
        for &(l, m) in self.sigma.atoms() {
            s.add(Complex64::from_polar(m, x * l));
        }
        let quad = Quad::with_abs_tol(1e-13);
        for (a, b, va, vb) in self.sigma.segments() {
            let r = quad.integrate(
                |t: f64| Complex64::from_polar(va + (vb - va) * ((t - a) / (b - a)), x * t),
                a,
                b,
            )?;
            s.add(r.value);
        }
        Ok(s.value())
    }

    pub fn phi(&self, x: f64) -> Result<f64> {
        Ok(cosine_transform(self.sigma, x)?.value)
    }
}

/// Compares finite-difference derivatives at 0 with the moment identities.
///
/// Rows carry the discrepancy `|FD - exact| / (R^k ||sigma||)` against the
/// budget `tol`; `x` holds the derivative order.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeReport {
    pub f: EstimateReport,
    pub phi: EstimateReport,
}

impl DerivativeReport {
    pub fn all_pass(&self) -> bool {
        self.f.all_pass() && self.phi.all_pass()
    }

    pub fn max_discrepancy(&self) -> f64 {
        self.f.rows.iter().chain(&self.phi.rows).map(|r| r.lhs).fold(0.0, f64::max)
    }
}

pub fn derivative_moment_check(sigma: &SignedMeasure, kmax: usize, tol: f64) -> Result<DerivativeReport> {
    if kmax > 12 {
        return Err(Error::Precondition(format!("kmax = {kmax} exceeds the conditioning cap 12")));
    }
    let map = phi_map(sigma);
    let r = sigma.support().map(|(lo, hi)| lo.abs().max(hi.abs())).unwrap_or(1.0).max(1.0);
    let tv = sigma.total_variation();
    let mut f_rep = EstimateReport::new("derivative_f", Scale::Linear, 0.0);
    let mut p_rep = EstimateReport::new("derivative_phi", Scale::Linear, 0.0);
    let hf = 0.2 / r;
    let hp = 0.2 / r.sqrt();
    for k in 0..=kmax {
        let (offs, w) = central_stencil(k);
        let mut d = Complex64::new(0.0, 0.0);
        for (o, wj) in offs.iter().zip(&w) {
            d += map.f(*o as f64 * hf)? * *wj;
        }
        d /= hf.powi(k as i32);
        let mk = sigma.moment(k as u32)?;
        let exact = I.powu(k as u32) * mk;
        let scale = r.powi(k as i32) * tv;
        let disc = if scale > 0.0 { (d - exact).norm() / scale } else { 0.0 };
        f_rep.push(EstimateRow::ratio(k as f64, disc, tol, 0.0));

        let mut dp = 0.0;
        for (o, wj) in offs.iter().zip(&w) {
            dp += map.phi(*o as f64 * hp)? * *wj;
        }
        dp /= hp.powi(k as i32);
        let exact = if k % 2 == 0 {
            let j = (k / 2) as u32;
            (if j % 2 == 0 { 1.0 } else { -1.0 }) * sigma.moment(j)?
        } else {
            0.0
        };
        let scale = r.powf(k as f64 / 2.0) * tv;
        let disc = if scale > 0.0 { (dp - exact).abs() / scale } else { 0.0 };
        p_rep.push(EstimateRow::ratio(k as f64, disc, tol, 0.0));
    }
    Ok(DerivativeReport { f: f_rep, phi: p_rep })
}

/// Outcome of one kernel identity evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelCheck {
    pub u_max: f64,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
    pub bound: f64,
    pub row: EstimateRow,
}

/// `(i / sqrt(x+i)) int_0^U cos(u sqrt(lambda)) exp(i u sqrt(x+i)) du`
/// against `1 / (lambda - (x + i))`.
pub fn kernel_identity_check(x: f64, lambda: f64, u_max: Option<f64>) -> Result<KernelCheck> {
    if !(x < 0.0) {
        return Err(Error::Precondition(format!("kernel identity needs x < 0, got {x}")));
    }
    if !(lambda >= 0.0) {
        return Err(Error::Precondition(format!("kernel identity needs lambda >= 0, got {lambda}")));
    }
    let b = sqrt_upper(Complex64::new(x, 1.0));
    let u_max = u_max.unwrap_or(12.0 * std::f64::consts::LN_10 / b.im);
    let a = lambda.sqrt();
    let quad = Quad::with_abs_tol(1e-14);
    let r = quad.integrate(|u: f64| (I * b * u).exp() * (u * a).cos(), 0.0, u_max)?;
    let lhs = I / b * r.value;
    let rhs = Complex64::new(1.0, 0.0) / (Complex64::new(lambda, 0.0) - Complex64::new(x, 1.0));
    let residual = (lhs - rhs).norm();
    let tail = (-u_max * b.im).exp() / (b.norm() * b.im);
    let bound = tail + (r.error + 16.0 * f64::EPSILON * r.abs_integral) / b.norm();
    let row = EstimateRow::ratio(x, residual, bound, 0.0);
    Ok(KernelCheck { u_max, lhs, rhs, residual, bound, row })
}
