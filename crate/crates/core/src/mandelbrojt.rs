//! Products of dilated cardinal sines with prescribed decay, and the
//! nonzero measures with vanishing cosine transform they produce.

use std::f64::consts::{E, LN_2};
use std::fmt::Write as _;

use num_complex::Complex64;
use num_traits::Zero;

use crate::convexcalc::{qf, qi, qr, vul_integral_verdict, PlConvex, TailClass, VerdictKind};
use crate::cosxform::cosine_transform_with;
use crate::error::{Error, Result};
use crate::measures::{PlDensity, SignedMeasure};
use crate::numeric::quad::Quad;
use crate::numeric::{parse_real, sqrt_upper};
use crate::par::{self, Execution};
use crate::report::{fmt_num, EstimateReport, EstimateRow, Scale};

/// Budget on `sum n a`; the slack `1 - BUDGET` drives the truncation bound.
pub const BUDGET: f64 = 15.0 / 16.0;

/// `Phi(z) = prod (sin(a z)/(a z))^n` with the certified bound
/// `|Phi(z)| <= K exp(|y| - p(sqrt|z|) - sqrt|z|)` for `|z| <= rmax`.
#[derive(Debug, Clone, PartialEq)]
pub struct SincProduct {
    pub factors: Vec<(f64, u32)>,
    pub log_k: f64,
}

impl SincProduct {
    pub fn new(mut factors: Vec<(f64, u32)>, log_k: f64) -> Result<Self> {
        for &(a, n) in &factors {
            if !(a > 0.0 && a.is_finite()) || n == 0 {
                return Err(Error::Invalid(format!("factor needs a > 0 and n >= 1, got a = {a}, n = {n}")));
            }
        }
        factors.sort_by(|x, y| y.0.total_cmp(&x.0));
        let mut merged: Vec<(f64, u32)> = Vec::new();
        for (a, n) in factors {
            match merged.last_mut() {
                Some(last) if last.0 == a => last.1 += n,
                _ => merged.push((a, n)),
            }
        }
        let s = Self { factors: merged, log_k };
        if s.exponent_type() > 1.0 + 1e-12 {
            return Err(Error::Invalid(format!("sum n a = {} exceeds 1", s.exponent_type())));
        }
        Ok(s)
    }

    /// `tau = sum n a`.
    pub fn exponent_type(&self) -> f64 {
        self.factors.iter().map(|&(a, n)| a * n as f64).sum()
    }

    pub fn multiplicity(&self) -> u64 {
        self.factors.iter().map(|&(_, n)| n as u64).sum()
    }

    /// `E(r) = sum n max(0, log(a r))`, so `|Phi(x)| <= exp(-E(|x|))` on the real line.
    pub fn envelope(&self, r: f64) -> f64 {
        self.factors.iter().map(|&(a, n)| n as f64 * (a * r).ln().max(0.0)).sum()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "logk {}", fmt_num(self.log_k));
        for &(a, n) in &self.factors {
            let _ = writeln!(s, "factor {} {n}", fmt_num(a));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut factors = Vec::new();
        let mut log_k = 0.0;
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let t: Vec<&str> = line.split_whitespace().collect();
            match t[0] {
                "factor" if t.len() == 3 => {
                    let a = parse_real(t[1]).ok_or_else(|| Error::parse(ln, format!("bad dilation '{}'", t[1])))?;
                    let n = t[2].parse::<u32>().map_err(|_| Error::parse(ln, format!("bad multiplicity '{}'", t[2])))?;
                    factors.push((a, n));
                }
                "logk" if t.len() == 2 => {
                    log_k = parse_real(t[1]).ok_or_else(|| Error::parse(ln, format!("bad log K '{}'", t[1])))?;
                }
                _ => return Err(Error::parse(ln, format!("expected 'factor <a> <n>' or 'logk <v>', got '{line}'"))),
            }
        }
        Self::new(factors, log_k).map_err(|e| Error::parse(text.lines().count(), e.to_string()))
    }
}

/// `log |sin w|` without overflow.
fn log_abs_sin(w: Complex64) -> f64 {
    let y = w.im.abs();
    if y > 20.0 {
        // |sin w| = e^{|y|}/2 |1 - e^{-2|y|} e^{+-2 i x}|
        let t = Complex64::from_polar((-2.0 * y).exp(), 2.0 * w.re * w.im.signum());
        y - LN_2 + (Complex64::new(1.0, 0.0) - t).norm().ln()
    } else {
        w.sin().norm().ln()
    }
}

/// `sin(w)/w` by series near 0.
fn sinc(w: Complex64) -> Complex64 {
    if w.norm() < 1e-4 {
        let w2 = w * w;
        Complex64::new(1.0, 0.0) - w2 / 6.0 + w2 * w2 / 120.0
    } else {
        w.sin() / w
    }
}

/// `log |Phi(z)|`.
pub fn log_abs_phi(phi: &SincProduct, z: Complex64) -> f64 {
    let mut s = 0.0;
    for &(a, n) in &phi.factors {
        let w = z * a;
        let l = if w.norm() < 1e-4 { sinc(w).norm().ln() } else { log_abs_sin(w) - w.norm().ln() };
        s += n as f64 * l;
    }
    s
}

/// `Phi(z)` from its log-modulus and accumulated phase.
pub fn eval_phi(phi: &SincProduct, z: Complex64) -> Complex64 {
    let mut arg = 0.0;
    for &(a, n) in &phi.factors {
        let v = sinc(z * a);
        if v.is_zero() {
            return Complex64::zero();
        }
        arg += n as f64 * v.arg();
    }
    let l = log_abs_phi(phi, z);
    if l == f64::NEG_INFINITY {
        return Complex64::zero();
    }
    Complex64::from_polar(l.exp(), arg)
}

/// `Phi(x)` for real `x`, where every factor is real.
pub fn phi_real(phi: &SincProduct, x: f64) -> f64 {
    let mut sign = 1.0;
    let mut l = 0.0;
    for &(a, n) in &phi.factors {
        let w = a * x;
        let v = if w.abs() < 1e-4 { 1.0 - w * w / 6.0 + w.powi(4) / 120.0 } else { w.sin() / w };
        if v == 0.0 {
            return 0.0;
        }
        if v < 0.0 && n % 2 == 1 {
            sign = -sign;
        }
        l += n as f64 * v.abs().ln();
    }
    sign * l.exp()
}

/// `D(r) = p(sqrt r) + sqrt r`.
fn demand(p: &PlConvex, r: f64) -> f64 {
    p.value(r.sqrt()) + r.sqrt()
}

/// Radii `2^{m/8}`, `m = 0..=8 log2(rmax)`.
pub fn radii(rmax: f64) -> Vec<f64> {
    let top = (8.0 * rmax.log2()).floor() as i32;
    (0..=top).map(|m| 2f64.powf(m as f64 / 8.0)).collect()
}

/// Greedy multiplicities for a given `log K`; `Err(radius)` when the
/// budget runs out first.
fn greedy(p: &PlConvex, rs: &[f64], log_k: f64) -> std::result::Result<Vec<(i32, u32)>, f64> {
    if demand(p, rs[0]) > log_k {
        return Err(rs[0]);
    }
    let mut mult: Vec<(i32, u32)> = Vec::new();
    let mut cost = 0.0;
    for (i, &r) in rs.iter().enumerate() {
        let next = rs.get(i + 1).copied().unwrap_or(r);
        let need = demand(p, next) - log_k;
        let e: f64 = mult.iter().map(|&(j, n)| n as f64 * (r / 2f64.powi(j)).ln().max(0.0)).sum();
        if e >= need {
            continue;
        }
        let j = (r / E).log2().floor() as i32;
        let a = 2f64.powi(-j);
        let per = (a * r).ln();
        let k = ((need - e) / per).ceil() as u32;
        cost += k as f64 * a;
        if cost > BUDGET {
            return Err(r);
        }
        match mult.iter_mut().find(|(jj, _)| *jj == j) {
            Some(m) => m.1 += k,
            None => mult.push((j, k)),
        }
    }
    Ok(mult)
}

/// Builds a product meeting `E(r_m) >= D(r_{m+1}) - log K` on the radii up
/// to `rmax`, with the smallest `log K` found by bisection.
pub fn build_sinc_product(p: &PlConvex, rmax: f64) -> Result<SincProduct> {
    let v = vul_integral_verdict(p)?;
    if v.kind != VerdictKind::Converges {
        return Err(Error::Precondition(format!("int p(s)/s^3 ds must converge: {}", v.witness)));
    }
    if !(rmax >= 2.0 && rmax.is_finite()) {
        return Err(Error::Invalid(format!("rmax must be a finite number >= 2, got {rmax}")));
    }
    let rs = radii(rmax);
    let mut hi = demand(p, rs[0]).max(1.0);
    loop {
        let failed_at = match greedy(p, &rs, hi) {
            Ok(_) => break,
            Err(r) => r,
        };
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::Infeasible {
                radius: failed_at,
                msg: format!("budget sum n a <= {BUDGET} exhausted for every log K up to 1e6"),
            });
        }
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if greedy(p, &rs, mid).is_ok() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mult = greedy(p, &rs, hi).expect("feasible at the upper bracket");
    SincProduct::new(mult.into_iter().map(|(j, n)| (2f64.powi(-j), n)).collect(), hi)
}

/// `log|Phi(z)| <= log K + |y| - p(sqrt|z|) - sqrt|z|` on `grid`.
pub fn bound_check(phi: &SincProduct, p: &PlConvex, grid: &[Complex64], tol: f64) -> EstimateReport {
    let mut rep = EstimateReport::new("sinc_bound", Scale::Linear, tol);
    for &z in grid {
        let r = z.norm();
        let lhs = log_abs_phi(phi, z);
        let rhs = phi.log_k + z.im.abs() - p.value(r.sqrt()) - r.sqrt();
        rep.push(EstimateRow::from_logs(r, lhs, rhs, tol).with_constant("K"));
    }
    rep
}

/// Real axis and the line `Im z = 1`, geometrically spaced up to `rmax`.
pub fn certification_grid(rmax: f64) -> Vec<Complex64> {
    let n = (16.0 * rmax.log2()).floor() as i32;
    let mut xs = vec![0.0, 0.25, 0.5, 0.75];
    xs.extend((0..=n).map(|m| 2f64.powf(m as f64 / 16.0)));
    let mut g: Vec<Complex64> = xs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    g.extend(xs.iter().filter(|&&x| x * x + 1.0 <= rmax * rmax).map(|&x| Complex64::new(x, 1.0)));
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Re,
    Im,
}

/// A measure `d sigma = Re/Im (e^{i lambda} Phi(lambda)) d lambda` on `[-L, L]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CounterMeasure {
    pub sigma: SignedMeasure,
    pub product: SincProduct,
    pub part: Part,
    pub lambda: f64,
}

impl CounterMeasure {
    /// Bound on `|c sigma(x)|` from discarding `|lambda| > L`.
    pub fn truncation_bound(&self, x: f64) -> Result<f64> {
        truncation_bound(&self.product, self.lambda, x)
    }
}

/// Bound on the cosine transform of the discarded tails.
///
/// Shifting `[-L, L]` to the vertical rays from `+-L` gives
/// `sum_{+-} int_0^inf exp(x Im sqrt(+-L + iy) - (1 - tau) y - E(|z|)) dy`.
pub fn truncation_bound(phi: &SincProduct, lambda: f64, x: f64) -> Result<f64> {
    let delta = 1.0 - phi.exponent_type();
    if delta <= 0.0 {
        return Err(Error::Precondition("sum n a must be below 1 for the truncation bound".into()));
    }
    let x = x.abs();
    let mut total = 0.0;
    for sgn in [1.0, -1.0] {
        let f = |y: f64| {
            let z = Complex64::new(sgn * lambda, y);
            (x * sqrt_upper(z).im - delta * y - phi.envelope(z.norm())).exp()
        };
        let quad = Quad { abs_tol: 1e-300, rel_tol: 1e-8, max_intervals: 100_000 };
        let mut lo = 0.0;
        let mut hi = 1.0;
        let mut acc = 0.0;
        loop {
            let r = quad.integrate(&f, lo, hi)?;
            acc += r.value + r.error;
            if r.value <= 1e-6 * acc || hi > 1e9 {
                break;
            }
            lo = hi;
            hi *= 2.0;
        }
        total += acc;
    }
    Ok(total)
}

/// Smallest `L` on a grid of step `step` with `truncation_bound(L, xmax) < target`.
pub fn choose_lambda(phi: &SincProduct, xmax: f64, target: f64, step: f64, lmax: f64) -> Result<f64> {
    let mut l = step;
    while l <= lmax {
        if truncation_bound(phi, l, xmax)? < target {
            return Ok(l);
        }
        l += step;
    }
    Err(Error::Infeasible { radius: lmax, msg: format!("truncation bound stays above {target:e} for x = {xmax}") })
}

/// Samples the chosen part of `e^{i lambda} Phi(lambda)` on `n` intervals of `[-L, L]`.
pub fn sigma_from_phi(phi: &SincProduct, part: Part, lambda: f64, n: usize, exec: Execution) -> Result<CounterMeasure> {
    if !(lambda > 0.0) || n < 2 {
        return Err(Error::Invalid(format!("need L > 0 and n >= 2, got L = {lambda}, n = {n}")));
    }
    let h = 2.0 * lambda / n as f64;
    let vals = par::map_range(exec, n + 1, |i| {
        let t = -lambda + h * i as f64;
        let f = phi_real(phi, t);
        match part {
            Part::Re => t.cos() * f,
            Part::Im => t.sin() * f,
        }
    });
    let sigma = SignedMeasure::from_density(PlDensity::new(-lambda, lambda, vals)?);
    let tv = sigma.total_variation();
    if !(tv > 1e-2) {
        return Err(Error::Invalid(format!("degenerate measure: total variation {tv:e} <= 1e-2")));
    }
    Ok(CounterMeasure { sigma, product: phi.clone(), part, lambda })
}

/// Model of the roundoff in `c sigma` relative to `int |kernel| |d sigma|`.
pub const ROUNDOFF_FACTOR: f64 = 128.0 * f64::EPSILON;

/// `|c sigma(x)| <= T(x) + quadrature bound + roundoff` on `xgrid`.
pub fn annihilation_check(cm: &CounterMeasure, xgrid: &[f64], exec: Execution) -> Result<EstimateReport> {
    let mut rep = EstimateReport::new("annihilation", Scale::Linear, 0.0);
    for &x in xgrid {
        let v = cosine_transform_with(&cm.sigma, x, exec)?;
        let allow = cm.truncation_bound(x)? + v.bound + ROUNDOFF_FACTOR * v.abs_integral;
        rep.push(EstimateRow::ratio(x, v.value.abs(), allow, 0.0).with_constant("T+quad+roundoff"));
    }
    Ok(rep)
}

/// `M_sigma(x) <= C exp(p*(x))` with `C = M_sigma(0)`.
pub fn growth_check(sigma: &SignedMeasure, p: &PlConvex, xgrid: &[f64], tol: f64) -> Result<(f64, EstimateReport)> {
    let ps = p.conjugate()?;
    let c = sigma.exp_moment(0.0)?.log_value;
    let mut rep = EstimateReport::new("growth", Scale::Linear, tol);
    for &x in xgrid {
        let m = sigma.exp_moment(x)?;
        rep.push(EstimateRow::from_logs(x, m.log_value, c + ps.value(x), tol).with_constant("C_fit"));
    }
    Ok((c.exp(), rep))
}

/// `p = 0` on `[0, 19/4]`, linear up to `g(32)` at `s = 32`, then
/// `g(s) = s^2 / log^2 s`.
pub fn counterexample_profile() -> Result<PlConvex> {
    let t = 32.0f64;
    let gt = t * t / t.ln().powi(2);
    let tail = TailClass::power_log(1.0, qi(2), qi(-2), qi(32))?;
    PlConvex::new(vec![(qi(0), qi(0)), (qr(19, 4), qi(0)), (qi(32), qf(gt))], crate::convexcalc::Extension::Tail(tail))
}

/// Parameters of the counterexample pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleOptions {
    pub rmax: f64,
    /// Largest `x` of the annihilation grid; fixes `L`.
    pub xmax: f64,
    pub step: f64,
    pub part: Part,
    pub target: f64,
    pub exec: Execution,
}

impl Default for CounterexampleOptions {
    fn default() -> Self {
        Self { rmax: 65536.0, xmax: 4.0, step: 0.05, part: Part::Re, target: 1e-10, exec: Execution::Parallel }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleRun {
    pub measure: CounterMeasure,
    pub bound: EstimateReport,
    pub annihilation: EstimateReport,
    pub growth: EstimateReport,
    pub growth_constant: f64,
}

impl CounterexampleRun {
    pub fn all_pass(&self) -> bool {
        self.bound.all_pass() && self.annihilation.all_pass() && self.growth.all_pass()
    }
}

/// Product, certification, measure, annihilation and growth for `p`.
pub fn counterexample(p: &PlConvex, opts: &CounterexampleOptions, xgrid: &[f64], growth_grid: &[f64]) -> Result<CounterexampleRun> {
    let phi = build_sinc_product(p, opts.rmax)?;
    let bound = bound_check(&phi, p, &certification_grid(opts.rmax), 1e-9);
    let lambda = choose_lambda(&phi, opts.xmax, opts.target, 100.0, opts.rmax)?;
    let n = (2.0 * lambda / opts.step).round() as usize;
    let measure = sigma_from_phi(&phi, opts.part, lambda, n, opts.exec)?;
    let annihilation = annihilation_check(&measure, xgrid, opts.exec)?;
    let (c, growth) = growth_check(&measure.sigma, p, growth_grid, 1e-9)?;
    Ok(CounterexampleRun { measure, bound, annihilation, growth, growth_constant: c })
}
