//! Numerical replay of the uniqueness argument for `c sigma = 0`: the
//! split of the Stieltjes transform, the `I_1`/`I_2` estimates, and the
//! weighted log-integral of `|F|` along the negative axis.

use std::fmt;

use num_complex::Complex64;

use crate::convexcalc::{vul_integral_verdict, PlConvex, Verdict, VerdictKind};
use crate::cosxform::{cosine_transform_with, stieltjes_parts, Valued};
use crate::error::{Error, Result};
use crate::measures::{DecayCertificate, Segment, SignedMeasure};
use crate::numeric::quad::{gk15, Quad};
use crate::numeric::sqrt_upper;
use crate::numeric::sum::{CNeumaier, LogSum, Neumaier};
use crate::par::{self, Execution};
use crate::report::{EstimateReport, EstimateRow, Scale};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const CHUNK: usize = 1024;
const LOG_FLOOR: f64 = -745.0;

/// Atoms and density pieces on each side of `x/4`.
struct Split {
    left_atoms: Vec<(f64, f64)>,
    left_segs: Vec<Segment>,
    right_atoms: Vec<(f64, f64)>,
    right_segs: Vec<Segment>,
}

fn split(sigma: &SignedMeasure, x: f64) -> Split {
    let c = x / 4.0;
    let (la, ra): (Vec<_>, Vec<_>) = sigma.atoms().iter().partition(|&&(l, _)| l <= c);
    Split {
        left_atoms: la,
        left_segs: sigma.segments_in(f64::NEG_INFINITY, c),
        right_atoms: ra,
        right_segs: sigma.segments_in(c, f64::INFINITY),
    }
}

fn check_x(x: f64) -> Result<()> {
    if x < 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("x must be a negative real, got {x}")))
    }
}

/// `F_1 = int_{lambda <= x/4}` and `F_2 = int_{lambda > x/4}` of
/// `d sigma / (lambda - (x + i))`.
pub fn split_f(sigma: &SignedMeasure, x: f64) -> Result<(Complex64, Complex64)> {
    let (f1, f2) = split_f_valued(sigma, x)?;
    Ok((f1.value, f2.value))
}

pub fn split_f_valued(sigma: &SignedMeasure, x: f64) -> Result<(Valued<Complex64>, Valued<Complex64>)> {
    check_x(x)?;
    let s = split(sigma, x);
    let z = Complex64::new(x, 0.0);
    Ok((stieltjes_parts(&s.left_atoms, &s.left_segs, z), stieltjes_parts(&s.right_atoms, &s.right_segs, z)))
}

/// `u* = p(sqrt|x|/2) / (2 sqrt|x|)`.
pub fn u_star(p: &PlConvex, x: f64) -> Result<f64> {
    check_x(x)?;
    if !p.is_normalized() {
        return Err(Error::NotNormalized("u_star needs a normalized profile".into()));
    }
    let r = (-x).sqrt();
    let v = p.value(r / 2.0);
    if !v.is_finite() {
        return Err(Error::Precondition(format!("p is infinite at sqrt|x|/2 = {}", r / 2.0)));
    }
    Ok(v / (2.0 * r))
}

/// Checks `p*(2u*) <= p(sqrt|x|/2) / 2`; rows hold the two exponents.
pub fn halving_lemma_check(p: &PlConvex, xgrid: &[f64], tol: f64) -> Result<EstimateReport> {
    let ps = p.conjugate()?;
    let mut rep = EstimateReport::new("halving_lemma", Scale::Log, tol);
    for &x in xgrid {
        let u = u_star(p, x)?;
        let lhs = ps.value(2.0 * u);
        let rhs = 0.5 * p.value((-x).sqrt() / 2.0);
        let slack = tol * rhs.abs().max(1.0);
        rep.push(EstimateRow::exponent(x, lhs, rhs, slack));
    }
    Ok(rep)
}

fn expm1_over(z: Complex64) -> Complex64 {
    // (e^z - 1)/z
    if z.norm() < 1e-4 {
        Complex64::new(1.0, 0.0) + z / 2.0 + z * z / 6.0 + z * z * z / 24.0
    } else {
        (z.exp() - 1.0) / z
    }
}

/// `int_{u0}^{u1} e^{i c u} du`, with `u1 = None` meaning infinity.
pub fn phase_integral(c: Complex64, u0: f64, u1: Option<f64>) -> Complex64 {
    let head = (I * c * u0).exp();
    match u1 {
        Some(u1) => {
            let len = u1 - u0;
            head * len * expm1_over(I * c * len)
        }
        None => head * I / c,
    }
}

/// `(i/b) int_{u0}^{u1} cos(u sqrt(lambda)) e^{i u b} du` with `b = sqrt(x + i)`.
pub fn u_kernel(lambda: f64, b: Complex64, u0: f64, u1: Option<f64>) -> Complex64 {
    let a = if lambda >= 0.0 { Complex64::new(lambda.sqrt(), 0.0) } else { Complex64::new(0.0, (-lambda).sqrt()) };
    let s = phase_integral(b + a, u0, u1) + phase_integral(b - a, u0, u1);
    I / b * 0.5 * s
}

/// `int g d sigma` over the given atoms and pieces.
fn integrate_kernel<G>(atoms: &[(f64, f64)], segs: &[Segment], g: G, exec: Execution) -> Result<Valued<Complex64>>
where
    G: Fn(f64) -> Complex64 + Sync,
{
    let mut sum = CNeumaier::new();
    let mut abs = Neumaier::new();
    for &(l, m) in atoms {
        let t = g(l) * m;
        sum.add(t);
        abs.add(t.norm());
    }
    let quad = Quad::with_abs_tol(1e-14);
    let parts = par::map_chunks(exec, segs.len(), CHUNK, |r| -> Result<(Complex64, f64, f64)> {
        let mut s = CNeumaier::new();
        let mut e = 0.0;
        let mut ab = 0.0;
        for &(a, b, va, vb) in &segs[r] {
            let f = |t: f64| g(t) * (va + (vb - va) * ((t - a) / (b - a)));
            let (v, er, ra) = gk15(&f, a, b);
            if er <= 1e-14 * ra.max(1e-300) || er <= 1e-300 {
                s.add(v);
                e += er;
                ab += ra;
            } else {
                let q = Quad { abs_tol: (1e-13 * ra).max(1e-300), max_intervals: 2000, ..quad };
                match q.integrate(f, a, b) {
                    Ok(r) => {
                        s.add(r.value);
                        e += r.error;
                        ab += r.abs_integral;
                    }
                    // cancellation noise: keep the panel with its own error estimate
                    Err(Error::Quadrature(_)) => {
                        s.add(v);
                        e += er;
                        ab += ra;
                    }
                    Err(other) => return Err(other),
                }
            }
        }
        Ok((s.value(), e, ab))
    });
    let mut err = 0.0;
    for p in parts {
        let (v, e, a) = p?;
        sum.add(v);
        err += e;
        abs.add(a);
    }
    let abs = abs.value();
    Ok(Valued { value: sum.value(), bound: err + 64.0 * f64::EPSILON * abs, abs_integral: abs })
}

/// Constants of the chain: `C_dec` for the decay bound, `C_maj` for
/// `M_sigma(x) <= C_maj exp(p*(x))`, `C_tv` for the `I_2` kernel bound.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainCertificate {
    pub dec: DecayCertificate,
    pub c_maj: f64,
    pub c_tv: f64,
}

impl ChainCertificate {
    /// Tight constants on the points the chain evaluates at `xgrid`.
    pub fn synthesize(sigma: &SignedMeasure, p: &PlConvex, xgrid: &[f64]) -> Result<Self> {
        for &x in xgrid {
            check_x(x)?;
        }
        let dec_grid: Vec<f64> = xgrid.iter().map(|x| x / 4.0).collect();
        let c_dec = crate::measures::synthesize_constant(sigma, p, &dec_grid);
        let ps = p.conjugate()?;
        let mut maj = f64::NEG_INFINITY;
        for &x in xgrid {
            let u = u_star(p, x)?;
            for t in [u, 2.0 * u] {
                let m = sigma.exp_moment(t)?;
                if m.log_value > f64::NEG_INFINITY {
                    maj = maj.max(m.log_value - ps.value(t));
                }
            }
        }
        let c_maj = if maj == f64::NEG_INFINITY { 1.0 } else { maj.exp() };
        let xs_min = xgrid.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
        let tv = sigma.total_variation();
        let c_tv = if tv > 0.0 { tv * (2.0 / xs_min).max(1.0) } else { 1.0 };
        Ok(Self { dec: DecayCertificate::new(p.clone(), c_dec)?, c_maj, c_tv })
    }

    /// Every constant multiplied by `f`.
    pub fn scaled(&self, f: f64) -> Result<Self> {
        Ok(Self { dec: self.dec.with_constant(self.dec.constant * f)?, c_maj: self.c_maj * f, c_tv: self.c_tv * f })
    }

    /// `sqrt(C_dec C_maj)`, the constant of the `I_1` bound.
    pub fn c_i1(&self) -> f64 {
        (self.dec.constant * self.c_maj).sqrt()
    }

    /// Constant of the combined bound `|F| <= 3 C exp(-p/4)`.
    pub fn c_final(&self) -> f64 {
        self.dec.constant.max(self.c_i1()).max(self.c_tv)
    }
}

fn log_abs(v: f64) -> f64 {
    if v > 0.0 {
        v.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// `|F_1(x)| <= int_{-inf}^{x/4} |d sigma|` and the decay bound on the latter.
pub fn est1_check(sigma: &SignedMeasure, cert: &DecayCertificate, xgrid: &[f64], tol: f64) -> Result<EstimateReport> {
    let mut rep = EstimateReport::new("est1", Scale::Linear, tol);
    for &x in xgrid {
        let (f1, _) = split_f_valued(sigma, x)?;
        let mass = sigma.tail_mass(x / 4.0);
        let slack = f1.bound + 64.0 * f64::EPSILON * mass;
        rep.push(EstimateRow::from_logs(x, log_abs(f1.value.norm()), log_abs(mass + slack), tol).with_constant("none"));
        let p = cert.p.value((-x).sqrt() / 2.0);
        rep.push(EstimateRow::from_logs(x, log_abs(mass), cert.constant.ln() - p, tol).with_constant("C_dec"));
    }
    Ok(rep)
}

/// `I_1`, `I_2` and the checks around them at one `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct IValues {
    pub x: f64,
    pub u_star: f64,
    pub i1_direct: Valued<Complex64>,
    pub i1_swapped: Valued<Complex64>,
    pub i2: Valued<Complex64>,
    pub f2: Valued<Complex64>,
}

/// Computes `I_1` directly over `lambda > x/4`, in swapped form over
/// `lambda <= x/4`, and `I_2`, all with closed-form `u`-integrals.
pub fn i_values(sigma: &SignedMeasure, p: &PlConvex, x: f64, exec: Execution) -> Result<IValues> {
    let u = u_star(p, x)?;
    let b = sqrt_upper(Complex64::new(x, 1.0));
    let s = split(sigma, x);
    let g1 = |l: f64| u_kernel(l, b, 0.0, Some(u));
    let g2 = |l: f64| u_kernel(l, b, u, None);
    let i1_direct = integrate_kernel(&s.right_atoms, &s.right_segs, g1, exec)?;
    let mut i1_swapped = integrate_kernel(&s.left_atoms, &s.left_segs, g1, exec)?;
    i1_swapped.value = -i1_swapped.value;
    let i2 = integrate_kernel(&s.right_atoms, &s.right_segs, g2, exec)?;
    let f2 = stieltjes_parts(&s.right_atoms, &s.right_segs, Complex64::new(x, 0.0));
    Ok(IValues { x, u_star: u, i1_direct, i1_swapped, i2, f2 })
}

/// Rows of the `I_1`/`I_2` estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct IBounds {
    /// Decay and growth hypotheses at the points used.
    pub hypotheses: EstimateReport,
    /// `|I_1| <= int exp(u* sqrt|lambda|) |d sigma| <= C exp(-p/2 + p*(2u*)/2)`.
    pub est21_0: EstimateReport,
    /// `|I_1| <= C exp(-p/4)`.
    pub est21: EstimateReport,
    /// `|I_2| <= C exp(-p/4)`.
    pub est22: EstimateReport,
    /// Direct and swapped `I_1` agree.
    pub fubini: EstimateReport,
    /// `I_1 + I_2 = F_2`.
    pub identity: EstimateReport,
    /// `max |c sigma(u)|` on `[0, max u*]` and its quadrature bound.
    pub residual: (f64, f64),
}

impl IBounds {
    pub fn reports(&self) -> [&EstimateReport; 6] {
        [&self.hypotheses, &self.est21_0, &self.est21, &self.est22, &self.fubini, &self.identity]
    }
}

/// `max |c sigma(u)|` over a uniform grid of `[0, umax]`, with its bound,
/// relative to `||sigma||`.
pub fn cosine_residual(sigma: &SignedMeasure, umax: f64, points: usize, exec: Execution) -> Result<(f64, f64)> {
    let n = points.max(2);
    let mut worst = (0.0f64, 0.0f64);
    for j in 0..n {
        let u = umax * j as f64 / (n - 1) as f64;
        let v = cosine_transform_with(sigma, u, exec)?;
        if v.value.abs() > worst.0 {
            worst = (v.value.abs(), v.bound);
        } else {
            worst.1 = worst.1.max(v.bound);
        }
    }
    Ok(worst)
}

/// Options for the `I` bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IOptions {
    pub tol: f64,
    /// Largest admissible `max |c sigma| / ||sigma||`.
    pub residual_tol: f64,
    pub residual_points: usize,
    pub exec: Execution,
}

impl Default for IOptions {
    fn default() -> Self {
        Self { tol: 1e-6, residual_tol: 1e-6, residual_points: 33, exec: Execution::Parallel }
    }
}

pub fn i_bounds_check(sigma: &SignedMeasure, cert: &ChainCertificate, xgrid: &[f64], opts: IOptions) -> Result<IBounds> {
    let p = &cert.dec.p;
    let ps = p.conjugate()?;
    let tv = sigma.total_variation();
    let mut umax = 0.0f64;
    for &x in xgrid {
        umax = umax.max(u_star(p, x)?);
    }
    let residual = if sigma.is_zero() { (0.0, 0.0) } else { cosine_residual(sigma, umax, opts.residual_points, opts.exec)? };
    if residual.0 > opts.residual_tol * tv + residual.1 {
        return Err(Error::Precondition(format!(
            "c sigma is not zero: max |c sigma(u)| = {:e} on [0, {umax}] exceeds {:e} * ||sigma|| = {:e}",
            residual.0,
            opts.residual_tol,
            opts.residual_tol * tv
        )));
    }
    let tol = opts.tol;
    let mut hyp = EstimateReport::new("hypotheses", Scale::Linear, tol);
    let mut r0 = EstimateReport::new("est2.1-0", Scale::Linear, tol);
    let mut r1 = EstimateReport::new("est2.1", Scale::Linear, tol);
    let mut r2 = EstimateReport::new("est2.2", Scale::Linear, tol);
    let mut fub = EstimateReport::new("fubini", Scale::Linear, tol);
    let mut idr = EstimateReport::new("identity", Scale::Linear, tol);
    let lc_dec = cert.dec.constant.ln();
    let lc_maj = cert.c_maj.ln();
    let lc_i1 = cert.c_i1().ln();
    for &x in xgrid {
        let iv = i_values(sigma, p, x, opts.exec)?;
        let u = iv.u_star;
        let px = p.value((-x).sqrt() / 2.0);
        let pst = ps.value(2.0 * u);
        let mass = sigma.tail_mass(x / 4.0);
        hyp.push(EstimateRow::from_logs(x, log_abs(mass), lc_dec - px, tol).with_constant("C_dec"));
        let m2 = sigma.exp_moment(2.0 * u)?;
        hyp.push(EstimateRow::from_logs(x, m2.log_value, lc_maj + pst, tol).with_constant("C_maj"));

        let i1 = iv.i1_swapped.value.norm();
        let s = split(sigma, x);
        let weighted = weighted_tail(&s, u)?;
        let slack = iv.i1_swapped.bound;
        r0.push(EstimateRow::from_logs(x, log_abs(i1), log_abs(weighted + slack), tol).with_constant("none"));
        r0.push(EstimateRow::from_logs(x, log_abs(weighted), lc_i1 - 0.5 * px + 0.5 * pst, tol).with_constant("sqrt(C_dec*C_maj)"));
        r1.push(EstimateRow::from_logs(x, log_abs(i1), lc_i1 - 0.25 * px, tol).with_constant("sqrt(C_dec*C_maj)"));

        let i2 = iv.i2.value.norm();
        r2.push(EstimateRow::from_logs(x, log_abs(i2), cert.c_tv.ln() - 0.25 * px, tol).with_constant("C_tv"));

        let b = sqrt_upper(Complex64::new(x, 1.0));
        let d = (iv.i1_direct.value - iv.i1_swapped.value).norm();
        let allow = iv.i1_direct.bound
            + iv.i1_swapped.bound
            + u / b.norm() * (residual.0 + residual.1)
            + 1e-9 * (iv.i1_direct.abs_integral + iv.i1_swapped.abs_integral);
        fub.push(EstimateRow::ratio(x, d, allow, 0.0).with_constant("none"));

        let e = (iv.i1_direct.value + iv.i2.value - iv.f2.value).norm();
        let allow = iv.i1_direct.bound
            + iv.i2.bound
            + iv.f2.bound
            + 1e-9 * (iv.i1_direct.abs_integral + iv.i2.abs_integral + iv.f2.abs_integral);
        idr.push(EstimateRow::ratio(x, e, allow, 0.0).with_constant("none"));
    }
    Ok(IBounds { hypotheses: hyp, est21_0: r0, est21: r1, est22: r2, fubini: fub, identity: idr, residual })
}

/// `int_{lambda <= x/4} exp(u sqrt|lambda|) |d sigma|`.
fn weighted_tail(s: &Split, u: f64) -> Result<f64> {
    let mut acc = LogSum::new();
    for &(l, m) in &s.left_atoms {
        if m != 0.0 {
            acc.add_log(m.abs().ln() + u * l.abs().sqrt());
        }
    }
    let quad = Quad { abs_tol: 1e-300, rel_tol: 1e-13, max_intervals: 10_000 };
    for &(a, b, va, vb) in &s.left_segs {
        for (a, b, va, vb) in crate::measures::split_at_root(a, b, va, vb) {
            let shift = u * a.abs().sqrt();
            let r = quad.integrate(
                |t: f64| (u * t.abs().sqrt() - shift).exp() * (va + (vb - va) * ((t - a) / (b - a))).abs(),
                a,
                b,
            )?;
            if r.value > 0.0 {
                acc.add_log(r.value.ln() + shift);
            }
        }
    }
    Ok(acc.ln().exp())
}

/// `|F(x)| <= 3 C exp(-p(sqrt|x|/2)/4)`.
pub fn final_bound_check(sigma: &SignedMeasure, cert: &ChainCertificate, xgrid: &[f64], tol: f64) -> Result<EstimateReport> {
    let mut rep = EstimateReport::new("final", Scale::Linear, tol);
    let lc = (3.0 * cert.c_final()).ln();
    for &x in xgrid {
        check_x(x)?;
        let f = stieltjes_parts(sigma.atoms(), &sigma.segments(), Complex64::new(x, 0.0));
        let px = cert.dec.p.value((-x).sqrt() / 2.0);
        rep.push(EstimateRow::from_logs(x, log_abs(f.value.norm()), lc - 0.25 * px, tol).with_constant("max(C_dec,sqrt(C_dec*C_maj),C_tv)"));
    }
    Ok(rep)
}

/// `int_{xmin}^{x0} log|F(x)| / (1 + x^2) dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarlemanValue {
    pub value: f64,
    pub error: f64,
    /// Some `|F(x)|` fell below the representable floor.
    pub clamped: bool,
    /// `F` vanished at every sampled point.
    pub identically_zero: bool,
}

pub fn carleman_logintegral(sigma: &SignedMeasure, x0: f64, xmin: f64) -> Result<CarlemanValue> {
    if !(xmin < x0 && x0 < 0.0) {
        return Err(Error::Precondition(format!("need xmin < x0 < 0, got xmin = {xmin}, x0 = {x0}")));
    }
    let segs = sigma.segments();
    let atoms = sigma.atoms();
    let clamped = std::sync::atomic::AtomicBool::new(false);
    let nonzero = std::sync::atomic::AtomicBool::new(false);
    let f = |x: f64| {
        let v = stieltjes_parts(atoms, &segs, Complex64::new(x, 0.0)).value.norm();
        let l = if v > 0.0 { v.ln() } else { f64::NEG_INFINITY };
        let l = if l < LOG_FLOOR {
            clamped.store(true, std::sync::atomic::Ordering::Relaxed);
            LOG_FLOOR
        } else {
            nonzero.store(true, std::sync::atomic::Ordering::Relaxed);
            l
        };
        l / (1.0 + x * x)
    };
    let r = Quad { abs_tol: 1e-9, rel_tol: 1e-10, max_intervals: 100_000 }.integrate(f, xmin, x0)?;
    let nz = nonzero.load(std::sync::atomic::Ordering::Relaxed);
    Ok(CarlemanValue {
        value: r.value,
        error: r.error,
        clamped: clamped.load(std::sync::atomic::Ordering::Relaxed),
        identically_zero: !nz,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trend {
    /// Increments stay bounded away from zero.
    Divergent,
    /// Increments shrink toward zero.
    Convergent,
    Unclear,
    /// `F` vanishes on the whole range.
    IdenticallyZero,
}

impl fmt::Display for Trend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Trend::Divergent => "divergent",
            Trend::Convergent => "convergent",
            Trend::Unclear => "unclear",
            Trend::IdenticallyZero => "identically zero",
        };
        f.write_str(s)
    }
}

/// Partial log-integrals on a doubling grid paired with the symbolic verdict on `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct CarlemanTrend {
    pub partials: Vec<(f64, CarlemanValue)>,
    pub increments: Vec<f64>,
    pub trend: Trend,
    pub verdict: Verdict,
    /// Trend and verdict point the same way.
    pub consistent: bool,
}

/// Classifies increments `I(2 xmin) - I(xmin)`.
pub fn classify_trend(increments: &[f64], tol: f64) -> Trend {
    if increments.is_empty() {
        return Trend::Unclear;
    }
    let mags: Vec<f64> = increments.iter().map(|d| d.abs()).collect();
    let last = *mags.last().unwrap();
    if last <= tol {
        return Trend::Convergent;
    }
    let ratios: Vec<f64> = mags.windows(2).map(|w| w[1] / w[0]).collect();
    if ratios.iter().all(|&r| r <= 0.75) && !ratios.is_empty() {
        return Trend::Convergent;
    }
    if increments.iter().all(|&d| d < -tol) && ratios.iter().all(|&r| r > 0.75) {
        return Trend::Divergent;
    }
    Trend::Unclear
}

pub fn carleman_trend(sigma: &SignedMeasure, p: &PlConvex, x0: f64, xmins: &[f64], tol: f64) -> Result<CarlemanTrend> {
    let verdict = vul_integral_verdict(p)?;
    let mut partials = Vec::with_capacity(xmins.len());
    for &xm in xmins {
        partials.push((xm, carleman_logintegral(sigma, x0, xm)?));
    }
    let increments: Vec<f64> = partials.windows(2).map(|w| w[1].1.value - w[0].1.value).collect();
    let trend = if partials.iter().all(|(_, v)| v.identically_zero) {
        Trend::IdenticallyZero
    } else {
        classify_trend(&increments, tol)
    };
    let consistent = match (trend, verdict.kind) {
        (Trend::Divergent, VerdictKind::Diverges) | (Trend::Convergent, VerdictKind::Converges) => true,
        (Trend::IdenticallyZero, _) => true,
        _ => false,
    };
    Ok(CarlemanTrend { partials, increments, trend, verdict, consistent })
}

/// Doubling grid `x0 * 2^j`, `j = 1..=n`.
pub fn doubling_grid(start: f64, n: usize) -> Vec<f64> {
    (0..n).map(|j| start * 2f64.powi(j as i32)).collect()
}

/// Every estimate of the chain at each `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProofChainReport {
    pub certificate: ChainCertificate,
    pub est1: EstimateReport,
    pub halving: EstimateReport,
    pub ibounds: IBounds,
    pub final_bound: EstimateReport,
    pub carleman: Option<CarlemanTrend>,
}

impl ProofChainReport {
    pub fn reports(&self) -> Vec<&EstimateReport> {
        let mut v = vec![&self.est1, &self.halving];
        v.extend(self.ibounds.reports());
        v.push(&self.final_bound);
        v
    }

    pub fn all_pass(&self) -> bool {
        self.reports().iter().all(|r| r.all_pass())
    }

    pub fn failures(&self) -> usize {
        self.reports().iter().map(|r| r.failures()).sum()
    }
}

/// Options for [`proof_chain`].
#[derive(Debug, Clone, PartialEq)]
pub struct ChainOptions {
    pub i: IOptions,
    /// Multiplies every synthesized constant.
    pub cert_scale: f64,
    /// Carleman range: `x0` and the doubling grid of `xmin`.
    pub carleman: Option<(f64, Vec<f64>)>,
}

impl Default for ChainOptions {
    fn default() -> Self {
        Self { i: IOptions::default(), cert_scale: 1.0, carleman: Some((-1.0, vec![-10.0, -20.0, -40.0, -80.0])) }
    }
}

/// Synthesizes the constants and runs every check of the chain.
pub fn proof_chain(sigma: &SignedMeasure, p: &PlConvex, xgrid: &[f64], opts: &ChainOptions) -> Result<ProofChainReport> {
    let tol = opts.i.tol;
    let cert = ChainCertificate::synthesize(sigma, p, xgrid)?.scaled(opts.cert_scale)?;
    let est1 = est1_check(sigma, &cert.dec, xgrid, tol)?;
    let halving = halving_lemma_check(p, xgrid, tol)?;
    let ibounds = i_bounds_check(sigma, &cert, xgrid, opts.i)?;
    let final_bound = final_bound_check(sigma, &cert, xgrid, tol)?;
    let carleman = match &opts.carleman {
        Some((x0, xs)) => Some(carleman_trend(sigma, p, *x0, xs, 1e-6)?),
        None => None,
    };
    Ok(ProofChainReport { certificate: cert, est1, halving, ibounds, final_bound, carleman })
}
