//! Piecewise-linear convex functions on `[0, inf)` with symbolic tails.
//!
//! Breakpoints are exact rationals, so conjugation of the PL part is exact.
//! Tails are `c * s^a * (log s)^b` or `c * exp(a s) * s^b` and are used to
//! decide divergence of tail integrals without numerical truncation.

use std::fmt;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Exact rational value of a finite f64.
pub fn qf(x: f64) -> Q {
    Q::from_float(x).expect("finite float")
}

pub fn to_f(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Parses `num/den`, an integer, or a decimal with optional exponent exactly.
pub fn parse_rational(tok: &str) -> Option<Q> {
    let tok = tok.trim();
    if let Some((n, d)) = tok.split_once('/') {
        let n = parse_rational(n)?;
        let d = parse_rational(d)?;
        if d.is_zero() {
            return None;
        }
        return Some(n / d);
    }
    let (mant, exp) = match tok.find(['e', 'E']) {
        Some(i) => (&tok[..i], tok[i + 1..].parse::<i32>().ok()?),
        None => (tok, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int, frac) = match mant.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mant, ""),
    };
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut v = if scale >= 0 {
        Q::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        Q::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        v = -v;
    }
    Some(v)
}

pub fn fmt_rational(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Shape of a symbolic tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailShape {
    /// `c * s^a * (log s)^b`
    PowerLog,
    /// `c * exp(a s) * s^b`
    ExpPower,
}

/// Asymptotic descriptor valid for `s >= threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailClass {
    pub shape: TailShape,
    pub coeff: f64,
    pub power: Q,
    pub logpower: Q,
    pub threshold: Q,
}

impl TailClass {
    pub fn new(shape: TailShape, coeff: f64, power: Q, logpower: Q, threshold: Q) -> Result<Self> {
        if !(coeff > 0.0 && coeff.is_finite()) {
            return Err(Error::Invalid(format!("tail coefficient must be positive, got {coeff}")));
        }
        if threshold <= qi(1) {
            return Err(Error::Invalid(format!("tail threshold must exceed 1, got {}", fmt_rational(&threshold))));
        }
        if shape == TailShape::ExpPower && !power.is_positive() {
            return Err(Error::Invalid("exponential tail needs a positive rate".into()));
        }
        Ok(Self { shape, coeff, power, logpower, threshold })
    }

    pub fn power_log(coeff: f64, power: Q, logpower: Q, threshold: Q) -> Result<Self> {
        Self::new(TailShape::PowerLog, coeff, power, logpower, threshold)
    }

    pub fn exp_power(coeff: f64, rate: Q, power: Q, threshold: Q) -> Result<Self> {
        Self::new(TailShape::ExpPower, coeff, rate, power, threshold)
    }

    fn a(&self) -> f64 {
        to_f(&self.power)
    }

    fn b(&self) -> f64 {
        to_f(&self.logpower)
    }

    pub fn threshold_f(&self) -> f64 {
        to_f(&self.threshold)
    }

    /// Shape function without the coefficient.
    pub fn shape_value(&self, s: f64) -> f64 {
        let (a, b) = (self.a(), self.b());
        match self.shape {
            TailShape::PowerLog => s.powf(a) * s.ln().powf(b),
            TailShape::ExpPower => (a * s).exp() * s.powf(b),
        }
    }

    /// Derivative of the shape function.
    pub fn shape_derivative(&self, s: f64) -> f64 {
        let (a, b) = (self.a(), self.b());
        match self.shape {
            TailShape::PowerLog => {
                let l = s.ln();
                s.powf(a - 1.0) * l.powf(b - 1.0) * (a * l + b)
            }
            TailShape::ExpPower => (a * s).exp() * s.powf(b - 1.0) * (a * s + b),
        }
    }

    /// Sign-determining factor of the second derivative.
    fn curvature_sign(&self, s: f64) -> f64 {
        let (a, b) = (self.a(), self.b());
        match self.shape {
            TailShape::PowerLog => {
                let l = s.ln();
                ((a - 1.0) * l + b - 1.0) * (a * l + b) + a * l
            }
            TailShape::ExpPower => (a * s + b).powi(2) - b,
        }
    }

    /// Convexity of the tail on `[threshold, inf)`: sampled on a geometric
    /// grid reaching `threshold * 2^100`, plus the asymptotic sign.
    pub fn is_convex(&self) -> bool {
        let asymptotic = match self.shape {
            TailShape::PowerLog => {
                self.power > qi(1) || (self.power == qi(1) && self.logpower.is_positive())
            }
            TailShape::ExpPower => true,
        };
        if !asymptotic {
            return false;
        }
        let t = self.threshold_f();
        (0..=800).all(|k| self.curvature_sign(t * (k as f64 / 8.0).exp2()) >= -1e-12)
    }

    /// Derivative of the tail at its threshold.
    pub fn derivative_at_threshold(&self) -> f64 {
        self.coeff * self.shape_derivative(self.threshold_f())
    }

    pub fn describe(&self) -> String {
        match self.shape {
            TailShape::PowerLog => format!(
                "{}*s^({})*(log s)^({}) for s >= {}",
                self.coeff,
                fmt_rational(&self.power),
                fmt_rational(&self.logpower),
                fmt_rational(&self.threshold)
            ),
            TailShape::ExpPower => format!(
                "{}*exp({} s)*s^({}) for s >= {}",
                self.coeff,
                fmt_rational(&self.power),
                fmt_rational(&self.logpower),
                fmt_rational(&self.threshold)
            ),
        }
    }
}

/// Conjugate of a tailed function beyond its last PL slope.
#[derive(Debug, Clone, PartialEq)]
pub struct DualTail {
    pub primal: TailClass,
    /// Primal value at the tail threshold.
    pub primal_value: Q,
    /// Abscissa where the conjugate leaves its PL part.
    pub base_x: Q,
}

impl DualTail {
    fn t(&self) -> f64 {
        self.primal.threshold_f()
    }

    fn base_value(&self) -> Q {
        &self.base_x * &self.primal.threshold - &self.primal_value
    }

    /// Conjugate value at `x >= base_x`.
    pub fn value(&self, x: f64) -> f64 {
        let t = self.t();
        let bx = to_f(&self.base_x);
        let kink = self.primal.derivative_at_threshold();
        if x <= kink {
            return to_f(&self.base_value()) + t * (x - bx);
        }
        let s = self.stationary_point(x);
        let pv = to_f(&self.primal_value) + self.primal.coeff * (self.primal.shape_value(s) - self.primal.shape_value(t));
        x * s - pv
    }

    /// The `s` with tail derivative equal to `x`.
    pub fn stationary_point(&self, x: f64) -> f64 {
        let c = self.primal.coeff;
        let mut lo = self.t();
        let mut hi = 2.0 * lo;
        while c * self.primal.shape_derivative(hi) < x && hi < 1e300 {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if c * self.primal.shape_derivative(mid) < x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Behaviour beyond the last breakpoint.
#[derive(Debug, Clone, PartialEq)]
pub enum Extension {
    /// Affine continuation with the given slope.
    Linear(Q),
    /// `+inf` beyond the last breakpoint.
    Infinite,
    /// Symbolic tail starting at the last breakpoint.
    Tail(TailClass),
    /// Conjugate of a tail.
    Dual(DualTail),
}

/// Piecewise-linear function on `[0, inf)` plus an extension.
#[derive(Debug, Clone, PartialEq)]
pub struct PlConvex {
    bps: Vec<(Q, Q)>,
    ext: Extension,
    sf: Vec<f64>,
    vf: Vec<f64>,
}

/// Exact divergence verdict with its comparison witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub witness: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictKind {
    Diverges,
    Converges,
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerdictKind::Diverges => write!(f, "Diverges"),
            VerdictKind::Converges => write!(f, "Converges"),
        }
    }
}

/// `int^inf s^e (log s)^b ds = inf`?
pub fn power_log_integral_diverges(e: &Q, b: &Q) -> bool {
    *e > qi(-1) || (*e == qi(-1) && *b >= qi(-1))
}

/// `int^inf exp(r s) s^b ds = inf`?
pub fn exp_integral_diverges(r: &Q, b: &Q) -> bool {
    r.is_positive() || (r.is_zero() && *b >= qi(-1))
}

impl PlConvex {
    /// Builds a function from breakpoints. Convexity is not enforced here;
    /// see [`PlConvex::check_convex`].
    pub fn new(bps: Vec<(Q, Q)>, ext: Extension) -> Result<Self> {
        if bps.is_empty() {
            return Err(Error::Invalid("no breakpoints".into()));
        }
        if !bps[0].0.is_zero() {
            return Err(Error::Invalid(format!("domain must start at s = 0, got {}", fmt_rational(&bps[0].0))));
        }
        for w in bps.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::Invalid("breakpoint abscissae must increase strictly".into()));
            }
        }
        match &ext {
            Extension::Tail(t) => {
                if t.threshold != bps.last().unwrap().0 {
                    return Err(Error::Invalid(format!(
                        "tail threshold {} must equal the last breakpoint {}",
                        fmt_rational(&t.threshold),
                        fmt_rational(&bps.last().unwrap().0)
                    )));
                }
            }
            Extension::Dual(d) => {
                if d.base_x != bps.last().unwrap().0 {
                    return Err(Error::Invalid("dual tail must start at the last breakpoint".into()));
                }
            }
            _ => {}
        }
        let sf = bps.iter().map(|(s, _)| to_f(s)).collect();
        let vf = bps.iter().map(|(_, v)| to_f(v)).collect();
        Ok(Self { bps, ext, sf, vf })
    }

    /// PL interpolant with the last slope continued linearly.
    pub fn from_points(bps: Vec<(Q, Q)>) -> Result<Self> {
        if bps.len() < 2 {
            return Err(Error::Invalid("need two breakpoints to infer the final slope".into()));
        }
        let n = bps.len();
        let slope = (&bps[n - 1].1 - &bps[n - 2].1) / (&bps[n - 1].0 - &bps[n - 2].0);
        Self::new(bps, Extension::Linear(slope))
    }

    /// Samples `f` at exact f64 grid points.
    pub fn from_samples<F: Fn(f64) -> f64>(f: F, grid: &[f64], ext: Extension) -> Result<Self> {
        let bps = grid.iter().map(|&s| (qf(s), qf(f(s)))).collect();
        Self::new(bps, ext)
    }

    pub fn breakpoints(&self) -> &[(Q, Q)] {
        &self.bps
    }

    pub fn extension(&self) -> &Extension {
        &self.ext
    }

    pub fn tail(&self) -> Option<&TailClass> {
        match &self.ext {
            Extension::Tail(t) => Some(t),
            _ => None,
        }
    }

    pub fn last_s(&self) -> &Q {
        &self.bps.last().unwrap().0
    }

    /// Slopes of the PL segments.
    pub fn slopes(&self) -> Vec<Q> {
        self.bps.windows(2).map(|w| (&w[1].1 - &w[0].1) / (&w[1].0 - &w[0].0)).collect()
    }

    /// Value at `s`; `+inf` outside the domain of finiteness.
    pub fn value(&self, s: f64) -> f64 {
        if s.is_nan() || s < 0.0 {
            return f64::INFINITY;
        }
        let n = self.sf.len();
        let last = self.sf[n - 1];
        if s <= last {
            let i = self.sf.partition_point(|&x| x <= s);
            if i == 0 {
                return self.vf[0];
            }
            if i >= n {
                return self.vf[n - 1];
            }
            let (s0, s1) = (self.sf[i - 1], self.sf[i]);
            let (v0, v1) = (self.vf[i - 1], self.vf[i]);
            return v0 + (v1 - v0) * ((s - s0) / (s1 - s0));
        }
        let vl = self.vf[n - 1];
        match &self.ext {
            Extension::Linear(m) => vl + to_f(m) * (s - last),
            Extension::Infinite => f64::INFINITY,
            Extension::Tail(t) => vl + t.coeff * (t.shape_value(s) - t.shape_value(last)),
            Extension::Dual(d) => d.value(s),
        }
    }

    /// Exact value on the PL part and linear extension; `None` elsewhere.
    pub fn value_exact(&self, s: &Q) -> Option<Q> {
        if s.is_negative() {
            return None;
        }
        let n = self.bps.len();
        let (ls, lv) = &self.bps[n - 1];
        if s <= ls {
            let i = self.bps.partition_point(|(x, _)| x <= s);
            if i == 0 {
                return Some(self.bps[0].1.clone());
            }
            if i >= n {
                return Some(lv.clone());
            }
            let (s0, v0) = &self.bps[i - 1];
            let (s1, v1) = &self.bps[i];
            return Some(v0 + (v1 - v0) * (s - s0) / (s1 - s0));
        }
        match &self.ext {
            Extension::Linear(m) => Some(lv + m * (s - ls)),
            _ => None,
        }
    }

    /// Convexity: nondecreasing slopes, extension slope at least the last
    /// PL slope, and a convex tail.
    pub fn check_convex(&self) -> Result<()> {
        self.check_convex_beyond(None)
    }

    /// Convexity tested only at vertices strictly beyond `s0`.
    pub fn is_convex_beyond(&self, s0: f64) -> bool {
        self.check_convex_beyond(Some(s0)).is_ok()
    }

    fn check_convex_beyond(&self, s0: Option<f64>) -> Result<()> {
        let slopes = self.slopes();
        let active = |i: usize| s0.is_none_or(|s0| self.sf[i] > s0);
        for i in 1..slopes.len() {
            if active(i) && slopes[i] < slopes[i - 1] {
                return Err(Error::NotConvex(format!(
                    "slope decreases at s = {} ({} then {})",
                    fmt_rational(&self.bps[i].0),
                    fmt_rational(&slopes[i - 1]),
                    fmt_rational(&slopes[i])
                )));
            }
        }
        let n = self.bps.len() - 1;
        let last_slope = slopes.last();
        if active(n) {
            match (&self.ext, last_slope) {
                (Extension::Linear(m), Some(ls)) if m < ls => {
                    return Err(Error::NotConvex(format!(
                        "extension slope {} below last slope {}",
                        fmt_rational(m),
                        fmt_rational(ls)
                    )));
                }
                (Extension::Tail(t), Some(ls)) => {
                    let d = t.derivative_at_threshold();
                    let l = to_f(ls);
                    if d < l - 1e-12 * l.abs().max(1.0) {
                        return Err(Error::NotConvex(format!("tail derivative {d} below last slope {l}")));
                    }
                }
                _ => {}
            }
        }
        if let Extension::Tail(t) = &self.ext {
            if !t.is_convex() {
                return Err(Error::NotConvex(format!("tail {} is not convex", t.describe())));
            }
        }
        Ok(())
    }

    /// Nondecreasing on the PL part and the extension.
    pub fn is_nondecreasing(&self) -> bool {
        let slopes = self.slopes();
        if slopes.iter().any(|m| m.is_negative()) {
            return false;
        }
        match &self.ext {
            Extension::Linear(m) => !m.is_negative(),
            Extension::Tail(t) => t.derivative_at_threshold() >= 0.0,
            _ => true,
        }
    }

    pub fn is_normalized(&self) -> bool {
        self.bps[0].1.is_zero() && self.is_nondecreasing() && self.check_convex().is_ok()
    }

    /// Shifts so that `p(0) = 0`. Decreasing segments are rejected.
    pub fn normalize(&self) -> Result<PlConvex> {
        self.check_convex()?;
        if !self.is_nondecreasing() {
            return Err(Error::Precondition("function is not nondecreasing".into()));
        }
        let v0 = self.bps[0].1.clone();
        let bps = self.bps.iter().map(|(s, v)| (s.clone(), v - &v0)).collect();
        let ext = match &self.ext {
            Extension::Dual(d) => {
                let mut d = d.clone();
                d.primal_value = &d.primal_value + &v0;
                Extension::Dual(d)
            }
            e => e.clone(),
        };
        PlConvex::new(bps, ext)
    }

    /// Removes vertices where the slope does not change.
    pub fn canonical(&self) -> PlConvex {
        let mut out: Vec<(Q, Q)> = Vec::with_capacity(self.bps.len());
        for p in &self.bps {
            while out.len() >= 2 {
                let k = out.len();
                let m1 = (&out[k - 1].1 - &out[k - 2].1) / (&out[k - 1].0 - &out[k - 2].0);
                let m2 = (&p.1 - &out[k - 1].1) / (&p.0 - &out[k - 1].0);
                if m1 == m2 {
                    out.pop();
                } else {
                    break;
                }
            }
            out.push(p.clone());
        }
        if let Extension::Linear(m) = &self.ext {
            let k = out.len();
            if k >= 2 {
                let ml = (&out[k - 1].1 - &out[k - 2].1) / (&out[k - 1].0 - &out[k - 2].0);
                if &ml == m {
                    out.pop();
                }
            }
        }
        PlConvex::new(out, self.ext.clone()).expect("canonical form of a valid function")
    }

    /// Legendre-Fenchel conjugate `sup_{s >= 0} [x s - p(s)]` on `x >= 0`
    /// for normalized `p`.
    pub fn conjugate(&self) -> Result<PlConvex> {
        if !self.bps[0].1.is_zero() {
            return Err(Error::NotNormalized(format!("p(0) = {}", fmt_rational(&self.bps[0].1))));
        }
        if !self.is_nondecreasing() {
            return Err(Error::NotNormalized("p is not nondecreasing".into()));
        }
        self.conjugate_general()
    }

    /// Conjugate of any convex input (no normalization required).
    pub fn conjugate_general(&self) -> Result<PlConvex> {
        self.check_convex()?;
        let p = self.canonical();
        let slopes = p.slopes();
        let n = p.bps.len() - 1;
        let min_v = p.bps.iter().map(|(_, v)| v).min().unwrap().clone();
        let mut out: Vec<(Q, Q)> = vec![(qi(0), -min_v)];
        for (i, m) in slopes.iter().enumerate() {
            if m.is_positive() {
                let (s, v) = &p.bps[i + 1];
                out.push((m.clone(), m * s - v));
            }
        }
        let (sn, vn) = p.bps[n].clone();
        let last_x = out.last().unwrap().0.clone();
        let ext = match &p.ext {
            Extension::Linear(sigma) => {
                if sigma.is_negative() {
                    return Err(Error::Unsupported("conjugate is +inf on [0, inf) for a decreasing extension".into()));
                }
                if *sigma > last_x {
                    out.push((sigma.clone(), sigma * &sn - &vn));
                }
                Extension::Infinite
            }
            Extension::Infinite => Extension::Linear(sn.clone()),
            Extension::Tail(t) => Extension::Dual(DualTail { primal: t.clone(), primal_value: vn.clone(), base_x: last_x }),
            Extension::Dual(_) => {
                return Err(Error::Unsupported("conjugate of a conjugate-derived tail".into()));
            }
        };
        Ok(PlConvex::new(out, ext)?.canonical())
    }

    /// Text form: `bp`, `tail`/`etail`, `end` and `dual` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (x, v) in &self.bps {
            let _ = writeln!(s, "bp {} {}", fmt_rational(x), fmt_rational(v));
        }
        match &self.ext {
            Extension::Linear(m) => {
                let _ = writeln!(s, "end linear {}", fmt_rational(m));
            }
            Extension::Infinite => {
                let _ = writeln!(s, "end inf");
            }
            Extension::Tail(t) => {
                let _ = writeln!(s, "{}", tail_line(t));
            }
            Extension::Dual(d) => {
                let _ = writeln!(s, "dual {} {}", tail_line(&d.primal), fmt_rational(&d.primal_value));
            }
        }
        s
    }

    /// Parses the text form; `line_offset` is added to reported line numbers.
    pub fn parse_lines<'a, I: IntoIterator<Item = (usize, &'a str)>>(lines: I) -> Result<PlConvex> {
        let mut bps = Vec::new();
        let mut ext: Option<Extension> = None;
        let mut last_line = 0;
        for (ln, raw) in lines {
            last_line = ln;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let num = |i: usize| -> Result<Q> {
                toks.get(i)
                    .and_then(|t| parse_rational(t))
                    .ok_or_else(|| Error::parse(ln, format!("expected a rational in field {} of '{line}'", i + 1)))
            };
            if ext.is_some() {
                return Err(Error::parse(ln, "no lines may follow the extension line"));
            }
            match toks[0] {
                "bp" => {
                    if toks.len() != 3 {
                        return Err(Error::parse(ln, "bp takes two fields"));
                    }
                    bps.push((num(1)?, num(2)?));
                }
                "tail" | "etail" => {
                    let t = parse_tail(&toks, ln)?;
                    ext = Some(Extension::Tail(t));
                }
                "dual" => {
                    if toks.len() != 7 {
                        return Err(Error::parse(ln, "dual takes a tail line and the primal value"));
                    }
                    let t = parse_tail(&toks[1..6], ln)?;
                    let pv = num(6)?;
                    let base = bps.last().map(|(x, _): &(Q, Q)| x.clone()).unwrap_or_else(Q::zero);
                    ext = Some(Extension::Dual(DualTail { primal: t, primal_value: pv, base_x: base }));
                }
                "end" => match toks.get(1) {
                    Some(&"inf") => ext = Some(Extension::Infinite),
                    Some(&"linear") => ext = Some(Extension::Linear(num(2)?)),
                    _ => return Err(Error::parse(ln, "end takes 'inf' or 'linear <slope>'")),
                },
                other => return Err(Error::parse(ln, format!("unknown keyword '{other}'"))),
            }
        }
        let ext = match ext {
            Some(e) => e,
            None => {
                if bps.len() < 2 {
                    return Err(Error::parse(last_line, "a single breakpoint needs an explicit extension"));
                }
                let n = bps.len();
                Extension::Linear((&bps[n - 1].1 - &bps[n - 2].1) / (&bps[n - 1].0 - &bps[n - 2].0))
            }
        };
        PlConvex::new(bps, ext).map_err(|e| Error::parse(last_line, e.to_string()))
    }

    pub fn parse(text: &str) -> Result<PlConvex> {
        Self::parse_lines(text.lines().enumerate().map(|(i, l)| (i + 1, l)))
    }
}

fn tail_line(t: &TailClass) -> String {
    let kw = match t.shape {
        TailShape::PowerLog => "tail",
        TailShape::ExpPower => "etail",
    };
    format!(
        "{kw} {} {} {} {}",
        t.coeff,
        fmt_rational(&t.power),
        fmt_rational(&t.logpower),
        fmt_rational(&t.threshold)
    )
}

fn parse_tail(toks: &[&str], ln: usize) -> Result<TailClass> {
    if toks.len() != 5 {
        return Err(Error::parse(ln, format!("{} takes four fields", toks[0])));
    }
    let c = crate::numeric::parse_real(toks[1]).ok_or_else(|| Error::parse(ln, "bad tail coefficient"))?;
    let f = |i: usize| parse_rational(toks[i]).ok_or_else(|| Error::parse(ln, format!("bad tail field {i}")));
    let shape = if toks[0] == "etail" { TailShape::ExpPower } else { TailShape::PowerLog };
    TailClass::new(shape, c, f(2)?, f(3)?, f(4)?).map_err(|e| Error::parse(ln, e.to_string()))
}

/// Largest convex minorant of the samples (lower hull, collinear points merged).
pub fn convex_minorant(samples: &[(Q, Q)]) -> Result<PlConvex> {
    if samples.len() < 2 {
        return Err(Error::Invalid("convex minorant needs at least two samples".into()));
    }
    for w in samples.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(Error::Invalid("sample abscissae must increase strictly".into()));
        }
    }
    let mut hull: Vec<(Q, Q)> = Vec::new();
    for p in samples {
        while hull.len() >= 2 {
            let k = hull.len();
            let (a, b) = (&hull[k - 2], &hull[k - 1]);
            let cross = (&b.0 - &a.0) * (&p.1 - &a.1) - (&b.1 - &a.1) * (&p.0 - &a.0);
            if !cross.is_positive() {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p.clone());
    }
    PlConvex::new(hull, Extension::Infinite)
}

/// `p(s) + p*(x) - x s`, exact on PL parts. The flag is set when either
/// argument lies outside the domain of finiteness.
pub fn young_fenchel_gap(p: &PlConvex, pstar: &PlConvex, s: f64, x: f64) -> (f64, bool) {
    let (sq, xq) = (Q::from_float(s), Q::from_float(x));
    if let (Some(sq), Some(xq)) = (sq, xq) {
        if let (Some(a), Some(b)) = (p.value_exact(&sq), pstar.value_exact(&xq)) {
            return (to_f(&(a + b - &xq * &sq)), false);
        }
    }
    let (a, b) = (p.value(s), pstar.value(x));
    if !a.is_finite() || !b.is_finite() {
        return (f64::INFINITY, true);
    }
    (a + b - x * s, false)
}

/// Decides `int^inf p(s)/s^3 ds = inf` from the tail class.
pub fn vul_integral_verdict(p: &PlConvex) -> Result<Verdict> {
    let t = p.tail().ok_or_else(|| {
        Error::MissingTail("supply an asymptotic model (tail/etail line) to decide the p(s)/s^3 integral".into())
    })?;
    let pl_part = pl_part_integral(p, 3.0);
    let (kind, cmp) = match t.shape {
        TailShape::PowerLog => {
            let e = &t.power - qi(3);
            let d = power_log_integral_diverges(&e, &t.logpower);
            (d, format!("integrand ~ s^({})(log s)^({})", fmt_rational(&e), fmt_rational(&t.logpower)))
        }
        TailShape::ExpPower => (true, "integrand grows exponentially".to_string()),
    };
    let kind = if kind { VerdictKind::Diverges } else { VerdictKind::Converges };
    Ok(Verdict {
        kind,
        witness: format!(
            "tail {}: {cmp} -> {kind}; PL part on [1, {}] contributes {:.6e} (finite)",
            t.describe(),
            fmt_rational(&t.threshold),
            pl_part
        ),
    })
}

/// `int_1^{last} p(s)/s^k ds` over the PL part.
fn pl_part_integral(p: &PlConvex, k: f64) -> f64 {
    let last = to_f(p.last_s());
    if last <= 1.0 {
        return 0.0;
    }
    crate::numeric::quad::Quad::with_abs_tol(1e-12)
        .integrate(|s: f64| p.value(s) / s.powf(k), 1.0, last)
        .map(|r| r.value)
        .unwrap_or(f64::NAN)
}
