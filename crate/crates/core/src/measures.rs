//! Finite signed measures: atoms plus piecewise-linear densities.

use std::fmt::Write as _;

use crate::convexcalc::PlConvex;
use crate::error::{Error, Result};
use crate::numeric::parse_real;
use crate::numeric::quad::{GaussRule, Quad};
use crate::numeric::sum::{LogSum, Neumaier};
use crate::report::{fmt_num, EstimateReport, EstimateRow, Scale};

/// Density sampled at `n + 1` equispaced points of `[start, end]`,
/// interpolated linearly.
#[derive(Debug, Clone, PartialEq)]
pub struct PlDensity {
    pub start: f64,
    pub end: f64,
    pub values: Vec<f64>,
}

/// One linear piece `(a, b, value at a, value at b)`.
pub type Segment = (f64, f64, f64, f64);

impl PlDensity {
    pub fn new(start: f64, end: f64, values: Vec<f64>) -> Result<Self> {
        if !(start < end) || !start.is_finite() || !end.is_finite() {
            return Err(Error::Invalid(format!("density interval [{start}, {end}] is empty or infinite")));
        }
        if values.len() < 2 {
            return Err(Error::Invalid("density needs at least two samples".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("density samples must be finite".into()));
        }
        Ok(Self { start, end, values })
    }

    /// Samples `f` on `n` equal intervals.
    pub fn from_fn<F: Fn(f64) -> f64>(f: F, start: f64, end: f64, n: usize) -> Result<Self> {
        let d = Self { start, end, values: vec![0.0; n + 1] };
        let values = (0..=n).map(|i| f(d.node(i))).collect();
        Self::new(start, end, values)
    }

    pub fn intervals(&self) -> usize {
        self.values.len() - 1
    }

    pub fn node(&self, i: usize) -> f64 {
        let n = self.intervals();
        if i == n {
            return self.end;
        }
        self.start + (self.end - self.start) * (i as f64 / n as f64)
    }

    pub fn segment(&self, i: usize) -> Segment {
        (self.node(i), self.node(i + 1), self.values[i], self.values[i + 1])
    }

    pub fn segments(&self) -> impl Iterator<Item = Segment> + '_ {
        (0..self.intervals()).map(|i| self.segment(i))
    }

    /// Pieces of the density inside `[lo, hi]`.
    pub fn clipped(&self, lo: f64, hi: f64) -> Vec<Segment> {
        let mut out = Vec::new();
        if hi <= self.start || lo >= self.end {
            return out;
        }
        for (a, b, va, vb) in self.segments() {
            if b <= lo || a >= hi {
                continue;
            }
            let (ca, cb) = (a.max(lo), b.min(hi));
            if cb <= ca {
                continue;
            }
            out.push((ca, cb, lerp(a, b, va, vb, ca), lerp(a, b, va, vb, cb)));
        }
        out
    }

    pub fn value_at(&self, x: f64) -> f64 {
        if x < self.start || x > self.end {
            return 0.0;
        }
        let n = self.intervals();
        let t = (x - self.start) / (self.end - self.start) * n as f64;
        let i = (t.floor() as usize).min(n - 1);
        let (a, b, va, vb) = self.segment(i);
        lerp(a, b, va, vb, x)
    }
}

fn lerp(a: f64, b: f64, va: f64, vb: f64, x: f64) -> f64 {
    if x == a {
        return va;
    }
    if x == b {
        return vb;
    }
    va + (vb - va) * ((x - a) / (b - a))
}

/// `int_a^b |va + (vb - va)(t - a)/(b - a)| dt`, exact.
pub fn abs_linear_integral(a: f64, b: f64, va: f64, vb: f64) -> f64 {
    let h = b - a;
    if va * vb >= 0.0 {
        return 0.5 * h * (va.abs() + vb.abs());
    }
    let t = va.abs() / (va.abs() + vb.abs());
    0.5 * h * (t * va.abs() + (1.0 - t) * vb.abs())
}

/// Signed measure with finitely many atoms and PL densities.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SignedMeasure {
    atoms: Vec<(f64, f64)>,
    densities: Vec<PlDensity>,
}

impl SignedMeasure {
    pub fn new(mut atoms: Vec<(f64, f64)>, mut densities: Vec<PlDensity>) -> Result<Self> {
        if atoms.iter().any(|(l, m)| !l.is_finite() || !m.is_finite()) {
            return Err(Error::Invalid("atoms must be finite".into()));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in atoms.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::Invalid(format!("duplicate atom location {}", w[0].0)));
            }
        }
        densities.sort_by(|a, b| a.start.total_cmp(&b.start));
        for w in densities.windows(2) {
            if w[1].start < w[0].end {
                return Err(Error::Invalid(format!(
                    "density grids overlap: [{}, {}] and [{}, {}]",
                    w[0].start, w[0].end, w[1].start, w[1].end
                )));
            }
        }
        Ok(Self { atoms, densities })
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_atoms(atoms: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(atoms, Vec::new())
    }

    pub fn from_density(d: PlDensity) -> Self {
        Self { atoms: Vec::new(), densities: vec![d] }
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn densities(&self) -> &[PlDensity] {
        &self.densities
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.iter().all(|a| a.1 == 0.0) && self.densities.iter().all(|d| d.values.iter().all(|v| *v == 0.0))
    }

    /// Sum of two measures; atoms at equal locations are merged.
    pub fn add(&self, other: &SignedMeasure) -> Result<SignedMeasure> {
        let mut atoms = self.atoms.clone();
        for &(l, m) in &other.atoms {
            match atoms.iter_mut().find(|a| a.0 == l) {
                Some(a) => a.1 += m,
                None => atoms.push((l, m)),
            }
        }
        let mut dens = self.densities.clone();
        dens.extend(other.densities.iter().cloned());
        Self::new(atoms, dens)
    }

    pub fn scale(&self, c: f64) -> SignedMeasure {
        Self {
            atoms: self.atoms.iter().map(|&(l, m)| (l, c * m)).collect(),
            densities: self
                .densities
                .iter()
                .map(|d| PlDensity { start: d.start, end: d.end, values: d.values.iter().map(|v| c * v).collect() })
                .collect(),
        }
    }

    /// Smallest and largest point of the support.
    pub fn support(&self) -> Option<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &(l, _) in &self.atoms {
            lo = lo.min(l);
            hi = hi.max(l);
        }
        for d in &self.densities {
            lo = lo.min(d.start);
            hi = hi.max(d.end);
        }
        (lo <= hi).then_some((lo, hi))
    }

    /// All density pieces, in order.
    pub fn segments(&self) -> Vec<Segment> {
        self.densities.iter().flat_map(|d| d.segments()).collect()
    }

    /// Density pieces inside `[lo, hi]`.
    pub fn segments_in(&self, lo: f64, hi: f64) -> Vec<Segment> {
        self.densities.iter().flat_map(|d| d.clipped(lo, hi)).collect()
    }

    /// Atoms and density pieces within `[lo, hi]` (atoms inclusive).
    pub fn restrict(&self, lo: f64, hi: f64) -> (Vec<(f64, f64)>, Vec<Segment>) {
        let atoms = self.atoms.iter().copied().filter(|&(l, _)| l >= lo && l <= hi).collect();
        (atoms, self.segments_in(lo, hi))
    }

    /// `sum |mass| + sum int |density|` (exact for PL densities).
    pub fn total_variation(&self) -> f64 {
        let mut s = Neumaier::new();
        for &(_, m) in &self.atoms {
            s.add(m.abs());
        }
        for d in &self.densities {
            for (a, b, va, vb) in d.segments() {
                s.add(abs_linear_integral(a, b, va, vb));
            }
        }
        s.value()
    }

    /// `int_{(-inf, lambda0]} |d sigma|`.
    pub fn tail_mass(&self, lambda0: f64) -> f64 {
        let mut s = Neumaier::new();
        for &(l, m) in &self.atoms {
            if l <= lambda0 {
                s.add(m.abs());
            }
        }
        for (a, b, va, vb) in self.segments_in(f64::NEG_INFINITY, lambda0) {
            s.add(abs_linear_integral(a, b, va, vb));
        }
        s.value()
    }

    /// Integrates `f` against the measure: atoms exactly, each density
    /// piece with `rule`.
    pub fn integrate_with(&self, rule: &GaussRule, f: impl Fn(f64) -> f64) -> f64 {
        let mut s = Neumaier::new();
        for &(l, m) in &self.atoms {
            s.add(m * f(l));
        }
        for (a, b, va, vb) in self.segments() {
            s.add(rule.integrate(|t| lerp(a, b, va, vb, t) * f(t), a, b));
        }
        s.value()
    }

    /// `int lambda^k d sigma`.
    pub fn moment(&self, k: u32) -> Result<f64> {
        let rule = GaussRule::new(k as usize / 2 + 2);
        let v = self.integrate_with(&rule, |t| t.powi(k as i32));
        if !v.is_finite() {
            return Err(Error::Overflow(format!("moment of order {k} is not representable")));
        }
        Ok(v)
    }

    /// `M_sigma(x) = int_{lambda <= 0} exp(x sqrt|lambda|) |d sigma|` in log form.
    pub fn exp_moment(&self, x: f64) -> Result<ExpMoment> {
        if !(x >= 0.0) {
            return Err(Error::Precondition(format!("exp_moment needs x >= 0, got {x}")));
        }
        let mut acc = LogSum::new();
        for &(l, m) in &self.atoms {
            if l <= 0.0 && m != 0.0 {
                acc.add_log(m.abs().ln() + x * (-l).sqrt());
            }
        }
        let quad = Quad { abs_tol: 1e-15, rel_tol: 1e-14, max_intervals: 10_000 };
        for (a, b, va, vb) in self.segments_in(f64::NEG_INFINITY, 0.0) {
            for (a, b, va, vb) in split_at_root(a, b, va, vb) {
                let peak = va.abs().max(vb.abs());
                if peak == 0.0 {
                    continue;
                }
                let shift = x * (-a).sqrt();
                let r = quad.integrate(
                    |t: f64| (x * (-t).max(0.0).sqrt() - shift).exp() * lerp(a, b, va, vb, t).abs() / peak,
                    a,
                    b,
                )?;
                if r.value > 0.0 {
                    acc.add_log(r.value.ln() + peak.ln() + shift);
                }
            }
        }
        Ok(ExpMoment::from_log(acc.ln()))
    }

    /// Text form: `atom` and `density` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for &(l, m) in &self.atoms {
            let _ = writeln!(s, "atom {} {}", fmt_num(l), fmt_num(m));
        }
        for d in &self.densities {
            let _ = write!(s, "density {} {} {}", fmt_num(d.start), fmt_num(d.end), d.intervals());
            for v in &d.values {
                let _ = write!(s, " {}", fmt_num(*v));
            }
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<SignedMeasure> {
        let mut atoms = Vec::new();
        let mut dens = Vec::new();
        let mut last = 0;
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            last = ln;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let num = |j: usize| -> Result<f64> {
                toks.get(j)
                    .and_then(|t| parse_real(t))
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::parse(ln, format!("expected a number in field {}", j + 1)))
            };
            match toks[0] {
                "atom" => {
                    if toks.len() != 3 {
                        return Err(Error::parse(ln, "atom takes a location and a mass"));
                    }
                    atoms.push((num(1)?, num(2)?));
                }
                "density" => {
                    if toks.len() < 4 {
                        return Err(Error::parse(ln, "density takes start, end, n and n+1 samples"));
                    }
                    let n: usize = toks[3].parse().map_err(|_| Error::parse(ln, "density interval count must be an integer"))?;
                    if toks.len() != 5 + n {
                        return Err(Error::parse(ln, format!("density with n = {n} needs {} samples, got {}", n + 1, toks.len() - 4)));
                    }
                    let vals = (4..toks.len()).map(num).collect::<Result<Vec<_>>>()?;
                    dens.push(PlDensity::new(num(1)?, num(2)?, vals).map_err(|e| Error::parse(ln, e.to_string()))?);
                }
                other => return Err(Error::parse(ln, format!("unknown keyword '{other}'"))),
            }
        }
        SignedMeasure::new(atoms, dens).map_err(|e| Error::parse(last, e.to_string()))
    }
}

/// Splits a linear piece at its zero so each part has one sign.
pub fn split_at_root(a: f64, b: f64, va: f64, vb: f64) -> Vec<Segment> {
    if va * vb < 0.0 {
        let t = va.abs() / (va.abs() + vb.abs());
        let m = a + t * (b - a);
        if m > a && m < b {
            return vec![(a, m, va, 0.0), (m, b, 0.0, vb)];
        }
    }
    vec![(a, b, va, vb)]
}

/// Exponential moment in log form; values below `exp(-745)` are flagged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpMoment {
    pub log_value: f64,
    pub underflow: bool,
}

impl ExpMoment {
    pub fn from_log(log_value: f64) -> Self {
        Self { log_value, underflow: log_value < -745.0 }
    }

    pub fn value(&self) -> f64 {
        if self.underflow {
            0.0
        } else {
            self.log_value.exp()
        }
    }
}

/// The pair `(C, p)` of a growth bound `M_sigma(x) <= C exp(p*(x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayCertificate {
    pub p: PlConvex,
    pub constant: f64,
}

impl DecayCertificate {
    pub fn new(p: PlConvex, constant: f64) -> Result<Self> {
        if !(constant > 0.0 && constant.is_finite()) {
            return Err(Error::Invalid(format!("certificate constant must be positive, got {constant}")));
        }
        if !p.is_normalized() {
            return Err(Error::NotNormalized("certificate profile must be normalized".into()));
        }
        Ok(Self { p, constant })
    }

    pub fn with_constant(&self, constant: f64) -> Result<Self> {
        Self::new(self.p.clone(), constant)
    }

    /// `log C - p(sqrt|lambda0|)`.
    pub fn log_tail_bound(&self, lambda0: f64) -> f64 {
        self.constant.ln() - self.p.value(lambda0.abs().sqrt())
    }
}

/// Smallest constant making every grid row of the decay check hold.
pub fn synthesize_constant(sigma: &SignedMeasure, p: &PlConvex, grid: &[f64]) -> f64 {
    let c = grid
        .iter()
        .map(|&l0| {
            let t = sigma.tail_mass(l0);
            if t > 0.0 {
                t.ln() + p.value(l0.abs().sqrt())
            } else {
                f64::NEG_INFINITY
            }
        })
        .fold(f64::NEG_INFINITY, f64::max);
    if c == f64::NEG_INFINITY {
        1.0
    } else {
        c.exp()
    }
}

/// Checks `int_{-inf}^{lambda0} |d sigma| <= C exp(-p(sqrt|lambda0|))`.
pub fn tail_decay_check(sigma: &SignedMeasure, cert: &DecayCertificate, grid: &[f64], tol: f64) -> EstimateReport {
    let mut rep = EstimateReport::new("tail_decay", Scale::Linear, tol);
    for &l0 in grid {
        let t = sigma.tail_mass(l0);
        let ll = if t > 0.0 { t.ln() } else { f64::NEG_INFINITY };
        rep.push(EstimateRow::from_logs(l0, ll, cert.log_tail_bound(l0), tol).with_constant("C_dec"));
    }
    rep
}
