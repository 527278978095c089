//! Orthonormal polynomials in extended precision: polynomial distance in
//! `L_2(mu)`, the reproducing-kernel quantity `rho_n(z)`, and the
//! determinacy report for measures integrating an admissible weight.

use std::fmt::Write as _;

use num_complex::Complex64;
use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};
use crate::measures::SignedMeasure;
use crate::numeric::quad::gauss_legendre;
use crate::numeric::sum::LogSum;
use crate::quasidc::{left_term, theorem2_verdict, DensityKind, TwoSidedWeight};
use crate::report::fmt_num;

pub const DEFAULT_DIGITS: u32 = 50;
/// Gauss-Legendre nodes per density piece in the discretization.
pub const NODES_PER_SEGMENT: usize = 8;

/// Binary precision carrying `digits` decimal digits.
pub fn bits_for(digits: u32) -> u32 {
    (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + 8
}

/// A nonnegative measure as a sum of components that may overlap.
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveMeasure {
    components: Vec<SignedMeasure>,
}

impl PositiveMeasure {
    pub fn new(sigma: SignedMeasure) -> Result<Self> {
        Self::from_components(vec![sigma])
    }

    pub fn from_components(components: Vec<SignedMeasure>) -> Result<Self> {
        for c in &components {
            if c.atoms().iter().any(|&(_, m)| m < 0.0) || c.densities().iter().any(|d| d.values.iter().any(|&v| v < 0.0)) {
                return Err(Error::Invalid("positive measure has a negative mass or density value".into()));
            }
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[SignedMeasure] {
        &self.components
    }

    /// Atoms with positive mass, or `usize::MAX` when a density is present.
    pub fn points_of_increase(&self) -> usize {
        let mut atoms: Vec<f64> = Vec::new();
        for c in &self.components {
            if c.densities().iter().any(|d| d.values.iter().any(|&v| v > 0.0)) {
                return usize::MAX;
            }
            atoms.extend(c.atoms().iter().filter(|a| a.1 > 0.0).map(|a| a.0));
        }
        atoms.sort_by(f64::total_cmp);
        atoms.dedup();
        atoms.len()
    }

    /// Adds a uniform density of mass `1e-6` on `[-1, 1]`.
    pub fn with_continuous_component(&self) -> Result<Self> {
        let d = crate::measures::PlDensity::new(-1.0, 1.0, vec![5e-7, 5e-7])?;
        let mut c = self.components.clone();
        c.push(SignedMeasure::from_density(d));
        Ok(Self { components: c })
    }

    /// Nodes and weights: atoms as they are, each density piece by
    /// Gauss-Legendre.
    pub fn discretize(&self) -> Vec<(f64, f64)> {
        let (gx, gw) = gauss_legendre(NODES_PER_SEGMENT);
        let mut out = Vec::new();
        for c in &self.components {
            out.extend(c.atoms().iter().copied().filter(|a| a.1 > 0.0));
            for (a, b, va, vb) in c.segments() {
                let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
                for (x, w) in gx.iter().zip(&gw) {
                    let t = m + h * x;
                    let rho = va + (vb - va) * ((t - a) / (b - a));
                    if rho > 0.0 {
                        out.push((t, w * h * rho));
                    }
                }
            }
        }
        out.sort_by(|p, q| p.0.total_cmp(&q.0));
        out
    }

    /// `log int W d mu` and the share of it carried by the outer tenth
    /// of the support on either side.
    pub fn weight_integral(&self, wt: &TwoSidedWeight) -> (f64, f64) {
        let nodes = self.discretize();
        if nodes.is_empty() {
            return (f64::NEG_INFINITY, 0.0);
        }
        let lo = nodes[0].0;
        let hi = nodes[nodes.len() - 1].0;
        let span = hi - lo;
        let mut all = LogSum::new();
        let mut edge = LogSum::new();
        for &(x, w) in &nodes {
            let l = w.ln() + wt.log_w(x);
            all.add_log(l);
            if x < lo + 0.1 * span || x > hi - 0.1 * span {
                edge.add_log(l);
            }
        }
        let total = all.ln();
        (total, (edge.ln() - total).exp())
    }
}

/// Jacobi coefficients of the orthonormal polynomials:
/// `b_{k+1} p_{k+1} = (x - alpha_k) p_k - b_k p_{k-1}`, `p_0 = 1/beta_0`.
///
/// `beta[0] = sqrt(m_0)`; `beta[k] = b_k` for `k >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthoRecurrence {
    pub alpha: Vec<Float>,
    pub beta: Vec<Float>,
    pub prec: u32,
}

impl OrthoRecurrence {
    /// Highest degree available.
    pub fn degree(&self) -> usize {
        self.beta.len() - 1
    }

    pub fn alpha_f64(&self) -> Vec<f64> {
        self.alpha.iter().map(|a| a.to_f64()).collect()
    }

    pub fn beta_f64(&self) -> Vec<f64> {
        self.beta.iter().map(|b| b.to_f64()).collect()
    }

    /// `p_0(x), ..., p_n(x)`.
    pub fn eval(&self, x: &Float, n: usize) -> Vec<Float> {
        let prec = self.prec;
        let mut out = Vec::with_capacity(n + 1);
        out.push(Float::with_val(prec, 1) / &self.beta[0]);
        let mut prev = Float::with_val(prec, 0);
        for k in 0..n {
            let cur = out[k].clone();
            let t = Float::with_val(prec, x - &self.alpha[k]) * &cur;
            let v = if k == 0 { t } else { t - Float::with_val(prec, &self.beta[k] * &prev) };
            out.push(v / &self.beta[k + 1]);
            prev = cur;
        }
        out
    }

    /// `|p_0(z)|^2, ..., |p_n(z)|^2`.
    pub fn eval_complex_sq(&self, z: Complex64, n: usize) -> Vec<Float> {
        let prec = self.prec;
        let zr = Float::with_val(prec, z.re);
        let zi = Float::with_val(prec, z.im);
        let mut re = vec![Float::with_val(prec, 1) / &self.beta[0]];
        let mut im = vec![Float::with_val(prec, 0)];
        for k in 0..n {
            let dr = Float::with_val(prec, &zr - &self.alpha[k]);
            let mut nr = Float::with_val(prec, &dr * &re[k]) - Float::with_val(prec, &zi * &im[k]);
            let mut ni = Float::with_val(prec, &dr * &im[k]) + Float::with_val(prec, &zi * &re[k]);
            if k > 0 {
                nr -= Float::with_val(prec, &self.beta[k] * &re[k - 1]);
                ni -= Float::with_val(prec, &self.beta[k] * &im[k - 1]);
            }
            re.push(nr / &self.beta[k + 1]);
            im.push(ni / &self.beta[k + 1]);
        }
        re.iter().zip(&im).map(|(r, i)| Float::with_val(prec, r * r) + Float::with_val(prec, i * i)).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,alpha,beta\n");
        for k in 0..self.beta.len() {
            let a = self.alpha.get(k).map(|a| a.to_f64()).unwrap_or(f64::NAN);
            let _ = writeln!(s, "{k},{},{}", fmt_num(a), fmt_num(self.beta[k].to_f64()));
        }
        s
    }
}

/// A discrete measure in working precision.
#[derive(Debug, Clone, PartialEq)]
pub struct Discrete {
    pub x: Vec<Float>,
    pub w: Vec<Float>,
    pub prec: u32,
}

impl Discrete {
    pub fn new(nodes: &[(f64, f64)], digits: u32) -> Self {
        let prec = bits_for(digits);
        Self {
            x: nodes.iter().map(|n| Float::with_val(prec, n.0)).collect(),
            w: nodes.iter().map(|n| Float::with_val(prec, n.1)).collect(),
            prec,
        }
    }

    /// Orthonormal values `p_k(x_i)` for `k <= n`, row per degree.
    pub fn values(&self, rec: &OrthoRecurrence, n: usize) -> Vec<Vec<Float>> {
        let mut rows = vec![Vec::with_capacity(self.x.len()); n + 1];
        for x in &self.x {
            for (k, v) in rec.eval(x, n).into_iter().enumerate() {
                rows[k].push(v);
            }
        }
        rows
    }
}

fn check_digits(digits: u32) -> Result<()> {
    if digits < 20 {
        return Err(Error::Precision(format!("working precision must be at least 20 digits, got {digits}")));
    }
    Ok(())
}

/// Discretized Stieltjes procedure for `p_0, ..., p_n`.
pub fn stieltjes_procedure(mu: &PositiveMeasure, n: usize, digits: u32) -> Result<OrthoRecurrence> {
    check_digits(digits)?;
    let pts = mu.points_of_increase();
    if pts < n + 1 {
        return Err(Error::Rank(format!("degree {n} needs {} points of increase, measure has {pts}", n + 1)));
    }
    stieltjes_discrete(&Discrete::new(&mu.discretize(), digits), n)
}

pub fn stieltjes_discrete(d: &Discrete, n: usize) -> Result<OrthoRecurrence> {
    let prec = d.prec;
    let m = d.x.len();
    let mut m0 = Float::with_val(prec, 0);
    for w in &d.w {
        m0 += w;
    }
    if m0 <= 0 {
        return Err(Error::Rank("measure has zero mass".into()));
    }
    let b0 = m0.sqrt();
    let mut alpha = Vec::with_capacity(n + 1);
    let mut beta = vec![b0.clone()];
    let mut cur: Vec<Float> = vec![Float::with_val(prec, 1) / &b0; m];
    let mut prev: Vec<Float> = vec![Float::with_val(prec, 0); m];
    for k in 0..=n {
        let mut acc = Float::with_val(prec, 0);
        for i in 0..m {
            let t = Float::with_val(prec, &cur[i] * &cur[i]) * &d.w[i];
            acc += t * &d.x[i];
        }
        let a = acc.clone();
        if k == n {
            alpha.push(a);
            break;
        }
        let mut next = Vec::with_capacity(m);
        let mut norm = Float::with_val(prec, 0);
        for i in 0..m {
            let mut v = Float::with_val(prec, &d.x[i] - &a) * &cur[i];
            if k > 0 {
                v -= Float::with_val(prec, &beta[k] * &prev[i]);
            }
            norm += Float::with_val(prec, &v * &v) * &d.w[i];
            next.push(v);
        }
        let b = norm.sqrt();
        let rel = Float::with_val(64, &b / &b0).to_f64();
        if b.is_zero() || rel < 10f64.powi(-(prec as f64 / std::f64::consts::LOG2_10 / 2.0) as i32) {
            return Err(Error::Rank(format!("measure supports orthonormal polynomials only up to degree {k}")));
        }
        for v in &mut next {
            *v /= &b;
        }
        alpha.push(a);
        beta.push(b);
        prev = std::mem::replace(&mut cur, next);
    }
    Ok(OrthoRecurrence { alpha, beta, prec })
}

/// `max |<p_i, p_j> - delta_ij|` on the discrete measure.
pub fn gram_residual(d: &Discrete, rec: &OrthoRecurrence, n: usize) -> Float {
    let prec = d.prec;
    let vals = d.values(rec, n);
    let mut worst = Float::with_val(prec, 0);
    for i in 0..=n {
        for j in 0..=i {
            let mut s = Float::with_val(prec, 0);
            for t in 0..d.x.len() {
                s += Float::with_val(prec, &vals[i][t] * &vals[j][t]) * &d.w[t];
            }
            if i == j {
                s -= 1;
            }
            let a = s.abs();
            if a > worst {
                worst = a;
            }
        }
    }
    worst
}

/// `dist(target, span{1, ..., lambda^n})` in `L_2(mu)` for every `n` in `ns`.
pub fn poly_distances(mu: &PositiveMeasure, target: &dyn Fn(f64) -> f64, ns: &[usize], digits: u32) -> Result<Vec<f64>> {
    let nmax = ns.iter().copied().max().unwrap_or(0);
    let rec = stieltjes_procedure(mu, nmax, digits)?;
    let nodes = mu.discretize();
    let d = Discrete::new(&nodes, digits);
    distances_with(&d, &rec, target, ns)
}

pub fn distances_with(d: &Discrete, rec: &OrthoRecurrence, target: &dyn Fn(f64) -> f64, ns: &[usize]) -> Result<Vec<f64>> {
    let prec = d.prec;
    let nmax = ns.iter().copied().max().unwrap_or(0);
    let u: Vec<Float> = d.x.iter().map(|x| Float::with_val(prec, target(x.to_f64()))).collect();
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("target is not finite on the support".into()));
    }
    let mut norm = Float::with_val(prec, 0);
    for (ui, wi) in u.iter().zip(&d.w) {
        norm += Float::with_val(prec, ui * ui) * wi;
    }
    let mut coef = vec![Float::with_val(prec, 0); nmax + 1];
    for (t, x) in d.x.iter().enumerate() {
        let p = rec.eval(x, nmax);
        let uw = Float::with_val(prec, &u[t] * &d.w[t]);
        for k in 0..=nmax {
            coef[k] += Float::with_val(prec, &p[k] * &uw);
        }
    }
    let slack = Float::with_val(prec, &norm * Float::with_val(prec, 10).pow(-(prec as f64 / std::f64::consts::LOG2_10 * 0.6) as i32));
    let mut out = Vec::with_capacity(ns.len());
    for &n in ns {
        let mut r = norm.clone();
        for c in coef.iter().take(n + 1) {
            r -= Float::with_val(prec, c * c);
        }
        if r < 0 {
            if Float::with_val(prec, -&r) > slack {
                return Err(Error::Precision(format!(
                    "squared distance at n = {n} is {:e} < 0 beyond roundoff; raise the working precision",
                    r.to_f64()
                )));
            }
            r = Float::with_val(prec, 0);
        }
        out.push(r.sqrt().to_f64());
    }
    Ok(out)
}

pub fn poly_distance(mu: &PositiveMeasure, target: &dyn Fn(f64) -> f64, n: usize, digits: u32) -> Result<f64> {
    Ok(poly_distances(mu, target, &[n], digits)?[0])
}

/// `rho_k(z) = 1 / sum_{j <= k} |p_j(z)|^2` for `k = 0..=n`.
pub fn rho_sequence(rec: &OrthoRecurrence, z: Complex64, n: usize) -> Result<Vec<f64>> {
    if z.im == 0.0 {
        return Err(Error::Precondition("rho_n needs a non-real z".into()));
    }
    if n > rec.degree() {
        return Err(Error::Rank(format!("recurrence has degree {}, requested {n}", rec.degree())));
    }
    let sq = rec.eval_complex_sq(z, n);
    let mut k = Float::with_val(rec.prec, 0);
    let mut out = Vec::with_capacity(n + 1);
    for s in sq {
        k += s;
        out.push(Float::with_val(rec.prec, 1 / &k).to_f64());
    }
    Ok(out)
}

pub fn rho_n(mu: &PositiveMeasure, z: Complex64, n: usize, digits: u32) -> Result<f64> {
    let rec = stieltjes_procedure(mu, n, digits)?;
    Ok(*rho_sequence(&rec, z, n)?.last().unwrap())
}

/// Chebyshev algorithm: recurrence from moments `m_0, ..., m_{2n+1}`.
pub fn chebyshev_algorithm(moments: &[Float], n: usize) -> Result<OrthoRecurrence> {
    if moments.len() < 2 * n + 2 {
        return Err(Error::Invalid(format!("degree {n} needs {} moments, got {}", 2 * n + 2, moments.len())));
    }
    let prec = moments[0].prec();
    let m = 2 * n + 2;
    // sigma_{-1, l} = 0, sigma_{0, l} = m_l
    let mut sig_prev = vec![Float::with_val(prec, 0); m];
    let mut sig: Vec<Float> = moments[..m].to_vec();
    let mut a = vec![Float::with_val(prec, &moments[1] / &moments[0])];
    let mut b = vec![moments[0].clone()];
    for k in 1..=n {
        let mut next = vec![Float::with_val(prec, 0); m];
        for l in k..(m - k) {
            next[l] = Float::with_val(prec, &sig[l + 1])
                - Float::with_val(prec, &a[k - 1] * &sig[l])
                - Float::with_val(prec, &b[k - 1] * &sig_prev[l]);
        }
        if next[k] <= 0 {
            return Err(Error::Precision(format!("Chebyshev algorithm lost positivity at degree {k}; raise the working precision")));
        }
        let ak = Float::with_val(prec, &next[k + 1] / &next[k]) - Float::with_val(prec, &sig[k] / &sig[k - 1]);
        let bk = Float::with_val(prec, &next[k] / &sig[k - 1]);
        a.push(ak);
        b.push(bk);
        sig_prev = std::mem::replace(&mut sig, next);
    }
    let beta: Vec<Float> = b.into_iter().map(|v| v.sqrt()).collect();
    a.truncate(n + 1);
    Ok(OrthoRecurrence { alpha: a, beta, prec })
}

/// `m_k = e^{k^2/2}` for `k = 0..count`.
pub fn lognormal_moments(count: usize, digits: u32) -> Vec<Float> {
    let prec = bits_for(digits);
    (0..count).map(|k| Float::with_val(prec, (k * k) as f64 / 2.0).exp()).collect()
}

/// Working precision for the moment route at degree `n`.
pub fn moment_digits(n: usize, requested: u32) -> u32 {
    requested.max(20 * n as u32 + 60)
}

/// Input of [`determinacy_report`].
#[derive(Debug, Clone, PartialEq)]
pub enum MeasureInput {
    Measure(PositiveMeasure),
    /// Moments `m_0, m_1, ...` in working precision.
    Moments(Vec<Float>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeterminacyReport {
    pub applicable: bool,
    pub clauses: Vec<Clause>,
    pub verdict: String,
    /// `rho_n(i)` for `n = 0..=nmax`.
    pub rho: Vec<f64>,
    pub rho_nonincreasing: bool,
}

impl DeterminacyReport {
    pub fn to_text(&self) -> String {
        let mut s = format!("verdict: {}\n", self.verdict);
        for c in &self.clauses {
            let _ = writeln!(s, "- {}: {} ({})", c.name, if c.holds { "holds" } else { "fails" }, c.detail);
        }
        if let Some(last) = self.rho.last() {
            let _ = writeln!(s, "rho_{}(i) = {} (nonincreasing: {})", self.rho.len() - 1, fmt_num(*last), self.rho_nonincreasing);
        }
        s
    }

    pub fn rho_csv(&self) -> String {
        let mut s = String::from("n,rho_n\n");
        for (n, r) in self.rho.iter().enumerate() {
            let _ = writeln!(s, "{n},{}", fmt_num(*r));
        }
        s
    }
}

/// `log m_{2k} - log sup_lambda lambda^{2k} / W(lambda)`; bounded when `int W d mu < inf`.
pub fn moment_excess(moments: &[Float], wt: &TwoSidedWeight, kmax: usize) -> Result<Vec<f64>> {
    let bk = crate::quasidc::bk_sequence(&wt.qbranch, 2 * kmax)?;
    let mut out = Vec::with_capacity(kmax + 1);
    for k in 0..=kmax {
        if 2 * k >= moments.len() {
            break;
        }
        let lm = Float::with_val(moments[0].prec(), moments[2 * k].ln_ref()).to_f64();
        let (left, _, _) = left_term(&wt.p0branch, 0.0, 2 * k);
        let sup = crate::numeric::log_add(bk.log_b[2 * k], left);
        out.push(lm - sup);
    }
    Ok(out)
}

pub fn determinacy_report(mu: &MeasureInput, wt: &TwoSidedWeight, nmax: usize, digits: u32) -> Result<DeterminacyReport> {
    let mut clauses = Vec::new();
    let t2 = theorem2_verdict(wt)?;
    clauses.push(Clause {
        name: "polynomials dense in C_0(1/W)".into(),
        holds: t2.kind == DensityKind::Dense,
        detail: format!("weight verdict {}", t2.kind),
    });
    let (rec, weight_clause) = match mu {
        MeasureInput::Measure(m) => {
            let (li, edge) = m.weight_integral(wt);
            let ok = li.is_finite() && edge < 1e-6;
            let c = Clause {
                name: "int W d mu < inf".into(),
                holds: ok,
                detail: format!("log int W d mu = {}, outer-tenth share {}", fmt_num(li), fmt_num(edge)),
            };
            (stieltjes_procedure(m, nmax, digits)?, c)
        }
        MeasureInput::Moments(ms) => {
            let ex = moment_excess(ms, wt, (ms.len() - 1) / 2)?;
            let grows = ex.len() >= 4 && ex.windows(2).rev().take(3).all(|w| w[1] > w[0]) && ex[ex.len() - 1] > ex[0] + 10.0;
            let c = Clause {
                name: "int W d mu < inf".into(),
                holds: !grows,
                detail: format!(
                    "log m_2k - log sup lambda^2k/W grows to {} by k = {}",
                    fmt_num(*ex.last().unwrap_or(&f64::NAN)),
                    ex.len().saturating_sub(1)
                ),
            };
            (chebyshev_algorithm(ms, nmax)?, c)
        }
    };
    clauses.push(weight_clause);
    let rho = rho_sequence(&rec, Complex64::new(0.0, 1.0), nmax)?;
    let rho_nonincreasing = rho.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    let applicable = clauses.iter().all(|c| c.holds);
    let verdict = if applicable {
        "determinate (weight admissible, integral finite)".to_string()
    } else {
        let failing: Vec<&str> = clauses.iter().filter(|c| !c.holds).map(|c| c.name.as_str()).collect();
        format!("inapplicable: {}", failing.join("; "))
    };
    Ok(DeterminacyReport { applicable, clauses, verdict, rho, rho_nonincreasing })
}

/// Sine integral `Si(x)`.
pub fn sine_integral(x: f64) -> f64 {
    let t = x.abs();
    let v = if t < 2.0 {
        let mut sum = 0.0;
        let mut term = t;
        let mut k = 0;
        loop {
            let add = term / (2 * k + 1) as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs() {
                break;
            }
            k += 1;
            term *= -t * t / ((2 * k) as f64 * (2 * k + 1) as f64);
        }
        sum
    } else {
        // Continued fraction for E_1(i t) (modified Lentz).
        let mut b = Complex64::new(1.0, t);
        let mut c = Complex64::new(1.0 / f64::MIN_POSITIVE, 0.0);
        let mut d = Complex64::new(1.0, 0.0) / b;
        let mut h = d;
        for i in 1..1000 {
            let a = -((i * i) as f64);
            b += 2.0;
            d = Complex64::new(1.0, 0.0) / (d * a + b);
            c = b + Complex64::new(a, 0.0) / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).norm() < 1e-16 {
                break;
            }
        }
        h *= Complex64::from_polar(1.0, -t);
        std::f64::consts::FRAC_PI_2 + h.im
    };
    v.copysign(x)
}

/// `(Si(x + 1) - Si(x - 1)) / pi`, a smoothed indicator of `[-1, 1]`.
pub fn smoothed_indicator(x: f64) -> f64 {
    (sine_integral(x + 1.0) - sine_integral(x - 1.0)) / std::f64::consts::PI
}

/// Named targets of the distance battery.
pub fn target_battery() -> Vec<(&'static str, fn(f64) -> f64)> {
    vec![("sin", f64::sin), ("cos", f64::cos), ("sinc_indicator", smoothed_indicator)]
}
