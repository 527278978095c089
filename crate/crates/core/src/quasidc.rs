//! Weights given by two log-coordinate branches, the `B_k`/`M_k`
//! sequences, Denjoy-Carleman and Hall-type verdicts, and the density
//! verdict for polynomials in `C_0(1/W)`.

use std::fmt;
use std::fmt::Write as _;

use num_traits::{Signed, Zero};

use crate::convexcalc::{
    exp_integral_diverges, fmt_rational, power_log_integral_diverges, qi, qr, to_f, Extension, PlConvex, Q, TailClass,
    TailShape, Verdict, VerdictKind,
};
use crate::error::{Error, Result};
use crate::numeric::log_add;
use crate::numeric::parse_real;
use crate::report::{fmt_num, EstimateReport, EstimateRow, Scale};

/// `q(s) = log W(e^s)` and `p0(s) = log W(-s^2)`, both convex beyond `s0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSidedWeight {
    pub qbranch: PlConvex,
    pub p0branch: PlConvex,
    pub s0: f64,
}

impl TwoSidedWeight {
    pub fn new(qbranch: PlConvex, p0branch: PlConvex, s0: f64) -> Result<Self> {
        for (name, b) in [("qbranch", &qbranch), ("p0branch", &p0branch)] {
            if b.breakpoints().iter().any(|(_, v)| v.is_negative()) {
                return Err(Error::Invalid(format!("{name} has negative values (W must be >= 1)")));
            }
        }
        if !s0.is_finite() || s0 < 0.0 {
            return Err(Error::Invalid(format!("s0 must be a nonnegative number, got {s0}")));
        }
        Ok(Self { qbranch, p0branch, s0 })
    }

    /// `log W(lambda)` for real `lambda`; on `(0, 1)` the right branch is
    /// held at its value for `lambda = 1`.
    pub fn log_w(&self, lambda: f64) -> f64 {
        if lambda >= 1.0 {
            self.qbranch.value(lambda.ln())
        } else if lambda >= 0.0 {
            self.qbranch.value(0.0)
        } else {
            self.p0branch.value((-lambda).sqrt())
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "qbranch");
        s.push_str(&self.qbranch.to_text());
        let _ = writeln!(s, "p0branch");
        s.push_str(&self.p0branch.to_text());
        let _ = writeln!(s, "s0 {}", fmt_num(self.s0));
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut q: Vec<(usize, &str)> = Vec::new();
        let mut p: Vec<(usize, &str)> = Vec::new();
        let mut s0 = None;
        let mut cur: Option<u8> = None;
        let mut seen = [false; 2];
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks[0] {
                "qbranch" => {
                    cur = Some(0);
                    seen[0] = true;
                }
                "p0branch" => {
                    cur = Some(1);
                    seen[1] = true;
                }
                "s0" => {
                    let v = toks
                        .get(1)
                        .and_then(|t| parse_real(t))
                        .ok_or_else(|| Error::parse(ln, "s0 takes one number"))?;
                    s0 = Some(v);
                }
                _ => match cur {
                    Some(0) => q.push((ln, raw)),
                    Some(_) => p.push((ln, raw)),
                    None => return Err(Error::parse(ln, "expected 'qbranch' or 'p0branch' before breakpoints")),
                },
            }
        }
        if !seen[0] || !seen[1] {
            return Err(Error::parse(text.lines().count(), "weight needs both qbranch and p0branch blocks"));
        }
        let qb = PlConvex::parse_lines(q)?;
        let pb = PlConvex::parse_lines(p)?;
        Self::new(qb, pb, s0.unwrap_or(0.0)).map_err(|e| Error::parse(text.lines().count(), e.to_string()))
    }
}

/// Side of the weight a branch describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `q(s) = log W(e^s)`
    Right,
    /// `p0(s) = log W(-s^2)`
    Left,
}

/// Exponent `gamma` in `int^inf log W / lambda^gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HallExponent {
    ThreeHalves,
    Two,
}

impl HallExponent {
    pub fn value(self) -> Q {
        match self {
            HallExponent::ThreeHalves => qr(3, 2),
            HallExponent::Two => qi(2),
        }
    }
}

impl fmt::Display for HallExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HallExponent::ThreeHalves => write!(f, "3/2"),
            HallExponent::Two => write!(f, "2"),
        }
    }
}

fn tail_of<'a>(b: &'a PlConvex, what: &str) -> Result<&'a TailClass> {
    b.tail().ok_or_else(|| Error::MissingTail(format!("{what} needs a tail class")))
}

/// Decides `int^inf log W(+-lambda) lambda^(-gamma) d lambda = inf`.
///
/// Right branch: `lambda = e^s` turns the integral into
/// `int q(s) e^{(1 - gamma) s} ds`. Left branch: `lambda = s^2` gives
/// `2 int p0(s) s^{1 - 2 gamma} ds`.
pub fn hall_verdict(branch: &PlConvex, side: Branch, exponent: HallExponent) -> Result<Verdict> {
    let t = tail_of(branch, "hall_verdict")?;
    let g = exponent.value();
    let (div, cmp) = match (side, t.shape) {
        (Branch::Right, TailShape::PowerLog) => {
            let r = qi(1) - &g;
            (
                exp_integral_diverges(&r, &t.power),
                format!("s-integrand ~ s^({}) (log s)^({}) e^({} s)", fmt_rational(&t.power), fmt_rational(&t.logpower), fmt_rational(&r)),
            )
        }
        (Branch::Right, TailShape::ExpPower) => {
            let r = &t.power + qi(1) - &g;
            (exp_integral_diverges(&r, &t.logpower), format!("s-integrand ~ e^({} s) s^({})", fmt_rational(&r), fmt_rational(&t.logpower)))
        }
        (Branch::Left, TailShape::PowerLog) => {
            let e = &t.power + qi(1) - qi(2) * &g;
            (
                power_log_integral_diverges(&e, &t.logpower),
                format!("s-integrand ~ s^({}) (log s)^({})", fmt_rational(&e), fmt_rational(&t.logpower)),
            )
        }
        (Branch::Left, TailShape::ExpPower) => (true, "s-integrand grows exponentially".to_string()),
    };
    let kind = if div { VerdictKind::Diverges } else { VerdictKind::Converges };
    let side_s = match side {
        Branch::Right => "log W(lambda)",
        Branch::Left => "log W(-lambda)",
    };
    Ok(Verdict { kind, witness: format!("int {side_s}/lambda^{exponent}: tail {}: {cmp} -> {kind}", t.describe()) })
}

/// `log B_k = q*(k/2)` for `k = 0..=kmax`; `+inf` entries are flagged.
#[derive(Debug, Clone, PartialEq)]
pub struct BkSequence {
    pub log_b: Vec<f64>,
    pub flagged: Vec<usize>,
}

pub fn bk_sequence(q: &PlConvex, kmax: usize) -> Result<BkSequence> {
    let qs = q.conjugate_general()?;
    let mut log_b = Vec::with_capacity(kmax + 1);
    let mut flagged = Vec::new();
    for k in 0..=kmax {
        let x = qr(k as i64, 2);
        let v = match qs.value_exact(&x) {
            Some(v) => to_f(&v),
            None => qs.value(k as f64 / 2.0),
        };
        if !v.is_finite() {
            flagged.push(k);
        }
        log_b.push(v);
    }
    Ok(BkSequence { log_b, flagged })
}

/// `log M_k(x)` with its two branch terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MkBound {
    pub log_m: f64,
    pub log_right: f64,
    pub log_left: f64,
    pub maximizer: f64,
    pub flagged: bool,
}

/// Whether `p(t) - c t -> inf` (`strict`) or stays bounded below.
fn outgrows_linear(p: &PlConvex, c: f64) -> Option<bool> {
    match p.extension() {
        Extension::Infinite => Some(true),
        Extension::Linear(m) => {
            let m = to_f(m);
            if m > c {
                Some(true)
            } else if m == c {
                None
            } else {
                Some(false)
            }
        }
        Extension::Tail(t) => Some(match t.shape {
            TailShape::ExpPower => true,
            TailShape::PowerLog => {
                t.power > qi(1)
                    || (t.power == qi(1) && (t.logpower.is_positive() || (t.logpower.is_zero() && t.coeff > c)))
            }
        }),
        Extension::Dual(_) => Some(true),
    }
}

fn slope_at(p: &PlConvex, t: f64) -> f64 {
    let h = 1e-6 * t.max(1.0);
    (p.value(t + h) - p.value(t)) / h
}

/// `max_{t >= 0} [k log t + x t - p0(t)]` by golden-section search.
pub fn left_term(p0: &PlConvex, x: f64, k: usize) -> (f64, f64, bool) {
    let kf = k as f64;
    let phi = |t: f64| -> f64 {
        let lt = if k == 0 { 0.0 } else { kf * t.ln() };
        lt + x * t - p0.value(t)
    };
    let grows = outgrows_linear(p0, x);
    if grows == Some(false) || (grows.is_none() && k > 0) {
        return (f64::INFINITY, f64::INFINITY, true);
    }
    let hi = match p0.extension() {
        Extension::Infinite => to_f(p0.last_s()),
        _ => {
            let mut t = to_f(p0.last_s()).max(1.0);
            let mut ok = false;
            for _ in 0..200 {
                if kf / t + x - slope_at(p0, t) < 0.0 {
                    ok = true;
                    break;
                }
                t *= 2.0;
            }
            if !ok {
                return (f64::INFINITY, f64::INFINITY, true);
            }
            t
        }
    };
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (0.0, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (phi(c), phi(d));
    for _ in 0..300 {
        if b - a <= 1e-15 * hi.max(1.0) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = phi(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = phi(d);
        }
    }
    let t = 0.5 * (a + b);
    let mut best = (phi(t), t);
    for cand in [0.0, hi] {
        let v = phi(cand);
        if v > best.0 {
            best = (v, cand);
        }
    }
    (best.0, best.1, false)
}

/// `M_k(x) = max_{lambda >= 0} lambda^{k/2} {W(-lambda)^{-1} e^{x sqrt(lambda)} + W(lambda)^{-1}}`,
/// bounded by the sum of the two branch maxima.
pub fn mk_bound(wt: &TwoSidedWeight, x: f64, k: usize) -> Result<MkBound> {
    if !(x >= 0.0) {
        return Err(Error::Precondition(format!("mk_bound needs x >= 0, got {x}")));
    }
    let bk = bk_sequence(&wt.qbranch, k)?;
    let right = bk.log_b[k];
    let (left, t, flag) = left_term(&wt.p0branch, x, k);
    Ok(MkBound {
        log_m: log_add(left, right),
        log_right: right,
        log_left: left,
        maximizer: t,
        flagged: flag || !right.is_finite(),
    })
}

/// Denjoy-Carleman verdict with partial sums attached as evidence.
#[derive(Debug, Clone, PartialEq)]
pub struct DcVerdict {
    pub verdict: Verdict,
    /// `(k, sum_{j <= k} min(B_j^{-1/j}, 1/j))`.
    pub partial_sums: Vec<(usize, f64)>,
}

/// Verdict on `sum_k B_k^{-1/k}` from the tail of `q`.
pub fn bk_series_verdict(q: &PlConvex) -> Result<Verdict> {
    let (div, why) = match q.extension() {
        Extension::Infinite => (true, format!("W = inf beyond e^{}: terms >= exp(-s_n/2)", fmt_rational(q.last_s()))),
        Extension::Linear(m) => (false, format!("q grows linearly (slope {}): B_k = inf for k > {}", fmt_rational(m), fmt_rational(&(m * qi(2))))),
        Extension::Dual(_) => return Err(Error::Unsupported("series verdict for a conjugate-derived branch".into())),
        Extension::Tail(t) => match t.shape {
            TailShape::ExpPower => {
                let e = -(qi(1) / (qi(2) * &t.power));
                let b = &t.logpower / (qi(2) * &t.power);
                (
                    power_log_integral_diverges(&e, &b),
                    format!("terms ~ k^({}) (log k)^({}) from q* asymptotics of {}", fmt_rational(&e), fmt_rational(&b), t.describe()),
                )
            }
            TailShape::PowerLog => {
                if t.power > qi(1) || (t.power == qi(1) && t.logpower.is_positive()) {
                    (false, format!("q* superlinear for {}: terms decay faster than any power", t.describe()))
                } else {
                    return Err(Error::NotConvex(format!("tail {} is not convex", t.describe())));
                }
            }
        },
    };
    let kind = if div { VerdictKind::Diverges } else { VerdictKind::Converges };
    Ok(Verdict { kind, witness: format!("sum B_k^(-1/k): {why} -> {kind}") })
}

pub fn dc_divergence_verdict(wt: &TwoSidedWeight, x: f64, kmax: usize) -> Result<DcVerdict> {
    if !(x >= 0.0) {
        return Err(Error::Precondition(format!("x must be >= 0, got {x}")));
    }
    if outgrows_linear(&wt.p0branch, x + 1.0) != Some(true) {
        return Err(Error::Precondition(format!(
            "left branch must eventually dominate (x+1) sqrt(lambda) = {} sqrt(lambda)",
            x + 1.0
        )));
    }
    if wt.qbranch.tail().is_none() && matches!(wt.qbranch.extension(), Extension::Tail(_)) {
        return Err(Error::MissingTail("qbranch".into()));
    }
    let verdict = bk_series_verdict(&wt.qbranch)?;
    let bk = bk_sequence(&wt.qbranch, kmax)?;
    let mut s = 0.0;
    let mut partial = Vec::with_capacity(kmax);
    for k in 1..=kmax {
        let term = (-bk.log_b[k] / k as f64).exp().min(1.0 / k as f64);
        s += if term.is_finite() { term } else { 0.0 };
        partial.push((k, s));
    }
    Ok(DcVerdict { verdict, partial_sums: partial })
}

/// Named sub-verdict inside a density verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubVerdict {
    pub name: String,
    pub holds: bool,
    pub witness: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityKind {
    Dense,
    NotDense,
    Inconclusive,
}

impl fmt::Display for DensityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensityKind::Dense => write!(f, "Dense"),
            DensityKind::NotDense => write!(f, "NotDense"),
            DensityKind::Inconclusive => write!(f, "Inconclusive"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityVerdict {
    pub kind: DensityKind,
    pub reasons: Vec<SubVerdict>,
}

impl DensityVerdict {
    pub fn to_text(&self) -> String {
        let mut s = format!("verdict: {}\n", self.kind);
        for r in &self.reasons {
            let _ = writeln!(s, "- {}: {} ({})", r.name, if r.holds { "holds" } else { "fails" }, r.witness);
        }
        s
    }
}

fn convex_reason(name: &str, b: &PlConvex, s0: f64) -> SubVerdict {
    let r = b.check_convex();
    let holds = b.is_convex_beyond(s0);
    let witness = match (holds, r) {
        (true, _) => format!("slopes nondecreasing beyond s0 = {s0}"),
        (false, Err(e)) => e.to_string(),
        (false, Ok(())) => "convexity fails beyond s0".into(),
    };
    SubVerdict { name: name.into(), holds, witness }
}

fn hall_reason(name: &str, b: &PlConvex, side: Branch, e: HallExponent) -> Result<SubVerdict> {
    let v = hall_verdict(b, side, e)?;
    Ok(SubVerdict { name: name.into(), holds: v.kind == VerdictKind::Diverges, witness: v.witness })
}

/// Density of polynomials in `C_0(1/W)`.
pub fn theorem2_verdict(wt: &TwoSidedWeight) -> Result<DensityVerdict> {
    let reasons = vec![
        convex_reason("log W(e^s) convex on [s0, inf)", &wt.qbranch, wt.s0),
        convex_reason("log W(-s^2) convex on [s0, inf)", &wt.p0branch, wt.s0),
        hall_reason("int log W(lambda)/lambda^(3/2) = inf", &wt.qbranch, Branch::Right, HallExponent::ThreeHalves)?,
        hall_reason("int log W(-lambda)/lambda^2 = inf", &wt.p0branch, Branch::Left, HallExponent::Two)?,
        hall_reason("reflected: int log W(-lambda)/lambda^(3/2) = inf", &wt.p0branch, Branch::Left, HallExponent::ThreeHalves)?,
        hall_reason("reflected: int log W(lambda)/lambda^2 = inf", &wt.qbranch, Branch::Right, HallExponent::Two)?,
    ];
    let h = |i: usize| reasons[i].holds;
    let kind = if h(0) && h(1) && h(2) && h(3) {
        DensityKind::Dense
    } else if !(h(2) && h(3)) && !(h(4) && h(5)) {
        DensityKind::NotDense
    } else {
        DensityKind::Inconclusive
    };
    Ok(DensityVerdict { kind, reasons })
}

/// One row of the Ostrowski comparison for `log W = lambda^alpha (log lambda)^beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct OstrowskiRow {
    pub alpha: Q,
    pub beta: Q,
    pub integral: VerdictKind,
    pub series: VerdictKind,
    pub agree: bool,
}

/// Compares the `3/2`-integral verdict with the `B_k` series verdict.
pub fn ostrowski_consistency(q: &PlConvex) -> Result<OstrowskiRow> {
    let t = tail_of(q, "ostrowski_consistency")?;
    if t.shape != TailShape::ExpPower {
        return Err(Error::Unsupported(format!(
            "tail {} is outside the family log W = lambda^alpha (log lambda)^beta",
            t.describe()
        )));
    }
    let a = hall_verdict(q, Branch::Right, HallExponent::ThreeHalves)?.kind;
    let b = bk_series_verdict(q)?.kind;
    Ok(OstrowskiRow { alpha: t.power.clone(), beta: t.logpower.clone(), integral: a, series: b, agree: a == b })
}

pub fn ostrowski_csv(rows: &[OstrowskiRow]) -> String {
    let mut s = String::from("alpha,beta,verdict_integral,verdict_series,agree\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{},{}", fmt_rational(&r.alpha), fmt_rational(&r.beta), r.integral, r.series, r.agree);
    }
    s
}

/// Right branch `q(s) = e^{alpha s} s^beta` sampled on `[0, t]` with its tail.
pub fn family_right_branch(alpha: &Q, beta: &Q, t: i64) -> Result<PlConvex> {
    let (a, b) = (to_f(alpha), to_f(beta));
    let tail = TailClass::exp_power(1.0, alpha.clone(), beta.clone(), qi(t))?;
    let tf = t as f64;
    let vt = (a * tf).exp() * tf.powf(b);
    let bps = vec![(qi(0), Q::zero()), (qi(t), crate::convexcalc::qf(vt))];
    PlConvex::new(bps, Extension::Tail(tail))
}

/// Left branch `p0(s) = 2^beta s^{2 alpha} (log s)^beta` with a linear head.
pub fn family_left_branch(alpha: &Q, beta: &Q, t: i64) -> Result<PlConvex> {
    let (a, b) = (to_f(alpha), to_f(beta));
    let c = 2f64.powf(b);
    let tail = TailClass::power_log(c, qi(2) * alpha, beta.clone(), qi(t))?;
    let tf = t as f64;
    let vt = c * tf.powf(2.0 * a) * tf.ln().powf(b);
    let bps = vec![(qi(0), Q::zero()), (qi(t), crate::convexcalc::qf(vt))];
    PlConvex::new(bps, Extension::Tail(tail))
}

/// Checks `log(left term of M_k(x)) <= (k+1) log C_x + log k!` on `ks`.
pub fn factorial_bound_check(wt: &TwoSidedWeight, x: f64, ks: &[usize]) -> Result<(f64, EstimateReport)> {
    let p0 = &wt.p0branch;
    let c = x + 1.0;
    if outgrows_linear(p0, c) != Some(true) {
        return Err(Error::Precondition(format!("left branch does not dominate {c} sqrt(lambda)")));
    }
    let gap = |t: f64| p0.value(t) - c * t;
    let mut hi = to_f(p0.last_s()).max(1.0);
    while gap(hi) < 0.0 || slope_at(p0, hi) < c {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Precondition("could not locate lambda_0(x)".into()));
        }
    }
    let mut lo = 0.0;
    if gap(0.0) < 0.0 || (0..64).any(|i| gap(hi * i as f64 / 64.0) < 0.0) {
        // Right end of the sublevel set {gap < 0}.
        let mut a = (0..64).map(|i| hi * i as f64 / 64.0).filter(|&t| gap(t) < 0.0).fold(0.0, f64::max);
        let mut b = hi;
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if gap(m) < 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        lo = b;
    }
    let tx = lo;
    let log_c = tx.max(1.0).ln() + x * tx;
    let mut rep = EstimateReport::new("factorial_bound", Scale::Log, 1e-9);
    for &k in ks {
        let (l, _, _) = left_term(p0, x, k);
        let rhs = (k as f64 + 1.0) * log_c + ln_factorial(k);
        rep.push(EstimateRow::exponent(k as f64, l, rhs, 1e-9));
    }
    Ok((log_c.exp(), rep))
}

pub fn ln_factorial(k: usize) -> f64 {
    (1..=k).map(|i| (i as f64).ln()).sum()
}
