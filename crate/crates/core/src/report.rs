//! Per-point inequality records and their CSV form.

use std::fmt::Write as _;

/// One checked inequality `lhs <= rhs` at abscissa `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRow {
    pub x: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `log(rhs) - log(lhs)`.
    pub margin: f64,
    pub pass: bool,
    pub constant_used: Option<String>,
}

/// Whether `lhs`/`rhs` hold raw values or their logarithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

impl EstimateRow {
    /// Row from raw nonnegative values.
    pub fn ratio(x: f64, lhs: f64, rhs: f64, tol: f64) -> Self {
        let margin = log_margin(lhs, rhs);
        Self { x, lhs, rhs, margin, pass: margin >= -tol, constant_used: None }
    }

    /// Row from logarithms of the two sides.
    pub fn exponent(x: f64, log_lhs: f64, log_rhs: f64, tol: f64) -> Self {
        let margin = if log_lhs == f64::NEG_INFINITY {
            f64::INFINITY
        } else if log_rhs == f64::INFINITY && log_lhs < f64::INFINITY {
            f64::INFINITY
        } else {
            log_rhs - log_lhs
        };
        let margin = if margin.is_nan() { f64::NEG_INFINITY } else { margin };
        Self { x, lhs: log_lhs, rhs: log_rhs, margin, pass: margin >= -tol, constant_used: None }
    }

    /// Row from logarithms of the sides; `lhs`/`rhs` hold the values.
    pub fn from_logs(x: f64, log_lhs: f64, log_rhs: f64, tol: f64) -> Self {
        let mut r = Self::exponent(x, log_lhs, log_rhs, tol);
        r.lhs = log_lhs.exp();
        r.rhs = log_rhs.exp();
        r
    }

    pub fn with_constant(mut self, name: impl Into<String>) -> Self {
        self.constant_used = Some(name.into());
        self
    }
}

fn log_margin(lhs: f64, rhs: f64) -> f64 {
    if lhs.is_nan() || rhs.is_nan() || lhs < 0.0 || rhs < 0.0 {
        return f64::NEG_INFINITY;
    }
    if lhs == 0.0 {
        return f64::INFINITY;
    }
    if rhs == 0.0 {
        return f64::NEG_INFINITY;
    }
    rhs.ln() - lhs.ln()
}

/// A named collection of rows certifying one displayed inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub name: String,
    pub scale: Scale,
    pub tolerance: f64,
    pub rows: Vec<EstimateRow>,
}

impl EstimateReport {
    pub fn new(name: impl Into<String>, scale: Scale, tolerance: f64) -> Self {
        Self { name: name.into(), scale, tolerance, rows: Vec::new() }
    }

    pub fn push(&mut self, row: EstimateRow) {
        self.rows.push(row);
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.pass).count()
    }

    pub fn min_margin(&self) -> f64 {
        self.rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min)
    }

    /// CSV with header `x,lhs,rhs,margin,pass`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,lhs,rhs,margin,pass\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{},{},{}", fmt_num(r.x), fmt_num(r.lhs), fmt_num(r.rhs), fmt_num(r.margin), r.pass);
        }
        s
    }

    /// CSV with header `x,lhs,rhs,margin,pass,constant_used`.
    pub fn to_csv_with_constant(&self) -> String {
        let mut s = String::from("x,lhs,rhs,margin,pass,constant_used\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                fmt_num(r.x),
                fmt_num(r.lhs),
                fmt_num(r.rhs),
                fmt_num(r.margin),
                r.pass,
                r.constant_used.as_deref().unwrap_or("")
            );
        }
        s
    }
}

/// Shortest round-trip formatting; stable across runs.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:e}")
    }
}
