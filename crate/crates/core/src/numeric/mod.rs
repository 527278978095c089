//! Shared numerical kernels.

pub mod fd;
pub mod quad;
pub mod sum;

use num_complex::Complex64;

/// Principal square root with nonnegative imaginary part on the upper half-plane.
pub fn sqrt_upper(z: Complex64) -> Complex64 {
    let r = z.sqrt();
    if r.im < 0.0 {
        -r
    } else {
        r
    }
}

/// `log(1 + t)` for complex `t`, accurate when `|t|` is small.
pub fn clog1p(t: Complex64) -> Complex64 {
    let u = Complex64::new(1.0, 0.0) + t;
    let d = u - Complex64::new(1.0, 0.0);
    if d == Complex64::new(0.0, 0.0) {
        return t;
    }
    u.ln() * (t / d)
}

/// `log(exp(a) + exp(b))` without overflow.
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    if m == f64::INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `log cosh(y)` for real `y` without overflow.
pub fn log_cosh(y: f64) -> f64 {
    let a = y.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Parses a decimal or `num/den` literal into f64.
pub fn parse_real(tok: &str) -> Option<f64> {
    if let Some((n, d)) = tok.split_once('/') {
        let n: f64 = n.trim().parse().ok()?;
        let d: f64 = d.trim().parse().ok()?;
        if d == 0.0 {
            return None;
        }
        return Some(n / d);
    }
    tok.parse().ok()
}
