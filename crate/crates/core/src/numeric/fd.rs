//! Finite-difference stencils.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

/// Weights for the `m`-th derivative at 0 on integer offsets `offsets`
/// (Fornberg's recursion, exact rationals).
pub fn fornberg(m: usize, offsets: &[i64]) -> Vec<f64> {
    let n = offsets.len();
    assert!(n > m, "need more points than the derivative order");
    let xs: Vec<BigRational> = offsets.iter().map(|&o| BigRational::from_integer(BigInt::from(o))).collect();
    let zero = BigRational::zero();
    let mut c = vec![vec![zero.clone(); m + 1]; n];
    let mut c1 = BigRational::from_integer(1.into());
    let mut c4 = xs[0].clone();
    c[0][0] = BigRational::from_integer(1.into());
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = BigRational::from_integer(1.into());
        let c5 = c4.clone();
        c4 = xs[i].clone();
        for j in 0..i {
            let c3 = &xs[i] - &xs[j];
            c2 = &c2 * &c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    let kk = BigRational::from_integer(BigInt::from(k));
                    c[i][k] = &c1 * (&kk * &c[i - 1][k - 1] - &c5 * &c[i - 1][k]) / &c2;
                }
                c[i][0] = -(&c1 * &c5 * &c[i - 1][0]) / &c2;
            }
            for k in (1..=mn).rev() {
                let kk = BigRational::from_integer(BigInt::from(k));
                c[j][k] = (&c4 * &c[j][k] - &kk * &c[j][k - 1]) / &c3;
            }
            c[j][0] = &c4 * &c[j][0] / &c3;
        }
        c1 = c2;
    }
    c.iter().map(|row| row[m].to_f64().unwrap_or(f64::NAN)).collect()
}

/// Symmetric stencil for the `k`-th derivative with accuracy order 8.
pub fn central_stencil(k: usize) -> (Vec<i64>, Vec<f64>) {
    let half = (k as i64 + 1) / 2 + 3;
    let offsets: Vec<i64> = (-half..=half).collect();
    let w = fornberg(k, &offsets);
    (offsets, w)
}
