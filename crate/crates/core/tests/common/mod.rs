#![allow(dead_code)]

use proptest::prelude::*;
use quasiline_core::convexcalc::{qi, qr, Extension, PlConvex, Q};

/// Normalized convex PL function from exact increments: `ds` in eighths,
/// slope steps in sixths, the first slope in fifths.
pub fn pl_from(ds: &[i64], dm: &[i64], m0: i64, infinite: bool) -> PlConvex {
    let mut bps: Vec<(Q, Q)> = vec![(qi(0), qi(0))];
    let mut m = qr(m0, 5);
    for (i, &d) in ds.iter().enumerate() {
        if i > 0 {
            m = &m + qr(dm[i - 1], 6);
        }
        let (s, v) = bps.last().unwrap().clone();
        let h = qr(d, 8);
        bps.push((&s + &h, &v + &m * &h));
    }
    let ext = if infinite { Extension::Infinite } else { Extension::Linear(&m + qr(*dm.last().unwrap_or(&0), 6)) };
    PlConvex::new(bps, ext).unwrap()
}

prop_compose! {
    pub fn arb_pl(max_bps: usize)(n in 1..max_bps)
        (ds in prop::collection::vec(1i64..40, n), dm in prop::collection::vec(0i64..20, n), m0 in 0i64..10, inf in any::<bool>())
        -> PlConvex {
        pl_from(&ds, &dm, m0, inf)
    }
}

/// Pseudo-random normalized PL functions for fixed-count runs.
pub fn random_pls(count: usize, max_bps: usize, seed: u64) -> Vec<PlConvex> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(1..max_bps);
            let ds: Vec<i64> = (0..n).map(|_| rng.gen_range(1..40)).collect();
            let dm: Vec<i64> = (0..n).map(|_| rng.gen_range(0..20)).collect();
            pl_from(&ds, &dm, rng.gen_range(0..10), rng.gen_bool(0.5))
        })
        .collect()
}

/// Atomic measures on `[-5, 5]` with distinct locations.
pub fn arb_atoms(max: usize) -> impl Strategy<Value = quasiline_core::measures::SignedMeasure> {
    prop::collection::btree_map(-500i32..=500, -3.0f64..3.0, 1..max).prop_map(|m| {
        quasiline_core::measures::SignedMeasure::from_atoms(m.into_iter().map(|(l, w)| (l as f64 / 100.0, w)).collect()).unwrap()
    })
}

/// Last breakpoint, or twice it for linear extensions.
pub fn domain_end(p: &PlConvex) -> f64 {
    let last = quasiline_core::convexcalc::to_f(&p.breakpoints().last().unwrap().0);
    match p.extension() {
        Extension::Infinite => last,
        _ => 2.0 * last,
    }
}
