//! Numerics for the non-symmetric Bernstein problem: convex conjugates with
//! symbolic tails, cosine and Stieltjes transforms of signed measures,
//! quasianalyticity verdicts, the Carleman estimate chain, the sinc-product
//! counterexample and orthogonal-polynomial diagnostics.

pub mod convexcalc;
pub mod cosxform;
pub mod densitylab;
pub mod error;
pub mod mandelbrojt;
pub mod measures;
pub mod numeric;
pub mod par;
pub mod quasidc;
pub mod report;
pub mod vulproof;

pub use error::{Error, Result};
pub use par::Execution;
