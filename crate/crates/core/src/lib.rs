//! Polar coding for asymmetric channels and for channels with a
//! non-causally informed encoder, with the noisy write-once-memory models
//! used for flash rewriting.
//!
//! The crate is organised bottom-up:
//!
//! - [`prob`]: finite pmfs, entropies, Bhattacharyya parameters, degradation checks
//! - [`transform`]: the `G_n` transform
//! - [`sc`]: successive-cancellation conditionals, sampling and decisions
//! - [`channel`]: channel/state models, capacity formulas, the capacity grid oracle
//! - [`profile`]: code construction and profile files
//! - [`scheme`]: the point-to-point, multicoding and chained encoders/decoders
//! - [`harness`]: experiment configuration, Monte Carlo runs and reports
//! - [`verify`]: oracle and identity suites

#[cfg(test)]
macro_rules! assert_close {
    ($a:expr, $b:expr, $tol:expr) => {{
        let (a, b): (f64, f64) = ($a, $b);
        assert!((a - b).abs() <= $tol, "{a} vs {b} (tol {})", $tol);
    }};
}

pub mod channel;
pub mod error;
pub mod harness;
pub mod prob;
pub mod profile;
pub mod sc;
pub mod scheme;
pub mod streams;
pub mod transform;
pub mod verify;

pub use error::{Error, Result};
pub use transform::BitBlock;
