//! Bounds on the oracle accuracy of human annotators and classification
//! models, computed from nothing but inter-annotator agreement.
//!
//! The typical flow mirrors the four-step certification procedure:
//!
//! 1. ingest an annotation matrix ([`data`]) and compute pairwise agreement
//!    ([`agreement`]);
//! 2. bound the average annotator's oracle accuracy from above and the
//!    model's from below ([`bounds`]), using a majority-vote aggregate as
//!    the reference ([`aggregate`]);
//! 3. check the finite-sample margin;
//! 4. turn the margin into a Hoeffding confidence score ([`certify`]).
//!
//! When oracle labels exist (simulations, audited subsets) [`validate`]
//! checks the assumptions behind the bounds and [`sim`] generates
//! oracle-known data for convergence and coverage experiments.
//!
//! ```
//! use oraclebound::certify::confidence_hms;
//!
//! let result = confidence_hms(0.919, 0.879, 10_000, 0.0).unwrap();
//! assert!((result.score.unwrap() - 0.9997).abs() < 5e-4);
//! ```

pub mod aggregate;
pub mod agreement;
pub mod bounds;
pub mod certify;
pub mod cli;
pub mod data;
pub mod error;
pub mod report;
pub mod sim;
pub mod validate;

pub use error::{Error, Result};
