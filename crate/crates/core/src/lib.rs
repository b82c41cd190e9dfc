//! Numerical laboratory for kinetic uncertainty relations in Markovian open
//! quantum systems.
//!
//! The pipeline for a Lindblad model is: build the Liouvillian
//! ([`superop::build_liouvillian`]), solve for the steady state and the
//! Drazin inverse, then evaluate the current statistics of a
//! [`counting::CountingScheme`] together with the coherence factors psi and
//! chi ([`kur::kur_report`]).
//!
//! ```
//! use qkur::models::{build_dqd, DqdParams};
//! use qkur::kur::kur_report;
//!
//! let (model, schemes) = build_dqd(&DqdParams::default()).unwrap();
//! let report = kur_report(&model, &schemes.through).unwrap();
//! assert!((report.psi.unwrap() + 0.4).abs() < 1e-12);
//! assert_eq!(report.ok_psi, Some(true));
//! ```

pub mod acceptance;
pub mod classical;
pub mod counting;
pub mod error;
pub mod kur;
mod linalg;
pub mod models;
pub mod report;
pub mod superop;

#[cfg(test)]
mod test_util;

pub use error::{KurError, Result};
pub use linalg::{CMatrix, CVector};
