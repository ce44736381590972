//! Numerical spectral geometry of the Jacobi (stability) operator
//! `L = -Δ - |σ|² - Ric(ν,ν)` on closed surfaces of the round 3-sphere and
//! of warped products `I ×_h Sⁿ`.
//!
//! The crate is organised bottom-up:
//!
//! * [`warping`]: closed-form curvature of the ambient warped product and the
//!   spectrum of the Jacobi operator of its slices.
//! * [`surface`] and [`geometry`]: parametric surfaces on structured grids and
//!   their first/second fundamental forms.
//! * [`catalog`]: closed-form test shapes with known spectra.
//! * [`assembly`] and [`eigen`]: the discrete operator pencil `(A, M)` and its
//!   smallest eigenpairs.
//! * [`conformal`]: Möbius dilations of `S³` and conformal balancing.
//! * [`harness`]: theorem checks, sweeps, refinement studies and reports.

// `!(x > 0.0)` is the NaN-rejecting form of a positivity test.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod catalog;
pub mod config;
pub mod conformal;
pub mod eigen;
pub mod error;
pub mod geometry;
pub mod harmonics;
pub mod harness;
pub mod linalg;
pub mod report;
pub mod surface;
pub mod warping;

pub use error::{Error, Result};
