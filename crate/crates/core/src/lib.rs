//! Traveling waves and invasion dynamics for a singular predator-prey system
//! with nonlocal dispersal.
//!
//! The prey U and predator V disperse by convolution against probability
//! kernels rather than by Laplacian diffusion, and the predator's carrying
//! capacity is proportional to prey density, so the reaction term V/U is
//! singular where prey vanishes. This crate provides, for that system:
//!
//! - [`kernels`]: dispersal kernels, their exponential moments, and discrete
//!   convolutions;
//! - [`dispersion`]: the minimal front speed `s*`, the characteristic
//!   function `A(lambda; s)` and its root pair;
//! - [`bounds`]: explicit upper/lower solution quadruples for speeds at and
//!   above `s*`, with a numerical verifier for the defining inequalities;
//! - [`wave`]: wave profiles computed by a damped integral fixed-point
//!   iteration sandwiched between the bounds;
//! - [`simulate`]: time integration of the full system, front tracking, and
//!   spreading-speed measurement;
//! - [`io`]: deterministic JSON/CSV serialization of every report type.

pub mod bounds;
pub mod dispersion;
pub mod error;
pub mod io;
pub mod kernels;
pub mod numeric;
pub mod simulate;
pub mod wave;

pub use error::{Error, Result};
pub use kernels::{Extension, Kernel};
pub use dispersion::ModelParams;
