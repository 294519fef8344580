//! Spectra of Fibonacci-type quasicrystal Hamiltonians, Cantor-set
//! arithmetic, and the regime diagram of the square Fibonacci model.
//!
//! The crate is organised bottom-up:
//!
//! * [`interval`] and [`cantor`]: interval unions, Minkowski sums, affine
//!   Cantor sets, thickness and dimension bounds.
//! * [`boxcount`]: box-counting dimension of interval unions.
//! * [`trace`]: the trace map, its invariant and orbit classification.
//! * [`spectrum`]: band covers of the spectrum, sum spectra and density of
//!   states approximants.
//! * [`measures`]: convolution of band measures, local scaling exponents and
//!   Lyapunov-based dimension relations.
//! * [`phase`]: the coupling-plane sweep and regime classification.
//! * [`cache`] and [`format`]: on-disk band cache and reproducible output.

pub mod boxcount;
pub mod cache;
pub mod cantor;
pub mod error;
pub mod format;
pub mod interval;
pub mod measures;
pub mod phase;
pub mod spectrum;
pub mod trace;

pub use error::{Error, Result};
