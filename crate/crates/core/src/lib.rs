//! Discrete Cheeger–Simons differential characters on triangulated closed
//! manifolds, and the simplicial abelian gauge partition function built on
//! top of them.
//!
//! The crate is `no_std` and needs only `alloc`. Everything that touches a
//! file system, a clock or a command line lives in the companion `simchar`
//! crate.
//!
//! Layout, bottom up:
//!
//! * [`linalg`]: dense and sparse helpers over `f64` and modular integers.
//! * [`complex`]: oriented affine simplicial complexes and subdivisions.
//! * [`exact`]: Smith normal form and integral (co)homology.
//! * [`whitney`]: Whitney forms, the de Rham map and the embedding `W′`.
//! * [`hodge`]: Gram matrices, Laplacians, harmonic bases, determinants.
//! * [`characters`]: the Cheeger–Simons model, character coordinates, sparks.
//! * [`gauge`]: theta functions, Gaussian integrals, the partition function.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod characters;
pub mod complex;
mod error;
pub mod exact;
pub mod gauge;
pub mod hodge;
pub mod linalg;
pub mod whitney;

pub use error::{Error, Result};
