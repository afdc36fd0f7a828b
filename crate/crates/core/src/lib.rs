//! Random scattering zippers: matrix-valued CMV-type random unitary
//! operators, their `U(L,L)` transfer cocycles, Lyapunov spectra, Lie
//! algebra certification of the transfer group, and finite-volume spectral
//! diagnostics.

pub mod cli;
pub mod error;
pub mod exec;
pub mod haar;
pub mod linalg;
pub mod lie;
pub mod lyapunov;
pub mod selftest;
pub mod spectral;
pub mod transfer;
pub mod zipper;

pub use error::{Error, Result};
