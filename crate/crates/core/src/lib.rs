//! Finite-dimensional lab for random Perron–Frobenius cocycles of expanding
//! circle maps: Fourier discretization, graph transforms on Grassmannians,
//! Lyapunov spectra and Oseledets splittings.

pub mod error;
pub mod grassmann;
pub mod harness;
pub mod linalg;
pub mod maps;
pub mod oseledets;
pub mod spectral;
pub mod transfer;

pub use error::{Error, Result};
