//! Fourier-basis discretisation of Perron–Frobenius operators, random
//! drivers over the base space, and cocycle products.

mod assemble;
pub mod cache;
mod cocycle;
mod driver;

pub use assemble::{assemble, default_quadrature, fejer_defect, fejer_defect_probed, fejer_factor, min_quadrature, TransferMatrix};
pub use cocycle::{Cocycle, StabilizedProduct};
pub use driver::{CocyclePath, Driver, DriverKind};
