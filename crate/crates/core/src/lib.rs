//! Exact Hartree-Fock and Fock-space checks for the half-filled Hubbard model
//! on the torus `Z_L^d`.

pub mod bounds;
pub mod error;
pub mod fock;
pub mod hartree_fock;
pub mod lattice;
pub mod report;

pub use error::{Error, Result};
