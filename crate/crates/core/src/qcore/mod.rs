//! Dense complex linear algebra over small Hilbert spaces and the fixed
//! gate set used by the rest of the crate.

mod cmatrix;
mod density;
mod gates;

pub use cmatrix::{evolution, CMatrix};
pub use density::{bit_of, embed_on_targets, DensityState};
pub use gates::{eye2, pauli, rotation, rzz, sigma_x, sigma_y, sigma_z, z_phase, zz};
