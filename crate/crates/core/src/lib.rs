//! Numerical laboratory for periodic Schrödinger operators `H0 = −Δ + q`
//! and their perturbations `H = H0 + v`: band structures, Fermi varieties
//! as zero sets of the Bloch determinant, the Floquet transform, and
//! finite-box experiments on embedded eigenvalues.

pub mod band_structure;
pub mod cli;
pub mod error;
pub mod fermi;
pub mod floquet_transform;
pub mod hill;
pub mod numeric;
pub mod perturbed;
pub mod plane_wave;
pub mod potential;

pub use error::{Error, Result};
pub use plane_wave::{BlochFamily, BlochMatrix, LogDet, PlaneWaveBasis};
pub use potential::{FourierPotential, PotentialFile, SeparablePotential};
