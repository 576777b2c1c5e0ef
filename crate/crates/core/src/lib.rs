//! Radiative transfer in enclosures with participating media, solved as a
//! coupled boundary/volume integral equation system.

pub mod assembly;
pub mod cases;
pub mod config;
pub mod geometry;
pub mod kernels;
pub mod profile;
pub mod quadrature;
pub mod runner;
pub mod solver;
pub mod validation;
pub mod visibility;
