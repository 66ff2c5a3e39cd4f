#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

//! Linear inviscid damping of the beta-plane equation around channel shear
//! flows: single-wavenumber vorticity evolution, the Rayleigh–Kuo resolvent
//! with limiting absorption, discrete spectra, and the Sinus-flow atlas.

pub mod atlas;
pub mod error;
pub mod evolution;
pub mod fieldops;
mod linalg;
pub mod profiles;
pub mod rayleighkuo;
pub mod spectra;

pub use error::{Error, Result};
pub use fieldops::{chebyshev_grid, ComplexField, Grid, HelmholtzSolver};
pub use profiles::{make_profile, CriticalData, ShearProfile};
