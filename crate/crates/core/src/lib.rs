//! Expected values of linear functionals of time-fractional diffusion with a
//! random diffusivity: P1 finite elements, a graded-mesh Caputo scheme,
//! dimension truncation and interlaced polynomial lattice rules.

pub mod cli;
pub mod error;
pub mod estimator;
pub mod fem;
pub mod field;
pub mod numeric;
pub mod qmc;
pub mod tfrac;

pub use error::{Error, Result};
