//! Unified-transform scattering for the good Boussinesq system on the
//! half-line: eigenfunctions and spectral functions from Cauchy data, the
//! four reflection coefficients, the twelve-ray vector Riemann–Hilbert
//! problem and a pseudospectral reference solver.

pub mod algebra;
pub mod error;
pub mod grid;
pub mod io;
pub mod krylov;
pub mod lax;
pub mod oracle;
pub mod pipeline;
pub mod reflection;
pub mod rh;
pub mod verify;
pub mod ode;
pub mod volterra;

pub use error::{Error, Result};
