//! Global heat kernels for homogeneous Hörmander operators `sum X_j^2 - d/dt`.

pub mod polyalg;
pub mod error;
pub mod fields;

pub use error::{Error, Result};
pub mod io;
pub mod carnot;
pub mod quad;
pub mod fdiff;
pub mod kernel;
pub mod saturation;
pub mod oracle;
pub mod cauchy;
pub mod suite;
pub mod app;
