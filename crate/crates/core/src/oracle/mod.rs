//! Independent reference computations: Monte Carlo diffusion densities, an
//! explicit finite-difference heat solver and derivatives along exact flows.

mod fd_derivative;
mod fd_pde;
mod mc;

pub use fd_derivative::{fd_derivative, word_directions, Direction, FieldFlow};
pub use fd_pde::{fd_cauchy_reference, fd_cauchy_solver, FdSolution, GridSpec};
pub use mc::{ito_drift, mc_density, DiffusionConfig, McBin, McReport};
