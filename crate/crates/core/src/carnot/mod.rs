//! Carnot-group lifting: BCH group law, graded split coordinates `(x, xi)`
//! and the maps `F`, `Psi_{x,y}`, `phi_{x,y}`.

pub mod bch;
mod flow;
mod group;
pub mod maps;
mod norms;
mod numerics;
mod serial;
mod verify;

pub use bch::{bch_coefficients, bch_poly, bracket_poly, MAX_BCH_DEGREE};
pub use flow::{flow_time_one, flow_time_one_with_params};
pub use group::{build_split_coordinates, CarnotGroup, KernelAvailability};
pub use norms::HomogeneousNorms;
pub use numerics::GroupNumerics;
pub use serial::GroupFile;
pub use verify::{lift_system, monomials_up_to, LiftReport};

use crate::error::Result;
use crate::fields::GradedLieBasis;
use crate::polyalg::WeightedPolynomial;

/// Group law and inverse in exponential coordinates of the first kind.
pub fn bch_group_law(basis: &GradedLieBasis) -> Result<(Vec<WeightedPolynomial>, Vec<WeightedPolynomial>)> {
    let big_n = basis.dim();
    let a = maps::vars(2 * big_n, 0, big_n);
    let b = maps::vars(2 * big_n, big_n, big_n);
    let law = bch_poly(basis, &a, &b)?;
    Ok((law, maps::neg(&maps::identity(big_n))))
}

impl CarnotGroup {
    pub fn norms(&self) -> HomogeneousNorms {
        HomogeneousNorms::new(self.weights_x(), self.weights_xi())
    }
}
