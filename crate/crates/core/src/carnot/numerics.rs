use crate::fields::PolyVectorField;
use crate::polyalg::{CompiledMap, WeightedPolynomial};

/// Float versions of the group maps, compiled once.
#[derive(Clone, Debug, Default)]
pub struct GroupNumerics {
    pub law: CompiledMap,
    pub inverse: CompiledMap,
    pub theta: CompiledMap,
    pub theta_inv: CompiledMap,
    pub conv_map: CompiledMap,
    pub straightened: CompiledMap,
    pub psi_inv: CompiledMap,
    pub z_fields: Vec<CompiledMap>,
}

impl GroupNumerics {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        law: &[WeightedPolynomial],
        inverse: &[WeightedPolynomial],
        theta: &[WeightedPolynomial],
        theta_inv: &[WeightedPolynomial],
        conv_map: &[WeightedPolynomial],
        straightened: &[WeightedPolynomial],
        psi_inv: &[WeightedPolynomial],
        z_fields: &[PolyVectorField],
    ) -> Self {
        Self {
            law: CompiledMap::new(law),
            inverse: CompiledMap::new(inverse),
            theta: CompiledMap::new(theta),
            theta_inv: CompiledMap::new(theta_inv),
            conv_map: CompiledMap::new(conv_map),
            straightened: CompiledMap::new(straightened),
            psi_inv: CompiledMap::new(psi_inv),
            z_fields: z_fields.iter().map(|z| z.compile()).collect(),
        }
    }
}
