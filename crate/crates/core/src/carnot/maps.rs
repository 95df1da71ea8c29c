//! Small helpers for polynomial maps `R^k -> R^m`.

use crate::error::Result;
use crate::polyalg::WeightedPolynomial;

pub type PolyMap = Vec<WeightedPolynomial>;

pub fn identity(nv: usize) -> PolyMap {
    (0..nv).map(|i| WeightedPolynomial::var(nv, i)).collect()
}

/// Variables `start..start+len` of a ring with `nv` variables.
pub fn vars(nv: usize, start: usize, len: usize) -> PolyMap {
    (start..start + len).map(|i| WeightedPolynomial::var(nv, i)).collect()
}

pub fn zeros(nv: usize, len: usize) -> PolyMap {
    vec![WeightedPolynomial::zero(nv); len]
}

pub fn compose(outer: &[WeightedPolynomial], inner: &[WeightedPolynomial]) -> Result<PolyMap> {
    Ok(outer
        .iter()
        .map(|p| p.compose(inner))
        .collect::<std::result::Result<Vec<_>, _>>()?)
}

pub fn embed(ps: &[WeightedPolynomial], nv: usize, offset: usize) -> PolyMap {
    ps.iter().map(|p| p.embed(nv, offset)).collect()
}

pub fn concat(a: &[WeightedPolynomial], b: &[WeightedPolynomial]) -> PolyMap {
    a.iter().chain(b).cloned().collect()
}

pub fn neg(ps: &[WeightedPolynomial]) -> PolyMap {
    ps.iter().map(|p| -p).collect()
}

/// `J[i][j] = d p_i / d x_j`.
pub fn jacobian(ps: &[WeightedPolynomial]) -> Result<Vec<PolyMap>> {
    ps.iter()
        .map(|p| {
            (0..p.num_vars())
                .map(|j| Ok(p.partial(j)?))
                .collect::<Result<Vec<_>>>()
        })
        .collect()
}

/// Drops trailing variables that do not occur.
pub fn truncate_vars(ps: &[WeightedPolynomial], nv: usize) -> Result<PolyMap> {
    let old = ps.first().map(|p| p.num_vars()).unwrap_or(nv);
    let map: Vec<Option<usize>> = (0..old).map(|i| (i < nv).then_some(i)).collect();
    Ok(ps
        .iter()
        .map(|p| p.remap(nv, &map))
        .collect::<std::result::Result<Vec<_>, _>>()?)
}

pub fn all_equal(a: &[WeightedPolynomial], b: &[WeightedPolynomial]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x == y)
}
