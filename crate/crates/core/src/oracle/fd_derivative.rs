//! Derivatives along exact flows of polynomial vector fields.

use std::sync::Arc;

use crate::carnot::flow_time_one_with_params;
use crate::error::{Error, Result};
use crate::fdiff::{partial, Estimate};
use crate::fields::PolyVectorField;
use crate::polyalg::{CompiledMap, WeightedPolynomial};

/// `(x, h) -> exp(h X)(x)` for a polynomial field `X` whose coefficients only
/// involve lighter coordinates.
#[derive(Clone, Debug)]
pub struct FieldFlow {
    map: Arc<CompiledMap>,
}

impl FieldFlow {
    pub fn new(field: &PolyVectorField) -> Result<Self> {
        let n = field.dim();
        let rename: Vec<Option<usize>> = (0..n).map(Some).collect();
        let h = WeightedPolynomial::var(n + 1, n);
        let comps = field
            .components()
            .iter()
            .map(|c| Ok(c.remap(n + 1, &rename)?.try_mul(&h)?))
            .collect::<Result<Vec<_>>>()?;
        let flow = flow_time_one_with_params(&comps, field.weights(), 1)?;
        Ok(Self {
            map: Arc::new(CompiledMap::new(&flow)),
        })
    }

    pub fn apply(&self, x: &[f64], h: f64, out: &mut [f64]) {
        let mut arg = x.to_vec();
        arg.push(h);
        self.map.eval_into(&arg, out);
    }
}

/// A curve through the evaluation point along which one derivative is taken.
#[derive(Clone, Debug)]
pub enum Direction {
    /// `h -> p + h e_k`.
    Axis(usize),
    /// The flow of a field acting on the coordinates `offset..offset + n`.
    Flow { offset: usize, flow: FieldFlow },
}

/// `d/dh_1 .. d/dh_k f(c_k(h_k, .. c_1(h_1, point)))` at `h = 0`, so the
/// first direction is the leftmost operator. Central differences with steps
/// `step / 2^l` for `l < levels`, Richardson-extrapolated.
pub fn fd_derivative<F>(mut f: F, point: &[f64], directions: &[Direction], step: f64, levels: usize) -> Result<Estimate>
where
    F: FnMut(&[f64]) -> f64,
{
    if !(step > 0.0) || levels == 0 {
        return Err(Error::InvalidInput("step and levels must be positive".into()));
    }
    for d in directions {
        let ok = match d {
            Direction::Axis(k) => *k < point.len(),
            Direction::Flow { offset, flow } => offset + flow.map.len() <= point.len(),
        };
        if !ok {
            return Err(Error::Dimension("direction outside the evaluation point".into()));
        }
    }
    let k = directions.len();
    let mut p = vec![0.0; point.len()];
    let mut buf = vec![0.0; point.len()];
    let g = |hs: &[f64]| {
        p.copy_from_slice(point);
        for (d, &h) in directions.iter().zip(hs) {
            match d {
                Direction::Axis(i) => p[*i] += h,
                Direction::Flow { offset, flow } => {
                    let n = flow.map.len();
                    flow.apply(&p[*offset..offset + n], h, &mut buf[..n]);
                    p[*offset..offset + n].copy_from_slice(&buf[..n]);
                }
            }
        }
        f(&p)
    };
    Ok(partial(g, &vec![0.0; k], &vec![1; k], &vec![step; k], levels))
}

/// Directions for a word `X_{i_1} .. X_{i_k}` (0-based letters) acting on
/// the coordinates `offset..offset + n`.
pub fn word_directions(fields: &[PolyVectorField], word: &[usize], offset: usize) -> Result<Vec<Direction>> {
    word.iter()
        .map(|&i| {
            let field = fields
                .get(i)
                .ok_or_else(|| Error::InvalidInput(format!("no field X{}", i + 1)))?;
            Ok(Direction::Flow {
                offset,
                flow: FieldFlow::new(field)?,
            })
        })
        .collect()
}
