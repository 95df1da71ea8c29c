use serde::{Deserialize, Serialize};

use super::ExternalKernel;
use crate::carnot::CarnotGroup;
use crate::error::{Error, Result};

/// Kernel tabulated at `t = 1` on a regular grid in split coordinates and
/// extended to all `t > 0` by `gamma(t, g) = t^{-Q/2} gamma(1, D_{1/sqrt t} g)`.
/// Multilinear interpolation inside the grid, zero outside.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabulatedKernel {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub shape: Vec<usize>,
    /// Row-major, last coordinate fastest.
    pub values: Vec<f64>,
    #[serde(skip)]
    weights: Vec<f64>,
    #[serde(skip)]
    big_q: f64,
}

impl TabulatedKernel {
    pub fn from_json(text: &str, group: &CarnotGroup) -> Result<Self> {
        let mut k: TabulatedKernel = serde_json::from_str(text)?;
        k.attach(group)?;
        Ok(k)
    }

    /// Samples `f(g)` on the grid.
    pub fn sample<F: FnMut(&[f64]) -> Result<f64>>(
        group: &CarnotGroup,
        lo: Vec<f64>,
        hi: Vec<f64>,
        shape: Vec<usize>,
        mut f: F,
    ) -> Result<Self> {
        let total: usize = shape.iter().product();
        let mut values = Vec::with_capacity(total);
        let mut idx = vec![0usize; shape.len()];
        let mut g = vec![0.0; shape.len()];
        for _ in 0..total {
            for k in 0..shape.len() {
                g[k] = lo[k] + (hi[k] - lo[k]) * idx[k] as f64 / (shape[k] - 1) as f64;
            }
            values.push(f(&g)?);
            for k in (0..shape.len()).rev() {
                idx[k] += 1;
                if idx[k] < shape[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        let mut k = TabulatedKernel {
            lo,
            hi,
            shape,
            values,
            weights: Vec::new(),
            big_q: 0.0,
        };
        k.attach(group)?;
        Ok(k)
    }

    fn attach(&mut self, group: &CarnotGroup) -> Result<()> {
        let d = group.dim();
        let total: usize = self.shape.iter().product();
        if self.lo.len() != d
            || self.hi.len() != d
            || self.shape.len() != d
            || self.values.len() != total
            || self.shape.iter().any(|&s| s < 2)
            || self.lo.iter().zip(&self.hi).any(|(a, b)| !(a < b))
        {
            return Err(Error::InvalidInput(format!(
                "tabulated kernel does not describe a grid on R^{d}"
            )));
        }
        self.weights = group.weights().as_f64();
        self.big_q = group.big_q_f64();
        Ok(())
    }

    fn at_unit_time(&self, g: &[f64]) -> f64 {
        let d = g.len();
        let mut base = vec![0usize; d];
        let mut frac = vec![0.0; d];
        for k in 0..d {
            let s = (g[k] - self.lo[k]) / (self.hi[k] - self.lo[k]) * (self.shape[k] - 1) as f64;
            if !(0.0..=(self.shape[k] - 1) as f64).contains(&s) {
                return 0.0;
            }
            let i = (s.floor() as usize).min(self.shape[k] - 2);
            base[k] = i;
            frac[k] = s - i as f64;
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut flat = 0usize;
            for k in 0..d {
                let bit = (corner >> k) & 1;
                w *= if bit == 1 { frac[k] } else { 1.0 - frac[k] };
                flat = flat * self.shape[k] + base[k] + bit;
            }
            if w != 0.0 {
                acc += w * self.values[flat];
            }
        }
        acc
    }
}

impl ExternalKernel for TabulatedKernel {
    fn eval(&self, t: f64, g: &[f64]) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let r = t.sqrt();
        let scaled: Vec<f64> = g
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| x / r.powf(*w))
            .collect();
        t.powf(-self.big_q / 2.0) * self.at_unit_time(&scaled)
    }

    fn envelope(&self, t: f64) -> Option<Vec<f64>> {
        let r = t.sqrt();
        Some(
            self.lo
                .iter()
                .zip(&self.hi)
                .zip(&self.weights)
                .map(|((a, b), w)| a.abs().max(b.abs()) * r.powf(*w))
                .collect(),
        )
    }
}
