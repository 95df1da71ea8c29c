use serde::{Deserialize, Serialize};

use super::SaturatedKernel;
use crate::carnot::CarnotGroup;
use crate::error::Result;
use crate::quad::{adaptive, adaptive_box, AdaptiveConfig};

/// Outcome of the search for a constant in the Gaussian bounds of `Gamma`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SandwichFit {
    /// Smallest grid value for which both bounds hold everywhere.
    pub c: Option<f64>,
    pub points: usize,
    /// `(c, number of violated points)` for every candidate tried.
    pub tried: Vec<(f64, usize)>,
}

/// `(tau, x, y)` with `tau` in `{1/2, 1, 2}`, two base points and `y - x` on
/// three dilation-scaled levels per coordinate.
pub fn gamma_validation_points(group: &CarnotGroup) -> Vec<(f64, Vec<f64>, Vec<f64>)> {
    let w = group.weights_x().as_f64();
    let levels = [-1.5, 0.0, 1.5];
    let mut out = Vec::new();
    for &tau in &[0.5f64, 1.0, 2.0] {
        let scale: Vec<f64> = w.iter().map(|s| tau.powf(s / 2.0)).collect();
        let bases = [vec![0.0; w.len()], scale.iter().map(|c| 0.7 * c).collect::<Vec<_>>()];
        for x in &bases {
            let total = levels.len().pow(w.len() as u32);
            for code in 0..total {
                let mut c = code;
                let y: Vec<f64> = (0..w.len())
                    .map(|k| {
                        let v = levels[c % levels.len()];
                        c /= levels.len();
                        x[k] + v * scale[k]
                    })
                    .collect();
                out.push((tau, x.clone(), y));
            }
        }
    }
    out
}

impl SaturatedKernel {
    /// Lower and upper Gaussian bounds of `Gamma(t, x; s, y)`:
    /// `c^{-1} tau^{-Q/2} int exp(-c h^2 / tau)` and
    /// `c tau^{-Q/2} int exp(-h^2 / (c tau))`, with `h` the homogeneous norm of
    /// `(x, 0)^{-1} * (y, eta)` and `tau = s - t > 0`.
    pub fn sandwich_bounds(&self, t: f64, x: &[f64], s: f64, y: &[f64], c: f64) -> Result<(f64, f64)> {
        self.check(x, y)?;
        let tau = s - t;
        if tau <= 0.0 {
            return Ok((0.0, 0.0));
        }
        let group = self.group();
        let norms = group.norms();
        let sigma = group.weights_xi().as_f64();
        let base = tau.powf(-self.kernel.big_q() / 2.0);
        let mut arg: Vec<f64> = x.iter().chain(y).copied().collect();
        arg.extend(std::iter::repeat(0.0).take(group.p()));
        let off = 2 * group.n();
        let mut integral = |scale: f64| -> Result<f64> {
            // exp(-h^2 / (scale tau)) <= exp(-nu(u)^2 / (scale tau)) < e^{-40} outside.
            let r = (40.0 * scale * tau).sqrt();
            let hi: Vec<f64> = sigma.iter().map(|s| r.powf(*s)).collect();
            let lo: Vec<f64> = hi.iter().map(|h| -h).collect();
            let cfg = AdaptiveConfig {
                initial_panels: 8,
                ..AdaptiveConfig::with_tol(1e-7, 0.0)
            };
            let mut f = |u: &[f64]| {
                arg[off..].copy_from_slice(u);
                let g = group.numerics().straightened.eval(&arg);
                let h = norms.h(&g);
                (-h * h / (scale * tau)).exp()
            };
            let res = if hi.len() == 1 {
                adaptive(lo[0], hi[0], &cfg, |v| f(&[v]))?
            } else {
                adaptive_box(&lo, &hi, &cfg, &mut f)?
            };
            Ok(res.value)
        };
        let lower = base * integral(1.0 / c)? / c;
        let upper = base * c * integral(c)?;
        Ok((lower, upper))
    }

    /// Smallest `c` on `grid` with both bounds holding at every point of
    /// [`gamma_validation_points`].
    pub fn fit_sandwich(&self, grid: &[f64]) -> Result<SandwichFit> {
        let points = gamma_validation_points(self.group());
        let values: Vec<f64> = points
            .iter()
            .map(|(tau, x, y)| self.gamma_sat(0.0, x, *tau, y))
            .collect::<Result<_>>()?;
        let mut tried = Vec::new();
        for &c in grid {
            let mut bad = 0;
            for ((tau, x, y), v) in points.iter().zip(&values) {
                let (lo, hi) = self.sandwich_bounds(0.0, x, *tau, y, c)?;
                if !(lo <= *v && *v <= hi) {
                    bad += 1;
                }
            }
            tried.push((c, bad));
            if bad == 0 {
                return Ok(SandwichFit {
                    c: Some(c),
                    points: points.len(),
                    tried,
                });
            }
        }
        Ok(SandwichFit {
            c: None,
            points: points.len(),
            tried,
        })
    }
}
