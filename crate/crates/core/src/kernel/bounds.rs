use serde::{Deserialize, Serialize};

use super::GroupHeatKernel;
use crate::carnot::CarnotGroup;
use crate::error::Result;

/// Candidate sandwich constants, tried in order.
pub const C_GRID: [f64; 14] = [
    1.0, 1.5, 2.0, 3.0, 5.0, 8.0, 13.0, 21.0, 34.0, 55.0, 89.0, 144.0, 233.0, 377.0,
];

/// `(c^{-1} t^{-Q/2} exp(-c h^2 / t), c t^{-Q/2} exp(-h^2 / (c t)))`.
pub fn gaussian_sandwich(t: f64, h: f64, c: f64, big_q: f64) -> (f64, f64) {
    let base = t.powf(-big_q / 2.0);
    (
        base * (-c * h * h / t).exp() / c,
        base * c * (-h * h / (c * t)).exp(),
    )
}

/// Constants in the Gaussian bounds and in the tail bound
/// `gamma(tau, G(x, y, u)) <= beta nu(u)^{-Q}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelConstants {
    pub gauss_c: Option<f64>,
    pub beta: f64,
}

impl KernelConstants {
    pub fn fit(kernel: &GroupHeatKernel) -> Result<Self> {
        let group = kernel.group();
        let norms = group.norms();
        let mut samples = Vec::new();
        for (t, g) in validation_points(group) {
            samples.push((t, norms.h(&g), kernel.gamma(t, &g)?));
        }
        Ok(Self {
            gauss_c: fit_gauss_c(&samples, kernel.big_q(), &C_GRID),
            beta: fit_beta(kernel)?,
        })
    }
}

impl GroupHeatKernel {
    /// Gaussian bounds at `(t, g)` with the homogeneous norm `h`.
    pub fn sandwich(&self, t: f64, g: &[f64], c: f64) -> (f64, f64) {
        gaussian_sandwich(t, self.group().norms().h(g), c, self.big_q())
    }
}

/// Grid of `(t, g)` in split coordinates: each coordinate on five
/// dilation-scaled levels, `t` in `{1/2, 1, 2}`.
pub fn validation_points(group: &CarnotGroup) -> Vec<(f64, Vec<f64>)> {
    let w = group.weights().as_f64();
    let levels = [-1.5, -0.75, 0.0, 0.75, 1.5];
    let mut out = Vec::new();
    for &t in &[0.5f64, 1.0, 2.0] {
        let total = levels.len().pow(w.len() as u32);
        for code in 0..total {
            let mut c = code;
            let g: Vec<f64> = w
                .iter()
                .map(|s| {
                    let v = levels[c % levels.len()];
                    c /= levels.len();
                    v * t.powf(s / 2.0)
                })
                .collect();
            out.push((t, g));
        }
    }
    out
}

/// Smallest `c` on the grid with both bounds holding at every `(t, h, value)`.
pub fn fit_gauss_c(samples: &[(f64, f64, f64)], big_q: f64, grid: &[f64]) -> Option<f64> {
    grid.iter().copied().find(|&c| {
        samples.iter().all(|&(t, h, v)| {
            let (lo, hi) = gaussian_sandwich(t, h, c, big_q);
            lo <= v && v <= hi
        })
    })
}

/// `1.25 * max gamma(tau, G(x, y, u)) nu(u)^Q` over a sample of times, base
/// points and fibre points.
pub fn fit_beta(kernel: &GroupHeatKernel) -> Result<f64> {
    let group = kernel.group();
    let p = group.p();
    let norms = group.norms();
    let q = kernel.big_q();
    let wx = group.weights_x().as_f64();
    let wxi = group.weights_xi().as_f64();
    let mut best: f64 = 0.0;
    for &tau in &[0.1, 0.5, 1.0, 3.0, 10.0] {
        for &(sx, sy) in &[(0.0, 0.0), (0.0, 1.0), (1.0, -0.5), (-1.0, 1.0)] {
            let x: Vec<f64> = wx.iter().map(|_| sx).collect();
            let y: Vec<f64> = wx.iter().map(|_| sy).collect();
            for &r in &[0.25f64, 0.5, 1.0, 2.0, 4.0, 8.0] {
                for dir in 0..(1usize << p) {
                    let u: Vec<f64> = wxi
                        .iter()
                        .enumerate()
                        .map(|(k, s)| if (dir >> k) & 1 == 1 { -1.0 } else { 1.0 } * r.powf(*s))
                        .collect();
                    let mut point = x.clone();
                    point.extend_from_slice(&y);
                    point.extend_from_slice(&u);
                    let g = group.numerics().straightened.eval(&point);
                    let v = kernel.gamma(tau, &g)?;
                    best = best.max(v * norms.nu(&u).powf(q));
                }
            }
        }
    }
    Ok(1.25 * best)
}
