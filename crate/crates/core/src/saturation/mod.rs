//! Global heat kernel `Gamma(t, x; s, y)` of `sum X_j^2 - d/dt` on `R^n`,
//! obtained by integrating the lifted kernel over the added variables.

mod derivative;
mod sandwich;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use derivative::{inverse_pushforward, DerivativeSpec, WordPlacement};
pub use sandwich::{gamma_validation_points, SandwichFit};

use crate::carnot::CarnotGroup;
use crate::error::{Error, Result};
use crate::kernel::GroupHeatKernel;
use crate::quad::{adaptive, adaptive_box, composite_nodes, product_rule, AdaptiveConfig, QuadResult};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SaturationConfig {
    /// Relative tolerance of the fibre integral.
    pub rel_tol: f64,
    /// Values below `abs_floor * tau^{-q/2}` are only resolved to
    /// `rel_tol` times that level.
    pub abs_floor: f64,
    pub max_intervals: usize,
    /// Integrand level, relative to the kernel peak, below which the fibre
    /// is truncated.
    pub tail_tol: f64,
    /// Finite-difference step for derivatives of the lifted kernel, in units
    /// of the natural scale at the evaluation time.
    pub fd_step: f64,
    pub fd_levels: usize,
    /// Relative tolerance of fibre integrals of derivatives, whose
    /// integrands carry finite-difference roundoff.
    pub derivative_rel_tol: f64,
}

impl Default for SaturationConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            abs_floor: 1e-6,
            max_intervals: 4000,
            tail_tol: 1e-14,
            fd_step: 1e-2,
            fd_levels: 3,
            derivative_rel_tol: 1e-5,
        }
    }
}

/// Box and per-axis nodes of a tensor rule in `y`.
#[derive(Clone, Debug)]
pub struct YGrid {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub axes: Vec<Vec<(f64, f64)>>,
}

impl YGrid {
    pub fn len(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `Gamma(t, x; s, y) = int gamma(s - t, (x, 0)^{-1} * (y, eta)) d eta`.
#[derive(Clone, Debug)]
pub struct SaturatedKernel {
    kernel: GroupHeatKernel,
    config: SaturationConfig,
}

/// `Vol{nu <= 1}` for the gauge `nu(u) = sum |u_k|^{1 / sigma_k}` with integer weights.
fn unit_gauge_volume(sigma: &[f64]) -> f64 {
    let fact = |k: f64| (1..=k.round() as u64).map(|i| i as f64).product::<f64>();
    let q_star: f64 = sigma.iter().sum();
    2f64.powi(sigma.len() as i32) * sigma.iter().map(|s| fact(*s)).product::<f64>() / fact(q_star)
}

impl SaturatedKernel {
    pub fn new(kernel: GroupHeatKernel, config: SaturationConfig) -> Self {
        Self { kernel, config }
    }

    pub fn with_config(&self, config: SaturationConfig) -> Self {
        Self {
            kernel: self.kernel.clone(),
            config,
        }
    }

    pub fn kernel(&self) -> &GroupHeatKernel {
        &self.kernel
    }

    pub fn group(&self) -> &Arc<CarnotGroup> {
        self.kernel.group()
    }

    pub fn config(&self) -> &SaturationConfig {
        &self.config
    }

    pub fn n(&self) -> usize {
        self.group().n()
    }

    /// Homogeneous dimension `q = sum_{j <= n} sigma_j` of `R^n`.
    pub fn q(&self) -> f64 {
        self.group().q_f64()
    }

    fn check(&self, x: &[f64], y: &[f64]) -> Result<()> {
        let n = self.n();
        if x.len() != n || y.len() != n {
            return Err(Error::Dimension(format!(
                "points have {} and {} coordinates, expected {n}",
                x.len(),
                y.len()
            )));
        }
        Ok(())
    }

    /// Radius `R` of the gauge ball outside which both the tail bound
    /// `beta nu(u)^{-Q}` and the Gaussian bound integrate below `tol`.
    /// `None` without fitted constants.
    pub fn tail_radius(&self, tau: f64, tol: f64) -> Option<f64> {
        let c = self.kernel.constants()?;
        let group = self.group();
        let sigma = group.weights_xi().as_f64();
        let q_star: f64 = sigma.iter().sum();
        let q = self.q();
        let big_q = self.kernel.big_q();
        let v1 = unit_gauge_volume(&sigma);
        // int_{nu > R} nu^{-Q} du = V1 q* R^{-q} / q
        let r_beta = (c.beta * v1 * q_star / (q * tol)).powf(1.0 / q);
        let r_gauss = c.gauss_c.map(|gc| {
            let tail = |r: f64| {
                let cfg = AdaptiveConfig::with_tol(1e-6, 0.0);
                adaptive(r, r + 40.0 * (gc * tau).sqrt(), &cfg, |v| {
                    gc * tau.powf(-big_q / 2.0) * v1 * q_star * v.powf(q_star - 1.0) * (-v * v / (gc * tau)).exp()
                })
                .map(|res| res.value)
                .unwrap_or(f64::INFINITY)
            };
            let mut r = tau.sqrt();
            while tail(r) > tol && r < 1e6 {
                r *= 1.5;
            }
            r
        });
        Some(r_beta.max(r_gauss.unwrap_or(0.0)))
    }

    /// Half-widths of the box in the straightened fibre variable `u` over
    /// which the integrand can exceed `tail_tol` times the peak at time `tau`.
    pub fn u_box(&self, tau: f64) -> Result<Vec<f64>> {
        let group = self.group();
        let n = group.n();
        let env = self.kernel.envelope_split(tau, self.config.tail_tol).ok_or_else(|| {
            Error::Unsupported("kernel provides no envelope for fibre truncation".into())
        })?;
        let mut half = env[n..].to_vec();
        let scale = tau.powf(-self.q() / 2.0);
        if let Some(r) = self.tail_radius(tau, self.config.tail_tol * scale) {
            for (h, s) in half.iter_mut().zip(group.weights_xi().as_f64()) {
                *h = h.min(r.powf(s));
            }
        }
        Ok(half)
    }

    fn quad_config(&self, tau: f64, rel_tol: f64, l1_tol: f64) -> AdaptiveConfig {
        AdaptiveConfig {
            rel_tol,
            abs_tol: rel_tol * self.config.abs_floor * tau.powf(-self.q() / 2.0),
            max_intervals: self.config.max_intervals,
            initial_panels: 2,
            l1_tol,
        }
    }

    /// `int f(u) du` over the truncated fibre at time `tau`, to `rel_tol`
    /// of the value or `l1_tol` of `int |f|`.
    pub(crate) fn integrate_fibre<F>(&self, tau: f64, rel_tol: f64, l1_tol: f64, mut f: F) -> Result<QuadResult>
    where
        F: FnMut(&[f64]) -> Result<f64>,
    {
        let half = self.u_box(tau)?;
        let lo: Vec<f64> = half.iter().map(|h| -h).collect();
        let cfg = self.quad_config(tau, rel_tol, l1_tol);
        let mut failure = None;
        let mut g = |u: &[f64]| match f(u) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        };
        let res = if half.len() == 1 {
            let mut u = [0.0];
            adaptive(lo[0], half[0], &cfg, |v| {
                u[0] = v;
                g(&u)
            })?
        } else {
            adaptive_box(&lo, &half, &cfg, &mut g)?
        };
        match failure {
            Some(e) => Err(e),
            None => Ok(res),
        }
    }

    /// `Gamma(t, x; s, y)` with its quadrature error estimate.
    pub fn gamma_sat_with_error(&self, t: f64, x: &[f64], s: f64, y: &[f64]) -> Result<QuadResult> {
        self.check(x, y)?;
        if s == t && x == y {
            return Err(Error::Domain(format!("pole: (t, x) = (s, y) = ({t}, {x:?})")));
        }
        if s <= t {
            return Ok(QuadResult {
                value: 0.0,
                error: 0.0,
                evaluations: 0,
            });
        }
        let tau = s - t;
        let group = self.group();
        let mut arg: Vec<f64> = x.iter().chain(y).copied().collect();
        arg.extend(std::iter::repeat(0.0).take(group.p()));
        let off = 2 * group.n();
        let mut g = vec![0.0; group.dim()];
        self.integrate_fibre(tau, self.config.rel_tol, 0.0, |u| {
            arg[off..].copy_from_slice(u);
            group.numerics().straightened.eval_into(&arg, &mut g);
            self.kernel.gamma(tau, &g)
        })
    }

    /// `Gamma(t, x; s, y)`: zero for `s <= t`, a domain error at the pole.
    pub fn gamma_sat(&self, t: f64, x: &[f64], s: f64, y: &[f64]) -> Result<f64> {
        Ok(self.gamma_sat_with_error(t, x, s, y)?.value)
    }

    /// `(Gamma(l^2 t, D_l x; l^2 s, D_l y), l^{-q} Gamma(t, x; s, y))`.
    pub fn homogeneity_probe(&self, lambda: f64, t: f64, x: &[f64], s: f64, y: &[f64]) -> Result<(f64, f64)> {
        let w = self.group().weights_x();
        let l2 = lambda * lambda;
        let lhs = self.gamma_sat(l2 * t, &w.dilate(lambda, x), l2 * s, &w.dilate(lambda, y))?;
        let rhs = lambda.powf(-self.q()) * self.gamma_sat(t, x, s, y)?;
        Ok((lhs, rhs))
    }

    /// Kernel of the adjoint operator: `Gamma*(t, x; s, y) = Gamma(s, y; t, x)`.
    pub fn gamma_star(&self, t: f64, x: &[f64], s: f64, y: &[f64]) -> Result<f64> {
        self.gamma_sat(s, y, t, x)
    }

    /// `Gamma*` from its own lifted representation
    /// `int gamma(t - s, (y, eta)^{-1} * (x, 0)) d eta`, for cross-checks.
    pub fn gamma_star_lifted(&self, t: f64, x: &[f64], s: f64, y: &[f64]) -> Result<f64> {
        self.check(x, y)?;
        if s == t && x == y {
            return Err(Error::Domain(format!("pole: (t, x) = (s, y) = ({t}, {x:?})")));
        }
        if t <= s {
            return Ok(0.0);
        }
        let tau = t - s;
        let group = self.group();
        let mut arg: Vec<f64> = x.iter().chain(y).copied().collect();
        arg.extend(std::iter::repeat(0.0).take(group.p()));
        let off = 2 * group.n();
        Ok(self
            .integrate_fibre(tau, self.config.rel_tol, 0.0, |u| {
                arg[off..].copy_from_slice(u);
                let g = group.numerics().straightened.eval(&arg);
                self.kernel.gamma(tau, &group.inv(&g))
            })?
            .value)
    }

    /// `int Gamma(0, x; s, y) dy` with the rule of [`Self::y_grid`]. The
    /// reported error is not estimated (NaN).
    pub fn mass(&self, x: &[f64], s: f64) -> Result<QuadResult> {
        if s <= 0.0 {
            return Err(Error::Domain(format!("mass needs s > 0, got {s}")));
        }
        let grid = self.y_grid(x, s);
        product_rule(&grid.axes, |y| self.gamma_sat(0.0, x, s, y))
    }

    /// Fixed tensor rule in `y` for densities of the form `Gamma(t, x; t + tau, .)`.
    ///
    /// The box is centred at `x` with half-width `c_k tau^{sigma_k/2} (1 + r)^{sigma_k - 1}`
    /// along axis `k`, where `c_k = 10 + 6 (sigma_k - 1)` and `r` is the
    /// dilation-scaled size of `x`.
    pub fn y_grid(&self, x: &[f64], tau: f64) -> YGrid {
        let sigma = self.group().weights_x().as_f64();
        let r = x
            .iter()
            .zip(&sigma)
            .map(|(v, s)| v.abs().powf(1.0 / s) / tau.sqrt())
            .fold(0.0f64, f64::max);
        let half: Vec<f64> = sigma
            .iter()
            .map(|&sk| (10.0 + 6.0 * (sk - 1.0)) * tau.powf(sk / 2.0) * (1.0 + r).powf(sk - 1.0))
            .collect();
        let lo: Vec<f64> = x.iter().zip(&half).map(|(c, h)| c - h).collect();
        let hi: Vec<f64> = x.iter().zip(&half).map(|(c, h)| c + h).collect();
        self.grid_over(lo, hi, tau)
    }

    /// Tensor rule over a box resolving features of `Gamma` at time scale
    /// `tau`: 12-point panels of width `10 tau^{1/2}` on weight-one axes,
    /// 8-point panels of width `4 tau^{sigma_k/2}` on the others.
    pub fn grid_over(&self, lo: Vec<f64>, hi: Vec<f64>, tau: f64) -> YGrid {
        let sigma = self.group().weights_x().as_f64();
        let axes = sigma
            .iter()
            .enumerate()
            .map(|(k, &sk)| {
                let (width, order) = if sk <= 1.0 { (10.0, 12) } else { (4.0, 8) };
                let panels = ((hi[k] - lo[k]) / (width * tau.powf(sk / 2.0))).ceil().max(1.0) as usize;
                composite_nodes(lo[k], hi[k], panels, order)
            })
            .collect();
        YGrid { lo, hi, axes }
    }

    /// `max_{(t, x) in poles} Gamma(t, x; s, y)` for each target `(s, y)`.
    pub fn vanishing_probe(&self, poles: &[(f64, Vec<f64>)], targets: &[(f64, Vec<f64>)]) -> Result<Vec<f64>> {
        targets
            .iter()
            .map(|(s, y)| {
                poles.iter().try_fold(0.0f64, |m, (t, x)| {
                    Ok(m.max(self.gamma_sat(*t, x, *s, y)?))
                })
            })
            .collect()
    }
}
