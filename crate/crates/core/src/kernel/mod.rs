//! Heat kernel `gamma(t, g)` of `sum Z_j^2 - d/dt` on a lifted group, its
//! Gaussian bounds, and a numerical self-test of its defining properties.

mod bounds;
mod diffop;
mod selftest;
mod step2;
mod tabulated;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use bounds::{
    fit_beta, fit_gauss_c, gaussian_sandwich, validation_points, KernelConstants, C_GRID,
};
pub use diffop::{CompiledDiffOp, PolyDiffOp};
pub use selftest::{kernel_selftest, PropertyResult, SelftestConfig, SelftestReport};
pub use step2::{Step2Kernel, Step2Plan};
pub use tabulated::TabulatedKernel;

use crate::carnot::{CarnotGroup, KernelAvailability};
use crate::error::{Error, Result};
use crate::polyalg::Interval;

/// Euclidean heat kernel `(4 pi t)^{-n/2} exp(-|x|^2 / 4t)`, zero for `t <= 0`.
pub fn gamma_abelian(t: f64, x: &[f64]) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let r2: f64 = x.iter().map(|v| v * v).sum();
    (4.0 * PI * t).powf(-(x.len() as f64) / 2.0) * (-r2 / (4.0 * t)).exp()
}

/// User-supplied kernel in split coordinates.
pub trait ExternalKernel: Send + Sync + fmt::Debug {
    fn eval(&self, t: f64, g: &[f64]) -> f64;

    /// Half-widths of a box in split coordinates outside which the kernel is
    /// negligible at time `t`, if known.
    fn envelope(&self, t: f64) -> Option<Vec<f64>> {
        let _ = t;
        None
    }
}

#[derive(Clone, Debug)]
pub enum KernelFamily {
    Abelian,
    Step2(Arc<Step2Kernel>),
    External(Arc<dyn ExternalKernel>),
}

impl KernelFamily {
    pub fn name(&self) -> &'static str {
        match self {
            KernelFamily::Abelian => "abelian",
            KernelFamily::Step2(_) => "step2",
            KernelFamily::External(_) => "external",
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    /// Relative tolerance of a single evaluation.
    pub rel_tol: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-10 }
    }
}

/// `gamma(t, g)` with `g` in the split coordinates of the group.
#[derive(Clone, Debug)]
pub struct GroupHeatKernel {
    group: Arc<CarnotGroup>,
    family: KernelFamily,
    config: KernelConfig,
    scale: f64,
    constants: Option<KernelConstants>,
}

impl GroupHeatKernel {
    pub fn new(group: Arc<CarnotGroup>, config: KernelConfig) -> Result<Self> {
        let family = match group.kernel_family() {
            KernelAvailability::Abelian => KernelFamily::Abelian,
            KernelAvailability::Step2 => KernelFamily::Step2(Arc::new(Step2Kernel::new(group.algebra())?)),
            KernelAvailability::Unavailable(why) => return Err(Error::Unsupported(why)),
        };
        Ok(Self {
            group,
            family,
            config,
            scale: 1.0,
            constants: None,
        })
    }

    pub fn external(group: Arc<CarnotGroup>, kernel: Arc<dyn ExternalKernel>, config: KernelConfig) -> Self {
        Self {
            group,
            family: KernelFamily::External(kernel),
            config,
            scale: 1.0,
            constants: None,
        }
    }

    /// The same kernel multiplied by a constant.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            scale: self.scale * factor,
            ..self.clone()
        }
    }

    pub fn with_config(&self, config: KernelConfig) -> Self {
        Self {
            config,
            ..self.clone()
        }
    }

    pub fn with_constants(mut self, constants: KernelConstants) -> Self {
        self.constants = Some(constants);
        self
    }

    pub fn group(&self) -> &Arc<CarnotGroup> {
        &self.group
    }

    pub fn family(&self) -> &KernelFamily {
        &self.family
    }

    pub fn config(&self) -> &KernelConfig {
        &self.config
    }

    pub fn constants(&self) -> Option<&KernelConstants> {
        self.constants.as_ref()
    }

    pub fn big_q(&self) -> f64 {
        self.group.big_q_f64()
    }

    /// Density in exponential coordinates of the Lie algebra basis.
    pub fn gamma_exp(&self, t: f64, a: &[f64]) -> Result<f64> {
        self.check_dim(a)?;
        if t <= 0.0 {
            return Ok(0.0);
        }
        let v = match &self.family {
            KernelFamily::Abelian => gamma_abelian(t, a),
            KernelFamily::Step2(k) => k.eval(t, a, self.config.rel_tol)?,
            KernelFamily::External(k) => {
                k.eval(t, &self.group.from_exp(a)) * self.group.abs_det_dtheta_f64()
            }
        };
        Ok(self.scale * v)
    }

    /// `gamma(t, g)`, zero for `t <= 0`.
    pub fn gamma(&self, t: f64, g: &[f64]) -> Result<f64> {
        self.check_dim(g)?;
        if t <= 0.0 {
            return Ok(0.0);
        }
        match &self.family {
            KernelFamily::External(k) => Ok(self.scale * k.eval(t, g)),
            _ => Ok(self.gamma_exp(t, &self.group.to_exp(g))? / self.group.abs_det_dtheta_f64()),
        }
    }

    /// An evaluator that reuses the quadrature rule chosen at `(t, g)`, so
    /// that nearby evaluations vary smoothly (for finite differences).
    pub fn local(&self, t: f64, g: &[f64]) -> Result<LocalKernel<'_>> {
        self.check_dim(g)?;
        let plan = match &self.family {
            KernelFamily::Step2(k) if t > 0.0 => {
                Some(k.plan(t, &self.group.to_exp(g), self.config.rel_tol)?)
            }
            _ => None,
        };
        Ok(LocalKernel { kernel: self, plan })
    }

    /// Half-widths of a box in exponential coordinates carrying all but a
    /// `tol` fraction of the peak, when the family provides one.
    pub fn envelope_exp(&self, t: f64, tol: f64) -> Option<Vec<f64>> {
        match &self.family {
            KernelFamily::Abelian => {
                let r = 2.0 * (t * (1.0 / tol).ln().max(1.0)).sqrt() * 1.1;
                Some(vec![r; self.group.dim()])
            }
            KernelFamily::Step2(k) => Some(k.envelope(t, tol)),
            KernelFamily::External(_) => None,
        }
    }

    /// Half-widths of the envelope box in split coordinates: the interval
    /// image of [`Self::envelope_exp`] under `Theta`.
    pub fn envelope_split(&self, t: f64, tol: f64) -> Option<Vec<f64>> {
        match &self.family {
            KernelFamily::External(k) => k.envelope(t),
            _ => {
                let half = self.envelope_exp(t, tol)?;
                let boxed: Vec<Interval> = half.iter().map(|r| Interval::symmetric(*r)).collect();
                Some(
                    self.group
                        .numerics()
                        .theta
                        .eval_interval(&boxed)
                        .iter()
                        .map(|i| i.mag())
                        .collect(),
                )
            }
        }
    }

    /// `gamma(t, 0)`.
    pub fn peak(&self, t: f64) -> Result<f64> {
        self.gamma(t, &vec![0.0; self.group.dim()])
    }

    fn check_dim(&self, g: &[f64]) -> Result<()> {
        if g.len() != self.group.dim() {
            return Err(Error::Dimension(format!(
                "kernel point has {} coordinates, group dimension is {}",
                g.len(),
                self.group.dim()
            )));
        }
        Ok(())
    }
}

/// See [`GroupHeatKernel::local`].
pub struct LocalKernel<'a> {
    kernel: &'a GroupHeatKernel,
    plan: Option<Step2Plan>,
}

impl LocalKernel<'_> {
    pub fn eval(&self, t: f64, g: &[f64]) -> Result<f64> {
        match (&self.kernel.family, &self.plan) {
            (KernelFamily::Step2(k), Some(plan)) => {
                if t <= 0.0 {
                    return Ok(0.0);
                }
                let group = &self.kernel.group;
                Ok(self.kernel.scale * k.eval_with(t, &group.to_exp(g), plan) / group.abs_det_dtheta_f64())
            }
            _ => self.kernel.gamma(t, g),
        }
    }
}
