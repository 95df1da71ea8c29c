//! Bounded solutions of the Cauchy problem, the potential `Lambda_phi`, and the
//! reproduction identity.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{adaptive, product_rule, AdaptiveConfig, QuadResult};
use crate::saturation::SaturatedKernel;

type Datum = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A continuous initial datum with a declared bound on `|phi|`. Every
/// evaluation made by a solver is checked against the bound.
#[derive(Clone)]
pub struct BoundedInitialDatum {
    pub name: String,
    pub bound: f64,
    phi: Datum,
}

impl fmt::Debug for BoundedInitialDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundedInitialDatum")
            .field("name", &self.name)
            .field("bound", &self.bound)
            .finish()
    }
}

impl BoundedInitialDatum {
    pub fn new(name: &str, bound: f64, phi: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.to_string(),
            bound,
            phi: Arc::new(phi),
        }
    }

    /// `one`, `zero` or `gauss` (`exp(-|y|^2)`).
    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "one" => Ok(Self::new(name, 1.0, |_| 1.0)),
            "zero" => Ok(Self::new(name, 0.0, |_| 0.0)),
            "gauss" => Ok(Self::new(name, 1.0, |y| (-y.iter().map(|v| v * v).sum::<f64>()).exp())),
            other => Err(Error::InvalidInput(format!("unknown datum '{other}' (one, zero, gauss)"))),
        }
    }

    pub fn tabulated(grid: TabulatedDatum) -> Result<Self> {
        grid.validate()?;
        let bound = grid.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(Self::new("tabulated", bound, move |y| grid.eval(y)))
    }

    /// `phi(y)`, or an error if the declared bound is exceeded.
    pub fn eval(&self, y: &[f64]) -> Result<f64> {
        let v = (self.phi)(y);
        if !v.is_finite() || v.abs() > self.bound * (1.0 + 1e-12) {
            return Err(Error::InvalidInput(format!(
                "datum '{}' takes {v} at {y:?}, beyond its bound {}",
                self.name, self.bound
            )));
        }
        Ok(v)
    }
}

/// Values on a regular grid, interpolated multilinearly and extended by the
/// nearest boundary value.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabulatedDatum {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub counts: Vec<usize>,
    /// Row-major, last axis fastest.
    pub values: Vec<f64>,
}

impl TabulatedDatum {
    fn validate(&self) -> Result<()> {
        let n = self.lo.len();
        let total: usize = self.counts.iter().product();
        if self.hi.len() != n || self.counts.len() != n || self.values.len() != total {
            return Err(Error::Dimension("tabulated datum shape".into()));
        }
        if self.counts.iter().any(|&c| c < 2) || (0..n).any(|k| self.hi[k] <= self.lo[k]) {
            return Err(Error::InvalidInput("tabulated datum needs two nodes per axis".into()));
        }
        Ok(())
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        let n = self.lo.len();
        let mut base = 0usize;
        let mut frac = vec![0.0; n];
        let mut strides = vec![1usize; n];
        for k in (0..n.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.counts[k + 1];
        }
        for k in 0..n {
            let cells = (self.counts[k] - 1) as f64;
            let r = ((y[k] - self.lo[k]) / (self.hi[k] - self.lo[k]) * cells).clamp(0.0, cells);
            let i = (r.floor() as usize).min(self.counts[k] - 2);
            frac[k] = r - i as f64;
            base += i * strides[k];
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            let mut idx = base;
            for k in 0..n {
                if corner >> k & 1 == 1 {
                    w *= frac[k];
                    idx += strides[k];
                } else {
                    w *= 1.0 - frac[k];
                }
            }
            if w != 0.0 {
                acc += w * self.values[idx];
            }
        }
        acc
    }
}

/// `u(t, x) = int Gamma(0, y; t, x) phi(y) dy`, computed as
/// `int Gamma(0, x; t, y) phi(y) dy` over the grid of
/// [`SaturatedKernel::y_grid`].
pub fn solve_cauchy(k: &SaturatedKernel, phi: &BoundedInitialDatum, t: f64, x: &[f64]) -> Result<QuadResult> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("Cauchy solution needs t > 0, got {t}")));
    }
    if x.len() != k.n() {
        return Err(Error::Dimension(format!("point of length {} in R^{}", x.len(), k.n())));
    }
    let grid = k.y_grid(x, t);
    product_rule(&grid.axes, |y| {
        let f = phi.eval(y)?;
        if f == 0.0 {
            return Ok(0.0);
        }
        Ok(k.gamma_sat(0.0, x, t, y)? * f)
    })
}

/// `Lambda_phi(s, y) = int Gamma(t, x; s, y) phi(t, x) dt dx` for `phi`
/// vanishing outside the box `lo..hi` in `R^{1+n}` (time first).
///
/// With `tau = s - t = v^2` the inner integral is
/// `int Gamma(0, y; tau, x) phi(s - tau, x) dx`, bounded as `tau -> 0`, so the
/// outer integral over `v` is adaptive. The inner one runs over the support
/// clipped to the box of [`SaturatedKernel::y_grid`] centred at `y`, so nodes
/// never straddle the edge of the support.
pub fn potential_lambda<F>(k: &SaturatedKernel, phi: F, lo: &[f64], hi: &[f64], zeta: &[f64], rel_tol: f64) -> Result<QuadResult>
where
    F: Fn(f64, &[f64]) -> f64,
{
    let n = k.n();
    if lo.len() != n + 1 || hi.len() != n + 1 || zeta.len() != n + 1 {
        return Err(Error::Dimension(format!("support box and point live in R^{}", n + 1)));
    }
    if lo.iter().chain(hi).any(|v| !v.is_finite()) || (0..=n).any(|i| hi[i] < lo[i]) {
        return Err(Error::InvalidInput("support box must be bounded and nonempty".into()));
    }
    let (s, y) = (zeta[0], &zeta[1..]);
    let t_hi = hi[0].min(s);
    if t_hi <= lo[0] {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let (v_lo, v_hi) = ((s - t_hi).sqrt(), (s - lo[0]).sqrt());
    let cfg = AdaptiveConfig {
        max_intervals: 200,
        ..AdaptiveConfig::with_tol(rel_tol, 0.0)
    };
    let mut failure = None;
    let mut evals = 0;
    let res = adaptive(v_lo, v_hi, &cfg, |v| {
        let tau = v * v;
        let t = s - tau;
        if tau == 0.0 {
            return 0.0;
        }
        let reach = k.y_grid(y, tau);
        let a: Vec<f64> = (0..n).map(|i| lo[i + 1].max(reach.lo[i])).collect();
        let b: Vec<f64> = (0..n).map(|i| hi[i + 1].min(reach.hi[i])).collect();
        if (0..n).any(|i| b[i] <= a[i]) {
            return 0.0;
        }
        let grid = k.grid_over(a, b, tau);
        let inner = product_rule(&grid.axes, |x| {
            let f = phi(t, x);
            if f == 0.0 {
                return Ok(0.0);
            }
            evals += 1;
            Ok(k.gamma_sat(0.0, y, tau, x)? * f)
        });
        match inner {
            Ok(r) => 2.0 * v * r.value,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(QuadResult {
        evaluations: evals,
        ..res?
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reproduction {
    /// `Gamma(0, y; t + s, x)`.
    pub lhs: f64,
    /// `int Gamma(0, w; t, x) Gamma(0, y; s, w) dw`.
    pub rhs: f64,
}

impl Reproduction {
    pub fn rel_diff(&self) -> f64 {
        (self.lhs - self.rhs).abs() / self.lhs.abs()
    }
}

/// Both sides of the reproduction identity. The `w`-integral runs over the
/// union of the boxes of both factors, at the finer of their resolutions.
pub fn reproduction_check(k: &SaturatedKernel, x: &[f64], y: &[f64], s: f64, t: f64) -> Result<Reproduction> {
    if !(s > 0.0 && t > 0.0) {
        return Err(Error::Domain(format!("reproduction needs s, t > 0, got {s}, {t}")));
    }
    let lhs = k.gamma_sat(0.0, y, t + s, x)?;
    let (a, b) = (k.y_grid(x, t), k.y_grid(y, s));
    let lo: Vec<f64> = a.lo.iter().zip(&b.lo).map(|(p, q)| p.min(*q)).collect();
    let hi: Vec<f64> = a.hi.iter().zip(&b.hi).map(|(p, q)| p.max(*q)).collect();
    let grid = k.grid_over(lo, hi, t.min(s));
    let rhs = product_rule(&grid.axes, |w| {
        Ok(k.gamma_sat(0.0, x, t, w)? * k.gamma_sat(0.0, y, s, w)?)
    })?
    .value;
    Ok(Reproduction { lhs, rhs })
}
