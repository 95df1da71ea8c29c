use serde::{Deserialize, Serialize};

use super::SaturatedKernel;
use crate::carnot::{maps, CarnotGroup};
use crate::error::{Error, Result};
use crate::fdiff::Estimate;
use crate::fields::PolyVectorField;
use crate::kernel::PolyDiffOp;
use crate::polyalg::WeightedPolynomial;

/// `d_s^alpha d_t^beta X^x_{j_1}..X^x_{j_k} X^y_{i_1}..X^y_{i_h} Gamma(t, x; s, y)`.
/// Word letters are 1-based generator indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DerivativeSpec {
    pub alpha: u32,
    pub beta: u32,
    pub y_word: Vec<usize>,
    pub x_word: Vec<usize>,
}

/// Where the lifted operator is evaluated along the fibre.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WordPlacement {
    /// At `(x, 0)^{-1} * (y, eta)`.
    Y,
    /// At `(y, 0)^{-1} * (x, eta)`.
    X,
    /// At the inverse of `(y, 0)^{-1} * (x, eta)`.
    Mixed,
}

impl DerivativeSpec {
    /// Parses `alpha=1,beta=0,y=1.2,x=1` (any subset, words dot-separated).
    pub fn parse(text: &str) -> Result<Self> {
        let mut spec = Self::default();
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("derivative spec item '{part}' is not key=value")))?;
            let number = |v: &str| -> Result<usize> {
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidInput(format!("'{v}' is not a nonnegative integer")))
            };
            let word = |v: &str| -> Result<Vec<usize>> {
                v.split('.').filter(|w| !w.trim().is_empty()).map(number).collect()
            };
            match key.trim() {
                "alpha" => spec.alpha = number(value)? as u32,
                "beta" => spec.beta = number(value)? as u32,
                "y" => spec.y_word = word(value)?,
                "x" => spec.x_word = word(value)?,
                other => return Err(Error::InvalidInput(format!("unknown derivative key '{other}'"))),
            }
        }
        Ok(spec)
    }

    pub fn placement(&self) -> WordPlacement {
        match (self.x_word.is_empty(), self.y_word.is_empty()) {
            (false, false) => WordPlacement::Mixed,
            (false, true) => WordPlacement::X,
            _ => WordPlacement::Y,
        }
    }

    pub fn time_order(&self) -> u32 {
        self.alpha + self.beta
    }

    fn validate(&self, m: usize) -> Result<()> {
        for &i in self.y_word.iter().chain(&self.x_word) {
            if i == 0 || i > m {
                return Err(Error::InvalidInput(format!("word letter {i} outside 1..={m}")));
            }
        }
        if self.time_order() > 4 {
            return Err(Error::InvalidInput("at most four time derivatives".into()));
        }
        Ok(())
    }
}

/// `iota_* Z` for the group inversion `iota(g) = g^{-1}`:
/// `(iota_* Z)(g) = D iota(g^{-1}) Z(g^{-1})`, so that
/// `Z (f o iota) = ((iota_* Z) f) o iota`.
pub fn inverse_pushforward(group: &CarnotGroup, z: &PolyVectorField) -> Result<PolyVectorField> {
    let inv = group.inverse();
    let jac = maps::jacobian(inv)?;
    let big_n = group.dim();
    let mut comps = Vec::with_capacity(big_n);
    for row in &jac {
        let mut acc = WeightedPolynomial::zero(big_n);
        for (d, c) in row.iter().zip(z.components()) {
            if !d.is_zero() && !c.is_zero() {
                acc = acc.try_add(&d.try_mul(c)?)?;
            }
        }
        comps.push(acc.compose(inv)?);
    }
    PolyVectorField::new(comps, group.weights().clone())
}

impl SaturatedKernel {
    /// The lifted operator acting on `gamma` for a derivative spec:
    /// `Z_{i_1}..Z_{i_h}` for `y`-words, `Z_{j_1}..Z_{j_k}` for `x`-words and
    /// `W_{j_1}..W_{j_k} Z_{i_1}..Z_{i_h}` with `W = iota_* Z` when mixed.
    pub fn derivative_operator(&self, spec: &DerivativeSpec) -> Result<(PolyDiffOp, WordPlacement)> {
        let group = self.group();
        let z = group.z_fields();
        spec.validate(z.len())?;
        let zero_based = |w: &[usize]| w.iter().map(|i| i - 1).collect::<Vec<_>>();
        let placement = spec.placement();
        let op = match placement {
            WordPlacement::Y => PolyDiffOp::word(z, &zero_based(&spec.y_word))?,
            WordPlacement::X => PolyDiffOp::word(z, &zero_based(&spec.x_word))?,
            WordPlacement::Mixed => {
                let mut op = PolyDiffOp::word(z, &zero_based(&spec.y_word))?;
                for &j in spec.x_word.iter().rev() {
                    op = op.after_field(&inverse_pushforward(group, &z[j - 1])?)?;
                }
                op
            }
        };
        Ok((op, placement))
    }

    /// Derivative of `Gamma` by integrating derivatives of the lifted kernel
    /// over the fibre. The error combines the quadrature estimate with the
    /// mean relative finite-difference error.
    pub fn gamma_derivative(&self, spec: &DerivativeSpec, t: f64, x: &[f64], s: f64, y: &[f64]) -> Result<Estimate> {
        self.check(x, y)?;
        if s == t && x == y {
            return Err(Error::Domain(format!("pole: (t, x) = (s, y) = ({t}, {x:?})")));
        }
        let (op, placement) = self.derivative_operator(spec)?;
        if s <= t {
            return Ok(Estimate { value: 0.0, error: 0.0 });
        }
        let tau = s - t;
        let op = op.compile();
        let group = self.group();
        let (first, second) = match placement {
            WordPlacement::Y => (x, y),
            _ => (y, x),
        };
        let mut arg: Vec<f64> = first.iter().chain(second).copied().collect();
        arg.extend(std::iter::repeat(0.0).take(group.p()));
        let off = 2 * group.n();
        let sign = if spec.beta % 2 == 0 { 1.0 } else { -1.0 };
        // Roundoff grows like h^{-k} for total order k, so high orders use wider stencils.
        let order = spec.time_order() as usize + spec.x_word.len() + spec.y_word.len();
        let step = self.config.fd_step * 2f64.powf(order.saturating_sub(2) as f64 / 2.0);
        let (mut fd_err, mut fd_abs) = (0.0, 0.0);
        // Derivatives of the kernel change sign along the fibre, and the
        // finite-difference noise scales with the integrand, not the integral.
        let tol = self.config.derivative_rel_tol.max(self.config.rel_tol);
        let res = self.integrate_fibre(tau, tol, tol, |u| {
            arg[off..].copy_from_slice(u);
            let mut g = group.numerics().straightened.eval(&arg);
            if placement == WordPlacement::Mixed {
                g = group.inv(&g);
            }
            let e = self.kernel.differentiate(
                &op,
                spec.time_order(),
                tau,
                &g,
                step,
                self.config.fd_levels,
            )?;
            fd_err += e.error;
            fd_abs += e.value.abs();
            Ok(sign * e.value)
        })?;
        let rel_fd = if fd_abs > 0.0 { fd_err / fd_abs } else { 0.0 };
        Ok(Estimate {
            value: res.value,
            error: res.error + rel_fd * res.value.abs(),
        })
    }
}
