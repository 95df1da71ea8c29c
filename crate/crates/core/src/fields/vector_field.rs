use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::polyalg::{
    CompiledMap, DilationWeights, Exponents, Homogeneity, Rational, WeightedPolynomial,
};

/// First-order operator `sum_i c_i(x) d/dx_i` with polynomial coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyVectorField {
    components: Vec<WeightedPolynomial>,
    weights: DilationWeights,
}

impl PolyVectorField {
    pub fn new(components: Vec<WeightedPolynomial>, weights: DilationWeights) -> Result<Self> {
        let n = weights.len();
        if components.len() != n {
            return Err(Error::Dimension(format!(
                "{} components for {} weights",
                components.len(),
                n
            )));
        }
        if let Some(c) = components.iter().find(|c| c.num_vars() != n) {
            return Err(Error::Dimension(format!(
                "component over {} variables in R^{}",
                c.num_vars(),
                n
            )));
        }
        Ok(Self {
            components,
            weights,
        })
    }

    pub fn zero(weights: &DilationWeights) -> Self {
        let n = weights.len();
        Self {
            components: vec![WeightedPolynomial::zero(n); n],
            weights: weights.clone(),
        }
    }

    /// The coordinate field `d/dx_i`.
    pub fn coordinate(weights: &DilationWeights, i: usize) -> Self {
        let mut f = Self::zero(weights);
        f.components[i] = WeightedPolynomial::one(weights.len());
        f
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn weights(&self) -> &DilationWeights {
        &self.weights
    }

    pub fn components(&self) -> &[WeightedPolynomial] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &WeightedPolynomial {
        &self.components[i]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.weights != other.weights {
            return Err(Error::Dimension(
                "vector fields live on different graded spaces".into(),
            ));
        }
        Ok(())
    }

    /// `X f = sum_i c_i d_i f`.
    pub fn apply(&self, f: &WeightedPolynomial) -> Result<WeightedPolynomial> {
        let mut out = WeightedPolynomial::zero(self.dim());
        for (i, c) in self.components.iter().enumerate() {
            if c.is_zero() || !f.depends_on(i) {
                continue;
            }
            out = out.try_add(&c.try_mul(&f.partial(i)?)?)?;
        }
        Ok(out)
    }

    /// `[X, Y] = XY - YX`, componentwise `X(c^Y_i) - Y(c^X_i)`.
    pub fn bracket(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(cx, cy)| Ok(self.apply(cy)?.try_sub(&other.apply(cx)?)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            components,
            weights: self.weights.clone(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.try_add(b))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Self {
            components,
            weights: self.weights.clone(),
        })
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self {
            components: self.components.iter().map(|p| p.scale(c)).collect(),
            weights: self.weights.clone(),
        }
    }

    /// Weighted degree `d` of the operator: component `i` has degree `sigma_i - d`.
    pub fn degree(&self) -> Result<Option<Rational>> {
        let mut found: Option<Rational> = None;
        for (i, c) in self.components.iter().enumerate() {
            match c.weighted_degree(&self.weights)? {
                Homogeneity::Zero => {}
                Homogeneity::NotHomogeneous => return Ok(None),
                Homogeneity::Homogeneous(deg) => {
                    let d = self.weights.get(i) - deg;
                    match &found {
                        Some(f) if *f != d => return Ok(None),
                        _ => found = Some(d),
                    }
                }
            }
        }
        Ok(found)
    }

    pub fn is_homogeneous_of_degree(&self, d: &Rational) -> Result<bool> {
        for (i, c) in self.components.iter().enumerate() {
            let need = self.weights.get(i) - d;
            if !c.weighted_degree(&self.weights)?.admits(&need) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn value_at_zero(&self) -> Vec<Rational> {
        self.components.iter().map(|c| c.constant_term()).collect()
    }

    pub fn eval_rational(&self, x: &[Rational]) -> Result<Vec<Rational>> {
        Ok(self
            .components
            .iter()
            .map(|c| c.eval_rational(x))
            .collect::<std::result::Result<Vec<_>, _>>()?)
    }

    pub fn compile(&self) -> CompiledMap {
        CompiledMap::new(&self.components)
    }

    /// Coordinates of the field as a sparse vector keyed by `(slot, monomial)`.
    pub fn as_sparse(&self) -> BTreeMap<(usize, Exponents), Rational> {
        let mut out = BTreeMap::new();
        for (i, c) in self.components.iter().enumerate() {
            for (e, v) in c.terms() {
                if !v.is_zero() {
                    out.insert((i, e.clone()), v.clone());
                }
            }
        }
        out
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.components
            .iter()
            .map(|c| c.to_canonical_string(Some(&self.weights)))
            .collect()
    }
}

impl fmt::Display for PolyVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.components.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            if c.num_terms() == 1 && c.constant_term() == Rational::from_integer(1.into()) {
                write!(f, "d{}", i + 1)?;
            } else {
                write!(f, "({})d{}", c.to_canonical_string(Some(&self.weights)), i + 1)?;
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}
