use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{PolyError, Rational};

/// Exponents of an anisotropic dilation `x_i -> lambda^{sigma_i} x_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct DilationWeights {
    sigma: Vec<Rational>,
}

impl DilationWeights {
    /// Weights of a dilation acting on the base space: `1 = sigma_1 <= ... <= sigma_n`.
    pub fn new(sigma: Vec<Rational>) -> Result<Self, PolyError> {
        if sigma.is_empty() {
            return Err(PolyError::InvalidWeights("empty weight list".into()));
        }
        if !sigma[0].is_one() {
            return Err(PolyError::InvalidWeights(format!(
                "first weight must be 1, found {}",
                sigma[0]
            )));
        }
        if let Some(w) = sigma.windows(2).find(|w| w[1] < w[0]) {
            return Err(PolyError::InvalidWeights(format!(
                "weights must be non-decreasing ({} > {})",
                w[0], w[1]
            )));
        }
        Ok(Self { sigma })
    }

    /// Weights of a product space (for example `R^n_x x R^p_xi`), where the
    /// ordering constraint does not apply. All weights must be positive.
    pub fn graded(sigma: Vec<Rational>) -> Result<Self, PolyError> {
        if let Some(w) = sigma.iter().find(|w| **w <= Rational::zero()) {
            return Err(PolyError::InvalidWeights(format!(
                "weights must be positive, found {w}"
            )));
        }
        Ok(Self { sigma })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            sigma: vec![Rational::one(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    pub fn sigma(&self) -> &[Rational] {
        &self.sigma
    }

    pub fn get(&self, i: usize) -> &Rational {
        &self.sigma[i]
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.sigma.iter().map(|s| s.to_f64().unwrap()).collect()
    }

    /// `sum_i sigma_i`, the homogeneous dimension.
    pub fn homogeneous_dimension(&self) -> Rational {
        self.sigma.iter().fold(Rational::zero(), |acc, s| acc + s)
    }

    pub fn monomial_degree(&self, exponents: &[u32]) -> Rational {
        self.sigma
            .iter()
            .zip(exponents)
            .filter(|(_, &k)| k > 0)
            .fold(Rational::zero(), |acc, (s, &k)| {
                acc + s * Rational::from_integer(k.into())
            })
    }

    pub fn all_integer(&self) -> bool {
        self.sigma.iter().all(|s| s.is_integer())
    }

    /// Concatenation, e.g. `(sigma, sigma*)` for the lifted space.
    pub fn concat(&self, other: &DilationWeights) -> DilationWeights {
        let mut sigma = self.sigma.clone();
        sigma.extend(other.sigma.iter().cloned());
        DilationWeights { sigma }
    }

    /// Applies `delta_lambda` to a point.
    pub fn dilate(&self, lambda: f64, point: &[f64]) -> Vec<f64> {
        self.as_f64()
            .iter()
            .zip(point)
            .map(|(s, x)| lambda.powf(*s) * x)
            .collect()
    }
}

impl TryFrom<Vec<String>> for DilationWeights {
    type Error = PolyError;
    fn try_from(v: Vec<String>) -> Result<Self, PolyError> {
        let sigma = v
            .iter()
            .map(|s| super::parse::parse_rational(s))
            .collect::<Result<Vec<_>, _>>()?;
        DilationWeights::graded(sigma)
    }
}

impl From<DilationWeights> for Vec<String> {
    fn from(w: DilationWeights) -> Vec<String> {
        w.sigma.iter().map(|s| s.to_string()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::{q, qi};

    #[test]
    fn rejects_bad_orderings() {
        assert!(DilationWeights::new(vec![qi(2), qi(3)]).is_err());
        assert!(DilationWeights::new(vec![qi(1), qi(3), qi(2)]).is_err());
        assert!(DilationWeights::new(vec![qi(1), q(3, 2), qi(2)]).is_ok());
    }

    #[test]
    fn monomial_degree_is_weighted_sum() {
        let w = DilationWeights::new(vec![qi(1), qi(2), qi(3)]).unwrap();
        assert_eq!(w.monomial_degree(&[2, 0, 1]), qi(5));
        assert_eq!(w.homogeneous_dimension(), qi(6));
    }
}
