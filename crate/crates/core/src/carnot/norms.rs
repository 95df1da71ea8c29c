use crate::polyalg::DilationWeights;

/// Canonical homogeneous norms `S(x)`, `nu(xi)` and `h = S + nu`.
#[derive(Clone, Debug)]
pub struct HomogeneousNorms {
    inv_sigma_x: Vec<f64>,
    inv_sigma_xi: Vec<f64>,
}

impl HomogeneousNorms {
    pub fn new(weights_x: &DilationWeights, weights_xi: &DilationWeights) -> Self {
        Self {
            inv_sigma_x: weights_x.as_f64().iter().map(|s| 1.0 / s).collect(),
            inv_sigma_xi: weights_xi.as_f64().iter().map(|s| 1.0 / s).collect(),
        }
    }

    fn gauge(inv: &[f64], v: &[f64]) -> f64 {
        inv.iter().zip(v).map(|(e, x)| x.abs().powf(*e)).sum()
    }

    pub fn s(&self, x: &[f64]) -> f64 {
        Self::gauge(&self.inv_sigma_x, x)
    }

    pub fn nu(&self, xi: &[f64]) -> f64 {
        Self::gauge(&self.inv_sigma_xi, xi)
    }

    pub fn h(&self, g: &[f64]) -> f64 {
        let n = self.inv_sigma_x.len();
        self.s(&g[..n]) + self.nu(&g[n..])
    }
}
