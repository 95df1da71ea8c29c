use crate::error::{Error, Result};
use crate::fields::PolyVectorField;
use crate::polyalg::{DilationWeights, Rational, WeightedPolynomial};

/// Exact time-one flow of `sum_i V_i(x, c) d/dx_i` on `R^n`, where the
/// coefficients may depend on `num_params` extra constants `c` (variables
/// `n..n+num_params`). Returns `x(1)` as polynomials in `(x(0), c)`.
///
/// Coordinates are integrated in order of increasing weight; each `V_i` may
/// only involve strictly lighter coordinates, so every step is a quadrature.
pub fn flow_time_one_with_params(
    components: &[WeightedPolynomial],
    weights: &DilationWeights,
    num_params: usize,
) -> Result<Vec<WeightedPolynomial>> {
    let n = weights.len();
    if components.len() != n {
        return Err(Error::Dimension(format!("{} components for R^{n}", components.len())));
    }
    let total = n + num_params;
    let tau = total;
    let ext = total + 1;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| weights.get(a).cmp(weights.get(b)));
    let mut solved: Vec<Option<WeightedPolynomial>> = vec![None; n];
    for &i in &order {
        let v = &components[i];
        if v.num_vars() != total {
            return Err(Error::Dimension(format!(
                "component {} has {} variables, expected {total}",
                i + 1,
                v.num_vars()
            )));
        }
        let mut subs = Vec::with_capacity(total);
        for j in 0..n {
            if v.depends_on(j) {
                if weights.get(j) >= weights.get(i) {
                    return Err(Error::Hypothesis(format!(
                        "flow does not terminate: coefficient of d{} depends on x{}",
                        i + 1,
                        j + 1
                    )));
                }
                subs.push(solved[j].clone().expect("lighter coordinate solved first"));
            } else {
                subs.push(WeightedPolynomial::zero(ext));
            }
        }
        for l in 0..num_params {
            subs.push(WeightedPolynomial::var(ext, n + l));
        }
        let rate = v.compose(&subs)?;
        let xi = WeightedPolynomial::var(ext, i).try_add(&rate.integrate_var(tau))?;
        solved[i] = Some(xi);
    }
    let one = Rational::from_integer(1.into());
    Ok(solved
        .into_iter()
        .map(|p| {
            let p = p.unwrap().substitute_values(&[(tau, one.clone())]);
            drop_last_var(&p)
        })
        .collect())
}

fn drop_last_var(p: &WeightedPolynomial) -> WeightedPolynomial {
    let n = p.num_vars() - 1;
    let map: Vec<Option<usize>> = (0..n).map(Some).chain([None]).collect();
    p.remap(n, &map).expect("time variable eliminated")
}

/// Exact time-one flow map of a field whose coefficients only involve lighter coordinates.
pub fn flow_time_one(v: &PolyVectorField) -> Result<Vec<WeightedPolynomial>> {
    flow_time_one_with_params(v.components(), v.weights(), 0)
}
