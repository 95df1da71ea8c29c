//! Central finite differences on tensor stencils with Richardson extrapolation.

use std::collections::HashMap;

/// Central stencil `(offset, weight)` for the derivative of the given order,
/// second-order accurate in the step.
pub fn central_weights(order: u32) -> &'static [(i32, f64)] {
    match order {
        0 => &[(0, 1.0)],
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        4 => &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
        _ => panic!("central stencil of order {order} not tabulated"),
    }
}

/// Extrapolated value with the magnitude of the last correction as error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Richardson table for an `O(h^2)` sequence computed at `h, h/2, h/4, ...`.
pub fn richardson(values: &[f64]) -> Estimate {
    assert!(!values.is_empty());
    let mut row = values.to_vec();
    let mut error = f64::INFINITY;
    let mut factor = 4.0;
    while row.len() > 1 {
        let next: Vec<f64> = row
            .windows(2)
            .map(|w| w[1] + (w[1] - w[0]) / (factor - 1.0))
            .collect();
        error = (next[next.len() - 1] - row[row.len() - 1]).abs();
        row = next;
        factor *= 4.0;
    }
    Estimate {
        value: row[0],
        error: if values.len() == 1 { f64::NAN } else { error },
    }
}

/// `sum_a c_a d^a f(center)` for a list of `(multi-index, coefficient)` terms,
/// evaluated with steps `steps / 2^l` for `l < levels` and extrapolated.
/// Function values are shared between terms at each level.
pub fn operator<F>(mut f: F, center: &[f64], terms: &[(Vec<u32>, f64)], steps: &[f64], levels: usize) -> Estimate
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = center.len();
    let mut values = Vec::with_capacity(levels);
    let mut point = vec![0.0; dim];
    for level in 0..levels {
        let scale = 0.5f64.powi(level as i32);
        let mut cache: HashMap<Vec<i32>, f64> = HashMap::new();
        let mut total = 0.0;
        for (alpha, coef) in terms {
            if *coef == 0.0 {
                continue;
            }
            let mut offsets = vec![0i32; dim];
            let mut denom = 1.0;
            for (k, &d) in alpha.iter().enumerate() {
                denom *= (steps[k] * scale).powi(d as i32);
            }
            let mut acc = 0.0;
            tensor(alpha, 0, 1.0, &mut offsets, &mut |off, w| {
                let v = *cache.entry(off.to_vec()).or_insert_with(|| {
                    for k in 0..dim {
                        point[k] = center[k] + off[k] as f64 * steps[k] * scale;
                    }
                    f(&point)
                });
                acc += w * v;
            });
            total += coef * acc / denom;
        }
        values.push(total);
    }
    richardson(&values)
}

fn tensor(alpha: &[u32], k: usize, w: f64, off: &mut Vec<i32>, visit: &mut dyn FnMut(&[i32], f64)) {
    if k == alpha.len() {
        visit(off, w);
        return;
    }
    for &(o, c) in central_weights(alpha[k]) {
        off[k] = o;
        tensor(alpha, k + 1, w * c, off, visit);
    }
    off[k] = 0;
}

/// A single mixed partial derivative `d^alpha f(center)`.
pub fn partial<F>(f: F, center: &[f64], alpha: &[u32], steps: &[f64], levels: usize) -> Estimate
where
    F: FnMut(&[f64]) -> f64,
{
    operator(f, center, &[(alpha.to_vec(), 1.0)], steps, levels)
}

/// Derivative of the given order of a function of one variable.
pub fn derivative<F: FnMut(f64) -> f64>(mut f: F, x: f64, order: u32, h: f64, levels: usize) -> Estimate {
    partial(|p: &[f64]| f(p[0]), &[x], &[order], &[h], levels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_of_smooth_functions() {
        let d = derivative(f64::exp, 0.3, 1, 0.1, 4);
        assert!((d.value - 0.3f64.exp()).abs() < 1e-11, "{d:?}");
        let d = derivative(f64::sin, 0.7, 2, 0.1, 4);
        assert!((d.value + 0.7f64.sin()).abs() < 1e-10, "{d:?}");
        let d = derivative(|x| x.powi(5), 1.0, 4, 0.1, 3);
        assert!((d.value - 120.0).abs() < 1e-6, "{d:?}");
    }

    #[test]
    fn mixed_operator() {
        // d_x d_y (x^2 y^3) + 2 d_x^2 at (1, 2) = 2*1*3*4 + 2*2*8 = 56
        let f = |p: &[f64]| p[0] * p[0] * p[1].powi(3);
        let terms = vec![(vec![1, 1], 1.0), (vec![2, 0], 2.0)];
        let e = operator(f, &[1.0, 2.0], &terms, &[0.1, 0.1], 3);
        assert!((e.value - 56.0).abs() < 1e-9, "{e:?}");
    }
}
