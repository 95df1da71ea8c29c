//! Floating-point evaluation of polynomials fixed at build time.

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::poly::WeightedPolynomial;

/// Closed real interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self {
            lo: lo.min(hi),
            hi: lo.max(hi),
        }
    }

    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    pub fn symmetric(r: f64) -> Self {
        Self::new(-r.abs(), r.abs())
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn add(self, o: Interval) -> Interval {
        Interval::new(self.lo + o.lo, self.hi + o.hi)
    }

    pub fn scale(self, c: f64) -> Interval {
        Interval::new(self.lo * c, self.hi * c)
    }

    pub fn mul(self, o: Interval) -> Interval {
        let c = [
            self.lo * o.lo,
            self.lo * o.hi,
            self.hi * o.lo,
            self.hi * o.hi,
        ];
        Interval::new(
            c.iter().cloned().fold(f64::INFINITY, f64::min),
            c.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        )
    }

    pub fn powi(self, k: u32) -> Interval {
        if k == 0 {
            return Interval::point(1.0);
        }
        let a = self.lo.powi(k as i32);
        let b = self.hi.powi(k as i32);
        if k % 2 == 0 && self.lo <= 0.0 && self.hi >= 0.0 {
            Interval::new(0.0, a.max(b))
        } else {
            Interval::new(a, b)
        }
    }

    pub fn hull(self, o: Interval) -> Interval {
        Interval::new(self.lo.min(o.lo), self.hi.max(o.hi))
    }
}

/// A polynomial with float coefficients and sparse monomials.
#[derive(Clone, Debug, Default)]
pub struct CompiledPoly {
    num_vars: usize,
    terms: Vec<(f64, Vec<(usize, u32)>)>,
}

impl CompiledPoly {
    pub fn new(p: &WeightedPolynomial) -> Self {
        let terms = p
            .terms()
            .map(|(e, c)| {
                let factors = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &k)| k > 0)
                    .map(|(i, &k)| (i, k))
                    .collect();
                (c.to_f64().unwrap(), factors)
            })
            .collect();
        Self {
            num_vars: p.num_vars(),
            terms,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert!(x.len() >= self.num_vars);
        let mut acc = 0.0;
        for (c, factors) in &self.terms {
            let mut m = *c;
            for &(i, k) in factors {
                m *= match k {
                    1 => x[i],
                    2 => x[i] * x[i],
                    _ => x[i].powi(k as i32),
                };
            }
            acc += m;
        }
        acc
    }

    /// Enclosure of the range over a box.
    pub fn eval_interval(&self, x: &[Interval]) -> Interval {
        let mut acc = Interval::point(0.0);
        for (c, factors) in &self.terms {
            let mut m = Interval::point(*c);
            for &(i, k) in factors {
                m = m.mul(x[i].powi(k));
            }
            acc = acc.add(m);
        }
        acc
    }
}

/// A polynomial map `R^k -> R^m`.
#[derive(Clone, Debug, Default)]
pub struct CompiledMap {
    components: Vec<CompiledPoly>,
}

impl CompiledMap {
    pub fn new(ps: &[WeightedPolynomial]) -> Self {
        Self {
            components: ps.iter().map(CompiledPoly::new).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn component(&self, i: usize) -> &CompiledPoly {
        &self.components[i]
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.components.iter().map(|p| p.eval(x)).collect()
    }

    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, p) in out.iter_mut().zip(&self.components) {
            *o = p.eval(x);
        }
    }

    pub fn eval_interval(&self, x: &[Interval]) -> Vec<Interval> {
        self.components.iter().map(|p| p.eval_interval(x)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::parse_polynomial;

    #[test]
    fn matches_exact_evaluation() {
        let p = parse_polynomial("x1^2 x2 - 3/2 x2^3 + 1", 2).unwrap();
        let c = CompiledPoly::new(&p);
        let x = [0.7, -1.3];
        assert!((c.eval(&x) - p.eval_f64(&x).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn interval_encloses_samples() {
        let p = parse_polynomial("x1^2 - x1 x2 + x2^3", 2).unwrap();
        let c = CompiledPoly::new(&p);
        let bx = [Interval::new(-1.0, 2.0), Interval::new(-0.5, 1.5)];
        let r = c.eval_interval(&bx);
        for i in 0..=10 {
            for j in 0..=10 {
                let x = [-1.0 + 0.3 * i as f64, -0.5 + 0.2 * j as f64];
                let v = c.eval(&x);
                assert!(r.lo <= v && v <= r.hi);
            }
        }
        assert_eq!(Interval::new(-2.0, 1.0).powi(2), Interval::new(0.0, 4.0));
    }
}
