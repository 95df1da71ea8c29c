use std::collections::BTreeMap;

use crate::error::Result;
use crate::fields::PolyVectorField;
use crate::polyalg::{CompiledPoly, Exponents, WeightedPolynomial};

/// Linear differential operator `sum_a c_a(g) d^a` with polynomial coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyDiffOp {
    num_vars: usize,
    terms: BTreeMap<Exponents, WeightedPolynomial>,
}

impl PolyDiffOp {
    pub fn identity(num_vars: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![0; num_vars], WeightedPolynomial::one(num_vars));
        Self { num_vars, terms }
    }

    /// `Z_{w_1} ... Z_{w_k}`, with `Z_{w_k}` applied first.
    pub fn word(fields: &[PolyVectorField], word: &[usize]) -> Result<Self> {
        let nv = fields.first().map(|f| f.dim()).unwrap_or(0);
        let mut op = Self::identity(nv);
        for &j in word.iter().rev() {
            op = op.after_field(&fields[j])?;
        }
        Ok(op)
    }

    /// `Z o self`.
    pub fn after_field(&self, z: &PolyVectorField) -> Result<Self> {
        let mut terms: BTreeMap<Exponents, WeightedPolynomial> = BTreeMap::new();
        let mut push = |alpha: Exponents, c: WeightedPolynomial| -> Result<()> {
            if c.is_zero() {
                return Ok(());
            }
            let entry = terms
                .entry(alpha)
                .or_insert_with(|| WeightedPolynomial::zero(c.num_vars()));
            *entry = entry.try_add(&c)?;
            Ok(())
        };
        for (alpha, c) in &self.terms {
            push(alpha.clone(), z.apply(c)?)?;
            for k in 0..self.num_vars {
                let zk = z.component(k);
                if zk.is_zero() {
                    continue;
                }
                let mut beta = alpha.clone();
                beta[k] += 1;
                push(beta, zk.try_mul(c)?)?;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        Ok(Self {
            num_vars: self.num_vars,
            terms,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut terms = self.terms.clone();
        for (alpha, c) in &other.terms {
            let entry = terms
                .entry(alpha.clone())
                .or_insert_with(|| WeightedPolynomial::zero(self.num_vars));
            *entry = entry.try_add(c)?;
        }
        terms.retain(|_, c| !c.is_zero());
        Ok(Self {
            num_vars: self.num_vars,
            terms,
        })
    }

    /// `sum_j Z_j^2`.
    pub fn sum_of_squares(fields: &[PolyVectorField]) -> Result<Self> {
        let nv = fields.first().map(|f| f.dim()).unwrap_or(0);
        let mut op = Self {
            num_vars: nv,
            terms: BTreeMap::new(),
        };
        for j in 0..fields.len() {
            op = op.add(&Self::word(fields, &[j, j])?)?;
        }
        Ok(op)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &WeightedPolynomial)> {
        self.terms.iter()
    }

    pub fn order(&self) -> u32 {
        self.terms
            .keys()
            .map(|a| a.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Applies the operator to a polynomial exactly.
    pub fn apply(&self, f: &WeightedPolynomial) -> Result<WeightedPolynomial> {
        let mut out = WeightedPolynomial::zero(self.num_vars);
        for (alpha, c) in &self.terms {
            let mut d = f.clone();
            for (k, &e) in alpha.iter().enumerate() {
                for _ in 0..e {
                    d = d.partial(k)?;
                }
            }
            out = out.try_add(&c.try_mul(&d)?)?;
        }
        Ok(out)
    }

    pub fn compile(&self) -> CompiledDiffOp {
        CompiledDiffOp {
            terms: self
                .terms
                .iter()
                .map(|(a, c)| (a.clone(), CompiledPoly::new(c)))
                .collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CompiledDiffOp {
    terms: Vec<(Exponents, CompiledPoly)>,
}

impl CompiledDiffOp {
    /// Coefficients at `g`, as `(multi-index, value)` pairs.
    pub fn coefficients_at(&self, g: &[f64]) -> Vec<(Exponents, f64)> {
        self.terms.iter().map(|(a, c)| (a.clone(), c.eval(g))).collect()
    }
}

impl super::GroupHeatKernel {
    /// `d_t^r P gamma (t, g)` by central differences with steps `h t` in
    /// time and `h t^{sigma_k / 2}` in coordinate `k`, Richardson-extrapolated
    /// over `levels` halvings.
    pub fn differentiate(
        &self,
        op: &CompiledDiffOp,
        time_order: u32,
        t: f64,
        g: &[f64],
        h: f64,
        levels: usize,
    ) -> Result<crate::fdiff::Estimate> {
        let local = self.local(t, g)?;
        let weights = self.group().weights().as_f64();
        let mut steps = vec![h * t];
        steps.extend(weights.iter().map(|s| h * t.powf(s / 2.0)));
        let terms: Vec<(Exponents, f64)> = op
            .coefficients_at(g)
            .into_iter()
            .map(|(alpha, c)| {
                let mut full = vec![time_order];
                full.extend(alpha);
                (full, c)
            })
            .collect();
        let mut center = vec![t];
        center.extend_from_slice(g);
        let mut failure = None;
        let est = crate::fdiff::operator(
            |p: &[f64]| match local.eval(p[0], &p[1..]) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            &center,
            &terms,
            &steps,
            levels,
        );
        match failure {
            Some(e) => Err(e),
            None => Ok(est),
        }
    }
}
