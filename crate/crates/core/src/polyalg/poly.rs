use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, ToPrimitive, Zero};

use super::weights::DilationWeights;
use super::{PolyError, Rational};

/// Monomial exponent vector, one entry per variable.
pub type Exponents = Vec<u32>;

/// Exact multivariate polynomial over the rationals.
///
/// Terms are kept in a sorted map so equality is structural: two polynomials
/// are equal iff they expand to the same canonical form. Zero coefficients are
/// never stored.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct WeightedPolynomial {
    num_vars: usize,
    terms: BTreeMap<Exponents, Rational>,
}

/// Result of a weighted-degree query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Homogeneity {
    /// The zero polynomial is homogeneous of every degree.
    Zero,
    Homogeneous(Rational),
    NotHomogeneous,
}

impl Homogeneity {
    /// True when the polynomial is zero or homogeneous of exactly `degree`.
    pub fn admits(&self, degree: &Rational) -> bool {
        match self {
            Homogeneity::Zero => true,
            Homogeneity::Homogeneous(d) => d == degree,
            Homogeneity::NotHomogeneous => false,
        }
    }
}

impl WeightedPolynomial {
    pub fn zero(num_vars: usize) -> Self {
        Self {
            num_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(num_vars: usize, c: Rational) -> Self {
        let mut p = Self::zero(num_vars);
        if !c.is_zero() {
            p.terms.insert(vec![0; num_vars], c);
        }
        p
    }

    pub fn one(num_vars: usize) -> Self {
        Self::constant(num_vars, Rational::one())
    }

    /// The coordinate function `x_{index+1}` (indices are zero-based here).
    pub fn var(num_vars: usize, index: usize) -> Self {
        assert!(index < num_vars, "variable {index} out of range {num_vars}");
        let mut e = vec![0; num_vars];
        e[index] = 1;
        Self::monomial(e, Rational::one())
    }

    pub fn monomial(exponents: Exponents, c: Rational) -> Self {
        let mut p = Self::zero(exponents.len());
        if !c.is_zero() {
            p.terms.insert(exponents, c);
        }
        p
    }

    pub fn from_terms<I>(num_vars: usize, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (Exponents, Rational)>,
    {
        let mut p = Self::zero(num_vars);
        for (e, c) in terms {
            if e.len() != num_vars {
                return Err(PolyError::VarCountMismatch {
                    left: num_vars,
                    right: e.len(),
                });
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, exponents: &[u32]) -> Rational {
        self.terms.get(exponents).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coefficient(&vec![0; self.num_vars])
    }

    fn add_term(&mut self, e: Exponents, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&e);
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    fn check_vars(&self, other: &Self) -> Result<(), PolyError> {
        if self.num_vars != other.num_vars {
            return Err(PolyError::VarCountMismatch {
                left: self.num_vars,
                right: other.num_vars,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_vars(other)?;
        let mut out = Self::zero(self.num_vars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Exponents = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.num_vars);
        }
        Self {
            num_vars: self.num_vars,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut result = Self::one(self.num_vars);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Formal partial derivative with respect to variable `index` (zero-based).
    pub fn partial(&self, index: usize) -> Result<Self, PolyError> {
        if index >= self.num_vars {
            return Err(PolyError::IndexOutOfRange {
                index,
                num_vars: self.num_vars,
            });
        }
        let mut out = Self::zero(self.num_vars);
        for (e, c) in &self.terms {
            if e[index] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[index] -= 1;
            out.add_term(d, c * Rational::from_integer(e[index].into()));
        }
        Ok(out)
    }

    /// Antiderivative in variable `index`, vanishing where that variable is 0.
    pub fn integrate_var(&self, index: usize) -> Self {
        let mut out = Self::zero(self.num_vars);
        for (e, c) in &self.terms {
            let mut d = e.clone();
            d[index] += 1;
            let k = Rational::from_integer(d[index].into());
            out.add_term(d, c / k);
        }
        out
    }

    /// Weighted degree of every monomial, `sum_i alpha_i * sigma_i`.
    pub fn weighted_degree(&self, weights: &DilationWeights) -> Result<Homogeneity, PolyError> {
        if weights.len() != self.num_vars {
            return Err(PolyError::VarCountMismatch {
                left: self.num_vars,
                right: weights.len(),
            });
        }
        let mut degree: Option<Rational> = None;
        for e in self.terms.keys() {
            let d = weights.monomial_degree(e);
            match &degree {
                None => degree = Some(d),
                Some(prev) if *prev != d => return Ok(Homogeneity::NotHomogeneous),
                _ => {}
            }
        }
        Ok(match degree {
            None => Homogeneity::Zero,
            Some(d) => Homogeneity::Homogeneous(d),
        })
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn depends_on(&self, index: usize) -> bool {
        self.terms.keys().any(|e| e[index] > 0)
    }

    /// Zero-based indices of the variables that actually occur.
    pub fn variables(&self) -> Vec<usize> {
        (0..self.num_vars).filter(|&i| self.depends_on(i)).collect()
    }

    pub fn eval_rational(&self, point: &[Rational]) -> Result<Rational, PolyError> {
        if point.len() != self.num_vars {
            return Err(PolyError::LengthMismatch {
                expected: self.num_vars,
                found: point.len(),
            });
        }
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (x, &k) in point.iter().zip(e) {
                if k > 0 {
                    term *= num_traits::pow(x.clone(), k as usize);
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    pub fn eval_f64(&self, point: &[f64]) -> Result<f64, PolyError> {
        if point.len() != self.num_vars {
            return Err(PolyError::LengthMismatch {
                expected: self.num_vars,
                found: point.len(),
            });
        }
        let mut acc = 0.0;
        for (e, c) in &self.terms {
            let mut term = c.to_f64().unwrap_or(f64::NAN);
            for (x, &k) in point.iter().zip(e) {
                if k > 0 {
                    term *= x.powi(k as i32);
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Substitutes `subs[i]` for variable `i`. All substitutes share one
    /// variable count, which becomes the variable count of the result.
    pub fn compose(&self, subs: &[WeightedPolynomial]) -> Result<Self, PolyError> {
        if subs.len() != self.num_vars {
            return Err(PolyError::LengthMismatch {
                expected: self.num_vars,
                found: subs.len(),
            });
        }
        let target = subs.first().map(|s| s.num_vars).unwrap_or(0);
        if let Some(bad) = subs.iter().find(|s| s.num_vars != target) {
            return Err(PolyError::VarCountMismatch {
                left: target,
                right: bad.num_vars,
            });
        }
        let mut powers: Vec<Vec<WeightedPolynomial>> = subs
            .iter()
            .map(|s| vec![WeightedPolynomial::one(target), s.clone()])
            .collect();
        let mut out = Self::zero(target);
        for (e, c) in &self.terms {
            let mut term = Self::constant(target, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                while powers[i].len() <= k as usize {
                    let next = powers[i].last().unwrap() * &subs[i];
                    powers[i].push(next);
                }
                term = &term * &powers[i][k as usize];
            }
            for (te, tc) in term.terms {
                out.add_term(te, tc);
            }
        }
        Ok(out)
    }

    /// Re-expresses the polynomial in a larger variable set: variable `i`
    /// becomes variable `offset + i` out of `new_num_vars`.
    pub fn embed(&self, new_num_vars: usize, offset: usize) -> Self {
        assert!(offset + self.num_vars <= new_num_vars);
        let mut out = Self::zero(new_num_vars);
        for (e, c) in &self.terms {
            let mut ne = vec![0; new_num_vars];
            ne[offset..offset + self.num_vars].copy_from_slice(e);
            out.terms.insert(ne, c.clone());
        }
        out
    }

    /// Sets the listed variables to the given rational values, keeping the
    /// variable count.
    pub fn substitute_values(&self, values: &[(usize, Rational)]) -> Self {
        let mut out = Self::zero(self.num_vars);
        for (e, c) in &self.terms {
            let mut ne = e.clone();
            let mut nc = c.clone();
            for (i, v) in values {
                let k = ne[*i];
                if k > 0 {
                    nc *= num_traits::pow(v.clone(), k as usize);
                    ne[*i] = 0;
                }
            }
            out.add_term(ne, nc);
        }
        out
    }

    /// Renames variables: old variable `i` becomes `map[i]` in a ring of
    /// `new_num_vars` variables. Fails if a variable mapped to `None` occurs.
    pub fn remap(&self, new_num_vars: usize, map: &[Option<usize>]) -> Result<Self, PolyError> {
        if map.len() != self.num_vars {
            return Err(PolyError::LengthMismatch {
                expected: self.num_vars,
                found: map.len(),
            });
        }
        let mut out = Self::zero(new_num_vars);
        for (e, c) in &self.terms {
            let mut ne = vec![0u32; new_num_vars];
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                match map[i] {
                    Some(j) if j < new_num_vars => ne[j] += k,
                    _ => {
                        return Err(PolyError::IndexOutOfRange {
                            index: i,
                            num_vars: new_num_vars,
                        })
                    }
                }
            }
            out.add_term(ne, c.clone());
        }
        Ok(out)
    }

    /// Linear part: coefficient of each variable.
    pub fn linear_coefficients(&self) -> Vec<Rational> {
        (0..self.num_vars)
            .map(|i| {
                let mut e = vec![0; self.num_vars];
                e[i] = 1;
                self.coefficient(&e)
            })
            .collect()
    }

    /// Monomials of weighted degree exactly `d`.
    pub fn homogeneous_component(&self, weights: &DilationWeights, d: &Rational) -> Self {
        let mut out = Self::zero(self.num_vars);
        for (e, c) in &self.terms {
            if &weights.monomial_degree(e) == d {
                out.terms.insert(e.clone(), c.clone());
            }
        }
        out
    }

    /// Canonical text with terms in graded order: weighted degree first,
    /// then lexicographic (higher powers of earlier variables first).
    pub fn to_canonical_string(&self, weights: Option<&DilationWeights>) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut keyed: Vec<(Rational, &Exponents, &Rational)> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let d = match weights {
                    Some(w) if w.len() == self.num_vars => w.monomial_degree(e),
                    _ => Rational::from_integer(e.iter().map(|&k| k as i64).sum::<i64>().into()),
                };
                (d, e, c)
            })
            .collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| b.1.cmp(a.1)));
        let mut out = String::new();
        for (i, (_, e, c)) in keyed.iter().enumerate() {
            let negative = c.is_negative();
            let magnitude = c.abs();
            if i == 0 {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(if negative { " - " } else { " + " });
            }
            let mono = format_monomial(e);
            if mono.is_empty() {
                out.push_str(&magnitude.to_string());
            } else {
                if !magnitude.is_one() {
                    out.push_str(&magnitude.to_string());
                    out.push(' ');
                }
                out.push_str(&mono);
            }
        }
        out
    }
}

fn format_monomial(e: &[u32]) -> String {
    let mut parts = Vec::new();
    for (i, &k) in e.iter().enumerate() {
        match k {
            0 => {}
            1 => parts.push(format!("x{}", i + 1)),
            _ => parts.push(format!("x{}^{}", i + 1, k)),
        }
    }
    parts.join(" ")
}

impl fmt::Display for WeightedPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical_string(None))
    }
}

impl<'a> Add<&'a WeightedPolynomial> for &'a WeightedPolynomial {
    type Output = WeightedPolynomial;
    fn add(self, rhs: &'a WeightedPolynomial) -> WeightedPolynomial {
        self.try_add(rhs).expect("polynomial variable count mismatch")
    }
}

impl<'a> Sub<&'a WeightedPolynomial> for &'a WeightedPolynomial {
    type Output = WeightedPolynomial;
    fn sub(self, rhs: &'a WeightedPolynomial) -> WeightedPolynomial {
        self.try_sub(rhs).expect("polynomial variable count mismatch")
    }
}

impl<'a> Mul<&'a WeightedPolynomial> for &'a WeightedPolynomial {
    type Output = WeightedPolynomial;
    fn mul(self, rhs: &'a WeightedPolynomial) -> WeightedPolynomial {
        self.try_mul(rhs).expect("polynomial variable count mismatch")
    }
}

impl Neg for &WeightedPolynomial {
    type Output = WeightedPolynomial;
    fn neg(self) -> WeightedPolynomial {
        self.scale(&-Rational::one())
    }
}

impl Add for WeightedPolynomial {
    type Output = WeightedPolynomial;
    fn add(self, rhs: WeightedPolynomial) -> WeightedPolynomial {
        &self + &rhs
    }
}

impl Sub for WeightedPolynomial {
    type Output = WeightedPolynomial;
    fn sub(self, rhs: WeightedPolynomial) -> WeightedPolynomial {
        &self - &rhs
    }
}

impl Mul for WeightedPolynomial {
    type Output = WeightedPolynomial;
    fn mul(self, rhs: WeightedPolynomial) -> WeightedPolynomial {
        &self * &rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::{q, qi};

    fn x(n: usize, i: usize) -> WeightedPolynomial {
        WeightedPolynomial::var(n, i)
    }

    #[test]
    fn additive_inverse_cancels() {
        let p = x(2, 0);
        assert!((&p + &(-&p)).is_zero());
    }

    #[test]
    fn square_of_variable() {
        let p = &x(1, 0) * &x(1, 0);
        assert_eq!(p, WeightedPolynomial::monomial(vec![2], qi(1)));
    }

    #[test]
    fn scale_by_three_halves() {
        let p = (&x(2, 0) * &x(2, 1)).scale(&q(3, 2));
        assert_eq!(p.to_string(), "3/2 x1 x2");
    }

    #[test]
    fn mismatched_variable_counts_error() {
        assert!(matches!(
            x(2, 0).try_add(&x(3, 0)),
            Err(PolyError::VarCountMismatch { .. })
        ));
    }

    #[test]
    fn weighted_degrees() {
        let w = DilationWeights::new(vec![qi(1), qi(2)]).unwrap();
        let x1sq = &x(2, 0) * &x(2, 0);
        assert_eq!(
            x1sq.weighted_degree(&w).unwrap(),
            Homogeneity::Homogeneous(qi(2))
        );
        assert_eq!(
            x(2, 1).weighted_degree(&w).unwrap(),
            Homogeneity::Homogeneous(qi(2))
        );
        assert_eq!(
            (&x(2, 0) + &x(2, 1)).weighted_degree(&w).unwrap(),
            Homogeneity::NotHomogeneous
        );
        assert_eq!(
            WeightedPolynomial::zero(2).weighted_degree(&w).unwrap(),
            Homogeneity::Zero
        );
    }

    #[test]
    fn evaluation_examples() {
        let p = &x(2, 0) * &x(2, 1);
        assert_eq!(p.eval_rational(&[qi(2), qi(3)]).unwrap(), qi(6));
        let sq = &x(1, 0) * &x(1, 0);
        assert_eq!(sq.eval_rational(&[q(1, 2)]).unwrap(), q(1, 4));
        assert_eq!(
            WeightedPolynomial::zero(3).eval_f64(&[1.0, 2.0, 3.0]).unwrap(),
            0.0
        );
        assert!(matches!(
            p.eval_f64(&[1.0]),
            Err(PolyError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn partial_derivative_examples() {
        let sq = &x(2, 0) * &x(2, 0);
        assert_eq!(sq.partial(0).unwrap(), x(2, 0).scale(&qi(2)));
        assert!(x(2, 0).partial(1).unwrap().is_zero());
        assert_eq!((&x(2, 0) * &x(2, 1)).partial(0).unwrap(), x(2, 1));
        assert!(matches!(
            x(2, 0).partial(5),
            Err(PolyError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn composition_substitutes() {
        // (x1 x2)(a + b, a - b) = a^2 - b^2
        let p = &x(2, 0) * &x(2, 1);
        let a = x(2, 0);
        let b = x(2, 1);
        let r = p.compose(&[&a + &b, &a - &b]).unwrap();
        assert_eq!(r, &(&a * &a) - &(&b * &b));
    }

    #[test]
    fn canonical_string_orders_by_weighted_degree() {
        let w = DilationWeights::new(vec![qi(1), qi(2)]).unwrap();
        let p = &(&x(2, 1) + &x(2, 0)) - &WeightedPolynomial::constant(2, q(1, 2));
        assert_eq!(p.to_canonical_string(Some(&w)), "-1/2 + x1 + x2");
    }
}
