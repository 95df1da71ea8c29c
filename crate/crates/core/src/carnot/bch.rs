//! Baker-Campbell-Hausdorff series from Dynkin's formula.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::fields::GradedLieBasis;
use crate::polyalg::{Rational, WeightedPolynomial};

pub const MAX_BCH_DEGREE: usize = 6;

/// Letter 0 stands for `X`, letter 1 for `Y`.
pub type BchWord = Vec<u8>;

fn factorial(k: usize) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// All `(r_i, s_i)` sequences of length `parts` with `r_i + s_i > 0` and total `len`.
fn compositions(parts: usize, len: usize, out: &mut Vec<Vec<(usize, usize)>>, cur: &mut Vec<(usize, usize)>) {
    if cur.len() == parts {
        if len == 0 {
            out.push(cur.clone());
        }
        return;
    }
    let remaining_parts = parts - cur.len();
    if len < remaining_parts {
        return;
    }
    for total in 1..=len - (remaining_parts - 1) {
        for r in 0..=total {
            cur.push((r, total - r));
            compositions(parts, len - total, out, cur);
            cur.pop();
        }
    }
}

/// Coefficients `z_w` with `log(e^X e^Y) = sum_w z_w [w]`, where `[w]` is the
/// right-nested bracket `[w_1, [w_2, ... w_k]]`. Words up to length `max_len`.
pub fn bch_coefficients(max_len: usize) -> Result<BTreeMap<BchWord, Rational>> {
    if max_len > MAX_BCH_DEGREE {
        return Err(Error::Unsupported(format!(
            "step {max_len} exceeds the BCH table (max {MAX_BCH_DEGREE})"
        )));
    }
    let mut table: BTreeMap<BchWord, Rational> = BTreeMap::new();
    for len in 1..=max_len {
        for parts in 1..=len {
            let sign = if parts % 2 == 1 { 1 } else { -1 };
            let mut comps = Vec::new();
            compositions(parts, len, &mut comps, &mut Vec::new());
            for comp in comps {
                let mut word = Vec::with_capacity(len);
                let mut denom = BigInt::from(parts) * BigInt::from(len);
                for &(r, s) in &comp {
                    word.extend(std::iter::repeat(0u8).take(r));
                    word.extend(std::iter::repeat(1u8).take(s));
                    denom *= factorial(r) * factorial(s);
                }
                if len >= 2 && word[len - 1] == word[len - 2] {
                    continue;
                }
                let c = Rational::new(BigInt::from(sign), denom);
                let e = table.entry(word).or_insert_with(Rational::zero);
                *e += c;
            }
        }
    }
    table.retain(|_, c| !c.is_zero());
    Ok(table)
}

/// Element of `g (x) R[vars]`: one polynomial coefficient per basis element.
pub type PolyVector = Vec<WeightedPolynomial>;

/// Bracket in the Lie algebra with polynomial coefficients.
pub fn bracket_poly(basis: &GradedLieBasis, u: &[WeightedPolynomial], v: &[WeightedPolynomial]) -> Result<PolyVector> {
    let n = basis.dim();
    let nv = u[0].num_vars();
    let mut out = vec![WeightedPolynomial::zero(nv); n];
    for i in 0..n {
        if u[i].is_zero() {
            continue;
        }
        for j in 0..n {
            if i == j || v[j].is_zero() {
                continue;
            }
            let coeffs = basis.bracket_coords(i, j);
            if coeffs.iter().all(|c| c.is_zero()) {
                continue;
            }
            let prod = u[i].try_mul(&v[j])?;
            for (k, c) in coeffs.iter().enumerate() {
                if !c.is_zero() {
                    out[k] = out[k].try_add(&prod.scale(c))?;
                }
            }
        }
    }
    Ok(out)
}

/// `BCH(a, b)` for polynomial-coefficient elements, truncated at the step.
pub fn bch_poly(basis: &GradedLieBasis, a: &[WeightedPolynomial], b: &[WeightedPolynomial]) -> Result<PolyVector> {
    let step = basis.step() as usize;
    let table = bch_coefficients(step.max(1))?;
    let n = basis.dim();
    let nv = a[0].num_vars();
    let mut memo: BTreeMap<BchWord, PolyVector> = BTreeMap::new();
    let mut out: PolyVector = vec![WeightedPolynomial::zero(nv); n];
    for (word, coef) in &table {
        let value = nested(basis, word, a, b, &mut memo)?;
        for (o, v) in out.iter_mut().zip(&value) {
            if !v.is_zero() {
                *o = o.try_add(&v.scale(coef))?;
            }
        }
    }
    Ok(out)
}

fn nested(
    basis: &GradedLieBasis,
    word: &[u8],
    a: &[WeightedPolynomial],
    b: &[WeightedPolynomial],
    memo: &mut BTreeMap<BchWord, PolyVector>,
) -> Result<PolyVector> {
    if let Some(v) = memo.get(word) {
        return Ok(v.clone());
    }
    let head = if word[0] == 0 { a } else { b };
    let value = if word.len() == 1 {
        head.to_vec()
    } else {
        let tail = nested(basis, &word[1..], a, b, memo)?;
        if tail.iter().all(|t| t.is_zero()) {
            tail
        } else {
            bracket_poly(basis, head, &tail)?
        }
    };
    memo.insert(word.to_vec(), value.clone());
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::q;

    #[test]
    fn low_order_coefficients() {
        let t = bch_coefficients(4).unwrap();
        assert_eq!(t[&vec![0]], q(1, 1));
        assert_eq!(t[&vec![1]], q(1, 1));
        // [X,Y] and [Y,X] = -[X,Y] combine to [X,Y]/2.
        assert_eq!(&t[&vec![0, 1]] - &t[&vec![1, 0]], q(1, 2));
        assert!(!t.contains_key(&vec![0, 0]));
        assert!(bch_coefficients(7).is_err());
    }
}
