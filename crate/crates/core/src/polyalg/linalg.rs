use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::{PolyError, Rational};

/// Dense rational matrix, row major.
pub type RationalMatrix = Vec<Vec<Rational>>;

/// Incremental exact row reduction over sparse vectors.
///
/// Each stored row remembers how it was combined from the inserted
/// vectors, so any vector in the span can be written in terms of the
/// accepted inputs.
#[derive(Clone, Debug)]
pub struct EchelonBasis<K: Ord + Clone> {
    rows: Vec<(K, BTreeMap<K, Rational>, Vec<Rational>)>,
}

impl<K: Ord + Clone> Default for EchelonBasis<K> {
    fn default() -> Self {
        Self { rows: Vec::new() }
    }
}

impl<K: Ord + Clone> EchelonBasis<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &BTreeMap<K, Rational>) -> (BTreeMap<K, Rational>, Vec<Rational>) {
        let mut w = v.clone();
        let mut coords = vec![Rational::zero(); self.rows.len()];
        for (j, (pivot, row, _)) in self.rows.iter().enumerate() {
            let c = match w.get(pivot) {
                Some(c) => c.clone(),
                None => continue,
            };
            for (k, rv) in row {
                let e = w.entry(k.clone()).or_insert_with(Rational::zero);
                *e -= &c * rv;
                if e.is_zero() {
                    w.remove(k);
                }
            }
            coords[j] = c;
        }
        (w, coords)
    }

    /// Rewrites row coordinates in terms of the inserted vectors.
    fn to_inputs(&self, row_coords: &[Rational]) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.rows.len()];
        for (cj, (_, _, comb)) in row_coords.iter().zip(&self.rows) {
            if cj.is_zero() {
                continue;
            }
            for (o, t) in out.iter_mut().zip(comb) {
                if !t.is_zero() {
                    *o += cj * t;
                }
            }
        }
        out
    }

    /// Coordinates of `v` with respect to the accepted vectors, or `None`
    /// when `v` is outside their span.
    pub fn coordinates(&self, v: &BTreeMap<K, Rational>) -> Option<Vec<Rational>> {
        let (rest, coords) = self.reduce(v);
        rest.is_empty().then(|| self.to_inputs(&coords))
    }

    pub fn contains(&self, v: &BTreeMap<K, Rational>) -> bool {
        self.reduce(v).0.is_empty()
    }

    /// Adds `v` if it is independent of the current rows. Returns whether it was added.
    pub fn insert(&mut self, v: &BTreeMap<K, Rational>) -> bool {
        let (mut rest, coords) = self.reduce(v);
        let Some((pivot, pv)) = rest.iter().next().map(|(k, c)| (k.clone(), c.clone())) else {
            return false;
        };
        let inv = pv.recip();
        for c in rest.values_mut() {
            *c *= &inv;
        }
        let mut comb: Vec<Rational> = self.to_inputs(&coords).iter().map(|c| -c * &inv).collect();
        comb.push(inv);
        for (_, _, old) in self.rows.iter_mut() {
            old.push(Rational::zero());
        }
        self.rows.push((pivot, rest, comb));
        true
    }
}

/// Solves `a x = b` exactly by Gauss-Jordan elimination.
pub fn solve_square(a: &RationalMatrix, b: &[Rational]) -> Result<Vec<Rational>, PolyError> {
    let n = a.len();
    if b.len() != n || a.iter().any(|r| r.len() != n) {
        return Err(PolyError::LengthMismatch {
            expected: n,
            found: b.len(),
        });
    }
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(r, bi)| {
            let mut r = r.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero()).ok_or(PolyError::Singular)?;
        m.swap(col, piv);
        let inv = m[col][col].recip();
        for c in col..=n {
            m[col][c] = &m[col][c] * &inv;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in col..=n {
                    let d = &f * &m[col][c];
                    m[r][c] -= d;
                }
            }
        }
    }
    Ok(m.into_iter().map(|mut r| r.pop().unwrap()).collect())
}

/// Exact determinant.
pub fn det(a: &RationalMatrix) -> Rational {
    let n = a.len();
    let mut m = a.clone();
    let mut d = Rational::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Rational::zero();
        };
        if piv != col {
            m.swap(col, piv);
            d = -d;
        }
        d *= &m[col][col];
        let inv = m[col][col].recip();
        for r in col + 1..n {
            if !m[r][col].is_zero() {
                let f = &m[r][col] * &inv;
                for c in col..n {
                    let x = &f * &m[col][c];
                    m[r][c] -= x;
                }
            }
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::qi;

    fn v(entries: &[(u32, i64)]) -> BTreeMap<u32, Rational> {
        entries.iter().map(|&(k, c)| (k, qi(c))).collect()
    }

    #[test]
    fn echelon_tracks_combinations() {
        let mut b = EchelonBasis::new();
        assert!(b.insert(&v(&[(0, 1), (1, 1)])));
        assert!(b.insert(&v(&[(0, 1), (1, -1)])));
        assert!(!b.insert(&v(&[(0, 3), (1, 1)])));
        assert!(b.insert(&v(&[(2, 5)])));
        assert_eq!(b.rank(), 3);
        let c = b.coordinates(&v(&[(0, 3), (1, 1), (2, 10)])).unwrap();
        assert_eq!(c, vec![qi(2), qi(1), qi(2)]);
        assert!(b.coordinates(&v(&[(7, 1)])).is_none());
    }

    #[test]
    fn solve_and_det() {
        let a = vec![vec![qi(2), qi(1)], vec![qi(1), qi(3)]];
        assert_eq!(det(&a), qi(5));
        let x = solve_square(&a, &[qi(3), qi(5)]).unwrap();
        assert_eq!(x, vec![crate::polyalg::q(4, 5), crate::polyalg::q(7, 5)]);
        let s = vec![vec![qi(1), qi(2)], vec![qi(2), qi(4)]];
        assert_eq!(solve_square(&s, &[qi(1), qi(1)]), Err(PolyError::Singular));
    }
}
