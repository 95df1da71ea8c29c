use num_traits::Zero;
use serde::Serialize;

use super::hormander::{word_label, BracketWord};
use super::PolyVectorField;
use crate::error::{Error, Result};
use crate::polyalg::{EchelonBasis, Rational};

pub const DEFAULT_CLOSURE_CAP: usize = 64;

/// Graded basis `E_1..E_N` of `Lie{X}` with structure constants
/// `[E_i, E_j] = sum_k c_ij^k E_k`.
#[derive(Clone, Debug)]
pub struct GradedLieBasis {
    basis: Vec<PolyVectorField>,
    degrees: Vec<u32>,
    words: Vec<BracketWord>,
    structure: Vec<Vec<Vec<Rational>>>,
    num_generators: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct StructureCheck {
    pub antisymmetric: bool,
    pub jacobi: bool,
    pub graded: bool,
    pub nilpotent: bool,
}

impl StructureCheck {
    pub fn all(&self) -> bool {
        self.antisymmetric && self.jacobi && self.graded && self.nilpotent
    }
}

impl GradedLieBasis {
    /// Builds a basis directly from structure constants (no realization as
    /// vector fields). Used for abstract groups such as the abelian model.
    pub fn from_structure(
        degrees: Vec<u32>,
        structure: Vec<Vec<Vec<Rational>>>,
        num_generators: usize,
    ) -> Result<Self> {
        let n = degrees.len();
        if structure.len() != n || structure.iter().any(|r| r.len() != n || r.iter().any(|c| c.len() != n)) {
            return Err(Error::Dimension("structure constants must be N x N x N".into()));
        }
        Ok(Self {
            basis: Vec::new(),
            words: (0..n).map(|k| vec![k]).collect(),
            degrees,
            structure,
            num_generators,
        })
    }

    pub fn dim(&self) -> usize {
        self.degrees.len()
    }

    pub fn basis(&self) -> &[PolyVectorField] {
        &self.basis
    }

    pub fn element(&self, k: usize) -> &PolyVectorField {
        &self.basis[k]
    }

    pub fn has_fields(&self) -> bool {
        !self.basis.is_empty()
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn words(&self) -> &[BracketWord] {
        &self.words
    }

    pub fn word_labels(&self) -> Vec<String> {
        self.words.iter().map(|w| word_label(w)).collect()
    }

    pub fn num_generators(&self) -> usize {
        self.num_generators
    }

    pub fn step(&self) -> u32 {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    /// `c_ij^k`.
    pub fn c(&self, i: usize, j: usize, k: usize) -> &Rational {
        &self.structure[i][j][k]
    }

    pub fn bracket_coords(&self, i: usize, j: usize) -> &[Rational] {
        &self.structure[i][j]
    }

    pub fn is_abelian(&self) -> bool {
        self.structure
            .iter()
            .all(|r| r.iter().all(|c| c.iter().all(|x| x.is_zero())))
    }

    /// Bracket of coordinate vectors in the abstract algebra.
    pub fn bracket_vec(&self, a: &[Rational], b: &[Rational]) -> Vec<Rational> {
        let n = self.dim();
        let mut out = vec![Rational::zero(); n];
        for i in 0..n {
            if a[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if b[j].is_zero() || i == j {
                    continue;
                }
                let f = &a[i] * &b[j];
                for (k, o) in out.iter_mut().enumerate() {
                    let c = &self.structure[i][j][k];
                    if !c.is_zero() {
                        *o += &f * c;
                    }
                }
            }
        }
        out
    }

    pub fn check_structure(&self) -> StructureCheck {
        let n = self.dim();
        let mut antisymmetric = true;
        let mut graded = true;
        let top = self.step();
        let mut nilpotent = true;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let c = &self.structure[i][j][k];
                    if *c != -self.structure[j][i][k].clone() {
                        antisymmetric = false;
                    }
                    if !c.is_zero() {
                        if self.degrees[k] != self.degrees[i] + self.degrees[j] {
                            graded = false;
                        }
                        if self.degrees[i] + self.degrees[j] > top {
                            nilpotent = false;
                        }
                    }
                }
            }
        }
        let e = |i: usize| {
            let mut v = vec![Rational::zero(); n];
            v[i] = Rational::from_integer(1.into());
            v
        };
        let mut jacobi = true;
        'outer: for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let (a, b, c) = (e(i), e(j), e(k));
                    let t1 = self.bracket_vec(&a, &self.bracket_vec(&b, &c));
                    let t2 = self.bracket_vec(&b, &self.bracket_vec(&c, &a));
                    let t3 = self.bracket_vec(&c, &self.bracket_vec(&a, &b));
                    if (0..n).any(|l| !(&t1[l] + &t2[l] + &t3[l]).is_zero()) {
                        jacobi = false;
                        break 'outer;
                    }
                }
            }
        }
        StructureCheck {
            antisymmetric,
            jacobi,
            graded,
            nilpotent,
        }
    }
}

/// Lie algebra generated by degree-one homogeneous fields.
///
/// Left-normed words span `Lie{X}`, so each layer brackets the generators
/// with the previous layer's new elements. A word of length `k` has degree `k`.
pub fn lie_closure(fields: &[PolyVectorField]) -> Result<GradedLieBasis> {
    lie_closure_with_cap(fields, DEFAULT_CLOSURE_CAP)
}

pub fn lie_closure_with_cap(fields: &[PolyVectorField], cap: usize) -> Result<GradedLieBasis> {
    let first = fields
        .first()
        .ok_or_else(|| Error::InvalidInput("empty vector-field system".into()))?;
    let one = Rational::from_integer(1.into());
    for (j, f) in fields.iter().enumerate() {
        if !f.is_homogeneous_of_degree(&one)? {
            return Err(Error::Hypothesis(format!(
                "field X{} is not homogeneous of degree 1",
                j + 1
            )));
        }
    }
    let max_len = super::hormander::max_word_length(first.weights());
    let mut span = EchelonBasis::new();
    let mut basis = Vec::new();
    let mut degrees = Vec::new();
    let mut words: Vec<BracketWord> = Vec::new();
    let mut layer: Vec<usize> = Vec::new();
    for (j, f) in fields.iter().enumerate() {
        if span.insert(&f.as_sparse()) {
            layer.push(basis.len());
            basis.push(f.clone());
            degrees.push(1);
            words.push(vec![j]);
        }
    }
    let num_generators = basis.len();
    let mut len = 1u32;
    while !layer.is_empty() {
        len += 1;
        let mut next = Vec::new();
        for (j, g) in fields.iter().enumerate() {
            for &idx in &layer {
                let b = g.bracket(&basis[idx])?;
                if b.is_zero() {
                    continue;
                }
                if span.insert(&b.as_sparse()) {
                    if basis.len() >= cap {
                        return Err(Error::ClosureCap { cap });
                    }
                    if len as usize > max_len {
                        return Err(Error::Internal(format!(
                            "nonzero bracket of length {len} beyond the grading bound"
                        )));
                    }
                    let mut w = vec![j];
                    w.extend(&words[idx]);
                    next.push(basis.len());
                    basis.push(b);
                    degrees.push(len);
                    words.push(w);
                }
            }
        }
        layer = next;
    }
    let n = basis.len();
    let mut structure = vec![vec![vec![Rational::zero(); n]; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let b = basis[i].bracket(&basis[j])?;
            let c = span.coordinates(&b.as_sparse()).ok_or_else(|| {
                Error::Internal(format!("[E{}, E{}] left the closure", i + 1, j + 1))
            })?;
            for k in 0..n {
                structure[j][i][k] = -c[k].clone();
                structure[i][j][k] = c[k].clone();
            }
        }
    }
    Ok(GradedLieBasis {
        basis,
        degrees,
        words,
        structure,
        num_generators,
    })
}
