use std::collections::BTreeMap;

use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use super::PolyVectorField;
use crate::error::{Error, Result};
use crate::polyalg::{DilationWeights, EchelonBasis, Homogeneity, Rational};

/// Left-normed bracket word: `[X_{w0}, [X_{w1}, ... X_{wk}]]`, zero-based.
pub type BracketWord = Vec<usize>;

pub fn word_label(w: &[usize]) -> String {
    let mut s = String::new();
    for (i, &j) in w.iter().enumerate() {
        if i + 1 < w.len() {
            s.push_str(&format!("[X{},", j + 1));
        } else {
            s.push_str(&format!("X{}", j + 1));
        }
    }
    s.push_str(&"]".repeat(w.len().saturating_sub(1)));
    s
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct H1Violation {
    pub field: usize,
    pub component: usize,
    pub expected_degree: String,
    pub found: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct H1Report {
    pub ok: bool,
    pub violations: Vec<H1Violation>,
    /// Indices of fields that are linear combinations of earlier ones.
    pub dependent: Vec<usize>,
}

/// Degree-one homogeneity of every field plus linear independence of the system.
pub fn check_h1(fields: &[PolyVectorField], w: &DilationWeights) -> Result<H1Report> {
    if fields.is_empty() {
        return Err(Error::InvalidInput("empty vector-field system".into()));
    }
    let mut violations = Vec::new();
    let mut dependent = Vec::new();
    let mut basis = EchelonBasis::new();
    for (j, f) in fields.iter().enumerate() {
        if f.dim() != w.len() {
            return Err(Error::Dimension(format!(
                "field {} lives in R^{}, weights in R^{}",
                j + 1,
                f.dim(),
                w.len()
            )));
        }
        for (i, c) in f.components().iter().enumerate() {
            let need = w.get(i) - Rational::one();
            let deg = c.weighted_degree(w)?;
            if !deg.admits(&need) {
                violations.push(H1Violation {
                    field: j,
                    component: i,
                    expected_degree: need.to_string(),
                    found: match deg {
                        Homogeneity::Homogeneous(d) => d.to_string(),
                        _ => "not homogeneous".into(),
                    },
                });
            }
        }
        if !basis.insert(&f.as_sparse()) {
            dependent.push(j);
        }
    }
    Ok(H1Report {
        ok: violations.is_empty() && dependent.is_empty(),
        violations,
        dependent,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankReport {
    pub rank: usize,
    pub n: usize,
    pub witness: Vec<BracketWord>,
    pub passes: bool,
}

impl RankReport {
    pub fn witness_labels(&self) -> Vec<String> {
        self.witness.iter().map(|w| word_label(w)).collect()
    }
}

/// Longest bracket word that can be nonzero: a homogeneous field of degree
/// above `sigma_n` has no room for polynomial coefficients.
pub fn max_word_length(w: &DilationWeights) -> usize {
    let top = w.sigma().iter().max().cloned().unwrap_or_else(Rational::one);
    top.ceil().to_integer().to_usize().unwrap_or(1).max(1)
}

/// Rank of `{Y(0) : Y bracket word}`, with words enumerated by length.
pub fn hormander_rank_at_zero(fields: &[PolyVectorField]) -> Result<RankReport> {
    let first = fields
        .first()
        .ok_or_else(|| Error::InvalidInput("empty vector-field system".into()))?;
    let n = first.dim();
    let max_len = max_word_length(first.weights());
    let mut span: EchelonBasis<usize> = EchelonBasis::new();
    let mut witness = Vec::new();
    let mut layer: Vec<(BracketWord, PolyVectorField)> = fields
        .iter()
        .enumerate()
        .map(|(j, f)| (vec![j], f.clone()))
        .collect();
    for len in 1..=max_len {
        for (word, f) in &layer {
            let v: BTreeMap<usize, Rational> = f
                .value_at_zero()
                .into_iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .collect();
            if span.insert(&v) {
                witness.push(word.clone());
            }
        }
        if span.rank() == n || len == max_len {
            break;
        }
        let mut next = Vec::new();
        for (j, g) in fields.iter().enumerate() {
            for (word, f) in &layer {
                let b = g.bracket(f)?;
                if !b.is_zero() {
                    let mut w = vec![j];
                    w.extend(word);
                    next.push((w, b));
                }
            }
        }
        if next.is_empty() {
            break;
        }
        layer = next;
    }
    Ok(RankReport {
        rank: span.rank(),
        n,
        passes: span.rank() == n,
        witness,
    })
}
