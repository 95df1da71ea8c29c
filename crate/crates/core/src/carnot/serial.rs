//! JSON form of a lifted group. Polynomials are written in canonical text with
//! variables numbered by position (`law` uses `x1..x{2N}` for `(g, h)`,
//! `conv_map` uses `(x, y, eta)`, `psi_inv` and `phi_xy` use `(x, y, u)`).

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::group::{assemble, degree_weights, CarnotGroup};
use crate::error::{Error, Result};
use crate::fields::{GradedLieBasis, PolyVectorField};
use crate::polyalg::{parse_polynomial, parse_rational, DilationWeights, Rational, WeightedPolynomial};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureEntry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub c: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupFile {
    pub n: usize,
    pub p: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub m: usize,
    pub step: u32,
    pub weights_x: Vec<String>,
    pub weights_xi: Vec<String>,
    pub q: String,
    pub q_star: String,
    #[serde(rename = "Q")]
    pub big_q: String,
    pub degrees: Vec<u32>,
    /// Nonzero `c_ij^k` with `i < j`, zero-based.
    pub structure_constants: Vec<StructureEntry>,
    pub slots_x: Vec<usize>,
    pub slots_xi: Vec<usize>,
    pub theta: Vec<String>,
    pub theta_inv: Vec<String>,
    pub base_fields: Vec<Vec<String>>,
    pub law: Vec<String>,
    pub inverse: Vec<String>,
    pub z: Vec<Vec<String>>,
    pub r: Vec<Vec<String>>,
    pub conv_map: Vec<String>,
    pub psi_inv: Vec<String>,
    pub phi_xy: Vec<String>,
}

fn strings(ps: &[WeightedPolynomial], w: Option<&DilationWeights>) -> Vec<String> {
    ps.iter().map(|p| p.to_canonical_string(w)).collect()
}

fn parse_all(src: &[String], nv: usize, what: &str) -> Result<Vec<WeightedPolynomial>> {
    src.iter()
        .enumerate()
        .map(|(i, s)| {
            parse_polynomial(s, nv).map_err(|e| Error::InvalidInput(format!("{what}[{i}]: {e}")))
        })
        .collect()
}

impl GroupFile {
    pub fn from_group(g: &CarnotGroup) -> Self {
        let a = g.algebra();
        let big_n = g.dim();
        let mut structure_constants = Vec::new();
        for i in 0..big_n {
            for j in i + 1..big_n {
                for k in 0..big_n {
                    let c = a.c(i, j, k);
                    if !c.is_zero() {
                        structure_constants.push(StructureEntry { i, j, k, c: c.to_string() });
                    }
                }
            }
        }
        let w = g.weights();
        GroupFile {
            n: g.n(),
            p: g.p(),
            big_n,
            m: g.m(),
            step: g.step(),
            weights_x: g.weights_x().sigma().iter().map(|s| s.to_string()).collect(),
            weights_xi: g.weights_xi().sigma().iter().map(|s| s.to_string()).collect(),
            q: g.q().to_string(),
            q_star: g.q_star().to_string(),
            big_q: g.big_q().to_string(),
            degrees: a.degrees().to_vec(),
            structure_constants,
            slots_x: g.slots_x().to_vec(),
            slots_xi: g.slots_xi().to_vec(),
            theta: strings(g.theta(), Some(g.exp_weights())),
            theta_inv: strings(g.theta_inv(), Some(w)),
            base_fields: g.base_fields().iter().map(|f| f.to_strings()).collect(),
            law: strings(g.law(), Some(&w.concat(w))),
            inverse: strings(g.inverse(), Some(w)),
            z: g.z_fields().iter().map(|f| f.to_strings()).collect(),
            r: g.r_fields().iter().map(|f| f.to_strings()).collect(),
            conv_map: strings(g.conv_map(), None),
            psi_inv: strings(g.psi_inv(), None),
            phi_xy: strings(g.phi_xy(), None),
        }
    }

    /// Rebuilds the group from the algebra and coordinate change; derived
    /// maps are recomputed rather than trusted.
    pub fn to_group(&self) -> Result<CarnotGroup> {
        let big_n = self.n + self.p;
        if big_n != self.big_n || self.degrees.len() != big_n {
            return Err(Error::InvalidInput("inconsistent dimensions in group file".into()));
        }
        let rationals = |v: &[String]| -> Result<Vec<Rational>> {
            v.iter().map(|s| Ok(parse_rational(s)?)).collect()
        };
        let weights_x = DilationWeights::new(rationals(&self.weights_x)?)?;
        let weights_xi = DilationWeights::graded(rationals(&self.weights_xi)?)?;
        let mut structure = vec![vec![vec![Rational::zero(); big_n]; big_n]; big_n];
        for e in &self.structure_constants {
            if e.i >= big_n || e.j >= big_n || e.k >= big_n {
                return Err(Error::InvalidInput("structure constant index out of range".into()));
            }
            let c = parse_rational(&e.c)?;
            structure[e.j][e.i][e.k] = -c.clone();
            structure[e.i][e.j][e.k] = c;
        }
        let algebra = GradedLieBasis::from_structure(self.degrees.clone(), structure, self.m)?;
        let base_fields = self
            .base_fields
            .iter()
            .map(|f| PolyVectorField::new(parse_all(f, self.n, "base_fields")?, weights_x.clone()))
            .collect::<Result<Vec<_>>>()?;
        assemble(
            algebra,
            base_fields,
            weights_x,
            weights_xi,
            degree_weights(&self.degrees)?,
            self.slots_x.clone(),
            self.slots_xi.clone(),
            parse_all(&self.theta, big_n, "theta")?,
            parse_all(&self.theta_inv, big_n, "theta_inv")?,
        )
    }
}

impl CarnotGroup {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&GroupFile::from_group(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GroupFile = serde_json::from_str(text)?;
        file.to_group()
    }
}
