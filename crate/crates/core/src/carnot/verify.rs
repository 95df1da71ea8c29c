use std::collections::BTreeMap;

use num_traits::Zero;
use serde::Serialize;

use super::group::CarnotGroup;
use super::maps;
use crate::error::Result;
use crate::fields::{check_h1, hormander_rank_at_zero, lie_closure, PolyVectorField};
use crate::io::FieldSystem;
use crate::polyalg::{qi, DilationWeights, Rational, WeightedPolynomial};

/// Outcome of the exact identities checked on a lifted group.
#[derive(Clone, Debug, Serialize)]
pub struct LiftReport {
    pub n: usize,
    pub m: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub p: usize,
    pub step: u32,
    pub degrees: Vec<u32>,
    pub basis_words: Vec<String>,
    pub weights_xi: Vec<String>,
    pub q: String,
    pub q_star: String,
    #[serde(rename = "Q")]
    pub big_q: String,
    pub det_dtheta: String,
    pub kernel_family: String,
    pub checks: BTreeMap<String, bool>,
    pub all_passed: bool,
}

impl CarnotGroup {
    /// Expands every structural identity to canonical form and compares.
    pub fn verify(&self) -> Result<LiftReport> {
        let mut checks = BTreeMap::new();
        let big_n = self.dim();
        let n = self.n;
        let law = &self.law;

        // Group axioms.
        let nv3 = 3 * big_n;
        let g3 = maps::vars(nv3, 0, big_n);
        let h3 = maps::vars(nv3, big_n, big_n);
        let k3 = maps::vars(nv3, 2 * big_n, big_n);
        let gh = maps::compose(law, &maps::concat(&g3, &h3))?;
        let hk = maps::compose(law, &maps::concat(&h3, &k3))?;
        let left = maps::compose(law, &maps::concat(&gh, &k3))?;
        let right = maps::compose(law, &maps::concat(&g3, &hk))?;
        checks.insert("group.associativity".into(), maps::all_equal(&left, &right));

        let g = maps::identity(big_n);
        let zero = maps::zeros(big_n, big_n);
        let ok_identity = maps::all_equal(&maps::compose(law, &maps::concat(&g, &zero))?, &g)
            && maps::all_equal(&maps::compose(law, &maps::concat(&zero, &g))?, &g);
        checks.insert("group.identity".into(), ok_identity);
        let g_inv = maps::compose(&self.inverse, &g)?;
        let ok_inverse = maps::compose(law, &maps::concat(&g, &g_inv))?
            .iter()
            .chain(maps::compose(law, &maps::concat(&g_inv, &g))?.iter())
            .all(|p| p.is_zero());
        checks.insert("group.inverse".into(), ok_inverse);

        let w2 = self.weights.concat(&self.weights);
        let mut dil = true;
        for (k, c) in law.iter().enumerate() {
            dil &= c.weighted_degree(&w2)?.admits(self.weights.get(k));
        }
        checks.insert("group.dilation_automorphism".into(), dil);

        // Left invariance: Z(g * h) = D_h(g * h) Z(h).
        let nv2 = 2 * big_n;
        let mut invariant = true;
        let mut homogeneous = true;
        for z in &self.left_invariant {
            let lhs = maps::compose(z.components(), law)?;
            let zh = maps::embed(z.components(), nv2, big_n);
            for (k, lk) in law.iter().enumerate() {
                let mut rhs = WeightedPolynomial::zero(nv2);
                for (l, zl) in zh.iter().enumerate() {
                    if !zl.is_zero() {
                        rhs = rhs.try_add(&lk.partial(big_n + l)?.try_mul(zl)?)?;
                    }
                }
                invariant &= rhs == lhs[k];
            }
        }
        for z in self.z_fields() {
            homogeneous &= z.is_homogeneous_of_degree(&qi(1))?;
        }
        checks.insert("fields.left_invariance".into(), invariant);
        checks.insert("fields.degree_one".into(), homogeneous);

        // Brackets of the transported fields reproduce the structure constants.
        let li = &self.left_invariant;
        let mut brackets = true;
        for i in 0..big_n {
            for j in i + 1..big_n {
                let b = li[i].bracket(&li[j])?;
                let mut expect = PolyVectorField::zero(&self.weights);
                for (k, c) in self.algebra.bracket_coords(i, j).iter().enumerate() {
                    if !c.is_zero() {
                        expect = expect.add(&li[k].scale(c))?;
                    }
                }
                brackets &= b == expect;
            }
        }
        checks.insert("fields.bracket_preservation".into(), brackets);

        checks.insert("lifting.projection".into(), self.check_projection()?);
        checks.insert("lifting.monomials".into(), self.check_lifting_monomials()?);

        let (tri, hom) = self.check_remainders()?;
        checks.insert("remainder.triangular".into(), tri);
        checks.insert("remainder.homogeneous".into(), hom);

        let roundtrip = maps::all_equal(
            &maps::compose(&self.theta, &self.theta_inv)?,
            &maps::identity(big_n),
        );
        checks.insert("coordinates.roundtrip".into(), roundtrip);

        checks.insert("conv_map.structure".into(), self.check_conv_structure()?);

        let nv = 2 * n + self.p;
        let xy = maps::vars(nv, 0, 2 * n);
        let psi_after = maps::compose(self.psi(), &maps::concat(&xy, &self.psi_inv))?;
        checks.insert(
            "psi.roundtrip".into(),
            maps::all_equal(&psi_after, &maps::vars(nv, 2 * n, self.p)),
        );
        let straight_ok = maps::all_equal(
            &self.straightened[n..],
            &maps::vars(nv, 2 * n, self.p),
        );
        checks.insert("psi.straightens".into(), straight_ok);

        checks.insert("phi_xy.identity".into(), self.check_phi_identity()?);

        let all_passed = checks.values().all(|&b| b);
        Ok(LiftReport {
            n,
            m: self.m(),
            big_n,
            p: self.p,
            step: self.step(),
            degrees: self.algebra.degrees().to_vec(),
            basis_words: if self.algebra.has_fields() {
                self.algebra.word_labels()
            } else {
                Vec::new()
            },
            weights_xi: self.weights_xi.sigma().iter().map(|s| s.to_string()).collect(),
            q: self.q().to_string(),
            q_star: self.q_star().to_string(),
            big_q: self.big_q().to_string(),
            det_dtheta: self.det_dtheta.to_string(),
            kernel_family: self.kernel_family().name().into(),
            checks,
            all_passed,
        })
    }

    /// The `x`-part of each `Z_i` is `X_i`, depending on `x` only.
    fn check_projection(&self) -> Result<bool> {
        let big_n = self.dim();
        for (z, x) in self.z_fields().iter().zip(&self.base_fields) {
            for i in 0..self.n {
                if z.component(i) != &x.component(i).embed(big_n, 0) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// `Z_i(f o pi) = (X_i f) o pi` for monomials of weighted degree at most the step.
    fn check_lifting_monomials(&self) -> Result<bool> {
        let big_n = self.dim();
        let top = qi(self.step().max(1) as i64);
        for e in monomials_up_to(&self.weights_x, &top) {
            let f = WeightedPolynomial::monomial(e, qi(1));
            let lifted = f.embed(big_n, 0);
            for (z, x) in self.z_fields().iter().zip(&self.base_fields) {
                if z.apply(&lifted)? != x.apply(&f)?.embed(big_n, 0) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// `d/dxi_k` coefficient of `R_j`: only lighter variables, degree `sigma*_k - 1`.
    fn check_remainders(&self) -> Result<(bool, bool)> {
        let (mut tri, mut hom) = (true, true);
        let w = &self.weights;
        for z in self.z_fields() {
            for k in 0..self.p {
                let c = z.component(self.n + k);
                let sk = self.weights_xi.get(k);
                for v in c.variables() {
                    if w.get(v) >= sk {
                        tri = false;
                    }
                }
                hom &= c.weighted_degree(w)?.admits(&(sk - qi(1)));
            }
        }
        Ok((tri, hom))
    }

    /// `F_i = y_i - x_i + p_i`, `F_{n+k} = eta_k + q_k`, with `p_i, q_k` vanishing at `x = 0`.
    fn check_conv_structure(&self) -> Result<bool> {
        let n = self.n;
        let nv = 2 * n + self.p;
        let zero_x: Vec<(usize, Rational)> = (0..n).map(|i| (i, Rational::zero())).collect();
        let x = maps::vars(nv, 0, n);
        let y = maps::vars(nv, n, n);
        let eta = maps::vars(nv, 2 * n, self.p);
        let mut ok = true;
        for (k, f) in self.conv_map.iter().enumerate() {
            let linear = if k < n {
                y[k].try_sub(&x[k])?
            } else {
                eta[k - n].clone()
            };
            let rest = f.try_sub(&linear)?;
            ok &= rest.substitute_values(&zero_x).is_zero();
        }
        // F(x, x, 0) = 0.
        let mut subs = maps::concat(&x, &x);
        subs.extend(maps::zeros(nv, self.p));
        ok &= maps::compose(&self.conv_map, &subs)?.iter().all(|p| p.is_zero());
        Ok(ok)
    }

    /// `(x,0)^{-1} * (y, phi(u)) = (x,u)^{-1} * (y,0)`, and `x`-part of the product is `y`.
    fn check_phi_identity(&self) -> Result<bool> {
        let n = self.n;
        let nv = 2 * n + self.p;
        let x = maps::vars(nv, 0, n);
        let y = maps::vars(nv, n, n);
        let u = maps::vars(nv, 2 * n, self.p);
        let lhs = maps::compose(
            &self.conv_map,
            &maps::concat(&maps::concat(&x, &y), &self.phi_xy),
        )?;
        let xu_inv = maps::compose(&self.inverse, &maps::concat(&x, &u))?;
        let rhs = maps::compose(
            &self.law,
            &maps::concat(&xu_inv, &maps::concat(&y, &maps::zeros(nv, self.p))),
        )?;
        Ok(maps::all_equal(&lhs, &rhs))
    }
}

/// Exponent vectors of monomials with weighted degree in `0..=top`.
pub fn monomials_up_to(w: &DilationWeights, top: &Rational) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; w.len()];
    fn rec(w: &DilationWeights, top: &Rational, i: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == w.len() {
            out.push(cur.clone());
            return;
        }
        let mut k = 0u32;
        loop {
            cur[i] = k;
            if &w.monomial_degree(cur) > top {
                break;
            }
            rec(w, top, i + 1, cur, out);
            k += 1;
        }
        cur[i] = 0;
    }
    rec(w, top, 0, &mut cur, &mut out);
    out
}

/// Full pipeline from a field system: hypothesis checks, closure, lift, verification.
pub fn lift_system(system: &FieldSystem) -> Result<(CarnotGroup, LiftReport)> {
    let h1 = check_h1(&system.fields, &system.weights)?;
    if !h1.ok {
        return Err(crate::Error::Hypothesis(format!(
            "(H.1) fails: {}",
            serde_json::to_string(&h1)?
        )));
    }
    let rank = hormander_rank_at_zero(&system.fields)?;
    if !rank.passes {
        return Err(crate::Error::Hypothesis(format!(
            "(H.2) fails: rank {} < n = {} at the origin",
            rank.rank, rank.n
        )));
    }
    if !system.weights.all_integer() {
        return Err(crate::Error::Unsupported(
            "non-integer weights passed (H.1) but cannot be lifted to a graded group".into(),
        ));
    }
    let basis = lie_closure(&system.fields)?;
    let group = super::build_split_coordinates(&basis, &system.weights)?;
    let report = group.verify()?;
    Ok((group, report))
}
