use num_traits::{One, Signed, ToPrimitive, Zero};

use super::bch::bch_poly;
use super::flow::flow_time_one_with_params;
use super::maps::{self, PolyMap};
use super::numerics::GroupNumerics;
use crate::error::{Error, Result};
use crate::fields::{GradedLieBasis, PolyVectorField};
use crate::polyalg::{det, qi, DilationWeights, EchelonBasis, Rational, WeightedPolynomial};

/// Homogeneous Carnot group on `R^N = R^n_x x R^p_xi` lifting a system
/// `X_1..X_m` on `R^n`, with `pi(x, xi) = x`.
#[derive(Clone, Debug)]
pub struct CarnotGroup {
    pub(crate) n: usize,
    pub(crate) p: usize,
    pub(crate) algebra: GradedLieBasis,
    pub(crate) base_fields: Vec<PolyVectorField>,
    pub(crate) weights_x: DilationWeights,
    pub(crate) weights_xi: DilationWeights,
    pub(crate) weights: DilationWeights,
    pub(crate) exp_weights: DilationWeights,
    pub(crate) slots_x: Vec<usize>,
    pub(crate) slots_xi: Vec<usize>,
    /// Exponential coordinates `a` to split coordinates `(x, xi)`.
    pub(crate) theta: PolyMap,
    pub(crate) theta_inv: PolyMap,
    pub(crate) det_dtheta: Rational,
    pub(crate) exp_law: PolyMap,
    pub(crate) law: PolyMap,
    pub(crate) inverse: PolyMap,
    pub(crate) left_invariant: Vec<PolyVectorField>,
    pub(crate) conv_map: PolyMap,
    pub(crate) psi_inv: PolyMap,
    pub(crate) straightened: PolyMap,
    pub(crate) phi_xy: PolyMap,
    pub(crate) numerics: GroupNumerics,
}

/// Graded lift of a Hörmander system.
///
/// `Phi(a)` is the time-one flow of `sum a_k E_k` from the origin; its linear
/// part selects which exponential slots become `x` and which stay as `xi`.
pub fn build_split_coordinates(
    algebra: &GradedLieBasis,
    weights_x: &DilationWeights,
) -> Result<CarnotGroup> {
    let n = weights_x.len();
    let big_n = algebra.dim();
    if !algebra.has_fields() {
        return Err(Error::InvalidInput(
            "split coordinates need the basis realized as vector fields".into(),
        ));
    }
    if big_n == n {
        return Err(Error::NoLiftingNeeded);
    }
    if big_n < n {
        return Err(Error::Hypothesis(format!(
            "Lie algebra has dimension {big_n} < n = {n}; the rank condition fails"
        )));
    }
    let nv = n + big_n;
    let mut combined = vec![WeightedPolynomial::zero(nv); n];
    for (k, e) in algebra.basis().iter().enumerate() {
        let a_k = WeightedPolynomial::var(nv, n + k);
        for (i, c) in e.components().iter().enumerate() {
            if !c.is_zero() {
                combined[i] = combined[i].try_add(&c.embed(nv, 0).try_mul(&a_k)?)?;
            }
        }
    }
    let flow = flow_time_one_with_params(&combined, weights_x, big_n)?;
    let zero_x: Vec<(usize, Rational)> = (0..n).map(|i| (i, Rational::zero())).collect();
    let to_a: Vec<Option<usize>> = (0..nv).map(|i| i.checked_sub(n)).collect();
    let phi = flow
        .iter()
        .map(|p| p.substitute_values(&zero_x).remap(big_n, &to_a))
        .collect::<std::result::Result<Vec<_>, _>>()?;

    let mut span: EchelonBasis<usize> = EchelonBasis::new();
    let (mut slots_x, mut slots_xi) = (Vec::new(), Vec::new());
    for k in 0..big_n {
        let col = phi
            .iter()
            .enumerate()
            .map(|(i, p)| (i, p.linear_coefficients()[k].clone()))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        if span.insert(&col) {
            slots_x.push(k);
        } else {
            slots_xi.push(k);
        }
    }
    if slots_x.len() != n {
        return Err(Error::Internal(format!(
            "evaluation map has rank {} at the origin, expected {n}",
            slots_x.len()
        )));
    }
    let degrees = algebra.degrees();
    let exp_weights = degree_weights(degrees)?;
    let weights_xi = DilationWeights::graded(slots_xi.iter().map(|&k| qi(degrees[k] as i64)).collect())?;

    let mut theta = phi.clone();
    for &k in &slots_xi {
        theta.push(WeightedPolynomial::var(big_n, k));
    }
    let theta_inv = invert_theta(&phi, &slots_x, &slots_xi, degrees, weights_x)?;
    if !maps::all_equal(&maps::compose(&theta, &theta_inv)?, &maps::identity(big_n))
        || !maps::all_equal(&maps::compose(&theta_inv, &theta)?, &maps::identity(big_n))
    {
        return Err(Error::Internal("graded coordinate change failed to invert".into()));
    }
    let base_fields = algebra.basis()[..algebra.num_generators()].to_vec();
    assemble(
        algebra.clone(),
        base_fields,
        weights_x.clone(),
        weights_xi,
        exp_weights,
        slots_x,
        slots_xi,
        theta,
        theta_inv,
    )
}

pub(crate) fn degree_weights(degrees: &[u32]) -> Result<DilationWeights> {
    Ok(DilationWeights::graded(
        degrees.iter().map(|&d| qi(d as i64)).collect(),
    )?)
}

/// Solves `x = Phi(a)`, `xi = a_J` for `a`, one weight level at a time.
fn invert_theta(
    phi: &[WeightedPolynomial],
    slots_x: &[usize],
    slots_xi: &[usize],
    degrees: &[u32],
    weights_x: &DilationWeights,
) -> Result<PolyMap> {
    let n = phi.len();
    let big_n = degrees.len();
    let mut known: Vec<Option<WeightedPolynomial>> = vec![None; big_n];
    for (j, &k) in slots_xi.iter().enumerate() {
        known[k] = Some(WeightedPolynomial::var(big_n, n + j));
    }
    let mut levels: Vec<u32> = degrees.to_vec();
    levels.sort_unstable();
    levels.dedup();
    for w in levels {
        let unknown: Vec<usize> = slots_x.iter().copied().filter(|&k| degrees[k] == w).collect();
        let rows: Vec<usize> = (0..n).filter(|&i| weights_x.get(i) == &qi(w as i64)).collect();
        if unknown.len() != rows.len() {
            return Err(Error::Internal(format!(
                "weight level {w}: {} coordinates but {} free slots",
                rows.len(),
                unknown.len()
            )));
        }
        if rows.is_empty() {
            continue;
        }
        let mut matrix = Vec::new();
        let mut rhs = Vec::new();
        for &i in &rows {
            let lin = phi[i].linear_coefficients();
            let mut rest = phi[i].clone();
            for &k in &unknown {
                let mut e = vec![0; big_n];
                e[k] = 1;
                rest = rest.try_sub(&WeightedPolynomial::monomial(e, lin[k].clone()))?;
            }
            if unknown.iter().any(|&k| rest.depends_on(k)) {
                return Err(Error::Internal("evaluation map is not graded-triangular".into()));
            }
            let subs: Vec<WeightedPolynomial> = (0..big_n)
                .map(|k| match &known[k] {
                    Some(p) => Ok(p.clone()),
                    None if !rest.depends_on(k) => Ok(WeightedPolynomial::zero(big_n)),
                    None => Err(Error::Internal("evaluation map is not graded-triangular".into())),
                })
                .collect::<Result<_>>()?;
            rhs.push(WeightedPolynomial::var(big_n, i).try_sub(&rest.compose(&subs)?)?);
            matrix.push(unknown.iter().map(|&k| lin[k].clone()).collect::<Vec<_>>());
        }
        if det(&matrix).is_zero() {
            return Err(Error::Internal(format!("singular Jacobian block at weight {w}")));
        }
        let inv = inverse_matrix(&matrix)?;
        for (r, &k) in unknown.iter().enumerate() {
            let mut acc = WeightedPolynomial::zero(big_n);
            for (c, b) in rhs.iter().enumerate() {
                if !inv[r][c].is_zero() {
                    acc = acc.try_add(&b.scale(&inv[r][c]))?;
                }
            }
            known[k] = Some(acc);
        }
    }
    known
        .into_iter()
        .map(|p| p.ok_or_else(|| Error::Internal("unsolved exponential coordinate".into())))
        .collect()
}

fn inverse_matrix(m: &[Vec<Rational>]) -> Result<Vec<Vec<Rational>>> {
    let k = m.len();
    let mut cols = Vec::with_capacity(k);
    for j in 0..k {
        let mut e = vec![Rational::zero(); k];
        e[j] = Rational::one();
        cols.push(crate::polyalg::solve_square(&m.to_vec(), &e)?);
    }
    Ok((0..k).map(|r| (0..k).map(|c| cols[c][r].clone()).collect()).collect())
}

/// Left-invariant fields in exponential coordinates: `Z_k(a) = d/db_k (a * b)|_{b=0}`.
fn exp_left_invariant(exp_law: &[WeightedPolynomial], big_n: usize) -> Result<Vec<PolyMap>> {
    let zero_b: Vec<(usize, Rational)> = (big_n..2 * big_n).map(|i| (i, Rational::zero())).collect();
    (0..big_n)
        .map(|k| {
            let cols = exp_law
                .iter()
                .map(|l| Ok(l.partial(big_n + k)?.substitute_values(&zero_b)))
                .collect::<Result<Vec<_>>>()?;
            maps::truncate_vars(&cols, big_n)
        })
        .collect()
}

/// Everything downstream of the Lie algebra and the coordinate change.
#[allow(clippy::too_many_arguments)]
pub(crate) fn assemble(
    algebra: GradedLieBasis,
    base_fields: Vec<PolyVectorField>,
    weights_x: DilationWeights,
    weights_xi: DilationWeights,
    exp_weights: DilationWeights,
    slots_x: Vec<usize>,
    slots_xi: Vec<usize>,
    theta: PolyMap,
    theta_inv: PolyMap,
) -> Result<CarnotGroup> {
    let n = weights_x.len();
    let p = weights_xi.len();
    let big_n = n + p;
    let weights = weights_x.concat(&weights_xi);

    let a = maps::vars(2 * big_n, 0, big_n);
    let b = maps::vars(2 * big_n, big_n, big_n);
    let exp_law = bch_poly(&algebra, &a, &b)?;

    let inner = maps::concat(
        &maps::embed(&theta_inv, 2 * big_n, 0),
        &maps::embed(&theta_inv, 2 * big_n, big_n),
    );
    let law = maps::compose(&theta, &maps::compose(&exp_law, &inner)?)?;
    let inverse = maps::compose(&theta, &maps::neg(&theta_inv))?;

    let dtheta = maps::jacobian(&theta)?;
    let det_dtheta = det(
        &dtheta
            .iter()
            .map(|row| row.iter().map(|p| p.constant_term()).collect())
            .collect(),
    );
    let z_exp = exp_left_invariant(&exp_law, big_n)?;
    let left_invariant = z_exp
        .iter()
        .map(|z| {
            let pushed = dtheta
                .iter()
                .map(|row| {
                    let mut acc = WeightedPolynomial::zero(big_n);
                    for (d, c) in row.iter().zip(z) {
                        if !d.is_zero() && !c.is_zero() {
                            acc = acc.try_add(&d.try_mul(c)?)?;
                        }
                    }
                    Ok(acc)
                })
                .collect::<Result<Vec<_>>>()?;
            PolyVectorField::new(maps::compose(&pushed, &theta_inv)?, weights.clone())
        })
        .collect::<Result<Vec<_>>>()?;

    // F(x, y, eta) = (x, 0)^{-1} * (y, eta), variables (x, y, eta).
    let nv = 2 * n + p;
    let x = maps::vars(nv, 0, n);
    let y = maps::vars(nv, n, n);
    let eta = maps::vars(nv, 2 * n, p);
    let x0 = maps::concat(&x, &maps::zeros(nv, p));
    let x0_inv = maps::compose(&inverse, &x0)?;
    let conv_map = maps::compose(&law, &maps::concat(&x0_inv, &maps::concat(&y, &eta)))?;

    // Psi^{-1} by back substitution, same variable layout with u in place of eta.
    let mut psi_inv: PolyMap = Vec::with_capacity(p);
    for k in 0..p {
        let q_k = conv_map[n + k].try_sub(&eta[k])?;
        if (k..p).any(|j| q_k.depends_on(2 * n + j)) {
            return Err(Error::Internal(format!(
                "xi-component {} of the convolution map is not triangular",
                k + 1
            )));
        }
        let mut subs = maps::concat(&x, &y);
        subs.extend(psi_inv.iter().cloned());
        subs.extend(maps::zeros(nv, p - k));
        psi_inv.push(eta[k].try_sub(&q_k.compose(&subs)?)?);
    }
    let straightened = maps::compose(
        &conv_map,
        &maps::concat(&maps::concat(&x, &y), &psi_inv),
    )?;

    // phi_{x,y}(u) = pi_p((x,0) * (x,u)^{-1} * (y,0)).
    let xu_inv = maps::compose(&inverse, &maps::concat(&x, &eta))?;
    let y0 = maps::concat(&y, &maps::zeros(nv, p));
    let tail = maps::compose(&law, &maps::concat(&xu_inv, &y0))?;
    let full = maps::compose(&law, &maps::concat(&x0, &tail))?;
    let phi_xy = full[n..].to_vec();

    let numerics = GroupNumerics::new(
        &law,
        &inverse,
        &theta,
        &theta_inv,
        &conv_map,
        &straightened,
        &psi_inv,
        &left_invariant[..algebra.num_generators()],
    );
    Ok(CarnotGroup {
        n,
        p,
        algebra,
        base_fields,
        weights_x,
        weights_xi,
        weights,
        exp_weights,
        slots_x,
        slots_xi,
        theta,
        theta_inv,
        det_dtheta,
        exp_law,
        law,
        inverse,
        left_invariant,
        conv_map,
        psi_inv,
        straightened,
        phi_xy,
        numerics,
    })
}

impl CarnotGroup {
    /// Euclidean `R^{n+p}` viewed as a lift of `{d_1, ..., d_n}` on `R^n`:
    /// the extra generators `d_xi` are lifts of the zero field.
    pub fn abelian(n: usize, p: usize) -> Result<Self> {
        let big_n = n + p;
        if n == 0 {
            return Err(Error::InvalidInput("abelian lift needs n >= 1".into()));
        }
        let zero = Rational::zero();
        let algebra = GradedLieBasis::from_structure(
            vec![1; big_n],
            vec![vec![vec![zero; big_n]; big_n]; big_n],
            big_n,
        )?;
        let wx = DilationWeights::uniform(n);
        let base_fields = (0..big_n)
            .map(|k| {
                if k < n {
                    PolyVectorField::coordinate(&wx, k)
                } else {
                    PolyVectorField::zero(&wx)
                }
            })
            .collect();
        assemble(
            algebra,
            base_fields,
            wx,
            DilationWeights::uniform(p),
            DilationWeights::uniform(big_n),
            (0..n).collect(),
            (n..big_n).collect(),
            maps::identity(big_n),
            maps::identity(big_n),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Total dimension `N = n + p`.
    pub fn dim(&self) -> usize {
        self.n + self.p
    }

    /// Number of lifted generators.
    pub fn m(&self) -> usize {
        self.algebra.num_generators()
    }

    pub fn step(&self) -> u32 {
        self.algebra.step()
    }

    pub fn algebra(&self) -> &GradedLieBasis {
        &self.algebra
    }

    pub fn base_fields(&self) -> &[PolyVectorField] {
        &self.base_fields
    }

    pub fn weights_x(&self) -> &DilationWeights {
        &self.weights_x
    }

    pub fn weights_xi(&self) -> &DilationWeights {
        &self.weights_xi
    }

    pub fn weights(&self) -> &DilationWeights {
        &self.weights
    }

    pub fn exp_weights(&self) -> &DilationWeights {
        &self.exp_weights
    }

    pub fn slots_x(&self) -> &[usize] {
        &self.slots_x
    }

    pub fn slots_xi(&self) -> &[usize] {
        &self.slots_xi
    }

    pub fn q(&self) -> Rational {
        self.weights_x.homogeneous_dimension()
    }

    pub fn q_star(&self) -> Rational {
        self.weights_xi.homogeneous_dimension()
    }

    pub fn big_q(&self) -> Rational {
        self.q() + self.q_star()
    }

    pub fn q_f64(&self) -> f64 {
        self.q().to_f64().unwrap()
    }

    pub fn big_q_f64(&self) -> f64 {
        self.big_q().to_f64().unwrap()
    }

    /// Group law `(g, h) -> g * h` on `2N` variables.
    pub fn law(&self) -> &[WeightedPolynomial] {
        &self.law
    }

    pub fn inverse(&self) -> &[WeightedPolynomial] {
        &self.inverse
    }

    pub fn exp_law(&self) -> &[WeightedPolynomial] {
        &self.exp_law
    }

    pub fn theta(&self) -> &[WeightedPolynomial] {
        &self.theta
    }

    pub fn theta_inv(&self) -> &[WeightedPolynomial] {
        &self.theta_inv
    }

    /// Constant Jacobian determinant of the exponential-to-split change.
    pub fn det_dtheta(&self) -> &Rational {
        &self.det_dtheta
    }

    pub fn abs_det_dtheta_f64(&self) -> f64 {
        self.det_dtheta.abs().to_f64().unwrap()
    }

    /// Lifted generators `Z_1..Z_m`.
    pub fn z_fields(&self) -> &[PolyVectorField] {
        &self.left_invariant[..self.m()]
    }

    /// Left-invariant fields for the whole basis `E_1..E_N`.
    pub fn left_invariant_fields(&self) -> &[PolyVectorField] {
        &self.left_invariant
    }

    /// Remainders `R_i = Z_i - X_i`: the `xi`-components of `Z_i`.
    pub fn r_fields(&self) -> Vec<PolyVectorField> {
        let big_n = self.dim();
        self.z_fields()
            .iter()
            .map(|z| {
                let comps = (0..big_n)
                    .map(|i| {
                        if i < self.n {
                            WeightedPolynomial::zero(big_n)
                        } else {
                            z.component(i).clone()
                        }
                    })
                    .collect();
                PolyVectorField::new(comps, self.weights.clone()).unwrap()
            })
            .collect()
    }

    /// `F(x, y, eta) = (x, 0)^{-1} * (y, eta)` in variables `(x, y, eta)`.
    pub fn conv_map(&self) -> &[WeightedPolynomial] {
        &self.conv_map
    }

    /// `Psi_{x,y}^{-1}(u)` in variables `(x, y, u)`.
    pub fn psi_inv(&self) -> &[WeightedPolynomial] {
        &self.psi_inv
    }

    /// `Psi_{x,y}(eta)`, the `xi`-part of `F`.
    pub fn psi(&self) -> &[WeightedPolynomial] {
        &self.conv_map[self.n..]
    }

    /// `F(x, y, Psi^{-1}(u))` in variables `(x, y, u)`; its `xi`-part is `u`.
    pub fn straightened_conv_map(&self) -> &[WeightedPolynomial] {
        &self.straightened
    }

    pub fn phi_xy(&self) -> &[WeightedPolynomial] {
        &self.phi_xy
    }

    pub fn numerics(&self) -> &GroupNumerics {
        &self.numerics
    }

    pub fn mul(&self, g: &[f64], h: &[f64]) -> Vec<f64> {
        let mut gh = g.to_vec();
        gh.extend_from_slice(h);
        self.numerics.law.eval(&gh)
    }

    pub fn inv(&self, g: &[f64]) -> Vec<f64> {
        self.numerics.inverse.eval(g)
    }

    /// `D_lambda` in split coordinates.
    pub fn dilate(&self, lambda: f64, g: &[f64]) -> Vec<f64> {
        self.weights.dilate(lambda, g)
    }

    pub fn conv(&self, x: &[f64], y: &[f64], eta: &[f64]) -> Vec<f64> {
        let v: Vec<f64> = x.iter().chain(y).chain(eta).copied().collect();
        self.numerics.conv_map.eval(&v)
    }

    pub fn psi_eval(&self, x: &[f64], y: &[f64], eta: &[f64]) -> Vec<f64> {
        self.conv(x, y, eta)[self.n..].to_vec()
    }

    pub fn psi_inv_eval(&self, x: &[f64], y: &[f64], u: &[f64]) -> Vec<f64> {
        let v: Vec<f64> = x.iter().chain(y).chain(u).copied().collect();
        self.numerics.psi_inv.eval(&v)
    }

    pub fn phi_xy_eval(&self, x: &[f64], y: &[f64], u: &[f64]) -> Vec<f64> {
        let v: Vec<f64> = x.iter().chain(y).chain(u).copied().collect();
        self.phi_xy.iter().map(|p| p.eval_f64(&v).unwrap()).collect()
    }

    pub fn to_exp(&self, g: &[f64]) -> Vec<f64> {
        self.numerics.theta_inv.eval(g)
    }

    pub fn from_exp(&self, a: &[f64]) -> Vec<f64> {
        self.numerics.theta.eval(a)
    }

    /// Which heat-kernel evaluator applies.
    pub fn kernel_family(&self) -> KernelAvailability {
        if self.algebra.is_abelian() {
            KernelAvailability::Abelian
        } else if self.step() == 2 {
            let second = self.algebra.degrees().iter().filter(|&&d| d == 2).count();
            if second <= 2 {
                KernelAvailability::Step2
            } else {
                KernelAvailability::Unavailable(format!(
                    "step-2 group with {second}-dimensional centre (at most 2 supported)"
                ))
            }
        } else {
            KernelAvailability::Unavailable(format!("no heat-kernel formula for step {}", self.step()))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KernelAvailability {
    Abelian,
    Step2,
    Unavailable(String),
}

impl KernelAvailability {
    pub fn name(&self) -> &'static str {
        match self {
            KernelAvailability::Abelian => "abelian",
            KernelAvailability::Step2 => "step2",
            KernelAvailability::Unavailable(_) => "unavailable",
        }
    }
}
