//! Heat kernel of `sum E_i^2` on a step-two group in exponential coordinates,
//! as an oscillatory integral over the dual of the centre.
//!
//! With `Omega(lambda) = sum_k lambda_k C_k` (the skew matrices of structure
//! constants into the centre) and `nu_l` the eigenvalues of `Omega^T Omega`,
//!
//! ```text
//! p_t(x, z) = (2 pi)^{-p} int cos(lambda.z) (4 pi t)^{-m/2}
//!             prod_l sqrt(s(t sqrt(nu_l))) exp(-x^T U diag(g(t sqrt(nu_l))) U^T x / 4t) dlambda
//! ```
//!
//! where `s(u) = u / sinh u` and `g(u) = u coth u`. The radial variable is
//! rescaled by `t` so that the quadrature rule depends only on `x / sqrt(t)`
//! and `z / t`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, SymmetricEigen};
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::fields::GradedLieBasis;
use crate::quad::gauss_legendre;

const ORDER: usize = 16;
const AMPLITUDE_EPS: f64 = 1e-17;
const MAX_PANELS: usize = 1 << 13;
const MAX_ANGLES: usize = 1 << 11;

#[derive(Clone, Debug)]
struct Spectrum {
    /// Distinct nonzero `sqrt(kappa)` of `C^T C` for unit `lambda`, with the
    /// eigenvector columns belonging to each.
    groups: Vec<(f64, Vec<usize>)>,
    /// Columns are eigenvectors.
    vectors: DMatrix<f64>,
}

impl Spectrum {
    fn of(c: &DMatrix<f64>) -> Self {
        let eig = SymmetricEigen::new(c.transpose() * c);
        let roots: Vec<f64> = eig.eigenvalues.iter().map(|v| v.max(0.0).sqrt()).collect();
        let top = roots.iter().cloned().fold(0.0, f64::max);
        let mut order: Vec<usize> = (0..roots.len()).filter(|&l| roots[l] > 1e-12 * top).collect();
        order.sort_by(|&a, &b| roots[a].total_cmp(&roots[b]));
        let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
        for l in order {
            match groups.last_mut() {
                Some((r, members)) if (roots[l] - *r).abs() <= 1e-9 * top => members.push(l),
                _ => groups.push((roots[l], vec![l])),
            }
        }
        for (r, members) in &mut groups {
            *r = members.iter().map(|&l| roots[l]).sum::<f64>() / members.len() as f64;
        }
        Spectrum {
            groups,
            vectors: eig.eigenvectors,
        }
    }

    /// Squared length of the projection of `x` on each eigenspace.
    fn weights(&self, x: &[f64]) -> Vec<f64> {
        self.groups
            .iter()
            .map(|(_, members)| {
                members
                    .iter()
                    .map(|&l| {
                        let v: f64 = (0..x.len()).map(|i| self.vectors[(i, l)] * x[i]).sum();
                        v * v
                    })
                    .sum()
            })
            .collect()
    }

    /// Non-oscillating part at `mu`, without the factor `exp(-|x|^2/4t)`.
    #[inline]
    fn amplitude(&self, mu: f64, y2: &[f64], t: f64) -> f64 {
        let mut prod = 1.0;
        let mut expo = 0.0;
        for ((r, members), w) in self.groups.iter().zip(y2) {
            let (s, gm1) = s_and_g_minus_one(mu * r);
            let k = members.len();
            prod *= if k % 2 == 0 { s.powi(k as i32 / 2) } else { s.powf(k as f64 / 2.0) };
            expo += w * gm1;
        }
        if expo == 0.0 {
            prod
        } else {
            prod * (-expo / (4.0 * t)).exp()
        }
    }

    fn top_root(&self) -> f64 {
        self.groups.last().map(|g| g.0).unwrap_or(0.0)
    }
}

/// Composite rule on `[0, mu_max]` with the `x`-independent factors of the
/// amplitude at each node.
#[derive(Debug)]
struct NodeTable {
    mu: Vec<f64>,
    /// Weight times `prod s^{k/2}`.
    base: Vec<f64>,
    /// `g - 1` per node and eigenvalue group, row-major.
    gm1: Vec<f64>,
}

impl NodeTable {
    fn new(s: &Spectrum, mu_max: f64, panels: usize) -> Self {
        let rule = gauss_legendre(ORDER);
        let width = mu_max / panels as f64;
        let groups = s.groups.len();
        let mut table = NodeTable {
            mu: Vec::with_capacity(panels * ORDER),
            base: Vec::with_capacity(panels * ORDER),
            gm1: Vec::with_capacity(panels * ORDER * groups),
        };
        for k in 0..panels {
            for (mu, wt) in rule.mapped(k as f64 * width, (k + 1) as f64 * width) {
                let mut prod = wt;
                for (r, members) in &s.groups {
                    let (sv, gm1) = s_and_g_minus_one(mu * r);
                    let k = members.len();
                    prod *= if k % 2 == 0 { sv.powi(k as i32 / 2) } else { sv.powf(k as f64 / 2.0) };
                    table.gm1.push(gm1);
                }
                table.mu.push(mu);
                table.base.push(prod);
            }
        }
        table
    }

    /// `(sum a_i cos(mu_i w), sum a_i)` with `a_i` the amplitude at node `i`.
    fn sum(&self, y2: &[f64], t: f64, w: f64) -> (f64, f64) {
        let groups = y2.len();
        let active = y2.iter().any(|v| *v != 0.0);
        let (mut val, mut env) = (0.0, 0.0);
        for (i, (&mu, &b)) in self.mu.iter().zip(&self.base).enumerate() {
            let a = if active {
                let g = &self.gm1[i * groups..(i + 1) * groups];
                let expo: f64 = g.iter().zip(y2).map(|(g, y)| g * y).sum();
                b * (-expo / (4.0 * t)).exp()
            } else {
                b
            };
            env += a;
            val += a * (mu * w).cos();
        }
        (val, env)
    }
}

/// `(u / sinh u, u coth u - 1)`.
#[inline]
fn s_and_g_minus_one(u: f64) -> (f64, f64) {
    if u < 1e-4 {
        (1.0 - u * u / 6.0, u * u / 3.0)
    } else {
        let d = -(-2.0 * u).exp_m1();
        let e = 1.0 - d;
        (2.0 * u * (-u).exp() / d, u * (1.0 + e) / d - 1.0)
    }
}

/// Rounds up to the grid `2^{k/4}`, so that rules can be shared.
fn quantize(mu: f64) -> f64 {
    2f64.powf((4.0 * mu.log2()).ceil() / 4.0)
}

/// Quadrature rule used for one evaluation; fixed rules make evaluations at
/// nearby points smooth functions of the point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Step2Plan {
    pub mu_max: f64,
    pub panels: usize,
    pub angles: usize,
}

#[derive(Debug)]
pub struct Step2Kernel {
    m: usize,
    centre: Vec<DMatrix<f64>>,
    /// One-dimensional centre: spectrum of `C_1`.
    line: Option<Spectrum>,
    /// Two-dimensional centre: spectra on uniform angle grids, by grid size.
    angle_cache: Mutex<HashMap<usize, Arc<Vec<Spectrum>>>>,
    /// One-dimensional centre: rules by `(mu_max bits, panels)`.
    tables: Mutex<HashMap<(u64, usize), Arc<NodeTable>>>,
    omega_norm: f64,
}

impl Clone for Step2Kernel {
    fn clone(&self) -> Self {
        Step2Kernel {
            m: self.m,
            centre: self.centre.clone(),
            line: self.line.clone(),
            angle_cache: Mutex::new(HashMap::new()),
            tables: Mutex::new(HashMap::new()),
            omega_norm: self.omega_norm,
        }
    }
}

impl Step2Kernel {
    /// Reads `C_k[i][j] = c_{ij}^{m+k}` from a basis with `m` elements of
    /// degree one followed by the centre.
    pub fn new(algebra: &GradedLieBasis) -> Result<Self> {
        let degrees = algebra.degrees();
        let m = degrees.iter().filter(|&&d| d == 1).count();
        let p2 = degrees.len() - m;
        if degrees.iter().any(|&d| d > 2) || !(1..=2).contains(&p2) {
            return Err(Error::Unsupported(format!(
                "step-two kernel needs a centre of dimension 1 or 2, found degrees {degrees:?}"
            )));
        }
        if algebra.num_generators() != m {
            return Err(Error::Unsupported(
                "step-two kernel needs the generators to span the first layer".into(),
            ));
        }
        let centre: Vec<DMatrix<f64>> = (0..p2)
            .map(|k| {
                DMatrix::from_fn(m, m, |i, j| algebra.c(i, j, m + k).to_f64().unwrap_or(f64::NAN))
            })
            .collect();
        let mut kernel = Step2Kernel {
            m,
            line: (p2 == 1).then(|| Spectrum::of(&centre[0])),
            centre,
            angle_cache: Mutex::new(HashMap::new()),
            tables: Mutex::new(HashMap::new()),
            omega_norm: 0.0,
        };
        kernel.omega_norm = match &kernel.line {
            Some(s) => s.top_root(),
            None => kernel
                .angle_spectra(512)
                .iter()
                .map(|s| s.top_root())
                .fold(0.0, f64::max)
                * 1.01,
        };
        if kernel.omega_norm == 0.0 {
            return Err(Error::Unsupported("centre acts trivially; group is abelian".into()));
        }
        Ok(kernel)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn centre_dim(&self) -> usize {
        self.centre.len()
    }

    /// Largest singular value of `Omega(lambda)` over unit `lambda`.
    pub fn omega_norm(&self) -> f64 {
        self.omega_norm
    }

    fn angle_spectra(&self, count: usize) -> Arc<Vec<Spectrum>> {
        let mut cache = self.angle_cache.lock().unwrap();
        cache
            .entry(count)
            .or_insert_with(|| {
                Arc::new(
                    (0..count)
                        .map(|j| {
                            let th = PI * j as f64 / count as f64;
                            Spectrum::of(&(&self.centre[0] * th.cos() + &self.centre[1] * th.sin()))
                        })
                        .collect(),
                )
            })
            .clone()
    }

    fn table(&self, s: &Spectrum, plan: &Step2Plan) -> Arc<NodeTable> {
        let key = (plan.mu_max.to_bits(), plan.panels);
        if let Some(t) = self.tables.lock().unwrap().get(&key) {
            return t.clone();
        }
        let table = Arc::new(NodeTable::new(s, plan.mu_max, plan.panels));
        self.tables.lock().unwrap().insert(key, table.clone());
        table
    }

    fn prefactor(&self, t: f64, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        (-r2 / (4.0 * t)).exp() * (4.0 * PI * t).powf(-(self.m as f64) / 2.0)
    }

    fn cutoff(&self, spectra: &[Spectrum], x: &[f64], t: f64, radial: bool) -> Result<f64> {
        let ws: Vec<Vec<f64>> = spectra.iter().map(|s| s.weights(x)).collect();
        let big = |mu: f64| {
            spectra.iter().zip(&ws).any(|(s, w)| {
                let a = s.amplitude(mu, w, t);
                (if radial { mu * a } else { a }) >= AMPLITUDE_EPS
            })
        };
        let mut hi: f64 = 1.0;
        let mut doublings = 0;
        while big(hi) {
            hi *= 2.0;
            doublings += 1;
            if doublings > 40 {
                return Err(Error::NonConvergence("step-two kernel: amplitude does not decay".into()));
            }
        }
        let mut lo = if doublings == 0 { 0.0 } else { hi / 2.0 };
        for _ in 0..12 {
            let mid = 0.5 * (lo + hi);
            if big(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    }

    /// Integral over `mu` on a composite rule, returning `(value, envelope)`.
    fn radial(s: &Spectrum, y2: &[f64], t: f64, w: f64, plan: &Step2Plan, radial: bool) -> (f64, f64) {
        let rule = gauss_legendre(ORDER);
        let width = plan.mu_max / plan.panels as f64;
        let (mut val, mut env) = (0.0, 0.0);
        for k in 0..plan.panels {
            for (mu, wt) in rule.mapped(k as f64 * width, (k + 1) as f64 * width) {
                let mut a = s.amplitude(mu, y2, t) * wt;
                if radial {
                    a *= mu;
                }
                env += a;
                val += a * (mu * w).cos();
            }
        }
        (val, env)
    }

    /// Returns `(value, envelope)` with the given rule.
    fn eval_parts(&self, t: f64, a: &[f64], plan: &Step2Plan) -> (f64, f64) {
        let (x, z) = a.split_at(self.m);
        let pre = self.prefactor(t, x);
        match &self.line {
            Some(s) => {
                let (v, e) = self.table(s, plan).sum(&s.weights(x), t, z[0] / t);
                let c = pre / (PI * t);
                (c * v, c * e)
            }
            None => {
                let spectra = self.angle_spectra(plan.angles);
                let (mut v, mut e) = (0.0, 0.0);
                for (j, s) in spectra.iter().enumerate() {
                    let th = PI * j as f64 / plan.angles as f64;
                    let w = (th.cos() * z[0] + th.sin() * z[1]) / t;
                    let (vj, ej) = Self::radial(s, &s.weights(x), t, w, plan, true);
                    v += vj;
                    e += ej;
                }
                let c = pre * 2.0 / (4.0 * PI * PI * t * t) * (PI / plan.angles as f64);
                (c * v, c * e)
            }
        }
    }

    /// Evaluation with a fixed rule.
    pub fn eval_with(&self, t: f64, a: &[f64], plan: &Step2Plan) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        self.eval_parts(t, a, plan).0
    }

    /// Picks a rule for `(t, a)` by doubling panels (and angles) until two
    /// successive values agree to `rel_tol`, or to `rel_tol * 1e-3` of the
    /// non-oscillating envelope where the value itself cancels.
    pub fn plan(&self, t: f64, a: &[f64], rel_tol: f64) -> Result<Step2Plan> {
        Ok(self.plan_and_value(t, a, rel_tol)?.0)
    }

    /// [`Self::plan`] together with the value on the returned rule.
    fn plan_and_value(&self, t: f64, a: &[f64], rel_tol: f64) -> Result<(Step2Plan, f64)> {
        let (x, z) = a.split_at(self.m);
        let (mu_max, zmax) = match &self.line {
            Some(s) => (self.cutoff(std::slice::from_ref(s), x, t, false)?, z[0].abs()),
            None => (
                self.cutoff(&self.angle_spectra(16), x, t, true)?,
                (z[0] * z[0] + z[1] * z[1]).sqrt(),
            ),
        };
        let mu_max = quantize(mu_max);
        let oscillations = mu_max * zmax / t / (2.0 * PI);
        let mut plan = Step2Plan {
            mu_max,
            panels: (oscillations.ceil() as usize + 1).next_power_of_two(),
            angles: if self.line.is_some() { 1 } else { 16 },
        };
        let close = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).abs() <= rel_tol * b.0.abs().max(1e-3 * b.1);
        let mut cur = self.eval_parts(t, a, &plan);
        loop {
            if plan.panels > MAX_PANELS {
                return Err(Error::NonConvergence(format!(
                    "step-two kernel at t={t}: radial rule did not settle"
                )));
            }
            let finer = Step2Plan {
                panels: plan.panels * 2,
                ..plan
            };
            let next = self.eval_parts(t, a, &finer);
            let done = close(cur, next);
            plan = finer;
            cur = next;
            if done {
                break;
            }
        }
        if self.line.is_none() {
            loop {
                if plan.angles > MAX_ANGLES {
                    return Err(Error::NonConvergence(format!(
                        "step-two kernel at t={t}: angular rule did not settle"
                    )));
                }
                let finer = Step2Plan {
                    angles: plan.angles * 2,
                    ..plan
                };
                let next = self.eval_parts(t, a, &finer);
                let done = close(cur, next);
                plan = finer;
                cur = next;
                if done {
                    break;
                }
            }
        }
        Ok((plan, cur.0))
    }

    /// `p_t(a)` to relative tolerance `rel_tol`; zero for `t <= 0`.
    pub fn eval(&self, t: f64, a: &[f64], rel_tol: f64) -> Result<f64> {
        if t <= 0.0 {
            return Ok(0.0);
        }
        Ok(self.plan_and_value(t, a, rel_tol)?.1)
    }

    /// Half-widths of a box in exponential coordinates outside which
    /// `p_t < tol * p_t(0)`: Gaussian decay in the first layer, and in the
    /// centre the exponential decay set by the nearest complex singularity of
    /// `s`, at distance `pi / |Omega|`.
    pub fn envelope(&self, t: f64, tol: f64) -> Vec<f64> {
        let l = (1.0 / tol).ln().max(1.0);
        let r1 = 2.0 * (t * l).sqrt() * 1.1;
        let r2 = (l + 2.0 * self.m as f64) * self.omega_norm * t / PI * 1.5;
        let mut out = vec![r1; self.m];
        out.extend(std::iter::repeat(r2).take(self.centre.len()));
        out
    }
}
