//! Gauss-Legendre quadrature: cached rules, composite rules, and a globally
//! adaptive bisection scheme.

use std::collections::{BinaryHeap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::legendre::GaussLegendre;

use crate::error::{Error, Result};

/// Nodes and weights on `[-1, 1]`.
#[derive(Debug)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// Integral over `[a, b]`.
    #[inline]
    pub fn apply<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(c + h * x);
        }
        s * h
    }

    /// Mapped nodes and weights on `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (c + h * x, w * h))
    }
}

/// Cached `n`-point Gauss-Legendre rule.
pub fn gauss_legendre(n: usize) -> Arc<Rule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Rule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry(n)
        .or_insert_with(|| {
            let gl = GaussLegendre::new(n.max(2)).expect("rule of degree >= 2");
            let mut pairs = gl.as_node_weight_pairs().to_vec();
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            Arc::new(Rule {
                nodes: pairs.iter().map(|p| p.0).collect(),
                weights: pairs.iter().map(|p| p.1).collect(),
            })
        })
        .clone()
}

/// Equal panels with an `n`-point rule each.
pub fn composite<F: FnMut(f64) -> f64>(a: f64, b: f64, panels: usize, n: usize, mut f: F) -> f64 {
    let rule = gauss_legendre(n);
    let w = (b - a) / panels as f64;
    (0..panels)
        .map(|k| rule.apply(a + k as f64 * w, a + (k + 1) as f64 * w, &mut f))
        .sum()
}

/// Nodes and weights of a composite rule, for reuse across integrands.
pub fn composite_nodes(a: f64, b: f64, panels: usize, n: usize) -> Vec<(f64, f64)> {
    let rule = gauss_legendre(n);
    let w = (b - a) / panels as f64;
    (0..panels)
        .flat_map(|k| {
            rule.mapped(a + k as f64 * w, a + (k + 1) as f64 * w)
                .collect::<Vec<_>>()
        })
        .collect()
}

#[derive(Clone, Copy, Debug)]
pub struct AdaptiveConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
    pub initial_panels: usize,
    /// Tolerance relative to `int |f|`, for integrands with cancellation.
    pub l1_tol: f64,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_intervals: 2000,
            initial_panels: 1,
            l1_tol: 0.0,
        }
    }
}

impl AdaptiveConfig {
    pub fn with_tol(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Piece {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

// Kronrod nodes on [0, 1); odd indices are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// 15-point Kronrod value on `[a, b]` with the usual error heuristic built
/// from the embedded 7-point Gauss rule.
fn kronrod15<F: FnMut(f64) -> f64>(a: f64, b: f64, f: &mut F) -> Piece {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut fv = [0.0f64; 15];
    fv[7] = f(c);
    for j in 0..7 {
        fv[j] = f(c - h * XGK[j]);
        fv[14 - j] = f(c + h * XGK[j]);
    }
    let mut k = WGK[7] * fv[7];
    let mut g = WG[3] * fv[7];
    for j in 0..7 {
        k += WGK[j] * (fv[j] + fv[14 - j]);
        if j % 2 == 1 {
            g += WG[j / 2] * (fv[j] + fv[14 - j]);
        }
    }
    let mean = 0.5 * k;
    let mut asc = WGK[7] * (fv[7] - mean).abs();
    let mut abs = WGK[7] * fv[7].abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
        abs += WGK[j] * (fv[j].abs() + fv[14 - j].abs());
    }
    let (asc, abs) = (asc * h.abs(), abs * h.abs());
    let mut error = ((k - g) * h).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    if abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * abs);
    }
    Piece {
        a,
        b,
        value: k * h,
        error,
        abs,
    }
}

/// Globally adaptive Gauss-Kronrod (7/15) integration on `[a, b]`.
///
/// The piece with the largest error estimate is bisected until the summed
/// estimate meets `max(abs_tol, rel_tol |I|, l1_tol int |f|)`.
pub fn adaptive<F: FnMut(f64) -> f64>(a: f64, b: f64, cfg: &AdaptiveConfig, mut f: F) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let mut evals = 0usize;
    let mut heap = BinaryHeap::new();
    let panels = cfg.initial_panels.max(1);
    let w = (b - a) / panels as f64;
    for k in 0..panels {
        heap.push(kronrod15(a + k as f64 * w, a + (k + 1) as f64 * w, &mut f));
        evals += 15;
    }
    loop {
        let (value, error, l1) = heap
            .iter()
            .fold((0.0, 0.0, 0.0), |(v, e, l), p| (v + p.value, e + p.error, l + p.abs));
        if !value.is_finite() {
            return Err(Error::NonConvergence("non-finite integrand".into()));
        }
        if error <= cfg.abs_tol.max(cfg.rel_tol * value.abs()).max(cfg.l1_tol * l1) {
            return Ok(QuadResult {
                value,
                error,
                evaluations: evals,
            });
        }
        if heap.len() >= cfg.max_intervals {
            return Err(Error::NonConvergence(format!(
                "adaptive quadrature on [{a}, {b}]: estimate {value:e} with error {error:e} after {} pieces",
                heap.len()
            )));
        }
        let worst = heap.pop().unwrap();
        let m = 0.5 * (worst.a + worst.b);
        heap.push(kronrod15(worst.a, m, &mut f));
        heap.push(kronrod15(m, worst.b, &mut f));
        evals += 30;
    }
}

/// Tensor product of composite Gauss-Legendre rules over a box, with
/// `panels[k]` panels of `order` nodes along axis `k`.
pub fn tensor<F>(lo: &[f64], hi: &[f64], panels: &[usize], order: usize, f: F) -> Result<QuadResult>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let axes: Vec<Vec<(f64, f64)>> = (0..lo.len())
        .map(|k| composite_nodes(lo[k], hi[k], panels[k].max(1), order))
        .collect();
    product_rule(&axes, f)
}

/// Product of one-dimensional `(node, weight)` rules.
pub fn product_rule<F>(axes: &[Vec<(f64, f64)>], mut f: F) -> Result<QuadResult>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let total: usize = axes.iter().map(|a| a.len()).product();
    let mut idx = vec![0usize; axes.len()];
    let mut point = vec![0.0; axes.len()];
    let mut value = 0.0;
    for _ in 0..total {
        let mut w = 1.0;
        for (k, ax) in axes.iter().enumerate() {
            let (x, wx) = ax[idx[k]];
            point[k] = x;
            w *= wx;
        }
        value += w * f(&point)?;
        for k in (0..axes.len()).rev() {
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
    if !value.is_finite() {
        return Err(Error::NonConvergence("non-finite integrand".into()));
    }
    Ok(QuadResult {
        value,
        error: f64::NAN,
        evaluations: total,
    })
}

/// Nested adaptive integration over a box, one dimension at a time. The
/// tolerance of inner integrals is tightened by a factor of ten.
pub fn adaptive_box<F>(lo: &[f64], hi: &[f64], cfg: &AdaptiveConfig, f: &mut F) -> Result<QuadResult>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut point = vec![0.0; lo.len()];
    nested(lo, hi, cfg, 0, &mut point, f)
}

fn nested<F>(lo: &[f64], hi: &[f64], cfg: &AdaptiveConfig, dim: usize, point: &mut Vec<f64>, f: &mut F) -> Result<QuadResult>
where
    F: FnMut(&[f64]) -> f64,
{
    if lo.is_empty() {
        return Ok(QuadResult {
            value: f(&[]),
            error: 0.0,
            evaluations: 1,
        });
    }
    let last = dim + 1 == lo.len();
    let inner_cfg = AdaptiveConfig {
        rel_tol: cfg.rel_tol * 0.1,
        abs_tol: cfg.abs_tol * 0.1,
        l1_tol: cfg.l1_tol * 0.1,
        ..*cfg
    };
    let mut failure: Option<Error> = None;
    let mut evals = 0;
    let res = adaptive(lo[dim], hi[dim], cfg, |x| {
        point[dim] = x;
        if last {
            evals += 1;
            f(point)
        } else {
            let mut p = point.clone();
            match nested(lo, hi, &inner_cfg, dim + 1, &mut p, f) {
                Ok(r) => {
                    evals += r.evaluations;
                    r.value
                }
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(QuadResult {
        evaluations: evals,
        ..res
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rules_are_exact_on_polynomials() {
        let r = gauss_legendre(5);
        assert!((r.apply(0.0, 2.0, |x| x.powi(9)) - 102.4).abs() < 1e-12);
        assert!((composite(0.0, 1.0, 4, 3, |x| x * x) - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn kronrod_rule_is_exact_to_degree_22() {
        for deg in 0..=22 {
            let p = kronrod15(-1.0, 1.0, &mut |x: f64| x.powi(deg));
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((p.value - exact).abs() < 1e-14, "degree {deg}");
        }
        // The embedded Gauss rule is exact to degree 13, so the heuristic vanishes there.
        let p = kronrod15(-1.0, 1.0, &mut |x: f64| x.powi(12) + x.powi(13));
        assert!(p.error < 1e-13);
    }

    #[test]
    fn adaptive_handles_peaks_and_oscillation() {
        let cfg = AdaptiveConfig::with_tol(1e-12, 0.0);
        let r = adaptive(-1.0, 1.0, &cfg, |x| 1.0 / (1e-4 + x * x)).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((r.value - exact).abs() < 1e-9 * exact);
        let r = adaptive(0.0, 50.0, &cfg, |x| (7.0 * x).cos() * (-x).exp()).unwrap();
        let exact = 1.0 / 50.0;
        assert!((r.value - exact).abs() < 1e-12);
    }

    #[test]
    fn non_convergence_is_reported() {
        let cfg = AdaptiveConfig {
            max_intervals: 4,
            ..AdaptiveConfig::with_tol(1e-14, 0.0)
        };
        assert!(adaptive(0.0, 1.0, &cfg, |x| 1.0 / x.sqrt()).is_err());
    }

    #[test]
    fn nested_box() {
        let cfg = AdaptiveConfig::with_tol(1e-10, 0.0);
        let r = adaptive_box(&[0.0, 0.0], &[1.0, 2.0], &cfg, &mut |p: &[f64]| p[0] * p[1].exp()).unwrap();
        assert!((r.value - 0.5 * (2f64.exp() - 1.0)).abs() < 1e-10);
    }
}
