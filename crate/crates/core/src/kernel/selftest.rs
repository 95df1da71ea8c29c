use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{GroupHeatKernel, PolyDiffOp};
use crate::error::Result;
use crate::quad::composite_nodes;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelftestConfig {
    pub symmetry_rel: f64,
    pub homogeneity_rel: f64,
    pub normalization_abs: f64,
    pub pde_rel: f64,
    pub fd_step: f64,
    pub fd_levels: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        Self {
            symmetry_rel: 1e-6,
            homogeneity_rel: 1e-6,
            normalization_abs: 1e-4,
            pde_rel: 1e-3,
            fd_step: 1e-2,
            fd_levels: 3,
            samples: 8,
            seed: 7,
        }
    }
}

impl SelftestConfig {
    /// Every tolerance set to `tol`.
    pub fn uniform(tol: f64) -> Self {
        Self {
            symmetry_rel: tol,
            homogeneity_rel: tol,
            normalization_abs: tol,
            pde_rel: tol,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PropertyResult {
    pub name: String,
    pub passed: bool,
    /// Worst observed error in the units of `tolerance`.
    pub measured: f64,
    pub tolerance: f64,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SelftestReport {
    pub family: String,
    #[serde(rename = "Q")]
    pub big_q: f64,
    pub properties: Vec<PropertyResult>,
    pub all_passed: bool,
}

impl SelftestReport {
    pub fn property(&self, name: &str) -> Option<&PropertyResult> {
        self.properties.iter().find(|p| p.name == name)
    }
}

fn result(name: &str, measured: Result<(f64, usize)>, tolerance: f64, pass: impl Fn(f64) -> bool) -> PropertyResult {
    match measured {
        Ok((m, samples)) => PropertyResult {
            name: name.into(),
            passed: pass(m),
            measured: m,
            tolerance,
            samples,
            note: None,
        },
        Err(e) => PropertyResult {
            name: name.into(),
            passed: false,
            measured: f64::NAN,
            tolerance,
            samples: 0,
            note: Some(e.to_string()),
        },
    }
}

/// Sample `(t, g)` with `g` in split coordinates, drawn in exponential
/// coordinates at unit distance scale so the points stay off the pole.
fn sample_points(k: &GroupHeatKernel, count: usize, seed: u64) -> Vec<(f64, Vec<f64>)> {
    let group = k.group();
    let exp_w = group.exp_weights().as_f64();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let t: f64 = rng.gen_range(0.5..2.0);
            let a: Vec<f64> = exp_w
                .iter()
                .map(|w| {
                    let mag: f64 = rng.gen_range(0.3..1.2);
                    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                    sign * mag * t.powf(w / 2.0)
                })
                .collect();
            (t, group.from_exp(&a))
        })
        .collect()
}

/// Numerical check of nonnegativity, vanishing for `t <= 0`, inverse
/// symmetry, homogeneity, unit mass and the heat equation.
pub fn kernel_selftest(k: &GroupHeatKernel, cfg: &SelftestConfig) -> Result<SelftestReport> {
    let group = k.group().clone();
    let big_q = k.big_q();
    let points = sample_points(k, cfg.samples.max(1), cfg.seed);
    let mut props = Vec::new();

    let nonneg = (|| -> Result<(f64, usize)> {
        let mut worst: f64 = 0.0;
        let mut count = 0;
        let mut grid = super::validation_points(&group);
        grid.extend(points.iter().cloned());
        for (t, g) in &grid {
            let v = k.gamma(*t, g)?;
            worst = worst.min(v / k.peak(*t)?);
            count += 1;
        }
        Ok(((-worst).max(0.0), count))
    })();
    let floor = 10.0 * k.config().rel_tol;
    props.push(result("nonnegativity", nonneg, floor, |m| m <= floor));

    let vanish = (|| -> Result<(f64, usize)> {
        let mut worst: f64 = 0.0;
        let mut count = 0;
        for (t, g) in &points {
            for s in [0.0, -t, -1e-12, -10.0] {
                worst = worst.max(k.gamma(s, g)?.abs());
                count += 1;
            }
        }
        Ok((worst, count))
    })();
    props.push(result("vanishing_nonpositive_time", vanish, 0.0, |m| m == 0.0));

    let symmetry = (|| -> Result<(f64, usize)> {
        let mut worst: f64 = 0.0;
        for (t, g) in &points {
            let a = k.gamma(*t, g)?;
            let b = k.gamma(*t, &group.inv(g))?;
            worst = worst.max((a - b).abs() / a.abs().max(b.abs()));
        }
        Ok((worst, points.len()))
    })();
    props.push(result("inverse_symmetry", symmetry, cfg.symmetry_rel, |m| m <= cfg.symmetry_rel));

    let homogeneity = (|| -> Result<(f64, usize)> {
        let mut worst: f64 = 0.0;
        let mut count = 0;
        for (t, g) in &points {
            let base = k.gamma(*t, g)?;
            for lambda in [0.5, 2.0, 3.0] {
                let v = k.gamma(lambda * lambda * t, &group.dilate(lambda, g))? * lambda.powf(big_q);
                worst = worst.max((v - base).abs() / base.abs());
                count += 1;
            }
        }
        Ok((worst, count))
    })();
    props.push(result("homogeneity", homogeneity, cfg.homogeneity_rel, |m| m <= cfg.homogeneity_rel));

    let mass = normalization(k);
    props.push(result("normalization", mass.map(|(v, c)| ((v - 1.0).abs(), c)), cfg.normalization_abs, |m| {
        m <= cfg.normalization_abs
    }));

    let pde = (|| -> Result<(f64, usize)> {
        let lap = PolyDiffOp::sum_of_squares(group.z_fields())?.compile();
        let id = PolyDiffOp::identity(group.dim()).compile();
        let mut worst: f64 = 0.0;
        for (t, g) in &points {
            let l = k.differentiate(&lap, 0, *t, g, cfg.fd_step, cfg.fd_levels)?;
            let dt = k.differentiate(&id, 1, *t, g, cfg.fd_step, cfg.fd_levels)?;
            let scale = l.value.abs().max(dt.value.abs());
            worst = worst.max((l.value - dt.value).abs() / scale);
        }
        Ok((worst, points.len()))
    })();
    props.push(result("pde_residual", pde, cfg.pde_rel, |m| m <= cfg.pde_rel));

    let all_passed = props.iter().all(|p| p.passed);
    Ok(SelftestReport {
        family: k.family().name().into(),
        big_q,
        properties: props,
        all_passed,
    })
}

/// `int gamma(1, .)` by a tensor Gauss-Legendre rule over the envelope box
/// in exponential coordinates (Lebesgue measure there is Haar measure), or
/// over a dilation-scaled box in split coordinates for external kernels.
fn normalization(k: &GroupHeatKernel) -> Result<(f64, usize)> {
    let group = k.group();
    let dim = group.dim();
    let weights = group.exp_weights().as_f64();
    let (half, exp) = match k.envelope_exp(1.0, 1e-10) {
        Some(h) => (h, true),
        None => (group.weights().as_f64().iter().map(|s| 6f64.powf(*s)).collect(), false),
    };
    let axes: Vec<Vec<(f64, f64)>> = half
        .iter()
        .zip(&weights)
        .map(|(r, w)| {
            let panels = if dim <= 3 {
                let width = if *w <= 1.0 { 3.0 } else { 2.0 };
                (2.0 * r / width).ceil() as usize
            } else {
                ((4e5f64).powf(1.0 / dim as f64) / 8.0) as usize
            };
            composite_nodes(-r, *r, panels.max(1), 8)
        })
        .collect();
    let total: usize = axes.iter().map(|a| a.len()).product();
    let first = &axes[0];
    let rest = &axes[1..];
    let sums: Result<Vec<f64>> = first
        .par_iter()
        .map(|&(x0, w0)| {
            let mut acc = 0.0;
            let mut idx = vec![0usize; rest.len()];
            let mut point = vec![0.0; dim];
            point[0] = x0;
            let count: usize = rest.iter().map(|a| a.len()).product();
            for _ in 0..count {
                let mut w = w0;
                for (k2, ax) in rest.iter().enumerate() {
                    let (x, wx) = ax[idx[k2]];
                    point[k2 + 1] = x;
                    w *= wx;
                }
                let v = if exp { k.gamma_exp(1.0, &point)? } else { k.gamma(1.0, &point)? };
                acc += w * v;
                for k2 in (0..rest.len()).rev() {
                    idx[k2] += 1;
                    if idx[k2] < rest[k2].len() {
                        break;
                    }
                    idx[k2] = 0;
                }
            }
            Ok(acc)
        })
        .collect();
    Ok((sums?.iter().sum(), total))
}
