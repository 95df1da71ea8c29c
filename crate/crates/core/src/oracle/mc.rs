//! Monte Carlo transition densities of `dY = sqrt(2) sum X_j(Y) o dW^j`.

use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::PolyVectorField;
use crate::polyalg::{CompiledMap, WeightedPolynomial};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffusionConfig {
    pub dt: f64,
    pub paths: u64,
    pub seed: u64,
    /// Histogram box and bin counts per axis.
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub bins: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McBin {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub hits: u64,
    pub density: f64,
    /// Binomial standard error of `density`.
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub config: DiffusionConfig,
    pub start: Vec<f64>,
    pub t0: f64,
    pub t1: f64,
    pub steps: u64,
    /// Whether the Stratonovich-to-Ito drift is nonzero.
    pub drift_correction: bool,
    pub escaped: u64,
    pub empty_bins: usize,
    pub warnings: Vec<String>,
    pub bins: Vec<McBin>,
}

impl McReport {
    /// Bin containing `y`, if any.
    pub fn bin_at(&self, y: &[f64]) -> Option<&McBin> {
        self.bins
            .iter()
            .find(|b| y.iter().enumerate().all(|(k, v)| b.lo[k] <= *v && *v < b.hi[k]))
    }
}

/// Ito drift `sum_j (D X_j) X_j` of the Stratonovich system with the
/// `sqrt(2)` scaling.
pub fn ito_drift(fields: &[PolyVectorField]) -> Result<Vec<WeightedPolynomial>> {
    let n = fields.first().map(|f| f.dim()).unwrap_or(0);
    let mut drift = vec![WeightedPolynomial::zero(n); n];
    for x in fields {
        for (i, d) in drift.iter_mut().enumerate() {
            *d = d.try_add(&x.apply(x.component(i))?)?;
        }
    }
    Ok(drift)
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator for one path, a function of `(seed, path)` only.
fn path_rng(seed: u64, path: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(mix(seed ^ mix(path)))
}

const CHUNK: u64 = 4096;

/// Euler-Maruyama histogram of `Y(t1)` started at `Y(t0) = start`.
pub fn mc_density(fields: &[PolyVectorField], start: &[f64], t0: f64, t1: f64, cfg: &DiffusionConfig) -> Result<McReport> {
    let n = start.len();
    if !(t1 > t0) {
        return Err(Error::InvalidInput(format!("need t1 > t0, got {t0} and {t1}")));
    }
    if !(cfg.dt > 0.0) || cfg.paths == 0 {
        return Err(Error::InvalidInput("dt and paths must be positive".into()));
    }
    if fields.iter().any(|f| f.dim() != n) || cfg.lo.len() != n || cfg.hi.len() != n || cfg.bins.len() != n {
        return Err(Error::Dimension(format!("diffusion on R^{n}")));
    }
    if cfg.bins.iter().any(|&b| b == 0) || (0..n).any(|k| cfg.hi[k] <= cfg.lo[k]) {
        return Err(Error::InvalidInput("empty histogram box".into()));
    }
    let compiled: Vec<CompiledMap> = fields.iter().map(|f| f.compile()).collect();
    let drift_polys = ito_drift(fields)?;
    let drift_correction = drift_polys.iter().any(|p| !p.is_zero());
    let drift = CompiledMap::new(&drift_polys);
    let steps = ((t1 - t0) / cfg.dt).round().max(1.0) as u64;
    let dt = (t1 - t0) / steps as f64;
    let noise = (2.0 * dt).sqrt();
    let total_bins: usize = cfg.bins.iter().product();
    let width: Vec<f64> = (0..n).map(|k| (cfg.hi[k] - cfg.lo[k]) / cfg.bins[k] as f64).collect();

    let chunks = cfg.paths.div_ceil(CHUNK);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut hist = vec![0u64; total_bins + 1];
            let mut y = vec![0.0; n];
            let mut v = vec![0.0; n];
            let mut b = vec![0.0; n];
            let mut dw = vec![0.0; fields.len()];
            for path in c * CHUNK..((c + 1) * CHUNK).min(cfg.paths) {
                let mut rng = path_rng(cfg.seed, path);
                y.copy_from_slice(start);
                for _ in 0..steps {
                    for w in dw.iter_mut() {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        *w = noise * z;
                    }
                    b.iter_mut().for_each(|x| *x = 0.0);
                    if drift_correction {
                        drift.eval_into(&y, &mut b);
                        b.iter_mut().for_each(|x| *x *= dt);
                    }
                    for (f, w) in compiled.iter().zip(&dw) {
                        f.eval_into(&y, &mut v);
                        for k in 0..n {
                            b[k] += v[k] * w;
                        }
                    }
                    for k in 0..n {
                        y[k] += b[k];
                    }
                }
                hist[bin_index(&y, cfg, &width).unwrap_or(total_bins)] += 1;
            }
            hist
        })
        .reduce(
            || vec![0u64; total_bins + 1],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                a
            },
        );

    let volume: f64 = width.iter().product();
    let paths = cfg.paths as f64;
    let mut bins = Vec::with_capacity(total_bins);
    for (idx, &hits) in counts[..total_bins].iter().enumerate() {
        let mut rest = idx;
        let mut lo = vec![0.0; n];
        for k in (0..n).rev() {
            lo[k] = cfg.lo[k] + (rest % cfg.bins[k]) as f64 * width[k];
            rest /= cfg.bins[k];
        }
        let hi: Vec<f64> = lo.iter().zip(&width).map(|(a, w)| a + w).collect();
        let p = hits as f64 / paths;
        bins.push(McBin {
            lo,
            hi,
            hits,
            density: p / volume,
            std_error: (p * (1.0 - p) / paths).sqrt() / volume,
        });
    }
    let escaped = counts[total_bins];
    let empty_bins = bins.iter().filter(|b| b.hits == 0).count();
    let mut warnings = Vec::new();
    if escaped as f64 > 0.5 * paths {
        warnings.push(format!("{escaped} of {} paths left the histogram box", cfg.paths));
    }
    if empty_bins > 0 {
        warnings.push(format!("{empty_bins} empty bins"));
    }
    Ok(McReport {
        config: cfg.clone(),
        start: start.to_vec(),
        t0,
        t1,
        steps,
        drift_correction,
        escaped,
        empty_bins,
        warnings,
        bins,
    })
}

fn bin_index(y: &[f64], cfg: &DiffusionConfig, width: &[f64]) -> Option<usize> {
    let mut idx = 0usize;
    for k in 0..y.len() {
        let r = (y[k] - cfg.lo[k]) / width[k];
        if !(r >= 0.0) || r >= cfg.bins[k] as f64 {
            return None;
        }
        idx = idx * cfg.bins[k] + r as usize;
    }
    Some(idx)
}
