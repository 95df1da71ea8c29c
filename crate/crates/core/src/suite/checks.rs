use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use super::{Metric, Suite};
use crate::carnot::CarnotGroup;
use crate::cauchy::{reproduction_check, solve_cauchy, BoundedInitialDatum};
use crate::error::{Error, Result};
use crate::io::grushin;
use crate::kernel::{gamma_abelian, kernel_selftest, GroupHeatKernel, KernelConfig, SelftestConfig, C_GRID};
use crate::oracle::{fd_cauchy_reference, fd_derivative, mc_density, word_directions, Direction, DiffusionConfig, GridSpec};
use crate::quad::tensor;
use crate::saturation::{DerivativeSpec, SaturatedKernel, SaturationConfig};

pub(super) enum Outcome {
    Measured(Vec<Metric>, Option<String>),
    Skipped(String),
}

fn measured(metrics: Vec<Metric>) -> Result<Outcome> {
    Ok(Outcome::Measured(metrics, None))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn sat(suite: &Suite, rel_tol: f64) -> Result<SaturatedKernel> {
    suite.saturated(rel_tol).map_err(Error::Unsupported)
}

/// `(t, x, s, y)` with `s - t` in `tau_range` and `x`, `y` on the scale
/// `(s - t)^{sigma / 2}` of each coordinate.
fn pole_pairs(suite: &Suite, count: usize, stream: u64, tau_range: (f64, f64)) -> Vec<(f64, Vec<f64>, f64, Vec<f64>)> {
    let w = suite.group.weights_x().as_f64();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(suite.config.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ stream);
    (0..count)
        .map(|_| {
            let t: f64 = rng.gen_range(-0.5..0.5);
            let tau = rng.gen_range(tau_range.0..tau_range.1);
            let mut x = Vec::with_capacity(w.len());
            let mut y = Vec::with_capacity(w.len());
            for s in &w {
                let scale = f64::powf(tau, s / 2.0);
                let xi = rng.gen_range(-1.0..1.0) * scale;
                x.push(xi);
                y.push(xi + rng.gen_range(-1.5..1.5) * scale);
            }
            (t, x, t + tau, y)
        })
        .collect()
}

/// The point with first coordinate `first` and every other one `rest`.
fn point(n: usize, first: f64, rest: f64) -> Vec<f64> {
    (0..n).map(|k| if k == 0 { first } else { rest }).collect()
}

pub(super) fn euclidean_saturation(_: &Suite) -> Result<Outcome> {
    let group = Arc::new(CarnotGroup::abelian(1, 1)?);
    let k = SaturatedKernel::new(
        GroupHeatKernel::new(group, KernelConfig::default())?,
        SaturationConfig {
            rel_tol: 1e-10,
            ..Default::default()
        },
    );
    let mut worst = 0.0f64;
    for i in 0..5 {
        let t = 0.25 * 2f64.powi(i);
        for x in -2..=2 {
            let x = x as f64;
            let v = k.gamma_sat(0.0, &[0.0], t, &[x])?;
            worst = worst.max(rel(v, gamma_abelian(t, &[x])));
        }
    }
    measured(vec![Metric::at_most("max_rel_error", worst, 1e-6)])
}

pub(super) fn lifting_exactness(suite: &Suite) -> Result<Outcome> {
    let r = &suite.lift;
    let failed: Vec<&str> = r.checks.iter().filter(|(_, ok)| !**ok).map(|(k, _)| k.as_str()).collect();
    let detail = format!(
        "N={} p={} step={} q={} q*={} Q={}; {} exact identities{}",
        r.big_n,
        r.p,
        r.step,
        r.q,
        r.q_star,
        r.big_q,
        r.checks.len(),
        if failed.is_empty() { String::new() } else { format!(", failing: {}", failed.join(", ")) }
    );
    Ok(Outcome::Measured(
        vec![Metric::at_most("failed_identities", failed.len() as f64, 0.0)],
        Some(detail),
    ))
}

pub(super) fn kernel_contract(suite: &Suite) -> Result<Outcome> {
    let k = suite.kernel.as_ref().map_err(|e| Error::Unsupported(e.clone()))?;
    let mut cfg = SelftestConfig::default();
    if suite.quick() {
        cfg.samples = 3;
    }
    let report = kernel_selftest(k, &cfg)?;
    let metrics = report
        .properties
        .iter()
        .map(|p| Metric {
            name: p.name.clone(),
            value: p.measured,
            limit: p.tolerance,
            passed: p.passed,
        })
        .collect();
    measured(metrics)
}

pub(super) fn gamma_homogeneity(suite: &Suite) -> Result<Outcome> {
    let k = sat(suite, 1e-8)?;
    let count = if suite.quick() { 3 } else { 10 };
    let mut worst = 0.0f64;
    for (t, x, s, y) in pole_pairs(suite, count, 4, (0.5, 2.0)) {
        for lambda in [0.5, 2.0, 3.0] {
            let (lhs, rhs) = k.homogeneity_probe(lambda, t, &x, s, &y)?;
            worst = worst.max(rel(lhs, rhs));
        }
    }
    measured(vec![Metric::at_most("max_rel_error", worst, 1e-5)])
}

pub(super) fn mass_one(suite: &Suite) -> Result<Outcome> {
    let k = sat(suite, 1e-4)?;
    let n = k.n();
    let bases = [vec![0.0; n], point(n, 1.0, 0.5)];
    let times: &[f64] = if suite.quick() { &[1.0] } else { &[0.25, 1.0, 4.0] };
    let mut worst = 0.0f64;
    for x in &bases {
        for &s in times {
            worst = worst.max((k.mass(x, s)?.value - 1.0).abs());
        }
    }
    measured(vec![Metric::at_most("max_abs_error", worst, 1e-4)])
}

pub(super) fn space_symmetry(suite: &Suite) -> Result<Outcome> {
    let k = sat(suite, 1e-8)?;
    let count = if suite.quick() { 5 } else { 20 };
    let mut worst = 0.0f64;
    for (t, x, s, y) in pole_pairs(suite, count, 6, (0.5, 2.0)) {
        let a = k.gamma_sat(t, &x, s, &y)?;
        let b = k.gamma_sat(t, &y, s, &x)?;
        worst = worst.max(rel(b, a));
    }
    measured(vec![Metric::at_most("max_rel_error", worst, 1e-5)])
}

pub(super) fn reproduction(suite: &Suite) -> Result<Outcome> {
    let k = sat(suite, 1e-4)?;
    let n = k.n();
    let mut pairs = vec![(vec![0.0; n], vec![0.0; n])];
    if !suite.quick() {
        pairs.push((point(n, 0.5, 0.2), point(n, -0.3, 0.1)));
        pairs.push((point(n, 1.0, 0.0), point(n, 0.0, 0.5)));
    }
    let mut worst = 0.0f64;
    for (x, y) in &pairs {
        worst = worst.max(reproduction_check(&k, x, y, 0.5, 0.5)?.rel_diff());
    }
    measured(vec![Metric::at_most("max_rel_error", worst, 1e-3)])
}

/// Words `X_1^y`, `X_2^y`, `X_1^x` and `X_1^x X_1^y`, each with every
/// `d_s^alpha d_t^beta`, alpha, beta in {0, 1}, against nested differences of
/// the value along the flows of the fields.
pub(super) fn derivative_representation(suite: &Suite) -> Result<Outcome> {
    let k = sat(suite, 1e-6)?;
    let tight = sat(suite, 1e-11)?;
    let fields = &suite.system.fields;
    let n = k.n();
    let mut words: Vec<(Vec<usize>, Vec<usize>)> = vec![(vec![1], vec![])];
    if fields.len() > 1 {
        words.push((vec![2], vec![]));
    }
    words.push((vec![], vec![1]));
    words.push((vec![1], vec![1]));
    let count = if suite.quick() { 1 } else { 5 };
    let points: Vec<_> = pole_pairs(suite, count, 8, (1.0, 1.5))
        .into_iter()
        .map(|(t, x, s, y)| (0.0, x, s - t, y))
        .collect();
    let (mut worst, mut compared, mut failures) = (0.0f64, 0usize, Vec::new());
    for (t, x, s, y) in &points {
        let mut at: Vec<f64> = vec![*t];
        at.extend(x);
        at.push(*s);
        at.extend(y);
        for (y_word, x_word) in &words {
            for (alpha, beta) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                let spec = DerivativeSpec {
                    alpha,
                    beta,
                    y_word: y_word.clone(),
                    x_word: x_word.clone(),
                };
                let gd = k.gamma_derivative(&spec, *t, x, *s, y)?;
                let mut dirs = Vec::new();
                dirs.extend((0..alpha).map(|_| Direction::Axis(n + 1)));
                dirs.extend((0..beta).map(|_| Direction::Axis(0)));
                let zero_based = |w: &[usize]| w.iter().map(|i| i - 1).collect::<Vec<_>>();
                dirs.extend(word_directions(fields, &zero_based(x_word), 1)?);
                dirs.extend(word_directions(fields, &zero_based(y_word), n + 2)?);
                let fd = fd_derivative(
                    |p| {
                        tight
                            .gamma_sat(p[0], &p[1..=n], p[n + 1], &p[n + 2..])
                            .unwrap_or(f64::NAN)
                    },
                    &at,
                    &dirs,
                    0.1,
                    3,
                )?;
                let diff = (gd.value - fd.value).abs();
                let allowed = (1e-3 * fd.value.abs()).max(gd.error + fd.error);
                compared += 1;
                worst = worst.max(diff / allowed);
                if !(diff <= allowed) {
                    failures.push(format!("{spec:?} at {at:?}: {} vs {}", gd.value, fd.value));
                }
            }
        }
    }
    let detail = if failures.is_empty() {
        format!("{compared} comparisons")
    } else {
        format!("{compared} comparisons; {}", failures.join("; "))
    };
    Ok(Outcome::Measured(
        vec![Metric::at_most("max_diff_over_allowance", worst, 1.0)],
        Some(detail),
    ))
}

/// Histogram of the diffusion started at the origin at time 1 against bin
/// averages of `Gamma(0, 0; 1, .)`.
pub(super) fn monte_carlo_density(suite: &Suite) -> Result<Outcome> {
    let k = sat(suite, 1e-6)?;
    let n = k.n();
    let cfg = DiffusionConfig {
        dt: 1e-3,
        paths: if suite.quick() { 100_000 } else { 1_000_000 },
        seed: suite.config.mc_seed,
        lo: vec![-2.5; n],
        hi: vec![2.5; n],
        bins: vec![5; n],
    };
    let origin = vec![0.0; n];
    let report = mc_density(&suite.system.fields, &origin, 0.0, 1.0, &cfg)?;
    let (mut worst_z, mut chi2) = (0.0f64, 0.0);
    let mut used = 0;
    let mut central = f64::NAN;
    let centre_bin = report.bin_at(&origin).cloned();
    for b in &report.bins {
        if b.hits < 200 {
            continue;
        }
        let avg = tensor(&b.lo, &b.hi, &vec![1; n], 4, |y| k.gamma_sat(0.0, &origin, 1.0, y))?.value;
        let vol: f64 = b.lo.iter().zip(&b.hi).map(|(l, h)| h - l).product();
        let avg = avg / vol;
        used += 1;
        let z = (b.density - avg) / b.std_error;
        worst_z = worst_z.max(z.abs());
        chi2 += z * z;
        if centre_bin.as_ref() == Some(b) {
            central = rel(b.density, avg);
        }
    }
    Ok(Outcome::Measured(
        vec![
            Metric::at_most("max_standard_errors", worst_z, 2.0),
            Metric::at_most("central_bin_rel_error", central, 0.05),
        ],
        Some(format!(
            "{} paths, seed {}, {used} bins with >= 200 hits, sum of z^2 {chi2:.1}, {} escaped",
            cfg.paths, cfg.seed, report.escaped
        )),
    ))
}

/// Gaussian datum against the finite-difference oracle, the maximum principle,
/// constant data and the initial trace.
pub(super) fn cauchy_solver(suite: &Suite) -> Result<Outcome> {
    let reference = grushin();
    if suite.system.weights != reference.weights || suite.system.fields != reference.fields {
        return Ok(Outcome::Skipped(
            "skipped: the finite-difference oracle discretizes the Grushin operator only".into(),
        ));
    }
    let k = sat(suite, 1e-4)?;
    let gauss = BoundedInitialDatum::builtin("gauss")?;
    let one = BoundedInitialDatum::builtin("one")?;
    let probes: Vec<Vec<f64>> = if suite.quick() {
        vec![vec![0.0, 0.0]]
    } else {
        vec![vec![0.0, 0.0], vec![0.5, 0.0], vec![0.0, 0.5]]
    };
    let grid = GridSpec {
        lo: [-5.0, -6.0],
        hi: [5.0, 6.0],
        cells: [100, 120],
        dt: None,
    };
    let fd = fd_cauchy_reference(&grid, |y| (-(y[0] * y[0] + y[1] * y[1])).exp(), 0.5, &probes)?;
    let mut worst_fd = 0.0f64;
    let mut sup = 0.0f64;
    for (p, f) in probes.iter().zip(&fd) {
        let u = solve_cauchy(&k, &gauss, 0.5, p)?.value;
        sup = sup.max(u.abs());
        worst_fd = worst_fd.max(rel(u, f.value));
    }
    let x = [0.3, 0.2];
    let u_one = solve_cauchy(&k, &one, 0.5, &x)?.value;
    let target = gauss.eval(&x)?;
    let times: &[f64] = if suite.quick() { &[0.1, 0.03] } else { &[0.1, 0.03, 0.01] };
    let mut gaps = Vec::new();
    for &t in times {
        let u = solve_cauchy(&k, &gauss, t, &x)?.value;
        sup = sup.max(u.abs());
        gaps.push((u - target).abs());
    }
    let increases = gaps.windows(2).filter(|w| !(w[1] < w[0])).count();
    Ok(Outcome::Measured(
        vec![
            Metric::at_most("max_rel_error_vs_finite_differences", worst_fd, 1e-2),
            Metric::at_most("sup_abs_u", sup, gauss.bound),
            Metric::at_most("constant_datum_abs_error", (u_one - 1.0).abs(), 1e-4),
            Metric::at_most("trace_gap_increases", increases as f64, 0.0),
        ],
        Some(format!(
            "trace gaps {} at t = {times:?}",
            gaps.iter().map(|g| format!("{g:.3e}")).collect::<Vec<_>>().join(", ")
        )),
    ))
}

pub(super) fn vanishing_at_infinity(suite: &Suite) -> Result<Outcome> {
    let k = sat(suite, 1e-6)?;
    let n = k.n();
    let poles = vec![(0.0, vec![0.0; n]), (0.5, point(n, 0.5, -0.5)), (0.2, point(n, -0.5, 0.5))];
    let targets: Vec<(f64, Vec<f64>)> = (2..=20).map(|j| (1.0, point(n, j as f64, 0.0))).collect();
    let sup = k.vanishing_probe(&poles, &targets)?;
    // Quadrature noise allowance on an otherwise non-increasing sequence.
    let increases = sup.windows(2).filter(|w| !(w[1] <= w[0] * (1.0 + 1e-6) + 1e-15)).count();
    Ok(Outcome::Measured(
        vec![
            Metric::at_most("sup_at_k_20", sup[sup.len() - 1], 1e-8),
            Metric::at_most("increases", increases as f64, 0.0),
        ],
        None,
    ))
}

pub(super) fn gaussian_sandwich(suite: &Suite) -> Result<Outcome> {
    let k = sat(suite, 1e-6)?;
    let fit = k.fit_sandwich(&C_GRID)?;
    let c = fit.c.unwrap_or(f64::INFINITY);
    Ok(Outcome::Measured(
        vec![Metric::at_most("fitted_c", c, 50.0)],
        Some(format!("{} validation points", fit.points)),
    ))
}
