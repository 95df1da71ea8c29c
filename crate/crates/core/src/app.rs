//! Command implementations behind the `hypoheat` binary. Each returns an
//! [`Artifact`]: a JSON document, a table when the output has rows, and
//! whether the checks it ran passed.

use std::cell::RefCell;
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::carnot::{lift_system, GroupFile};
use crate::cauchy::{solve_cauchy, BoundedInitialDatum, TabulatedDatum};
use crate::error::{Error, Result};
use crate::io::FieldSystem;
use crate::kernel::{self, GroupHeatKernel, KernelConfig, SelftestConfig};
use crate::oracle::{fd_cauchy_reference, mc_density, DiffusionConfig, GridSpec};
use crate::saturation::{DerivativeSpec, SaturatedKernel, SaturationConfig};
use crate::suite::{CheckResult, Status, Suite, SuiteConfig, SuiteReport, CHECKS};

/// Tolerances and seeds shared by all commands. Unknown keys are rejected.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub kernel: KernelConfig,
    pub saturation: SaturationConfig,
    pub selftest: SelftestConfig,
    pub suite: SuiteConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let cfg: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.saturation;
        let st = &self.selftest;
        let tolerances = [
            ("kernel.rel_tol", self.kernel.rel_tol),
            ("saturation.rel_tol", s.rel_tol),
            ("saturation.abs_floor", s.abs_floor),
            ("saturation.tail_tol", s.tail_tol),
            ("saturation.fd_step", s.fd_step),
            ("saturation.derivative_rel_tol", s.derivative_rel_tol),
            ("selftest.symmetry_rel", st.symmetry_rel),
            ("selftest.homogeneity_rel", st.homogeneity_rel),
            ("selftest.normalization_abs", st.normalization_abs),
            ("selftest.pde_rel", st.pde_rel),
            ("selftest.fd_step", st.fd_step),
        ];
        for (name, v) in tolerances {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Uses `seed` for every random choice.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.selftest.seed = seed;
        self.suite.seed = seed;
        self.suite.mc_seed = seed;
        self
    }
}

/// Rows of text cells under named columns.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(columns: Vec<String>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    fn push_numbers(&mut self, row: impl IntoIterator<Item = f64>) {
        self.rows.push(row.into_iter().map(number).collect());
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Internal(e.to_string());
        w.write_record(&self.columns).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
    }
}

/// Shortest round-trip form, in exponent notation when very small or large.
fn number(v: f64) -> String {
    if v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&v.abs()) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

fn indexed(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (1..=n).map(move |k| format!("{prefix}{k}"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug)]
pub struct Artifact {
    pub json: serde_json::Value,
    pub table: Option<Table>,
    pub passed: bool,
}

impl Artifact {
    fn report(json: serde_json::Value, passed: bool) -> Self {
        Self { json, table: None, passed }
    }

    /// Output text with a trailing newline. CSV needs a table.
    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => Ok(serde_json::to_string_pretty(&self.json)? + "\n"),
            Format::Csv => self
                .table
                .as_ref()
                .ok_or_else(|| Error::InvalidInput("this command has no CSV form; use --format json".into()))?
                .to_csv(),
        }
    }
}

/// Exit status for an error: 2 for bad input, 3 for numerical failures.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::NonConvergence(_) | Error::Internal(_) => 3,
        _ => 2,
    }
}

/// Builtin datum name or path of a tabulated datum file.
pub fn load_datum(spec: &str) -> Result<BoundedInitialDatum> {
    match spec {
        "one" | "zero" | "gauss" => BoundedInitialDatum::builtin(spec),
        path => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidInput(format!("datum '{path}' is neither builtin nor a readable file: {e}")))?;
            let grid: TabulatedDatum = serde_json::from_str(&text)?;
            BoundedInitialDatum::tabulated(grid)
        }
    }
}

fn saturated(system: &FieldSystem, cfg: &RunConfig) -> Result<SaturatedKernel> {
    let group = Arc::new(lift_system(system)?.0);
    let k = GroupHeatKernel::new(group, cfg.kernel)?;
    Ok(SaturatedKernel::new(k, cfg.saturation))
}

fn check_len(what: &str, v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::Dimension(format!("{what} has {} coordinates, expected {n}", v.len())));
    }
    Ok(())
}

pub fn lift(system: &FieldSystem) -> Result<Artifact> {
    let (group, report) = lift_system(system)?;
    let passed = report.all_passed;
    Ok(Artifact::report(
        json!({ "group": GroupFile::from_group(&group), "report": report }),
        passed,
    ))
}

/// Runs the checks in `only` (all when empty), reporting each to `progress`
/// with its wall-clock time, which stays out of the report.
pub fn verify(
    system: &FieldSystem,
    cfg: &RunConfig,
    only: &[u32],
    mut progress: impl FnMut(&CheckResult, Duration),
) -> Result<Artifact> {
    let suite = Suite::new(system, cfg.suite)?;
    for id in only {
        if !CHECKS.iter().any(|c| c.id == *id) {
            return Err(Error::InvalidInput(format!("no check with id {id}")));
        }
    }
    let mut results = Vec::new();
    for info in CHECKS.iter().filter(|c| only.is_empty() || only.contains(&c.id)) {
        let clock = std::time::Instant::now();
        let r = suite.run(info.id);
        progress(&r, clock.elapsed());
        results.push(r);
    }
    let report = SuiteReport::new(&suite, results);
    let mut table = Table::new(["id", "check", "status", "metric", "value", "limit"].map(String::from).to_vec());
    for c in &report.checks {
        let status = match c.status {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        };
        if c.metrics.is_empty() {
            table.rows.push(vec![c.id.to_string(), c.name.clone(), status.into(), String::new(), String::new(), String::new()]);
        }
        for m in &c.metrics {
            table.rows.push(vec![
                c.id.to_string(),
                c.name.clone(),
                status.into(),
                m.name.clone(),
                number(m.value),
                number(m.limit),
            ]);
        }
    }
    Ok(Artifact {
        passed: report.all_passed,
        json: serde_json::to_value(&report)?,
        table: Some(table),
    })
}

/// `gamma_G(t, g)` with `g` in split coordinates.
pub fn kernel_eval(system: &FieldSystem, cfg: &RunConfig, t: f64, g: &[f64]) -> Result<Artifact> {
    let group = Arc::new(lift_system(system)?.0);
    check_len("g", g, group.dim())?;
    let k = GroupHeatKernel::new(group.clone(), cfg.kernel)?;
    let value = k.gamma(t, g)?;
    let mut table = Table::new(std::iter::once("t".into()).chain(indexed("g", g.len())).chain(["gamma".into()]).collect());
    table.push_numbers(std::iter::once(t).chain(g.iter().copied()).chain([value]));
    Ok(Artifact {
        json: json!({ "family": k.family().name(), "t": t, "g": g, "gamma": value }),
        table: Some(table),
        passed: true,
    })
}

pub fn kernel_selftest(system: &FieldSystem, cfg: &RunConfig) -> Result<Artifact> {
    let group = Arc::new(lift_system(system)?.0);
    let k = GroupHeatKernel::new(group, cfg.kernel)?;
    let report = kernel::kernel_selftest(&k, &cfg.selftest)?;
    Ok(Artifact::report(serde_json::to_value(&report)?, report.all_passed))
}

/// `Gamma(t, x; s, y)` or one of its derivatives.
pub fn gamma_eval(
    system: &FieldSystem,
    cfg: &RunConfig,
    (t, x): (f64, &[f64]),
    (s, y): (f64, &[f64]),
    derivative: Option<&DerivativeSpec>,
) -> Result<Artifact> {
    let k = saturated(system, cfg)?;
    let (value, error) = match derivative {
        Some(spec) => {
            let e = k.gamma_derivative(spec, t, x, s, y)?;
            (e.value, e.error)
        }
        None => {
            let r = k.gamma_sat_with_error(t, x, s, y)?;
            (r.value, r.error)
        }
    };
    let n = x.len();
    let mut table = Table::new(
        ["t".into()]
            .into_iter()
            .chain(indexed("x", n))
            .chain(["s".into()])
            .chain(indexed("y", n))
            .chain(["value".into(), "error".into()])
            .collect(),
    );
    table.push_numbers([t].into_iter().chain(x.iter().copied()).chain([s]).chain(y.iter().copied()).chain([value, error]));
    Ok(Artifact {
        json: json!({ "t": t, "x": x, "s": s, "y": y, "derivative": derivative, "value": value, "error": error }),
        table: Some(table),
        passed: true,
    })
}

/// Regular points of the box `lo..hi` with `points` nodes per axis, last axis fastest.
pub fn box_points(lo: &[f64], hi: &[f64], points: usize) -> Result<Vec<Vec<f64>>> {
    if lo.len() != hi.len() || points < 2 {
        return Err(Error::InvalidInput("grid needs matching corners and at least 2 points per axis".into()));
    }
    let n = lo.len();
    let total = points.checked_pow(n as u32).ok_or_else(|| Error::InvalidInput("grid too large".into()))?;
    Ok((0..total)
        .map(|mut code| {
            let mut p = vec![0.0; n];
            for k in (0..n).rev() {
                let i = code % points;
                code /= points;
                p[k] = lo[k] + (hi[k] - lo[k]) * i as f64 / (points - 1) as f64;
            }
            p
        })
        .collect())
}

/// `Gamma(t, x; s, y)` for `y` on a grid; columns `s, y1..yn, gamma`.
pub fn gamma_grid(
    system: &FieldSystem,
    cfg: &RunConfig,
    (t, x): (f64, &[f64]),
    s: f64,
    (lo, hi, points): (&[f64], &[f64], usize),
) -> Result<Artifact> {
    let k = saturated(system, cfg)?;
    check_len("x", x, k.n())?;
    check_len("lo", lo, k.n())?;
    let ys = box_points(lo, hi, points)?;
    let mut table = Table::new(["s".into()].into_iter().chain(indexed("y", k.n())).chain(["gamma".into()]).collect());
    for y in &ys {
        let v = if s == t && y.as_slice() == x { f64::INFINITY } else { k.gamma_sat(t, x, s, y)? };
        table.push_numbers([s].into_iter().chain(y.iter().copied()).chain([v]));
    }
    Ok(Artifact {
        json: json!({ "t": t, "x": x, "s": s, "table": &table }),
        table: Some(table),
        passed: true,
    })
}

/// `u(t, x)` at each point; columns `t, x1..xn, u`.
pub fn cauchy(system: &FieldSystem, cfg: &RunConfig, datum: &BoundedInitialDatum, t: f64, points: &[Vec<f64>]) -> Result<Artifact> {
    let k = saturated(system, cfg)?;
    let mut table = Table::new(["t".into()].into_iter().chain(indexed("x", k.n())).chain(["u".into()]).collect());
    let mut sup = 0.0f64;
    for x in points {
        check_len("x", x, k.n())?;
        let u = solve_cauchy(&k, datum, t, x)?.value;
        sup = sup.max(u.abs());
        table.push_numbers([t].into_iter().chain(x.iter().copied()).chain([u]));
    }
    Ok(Artifact {
        json: json!({ "datum": datum.name, "bound": datum.bound, "t": t, "sup_abs_u": sup, "table": &table }),
        table: Some(table),
        passed: true,
    })
}

/// Monte Carlo histogram of the diffusion from `start`.
pub fn oracle_mc(system: &FieldSystem, mc: &DiffusionConfig, start: &[f64], t0: f64, t1: f64) -> Result<Artifact> {
    let report = mc_density(&system.fields, start, t0, t1, mc)?;
    let n = start.len();
    let mut table = Table::new(
        indexed("lo", n)
            .chain(indexed("hi", n))
            .chain(["hits".into(), "density".into(), "std_error".into()])
            .collect(),
    );
    for b in &report.bins {
        table.push_numbers(b.lo.iter().chain(&b.hi).copied().chain([b.hits as f64, b.density, b.std_error]));
    }
    Ok(Artifact {
        json: serde_json::to_value(&report)?,
        table: Some(table),
        passed: true,
    })
}

/// Finite-difference Grushin solution at `probes`, extrapolated from `grid`
/// and its refinement.
pub fn oracle_fd(grid: &GridSpec, datum: &BoundedInitialDatum, t: f64, probes: &[Vec<f64>]) -> Result<Artifact> {
    for p in probes {
        check_len("probe", p, 2)?;
    }
    let bad = RefCell::new(None);
    let phi = |y: &[f64]| match datum.eval(y) {
        Ok(v) => v,
        Err(e) => {
            bad.borrow_mut().get_or_insert(e.to_string());
            f64::NAN
        }
    };
    let est = fd_cauchy_reference(grid, phi, t, probes)?;
    if let Some(e) = bad.into_inner() {
        return Err(Error::InvalidInput(e));
    }
    let mut table = Table::new(["t", "x1", "x2", "u", "error"].map(String::from).to_vec());
    for (p, e) in probes.iter().zip(&est) {
        table.push_numbers([t].into_iter().chain(p.iter().copied()).chain([e.value, e.error]));
    }
    Ok(Artifact {
        json: json!({ "grid": grid, "datum": datum.name, "t": t, "table": &table }),
        table: Some(table),
        passed: true,
    })
}

/// Reads a field-system file.
pub fn load_system(path: &Path) -> Result<FieldSystem> {
    FieldSystem::load(path)
}
