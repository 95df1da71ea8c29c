//! Explicit finite differences for `u_t = u_{x1 x1} + x1^2 u_{x2 x2}` on a box.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fdiff::Estimate;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    pub cells: [usize; 2],
    /// Time step; the largest stable step below `0.9` of the CFL bound when absent.
    #[serde(default)]
    pub dt: Option<f64>,
}

impl GridSpec {
    pub fn spacing(&self) -> [f64; 2] {
        [
            (self.hi[0] - self.lo[0]) / self.cells[0] as f64,
            (self.hi[1] - self.lo[1]) / self.cells[1] as f64,
        ]
    }

    /// Largest stable forward-Euler step.
    pub fn cfl_limit(&self) -> f64 {
        let [h1, h2] = self.spacing();
        let a = self.lo[0].abs().max(self.hi[0].abs());
        1.0 / (2.0 / (h1 * h1) + 2.0 * a * a / (h2 * h2))
    }

    pub fn refined(&self) -> Self {
        Self {
            cells: [2 * self.cells[0], 2 * self.cells[1]],
            dt: self.dt.map(|d| d / 4.0),
            ..self.clone()
        }
    }

    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        let [h1, h2] = self.spacing();
        [self.lo[0] + i as f64 * h1, self.lo[1] + j as f64 * h2]
    }
}

/// Grid values at the final time, `values[i * (cells[1] + 1) + j]` at node `(i, j)`.
#[derive(Clone, Debug)]
pub struct FdSolution {
    pub grid: GridSpec,
    pub dt: f64,
    pub steps: usize,
    pub values: Vec<f64>,
}

impl FdSolution {
    /// Bilinear interpolation; `None` outside the box.
    pub fn at(&self, x: &[f64]) -> Option<f64> {
        let g = &self.grid;
        let [h1, h2] = g.spacing();
        let r1 = (x[0] - g.lo[0]) / h1;
        let r2 = (x[1] - g.lo[1]) / h2;
        if !(0.0..=g.cells[0] as f64).contains(&r1) || !(0.0..=g.cells[1] as f64).contains(&r2) {
            return None;
        }
        let i = (r1.floor() as usize).min(g.cells[0] - 1);
        let j = (r2.floor() as usize).min(g.cells[1] - 1);
        let (a, b) = (r1 - i as f64, r2 - j as f64);
        let stride = g.cells[1] + 1;
        let v = |i: usize, j: usize| self.values[i * stride + j];
        Some(
            (1.0 - a) * (1.0 - b) * v(i, j)
                + a * (1.0 - b) * v(i + 1, j)
                + (1.0 - a) * b * v(i, j + 1)
                + a * b * v(i + 1, j + 1),
        )
    }
}

/// Solves the Grushin heat equation from `phi` up to time `t_end`. Boundary
/// nodes keep their initial values, which is exact for constants and
/// negligible for data decaying like a Gaussian.
pub fn fd_cauchy_solver<F: Fn(&[f64]) -> f64>(grid: &GridSpec, phi: F, t_end: f64) -> Result<FdSolution> {
    if grid.cells[0] < 2 || grid.cells[1] < 2 || !(t_end >= 0.0) {
        return Err(Error::InvalidInput("grid needs at least 2 cells per axis and t_end >= 0".into()));
    }
    let limit = grid.cfl_limit();
    let dt_max = match grid.dt {
        Some(dt) if dt > limit => {
            return Err(Error::InvalidInput(format!("time step {dt} violates the CFL bound {limit}")));
        }
        Some(dt) if dt > 0.0 => dt,
        Some(dt) => return Err(Error::InvalidInput(format!("time step {dt} is not positive"))),
        None => 0.9 * limit,
    };
    let steps = (t_end / dt_max).ceil() as usize;
    let dt = if steps == 0 { 0.0 } else { t_end / steps as f64 };
    let [h1, h2] = grid.spacing();
    let (n1, n2) = (grid.cells[0] + 1, grid.cells[1] + 1);
    let mut u: Vec<f64> = (0..n1 * n2).map(|k| phi(&grid.node(k / n2, k % n2))).collect();
    let mut next = u.clone();
    let c1 = dt / (h1 * h1);
    let c2: Vec<f64> = (0..n1)
        .map(|i| {
            let x1 = grid.node(i, 0)[0];
            dt * x1 * x1 / (h2 * h2)
        })
        .collect();
    for _ in 0..steps {
        for i in 1..n1 - 1 {
            for j in 1..n2 - 1 {
                let k = i * n2 + j;
                next[k] = u[k] + c1 * (u[k + n2] - 2.0 * u[k] + u[k - n2]) + c2[i] * (u[k + 1] - 2.0 * u[k] + u[k - 1]);
            }
        }
        std::mem::swap(&mut u, &mut next);
    }
    Ok(FdSolution {
        grid: grid.clone(),
        dt,
        steps,
        values: u,
    })
}

/// Values at `probes` from `grid` and its refinement, extrapolated assuming
/// second-order convergence. The error is a third of the difference.
pub fn fd_cauchy_reference<F: Fn(&[f64]) -> f64>(grid: &GridSpec, phi: F, t_end: f64, probes: &[Vec<f64>]) -> Result<Vec<Estimate>> {
    let coarse = fd_cauchy_solver(grid, &phi, t_end)?;
    let fine = fd_cauchy_solver(&grid.refined(), &phi, t_end)?;
    probes
        .iter()
        .map(|p| {
            let (c, f) = match (coarse.at(p), fine.at(p)) {
                (Some(c), Some(f)) => (c, f),
                _ => return Err(Error::Domain(format!("probe {p:?} outside the grid"))),
            };
            Ok(Estimate {
                value: f + (f - c) / 3.0,
                error: (f - c).abs() / 3.0,
            })
        })
        .collect()
}
