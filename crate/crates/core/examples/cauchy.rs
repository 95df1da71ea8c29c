//! Bounded solution of u_t = u_x1x1 + x1^2 u_x2x2 with u(0) = exp(-|y|^2),
//! against the finite-difference oracle.

use std::sync::Arc;

use hypoheat::carnot::lift_system;
use hypoheat::cauchy::{solve_cauchy, BoundedInitialDatum};
use hypoheat::io::grushin;
use hypoheat::kernel::{GroupHeatKernel, KernelConfig};
use hypoheat::oracle::{fd_cauchy_reference, GridSpec};
use hypoheat::saturation::{SaturatedKernel, SaturationConfig};

fn main() -> hypoheat::Result<()> {
    let group = Arc::new(lift_system(&grushin())?.0);
    let k = SaturatedKernel::new(
        GroupHeatKernel::new(group, KernelConfig::default())?,
        SaturationConfig { rel_tol: 1e-4, ..Default::default() },
    );
    let phi = BoundedInitialDatum::builtin("gauss")?;
    let probes = vec![vec![0.0, 0.0], vec![0.5, 0.0]];
    let grid = GridSpec { lo: [-5.0, -6.0], hi: [5.0, 6.0], cells: [60, 72], dt: None };
    let fd = fd_cauchy_reference(&grid, |y| (-(y[0] * y[0] + y[1] * y[1])).exp(), 0.5, &probes)?;
    for (x, reference) in probes.iter().zip(&fd) {
        let u = solve_cauchy(&k, &phi, 0.5, x)?;
        println!("u(0.5, {x:?}) = {:.6}   finite differences {:.6} +- {:.1e}", u.value, reference.value, reference.error);
    }
    Ok(())
}
