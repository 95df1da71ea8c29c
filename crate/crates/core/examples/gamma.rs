//! The saturated kernel Gamma(t, x; s, y) of the Grushin operator
//! d_x1^2 + x1^2 d_x2^2 - d_t: values, symmetry, homogeneity and mass.

use std::sync::Arc;

use hypoheat::carnot::lift_system;
use hypoheat::io::grushin;
use hypoheat::kernel::{GroupHeatKernel, KernelConfig};
use hypoheat::saturation::{SaturatedKernel, SaturationConfig};

fn main() -> hypoheat::Result<()> {
    let group = Arc::new(lift_system(&grushin())?.0);
    let k = SaturatedKernel::new(GroupHeatKernel::new(group, KernelConfig::default())?, SaturationConfig::default());

    let (x, y) = ([0.3, -0.2], [0.8, 0.5]);
    let g = k.gamma_sat_with_error(0.0, &x, 1.0, &y)?;
    println!("Gamma(0, x; 1, y) = {:.10} +- {:.1e} ({} evaluations)", g.value, g.error, g.evaluations);
    println!("Gamma(0, y; 1, x) = {:.10}", k.gamma_sat(0.0, &y, 1.0, &x)?);
    let (lhs, rhs) = k.homogeneity_probe(2.0, 0.0, &x, 1.0, &y)?;
    println!("lambda^q Gamma(dilated) = {lhs:.10}, Gamma = {rhs:.10}");

    let cheap = k.with_config(SaturationConfig { rel_tol: 1e-4, ..Default::default() });
    println!("int Gamma(0, x; 1, y) dy = {:.8}", cheap.mass(&x, 1.0)?.value);
    Ok(())
}
