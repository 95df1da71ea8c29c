//! Histogram of the diffusion generated by X_1^2 + X_2^2 against bin averages
//! of Gamma(0, 0; 1, .).

use std::sync::Arc;

use hypoheat::carnot::lift_system;
use hypoheat::io::grushin;
use hypoheat::kernel::{GroupHeatKernel, KernelConfig};
use hypoheat::oracle::{mc_density, DiffusionConfig};
use hypoheat::quad::tensor;
use hypoheat::saturation::{SaturatedKernel, SaturationConfig};

fn main() -> hypoheat::Result<()> {
    let system = grushin();
    let group = Arc::new(lift_system(&system)?.0);
    let k = SaturatedKernel::new(GroupHeatKernel::new(group, KernelConfig::default())?, SaturationConfig::default());
    let cfg = DiffusionConfig {
        dt: 1e-3,
        paths: 100_000,
        seed: 1,
        lo: vec![-1.5, -1.5],
        hi: vec![1.5, 1.5],
        bins: vec![3, 3],
    };
    let report = mc_density(&system.fields, &[0.0, 0.0], 0.0, 1.0, &cfg)?;
    for b in &report.bins {
        let area = (b.hi[0] - b.lo[0]) * (b.hi[1] - b.lo[1]);
        let exact = tensor(&b.lo, &b.hi, &[1, 1], 4, |y| k.gamma_sat(0.0, &[0.0, 0.0], 1.0, y))?.value / area;
        println!(
            "{:?}..{:?}  {:.5} +- {:.5}   Gamma {:.5}  z = {:+.2}",
            b.lo, b.hi, b.density, b.std_error, exact, (b.density - exact) / b.std_error
        );
    }
    Ok(())
}
