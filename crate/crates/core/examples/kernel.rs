//! The heat kernel of the lifted Grushin group (a Heisenberg group) and its
//! numerical self-test.

use std::sync::Arc;

use hypoheat::carnot::lift_system;
use hypoheat::io::grushin;
use hypoheat::kernel::{kernel_selftest, GroupHeatKernel, KernelConfig, SelftestConfig};

fn main() -> hypoheat::Result<()> {
    let group = Arc::new(lift_system(&grushin())?.0);
    let k = GroupHeatKernel::new(group, KernelConfig::default())?;
    for t in [0.25, 1.0, 4.0] {
        println!("gamma({t}, 0) = {:.12}", k.gamma(t, &[0.0; 3])?);
    }
    println!("gamma(1, (0.5, -0.3, 0.2)) = {:.12}", k.gamma(1.0, &[0.5, -0.3, 0.2])?);

    let report = kernel_selftest(&k, &SelftestConfig::default())?;
    for p in &report.properties {
        println!("{:<28} {:.2e} (tolerance {:.0e}) {}", p.name, p.measured, p.tolerance, p.passed);
    }
    Ok(())
}
