//! Derivatives of Gamma from the lifted kernel, checked against the forward
//! equation d_s Gamma = (X_1^2 + X_2^2)_y Gamma.

use std::sync::Arc;

use hypoheat::carnot::lift_system;
use hypoheat::io::grushin;
use hypoheat::kernel::{GroupHeatKernel, KernelConfig};
use hypoheat::saturation::{DerivativeSpec, SaturatedKernel, SaturationConfig};

fn main() -> hypoheat::Result<()> {
    let group = Arc::new(lift_system(&grushin())?.0);
    let k = SaturatedKernel::new(
        GroupHeatKernel::new(group, KernelConfig::default())?,
        SaturationConfig { rel_tol: 1e-8, ..Default::default() },
    );
    let (x, y) = ([0.2, -0.1], [0.6, 0.4]);
    let d = |text: &str| -> hypoheat::Result<f64> {
        let e = k.gamma_derivative(&DerivativeSpec::parse(text)?, 0.0, &x, 1.0, &y)?;
        println!("{text:<16} {:+.10} +- {:.1e}", e.value, e.error);
        Ok(e.value)
    };
    let ds = d("alpha=1")?;
    let sub_laplacian = d("y=1.1")? + d("y=2.2")?;
    d("x=1,y=2")?;
    d("beta=1,x=2")?;
    println!("forward equation residual {:.1e}", ds - sub_laplacian);
    Ok(())
}
