use std::sync::Arc;

use hypoheat::carnot::{lift_system, CarnotGroup};
use hypoheat::io::{engel, grushin as grushin_system, FieldSystem};
use hypoheat::kernel::{
    gamma_abelian, gaussian_sandwich, kernel_selftest, GroupHeatKernel, KernelConfig, KernelConstants,
    SelftestConfig, TabulatedKernel,
};
use proptest::prelude::*;

fn grushin() -> Arc<CarnotGroup> {
    Arc::new(lift_system(&grushin_system()).unwrap().0)
}

fn grushin_kernel() -> GroupHeatKernel {
    GroupHeatKernel::new(grushin(), KernelConfig::default()).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn euclidean_gaussian_values() {
    assert!((gamma_abelian(1.0, &[0.0]) - 0.282_094_791_773_878_1).abs() < 1e-15);
    assert_eq!(gamma_abelian(-1.0, &[0.3]), 0.0);
    assert_eq!(gamma_abelian(0.0, &[0.3]), 0.0);
    let r = gamma_abelian(1.0, &[0.7]) / gamma_abelian(4.0, &[1.4]);
    assert!((r - 2.0).abs() < 1e-14);
}

#[test]
fn heisenberg_kernel_matches_closed_form_on_the_centre() {
    // p_t(0, z) = t^{-2} sech^2(pi z / 2t) / 16 for the generator X^2 + Y^2 with [X, Y] = d_z.
    let k = grushin_kernel();
    for &(t, z) in &[(1.0, 0.0), (1.0, 0.5), (1.0, 2.0), (0.5, 0.3), (2.0, -3.0), (1.0, 6.0)] {
        let exact = (std::f64::consts::PI * z / (2.0 * t)).cosh().powi(-2) / (16.0 * t * t);
        let v = k.gamma_exp(t, &[0.0, 0.0, z]).unwrap();
        assert!((v - exact).abs() < 1e-9 * exact + 1e-15, "t={t} z={z}: {v} vs {exact}");
    }
    // In split coordinates the density carries 1/|det DTheta| = 1.
    assert!(rel(k.gamma(1.0, &[0.0, 0.0, 0.0]).unwrap(), 1.0 / 16.0) < 1e-10);
}

#[test]
fn heisenberg_kernel_off_the_centre_matches_radial_formula() {
    // At z = 0 the kernel is (8 pi^2)^{-1} int l/sinh(l) exp(-r^2 l coth(l) / 4) dl at t = 1.
    let k = grushin_kernel();
    for &r in &[0.5f64, 1.0, 2.5] {
        let f = |l: f64| {
            if l == 0.0 {
                (-r * r / 4.0).exp()
            } else {
                l / l.sinh() * (-r * r * l / l.tanh() / 4.0).exp()
            }
        };
        let mut acc = 0.0;
        let n = 200_000;
        let hstep = 60.0 / n as f64;
        for i in 0..n {
            let (a, b) = (i as f64 * hstep, (i + 1) as f64 * hstep);
            acc += hstep / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b));
        }
        let exact = 2.0 * acc / (8.0 * std::f64::consts::PI.powi(2));
        let v = k.gamma_exp(1.0, &[r, 0.0, 0.0]).unwrap();
        assert!(rel(v, exact) < 1e-9, "r={r}: {v} vs {exact}");
    }
}

#[test]
fn grushin_kernel_vanishes_for_nonpositive_time_and_scales_with_q4() {
    let k = grushin_kernel();
    assert_eq!(k.gamma(-0.5, &[0.1, 0.2, 0.3]).unwrap(), 0.0);
    assert_eq!(k.big_q(), 4.0);
    let g = [0.4, -0.3, 0.7];
    let a = k.gamma(4.0, &k.group().dilate(2.0, &g)).unwrap();
    let b = k.gamma(1.0, &g).unwrap() / 16.0;
    assert!(rel(a, b) < 1e-12);
}

#[test]
fn grushin_kernel_selftest_passes() {
    let k = grushin_kernel();
    let report = kernel_selftest(&k, &SelftestConfig::default()).unwrap();
    assert!(report.all_passed, "{}", serde_json::to_string_pretty(&report).unwrap());
}

#[test]
fn euclidean_kernel_selftest_passes_at_1e8() {
    let k = GroupHeatKernel::new(Arc::new(CarnotGroup::abelian(1, 1).unwrap()), KernelConfig::default()).unwrap();
    let report = kernel_selftest(&k, &SelftestConfig::uniform(1e-8)).unwrap();
    assert!(report.all_passed, "{}", serde_json::to_string_pretty(&report).unwrap());
}

#[test]
fn misscaled_kernel_fails_normalization_only() {
    let k = grushin_kernel().scaled(1.01);
    let report = kernel_selftest(&k, &SelftestConfig::default()).unwrap();
    assert!(!report.property("normalization").unwrap().passed);
    for name in ["inverse_symmetry", "homogeneity", "pde_residual", "nonnegativity"] {
        assert!(report.property(name).unwrap().passed, "{name}");
    }
}

#[test]
fn two_dimensional_centre_factorises_for_a_product_of_heisenberg_groups() {
    // Two Grushin planes side by side; coordinates ordered by weight.
    let sys = FieldSystem::from_strings(
        &["1", "1", "2", "2"],
        &[&["1", "0", "0", "0"], &["0", "0", "x1", "0"], &["0", "1", "0", "0"], &["0", "0", "0", "x2"]],
    )
    .unwrap();
    let group = Arc::new(lift_system(&sys).unwrap().0);
    assert_eq!(group.p(), 2);
    let k = GroupHeatKernel::new(group.clone(), KernelConfig::default()).unwrap();
    let h = grushin_kernel();
    let labels = group.algebra().word_labels();
    let pos = |w: &str| labels.iter().position(|l| l == w).unwrap();
    let (e13, e24) = (pos("[X1,X2]"), pos("[X3,X4]"));
    for &(t, a) in &[
        (1.0, [0.3, -0.2, 0.5, 0.1, 0.4, -0.6]),
        (0.7, [0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
        (1.5, [1.0, 0.5, -0.5, 0.2, 1.5, 0.3]),
    ] {
        let mut v = [0.0; 6];
        v[0] = a[0];
        v[1] = a[1];
        v[2] = a[2];
        v[3] = a[3];
        v[e13] = a[4];
        v[e24] = a[5];
        let full = k.gamma_exp(t, &v).unwrap();
        let left = h.gamma_exp(t, &[a[0], a[1], a[4]]).unwrap();
        let right = h.gamma_exp(t, &[a[2], a[3], a[5]]).unwrap();
        assert!(rel(full, left * right) < 1e-8, "{full} vs {}", left * right);
    }
}

#[test]
fn tabulated_kernel_interpolates_and_extends_by_homogeneity() {
    let group = grushin();
    let k = grushin_kernel();
    let tab = TabulatedKernel::sample(&group, vec![-3.0, -6.0, -3.0], vec![3.0, 6.0, 3.0], vec![41, 41, 41], |g| {
        k.gamma(1.0, g)
    })
    .unwrap();
    let ext = GroupHeatKernel::external(group.clone(), Arc::new(tab), KernelConfig::default());
    let g = [0.35, -0.45, 0.25];
    assert!(rel(ext.gamma(1.0, &g).unwrap(), k.gamma(1.0, &g).unwrap()) < 1e-2);
    let g2 = group.dilate(2.0, &g);
    assert!(rel(ext.gamma(4.0, &g2).unwrap() * 16.0, ext.gamma(1.0, &g).unwrap()) < 1e-12);
    assert_eq!(ext.gamma(-1.0, &g).unwrap(), 0.0);
    assert_eq!(ext.family().name(), "external");
}

#[test]
fn engel_has_no_kernel() {
    let g = Arc::new(lift_system(&engel()).unwrap().0);
    assert!(GroupHeatKernel::new(g, KernelConfig::default()).is_err());
}

#[test]
fn fitted_constants_exist_for_grushin() {
    let k = grushin_kernel();
    let c = KernelConstants::fit(&k).unwrap();
    let gc = c.gauss_c.expect("a sandwich constant on the grid");
    assert!(gc <= 50.0, "c = {gc}");
    assert!(c.beta > 0.0 && c.beta.is_finite());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sandwich_is_ordered_and_homogeneous(t in 0.1f64..5.0, h in 0.0f64..4.0, c in 1.0f64..40.0, lam in 0.3f64..3.0) {
        let (lo, hi) = gaussian_sandwich(t, h, c, 4.0);
        prop_assert!(lo <= hi);
        let (lo2, hi2) = gaussian_sandwich(lam * lam * t, lam * h, c, 4.0);
        prop_assert!((lo2 * lam.powi(4) - lo).abs() <= 1e-12 * lo.max(1e-300));
        prop_assert!((hi2 * lam.powi(4) - hi).abs() <= 1e-12 * hi);
    }

    #[test]
    fn grushin_kernel_is_inverse_symmetric(x1 in -1.5f64..1.5, x2 in -2.0f64..2.0, xi in -1.5f64..1.5, t in 0.3f64..3.0) {
        let k = grushin_kernel();
        let g = [x1, x2, xi];
        let a = k.gamma(t, &g).unwrap();
        let b = k.gamma(t, &k.group().inv(&g)).unwrap();
        prop_assert!(a >= 0.0);
        prop_assert!((a - b).abs() <= 1e-8 * a.max(1e-12 * k.peak(t).unwrap()));
    }
}
