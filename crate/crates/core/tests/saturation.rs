use std::sync::Arc;

use hypoheat::carnot::{lift_system, CarnotGroup};
use hypoheat::io::grushin;
use hypoheat::kernel::{GroupHeatKernel, KernelConfig, C_GRID};
use hypoheat::oracle::{fd_derivative, mc_density, word_directions, DiffusionConfig};
use hypoheat::polyalg::parse_polynomial;
use hypoheat::saturation::{inverse_pushforward, DerivativeSpec, SaturatedKernel, SaturationConfig, WordPlacement};
use proptest::prelude::*;

fn grushin_sat(rel_tol: f64) -> SaturatedKernel {
    let group = Arc::new(lift_system(&grushin()).unwrap().0);
    let k = GroupHeatKernel::new(group, KernelConfig::default()).unwrap();
    SaturatedKernel::new(
        k,
        SaturationConfig {
            rel_tol,
            ..Default::default()
        },
    )
}

fn abelian_sat() -> SaturatedKernel {
    let group = Arc::new(CarnotGroup::abelian(1, 1).unwrap());
    let k = GroupHeatKernel::new(group, KernelConfig::default()).unwrap();
    SaturatedKernel::new(
        k,
        SaturationConfig {
            rel_tol: 1e-10,
            ..Default::default()
        },
    )
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn abelian_saturation_is_the_one_dimensional_gaussian() {
    let k = abelian_sat();
    // (4 pi)^{-1/2}
    assert!((k.gamma_sat(0.0, &[0.0], 1.0, &[0.0]).unwrap() - 0.282_094_791_773_878_1).abs() < 1e-8);
    for &(t, x) in &[(0.25, 0.3), (1.0, -1.2), (4.0, 2.5)] {
        let exact = (4.0 * std::f64::consts::PI * t).powf(-0.5) * (-x * x / (4.0 * t)).exp();
        assert!(rel(k.gamma_sat(0.0, &[0.0], t, &[x]).unwrap(), exact) < 1e-9);
    }
    let (lhs, rhs) = k.homogeneity_probe(3.0, 0.0, &[0.2], 1.0, &[0.5]).unwrap();
    assert!(rel(lhs, rhs) < 1e-9);
    assert_eq!(k.q(), 1.0);
}

#[test]
fn causality_and_the_pole() {
    let k = grushin_sat(1e-6);
    assert_eq!(k.gamma_sat(1.0, &[0.1, 0.2], 1.0, &[0.3, 0.1]).unwrap(), 0.0);
    assert_eq!(k.gamma_sat(2.0, &[0.1, 0.2], 1.0, &[0.3, 0.1]).unwrap(), 0.0);
    assert!(k.gamma_sat(1.0, &[0.1, 0.2], 1.0, &[0.1, 0.2]).is_err());
    assert!(k.gamma_sat(0.0, &[0.0, 0.0], 1.0, &[0.0, 0.0]).unwrap() > 0.0);
    assert_eq!(k.gamma_star(0.0, &[0.1, 0.2], 1.0, &[0.3, 0.1]).unwrap(), 0.0);
    assert!(k.gamma_star(1.0, &[0.1, 0.2], 0.0, &[0.3, 0.1]).unwrap() > 0.0);
}

#[test]
fn adjoint_by_swap_and_by_lifted_integral() {
    let k = grushin_sat(1e-8);
    let (x, y) = ([0.4, -0.3], [-0.2, 0.5]);
    let direct = k.gamma_sat(0.0, &x, 1.0, &y).unwrap();
    assert_eq!(k.gamma_star(1.0, &y, 0.0, &x).unwrap(), direct);
    let lifted = k.gamma_star_lifted(1.0, &y, 0.0, &x).unwrap();
    assert!(rel(lifted, direct) < 1e-6, "{lifted} vs {direct}");
}

#[test]
fn grushin_origin_value_matches_monte_carlo() {
    let k = grushin_sat(1e-8);
    let sys = grushin();
    let cfg = DiffusionConfig {
        dt: 1e-3,
        paths: 200_000,
        seed: 7,
        lo: vec![-0.25, -0.25],
        hi: vec![0.25, 0.25],
        bins: vec![1, 1],
    };
    let mc = mc_density(&sys.fields, &[0.0, 0.0], 0.0, 1.0, &cfg).unwrap();
    let bin = &mc.bins[0];
    let avg = hypoheat::quad::tensor(&bin.lo, &bin.hi, &[1, 1], 4, |y| k.gamma_sat(0.0, &[0.0, 0.0], 1.0, y))
        .unwrap()
        .value
        / 0.25;
    assert!(rel(bin.density, avg) < 0.05, "{} vs {avg}", bin.density);
}

#[test]
fn mass_is_one() {
    let k = grushin_sat(1e-4);
    let m = k.mass(&[0.3, -0.2], 0.5).unwrap();
    assert!((m.value - 1.0).abs() < 1e-4, "{}", m.value);
}

#[test]
fn derivative_spec_parsing_and_placement() {
    let s = DerivativeSpec::parse("alpha=1, y=1.2, x=2").unwrap();
    assert_eq!(s.alpha, 1);
    assert_eq!(s.beta, 0);
    assert_eq!(s.y_word, vec![1, 2]);
    assert_eq!(s.x_word, vec![2]);
    assert_eq!(s.placement(), WordPlacement::Mixed);
    assert_eq!(DerivativeSpec::parse("").unwrap(), DerivativeSpec::default());
    assert!(DerivativeSpec::parse("gamma=1").is_err());
    assert!(DerivativeSpec::parse("y=a").is_err());
    let k = grushin_sat(1e-6);
    let bad = DerivativeSpec::parse("y=3").unwrap();
    assert!(k.gamma_derivative(&bad, 0.0, &[0.0, 0.0], 1.0, &[0.5, 0.5]).is_err());
}

#[test]
fn empty_derivative_is_the_value() {
    let k = grushin_sat(1e-8);
    let (x, y) = ([0.3, 0.2], [0.5, -0.1]);
    let d = k.gamma_derivative(&DerivativeSpec::default(), 0.0, &x, 1.0, &y).unwrap();
    assert!(rel(d.value, k.gamma_sat(0.0, &x, 1.0, &y).unwrap()) < 1e-7);
}

#[test]
fn y_derivative_matches_finite_differences_along_the_flow() {
    let k = grushin_sat(1e-6);
    let tight = grushin_sat(1e-11);
    let sys = grushin();
    let (x, y) = ([0.3, 0.2], [0.5, -0.1]);
    let spec = DerivativeSpec {
        y_word: vec![1],
        ..Default::default()
    };
    let d = k.gamma_derivative(&spec, 0.0, &x, 1.0, &y).unwrap();
    let dirs = word_directions(&sys.fields, &[0], 2).unwrap();
    let fd = fd_derivative(|p| tight.gamma_sat(0.0, &x, 1.0, &p[2..]).unwrap(), &[x[0], x[1], y[0], y[1]], &dirs, 0.1, 3)
        .unwrap();
    assert!(rel(d.value, fd.value) < 1e-3, "{d:?} vs {fd:?}");
}

#[test]
fn gamma_solves_the_forward_equation_off_the_pole() {
    // d_s Gamma = (X_1^2 + X_2^2)_y Gamma.
    let k = grushin_sat(1e-8);
    let (x, y) = ([0.2, -0.1], [0.6, 0.4]);
    let d = |text: &str| k.gamma_derivative(&DerivativeSpec::parse(text).unwrap(), 0.0, &x, 1.0, &y).unwrap().value;
    let lhs = d("alpha=1");
    let rhs = d("y=1.1") + d("y=2.2");
    assert!((lhs - rhs).abs() < 1e-5 * lhs.abs().max(1e-3), "{lhs} vs {rhs}");
    // One t-derivative flips the sign of the s-derivative.
    assert!(rel(-d("beta=1"), lhs) < 1e-7);
}

#[test]
fn lifted_inverse_pushforward_intertwines_composition_with_inversion() {
    let group = lift_system(&grushin()).unwrap().0;
    let inv = group.inverse();
    let f = parse_polynomial("x1^2 x3 - 2 x2 x3 + x1 x2^2 + x3^3", 3).unwrap();
    for z in group.z_fields() {
        let w = inverse_pushforward(&group, z).unwrap();
        let lhs = z.apply(&f.compose(inv).unwrap()).unwrap();
        let rhs = w.apply(&f).unwrap().compose(inv).unwrap();
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn vanishing_along_a_diverging_sequence() {
    let k = grushin_sat(1e-6);
    let poles = vec![(0.0, vec![0.0, 0.0]), (0.5, vec![0.5, -0.5]), (0.2, vec![-0.5, 0.5])];
    let targets: Vec<(f64, Vec<f64>)> = (2..=10).map(|j| (1.0, vec![2.0 * j as f64, 0.0])).collect();
    let sup = k.vanishing_probe(&poles, &targets).unwrap();
    for w in sup.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-9) + 1e-15, "{sup:?}");
    }
    assert!(sup[sup.len() - 1] < 1e-8);
}

#[test]
fn gaussian_sandwich_constant_exists() {
    let k = grushin_sat(1e-6);
    let fit = k.fit_sandwich(&C_GRID).unwrap();
    assert!(fit.c.unwrap() <= 50.0, "{fit:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn homogeneity_with_q3(
        x1 in -1.0f64..1.0, x2 in -1.0f64..1.0, y1 in -1.0f64..1.0, y2 in -1.0f64..1.0,
        tau in 0.3f64..2.0, lam in prop::sample::select(vec![0.5, 2.0, 3.0]),
    ) {
        let k = grushin_sat(1e-8);
        let (lhs, rhs) = k.homogeneity_probe(lam, 0.1, &[x1, x2], 0.1 + tau, &[y1, y2]).unwrap();
        prop_assert!(rel(lhs, rhs) < 1e-5, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn space_symmetry(
        x1 in -1.0f64..1.0, x2 in -1.0f64..1.0, y1 in -1.0f64..1.0, y2 in -1.0f64..1.0, tau in 0.3f64..2.0,
    ) {
        let k = grushin_sat(1e-8);
        let a = k.gamma_sat(0.0, &[x1, x2], tau, &[y1, y2]).unwrap();
        let b = k.gamma_sat(0.0, &[y1, y2], tau, &[x1, x2]).unwrap();
        prop_assert!(rel(a, b) < 1e-5, "{} vs {}", a, b);
    }

    #[test]
    fn time_translation_and_reflection_are_bit_exact(
        i in -64i32..64, j in 1i32..128, x1 in -1.0f64..1.0, y2 in -1.0f64..1.0,
    ) {
        let k = grushin_sat(1e-6);
        let (t, tau) = (i as f64 / 64.0, j as f64 / 64.0);
        let (x, y) = ([x1, 0.1], [0.3, y2]);
        let base = k.gamma_sat(0.0, &x, tau, &y).unwrap();
        prop_assert_eq!(k.gamma_sat(t, &x, t + tau, &y).unwrap().to_bits(), base.to_bits());
        prop_assert_eq!(k.gamma_sat(-(t + tau), &x, -t, &y).unwrap().to_bits(), base.to_bits());
        prop_assert!(base >= 0.0);
    }
}
