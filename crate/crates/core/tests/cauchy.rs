use std::sync::Arc;

use hypoheat::carnot::{lift_system, CarnotGroup};
use hypoheat::cauchy::{potential_lambda, reproduction_check, solve_cauchy, BoundedInitialDatum, TabulatedDatum};
use hypoheat::io::grushin;
use hypoheat::kernel::{GroupHeatKernel, KernelConfig};
use hypoheat::oracle::{fd_cauchy_reference, GridSpec};
use hypoheat::saturation::{SaturatedKernel, SaturationConfig};

fn sat(group: CarnotGroup, rel_tol: f64) -> SaturatedKernel {
    let k = GroupHeatKernel::new(Arc::new(group), KernelConfig::default()).unwrap();
    SaturatedKernel::new(
        k,
        SaturationConfig {
            rel_tol,
            ..Default::default()
        },
    )
}

fn grushin_sat() -> SaturatedKernel {
    sat(lift_system(&grushin()).unwrap().0, 1e-4)
}

#[test]
fn zero_datum_gives_zero_and_one_gives_one() {
    let k = grushin_sat();
    let zero = BoundedInitialDatum::builtin("zero").unwrap();
    assert_eq!(solve_cauchy(&k, &zero, 0.7, &[0.2, 0.1]).unwrap().value, 0.0);
    let one = BoundedInitialDatum::builtin("one").unwrap();
    let u = solve_cauchy(&k, &one, 0.7, &[0.2, 0.1]).unwrap().value;
    assert!((u - 1.0).abs() < 1e-4, "{u}");
    assert!(solve_cauchy(&k, &one, 0.0, &[0.2, 0.1]).is_err());
}

#[test]
fn gaussian_datum_matches_the_finite_difference_solver_and_is_linear() {
    let k = grushin_sat();
    let gauss = BoundedInitialDatum::builtin("gauss").unwrap();
    let grid = GridSpec {
        lo: [-5.0, -6.0],
        hi: [5.0, 6.0],
        cells: [100, 120],
        dt: None,
    };
    let x = [0.0, 0.0];
    let fd = fd_cauchy_reference(&grid, |y| (-(y[0] * y[0] + y[1] * y[1])).exp(), 0.5, &[x.to_vec()]).unwrap();
    let u = solve_cauchy(&k, &gauss, 0.5, &x).unwrap().value;
    assert!((u - fd[0].value).abs() < 1e-2 * fd[0].value, "{u} vs {:?}", fd[0]);
    assert!(u.abs() <= 1.0);
    // Same nodes for every datum, so linearity holds to rounding.
    let combo = BoundedInitialDatum::new("combo", 5.0, |y| 2.0 * (-(y[0] * y[0] + y[1] * y[1])).exp() - 3.0);
    let v = solve_cauchy(&k, &combo, 0.5, &x).unwrap().value;
    let one = solve_cauchy(&k, &BoundedInitialDatum::builtin("one").unwrap(), 0.5, &x).unwrap().value;
    assert!((v - (2.0 * u - 3.0 * one)).abs() < 1e-12);
}

#[test]
fn bound_violations_are_reported() {
    let k = grushin_sat();
    let liar = BoundedInitialDatum::new("liar", 0.5, |y| (-(y[0] * y[0] + y[1] * y[1])).exp());
    assert!(solve_cauchy(&k, &liar, 0.5, &[0.0, 0.0]).is_err());
    assert!(BoundedInitialDatum::builtin("sine").is_err());
}

#[test]
fn tabulated_datum_interpolates_bilinear_functions_exactly() {
    let (lo, hi, counts) = (vec![-1.0, 0.0], vec![1.0, 2.0], vec![5, 3]);
    let f = |a: f64, b: f64| 1.0 + 0.5 * a - b + 0.25 * a * b;
    let mut values = Vec::new();
    for i in 0..5 {
        for j in 0..3 {
            values.push(f(-1.0 + 0.5 * i as f64, j as f64));
        }
    }
    let datum = BoundedInitialDatum::tabulated(TabulatedDatum { lo, hi, counts, values }).unwrap();
    assert!((datum.eval(&[0.3, 1.7]).unwrap() - f(0.3, 1.7)).abs() < 1e-14);
    // Extended by the nearest boundary value.
    assert!((datum.eval(&[3.0, 1.0]).unwrap() - f(1.0, 1.0)).abs() < 1e-14);
    let bad = TabulatedDatum {
        lo: vec![0.0],
        hi: vec![1.0],
        counts: vec![3],
        values: vec![0.0; 2],
    };
    assert!(BoundedInitialDatum::tabulated(bad).is_err());
}

#[test]
fn initial_trace_is_approached() {
    let k = grushin_sat();
    let gauss = BoundedInitialDatum::builtin("gauss").unwrap();
    let x = [0.3, 0.2];
    let target = gauss.eval(&x).unwrap();
    let gaps: Vec<f64> = [0.1, 0.03]
        .iter()
        .map(|&t| (solve_cauchy(&k, &gauss, t, &x).unwrap().value - target).abs())
        .collect();
    assert!(gaps[1] < gaps[0], "{gaps:?}");
}

#[test]
fn gaussian_semigroup_identity() {
    let k = sat(CarnotGroup::abelian(1, 1).unwrap(), 1e-10);
    for &(x, y, s, t) in &[(0.0, 0.0, 0.5, 0.5), (0.4, -0.7, 0.3, 1.2)] {
        let r = reproduction_check(&k, &[x], &[y], s, t).unwrap();
        // The fixed y-rule resolves Gaussian products to a few parts in 1e6.
        assert!(r.rel_diff() < 1e-5, "{r:?}");
    }
    // As t -> 0 the right side tends to Gamma(0, y; s, x).
    let r = reproduction_check(&k, &[0.2], &[-0.1], 0.5, 1e-3).unwrap();
    let limit = k.gamma_sat(0.0, &[-0.1], 0.5, &[0.2]).unwrap();
    assert!((r.rhs - limit).abs() < 1e-2 * limit);
    assert!(reproduction_check(&k, &[0.2], &[-0.1], 0.0, 1.0).is_err());
}

#[test]
fn grushin_reproduction_at_the_origin() {
    let k = grushin_sat();
    let r = reproduction_check(&k, &[0.0, 0.0], &[0.0, 0.0], 0.5, 0.5).unwrap();
    assert!(r.rel_diff() < 1e-3, "{r:?}");
}

#[test]
fn potential_of_zero_and_of_future_data_vanishes() {
    let k = grushin_sat();
    let (lo, hi) = ([0.0, -1.0, -1.0], [1.0, 1.0, 1.0]);
    let zero = potential_lambda(&k, |_, _| 0.0, &lo, &hi, &[2.0, 0.0, 0.0], 1e-4).unwrap();
    assert_eq!(zero.value, 0.0);
    let bump = |_: f64, x: &[f64]| (1.0 - x[0] * x[0]).max(0.0) * (1.0 - x[1] * x[1]).max(0.0);
    let future = potential_lambda(&k, bump, &lo, &hi, &[-0.5, 0.0, 0.0], 1e-4).unwrap();
    assert_eq!(future.value, 0.0);
    assert!(potential_lambda(&k, bump, &[0.0, -1.0, f64::INFINITY], &hi, &[2.0, 0.0, 0.0], 1e-4).is_err());
}

#[test]
fn potential_decays_away_from_the_support() {
    let k = grushin_sat();
    let (lo, hi) = ([0.0, -0.5, -0.5], [0.5, 0.5, 0.5]);
    let bump = |_: f64, x: &[f64]| (1.0 - 4.0 * x[0] * x[0]) * (1.0 - 4.0 * x[1] * x[1]);
    let values: Vec<f64> = [1.0, 2.0, 4.0]
        .iter()
        .map(|&d| potential_lambda(&k, bump, &lo, &hi, &[1.0, d, 0.0], 1e-3).unwrap().value)
        .collect();
    assert!(values[0] > 0.0);
    assert!(values[1] < values[0] && values[2] < values[1], "{values:?}");
}
