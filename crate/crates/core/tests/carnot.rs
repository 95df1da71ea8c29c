use hypoheat::carnot::{
    bch_group_law, bch_poly, build_split_coordinates, flow_time_one, flow_time_one_with_params,
    lift_system, CarnotGroup, KernelAvailability,
};
use hypoheat::fields::{lie_closure, GradedLieBasis, PolyVectorField};
use hypoheat::io::{engel, grushin, FieldSystem};
use hypoheat::polyalg::{parse_polynomial, q, qi, DilationWeights, Rational, WeightedPolynomial};
use hypoheat::Error;
use num_traits::Zero;
use proptest::prelude::*;

fn polys(src: &[&str], nv: usize) -> Vec<WeightedPolynomial> {
    src.iter().map(|s| parse_polynomial(s, nv).unwrap()).collect()
}

fn heisenberg() -> GradedLieBasis {
    let z = Rational::zero;
    let mut c = vec![vec![vec![z(); 3]; 3]; 3];
    c[0][1][2] = qi(1);
    c[1][0][2] = qi(-1);
    GradedLieBasis::from_structure(vec![1, 1, 2], c, 2).unwrap()
}

#[test]
fn bch_heisenberg_and_abelian() {
    let (law, inv) = bch_group_law(&heisenberg()).unwrap();
    assert_eq!(law, polys(&["x1 + x4", "x2 + x5", "x3 + x6 + 1/2 x1 x5 - 1/2 x2 x4"], 6));
    assert_eq!(inv, polys(&["-x1", "-x2", "-x3"], 3));

    let ab = GradedLieBasis::from_structure(vec![1, 1], vec![vec![vec![Rational::zero(); 2]; 2]; 2], 2)
        .unwrap();
    let (law, inv) = bch_group_law(&ab).unwrap();
    assert_eq!(law, polys(&["x1 + x3", "x2 + x4"], 4));
    assert_eq!(inv, polys(&["-x1", "-x2"], 2));
}

// Exact matrix oracle: strictly upper triangular k x k matrices.
type Mat = Vec<Vec<Rational>>;

fn mat_zero(k: usize) -> Mat {
    vec![vec![Rational::zero(); k]; k]
}

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let k = a.len();
    let mut c = mat_zero(k);
    for i in 0..k {
        for l in 0..k {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..k {
                c[i][j] += &a[i][l] * &b[l][j];
            }
        }
    }
    c
}

fn mat_add(a: &Mat, b: &Mat, s: &Rational) -> Mat {
    a.iter()
        .zip(b)
        .map(|(r, t)| r.iter().zip(t).map(|(x, y)| x + y * s).collect())
        .collect()
}

fn mat_exp(a: &Mat) -> Mat {
    let k = a.len();
    let mut out = mat_zero(k);
    let mut term = mat_zero(k);
    for i in 0..k {
        term[i][i] = qi(1);
    }
    for j in 0..k {
        out = mat_add(&out, &term, &qi(1));
        term = mat_mul(&term, a);
        term = term.iter().map(|r| r.iter().map(|x| x / qi(j as i64 + 1)).collect()).collect();
    }
    out
}

fn mat_log(m: &Mat) -> Mat {
    let k = m.len();
    let mut x = m.clone();
    for i in 0..k {
        x[i][i] -= qi(1);
    }
    let mut out = mat_zero(k);
    let mut pow = x.clone();
    for j in 1..k {
        let sign = if j % 2 == 1 { q(1, j as i64) } else { q(-1, j as i64) };
        out = mat_add(&out, &pow, &sign);
        pow = mat_mul(&pow, &x);
    }
    out
}

/// Basis `E_ij`, `i < j`, ordered by `j - i`; returns the algebra and index map.
fn upper_triangular_algebra(k: usize) -> (GradedLieBasis, Vec<(usize, usize)>) {
    let mut idx = Vec::new();
    for d in 1..k {
        for i in 0..k - d {
            idx.push((i, i + d));
        }
    }
    let n = idx.len();
    let mut c = vec![vec![vec![Rational::zero(); n]; n]; n];
    for (a, &(i, j)) in idx.iter().enumerate() {
        for (b, &(l, m)) in idx.iter().enumerate() {
            // [E_ij, E_lm] = delta_jl E_im - delta_mi E_lj
            if j == l {
                let t = idx.iter().position(|&e| e == (i, m)).unwrap();
                c[a][b][t] += qi(1);
            }
            if m == i {
                let t = idx.iter().position(|&e| e == (l, j)).unwrap();
                c[a][b][t] -= qi(1);
            }
        }
    }
    let degrees = idx.iter().map(|&(i, j)| (j - i) as u32).collect();
    (GradedLieBasis::from_structure(degrees, c, k - 1).unwrap(), idx)
}

fn check_bch_against_matrices(k: usize, a: &[Rational], b: &[Rational]) {
    let (alg, idx) = upper_triangular_algebra(k);
    let to_mat = |v: &[Rational]| {
        let mut m = mat_zero(k);
        for (c, &(i, j)) in v.iter().zip(&idx) {
            m[i][j] = c.clone();
        }
        m
    };
    let expect = mat_log(&mat_mul(&mat_exp(&to_mat(a)), &mat_exp(&to_mat(b))));
    let cst = |v: &[Rational]| -> Vec<WeightedPolynomial> {
        v.iter().map(|c| WeightedPolynomial::constant(1, c.clone())).collect()
    };
    let z = bch_poly(&alg, &cst(a), &cst(b)).unwrap();
    for (t, &(i, j)) in idx.iter().enumerate() {
        assert_eq!(z[t].constant_term(), expect[i][j], "entry ({i},{j}) for k = {k}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn bch_matches_matrix_logarithm(
        k in 3usize..=7,
        raw in prop::collection::vec((-4i64..=4, 1i64..=3), 42),
    ) {
        let n = k * (k - 1) / 2;
        let vals: Vec<Rational> = raw.iter().map(|&(a, b)| q(a, b)).collect();
        check_bch_against_matrices(k, &vals[..n], &vals[n..2 * n]);
    }
}

#[test]
fn flow_examples() {
    // a1 d1 + a2 (x1 d2) + a3 d2 with parameters a = (x3, x4, x5).
    let w = DilationWeights::new(vec![qi(1), qi(2)]).unwrap();
    let comps = polys(&["x3", "x4 x1 + x5"], 5);
    let flow = flow_time_one_with_params(&comps, &w, 3).unwrap();
    let from_zero: Vec<_> = flow
        .iter()
        .map(|p| p.substitute_values(&[(0, qi(0)), (1, qi(0))]))
        .collect();
    assert_eq!(from_zero, polys(&["x3", "x5 + 1/2 x3 x4"], 5));

    let d1 = PolyVectorField::coordinate(&w, 0);
    assert_eq!(flow_time_one(&d1).unwrap(), polys(&["x1 + 1", "x2"], 2));
    let zero = PolyVectorField::zero(&w);
    assert_eq!(flow_time_one(&zero).unwrap(), polys(&["x1", "x2"], 2));

    let bad = PolyVectorField::new(polys(&["x1", "0"], 2), w).unwrap();
    assert!(matches!(flow_time_one(&bad), Err(Error::Hypothesis(_))));
}

fn grushin_group() -> CarnotGroup {
    lift_system(&grushin()).unwrap().0
}

#[test]
fn grushin_split_coordinates() {
    let (g, report) = lift_system(&grushin()).unwrap();
    assert!(report.all_passed, "{:?}", report.checks);
    assert_eq!((report.big_n, report.p, report.step), (3, 1, 2));
    assert_eq!((report.q.as_str(), report.q_star.as_str(), report.big_q.as_str()), ("3", "1", "4"));
    assert_eq!(g.law(), polys(&["x1 + x4", "x2 + x5 + x1 x6", "x3 + x6"], 6).as_slice());
    assert_eq!(g.inverse(), polys(&["-x1", "-x2 + x1 x3", "-x3"], 3).as_slice());
    let w = g.weights().clone();
    assert_eq!(g.z_fields()[0], PolyVectorField::new(polys(&["1", "0", "0"], 3), w.clone()).unwrap());
    assert_eq!(g.z_fields()[1], PolyVectorField::new(polys(&["0", "x1", "1"], 3), w).unwrap());
    assert_eq!(g.kernel_family(), KernelAvailability::Step2);
}

#[test]
fn conv_psi_phi_examples() {
    let g = grushin_group();
    // Variables (x1, x2, y1, y2, eta).
    assert_eq!(g.conv_map(), polys(&["x3 - x1", "x4 - x2 - x1 x5", "x5"], 5).as_slice());
    assert_eq!(g.conv(&[0.0, 0.0], &[0.3, -1.2], &[0.7]), vec![0.3, -1.2, 0.7]);
    assert_eq!(g.conv(&[0.4, 0.9], &[0.4, 0.9], &[0.0]), vec![0.0, 0.0, 0.0]);
    assert_eq!(g.psi(), polys(&["x5"], 5).as_slice());
    assert_eq!(g.psi_inv(), polys(&["x5"], 5).as_slice());
    assert_eq!(g.phi_xy(), polys(&["-x5"], 5).as_slice());
    assert_eq!(g.phi_xy_eval(&[0.2, 0.1], &[0.2, 0.1], &[0.0]), vec![0.0]);
}

#[test]
fn engel_lift_is_exact_and_kernelless() {
    let (g, report) = lift_system(&engel()).unwrap();
    assert!(report.all_passed, "{:?}", report.checks);
    assert_eq!((report.big_n, report.p, report.step), (4, 1, 3));
    assert!(matches!(g.kernel_family(), KernelAvailability::Unavailable(_)));
    // Psi_{0,y} is the identity for every group.
    for (y, eta) in [([0.5, -0.2, 1.1], [0.3]), ([-1.0, 2.0, 0.1], [-0.8])] {
        assert_eq!(g.psi_eval(&[0.0; 3], &y, &eta), eta.to_vec());
    }
}

#[test]
fn group_with_two_layer_xi() {
    // {d1, x1^2 d2} with weights (1, 3): p = 2, fibres of different weight.
    let sys = FieldSystem::from_strings(&["1", "3"], &[&["1", "0"], &["0", "x1^2"]]).unwrap();
    let (g, report) = lift_system(&sys).unwrap();
    assert!(report.all_passed, "{:?}", report.checks);
    assert_eq!((g.dim(), g.p(), g.step()), (4, 2, 3));
    let x = [0.3, -0.4];
    let y = [-0.1, 0.8];
    for u in [[0.2, -0.5], [1.5, 0.7]] {
        let eta = g.psi_inv_eval(&x, &y, &u);
        let back = g.psi_eval(&x, &y, &eta);
        assert!((back[0] - u[0]).abs() < 1e-12 && (back[1] - u[1]).abs() < 1e-12);
    }
}

#[test]
fn abelian_input_needs_no_lift() {
    let sys = FieldSystem::from_strings(&["1", "1"], &[&["1", "0"], &["0", "1"]]).unwrap();
    let basis = lie_closure(&sys.fields).unwrap();
    assert!(matches!(
        build_split_coordinates(&basis, &sys.weights),
        Err(Error::NoLiftingNeeded)
    ));
    let single = FieldSystem::from_strings(&["1", "1"], &[&["1", "0"]]).unwrap();
    assert!(matches!(lift_system(&single), Err(Error::Hypothesis(_))));
}

#[test]
fn manual_abelian_lift() {
    let g = CarnotGroup::abelian(1, 1).unwrap();
    let r = g.verify().unwrap();
    assert!(r.all_passed, "{:?}", r.checks);
    assert_eq!(g.law(), polys(&["x1 + x3", "x2 + x4"], 4).as_slice());
    assert_eq!(g.kernel_family(), KernelAvailability::Abelian);
}

#[test]
fn json_roundtrip_rebuilds_the_same_group() {
    for g in [grushin_group(), lift_system(&engel()).unwrap().0] {
        let back = CarnotGroup::from_json(&g.to_json().unwrap()).unwrap();
        assert_eq!(back.law(), g.law());
        assert_eq!(back.z_fields(), g.z_fields());
        assert_eq!(back.conv_map(), g.conv_map());
        assert!(back.verify().unwrap().all_passed);
    }
}

#[test]
fn norms_are_homogeneous() {
    let g = grushin_group();
    let norms = g.norms();
    let pt = [0.7, -0.3, 1.9];
    for lambda in [0.5, 2.0, 3.7] {
        let d = g.dilate(lambda, &pt);
        assert!((norms.h(&d) - lambda * norms.h(&pt)).abs() < 1e-12);
        assert!((norms.s(&d[..2]) - lambda * norms.s(&pt[..2])).abs() < 1e-12);
        assert!((norms.nu(&d[2..]) - lambda * norms.nu(&pt[2..])).abs() < 1e-12);
    }
}

#[test]
fn phi_and_psi_identities_on_random_points() {
    let g = lift_system(&engel()).unwrap().0;
    let x = [0.3, -0.7, 0.2];
    let y = [1.1, 0.4, -0.6];
    let u = [0.9];
    let phi = g.phi_xy_eval(&x, &y, &u);
    let lhs = g.conv(&x, &y, &phi);
    let mut xu = x.to_vec();
    xu.extend(u);
    let mut y0 = y.to_vec();
    y0.push(0.0);
    let rhs = g.mul(&g.inv(&xu), &y0);
    for (a, b) in lhs.iter().zip(&rhs) {
        assert!((a - b).abs() < 1e-12);
    }
    // F(x, y, Psi^{-1}(u)) has h >= nu(u).
    let norms = g.norms();
    for uu in [[0.1], [2.0], [-5.0]] {
        let eta = g.psi_inv_eval(&x, &y, &uu);
        assert!(norms.h(&g.conv(&x, &y, &eta)) >= norms.nu(&uu) - 1e-12);
    }
}
